//! Index arithmetic for dense versus event-driven traversal.
//!
//! Dense layers walk contiguous memory with running indices (one ACC per
//! step). Event-driven convolutions compute the first affected output
//! position with two multiplications per spike, then step through the
//! kernel window.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::network::{ConvLayer, FcLayer, Layer, Mode};
use crate::ops::check_theta;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AddrCounts {
    pub mac: f64,
    pub acc: f64,
}

impl Add for AddrCounts {
    type Output = AddrCounts;

    fn add(self, rhs: AddrCounts) -> AddrCounts {
        AddrCounts {
            mac: self.mac + rhs.mac,
            acc: self.acc + rhs.acc,
        }
    }
}

impl AddAssign for AddrCounts {
    fn add_assign(&mut self, rhs: AddrCounts) {
        *self = *self + rhs;
    }
}

/// Input, output and weight indices. The weight term is `C_out * Hk * Wk`
/// without a `C_in` factor.
pub fn conv_addr_fnn(layer: &ConvLayer) -> AddrCounts {
    let input = layer.c_in * layer.h_in * layer.w_in;
    let output = layer.c_out * layer.h_out * layer.w_out;
    let weights = layer.c_out * layer.h_kernel * layer.w_kernel;
    AddrCounts {
        mac: 0.0,
        acc: (input + output + weights) as f64,
    }
}

pub fn conv_addr_snn(layer: &ConvLayer, theta_in: f64) -> Result<AddrCounts> {
    check_theta("theta_in", theta_in)?;
    Ok(AddrCounts {
        mac: 2.0 * theta_in,
        acc: theta_in * (layer.c_out * layer.kernel_area()) as f64,
    })
}

pub fn fc_addr_fnn(layer: &FcLayer) -> AddrCounts {
    AddrCounts {
        mac: 0.0,
        acc: (layer.n_in + layer.n_out) as f64,
    }
}

pub fn fc_addr_snn(layer: &FcLayer, theta_in: f64) -> Result<AddrCounts> {
    check_theta("theta_in", theta_in)?;
    Ok(AddrCounts {
        mac: 0.0,
        acc: theta_in * layer.n_out as f64,
    })
}

pub fn layer_addr(layer: &Layer, mode: Mode, theta_in: f64) -> Result<AddrCounts> {
    match (layer, mode) {
        (Layer::Conv(c), Mode::Fnn) => Ok(conv_addr_fnn(c)),
        (Layer::Fc(f), Mode::Fnn) => Ok(fc_addr_fnn(f)),
        (Layer::Conv(c), Mode::Snn) => conv_addr_snn(c, theta_in),
        (Layer::Fc(f), Mode::Snn) => fc_addr_snn(f, theta_in),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Shape;

    #[test]
    fn conv_dense() {
        let c = ConvLayer::with_input(Shape::new(3, 4, 4), 2, (3, 3), 1, true);
        assert_eq!(
            conv_addr_fnn(&c),
            AddrCounts {
                mac: 0.0,
                acc: 98.0
            }
        );
        let unit = ConvLayer::with_input(Shape::new(1, 1, 1), 1, (1, 1), 1, true);
        assert_eq!(conv_addr_fnn(&unit).acc, 3.0);
        let first = ConvLayer::with_input(Shape::new(3, 32, 32), 64, (3, 3), 1, true);
        assert_eq!(conv_addr_fnn(&first).acc, 69184.0);
    }

    #[test]
    fn conv_sparse() {
        let c = ConvLayer::with_input(Shape::new(3, 4, 4), 2, (3, 3), 1, true);
        assert_eq!(
            conv_addr_snn(&c, 10.0).unwrap(),
            AddrCounts {
                mac: 20.0,
                acc: 180.0
            }
        );
        assert_eq!(conv_addr_snn(&c, 0.0).unwrap(), AddrCounts::default());
        let unit = ConvLayer::with_input(Shape::new(1, 1, 1), 1, (1, 1), 1, true);
        assert_eq!(
            conv_addr_snn(&unit, 1.0).unwrap(),
            AddrCounts { mac: 2.0, acc: 1.0 }
        );
        assert!(conv_addr_snn(&c, -1.0).is_err());
    }

    #[test]
    fn fc_dense_and_sparse() {
        assert_eq!(fc_addr_fnn(&FcLayer::new(8, 4, true)).acc, 12.0);
        assert_eq!(fc_addr_fnn(&FcLayer::new(1, 1, true)).acc, 2.0);
        assert_eq!(fc_addr_fnn(&FcLayer::new(512, 10, true)).acc, 522.0);
        assert_eq!(
            fc_addr_snn(&FcLayer::new(8, 4, true), 10.0).unwrap().acc,
            40.0
        );
        assert_eq!(
            fc_addr_snn(&FcLayer::new(8, 4, true), 0.0).unwrap().acc,
            0.0
        );
        assert_eq!(
            fc_addr_snn(&FcLayer::new(1, 1, true), 1.0).unwrap().acc,
            1.0
        );
    }
}
