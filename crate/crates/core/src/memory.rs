//! Memory-access counts per layer and inference, split into the categories
//! energy is reported in: inputs/outputs, weights, bias and potentials.
//!
//! Formal layers have no membrane potentials. Spiking layers read input
//! spikes from a FIFO, touch `C_out * Hk * Wk` weights and potentials per
//! spike, and pay a bias/potential housekeeping pass over every neuron at
//! every timestep.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ConvLayer, FcLayer, Layer, Mode};
use crate::ops::check_theta;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MemCounts {
    pub rd_in: f64,
    pub rd_weights: f64,
    pub rd_bias: f64,
    pub rd_pot: f64,
    pub wr_out: f64,
    pub wr_pot: f64,
}

impl MemCounts {
    pub fn io(&self) -> f64 {
        self.rd_in + self.wr_out
    }

    pub fn pot(&self) -> f64 {
        self.rd_pot + self.wr_pot
    }

    pub fn total(&self) -> f64 {
        self.rd_in + self.rd_weights + self.rd_bias + self.rd_pot + self.wr_out + self.wr_pot
    }
}

impl Add for MemCounts {
    type Output = MemCounts;

    fn add(self, r: MemCounts) -> MemCounts {
        MemCounts {
            rd_in: self.rd_in + r.rd_in,
            rd_weights: self.rd_weights + r.rd_weights,
            rd_bias: self.rd_bias + r.rd_bias,
            rd_pot: self.rd_pot + r.rd_pot,
            wr_out: self.wr_out + r.wr_out,
            wr_pot: self.wr_pot + r.wr_pot,
        }
    }
}

impl AddAssign for MemCounts {
    fn add_assign(&mut self, rhs: MemCounts) {
        *self = *self + rhs;
    }
}

fn check_timesteps(t: u32) -> Result<()> {
    if t == 0 {
        Err(Error::Precondition("timesteps must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub fn conv_mem_fnn(layer: &ConvLayer) -> MemCounts {
    let outputs = (layer.c_out * layer.h_out * layer.w_out) as f64;
    let taps = outputs * (layer.c_in * layer.h_kernel * layer.w_kernel) as f64;
    MemCounts {
        rd_in: taps,
        rd_weights: taps,
        rd_bias: if layer.has_bias { outputs } else { 0.0 },
        rd_pot: 0.0,
        wr_out: outputs,
        wr_pot: 0.0,
    }
}

pub fn conv_mem_snn(
    layer: &ConvLayer,
    theta_in: f64,
    theta_out: f64,
    timesteps: u32,
) -> Result<MemCounts> {
    check_theta("theta_in", theta_in)?;
    check_theta("theta_out", theta_out)?;
    check_timesteps(timesteps)?;
    let t = timesteps as f64;
    let neurons = (layer.c_out * layer.h_out * layer.w_out) as f64;
    let touched = theta_in * (layer.c_out * layer.kernel_area()) as f64;
    Ok(MemCounts {
        rd_in: theta_in,
        rd_weights: touched,
        rd_bias: if layer.has_bias { t * neurons } else { 0.0 },
        rd_pot: touched + t * neurons,
        wr_out: theta_out,
        wr_pot: touched + t * neurons,
    })
}

pub fn fc_mem_fnn(layer: &FcLayer) -> MemCounts {
    let n_out = layer.n_out as f64;
    MemCounts {
        rd_in: layer.n_in as f64,
        rd_weights: (layer.n_in * layer.n_out) as f64,
        rd_bias: if layer.has_bias { n_out } else { 0.0 },
        rd_pot: 0.0,
        wr_out: n_out,
        wr_pot: 0.0,
    }
}

pub fn fc_mem_snn(
    layer: &FcLayer,
    theta_in: f64,
    theta_out: f64,
    timesteps: u32,
) -> Result<MemCounts> {
    check_theta("theta_in", theta_in)?;
    check_theta("theta_out", theta_out)?;
    check_timesteps(timesteps)?;
    let t = timesteps as f64;
    let n_out = layer.n_out as f64;
    Ok(MemCounts {
        rd_in: theta_in,
        rd_weights: theta_in * n_out,
        rd_bias: if layer.has_bias { t * n_out } else { 0.0 },
        rd_pot: theta_in * n_out + t * n_out,
        wr_out: theta_out,
        wr_pot: theta_in * n_out + t * n_out,
    })
}

pub fn layer_mem(
    layer: &Layer,
    mode: Mode,
    theta_in: f64,
    theta_out: f64,
    timesteps: u32,
) -> Result<MemCounts> {
    match (layer, mode) {
        (Layer::Conv(c), Mode::Fnn) => Ok(conv_mem_fnn(c)),
        (Layer::Fc(f), Mode::Fnn) => Ok(fc_mem_fnn(f)),
        (Layer::Conv(c), Mode::Snn) => conv_mem_snn(c, theta_in, theta_out, timesteps),
        (Layer::Fc(f), Mode::Snn) => fc_mem_snn(f, theta_in, theta_out, timesteps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Shape;

    fn conv(c_in: usize, c_out: usize, hw: usize, k: usize, bias: bool) -> ConvLayer {
        ConvLayer::with_input(Shape::new(c_in, hw, hw), c_out, (k, k), 1, bias)
    }

    #[test]
    fn conv_fnn() {
        let m = conv_mem_fnn(&conv(3, 2, 4, 3, true));
        assert_eq!(
            (m.rd_in, m.rd_weights, m.rd_bias, m.wr_out),
            (864.0, 864.0, 32.0, 32.0)
        );
        assert_eq!(m.pot(), 0.0);
        let unit = conv_mem_fnn(&conv(1, 1, 1, 1, true));
        assert_eq!(
            (unit.rd_in, unit.rd_weights, unit.rd_bias, unit.wr_out),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert_eq!(conv_mem_fnn(&conv(3, 2, 4, 3, false)).rd_bias, 0.0);
    }

    #[test]
    fn conv_snn() {
        let m = conv_mem_snn(&conv(3, 2, 4, 3, true), 10.0, 5.0, 2).unwrap();
        assert_eq!(
            m,
            MemCounts {
                rd_in: 10.0,
                rd_weights: 180.0,
                rd_bias: 64.0,
                rd_pot: 244.0,
                wr_out: 5.0,
                wr_pot: 244.0
            }
        );
    }

    #[test]
    fn conv_snn_bias_only_timestep() {
        let m = conv_mem_snn(&conv(1, 1, 1, 1, true), 0.0, 0.0, 1).unwrap();
        assert_eq!((m.rd_pot, m.wr_pot, m.rd_bias), (1.0, 1.0, 1.0));
        assert_eq!((m.rd_in, m.rd_weights, m.wr_out), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_timesteps_is_a_precondition_error() {
        let err = conv_mem_snn(&conv(1, 1, 1, 1, true), 0.0, 0.0, 0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(fc_mem_snn(&FcLayer::new(1, 1, true), 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn fc_fnn() {
        let m = fc_mem_fnn(&FcLayer::new(8, 4, true));
        assert_eq!(
            (m.rd_in, m.rd_weights, m.rd_bias, m.wr_out),
            (8.0, 32.0, 4.0, 4.0)
        );
        let m = fc_mem_fnn(&FcLayer::new(1, 1, false));
        assert_eq!(
            (m.rd_in, m.rd_weights, m.rd_bias, m.wr_out),
            (1.0, 1.0, 0.0, 1.0)
        );
        assert_eq!(fc_mem_fnn(&FcLayer::new(512, 10, true)).rd_weights, 5120.0);
    }

    #[test]
    fn fc_snn() {
        let m = fc_mem_snn(&FcLayer::new(8, 4, true), 10.0, 3.0, 2).unwrap();
        assert_eq!(
            (m.rd_weights, m.rd_bias, m.rd_pot, m.wr_pot, m.wr_out),
            (40.0, 8.0, 48.0, 48.0, 3.0)
        );
        let m = fc_mem_snn(&FcLayer::new(1, 1, true), 0.0, 0.0, 1).unwrap();
        assert_eq!((m.rd_pot, m.wr_pot, m.rd_bias), (1.0, 1.0, 1.0));
        let m = fc_mem_snn(&FcLayer::new(1, 1, false), 1.0, 1.0, 1).unwrap();
        assert_eq!(
            (
                m.rd_in,
                m.rd_weights,
                m.rd_pot,
                m.wr_pot,
                m.wr_out,
                m.rd_bias
            ),
            (1.0, 1.0, 2.0, 2.0, 1.0, 0.0)
        );
    }
}
