//! Synaptic operation counts (MAC and ACC) per layer.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ConvLayer, FcLayer, Layer, Mode, NeuronModel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OpCounts {
    pub mac: f64,
    pub acc: f64,
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            mac: self.mac + rhs.mac,
            acc: self.acc + rhs.acc,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: OpCounts) {
        *self = *self + rhs;
    }
}

pub(crate) fn check_theta(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeEntry(format!("{name} = {v}")))
    }
}

fn check_spiking(neuron: NeuronModel) -> Result<()> {
    neuron.check_mode(Mode::Snn)
}

fn bias_flag(has_bias: bool) -> f64 {
    if has_bias {
        1.0
    } else {
        0.0
    }
}

pub fn conv_ops_fnn(layer: &ConvLayer) -> OpCounts {
    let outputs = (layer.c_out * layer.h_out * layer.w_out) as f64;
    OpCounts {
        mac: outputs * (layer.c_in * layer.h_kernel * layer.w_kernel) as f64,
        acc: outputs * bias_flag(layer.has_bias),
    }
}

/// Event-driven convolution: each input spike is integrated into
/// `ceil(Hk/S) * ceil(Wk/S)` positions of every filter; biases are added to
/// every neuron at every timestep; each output spike costs one reset ACC.
/// Leaky neurons add one MAC per neuron per timestep.
pub fn conv_ops_snn(
    layer: &ConvLayer,
    theta_in: f64,
    theta_out: f64,
    timesteps: u32,
    neuron: NeuronModel,
) -> Result<OpCounts> {
    check_theta("theta_in", theta_in)?;
    check_theta("theta_out", theta_out)?;
    check_spiking(neuron)?;
    let t = timesteps as f64;
    let neurons = (layer.c_out * layer.h_out * layer.w_out) as f64;
    let fan_out = (layer.strided_taps() * layer.c_out) as f64;
    Ok(OpCounts {
        mac: if neuron.leaks() { t * neurons } else { 0.0 },
        acc: theta_in * fan_out + t * neurons * bias_flag(layer.has_bias) + theta_out,
    })
}

pub fn fc_ops_fnn(layer: &FcLayer) -> OpCounts {
    OpCounts {
        mac: (layer.n_in * layer.n_out) as f64,
        acc: layer.n_out as f64 * bias_flag(layer.has_bias),
    }
}

/// Event-driven FC layer. One input spike touches `N_out` synapses.
///
/// With `strict_paper` the published ACC expression is reproduced verbatim:
/// `theta_in * N_in * N_out + T * N_out`, which scales the per-spike cost by
/// `N_in` and drops the reset term.
pub fn fc_ops_snn(
    layer: &FcLayer,
    theta_in: f64,
    theta_out: f64,
    timesteps: u32,
    neuron: NeuronModel,
    strict_paper: bool,
) -> Result<OpCounts> {
    check_theta("theta_in", theta_in)?;
    check_theta("theta_out", theta_out)?;
    check_spiking(neuron)?;
    let t = timesteps as f64;
    let n_out = layer.n_out as f64;
    let acc = if strict_paper {
        theta_in * layer.n_in as f64 * n_out + t * n_out
    } else {
        theta_in * n_out + t * n_out * bias_flag(layer.has_bias) + theta_out
    };
    Ok(OpCounts {
        mac: if neuron.leaks() { n_out * t } else { 0.0 },
        acc,
    })
}

/// Dispatches on layer kind and mode. `theta_*` and `timesteps` are ignored
/// in FNN mode.
pub fn layer_ops(
    layer: &Layer,
    mode: Mode,
    theta_in: f64,
    theta_out: f64,
    timesteps: u32,
    neuron: NeuronModel,
    strict_paper: bool,
) -> Result<OpCounts> {
    match (layer, mode) {
        (Layer::Conv(c), Mode::Fnn) => Ok(conv_ops_fnn(c)),
        (Layer::Fc(f), Mode::Fnn) => Ok(fc_ops_fnn(f)),
        (Layer::Conv(c), Mode::Snn) => conv_ops_snn(c, theta_in, theta_out, timesteps, neuron),
        (Layer::Fc(f), Mode::Snn) => {
            fc_ops_snn(f, theta_in, theta_out, timesteps, neuron, strict_paper)
        }
    }
}

/// Accumulations of a summation readout head: every output element is added
/// once, at every timestep for spiking execution.
pub fn readout_ops(layer: &Layer, mode: Mode, timesteps: u32) -> OpCounts {
    let elements = layer.readout_elements() as f64;
    let t = match mode {
        Mode::Fnn => 1.0,
        Mode::Snn => timesteps as f64,
    };
    OpCounts {
        mac: 0.0,
        acc: elements * t,
    }
}
