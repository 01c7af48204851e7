//! Per-layer spiking activity for one inference.
//!
//! `theta[l]` is the number of spikes emitted by layer `l + 1` over a whole
//! inference (all timesteps), averaged over a dataset, so values are real.
//! `theta_in` is the input side: the number of input presentations or input
//! events delivered to the first layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{EncodingScheme, NetworkSpec};

/// Average spikes per neuron per inference.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SpikeRate(f64);

impl SpikeRate {
    pub fn new(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::NegativeEntry(format!("spike rate {rate}")));
        }
        Ok(SpikeRate(rate))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityTrace {
    pub network: String,
    pub theta_in: f64,
    pub theta: Vec<f64>,
}

impl ActivityTrace {
    /// Checks entry signs and the layer count against `spec`.
    pub fn validate(&self, spec: &NetworkSpec) -> Result<()> {
        if self.theta.len() != spec.layers.len() {
            return Err(Error::LengthMismatch {
                expected: spec.layers.len(),
                got: self.theta.len(),
            });
        }
        if !(self.theta_in.is_finite() && self.theta_in >= 0.0) {
            return Err(Error::NegativeEntry(format!(
                "theta_in = {}",
                self.theta_in
            )));
        }
        if let Some((i, v)) = self
            .theta
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NegativeEntry(format!("theta[{i}] = {v}")));
        }
        Ok(())
    }

    /// Spikes entering layer `l` (0-based): `theta_in` for the first layer.
    pub fn input_of(&self, l: usize) -> f64 {
        if l == 0 {
            self.theta_in
        } else {
            self.theta[l - 1]
        }
    }

    pub fn total_spikes(&self) -> f64 {
        self.theta.iter().sum()
    }

    /// Every entry, input side included, multiplied by `k`.
    pub fn scaled(&self, k: f64) -> ActivityTrace {
        ActivityTrace {
            network: self.network.clone(),
            theta_in: self.theta_in * k,
            theta: self.theta.iter().map(|t| t * k).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Parses a `{network, theta_in, theta}` document and validates it against
/// the target network.
pub fn load_trace(document: &str, spec: &NetworkSpec) -> Result<ActivityTrace> {
    let trace: ActivityTrace = serde_json::from_str(document)?;
    trace.validate(spec)?;
    Ok(trace)
}

/// Input values delivered to the first layer over one inference.
///
/// Static repetition presents the whole sample at each of the `T` timesteps;
/// dynamic chunking presents the sample exactly once, split across the
/// timesteps. Event data has no closed form and must be measured.
pub fn input_presentations(spec: &NetworkSpec) -> Result<f64> {
    let size = spec.input.size() as f64;
    match spec.encoding {
        EncodingScheme::StaticRepeat => Ok(size * spec.timesteps as f64),
        EncodingScheme::DynamicChunk => Ok(size),
        EncodingScheme::EventVoxel => Err(Error::MissingInputEvents),
    }
}

/// Uniform activity: every layer's neurons spike `rate` times per inference.
///
/// Neuron counts come from the executed (per-timestep) geometry. For event
/// data without a measured count, input pixels are taken to fire at the
/// same average rate.
pub fn synthesize_uniform(spec: &NetworkSpec, rate: SpikeRate) -> Result<ActivityTrace> {
    synthesize_uniform_with_input(spec, rate, None)
}

pub fn synthesize_uniform_with_input(
    spec: &NetworkSpec,
    rate: SpikeRate,
    input_events: Option<f64>,
) -> Result<ActivityTrace> {
    let theta_in = match (input_events, spec.encoding) {
        (Some(events), _) => {
            if !(events.is_finite() && events >= 0.0) {
                return Err(Error::NegativeEntry(format!("input events {events}")));
            }
            events
        }
        (None, EncodingScheme::EventVoxel) => rate.get() * spec.timestep_input().size() as f64,
        (None, _) => input_presentations(spec)?,
    };
    let theta = spec
        .execution_layers()?
        .iter()
        .map(|l| rate.get() * l.neuron_count() as f64)
        .collect();
    Ok(ActivityTrace {
        network: spec.name.clone(),
        theta_in,
        theta,
    })
}
