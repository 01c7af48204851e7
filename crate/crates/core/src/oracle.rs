//! Instrumented reference executors.
//!
//! Small layers are actually executed, densely or event by event, while
//! every arithmetic operation, memory touch and index computation is
//! counted. The counters are the ground truth the analytical formulas are
//! checked against.
//!
//! Event-driven counting uses a uniform per-spike fan-out: each spike scans
//! the full `Hk x Wk` window of every filter (weight read, potential
//! read-modify-write, one index step per tap) and integrates
//! `ceil(Hk/S) * ceil(Wk/S)` of those taps, regardless of where the spike
//! sits relative to the image border. `boundary_exact` counts only the taps
//! that land on real output neurons instead; it exists to quantify the gap
//! and is not expected to match the formulas.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::addressing::layer_addr;
use crate::error::{Error, Result};
use crate::memory::layer_mem;
use crate::network::{ConvLayer, FcLayer, Layer, Mode, NeuronModel, Shape};
use crate::ops::layer_ops;

/// Largest `outputs * fan-in * T` product the executors accept.
pub const MAX_INSTANCE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentedCounters {
    pub mac: u64,
    pub acc: u64,
    pub rd_in: u64,
    pub rd_weights: u64,
    pub rd_bias: u64,
    pub rd_pot: u64,
    pub wr_out: u64,
    pub wr_pot: u64,
    pub addr_mac: u64,
    pub addr_acc: u64,
}

impl InstrumentedCounters {
    /// `(category, value)` pairs in reporting order.
    pub fn categories(&self) -> [(&'static str, u64); 10] {
        [
            ("mac", self.mac),
            ("acc", self.acc),
            ("rd_in", self.rd_in),
            ("rd_weights", self.rd_weights),
            ("rd_bias", self.rd_bias),
            ("rd_pot", self.rd_pot),
            ("wr_out", self.wr_out),
            ("wr_pot", self.wr_pot),
            ("addr_mac", self.addr_mac),
            ("addr_acc", self.addr_acc),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightInit {
    /// Uniform in `[-0.5, 1.0)`, drawn from a ChaCha8 stream.
    Seeded(u64),
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutorConfig {
    pub threshold: f64,
    /// Multiplicative decay applied once per timestep by leaky neurons.
    pub leak: f64,
    pub weights: WeightInit,
    pub boundary_exact: bool,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig {
            threshold: 1.0,
            leak: 0.9,
            weights: WeightInit::Seeded(0),
            boundary_exact: false,
        }
    }
}

/// Input spikes of one inference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpikePlacement {
    /// `(timestep, channel, y, x)`
    Conv(Vec<(u32, usize, usize, usize)>),
    /// `(timestep, index)`
    Fc(Vec<(u32, usize)>),
}

impl SpikePlacement {
    pub fn len(&self) -> usize {
        match self {
            SpikePlacement::Conv(v) => v.len(),
            SpikePlacement::Fc(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn draw_weights(init: WeightInit, n: usize, stream: u64) -> Vec<f64> {
    match init {
        WeightInit::Constant(w) => vec![w; n],
        WeightInit::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let dist = Uniform::new(-0.5, 1.0);
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
    }
}

fn check_size(elements: u64) -> Result<()> {
    if elements > MAX_INSTANCE {
        Err(Error::InstanceTooLarge(elements))
    } else {
        Ok(())
    }
}

fn conv_size(layer: &ConvLayer, t: u32) -> u64 {
    (layer.c_out * layer.h_out * layer.w_out * layer.c_in * layer.kernel_area()) as u64
        * t.max(1) as u64
}

fn check_conv_shape(layer: &ConvLayer) -> Result<()> {
    let dims = [
        layer.c_in,
        layer.c_out,
        layer.h_in,
        layer.w_in,
        layer.h_kernel,
        layer.w_kernel,
        layer.stride,
    ];
    if dims.contains(&0) {
        return Err(Error::Precondition("layer shapes must be inferred".into()));
    }
    Ok(())
}

/// Top and left padding for "same" convolution.
fn padding(layer: &ConvLayer) -> (usize, usize) {
    let total =
        |out: usize, k: usize, inp: usize| ((out - 1) * layer.stride + k).saturating_sub(inp);
    (
        total(layer.h_out, layer.h_kernel, layer.h_in) / 2,
        total(layer.w_out, layer.w_kernel, layer.w_in) / 2,
    )
}

/// Canonical dense loop nest: output position, input channel, kernel tap.
///
/// The input index steps once per streamed input element, the weight index
/// once per (filter, tap) and the output index once per output.
pub fn run_dense_conv(
    layer: &ConvLayer,
    input: &[f64],
    config: &ExecutorConfig,
) -> Result<(InstrumentedCounters, Vec<f64>)> {
    check_conv_shape(layer)?;
    check_size(conv_size(layer, 1))?;
    let in_shape = layer.input_shape();
    if input.len() != in_shape.size() {
        return Err(Error::Precondition(format!(
            "input has {} values, layer expects {}",
            input.len(),
            in_shape.size()
        )));
    }
    let (kh, kw, s) = (layer.h_kernel, layer.w_kernel, layer.stride);
    let weights = draw_weights(config.weights, layer.c_out * layer.c_in * kh * kw, 0);
    let biases = draw_weights(config.weights, layer.c_out, 1);
    let (pt, pl) = padding(layer);
    let mut n = InstrumentedCounters {
        addr_acc: (in_shape.size() + layer.c_out * kh * kw) as u64,
        ..Default::default()
    };
    let mut out = vec![0.0; layer.c_out * layer.h_out * layer.w_out];
    for co in 0..layer.c_out {
        for oy in 0..layer.h_out {
            for ox in 0..layer.w_out {
                let mut sum = 0.0;
                for ci in 0..layer.c_in {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            n.rd_in += 1;
                            n.rd_weights += 1;
                            n.mac += 1;
                            let iy = (oy * s + ky).checked_sub(pt).filter(|&y| y < layer.h_in);
                            let ix = (ox * s + kx).checked_sub(pl).filter(|&x| x < layer.w_in);
                            // padded taps read a zero from the border buffer
                            if let (Some(iy), Some(ix)) = (iy, ix) {
                                let w = weights[((co * layer.c_in + ci) * kh + ky) * kw + kx];
                                sum += w * input[(ci * layer.h_in + iy) * layer.w_in + ix];
                            }
                        }
                    }
                }
                if layer.has_bias {
                    n.rd_bias += 1;
                    n.acc += 1;
                    sum += biases[co];
                }
                n.wr_out += 1;
                n.addr_acc += 1;
                out[(co * layer.h_out + oy) * layer.w_out + ox] = sum.max(0.0);
            }
        }
    }
    Ok((n, out))
}

fn check_spiking(neuron: NeuronModel, t: u32) -> Result<()> {
    neuron.check_mode(Mode::Snn)?;
    if t == 0 {
        return Err(Error::Precondition("timesteps must be at least 1".into()));
    }
    Ok(())
}

/// Membrane state of a layer's output neurons.
struct Neurons<'a> {
    pot: Vec<f64>,
    biases: Option<Vec<f64>>,
    neuron: NeuronModel,
    config: &'a ExecutorConfig,
}

impl Neurons<'_> {
    /// Per-timestep housekeeping: leak, bias, one potential read-modify-write.
    fn tick(&mut self, n: &mut InstrumentedCounters, per_bias: usize) {
        for (i, p) in self.pot.iter_mut().enumerate() {
            n.rd_pot += 1;
            if self.neuron.leaks() {
                n.mac += 1;
                *p *= self.config.leak;
            }
            if let Some(b) = &self.biases {
                n.rd_bias += 1;
                n.acc += 1;
                *p += b[i / per_bias];
            }
            n.wr_pot += 1;
        }
    }

    /// Threshold crossings emit a spike and reset to zero.
    fn fire(&mut self, n: &mut InstrumentedCounters) -> u64 {
        let mut fired = 0;
        for p in &mut self.pot {
            if *p >= self.config.threshold {
                n.wr_out += 1;
                n.acc += 1;
                *p = 0.0;
                fired += 1;
            }
        }
        fired
    }
}

/// Event-driven execution of a convolution over `timesteps` steps. Returns
/// the counters and the number of output spikes.
pub fn run_event_conv(
    layer: &ConvLayer,
    spikes: &[(u32, usize, usize, usize)],
    timesteps: u32,
    neuron: NeuronModel,
    config: &ExecutorConfig,
) -> Result<(InstrumentedCounters, u64)> {
    check_conv_shape(layer)?;
    check_spiking(neuron, timesteps)?;
    check_size(conv_size(layer, timesteps))?;
    if let Some(bad) = spikes.iter().find(|&&(t, c, y, x)| {
        t >= timesteps || c >= layer.c_in || y >= layer.h_in || x >= layer.w_in
    }) {
        return Err(Error::InvalidPlacement(format!(
            "{bad:?} outside the layer input or timestep range"
        )));
    }
    let (kh, kw, s) = (layer.h_kernel, layer.w_kernel, layer.stride);
    let weights = draw_weights(config.weights, layer.c_out * layer.c_in * kh * kw, 0);
    let plane = layer.h_out * layer.w_out;
    let mut state = Neurons {
        pot: vec![0.0; layer.c_out * plane],
        biases: layer
            .has_bias
            .then(|| draw_weights(config.weights, layer.c_out, 1)),
        neuron,
        config,
    };
    let (pt, pl) = padding(layer);
    let uniform_taps = layer.strided_taps() as u64;
    let mut n = InstrumentedCounters::default();
    let mut fired = 0;
    for t in 0..timesteps {
        state.tick(&mut n, plane);
        for &(_, ci, y, x) in spikes.iter().filter(|sp| sp.0 == t) {
            n.rd_in += 1;
            n.addr_mac += 2;
            for co in 0..layer.c_out {
                let mut integrated = 0;
                for ky in 0..kh {
                    for kx in 0..kw {
                        n.rd_weights += 1;
                        n.rd_pot += 1;
                        n.wr_pot += 1;
                        n.addr_acc += 1;
                        // output (oy, ox) sees this input through tap (ky, kx)
                        let oy = (y + pt)
                            .checked_sub(ky)
                            .filter(|v| v % s == 0)
                            .map(|v| v / s);
                        let ox = (x + pl)
                            .checked_sub(kx)
                            .filter(|v| v % s == 0)
                            .map(|v| v / s);
                        if let (Some(oy), Some(ox)) = (oy, ox) {
                            if oy < layer.h_out && ox < layer.w_out {
                                let w = weights[((co * layer.c_in + ci) * kh + ky) * kw + kx];
                                state.pot[co * plane + oy * layer.w_out + ox] += w;
                                integrated += 1;
                            }
                        }
                    }
                }
                n.acc += if config.boundary_exact {
                    integrated
                } else {
                    uniform_taps
                };
            }
        }
        fired += state.fire(&mut n);
    }
    Ok((n, fired))
}

pub fn run_dense_fc(
    layer: &FcLayer,
    input: &[f64],
    config: &ExecutorConfig,
) -> Result<(InstrumentedCounters, Vec<f64>)> {
    check_size((layer.n_in * layer.n_out) as u64)?;
    if input.len() != layer.n_in {
        return Err(Error::Precondition(format!(
            "input has {} values, layer expects {}",
            input.len(),
            layer.n_in
        )));
    }
    let weights = draw_weights(config.weights, layer.n_in * layer.n_out, 0);
    let biases = draw_weights(config.weights, layer.n_out, 1);
    let mut n = InstrumentedCounters::default();
    let mut out = vec![0.0; layer.n_out];
    // each input is read once and held while the output index sweeps
    for (i, &x) in input.iter().enumerate() {
        n.rd_in += 1;
        n.addr_acc += 1;
        for (o, acc) in out.iter_mut().enumerate() {
            n.rd_weights += 1;
            n.mac += 1;
            *acc += weights[i * layer.n_out + o] * x;
        }
    }
    for (o, v) in out.iter_mut().enumerate() {
        if layer.has_bias {
            n.rd_bias += 1;
            n.acc += 1;
            *v += biases[o];
        }
        n.wr_out += 1;
        n.addr_acc += 1;
        *v = v.max(0.0);
    }
    Ok((n, out))
}

pub fn run_event_fc(
    layer: &FcLayer,
    spikes: &[(u32, usize)],
    timesteps: u32,
    neuron: NeuronModel,
    config: &ExecutorConfig,
) -> Result<(InstrumentedCounters, u64)> {
    check_spiking(neuron, timesteps)?;
    check_size((layer.n_in * layer.n_out) as u64 * timesteps as u64)?;
    if let Some(bad) = spikes
        .iter()
        .find(|&&(t, i)| t >= timesteps || i >= layer.n_in)
    {
        return Err(Error::InvalidPlacement(format!(
            "{bad:?} outside the layer input or timestep range"
        )));
    }
    let weights = draw_weights(config.weights, layer.n_in * layer.n_out, 0);
    let mut state = Neurons {
        pot: vec![0.0; layer.n_out],
        biases: layer
            .has_bias
            .then(|| draw_weights(config.weights, layer.n_out, 1)),
        neuron,
        config,
    };
    let mut n = InstrumentedCounters::default();
    let mut fired = 0;
    for t in 0..timesteps {
        state.tick(&mut n, 1);
        for &(_, i) in spikes.iter().filter(|sp| sp.0 == t) {
            n.rd_in += 1;
            for o in 0..layer.n_out {
                n.rd_weights += 1;
                n.rd_pot += 1;
                n.acc += 1;
                n.wr_pot += 1;
                n.addr_acc += 1;
                state.pot[o] += weights[i * layer.n_out + o];
            }
        }
        fired += state.fire(&mut n);
    }
    Ok((n, fired))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub category: String,
    pub analytical: f64,
    pub measured: u64,
    pub equal: bool,
}

/// A layer executed once in one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub layer: Layer,
    pub mode: Mode,
    pub timesteps: u32,
    pub neuron: NeuronModel,
    /// Input spikes (SNN only).
    pub spikes: Option<SpikePlacement>,
}

fn seeded_input(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// Runs the matching executor and compares every counter with the
/// analytical modules fed the executor's own output spike count.
pub fn verify_layer(
    instance: &Instance,
    config: &ExecutorConfig,
    strict_paper: bool,
) -> Result<Vec<Verdict>> {
    let Instance {
        layer,
        mode,
        timesteps: t,
        neuron,
        spikes,
    } = instance;
    let (measured, theta_in, theta_out) = match (layer, mode, spikes) {
        (Layer::Conv(c), Mode::Fnn, _) => {
            let input = seeded_input(c.input_shape().size(), 7);
            (run_dense_conv(c, &input, config)?.0, 0, 0)
        }
        (Layer::Fc(f), Mode::Fnn, _) => {
            let input = seeded_input(f.n_in, 7);
            (run_dense_fc(f, &input, config)?.0, 0, 0)
        }
        (Layer::Conv(c), Mode::Snn, Some(SpikePlacement::Conv(sp))) => {
            let (n, out) = run_event_conv(c, sp, *t, *neuron, config)?;
            (n, sp.len(), out)
        }
        (Layer::Fc(f), Mode::Snn, Some(SpikePlacement::Fc(sp))) => {
            let (n, out) = run_event_fc(f, sp, *t, *neuron, config)?;
            (n, sp.len(), out)
        }
        _ => {
            return Err(Error::InvalidPlacement(
                "spiking runs need a placement matching the layer kind".into(),
            ))
        }
    };
    let (ti, to) = (theta_in as f64, theta_out as f64);
    let ops = layer_ops(layer, *mode, ti, to, *t, *neuron, strict_paper)?;
    let mem = layer_mem(layer, *mode, ti, to, *t)?;
    let addr = layer_addr(layer, *mode, ti)?;
    let analytical = [
        ops.mac,
        ops.acc,
        mem.rd_in,
        mem.rd_weights,
        mem.rd_bias,
        mem.rd_pot,
        mem.wr_out,
        mem.wr_pot,
        addr.mac,
        addr.acc,
    ];
    Ok(measured
        .categories()
        .iter()
        .zip(analytical)
        .map(|(&(category, m), a)| Verdict {
            category: category.to_string(),
            analytical: a,
            measured: m,
            equal: a == m as f64,
        })
        .collect())
}

pub const DENSITIES: [f64; 4] = [0.0, 0.1, 0.5, 1.0];

/// A random small instance: channels up to 4, spatial extents up to 8,
/// up to 3 timesteps, spike density drawn from [`DENSITIES`].
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let conv = rng.gen_bool(0.5);
    let mode = if rng.gen_bool(0.5) {
        Mode::Fnn
    } else {
        Mode::Snn
    };
    let timesteps = rng.gen_range(1..=3u32);
    let neuron = match mode {
        Mode::Fnn => NeuronModel::Relu,
        Mode::Snn if rng.gen_bool(0.5) => NeuronModel::If,
        Mode::Snn => NeuronModel::Lif,
    };
    let density = DENSITIES[rng.gen_range(0..DENSITIES.len())];
    let bias = rng.gen_bool(0.7);
    let layer = if conv {
        let shape = Shape::new(
            rng.gen_range(1..=4),
            rng.gen_range(1..=8),
            rng.gen_range(1..=8),
        );
        let kh = [1, 3, 5][rng.gen_range(0..3)];
        let kw = if rng.gen_bool(0.8) {
            kh
        } else {
            [1, 3][rng.gen_range(0..2)]
        };
        Layer::Conv(ConvLayer::with_input(
            shape,
            rng.gen_range(1..=4),
            (kh, kw),
            rng.gen_range(1..=2),
            bias,
        ))
    } else {
        Layer::Fc(FcLayer::new(
            rng.gen_range(1..=64),
            rng.gen_range(1..=16),
            bias,
        ))
    };
    let spikes = (mode == Mode::Snn).then(|| match &layer {
        Layer::Conv(c) => {
            let mut v = Vec::new();
            for t in 0..timesteps {
                for ch in 0..c.c_in {
                    for y in 0..c.h_in {
                        for x in 0..c.w_in {
                            if rng.gen_bool(density) {
                                v.push((t, ch, y, x));
                            }
                        }
                    }
                }
            }
            SpikePlacement::Conv(v)
        }
        Layer::Fc(f) => SpikePlacement::Fc(
            (0..timesteps)
                .flat_map(|t| (0..f.n_in).map(move |i| (t, i)))
                .filter(|_| rng.gen_bool(density))
                .collect(),
        ),
    });
    Instance {
        layer,
        mode,
        timesteps,
        neuron,
        spikes,
    }
}

/// One failed comparison of a randomized validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub case: usize,
    pub layer: String,
    pub mode: Mode,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub cases: usize,
    pub comparisons: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ValidationSummary {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn describe(layer: &Layer) -> String {
    match layer {
        Layer::Conv(c) => format!(
            "conv {}x{}x{} -> {} k{}x{} s{}{}",
            c.c_in,
            c.h_in,
            c.w_in,
            c.c_out,
            c.h_kernel,
            c.w_kernel,
            c.stride,
            if c.has_bias { "" } else { " nobias" }
        ),
        Layer::Fc(f) => format!(
            "fc {} -> {}{}",
            f.n_in,
            f.n_out,
            if f.has_bias { "" } else { " nobias" }
        ),
    }
}

/// Verifies `cases` seeded random instances. Each case draws its own
/// executor weights from the same seed stream.
pub fn run_validation(seed: u64, cases: usize, strict_paper: bool) -> Result<ValidationSummary> {
    if cases == 0 {
        return Err(Error::Precondition("at least one case is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = ValidationSummary {
        cases,
        ..Default::default()
    };
    for case in 0..cases {
        let instance = random_instance(&mut rng);
        let config = ExecutorConfig {
            weights: WeightInit::Seeded(rng.gen()),
            ..Default::default()
        };
        for verdict in verify_layer(&instance, &config, strict_paper)? {
            summary.comparisons += 1;
            if !verdict.equal {
                summary.mismatches.push(Mismatch {
                    case,
                    layer: describe(&instance.layer),
                    mode: instance.mode,
                    verdict,
                });
            }
        }
    }
    Ok(summary)
}
