//! Energy pricing: technology constants, SRAM access-energy interpolation,
//! per-layer memory sizing and the per-layer / per-network breakdowns.
//!
//! Energies are computed in pJ and reported in nJ. Reads and writes to the
//! same memory cost the same.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::activity::ActivityTrace;
use crate::addressing::{layer_addr, AddrCounts};
use crate::error::{Error, Result};
use crate::memory::{layer_mem, MemCounts};
use crate::network::{EncodingScheme, Layer, Mode, NetworkSpec};
use crate::ops::{layer_ops, readout_ops, OpCounts};

/// Pricing for memory sizes outside the interpolation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangePolicy {
    /// Hold the nearest endpoint value.
    #[default]
    Clamp,
    /// Continue the nearest segment's slope.
    Extrapolate,
}

impl fmt::Display for RangePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RangePolicy::Clamp => "clamp",
            RangePolicy::Extrapolate => "extrapolate",
        })
    }
}

impl FromStr for RangePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clamp" => Ok(RangePolicy::Clamp),
            "extrapolate" => Ok(RangePolicy::Extrapolate),
            other => Err(Error::InvalidProfile(format!("unknown policy `{other}`"))),
        }
    }
}

pub const DEFAULT_FIFO_DEPTH: usize = 1000;

/// Elementary operation energies and the SRAM access-energy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechProfile {
    pub e_add_pj: f64,
    pub e_mul_pj: f64,
    pub word_bits: u32,
    /// `(size_bytes, energy_pj)` pairs, strictly increasing in both.
    pub sram_points: Vec<(f64, f64)>,
    #[serde(default)]
    pub policy: RangePolicy,
    #[serde(default = "default_fifo_depth")]
    pub fifo_depth: usize,
}

fn default_fifo_depth() -> usize {
    DEFAULT_FIFO_DEPTH
}

impl Default for TechProfile {
    fn default() -> Self {
        TechProfile::cmos_45nm()
    }
}

impl TechProfile {
    /// 45nm CMOS, 32-bit integer arithmetic.
    pub fn cmos_45nm() -> Self {
        TechProfile {
            e_add_pj: 0.1,
            e_mul_pj: 3.1,
            word_bits: 32,
            sram_points: vec![
                (8.0 * 1024.0, 10.0),
                (32.0 * 1024.0, 20.0),
                (1024.0 * 1024.0, 100.0),
            ],
            policy: RangePolicy::Clamp,
            fifo_depth: DEFAULT_FIFO_DEPTH,
        }
    }

    pub fn from_json(document: &str) -> Result<Self> {
        let profile: TechProfile =
            serde_json::from_str(document).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        if !(self.e_add_pj > 0.0 && self.e_add_pj.is_finite()) {
            return bad(format!("e_add_pj must be positive, got {}", self.e_add_pj));
        }
        if !(self.e_mul_pj > 0.0 && self.e_mul_pj.is_finite()) {
            return bad(format!("e_mul_pj must be positive, got {}", self.e_mul_pj));
        }
        if self.word_bits == 0 {
            return bad("word_bits must be positive".into());
        }
        if self.fifo_depth == 0 {
            return bad("fifo_depth must be positive".into());
        }
        if self.sram_points.len() < 2 {
            return bad("sram_points needs at least two entries".into());
        }
        if self
            .sram_points
            .iter()
            .any(|&(b, e)| !(b > 0.0 && b.is_finite() && e.is_finite()))
        {
            return bad("sram_points must be finite with positive sizes".into());
        }
        if self
            .sram_points
            .windows(2)
            .any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1))
        {
            return bad("sram_points must be strictly increasing in size and energy".into());
        }
        Ok(())
    }

    pub fn with_policy(mut self, policy: RangePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_fifo_depth(mut self, depth: usize) -> Self {
        self.fifo_depth = depth;
        self
    }

    pub fn word_bytes(&self) -> f64 {
        self.word_bits as f64 / 8.0
    }

    /// One multiply-accumulate: an addition plus a multiplication.
    pub fn mac_pj(&self) -> f64 {
        self.e_add_pj + self.e_mul_pj
    }

    pub fn in_table_range(&self, size_bytes: f64) -> bool {
        let lo = self.sram_points[0].0;
        let hi = self.sram_points[self.sram_points.len() - 1].0;
        (lo..=hi).contains(&size_bytes)
    }
}

/// Energy of one access to an SRAM of `size_bytes`, by piecewise-linear
/// interpolation over the profile's table.
pub fn sram_access_energy(profile: &TechProfile, size_bytes: f64) -> Result<f64> {
    if size_bytes.is_nan() || size_bytes <= 0.0 {
        return Err(Error::NonPositiveSize(size_bytes));
    }
    let pts = &profile.sram_points;
    let lerp = |a: (f64, f64), b: (f64, f64), x: f64| a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0);
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if size_bytes <= first.0 {
        return Ok(match profile.policy {
            RangePolicy::Clamp => first.1,
            // a steep first segment could go negative far below the table
            RangePolicy::Extrapolate => lerp(pts[0], pts[1], size_bytes).max(0.0),
        });
    }
    if size_bytes >= last.0 {
        return Ok(match profile.policy {
            RangePolicy::Clamp => last.1,
            RangePolicy::Extrapolate => lerp(pts[pts.len() - 2], last, size_bytes),
        });
    }
    let i = pts.partition_point(|p| p.0 <= size_bytes);
    Ok(lerp(pts[i - 1], pts[i], size_bytes))
}

/// Bytes of each memory a layer accesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemorySizing {
    pub mode: Mode,
    pub weights_bytes: f64,
    pub bias_bytes: f64,
    pub pot_bytes: f64,
    pub in_bytes: f64,
    pub out_bytes: f64,
}

impl MemorySizing {
    fn sizes(&self) -> [f64; 5] {
        [
            self.weights_bytes,
            self.bias_bytes,
            self.pot_bytes,
            self.in_bytes,
            self.out_bytes,
        ]
    }
}

/// Weights, biases and potentials each live in a layer-local SRAM. Formal
/// layers keep full input and output feature maps; spiking layers exchange
/// spikes through FIFOs of `profile.fifo_depth` words.
pub fn layer_memory_sizes(layer: &Layer, mode: Mode, profile: &TechProfile) -> MemorySizing {
    let word = profile.word_bytes();
    let (pot_bytes, in_bytes, out_bytes) = match mode {
        Mode::Fnn => (
            0.0,
            layer.input_size() as f64 * word,
            layer.neuron_count() as f64 * word,
        ),
        Mode::Snn => {
            let fifo = profile.fifo_depth as f64 * word;
            (layer.neuron_count() as f64 * word, fifo, fifo)
        }
    };
    MemorySizing {
        mode,
        weights_bytes: layer.weight_count() as f64 * word,
        bias_bytes: layer.bias_count() as f64 * word,
        pot_bytes,
        in_bytes,
        out_bytes,
    }
}

/// All counts of one layer in one execution mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerCounts {
    pub mode: Mode,
    pub ops: OpCounts,
    pub mem: MemCounts,
    pub addr: AddrCounts,
}

/// Energy per category, in nJ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub mem_pot: f64,
    pub mem_weights: f64,
    pub mem_bias: f64,
    pub mem_io: f64,
    pub ops: f64,
    pub addressing: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// Builds a breakdown whose total is the sum of the parts.
    pub fn from_parts(
        mem_pot: f64,
        mem_weights: f64,
        mem_bias: f64,
        mem_io: f64,
        ops: f64,
        addressing: f64,
    ) -> Self {
        EnergyBreakdown {
            mem_pot,
            mem_weights,
            mem_bias,
            mem_io,
            ops,
            addressing,
            total: mem_pot + mem_weights + mem_bias + mem_io + ops + addressing,
        }
    }

    pub fn memory(&self) -> f64 {
        self.mem_pot + self.mem_weights + self.mem_bias + self.mem_io
    }
}

impl Add for EnergyBreakdown {
    type Output = EnergyBreakdown;

    fn add(self, r: EnergyBreakdown) -> EnergyBreakdown {
        EnergyBreakdown::from_parts(
            self.mem_pot + r.mem_pot,
            self.mem_weights + r.mem_weights,
            self.mem_bias + r.mem_bias,
            self.mem_io + r.mem_io,
            self.ops + r.ops,
            self.addressing + r.addressing,
        )
    }
}

const PJ_PER_NJ: f64 = 1000.0;

fn price(profile: &TechProfile, accesses: f64, size_bytes: f64) -> Result<f64> {
    if accesses == 0.0 {
        return Ok(0.0);
    }
    Ok(accesses * sram_access_energy(profile, size_bytes)?)
}

pub fn layer_energy(
    counts: &LayerCounts,
    sizing: &MemorySizing,
    profile: &TechProfile,
) -> Result<EnergyBreakdown> {
    if counts.mode != sizing.mode {
        return Err(Error::InconsistentMode {
            counts: counts.mode.to_string(),
            sizing: sizing.mode.to_string(),
        });
    }
    let m = &counts.mem;
    let mem_pot = price(profile, m.rd_pot + m.wr_pot, sizing.pot_bytes)?;
    let mem_weights = price(profile, m.rd_weights, sizing.weights_bytes)?;
    let mem_bias = price(profile, m.rd_bias, sizing.bias_bytes)?;
    let mem_io =
        price(profile, m.rd_in, sizing.in_bytes)? + price(profile, m.wr_out, sizing.out_bytes)?;
    let ops = profile.mac_pj() * counts.ops.mac + profile.e_add_pj * counts.ops.acc;
    let addressing = profile.mac_pj() * counts.addr.mac + profile.e_add_pj * counts.addr.acc;
    Ok(EnergyBreakdown::from_parts(
        mem_pot / PJ_PER_NJ,
        mem_weights / PJ_PER_NJ,
        mem_bias / PJ_PER_NJ,
        mem_io / PJ_PER_NJ,
        ops / PJ_PER_NJ,
        addressing / PJ_PER_NJ,
    ))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateOptions {
    /// Reproduce the published FC spiking ACC expression verbatim.
    pub strict_paper: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerRole {
    /// First spiking layer fed by analog (non-event) input.
    Encoding,
    Hidden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub index: usize,
    pub label: String,
    pub role: LayerRole,
    pub theta_in: f64,
    pub theta_out: f64,
    pub counts: LayerCounts,
    pub sizing: MemorySizing,
    pub energy: EnergyBreakdown,
    /// Some accessed memory fell outside the interpolation table.
    pub out_of_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub network: String,
    pub mode: Mode,
    pub timesteps: u32,
    pub policy: RangePolicy,
    pub layers: Vec<LayerReport>,
    pub total: EnergyBreakdown,
}

impl EnergyReport {
    pub fn out_of_range_layers(&self) -> Vec<&str> {
        self.layers
            .iter()
            .filter(|l| l.out_of_range)
            .map(|l| l.label.as_str())
            .collect()
    }

    pub fn total_ops(&self) -> OpCounts {
        self.layers
            .iter()
            .fold(OpCounts::default(), |a, l| a + l.counts.ops)
    }

    pub fn total_mem(&self) -> MemCounts {
        self.layers
            .iter()
            .fold(MemCounts::default(), |a, l| a + l.counts.mem)
    }

    pub fn total_addr(&self) -> AddrCounts {
        self.layers
            .iter()
            .fold(AddrCounts::default(), |a, l| a + l.counts.addr)
    }
}

/// Per-layer counts of `spec` in its own mode.
///
/// Spiking layers use the per-timestep execution geometry and take their
/// activity from `trace`; the trace is ignored for formal networks.
pub fn network_counts(
    spec: &NetworkSpec,
    trace: Option<&ActivityTrace>,
    options: EstimateOptions,
) -> Result<Vec<(Layer, LayerCounts, f64, f64)>> {
    spec.neuron.check_mode(spec.mode)?;
    let layers = spec.execution_layers()?;
    let t = spec.effective_timesteps();
    let trace = match spec.mode {
        Mode::Fnn => None,
        Mode::Snn => {
            let trace = trace.ok_or_else(|| {
                Error::Precondition("spiking estimation needs an activity trace".into())
            })?;
            trace.validate(spec)?;
            Some(trace)
        }
    };
    layers
        .into_iter()
        .enumerate()
        .map(|(i, layer)| {
            let (theta_in, theta_out) =
                trace.map_or((0.0, 0.0), |tr| (tr.input_of(i), tr.theta[i]));
            let ops = layer_ops(
                &layer,
                spec.mode,
                theta_in,
                theta_out,
                t,
                spec.neuron,
                options.strict_paper,
            )? + readout_ops(&layer, spec.mode, t);
            let counts = LayerCounts {
                mode: spec.mode,
                ops,
                mem: layer_mem(&layer, spec.mode, theta_in, theta_out, t)?,
                addr: layer_addr(&layer, spec.mode, theta_in)?,
            };
            Ok((layer, counts, theta_in, theta_out))
        })
        .collect()
}

/// Energy of every layer of `spec` plus the aggregate, in a fixed layer
/// order so floating-point totals are reproducible.
pub fn network_energy(
    spec: &NetworkSpec,
    trace: Option<&ActivityTrace>,
    profile: &TechProfile,
    options: EstimateOptions,
) -> Result<EnergyReport> {
    profile.validate()?;
    let mut layers = Vec::with_capacity(spec.layers.len());
    let mut kind_index = std::collections::HashMap::new();
    for (i, (layer, counts, theta_in, theta_out)) in network_counts(spec, trace, options)?
        .into_iter()
        .enumerate()
    {
        let sizing = layer_memory_sizes(&layer, spec.mode, profile);
        let energy = layer_energy(&counts, &sizing, profile)?;
        let m = &counts.mem;
        let used = [m.rd_weights, m.rd_bias, m.pot(), m.rd_in, m.wr_out];
        let out_of_range = sizing
            .sizes()
            .iter()
            .zip(used)
            .any(|(&bytes, n)| n > 0.0 && !profile.in_table_range(bytes));
        let role =
            if i == 0 && spec.mode == Mode::Snn && spec.encoding != EncodingScheme::EventVoxel {
                LayerRole::Encoding
            } else {
                LayerRole::Hidden
            };
        let n = kind_index.entry(layer.kind()).or_insert(0usize);
        *n += 1;
        layers.push(LayerReport {
            index: i,
            label: format!("{}{}", layer.kind(), n),
            role,
            theta_in,
            theta_out,
            counts,
            sizing,
            energy,
            out_of_range,
        });
    }
    let total = layers
        .iter()
        .fold(EnergyBreakdown::default(), |acc, l| acc + l.energy);
    Ok(EnergyReport {
        network: spec.name.clone(),
        mode: spec.mode,
        timesteps: spec.effective_timesteps(),
        policy: profile.policy,
        layers,
        total,
    })
}

/// `E_FNN / E_SNN` for two reports of the same architecture.
pub fn compare(fnn: &EnergyReport, snn: &EnergyReport) -> Result<f64> {
    if fnn.layers.len() != snn.layers.len() {
        return Err(Error::Precondition(format!(
            "reports cover different architectures ({} vs {} layers)",
            fnn.layers.len(),
            snn.layers.len()
        )));
    }
    if snn.total.total == 0.0 {
        return Err(Error::ZeroSnnTotal);
    }
    Ok(fnn.total.total / snn.total.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ConvLayer, FcLayer, Shape};

    const KB: f64 = 1024.0;
    const MB: f64 = 1024.0 * 1024.0;

    fn p() -> TechProfile {
        TechProfile::cmos_45nm()
    }

    #[test]
    fn table_points_are_exact() {
        assert_eq!(sram_access_energy(&p(), 8.0 * KB).unwrap(), 10.0);
        assert_eq!(sram_access_energy(&p(), 32.0 * KB).unwrap(), 20.0);
        assert_eq!(sram_access_energy(&p(), MB).unwrap(), 100.0);
        assert_eq!(sram_access_energy(&p(), 20.0 * KB).unwrap(), 15.0);
    }

    #[test]
    fn out_of_range_policies() {
        assert_eq!(sram_access_energy(&p(), 2.0 * MB).unwrap(), 100.0);
        assert_eq!(sram_access_energy(&p(), 1.0).unwrap(), 10.0);
        let ex = p().with_policy(RangePolicy::Extrapolate);
        // 100 + 1 MiB * 80 pJ / 992 KiB
        let expected = 100.0 + 80.0 * 1024.0 / 992.0;
        assert!((sram_access_energy(&ex, 2.0 * MB).unwrap() - expected).abs() < 1e-9);
        // below the table: first segment slope, 10 pJ per 24 KiB
        let below = sram_access_energy(&ex, 4.0 * KB).unwrap();
        assert!((below - (10.0 - 4.0 * 10.0 / 24.0)).abs() < 1e-12);
    }

    #[test]
    fn non_positive_size_rejected() {
        assert!(matches!(
            sram_access_energy(&p(), 0.0),
            Err(Error::NonPositiveSize(_))
        ));
        assert!(sram_access_energy(&p(), -3.0).is_err());
    }

    #[test]
    fn mac_is_add_plus_mul() {
        assert_eq!(p().mac_pj(), 3.2);
    }

    #[test]
    fn profile_validation() {
        let mut bad = p();
        bad.sram_points = vec![(8.0 * KB, 10.0), (4.0 * KB, 20.0)];
        assert!(bad.validate().is_err());
        let mut bad = p();
        bad.e_add_pj = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = p();
        bad.word_bits = 0;
        assert!(bad.validate().is_err());
        let json = p().to_json();
        assert_eq!(TechProfile::from_json(&json).unwrap(), p());
    }

    #[test]
    fn profile_json_defaults() {
        let doc = r#"{"e_add_pj":0.1,"e_mul_pj":3.1,"word_bits":32,
                      "sram_points":[[8192,10],[32768,20],[1048576,100]]}"#;
        let prof = TechProfile::from_json(doc).unwrap();
        assert_eq!(prof, p());
    }

    #[test]
    fn sizing_examples() {
        let conv = Layer::Conv(ConvLayer::with_input(
            Shape::new(3, 4, 4),
            2,
            (3, 3),
            1,
            true,
        ));
        let s = layer_memory_sizes(&conv, Mode::Snn, &p());
        assert_eq!(
            (s.weights_bytes, s.bias_bytes, s.in_bytes, s.out_bytes),
            (216.0, 8.0, 4000.0, 4000.0)
        );
        assert_eq!(s.pot_bytes, 32.0 * 4.0);
        let f = layer_memory_sizes(&conv, Mode::Fnn, &p());
        assert_eq!((f.in_bytes, f.out_bytes, f.pot_bytes), (192.0, 128.0, 0.0));
        let fc = Layer::Fc(FcLayer::new(512, 10, true));
        assert_eq!(
            layer_memory_sizes(&fc, Mode::Fnn, &p()).weights_bytes,
            20480.0
        );
    }

    fn counts(mode: Mode) -> LayerCounts {
        LayerCounts {
            mode,
            ops: OpCounts::default(),
            mem: MemCounts::default(),
            addr: AddrCounts::default(),
        }
    }

    fn small_sizing(mode: Mode) -> MemorySizing {
        MemorySizing {
            mode,
            weights_bytes: 8.0 * KB,
            bias_bytes: 8.0 * KB,
            pot_bytes: 8.0 * KB,
            in_bytes: 8.0 * KB,
            out_bytes: 8.0 * KB,
        }
    }

    #[test]
    fn ops_energy_example() {
        let mut c = counts(Mode::Fnn);
        c.ops = OpCounts {
            mac: 864.0,
            acc: 32.0,
        };
        let e = layer_energy(&c, &small_sizing(Mode::Fnn), &p()).unwrap();
        assert!((e.ops - 2.768).abs() < 1e-12);
        assert_eq!(e.total, e.ops);
    }

    #[test]
    fn memory_energy_example() {
        let mut c = counts(Mode::Snn);
        c.mem.rd_weights = 60.0;
        c.mem.rd_pot = 20.0;
        c.mem.wr_pot = 20.0;
        let e = layer_energy(&c, &small_sizing(Mode::Snn), &p()).unwrap();
        assert_eq!(e.mem_weights, 0.6);
        assert_eq!(e.mem_pot, 0.4);
        assert_eq!(e.memory(), 1.0); // 100 accesses * 10 pJ
    }

    #[test]
    fn zero_counts_zero_energy() {
        let e = layer_energy(&counts(Mode::Snn), &small_sizing(Mode::Snn), &p()).unwrap();
        assert_eq!(e, EnergyBreakdown::default());
    }

    #[test]
    fn mode_mismatch_rejected() {
        let err = layer_energy(&counts(Mode::Snn), &small_sizing(Mode::Fnn), &p()).unwrap_err();
        assert!(matches!(err, Error::InconsistentMode { .. }));
    }

    #[test]
    fn compare_identical_is_one() {
        let spec = crate::network::parse_network(
            r#"{"name":"x","mode":"fnn","neuron":"relu","input":{"c":2,"h":4,"w":4},
                "layers":[{"kind":"conv","c_out":3,"kh":3,"kw":3}]}"#,
        )
        .unwrap();
        let r = network_energy(&spec, None, &p(), EstimateOptions::default()).unwrap();
        assert_eq!(compare(&r, &r).unwrap(), 1.0);
        let mut zero = r.clone();
        zero.total = EnergyBreakdown::default();
        assert!(matches!(compare(&r, &zero), Err(Error::ZeroSnnTotal)));
    }
}
