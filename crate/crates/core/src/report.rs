//! Report rendering (CSV and text tables), FNN/SNN comparison, parameter
//! sweeps and the CLI exit-code contract.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::activity::{synthesize_uniform_with_input, ActivityTrace, SpikeRate};
use crate::energy::{
    compare, network_energy, EnergyBreakdown, EnergyReport, EstimateOptions, LayerReport,
    TechProfile,
};
use crate::error::{Error, Result};
use crate::network::{Mode, NetworkSpec};

/// Where spiking activity comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Activity {
    Trace(ActivityTrace),
    Rate {
        rate: SpikeRate,
        input_events: Option<f64>,
    },
}

impl Activity {
    pub fn rate(rate: f64) -> Result<Self> {
        Ok(Activity::Rate {
            rate: SpikeRate::new(rate)?,
            input_events: None,
        })
    }

    fn trace_for(&self, spec: &NetworkSpec) -> Result<ActivityTrace> {
        match self {
            Activity::Trace(t) => Ok(t.clone()),
            Activity::Rate { rate, input_events } => {
                synthesize_uniform_with_input(spec, *rate, *input_events)
            }
        }
    }
}

/// Estimates `spec` in the requested mode. FNN runs ignore `activity`.
pub fn estimate(
    spec: &NetworkSpec,
    mode: Mode,
    activity: Option<&Activity>,
    profile: &TechProfile,
    options: EstimateOptions,
) -> Result<EnergyReport> {
    match mode {
        Mode::Fnn => network_energy(&spec.to_fnn(), None, profile, options),
        Mode::Snn => {
            let snn = spec.with_mode(Mode::Snn)?;
            let activity = activity.ok_or_else(|| {
                Error::Precondition("spiking estimation needs a trace or a spike rate".into())
            })?;
            let trace = activity.trace_for(&snn)?;
            network_energy(&snn, Some(&trace), profile, options)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub fnn: EnergyReport,
    pub snn: EnergyReport,
    pub ratio: f64,
}

pub fn compare_modes(
    spec: &NetworkSpec,
    activity: &Activity,
    profile: &TechProfile,
    options: EstimateOptions,
) -> Result<Comparison> {
    let fnn = estimate(spec, Mode::Fnn, None, profile, options)?;
    let snn = estimate(spec, Mode::Snn, Some(activity), profile, options)?;
    let ratio = compare(&fnn, &snn)?;
    Ok(Comparison { fnn, snn, ratio })
}

/// Energy categories in display order, with their table labels.
pub const CATEGORIES: [(&str, &str); 7] = [
    ("potentials", "Potentials"),
    ("weights", "Weights"),
    ("bias", "Bias"),
    ("in_out", "In/Out"),
    ("synaptic_ops", "Synaptic Op."),
    ("addressing", "Addressing"),
    ("total", "Total"),
];

fn category_energy(e: &EnergyBreakdown, category: &str) -> f64 {
    match category {
        "potentials" => e.mem_pot,
        "weights" => e.mem_weights,
        "bias" => e.mem_bias,
        "in_out" => e.mem_io,
        "synaptic_ops" => e.ops,
        "addressing" => e.addressing,
        _ => e.total,
    }
}

/// One CSV line. `count` is accesses for memories and MAC + ACC for
/// arithmetic; `mem_bytes` is only set for memory categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub layer: String,
    pub mode: Mode,
    pub category: String,
    pub count: Option<f64>,
    pub mem_bytes: Option<f64>,
    pub energy_nj: f64,
}

fn layer_rows(l: &LayerReport, mode: Mode) -> Vec<ReportRow> {
    let m = &l.counts.mem;
    let s = &l.sizing;
    let ops = l.counts.ops.mac + l.counts.ops.acc;
    let addr = l.counts.addr.mac + l.counts.addr.acc;
    let spec: [(&str, Option<f64>, Option<f64>); 7] = [
        ("potentials", Some(m.pot()), Some(s.pot_bytes)),
        ("weights", Some(m.rd_weights), Some(s.weights_bytes)),
        ("bias", Some(m.rd_bias), Some(s.bias_bytes)),
        ("in_out", Some(m.io()), Some(s.in_bytes + s.out_bytes)),
        ("synaptic_ops", Some(ops), None),
        ("addressing", Some(addr), None),
        ("total", None, None),
    ];
    spec.iter()
        .map(|&(category, count, mem_bytes)| ReportRow {
            layer: l.label.clone(),
            mode,
            category: category.to_string(),
            count,
            mem_bytes,
            energy_nj: category_energy(&l.energy, category),
        })
        .collect()
}

/// Every (layer, category) row, then the aggregate `TOTAL` rows.
pub fn report_rows(report: &EnergyReport) -> Vec<ReportRow> {
    let layer_rows: Vec<ReportRow> = report
        .layers
        .iter()
        .flat_map(|l| layer_rows(l, report.mode))
        .collect();
    let mut rows = layer_rows.clone();
    for (category, _) in CATEGORIES {
        let count = (category != "total").then(|| {
            layer_rows
                .iter()
                .filter(|r| r.category == category)
                .filter_map(|r| r.count)
                .sum()
        });
        rows.push(ReportRow {
            layer: "TOTAL".into(),
            mode: report.mode,
            category: category.to_string(),
            count,
            mem_bytes: None,
            energy_nj: category_energy(&report.total, category),
        });
    }
    rows
}

/// Scientific notation with six significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

pub const CSV_HEADER: &str = "layer,mode,category,count,mem_bytes,energy_nj";

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.layer,
            r.mode,
            r.category,
            opt(r.count),
            opt(r.mem_bytes),
            sci(r.energy_nj)
        );
    }
    out
}

pub fn report_csv(report: &EnergyReport) -> String {
    rows_to_csv(&report_rows(report))
}

fn memory_fraction(e: &EnergyBreakdown) -> f64 {
    if e.total == 0.0 {
        0.0
    } else {
        e.memory() / e.total
    }
}

/// Aggregate breakdown in the order Potentials, Weights, Bias, In/Out,
/// Synaptic Op., Addressing, Total.
pub fn format_table(report: &EnergyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} ({}, T = {}, policy {})",
        report.network,
        report.mode.to_string().to_uppercase(),
        report.timesteps,
        report.policy
    );
    let _ = writeln!(out, "{:<14} {:>13}", "Category", "Energy (nJ)");
    for (key, label) in CATEGORIES {
        let _ = writeln!(
            out,
            "{:<14} {:>13}",
            label,
            sci(category_energy(&report.total, key))
        );
    }
    let _ = writeln!(
        out,
        "{:<14} {:>13.3}",
        "Memory share",
        memory_fraction(&report.total)
    );
    for l in &report.layers {
        if l.role == crate::energy::LayerRole::Encoding {
            let _ = writeln!(
                out,
                "encoding layer {}: {} nJ",
                l.label,
                sci(l.energy.total)
            );
        }
    }
    let oor = report.out_of_range_layers();
    if !oor.is_empty() {
        let _ = writeln!(
            out,
            "memory sizes outside the SRAM table: {}",
            oor.join(", ")
        );
    }
    out
}

/// FNN and SNN breakdowns side by side, then the ratio.
pub fn format_compare(c: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} (SNN: T = {}, policy {})",
        c.snn.network, c.snn.timesteps, c.snn.policy
    );
    let _ = writeln!(
        out,
        "{:<14} {:>13} {:>13}",
        "Category", "FNN (nJ)", "SNN (nJ)"
    );
    for (key, label) in CATEGORIES {
        let _ = writeln!(
            out,
            "{:<14} {:>13} {:>13}",
            label,
            sci(category_energy(&c.fnn.total, key)),
            sci(category_energy(&c.snn.total, key))
        );
    }
    let _ = writeln!(
        out,
        "{:<14} {:>13.3} {:>13.3}",
        "Memory share",
        memory_fraction(&c.fnn.total),
        memory_fraction(&c.snn.total)
    );
    let _ = writeln!(out, "E_FNN / E_SNN = {:.4}", c.ratio);
    out
}

pub fn compare_csv(c: &Comparison) -> String {
    let mut rows = report_rows(&c.fnn);
    rows.extend(report_rows(&c.snn));
    let mut out = rows_to_csv(&rows);
    let _ = writeln!(out, "RATIO,,fnn_over_snn,,,{}", sci(c.ratio));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    SpikeRate,
    Timesteps,
    FifoDepth,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::SpikeRate => "spike_rate",
            SweepParam::Timesteps => "timesteps",
            SweepParam::FifoDepth => "fifo_depth",
        }
    }

    fn integral(self) -> bool {
        self != SweepParam::SpikeRate
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spike_rate" | "spike-rate" => Ok(SweepParam::SpikeRate),
            "timesteps" => Ok(SweepParam::Timesteps),
            "fifo_depth" | "fifo-depth" => Ok(SweepParam::FifoDepth),
            other => Err(Error::Precondition(format!(
                "unknown sweep parameter `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Point,
    Crossover,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub e_snn: f64,
    pub e_fnn: f64,
    pub ratio: f64,
    pub kind: PointKind,
}

/// Fixed inputs of a sweep; the swept parameter overrides one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub spec: NetworkSpec,
    pub rate: f64,
    pub input_events: Option<f64>,
    pub profile: TechProfile,
    pub options: EstimateOptions,
}

impl SweepBase {
    fn at(&self, param: SweepParam, value: f64) -> Result<(f64, f64)> {
        let mut spec = self.spec.clone();
        let mut profile = self.profile.clone();
        let mut rate = self.rate;
        match param {
            SweepParam::SpikeRate => rate = value,
            SweepParam::Timesteps => {
                if value < 1.0 {
                    return Err(Error::Precondition("timesteps must be at least 1".into()));
                }
                spec.timesteps = value as u32;
            }
            SweepParam::FifoDepth => {
                if value < 1.0 {
                    return Err(Error::Precondition("fifo depth must be at least 1".into()));
                }
                profile.fifo_depth = value as usize;
            }
        }
        let activity = Activity::Rate {
            rate: SpikeRate::new(rate)?,
            input_events: self.input_events,
        };
        let c = compare_modes(&spec, &activity, &profile, self.options)?;
        Ok((c.snn.total.total, c.fnn.total.total))
    }

    fn row(&self, param: SweepParam, value: f64, kind: PointKind) -> Result<SweepRow> {
        let (e_snn, e_fnn) = self.at(param, value)?;
        Ok(SweepRow {
            value,
            e_snn,
            e_fnn,
            ratio: e_fnn / e_snn,
            kind,
        })
    }
}

pub const CROSSOVER_REL_TOL: f64 = 1e-6;

/// Finds where the ratio crosses 1 between two bracketing points.
fn bisect(
    base: &SweepBase,
    param: SweepParam,
    mut lo: SweepRow,
    mut hi: SweepRow,
) -> Result<SweepRow> {
    let above = lo.ratio > 1.0;
    if param.integral() {
        // smallest integer on the far side of the crossing
        while hi.value - lo.value > 1.0 {
            let mid = base.row(
                param,
                ((lo.value + hi.value) / 2.0).floor(),
                PointKind::Crossover,
            )?;
            if (mid.ratio > 1.0) == above {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok(SweepRow {
            kind: PointKind::Crossover,
            ..hi
        });
    }
    for _ in 0..200 {
        let scale = lo.value.abs().max(hi.value.abs()).max(f64::MIN_POSITIVE);
        if (hi.value - lo.value) <= CROSSOVER_REL_TOL * scale {
            break;
        }
        let mid = base.row(param, (lo.value + hi.value) / 2.0, PointKind::Crossover)?;
        if mid.ratio == 1.0 {
            return Ok(mid);
        }
        if (mid.ratio > 1.0) == above {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    base.row(param, (lo.value + hi.value) / 2.0, PointKind::Crossover)
}

/// Evaluates `steps` evenly spaced points of `[from, to]` (rounded for
/// integral parameters) and inserts each bracketed ratio = 1 crossing.
pub fn sweep(
    base: &SweepBase,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Vec<SweepRow>> {
    if !(from.is_finite() && to.is_finite()) || from > to {
        return Err(Error::EmptyRange(format!("[{from}, {to}]")));
    }
    if steps == 0 {
        return Err(Error::EmptyRange("zero steps".into()));
    }
    let mut values: Vec<f64> = if from == to || steps == 1 {
        vec![from]
    } else {
        (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    if param.integral() {
        for v in &mut values {
            *v = v.round();
        }
        values.dedup();
    }
    let points = values
        .iter()
        .map(|&v| base.row(param, v, PointKind::Point))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(points.len() + 1);
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            let prev = points[i - 1];
            if (prev.ratio > 1.0) != (p.ratio > 1.0) && prev.ratio != 1.0 {
                rows.push(bisect(base, param, prev, *p)?);
            }
        }
        rows.push(*p);
    }
    Ok(rows)
}

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let mut out = String::from("parameter,value,e_snn_nj,e_fnn_nj,ratio,kind\n");
    for r in rows {
        let kind = match r.kind {
            PointKind::Point => "point",
            PointKind::Crossover => "crossover",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            param.name(),
            sci(r.value),
            sci(r.e_snn),
            sci(r.e_fnn),
            sci(r.ratio),
            kind
        );
    }
    out
}

/// Process exit codes of the command-line front end.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const PARSE: u8 = 4;
    pub const VALIDATION: u8 = 5;
    pub const ESTIMATION: u8 = 6;
    pub const MISMATCH: u8 = 7;
}

/// Exit code for an error surfaced by a command.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => exit::IO,
        Error::Malformed(_) | Error::UnknownLayerKind(_) => exit::PARSE,
        Error::ShapeMismatch { .. }
        | Error::NonPositiveDimension(_)
        | Error::NeuronModeMismatch { .. }
        | Error::LengthMismatch { .. }
        | Error::NegativeEntry(_)
        | Error::MissingInputEvents
        | Error::InvalidProfile(_) => exit::VALIDATION,
        Error::EmptyRange(_) | Error::Precondition(_) => exit::USAGE,
        Error::NonPositiveSize(_)
        | Error::InconsistentMode { .. }
        | Error::ZeroSnnTotal
        | Error::InstanceTooLarge(_)
        | Error::InvalidPlacement(_) => exit::ESTIMATION,
    }
}
