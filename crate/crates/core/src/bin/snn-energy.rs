use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use snn_energy::activity::load_trace;
use snn_energy::oracle::run_validation;
use snn_energy::report::{
    compare_csv, exit, exit_code, format_compare, format_table, report_csv, sweep, sweep_csv,
    SweepBase, SweepParam,
};
use snn_energy::{
    compare_modes, estimate, parse_network, Activity, Error, EstimateOptions, Mode, NetworkSpec,
    RangePolicy, SpikeRate, TechProfile,
};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (bad flags, missing activity source, empty range)
  3  I/O error
  4  parse error (malformed JSON, unknown layer kind)
  5  validation error (shapes, trace, technology profile)
  6  estimation error
  7  validate found analytical/instrumented mismatches";

#[derive(Parser)]
#[command(name = "snn-energy", version, about = "Energy estimates for formal and spiking neural networks", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-layer energy breakdown of one network in one mode.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// FNN and SNN breakdowns side by side with the energy ratio.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Checks the analytical counts against the instrumented executors.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Use the published FC spiking ACC expression verbatim.
        #[arg(long)]
        strict_paper: bool,
    },
    /// Evaluates both modes over a parameter range and locates ratio = 1.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Network description (JSON).
    #[arg(long)]
    arch: PathBuf,
    /// Measured activity trace (JSON).
    #[arg(long, conflicts_with = "spike_rate")]
    trace: Option<PathBuf>,
    /// Uniform spikes per neuron per inference.
    #[arg(long)]
    spike_rate: Option<f64>,
    /// Measured input events per inference, for event-encoded inputs.
    #[arg(long)]
    input_events: Option<f64>,
    /// Technology profile (JSON); defaults to the built-in 45nm profile.
    #[arg(long, env = "SNN_ENERGY_TECH")]
    tech: Option<PathBuf>,
    /// FIFO depth between spiking layers, in words.
    #[arg(long)]
    fifo_depth: Option<usize>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Use the published FC spiking ACC expression verbatim.
    #[arg(long)]
    strict_paper: bool,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fnn,
    Snn,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Clamp,
    Extrapolate,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    SpikeRate,
    Timesteps,
    FifoDepth,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

struct Loaded {
    spec: NetworkSpec,
    profile: TechProfile,
    options: EstimateOptions,
}

impl Common {
    fn load(&self) -> Result<Loaded, Error> {
        let spec = parse_network(&read(&self.arch)?)?;
        let mut profile = match &self.tech {
            Some(p) => TechProfile::from_json(&read(p)?)?,
            None => TechProfile::default(),
        };
        if let Some(depth) = self.fifo_depth {
            profile = profile.with_fifo_depth(depth);
        }
        if let Some(policy) = self.policy {
            profile = profile.with_policy(match policy {
                PolicyArg::Clamp => RangePolicy::Clamp,
                PolicyArg::Extrapolate => RangePolicy::Extrapolate,
            });
        }
        profile.validate()?;
        Ok(Loaded {
            spec,
            profile,
            options: EstimateOptions {
                strict_paper: self.strict_paper,
            },
        })
    }

    fn activity(&self, spec: &NetworkSpec) -> Result<Option<Activity>, Error> {
        if let Some(path) = &self.trace {
            let snn = spec.with_mode(Mode::Snn)?;
            return Ok(Some(Activity::Trace(load_trace(&read(path)?, &snn)?)));
        }
        match self.spike_rate {
            Some(rate) => Ok(Some(Activity::Rate {
                rate: SpikeRate::new(rate)?,
                input_events: self.input_events,
            })),
            None => Ok(None),
        }
    }

    fn required_activity(&self, spec: &NetworkSpec) -> Result<Activity, Error> {
        self.activity(spec)?.ok_or_else(|| {
            Error::Precondition("SNN estimation needs --trace or --spike-rate".into())
        })
    }

    fn emit(&self, csv: &str) -> Result<(), Error> {
        if let Some(path) = &self.out {
            fs::write(path, csv).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Estimate { common, mode } => {
            let l = common.load()?;
            let mode = match mode {
                ModeArg::Fnn => Mode::Fnn,
                ModeArg::Snn => Mode::Snn,
            };
            let activity = match mode {
                Mode::Fnn => None,
                Mode::Snn => Some(common.required_activity(&l.spec)?),
            };
            let report = estimate(&l.spec, mode, activity.as_ref(), &l.profile, l.options)?;
            print!("{}", format_table(&report));
            common.emit(&report_csv(&report))?;
        }
        Command::Compare { common } => {
            let l = common.load()?;
            let activity = common.required_activity(&l.spec)?;
            let c = compare_modes(&l.spec, &activity, &l.profile, l.options)?;
            print!("{}", format_compare(&c));
            common.emit(&compare_csv(&c))?;
        }
        Command::Validate {
            seed,
            cases,
            strict_paper,
        } => {
            if cases == 0 {
                return Err(Error::Precondition("--cases must be at least 1".into()));
            }
            let summary = run_validation(seed, cases, strict_paper)?;
            println!(
                "{} cases, {} comparisons, {} mismatches",
                summary.cases,
                summary.comparisons,
                summary.mismatches.len()
            );
            if !summary.passed() {
                println!(
                    "{:>5}  {:<32} {:<4} {:<10} {:>14} {:>10}",
                    "case", "layer", "mode", "category", "analytical", "measured"
                );
                for m in &summary.mismatches {
                    println!(
                        "{:>5}  {:<32} {:<4} {:<10} {:>14} {:>10}",
                        m.case,
                        m.layer,
                        m.mode,
                        m.verdict.category,
                        m.verdict.analytical,
                        m.verdict.measured
                    );
                }
                if strict_paper {
                    println!(
                        "note: the verbatim FC spiking ACC expression multiplies the per-spike cost by N_in; \
                         the executor integrates N_out synapses per spike"
                    );
                }
                return Ok(exit::MISMATCH);
            }
        }
        Command::Sweep {
            common,
            param,
            from,
            to,
            steps,
        } => {
            let l = common.load()?;
            if common.trace.is_some() {
                return Err(Error::Precondition(
                    "sweeps synthesize activity; use --spike-rate".into(),
                ));
            }
            let param = match param {
                ParamArg::SpikeRate => SweepParam::SpikeRate,
                ParamArg::Timesteps => SweepParam::Timesteps,
                ParamArg::FifoDepth => SweepParam::FifoDepth,
            };
            let rate = match (param, common.spike_rate) {
                (SweepParam::SpikeRate, r) => r.unwrap_or(0.0),
                (_, Some(r)) => r,
                (_, None) => {
                    return Err(Error::Precondition(
                        "--spike-rate is required for this sweep".into(),
                    ))
                }
            };
            let base = SweepBase {
                spec: l.spec,
                rate,
                input_events: common.input_events,
                profile: l.profile,
                options: l.options,
            };
            let rows = sweep(&base, param, from, to, steps)?;
            let csv = sweep_csv(param, &rows);
            print!("{csv}");
            common.emit(&csv)?;
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
