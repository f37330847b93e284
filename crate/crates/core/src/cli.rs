//! Command-line front end. [`run`] does all the work and returns the exit
//! code so that tests can drive it in-process.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::catalog;
use crate::ladder::{knit, Budgets, KnitError, DEFAULT_MAX_LEVELS, DEFAULT_MAX_STEPS};
use crate::quiver::{insert_formal_zero, parse_quiver, validate, ModuleVector, TranslationQuiver, VertexSet};
use crate::resolution::{GlobalDimension, ResolutionStatus, Resolver};
use crate::spectrum::{enumerate_spectrum, SpectrumOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mcm-spectra", version, about = "Ladders, resolutions and global spectra on AR quivers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a quiver document against the translation quiver rules.
    Validate(QuiverArg),
    /// Built-in quivers.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Minimal right add(S)-approximation of one vertex.
    Knit {
        #[command(flatten)]
        quiver: QuiverArg,
        #[command(flatten)]
        set: SetArg,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = DEFAULT_MAX_LEVELS)]
        max_levels: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Projective resolution of one simple of End(⊕S).
    Resolve {
        #[command(flatten)]
        quiver: QuiverArg,
        #[command(flatten)]
        set: SetArg,
        #[arg(long)]
        simple: String,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Global dimension of End(⊕S).
    Gldim {
        #[command(flatten)]
        quiver: QuiverArg,
        #[command(flatten)]
        set: SetArg,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Histogram of global dimensions over all nonempty subsets.
    Spectrum {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long, env = "MCM_SPECTRA_JOBS", default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Half-open range of subset indices, e.g. 1..256.
        #[arg(long, value_parser = parse_range)]
        range: Option<(u64, u64)>,
        #[arg(long)]
        dump_per_subset: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        chunk_size: u64,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
    },
}

#[derive(Subcommand, Debug)]
pub enum CatalogAction {
    List,
    Emit { key: String },
}

#[derive(Args, Debug)]
pub struct QuiverArg {
    /// Quiver document path, or catalog:KEY.
    #[arg(long)]
    pub quiver: String,
}

#[derive(Args, Debug)]
pub struct SetArg {
    /// Comma separated vertex labels.
    #[arg(long, value_delimiter = ',', required = true)]
    pub set: Vec<String>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_LEVELS)]
    pub max_levels: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
}

impl From<BudgetArgs> for Budgets {
    fn from(b: BudgetArgs) -> Self {
        Budgets {
            max_levels: b.max_levels,
            max_steps: b.max_steps,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Md,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a >= b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

/// Error carrying the exit code it maps to.
struct Failure(i32, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Reads a quiver from `catalog:KEY` or a file. Curve documents without a
/// formal zero get one.
pub fn load_quiver(source: &str) -> Result<TranslationQuiver, String> {
    let q = match source.strip_prefix("catalog:") {
        Some(key) => catalog::lookup(key).map_err(|e| e.to_string())?.quiver,
        None => {
            let text = std::fs::read_to_string(source).map_err(|e| format!("{source}: {e}"))?;
            parse_quiver(&text).map_err(|e| format!("{source}: {e}"))?
        }
    };
    if q.dim() == 1 && q.formal_zero().is_none() {
        insert_formal_zero(&q).map_err(|e| e.to_string())
    } else {
        Ok(q)
    }
}

fn checked_quiver(source: &str) -> Result<TranslationQuiver, Failure> {
    let q = load_quiver(source).map_err(|e| Failure(EXIT_USAGE, e))?;
    let violations = validate(&q);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure(
            EXIT_USAGE,
            format!("invalid quiver:\n{}", lines.join("\n")),
        ));
    }
    Ok(q)
}

fn label_map(q: &TranslationQuiver, m: &ModuleVector) -> Value {
    json!(m.to_label_map(q))
}

fn set_json(q: &TranslationQuiver, s: VertexSet) -> Value {
    json!(q.set_labels(s))
}

fn emit_json(out: &mut dyn Write, v: &Value) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json value"))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Validate(QuiverArg { quiver }) => {
            let q = load_quiver(&quiver).map_err(|e| Failure(EXIT_USAGE, e))?;
            let violations = validate(&q);
            if violations.is_empty() {
                writeln!(out, "ok: {} ({} vertices)", q.name(), q.len())?;
                Ok(EXIT_OK)
            } else {
                for v in &violations {
                    writeln!(out, "{v}")?;
                }
                Ok(EXIT_USAGE)
            }
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                for k in catalog::list() {
                    writeln!(out, "{k}")?;
                }
                Ok(EXIT_OK)
            }
            CatalogAction::Emit { key } => {
                let q = match catalog::fixture_document(&key) {
                    Some(doc) => parse_quiver(doc)?,
                    None => catalog::lookup(&key)?.quiver,
                };
                writeln!(out, "{}", q.emit())?;
                Ok(EXIT_OK)
            }
        },
        Command::Knit {
            quiver,
            set,
            target,
            max_levels,
            format,
        } => {
            let q = checked_quiver(&quiver.quiver)?;
            let s = q.lookup_set(&set.set)?;
            let t = q.lookup(&target)?;
            let (approx, code) = match knit(&q, t, s, max_levels) {
                Ok(a) => (a, EXIT_OK),
                Err(KnitError::BudgetExhausted { budget, partial }) => {
                    writeln!(err, "knit did not terminate within {budget} levels; partial result follows")?;
                    (*partial, EXIT_UNKNOWN)
                }
                Err(e) => return Err(e.into()),
            };
            match format {
                Format::Text => {
                    writeln!(out, "middle: {}", approx.middle.display(&q))?;
                    writeln!(out, "kernel: {}", approx.kernel.display(&q))?;
                    writeln!(out, "levels: {}", approx.levels_used)?;
                }
                Format::Json => emit_json(
                    out,
                    &json!({
                        "target": q.label(t),
                        "set": set_json(&q, s),
                        "middle": label_map(&q, &approx.middle),
                        "kernel": label_map(&q, &approx.kernel),
                        "levels_used": approx.levels_used,
                        "complete": code == EXIT_OK,
                    }),
                )?,
            }
            Ok(code)
        }
        Command::Resolve {
            quiver,
            set,
            simple,
            budgets,
            format,
        } => {
            let q = checked_quiver(&quiver.quiver)?;
            let s = q.lookup_set(&set.set)?;
            let z = q.lookup(&simple)?;
            let res = Resolver::new(&q, s, budgets.into()).resolve(z)?;
            let (pd, code) = match &res.status {
                ResolutionStatus::Finite { pd } => (pd.to_string(), EXIT_OK),
                ResolutionStatus::Infinite { .. } => ("infinite".to_string(), EXIT_OK),
                ResolutionStatus::BudgetExhausted { reason } => {
                    writeln!(err, "budget exhausted: {reason}")?;
                    ("unknown".to_string(), EXIT_UNKNOWN)
                }
            };
            match format {
                Format::Text => {
                    let terms: Vec<String> =
                        res.terms.iter().map(|t| t.display(&q).to_string()).collect();
                    writeln!(out, "terms: {}", terms.join(" | "))?;
                    if let ResolutionStatus::Infinite {
                        period_detected_at,
                        repeats,
                    } = res.status
                    {
                        writeln!(
                            out,
                            "period: kernel {period_detected_at} repeats the support of kernel {repeats}"
                        )?;
                    }
                    writeln!(out, "pd: {pd}")?;
                }
                Format::Json => {
                    let mut v = json!({
                        "simple": q.label(z),
                        "set": set_json(&q, s),
                        "terms": res.terms.iter().map(|t| label_map(&q, t)).collect::<Vec<_>>(),
                        "kernels": res.kernels.iter().map(|t| label_map(&q, t)).collect::<Vec<_>>(),
                        "pd": pd,
                    });
                    if let ResolutionStatus::Infinite {
                        period_detected_at,
                        repeats,
                    } = res.status
                    {
                        v["period"] = json!([period_detected_at, repeats]);
                    }
                    emit_json(out, &v)?;
                }
            }
            Ok(code)
        }
        Command::Gldim {
            quiver,
            set,
            budgets,
            format,
        } => {
            let q = checked_quiver(&quiver.quiver)?;
            let s = q.lookup_set(&set.set)?;
            let g = Resolver::new(&q, s, budgets.into()).global_dimension()?;
            if g == GlobalDimension::Unknown {
                writeln!(
                    err,
                    "unknown: a resolution exceeded --max-levels {} or --max-steps {}",
                    budgets.max_levels, budgets.max_steps
                )?;
            }
            match format {
                Format::Text => writeln!(out, "{g}")?,
                Format::Json => {
                    let value = match g {
                        GlobalDimension::Finite(d) => json!(d),
                        other => json!(other.to_string()),
                    };
                    emit_json(out, &json!({"set": set_json(&q, s), "gldim": value}))?;
                }
            }
            Ok(if g == GlobalDimension::Unknown {
                EXIT_UNKNOWN
            } else {
                EXIT_OK
            })
        }
        Command::Spectrum {
            quiver,
            jobs,
            checkpoint,
            resume,
            range,
            dump_per_subset,
            chunk_size,
            budgets,
            format,
        } => {
            let q = checked_quiver(&quiver.quiver)?;
            let opts = SpectrumOptions {
                jobs,
                budgets: budgets.into(),
                checkpoint,
                resume,
                range,
                dump: dump_per_subset,
                chunk_size,
            };
            let report = enumerate_spectrum(&q, &opts)?;
            let text = match format {
                ReportFormat::Csv => report.to_csv(),
                ReportFormat::Json => report.to_json() + "\n",
                ReportFormat::Md => report.to_markdown(),
            };
            write!(out, "{text}")?;
            Ok(if report.unknown_count > 0 {
                EXIT_UNKNOWN
            } else {
                EXIT_OK
            })
        }
    }
}
