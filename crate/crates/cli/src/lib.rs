//! Batch CLI over the interferometer toolkit.
//!
//! One subcommand per analysis, machine-readable CSV or JSON out, no
//! interactivity. All angles are radians. Output is deterministic: identical
//! argv (including `--seed`) produces byte-identical documents, and CSV
//! floats carry 13 significant digits so they parse back to the computed
//! values.
//!
//! Exit status: 0 on success, 2 on usage errors (bad flags, out-of-range
//! arguments), 1 on domain errors (degenerate settings, insufficient
//! statistics).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qdc_core::circuit::{conditional_system_distribution, ExperimentSetting};
use qdc_core::experiment::{analytic_visibility, estimate_visibility, fringe_grid, sample_at_setting};
use qdc_core::hvm::{derived_quantities, enumerate_branches, feasibility_scan};
use qdc_core::noise::{chsh_max, noisy_joint_distribution, separability_threshold};

#[derive(Debug, Parser)]
#[command(
    name = "qdc",
    version,
    about = "Delayed-choice interferometer statistics, entanglement analysis, and hidden-variable feasibility checks",
    after_help = "Angles are radians; alpha in [0, pi/2], epsilon in [0, 1]. Exit codes: 0 ok, 1 domain error, 2 usage error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format (default csv; hv-check and hv-branches default to json).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file (atomic replace) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint (S, A) outcome probabilities at one setting.
    Joint {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Probabilities, conditionals and analytic visibility over a setting grid.
    Sweep {
        /// Single preparation angle.
        #[arg(long, conflicts_with = "alphas")]
        alpha: Option<f64>,
        /// Comma-separated list of preparation angles.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Single phase.
        #[arg(long, conflicts_with_all = ["phi_start", "phi_end", "phi_steps"])]
        phi: Option<f64>,
        #[arg(long, requires = "phi_end", requires = "phi_steps")]
        phi_start: Option<f64>,
        #[arg(long, requires = "phi_start")]
        phi_end: Option<f64>,
        #[arg(long, requires = "phi_start")]
        phi_steps: Option<usize>,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search for one hidden-variable parameter vector fitting all settings.
    HvCheck {
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated preparation angles.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Comma-separated phases.
        #[arg(long, value_delimiter = ',', required = true)]
        phis: Vec<f64>,
        /// Grid points per parameter axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Coordinate-refinement rounds after the grid pass.
        #[arg(long, default_value_t = 30)]
        refine: usize,
        /// Feasibility threshold on the max-over-settings residual.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Enumerate the exact solution branches of the constraint system.
    HvBranches {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Noise level at which the evolved state stops being separable.
    Separability {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        phi: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximal CHSH expectation of the evolved state.
    Chsh {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded multinomial shot counts at one setting.
    Sample {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sampled fringe visibility of the closed branch with uncertainty.
    Visibility {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of phase points spanning [0, pi].
        #[arg(long, default_value_t = 5)]
        phi_steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Joint { output, .. }
            | Command::Sweep { output, .. }
            | Command::HvCheck { output, .. }
            | Command::HvBranches { output, .. }
            | Command::Separability { output, .. }
            | Command::Chsh { output, .. }
            | Command::Sample { output, .. }
            | Command::Visibility { output, .. } => output,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl From<qdc_core::Error> for CliError {
    fn from(err: qdc_core::Error) -> Self {
        match err {
            qdc_core::Error::InvalidArgument(_) => CliError::Usage(err.to_string()),
            _ => CliError::Domain(err.to_string()),
        }
    }
}

/// CSV float format: 13 significant digits, enough to round-trip to 12.
fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

#[derive(Serialize)]
struct SettingDoc {
    alpha: f64,
    phi: f64,
    epsilon: f64,
}

impl SettingDoc {
    fn from(setting: &ExperimentSetting) -> Self {
        Self {
            alpha: setting.alpha(),
            phi: setting.phi(),
            epsilon: setting.epsilon(),
        }
    }
}

#[derive(Serialize)]
struct JointDoc {
    alpha: f64,
    phi: f64,
    epsilon: f64,
    p00: f64,
    p01: f64,
    p10: f64,
    p11: f64,
}

#[derive(Serialize)]
struct SweepRow {
    alpha: f64,
    phi: f64,
    epsilon: f64,
    p00: f64,
    p01: f64,
    p10: f64,
    p11: f64,
    p_s0_given_a0: f64,
    p_s0_given_a1: f64,
    visibility_analytic: f64,
}

#[derive(Serialize)]
struct WitnessDoc {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
}

#[derive(Serialize)]
struct HvCheckDoc {
    feasible: bool,
    witness: Option<WitnessDoc>,
    min_max_residual: Option<f64>,
    settings: Vec<SettingDoc>,
    grid_density: usize,
    tol: f64,
}

#[derive(Serialize)]
struct BranchDoc {
    constraints: Vec<String>,
    labels: Vec<String>,
    satisfies_marginal: bool,
    example: WitnessDoc,
    example_residual: f64,
}

#[derive(Serialize)]
struct BranchesDoc {
    setting: SettingDoc,
    p0: f64,
    p1: f64,
    beta: f64,
    branches: Vec<BranchDoc>,
}

#[derive(Serialize)]
struct SeparabilityDoc {
    alpha: f64,
    phi: f64,
    epsilon_star: f64,
    never_entangled: bool,
}

#[derive(Serialize)]
struct ChshDoc {
    alpha: f64,
    phi: f64,
    epsilon: f64,
    chsh_max: f64,
}

#[derive(Serialize)]
struct SampleDoc {
    alpha: f64,
    phi: f64,
    epsilon: f64,
    shots: u64,
    seed: u64,
    n00: u64,
    n01: u64,
    n10: u64,
    n11: u64,
}

#[derive(Serialize)]
struct VisibilityDoc {
    alpha: f64,
    epsilon: f64,
    shots_per_point: u64,
    seed: u64,
    phi_points: usize,
    conditioned_on: u8,
    value: f64,
    std_error: f64,
    analytic: f64,
}

fn json_doc<T: Serialize>(value: &T) -> String {
    let mut doc = serde_json::to_string_pretty(value).expect("documents serialize");
    doc.push('\n');
    doc
}

fn sweep_row(setting: &ExperimentSetting) -> Result<SweepRow, CliError> {
    let joint = noisy_joint_distribution(setting);
    let p = joint.probabilities();
    let open = conditional_system_distribution(&joint, 0)?;
    let closed = conditional_system_distribution(&joint, 1)?;
    Ok(SweepRow {
        alpha: setting.alpha(),
        phi: setting.phi(),
        epsilon: setting.epsilon(),
        p00: p[0],
        p01: p[1],
        p10: p[2],
        p11: p[3],
        p_s0_given_a0: open[0],
        p_s0_given_a1: closed[0],
        visibility_analytic: analytic_visibility(setting.alpha(), setting.epsilon())?,
    })
}

const SWEEP_HEADER: &str =
    "alpha,phi,epsilon,p00,p01,p10,p11,p_s0_given_a0,p_s0_given_a1,visibility_analytic";

fn sweep_csv_line(row: &SweepRow) -> String {
    [
        row.alpha,
        row.phi,
        row.epsilon,
        row.p00,
        row.p01,
        row.p10,
        row.p11,
        row.p_s0_given_a0,
        row.p_s0_given_a1,
        row.visibility_analytic,
    ]
    .map(fmt_f)
    .join(",")
}

/// Builds the output document for a parsed command.
pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Joint {
            alpha,
            phi,
            epsilon,
            output,
        } => {
            let setting = ExperimentSetting::new(*alpha, *phi, *epsilon)?;
            let p = noisy_joint_distribution(&setting).probabilities();
            let doc = JointDoc {
                alpha: setting.alpha(),
                phi: setting.phi(),
                epsilon: setting.epsilon(),
                p00: p[0],
                p01: p[1],
                p10: p[2],
                p11: p[3],
            };
            Ok(match output.format_or(Format::Csv) {
                Format::Csv => format!(
                    "alpha,phi,epsilon,p00,p01,p10,p11\n{}\n",
                    [doc.alpha, doc.phi, doc.epsilon, doc.p00, doc.p01, doc.p10, doc.p11]
                        .map(fmt_f)
                        .join(",")
                ),
                Format::Json => json_doc(&doc),
            })
        }
        Command::Sweep {
            alpha,
            alphas,
            phi,
            phi_start,
            phi_end,
            phi_steps,
            epsilon,
            output,
        } => {
            let alphas: Vec<f64> = match (alpha, alphas) {
                (Some(a), None) => vec![*a],
                (None, Some(list)) if !list.is_empty() => list.clone(),
                _ => {
                    return Err(CliError::Usage(
                        "sweep needs --alpha or a non-empty --alphas".into(),
                    ))
                }
            };
            let phis: Vec<f64> = match (phi, phi_start, phi_end, phi_steps) {
                (Some(p), None, None, None) => vec![*p],
                (None, Some(start), Some(end), Some(steps)) if *steps >= 1 => {
                    if *steps == 1 {
                        vec![*start]
                    } else {
                        (0..*steps)
                            .map(|k| start + (end - start) * k as f64 / (*steps as f64 - 1.0))
                            .collect()
                    }
                }
                _ => {
                    return Err(CliError::Usage(
                        "sweep needs --phi or --phi-start/--phi-end/--phi-steps with steps >= 1"
                            .into(),
                    ))
                }
            };
            let mut rows = Vec::new();
            for a in &alphas {
                for p in &phis {
                    rows.push(sweep_row(&ExperimentSetting::new(*a, *p, *epsilon)?)?);
                }
            }
            Ok(match output.format_or(Format::Csv) {
                Format::Csv => {
                    let mut doc = String::from(SWEEP_HEADER);
                    doc.push('\n');
                    for row in &rows {
                        doc.push_str(&sweep_csv_line(row));
                        doc.push('\n');
                    }
                    doc
                }
                Format::Json => json_doc(&rows),
            })
        }
        Command::HvCheck {
            epsilon,
            alphas,
            phis,
            grid,
            refine,
            tol,
            output,
        } => {
            let mut settings = Vec::new();
            for alpha in alphas {
                for phi in phis {
                    settings.push(ExperimentSetting::new(*alpha, *phi, *epsilon)?);
                }
            }
            let verdict = feasibility_scan(&settings, *grid, *refine, *tol)?;
            let doc = HvCheckDoc {
                feasible: verdict.feasible,
                witness: verdict.witness.map(|w| WitnessDoc {
                    a: w.a,
                    b: w.b,
                    c: w.c,
                    d: w.d,
                    e: w.e,
                }),
                min_max_residual: verdict.min_max_residual,
                settings: verdict.settings_used.iter().map(SettingDoc::from).collect(),
                grid_density: *grid,
                tol: *tol,
            };
            Ok(match output.format_or(Format::Json) {
                Format::Json => json_doc(&doc),
                Format::Csv => {
                    let witness = doc
                        .witness
                        .as_ref()
                        .map(|w| [w.a, w.b, w.c, w.d, w.e].map(fmt_f).join(","))
                        .unwrap_or_else(|| ",,,,".into());
                    let residual = doc
                        .min_max_residual
                        .map(fmt_f)
                        .unwrap_or_default();
                    format!(
                        "feasible,witness_a,witness_b,witness_c,witness_d,witness_e,min_max_residual,grid_density,tol\n{},{witness},{residual},{},{}\n",
                        doc.feasible,
                        doc.grid_density,
                        fmt_f(doc.tol)
                    )
                }
            })
        }
        Command::HvBranches {
            alpha,
            phi,
            epsilon,
            output,
        } => {
            let setting = ExperimentSetting::new(*alpha, *phi, *epsilon)?;
            let derived = derived_quantities(&setting);
            let branches = enumerate_branches(&setting)?;
            // A fixed interior point of each family keeps the output stable
            // run to run.
            let probe = [0.35, 0.65, 0.45, 0.55, 0.5];
            let docs: Vec<BranchDoc> = branches
                .iter()
                .map(|branch| {
                    let member = branch.sample_member(&probe);
                    let example_residual = qdc_core::hvm::residual(&member, &setting)
                        .expect("non-degenerate setting");
                    BranchDoc {
                        constraints: branch.bindings().iter().map(|b| b.to_string()).collect(),
                        labels: branch.labels().iter().map(|l| l.to_string()).collect(),
                        satisfies_marginal: branch.satisfies_marginal(),
                        example: WitnessDoc {
                            a: member.a,
                            b: member.b,
                            c: member.c,
                            d: member.d,
                            e: member.e,
                        },
                        example_residual,
                    }
                })
                .collect();
            let doc = BranchesDoc {
                setting: SettingDoc::from(&setting),
                p0: derived.p0,
                p1: derived.p1,
                beta: derived.beta()?,
                branches: docs,
            };
            Ok(match output.format_or(Format::Json) {
                Format::Json => json_doc(&doc),
                Format::Csv => {
                    let mut out = String::from(
                        "branch,constraints,labels,satisfies_marginal,example_a,example_b,example_c,example_d,example_e,example_residual\n",
                    );
                    for (idx, b) in doc.branches.iter().enumerate() {
                        out.push_str(&format!(
                            "{idx},{},{},{},{},{},{},{},{},{}\n",
                            b.constraints.join(";"),
                            b.labels.join(";"),
                            b.satisfies_marginal,
                            fmt_f(b.example.a),
                            fmt_f(b.example.b),
                            fmt_f(b.example.c),
                            fmt_f(b.example.d),
                            fmt_f(b.example.e),
                            fmt_f(b.example_residual)
                        ));
                    }
                    out
                }
            })
        }
        Command::Separability { alpha, phi, output } => {
            let threshold = separability_threshold(*alpha, *phi)?;
            let doc = SeparabilityDoc {
                alpha: *alpha,
                phi: *phi,
                epsilon_star: threshold.value(),
                never_entangled: threshold.never_entangled(),
            };
            Ok(match output.format_or(Format::Csv) {
                Format::Csv => format!(
                    "alpha,phi,epsilon_star,never_entangled\n{},{},{},{}\n",
                    fmt_f(doc.alpha),
                    fmt_f(doc.phi),
                    fmt_f(doc.epsilon_star),
                    doc.never_entangled
                ),
                Format::Json => json_doc(&doc),
            })
        }
        Command::Chsh {
            alpha,
            phi,
            epsilon,
            output,
        } => {
            let setting = ExperimentSetting::new(*alpha, *phi, *epsilon)?;
            let doc = ChshDoc {
                alpha: setting.alpha(),
                phi: setting.phi(),
                epsilon: setting.epsilon(),
                chsh_max: chsh_max(&setting),
            };
            Ok(match output.format_or(Format::Csv) {
                Format::Csv => format!(
                    "alpha,phi,epsilon,chsh_max\n{}\n",
                    [doc.alpha, doc.phi, doc.epsilon, doc.chsh_max]
                        .map(fmt_f)
                        .join(",")
                ),
                Format::Json => json_doc(&doc),
            })
        }
        Command::Sample {
            alpha,
            phi,
            epsilon,
            shots,
            seed,
            output,
        } => {
            let setting = ExperimentSetting::new(*alpha, *phi, *epsilon)?;
            let record = sample_at_setting(&setting, *shots, *seed)?;
            let doc = SampleDoc {
                alpha: setting.alpha(),
                phi: setting.phi(),
                epsilon: setting.epsilon(),
                shots: record.shots,
                seed: record.seed,
                n00: record.counts[0],
                n01: record.counts[1],
                n10: record.counts[2],
                n11: record.counts[3],
            };
            Ok(match output.format_or(Format::Csv) {
                Format::Csv => format!(
                    "alpha,phi,epsilon,shots,seed,n00,n01,n10,n11\n{},{},{},{},{},{},{},{},{}\n",
                    fmt_f(doc.alpha),
                    fmt_f(doc.phi),
                    fmt_f(doc.epsilon),
                    doc.shots,
                    doc.seed,
                    doc.n00,
                    doc.n01,
                    doc.n10,
                    doc.n11
                ),
                Format::Json => json_doc(&doc),
            })
        }
        Command::Visibility {
            alpha,
            epsilon,
            shots,
            seed,
            phi_steps,
            output,
        } => {
            let grid = fringe_grid(*phi_steps);
            let estimate = estimate_visibility(*alpha, *epsilon, &grid, *shots, *seed)?;
            let doc = VisibilityDoc {
                alpha: *alpha,
                epsilon: *epsilon,
                shots_per_point: *shots,
                seed: *seed,
                phi_points: grid.len(),
                conditioned_on: estimate.conditioned_on,
                value: estimate.value,
                std_error: estimate.std_error,
                analytic: analytic_visibility(*alpha, *epsilon)?,
            };
            Ok(match output.format_or(Format::Csv) {
                Format::Csv => format!(
                    "alpha,epsilon,shots_per_point,seed,phi_points,conditioned_on,value,std_error,analytic\n{},{},{},{},{},{},{},{},{}\n",
                    fmt_f(doc.alpha),
                    fmt_f(doc.epsilon),
                    doc.shots_per_point,
                    doc.seed,
                    doc.phi_points,
                    doc.conditioned_on,
                    fmt_f(doc.value),
                    fmt_f(doc.std_error),
                    fmt_f(doc.analytic)
                ),
                Format::Json => json_doc(&doc),
            })
        }
    }
}

fn write_atomic(path: &Path, doc: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(doc.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Parses argv, runs one subcommand, writes the document, returns the exit
/// status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap reports --help/--version through Err with exit code 0.
            let _ = err.print();
            return if err.exit_code() == 0 { 0 } else { 2 };
        }
    };
    match execute(&cli.command) {
        Ok(doc) => {
            if let Some(path) = &cli.command.output().out {
                if let Err(err) = write_atomic(path, &doc) {
                    eprintln!("error: cannot write {}: {err}", path.display());
                    return 1;
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(doc.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                    return 1;
                }
            }
            0
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
