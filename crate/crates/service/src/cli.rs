//! The `dragflow` command line. Exit codes: 0 success, 1 invalid input or a
//! failed validation, 2 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use dragflow_core::benchio::{load_masks, parse_sample, sample_region_ops, validate_dataset};
use dragflow_core::engine::{run_drag, DragConfig};
use dragflow_core::extractors::ExtractorSpec;
use dragflow_core::flow::{
    roundtrip_drift, ConstantLinearNoise, ConstantVelocity, NoiseSchedule, Solver, SinVelocity,
    StepConsistentLinearNoise,
};
use dragflow_core::metrics::{render_table, EvalOptions};
use dragflow_core::overlay::render_ops_at;
use dragflow_core::region::{build_gradient_mask, GradientMaskOptions};
use dragflow_core::schedule::target_mask_at;
use dragflow_core::synthetic::{drag_suite, texture};
use dragflow_core::{Error, Field, RegionOp};
use dragflow_intent::{EndpointConfig, DEFAULT_API_KEY_ENV};
use serde::de::DeserializeOwned;

use crate::api::{decode, eval, EvalRequest};
use crate::http::{serve, AppState};

#[derive(Debug, Parser)]
#[command(name = "dragflow", version, about = "Region-level drag editing on toy latents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write per-step overlays and target masks for a benchmark sample.
    Preview {
        /// Sample directory with instructions.json and <i>.png masks.
        #[arg(long)]
        sample: PathBuf,
        /// Steps to render; all of 0..=k_motion when omitted.
        #[arg(long = "k")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        k_motion: usize,
        /// Render every n-th step when --k is omitted.
        #[arg(long, default_value_t = 1)]
        every: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the drag loop and write result.json and final.dflt.
    Run {
        /// Latent in DFLT format.
        #[arg(long, requires = "ops", conflicts_with = "synthetic")]
        latent: Option<PathBuf>,
        /// JSON list of region ops.
        #[arg(long)]
        ops: Option<PathBuf>,
        /// Name of a built-in synthetic case, e.g. relocate-0.
        #[arg(long)]
        synthetic: Option<String>,
        /// DragConfig JSON; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an edit and print the metric table.
    Eval {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        edited: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        /// Extractor spec as inline JSON, e.g. '{"kind":"identity"}'.
        #[arg(long)]
        extractor: Option<String>,
        /// EvalOptions JSON file.
        #[arg(long)]
        options: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check a dataset directory of benchmark samples.
    Validate {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write the editable gradient mask as a PNG.
    Mask {
        #[arg(long, conflicts_with = "ops", required_unless_present = "ops")]
        sample: Option<PathBuf>,
        /// JSON list of region ops.
        #[arg(long)]
        ops: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        k_motion: usize,
        /// Use only the endpoint masks, not the intermediate steps.
        #[arg(long)]
        no_sweep: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure inversion round-trip drift of a toy flow.
    Drift {
        #[arg(long, value_enum, default_value_t = SolverArg::Rf)]
        solver: SolverArg,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = PredictorArg::Sin)]
        predictor: PredictorArg,
        /// Latent in DFLT format; a seeded texture when omitted.
        #[arg(long)]
        latent: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: SocketAddr,
        /// Job workers; defaults to the number of logical cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Chat-completion URL for /intent.
        #[arg(long)]
        intent_url: Option<String>,
        #[arg(long, default_value = "gpt-4o")]
        intent_model: String,
        #[arg(long, default_value = DEFAULT_API_KEY_ENV)]
        intent_key_env: String,
        #[arg(long, default_value_t = 30)]
        intent_timeout_secs: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SolverArg {
    Rf,
    Ddim,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PredictorArg {
    /// rf: v = sin(z)
    Sin,
    /// rf: v = 1; ddim: eps = 0.5 z
    Constant,
    /// ddim: eps consistent across steps, exact round trip
    Consistent,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Image { .. } => CliError::Io(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn mkdir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn json_file<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    decode(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn sample_ops(dir: &Path) -> CliResult<Vec<RegionOp>> {
    let text = fs::read_to_string(dir.join("instructions.json"))
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.join("instructions.json").display())))?;
    let sample = parse_sample(&text)?;
    let masks = load_masks(dir, &sample)?;
    Ok(sample_region_ops(&sample, &masks)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types always serialize")
}

/// Parses `args` (including the program name) and runs the command,
/// printing to `out`. Returns the process exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
}

pub fn run(command: Command, out: &mut dyn Write) -> CliResult<i32> {
    match command {
        Command::Preview {
            sample,
            k,
            k_motion,
            every,
            out: dir,
        } => {
            if k_motion == 0 || every == 0 {
                return Err(CliError::Invalid("--k-motion and --every must be at least 1".into()));
            }
            let ops = sample_ops(&sample)?;
            let steps: Vec<usize> = if k.is_empty() {
                let mut s: Vec<usize> = (0..=k_motion).step_by(every).collect();
                if s.last() != Some(&k_motion) {
                    s.push(k_motion);
                }
                s
            } else {
                k
            };
            mkdir(&dir)?;
            for &step in &steps {
                let img = render_ops_at(None, &ops, step, k_motion)?;
                let path = dir.join(format!("overlay_k{step:03}.png"));
                img.save(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                for (i, op) in ops.iter().enumerate() {
                    target_mask_at(op, step, k_motion)?.save_png(dir.join(format!("target_{i}_k{step:03}.png")))?;
                }
            }
            emit(out, &format!("wrote {} frames to {}\n", steps.len(), dir.display()))?;
            Ok(0)
        }
        Command::Run {
            latent,
            ops,
            synthetic,
            config,
            out: dir,
        } => {
            let config: DragConfig = match config {
                Some(p) => DragConfig::from_json(
                    &String::from_utf8(read(&p)?).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?,
                )?,
                None => DragConfig::default(),
            };
            let (z0, ops) = match (latent, synthetic) {
                (Some(l), None) => {
                    let ops_path = ops.ok_or_else(|| CliError::Invalid("--latent needs --ops".into()))?;
                    (Field::read_dflt(&l)?, json_file::<Vec<RegionOp>>(&ops_path)?)
                }
                (None, Some(name)) => {
                    let case = drag_suite()?
                        .into_iter()
                        .find(|c| c.name == name)
                        .ok_or_else(|| CliError::Invalid(format!("unknown synthetic case {name:?}")))?;
                    (case.z0, vec![case.op])
                }
                _ => return Err(CliError::Invalid("give either --latent with --ops, or --synthetic".into())),
            };
            let result = run_drag(&z0, &ops, &config)?;
            mkdir(&dir)?;
            write(&dir.join("result.json"), to_json(&result).as_bytes())?;
            result.final_z.write_dflt(dir.join("final.dflt"))?;
            z0.write_dflt(dir.join("z0.dflt"))?;
            write(&dir.join("ops.json"), to_json(&ops).as_bytes())?;
            let last = result.loss_trajectory.last().copied().unwrap_or(0.0);
            emit(
                out,
                &format!(
                    "{} iterations, final loss {last:.6e}, wrote {}\n",
                    result.iterations_run,
                    dir.display()
                ),
            )?;
            Ok(0)
        }
        Command::Eval {
            original,
            edited,
            ops,
            extractor,
            options,
            json,
        } => {
            let extractor: ExtractorSpec = match extractor {
                Some(s) => decode(s.as_bytes()).map_err(|e| CliError::Invalid(format!("--extractor: {e}")))?,
                None => ExtractorSpec::Identity,
            };
            let options: EvalOptions = match options {
                Some(p) => json_file(&p)?,
                None => EvalOptions::default(),
            };
            let req = EvalRequest {
                original: Field::read_dflt(&original)?,
                edited: Field::read_dflt(&edited)?,
                ops: json_file(&ops)?,
                extractor,
                options,
            };
            let report = eval(&req)?;
            let text = if json {
                to_json(&report) + "\n"
            } else {
                render_table(&[(edited.display().to_string(), report)])
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::Validate { dir, json } => {
            let report = validate_dataset(&dir)?;
            let text = if json { to_json(&report) + "\n" } else { report.to_text() };
            emit(out, &text)?;
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Mask {
            sample,
            ops,
            k_motion,
            no_sweep,
            out: path,
        } => {
            let ops = match (sample, ops) {
                (Some(s), None) => sample_ops(&s)?,
                (None, Some(p)) => json_file(&p)?,
                _ => return Err(CliError::Invalid("give either --sample or --ops".into())),
            };
            let first = ops.first().ok_or_else(|| CliError::Invalid("no region ops".into()))?;
            let (w, h) = first.source_mask().dims();
            let b = build_gradient_mask(&ops, w, h, k_motion, GradientMaskOptions { sweep: !no_sweep })?;
            b.mask.save_png(&path)?;
            emit(out, &format!("{} of {} cells editable, wrote {}\n", b.mask.count(), w * h, path.display()))?;
            Ok(0)
        }
        Command::Drift {
            solver,
            steps,
            predictor,
            latent,
            size,
            seed,
        } => {
            let z0 = match latent {
                Some(p) => Field::read_dflt(&p)?,
                None => texture(1, size, size, 1.0, seed)?,
            };
            let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02)?;
            let report = match (solver, predictor) {
                (SolverArg::Rf, PredictorArg::Sin) => roundtrip_drift(&z0, steps, Solver::RectifiedFlow(&SinVelocity))?,
                (SolverArg::Rf, PredictorArg::Constant) => {
                    roundtrip_drift(&z0, steps, Solver::RectifiedFlow(&ConstantVelocity::Uniform(1.0)))?
                }
                (SolverArg::Ddim, PredictorArg::Constant) => roundtrip_drift(
                    &z0,
                    steps,
                    Solver::Ddim {
                        schedule: &schedule,
                        predictor: &ConstantLinearNoise { scale: 0.5 },
                    },
                )?,
                (SolverArg::Ddim, PredictorArg::Consistent) => roundtrip_drift(
                    &z0,
                    steps,
                    Solver::Ddim {
                        schedule: &schedule,
                        predictor: &StepConsistentLinearNoise {
                            rho: 2.0,
                            schedule: schedule.clone(),
                        },
                    },
                )?,
                (s, p) => return Err(CliError::Invalid(format!("predictor {p:?} does not apply to solver {s:?}"))),
            };
            emit(out, &(to_json(&report) + "\n"))?;
            Ok(0)
        }
        Command::Serve {
            addr,
            workers,
            intent_url,
            intent_model,
            intent_key_env,
            intent_timeout_secs,
        } => {
            let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
            if !addr.ip().is_loopback() {
                tracing::warn!(%addr, "binding to a non-loopback address; the service has no authentication");
            }
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            let intent = intent_url.map(|url| EndpointConfig {
                url,
                model: intent_model,
                api_key_env: intent_key_env,
                timeout: Duration::from_secs(intent_timeout_secs),
                ..EndpointConfig::default()
            });
            let state = AppState::new(workers, intent);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            rt.block_on(serve(addr, state, |bound| {
                tracing::info!(%bound, workers, "dragflow service listening");
            }))
            .map_err(|e| CliError::Io(format!("{addr}: {e}")))?;
            Ok(0)
        }
    }
}
