//! `craft`: validate, build, simulate and score craft plans, and run the
//! LLM pipeline over one image or a batch.
//!
//! JSON goes to stdout, diagnostics to stderr. Exit status is 0 when the
//! requested stage succeeds, 1 when the input fails validation or testing,
//! and 2 on usage or I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use craft_core::assembler::{connectivity_check, place_parts};
use craft_core::catalog::Catalog;
use craft_core::collision::validate_collisions;
use craft_core::mesh::{assembly_meshes, write_obj};
use craft_core::plan::{check_plan, parse_plan_text, CraftPlan};
use craft_metrics::{compare_assembly, compare_files, load_mesh, MetricsConfig};
use craft_orchestrator::batch::{load_jobs, run_batch, runs_csv, summarize, summary_csv};
use craft_orchestrator::{
    run_pipeline, Category, Heuristics, HttpClient, HttpConfig, LlmClient, PolicyMode, PromptBundle, RepromptPolicy,
    ScriptedClient, Status,
};
use craft_physics::{run_function_test, Function, SimConfig};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "craft", version, about = "Craft assembly plans: validate, build, simulate, score")]
struct Cli {
    /// Catalog JSON; the bundled 41-object catalog by default.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a plan's format and print the FormatReport.
    Validate { plan: PathBuf },
    /// Place every part and print the assembly JSON.
    Build {
        plan: PathBuf,
        /// Also write the assembly as a Wavefront OBJ.
        #[arg(long)]
        obj: Option<PathBuf>,
    },
    /// Run a function test and print the SimOutcome.
    Simulate {
        plan: PathBuf,
        #[arg(long, value_parser = parse_function)]
        function: Function,
        /// Write per-step body states here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Keep sampled trajectories in the printed outcome.
        #[arg(long)]
        trajectories: bool,
        #[arg(long)]
        sim_config: Option<PathBuf>,
    },
    /// Compare a generated craft (OBJ, or a plan JSON) with a reference OBJ.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "gen")]
        generated: PathBuf,
        #[arg(long, default_value_t = craft_metrics::DEFAULT_SAMPLES)]
        n: usize,
        #[arg(long, default_value_t = craft_metrics::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = craft_metrics::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prompt an LLM for one image and validate its plans.
    Pipeline {
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long, value_parser = parse_category)]
        category: Category,
        /// Defaults to the category's function.
        #[arg(long, value_parser = parse_function)]
        function: Option<Function>,
        #[arg(long, value_parser = parse_policy, default_value = "fresh")]
        policy: PolicyMode,
        /// Directory of numbered canned responses.
        #[arg(long, conflicts_with = "config")]
        responses: Option<PathBuf>,
        /// HTTP client config JSON (endpoint, model, api_key_env).
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the pipeline over a directory of runs and write CSV tables.
    Batch {
        /// One subdirectory per run, each with a run.json.
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, value_parser = parse_policy, default_value = "fresh")]
        policy: PolicyMode,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Use this HTTP config instead of the canned responses in each run.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
        /// Directory for runs.csv and summary.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct Inputs {
    /// Directory of per-category template plans.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    heuristics: Option<PathBuf>,
    #[arg(long)]
    sim_config: Option<PathBuf>,
}

fn parse_function(s: &str) -> Result<Function, String> {
    Function::parse(s).ok_or_else(|| format!("unknown function {s:?} (hit, support, rolling)"))
}

fn parse_category(s: &str) -> Result<Category, String> {
    Category::parse(s).ok_or_else(|| format!("unknown category {s:?}"))
}

fn parse_policy(s: &str) -> Result<PolicyMode, String> {
    PolicyMode::parse(s).ok_or_else(|| format!("unknown policy {s:?} (none, fresh, feedback)"))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes to stdout. A closed pipe (`craft ... | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print<T: Serialize>(v: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

fn load_catalog(path: Option<&Path>) -> Result<Catalog> {
    match path {
        Some(p) => Catalog::load(p).with_context(|| format!("cannot load catalog {}", p.display())),
        None => Ok(Catalog::default_catalog()),
    }
}

fn sim_config(path: Option<&Path>) -> Result<SimConfig> {
    match path {
        Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("bad sim config {}", p.display())),
        None => Ok(SimConfig::default()),
    }
}

fn heuristics(path: Option<&Path>) -> Result<Heuristics> {
    match path {
        Some(p) => Ok(Heuristics::load(p)?),
        None => Ok(Heuristics::bundled()),
    }
}

fn http_client(path: &Path) -> Result<HttpClient> {
    let config: HttpConfig = serde_json::from_str(&read(path)?).with_context(|| format!("bad client config {}", path.display()))?;
    Ok(HttpClient::new(config)?)
}

/// Parses a plan file, printing the FormatReport when it is invalid.
fn plan_or_report(path: &Path, catalog: &Catalog) -> Result<Option<CraftPlan>> {
    match parse_plan_text(&read(path)?, catalog) {
        Ok(p) => Ok(Some(p)),
        Err(report) => {
            print(&report)?;
            Ok(None)
        }
    }
}

/// Returns whether the command's stage succeeded.
fn run(cli: Cli) -> Result<bool> {
    let catalog = load_catalog(cli.catalog.as_deref())?;
    match cli.command {
        Command::Validate { plan } => {
            let raw = read(&plan)?;
            let report = match craft_core::plan::normalize_raw(&raw) {
                Ok(value) => check_plan(&value, &catalog).1,
                Err(_) => parse_plan_text(&raw, &catalog).err().expect("syntax error is reported"),
            };
            print(&report)?;
            Ok(report.ok)
        }

        Command::Build { plan, obj } => {
            let Some(plan) = plan_or_report(&plan, &catalog)? else {
                return Ok(false);
            };
            let assembly = match place_parts(&plan, &catalog) {
                Ok(a) => a,
                Err(e) => {
                    print(&json!({ "ok": false, "placement": e, "message": e.to_string() }))?;
                    return Ok(false);
                }
            };
            let collisions = validate_collisions(&assembly);
            if !collisions.ok {
                eprintln!("warning: {} colliding pair(s)", collisions.pairs.len());
            }
            if let Err(e) = connectivity_check(&assembly) {
                eprintln!("warning: {e}");
            }
            if let Some(path) = obj {
                write(&path, &write_obj(&assembly_meshes(&assembly)))?;
            }
            emit(&assembly.to_json_string())?;
            Ok(true)
        }

        Command::Simulate {
            plan,
            function,
            trace,
            trajectories,
            sim_config: cfg,
        } => {
            let config = sim_config(cfg.as_deref())?;
            let Some(plan) = plan_or_report(&plan, &catalog)? else {
                return Ok(false);
            };
            let assembly = match place_parts(&plan, &catalog) {
                Ok(a) => a,
                Err(e) => {
                    print(&json!({ "ok": false, "placement": e, "message": e.to_string() }))?;
                    return Ok(false);
                }
            };
            let mut outcome = match trace {
                Some(path) => {
                    let file = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
                    let mut w = std::io::BufWriter::new(file);
                    let o = run_function_test(function, &assembly, &config, Some(&mut w));
                    std::io::Write::flush(&mut w)?;
                    o
                }
                None => run_function_test(function, &assembly, &config, None),
            };
            if !trajectories {
                outcome.trajectories.clear();
            }
            print(&outcome)?;
            Ok(outcome.success)
        }

        Command::Metrics {
            reference,
            generated,
            n,
            threshold,
            seed,
            out,
        } => {
            let config = MetricsConfig {
                samples: n,
                threshold,
                seed,
            };
            let is_plan = generated.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            let report = if is_plan {
                let Some(plan) = plan_or_report(&generated, &catalog)? else {
                    return Ok(false);
                };
                let assembly = place_parts(&plan, &catalog).context("plan cannot be placed")?;
                compare_assembly(&assembly, &load_mesh(&reference)?, &config)?
            } else {
                compare_files(&generated, &reference, &config)?
            };
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = out {
                write(&path, &text)?;
            }
            emit(&text)?;
            Ok(true)
        }

        Command::Pipeline {
            image,
            category,
            function,
            policy,
            responses,
            config,
            inputs,
            out,
        } => {
            let h = heuristics(inputs.heuristics.as_deref())?;
            let function = function.unwrap_or(category.function());
            let bundle = match &inputs.templates {
                Some(t) => PromptBundle::from_files(category, function, image, &catalog, t, &h)?,
                None => PromptBundle::bundled(category, function, image, &catalog, &h)?,
            };
            let client: Box<dyn LlmClient> = match (responses, config) {
                (Some(dir), _) => Box::new(
                    ScriptedClient::from_dir(&dir).with_context(|| format!("cannot read responses {}", dir.display()))?,
                ),
                (None, Some(cfg)) => Box::new(http_client(&cfg)?),
                (None, None) => bail!("pipeline needs --responses or --config"),
            };
            let sim = sim_config(inputs.sim_config.as_deref())?;
            let result = run_pipeline(&bundle, client.as_ref(), RepromptPolicy::new(policy), &sim, &catalog)?;
            let text = result.to_json_string();
            if let Some(path) = out {
                write(&path, &text)?;
            }
            emit(&text)?;
            Ok(result.status == Status::Success)
        }

        Command::Batch {
            runs,
            policy,
            jobs,
            config,
            inputs,
            out,
        } => {
            let h = heuristics(inputs.heuristics.as_deref())?;
            let sim = sim_config(inputs.sim_config.as_deref())?;
            let http = config.as_deref().map(|p| -> Result<HttpConfig> {
                serde_json::from_str(&read(p)?).with_context(|| format!("bad client config {}", p.display()))
            });
            let http = http.transpose()?;
            let batch = load_jobs(&runs, &catalog, inputs.templates.as_deref(), &h, |run| {
                Ok(match &http {
                    Some(cfg) => Box::new(HttpClient::new(cfg.clone())?),
                    None => Box::new(ScriptedClient::from_dir(run).map_err(|source| {
                        craft_orchestrator::OrchestratorError::Io {
                            path: run.display().to_string(),
                            source,
                        }
                    })?),
                })
            })?;
            if batch.is_empty() {
                bail!("no runs found under {}", runs.display());
            }
            let records = run_batch(&batch, RepromptPolicy::new(policy), &sim, &catalog, jobs);
            for r in &records {
                if let Err(e) = &r.result {
                    eprintln!("{}: {e}", r.name);
                }
            }
            std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
            let runs_path = out.join("runs.csv");
            let summary_path = out.join("summary.csv");
            write(&runs_path, &runs_csv(&records))?;
            write(&summary_path, &summary_csv(&records))?;
            let (_, overall) = summarize(&records);
            print(&json!({
                "runs": records.len(),
                "errors": records.iter().filter(|r| r.result.is_err()).count(),
                "successes": overall.successes,
                "success_rate": overall.success_rate(),
                "runs_csv": runs_path,
                "summary_csv": summary_path,
            }))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
