//! Many pipeline runs over a bounded worker pool, and their CSV tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use craft_core::catalog::Catalog;
use craft_physics::SimConfig;
use serde::Deserialize;

use crate::category::Category;
use crate::client::{ClientError, LlmClient, ScriptedClient};
use crate::heuristics::Heuristics;
use crate::pipeline::{classify_failure, classify_initial, run_pipeline, RepromptPolicy, StageTally, Status};
use crate::prompt::PromptBundle;
use crate::{OrchestratorError, PipelineResult};

pub struct BatchJob {
    pub name: String,
    pub bundle: PromptBundle,
    pub client: Box<dyn LlmClient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRecord {
    pub name: String,
    pub category: Category,
    pub result: Result<PipelineResult, ClientError>,
}

/// Runs every job on up to `workers` threads. Records come back in job
/// order.
pub fn run_batch(
    jobs: &[BatchJob],
    policy: RepromptPolicy,
    config: &SimConfig,
    catalog: &Catalog,
    workers: usize,
) -> Vec<BatchRecord> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BatchRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let workers = workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let result = run_pipeline(&job.bundle, job.client.as_ref(), policy, config, catalog);
                slots.lock().expect("slots lock")[i] = Some(BatchRecord {
                    name: job.name.clone(),
                    category: job.bundle.category,
                    result,
                });
            });
        }
    });
    slots
        .into_inner()
        .expect("slots lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

#[derive(Debug, Deserialize)]
struct RunSpec {
    category: String,
    #[serde(default)]
    image: Option<PathBuf>,
}

/// Jobs from a directory of scripted runs. Each subdirectory holds a
/// `run.json` (`{"category": ..., "image": ...}`) and numbered response
/// files. Subdirectories are taken in name order.
pub fn load_scripted_jobs(
    dir: &Path,
    catalog: &Catalog,
    templates: &Path,
    heuristics: &Heuristics,
) -> Result<Vec<BatchJob>, OrchestratorError> {
    load_jobs(dir, catalog, Some(templates), heuristics, |run| {
        let client = ScriptedClient::from_dir(run).map_err(|source| OrchestratorError::Io {
            path: run.display().to_string(),
            source,
        })?;
        Ok(Box::new(client))
    })
}

/// Like [`load_scripted_jobs`], with the client for each run directory
/// supplied by `client_for`. Without `templates` the bundled ones are used.
pub fn load_jobs(
    dir: &Path,
    catalog: &Catalog,
    templates: Option<&Path>,
    heuristics: &Heuristics,
    client_for: impl Fn(&Path) -> Result<Box<dyn LlmClient>, OrchestratorError>,
) -> Result<Vec<BatchJob>, OrchestratorError> {
    let io = |path: &Path, source| OrchestratorError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut runs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("run.json").is_file())
        .collect();
    runs.sort();
    let mut jobs = Vec::new();
    for run in runs {
        let spec_path = run.join("run.json");
        let spec: RunSpec = serde_json::from_str(&crate::read(&spec_path)?)
            .map_err(|e| OrchestratorError::Data(format!("{}: {e}", spec_path.display())))?;
        let category = Category::parse(&spec.category)
            .ok_or_else(|| OrchestratorError::Data(format!("{}: unknown category {}", spec_path.display(), spec.category)))?;
        let image = spec.image.map(|p| if p.is_relative() { run.join(p) } else { p });
        let bundle = match templates {
            Some(t) => PromptBundle::from_files(category, category.function(), image, catalog, t, heuristics)?,
            None => PromptBundle::bundled(category, category.function(), image, catalog, heuristics)?,
        };
        jobs.push(BatchJob {
            name: run.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            bundle,
            client: client_for(&run)?,
        });
    }
    Ok(jobs)
}

/// One row per run: `category,attempts,status,failure_stage`. Runs whose
/// client failed have status `ERROR` and no attempts.
pub fn runs_csv(records: &[BatchRecord]) -> String {
    let mut out = String::from("category,attempts,status,failure_stage\n");
    for r in records {
        let (attempts, status, stage) = match &r.result {
            Ok(p) => (
                p.attempts.len(),
                match p.status {
                    Status::Success => "SUCCESS",
                    Status::Failed => "FAILED",
                },
                p.failure_stage.name(),
            ),
            Err(_) => (0, "ERROR", "NONE"),
        };
        let _ = writeln!(out, "{},{},{},{}", r.category.slug(), attempts, status, stage);
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CategorySummary {
    pub runs: u32,
    pub successes: u32,
    pub initial: StageTally,
    pub final_: StageTally,
}

impl CategorySummary {
    fn add(&mut self, result: &PipelineResult) {
        self.runs += 1;
        self.successes += u32::from(result.status == Status::Success);
        self.initial += classify_initial(result);
        self.final_ += classify_failure(result);
    }

    pub fn success_rate(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            100.0 * self.successes as f64 / self.runs as f64
        }
    }
}

/// Per-category summaries in catalog order, then the overall row. Client
/// errors are left out.
pub fn summarize(records: &[BatchRecord]) -> (Vec<(Category, CategorySummary)>, CategorySummary) {
    let mut rows: Vec<(Category, CategorySummary)> = Vec::new();
    let mut overall = CategorySummary::default();
    for c in Category::ALL {
        let mut s = CategorySummary::default();
        for r in records.iter().filter(|r| r.category == c) {
            if let Ok(p) = &r.result {
                s.add(p);
                overall.add(p);
            }
        }
        if s.runs > 0 {
            rows.push((c, s));
        }
    }
    (rows, overall)
}

/// Success rate and failure counts per category. The failure columns are
/// split by the first attempt and the final one.
pub fn summary_csv(records: &[BatchRecord]) -> String {
    let (rows, overall) = summarize(records);
    let mut out = String::from(
        "class,runs,successes,success_rate,initial_format,initial_position,initial_physics,final_format,final_position,final_physics\n",
    );
    let line = |out: &mut String, name: &str, s: &CategorySummary| {
        let _ = writeln!(
            out,
            "{},{},{},{:.1},{},{},{},{},{},{}",
            name,
            s.runs,
            s.successes,
            s.success_rate(),
            s.initial.format,
            s.initial.position,
            s.initial.physics,
            s.final_.format,
            s.final_.position,
            s.final_.physics
        );
    };
    for (c, s) in &rows {
        line(&mut out, c.name(), s);
    }
    line(&mut out, "Overall", &overall);
    out
}
