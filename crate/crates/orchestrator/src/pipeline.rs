//! The validate/re-prompt loop.

use craft_core::assembler::{connectivity_check, place_parts, Assembly, PlacementError};
use craft_core::catalog::Catalog;
use craft_core::collision::validate_collisions;
use craft_core::plan::parse_plan_text;
use craft_physics::{run_function_test, SimConfig, SimOutcome};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::client::{ClientError, LlmClient};
use crate::prompt::{build_prompt, Message, PromptBundle};

/// Hard ceiling on LLM calls per run, whatever the policy.
pub const MAX_CALLS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolicyMode {
    None,
    Fresh,
    Feedback,
}

impl PolicyMode {
    pub fn parse(s: &str) -> Option<PolicyMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Some(PolicyMode::None),
            "fresh" => Some(PolicyMode::Fresh),
            "feedback" => Some(PolicyMode::Feedback),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepromptPolicy {
    pub mode: PolicyMode,
    /// FRESH: retries allowed after any failure.
    pub fresh_retries: usize,
    /// FEEDBACK: retries after a failure before the physics test.
    pub pre_sim_retries: usize,
    /// FEEDBACK: retries after a failed physics test.
    pub sim_retries: usize,
}

impl RepromptPolicy {
    pub fn new(mode: PolicyMode) -> RepromptPolicy {
        RepromptPolicy {
            mode,
            fresh_retries: 2,
            pre_sim_retries: 1,
            sim_retries: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureStage {
    Format,
    Collision,
    Connectivity,
    Physics,
    None,
}

impl FailureStage {
    pub fn name(self) -> &'static str {
        match self {
            FailureStage::Format => "FORMAT",
            FailureStage::Collision => "COLLISION",
            FailureStage::Connectivity => "CONNECTIVITY",
            FailureStage::Physics => "PHYSICS",
            FailureStage::None => "NONE",
        }
    }

    pub fn before_simulation(self) -> bool {
        matches!(
            self,
            FailureStage::Format | FailureStage::Collision | FailureStage::Connectivity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Success,
    Failed,
}

/// One validation step and its machine report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: FailureStage,
    pub ok: bool,
    pub report: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub raw: String,
    pub stages: Vec<StageRecord>,
    pub failure_stage: FailureStage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResult {
    pub status: Status,
    pub failure_stage: FailureStage,
    pub llm_calls: usize,
    pub attempts: Vec<Attempt>,
    /// Final assembly and test outcome, on success.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assembly: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<SimOutcome>,
}

impl PipelineResult {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline result serializes")
    }
}

struct Evaluated {
    attempt: Attempt,
    success: Option<(Assembly, SimOutcome)>,
}

fn placement_stage(e: &PlacementError) -> FailureStage {
    match e {
        PlacementError::HoleExceedsOwner { .. } => FailureStage::Collision,
        _ => FailureStage::Connectivity,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// Runs every validation step on one raw response, stopping at the first
/// failing one.
pub fn evaluate(raw: &str, bundle: &PromptBundle, config: &SimConfig, catalog: &Catalog) -> Attempt {
    evaluate_full(raw, bundle, config, catalog).attempt
}

fn evaluate_full(raw: &str, bundle: &PromptBundle, config: &SimConfig, catalog: &Catalog) -> Evaluated {
    let mut stages = Vec::new();
    let fail = |stages: Vec<StageRecord>, stage| Evaluated {
        attempt: Attempt {
            raw: raw.to_string(),
            stages,
            failure_stage: stage,
        },
        success: None,
    };

    let plan = match parse_plan_text(raw, catalog) {
        Ok(p) => {
            stages.push(StageRecord {
                stage: FailureStage::Format,
                ok: true,
                report: json!({ "ok": true, "errors": [] }),
            });
            p
        }
        Err(report) => {
            stages.push(StageRecord {
                stage: FailureStage::Format,
                ok: false,
                report: to_value(&report),
            });
            return fail(stages, FailureStage::Format);
        }
    };

    let assembly = match place_parts(&plan, catalog) {
        Ok(a) => a,
        Err(e) => {
            let stage = placement_stage(&e);
            let mut report = to_value(&e);
            report["message"] = json!(e.to_string());
            stages.push(StageRecord {
                stage,
                ok: false,
                report: json!({ "ok": false, "placement": report }),
            });
            return fail(stages, stage);
        }
    };

    let collisions = validate_collisions(&assembly);
    stages.push(StageRecord {
        stage: FailureStage::Collision,
        ok: collisions.ok,
        report: to_value(&collisions),
    });
    if !collisions.ok {
        return fail(stages, FailureStage::Collision);
    }

    match connectivity_check(&assembly) {
        Ok(()) => stages.push(StageRecord {
            stage: FailureStage::Connectivity,
            ok: true,
            report: json!({ "ok": true, "components": [] }),
        }),
        Err(e) => {
            stages.push(StageRecord {
                stage: FailureStage::Connectivity,
                ok: false,
                report: json!({ "ok": false, "components": e.components }),
            });
            return fail(stages, FailureStage::Connectivity);
        }
    }

    let mut outcome = run_function_test(bundle.function, &assembly, config, None);
    outcome.trajectories.clear();
    stages.push(StageRecord {
        stage: FailureStage::Physics,
        ok: outcome.success,
        report: to_value(&outcome),
    });
    if !outcome.success {
        return fail(stages, FailureStage::Physics);
    }
    Evaluated {
        attempt: Attempt {
            raw: raw.to_string(),
            stages,
            failure_stage: FailureStage::None,
        },
        success: Some((assembly, outcome)),
    }
}

/// Message appended after a failed attempt in FEEDBACK mode.
pub fn feedback_message(attempt: &Attempt) -> Message {
    let report = attempt
        .stages
        .last()
        .map(|s| serde_json::to_string(&s.report).expect("report serializes"))
        .unwrap_or_default();
    Message::user(format!(
        "The plan failed the {} validation. Report:\n{}\n\nPlease create a new plan, from scratch, while avoiding the errors above. \
         Output only the JSON list of parts.",
        attempt.failure_stage.name(),
        report
    ))
}

struct Budget {
    policy: RepromptPolicy,
    pre_sim_used: usize,
    sim_used: usize,
    fresh_used: usize,
}

impl Budget {
    /// Whether a failure at `stage` earns another call, consuming it if so.
    fn take(&mut self, stage: FailureStage) -> bool {
        match self.policy.mode {
            PolicyMode::None => false,
            PolicyMode::Fresh => {
                self.fresh_used += 1;
                self.fresh_used <= self.policy.fresh_retries
            }
            PolicyMode::Feedback if stage.before_simulation() => {
                self.pre_sim_used += 1;
                self.pre_sim_used <= self.policy.pre_sim_retries
            }
            PolicyMode::Feedback => {
                self.sim_used += 1;
                self.sim_used <= self.policy.sim_retries
            }
        }
    }
}

/// Prompts `client`, validates its answer and re-prompts per `policy`.
/// Client errors abort the run and are returned as-is.
pub fn run_pipeline(
    bundle: &PromptBundle,
    client: &dyn LlmClient,
    policy: RepromptPolicy,
    config: &SimConfig,
    catalog: &Catalog,
) -> Result<PipelineResult, ClientError> {
    let mut initial = build_prompt(bundle);
    if !client.supports_images() {
        for m in &mut initial {
            m.image = None;
        }
    }
    let mut conversation = initial.clone();
    let mut budget = Budget {
        policy,
        pre_sim_used: 0,
        sim_used: 0,
        fresh_used: 0,
    };
    let mut attempts = Vec::new();

    loop {
        let messages = match policy.mode {
            PolicyMode::Feedback => &conversation,
            _ => &initial,
        };
        let raw = client.send(messages)?;
        let ev = evaluate_full(&raw, bundle, config, catalog);
        let stage = ev.attempt.failure_stage;
        if let Some((assembly, outcome)) = ev.success {
            attempts.push(ev.attempt);
            return Ok(PipelineResult {
                status: Status::Success,
                failure_stage: FailureStage::None,
                llm_calls: attempts.len(),
                attempts,
                assembly: Some(assembly.to_json()),
                outcome: Some(outcome),
            });
        }
        if policy.mode == PolicyMode::Feedback {
            conversation.push(Message::assistant(raw));
            conversation.push(feedback_message(&ev.attempt));
        }
        attempts.push(ev.attempt);
        if attempts.len() >= MAX_CALLS || !budget.take(stage) {
            return Ok(PipelineResult {
                status: Status::Failed,
                failure_stage: stage,
                llm_calls: attempts.len(),
                attempts,
                assembly: None,
                outcome: None,
            });
        }
    }
}

/// Failure counts grouped as format, position (collision or connectivity)
/// and physics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTally {
    pub format: u32,
    pub position: u32,
    pub physics: u32,
}

impl StageTally {
    pub fn of(stage: FailureStage) -> StageTally {
        let mut t = StageTally::default();
        match stage {
            FailureStage::Format => t.format = 1,
            FailureStage::Collision | FailureStage::Connectivity => t.position = 1,
            FailureStage::Physics => t.physics = 1,
            FailureStage::None => {}
        }
        t
    }

    pub fn total(&self) -> u32 {
        self.format + self.position + self.physics
    }
}

impl std::ops::Add for StageTally {
    type Output = StageTally;
    fn add(self, o: StageTally) -> StageTally {
        StageTally {
            format: self.format + o.format,
            position: self.position + o.position,
            physics: self.physics + o.physics,
        }
    }
}

impl std::ops::AddAssign for StageTally {
    fn add_assign(&mut self, o: StageTally) {
        *self = *self + o;
    }
}

impl std::iter::Sum for StageTally {
    fn sum<I: Iterator<Item = StageTally>>(it: I) -> StageTally {
        it.fold(StageTally::default(), |a, b| a + b)
    }
}

/// Tally of the run's final outcome.
pub fn classify_failure(result: &PipelineResult) -> StageTally {
    match result.status {
        Status::Success => StageTally::default(),
        Status::Failed => StageTally::of(result.failure_stage),
    }
}

/// Tally of the first attempt alone.
pub fn classify_initial(result: &PipelineResult) -> StageTally {
    result
        .attempts
        .first()
        .map_or(StageTally::default(), |a| StageTally::of(a.failure_stage))
}
