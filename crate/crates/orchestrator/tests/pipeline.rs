use std::path::{Path, PathBuf};

use craft_core::catalog::Catalog;
use craft_orchestrator::batch::{load_scripted_jobs, run_batch, runs_csv, summarize, summary_csv};
use craft_orchestrator::pipeline::feedback_message;
use craft_orchestrator::{
    build_prompt, classify_failure, classify_initial, run_pipeline, Category, ClientError, FailureStage, Heuristics,
    HttpClient, HttpConfig, LlmClient, PolicyMode, PromptBundle, RepromptPolicy, Role, ScriptedClient, StageTally,
    Status,
};
use craft_physics::SimConfig;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn plan(rel: &str) -> String {
    std::fs::read_to_string(root().join("fixtures/plans").join(rel)).unwrap()
}

fn bundle(category: Category, image: Option<PathBuf>) -> PromptBundle {
    PromptBundle::from_files(
        category,
        category.function(),
        image,
        &Catalog::default_catalog(),
        &root().join("data/templates"),
        &Heuristics::bundled(),
    )
    .unwrap()
}

fn table_run(policy: PolicyMode, files: &[&str]) -> (craft_orchestrator::PipelineResult, ScriptedClient) {
    let client = ScriptedClient::new(files.iter().map(|f| plan(f)).collect());
    let r = run_pipeline(
        &bundle(Category::Table, None),
        &client,
        RepromptPolicy::new(policy),
        &SimConfig::default(),
        &Catalog::default_catalog(),
    )
    .unwrap();
    (r, client)
}

const FORMAT_BAD: &str = "invalid/table_hallucinated_dims.json";
const COLLISION_BAD: &str = "collision/table_extra_leg.json";
const LOOSE: &str = "geometry/table_with_loose_part.json";
const PHYSICS_BAD: &str = "physics/table_lopsided_legs.json";
const VALID: &str = "valid/table_1.json";

fn stages(r: &craft_orchestrator::PipelineResult) -> Vec<FailureStage> {
    r.attempts.iter().map(|a| a.failure_stage).collect()
}

#[test]
fn fresh_retries_after_collision() {
    let (r, client) = table_run(PolicyMode::Fresh, &[COLLISION_BAD, VALID]);
    assert_eq!(r.status, Status::Success);
    assert_eq!(r.llm_calls, 2);
    assert_eq!(stages(&r), [FailureStage::Collision, FailureStage::None]);
    assert!(r.assembly.is_some() && r.outcome.as_ref().unwrap().success);
    let calls = client.calls();
    assert_eq!(calls[0], calls[1]);
    assert!(calls.iter().flatten().all(|m| m.role != Role::Assistant));
}

#[test]
fn feedback_stops_after_second_pre_simulation_failure() {
    let (r, client) = table_run(PolicyMode::Feedback, &[FORMAT_BAD, COLLISION_BAD, COLLISION_BAD]);
    assert_eq!(r.status, Status::Failed);
    assert_eq!(r.failure_stage, FailureStage::Collision);
    assert_eq!(stages(&r), [FailureStage::Format, FailureStage::Collision]);
    assert_eq!(client.calls().len(), 2);

    let second = &client.calls()[1];
    assert_eq!(second.len(), 4);
    assert_eq!(second[2].role, Role::Assistant);
    assert_eq!(second[2].content, plan(FORMAT_BAD));
    assert!(second[3].content.contains("FORMAT"));
    assert!(second[3].content.contains("from scratch, while avoiding the errors"));
    assert!(second[3].content.contains("BadOrientationPermutation"));
}

#[test]
fn feedback_spends_both_retries() {
    let (r, client) = table_run(PolicyMode::Feedback, &[COLLISION_BAD, PHYSICS_BAD, VALID]);
    assert_eq!(r.status, Status::Success);
    assert_eq!(
        stages(&r),
        [FailureStage::Collision, FailureStage::Physics, FailureStage::None]
    );
    let third = &client.calls()[2];
    assert_eq!(third.len(), 6);
    assert!(third[5].content.contains("PHYSICS"));
    assert!(third[5].content.contains("MOVED_UNDER_LOAD"));
    // Trajectories are dropped from reports.
    assert!(third[5].content.contains("\"trajectories\":[]"));
}

#[test]
fn none_policy_calls_once() {
    let (r, client) = table_run(PolicyMode::None, &[COLLISION_BAD, VALID]);
    assert_eq!((r.status, r.failure_stage, r.llm_calls), (Status::Failed, FailureStage::Collision, 1));
    assert_eq!(client.calls().len(), 1);
}

#[test]
fn loose_part_fails_connectivity() {
    let (r, _) = table_run(PolicyMode::None, &[LOOSE]);
    assert!(matches!(r.failure_stage, FailureStage::Connectivity | FailureStage::Collision));
    assert_eq!(classify_failure(&r), StageTally { format: 0, position: 1, physics: 0 });
}

/// Expected number of calls for a sequence of per-attempt outcomes,
/// written from the retry rules directly.
fn expected_calls(mode: PolicyMode, outcomes: &[FailureStage]) -> usize {
    let mut pre = 0;
    let mut sim = 0;
    for (i, s) in outcomes.iter().enumerate() {
        let n = i + 1;
        if *s == FailureStage::None || n == 3 {
            return n;
        }
        let retry = match mode {
            PolicyMode::None => false,
            PolicyMode::Fresh => true,
            PolicyMode::Feedback => {
                if *s == FailureStage::Physics {
                    sim += 1;
                    sim == 1
                } else {
                    pre += 1;
                    pre == 1
                }
            }
        };
        if !retry {
            return n;
        }
    }
    unreachable!()
}

#[test]
fn call_budget_over_every_outcome_pattern() {
    let kinds = [
        (FORMAT_BAD, FailureStage::Format),
        (COLLISION_BAD, FailureStage::Collision),
        (PHYSICS_BAD, FailureStage::Physics),
        (VALID, FailureStage::None),
    ];
    for mode in [PolicyMode::None, PolicyMode::Fresh, PolicyMode::Feedback] {
        for a in kinds {
            for b in kinds {
                for c in kinds {
                    let files = [a.0, b.0, c.0];
                    let (r, client) = table_run(mode, &files);
                    let want = expected_calls(mode, &[a.1, b.1, c.1]);
                    assert_eq!(r.llm_calls, want, "{mode:?} {files:?}");
                    assert_eq!(client.calls().len(), want);
                    assert!(want <= 3);
                    let last = [a.1, b.1, c.1][want - 1];
                    assert_eq!(r.failure_stage, last);
                    assert_eq!(r.status == Status::Success, last == FailureStage::None);
                    if mode == PolicyMode::Fresh {
                        assert!(client.calls().iter().all(|m| m.len() == 2));
                    }
                }
            }
        }
    }
}

#[test]
fn scripted_runs_are_reproducible() {
    let files = [COLLISION_BAD, PHYSICS_BAD, VALID];
    let (a, _) = table_run(PolicyMode::Feedback, &files);
    let (b, _) = table_run(PolicyMode::Feedback, &files);
    assert_eq!(a.to_json_string(), b.to_json_string());
}

#[test]
fn client_errors_are_surfaced() {
    let client = ScriptedClient::new(vec![]);
    let r = run_pipeline(
        &bundle(Category::Table, None),
        &client,
        RepromptPolicy::new(PolicyMode::Fresh),
        &SimConfig::default(),
        &Catalog::default_catalog(),
    );
    assert_eq!(r, Err(ClientError::Exhausted(0)));

    let cfg = HttpConfig {
        api_key_env: "CRAFT_TEST_KEY_THAT_IS_NOT_SET".into(),
        ..HttpConfig::default()
    };
    assert!(matches!(HttpClient::new(cfg), Err(ClientError::MissingKey(_))));
}

#[test]
fn tallies_group_position_failures() {
    let (collision, _) = table_run(PolicyMode::None, &[COLLISION_BAD]);
    assert_eq!(classify_failure(&collision), StageTally { format: 0, position: 1, physics: 0 });
    let (missing, _) = table_run(PolicyMode::None, &["invalid/table_missing_exec_function.json"]);
    assert_eq!(classify_failure(&missing), StageTally { format: 1, position: 0, physics: 0 });
    let (ok, _) = table_run(PolicyMode::Fresh, &[PHYSICS_BAD, VALID]);
    assert_eq!(classify_failure(&ok), StageTally::default());
    assert_eq!(classify_initial(&ok), StageTally { format: 0, position: 0, physics: 1 });
}

#[test]
fn prompt_contents() {
    let hammer = build_prompt(&bundle(Category::Hammer, None));
    assert_eq!(hammer.len(), 2);
    assert_eq!((hammer[0].role, hammer[1].role), (Role::System, Role::User));
    let text = &hammer[1].content;
    assert!(text.contains("\"Head\": 1,  \"Handle\": 1"));
    assert!(text.contains("Target function: hit"));
    assert!(text.contains("CUBOID_250x150x10"));
    assert!(text.contains("HANDLE_1"));
    assert!(hammer.iter().all(|m| m.image.is_none()));

    let shelf = build_prompt(&bundle(Category::Bookshelf, Some("shelf.png".into())));
    assert!(shelf[1].content.contains("Each SHELF must be connected to two side panels."));
    assert_eq!(shelf[1].image.as_deref(), Some(Path::new("shelf.png")));

    let bus = build_prompt(&bundle(Category::Bus, None));
    assert!(bus[1].content.contains("the flat surfaces must be in contact"));
}

#[test]
fn every_category_has_a_usable_template() {
    for c in Category::ALL {
        let b = bundle(c, None);
        assert_eq!(b.function, c.function());
        assert!(!b.heuristics.minimal_parts.is_empty(), "{c:?}");
    }
}

#[test]
fn request_body_embeds_image() {
    let dir = std::env::temp_dir().join(format!("craft-orch-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let img = dir.join("x.png");
    std::fs::write(&img, [0x89, b'P', b'N', b'G']).unwrap();
    let mut msgs = build_prompt(&bundle(Category::Hammer, Some(img)));
    msgs.push(feedback_message(&craft_orchestrator::pipeline::evaluate(
        "[]",
        &bundle(Category::Hammer, None),
        &SimConfig::default(),
        &Catalog::default_catalog(),
    )));
    let body = HttpClient::body("o4-mini", &msgs).unwrap();
    assert_eq!(body["model"], "o4-mini");
    assert_eq!(body["messages"][0]["content"].as_str().unwrap(), msgs[0].content);
    let parts = body["messages"][1]["content"].as_array().unwrap();
    assert_eq!(parts[1]["image_url"]["url"], "data:image/png;base64,iVBORw==");
    assert!(body["messages"][2]["content"].is_string());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn scripted_client_reads_numbered_files_in_order() {
    let dir = root().join("fixtures/scripted/scenarios/feedback_collision_physics_valid");
    let c = ScriptedClient::from_dir(&dir).unwrap();
    assert_eq!(c.send(&[]).unwrap(), plan(COLLISION_BAD));
    assert_eq!(c.send(&[]).unwrap(), plan(PHYSICS_BAD));
    assert_eq!(c.send(&[]).unwrap(), plan(VALID));
    assert_eq!(c.send(&[]), Err(ClientError::Exhausted(3)));
}

#[test]
fn batch_tables_match_hand_counts() {
    let cat = Catalog::default_catalog();
    // Scripted clients are consumed, so each batch gets its own jobs.
    let load = || {
        load_scripted_jobs(
            &root().join("fixtures/scripted/batch"),
            &cat,
            &root().join("data/templates"),
            &Heuristics::bundled(),
        )
        .unwrap()
    };
    let jobs = load();
    assert_eq!(jobs.len(), 12);
    let policy = RepromptPolicy::new(PolicyMode::Fresh);
    let records = run_batch(&jobs, policy, &SimConfig::default(), &cat, 4);
    let runs = runs_csv(&records);
    let expected_runs = "category,attempts,status,failure_stage
hammer,1,SUCCESS,NONE
hammer,2,SUCCESS,NONE
hammer,3,FAILED,PHYSICS
bookshelf,3,FAILED,COLLISION
bookshelf,1,SUCCESS,NONE
chair,3,FAILED,FORMAT
chair,2,SUCCESS,NONE
table,3,SUCCESS,NONE
table,3,FAILED,FORMAT
bus,1,SUCCESS,NONE
skateboard,3,SUCCESS,NONE
skateboard,3,FAILED,PHYSICS
";
    assert_eq!(runs, expected_runs);

    let (_, overall) = summarize(&records);
    assert_eq!((overall.runs, overall.successes), (12, 7));
    assert_eq!(overall.initial, StageTally { format: 3, position: 4, physics: 2 });
    assert_eq!(overall.final_, StageTally { format: 2, position: 1, physics: 2 });

    let summary = summary_csv(&records);
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[1], "Hammer,3,2,66.7,1,1,0,0,0,1");
    assert_eq!(lines[2], "Bookshelf,2,1,50.0,0,1,0,0,1,0");
    assert_eq!(lines[3], "Chair,2,1,50.0,2,0,0,1,0,0");
    assert_eq!(lines[4], "Table,2,1,50.0,0,2,0,1,0,0");
    assert_eq!(lines[5], "Bus,1,1,100.0,0,0,0,0,0,0");
    assert_eq!(lines[6], "Skateboard,2,1,50.0,0,0,2,0,0,1");
    assert_eq!(lines[7], "Overall,12,7,58.3,3,4,2,2,1,2");

    let serial = run_batch(&load(), policy, &SimConfig::default(), &cat, 1);
    assert_eq!(records, serial);
}
