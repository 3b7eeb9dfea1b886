//! Benchmark harness: scenarios, repeated perturbed queries, and the cost,
//! consistency and runtime metrics computed from the raw records.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collision::{SceneDoc, SceneObjectDoc};
use crate::error::{Error, Result};
use crate::kinematics::{Configuration, PoseDoc, RobotModel, RobotSpecDoc};
use crate::lattice::GoalConstraint;
use crate::planner_api::{Planner, PlannerId, PlannerInterface, PlannerParams};

/// Protocol constants used when a scenario leaves them out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessDefaults {
    pub repetitions_single: usize,
    pub repetitions_multi: usize,
    pub time_limit_single: Duration,
    pub time_limit_multi: Duration,
    /// Goal perturbation, degrees, applied to one joint.
    pub perturbation_deg: f64,
    pub max_workers: usize,
}

pub const DEFAULTS: HarnessDefaults = HarnessDefaults {
    repetitions_single: 10,
    repetitions_multi: 5,
    time_limit_single: Duration::from_secs(5),
    time_limit_multi: Duration::from_secs(20),
    perturbation_deg: 2.0,
    max_workers: 6,
};

impl Default for HarnessDefaults {
    fn default() -> Self {
        DEFAULTS
    }
}

// ---------------------------------------------------------------------------
// Metrics

/// Moves one uniformly chosen joint of a joint goal by `magnitude_deg`
/// degrees with a uniformly chosen sign, clamped to the joint limits.
pub fn perturb_goal<R: Rng + ?Sized>(
    goal: &GoalConstraint,
    robot: &RobotModel,
    magnitude_deg: f64,
    rng: &mut R,
) -> Result<Configuration> {
    let target = goal
        .joint_target()
        .ok_or_else(|| Error::KindMismatch("only joint goals can be perturbed".into()))?;
    if !(magnitude_deg >= 0.0 && magnitude_deg.is_finite()) {
        return Err(Error::param("perturbation_deg", "must be non-negative"));
    }
    robot.check_dimension(target)?;
    let mut q = target.to_vec();
    let j = rng.random_range(0..q.len());
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let limits = robot.joints[j].limits;
    q[j] = (q[j] + sign * magnitude_deg.to_radians()).clamp(limits.lo, limits.hi);
    Ok(q)
}

/// Coefficient of variation in percent, with the population standard deviation.
pub fn compute_cv(costs: &[f64]) -> Result<f64> {
    if costs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / n;
    if !(mean > 0.0) {
        return Err(Error::ZeroMean);
    }
    // the rounded mean of identical values can sit an ulp away from them
    if costs.iter().all(|&c| c == costs[0]) {
        return Ok(0.0);
    }
    let var = costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
    Ok(100.0 * var.sqrt() / mean)
}

/// `t / t_min` over successful entries; failures (`None`) stay `None`.
pub fn effective_runtime_ratios(times: &[Option<f64>]) -> Result<Vec<Option<f64>>> {
    let t_min = times
        .iter()
        .flatten()
        .copied()
        .reduce(f64::min)
        .ok_or(Error::AllFailed)?;
    Ok(times
        .iter()
        .map(|t| t.map(|t| if t == t_min { 1.0 } else { t / t_min }))
        .collect())
}

// ---------------------------------------------------------------------------
// Scenario documents

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    /// Path, relative to the scenario file.
    Path(String),
    Inline(T),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotEntry {
    pub name: String,
    pub spec: Source<RobotSpecDoc>,
    #[serde(default)]
    pub base: PoseDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_effector: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub start: BTreeMap<String, Vec<f64>>,
    pub goal: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub robots: Vec<RobotEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<Source<SceneDoc>>,
    pub problems: Vec<ProblemDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation_deg: Option<f64>,
    /// Seconds; applies to planners without their own `time_limit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Planner parameter maps; the optional `label` key names the column group.
    pub planners: Vec<BTreeMap<String, String>>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub starts: BTreeMap<String, Configuration>,
    pub goals: BTreeMap<String, Configuration>,
}

#[derive(Debug, Clone)]
pub struct PlannerEntry {
    pub label: String,
    pub params: PlannerParams,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub world: PlannerInterface,
    pub robots: Vec<String>,
    pub problems: Vec<Problem>,
    pub repetitions: usize,
    pub perturbation_deg: f64,
    pub planners: Vec<PlannerEntry>,
    pub seed: u64,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ScenarioInvalid(msg.into())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Syntax(format!("{}: {e}", path.display())))
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let doc: ScenarioDoc = read_json(path)?;
        Self::from_doc(doc, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
        Self::from_doc(doc, base_dir)
    }

    pub fn from_doc(doc: ScenarioDoc, base_dir: &Path) -> Result<Self> {
        let mut world = PlannerInterface::new();
        if let Some(scene) = &doc.scene {
            let scene: SceneDoc = match scene {
                Source::Path(p) => read_json(&base_dir.join(p))?,
                Source::Inline(s) => s.clone(),
            };
            for obj in &scene.objects {
                add_object(&mut world, obj)?;
            }
        }
        if doc.robots.is_empty() {
            return Err(invalid("no robots"));
        }
        let mut robots = Vec::new();
        for entry in &doc.robots {
            let spec: RobotSpecDoc = match &entry.spec {
                Source::Path(p) => read_json(&base_dir.join(p))?,
                Source::Inline(s) => s.clone(),
            };
            let model = RobotModel::from_doc(&spec)?;
            world.add_articulation(model, &entry.name, entry.base.to_pose()?, entry.end_effector.as_deref())?;
            robots.push(entry.name.clone());
        }
        let multi = robots.len() > 1;

        let repetitions = doc.repetitions.unwrap_or(if multi {
            DEFAULTS.repetitions_multi
        } else {
            DEFAULTS.repetitions_single
        });
        if repetitions == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        let perturbation_deg = doc.perturbation_deg.unwrap_or(DEFAULTS.perturbation_deg);
        if !(perturbation_deg >= 0.0 && perturbation_deg.is_finite()) {
            return Err(invalid("perturbation must be non-negative"));
        }
        let time_limit = match doc.time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => return Err(invalid("time limit must be positive")),
            Some(t) => Duration::from_secs_f64(t),
            None if multi => DEFAULTS.time_limit_multi,
            None => DEFAULTS.time_limit_single,
        };

        if doc.planners.is_empty() {
            return Err(invalid("no planners"));
        }
        let mut planners: Vec<PlannerEntry> = Vec::new();
        for map in &doc.planners {
            let mut map = map.clone();
            let label = map.remove("label");
            map.entry("time_limit".into())
                .or_insert_with(|| time_limit.as_secs_f64().to_string());
            let params = PlannerParams::parse(&map)?;
            if params.planner_id.is_multi_robot() != multi {
                return Err(invalid(format!(
                    "{} does not fit a {}-robot scenario",
                    params.planner_id,
                    robots.len()
                )));
            }
            if params.planner_id == PlannerId::Wpase && params.num_workers > DEFAULTS.max_workers {
                return Err(invalid(format!(
                    "{} workers requested, at most {} allowed",
                    params.num_workers, DEFAULTS.max_workers
                )));
            }
            let label = label.unwrap_or_else(|| params.planner_id.to_string());
            if planners.iter().any(|p| p.label == label) {
                return Err(invalid(format!("planner label `{label}` used twice")));
            }
            planners.push(PlannerEntry { label, params });
        }

        if doc.problems.is_empty() {
            return Err(invalid("no problems"));
        }
        let snapshot = world.scene().frozen_snapshot();
        let mut problems = Vec::new();
        for (i, p) in doc.problems.iter().enumerate() {
            let id = p.id.clone().unwrap_or_else(|| i.to_string());
            for name in p.start.keys().chain(p.goal.keys()) {
                if !robots.contains(name) {
                    return Err(invalid(format!("problem {id}: unknown robot `{name}`")));
                }
            }
            for name in &robots {
                let model = &snapshot.robot(name)?.model;
                let (Some(s), Some(g)) = (p.start.get(name), p.goal.get(name)) else {
                    return Err(invalid(format!("problem {id}: no start or goal for `{name}`")));
                };
                for q in [s, g] {
                    model
                        .check_limits(q)
                        .map_err(|e| invalid(format!("problem {id}, robot {name}: {e}")))?;
                }
                if snapshot.in_collision(name, s)? {
                    return Err(invalid(format!("problem {id}: start of `{name}` in collision")));
                }
            }
            if multi && snapshot.robots_in_collision(&p.start)? {
                return Err(invalid(format!("problem {id}: starts collide")));
            }
            problems.push(Problem {
                id,
                starts: p.start.clone(),
                goals: p.goal.clone(),
            });
        }

        Ok(Scenario {
            world,
            robots,
            problems,
            repetitions,
            perturbation_deg,
            planners,
            seed: doc.seed.unwrap_or(0),
        })
    }

    pub fn is_multi_robot(&self) -> bool {
        self.robots.len() > 1
    }
}

fn add_object(world: &mut PlannerInterface, obj: &SceneObjectDoc) -> Result<()> {
    obj.to_object()?;
    let pose = obj.pose.to_pose()?;
    match (obj.size, obj.radius) {
        (Some(size), _) => world.add_box(&obj.name, size, pose),
        (_, Some(r)) => world.add_sphere(&obj.name, r, pose),
        _ => unreachable!("to_object accepted the shape"),
    }
}

// ---------------------------------------------------------------------------
// Running

/// One query outcome; one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub problem_id: String,
    pub rep: usize,
    pub planner: String,
    pub success: bool,
    /// End-effector path length, meters; empty on failure.
    pub ee_cost_m: Option<f64>,
    pub planner_cost: Option<f64>,
    pub time_s: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Replaces the scenario's seed.
    pub seed: Option<u64>,
    /// Writes 0 for every time so reruns compare byte for byte.
    pub mask_time: bool,
}

fn nominal_bound(p: &PlannerParams) -> f64 {
    match p.planner_id {
        PlannerId::WAstar | PlannerId::Wpase => p.w,
        PlannerId::AraStar => p.w_final,
        PlannerId::MhaStar => p.w * p.w2,
        PlannerId::Xecbs => p.w_low * p.w_high,
    }
}

fn run_query(
    planner: &Planner,
    robots: &[String],
    starts: &BTreeMap<String, Configuration>,
    goals: &BTreeMap<String, Configuration>,
) -> Result<crate::planner_api::Trajectory> {
    if planner.params().planner_id.is_multi_robot() {
        let goals = goals
            .iter()
            .map(|(k, v)| (k.clone(), GoalConstraint::joint(v.clone())))
            .collect();
        planner.plan_multi(starts, &goals)
    } else {
        let r = &robots[0];
        planner.plan(&starts[r], GoalConstraint::joint(goals[r].clone()))
    }
}

/// Runs every problem x repetition x planner in order. Repetition 0 uses
/// the nominal goals; later repetitions perturb each robot's goal. Query
/// failures become records with `success = false`.
pub fn run_benchmark(scenario: &Scenario, options: RunOptions) -> Result<Vec<BenchmarkRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed.unwrap_or(scenario.seed));
    let robot_names: Vec<&str> = scenario.robots.iter().map(String::as_str).collect();
    let planners: Vec<(String, Planner)> = scenario
        .planners
        .iter()
        .map(|p| Ok((p.label.clone(), scenario.world.make_planner(&robot_names, p.params.clone())?)))
        .collect::<Result<_>>()?;
    let scene = scenario.world.scene();

    let mut records = Vec::new();
    for problem in &scenario.problems {
        for rep in 0..scenario.repetitions {
            let mut goals = problem.goals.clone();
            if rep > 0 {
                for (name, goal) in goals.iter_mut() {
                    let model = &scene.robot(name)?.model;
                    *goal = perturb_goal(
                        &GoalConstraint::joint(goal.clone()),
                        model,
                        scenario.perturbation_deg,
                        &mut rng,
                    )?;
                }
            }
            for (label, planner) in &planners {
                let began = Instant::now();
                let outcome = run_query(planner, &scenario.robots, &problem.starts, &goals);
                let elapsed = began.elapsed().as_secs_f64();
                let time_s = if options.mask_time { 0.0 } else { elapsed };
                records.push(match outcome {
                    Ok(traj) => BenchmarkRecord {
                        problem_id: problem.id.clone(),
                        rep,
                        planner: label.clone(),
                        success: true,
                        ee_cost_m: Some(traj.ee_cost),
                        planner_cost: Some(traj.cost),
                        time_s,
                        bound: traj.bound,
                    },
                    Err(_) => BenchmarkRecord {
                        problem_id: problem.id.clone(),
                        rep,
                        planner: label.clone(),
                        success: false,
                        ee_cost_m: None,
                        planner_cost: None,
                        time_s,
                        bound: nominal_bound(planner.params()),
                    },
                });
            }
        }
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// CSV and summary

pub fn write_csv<W: std::io::Write>(records: &[BenchmarkRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Validation(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

pub fn records_to_csv(records: &[BenchmarkRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchmarkRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::Syntax(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSummary {
    pub planner: String,
    pub queries: usize,
    pub successes: usize,
    /// Percent of queries solved.
    pub success_rate: f64,
    /// Mean end-effector path length over successes, meters.
    pub mean_ee_cost_m: Option<f64>,
    pub mean_planner_cost: Option<f64>,
    /// Mean over problems of the end-effector cost CV (percent), each taken
    /// over that problem's successful repetitions.
    pub mean_cv: Option<f64>,
    pub mean_time_s: Option<f64>,
    /// Mean over queries of `t / t_min` among the planners that solved it.
    pub mean_runtime_ratio: Option<f64>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Per-planner aggregates computed from the records alone. Planners appear
/// in order of first occurrence. Problems whose successful costs average
/// zero have no CV and are left out of `mean_cv`.
pub fn summarize(records: &[BenchmarkRecord]) -> Vec<PlannerSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.planner.as_str()) {
            order.push(&r.planner);
        }
    }

    // t / t_min within each (problem, rep) group
    let mut groups: BTreeMap<(&str, usize), Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.problem_id, r.rep)).or_default().push(r);
    }
    let mut ratios: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for group in groups.values() {
        let times: Vec<Option<f64>> = group.iter().map(|r| r.success.then_some(r.time_s)).collect();
        if let Ok(rs) = effective_runtime_ratios(&times) {
            for (r, ratio) in group.iter().zip(rs) {
                if let Some(x) = ratio {
                    ratios.entry(&r.planner).or_default().push(x);
                }
            }
        }
    }

    order
        .into_iter()
        .map(|planner| {
            let mine: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.planner == planner).collect();
            let ok: Vec<&BenchmarkRecord> = mine.iter().copied().filter(|r| r.success).collect();
            let ee: Vec<f64> = ok.iter().filter_map(|r| r.ee_cost_m).collect();
            let pc: Vec<f64> = ok.iter().filter_map(|r| r.planner_cost).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.time_s).collect();
            let mut per_problem: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for r in &ok {
                if let Some(c) = r.ee_cost_m {
                    per_problem.entry(&r.problem_id).or_default().push(c);
                }
            }
            let cvs: Vec<f64> = per_problem.values().filter_map(|c| compute_cv(c).ok()).collect();
            PlannerSummary {
                planner: planner.to_string(),
                queries: mine.len(),
                successes: ok.len(),
                success_rate: if mine.is_empty() {
                    0.0
                } else {
                    100.0 * ok.len() as f64 / mine.len() as f64
                },
                mean_ee_cost_m: mean(&ee),
                mean_planner_cost: mean(&pc),
                mean_cv: mean(&cvs),
                mean_time_s: mean(&times),
                mean_runtime_ratio: ratios.get(planner).and_then(|v| mean(v)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::planar_arm;

    #[test]
    fn cv_examples() {
        assert_eq!(compute_cv(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(compute_cv(&[5.0]).unwrap(), 0.0);
        // sum / n of ten copies of 0.1 is not 0.1
        assert_eq!(compute_cv(&[0.1; 10]).unwrap(), 0.0);
        let expected = 100.0 * (2.0f64 / 3.0).sqrt() / 2.0;
        assert!((compute_cv(&[1.0, 2.0, 3.0]).unwrap() - expected).abs() < 1e-12);
        assert_eq!(compute_cv(&[]), Err(Error::EmptyInput));
        assert_eq!(compute_cv(&[0.0, 0.0]), Err(Error::ZeroMean));
    }

    #[test]
    fn runtime_ratios() {
        let r = effective_runtime_ratios(&[Some(0.5), Some(1.0), Some(2.0)]).unwrap();
        assert_eq!(r, vec![Some(1.0), Some(2.0), Some(4.0)]);
        let r = effective_runtime_ratios(&[Some(0.3), Some(0.3)]).unwrap();
        assert_eq!(r, vec![Some(1.0), Some(1.0)]);
        let r = effective_runtime_ratios(&[Some(0.5), None, Some(1.5)]).unwrap();
        assert_eq!(r, vec![Some(1.0), None, Some(3.0)]);
        assert_eq!(effective_runtime_ratios(&[None, None]), Err(Error::AllFailed));
        assert_eq!(effective_runtime_ratios(&[]), Err(Error::AllFailed));
    }

    #[test]
    fn perturbation_moves_one_joint() {
        let model = planar_arm(3, 0.5, -1.0, 1.0);
        let goal = GoalConstraint::joint(vec![0.1, 0.2, 0.3]);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = perturb_goal(&goal, &model, 2.0, &mut rng).unwrap();
            let diffs: Vec<f64> = q.iter().zip([0.1, 0.2, 0.3]).map(|(a, b)| a - b).collect();
            assert_eq!(diffs.iter().filter(|d| **d != 0.0).count(), 1);
            let d = diffs.iter().find(|d| **d != 0.0).unwrap();
            assert!((d.abs() - 2f64.to_radians()).abs() < 1e-12);

            let mut again = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(perturb_goal(&goal, &model, 2.0, &mut again).unwrap(), q);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(perturb_goal(&goal, &model, 0.0, &mut rng).unwrap(), vec![0.1, 0.2, 0.3]);
        assert!(matches!(
            perturb_goal(&GoalConstraint::position([0.0; 3]), &model, 2.0, &mut rng),
            Err(Error::KindMismatch(_))
        ));
    }

    #[test]
    fn perturbation_is_clamped() {
        let model = planar_arm(1, 0.5, -1.0, 1.0);
        let goal = GoalConstraint::joint(vec![1.0]);
        let mut seen = Vec::new();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = perturb_goal(&goal, &model, 2.0, &mut rng).unwrap();
            assert!(q[0] <= 1.0);
            seen.push(q[0]);
        }
        assert!(seen.contains(&1.0));
    }

    fn rec(problem: &str, rep: usize, planner: &str, cost: Option<f64>, t: f64) -> BenchmarkRecord {
        BenchmarkRecord {
            problem_id: problem.into(),
            rep,
            planner: planner.into(),
            success: cost.is_some(),
            ee_cost_m: cost,
            planner_cost: cost,
            time_s: t,
            bound: 1.0,
        }
    }

    #[test]
    fn summary_from_records() {
        let records = vec![
            rec("a", 0, "x", Some(1.0), 0.5),
            rec("a", 0, "y", Some(2.0), 1.0),
            rec("a", 1, "x", Some(2.0), 0.5),
            rec("a", 1, "y", None, 5.0),
            rec("b", 0, "x", Some(3.0), 2.0),
            rec("b", 0, "y", Some(3.0), 1.0),
        ];
        let s = summarize(&records);
        assert_eq!(s[0].planner, "x");
        assert_eq!(s[0].successes, 3);
        assert_eq!(s[0].success_rate, 100.0);
        assert_eq!(s[1].success_rate, 100.0 * 2.0 / 3.0);
        assert_eq!(s[0].mean_ee_cost_m, Some(2.0));
        // x: problem a CV of [1, 2] = 33.3..%, problem b 0%
        let cv_a = compute_cv(&[1.0, 2.0]).unwrap();
        assert!((s[0].mean_cv.unwrap() - cv_a / 2.0).abs() < 1e-12);
        // x ratios: a0 1.0, a1 1.0, b0 2.0
        assert!((s[0].mean_runtime_ratio.unwrap() - 4.0 / 3.0).abs() < 1e-12);
        // y ratios: a0 2.0, b0 1.0
        assert_eq!(s[1].mean_runtime_ratio, Some(1.5));
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![rec("a", 0, "x", Some(1.25), 0.5), rec("a", 1, "x", None, 5.0)];
        let text = records_to_csv(&records);
        assert!(text.starts_with("problem_id,rep,planner,success,ee_cost_m,planner_cost,time_s,bound\n"));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), records);
    }
}
