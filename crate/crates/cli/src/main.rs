use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use armplan::bench::{run_benchmark, summarize, write_csv, PlannerSummary, RunOptions, Scenario};
use armplan::collision::load_scene;
use armplan::kinematics::{load_robot_spec, Pose};
use armplan::lattice::GoalConstraint;
use armplan::planner_api::{validate_trajectory, PlannerInterface, PlannerParams, Trajectory};
use armplan::Error;
use clap::{Args, Parser, Subcommand};

const EXIT_OTHER: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NO_PLAN: u8 = 3;

#[derive(Parser)]
#[command(name = "armplan", version, about = "Search-based arm motion planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one query and write the trajectory as JSON.
    Plan(PlanArgs),
    /// Run a benchmark scenario and write per-query records as CSV.
    Bench(BenchArgs),
    /// Re-check a trajectory file against a robot and scene.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    robot: PathBuf,
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Comma-separated joint values, radians.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    start: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "goal_pose")]
    goal_joint: Option<Vec<f64>>,
    /// x,y,z,qx,qy,qz,qw
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    goal_pose: Option<Vec<f64>>,
    #[arg(long, default_value = "wAstar")]
    planner: String,
    #[arg(long)]
    w: Option<f64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    resolution: Option<f64>,
    /// Extra planner parameter, `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Record every time as 0 so that reruns are byte-identical.
    #[arg(long)]
    mask_time: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    robot: PathBuf,
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Interpolation step, radians; defaults to a quarter of the default lattice resolution.
    #[arg(long)]
    step: Option<f64>,
    /// Velocity limit to check, rad/s.
    #[arg(long)]
    vmax: Option<f64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoPathExists | Error::Timeout | Error::StartInvalid(_) | Error::StartsInCollision => EXIT_NO_PLAN,
            Error::Io { .. } => EXIT_OTHER,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_OTHER,
        message: format!("{}: {e}", path.display()),
    }
}

fn world_with(robot: &Path, scene: Option<&Path>) -> Result<(PlannerInterface, String), Failure> {
    let model = load_robot_spec(robot)?;
    let name = model.name.clone();
    let base = Pose::from_isometry(&model.base_pose);
    let mut world = match scene {
        Some(p) => PlannerInterface::with_scene(load_scene(p)?)?,
        None => PlannerInterface::new(),
    };
    world.add_articulation(model, &name, base, None)?;
    Ok((world, name))
}

fn plan(args: PlanArgs) -> Result<(), Failure> {
    let (world, name) = world_with(&args.robot, args.scene.as_deref())?;
    let goal = match (&args.goal_joint, &args.goal_pose) {
        (Some(q), None) => GoalConstraint::joint(q.clone()),
        (None, Some(v)) if v.len() == 7 => GoalConstraint::pose(Pose::new([v[0], v[1], v[2]], [v[3], v[4], v[5], v[6]])?),
        (None, Some(_)) => {
            return Err(Failure {
                code: EXIT_INVALID,
                message: "--goal-pose takes 7 values: x,y,z,qx,qy,qz,qw".into(),
            })
        }
        _ => {
            return Err(Failure {
                code: EXIT_INVALID,
                message: "give exactly one of --goal-joint and --goal-pose".into(),
            })
        }
    };

    let mut pairs: Vec<(String, String)> = vec![("planner_id".into(), args.planner.clone())];
    if let Some(w) = args.w {
        pairs.push(("w".into(), w.to_string()));
    }
    if let Some(t) = args.time_limit {
        pairs.push(("time_limit".into(), t.to_string()));
    }
    if let Some(r) = args.resolution {
        pairs.push(("resolution".into(), r.to_string()));
    }
    for p in &args.params {
        let (k, v) = p.split_once('=').ok_or_else(|| Failure {
            code: EXIT_INVALID,
            message: format!("--param `{p}` is not key=value"),
        })?;
        pairs.push((k.trim().into(), v.trim().into()));
    }
    let params = PlannerParams::parse(pairs)?;
    let planner = world.make_planner(&[name.as_str()], params)?;
    let traj = planner.plan(&args.start, goal)?;
    traj.save(&args.out)?;
    println!(
        "{}: cost {:.6}, end-effector path {:.4} m, {} waypoints, {} expansions, {:.3} s",
        traj.planner_id,
        traj.cost,
        traj.ee_cost,
        traj.robots[&name].len(),
        traj.expansions,
        traj.planning_time
    );
    Ok(())
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.digits$}"))
}

fn print_summary(summary: &[PlannerSummary]) {
    println!(
        "{:<16} {:>8} {:>10} {:>10} {:>8} {:>10} {:>8}",
        "planner", "success%", "ee_cost_m", "cost", "cv%", "time_s", "ratio"
    );
    for s in summary {
        println!(
            "{:<16} {:>8.1} {:>10} {:>10} {:>8} {:>10} {:>8}",
            s.planner,
            s.success_rate,
            opt(s.mean_ee_cost_m, 4),
            opt(s.mean_planner_cost, 4),
            opt(s.mean_cv, 2),
            opt(s.mean_time_s, 4),
            opt(s.mean_runtime_ratio, 2),
        );
    }
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let scenario = Scenario::load(&args.scenario)?;
    let options = RunOptions {
        seed: args.seed,
        mask_time: args.mask_time,
    };
    let records = run_benchmark(&scenario, options)?;
    let file = File::create(&args.out).map_err(|e| io_failure(&args.out, e))?;
    write_csv(&records, BufWriter::new(file))?;

    let summary = summarize(&records);
    let summary_path = args.out.with_extension("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, text).map_err(|e| io_failure(&summary_path, e))?;
    print_summary(&summary);
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let traj = Trajectory::load(&args.trajectory)?;
    let model = load_robot_spec(&args.robot)?;
    let base = Pose::from_isometry(&model.base_pose);
    let mut world = match &args.scene {
        Some(p) => PlannerInterface::with_scene(load_scene(p)?)?,
        None => PlannerInterface::new(),
    };
    let names: Vec<&String> = traj.robots.keys().collect();
    let [name] = names.as_slice() else {
        return Err(Failure {
            code: EXIT_INVALID,
            message: format!("expected one robot in the trajectory, found {}", names.len()),
        });
    };
    world.add_articulation(model, name, base, None)?;
    let step = args.step.unwrap_or(armplan::lattice::DEFAULT_RESOLUTION / 4.0);
    let scene = world.scene().frozen_snapshot();
    let problems = validate_trajectory(&scene, &traj, step, args.vmax)?;
    if problems.is_empty() {
        println!("valid: {} waypoints, {:.4} s", traj.robots[*name].len(), traj.robots[*name].duration());
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INVALID,
            message: problems.join("\n"),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Bench(a) => bench(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
