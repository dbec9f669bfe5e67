//! Command-line pipeline for the control-design toolkit: build the plant,
//! compute stabilizing sets, map them into iPD space, filter by performance
//! bounds, and simulate the closed loop.
//!
//! Exit codes: 0 success, 2 usage/input error, 3 runtime divergence. Errors
//! print one machine-parsable line on stderr.

mod commands;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "mfcforge",
    version,
    about = "Discrete-time PID/iPD stabilizing-set design pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the lateral plant from a vehicle parameter file and discretize it.
    Plant(PlantArgs),
    /// Compute the PI/PID stabilizing set of the (filter-augmented) plant.
    Stabset(StabsetArgs),
    /// Map a PID stabilizing set into iPD parameter space (point cloud CSV).
    Transform(TransformArgs),
    /// Filter a set or cloud by frequency/time-response bounds.
    Filter(FilterArgs),
    /// Simulate iPD tracking against the discrete plant.
    Simulate(SimulateArgs),
    /// Gain and phase margins of the controller/plant open loop.
    Margins(MarginsArgs),
}

#[derive(Args)]
struct PlantArgs {
    /// Vehicle parameter JSON (keys m, vx, Iz, Cf, Cr, lf, lr).
    #[arg(long)]
    params: PathBuf,
    /// Sample time in seconds.
    #[arg(long, default_value_t = 0.05)]
    ts: f64,
    /// Output plant JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Pi,
    Pid,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct StabsetArgs {
    /// Plant JSON from the `plant` stage.
    #[arg(long)]
    plant: PathBuf,
    /// Controller structure; the derivative-filter augmentation (z/(Cz+1-C)
    /// per order) is applied automatically.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Derivative filter constant C (>= 1).
    #[arg(long, default_value_t = 4.0)]
    filter_c: f64,
    /// Gate sweep lower bound (K1 for PI, K3 for PID).
    #[arg(long)]
    gate_lo: f64,
    /// Gate sweep upper bound.
    #[arg(long)]
    gate_hi: f64,
    /// Number of gate values (>= 2).
    #[arg(long, default_value_t = 400)]
    steps: usize,
    /// Free-gain box lower bound (regions are clipped to the box).
    #[arg(long, default_value_t = -50.0)]
    param_lo: f64,
    /// Free-gain box upper bound.
    #[arg(long, default_value_t = 50.0)]
    param_hi: f64,
    /// Output set JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Semilinear,
    Nonlinear,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct TransformArgs {
    /// Stabilizing-set JSON (PID kind).
    #[arg(long)]
    set: PathBuf,
    /// Inverse map used to recover (Kp, Kd, alpha).
    #[arg(long, value_enum, default_value = "nonlinear")]
    method: MethodArg,
    /// Samples per region bounding-box axis.
    #[arg(long, default_value_t = 30)]
    grid: usize,
    /// Output iPD cloud CSV (columns K3,K1,K2,Kp,Kd,alpha).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FilterArgs {
    /// Stabilizing-set JSON input (mutually exclusive with --cloud).
    #[arg(long, conflicts_with = "cloud")]
    set: Option<PathBuf>,
    /// iPD cloud CSV input.
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// Plant JSON from the `plant` stage.
    #[arg(long)]
    plant: PathBuf,
    /// Minimum gain margin (unit set by --gm-unit).
    #[arg(long)]
    gm_min: Option<f64>,
    /// Interpretation of --gm-min.
    #[arg(long, value_enum, default_value = "ratio")]
    gm_unit: GmUnit,
    /// Minimum phase margin in degrees.
    #[arg(long)]
    pm_min_deg: Option<f64>,
    /// Maximum overshoot in percent.
    #[arg(long)]
    os_max: Option<f64>,
    /// Maximum settling time in seconds.
    #[arg(long)]
    st_max: Option<f64>,
    /// Settling band fraction for the settling-time bound.
    #[arg(long, default_value_t = 0.02)]
    band: f64,
    /// Samples per region bounding-box axis when filtering a set.
    #[arg(long, default_value_t = 30)]
    grid: usize,
    /// Derivative filter constant for cloud inputs (set inputs carry it).
    #[arg(long, default_value_t = 4.0)]
    filter_c: f64,
    /// Output subset (same format as the input: cloud CSV, or a
    /// K3,K1,K2 CSV when filtering a set).
    #[arg(long)]
    out: PathBuf,
    /// Per-candidate metrics report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GmUnit {
    Ratio,
    Db,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RefArg {
    Step,
    Smoothstep,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    /// Plant JSON from the `plant` stage.
    #[arg(long)]
    plant: PathBuf,
    /// Controller JSON ({Kp, Kd, alpha, n, C, Ts} or a tagged pi/pid record).
    #[arg(long)]
    controller: PathBuf,
    /// Reference shape.
    #[arg(long, value_enum, default_value = "step")]
    r#ref: RefArg,
    /// Shaping time constant for smoothstep references (seconds).
    #[arg(long, default_value_t = 0.25)]
    tau: f64,
    /// Reference amplitude.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 1200)]
    n: usize,
    /// Settling band for the metrics file.
    #[arg(long, default_value_t = 0.05)]
    band: f64,
    /// Output trace CSV (t,ref,y,e,u).
    #[arg(long)]
    out: PathBuf,
    /// Output metrics JSON.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct MarginsArgs {
    /// Plant JSON from the `plant` stage.
    #[arg(long)]
    plant: PathBuf,
    /// Controller JSON.
    #[arg(long)]
    controller: PathBuf,
    /// Output margins JSON (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("MFCFORGE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let outcome = match cli.command {
        Command::Plant(args) => commands::cmd_plant(args),
        Command::Stabset(args) => commands::cmd_stabset(args),
        Command::Transform(args) => commands::cmd_transform(args),
        Command::Filter(args) => commands::cmd_filter(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Margins(args) => commands::cmd_margins(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
