use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use echoslam::acoustic::{make_chirp, CorrelationWindow, Waveform};
use echoslam::ambiguity::{feasibility_table_demo, reflect_solution};
use echoslam::formats::{
    read_any_waveform, read_echo_csv_single, write_echo_csv, write_solution_json, write_wav, write_waveform, RoomSpec,
    SolutionJson,
};
use echoslam::peaks::PeakConfig;
use echoslam::pipeline::{detect_echoes, run_pipeline, simulate, PipelineError, Truth};
use echoslam::reconstruct::{
    count_assignments, slam_with_stats, AngleConstraint, CandidateSolution, PhiDomain, ReconstructError, SignSearch,
    SlamConfig,
};
use echoslam::scenario::ScenarioSpec;
use echoslam::svg::{render, Layer};
use echoslam::{ConvexRoom, EchoSet, Point2};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "echoslam", version, about = "Room shape and position from unlabeled first-order echoes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write echo sets (and optionally recordings) for a scenario.
    Simulate(SimulateArgs),
    /// Rebuild a room from three echo files or three recordings.
    Reconstruct(ReconstructArgs),
    /// Simulate, reconstruct and score against the ground truth.
    Pipeline(PipelineArgs),
    /// Print the path-length feasibility table on demo rooms.
    Ambiguity(AmbiguityArgs),
    /// Number of echo assignments for the given set sizes and wall count.
    Count { n1: usize, n2: usize, n3: usize, k: usize },
}

#[derive(Args)]
struct SimulateArgs {
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the chirp and the three recordings (needs `acoustics`).
    #[arg(long)]
    waveforms: bool,
    #[arg(long, value_enum, default_value_t = WaveFormat::Wav)]
    format: WaveFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveFormat {
    /// 32-bit float WAV.
    Wav,
    /// Raw little-endian f32 with a 16-byte header.
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Window {
    None,
    Triangular,
}

impl From<Window> for CorrelationWindow {
    fn from(w: Window) -> Self {
        match w {
            Window::None => CorrelationWindow::None,
            Window::Triangular => CorrelationWindow::Triangular,
        }
    }
}

#[derive(Args)]
struct SlamArgs {
    /// TOML file with reconstruction settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Clamp band for cosines slightly outside [-1, 1].
    #[arg(long)]
    eps: Option<f64>,
    /// Accept a wall count once Var[phi] falls below this.
    #[arg(long)]
    vth: Option<f64>,
    /// Fewest walls to try.
    #[arg(long)]
    kmin: Option<usize>,
    /// Most walls to try; defaults to the smallest echo set.
    #[arg(long)]
    kmax: Option<usize>,
    /// Largest number of echo combinations to examine.
    #[arg(long)]
    budget: Option<u64>,
    /// Interior-angle window in degrees, e.g. 50:130.
    #[arg(long)]
    angle_constraint: Option<AngleConstraint>,
    /// Half-width of the turn-angle clusters, radians.
    #[arg(long)]
    angular_tol: Option<f64>,
    /// Reject turns this close to 0 or pi, radians.
    #[arg(long)]
    min_turn: Option<f64>,
    /// Allow turns in both half planes, keeping mirror solutions.
    #[arg(long)]
    reflections: bool,
    /// Enumerate all sign vectors instead of clustering.
    #[arg(long)]
    exhaustive_signs: bool,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    jobs: Option<usize>,
}

impl SlamArgs {
    fn config(&self) -> Result<SlamConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => SlamConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(eps => eps, vth => v_th, kmin => k_min, angular_tol => angular_tol, min_turn => min_turn);
        if self.kmax.is_some() {
            cfg.k_max = self.kmax;
        }
        if self.budget.is_some() {
            cfg.budget = self.budget;
        }
        if self.angle_constraint.is_some() {
            cfg.angle_constraint = self.angle_constraint;
        }
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        if self.reflections {
            cfg.phi_domain = PhiDomain::Full;
        }
        if self.exhaustive_signs {
            cfg.sign_search = SignSearch::Exhaustive;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct ReconstructArgs {
    /// Echo CSVs for O1, O2, O3.
    #[arg(long, num_args = 3, value_names = ["O1", "O2", "O3"], required_unless_present = "waveforms")]
    echoes: Option<Vec<PathBuf>>,
    /// Recordings for O1, O2, O3 (WAV or raw); peaks are detected first.
    #[arg(long, num_args = 3, value_names = ["O1", "O2", "O3"], conflicts_with = "echoes")]
    waveforms: Option<Vec<PathBuf>>,
    /// Transmitted chirp; synthesized from the chirp flags when absent.
    #[arg(long, requires = "waveforms")]
    chirp: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    f0: f64,
    #[arg(long, default_value_t = 8000.0)]
    f1: f64,
    #[arg(long, default_value_t = 0.05)]
    chirp_duration: f64,
    #[arg(long, value_enum, default_value_t = Window::Triangular)]
    window: Window,
    /// JSON peak-detection settings.
    #[arg(long)]
    peaks_json: Option<PathBuf>,
    /// Distance O1 to O2, meters.
    #[arg(long)]
    d12: f64,
    /// Distance O2 to O3, meters.
    #[arg(long)]
    d23: f64,
    /// Merge echoes closer than this, meters.
    #[arg(long)]
    dedup: Option<f64>,
    #[command(flatten)]
    slam: SlamArgs,
    /// Solution JSON path; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Draw the result as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    slam: SlamArgs,
    /// Report JSON path; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Draw the result as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct AmbiguityArgs {
    #[arg(long)]
    json: bool,
}

/// Failures with a dedicated exit status.
fn exit_code(err: &anyhow::Error) -> u8 {
    let reconstruct = err.downcast_ref::<ReconstructError>().or_else(|| match err.downcast_ref::<PipelineError>() {
        Some(PipelineError::Reconstruct(e)) => Some(e),
        _ => None,
    });
    match reconstruct {
        Some(ReconstructError::NoSolution) => 2,
        Some(ReconstructError::BudgetExceeded { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::Pipeline(a) => cmd_pipeline(&a),
        Command::Ambiguity(a) => cmd_ambiguity(&a),
        Command::Count { n1, n2, n3, k } => {
            count_assignments(n1, n2, n3, k).map(|n| println!("{n}")).map_err(Into::into)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut spec: ScenarioSpec = serde_json::from_str(&text).with_context(|| format!("scenario {}", path.display()))?;
    if seed.is_some() {
        spec.seed = seed;
    }
    spec.validate().with_context(|| format!("scenario {}", path.display()))?;
    Ok(spec)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

#[derive(Serialize)]
struct TruthJson {
    d12: f64,
    d23: f64,
    phi_rad: f64,
    /// Room in the `O1` frame, comparable with reconstructions.
    room: RoomSpec,
    o2: [f64; 2],
    o3: [f64; 2],
    world_room: RoomSpec,
    world_points: [[f64; 2]; 3],
}

impl TruthJson {
    fn new(t: &Truth) -> Self {
        Self {
            d12: t.geometry.d12,
            d23: t.geometry.d23,
            phi_rad: t.geometry.phi,
            room: RoomSpec::from_room(&t.room),
            o2: t.geometry.o2().into(),
            o3: t.geometry.o3().into(),
            world_room: RoomSpec::from_room(&t.world_room),
            world_points: t.world_points.map(Into::into),
        }
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let spec = load_scenario(&a.scenario, a.seed)?;
    let sim = simulate(&spec)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for (j, set) in sim.echoes.iter().enumerate() {
        let path = a.out.join(format!("echoes_o{}.csv", j + 1));
        write_echo_csv(create(&path)?, &[(j + 1, set)])?;
    }
    if a.waveforms {
        let Some(rec) = &sim.recordings else {
            bail!("--waveforms needs an `acoustics` section in the scenario");
        };
        let ext = match a.format {
            WaveFormat::Wav => "wav",
            WaveFormat::Raw => "f32",
        };
        let write = |name: String, w: &Waveform| -> Result<()> {
            let out = create(&a.out.join(name))?;
            match a.format {
                WaveFormat::Wav => write_wav(out, w)?,
                WaveFormat::Raw => write_waveform(out, w)?,
            }
            Ok(())
        };
        write(format!("chirp.{ext}"), &rec.chirp)?;
        for (j, w) in rec.received.iter().enumerate() {
            write(format!("received_o{}.{ext}", j + 1), w)?;
        }
    }
    let truth = serde_json::to_string_pretty(&TruthJson::new(&sim.truth))? + "\n";
    fs::write(a.out.join("truth.json"), &truth)?;
    emit(None, &truth)
}

fn read_waveform_file(path: &Path) -> Result<Waveform> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_any_waveform(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn input_echoes(a: &ReconstructArgs) -> Result<Vec<EchoSet>> {
    if let Some(paths) = &a.echoes {
        return paths
            .iter()
            .map(|p| {
                let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                read_echo_csv_single(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))
            })
            .collect();
    }
    let paths = a.waveforms.as_ref().expect("clap requires echoes or waveforms");
    let received: Vec<Waveform> = paths.iter().map(|p| read_waveform_file(p)).collect::<Result<_>>()?;
    let chirp = match &a.chirp {
        Some(p) => read_waveform_file(p)?,
        None => make_chirp(a.f0, a.f1, a.chirp_duration, received[0].sample_rate())?,
    };
    let peaks = match &a.peaks_json {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => PeakConfig::default(),
    };
    let (sets, _) = detect_echoes(&received, &chirp, a.window.into(), &peaks)?;
    Ok(sets)
}

fn solution_svg(sol: &CandidateSolution, mirror: bool, truth: Option<(&ConvexRoom, &[Point2])>) -> String {
    let points = sol.geometry.points();
    let mut layers = Vec::new();
    if let Some((room, pts)) = truth {
        layers.push(Layer { room, points: pts, stroke: "#2a7", dashed: true, label: "truth" });
    }
    layers.push(Layer { room: &sol.room, points: &points, stroke: "#124", dashed: false, label: "estimate" });
    let ghost = reflect_solution(sol);
    let ghost_points = ghost.geometry.points();
    if mirror {
        layers.push(Layer { room: &ghost.room, points: &ghost_points, stroke: "#999", dashed: true, label: "mirror" });
    }
    render(&layers)
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let cfg = a.slam.config()?;
    let mut sets = input_echoes(a)?;
    if let Some(tol) = a.dedup {
        sets = sets.iter().map(|s| s.dedup(tol)).collect();
    }
    let (sol, stats) = slam_with_stats(&sets[0], &sets[1], &sets[2], a.d12, a.d23, &cfg)?;
    eprintln!("K = {}, Var[phi] = {:.3e}, {} combinations examined", sol.k(), sol.var_phi, stats.examined);
    if let Some(path) = &a.svg {
        fs::write(path, solution_svg(&sol, cfg.phi_domain == PhiDomain::Full, None))?;
    }
    let json = SolutionJson::from_solution(&sol);
    match &a.out {
        Some(p) => write_solution_json(create(p)?, &json)?,
        None => emit(None, &(serde_json::to_string_pretty(&json)? + "\n"))?,
    }
    Ok(())
}

fn cmd_pipeline(a: &PipelineArgs) -> Result<()> {
    let cfg = a.slam.config()?;
    let spec = load_scenario(&a.scenario, a.seed)?;
    let report = run_pipeline(&spec, &cfg)?;
    eprintln!(
        "K = {} (true {}), vertex error {:.4} m, phi error {:.4} rad, {} combinations, {:.3} s",
        report.score.k,
        report.score.k_true,
        report.score.vertex_error_m,
        report.score.phi_error_rad,
        report.combinations_examined,
        report.runtime_s
    );
    if let Some(path) = &a.svg {
        let sim = simulate(&spec)?;
        let est = report.solution.room()?;
        let pts = [Point2::ORIGIN, report.solution.o2.into(), report.solution.o3.into()];
        let truth_pts = sim.truth.geometry.points();
        let svg = render(&[
            Layer { room: &sim.truth.room, points: &truth_pts, stroke: "#2a7", dashed: true, label: "truth" },
            Layer { room: &est, points: &pts, stroke: "#124", dashed: false, label: "estimate" },
        ]);
        fs::write(path, svg)?;
    }
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn cmd_ambiguity(a: &AmbiguityArgs) -> Result<()> {
    let report = feasibility_table_demo()?;
    if a.json {
        emit(None, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    } else {
        print!("{report}");
    }
    if !report.all_agree() {
        bail!("observed verdicts differ from the expected table");
    }
    Ok(())
}
