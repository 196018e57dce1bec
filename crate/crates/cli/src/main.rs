use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nucleate::agent::{lint_model, AgentModel};
use nucleate::assembly::{self, check_local_determinism};
use nucleate::format::{parse_ascii, render_ascii, render_ppm, write_assembly_trace, write_mesh_trace};
use nucleate::harness::{run_experiment, run_fidelity, ExperimentSpec};
use nucleate::lcl::{check_weak_coloring, Coloring, CoverageMode};
use nucleate::mesh::{simulate, ExecMode};
use nucleate::tam::TileAssemblySystem;
use nucleate::tilesets::nucleation_family;
use nucleate::{Error, Mesh};

/// Tile self-assembly and mesh-network simulation.
#[derive(Parser)]
#[command(name = "nucleate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a tile system inside an n×n window.
    Assemble(AssembleArgs),
    /// Run the processor network simulating an agent model.
    Meshsim(MeshsimArgs),
    /// Success-rate campaign over mesh sizes.
    Experiment(ExperimentArgs),
    /// Compare the network's one-round law with the model's on a small window.
    Fidelity(FidelityArgs),
    /// Check a snapshot file for a valid weak coloring.
    Check(CheckArgs),
    /// Validate an agent-model file.
    LintModel(LintArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Ascii,
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for output files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    format: Format,
}

#[derive(Args)]
struct AssembleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    check_coloring: bool,
    #[arg(long)]
    check_determinism: bool,
    /// Exit with 1 unless the final coloring is valid.
    #[arg(long)]
    expect_valid: bool,
    /// Tile additions allowed (default: window size).
    #[arg(long)]
    max_stages: Option<usize>,
}

#[derive(Args)]
struct MeshsimArgs {
    #[command(flatten)]
    common: Common,
    /// Use a shipped rule family instead of a model file.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    pi_nu: Option<f64>,
    #[arg(long, default_value_t = 10)]
    rounds: u64,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    expect_valid: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    pi_nu: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    rounds: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
}

#[derive(Args)]
struct FidelityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Exit with 1 if the TV distance exceeds this or the supports differ.
    #[arg(long)]
    max_tv: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    /// ASCII snapshot file.
    snapshot: PathBuf,
    /// Only check the sub-mesh induced by colored vertices.
    #[arg(long)]
    induced: bool,
    #[arg(long)]
    expect_valid: bool,
}

#[derive(Args)]
struct LintArgs {
    file: PathBuf,
    /// Also flag negative binding strengths.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    format: Format,
}

/// Exit statuses: 0 success, 1 a checked property failed, 2 bad input.
enum Failure {
    Property(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Write to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn model_path(c: &Common) -> Result<&Path, Failure> {
    c.model.as_deref().ok_or_else(|| Failure::Usage("--model is required".into()))
}

fn window(dim: usize, size: usize) -> Result<Mesh, Failure> {
    if size == 0 {
        return Err(Failure::Usage("--size must be at least 1".into()));
    }
    Ok(Mesh::new(dim, size)?)
}

fn write_out(dir: &Path, name: &str, bytes: &[u8]) -> Outcome {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn load_agent_model(c: &Common, family: Option<&str>, pi_nu: Option<f64>) -> Result<(String, AgentModel), Failure> {
    let (name, mut model) = match (family, &c.model) {
        (Some(f), None) => {
            let sys = nucleation_family(c.size.max(1), pi_nu.unwrap_or(0.1), f)?;
            (f.to_string(), sys.model().expect("families are agent models").clone())
        }
        (None, Some(p)) => (p.display().to_string(), AgentModel::from_json(&read(p)?)?),
        _ => return Err(Failure::Usage("give exactly one of --model and --family".into())),
    };
    if let Some(p) = pi_nu {
        if !(0.0..=1.0).contains(&p) {
            return Err(Failure::Usage(format!("--pi-nu {p} is not a probability")));
        }
        model.pi_nu = p;
    }
    Ok((name, model))
}

fn coloring_json(col: &Coloring, mode: CoverageMode) -> Result<(bool, serde_json::Value), Failure> {
    let report = check_weak_coloring(col, mode)?;
    Ok((report.valid, serde_json::to_value(&report).expect("reports serialize")))
}

fn assemble(a: AssembleArgs) -> Outcome {
    let c = &a.common;
    let system = TileAssemblySystem::from_json(&read(model_path(c)?)?)?;
    let mesh = window(system.dim(), c.size)?;
    let result = assembly::run(&system, mesh, c.seed, a.max_stages)?;
    let col = Coloring::from_configuration(&result.configuration, &system.tiles, mesh);
    let mut summary = serde_json::json!({
        "system": system.content_hash(),
        "seed": c.seed,
        "temperature": system.temperature,
        "stages": result.stages,
        "terminal": result.terminal,
    });
    let mut ok = true;
    if a.check_coloring || a.expect_valid {
        let (valid, report) = coloring_json(&col, CoverageMode::FullSurface)?;
        summary["coloring"] = report;
        ok &= valid || !a.expect_valid;
    }
    if a.check_determinism {
        let rep = check_local_determinism(&system, &result.sequence)?;
        ok &= rep.passed;
        summary["determinism"] = serde_json::to_value(&rep).expect("reports serialize");
    }
    let trace = write_assembly_trace(&system, &result);
    let snapshot = render_ascii(&col);
    let summary_text = serde_json::to_string_pretty(&summary).expect("json");
    if let Some(dir) = &c.out {
        write_out(dir, "trace.txt", trace.as_bytes())?;
        write_out(dir, "snapshot.txt", snapshot.as_bytes())?;
        write_out(dir, "report.json", summary_text.as_bytes())?;
        if mesh.dim() == 2 {
            write_out(dir, "snapshot.ppm", &render_ppm(&col, 8)?)?;
        }
    }
    match c.format {
        Format::Json => emit(&format!("{summary_text}\n")),
        _ => emit(&format!("{snapshot}\n{summary_text}\n")),
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Property("a requested check failed".into()))
    }
}

fn meshsim(a: MeshsimArgs) -> Outcome {
    let c = &a.common;
    let (name, model) = load_agent_model(c, a.family.as_deref(), a.pi_nu)?;
    let mesh = window(model.dimension, c.size)?;
    let mode = if a.parallel { ExecMode::Parallel } else { ExecMode::Sequential };
    let (net, trace) = simulate(&model, mesh, c.seed, a.rounds, mode)?;
    let col = net.coloring();
    let (valid, report) = coloring_json(&col, CoverageMode::FullSurface)?;
    let summary = serde_json::json!({
        "model": name,
        "model_hash": model.content_hash(),
        "seed": c.seed,
        "size": c.size,
        "rounds": a.rounds,
        "occupied": col.colored_count(),
        "max_packet_symbols": net.message_stats().max_symbols,
        "locality_violations": net.locality().violations,
        "coloring": report,
    });
    let trace_text = write_mesh_trace(&model, mesh, &trace);
    let snapshot = render_ascii(&col);
    let summary_text = serde_json::to_string_pretty(&summary).expect("json");
    if let Some(dir) = &c.out {
        write_out(dir, "trace.txt", trace_text.as_bytes())?;
        write_out(dir, "snapshot.txt", snapshot.as_bytes())?;
        write_out(dir, "report.json", summary_text.as_bytes())?;
        if mesh.dim() == 2 {
            write_out(dir, "snapshot.ppm", &render_ppm(&col, 8)?)?;
        }
    }
    match c.format {
        Format::Json => emit(&format!("{summary_text}\n")),
        _ => emit(&format!("{trace_text}\n{snapshot}\n{summary_text}\n")),
    }
    if a.expect_valid && !valid {
        return Err(Failure::Property("final coloring is not a valid weak coloring".into()));
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Outcome {
    let c = &a.common;
    let (name, model) = load_agent_model(c, a.family.as_deref(), a.pi_nu)?;
    let spec = ExperimentSpec { model_ref: name, model, sizes: a.sizes.clone(), rounds: a.rounds, trials: a.trials, master_seed: c.seed };
    let result = run_experiment(&spec)?;
    let csv = result.to_csv();
    let json = result.to_json();
    if let Some(dir) = &c.out {
        write_out(dir, "experiment.csv", csv.as_bytes())?;
        write_out(dir, "experiment.json", json.as_bytes())?;
    }
    match c.format {
        Format::Json => emit(&format!("{json}\n")),
        _ => emit(&csv),
    }
    Ok(())
}

fn fidelity(a: FidelityArgs) -> Outcome {
    let c = &a.common;
    let model = AgentModel::from_json(&read(model_path(c)?)?)?;
    let report = run_fidelity(&model, c.size, a.samples, c.seed)?;
    let text = serde_json::to_string_pretty(&report).expect("json");
    if let Some(dir) = &c.out {
        write_out(dir, "fidelity.json", text.as_bytes())?;
    }
    emit(&format!("{text}\n"));
    match a.max_tv {
        Some(max) if report.tv_distance > max || !report.supports_equal => {
            Err(Failure::Property(format!("TV distance {} (limit {max}), supports equal: {}", report.tv_distance, report.supports_equal)))
        }
        _ => Ok(()),
    }
}

fn check(a: CheckArgs) -> Outcome {
    let col = parse_ascii(&read(&a.snapshot)?)?;
    let mode = if a.induced { CoverageMode::Induced } else { CoverageMode::FullSurface };
    let (valid, report) = coloring_json(&col, mode)?;
    emit(&format!("{}\n", serde_json::to_string_pretty(&report).expect("json")));
    if a.expect_valid && !valid {
        return Err(Failure::Property("coloring is not a valid weak coloring".into()));
    }
    Ok(())
}

fn lint(a: LintArgs) -> Outcome {
    let diags = lint_model(&read(&a.file)?, a.strict);
    match a.format {
        Format::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&diags).expect("json"))),
        _ => {
            for d in &diags {
                emit(&format!("{d}\n"));
            }
        }
    }
    let errors = diags.iter().filter(|d| d.is_error()).count();
    if errors > 0 {
        return Err(Failure::Usage(format!("{errors} error(s) in {}", a.file.display())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Assemble(a) => assemble(a),
        Command::Meshsim(a) => meshsim(a),
        Command::Experiment(a) => experiment(a),
        Command::Fidelity(a) => fidelity(a),
        Command::Check(a) => check(a),
        Command::LintModel(a) => lint(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
