//! `sphere-layout`: place weighted hierarchies on nested spheres and export
//! the result as JSON documents, OBJ meshes, or a coverage report.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sphere_layout::{
    layout_tree, run_wscvt, trisphere_layout, Algorithm, ErrorMode, LayoutConfig, LloydConfig,
};
use sphere_layout_cli::document::{self, LayoutHeader};
use sphere_layout_cli::ingest::ingest_tree;
use sphere_layout_cli::mesh::{export_icosphere, export_tessellation, MeshFormat};
use sphere_layout_cli::report::{report_comparison, ReportOptions};
use sphere_layout_cli::CliError;

#[derive(Parser)]
#[command(
    name = "sphere-layout",
    about = "Weighted tree layout on nested spheres",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lay out a hierarchy and write the placement document.
    Layout(LayoutArgs),
    /// Print the surface-utilization comparison table.
    Report(ReportArgs),
    /// Export tessellation or icosphere geometry as an OBJ mesh.
    Mesh(MeshArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Wscvt,
    Trisphere,
}

impl AlgorithmArg {
    fn to_algorithm(self) -> Algorithm {
        match self {
            AlgorithmArg::Wscvt => Algorithm::Wscvt,
            AlgorithmArg::Trisphere => Algorithm::TriSphere,
        }
    }

    fn name(self) -> &'static str {
        match self {
            AlgorithmArg::Wscvt => "wscvt",
            AlgorithmArg::Trisphere => "trisphere",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ErrorModeArg {
    Max,
    Avg,
}

#[derive(Args)]
struct SolverArgs {
    /// Convergence threshold on the cell-size error.
    #[arg(long, default_value_t = 5e-4)]
    epsilon: f64,

    /// Weight floor.
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,

    /// Iteration budget per relaxation.
    #[arg(long = "max-iters", default_value_t = 10_000)]
    max_iters: usize,

    /// Seed for all randomized placement.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// How per-cell size errors aggregate.
    #[arg(long = "error-mode", value_enum, default_value_t = ErrorModeArg::Max)]
    error_mode: ErrorModeArg,
}

impl SolverArgs {
    fn to_config(&self) -> LloydConfig {
        LloydConfig {
            epsilon: self.epsilon,
            delta: self.delta,
            max_iterations: self.max_iters,
            seed: self.seed,
            error_mode: match self.error_mode {
                ErrorModeArg::Max => ErrorMode::Max,
                ErrorModeArg::Avg => ErrorMode::Average,
            },
            ..LloydConfig::default()
        }
    }
}

#[derive(Args)]
struct LayoutArgs {
    /// Placement algorithm.
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,

    /// Tree document (JSON file) or directory to walk.
    #[arg(long)]
    input: PathBuf,

    /// Depth cap for directory ingestion.
    #[arg(long = "max-depth")]
    max_depth: Option<usize>,

    /// Sphere radius step per tree level.
    #[arg(long = "radius-scale", default_value_t = 1.0)]
    radius_scale: f64,

    #[command(flatten)]
    solver: SolverArgs,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Node counts, one table row each.
    #[arg(long, value_delimiter = ',', default_values_t = [20, 50, 1000, 1500])]
    counts: Vec<usize>,

    /// Print only the analytic face-budget columns.
    #[arg(long = "skip-wscvt")]
    skip_wscvt: bool,

    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct MeshArgs {
    /// Geometry source: a relaxed tessellation or an icosphere.
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,

    /// Number of sites (wscvt) or the node count the icosphere must host.
    #[arg(long)]
    count: usize,

    /// Site weights for wscvt (comma separated, default all equal).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,

    /// What the file contains.
    #[arg(long, value_enum, default_value_t = MeshFormatArg::CellMesh)]
    format: MeshFormatArg,

    #[command(flatten)]
    solver: SolverArgs,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFormatArg {
    CellMesh,
    Wireframe,
}

impl MeshFormatArg {
    fn to_format(self) -> MeshFormat {
        match self {
            MeshFormatArg::CellMesh => MeshFormat::CellMesh,
            MeshFormatArg::Wireframe => MeshFormat::Wireframe,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Layout(args) => run_layout(args),
        Command::Report(args) => run_report(args),
        Command::Mesh(args) => run_mesh(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Writes `data` to the `--out` file, or stdout when none was given.
fn emit(out: Option<&PathBuf>, data: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, data)?,
        None => std::io::stdout().write_all(data)?,
    }
    Ok(())
}

fn run_layout(args: LayoutArgs) -> Result<(), CliError> {
    let tree = ingest_tree(&args.input, args.max_depth)?;
    let algorithm = args.algorithm.to_algorithm();
    let config =
        LayoutConfig { solver: args.solver.to_config(), radius_scale: args.radius_scale };
    let layout = layout_tree(&tree, algorithm, &config)?;

    let header = LayoutHeader {
        algorithm: args.algorithm.name().into(),
        seed: args.solver.seed,
        epsilon: args.solver.epsilon,
        delta: args.solver.delta,
        iterations: layout.stats().solver_iterations,
        final_error: layout.stats().final_error,
        waste_percent: document::first_sphere_waste(&tree, algorithm),
    };
    let doc = document::document_from_layout(&layout, header);
    let text = document::to_json(&doc)?;
    eprintln!(
        "placed {} nodes on {} spheres",
        doc.nodes.len(),
        layout.level_radii().len().saturating_sub(1)
    );
    emit(args.out.as_ref(), text.as_bytes())
}

fn run_report(args: ReportArgs) -> Result<(), CliError> {
    let opts = ReportOptions {
        counts: args.counts,
        with_wscvt: !args.skip_wscvt,
        solver: args.solver.to_config(),
    };
    let mut stdout = std::io::stdout();
    report_comparison(&opts, &mut stdout)?;
    Ok(())
}

fn run_mesh(args: MeshArgs) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match args.algorithm {
        AlgorithmArg::Wscvt => {
            let weights = match &args.weights {
                Some(w) if w.len() == args.count => w.clone(),
                Some(w) => {
                    return Err(CliError::Parse(format!(
                        "--weights lists {} values but --count is {}",
                        w.len(),
                        args.count
                    )))
                }
                None => vec![1.0; args.count],
            };
            let outcome = run_wscvt(&weights, &args.solver.to_config())?;
            eprintln!(
                "relaxed {} sites in {} iterations (error {:.3e})",
                args.count, outcome.report.iterations, outcome.report.final_error
            );
            export_tessellation(&outcome.tessellation, args.format.to_format(), &mut buf)?;
        }
        AlgorithmArg::Trisphere => {
            let placement = trisphere_layout(args.count)?;
            eprintln!(
                "icosphere level {} hosts {} of {} faces",
                placement.level, placement.stats.used, placement.stats.faces
            );
            export_icosphere(&placement.sphere, args.format.to_format(), &mut buf)?;
        }
    }
    emit(args.out.as_ref(), &buf)
}
