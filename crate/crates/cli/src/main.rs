use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use sarr::bop::{self, BopError};
use sarr::codec::Selector;
use sarr::golden;
use sarr::metrics::{evaluate, EvalOptions, Task};
use sarr::symmetry::{class_by_name, Dataset, Generator, ObjectCatalog, SymmetryClass};
use sarr::validation::{self, ScanReport};

// Writes to stdout that drop errors, so a closed pipe (`sarr inspect | head`)
// ends the output quietly instead of panicking.
macro_rules! println {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! print {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("validation failed")]
    ValidationFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::ValidationFailed => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<BopError> for CliError {
    fn from(e: BopError) -> Self {
        match e {
            BopError::UnknownObject { .. } => CliError::Usage(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

/// Canonic pose conversion, symmetry-aware evaluation and property scans for
/// symmetric objects.
#[derive(Debug, Parser)]
#[command(name = "sarr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replace every ground-truth rotation by its canonic representative.
    Convert(ConvertArgs),
    /// Score predictions against ground truth with the AR_C recall metric.
    Eval(EvalArgs),
    /// Check uniqueness and continuity of the encoding for one class.
    Validate(ValidateArgs),
    /// Show the symmetry class of an object, or list a dataset's classes.
    Inspect(InspectArgs),
    /// Write the reference fixture used by language bindings.
    Golden(GoldenArgs),
}

#[derive(Debug, Args)]
struct CatalogArgs {
    /// tless, itodd or primitive
    #[arg(long)]
    dataset: String,
    /// Use the alternative ITODD classification (screw 23 continuous, 2/4/5 asymmetric).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    itodd_alternative: bool,
}

impl CatalogArgs {
    fn dataset(&self) -> Result<Dataset, CliError> {
        self.dataset.parse().map_err(|e: sarr::symmetry::CatalogError| CliError::Usage(e.to_string()))
    }

    fn catalog(&self) -> ObjectCatalog {
        ObjectCatalog::new(self.itodd_alternative)
    }
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[command(flatten)]
    catalog: CatalogArgs,
    /// BOP scene_gt.json
    #[arg(long)]
    gt: PathBuf,
    /// Output path for the canonic scene_gt.json
    #[arg(long)]
    out: PathBuf,
    /// Scene id; defaults to the numeric name of the file's directory, else 0.
    #[arg(long)]
    scene_id: Option<u32>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    catalog: CatalogArgs,
    /// BOP scene_gt.json
    #[arg(long)]
    gt: PathBuf,
    /// BOP scene_gt_info.json (required for siso)
    #[arg(long)]
    gt_info: Option<PathBuf>,
    /// BOP results CSV
    #[arg(long)]
    preds: PathBuf,
    /// siso or vivo
    #[arg(long, default_value = "vivo")]
    task: String,
    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    scene_id: Option<u32>,
    /// Map predictions to their canonic pose before scoring.
    #[arg(long)]
    canonicalize_preds: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    catalog: CatalogArgs,
    /// Class name within the dataset (II, IX, CUBE, ...)
    #[arg(long)]
    class: String,
    /// Grid step in degrees; must divide 80 and 360.
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    /// Write the scan report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write heatmap rows alpha_deg,gamma_deg,value.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Encoding entry for --grid.
    #[arg(long, default_value = "s_gamma")]
    selector: String,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[command(flatten)]
    catalog: CatalogArgs,
    #[arg(long)]
    object: Option<u32>,
    /// Class or primitive name.
    #[arg(long, conflicts_with = "object")]
    class: Option<String>,
    /// Print the catalog as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct GoldenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = golden::GOLDEN_ROTATIONS_PER_CLASS)]
    per_class: usize,
    #[arg(long, default_value_t = golden::GOLDEN_SEED)]
    seed: u64,
}

fn scene_id_for(path: &Path, explicit: Option<u32>) -> u32 {
    explicit.unwrap_or_else(|| {
        path.parent()
            .and_then(Path::file_name)
            .and_then(|n| n.to_str())
            .and_then(|n| n.parse().ok())
            .unwrap_or(0)
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_convert(args: &ConvertArgs) -> Result<(), CliError> {
    let dataset = args.catalog.dataset()?;
    let records = bop::read_scene_gt(&args.gt, scene_id_for(&args.gt, args.scene_id))?;
    let (converted, summary) = bop::convert_to_canonic(&records, dataset, &args.catalog.catalog())?;
    bop::write_scene_gt(&converted, &args.out)?;
    for (class, n) in &summary.per_class {
        println!("{class} {n}");
    }
    println!("converted {} records", converted.len());
    if summary.orthonormalized > 0 {
        eprintln!("re-orthonormalized {} input rotations", summary.orthonormalized);
    }
    if summary.degenerate > 0 {
        eprintln!("warning: {} rotations hit the encoding singularity", summary.degenerate);
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let dataset = args.catalog.dataset()?;
    let task: Task = args.task.parse().map_err(CliError::Usage)?;
    if task == Task::Siso && args.gt_info.is_none() {
        return Err(CliError::Usage(
            "siso evaluation selects the most visible instance and needs --gt-info".to_string(),
        ));
    }
    let mut gt = bop::read_scene_gt(&args.gt, scene_id_for(&args.gt, args.scene_id))?;
    if let Some(info) = &args.gt_info {
        bop::attach_visibility(&mut gt, &bop::read_scene_gt_info(info)?);
    }
    let preds = bop::read_results_csv(&args.preds)?;
    let options = EvalOptions {
        task,
        dataset,
        catalog: args.catalog.catalog(),
        canonicalize_predictions: args.canonicalize_preds,
    };
    let report = evaluate(&gt, &preds, &options).map_err(|e| CliError::Usage(e.to_string()))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(out) = &args.out {
        write_file(out, &to_json(&report))?;
    }
    println!("AR_C {:.4}", report.ar_c);
    Ok(())
}

fn resolve_class(args: &CatalogArgs, name: &str) -> Result<&'static SymmetryClass, CliError> {
    class_by_name(args.dataset()?, name).map_err(|e| CliError::Usage(e.to_string()))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let class = resolve_class(&args.catalog, &args.class)?;
    let selector: Selector = args.selector.parse().map_err(CliError::Usage)?;
    let usage = |e: validation::ValidationError| CliError::Usage(e.to_string());
    let report: ScanReport = validation::full_scan(class, args.step).map_err(usage)?;
    println!("class {} kappa {} step {} samples {}", class.id, class.kappa, args.step, report.samples);
    println!(
        "uniqueness max_deviation {:.3e} {}",
        report.max_uniqueness_deviation,
        verdict(report.max_uniqueness_deviation < validation::SCAN_TOL)
    );
    if let Some(w) = &report.worst_uniqueness {
        if w.deviation >= validation::SCAN_TOL {
            println!(
                "  worst pose ({:.3}, {:.3}, {:.3}) shift ({}, {}, {})",
                w.pose_deg[0], w.pose_deg[1], w.pose_deg[2], w.shift_deg[0], w.shift_deg[1], w.shift_deg[2]
            );
        }
    }
    println!(
        "continuity max_delta {:.6} bound {:.6} {}",
        report.max_adjacent_delta,
        report.lipschitz_bound,
        verdict(report.max_adjacent_delta <= report.lipschitz_bound + validation::SCAN_TOL)
    );
    println!("result {}", verdict(report.pass));
    if let Some(out) = &args.out {
        write_file(out, &to_json(&report))?;
    }
    if let Some(grid) = &args.grid {
        let rows = validation::emit_grid(class, selector, args.step).map_err(usage)?;
        write_file(grid, &validation::format_grid_csv(&rows))?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::ValidationFailed)
    }
}

fn describe(class: &SymmetryClass) -> String {
    let generators: Vec<String> = class
        .generators()
        .iter()
        .map(|g| match g {
            Generator::Discrete { axis, angle } => format!("{axis:?}:{}", angle.to_degrees().round()),
            Generator::Continuous { axis } => format!("{axis:?}:any"),
        })
        .collect();
    format!(
        "id {}\nclamp {}\ngenerators [{}]",
        class.id,
        class.clamp_style,
        generators.join(", ")
    )
}

fn cmd_inspect(args: &InspectArgs) -> Result<(), CliError> {
    let dataset = args.catalog.dataset()?;
    let catalog = args.catalog.catalog();
    let usage = |e: sarr::symmetry::CatalogError| CliError::Usage(e.to_string());
    let single = match (args.object, &args.class) {
        (Some(id), _) => Some(catalog.lookup(dataset, id).map_err(usage)?),
        (None, Some(name)) => Some(class_by_name(dataset, name).map_err(usage)?),
        (None, None) => None,
    };
    match single {
        Some(class) => {
            let members = catalog
                .list_classes(dataset)
                .into_iter()
                .find(|c| c.class.id == class.id)
                .map(|c| c.members)
                .unwrap_or_default();
            if args.json {
                let value = serde_json::json!({ "class": class, "members": members });
                print!("{}", to_json(&value));
            } else {
                println!("class {} kappa {}", class.name, class.kappa);
                println!("{}", describe(class));
                let ids: Vec<String> = members.iter().map(u32::to_string).collect();
                println!("members [{}]", ids.join(","));
            }
        }
        None if args.json => match dataset {
            Dataset::Primitive => print!("{}", to_json(&catalog.list_classes(dataset))),
            _ => print!("{}", to_json(&catalog.export(dataset))),
        },
        None => print!("{}", catalog.export_text(dataset)),
    }
    Ok(())
}

fn cmd_golden(args: &GoldenArgs) -> Result<(), CliError> {
    let fixture = golden::generate(args.per_class, args.seed).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(&args.out, &golden::to_json(&fixture))?;
    println!("wrote {} classes x {} rotations", fixture.classes.len(), fixture.rotations_per_class);
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SARR_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("SARR_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Convert(a) => cmd_convert(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Golden(a) => cmd_golden(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::ValidationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
