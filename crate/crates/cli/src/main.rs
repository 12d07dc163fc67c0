use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use twistprod::{DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOLERANCE, VERSION};
use twistprod_cli::run::format_report;
use twistprod_cli::{default_suites, load_scene, run_suite, RunOptions, RunSummary, Scene, Suite, SuiteOutcome};

const EXIT_USAGE: u8 = 2;
const EXIT_SCENE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "twistprod", version = VERSION, about = "Check doubly twisted product immersions numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on a scene.
    Verify(VerifyArgs),
    /// Load a scene and print what it declares.
    Describe { scene: PathBuf },
    /// List the available suites.
    Suites,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct VerifyArgs {
    scene: PathBuf,
    /// Suite name, `all`, or `list`. May be repeated or comma-separated.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    suite: Vec<String>,
    #[arg(long)]
    samples: Option<usize>,
    /// Falls back to TWISTPROD_SEED, then the scene, then 42.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Directory for per-suite report files (default: beside the scene).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Skip writing report files.
    #[arg(long)]
    no_files: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn print_suites() {
    for s in Suite::ALL {
        println!("{:<14}{}", s.name(), s.description());
    }
}

fn resolve_options(args: &VerifyArgs, scene: &Scene) -> Result<RunOptions, String> {
    let seed = match args.seed {
        Some(s) => s,
        None => match std::env::var("TWISTPROD_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("TWISTPROD_SEED is not a non-negative integer: `{v}`"))?,
            Err(_) => scene.run.seed.unwrap_or(DEFAULT_SEED),
        },
    };
    let samples = args.samples.or(scene.run.samples).unwrap_or(DEFAULT_SAMPLES);
    let tolerance = args.tolerance.or(scene.run.tolerance).unwrap_or(DEFAULT_TOLERANCE);
    if samples == 0 {
        return Err("--samples must be at least 1".into());
    }
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(format!("--tolerance must be a non-negative number, got {tolerance}"));
    }
    Ok(RunOptions {
        samples,
        seed,
        tolerance,
    })
}

fn select_suites(requested: &[String], scene: &Scene) -> Result<Vec<Suite>, String> {
    let mut out = Vec::new();
    for name in requested {
        if name == "all" {
            out.extend(default_suites(scene));
        } else {
            out.push(Suite::from_name(name).ok_or_else(|| format!("unknown suite `{name}` (try --suite list)"))?);
        }
    }
    Ok(out)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

fn verify(args: VerifyArgs) -> ExitCode {
    if args.suite.iter().any(|s| s == "list") {
        print_suites();
        return ExitCode::SUCCESS;
    }
    let scene = match load_scene(&args.scene) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SCENE);
        }
    };
    let opts = match resolve_options(&args, &scene) {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    let suites = match select_suites(&args.suite, &scene) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let dir = match &args.report {
        Some(d) => d.clone(),
        None => args.scene.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    if !args.no_files {
        if let Err(e) = std::fs::create_dir_all(&dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return ExitCode::from(EXIT_IO);
        }
    }
    let stem = args
        .scene
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| scene.name.clone());

    if args.format == Format::Text {
        println!("scene {} ({})", scene.name, args.scene.display());
    }
    let mut outcomes = Vec::new();
    let mut reports = Vec::new();
    for suite in suites {
        let report = run_suite(&scene, suite, &opts);
        let mut file = None;
        if !args.no_files {
            let path = dir.join(format!("{stem}.{}.json", suite.name()));
            if let Err(e) = write_json(&path, &report) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_IO);
            }
            file = Some(path.display().to_string());
        }
        if args.format == Format::Text {
            println!("  {}", format_report(&report).replace('\n', "\n  "));
        }
        outcomes.push(SuiteOutcome {
            suite: report.suite.clone(),
            verdict: report.verdict,
            worst_residual: report.worst_residual(),
            error: report.error.clone(),
            report_file: file,
        });
        reports.push(report);
    }
    let summary = RunSummary {
        scene: scene.name.clone(),
        version: VERSION.to_string(),
        seed: opts.seed,
        samples: opts.samples,
        tolerance: opts.tolerance,
        suites: outcomes,
    };
    if !args.no_files {
        let path = dir.join(format!("{stem}.summary.json"));
        if let Err(e) = write_json(&path, &summary) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_IO);
        }
    }
    match args.format {
        Format::Text => {
            let passed = summary.suites.iter().filter(|s| s.verdict == twistprod::Verdict::Pass).count();
            println!("{passed}/{} suites passed", summary.suites.len());
        }
        Format::Json => {
            let doc = serde_json::json!({ "summary": summary, "reports": reports });
            println!("{}", serde_json::to_string_pretty(&doc).expect("reports serialize"));
        }
    }
    ExitCode::from(summary.exit_code() as u8)
}

fn describe(path: &Path) -> ExitCode {
    let scene = match load_scene(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SCENE);
        }
    };
    println!("scene {}", scene.name);
    if !scene.description.is_empty() {
        println!("  {}", scene.description.trim());
    }
    for (name, c) in &scene.charts {
        println!("  chart {name}: ({})", c.coords().join(", "));
    }
    for (name, p) in &scene.products {
        let declared = p.declared.map(|k| format!(", declared {k}")).unwrap_or_default();
        println!(
            "  product {name}: {}+{} dims, kind {}{declared}",
            p.product.n1(),
            p.product.n2(),
            p.product.kind()
        );
    }
    if let Some(s) = &scene.scenario {
        println!(
            "  scenario: {} -> {} ({} -> {})",
            s.source().dim(),
            s.target().dim(),
            s.source().kind(),
            s.target().kind()
        );
    }
    if let Some(i) = &scene.immersion {
        println!("  immersion: {} -> {}, split {:?}", i.dim(), i.target().dim(), i.split());
    }
    let suites: Vec<&str> = default_suites(&scene).into_iter().map(Suite::name).collect();
    println!("  suites: {}", suites.join(", "));
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::Describe { scene } => describe(&scene),
        Command::Suites => {
            print_suites();
            ExitCode::SUCCESS
        }
    }
}
