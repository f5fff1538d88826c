//! Command-line front end: run specs, sweeps, kernel snapshots, the
//! self-check suite, and plot regeneration.
//!
//! Exit codes: 0 success, 1 a quantitative check failed or a runtime error
//! occurred, 2 bad usage or configuration.

use clap::{Args, Parser, Subcommand};
use halfspace::config::{RunSpec, SweepSpec};
use halfspace::error::Error;
use halfspace::experiments::{
    run_sweep, verify_lemmas, write_phase_csv, write_phase_plot, write_result_json,
    write_series_csv, write_series_plot, write_snapshot_csv,
};
use halfspace::fields::Grid;
use halfspace::kernels::kernel_from_symbol;
use halfspace::semilinear::{run_halfspace, SimStatus};
use halfspace::symbols::DiffusionSymbol;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "halfspace", version, about = "Half-space jump-diffusion reaction solver")]
struct Cli {
    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one spec file and write result.json, series.csv, snapshot.csv,
    /// and a gnuplot script.
    Simulate {
        /// TOML run spec.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run an (alpha, amplitude) sweep and write phase.csv plus a gnuplot
    /// script.
    Sweep {
        /// TOML sweep spec.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Synthesize a semigroup kernel snapshot and write it as CSV.
    Kernel(KernelArgs),
    /// Run the quantitative self-check suite; exits 1 if any check fails.
    VerifyLemmas {
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Regenerate gnuplot scripts from artifacts in a directory.
    Plots {
        /// Directory holding result.json and/or phase.csv.
        #[arg(long, default_value = "out")]
        from: PathBuf,
    },
}

#[derive(Args)]
struct KernelArgs {
    /// Symbol family: laplacian, fractional, or gaussian.
    #[arg(long, default_value = "gaussian")]
    family: String,
    /// Stable order for family = fractional.
    #[arg(long)]
    beta: Option<f64>,
    /// Width for family = gaussian.
    #[arg(long)]
    sigma: Option<f64>,
    /// Snapshot time.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 40.0)]
    half_width: f64,
    #[arg(long, default_value_t = 2048)]
    points: usize,
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: thread pool: {e}");
            std::process::exit(2);
        }
    }
    let code = match dispatch(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

/// Ok(false) means the command ran but a check failed.
fn dispatch(cli: &Cli) -> halfspace::Result<bool> {
    match &cli.command {
        Command::Simulate { spec } => simulate(spec, &cli.out),
        Command::Sweep { spec } => sweep(spec, &cli.out),
        Command::Kernel(args) => kernel(args, &cli.out),
        Command::VerifyLemmas { seed } => lemmas(*seed),
        Command::Plots { from } => plots(from),
    }
}

fn ensure_out(out: &Path) -> halfspace::Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn simulate(spec_path: &Path, out: &Path) -> halfspace::Result<bool> {
    let spec = RunSpec::load(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let (config, u0) = spec.materialize(base)?;
    let rate = config.decay_rate();
    let result = run_halfspace(config, &u0)?;
    ensure_out(out)?;
    write_result_json(&result, rate, &spec.echo_toml(), &out.join("result.json"))?;
    write_series_csv(&result, &out.join("series.csv"))?;
    write_snapshot_csv(&result.final_state, &out.join("snapshot.csv"))?;
    write_series_plot(&result, rate, &out.join("series.gp"))?;
    match &result.status {
        SimStatus::BlewUp { t_star } => {
            println!("blew up: t* = {t_star:.6}");
        }
        SimStatus::Decayed { fitted_rate } => {
            println!("decayed: fitted rate {fitted_rate:.4} (expected -{rate:.4})");
        }
        SimStatus::Undecided => {
            println!("undecided at t = {:.4}", result.t_final);
        }
    }
    println!("artifacts in {}", out.display());
    Ok(true)
}

fn sweep(spec_path: &Path, out: &Path) -> halfspace::Result<bool> {
    let spec = SweepSpec::load(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let diagram = run_sweep(&spec, base)?;
    ensure_out(out)?;
    write_phase_csv(&diagram, &out.join("phase.csv"))?;
    write_phase_plot(&diagram, &out.join("phase.gp"))?;
    for p in &diagram.points {
        let label = match &p.status {
            SimStatus::BlewUp { t_star } => format!("blew up, t* = {t_star:.4}"),
            SimStatus::Decayed { fitted_rate } => format!("decayed, rate {fitted_rate:.4}"),
            SimStatus::Undecided => "undecided".to_string(),
        };
        println!("alpha {:<6} amp {:<8} {label}", p.alpha, p.amplitude);
    }
    match diagram.alpha_hat {
        Some(a) => println!(
            "blow-up across all amplitudes up to alpha = {a} (predicted edge {:.4})",
            diagram.critical_alpha
        ),
        None => println!(
            "no alpha column blew up at every amplitude (predicted edge {:.4})",
            diagram.critical_alpha
        ),
    }
    println!("artifacts in {}", out.display());
    Ok(true)
}

fn kernel(args: &KernelArgs, out: &Path) -> halfspace::Result<bool> {
    let grid = Grid::new(args.dim, args.half_width, args.points)?;
    let symbol = match args.family.as_str() {
        "laplacian" => DiffusionSymbol::laplacian(),
        "fractional" => {
            let beta = args
                .beta
                .ok_or_else(|| Error::Config("family 'fractional' needs --beta".into()))?;
            DiffusionSymbol::fractional_laplacian(beta)?
        }
        "gaussian" => {
            let sigma = args.sigma.unwrap_or(1.0);
            let samples = halfspace::fields::Field::gaussian(grid, sigma)?;
            DiffusionSymbol::convolution(samples, sigma * sigma / 2.0, 2.0)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown kernel family '{other}'; expected laplacian, fractional, or gaussian"
            )))
        }
    };
    let snapshot = kernel_from_symbol(&symbol, args.t, &grid)?;
    ensure_out(out)?;
    write_snapshot_csv(&snapshot.values, &out.join("kernel.csv"))?;
    println!(
        "t = {}: point mass {:.6e}, spread mass {:.6e}, total {:.6e}",
        snapshot.t,
        snapshot.dirac_weight,
        snapshot.values.mass(),
        snapshot.total_mass()
    );
    for w in &snapshot.warnings {
        println!("warning: {w}");
    }
    println!("kernel written to {}", out.join("kernel.csv").display());
    Ok(true)
}

fn lemmas(seed: u64) -> halfspace::Result<bool> {
    let report = verify_lemmas(seed)?;
    for check in &report.checks {
        let mark = if check.pass { "pass" } else { "FAIL" };
        println!("{mark}  {:<18} {}", check.name, check.detail);
    }
    Ok(report.all_pass)
}

fn plots(from: &Path) -> halfspace::Result<bool> {
    let mut wrote = 0usize;
    let result_path = from.join("result.json");
    if result_path.exists() {
        let text = std::fs::read_to_string(&result_path)?;
        let doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", result_path.display())))?;
        let result = result_from_json(&doc)?;
        let rate = doc["expected_rate"].as_f64().unwrap_or(1.0);
        write_series_plot(&result, rate, &from.join("series.gp"))?;
        println!("wrote {}", from.join("series.gp").display());
        wrote += 1;
    }
    let phase_path = from.join("phase.csv");
    if phase_path.exists() {
        let diagram = phase_from_csv(&phase_path)?;
        write_phase_plot(&diagram, &from.join("phase.gp"))?;
        println!("wrote {}", from.join("phase.gp").display());
        wrote += 1;
    }
    if wrote == 0 {
        return Err(Error::Config(format!(
            "nothing to plot: no result.json or phase.csv in {}",
            from.display()
        )));
    }
    Ok(true)
}

/// Rebuild just enough of a run result from its JSON artifact to replot it.
fn result_from_json(doc: &serde_json::Value) -> halfspace::Result<halfspace::semilinear::SimResult> {
    use halfspace::fields::Field;
    use halfspace::semilinear::{SimDiagnostics, SimRecord, SimResult};
    let status: SimStatus = serde_json::from_value(doc["status"].clone())
        .map_err(|e| Error::Config(format!("result.json status: {e}")))?;
    let records: Vec<SimRecord> = serde_json::from_value(doc["records"].clone())
        .map_err(|e| Error::Config(format!("result.json records: {e}")))?;
    let t_final = doc["t_final"].as_f64().unwrap_or(0.0);
    // The plot needs no field data; a minimal placeholder grid suffices.
    let grid = Grid::new(1, 1.0, 8)?;
    Ok(SimResult {
        status,
        records,
        final_state: Field::zeros(grid),
        t_final,
        diagnostics: SimDiagnostics::default(),
    })
}

fn phase_from_csv(path: &Path) -> halfspace::Result<halfspace::experiments::PhaseDiagram> {
    use halfspace::experiments::{PhaseDiagram, PhasePoint};
    let text = std::fs::read_to_string(path)?;
    let mut critical_alpha = None;
    let mut alpha_hat = None;
    let mut points = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# critical_alpha = ") {
            critical_alpha = rest.trim().parse::<f64>().ok();
            continue;
        }
        if let Some(rest) = line.strip_prefix("# alpha_hat = ") {
            alpha_hat = rest.trim().parse::<f64>().ok();
            continue;
        }
        if line.starts_with('#') || line.starts_with("alpha,") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Config(format!("{}: malformed row '{line}'", path.display())));
        }
        let parse = |s: &str| -> halfspace::Result<f64> {
            s.parse()
                .map_err(|_| Error::Config(format!("{}: bad number '{s}'", path.display())))
        };
        let status = match cols[2] {
            "blewup" => SimStatus::BlewUp { t_star: parse(cols[3])? },
            "decayed" => SimStatus::Decayed { fitted_rate: parse(cols[3])? },
            "undecided" => SimStatus::Undecided,
            other => {
                return Err(Error::Config(format!(
                    "{}: unknown status '{other}'",
                    path.display()
                )))
            }
        };
        points.push(PhasePoint {
            alpha: parse(cols[0])?,
            amplitude: parse(cols[1])?,
            status,
            sup_final: parse(cols[4])?,
            t_final: parse(cols[5])?,
        });
    }
    let critical_alpha = critical_alpha
        .ok_or_else(|| Error::Config(format!("{}: missing critical_alpha comment", path.display())))?;
    Ok(PhaseDiagram { points, alpha_hat, critical_alpha })
}
