use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cornermap_cli::config::ConfigFile;
use cornermap_cli::{
    cmd_angles, cmd_fit, cmd_mesh_images, cmd_trace, cmd_validate, cmd_winslow, CliError, CliResult, RunConfig,
    EXIT_NOT_CONVERGED, EXIT_VALIDATION,
};

#[derive(Parser)]
#[command(name = "cornermap", version, about = "Harmonic corner maps, exit-angle asymptotics and Winslow grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Exit-angle laws as CSV tables and a step plot.
    Angles,
    /// Trace inverse and forward curves toward the vertex.
    Trace,
    /// Polar meshes and their images.
    MeshImages,
    /// Solve the Winslow grid equations.
    Winslow,
    /// Oracle-versus-asymptotics table.
    Validate,
    /// Fit series coefficients to arc samples.
    Fit,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    sigma_plus: Option<f64>,
    #[arg(long, global = true)]
    sigma_minus: Option<f64>,
    /// Coefficient JSON file.
    #[arg(long, global = true)]
    coeffs: Option<PathBuf>,
    /// Winslow grid size as `NX,NY`.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn run_config(c: &Common) -> CliResult<RunConfig> {
    let mut file = match &c.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(v) = &c.out {
        file.set("output.dir", v.display().to_string());
    }
    for (key, v) in [("corner.beta", c.beta), ("corner.sigma_plus", c.sigma_plus), ("corner.sigma_minus", c.sigma_minus), ("winslow.tolerance", c.tol)] {
        if let Some(v) = v {
            file.set(key, v.to_string());
        }
    }
    if let Some(p) = &c.coeffs {
        file.set("coeffs.file", p.display().to_string());
    }
    if let Some(g) = &c.grid {
        let (nx, ny) = g
            .split_once(',')
            .ok_or_else(|| CliError::bad_input(format!("--grid `{g}`: expected NX,NY")))?;
        file.set("winslow.nx", nx.trim());
        file.set("winslow.ny", ny.trim());
    }
    if let Some(s) = c.seed {
        file.set("seed", s.to_string());
    }
    RunConfig::from_config(&file)
}

fn run(cli: &Cli) -> CliResult<i32> {
    let rc = run_config(&cli.common)?;
    match cli.command {
        Command::Angles => {
            let out = cmd_angles(&rc)?;
            for f in out.files {
                println!("{}", f.display());
            }
        }
        Command::Trace => {
            let out = cmd_trace(&rc)?;
            for e in &out.entries {
                let limit = e.estimate.map_or("-".to_owned(), |v| format!("{:.6}", v.limit_angle));
                let order = e
                    .estimate
                    .and_then(|v| v.order_estimate)
                    .map_or("-".to_owned(), |v| format!("{v:.4}"));
                println!("{:<8} angle={:<10.6} limit={limit:<10} order={order}", e.kind, e.angle);
                for err in &e.errors {
                    println!("    {err}");
                }
            }
        }
        Command::MeshImages => {
            let out = cmd_mesh_images(&rc)?;
            println!("Xi: {} polylines, T: {} polylines", out.xi.image.len(), out.t.image.len());
        }
        Command::Winslow => {
            let out = cmd_winslow(&rc)?;
            let r = &out.report;
            println!(
                "sweeps={} converged={} initial_residual={:.3e} last_update={:.3e} folds={}",
                r.iterations,
                r.converged,
                r.initial_residual,
                r.last_update().unwrap_or(0.0),
                r.fold_cells.len()
            );
            if !r.converged {
                return Ok(EXIT_NOT_CONVERGED);
            }
        }
        Command::Validate => {
            let out = cmd_validate(&rc)?;
            print!("{}", out.table());
            if !out.all_pass() {
                return Ok(EXIT_VALIDATION);
            }
        }
        Command::Fit => {
            let m = cmd_fit(&rc)?;
            println!("{}", m.to_json().map_err(CliError::from)?);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
