use std::path::PathBuf;
use std::process::ExitCode;

use betaplane_cli::config::{parse_config, read_config_source, Overrides, Subcommand};
use betaplane_cli::run;
use clap::{Args, Parser, Subcommand as ClapSubcommand};

#[derive(Parser)]
#[command(name = "betaplane", version, about = "Linear beta-plane shear flow laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file, or inline JSON starting with `{`.
    #[arg(long)]
    config: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel scans.
    #[arg(long)]
    workers: Option<usize>,
    /// Override `numerics.n`.
    #[arg(long)]
    n: Option<usize>,
    /// Override `numerics.dt`.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Integrate the linearized vorticity equation.
    Evolve(Common),
    /// Discrete spectrum with spurious-mode filtering.
    Spectrum(Common),
    /// Solve the inhomogeneous Rayleigh-Kuo problem.
    Bvp(Common),
    /// Classify and scan the sinus parameter plane.
    Atlas(Common),
    /// Run an acceptance scenario, or `all`.
    Verify {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (sub, common, scenario) = match cli.command {
        Command::Evolve(c) => (Subcommand::Evolve, c, None),
        Command::Spectrum(c) => (Subcommand::Spectrum, c, None),
        Command::Bvp(c) => (Subcommand::Bvp, c, None),
        Command::Atlas(c) => (Subcommand::Atlas, c, None),
        Command::Verify { scenario, common } => (Subcommand::Verify, common, Some(scenario)),
    };
    if let Some(w) = common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot configure {w} workers: {e}");
            return ExitCode::from(1);
        }
    }
    let result = (|| {
        let text = common.config.as_deref().map(read_config_source).transpose()?;
        let overrides = Overrides { n: common.n, dt: common.dt };
        let cfg = parse_config(text.as_deref(), sub, scenario, common.out.clone(), &overrides)?;
        run(&cfg)
    })();
    match result {
        Ok((status, manifest)) => {
            log::info!("wrote {} files, content hash {}", manifest.outputs.len(), manifest.content_hash);
            ExitCode::from(status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
