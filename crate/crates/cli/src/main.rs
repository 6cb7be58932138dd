use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use longwave::experiment::{run_experiment, ExperimentConfig, ExperimentKind, RunOptions};

/// Long-wave limit experiments.
#[derive(Parser)]
#[command(name = "longwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the limit KdV system of a preset.
    Kdv(Common),
    /// Evolve a microscopic model from well-prepared data.
    Micro(Common),
    /// Sweep eps and compare the microscopic runs with the KdV limit.
    Converge(Common),
    /// Solitary wave: fixed point, profile residual and propagation.
    Soliton(Common),
    /// Miura transform condition and mKdV/KdV crosscheck.
    Miura(Common),
    /// Dispersionless breakdown against the characteristics time.
    Hyperbolic(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Scale parameter; a comma-separated list sets `eps_list` for `converge`.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Number of grid points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the eps sweep on one thread.
    #[arg(long)]
    serial: bool,
}

fn load(kind: ExperimentKind, c: &Common) -> longwave::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&c.config)?;
    let mut cfg = ExperimentConfig::from_toml_str(&text, Some(kind))?;
    if let Some(e) = &c.eps {
        if kind == ExperimentKind::Converge {
            cfg.eps_list = e.clone();
        } else {
            cfg.eps = e.last().copied();
        }
    }
    if let Some(n) = c.n {
        cfg.grid.n = n;
    }
    if let Some(t) = c.t_final {
        cfg.time.t_final = t;
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Kdv(c) => (ExperimentKind::Kdv, c),
        Command::Micro(c) => (ExperimentKind::Micro, c),
        Command::Converge(c) => (ExperimentKind::Converge, c),
        Command::Soliton(c) => (ExperimentKind::Soliton, c),
        Command::Miura(c) => (ExperimentKind::Miura, c),
        Command::Hyperbolic(c) => (ExperimentKind::Hyperbolic, c),
    };
    let result = load(kind, common).and_then(|cfg| {
        let out = run_experiment(&cfg, RunOptions { parallel: !common.serial })?;
        Ok(out.summary)
    });
    match result {
        Ok(summary) => {
            for a in &summary.assertions {
                let mark = if a.pass { "PASS" } else { "FAIL" };
                eprintln!("{mark} {} = {:e} (threshold {:e})", a.name, a.value, a.threshold);
            }
            match summary.to_json() {
                Ok(json) => print!("{json}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if summary.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
