use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use sfg_cli::config::{parse_into, ConfigBuilder, Origin, KEYS};
use sfg_cli::{run, CliError, FigureId};

#[derive(Parser)]
#[command(name = "sfg", version, about = "Quantum dynamics of sum frequency generation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classical fixed point, drift eigenvalues and critical pump.
    Steady(Common),
    /// Stable/unstable pump boundary for each gamma3/gamma ratio.
    StabilityMap(Common),
    /// Linearized output spectra at a stable operating point.
    Spectrum(Common),
    /// Positive-P trajectory ensemble (`--mode tw|cavity`).
    Simulate(Common),
    /// Regenerate the data of one figure.
    Reproduce {
        /// fig1 .. fig8
        figure: FigureId,
        #[command(flatten)]
        common: Common,
    },
    /// Run the command recorded in a config or `.meta` file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Flags mirror the config keys and override values read from `--config`.
#[derive(Args)]
struct Common {
    /// key=value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps1_im: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps2_im: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1_0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1_0_im: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2_0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2_0_im: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha3_0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha3_0_im: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    stride: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_traj: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega_points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    ratios: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps_max: Option<String>,
    #[arg(long, short, allow_hyphen_values = true)]
    output: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    plots: Option<String>,
}

impl Common {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("kappa", &self.kappa),
            ("gamma1", &self.gamma1),
            ("gamma2", &self.gamma2),
            ("gamma3", &self.gamma3),
            ("eps1", &self.eps1),
            ("eps1_im", &self.eps1_im),
            ("eps2", &self.eps2),
            ("eps2_im", &self.eps2_im),
            ("mode", &self.mode),
            ("alpha1_0", &self.alpha1_0),
            ("alpha1_0_im", &self.alpha1_0_im),
            ("alpha2_0", &self.alpha2_0),
            ("alpha2_0_im", &self.alpha2_0_im),
            ("alpha3_0", &self.alpha3_0),
            ("alpha3_0_im", &self.alpha3_0_im),
            ("dt", &self.dt),
            ("t_max", &self.t_max),
            ("stride", &self.stride),
            ("n_traj", &self.n_traj),
            ("seed", &self.seed),
            ("omega_min", &self.omega_min),
            ("omega_max", &self.omega_max),
            ("omega_points", &self.omega_points),
            ("ratios", &self.ratios),
            ("eps_min", &self.eps_min),
            ("eps_max", &self.eps_max),
            ("output", &self.output),
            ("plots", &self.plots),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Layers: preset or command, then files, then flags.
fn build(cmd: Cmd) -> Result<sfg_cli::RunConfig, CliError> {
    let mut b = ConfigBuilder::new();
    let origin = Origin::Flag("command".into());
    let (command, figure, file, common) = match cmd {
        Cmd::Steady(c) => (Some("steady"), None, None, c),
        Cmd::StabilityMap(c) => (Some("stability-map"), None, None, c),
        Cmd::Spectrum(c) => (Some("spectrum"), None, None, c),
        Cmd::Simulate(c) => (Some("simulate"), None, None, c),
        Cmd::Reproduce { figure, common } => (None, Some(figure), None, common),
        Cmd::Run { file, common } => (None, None, Some(file), common),
    };
    if let Some(f) = figure {
        b.set("reproduce", &f.to_string(), origin.clone())?;
    }
    if let Some(f) = &file {
        parse_into(&mut b, &read(f)?)?;
    }
    if let Some(f) = &common.config {
        parse_into(&mut b, &read(f)?)?;
    }
    if let Some(c) = command {
        b.set("command", c, origin)?;
    }
    for (key, value) in common.pairs() {
        b.set(key, value, Origin::Flag(key.replace('_', "-")))?;
    }
    Ok(b.finish()?)
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("SFG_THREADS") {
        let n: usize = v.parse().map_err(|_| format!("SFG_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let keys: String = KEYS.iter().map(|(k, d)| format!("  {k:<14} {d}\n")).collect();
    let matches = Cli::command()
        .after_long_help(format!(
            "Config keys (files take one key=value per line, '#' starts a comment; flags use --key-name):\n{keys}\n\
             Environment: SFG_THREADS sets the worker thread count.\n\
             Exit codes: 0 ok, 1 usage or config error, 2 unstable operating point, 3 ensemble divergence."
        ))
        .try_get_matches();
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = build(cli.command).and_then(|config| run(&config));
    match result {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for a in &report.artifacts {
                println!("wrote {}", a.csv.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
