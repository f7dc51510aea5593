use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kicked_spin::par;
use kicked_spin_cli::config::{Axis, Method, RunConfig};
use kicked_spin_cli::output::{write_tables, Table};
use kicked_spin_cli::{commands, verify, CliError};

/// Mean-field and quantum dynamics of a kicked dissipative collective spin.
#[derive(Parser, Debug)]
#[command(name = "kicked-spin", version)]
struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker cap for parallel scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    omega0: Option<f64>,
    #[arg(long, global = true)]
    omega1: Option<f64>,
    #[arg(long = "omega-z", global = true)]
    omega_z: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lyapunov exponent and regime label on an (ω_z, ω₁) grid.
    LyapMap(LyapMapArgs),
    /// Stroboscopic my samples along one parameter.
    Bifurcation(BifurcationArgs),
    /// Canonical-coordinate Poincaré section from several initial states.
    Poincare(PoincareArgs),
    /// Stroboscopic spectrum with lattice labels and locking.
    Spectrum(SpectrumArgs),
    /// Ω_eff against ω₁ with locked plateaus.
    ShiftCurve(RangeArgs),
    /// Locking map over (ω₁, ω_z).
    Tongues(TonguesArgs),
    /// Geometric phase response on the unkicked limit cycle.
    Zgeom(ZgeomArgs),
    /// Floquet-Liouvillian eigenvalues.
    Liouvillian(LiouvillianArgs),
    /// Steady-state autocorrelator G(t).
    Autocorr(AutocorrArgs),
    /// Floquet steady state and optional evolution from the spin-up state.
    Steady(SteadyArgs),
    /// Quantum-jump trajectories and photon-count spectra.
    Trajectory(TrajectoryArgs),
    /// Runs the acceptance suite.
    Verify(VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::LyapMap(_) => "lyap-map",
            Command::Bifurcation(_) => "bifurcation",
            Command::Poincare(_) => "poincare",
            Command::Spectrum(_) => "spectrum",
            Command::ShiftCurve(_) => "shift-curve",
            Command::Tongues(_) => "tongues",
            Command::Zgeom(_) => "zgeom",
            Command::Liouvillian(_) => "liouvillian",
            Command::Autocorr(_) => "autocorr",
            Command::Steady(_) => "steady",
            Command::Trajectory(_) => "trajectory",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Args, Debug)]
struct LyapMapArgs {
    #[arg(long)]
    n_omega_z: Option<usize>,
    #[arg(long)]
    n_omega1: Option<usize>,
    #[arg(long)]
    periods: Option<usize>,
}

#[derive(Args, Debug)]
struct BifurcationArgs {
    #[arg(long, value_enum)]
    axis: Option<Axis>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    periods: Option<usize>,
}

#[derive(Args, Debug)]
struct PoincareArgs {
    #[arg(long)]
    n_initial: Option<usize>,
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long)]
    transient: Option<usize>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    transient: Option<usize>,
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args, Debug)]
struct RangeArgs {
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug)]
struct TonguesArgs {
    #[arg(long)]
    n_omega1: Option<usize>,
    #[arg(long)]
    n_omega_z: Option<usize>,
}

#[derive(Args, Debug)]
struct ZgeomArgs {
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args, Debug)]
struct LiouvillianArgs {
    /// Spin sizes; repeat or separate with commas.
    #[arg(long = "spin", value_delimiter = ',')]
    spins: Vec<f64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
}

#[derive(Args, Debug)]
struct AutocorrArgs {
    #[arg(long = "spin", value_delimiter = ',')]
    spins: Vec<f64>,
    #[arg(long)]
    t_max: Option<usize>,
}

#[derive(Args, Debug)]
struct SteadyArgs {
    #[arg(long = "spin", value_delimiter = ',')]
    spins: Vec<f64>,
    #[arg(long)]
    periods: Option<usize>,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    #[arg(long)]
    spin: Option<f64>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Criterion numbers to run; all when absent.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_list(slot: &mut Vec<f64>, v: &[f64]) {
    if !v.is_empty() {
        *slot = v.to_vec();
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.out, cli.out.clone());
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    set(&mut cfg.model.omega0, cli.omega0);
    set(&mut cfg.model.omega1, cli.omega1);
    set(&mut cfg.model.omega_z, cli.omega_z);
    set(&mut cfg.model.kappa, cli.kappa);
    match &cli.command {
        Command::LyapMap(a) => {
            set(&mut cfg.lyap_map.grid[0], a.n_omega_z);
            set(&mut cfg.lyap_map.grid[1], a.n_omega1);
            set(&mut cfg.lyap_map.lyapunov.periods, a.periods);
        }
        Command::Bifurcation(a) => {
            set(&mut cfg.bifurcation.axis, a.axis);
            set(&mut cfg.bifurcation.range[0], a.from);
            set(&mut cfg.bifurcation.range[1], a.to);
            set(&mut cfg.bifurcation.n_points, a.points);
            set(&mut cfg.bifurcation.lyapunov.periods, a.periods);
        }
        Command::Poincare(a) => {
            set(&mut cfg.poincare.n_initial, a.n_initial);
            set(&mut cfg.poincare.periods, a.periods);
            set(&mut cfg.poincare.transient, a.transient);
        }
        Command::Spectrum(a) => {
            set(&mut cfg.spectrum.frequency.length, a.length);
            set(&mut cfg.spectrum.frequency.transient, a.transient);
            set(&mut cfg.spectrum.top, a.top);
        }
        Command::ShiftCurve(a) => {
            set(&mut cfg.shift_curve.omega1_range[0], a.from);
            set(&mut cfg.shift_curve.omega1_range[1], a.to);
            set(&mut cfg.shift_curve.n_points, a.points);
        }
        Command::Tongues(a) => {
            set(&mut cfg.tongues.grid[0], a.n_omega1);
            set(&mut cfg.tongues.grid[1], a.n_omega_z);
        }
        Command::Zgeom(a) => set(&mut cfg.zgeom.nodes, a.nodes),
        Command::Liouvillian(a) => {
            set_list(&mut cfg.liouvillian.spins, &a.spins);
            set(&mut cfg.liouvillian.method, a.method);
        }
        Command::Autocorr(a) => {
            set_list(&mut cfg.autocorr.spins, &a.spins);
            set(&mut cfg.autocorr.t_max, a.t_max);
        }
        Command::Steady(a) => {
            set_list(&mut cfg.steady.spins, &a.spins);
            set(&mut cfg.steady.periods, a.periods);
        }
        Command::Trajectory(a) => {
            set(&mut cfg.trajectory.spin, a.spin);
            set(&mut cfg.trajectory.n_trajectories, a.trajectories);
            set(&mut cfg.trajectory.options.t_max, a.t_max);
            set(&mut cfg.trajectory.options.dt, a.dt);
        }
        Command::Verify(a) => {
            if !a.only.is_empty() {
                cfg.verify.only = a.only.clone();
            }
        }
    }
    Ok(cfg)
}

fn run_verify(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let mut tables = Vec::new();
    let mut reports = Vec::new();
    let ids: Vec<u8> = if cfg.verify.only.is_empty() {
        (1..=verify::CRITERIA).collect()
    } else {
        cfg.verify.only.clone()
    };
    for id in ids {
        let r = verify::criterion(id, cfg.seed)?;
        println!("{}", r.line());
        for d in &r.details {
            println!("    {d}");
        }
        tables.extend(r.tables.iter().cloned());
        reports.push(r);
    }
    tables.push(verify::summary(&reports));
    let failed = reports.iter().filter(|r| !r.pass).count();
    write_tables(&cfg.out, &tables, "verify", &cfg.digest())?;
    if failed > 0 {
        return Err(CliError::Acceptance { failed });
    }
    Ok(Vec::new())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = effective_config(cli)?;
    let command = cli.command.name();
    par::with_threads(cfg.threads, || {
        let tables = match &cli.command {
            Command::LyapMap(_) => commands::lyap_map(&cfg)?,
            Command::Bifurcation(_) => commands::bifurcation(&cfg)?,
            Command::Poincare(_) => commands::poincare(&cfg)?,
            Command::Spectrum(_) => commands::spectrum(&cfg)?,
            Command::ShiftCurve(_) => commands::shift_curve(&cfg)?,
            Command::Tongues(_) => commands::tongues(&cfg)?,
            Command::Zgeom(_) => commands::zgeom(&cfg)?,
            Command::Liouvillian(_) => commands::liouvillian(&cfg)?,
            Command::Autocorr(_) => commands::autocorr(&cfg)?,
            Command::Steady(_) => commands::steady(&cfg)?,
            Command::Trajectory(_) => commands::trajectory(&cfg)?,
            Command::Verify(_) => return run_verify(&cfg).map(|_| ()),
        };
        for p in write_tables(&cfg.out, &tables, command, &cfg.digest())? {
            println!("{}", p.display());
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kicked-spin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
