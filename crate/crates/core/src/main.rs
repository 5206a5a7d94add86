use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use gsqg_core::evolution::{picard_iterate, rhs_assemble, run};
use gsqg_core::io::{
    emit_plot_data, make_initial, parse_filter, write_diagnostics, write_snapshot, ConfigFile, InitialCurve, Mode,
    RunConfig, Snapshot,
};
use gsqg_core::velocity::VelocityKernels;
use gsqg_core::verify::run_all;
use gsqg_core::{GsqgError, Result};

/// Sharp-front evolution for the generalized SQG equation.
///
/// Precedence is command-line flag, then config file, then default.
#[derive(Debug, Parser)]
#[command(name = "gsqg", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Number of grid points (power of two).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    t_final: Option<f64>,
    /// circle:r | ellipse:a,b | file:path
    #[arg(long, global = true)]
    initial: Option<InitialCurve>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    snapshot_every: Option<usize>,
    /// off | exp:p,alpha
    #[arg(long, global = true)]
    filter: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the physical constant C_beta instead of 1.
    #[arg(long, global = true)]
    exact_constant: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time-step the front and write snapshots and diagnostics.
    Evolve,
    /// Run the Picard iteration on [0, T*].
    Picard,
    /// Run the acceptance criteria.
    Verify,
}

impl Cli {
    fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => ConfigFile::load(p)?.apply(RunConfig::default())?,
            None => RunConfig::default(),
        };
        let flags = ConfigFile {
            beta: self.beta,
            n: self.n,
            dt: self.dt,
            t_final: self.t_final,
            initial: self.initial.clone(),
            out: self.out.clone(),
            mode: self.command.as_ref().map(|c| match c {
                Command::Evolve => Mode::Evolve,
                Command::Picard => Mode::Picard,
                Command::Verify => Mode::Verify,
            }).or(self.mode),
            snapshot_every: self.snapshot_every,
            filter: self.filter.clone(),
            seed: self.seed,
            exact_constant: self.exact_constant.then_some(true),
            ..ConfigFile::default()
        };
        if let Some(f) = &self.filter {
            parse_filter(f)?;
        }
        let c = flags.apply(base)?;
        c.evolution.validate()?;
        Ok(c)
    }
}

fn evolve(c: &RunConfig) -> Result<bool> {
    let e = &c.evolution;
    let k = VelocityKernels::new(e.beta, e.n_points)?;
    let initial = make_initial(&c.initial, e.n_points, e.arc_chord_options())?;
    let dir = &c.output_dir;
    let mut index = 0;
    let mut trajectory = Vec::new();
    let out = run(initial, e, &k, c.snapshot_every, |s| {
        let lambda0 = rhs_assemble(s, &k)?.velocity.lambda.samples()[0].re;
        write_snapshot(&Snapshot::from_state(s, e.beta, lambda0), dir, index)?;
        index += 1;
        trajectory.push((s.time, s.f.clone()));
        Ok(())
    })?;
    let diag = write_diagnostics(&out.diagnostics, dir)?;
    let plot = emit_plot_data(&trajectory, dir)?;
    let s = &out.final_state;
    println!(
        "t = {:.6}  L = {:.12}  speed std {:.2e}  Gamma in [{:.6}, {:.6}]",
        s.time,
        s.length,
        s.speed_std(),
        s.min_gamma(),
        s.max_gamma()
    );
    println!("{index} snapshots, {} and {}", diag.display(), plot.display());
    if let Some(err) = &out.stopped {
        eprintln!("run stopped early: {err}");
        return Ok(false);
    }
    Ok(true)
}

#[derive(Serialize)]
struct PicardSummary<'a> {
    t_star: f64,
    nodes: usize,
    difference_norms: &'a [f64],
    gamma_beta_norms: &'a [f64],
    contraction_ratios: &'a [f64],
    fixed_point_residual: f64,
    diverged: bool,
    within_radius: bool,
}

fn picard(c: &RunConfig) -> Result<bool> {
    let e = &c.evolution;
    let k = VelocityKernels::new(e.beta, e.n_points)?;
    let initial = make_initial(&c.initial, e.n_points, e.arc_chord_options())?;
    let rep = picard_iterate(&initial, e, &k)?;
    let summary = PicardSummary {
        t_star: e.picard.t_star,
        nodes: e.picard.nodes,
        difference_norms: &rep.difference_norms,
        gamma_beta_norms: &rep.gamma_beta_norms,
        contraction_ratios: &rep.contraction_ratios,
        fixed_point_residual: rep.fixed_point_residual,
        diverged: rep.diverged,
        within_radius: rep.within_radius,
    };
    fs::create_dir_all(&c.output_dir).map_err(|err| GsqgError::Io {
        path: c.output_dir.clone(),
        source: err,
    })?;
    let path = c.output_dir.join("picard.json");
    let text = serde_json::to_string_pretty(&summary).expect("plain data");
    fs::write(&path, text).map_err(|err| GsqgError::Io {
        path: path.clone(),
        source: err,
    })?;
    for (i, d) in rep.difference_norms.iter().enumerate() {
        let ratio = i
            .checked_sub(1)
            .and_then(|j| rep.contraction_ratios.get(j))
            .map_or(String::new(), |r| format!("  ratio {r:.4}"));
        println!("iterate {:>2}  |u_n+1 - u_n| {d:.4e}{ratio}", i + 1);
    }
    println!("residual {:.3e}  diverged {}  -> {}", rep.fixed_point_residual, rep.diverged, path.display());
    Ok(!rep.diverged)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli.resolve().and_then(|c| match c.mode {
        Mode::Evolve => evolve(&c),
        Mode::Picard => picard(&c),
        Mode::Verify => run_all(c.seed, |r| println!("{r}")).map(|v| v.iter().all(|r| r.passed)),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
