use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hkdelay::analysis::Certificates;
use hkdelay::controllers::ControlPolicy;
use hkdelay::scenario::{
    emit_certificates, preset, render_certificates, run_scenario, run_sweep, write_run, ScenarioConfig, ScenarioRun,
    SweepAxis, SweepOutcome,
};
use hkdelay::Error;

#[derive(Parser)]
#[command(name = "hkdelay", version, about = "Delayed leader-follower opinion dynamics")]
struct Cli {
    /// Directory for CSV and report files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Exit with status 4 when the delay certificate does not hold.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Simulate { config: PathBuf },
    /// Run one scenario per value of a scalar parameter.
    Sweep {
        config: PathBuf,
        /// tau, gamma, control_bound (M), step or kernel_mass (B).
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
    },
    /// Print the certificates of a scenario without simulating.
    Certify { config: PathBuf },
    /// Run a built-in scenario: fig1 (consensus) or fig2 (waypoint).
    Preset {
        name: String,
        #[arg(long)]
        tau: Option<f64>,
    },
}

enum Failure {
    Lib(Error),
    Strict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Strict(msg)) => {
            eprintln!("certificate violation: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &Error) -> u8 {
    match e {
        Error::CertificateViolation(_) => 4,
        e if e.is_numerical() => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = ScenarioConfig::load(config)?;
            simulate(cli, &cfg, &stem_of(config))
        }
        Command::Preset { name, tau } => {
            let cfg = preset(name, *tau)?;
            let stem = match tau {
                Some(t) => format!("{name}_tau{t}"),
                None => name.clone(),
            };
            simulate(cli, &cfg, &stem)
        }
        Command::Certify { config } => {
            let cfg = ScenarioConfig::load(config)?;
            let cert = emit_certificates(&cfg)?;
            print!("{}", render_certificates(&cert));
            strict_check(cli, &cfg, &cert)
        }
        Command::Sweep { config, axis, values } => {
            let cfg = ScenarioConfig::load(config)?;
            let axis: SweepAxis = axis.parse()?;
            sweep(cli, &cfg, axis, values, &stem_of(config))
        }
    }
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Lib(Error::Io(e.to_string()))
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn simulate(cli: &Cli, cfg: &ScenarioConfig, stem: &str) -> Result<(), Failure> {
    let run = run_scenario(cfg)?;
    let files = write_run(&run, &cli.out, stem)?;
    print_summary(&run);
    println!("wrote {} and {}", files.csv.display(), files.report.display());
    strict_check(cli, cfg, &run.report.certificates)
}

fn print_summary(run: &ScenarioRun) {
    let r = &run.report;
    match r.consensus_time {
        Some(t) => println!("consensus reached at t = {t} (d0 < {:.3e})", r.consensus_threshold),
        None => println!("consensus not reached (threshold {:.3e})", r.consensus_threshold),
    }
    if let Some(d) = r.d0_series.last() {
        println!("final d0 = {d:.6e}");
    }
    if let Some(rate) = r.fitted_rate {
        println!("fitted decay rate = {rate:.6e}");
    }
    if r.oscillation {
        println!("d0 is non-monotone (oscillation)");
    }
    if let Some(last) = r.phases.last() {
        println!("controller phases: {}, last at t = {}", r.phases.len(), last.t);
    }
    if r.timed_out {
        println!("warning: a controller phase timed out");
    }
}

/// Under `--strict`, the delay must meet its bound; waypoint runs also need the
/// settling condition.
fn strict_check(cli: &Cli, cfg: &ScenarioConfig, cert: &Certificates) -> Result<(), Failure> {
    if !cli.strict {
        return Ok(());
    }
    if !cert.complies {
        return Err(Failure::Strict(format!(
            "maximal delay {} exceeds the bound by {:.6e}",
            cert.tau_max, -cert.delay_margin
        )));
    }
    let waypoint = matches!(cfg.resolve()?.policy, ControlPolicy::Waypoint(_));
    if waypoint && !cert.halanay_ok {
        return Err(Failure::Strict(format!(
            "settling condition fails with margin {:.6e}",
            cert.halanay_margin
        )));
    }
    Ok(())
}

fn sweep(cli: &Cli, cfg: &ScenarioConfig, axis: SweepAxis, values: &[f64], stem: &str) -> Result<(), Failure> {
    let results = run_sweep(cfg, axis, values)?;
    std::fs::create_dir_all(&cli.out).map_err(Error::from)?;

    let finals: Vec<Option<Vec<f64>>> = results
        .iter()
        .map(|(_, run)| {
            run.as_ref().ok().map(|r| {
                let traj = &r.simulation.trajectory;
                traj.state(traj.len() - 1).as_slice().to_vec()
            })
        })
        .collect();
    let ratios = if axis == SweepAxis::Step {
        convergence_ratios(&finals)
    } else {
        vec![None; finals.len()]
    };

    let path = cli.out.join(format!("{stem}.sweep.csv"));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&path)
        .map_err(csv_err)?;
    w.write_record([
        "value",
        "consensus_time",
        "final_d0",
        "fitted_rate",
        "oscillation",
        "tau_bound_pointwise",
        "complies",
        "convergence_ratio",
        "error",
    ])
    .map_err(csv_err)?;
    let num = |v: f64| format!("{v:.14e}");
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for (k, (entry, run)) in results.iter().enumerate() {
        let row = match (&entry.outcome, run) {
            (SweepOutcome::Report(r), Ok(run)) => {
                write_run(run, &cli.out, &format!("{stem}_{k}"))?;
                println!(
                    "{:>12} consensus {:>22} rate {}",
                    entry.value,
                    opt(r.consensus_time),
                    opt(r.fitted_rate)
                );
                vec![
                    num(entry.value),
                    opt(r.consensus_time),
                    opt(r.d0_series.last().copied()),
                    opt(r.fitted_rate),
                    r.oscillation.to_string(),
                    num(r.certificates.tau_bound_pointwise),
                    r.certificates.complies.to_string(),
                    opt(ratios[k]),
                    String::new(),
                ]
            }
            (_, Err(e)) => {
                println!("{:>12} failed: {e}", entry.value);
                let mut row = vec![String::new(); 9];
                row[0] = num(entry.value);
                row[8] = e.to_string();
                row
            }
            (SweepOutcome::Error(_), Ok(_)) => unreachable!("sweep outcome disagrees with its run"),
        };
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(Error::from)?;
    println!("wrote {}", path.display());

    // the first failed run decides the exit status
    let mut results = results;
    if let Some(k) = results.iter().position(|(_, r)| r.is_err()) {
        let (_, Err(e)) = results.swap_remove(k) else { unreachable!() };
        return Err(Failure::Lib(e));
    }
    for (entry, run) in &results {
        if let Ok(run) = run {
            strict_check(cli, cfg, &run.report.certificates).map_err(|f| match f {
                Failure::Strict(m) => Failure::Strict(format!("value {}: {m}", entry.value)),
                other => other,
            })?;
        }
    }
    Ok(())
}

/// `|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|` at the final time, for consecutive
/// halvings of the step.
fn convergence_ratios(finals: &[Option<Vec<f64>>]) -> Vec<Option<f64>> {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    (0..finals.len())
        .map(|k| {
            if k < 2 {
                return None;
            }
            let (a, b, c) = (finals[k - 2].as_ref()?, finals[k - 1].as_ref()?, finals[k].as_ref()?);
            let below = dist(b, c);
            (below > 0.0).then(|| dist(a, b) / below)
        })
        .collect()
}
