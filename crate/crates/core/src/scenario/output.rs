use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{Certificates, RunReport};
use crate::engine::Trajectory;
use crate::error::{Error, Result};

use super::ScenarioRun;

fn fmt_num(v: f64) -> String {
    format!("{v:.14e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `t, u, x0 … xN` for every forward grid point; vectors span `d` columns.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let d = traj.dim();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let col = |name: String, k: usize| if d == 1 { name } else { format!("{name}_{}", k + 1) };
    let mut header = vec!["t".to_string()];
    header.extend((0..d).map(|k| col("u".into(), k)));
    for i in 0..traj.n_total() {
        header.extend((0..d).map(|k| col(format!("x{i}"), k)));
    }
    w.write_record(&header).map_err(csv_err)?;
    for k in traj.origin()..traj.len() {
        let mut row = vec![fmt_num(traj.times()[k])];
        let u = traj.control(k).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; d]);
        row.extend(u.iter().map(|&v| fmt_num(v)));
        row.extend(traj.state(k).as_slice().iter().map(|&v| fmt_num(v)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_json(report: &RunReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub report: PathBuf,
}

/// Writes `<stem>.csv` and `<stem>.report.json` into `dir`.
pub fn write_run(run: &ScenarioRun, dir: &Path, stem: &str) -> Result<RunFiles> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let report = dir.join(format!("{stem}.report.json"));
    let file = std::io::BufWriter::new(std::fs::File::create(&csv)?);
    write_trajectory_csv(&run.simulation.trajectory, file)?;
    write_report_json(&run.report, &report)?;
    Ok(RunFiles { csv, report })
}

/// Human-readable certificate summary.
pub fn render_certificates(c: &Certificates) -> String {
    let mut s = String::new();
    let mark = |ok: bool| if ok { "yes" } else { "no" };
    let _ = writeln!(s, "radius R                 {:.6e}", c.radius_r);
    let _ = writeln!(s, "radius R* (enclosing)    {:.6e}", c.radius_r_star);
    let _ = writeln!(s, "R_gamma                  {:.6e}", c.r_gamma);
    let _ = writeln!(s, "delay bound (pointwise)  {:.9e}", c.tau_bound_pointwise);
    let _ = writeln!(s, "  with R*                {:.9e}", c.tau_bound_pointwise_star);
    if let (Some(b), Some(bs)) = (c.tau_bound_distributed, c.tau_bound_distributed_star) {
        let _ = writeln!(s, "delay bound (distrib.)   {b:.9e}");
        let _ = writeln!(s, "  with R*                {bs:.9e}");
    }
    let _ = writeln!(s, "maximal delay            {:.6e}", c.tau_max);
    let _ = writeln!(s, "delay complies           {} (margin {:+.6e})", mark(c.complies), c.delay_margin);
    let _ = writeln!(s, "settling condition       {} (margin {:+.6e})", mark(c.halanay_ok), c.halanay_margin);
    s
}
