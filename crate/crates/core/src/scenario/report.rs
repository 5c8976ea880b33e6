//! CSV and plot-series output.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{ReportRow, ScenarioConfig, ScenarioError, ScenarioReport};
use crate::crash::{write_crash_series_csv, CrashModel};
use crate::dynamics::{brake_to_target, steering_trajectory, write_braking_csv, write_trajectory_csv};
use crate::format::sig6;

pub const REPORT_HEADER: &str = "velocity,occupants,pedestrians,laden_mass,\
barrier_impact_velocity,pedestrian_impact_velocity,peak_deformation,\
cost_pedestrians,cost_occupants,utilitarian_choice,deontological_choice,annotation";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Plots,
    All,
}

impl FromStr for EmitFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "plots" | "plot-series" => Ok(Self::Plots),
            "all" => Ok(Self::All),
            other => Err(format!("unknown emit format `{other}`, expected csv, plots or all")),
        }
    }
}

pub fn write_row_csv<W: Write>(mut out: W, row: &ReportRow) -> io::Result<()> {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        sig6(row.velocity),
        row.occupants,
        row.pedestrians,
        sig6(row.laden_mass),
        sig6(row.barrier_impact_velocity),
        sig6(row.pedestrian_impact_velocity),
        sig6(row.peak_deformation),
        sig6(row.cost_pedestrians),
        sig6(row.cost_occupants),
        row.utilitarian_choice(),
        row.deontological_choice(),
        row.annotations.join(";"),
    )
}

pub fn write_report_csv<W: Write>(mut out: W, report: &ScenarioReport) -> io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for row in &report.rows {
        write_row_csv(&mut out, row)?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(mut out: W, report: &ScenarioReport) -> io::Result<()> {
    writeln!(out, "occupants,policy,total_cost,published_total,annotation")?;
    for s in &report.summaries {
        let (published, note) = match s.published_total {
            // published sums are whole numbers
            Some(p) if (s.total_cost - p).abs() > 1.0 => (sig6(p), "paper_erratum"),
            Some(p) => (sig6(p), ""),
            None => (String::new(), ""),
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            s.occupants,
            s.policy,
            sig6(s.total_cost),
            published,
            note
        )?;
    }
    Ok(())
}

/// Per-option decision records for every row and both policies.
pub fn write_decisions_csv<W: Write>(mut out: W, report: &ScenarioReport) -> io::Result<()> {
    writeln!(
        out,
        "velocity,occupants,pedestrians,policy,chosen,option_id,target,people,feature_value,cost"
    )?;
    for row in &report.rows {
        for decision in [&row.utilitarian, &row.deontological] {
            let mut records = Vec::new();
            decision.write_csv(&mut records, false)?;
            for line in String::from_utf8_lossy(&records).lines() {
                writeln!(
                    out,
                    "{},{},{},{line}",
                    sig6(row.velocity),
                    row.occupants,
                    row.pedestrians
                )?;
            }
        }
    }
    Ok(())
}

/// Cost against pedestrian count for one occupant count, one block per velocity.
fn write_cost_series<W: Write>(mut out: W, report: &ScenarioReport, occupants: u32) -> io::Result<()> {
    writeln!(out, "velocity,pedestrians,cost_pedestrians,cost_occupants")?;
    for row in report.rows.iter().filter(|r| r.occupants == occupants) {
        writeln!(
            out,
            "{},{},{},{}",
            sig6(row.velocity),
            row.pedestrians,
            sig6(row.cost_pedestrians),
            sig6(row.cost_occupants)
        )?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, ScenarioError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn write_file<F>(dir: &Path, name: &str, written: &mut Vec<PathBuf>, body: F) -> Result<(), ScenarioError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let path = dir.join(name);
    let io_err = |source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = create(&path)?;
    body(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    written.push(path);
    Ok(())
}

/// Writes the report into `dir` and returns the files written.
///
/// `csv` produces `report.csv`, `summary.csv` and `decisions.csv`. `plots`
/// produces one cost series per occupant count and, per velocity and
/// occupant count, the braking, steering and crash time series.
pub fn emit_report(
    report: &ScenarioReport,
    config: &ScenarioConfig,
    dir: &Path,
    format: EmitFormat,
) -> Result<Vec<PathBuf>, ScenarioError> {
    if report.rows.is_empty() {
        return Err(ScenarioError::EmptyReport);
    }
    config.validate()?;
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    if matches!(format, EmitFormat::Csv | EmitFormat::All) {
        write_file(dir, "report.csv", &mut written, |w| write_report_csv(w, report))?;
        write_file(dir, "summary.csv", &mut written, |w| write_summary_csv(w, report))?;
        write_file(dir, "decisions.csv", &mut written, |w| write_decisions_csv(w, report))?;
    }

    if matches!(format, EmitFormat::Plots | EmitFormat::All) {
        let mut occupants: Vec<u32> = report.rows.iter().map(|r| r.occupants).collect();
        occupants.sort_unstable();
        occupants.dedup();
        let mut velocities: Vec<f64> = report.rows.iter().map(|r| r.velocity).collect();
        velocities.sort_by(f64::total_cmp);
        velocities.dedup();

        for &o in &occupants {
            write_file(dir, &format!("cost_vs_pedestrians_occupants_{o}.csv"), &mut written, |w| {
                write_cost_series(w, report, o)
            })?;
        }
        for &v in &velocities {
            for &o in &occupants {
                let vehicle = config.vehicle_for(o);
                let braking = brake_to_target(&vehicle, v, config.barrier_distance, config.dt)?;
                let steering = steering_trajectory(
                    &vehicle,
                    &braking,
                    config.steering_gamma,
                    config.pedestrian_distance,
                    config.dt,
                )?;
                let tag = format!("v{v}_occupants_{o}");
                write_file(dir, &format!("braking_{tag}.csv"), &mut written, |w| {
                    write_braking_csv(w, &braking.series)
                })?;
                write_file(dir, &format!("steering_{tag}.csv"), &mut written, |w| {
                    write_trajectory_csv(w, &steering.samples)
                })?;
                if !braking.stopped_before_target {
                    let crash = CrashModel::new(
                        vehicle.mass,
                        config.crash.stiffness,
                        config.crash.failure_point,
                    )?
                    .with_failure_point_energy(config.crash.include_failure_point_in_energy);
                    let outcome = crash.simulate(braking.impact_velocity, config.crash_dt)?;
                    write_file(dir, &format!("crash_{tag}.csv"), &mut written, |w| {
                        write_crash_series_csv(w, &outcome.series)
                    })?;
                }
            }
        }
    }
    Ok(written)
}
