//! Trajectory CSV export and parsing.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::Trajectory;

/// A labelled trajectory, as produced by an experiment.
pub type NamedTrajectory = (String, Trajectory);

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub optimizer: String,
    pub step: usize,
    pub loss: f64,
    pub theta: Vec<f64>,
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::config(format!("CSV: {e}"))
}

/// Renders trajectories as CSV: header
/// `optimizer,step,loss,theta_0,...,theta_{d-1}` then one row per entry.
pub fn csv_string(trajectories: &[NamedTrajectory]) -> Result<String> {
    let dim = match trajectories.iter().find_map(|(_, t)| t.dim()) {
        Some(d) => d,
        None => return Err(Error::config("nothing to export: no trajectory has entries")),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["optimizer".to_string(), "step".into(), "loss".into()];
    header.extend((0..dim).map(|i| format!("theta_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for (name, traj) in trajectories {
        for e in traj.entries() {
            if e.theta.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: e.theta.dim(),
                });
            }
            let mut row = vec![name.clone(), e.step.to_string(), fmt_real(e.loss)];
            row.extend(e.theta.iter().map(|&x| fmt_real(x)));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::config(format!("CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn export_csv<W: Write>(mut out: W, trajectories: &[NamedTrajectory]) -> Result<()> {
    let text = csv_string(trajectories)?;
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<csv output>", e))
}

pub fn write_csv(path: &Path, trajectories: &[NamedTrajectory]) -> Result<()> {
    let text = csv_string(trajectories)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses CSV produced by [`csv_string`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?;
    if header.len() < 3 || header.iter().take(3).ne(["optimizer", "step", "loss"]) {
        return Err(Error::config("CSV header must start with optimizer,step,loss"));
    }
    r.records()
        .enumerate()
        .map(|(n, rec)| {
            let rec = rec.map_err(csv_err)?;
            let bad = |what: &str| Error::config(format!("CSV line {}: {what}", n + 2));
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad("malformed number"));
            Ok(CsvRow {
                optimizer: rec[0].to_string(),
                step: rec[1].parse().map_err(|_| bad("malformed step"))?,
                loss: real(&rec[2])?,
                theta: rec.iter().skip(3).map(real).collect::<Result<_>>()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ParamVector;

    fn traj(points: &[[f64; 2]]) -> Trajectory {
        let mut t = Trajectory::new();
        for (k, p) in points.iter().enumerate() {
            t.push(k, ParamVector::new(p.to_vec()).unwrap(), p[0] * p[1]).unwrap();
        }
        t
    }

    #[test]
    fn single_entry_is_two_lines() {
        let csv = csv_string(&[("sgd".into(), traj(&[[1.0, 2.0]]))]).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap(), "optimizer,step,loss,theta_0,theta_1");
    }

    #[test]
    fn two_by_three_is_seven_lines() {
        let t = traj(&[[1.0, 2.0], [0.5, 0.1], [0.25, 0.01]]);
        let csv = csv_string(&[("a".into(), t.clone()), ("b".into(), t)]).unwrap();
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn round_trip_is_exact() {
        let pts = [[0.1, 1.0 / 3.0], [std::f64::consts::PI, -1e-300], [f64::MAX, f64::MIN_POSITIVE]];
        let t = traj(&pts);
        let rows = parse_csv(&csv_string(&[("x".into(), t.clone())]).unwrap()).unwrap();
        for (row, e) in rows.iter().zip(t.entries()) {
            assert_eq!(row.theta, e.theta.as_slice());
            assert_eq!(row.loss.to_bits(), e.loss.to_bits());
            assert_eq!(row.step, e.step);
        }
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let csv = csv_string(&[("a,b".into(), traj(&[[1.0, 2.0]]))]).unwrap();
        assert_eq!(parse_csv(&csv).unwrap()[0].optimizer, "a,b");
    }

    #[test]
    fn no_entries_is_an_error() {
        assert!(csv_string(&[]).is_err());
    }
}
