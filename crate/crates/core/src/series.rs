//! Reduced-density-matrix trajectories and their CSV form.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liouville::CMatrix;

/// Per-run bookkeeping emitted next to the trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunDiagnostics {
    /// max_l |Tr ρ̄(t_l) − 1| before any renormalization.
    pub max_trace_drift: f64,
    /// Real trace divided out at each step (empty in monitor-only mode).
    pub renormalization_factors: Vec<f64>,
    /// Largest (X − X†)/2 magnitude removed from a reduced matrix.
    pub max_hermitian_correction: f64,
    pub peak_memory_bytes: usize,
    pub history_classes: usize,
    pub step_wall_times_s: Vec<f64>,
    pub total_wall_time_s: f64,
    pub kernel_max_residual: Option<f64>,
    pub polaron_shift_mev: Vec<f64>,
}

/// ρ̄(t_l) for l = 0..=n_steps.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub trace_drift: Vec<f64>,
    pub diagnostics: RunDiagnostics,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |m| m.nrows())
    }

    pub fn element(&self, nu: usize, mu: usize) -> Vec<Complex64> {
        self.states.iter().map(|m| m[(nu, mu)]).collect()
    }

    pub fn population(&self, state: usize) -> Vec<f64> {
        self.states.iter().map(|m| m[(state, state)].re).collect()
    }

    pub fn final_state(&self) -> Option<&CMatrix> {
        self.states.last()
    }

    /// Mean population of `state` over samples with t ≥ (1 − fraction)·t_end.
    pub fn tail_mean_population(&self, state: usize, fraction: f64) -> f64 {
        let t_end = self.times.last().copied().unwrap_or(0.0);
        let start = (1.0 - fraction) * t_end;
        let tail: Vec<f64> = self
            .times
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t >= start - 1e-12)
            .map(|(_, m)| m[(state, state)].re)
            .collect();
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }

    /// Decay time τ from a least-squares fit of ln ρ_ss(t) = a − t/τ over
    /// samples with t ≥ `from_ps`. `None` if fewer than two usable samples or
    /// the population does not decrease.
    pub fn fitted_decay_time(&self, state: usize, from_ps: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.states)
            .filter(|(t, m)| **t >= from_ps && m[(state, state)].re > 0.0)
            .map(|(t, m)| (*t, m[(state, state)].re.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
        let slope = sxy / sxx;
        (slope < 0.0).then(|| -1.0 / slope)
    }

    /// Writes `t_ps, re_rho_ij, im_rho_ij…, trace_drift`. `record` lists the
    /// (i, j) elements to emit with i ≤ j; empty means all of them.
    pub fn write_csv<W: Write>(&self, out: W, record: &[(usize, usize)]) -> Result<()> {
        let n = self.dim();
        let elements: Vec<(usize, usize)> = if record.is_empty() {
            (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
        } else {
            for &(i, j) in record {
                if i > j || j >= n {
                    return Err(Error::Config(format!(
                        "recorded element ({i}, {j}) must satisfy i ≤ j < {n}"
                    )));
                }
            }
            record.to_vec()
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t_ps".to_string()];
        for &(i, j) in &elements {
            header.push(format!("re_rho_{i}{j}"));
            header.push(format!("im_rho_{i}{j}"));
        }
        header.push("trace_drift".into());
        w.write_record(&header).map_err(io_error)?;
        for (l, m) in self.states.iter().enumerate() {
            let mut row = Vec::with_capacity(header.len());
            row.push(self.times[l].to_string());
            for &(i, j) in &elements {
                row.push(m[(i, j)].re.to_string());
                row.push(m[(i, j)].im.to_string());
            }
            row.push(self.trace_drift[l].to_string());
            w.write_record(&row).map_err(io_error)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

fn io_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point_series() -> TimeSeries {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        let mut b = CMatrix::zeros(2, 2);
        b[(0, 0)] = Complex64::new(0.75, 0.0);
        b[(1, 1)] = Complex64::new(0.25, 0.0);
        b[(0, 1)] = Complex64::new(0.1, -0.2);
        b[(1, 0)] = Complex64::new(0.1, 0.2);
        TimeSeries {
            times: vec![0.0, 0.5],
            states: vec![a, b],
            trace_drift: vec![0.0, 1e-15],
            diagnostics: RunDiagnostics::default(),
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        two_point_series().write_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "t_ps,re_rho_00,im_rho_00,re_rho_01,im_rho_01,re_rho_11,im_rho_11,trace_drift"
        );
        assert_eq!(lines[2], "0.5,0.75,0,0.1,-0.2,0.25,0,0.000000000000001");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn recorded_subset() {
        let mut buf = Vec::new();
        two_point_series().write_csv(&mut buf, &[(1, 1)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_ps,re_rho_11,im_rho_11,trace_drift\n"));
        assert!(two_point_series().write_csv(Vec::new(), &[(1, 0)]).is_err());
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let times: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let states = times
            .iter()
            .map(|t| {
                let mut m = CMatrix::zeros(2, 2);
                m[(1, 1)] = Complex64::new(0.8 * (-t / 12.5).exp(), 0.0);
                m
            })
            .collect();
        let s = TimeSeries {
            trace_drift: vec![0.0; 50],
            times,
            states,
            diagnostics: RunDiagnostics::default(),
        };
        assert!((s.fitted_decay_time(1, 5.0).unwrap() - 12.5).abs() < 1e-9);
        assert!(s.fitted_decay_time(0, 0.0).is_none());
    }

    #[test]
    fn tail_mean() {
        let s = two_point_series();
        assert_eq!(s.tail_mean_population(1, 0.1), 0.25);
        assert_eq!(s.tail_mean_population(1, 1.0), 0.125);
    }
}
