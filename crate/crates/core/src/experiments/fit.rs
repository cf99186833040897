use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are left out of log-log fits.
pub const FIT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `log10 y` on `log10 n`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, y)| n > 0.0 && y > FIT_FLOOR && y.is_finite())
        .map(|&(n, y)| (n.log10(), y.log10()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientFitRows(usable.len()));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all shot counts are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r2,
    })
}

/// Gill–Massar lower bound on the mean infidelity of state tomography with
/// individual measurements, `(d+1)²(d−1)/(4N)`.
pub fn gm_bound(d: usize, n: u64) -> f64 {
    let d = d as f64;
    (d + 1.0).powi(2) * (d - 1.0) / (4.0 * n as f64)
}
