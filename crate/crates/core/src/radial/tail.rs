use serde::Serialize;

use super::RadialProfile;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailFit {
    pub amplitude: f64,
    /// Coefficient `c` of the `c / r` correction in the log fit.
    pub correction: f64,
    /// Largest `|U r^{(d-1)/2} e^r / A - 1|` on the window.
    pub residual: f64,
}

/// Least-squares fit of `log U + r + ((d-1)/2) log r ≈ log A + c / r` on `window`.
///
/// The `c / r` term absorbs the first correction of the Bessel asymptotics in
/// even dimensions; it vanishes identically for d = 1 and d = 3.
pub fn fit_tail_amplitude(prof: &RadialProfile, window: (f64, f64), tol: f64) -> Result<TailFit> {
    let (r1, r2) = window;
    if !(r1 > 0.0 && r2 > r1 && r2 <= prof.r_max) {
        return Err(Error::Domain(format!("tail window [{r1}, {r2}] outside (0, r_max]")));
    }
    let half = (prof.d as f64 - 1.0) / 2.0;
    let mut pts = Vec::new();
    for (i, &u) in prof.u.iter().enumerate() {
        let r = prof.radius(i);
        if r >= r1 && r <= r2 {
            if !(u > 0.0) {
                return Err(Error::TailFitFailed {
                    residual: f64::INFINITY,
                    tolerance: tol,
                });
            }
            pts.push((1.0 / r, u.ln() + r + half * r.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::Domain("tail window holds fewer than 3 samples".into()));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (x - mx), b + (x - mx) * (y - my)));
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let log_a = my - c * mx;
    let amplitude = log_a.exp();
    let residual = pts
        .iter()
        .map(|(_, y)| ((y - log_a).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    if !(residual <= tol) {
        return Err(Error::TailFitFailed {
            residual,
            tolerance: tol,
        });
    }
    Ok(TailFit {
        amplitude,
        correction: c,
        residual,
    })
}
