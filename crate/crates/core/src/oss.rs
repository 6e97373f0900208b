//! The "only small shocks" modulus: `|θ(x) - θ(y)| <= δ` whenever `|x - y| < L`.

use crate::error::{invalid, Result};
use crate::field::PhysicalField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OssReport {
    /// `max_{|h| < L} max_x |θ(x+h) - θ(x)|` over grid shifts.
    pub delta_measured: f64,
    pub delta_target: f64,
    pub l: f64,
    pub holds: bool,
}

/// Grid shifts `(a, b)` with `0 < |(a, b)| dx < radius`, one of each `±` pair.
fn shifts_within(theta: &PhysicalField, radius: f64, stride: usize) -> Vec<(i64, i64)> {
    let dx = theta.grid().dx();
    let reach = (radius / dx).ceil() as i64;
    let mut out = Vec::new();
    for a in (0..=reach).step_by(stride) {
        for b in (-reach..=reach).step_by(stride) {
            if a == 0 && b <= 0 {
                continue;
            }
            if ((a * a + b * b) as f64).sqrt() * dx < radius {
                out.push((a, b));
            }
        }
    }
    out
}

fn max_increment(theta: &PhysicalField, a: i64, b: i64) -> f64 {
    let g = theta.grid();
    let n = g.n() as i64;
    let v = theta.values();
    let mut m: f64 = 0.0;
    for i in 0..n {
        let si = (i + a).rem_euclid(n);
        for j in 0..n {
            let sj = (j + b).rem_euclid(n);
            m = m.max((v[(si * n + sj) as usize] - v[(i * n + j) as usize]).abs());
        }
    }
    m
}

/// Exhaustive scan over every grid shift shorter than `l`.
pub fn oss_check(theta: &PhysicalField, delta: f64, l: f64) -> Result<OssReport> {
    oss_check_strided(theta, delta, l, 1)
}

/// As [`oss_check`], visiting only shifts whose components are multiples of
/// `stride`; this can only under-estimate the modulus.
pub fn oss_check_strided(theta: &PhysicalField, delta: f64, l: f64, stride: usize) -> Result<OssReport> {
    if !(l > 0.0 && l <= theta.grid().side_length() / 2.0) {
        return Err(invalid("L", format!("{l} not in (0, L_domain/2]")));
    }
    if stride == 0 {
        return Err(invalid("stride", "must be positive"));
    }
    let delta_measured = shifts_within(theta, l, stride)
        .into_iter()
        .map(|(a, b)| max_increment(theta, a, b))
        .fold(0.0, f64::max);
    Ok(OssReport {
        delta_measured,
        delta_target: delta,
        l,
        holds: delta_measured <= delta,
    })
}

/// `δ = C ‖θ_0‖_∞^{-2β/(2-β)}`.
pub fn delta_star(theta0_sup: f64, beta: f64, c_user: f64) -> Result<f64> {
    if !(theta0_sup > 0.0) {
        return Err(invalid("theta0_sup", "must be positive"));
    }
    Ok(c_user * theta0_sup.powf(-2.0 * beta / (2.0 - beta)))
}

/// `L = δ / (4 M_0)` for a Lipschitz constant `M_0`.
pub fn oss_length(delta: f64, lipschitz: f64) -> f64 {
    delta / (4.0 * lipschitz)
}

/// `sup_x (θ(x+h) - θ(x))² e^{-c |h|^{1-β}}` for grid shifts with
/// `|h| <= L_domain/2`, reduced to the largest value per distinct `|h|`.
pub fn oss_weighted_profile(theta: &PhysicalField, beta: f64, c_psi: f64) -> Result<Vec<(f64, f64)>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", "must lie in (0, 1)"));
    }
    if !(c_psi >= 0.0) {
        return Err(invalid("c_psi", "must be >= 0"));
    }
    let dx = theta.grid().dx();
    let half = theta.grid().side_length() / 2.0;
    let mut rows: Vec<(i64, f64)> = vec![(0, 0.0)];
    for (a, b) in shifts_within(theta, half * (1.0 + 1e-12), 1) {
        let r = ((a * a + b * b) as f64).sqrt() * dx;
        let d = max_increment(theta, a, b);
        rows.push((a * a + b * b, d * d * (-c_psi * r.powf(1.0 - beta)).exp()));
    }
    rows.sort_by_key(|r| r.0);
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut last = -1;
    for (r2, v) in rows {
        if r2 == last {
            let top = out.last_mut().expect("nonempty");
            top.1 = top.1.max(v);
        } else {
            out.push(((r2 as f64).sqrt() * dx, v));
            last = r2;
        }
    }
    Ok(out)
}
