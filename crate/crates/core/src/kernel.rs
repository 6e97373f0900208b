//! Singular-integral representations of the temperature-driven velocity
//!
//! ```text
//! v(x)     = C ∫ (x-y)⊥ |x-y|^{-1-β} ∂_1θ(y) dy
//! ∇v(x)    = C (1-β)/2 J ∫ |x-y|^{-1-β} ∂_1θ(y) dy + S(∇v)
//! S(∇v)(x) = (1+β) C/2 ∫ σ(x-y) |x-y|^{-1-β} (∂_1θ(x) - ∂_1θ(y)) dy
//! ```
//!
//! evaluated by plain Riemann sums over the grid, with `J = [[0,-1],[1,0]]`.
//! Sources are the samples of one period cell, taken as zero outside it, so
//! displacements range over the whole plane rather than a wrapped cell. The
//! sum for every target point is a linear convolution and is evaluated with
//! a zero-padded FFT; [`direct_sum`] is the same sum written out.
//!
//! The constant `C` is never assumed: [`calibrate_cbeta`] fits it against the
//! Fourier-multiplier form of `v`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{fft2, PhysicalField, SpectralField};
use crate::grid::GridSpec;
use crate::lp_besov::smooth_cutoff;
use crate::spectral::{partial, v_from_theta, Vector};

pub type Matrix<T> = [[T; 2]; 2];

/// `σ(z) = |z|^{-2} [[-2 z1 z2, z1² - z2²], [z1² - z2², 2 z1 z2]]`.
pub fn sigma(z: [f64; 2]) -> Result<Matrix<f64>> {
    let r2 = z[0] * z[0] + z[1] * z[1];
    if r2 == 0.0 || !r2.is_finite() {
        return Err(invalid("z", "sigma is undefined at the origin"));
    }
    let a = -2.0 * z[0] * z[1] / r2;
    let b = (z[0] * z[0] - z[1] * z[1]) / r2;
    Ok([[a, b], [b, -a]])
}

/// Trapezoid-rule mean of `σ` over the circle of radius `r` with `m` nodes.
pub fn circle_mean_sigma(r: f64, m: usize) -> Result<Matrix<f64>> {
    if !(r > 0.0) {
        return Err(invalid("r", "radius must be positive"));
    }
    if m < 8 {
        return Err(invalid("m", "need at least 8 nodes"));
    }
    let mut acc = [[0.0; 2]; 2];
    for k in 0..m {
        let phi = 2.0 * PI * k as f64 / m as f64;
        let s = sigma([r * phi.cos(), r * phi.sin()])?;
        for a in 0..2 {
            for b in 0..2 {
                acc[a][b] += s[a][b];
            }
        }
    }
    Ok(acc.map(|row| row.map(|v| v / m as f64)))
}

/// Treatment of the cell containing the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfCell {
    /// Drop the singular node.
    Exclude,
    /// Drop the singular node, then add the difference between the continuum
    /// and lattice moments of the kernel (up to second order, computed in
    /// polar coordinates) times the Taylor coefficients of the integrand.
    PolarCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub beta: f64,
    pub self_cell: SelfCell,
    /// Largest displacement kept; `None` keeps every displacement between
    /// points of the cell.
    pub truncation_radius: Option<f64>,
}

impl KernelConfig {
    pub fn new(beta: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            self_cell: SelfCell::Exclude,
            truncation_radius: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_self_cell(mut self, rule: SelfCell) -> Self {
        self.self_cell = rule;
        self
    }

    pub fn with_truncation(mut self, radius: f64) -> Result<Self> {
        self.truncation_radius = Some(radius);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", format!("{} not in (0, 1)", self.beta)));
        }
        if let Some(r) = self.truncation_radius {
            if !(r > 0.0) {
                return Err(invalid("truncation_radius", "must be positive"));
            }
        }
        Ok(())
    }
}

/// A quadrature result with the measured leak of `θ` outside the ball of
/// radius `L/2` about the cell center, relative to `max |θ|`.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    pub value: T,
    pub support_leak: f64,
}

/// Largest relative leak accepted by [`Quadrature::support_ok`].
pub const SUPPORT_TOLERANCE: f64 = 1e-8;

impl<T> Quadrature<T> {
    pub fn support_ok(&self) -> bool {
        self.support_leak <= SUPPORT_TOLERANCE
    }
}

pub fn support_leak(theta: &PhysicalField) -> f64 {
    let g = theta.grid();
    let n = g.n();
    let c = g.side_length() / 2.0;
    let scale = theta.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut leak: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = g.point(i, j);
            if (x - c).hypot(y - c) > c {
                leak = leak.max(theta.at(i, j).abs());
            }
        }
    }
    leak / scale
}

/// Linear convolutions of one source field with several kernels.
struct Convolver {
    grid: GridSpec,
    padded_hat: Vec<Complex64>,
}

impl Convolver {
    fn new(f: &PhysicalField) -> Self {
        let grid = *f.grid();
        let n = grid.n();
        let big = 2 * n;
        let mut padded = vec![Complex64::new(0.0, 0.0); big * big];
        for i in 0..n {
            for j in 0..n {
                padded[i * big + j] = Complex64::new(f.at(i, j), 0.0);
            }
        }
        fft2(&mut padded, big, false);
        Self {
            grid,
            padded_hat: padded,
        }
    }

    /// `Σ_{y ≠ x} K(x - y) f(y) dx²` at every grid point.
    fn apply(&self, kernel: impl Fn(f64, f64) -> f64) -> PhysicalField {
        let n = self.grid.n();
        let big = 2 * n;
        let h = self.grid.dx();
        let signed = |m: usize| if m < n { m as f64 } else { m as f64 - big as f64 };
        let mut k = vec![Complex64::new(0.0, 0.0); big * big];
        for a in 0..big {
            for b in 0..big {
                if a == 0 && b == 0 {
                    continue;
                }
                k[a * big + b] = Complex64::new(kernel(signed(a) * h, signed(b) * h), 0.0);
            }
        }
        fft2(&mut k, big, false);
        for (x, y) in k.iter_mut().zip(&self.padded_hat) {
            *x *= y;
        }
        fft2(&mut k, big, true);
        let s = h * h / (big * big) as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(k[i * big + j].re * s);
            }
        }
        PhysicalField::new(self.grid, values).expect("finite convolution")
    }
}

/// The Riemann sum of [`Convolver::apply`] at one target, written out.
pub fn direct_sum(f: &PhysicalField, kernel: impl Fn(f64, f64) -> f64, i: usize, j: usize) -> f64 {
    let g = f.grid();
    let n = g.n();
    let h = g.dx();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a == i && b == j {
                continue;
            }
            let z1 = (i as f64 - a as f64) * h;
            let z2 = (j as f64 - b as f64) * h;
            acc += kernel(z1, z2) * f.at(a, b);
        }
    }
    acc * h * h
}

fn radial_weight(p: f64, trunc: Option<f64>) -> impl Fn(f64, f64) -> f64 {
    move |z1, z2| {
        let r = z1.hypot(z2);
        if trunc.is_some_and(|t| r > t) {
            0.0
        } else {
            r.powf(-p)
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Moments `∫ K(z) z^a χ(|z|) dz - Σ'_z K(z) z^a χ(|z|) h²` for the monomials
/// `1, z1, z2, z1², z1 z2, z2²`, where `K(z) = |z|^{-p} A(φ)` and `χ` is a smooth
/// cutoff at radius `r0`.
fn moment_defects(h: f64, p: f64, angular: impl Fn(f64) -> f64, r0: f64) -> [f64; 6] {
    let powers: [(i32, i32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    let gl = gauss_legendre(48);
    let radial = |e: f64| {
        // ∫_0^∞ r^e χ(r/r0) dr, split where χ starts to fall.
        let mut tail = 0.0;
        for &(t, w) in &gl {
            let r = r0 * (1.5 + 0.5 * t);
            tail += 0.5 * r0 * w * r.powf(e) * smooth_cutoff(r / r0);
        }
        r0.powf(e + 1.0) / (e + 1.0) + tail
    };
    let m_ang = 256;
    let mut out = [0.0; 6];
    for (slot, &(a, b)) in powers.iter().enumerate() {
        let d = (a + b) as f64;
        let mut ang = 0.0;
        for k in 0..m_ang {
            let phi = 2.0 * PI * k as f64 / m_ang as f64;
            ang += angular(phi) * phi.cos().powi(a) * phi.sin().powi(b);
        }
        ang *= 2.0 * PI / m_ang as f64;
        let continuum = radial(d - p + 1.0) * ang;
        let reach = (2.0 * r0 / h).ceil() as i64;
        let mut lattice = 0.0;
        for u in -reach..=reach {
            for v in -reach..=reach {
                if u == 0 && v == 0 {
                    continue;
                }
                let (z1, z2) = (u as f64 * h, v as f64 * h);
                let r = z1.hypot(z2);
                let c = smooth_cutoff(r / r0);
                if c == 0.0 {
                    continue;
                }
                lattice += r.powf(-p) * angular(z2.atan2(z1)) * z1.powi(a) * z2.powi(b) * c;
            }
        }
        out[slot] = continuum - lattice * h * h;
    }
    out
}

/// Taylor data of `f = ∂_1θ`: value, gradient and Hessian entries.
struct Taylor {
    f: PhysicalField,
    d: [PhysicalField; 2],
    dd: [PhysicalField; 3],
}

impl Taylor {
    fn new(theta_hat: &SpectralField) -> Result<Self> {
        let f = partial(theta_hat, 0);
        let f1 = partial(&f, 0);
        let f2 = partial(&f, 1);
        Ok(Self {
            d: [f1.to_physical()?, f2.to_physical()?],
            dd: [
                partial(&f1, 0).to_physical()?,
                partial(&f1, 1).to_physical()?,
                partial(&f2, 1).to_physical()?,
            ],
            f: f.to_physical()?,
        })
    }

    /// `Σ_a defect_a · (Taylor coefficient of f(x - z) at z^a)`.
    fn correction(&self, m: &[f64; 6]) -> PhysicalField {
        let n = self.f.grid().len();
        let mut out = PhysicalField::zeros(*self.f.grid());
        let v = out.values_mut();
        for idx in 0..n {
            v[idx] = m[0] * self.f.values()[idx] - m[1] * self.d[0].values()[idx] - m[2] * self.d[1].values()[idx]
                + 0.5 * m[3] * self.dd[0].values()[idx]
                + m[4] * self.dd[1].values()[idx]
                + 0.5 * m[5] * self.dd[2].values()[idx];
        }
        out
    }
}

struct Evaluator {
    cfg: KernelConfig,
    conv: Convolver,
    taylor: Option<Taylor>,
    leak: f64,
}

impl Evaluator {
    fn new(theta: &PhysicalField, cfg: &KernelConfig) -> Result<Self> {
        cfg.validate()?;
        let theta_hat = theta.to_spectral()?;
        let taylor = Taylor::new(&theta_hat)?;
        Ok(Self {
            cfg: *cfg,
            conv: Convolver::new(&taylor.f),
            taylor: (cfg.self_cell == SelfCell::PolarCorrected).then_some(taylor),
            leak: support_leak(theta),
        })
    }

    /// Sum of `K f` for `K(z) = |z|^{-p} A(φ)`, self cell per the rule.
    fn integral(&self, p: f64, angular: impl Fn(f64) -> f64 + Copy) -> PhysicalField {
        let w = radial_weight(p, self.cfg.truncation_radius);
        let raw = self.conv.apply(|z1, z2| w(z1, z2) * angular(z2.atan2(z1)));
        match &self.taylor {
            None => raw,
            Some(t) => {
                let g = self.conv.grid;
                let mut r0 = g.side_length() / 16.0;
                if let Some(tr) = self.cfg.truncation_radius {
                    r0 = r0.min(tr / 2.0);
                }
                let m = moment_defects(g.dx(), p, angular, r0);
                &raw + &t.correction(&m)
            }
        }
    }
}

/// `v = C ∫ (x-y)⊥ |x-y|^{-1-β} ∂_1θ(y) dy`.
pub fn v_quadrature(
    theta: &PhysicalField,
    cfg: &KernelConfig,
    c_beta: f64,
) -> Result<Quadrature<Vector<PhysicalField>>> {
    let ev = Evaluator::new(theta, cfg)?;
    // (x-y)⊥ |x-y|^{-1-β} = |z|^{-β} (-sin φ, cos φ).
    let v1 = ev.integral(cfg.beta, |phi| -phi.sin()).scale(c_beta);
    let v2 = ev.integral(cfg.beta, |phi| phi.cos()).scale(c_beta);
    Ok(Quadrature {
        value: [v1, v2],
        support_leak: ev.leak,
    })
}

fn sigma_parts(ev: &Evaluator, scale: f64) -> (PhysicalField, PhysicalField) {
    // σ11 = -sin 2φ, σ12 = cos 2φ.
    let p = 1.0 + ev.cfg.beta;
    let s11 = ev.integral(p, |phi| -(2.0 * phi).sin()).scale(scale);
    let s12 = ev.integral(p, |phi| (2.0 * phi).cos()).scale(scale);
    (s11, s12)
}

/// Symmetric part of `∇v`; the inserted `∂_1θ(x)` multiplies a kernel whose
/// sum over every symmetric lattice disk vanishes, so only the `∂_1θ(y)` term
/// is summed.
pub fn symgrad_v_quadrature(
    theta: &PhysicalField,
    cfg: &KernelConfig,
    c_beta: f64,
) -> Result<Quadrature<Matrix<PhysicalField>>> {
    let ev = Evaluator::new(theta, cfg)?;
    let (s11, s12) = sigma_parts(&ev, -(1.0 + cfg.beta) * c_beta / 2.0);
    let s22 = s11.scale(-1.0);
    Ok(Quadrature {
        value: [[s11, s12.clone()], [s12, s22]],
        support_leak: ev.leak,
    })
}

/// Full `∇v`, entry `[i][j] = ∂_j v_i`.
pub fn grad_v_quadrature(
    theta: &PhysicalField,
    cfg: &KernelConfig,
    c_beta: f64,
) -> Result<Quadrature<Matrix<PhysicalField>>> {
    let ev = Evaluator::new(theta, cfg)?;
    let (s11, s12) = sigma_parts(&ev, -(1.0 + cfg.beta) * c_beta / 2.0);
    let anti = ev
        .integral(1.0 + cfg.beta, |_| 1.0)
        .scale((1.0 - cfg.beta) * c_beta / 2.0);
    let s22 = s11.scale(-1.0);
    Ok(Quadrature {
        value: [[s11, &s12 - &anti], [&s12 + &anti, s22]],
        support_leak: ev.leak,
    })
}

/// The symmetric-gradient integral `-∫ σ(z)|z|^{-1-β} ∂_1θ(x-z) dz` (unit
/// prefactor) split over `|z| <= ρ`, `ρ < |z| <= L_split` and `|z| > L_split`.
/// Each part is a symmetric trace-free matrix stored as its `(11, 12)` entries.
pub struct SplitSymgrad {
    pub near: [PhysicalField; 2],
    pub mid: [PhysicalField; 2],
    pub far: [PhysicalField; 2],
}

pub fn split_symgrad_bound(theta: &PhysicalField, rho: f64, l_split: f64, beta: f64) -> Result<SplitSymgrad> {
    let cfg = KernelConfig::new(beta)?;
    if !(rho > 0.0 && rho < l_split && l_split <= theta.grid().side_length() / 2.0) {
        return Err(invalid(
            "rho",
            format!("need 0 < rho < L_split <= L/2, got rho = {rho}, L_split = {l_split}"),
        ));
    }
    let ev = Evaluator::new(theta, &cfg)?;
    let region = |lo: f64, hi: f64| {
        let w = radial_weight(1.0 + beta, None);
        let part = |ang: fn(f64) -> f64| {
            ev.conv.apply(|z1, z2| {
                let r = z1.hypot(z2);
                if r > lo && r <= hi {
                    -w(z1, z2) * ang(z2.atan2(z1))
                } else {
                    0.0
                }
            })
        };
        [part(|p| -(2.0 * p).sin()), part(|p| (2.0 * p).cos())]
    };
    Ok(SplitSymgrad {
        near: region(0.0, rho),
        mid: region(rho, l_split),
        far: region(l_split, f64::INFINITY),
    })
}

/// Bound on the middle part for `θ` with oscillation at most `delta` over
/// distances up to `l_split`: integrating by parts in `y_1` moves the
/// derivative onto the kernel, whose gradient is at most `(3+β)|z|^{-2-β}`,
/// and leaves boundary terms on both circles.
pub fn mid_region_bound(delta: f64, rho: f64, l_split: f64, beta: f64) -> f64 {
    let (a, b) = (rho.powf(-beta), l_split.powf(-beta));
    2.0 * PI * delta * ((3.0 + beta) * (a - b) / beta + a + b)
}

/// Relative L² mismatch `‖a - b‖ / ‖b‖` summed over components.
pub fn relative_l2(a: &[&PhysicalField], b: &[&PhysicalField]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.values().iter().zip(y.values()) {
            num += (p - q) * (p - q);
            den += q * q;
        }
    }
    (num / den).sqrt()
}

/// Width of the standard test profile relative to the side length.
pub const PROFILE_WIDTH: f64 = 0.057;
/// The standard profile is `(|k| s)^{2 PROFILE_ORDER}` times a Gaussian.
pub const PROFILE_ORDER: i32 = 3;

/// Centered test profile with Fourier coefficients `(|k| s)^6 ĝ(k)`, where
/// `ĝ` are the exact coefficients of a Gaussian of width `s = 0.057 L`. All
/// moments through order five vanish, so the velocity it induces decays
/// fast enough for periodic images to stay below the quadrature error.
pub fn standard_profile(grid: GridSpec) -> Result<PhysicalField> {
    profile(grid, PROFILE_WIDTH * grid.side_length(), PROFILE_ORDER)
}

pub fn profile(grid: GridSpec, width: f64, order: i32) -> Result<PhysicalField> {
    let n = grid.n();
    let l = grid.side_length();
    let c = l / 2.0;
    let mut hat = SpectralField::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            if grid.is_nyquist(grid.mode(i)) || grid.is_nyquist(grid.mode(j)) {
                continue;
            }
            let (k1, k2) = grid.wavevector(i, j);
            let k2sum = k1 * k1 + k2 * k2;
            let amp = 2.0 * PI * width * width / (l * l)
                * (-k2sum * width * width / 2.0).exp()
                * (k2sum * width * width).powi(order);
            hat.coeffs_mut()[i * n + j] = Complex64::from_polar(amp, -(k1 + k2) * c);
        }
    }
    hat.to_physical()
}

/// Fitted constant and the relative L² residual of the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub c_beta: f64,
    pub residual: f64,
}

/// Largest relative residual accepted by [`calibrate_cbeta`].
pub const CALIBRATION_THRESHOLD: f64 = 1e-3;

/// Least-squares `C` matching the quadrature `v` (with `C = 1`) to the
/// multiplier form of `v`, for a given field.
pub fn calibrate_on(theta: &PhysicalField, cfg: &KernelConfig) -> Result<Calibration> {
    let q = v_quadrature(theta, cfg, 1.0)?.value;
    let v = v_from_theta(&theta.to_spectral()?, cfg.beta);
    let v = [v[0].to_physical()?, v[1].to_physical()?];
    let mut qv = 0.0;
    let mut qq = 0.0;
    for d in 0..2 {
        for (a, b) in q[d].values().iter().zip(v[d].values()) {
            qv += a * b;
            qq += a * a;
        }
    }
    if qq == 0.0 {
        return Err(invalid("theta", "calibration needs a nonzero field"));
    }
    let c_beta = qv / qq;
    let fitted = [q[0].scale(c_beta), q[1].scale(c_beta)];
    let residual = relative_l2(&[&fitted[0], &fitted[1]], &[&v[0], &v[1]]);
    Ok(Calibration { c_beta, residual })
}

/// Calibrates `C(β)` on the standard profile at resolution `n`.
pub fn calibrate_cbeta(beta: f64, n: usize) -> Result<Calibration> {
    let grid = GridSpec::periodic(n)?;
    let cal = calibrate_on(&standard_profile(grid)?, &KernelConfig::new(beta)?)?;
    if cal.residual > CALIBRATION_THRESHOLD {
        return Err(Error::CalibrationFailed {
            residual: cal.residual,
            threshold: CALIBRATION_THRESHOLD,
        });
    }
    Ok(cal)
}

/// Spectral `S(∇v)` as `(11, 12)` entries.
pub fn spectral_symgrad(theta_hat: &SpectralField, beta: f64) -> Result<[PhysicalField; 2]> {
    let v = v_from_theta(theta_hat, beta);
    let s11 = partial(&v[0], 0).to_physical()?;
    let s12 = (&partial(&v[0], 1) + &partial(&v[1], 0)).scale(0.5).to_physical()?;
    Ok([s11, s12])
}

/// One row of the kernel verification report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelReport {
    pub beta: f64,
    pub n: usize,
    pub c_beta: f64,
    /// Relative L² error of the calibrated quadrature `v`.
    pub v_error: f64,
    /// Relative L² error of the quadrature `S(∇v)` with the same constant.
    pub s_error: f64,
    pub support_leak: f64,
}

/// Calibrates on the standard profile and measures both representations.
pub fn kernel_oracle_report(beta: f64, n: usize) -> Result<KernelReport> {
    let grid = GridSpec::periodic(n)?;
    let theta = standard_profile(grid)?;
    let cfg = KernelConfig::new(beta)?;
    let cal = calibrate_on(&theta, &cfg)?;
    let s = symgrad_v_quadrature(&theta, &cfg, cal.c_beta)?;
    let want = spectral_symgrad(&theta.to_spectral()?, beta)?;
    let got = &s.value;
    let s_error = relative_l2(&[&got[0][0], &got[0][1], &got[1][0]], &[&want[0], &want[1], &want[1]]);
    Ok(KernelReport {
        beta,
        n,
        c_beta: cal.c_beta,
        v_error: cal.residual,
        s_error,
        support_leak: s.support_leak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn analytic_c(beta: f64) -> f64 {
        gamma((1.0 + beta) / 2.0) / (2f64.powf(2.0 - beta) * PI * gamma((3.0 - beta) / 2.0))
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma([1.0, 0.0]).unwrap(), [[0.0, 1.0], [1.0, 0.0]]);
        let s = sigma([1.0, 1.0]).unwrap();
        assert!((s[0][0] + 1.0).abs() < 1e-15 && s[0][1].abs() < 1e-15 && (s[1][1] - 1.0).abs() < 1e-15);
        assert!(sigma([0.0, 0.0]).is_err());
    }

    #[test]
    fn circle_means_vanish() {
        for r in [1.0, 0.01] {
            let m = circle_mean_sigma(r, 64).unwrap();
            assert!(m.iter().flatten().all(|v| v.abs() <= 1e-12));
        }
        let m = circle_mean_sigma(1.0, 8).unwrap();
        assert!(m.iter().flatten().all(|v| v.abs() <= 1e-15));
        assert!(circle_mean_sigma(1.0, 4).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(12);
        let s: f64 = gl.iter().map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn fft_sum_matches_direct_sum() {
        let g = GridSpec::periodic(32).unwrap();
        let f = standard_profile(g).unwrap();
        let w = radial_weight(1.4, None);
        let k = |z1: f64, z2: f64| w(z1, z2) * z1;
        let conv = Convolver::new(&f).apply(k);
        for (i, j) in [(0, 0), (16, 16), (3, 29), (31, 7)] {
            let d = direct_sum(&f, k, i, j);
            assert!(
                (conv.at(i, j) - d).abs() < 1e-13 * conv.max_abs().max(1e-300),
                "{i} {j}"
            );
        }
    }

    #[test]
    fn zero_field_gives_zero() {
        let g = GridSpec::periodic(16).unwrap();
        let cfg = KernelConfig::new(0.5).unwrap();
        let v = v_quadrature(&PhysicalField::zeros(g), &cfg, 1.0).unwrap();
        assert_eq!(v.value[0].max_abs() + v.value[1].max_abs(), 0.0);
        let s = symgrad_v_quadrature(&PhysicalField::zeros(g), &cfg, 1.0).unwrap();
        assert_eq!(s.value[0][0].max_abs(), 0.0);
    }

    // For radial θ only the first component vanishes at the center:
    // v_2(c) = -∂_1²Λ^{β-3}θ(c) is nonzero.
    #[test]
    fn radial_profile_center() {
        let g = GridSpec::periodic(64).unwrap();
        let c = g.side_length() / 2.0;
        let th = PhysicalField::from_fn(g, |x, y| (-((x - c).powi(2) + (y - c).powi(2)) / 0.3).exp());
        let v = v_quadrature(&th, &KernelConfig::new(0.5).unwrap(), 1.0).unwrap();
        let scale = v.value[0].max_abs().max(v.value[1].max_abs());
        assert!(v.value[0].at(32, 32).abs() < 1e-12 * scale);
    }

    #[test]
    fn symgrad_is_symmetric_and_trace_free() {
        let g = GridSpec::periodic(32).unwrap();
        let th = standard_profile(g).unwrap();
        for rule in [SelfCell::Exclude, SelfCell::PolarCorrected] {
            let cfg = KernelConfig::new(0.3).unwrap().with_self_cell(rule);
            let s = symgrad_v_quadrature(&th, &cfg, 1.0).unwrap().value;
            assert_eq!(s[0][1], s[1][0]);
            let trace = &s[0][0] + &s[1][1];
            assert!(trace.max_abs() <= 1e-10 * s[0][0].max_abs());
        }
    }

    #[test]
    fn calibration_matches_closed_form_constant() {
        for beta in [0.2, 0.7] {
            let cal = calibrate_cbeta(beta, 256).unwrap();
            assert!(cal.c_beta > 0.0);
            assert!(
                (cal.c_beta - analytic_c(beta)).abs() < 2e-3 * analytic_c(beta),
                "{cal:?}"
            );
        }
    }

    #[test]
    fn calibration_is_linear_and_deterministic() {
        let g = GridSpec::periodic(64).unwrap();
        let th = standard_profile(g).unwrap();
        let cfg = KernelConfig::new(0.5).unwrap();
        let a = calibrate_on(&th, &cfg).unwrap();
        let b = calibrate_on(&th, &cfg).unwrap();
        assert_eq!(a, b);
        let c = calibrate_on(&th.scale(2.0), &cfg).unwrap();
        assert!((a.c_beta - c.c_beta).abs() < 1e-14 * a.c_beta);
    }

    #[test]
    fn polar_correction_beats_exclusion() {
        let g = GridSpec::periodic(128).unwrap();
        let th = standard_profile(g).unwrap();
        let beta = 0.6;
        let c = analytic_c(beta);
        let v = v_from_theta(&th.to_spectral().unwrap(), beta);
        let v = [v[0].to_physical().unwrap(), v[1].to_physical().unwrap()];
        let err = |rule| {
            let cfg = KernelConfig::new(beta).unwrap().with_self_cell(rule);
            let q = v_quadrature(&th, &cfg, c).unwrap().value;
            relative_l2(&[&q[0], &q[1]], &[&v[0], &v[1]])
        };
        let ex = err(SelfCell::Exclude);
        let pc = err(SelfCell::PolarCorrected);
        assert!(pc < 0.1 * ex, "exclude {ex:e} corrected {pc:e}");
    }

    #[test]
    fn corrected_grad_v_matches_spectral() {
        let g = GridSpec::periodic(128).unwrap();
        let th = standard_profile(g).unwrap();
        let beta = 0.5;
        let cfg = KernelConfig::new(beta)
            .unwrap()
            .with_self_cell(SelfCell::PolarCorrected);
        let q = grad_v_quadrature(&th, &cfg, analytic_c(beta)).unwrap().value;
        let v = v_from_theta(&th.to_spectral().unwrap(), beta);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let want = partial(&v[i], j).to_physical().unwrap();
                worst = worst.max(relative_l2(&[&q[i][j]], &[&want]));
            }
        }
        assert!(worst < 1e-3, "{worst:e}");
    }

    #[test]
    fn split_partitions_exactly() {
        let g = GridSpec::periodic(64).unwrap();
        let th = standard_profile(g).unwrap();
        let beta = 0.4;
        let parts = split_symgrad_bound(&th, 3.0 * g.dx(), 1.0, beta).unwrap();
        let whole = symgrad_v_quadrature(&th, &KernelConfig::new(beta).unwrap(), 2.0 / (1.0 + beta))
            .unwrap()
            .value;
        let total = [
            &(&parts.near[0] + &parts.mid[0]) + &parts.far[0],
            &(&parts.near[1] + &parts.mid[1]) + &parts.far[1],
        ];
        let scale = whole[0][0].max_abs().max(whole[0][1].max_abs());
        assert!((&total[0] - &whole[0][0]).max_abs() <= 1e-12 * scale);
        assert!((&total[1] - &whole[0][1]).max_abs() <= 1e-12 * scale);
        assert!(split_symgrad_bound(&th, 1.0, 0.5, beta).is_err());
        assert!(split_symgrad_bound(&th, 0.1, 4.0, beta).is_err());
    }

    #[test]
    fn near_part_shrinks_with_rho() {
        let g = GridSpec::periodic(128).unwrap();
        let th = standard_profile(g).unwrap();
        let beta = 0.5;
        let near = |cells: f64| {
            let p = split_symgrad_bound(&th, cells * g.dx(), 1.0, beta).unwrap();
            p.near[0].max_abs().max(p.near[1].max_abs())
        };
        let (a, b) = (near(4.0), near(2.0));
        assert!(b < 0.6 * a, "{a:e} {b:e}");
    }

    #[test]
    fn mid_bound_scaling() {
        let beta = 0.3;
        let r = mid_region_bound(1.0, 1e-12, 1.0, beta) / mid_region_bound(1.0, 2e-12, 1.0, beta);
        assert!((r - 2f64.powf(beta)).abs() < 1e-2);
    }

    #[test]
    fn config_validation() {
        assert!(KernelConfig::new(1.0).is_err());
        assert!(KernelConfig::new(0.0).is_err());
        assert!(KernelConfig::new(0.5).unwrap().with_truncation(-1.0).is_err());
    }
}
