//! Littlewood–Paley blocks, Besov norms and commutator estimates.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{fft2, PhysicalField, SpectralField};
use crate::spectral::{
    dealias, fractional_laplacian, grad, lp_norm, partial, riesz_alpha, upsample, v_from_theta, Vector,
};

/// One dyadic frequency block of a field.
#[derive(Debug, Clone)]
pub struct LPBand {
    pub j: i32,
    pub band: SpectralField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Self {
        Self {
            s,
            p,
            r,
            homogeneous: false,
        }
    }

    pub fn homogeneous(s: f64, p: f64, r: f64) -> Self {
        Self {
            s,
            p,
            r,
            homogeneous: true,
        }
    }
}

/// Shape of the block multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockShape {
    /// Indicator of `2^j <= |k| < 2^{j+1}`; an exact partition.
    Sharp,
    /// `φ(|k| / 2^j)` with `φ(r) = χ(r) - χ(2r)` and a C^∞ cutoff `χ`.
    Smooth,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ radial cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn smooth_cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = bump(2.0 - r);
        a / (a + bump(r - 1.0))
    }
}

fn block_weight(kmag: f64, j: i32, shape: BlockShape, homogeneous: bool) -> f64 {
    let low = j == -1 && !homogeneous;
    match shape {
        BlockShape::Sharp => {
            let hit = if low {
                kmag < 1.0
            } else {
                kmag > 0.0 && kmag >= 2f64.powi(j) && kmag < 2f64.powi(j + 1)
            };
            if hit {
                1.0
            } else {
                0.0
            }
        }
        BlockShape::Smooth => {
            if low {
                smooth_cutoff(2.0 * kmag)
            } else if kmag == 0.0 {
                0.0
            } else {
                let r = kmag / 2f64.powi(j);
                smooth_cutoff(r) - smooth_cutoff(2.0 * r)
            }
        }
    }
}

fn band_range(f: &SpectralField, shape: BlockShape, homogeneous: bool) -> (i32, i32) {
    let g = f.grid();
    let n = g.n();
    let mut kmax: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            kmax = kmax.max(g.kmag(i, j));
        }
    }
    let top = match shape {
        BlockShape::Sharp => kmax.log2().floor() as i32,
        BlockShape::Smooth => kmax.log2().ceil() as i32,
    };
    let bottom = if homogeneous {
        let base = g.k0().log2().floor() as i32;
        match shape {
            BlockShape::Sharp => base,
            BlockShape::Smooth => base - 1,
        }
    } else {
        -1
    };
    (bottom, top.max(bottom))
}

/// Blocks of the inhomogeneous decomposition, `j = -1, 0, 1, ...`.
pub fn dyadic_blocks(f: &SpectralField, smooth: bool) -> Vec<LPBand> {
    let shape = if smooth { BlockShape::Smooth } else { BlockShape::Sharp };
    blocks(f, shape, false)
}

/// Blocks of either decomposition. The homogeneous variant drops the mean and
/// continues the annuli below `|k| = 1` when the grid has such modes.
pub fn blocks(f: &SpectralField, shape: BlockShape, homogeneous: bool) -> Vec<LPBand> {
    let g = *f.grid();
    let (lo, hi) = band_range(f, shape, homogeneous);
    (lo..=hi)
        .map(|j| LPBand {
            j,
            band: f.map_indexed(|a, b| Complex64::new(block_weight(g.kmag(a, b), j, shape, homogeneous), 0.0)),
        })
        .collect()
}

fn lr_combine(terms: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

fn check_besov_index(idx: &BesovIndex) -> Result<()> {
    if !(idx.p >= 1.0) {
        return Err(invalid("p", format!("{} < 1", idx.p)));
    }
    if !(idx.r >= 1.0) {
        return Err(invalid("r", format!("{} < 1", idx.r)));
    }
    if !idx.s.is_finite() {
        return Err(invalid("s", "must be finite"));
    }
    Ok(())
}

/// Per-band terms `(j, 2^{js} ‖Δ_j f‖_{L^p})`.
pub fn besov_band_table(f: &SpectralField, idx: &BesovIndex, shape: BlockShape) -> Result<Vec<(i32, f64)>> {
    check_besov_index(idx)?;
    blocks(f, shape, idx.homogeneous)
        .into_iter()
        .map(|b| {
            let norm = lp_norm(&b.band.to_physical()?, idx.p)?;
            Ok((b.j, 2f64.powf(b.j as f64 * idx.s) * norm))
        })
        .collect()
}

/// `‖ 2^{js} ‖Δ_j f‖_{L^p} ‖_{l^r}` with sharp blocks.
pub fn besov_norm(f: &SpectralField, idx: &BesovIndex) -> Result<f64> {
    besov_norm_with(f, idx, BlockShape::Sharp)
}

pub fn besov_norm_with(f: &SpectralField, idx: &BesovIndex, shape: BlockShape) -> Result<f64> {
    let table = besov_band_table(f, idx, shape)?;
    Ok(lr_combine(table.into_iter().map(|(_, t)| t), idx.r))
}

/// `‖f(· + t) - f‖_{L^p}` for every grid shift `t = (a, b) dx`, indexed
/// like a field with the shift's signed components as modes.
pub fn difference_norms(f: &PhysicalField, p: f64) -> Result<Vec<f64>> {
    let g = *f.grid();
    let n = g.n();
    if p == 2.0 {
        // ‖δ_t f‖² = 2 (A(0) - A(t)), A the autocorrelation, from |c|² by FFT.
        let c = f.to_spectral()?;
        let l2 = g.side_length() * g.side_length();
        let mut a: Vec<Complex64> = c
            .coeffs()
            .iter()
            .map(|z| Complex64::new(l2 * z.norm_sqr(), 0.0))
            .collect();
        fft2(&mut a, n, true);
        let a0 = a[0].re;
        return Ok(a.iter().map(|z| (2.0 * (a0 - z.re)).max(0.0).sqrt()).collect());
    }
    let mut out = vec![0.0; n * n];
    for s1 in 0..n {
        for s2 in 0..n {
            out[s1 * n + s2] = lp_norm(&(&f.shifted(s1 as i64, s2 as i64) - f), p)?;
        }
    }
    Ok(out)
}

/// Finite-difference seminorm `( Σ_t ‖δ_t f‖_p^r |t|^{-2-sr} dx² )^{1/r}` over
/// grid shifts with `0 < |t| <= L/2`; `r = ∞` takes `sup_t ‖δ_t f‖_p / |t|^s`.
pub fn besov_seminorm_fd(f: &PhysicalField, s: f64, p: f64, r: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} not in (0, 1)")));
    }
    check_besov_index(&BesovIndex::new(s, p, r))?;
    let g = *f.grid();
    let n = g.n();
    let dx = g.dx();
    let diffs = difference_norms(f, p)?;
    let half = g.side_length() / 2.0;
    let mut acc: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let t = (g.mode(a) as f64 * dx).hypot(g.mode(b) as f64 * dx);
            if t == 0.0 || t > half * (1.0 + 1e-12) {
                continue;
            }
            let d = diffs[a * n + b];
            if r.is_infinite() {
                acc = acc.max(d / t.powf(s));
            } else {
                acc += d.powf(r) * t.powf(-2.0 - s * r) * dx * dx;
            }
        }
    }
    Ok(if r.is_infinite() { acc } else { acc.powf(1.0 / r) })
}

/// `‖f‖_{L^p}` plus [`besov_seminorm_fd`].
pub fn besov_norm_fd(f: &PhysicalField, s: f64, p: f64, r: f64) -> Result<f64> {
    let semi = besov_seminorm_fd(f, s, p, r)?;
    Ok(lp_norm(f, p)? + semi)
}

/// Sharp band index of a nonzero wavenumber magnitude (`-1` below 1).
pub fn band_of(kmag: f64) -> i32 {
    if kmag < 1.0 {
        -1
    } else {
        kmag.log2().floor() as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BernsteinOutcome {
    Ratios {
        lower: f64,
        upper: f64,
    },
    /// The input vanishes, so no ratio is defined.
    Degenerate,
}

/// Bernstein ratios for `f` supported in sharp band `j >= 0`:
/// `lower = ‖Λ^{2a}f‖_q / (2^{2aj} ‖f‖_q)` and
/// `upper = ‖Λ^{2a}f‖_q / (2^{2aj + 2j(1/p - 1/q)} ‖f‖_p)`.
pub fn bernstein_check(f: &SpectralField, j: i32, a: f64, p: f64, q: f64) -> Result<BernsteinOutcome> {
    if !(a >= 0.0) {
        return Err(invalid("alpha", "must be >= 0"));
    }
    if !(p >= 1.0 && q >= p) {
        return Err(invalid("p", format!("need 1 <= p <= q, got p = {p}, q = {q}")));
    }
    let g = *f.grid();
    let n = g.n();
    let scale = f.max_abs_coeff();
    if scale == 0.0 {
        return Ok(BernsteinOutcome::Degenerate);
    }
    for i in 0..n {
        for k in 0..n {
            let c = f.coeffs()[i * n + k];
            let km = g.kmag(i, k);
            if c.norm() > 1e-12 * scale && (km == 0.0 || band_of(km) != j) {
                return Err(Error::NotBandLimited { j });
            }
        }
    }
    let lam = fractional_laplacian(f, 2.0 * a).to_physical()?;
    let phys = f.to_physical()?;
    let lq = lp_norm(&lam, q)?;
    let fq = lp_norm(&phys, q)?;
    let fp = lp_norm(&phys, p)?;
    let jf = j as f64;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    Ok(BernsteinOutcome::Ratios {
        lower: lq / (2f64.powf(2.0 * a * jf) * fq),
        upper: lq / (2f64.powf(2.0 * a * jf + 2.0 * jf * (inv(p) - inv(q))) * fp),
    })
}

/// Dealiased `u·∇f`.
pub fn advect(u: &Vector<SpectralField>, f: &SpectralField) -> Result<SpectralField> {
    let [fx, fy] = grad(f);
    let p = &(&u[0].to_physical()? * &fx.to_physical()?) + &(&u[1].to_physical()? * &fy.to_physical()?);
    Ok(dealias(&p.to_spectral()?))
}

/// `[R_α, u·∇]θ = R_α(u·∇θ) - u·∇R_αθ` in coefficients, products dealiased.
pub fn commutator_ralpha_spectral(
    u: &Vector<SpectralField>,
    theta: &SpectralField,
    alpha: f64,
) -> Result<SpectralField> {
    if u[0].grid() != theta.grid() || u[1].grid() != theta.grid() {
        return Err(Error::GridMismatch);
    }
    let first = riesz_alpha(&advect(u, theta)?, alpha);
    let second = advect(u, &riesz_alpha(theta, alpha))?;
    let mut out = &first - &second;
    out.set_mode(0, 0, Complex64::new(0.0, 0.0));
    Ok(out)
}

pub fn commutator_ralpha(u: &Vector<SpectralField>, theta: &SpectralField, alpha: f64) -> Result<PhysicalField> {
    commutator_ralpha_spectral(u, theta, alpha)?.to_physical()
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `‖[R_α, u·∇]θ‖_{B^s_{q,r}} / Σ_i ‖u_i‖_{B^δ_{q1,∞}} ‖∂_iθ‖_{B^{s+1-α-δ}_{q2,r}}`.
#[allow(clippy::too_many_arguments)]
pub fn commutator_estimate_ratio(
    u: &Vector<SpectralField>,
    theta: &SpectralField,
    alpha: f64,
    s: f64,
    delta: f64,
    q: f64,
    q1: f64,
    q2: f64,
    r: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::IndexConstraint(format!("alpha = {alpha} not in (0, 1)")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::IndexConstraint(format!("s = {s} not in (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::IndexConstraint(format!("delta = {delta} not in (0, 1)")));
    }
    if !(s + 1.0 - alpha - delta < 0.0) {
        return Err(Error::IndexConstraint(format!(
            "s + 1 - alpha - delta = {} must be negative",
            s + 1.0 - alpha - delta
        )));
    }
    if !(q >= 2.0 && q.is_finite() && q1 >= 2.0 && q2 >= 2.0 && r >= 1.0) {
        return Err(Error::IndexConstraint("need q in [2, ∞), q1, q2 >= 2, r >= 1".into()));
    }
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    if (inv(q) - inv(q1) - inv(q2)).abs() > 1e-12 {
        return Err(Error::IndexConstraint("1/q = 1/q1 + 1/q2 violated".into()));
    }
    let comm = commutator_ralpha_spectral(u, theta, alpha)?;
    let lhs = besov_norm(&comm, &BesovIndex::new(s, q, r))?;
    let mut rhs = 0.0;
    for (d, ud) in u.iter().enumerate() {
        let fu = besov_norm(ud, &BesovIndex::new(delta, q1, f64::INFINITY))?;
        let gt = besov_norm(&partial(theta, d), &BesovIndex::new(s + 1.0 - alpha - delta, q2, r))?;
        rhs += fu * gt;
    }
    Ok(ratio(lhs, rhs))
}

/// Periodized Gaussian of standard deviation `width`, unit integral, centered at the origin.
pub fn gaussian_mollifier(grid: crate::grid::GridSpec, width: f64) -> PhysicalField {
    let l = grid.side_length();
    let wrap = |x: f64| if x > l / 2.0 { x - l } else { x };
    let norm = 1.0 / (2.0 * std::f64::consts::PI * width * width);
    PhysicalField::from_fn(grid, |x, y| {
        let (a, b) = (wrap(x), wrap(y));
        norm * (-(a * a + b * b) / (2.0 * width * width)).exp()
    })
}

/// `φ * f` by the discrete periodic convolution with cell weight `dx²`.
pub fn convolve(phi: &PhysicalField, f: &PhysicalField) -> Result<PhysicalField> {
    let l2 = phi.grid().side_length().powi(2);
    let a = phi.to_spectral()?;
    let b = f.to_spectral()?;
    let mut c = b.clone();
    for (z, (x, y)) in c.coeffs_mut().iter_mut().zip(a.coeffs().iter().zip(b.coeffs())) {
        *z = l2 * x * y;
    }
    c.to_physical()
}

/// Measured ratio for the convolution-commutator bound
/// `‖φ*(fg) - f φ*g‖_q <= C ‖|x|^{δ+2/r1} φ‖_{r2} ‖f‖_{B̊^δ_{q1,r1}} ‖g‖_{q2}`,
/// the Besov seminorm taken in finite-difference form.
#[allow(clippy::too_many_arguments)]
pub fn convolution_commutator_ratio(
    phi: &PhysicalField,
    f: &PhysicalField,
    g: &PhysicalField,
    delta: f64,
    q: f64,
    q1: f64,
    q2: f64,
    r1: f64,
    r2: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::IndexConstraint(format!("delta = {delta} not in (0, 1)")));
    }
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    if !(q >= 1.0 && q1 >= 1.0 && q2 >= 1.0 && r1 >= 1.0 && r2 >= 1.0) {
        return Err(Error::IndexConstraint("all integrability indices must be >= 1".into()));
    }
    if (inv(q) - inv(q1) - inv(q2)).abs() > 1e-12 {
        return Err(Error::IndexConstraint("1/q1 + 1/q2 = 1/q violated".into()));
    }
    if (inv(r1) + inv(r2) - 1.0).abs() > 1e-12 {
        return Err(Error::IndexConstraint("1/r1 + 1/r2 = 1 violated".into()));
    }
    if f.grid() != g.grid() || f.grid() != phi.grid() {
        return Err(Error::GridMismatch);
    }
    let lhs = lp_norm(&(&convolve(phi, &(f * g))? - &(f * &convolve(phi, g)?)), q)?;
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let grid = *phi.grid();
    let l = grid.side_length();
    let wrap = |x: f64| if x > l / 2.0 { x - l } else { x };
    let power = delta + 2.0 * inv(r1);
    let weighted = PhysicalField::from_fn(grid, |x, y| wrap(x).hypot(wrap(y)).powf(power));
    let moment = lp_norm(&(&weighted * phi), r2)?;
    let rhs = moment * besov_seminorm_fd(f, delta, q1, r1)? * lp_norm(g, q2)?;
    Ok(ratio(lhs, rhs))
}

/// `‖∇v‖_∞ / (‖θ‖_{L²} + ‖∇θ‖_∞)` for `v = -∇⊥Λ^{β-3}∂_1θ`; the matrix norm
/// is the largest entry and `|∇θ|` is Euclidean.
pub fn interp_inequality_ratio(theta: &SpectralField, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("{beta} not in (0, 1)")));
    }
    let v = v_from_theta(theta, beta);
    let mut lhs: f64 = 0.0;
    for comp in &v {
        for d in 0..2 {
            lhs = lhs.max(partial(comp, d).to_physical()?.max_abs());
        }
    }
    let [tx, ty] = grad(theta);
    let grad_mag = tx.to_physical()?.zip_with(&ty.to_physical()?, f64::hypot)?;
    let rhs = lp_norm(&theta.to_physical()?, 2.0)? + grad_mag.max_abs();
    Ok(ratio(lhs, rhs))
}

/// `‖Λ^s(G|G|^{q-2})‖_{L²} / (‖G‖^{q-2}_{L^{2q/(2-α)}} ‖G‖_{Ḣ^{2+s-α-2(2-α)/q}})`.
/// The nonlinearity is evaluated on a twice finer grid.
pub fn chain_rule_besov_ratio(g: &SpectralField, s: f64, alpha: f64, q: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::IndexConstraint(format!("s = {s} not in (0, 1)")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::IndexConstraint(format!("alpha = {alpha} not in (0, 1)")));
    }
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::IndexConstraint(format!("q = {q} not in [2, ∞)")));
    }
    let fine = upsample(g, 2)?;
    let phys = fine.to_physical()?;
    let nonlinear = phys.map(|x| x * x.abs().powf(q - 2.0)).to_spectral()?;
    let lhs = lp_norm(&fractional_laplacian(&nonlinear, s).to_physical()?, 2.0)?;
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let sigma = 2.0 + s - alpha - 2.0 * (2.0 - alpha) / q;
    let mut mean_free = g.clone();
    mean_free.set_mode(0, 0, Complex64::new(0.0, 0.0));
    let hdot = fractional_laplacian(&mean_free, sigma).l2_norm_sq().sqrt();
    let lq = lp_norm(&phys, 2.0 * q / (2.0 - alpha))?;
    Ok(lhs / (lq.powf(q - 2.0) * hdot))
}
