//! A priori bounds evaluated along trajectories: the index window, the
//! maximum principle and energy margins, norms of `G`, and the pointwise
//! convexity inequalities for `Λ^β`.

use std::io::Write;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::{FlowParams, GridSpec};
use crate::lp_besov::{besov_norm, BesovIndex};
use crate::oss::oss_check;
use crate::solver::{compute_g_hat, grad_magnitude, initial_norms, InitNorms, SimState};
use crate::spectral::{biot_savart, fractional_laplacian, kpow, lp_norm, partial, upsample};

/// Indices for which the `L^q` and Besov bounds on `G` hold at a given `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexWindow {
    pub alpha: f64,
    /// `(8 - 4α) / (8 - 7α)`, upper end of the `L^q` range.
    pub q0: f64,
    /// `2 / (2α - 1)`, lower end of the Besov `q` range.
    pub q_low: f64,
    /// `2 / (3α - 2)`; crosses `q0` exactly at `α = α₀`.
    pub q_embed: f64,
    /// `3α - 2`.
    pub s_max: f64,
    pub alpha0: f64,
    /// `α > α₀`, so the Besov bound applies and its window is nonempty.
    pub valid: bool,
}

/// `(23 - √145) / 12`.
pub fn alpha0() -> f64 {
    (23.0 - 145f64.sqrt()) / 12.0
}

pub fn index_window(alpha: f64) -> Result<IndexWindow> {
    if !(alpha > 0.8) {
        return Err(Error::IndexConstraint(format!(
            "q₀ formula requires α > 4/5 (got α = {alpha})"
        )));
    }
    if !(alpha < 1.0) {
        return Err(Error::IndexConstraint(format!(
            "window requires α < 1 (got α = {alpha})"
        )));
    }
    let q0 = (8.0 - 4.0 * alpha) / (8.0 - 7.0 * alpha);
    let q_low = 2.0 / (2.0 * alpha - 1.0);
    let s_max = 3.0 * alpha - 2.0;
    let a0 = alpha0();
    Ok(IndexWindow {
        alpha,
        q0,
        q_low,
        q_embed: 2.0 / s_max,
        s_max,
        alpha0: a0,
        valid: alpha > a0 && q_low < q0 && s_max > 0.0,
    })
}

impl IndexWindow {
    /// `2 < q < q0`.
    pub fn check_lq(&self, q: f64) -> Result<()> {
        if !(q > 2.0 && q < self.q0) {
            return Err(Error::IndexConstraint(format!(
                "q = {q} violates 2 < q < q₀ = (8-4α)/(8-7α) = {}",
                self.q0
            )));
        }
        Ok(())
    }

    /// `0 < s <= 3α - 2` and `2/(2α-1) < q < q0`; the `q` range is enforced
    /// only above `α₀`, where the bound is available.
    pub fn check_besov(&self, s: f64, q: f64) -> Result<()> {
        if !(s > 0.0 && s <= self.s_max) {
            return Err(Error::IndexConstraint(format!(
                "s = {s} violates 0 < s <= 3α-2 = {}",
                self.s_max
            )));
        }
        if self.valid && !(q > self.q_low && q < self.q0) {
            return Err(Error::IndexConstraint(format!(
                "q = {q} violates 2/(2α-1) = {} < q < q₀ = {}",
                self.q_low, self.q0
            )));
        }
        Ok(())
    }

    /// Midpoint of the admissible `q` range.
    pub fn default_q(&self) -> f64 {
        let lo = if self.valid { self.q_low.max(2.0) } else { 2.0 };
        0.5 * (lo + self.q0)
    }
}

/// Monitor indices `(q, s)` for a run, validated against the window. Outside
/// `4/5 < α < 1` the window does not exist: the monitors fall back to
/// `q = 2`, `s = 1/2` and explicit requests are rejected.
pub fn resolve_indices(alpha: f64, q: Option<f64>, s: Option<f64>) -> Result<(f64, f64)> {
    let w = match index_window(alpha) {
        Ok(w) => w,
        Err(e) if q.is_some() || s.is_some() => return Err(e),
        Err(_) => return Ok((2.0, 0.5)),
    };
    let q = q.unwrap_or_else(|| w.default_q());
    let s = s.unwrap_or(w.s_max);
    w.check_lq(q)?;
    w.check_besov(s, q)?;
    Ok((q, s))
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub theta_l2: f64,
    pub theta_linf: f64,
    pub u_l2: f64,
    pub omega_linf: f64,
    pub grad_theta_linf: f64,
    pub g_l2: f64,
    pub g_lq: f64,
    pub q: f64,
    pub g_besov: f64,
    pub s: f64,
    /// `∫_0^t ‖Λ^{α/2} u‖²`.
    pub diss_u_accum: f64,
    /// `∫_0^t ‖Λ^{α/2} G‖²`.
    pub diss_g_accum: f64,
    pub margin_maxprinciple_l2: f64,
    pub margin_maxprinciple_linf: f64,
    pub margin_energy_linear: f64,
    /// `(‖u_0‖² + t‖θ_0‖²)² - ‖u‖² - ∫‖Λ^{α/2}u‖²`; reported, never asserted.
    pub margin_energy_squared: f64,
    pub cordoba_min: f64,
    pub oss_delta_measured: f64,
}

pub const CSV_COLUMNS: [&str; 18] = [
    "t",
    "theta_l2",
    "theta_linf",
    "u_l2",
    "omega_linf",
    "grad_theta_linf",
    "G_l2",
    "G_lq",
    "q",
    "G_besov",
    "s",
    "diss_u_accum",
    "diss_G_accum",
    "margin_maxprinciple_l2",
    "margin_maxprinciple_linf",
    "margin_energy_linear",
    "cordoba_min",
    "oss_delta_measured",
];

impl DiagnosticsRecord {
    pub fn csv_values(&self) -> [f64; 18] {
        [
            self.t,
            self.theta_l2,
            self.theta_linf,
            self.u_l2,
            self.omega_linf,
            self.grad_theta_linf,
            self.g_l2,
            self.g_lq,
            self.q,
            self.g_besov,
            self.s,
            self.diss_u_accum,
            self.diss_g_accum,
            self.margin_maxprinciple_l2,
            self.margin_maxprinciple_linf,
            self.margin_energy_linear,
            self.cordoba_min,
            self.oss_delta_measured,
        ]
    }

    /// `‖G‖² + ∫‖Λ^{α/2}G‖²`.
    pub fn g_energy(&self) -> f64 {
        self.g_l2 * self.g_l2 + self.diss_g_accum
    }

    pub fn is_finite(&self) -> bool {
        self.csv_values().iter().all(|v| v.is_finite()) && self.margin_energy_squared.is_finite()
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Writes the header, then one row per record, flushing after each.
pub struct CsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(sink: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(CSV_COLUMNS).map_err(csv_error)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    /// Continues an existing table; no header is written.
    pub fn append(sink: W) -> Self {
        Self {
            inner: csv::Writer::from_writer(sink),
        }
    }

    pub fn write(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.inner
            .write_record(rec.csv_values().iter().map(|v| format_f64(*v)))
            .map_err(csv_error)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::Other, e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleMargin {
    pub l2: f64,
    pub linf: f64,
    /// Either margin is below `-1e-6 ‖θ_0‖ (1 + t)`.
    pub flagged: bool,
}

pub fn max_principle_margin(t: f64, theta_l2: f64, theta_linf: f64, init: &InitNorms) -> MaxPrincipleMargin {
    let l2 = init.theta_l2 - theta_l2;
    let linf = init.theta_linf - theta_linf;
    let flagged = l2 < -1e-6 * init.theta_l2 * (1.0 + t) || linf < -1e-6 * init.theta_linf * (1.0 + t);
    MaxPrincipleMargin { l2, linf, flagged }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMargin {
    /// `‖u_0‖ + t‖θ_0‖ - ‖u(t)‖`.
    pub linear: f64,
    pub squared: f64,
    /// The linear margin is below `-1e-6 (‖u_0‖ + t‖θ_0‖)`.
    pub flagged: bool,
}

pub fn energy_margin(t: f64, u_l2: f64, diss_u_accum: f64, u0_l2: f64, theta0_l2: f64) -> EnergyMargin {
    let bound = u0_l2 + t * theta0_l2;
    let linear = bound - u_l2;
    let squared = (u0_l2 * u0_l2 + t * theta0_l2 * theta0_l2).powi(2) - (u_l2 * u_l2 + diss_u_accum);
    EnergyMargin {
        linear,
        squared,
        flagged: linear < -1e-6 * bound.max(f64::MIN_POSITIVE),
    }
}

/// `Σ L² |k|^{2γ} |f̂|²`, the squared `L²` norm of `Λ^γ f`.
fn sobolev_sq(f: &SpectralField, gamma: f64) -> f64 {
    let g = *f.grid();
    let n = g.n();
    let l2 = g.side_length() * g.side_length();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += kpow(&g, i, j, 2.0 * gamma) * f.coeffs()[i * n + j].norm_sqr();
        }
    }
    l2 * sum
}

/// `‖Λ^{α/2} u‖²` from the vorticity, and `‖Λ^{α/2} G‖²`.
pub fn dissipation_rates(state: &SimState, alpha: f64) -> (f64, f64) {
    let du = sobolev_sq(state.omega_hat(), 0.5 * alpha - 1.0);
    let dg = sobolev_sq(&compute_g_hat(state, alpha), 0.5 * alpha);
    (du, dg)
}

/// Indices and reference values shared by all records of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    pub q: f64,
    pub s: f64,
    /// Scale length of the modulus scan.
    pub oss_l: f64,
}

/// Accumulates dissipation integrals by the trapezoid rule and produces
/// records. Every quantity other than the two integrals is a function of the
/// current snapshot only.
#[derive(Debug, Clone)]
pub struct Monitor {
    cfg: MonitorConfig,
    params: FlowParams,
    init: InitNorms,
    last: (f64, f64, f64),
    diss_u: f64,
    diss_g: f64,
}

impl Monitor {
    pub fn new(cfg: MonitorConfig, params: FlowParams, start: &SimState, init: InitNorms) -> Self {
        let (du, dg) = dissipation_rates(start, params.alpha);
        Self {
            cfg,
            params,
            init,
            last: (start.t(), du, dg),
            diss_u: 0.0,
            diss_g: 0.0,
        }
    }

    pub fn init_norms(&self) -> &InitNorms {
        &self.init
    }

    /// Extends the dissipation integrals up to `state.t()`.
    pub fn advance(&mut self, state: &SimState) {
        let (du, dg) = dissipation_rates(state, self.params.alpha);
        let (t0, du0, dg0) = self.last;
        let h = state.t() - t0;
        self.diss_u += 0.5 * h * (du0 + du);
        self.diss_g += 0.5 * h * (dg0 + dg);
        self.last = (state.t(), du, dg);
    }

    pub fn record(&self, state: &SimState) -> Result<DiagnosticsRecord> {
        let now = initial_norms(state)?;
        let t = state.t();
        let g_hat = compute_g_hat(state, self.params.alpha);
        let g = g_hat.to_physical()?;
        let mp = max_principle_margin(t, now.theta_l2, now.theta_linf, &self.init);
        let en = energy_margin(t, now.u_l2, self.diss_u, self.init.u_l2, self.init.theta_l2);
        let cordoba = cordoba_margin(state.theta(), self.params.beta, &Power(2))?;
        let oss = oss_check(state.theta(), f64::INFINITY, self.cfg.oss_l)?;
        Ok(DiagnosticsRecord {
            t,
            theta_l2: now.theta_l2,
            theta_linf: now.theta_linf,
            u_l2: now.u_l2,
            omega_linf: state.omega().max_abs(),
            grad_theta_linf: now.grad_theta_linf,
            g_l2: lp_norm(&g, 2.0)?,
            g_lq: lp_norm(&g, self.cfg.q)?,
            q: self.cfg.q,
            g_besov: besov_norm(&g_hat, &BesovIndex::new(self.cfg.s, self.cfg.q, f64::INFINITY))?,
            s: self.cfg.s,
            diss_u_accum: self.diss_u,
            diss_g_accum: self.diss_g,
            margin_maxprinciple_l2: mp.l2,
            margin_maxprinciple_linf: mp.linf,
            margin_energy_linear: en.linear,
            margin_energy_squared: en.squared,
            cordoba_min: cordoba.min,
            oss_delta_measured: oss.delta_measured,
        })
    }
}

/// `‖G‖² + ∫‖Λ^{α/2}G‖²` along a run.
pub fn g_l2_series(records: &[DiagnosticsRecord]) -> Vec<f64> {
    records.iter().map(DiagnosticsRecord::g_energy).collect()
}

pub fn g_lq_series(records: &[DiagnosticsRecord]) -> Vec<f64> {
    records.iter().map(|r| r.g_lq).collect()
}

pub fn g_besov_series(records: &[DiagnosticsRecord]) -> Vec<f64> {
    records.iter().map(|r| r.g_besov).collect()
}

/// Compares the secant slope over the second half of a series with the one
/// over the first half; linear growth gives equal slopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub early_slope: f64,
    pub late_slope: f64,
    pub at_most_linear: bool,
}

pub fn growth_report(ts: &[f64], vs: &[f64]) -> Result<GrowthReport> {
    if ts.len() != vs.len() || ts.len() < 3 {
        return Err(invalid("series", "need at least three matching samples"));
    }
    if vs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("monitor series"));
    }
    let mid = ts.len() / 2;
    let last = ts.len() - 1;
    let early = (vs[mid] - vs[0]) / (ts[mid] - ts[0]);
    let late = (vs[last] - vs[mid]) / (ts[last] - ts[mid]);
    let scale = vs.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (ts[last] - ts[0]);
    Ok(GrowthReport {
        early_slope: early,
        late_slope: late,
        at_most_linear: late <= 2.0 * early.max(0.0) + 1e-6 * scale,
    })
}

/// `‖∇θ‖_∞` next to `‖∇ũ‖_∞`, `ũ = ∇⊥Δ^{-1} G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradThetaSample {
    pub t: f64,
    pub grad_theta_linf: f64,
    pub grad_u_tilde_linf: f64,
}

pub fn grad_theta_sample(state: &SimState, alpha: f64) -> Result<GradThetaSample> {
    let u = biot_savart(&compute_g_hat(state, alpha));
    let mut m: f64 = 0.0;
    for comp in &u {
        for d in 0..2 {
            m = m.max(partial(comp, d).to_physical()?.max_abs());
        }
    }
    Ok(GradThetaSample {
        t: state.t(),
        grad_theta_linf: grad_magnitude(state.theta_hat())?.max_abs(),
        grad_u_tilde_linf: m,
    })
}

pub fn grad_theta_series(states: &[SimState], alpha: f64) -> Result<Vec<GradThetaSample>> {
    states.iter().map(|s| grad_theta_sample(s, alpha)).collect()
}

/// A convex `C²` function of one variable.
pub trait Convex {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// Refinement factor that keeps `Γ(f)` free of aliasing for a field
    /// resolved on the coarse grid.
    fn oversample(&self) -> usize {
        8
    }
}

/// `x ↦ a x + b`.
#[derive(Debug, Clone, Copy)]
pub struct Linear(pub f64, pub f64);

impl Convex for Linear {
    fn value(&self, x: f64) -> f64 {
        self.0 * x + self.1
    }
    fn derivative(&self, _: f64) -> f64 {
        self.0
    }
    fn oversample(&self) -> usize {
        1
    }
}

/// `x^p` for even `p`.
#[derive(Debug, Clone, Copy)]
pub struct Power(pub u32);

impl Convex for Power {
    fn value(&self, x: f64) -> f64 {
        x.powi(self.0 as i32)
    }
    fn derivative(&self, x: f64) -> f64 {
        self.0 as f64 * x.powi(self.0 as i32 - 1)
    }
    fn oversample(&self) -> usize {
        self.0.max(2) as usize
    }
}

/// `(x + √(x² + ε²)) / 2`, a smoothed `max(x, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothHinge(pub f64);

impl Convex for SmoothHinge {
    fn value(&self, x: f64) -> f64 {
        0.5 * (x + x.hypot(self.0))
    }
    fn derivative(&self, x: f64) -> f64 {
        0.5 * (1.0 + x / x.hypot(self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CordobaReport {
    /// Minimum over the refined grid of `Γ'(f) Λ^β f - Λ^β Γ(f)`.
    pub min: f64,
    /// `max |Γ'(f) Λ^β f| + max |Λ^β Γ(f)|`.
    pub scale: f64,
}

impl CordobaReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min >= -tol * self.scale
    }
}

/// `Γ'(f) Λ^β f - Λ^β Γ(f)` on a grid refined by `Γ.oversample()`.
pub fn cordoba_field(f: &PhysicalField, beta: f64, gamma_fn: &dyn Convex) -> Result<(PhysicalField, f64)> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(invalid("beta", format!("{beta} not in (0, 2)")));
    }
    let fine = refine(f, gamma_fn.oversample())?;
    let lf = fractional_laplacian(&fine.to_spectral()?, beta).to_physical()?;
    let gf = fine.map(|x| gamma_fn.value(x));
    let lg = fractional_laplacian(&gf.to_spectral()?, beta).to_physical()?;
    let lhs = fine.zip_with(&lf, |x, l| gamma_fn.derivative(x) * l)?;
    let scale = lhs.max_abs() + lg.max_abs();
    Ok((&lhs - &lg, scale))
}

pub fn cordoba_margin(f: &PhysicalField, beta: f64, gamma_fn: &dyn Convex) -> Result<CordobaReport> {
    let (m, scale) = cordoba_field(f, beta, gamma_fn)?;
    Ok(CordobaReport { min: m.min(), scale })
}

fn refine(f: &PhysicalField, factor: usize) -> Result<PhysicalField> {
    if factor <= 1 {
        return Ok(f.clone());
    }
    upsample(&f.to_spectral()?, factor)?.to_physical()
}

/// `c_{2,β} = 2^β Γ(1 + β/2) / (π |Γ(-β/2)|)`, the constant of the singular
/// integral form of `Λ^β` in the plane.
pub fn lambda_kernel_constant(beta: f64) -> f64 {
    2f64.powf(beta) * gamma(1.0 + 0.5 * beta) / (std::f64::consts::PI * gamma(-0.5 * beta).abs())
}

/// `∫_{0 < |s| <= L/2} (g(x) - g(x+s))² |s|^{-2-β} ds` by the grid sum over
/// shifts, skipping the singular cell.
pub fn truncated_dissipation(g: &PhysicalField, beta: f64) -> Result<PhysicalField> {
    let grid = *g.grid();
    let n = grid.n();
    let dx = grid.dx();
    let half = 0.5 * grid.side_length();
    let mut w = PhysicalField::zeros(grid);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r = dx * ((grid.mode(i).pow(2) + grid.mode(j).pow(2)) as f64).sqrt();
            if r > 0.0 && r <= half {
                let v = r.powf(-2.0 - beta) * grid.cell_area();
                w.values_mut()[i * n + j] = v;
                total += v;
            }
        }
    }
    let w_hat = w.to_spectral()?;
    let conv = |f: &PhysicalField| -> Result<PhysicalField> {
        let f_hat = f.to_spectral()?;
        let nn = (n * n) as f64;
        let prod: Vec<Complex64> = w_hat
            .coeffs()
            .iter()
            .zip(f_hat.coeffs())
            .map(|(a, b)| nn * a * b)
            .collect();
        SpectralField::new(grid, prod)?.to_physical()
    };
    let wg = conv(g)?;
    let g2 = g.map(|v| v * v);
    let wg2 = conv(&g2)?;
    let mut out = PhysicalField::zeros(grid);
    for (k, o) in out.values_mut().iter_mut().enumerate() {
        let gv = g.values()[k];
        *o = gv * gv * total - 2.0 * gv * wg.values()[k] + wg2.values()[k];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundReport {
    /// Minimum of the exact part, `g·Λ^β g - ½Λ^β |g|²`.
    pub exact_part_min: f64,
    pub scale: f64,
    /// Measured constant of the nonlinear term; `None` when the field is flat.
    pub empirical: Option<f64>,
}

impl LowerBoundReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.exact_part_min >= -tol * self.scale
    }
}

/// Exact part `Σ_d g_d Λ^β g_d - ½ Λ^β g_d²` of vector field `g`, its scale,
/// and the truncated dissipation `Σ_d ∫ (g_d(x) - g_d(y))² |x-y|^{-2-β}`.
fn exact_part(comps: &[SpectralField], beta: f64) -> Result<(PhysicalField, f64, PhysicalField)> {
    let grid = *comps[0].grid();
    let fine_grid = grid.with_n(2 * grid.n())?;
    let mut e = PhysicalField::zeros(fine_grid);
    let mut d = PhysicalField::zeros(fine_grid);
    let mut scale = 0.0;
    for c in comps {
        let fine = upsample(c, 2)?.to_physical()?;
        let (m, s) = cordoba_field(&c.to_physical()?, beta, &Power(2))?;
        e = &e + &m.scale(0.5);
        scale += 0.5 * s;
        d = &d + &truncated_dissipation(&fine, beta)?;
    }
    Ok((e, scale, d))
}

/// Lower bound for `∇f·Λ^β∇f`: the exact part `∇f·Λ^β∇f - ½Λ^β|∇f|²`
/// and the smallest `C_0` with
/// `exact - ½D(∇f) >= |∇f|^{2+γ} / (C_0 ‖f‖_{L^q}^γ)`, `γ = βq/(q+2)`,
/// where `D` carries the constant `c_{2,β}/2`. `C_0` is measured where
/// `|∇f|` is at least half its maximum.
pub fn gradient_lower_bound_margin(f: &PhysicalField, beta: f64, q: f64) -> Result<LowerBoundReport> {
    let f_hat = f.to_spectral()?;
    let comps = [partial(&f_hat, 0), partial(&f_hat, 1)];
    let (e, scale, dint) = exact_part(&comps, beta)?;
    let gexp = if q.is_infinite() { beta } else { beta * q / (q + 2.0) };
    let fq = lp_norm(f, q)?;
    let gx = upsample(&comps[0], 2)?.to_physical()?;
    let gy = upsample(&comps[1], 2)?.to_physical()?;
    let mag = gx.zip_with(&gy, f64::hypot)?;
    let dc = 0.5 * lambda_kernel_constant(beta);
    let peak = mag.max_abs();
    let mut c0: Option<f64> = None;
    if peak > 0.0 && fq > 0.0 {
        let mut worst: f64 = 0.0;
        for k in 0..mag.values().len() {
            let m = mag.values()[k];
            if m >= 0.5 * peak {
                let x = m.powf(2.0 + gexp) / fq.powf(gexp);
                let rest = e.values()[k] - 0.5 * dc * dint.values()[k];
                worst = worst.max(if rest > 0.0 { x / rest } else { f64::INFINITY });
            }
        }
        c0 = Some(worst);
    }
    Ok(LowerBoundReport {
        exact_part_min: e.min(),
        scale,
        empirical: c0,
    })
}

/// Lower bound for `δ_hθ Λ^β δ_hθ`, `δ_hθ = θ(·+h) - θ`, `h = (a, b) dx`:
/// the exact part and the largest `C` with
/// `exact - D_h >= C |δ_hθ|^{2+β} / (‖θ‖_∞^β |h|^β)`, `D_h` carrying the
/// constant `c_{2,β}/4`, measured where `|δ_hθ|` is at least half its maximum.
pub fn difference_lower_bound_margin(theta: &PhysicalField, h: (i64, i64), beta: f64) -> Result<LowerBoundReport> {
    let dh = &theta.shifted(h.0, h.1) - theta;
    let comps = [dh.to_spectral()?];
    let (e, scale, dint) = exact_part(&comps, beta)?;
    let fine = upsample(&comps[0], 2)?.to_physical()?;
    let hlen = theta.grid().dx() * ((h.0 * h.0 + h.1 * h.1) as f64).sqrt();
    let sup = theta.max_abs();
    let dc = 0.25 * lambda_kernel_constant(beta);
    let peak = fine.max_abs();
    let mut c: Option<f64> = None;
    if peak > 0.0 && hlen > 0.0 {
        let mut best = f64::INFINITY;
        for k in 0..fine.values().len() {
            let v = fine.values()[k].abs();
            if v >= 0.5 * peak {
                let x = v.powf(2.0 + beta) / (sup.powf(beta) * hlen.powf(beta));
                best = best.min((e.values()[k] - dc * dint.values()[k]) / x);
            }
        }
        c = Some(best);
    }
    Ok(LowerBoundReport {
        exact_part_min: e.min(),
        scale,
        empirical: c,
    })
}

/// Scale length used by default for the modulus column.
pub fn default_oss_length(grid: &GridSpec) -> f64 {
    grid.side_length() / 16.0
}
