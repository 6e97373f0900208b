//! Time integration of the vorticity–temperature system.
//!
//! ```text
//! ∂_t θ + u·∇θ + κ Λ^β θ = 0
//! ∂_t ω + u·∇ω + ν Λ^α ω = ∂_1 θ,   u = ∇⊥Δ^{-1} ω
//! ```
//!
//! The diagonal dissipation is integrated exactly (integrating factor) and the
//! rest by Heun's method. Products are dealiased.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::{FlowParams, GridSpec};
use crate::lp_besov::{advect, commutator_ralpha_spectral};
use crate::spectral::{
    biot_savart, dealias, dealias_in_place, fractional_laplacian, kpow, lp_norm, partial, riesz_alpha, to_physical_vec,
    upsample,
};

/// Vorticity magnitude treated as a blow-up.
pub const BLOWUP_OMEGA: f64 = 1e8;
/// Smallest admissible time step.
pub const MIN_DT: f64 = 1e-12;

/// Prognostic state. The coefficients are always
/// `dealias(to_spectral(values))` of the stored collocation values, so a
/// state rebuilt from its values is bitwise identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    theta_hat: SpectralField,
    omega_hat: SpectralField,
    theta: PhysicalField,
    omega: PhysicalField,
    t: f64,
}

impl SimState {
    pub fn from_physical(theta: PhysicalField, omega: PhysicalField, t: f64) -> Result<Self> {
        if theta.grid() != omega.grid() {
            return Err(Error::GridMismatch);
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid("t", "time must be finite and >= 0"));
        }
        let mut theta_hat = theta.to_spectral()?;
        let mut omega_hat = omega.to_spectral()?;
        dealias_in_place(&mut theta_hat);
        dealias_in_place(&mut omega_hat);
        omega_hat.set_mode(0, 0, Complex64::new(0.0, 0.0));
        Ok(Self {
            theta_hat,
            omega_hat,
            theta,
            omega,
            t,
        })
    }

    /// Canonical state for the given coefficients.
    pub fn from_spectral(theta_hat: &SpectralField, omega_hat: &SpectralField, t: f64) -> Result<Self> {
        Self::from_physical(dealias(theta_hat).to_physical()?, dealias(omega_hat).to_physical()?, t)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_physical(PhysicalField::zeros(grid), PhysicalField::zeros(grid), 0.0).expect("zero state")
    }

    pub fn grid(&self) -> &GridSpec {
        self.theta_hat.grid()
    }

    pub fn theta_hat(&self) -> &SpectralField {
        &self.theta_hat
    }

    pub fn omega_hat(&self) -> &SpectralField {
        &self.omega_hat
    }

    /// Collocation values the coefficients were built from.
    pub fn theta(&self) -> &PhysicalField {
        &self.theta
    }

    pub fn omega(&self) -> &PhysicalField {
        &self.omega
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn velocity_hat(&self) -> [SpectralField; 2] {
        biot_savart(&self.omega_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt_init: f64,
    pub cfl_number: f64,
    pub t_end: f64,
}

impl StepperConfig {
    pub fn new(dt_init: f64, cfl_number: f64, t_end: f64) -> Result<Self> {
        let c = Self {
            dt_init,
            cfl_number,
            t_end,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return Err(invalid("dt_init", "must be positive"));
        }
        if !(self.cfl_number > 0.0 && self.cfl_number <= 1.0) {
            return Err(invalid("cfl_number", "must lie in (0, 1]"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", "must be positive"));
        }
        Ok(())
    }

    /// Whether `t` has reached `t_end`, up to accumulated rounding.
    pub fn reached(&self, t: f64) -> bool {
        t >= self.t_end - END_SLACK * self.t_end.max(1.0)
    }
}

/// Relative rounding allowance on the final time.
const END_SLACK: f64 = 1e-12;

/// Tendencies split into the explicit part (advection, buoyancy) and the
/// diagonal dissipation.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub theta_nonlinear: SpectralField,
    pub omega_nonlinear: SpectralField,
    pub theta_linear: SpectralField,
    pub omega_linear: SpectralField,
}

impl Rhs {
    pub fn theta_total(&self) -> SpectralField {
        &self.theta_nonlinear + &self.theta_linear
    }

    pub fn omega_total(&self) -> SpectralField {
        &self.omega_nonlinear + &self.omega_linear
    }
}

fn blowup(t: f64, omega: &SpectralField) -> Error {
    let omega_max = omega.to_physical().map(|w| w.max_abs()).unwrap_or(f64::NAN);
    Error::BlowUp { t, omega_max }
}

fn explicit_part(theta: &SpectralField, omega: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let u = biot_savart(omega);
    let dtheta = -&advect(&u, theta)?;
    let domega = &partial(theta, 0) - &advect(&u, omega)?;
    Ok((dtheta, domega))
}

fn nonlinear(theta: &SpectralField, omega: &SpectralField, t: f64) -> Result<(SpectralField, SpectralField)> {
    explicit_part(theta, omega).map_err(|e| match e {
        Error::NonFinite(_) => blowup(t, omega),
        other => other,
    })
}

pub fn rhs(state: &SimState, params: &FlowParams) -> Result<Rhs> {
    let (theta_nonlinear, omega_nonlinear) = nonlinear(&state.theta_hat, &state.omega_hat, state.t)?;
    Ok(Rhs {
        theta_nonlinear,
        omega_nonlinear,
        theta_linear: fractional_laplacian(&state.theta_hat, params.beta).scale(-params.kappa),
        omega_linear: fractional_laplacian(&state.omega_hat, params.alpha).scale(-params.nu),
    })
}

/// `max |u|` on the grid.
pub fn max_speed(state: &SimState) -> Result<f64> {
    let u = to_physical_vec(&state.velocity_hat())?;
    Ok(u[0].zip_with(&u[1], f64::hypot)?.max_abs())
}

/// Step size `min(dt_init, cfl dx / max|u|, cfl dx)`, clipped at `t_end`.
pub fn choose_dt(state: &SimState, cfg: &StepperConfig) -> Result<f64> {
    let dx = state.grid().dx();
    let umax = max_speed(state)?;
    let mut dt = cfg.dt_init.min(cfg.cfl_number * dx);
    if umax > 0.0 {
        dt = dt.min(cfg.cfl_number * dx / umax);
    }
    let remaining = cfg.t_end - state.t;
    if remaining - dt <= END_SLACK * cfg.t_end.max(1.0) {
        dt = remaining;
    }
    if !(dt >= MIN_DT) {
        return Err(Error::TimeStepUnderflow { dt });
    }
    Ok(dt)
}

fn decay(f: &SpectralField, rate: f64, order: f64, dt: f64) -> SpectralField {
    let g = *f.grid();
    f.map_indexed(|i, j| Complex64::new((-rate * kpow(&g, i, j, order) * dt).exp(), 0.0))
}

/// One integrating-factor Heun step of size `dt`.
pub fn step_fixed(state: &SimState, params: &FlowParams, dt: f64) -> Result<SimState> {
    if !(dt >= MIN_DT) {
        return Err(Error::TimeStepUnderflow { dt });
    }
    let (kt, kw) = (params.kappa, params.nu);
    let (bt, aw) = (params.beta, params.alpha);
    let (th, om) = (&state.theta_hat, &state.omega_hat);
    let (n1t, n1w) = nonlinear(th, om, state.t)?;
    let th_star = decay(&(th + &(&n1t * dt)), kt, bt, dt);
    let om_star = decay(&(om + &(&n1w * dt)), kw, aw, dt);
    let (n2t, n2w) = nonlinear(&th_star, &om_star, state.t + dt)?;
    let th_new = &decay(&(th + &(&n1t * (0.5 * dt))), kt, bt, dt) + &(&n2t * (0.5 * dt));
    let om_new = &decay(&(om + &(&n1w * (0.5 * dt))), kw, aw, dt) + &(&n2w * (0.5 * dt));
    let t = state.t + dt;
    let next = SimState::from_spectral(&th_new, &om_new, t).map_err(|e| match e {
        Error::NonFinite(_) => blowup(t, &om_new),
        other => other,
    })?;
    let omega_max = next.omega.max_abs();
    if omega_max > BLOWUP_OMEGA {
        return Err(Error::BlowUp { t, omega_max });
    }
    Ok(next)
}

/// One step with the adaptive size of [`choose_dt`].
pub fn step(state: &SimState, params: &FlowParams, cfg: &StepperConfig) -> Result<SimState> {
    let dt = choose_dt(state, cfg)?;
    step_fixed(state, params, dt)
}

/// `G = ω - R_α θ`.
pub fn compute_g_hat(state: &SimState, alpha: f64) -> SpectralField {
    &state.omega_hat - &riesz_alpha(&state.theta_hat, alpha)
}

pub fn compute_g(state: &SimState, alpha: f64) -> Result<PhysicalField> {
    compute_g_hat(state, alpha).to_physical()
}

/// Right side minus transport and dissipation of the `G` equation,
/// `[R_α, u·∇]θ + κ Λ^{β-α} ∂_1θ + (1-ν) ∂_1θ - u·∇G - ν Λ^α G`.
pub fn g_tendency(state: &SimState, params: &FlowParams) -> Result<SpectralField> {
    let g = compute_g_hat(state, params.alpha);
    let u = state.velocity_hat();
    let d1 = partial(&state.theta_hat, 0);
    let forcing = &(&commutator_ralpha_spectral(&u, &state.theta_hat, params.alpha)?
        + &fractional_laplacian(&d1, params.beta - params.alpha).scale(params.kappa))
        + &d1.scale(1.0 - params.nu);
    Ok(&(&forcing - &advect(&u, &g)?) - &fractional_laplacian(&g, params.alpha).scale(params.nu))
}

/// L² norm of `∂_t G - g_tendency` at the middle of three states, with the
/// time derivative by central differences.
pub fn g_equation_residual(window: [&SimState; 3], params: &FlowParams) -> Result<f64> {
    let [a, b, c] = window;
    let (h1, h2) = (b.t - a.t, c.t - b.t);
    if !(h1 > 0.0 && (h1 - h2).abs() <= 1e-9 * h1) {
        return Err(Error::NonUniformSpacing);
    }
    let dgdt = (&compute_g_hat(c, params.alpha) - &compute_g_hat(a, params.alpha)).scale(1.0 / (h1 + h2));
    Ok((&dgdt - &g_tendency(b, params)?).l2_norm_sq().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitKind {
    /// `ψ = sin(k0 x1) sin(k0 x2)` for the velocity and a two-mode temperature.
    TaylorGreen,
    /// A few seeded periodized Gaussians in both fields.
    GaussianBumps,
    /// Seeded random coefficients on integer shells `k_min <= |m| <= k_max`.
    RandomBand { k_min: f64, k_max: f64 },
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor-green" => Ok(Self::TaylorGreen),
            "gaussian-bumps" => Ok(Self::GaussianBumps),
            "random-band" => Ok(Self::RandomBand { k_min: 1.0, k_max: 6.0 }),
            _ => Err(invalid("init", format!("unknown kind `{s}`"))),
        }
    }
}

/// Norms of the initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitNorms {
    pub theta_l2: f64,
    pub theta_linf: f64,
    pub grad_theta_linf: f64,
    pub u_l2: f64,
}

pub fn initial_norms(state: &SimState) -> Result<InitNorms> {
    let u = to_physical_vec(&state.velocity_hat())?;
    let u_l2 = (lp_norm(&u[0], 2.0)?.powi(2) + lp_norm(&u[1], 2.0)?.powi(2)).sqrt();
    Ok(InitNorms {
        theta_l2: lp_norm(state.theta(), 2.0)?,
        theta_linf: state.theta().max_abs(),
        grad_theta_linf: grad_magnitude(state.theta_hat())?.max_abs(),
        u_l2,
    })
}

/// `|∇f|` at the collocation points.
pub fn grad_magnitude(f: &SpectralField) -> Result<PhysicalField> {
    partial(f, 0)
        .to_physical()?
        .zip_with(&partial(f, 1).to_physical()?, f64::hypot)
}

fn bumps(grid: GridSpec, rng: &mut ChaCha8Rng, count: usize) -> PhysicalField {
    let l = grid.side_length();
    let specs: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(0.0..l),
                rng.gen_range(0.0..l),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.08..0.14) * l,
            )
        })
        .collect();
    let wrap = |d: f64| d - l * (d / l).round();
    PhysicalField::from_fn(grid, |x, y| {
        specs
            .iter()
            .map(|&(cx, cy, a, w)| {
                let (dx, dy) = (wrap(x - cx), wrap(y - cy));
                a * (-(dx * dx + dy * dy) / (2.0 * w * w)).exp()
            })
            .sum()
    })
}

fn random_band(grid: GridSpec, rng: &mut ChaCha8Rng, k_min: f64, k_max: f64) -> Result<SpectralField> {
    let n = grid.n();
    let mut hat = SpectralField::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            let (m1, m2) = (grid.mode(i), grid.mode(j));
            let r = ((m1 * m1 + m2 * m2) as f64).sqrt();
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if r >= k_min && r <= k_max && !grid.is_nyquist(m1) && !grid.is_nyquist(m2) {
                hat.coeffs_mut()[i * n + j] = Complex64::new(a, b);
            }
        }
    }
    // Hermitian part.
    let mut sym = hat.clone();
    for i in 0..n {
        for j in 0..n {
            let mirror = hat.coeffs()[((n - i) % n) * n + (n - j) % n].conj();
            sym.coeffs_mut()[i * n + j] = 0.5 * (hat.coeffs()[i * n + j] + mirror);
        }
    }
    let peak = sym.to_physical()?.max_abs();
    Ok(if peak > 0.0 { sym.scale(1.0 / peak) } else { sym })
}

/// Smooth band-limited initial state, reproducible from the seed.
pub fn initial_data(kind: InitKind, seed: u64, grid: GridSpec) -> Result<SimState> {
    let k0 = grid.k0();
    match kind {
        InitKind::TaylorGreen => {
            let omega = PhysicalField::from_fn(grid, |x, y| -2.0 * k0 * k0 * (k0 * x).sin() * (k0 * y).sin());
            let theta = PhysicalField::from_fn(grid, |x, y| {
                0.5 * (k0 * x).cos() * (k0 * y).sin() + 0.25 * (2.0 * k0 * y).cos()
            });
            SimState::from_spectral(&theta.to_spectral()?, &omega.to_spectral()?, 0.0)
        }
        InitKind::GaussianBumps => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = bumps(grid, &mut rng, 3);
            let omega = bumps(grid, &mut rng, 3);
            SimState::from_spectral(&theta.to_spectral()?, &omega.to_spectral()?, 0.0)
        }
        InitKind::RandomBand { k_min, k_max } => {
            if !(k_min >= 0.0 && k_max >= k_min) {
                return Err(invalid("k_max", "need 0 <= k_min <= k_max"));
            }
            if k_max > grid.dealias_cutoff() {
                return Err(invalid("k_max", "band exceeds the dealias cutoff"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = random_band(grid, &mut rng, k_min, k_max)?;
            let omega = random_band(grid, &mut rng, k_min, k_max)?;
            SimState::from_spectral(&theta, &omega, 0.0)
        }
    }
}

/// `max |∇f|` on a four times finer grid.
pub fn lipschitz_constant(f: &SpectralField) -> Result<f64> {
    Ok(grad_magnitude(&upsample(f, 4)?)?.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridSpec {
        GridSpec::periodic(n).unwrap()
    }

    fn state(g: GridSpec, th: impl Fn(f64, f64) -> f64, om: impl Fn(f64, f64) -> f64) -> SimState {
        SimState::from_physical(PhysicalField::from_fn(g, th), PhysicalField::from_fn(g, om), 0.0).unwrap()
    }

    fn params(nu: f64, kappa: f64, alpha: f64) -> FlowParams {
        FlowParams::new(nu, kappa, alpha, 1.0 - alpha).unwrap()
    }

    #[test]
    fn rhs_pure_decay() {
        let g = grid(32);
        let s = state(g, |_, _| 0.0, |x, _| x.sin());
        let p = params(1.0, 1.0, 0.7);
        let r = rhs(&s, &p).unwrap();
        let want = fractional_laplacian(s.omega_hat(), 0.7).scale(-1.0);
        assert!((&r.omega_total() - &want).max_abs_coeff() < 1e-15);
        assert!(r.theta_total().max_abs_coeff() < 1e-15);
    }

    #[test]
    fn rhs_constant_and_x2_modes() {
        let g = grid(32);
        let p = params(1.0, 1.0, 0.7);
        let r = rhs(&state(g, |_, _| 2.0, |_, _| 0.0), &p).unwrap();
        assert!(r.theta_total().max_abs_coeff() == 0.0 && r.omega_total().max_abs_coeff() == 0.0);
        let s = state(g, |_, y| y.sin(), |_, _| 0.0);
        let r = rhs(&s, &p).unwrap();
        assert!(r.omega_total().max_abs_coeff() == 0.0);
        assert!((&r.theta_total() + s.theta_hat()).max_abs_coeff() < 1e-16);
    }

    #[test]
    fn exact_linear_decay() {
        let g = grid(32);
        let p = params(1.0, 1.0, 0.6);
        let mut s = state(g, |_, _| 0.0, |x, _| x.sin());
        for _ in 0..20 {
            s = step_fixed(&s, &p, 0.05).unwrap();
        }
        let want = PhysicalField::from_fn(g, |x, _| (-1.0f64).exp() * x.sin());
        assert!((s.omega() - &want).max_abs() < 1e-12);
        assert!((s.t() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inviscid_buoyancy_feeds_vorticity() {
        let g = grid(32);
        let p = FlowParams::new(0.0, 0.0, 0.5, 0.5).unwrap();
        let s = state(g, |x, _| x.sin(), |_, _| 0.0);
        let dt = 0.01;
        let next = step_fixed(&s, &p, dt).unwrap();
        assert!((next.theta() - s.theta()).max_abs() < 1e-15);
        let want = PhysicalField::from_fn(g, |x, _| dt * x.cos());
        assert!((next.omega() - &want).max_abs() < 1e-15);
    }

    #[test]
    fn second_order_in_time() {
        let g = grid(32);
        let p = params(0.5, 0.5, 0.85);
        let s0 = initial_data(InitKind::RandomBand { k_min: 1.0, k_max: 4.0 }, 3, g).unwrap();
        let run = |dt: f64, steps: usize| {
            let mut s = s0.clone();
            for _ in 0..steps {
                s = step_fixed(&s, &p, dt).unwrap();
            }
            s
        };
        let reference = run(0.2 / 256.0, 256);
        let errs: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&m| (run(0.2 / m as f64, m).theta() - reference.theta()).max_abs())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn compute_g_cases() {
        let g = grid(16);
        let s = state(g, |_, _| 0.0, |x, y| x.sin() * y.cos());
        assert!((&compute_g(&s, 0.9).unwrap() - s.omega()).max_abs() < 1e-15);
        let s = state(g, |x, _| x.sin(), |x, _| x.sin() + x.cos());
        let want = PhysicalField::from_fn(g, |x, _| x.sin());
        assert!((&compute_g(&s, 0.9).unwrap() - &want).max_abs() < 1e-14);
        let th = state(g, |x, y| (2.0 * x).sin() + y.cos(), |_, _| 0.0);
        let om = riesz_alpha(th.theta_hat(), 0.8);
        let s = SimState::from_spectral(th.theta_hat(), &om, 0.0).unwrap();
        assert!(compute_g(&s, 0.8).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn residual_trivial_and_spacing() {
        let g = grid(16);
        let p = params(1.0, 1.0, 0.9);
        let z = SimState::zeros(g);
        let mut z1 = z.clone();
        z1.t = 0.1;
        let mut z2 = z.clone();
        z2.t = 0.2;
        assert_eq!(g_equation_residual([&z, &z1, &z2], &p).unwrap(), 0.0);
        z2.t = 0.25;
        assert!(matches!(
            g_equation_residual([&z, &z1, &z2], &p),
            Err(Error::NonUniformSpacing)
        ));
    }

    #[test]
    fn initial_data_properties() {
        let g = grid(32);
        let a = initial_data(InitKind::GaussianBumps, 0, g).unwrap();
        let b = initial_data(InitKind::GaussianBumps, 0, g).unwrap();
        assert_eq!(a, b);
        let s = initial_data(InitKind::RandomBand { k_min: 2.0, k_max: 5.0 }, 1, g).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let (m1, m2) = (g.mode(i) as f64, g.mode(j) as f64);
                let r = m1.hypot(m2);
                if s.theta_hat().coeffs()[i * 32 + j].norm() > 1e-14 {
                    assert!((2.0..=5.0).contains(&r));
                }
            }
        }
        let tg = initial_norms(&initial_data(InitKind::TaylorGreen, 0, g).unwrap()).unwrap();
        let l = g.side_length();
        assert!((tg.u_l2 - (l * l / 2.0).sqrt()).abs() < 1e-12 * tg.u_l2);
        assert!("vortex".parse::<InitKind>().is_err());
    }

    #[test]
    fn mean_of_theta_conserved() {
        let g = grid(32);
        let p = params(1.0, 1.0, 0.9);
        let mut s = initial_data(InitKind::GaussianBumps, 4, g).unwrap();
        let m0 = s.theta_hat().mean();
        let cfg = StepperConfig::new(0.01, 0.5, 0.3).unwrap();
        while !cfg.reached(s.t()) {
            s = step(&s, &p, &cfg).unwrap();
        }
        assert!((s.theta_hat().mean() - m0).norm() < 1e-12);
        assert!(s.omega_hat().mean().norm() == 0.0);
    }

    #[test]
    fn final_step_absorbs_rounding() {
        let s = SimState::zeros(grid(16));
        let cfg = StepperConfig::new(0.01, 0.5, 0.1).unwrap();
        let short = SimState::from_spectral(s.theta_hat(), s.omega_hat(), 0.09999999999999999).unwrap();
        assert!(cfg.reached(short.t()));
        let near = SimState::from_spectral(s.theta_hat(), s.omega_hat(), 0.1 - 0.01 - 1e-15).unwrap();
        assert_eq!(choose_dt(&near, &cfg).unwrap(), 0.1 - near.t());
    }

    #[test]
    fn rebuild_from_values_is_bitwise() {
        let g = grid(32);
        let p = params(1.0, 1.0, 0.9);
        let s = step_fixed(&initial_data(InitKind::GaussianBumps, 2, g).unwrap(), &p, 0.01).unwrap();
        let back = SimState::from_physical(s.theta().clone(), s.omega().clone(), s.t()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn dt_rules() {
        let g = grid(32);
        let s = state(g, |_, _| 0.0, |_, _| 0.0);
        let cfg = StepperConfig::new(1.0, 0.5, 10.0).unwrap();
        assert!((choose_dt(&s, &cfg).unwrap() - 0.5 * g.dx()).abs() < 1e-16);
        let cfg = StepperConfig::new(1e-3, 0.5, 10.0).unwrap();
        assert_eq!(choose_dt(&s, &cfg).unwrap(), 1e-3);
        assert!(StepperConfig::new(1e-3, 1.5, 1.0).is_err());
        assert!(matches!(
            step_fixed(&s, &params(1.0, 1.0, 0.5), 1e-13),
            Err(Error::TimeStepUnderflow { .. })
        ));
    }

    #[test]
    fn blowup_detected() {
        let g = grid(16);
        let s = state(g, |_, _| 0.0, |x, _| 2e8 * x.sin());
        let p = FlowParams::new(0.0, 0.0, 0.5, 0.5).unwrap();
        assert!(matches!(step_fixed(&s, &p, 1e-6), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn lipschitz_of_sine() {
        let g = grid(16);
        let f = PhysicalField::from_fn(g, |x, y| (x + 0.3).sin() * 2.0 + 0.0 * y)
            .to_spectral()
            .unwrap();
        assert!((lipschitz_constant(&f).unwrap() - 2.0).abs() < 1e-3);
        let _ = PI;
    }
}
