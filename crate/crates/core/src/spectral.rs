//! Fourier multipliers, differentiation, dealiasing and norms.
//!
//! Operators with a negative power of `|k|` send the mean mode to zero. Odd
//! factors `i k_d` vanish on the unpaired Nyquist mode of axis `d`, so real
//! fields stay real.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::GridSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A two-component field.
pub type Vector<T> = [T; 2];

/// `i k_d` at storage index `(i, j)`, zero on the Nyquist mode of axis `d`.
pub(crate) fn ik(g: &GridSpec, i: usize, j: usize, d: usize) -> Complex64 {
    let idx = if d == 0 { i } else { j };
    let m = g.mode(idx);
    if g.is_nyquist(m) {
        ZERO
    } else {
        I * (g.k0() * m as f64)
    }
}

/// `|k|^gamma`, with the mean mode mapped to 1 for `gamma = 0` and to 0 otherwise.
pub(crate) fn kpow(g: &GridSpec, i: usize, j: usize, gamma: f64) -> f64 {
    if i == 0 && j == 0 {
        return if gamma == 0.0 { 1.0 } else { 0.0 };
    }
    g.kmag(i, j).powf(gamma)
}

/// `Λ^gamma`: multiplier `|k|^gamma`.
pub fn fractional_laplacian(f: &SpectralField, gamma: f64) -> SpectralField {
    let g = *f.grid();
    f.map_indexed(|i, j| Complex64::new(kpow(&g, i, j, gamma), 0.0))
}

/// `R_alpha = Λ^{-alpha} ∂_1`: multiplier `i k_1 |k|^{-alpha}`.
pub fn riesz_alpha(f: &SpectralField, alpha: f64) -> SpectralField {
    let g = *f.grid();
    f.map_indexed(|i, j| ik(&g, i, j, 0) * kpow(&g, i, j, -alpha))
}

/// Velocity `u = ∇⊥Δ^{-1}ω` with `∇⊥ = (-∂_2, ∂_1)`.
pub fn biot_savart(omega: &SpectralField) -> Vector<SpectralField> {
    let g = *omega.grid();
    [
        omega.map_indexed(|i, j| ik(&g, i, j, 1) * kpow(&g, i, j, -2.0)),
        omega.map_indexed(|i, j| -ik(&g, i, j, 0) * kpow(&g, i, j, -2.0)),
    ]
}

/// Velocity `v = -∇⊥Λ^{β-3}∂_1θ`, the temperature-driven part of `u` on the
/// critical line.
pub fn v_from_theta(theta: &SpectralField, beta: f64) -> Vector<SpectralField> {
    let g = *theta.grid();
    let gfield = theta.map_indexed(|i, j| ik(&g, i, j, 0) * kpow(&g, i, j, beta - 3.0));
    [
        gfield.map_indexed(|i, j| ik(&g, i, j, 1)),
        gfield.map_indexed(|i, j| -ik(&g, i, j, 0)),
    ]
}

/// Zeroes every mode with some `|m_d|` above the dealias cutoff.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    let cut = g.dealias_cutoff();
    f.map_indexed(|i, j| {
        let keep = (g.mode(i).abs() as f64) <= cut && (g.mode(j).abs() as f64) <= cut;
        if keep {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

pub fn dealias_in_place(f: &mut SpectralField) {
    let g = *f.grid();
    let n = g.n();
    let cut = g.dealias_cutoff();
    let coeffs = f.coeffs_mut();
    for i in 0..n {
        let keep_i = (g.mode(i).abs() as f64) <= cut;
        for j in 0..n {
            if !(keep_i && (g.mode(j).abs() as f64) <= cut) {
                coeffs[i * n + j] = ZERO;
            }
        }
    }
}

/// `∂_d f`.
pub fn partial(f: &SpectralField, d: usize) -> SpectralField {
    let g = *f.grid();
    f.map_indexed(|i, j| ik(&g, i, j, d))
}

pub fn grad(f: &SpectralField) -> Vector<SpectralField> {
    [partial(f, 0), partial(f, 1)]
}

/// `∇⊥f = (-∂_2 f, ∂_1 f)`.
pub fn perp_grad(f: &SpectralField) -> Vector<SpectralField> {
    [-&partial(f, 1), partial(f, 0)]
}

/// `∂_1 u_1 + ∂_2 u_2`.
pub fn divergence(u: &Vector<SpectralField>) -> SpectralField {
    &partial(&u[0], 0) + &partial(&u[1], 1)
}

/// `∂_1 u_2 - ∂_2 u_1`.
pub fn curl(u: &Vector<SpectralField>) -> SpectralField {
    &partial(&u[1], 0) - &partial(&u[0], 1)
}

/// `‖f‖_{L^p}` by the uniform rule with weight `(L/n)²`; `p = ∞` is the max.
pub fn lp_norm(f: &PhysicalField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", format!("{p} < 1")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let w = f.grid().cell_area();
    if p == 2.0 {
        return Ok((w * f.values().iter().map(|v| v * v).sum::<f64>()).sqrt());
    }
    let m = f.max_abs();
    if m == 0.0 {
        return Ok(0.0);
    }
    // Scaling by the max keeps large p from overflowing.
    let s: f64 = f.values().iter().map(|v| (v.abs() / m).powf(p)).sum();
    Ok(m * (w * s).powf(1.0 / p))
}

/// `‖f‖_{L²}` from the coefficients.
pub fn l2_norm_spectral(f: &SpectralField) -> f64 {
    f.l2_norm_sq().sqrt()
}

/// Spectral interpolation onto a finer grid with `factor` times the points.
pub fn upsample(f: &SpectralField, factor: usize) -> Result<SpectralField> {
    let g = *f.grid();
    let fine = g.with_n(g.n() * factor)?;
    let mut out = SpectralField::zeros(fine);
    let half = (g.n() / 2) as i64;
    for m1 in -half + 1..half {
        for m2 in -half + 1..half {
            out.set_mode(m1, m2, f.mode(m1, m2));
        }
    }
    Ok(out)
}

/// Component-wise transform of a vector field.
pub fn to_physical_vec(u: &Vector<SpectralField>) -> Result<Vector<PhysicalField>> {
    Ok([u[0].to_physical()?, u[1].to_physical()?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g16() -> GridSpec {
        GridSpec::periodic(16).unwrap()
    }

    fn phys(g: GridSpec, f: impl Fn(f64, f64) -> f64) -> SpectralField {
        PhysicalField::from_fn(g, f).to_spectral().unwrap()
    }

    fn max_diff(a: &SpectralField, b: &PhysicalField) -> f64 {
        (&a.to_physical().unwrap() - b).max_abs()
    }

    fn random(g: GridSpec, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PhysicalField::new(g, v).unwrap().to_spectral().unwrap()
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = g16();
        let a = 0.7;
        let out = fractional_laplacian(&phys(g, |_, y| (2.0 * y).cos()), a);
        let want = PhysicalField::from_fn(g, |_, y| 2f64.powf(a) * (2.0 * y).cos());
        assert!(max_diff(&out, &want) < 1e-14);
    }

    #[test]
    fn laplacian_zero_mode() {
        let g = g16();
        let c = phys(g, |_, _| 3.0);
        assert!(fractional_laplacian(&c, 0.5).max_abs_coeff() == 0.0);
        assert!(fractional_laplacian(&c, -0.5).max_abs_coeff() == 0.0);
        assert_eq!(fractional_laplacian(&c, 0.0), c);
    }

    #[test]
    fn laplacian_negative_order() {
        let g = g16();
        let out = fractional_laplacian(&phys(g, |x, y| x.sin() + (4.0 * y).sin()), -0.5);
        let want = PhysicalField::from_fn(g, |x, y| x.sin() + 0.5 * (4.0 * y).sin());
        assert!(max_diff(&out, &want) < 1e-14);
    }

    #[test]
    fn riesz_single_modes() {
        let g = g16();
        let out = riesz_alpha(&phys(g, |x, _| x.sin()), 0.8);
        assert!(max_diff(&out, &PhysicalField::from_fn(g, |x, _| x.cos())) < 1e-14);
        let out = riesz_alpha(&phys(g, |_, y| y.sin()), 0.8);
        assert!(out.to_physical().unwrap().max_abs() < 1e-15);
        let out = riesz_alpha(&phys(g, |x, _| (2.0 * x).sin()), 0.5);
        let want = PhysicalField::from_fn(g, |x, _| 2f64.sqrt() * (2.0 * x).cos());
        assert!(max_diff(&out, &want) < 1e-14);
    }

    #[test]
    fn biot_savart_single_mode() {
        let g = g16();
        let u = biot_savart(&phys(g, |x, _| x.sin()));
        assert!(u[0].to_physical().unwrap().max_abs() < 1e-15);
        assert!(max_diff(&u[1], &PhysicalField::from_fn(g, |x, _| -x.cos())) < 1e-14);
        let z = biot_savart(&SpectralField::zeros(g));
        assert_eq!(z[0].max_abs_coeff() + z[1].max_abs_coeff(), 0.0);
    }

    #[test]
    fn biot_savart_inverts_curl() {
        let g = GridSpec::periodic(32).unwrap();
        let w = random(g, 5);
        let u = biot_savart(&w);
        assert!(divergence(&u).max_abs_coeff() < 1e-15);
        // Curl returns ω minus its mean and its Nyquist rows.
        let back = curl(&u);
        let n = g.n();
        for i in 0..n {
            for j in 0..n {
                let (mi, mj) = (g.mode(i), g.mode(j));
                if (i, j) == (0, 0) || g.is_nyquist(mi) || g.is_nyquist(mj) {
                    continue;
                }
                let d = back.coeffs()[i * n + j] - w.coeffs()[i * n + j];
                assert!(d.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn v_from_theta_single_mode() {
        let g = g16();
        let v = v_from_theta(&phys(g, |x, _| x.sin()), 0.3);
        assert!(v[0].to_physical().unwrap().max_abs() < 1e-15);
        assert!(max_diff(&v[1], &PhysicalField::from_fn(g, |x, _| x.sin())) < 1e-14);
        let c = v_from_theta(&phys(g, |_, _| 1.0), 0.3);
        assert_eq!(c[0].max_abs_coeff() + c[1].max_abs_coeff(), 0.0);
    }

    #[test]
    fn v_from_theta_matches_composition() {
        let g = GridSpec::periodic(32).unwrap();
        for seed in 0..4 {
            let th = random(g, seed);
            let beta = 0.35;
            let v = v_from_theta(&th, beta);
            let w = biot_savart(&riesz_alpha(&th, 1.0 - beta));
            for d in 0..2 {
                let diff = (&v[d] - &w[d]).max_abs_coeff();
                assert!(diff <= 1e-12 * v[d].max_abs_coeff());
            }
        }
    }

    #[test]
    fn norms() {
        let g = g16();
        let s = PhysicalField::from_fn(g, |x, _| x.sin());
        let want = (2.0 * std::f64::consts::PI.powi(2)).sqrt();
        assert!((lp_norm(&s, 2.0).unwrap() - want).abs() < 1e-13);
        assert_eq!(lp_norm(&PhysicalField::constant(g, 3.0), f64::INFINITY).unwrap(), 3.0);
        assert!(lp_norm(&s, 0.5).is_err());
        let p4 = lp_norm(&s, 4.0).unwrap();
        // ∫ sin⁴ over the torus = 3π²/2.
        assert!((p4 - (1.5 * std::f64::consts::PI.powi(2)).powf(0.25)).abs() < 1e-13);
    }

    #[test]
    fn dealias_cuts_high_mode() {
        let g = g16();
        let mut f = SpectralField::zeros(g);
        f.set_mode(7, 0, Complex64::new(1.0, 0.0));
        f.set_mode(-7, 0, Complex64::new(1.0, 0.0));
        assert_eq!(dealias(&f).max_abs_coeff(), 0.0);
        let mut h = f.clone();
        dealias_in_place(&mut h);
        assert_eq!(h.max_abs_coeff(), 0.0);
        let low = phys(g, |x, y| (5.0 * x).cos() * (5.0 * y).sin());
        assert!((&dealias(&low) - &low).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn upsample_preserves_values() {
        let g = g16();
        let f = phys(g, |x, y| (3.0 * x).sin() + (2.0 * y).cos());
        let fine = upsample(&f, 2).unwrap().to_physical().unwrap();
        for i in 0..16 {
            for j in 0..16 {
                assert!((fine.at(2 * i, 2 * j) - f.to_physical().unwrap().at(i, j)).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn laplacian_semigroup(seed in 0u64..1000, a in -1.5f64..1.5, b in -1.5f64..1.5) {
            let g = GridSpec::periodic(16).unwrap();
            let f = random(g, seed);
            let two = fractional_laplacian(&fractional_laplacian(&f, a), b);
            let one = fractional_laplacian(&f, a + b);
            let mut mean_free = f.clone();
            mean_free.set_mode(0, 0, ZERO);
            let scale = fractional_laplacian(&mean_free, a + b).max_abs_coeff();
            prop_assert!((&two - &one).max_abs_coeff() <= 1e-12 * scale);
        }

        #[test]
        fn operators_commute_with_shifts(seed in 0u64..1000, s1 in -3i64..4, s2 in -3i64..4) {
            let g = GridSpec::periodic(16).unwrap();
            let f = random(g, seed).to_physical().unwrap();
            let fs = f.shifted(s1, s2).to_spectral().unwrap();
            let f = f.to_spectral().unwrap();
            let a = riesz_alpha(&f, 0.6).to_physical().unwrap().shifted(s1, s2);
            let b = riesz_alpha(&fs, 0.6).to_physical().unwrap();
            prop_assert!((&a - &b).max_abs() < 1e-12);
            let va = v_from_theta(&f, 0.4);
            let vb = v_from_theta(&fs, 0.4);
            for d in 0..2 {
                let x = va[d].to_physical().unwrap().shifted(s1, s2);
                let y = vb[d].to_physical().unwrap();
                prop_assert!((&x - &y).max_abs() < 1e-12);
            }
        }

        #[test]
        fn parseval_holds(seed in 0u64..1000) {
            let g = GridSpec::new(16, 1.7, 2.0 / 3.0).unwrap();
            let f = random(g, seed);
            let p = lp_norm(&f.to_physical().unwrap(), 2.0).unwrap();
            prop_assert!((p * p - f.l2_norm_sq()).abs() <= 1e-12 * p * p);
        }
    }
}
