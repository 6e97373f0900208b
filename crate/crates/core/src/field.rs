//! Collocation and Fourier representations of scalar fields on the torus.
//!
//! Normalization: `coeffs(m) = n^{-2} sum_x f(x) e^{-i k.x}`, which approximates
//! `L^{-2} ∫ e^{-i k.x} f(x) dx`, and `f(x) = sum_m coeffs(m) e^{i k.x}` with
//! `k = (2 pi / L) m`. Parseval then reads `‖f‖²_{L²} = L² sum_m |coeffs(m)|²`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Plans>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

pub(crate) fn plans(n: usize) -> Plans {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry(n)
            .or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
            .clone()
    })
}

/// In-place unnormalized 2D transform of an `n x n` row-major array.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(data, &mut scratch);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        plan.process_with_scratch(&mut col, &mut scratch);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Real samples at the collocation points.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical field"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.point(i, j);
                values.push(f(x1, x2));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Periodic translate: `out(x) = f(x + (s1, s2) dx)`.
    pub fn shifted(&self, s1: i64, s2: i64) -> Self {
        let n = self.grid.n();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            let si = (i as i64 + s1).rem_euclid(n as i64) as usize;
            for j in 0..n {
                let sj = (j as i64 + s2).rem_euclid(n as i64) as usize;
                values[i * n + j] = self.values[si * n + sj];
            }
        }
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn to_spectral(&self) -> Result<SpectralField> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical field"));
        }
        let n = self.grid.n();
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut data, n, false);
        let s = 1.0 / (n * n) as f64;
        for c in &mut data {
            *c *= s;
        }
        Ok(SpectralField {
            grid: self.grid,
            coeffs: data,
        })
    }
}

/// Fourier coefficients of a real field, indexed like [`PhysicalField`] with
/// storage index `i` holding signed mode [`GridSpec::mode`]`(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("spectral field"));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the signed mode `(m1, m2)`.
    pub fn mode(&self, m1: i64, m2: i64) -> Complex64 {
        let g = &self.grid;
        self.coeffs[g.index_of_mode(m1) * g.n() + g.index_of_mode(m2)]
    }

    pub fn set_mode(&mut self, m1: i64, m2: i64, c: Complex64) {
        let idx = self.grid.index_of_mode(m1) * self.grid.n() + self.grid.index_of_mode(m2);
        self.coeffs[idx] = c;
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Multiplies coefficient `(i, j)` by `f(i, j)`.
    pub fn map_indexed(&self, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let n = self.grid.n();
        let mut coeffs = self.coeffs.clone();
        for i in 0..n {
            for j in 0..n {
                coeffs[i * n + j] *= f(i, j);
            }
        }
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `L² sum |c|²`, the squared L² norm of the represented field.
    pub fn l2_norm_sq(&self) -> f64 {
        let l = self.grid.side_length();
        l * l * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Largest violation of `c(-m) = conj(c(m))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mi = (n - i) % n;
            for j in 0..n {
                let mj = (n - j) % n;
                let d = self.coeffs[i * n + j] - self.coeffs[mi * n + mj].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn to_physical(&self) -> Result<PhysicalField> {
        if self.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("spectral field"));
        }
        let n = self.grid.n();
        let mut data = self.coeffs.clone();
        fft2(&mut data, n, true);
        Ok(PhysicalField {
            grid: self.grid,
            values: data.into_iter().map(|c| c.re).collect(),
        })
    }
}

fn zip_coeffs(a: &SpectralField, b: &SpectralField, f: impl Fn(Complex64, Complex64) -> Complex64) -> SpectralField {
    assert_eq!(a.grid, b.grid, "spectral fields on different grids");
    SpectralField {
        grid: a.grid,
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        zip_coeffs(self, rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        zip_coeffs(self, rhs, |a, b| a - b)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

fn zip_values(a: &PhysicalField, b: &PhysicalField, f: impl Fn(f64, f64) -> f64) -> PhysicalField {
    assert_eq!(a.grid, b.grid, "physical fields on different grids");
    PhysicalField {
        grid: a.grid,
        values: a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &PhysicalField {
    type Output = PhysicalField;
    fn add(self, rhs: Self) -> PhysicalField {
        zip_values(self, rhs, |a, b| a + b)
    }
}

impl Sub for &PhysicalField {
    type Output = PhysicalField;
    fn sub(self, rhs: Self) -> PhysicalField {
        zip_values(self, rhs, |a, b| a - b)
    }
}

/// Pointwise product.
impl Mul for &PhysicalField {
    type Output = PhysicalField;
    fn mul(self, rhs: Self) -> PhysicalField {
        zip_values(self, rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &PhysicalField {
    type Output = PhysicalField;
    fn mul(self, rhs: f64) -> PhysicalField {
        self.scale(rhs)
    }
}
