//! Torus discretization and flow parameters.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Uniform collocation grid on the periodic square `[0, L)^2`.
///
/// Point `(i, j)` sits at `x = (i L / n, j L / n)`; arrays are stored
/// row-major with `i` (the `x1` index) as the slow index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    side_length: f64,
    dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(n: usize, side_length: f64, dealias_fraction: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and >= 8")));
        }
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "side length {side_length} must be positive"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {dealias_fraction} must lie in (0, 1]"
            )));
        }
        Ok(Self {
            n,
            side_length,
            dealias_fraction,
        })
    }

    /// `n` points per side on `[0, 2 pi)^2` with the 2/3 rule.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI, 2.0 / 3.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `L / n`.
    pub fn dx(&self) -> f64 {
        self.side_length / self.n as f64
    }

    /// Quadrature weight of one cell, `(L / n)^2`.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    /// `2 pi / L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.side_length
    }

    /// Signed integer wavenumber for storage index `i` (`-n/2 ..= n/2 - 1`).
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index of the signed mode `m`.
    pub fn index_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// True for the unpaired Nyquist mode `-n/2`, where odd multipliers are
    /// set to zero so that real fields stay real.
    pub fn is_nyquist(&self, m: i64) -> bool {
        m == -(self.n as i64) / 2
    }

    /// Physical wavevector `(2 pi / L) m` for storage indices `(i, j)`.
    pub fn wavevector(&self, i: usize, j: usize) -> (f64, f64) {
        let k0 = self.k0();
        (k0 * self.mode(i) as f64, k0 * self.mode(j) as f64)
    }

    pub fn kmag(&self, i: usize, j: usize) -> f64 {
        let (k1, k2) = self.wavevector(i, j);
        k1.hypot(k2)
    }

    /// Largest retained integer mode under the dealias rule.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * (self.n / 2) as f64
    }

    /// Collocation point coordinates.
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx(), j as f64 * self.dx())
    }

    /// Same grid with a different resolution.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.side_length, self.dealias_fraction)
    }
}

/// Dissipation coefficients and orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub nu: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl FlowParams {
    pub fn new(nu: f64, kappa: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { nu, kappa, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    /// Unit coefficients on the critical line `alpha + beta = 1`.
    pub fn critical(alpha: f64) -> Result<Self> {
        Self::new(1.0, 1.0, alpha, 1.0 - alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(invalid("nu", "must be finite and >= 0"));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(invalid("kappa", "must be finite and >= 0"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid("alpha", format!("{} not in (0, 1]", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(invalid("beta", format!("{} not in (0, 1]", self.beta)));
        }
        Ok(())
    }

    /// Checks `alpha + beta = 1` up to the rounding of the sum itself.
    pub fn require_critical(&self) -> Result<()> {
        if (self.alpha + self.beta - 1.0).abs() > 4.0 * f64::EPSILON {
            return Err(invalid(
                "beta",
                format!(
                    "critical flag requires alpha + beta = 1, got {}",
                    self.alpha + self.beta
                ),
            ));
        }
        Ok(())
    }
}
