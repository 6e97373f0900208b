//! Ensembles for the pointwise inequalities and the trajectory margins.

use crate::error::Result;
use crate::field::PhysicalField;
use crate::grid::GridSpec;
use crate::monitors::{
    cordoba_margin, difference_lower_bound_margin, gradient_lower_bound_margin, Convex, DiagnosticsRecord, Power,
    SmoothHinge,
};
use crate::solver::{initial_data, InitKind};

pub const CORDOBA_BETAS: [f64; 4] = [0.3, 0.5, 1.0, 1.5];

/// Relative tolerance of the asserted pointwise inequalities.
pub const POINTWISE_TOL: f64 = 1e-8;

/// Relative tolerance band of the trajectory margins.
pub const MARGIN_TOL: f64 = 1e-6;

/// Width of the smoothed hinge in the test set.
pub const HINGE_EPS: f64 = 0.25;

pub fn convex_set() -> Vec<(&'static str, Box<dyn Convex>)> {
    vec![
        ("x^2", Box::new(Power(2))),
        ("x^4", Box::new(Power(4))),
        ("x^6", Box::new(Power(6))),
        ("hinge", Box::new(SmoothHinge(HINGE_EPS))),
    ]
}

/// Seeded random band-limited temperature fields, peak amplitude 1.
pub fn random_fields(grid: GridSpec, count: usize, seed: u64) -> Result<Vec<PhysicalField>> {
    let k_max = grid.dealias_cutoff().min(8.0);
    (0..count as u64)
        .map(|k| {
            Ok(
                initial_data(InitKind::RandomBand { k_min: 1.0, k_max }, seed + k, grid)?
                    .theta()
                    .clone(),
            )
        })
        .collect()
}

/// One line of a suite report.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub check: &'static str,
    pub source: String,
    pub beta: f64,
    pub function: String,
    pub value: f64,
    /// Asserted rows pass when `value >= bound`; others only report.
    pub bound: Option<f64>,
}

impl SuiteRow {
    pub fn pass(&self) -> bool {
        self.bound.map_or(true, |b| self.value >= b)
    }

    pub const HEADER: &'static str = "check,source,beta,function,value,bound,pass";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:?},{},{}",
            self.check,
            self.source,
            if self.beta.is_nan() {
                String::new()
            } else {
                format!("{:?}", self.beta)
            },
            self.function,
            self.value,
            self.bound.map_or(String::new(), |b| format!("{b:?}")),
            self.pass()
        )
    }
}

/// Normalized minimum `min / scale` of the convexity inequality for each
/// function and exponent in the test sets.
pub fn cordoba_rows(source: &str, f: &PhysicalField) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for beta in CORDOBA_BETAS {
        for (name, gf) in convex_set() {
            let r = cordoba_margin(f, beta, gf.as_ref())?;
            rows.push(SuiteRow {
                check: "cordoba",
                source: source.to_string(),
                beta,
                function: name.to_string(),
                value: normalized(r.min, r.scale),
                bound: Some(-POINTWISE_TOL),
            });
        }
    }
    Ok(rows)
}

fn normalized(min: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        min / scale
    } else {
        min
    }
}

/// Exact parts of the gradient and difference lower bounds (asserted) and
/// their measured constants (reported), for `q = 2` and two shifts.
pub fn lower_bound_rows(source: &str, f: &PhysicalField) -> Result<Vec<SuiteRow>> {
    let n = f.grid().n() as i64;
    let mut rows = Vec::new();
    for beta in CORDOBA_BETAS {
        let r = gradient_lower_bound_margin(f, beta, 2.0)?;
        rows.push(SuiteRow {
            check: "gradient_exact",
            source: source.to_string(),
            beta,
            function: "q=2".into(),
            value: normalized(r.exact_part_min, r.scale),
            bound: Some(-POINTWISE_TOL),
        });
        if let Some(c0) = r.empirical {
            rows.push(SuiteRow {
                check: "gradient_c0",
                source: source.to_string(),
                beta,
                function: "q=2".into(),
                value: c0,
                bound: None,
            });
        }
        for h in [(n / 4, 0), (n / 8, n / 8)] {
            let r = difference_lower_bound_margin(f, h, beta)?;
            let label = format!("h=({};{})", h.0, h.1);
            rows.push(SuiteRow {
                check: "difference_exact",
                source: source.to_string(),
                beta,
                function: label.clone(),
                value: normalized(r.exact_part_min, r.scale),
                bound: Some(-POINTWISE_TOL),
            });
            if let Some(c) = r.empirical {
                rows.push(SuiteRow {
                    check: "difference_c",
                    source: source.to_string(),
                    beta,
                    function: label,
                    value: c,
                    bound: None,
                });
            }
        }
    }
    Ok(rows)
}

/// `f = cos x_1`, `Γ = x²`, `β = 1/2` on the `2π` torus: the minimum is
/// `2^{-1/2}`. The row value is the deviation, asserted within `1e-10`.
pub fn closed_form_row() -> Result<SuiteRow> {
    let grid = GridSpec::periodic(32)?;
    let f = PhysicalField::from_fn(grid, |x, _| x.cos());
    let r = cordoba_margin(&f, 0.5, &Power(2))?;
    Ok(SuiteRow {
        check: "cordoba_closed_form",
        source: "cos(x1)".into(),
        beta: 0.5,
        function: "x^2".into(),
        value: -(r.min - 0.5f64.sqrt()).abs(),
        bound: Some(-1e-10),
    })
}

/// Maximum principle, monotonicity and energy margins along a run, each
/// relative to its tolerance band (a value below -1 is a violation).
pub fn trajectory_rows(source: &str, records: &[DiagnosticsRecord]) -> Vec<SuiteRow> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let mut worst = [f64::INFINITY; 4];
    let band = |norm: f64, t: f64| MARGIN_TOL * norm.max(f64::MIN_POSITIVE) * (1.0 + t);
    for (k, r) in records.iter().enumerate() {
        worst[0] = worst[0].min(r.margin_maxprinciple_l2 / band(first.theta_l2, r.t));
        worst[1] = worst[1].min(r.margin_maxprinciple_linf / band(first.theta_linf, r.t));
        let bound = first.u_l2 + r.t * first.theta_l2;
        worst[2] = worst[2].min(r.margin_energy_linear / band(bound, 0.0));
        if k > 0 {
            let p = &records[k - 1];
            let drop = (p.theta_l2 - r.theta_l2) / band(first.theta_l2, r.t);
            let drop_inf = (p.theta_linf - r.theta_linf) / band(first.theta_linf, r.t);
            worst[3] = worst[3].min(drop.min(drop_inf));
        }
    }
    let names = [
        "maxprinciple_l2",
        "maxprinciple_linf",
        "energy_linear",
        "theta_nonincreasing",
    ];
    names
        .iter()
        .zip(worst)
        .map(|(name, v)| SuiteRow {
            check: name,
            source: source.to_string(),
            beta: f64::NAN,
            function: String::new(),
            value: if v.is_nan() { f64::NEG_INFINITY } else { v.min(1.0) },
            bound: Some(-1.0),
        })
        .collect()
}
