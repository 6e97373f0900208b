//! Run configuration: flat `key = value` lines with `#` comments.
//!
//! Every value is checked before anything touches the file system.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::{FlowParams, GridSpec};
use crate::monitors::resolve_indices;
use crate::solver::{InitKind, StepperConfig};

pub const KEYS: [&str; 21] = [
    "n",
    "L",
    "dealias",
    "nu",
    "kappa",
    "alpha",
    "beta",
    "critical",
    "dt_init",
    "cfl",
    "t_end",
    "init",
    "seed",
    "diag_every",
    "checkpoint_every",
    "out_dir",
    "q",
    "s",
    "oss_c",
    "oss_l",
    "max_steps",
];

/// Raw entries with the line each came from; line 0 marks a command-line
/// override.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
                line,
                key: body.to_string(),
                msg: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_err(line, key, "unknown key"));
            }
            if out.map.contains_key(key) {
                return Err(config_err(line, key, "duplicate key"));
            }
            out.map.insert(key.to_string(), (value.to_string(), line));
        }
        Ok(out)
    }

    /// Applies `key=value` overrides on top of the file contents.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, sets: &[S]) -> Result<()> {
        for s in sets {
            let s = s.as_ref();
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| config_err(0, s, "override must be `key=value`"))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(config_err(0, key, "unknown key"));
            }
            self.map.insert(key.to_string(), (value.trim().to_string(), 0));
        }
        Ok(())
    }

    /// The dealias fraction, needed before a checkpoint can be decoded.
    pub fn dealias(&self) -> Result<f64> {
        self.get_or("dealias", 2.0 / 3.0)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(_, l)| *l)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| config_err(*line, key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

fn config_err(line: usize, key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        msg: msg.into(),
    }
}

/// Attaches the offending key and its line to a downstream validation error,
/// preferring the parameter the error names.
fn at<'a>(e: &'a Entries, fallback: &'a str) -> impl Fn(Error) -> Error + 'a {
    move |err| {
        let key = match &err {
            Error::InvalidParameter { name: "cfl_number", .. } => "cfl",
            Error::InvalidParameter { name, .. } if KEYS.contains(name) => name,
            _ => fallback,
        };
        config_err(e.line_of(key), key, err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub params: FlowParams,
    pub stepper: StepperConfig,
    pub init: InitKind,
    pub seed: u64,
    pub diag_every: usize,
    /// Steps between checkpoints; 0 writes only the final one.
    pub checkpoint_every: usize,
    pub out_dir: PathBuf,
    pub q: f64,
    pub s: f64,
    pub oss_c: f64,
    pub oss_l: f64,
    /// Step limit; for a resumed run it counts the additional steps.
    pub max_steps: Option<usize>,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_entries(&Entries::parse(text)?)
    }

    pub fn from_entries(e: &Entries) -> Result<Self> {
        let n = e.get_or("n", 64usize)?;
        let l = e.get_or("L", 2.0 * std::f64::consts::PI)?;
        let frac = e.get_or("dealias", 2.0 / 3.0)?;
        let grid = GridSpec::new(n, l, frac).map_err(at(e, "n"))?;
        let params = params_from(e, None)?;
        Self::finish(e, grid, params)
    }

    /// Configuration for continuing from a checkpoint: grid and parameters
    /// come from the header. A flow parameter given in the entries must agree
    /// with the header unless it was passed as an override.
    pub fn for_resume(e: &Entries, grid_n: usize, side: f64, header: FlowParams) -> Result<Self> {
        for (key, v) in [("n", grid_n as f64), ("L", side)] {
            if let Some(given) = e.get::<f64>(key)? {
                if given != v {
                    return Err(config_err(e.line_of(key), key, format!("checkpoint has {key} = {v}")));
                }
            }
        }
        let frac = e.get_or("dealias", 2.0 / 3.0)?;
        let grid = GridSpec::new(grid_n, side, frac).map_err(at(e, "dealias"))?;
        let params = params_from(e, Some(header))?;
        for (key, a, b) in [
            ("nu", params.nu, header.nu),
            ("kappa", params.kappa, header.kappa),
            ("alpha", params.alpha, header.alpha),
            ("beta", params.beta, header.beta),
        ] {
            if a != b && e.line_of(key) != 0 {
                return Err(config_err(e.line_of(key), key, format!("checkpoint has {key} = {b}")));
            }
        }
        Self::finish(e, grid, params)
    }

    fn finish(e: &Entries, grid: GridSpec, params: FlowParams) -> Result<Self> {
        let stepper = StepperConfig::new(
            e.get_or("dt_init", 1e-2)?,
            e.get_or("cfl", 0.5)?,
            e.get_or("t_end", 1.0)?,
        )
        .map_err(at(e, "t_end"))?;
        let init: InitKind = match e.get::<String>("init")? {
            None => InitKind::TaylorGreen,
            Some(s) => s.parse().map_err(at(e, "init"))?,
        };
        if let InitKind::RandomBand { k_max, .. } = init {
            if k_max > grid.dealias_cutoff() {
                return Err(config_err(e.line_of("init"), "init", "band exceeds the dealias cutoff"));
            }
        }
        let diag_every = e.get_or("diag_every", 10usize)?;
        if diag_every == 0 {
            return Err(config_err(e.line_of("diag_every"), "diag_every", "must be positive"));
        }
        let (q, s) = resolve_indices(params.alpha, e.get("q")?, e.get("s")?).map_err(|err| {
            let key = if e.contains("q") { "q" } else { "s" };
            config_err(e.line_of(key), key, err.to_string())
        })?;
        let oss_c = e.get_or("oss_c", 1.0f64)?;
        if !(oss_c > 0.0 && oss_c.is_finite()) {
            return Err(config_err(e.line_of("oss_c"), "oss_c", "must be positive"));
        }
        let oss_l = e.get_or("oss_l", grid.side_length() / 16.0)?;
        if !(oss_l > 0.0 && oss_l <= grid.side_length() / 2.0) {
            return Err(config_err(e.line_of("oss_l"), "oss_l", "must lie in (0, L/2]"));
        }
        Ok(Self {
            grid,
            params,
            stepper,
            init,
            seed: e.get_or("seed", 0u64)?,
            diag_every,
            checkpoint_every: e.get_or("checkpoint_every", 0usize)?,
            out_dir: PathBuf::from(e.get_or("out_dir", "out".to_string())?),
            q,
            s,
            oss_c,
            oss_l,
            max_steps: e.get("max_steps")?,
        })
    }
}

/// `beta` defaults to `1 - alpha`; `critical = true` insists on `α + β = 1`.
fn params_from(e: &Entries, base: Option<FlowParams>) -> Result<FlowParams> {
    let nu = e.get_or("nu", base.map_or(1.0, |b| b.nu))?;
    let kappa = e.get_or("kappa", base.map_or(1.0, |b| b.kappa))?;
    let alpha = e.get_or("alpha", base.map_or(0.95, |b| b.alpha))?;
    let beta = match (e.get::<f64>("beta")?, base) {
        (Some(b), _) => b,
        (None, Some(b)) if alpha == b.alpha => b.beta,
        (None, _) => 1.0 - alpha,
    };
    let p = FlowParams::new(nu, kappa, alpha, beta).map_err(at(e, "alpha"))?;
    if e.get_or("critical", false)? {
        p.require_critical()
            .map_err(|err| config_err(e.line_of("critical"), "critical", err.to_string()))?;
    }
    Ok(p)
}
