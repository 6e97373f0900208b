//! The command implementations behind the `fracbous` binary.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::checkpoint;
use crate::config::{Entries, RunConfig};
use crate::error::{Error, Result};
use crate::kernel::{kernel_oracle_report, CALIBRATION_THRESHOLD, SUPPORT_TOLERANCE};
use crate::lp_besov::{besov_band_table, besov_norm, BesovIndex, BlockShape};
use crate::monitors::{CsvWriter, DiagnosticsRecord, Monitor, MonitorConfig};
use crate::oss::delta_star;
use crate::solver::{compute_g_hat, initial_data, initial_norms, step, SimState};
use crate::suite::{self, SuiteRow};

/// Overrides `out_dir`; nothing else is read from the environment.
pub const OUT_DIR_ENV: &str = "FRACBOUS_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_SUITE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    BlowUp { postmortem: PathBuf },
    SuiteFailed { failures: usize },
}

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::BlowUp { .. }) => EXIT_BLOWUP,
        Ok(Outcome::SuiteFailed { .. }) => EXIT_SUITE,
        Err(
            Error::Config { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidGrid(_)
            | Error::IndexConstraint(_)
            | Error::Checkpoint(_),
        ) => EXIT_CONFIG,
        Err(Error::BlowUp { .. }) => EXIT_BLOWUP,
        Err(_) => EXIT_FAILURE,
    }
}

/// Reads a config file (if any), applies `key=value` overrides and then the
/// output directory from the environment.
pub fn load_entries(path: Option<&Path>, sets: &[String]) -> Result<Entries> {
    let mut e = match path {
        Some(p) => Entries::parse(&fs::read_to_string(p).map_err(|err| Error::Config {
            line: 0,
            key: p.display().to_string(),
            msg: err.to_string(),
        })?)?,
        None => Entries::default(),
    };
    e.apply_overrides(sets)?;
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        e.apply_overrides(&[format!("out_dir={dir}")])?;
    }
    Ok(e)
}

/// Time stepping with the monitors attached.
pub struct Runner {
    cfg: RunConfig,
    state: SimState,
    monitor: Monitor,
    steps: usize,
}

impl Runner {
    pub fn start(cfg: &RunConfig) -> Result<Self> {
        Self::from_state(cfg, initial_data(cfg.init, cfg.seed, cfg.grid)?)
    }

    /// Continues from `state`; margins and dissipation integrals are measured
    /// from this state on.
    pub fn from_state(cfg: &RunConfig, state: SimState) -> Result<Self> {
        let init = initial_norms(&state)?;
        let mcfg = MonitorConfig {
            q: cfg.q,
            s: cfg.s,
            oss_l: cfg.oss_l,
        };
        Ok(Self {
            monitor: Monitor::new(mcfg, cfg.params, &state, init),
            cfg: cfg.clone(),
            state,
            steps: 0,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn done(&self) -> bool {
        self.cfg.stepper.reached(self.state.t()) || self.cfg.max_steps.is_some_and(|m| self.steps >= m)
    }

    pub fn step(&mut self) -> Result<()> {
        self.state = step(&self.state, &self.cfg.params, &self.cfg.stepper)?;
        self.monitor.advance(&self.state);
        self.steps += 1;
        Ok(())
    }

    /// A record is due every `diag_every` steps and at the end.
    pub fn record_due(&self) -> bool {
        self.steps % self.cfg.diag_every == 0 || self.done()
    }

    pub fn record(&self) -> Result<DiagnosticsRecord> {
        self.monitor.record(&self.state)
    }

    /// Increment bound `δ*` for the starting state, with constant `oss_c`.
    pub fn oss_target(&self) -> Option<f64> {
        delta_star(
            self.monitor.init_norms().theta_linf,
            self.cfg.params.beta,
            self.cfg.oss_c,
        )
        .ok()
    }
}

/// Records at the diagnostic cadence and the states they were taken from.
pub fn trajectory(cfg: &RunConfig) -> Result<(Vec<DiagnosticsRecord>, Vec<SimState>)> {
    let mut r = Runner::start(cfg)?;
    let mut records = vec![r.record()?];
    let mut states = vec![r.state().clone()];
    while !r.done() {
        r.step()?;
        if r.record_due() {
            records.push(r.record()?);
            states.push(r.state().clone());
        }
    }
    Ok((records, states))
}

fn checkpoint_name(t: f64) -> String {
    format!("checkpoint_t{t:.9}.chk")
}

/// Steps to the end, writing records and checkpoints as they fall due.
fn drive(cfg: &RunConfig, mut runner: Runner, mut csv: CsvWriter<fs::File>, log: &mut dyn Write) -> Result<Outcome> {
    let dir = &cfg.out_dir;
    let mut last = runner.record()?;
    let mut worst_mp = last.margin_maxprinciple_l2.min(last.margin_maxprinciple_linf);
    let mut worst_en = last.margin_energy_linear;
    let mut worst_oss = last.oss_delta_measured;
    while !runner.done() {
        let before = runner.state().clone();
        if let Err(e) = runner.step() {
            if !matches!(e, Error::BlowUp { .. } | Error::TimeStepUnderflow { .. }) {
                return Err(e);
            }
            let path = dir.join("postmortem.txt");
            let good = dir.join("last_good.chk");
            checkpoint::write(&good, &before, &cfg.params)?;
            let mut f = fs::File::create(&path)?;
            writeln!(f, "error: {e}")?;
            writeln!(f, "steps: {}", runner.steps())?;
            writeln!(f, "last_good_checkpoint: {}", good.display())?;
            writeln!(
                f,
                "last_record: {}",
                last.csv_values().map(|v| format!("{v:?}")).join(",")
            )?;
            writeln!(log, "blow-up: {e}; post-mortem at {}", path.display())?;
            return Ok(Outcome::BlowUp { postmortem: path });
        }
        if runner.record_due() {
            last = runner.record()?;
            csv.write(&last)?;
            worst_mp = worst_mp.min(last.margin_maxprinciple_l2.min(last.margin_maxprinciple_linf));
            worst_en = worst_en.min(last.margin_energy_linear);
            worst_oss = worst_oss.max(last.oss_delta_measured);
        }
        if cfg.checkpoint_every > 0 && runner.steps() % cfg.checkpoint_every == 0 {
            checkpoint::write(
                &dir.join(checkpoint_name(runner.state().t())),
                runner.state(),
                &cfg.params,
            )?;
        }
    }
    let final_path = dir.join("final.chk");
    checkpoint::write(&final_path, runner.state(), &cfg.params)?;
    let mut f = fs::File::create(dir.join("summary.txt"))?;
    let oss = match runner.oss_target() {
        Some(d) => format!("oss_delta_target: {d:?}\noss_within_target: {}\n", worst_oss <= d),
        None => String::new(),
    };
    let summary = format!(
        "steps: {}\nt: {:?}\ntheta_l2: {:?}\ntheta_linf: {:?}\nu_l2: {:?}\nG_l2: {:?}\nmin_margin_maxprinciple: {:?}\nmin_margin_energy_linear: {:?}\nmax_oss_delta_measured: {worst_oss:?}\n{oss}final_checkpoint: {}\n",
        runner.steps(),
        last.t,
        last.theta_l2,
        last.theta_linf,
        last.u_l2,
        last.g_l2,
        worst_mp,
        worst_en,
        final_path.display()
    );
    f.write_all(summary.as_bytes())?;
    log.write_all(summary.as_bytes())?;
    Ok(Outcome::Success)
}

pub fn cmd_run(cfg: &RunConfig, log: &mut dyn Write) -> Result<Outcome> {
    let runner = Runner::start(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut csv = CsvWriter::new(fs::File::create(cfg.out_dir.join("diagnostics.csv"))?)?;
    csv.write(&runner.record()?)?;
    drive(cfg, runner, csv, log)
}

/// Continues a checkpointed run. Rows are appended to an existing
/// `diagnostics.csv` in the output directory.
pub fn cmd_resume(chk: &Path, entries: &Entries, log: &mut dyn Write) -> Result<Outcome> {
    let cp = checkpoint::read(chk, entries.dealias()?)?;
    let g = *cp.state.grid();
    let cfg = RunConfig::for_resume(entries, g.n(), g.side_length(), cp.params)?;
    let state = SimState::from_physical(cp.state.theta().clone(), cp.state.omega().clone(), cp.state.t())?;
    let runner = Runner::from_state(&cfg, state)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("diagnostics.csv");
    let csv = if path.exists() {
        CsvWriter::append(OpenOptions::new().append(true).open(&path)?)
    } else {
        let mut w = CsvWriter::new(fs::File::create(&path)?)?;
        w.write(&runner.record()?)?;
        w
    };
    drive(&cfg, runner, csv, log)
}

pub fn cmd_kernel_verify(beta: f64, n: usize, out: &mut dyn Write) -> Result<Outcome> {
    let r = kernel_oracle_report(beta, n)?;
    let pass = r.v_error <= CALIBRATION_THRESHOLD && r.s_error <= 1e-2 && r.support_leak <= SUPPORT_TOLERANCE;
    writeln!(
        out,
        "beta,n,c_beta,calibration_residual,v_error,s_error,support_leak,pass"
    )?;
    writeln!(
        out,
        "{:?},{},{:?},{:?},{:?},{:?},{:?},{}",
        r.beta, r.n, r.c_beta, r.v_error, r.v_error, r.s_error, r.support_leak, pass
    )?;
    Ok(if pass {
        Outcome::Success
    } else {
        Outcome::SuiteFailed { failures: 1 }
    })
}

/// Number of random fields in the pointwise ensembles.
pub const ENSEMBLE_SIZE: usize = 20;
/// Number of trajectory snapshots checked pointwise.
pub const SNAPSHOTS: usize = 5;

/// Every asserted check of the suite for one configuration.
pub fn inequality_suite(cfg: &RunConfig) -> Result<Vec<SuiteRow>> {
    let (records, states) = trajectory(cfg)?;
    let mut rows = vec![suite::closed_form_row()?];
    rows.extend(suite::trajectory_rows("trajectory", &records));
    let ens_grid = cfg.grid.with_n(cfg.grid.n().min(64))?;
    for (k, f) in suite::random_fields(ens_grid, ENSEMBLE_SIZE, cfg.seed)?
        .iter()
        .enumerate()
    {
        let name = format!("random{k}");
        rows.extend(suite::cordoba_rows(&name, f)?);
        rows.extend(suite::lower_bound_rows(&name, f)?);
    }
    for k in 0..SNAPSHOTS {
        let st = &states[k * (states.len() - 1) / (SNAPSHOTS - 1).max(1)];
        let name = format!("snapshot_t{:.6}", st.t());
        rows.extend(suite::cordoba_rows(&name, st.theta())?);
        rows.extend(suite::lower_bound_rows(&name, st.theta())?);
    }
    Ok(rows)
}

pub fn cmd_inequality_suite(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let rows = inequality_suite(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut f = fs::File::create(cfg.out_dir.join("inequality_suite.csv"))?;
    writeln!(f, "{}", SuiteRow::HEADER)?;
    for r in &rows {
        writeln!(f, "{}", r.csv())?;
    }
    let failures: Vec<&SuiteRow> = rows.iter().filter(|r| !r.pass()).collect();
    for r in &failures {
        writeln!(out, "FAIL {}", r.csv())?;
    }
    let asserted = rows.iter().filter(|r| r.bound.is_some()).count();
    writeln!(out, "{} asserted checks, {} failed", asserted, failures.len())?;
    Ok(if failures.is_empty() {
        Outcome::Success
    } else {
        Outcome::SuiteFailed {
            failures: failures.len(),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldChoice {
    Theta,
    Omega,
    G,
}

impl std::str::FromStr for FieldChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theta" => Ok(Self::Theta),
            "omega" => Ok(Self::Omega),
            "G" | "g" => Ok(Self::G),
            _ => Err(format!("unknown field `{s}` (theta, omega, G)")),
        }
    }
}

/// Per-band table `j, 2^{js}‖Δ_j f‖_{L^p}` of a checkpointed field, then the
/// norm.
pub fn cmd_besov(chk: &Path, field: FieldChoice, s: f64, p: f64, r: f64, out: &mut dyn Write) -> Result<Outcome> {
    let cp = checkpoint::read(chk, 2.0 / 3.0)?;
    let hat = match field {
        FieldChoice::Theta => cp.state.theta_hat().clone(),
        FieldChoice::Omega => cp.state.omega_hat().clone(),
        FieldChoice::G => compute_g_hat(&cp.state, cp.params.alpha),
    };
    let idx = BesovIndex::new(s, p, r);
    let table = besov_band_table(&hat, &idx, BlockShape::Sharp)?;
    writeln!(out, "j,term")?;
    for (j, term) in &table {
        writeln!(out, "{j},{term:?}")?;
    }
    writeln!(out, "norm,{:?}", besov_norm(&hat, &idx)?)?;
    Ok(Outcome::Success)
}
