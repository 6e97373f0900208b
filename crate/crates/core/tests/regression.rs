//! Frozen values from the reference run (Taylor-Green, seed 0, n = 128,
//! alpha = 0.95, critical beta, T = 1).

use fracbous::app::trajectory;
use fracbous::config::RunConfig;
use fracbous::monitors::{grad_theta_series, growth_report};

/// `(t, G_l2, G_lq, G_besov, grad_theta_linf)` every 25 steps.
const REFERENCE: [(f64, f64, f64, f64, f64); 5] = [
    (
        0.0,
        5.153049516188203,
        3.5510444562517325,
        3.5510444562517307,
        0.8800739336064318,
    ),
    (
        0.25,
        3.863149649831604,
        2.6627138413487605,
        2.6620701281397734,
        0.8182295919291227,
    ),
    (
        0.5,
        2.906203586125999,
        2.00354453074159,
        2.002607488518536,
        0.732437920032495,
    ),
    (
        0.75,
        2.1875133256152743,
        1.5081011188341769,
        1.50738511942558,
        0.6333993109355345,
    ),
    (
        1.0,
        1.646024588344222,
        1.134648616549141,
        1.1342734552883413,
        0.5321581805363472,
    ),
];

const GRAD_U_TILDE: [f64; 5] = [
    0.8201333024986476,
    0.6167706324613438,
    0.4649865076431172,
    0.34989334163605806,
    0.26283932458693055,
];

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * b.abs().max(1e-300)
}

#[test]
fn reference_run_is_unchanged() {
    let cfg = RunConfig::from_text(
        "n = 128\nalpha = 0.95\ncritical = true\nt_end = 1\ninit = taylor-green\nseed = 0\ndiag_every = 25\n",
    )
    .unwrap();
    let (records, states) = trajectory(&cfg).unwrap();
    assert_eq!(records.len(), REFERENCE.len());
    for (r, want) in records.iter().zip(REFERENCE) {
        assert!((r.t - want.0).abs() < 1e-12, "t = {}", r.t);
        let got = (r.g_l2, r.g_lq, r.g_besov, r.grad_theta_linf);
        assert!(
            close(got.0, want.1) && close(got.1, want.2) && close(got.2, want.3) && close(got.3, want.4),
            "t = {}: {got:?} vs {want:?}",
            r.t
        );
    }
    let grads = grad_theta_series(&states, 0.95).unwrap();
    for (g, want) in grads.iter().zip(GRAD_U_TILDE) {
        assert!(close(g.grad_u_tilde_linf, want), "{g:?}");
    }
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let g: Vec<f64> = records.iter().map(|r| r.g_l2).collect();
    assert!(growth_report(&ts, &g).unwrap().at_most_linear);
}
