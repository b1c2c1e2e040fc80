use fastslow::odeint::*;
use fastslow::OdeError;
use std::f64::consts::{FRAC_PI_2, PI};

fn oscillator(_t: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1], -y[0]]
}

fn decay(_t: f64, y: &[f64; 1]) -> [f64; 1] {
    [-y[0]]
}

#[test]
fn harmonic_oscillator_full_period() {
    let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-10);
    let traj = integrate(oscillator, [1.0, 0.0], (0.0, 2.0 * PI), &cfg).unwrap();
    let y = traj.final_state();
    assert_eq!(traj.t_end(), 2.0 * PI);
    assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
}

#[test]
fn exponential_decay() {
    let cfg = IntegratorConfig::default();
    let traj = integrate(decay, [1.0], (0.0, 1.0), &cfg).unwrap();
    let err = (traj.final_state()[0] - (-1.0f64).exp()).abs();
    assert!(err < 1e-8, "{err}");
    assert!(traj.times().windows(2).all(|w| w[0] < w[1]));
    assert_eq!(traj.times().len(), traj.states().len());
    assert_eq!(traj.times().len(), traj.derivs().len());
}

#[test]
fn zero_span_returns_initial_state() {
    let traj = integrate(decay, [2.0], (1.0, 1.0), &IntegratorConfig::default()).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.final_state(), [2.0]);
}

#[test]
fn rejects_bad_inputs() {
    let cfg = IntegratorConfig::default();
    assert!(matches!(
        integrate(decay, [1.0], (1.0, 0.0), &cfg),
        Err(OdeError::InvalidSpan { .. })
    ));
    assert!(matches!(
        integrate(decay, [f64::NAN], (0.0, 1.0), &cfg),
        Err(OdeError::NonFiniteInitial)
    ));
    let bad = IntegratorConfig {
        h_min: 1.0,
        h_init: 0.1,
        ..cfg
    };
    assert!(matches!(
        integrate(decay, [1.0], (0.0, 1.0), &bad),
        Err(OdeError::InvalidConfig(_))
    ));
}

#[test]
fn step_budget_is_enforced() {
    let cfg = IntegratorConfig {
        max_steps: 5,
        ..IntegratorConfig::default()
    };
    assert!(matches!(
        integrate(oscillator, [1.0, 0.0], (0.0, 100.0), &cfg),
        Err(OdeError::StepBudgetExceeded { max_steps: 5, .. })
    ));
}

#[test]
fn blow_up_is_reported() {
    // y' = y², y(0) = 1 blows up at t = 1
    let cfg = IntegratorConfig::default();
    let res = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], (0.0, 2.0), &cfg);
    assert!(
        matches!(
            res,
            Err(OdeError::StepUnderflow { .. } | OdeError::NonFiniteState { .. })
        ),
        "{res:?}"
    );
}

#[test]
fn stiff_beyond_h_min_underflows() {
    let cfg = IntegratorConfig {
        h_min: 1e-3,
        h_init: 1e-3,
        ..IntegratorConfig::default()
    };
    let res = integrate(|_, y: &[f64; 1]| [-1e6 * (y[0] - 1.0)], [0.0], (0.0, 1.0), &cfg);
    assert!(matches!(res, Err(OdeError::StepUnderflow { .. })), "{res:?}");
}

#[test]
fn falling_event_at_quarter_period() {
    let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-10);
    let events = [EventSpec::new(|_, y: &[f64; 2]| y[0], Direction::Falling, false)];
    let (_, cs) = integrate_with_events(oscillator, [1.0, 0.0], (0.0, 2.0 * PI), &cfg, &events).unwrap();
    assert_eq!(cs.len(), 1);
    assert!((cs[0].t - FRAC_PI_2).abs() < 1e-8, "{}", cs[0].t);
    assert!(cs[0].state[0].abs() <= 1e-10 * (1.0 + cs[0].state[1].abs()));
}

#[test]
fn direction_filter_and_terminal_stop() {
    let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-10);
    let both = [EventSpec::new(|_, y: &[f64; 2]| y[0], Direction::Both, false)];
    let (_, cs) = integrate_with_events(oscillator, [1.0, 0.0], (0.0, 4.0 * PI), &cfg, &both).unwrap();
    assert_eq!(cs.len(), 4);

    let rising = [EventSpec::new(|_, y: &[f64; 2]| y[0], Direction::Rising, true)];
    let (traj, cs) = integrate_with_events(oscillator, [1.0, 0.0], (0.0, 4.0 * PI), &cfg, &rising).unwrap();
    assert_eq!(cs.len(), 1);
    assert!((cs[0].t - 1.5 * PI).abs() < 1e-8);
    assert_eq!(traj.t_end(), cs[0].t);
}

#[test]
fn no_sign_change_no_crossings() {
    let cfg = IntegratorConfig::default();
    let events = [EventSpec::new(|_, y: &[f64; 2]| y[0] + 5.0, Direction::Both, false)];
    let (_, cs) = integrate_with_events(oscillator, [1.0, 0.0], (0.0, 10.0), &cfg, &events).unwrap();
    assert!(cs.is_empty());
}

#[test]
fn event_bracket_is_tight() {
    let cfg = IntegratorConfig::with_tolerances(1e-9, 1e-9);
    let span = 2.0 * PI;
    let events = [EventSpec::new(|_, y: &[f64; 2]| y[1] - 0.3, Direction::Both, false)];
    let (traj, cs) = integrate_with_events(oscillator, [1.0, 0.0], (0.0, span), &cfg, &events).unwrap();
    assert!(!cs.is_empty());
    for c in cs {
        let (lo, hi) = c.bracket;
        assert!(hi - lo <= 1e-12 * span + 1e-15);
        let glo = traj.dense_eval(lo).unwrap()[1] - 0.3;
        let ghi = traj.dense_eval(hi).unwrap()[1] - 0.3;
        assert!(glo * ghi <= 0.0, "{glo} {ghi}");
    }
}

#[test]
fn dense_eval_nodes_and_midpoints() {
    let cfg = IntegratorConfig::default();
    let traj = integrate(decay, [1.0], (0.0, 1.0), &cfg).unwrap();
    for (t, y) in traj.times().iter().zip(traj.states()) {
        assert_eq!(traj.dense_eval(*t).unwrap(), *y);
    }
    for w in traj.times().windows(2) {
        let tm = 0.5 * (w[0] + w[1]);
        let err = (traj.dense_eval(tm).unwrap()[0] - (-tm).exp()).abs();
        assert!(err <= 10.0 * (cfg.atol + cfg.rtol), "t={tm} err={err}");
    }
    assert!(matches!(traj.dense_eval(1.5), Err(OdeError::OutOfRange { .. })));
    assert!(matches!(traj.dense_eval(-0.1), Err(OdeError::OutOfRange { .. })));
}

#[test]
fn dense_output_stays_monotone() {
    let cfg = IntegratorConfig::with_tolerances(1e-6, 1e-8);
    let traj = integrate(decay, [1.0], (0.0, 5.0), &cfg).unwrap();
    // deterministic pseudo-random probe points
    let mut seed = 0x9e37_79b9_7f4a_7c15u64;
    let mut ts: Vec<f64> = (0..100)
        .map(|_| {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            5.0 * (seed >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    ts.sort_by(f64::total_cmp);
    let ys: Vec<f64> = ts.iter().map(|&t| traj.dense_eval(t).unwrap()[0]).collect();
    assert!(ys.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn identical_inputs_identical_output() {
    let cfg = IntegratorConfig::default();
    let a = integrate(oscillator, [1.0, 0.2], (0.0, 30.0), &cfg).unwrap();
    let b = integrate(oscillator, [1.0, 0.2], (0.0, 30.0), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn halving_rtol_does_not_hurt() {
    let mut prev: Option<f64> = None;
    for k in 4..=10 {
        let rtol = 10f64.powi(-k);
        for rt in [rtol, rtol / 2.0] {
            let cfg = IntegratorConfig::with_tolerances(rt, rt * 1e-2);
            let y = integrate(oscillator, [1.0, 0.0], (0.0, 2.0 * PI), &cfg)
                .unwrap()
                .final_state();
            let err = (y[0] - 1.0).hypot(y[1]);
            if let (Some(p), true) = (prev, rt != rtol) {
                assert!(err <= 2.0 * p, "rtol={rt}: {err} vs {p}");
            }
            prev = Some(err);
        }
    }
}
