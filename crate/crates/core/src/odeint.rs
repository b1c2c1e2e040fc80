//! Adaptive Dormand–Prince 5(4) integration with cubic Hermite dense output
//! and section-crossing events.
//!
//! States are fixed-size arrays `[f64; D]`. The step size is chosen by a PI
//! controller on the embedded error estimate, measured in the mixed norm
//!
//! ```text
//! err = sqrt( mean_i ( e_i / (atol + rtol * max(|y_i|, |y_new_i|)) )² )
//! ```
//!
//! A step is accepted when `err <= 1`. Every accepted node stores the state and
//! its derivative, so the trajectory can be interpolated anywhere in its span.

use crate::roots;
use crate::OdeError;

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order weights minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;

/// Tolerances and step limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: 1e-4,
            h_min: 1e-14,
            h_max: 0.5,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let bad = |msg: &str| Err(OdeError::InvalidConfig(msg.to_string()));
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return bad("rtol must be positive");
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return bad("atol must be positive");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return bad("step limits must satisfy 0 < h_min <= h_init <= h_max");
        }
        if !self.h_max.is_finite() {
            return bad("h_max must be finite");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        Ok(())
    }
}

/// Accepted integration nodes with their derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    times: Vec<f64>,
    states: Vec<[f64; D]>,
    derivs: Vec<[f64; D]>,
}

impl<const D: usize> Trajectory<D> {
    fn with_start(t0: f64, y0: [f64; D], f0: [f64; D]) -> Self {
        Self {
            times: vec![t0],
            states: vec![y0],
            derivs: vec![f0],
        }
    }

    fn push(&mut self, t: f64, y: [f64; D], f: [f64; D]) {
        self.times.push(t);
        self.states.push(y);
        self.derivs.push(f);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; D]] {
        &self.states
    }

    pub fn derivs(&self) -> &[[f64; D]] {
        &self.derivs
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one node")
    }

    pub fn final_state(&self) -> [f64; D] {
        *self.states.last().expect("trajectory has at least one node")
    }

    /// Number of accepted steps.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Cubic Hermite interpolation between the nodes bracketing `t`.
    pub fn dense_eval(&self, t: f64) -> Result<[f64; D], OdeError> {
        let (t0, t1) = (self.t_start(), self.t_end());
        if !(t >= t0 && t <= t1) {
            return Err(OdeError::OutOfRange { t, t0, t1 });
        }
        // index of the first node with time > t
        let k = self.times.partition_point(|&tk| tk <= t);
        if k == 0 {
            return Ok(self.states[0]);
        }
        let i = k - 1;
        if self.times[i] == t || i + 1 == self.times.len() {
            return Ok(self.states[i]);
        }
        Ok(hermite(
            self.times[i],
            &self.states[i],
            &self.derivs[i],
            self.times[i + 1],
            &self.states[i + 1],
            &self.derivs[i + 1],
            t,
        ))
    }

    /// `n` equally spaced samples over the whole span, endpoints included.
    pub fn sample_uniform(&self, n: usize) -> Vec<(f64, [f64; D])> {
        let (t0, t1) = (self.t_start(), self.t_end());
        if n < 2 || t1 == t0 {
            return vec![(t0, self.states[0])];
        }
        (0..n)
            .map(|i| {
                let t = if i + 1 == n {
                    t1
                } else {
                    t0 + (t1 - t0) * i as f64 / (n - 1) as f64
                };
                (t, self.dense_eval(t).expect("sample lies in span"))
            })
            .collect()
    }
}

fn hermite<const D: usize>(
    t0: f64,
    y0: &[f64; D],
    f0: &[f64; D],
    t1: f64,
    y1: &[f64; D],
    f1: &[f64; D],
    t: f64,
) -> [f64; D] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

/// Direction filter for an event guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Guard goes from negative to nonnegative.
    Rising,
    /// Guard goes from positive to nonpositive.
    Falling,
    Both,
}

impl Direction {
    fn matches(self, g_prev: f64, g_next: f64) -> bool {
        let rising = g_prev < 0.0 && g_next >= 0.0;
        let falling = g_prev > 0.0 && g_next <= 0.0;
        match self {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Both => rising || falling,
        }
    }
}

/// A scalar guard `g(t, y)` whose zero crossings are reported.
pub struct EventSpec<'a, const D: usize> {
    pub guard: Box<dyn Fn(f64, &[f64; D]) -> f64 + 'a>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a, const D: usize> EventSpec<'a, D> {
    pub fn new(guard: impl Fn(f64, &[f64; D]) -> f64 + 'a, direction: Direction, terminal: bool) -> Self {
        Self {
            guard: Box::new(guard),
            direction,
            terminal,
        }
    }
}

/// A located zero of an event guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<const D: usize> {
    pub event: usize,
    pub t: f64,
    pub state: [f64; D],
    /// Final bracket of the crossing time on the dense interpolant.
    pub bracket: (f64, f64),
}

/// Integrates `y' = rhs(t, y)` from `t_span.0` to `t_span.1`.
pub fn integrate<const D: usize, F>(
    rhs: F,
    y0: [f64; D],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory<D>, OdeError>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    integrate_with_events(rhs, y0, t_span, cfg, &[]).map(|(traj, _)| traj)
}

/// Integrates like [`integrate`], locating guard crossings along the way.
///
/// Crossings are found on each accepted step by a sign test at the nodes and
/// refined by Brent's method on the Hermite interpolant. Integration stops at
/// the first crossing of a terminal event; the trajectory then ends at the
/// crossing.
pub fn integrate_with_events<const D: usize, F>(
    mut rhs: F,
    y0: [f64; D],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    events: &[EventSpec<'_, D>],
) -> Result<(Trajectory<D>, Vec<Crossing<D>>), OdeError>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(OdeError::InvalidSpan { t0, t1 });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFiniteInitial);
    }

    let f0 = rhs(t0, &y0);
    let mut traj = Trajectory::with_start(t0, y0, f0);
    let mut crossings = Vec::new();
    if t1 == t0 {
        return Ok((traj, crossings));
    }

    let span = t1 - t0;
    let event_xtol = 4.0 * f64::EPSILON * t1.abs().max(t0.abs()).max(span);
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.guard)(t0, &y0)).collect();

    let mut t = t0;
    let mut y = y0;
    let mut f = f0;
    let mut h = cfg.h_init.min(span);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;
    let mut attempts = 0usize;

    while t < t1 {
        attempts += 1;
        if attempts > cfg.max_steps {
            return Err(OdeError::StepBudgetExceeded {
                t,
                max_steps: cfg.max_steps,
            });
        }
        let last = t + h >= t1;
        let h_try = if last { t1 - t } else { h };
        let (y_new, f_new, err) = dp_step(&mut rhs, t, &y, &f, h_try, cfg);

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h = h_try * MIN_FACTOR;
            rejected_last = true;
            if h < cfg.h_min {
                return Err(OdeError::NonFiniteState { t });
            }
            continue;
        }

        if err > 1.0 {
            let factor = (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
            h = h_try * factor;
            rejected_last = true;
            if h < cfg.h_min {
                return Err(OdeError::StepUnderflow { t, h });
            }
            continue;
        }

        let t_new = if last { t1 } else { t + h_try };

        // events on [t, t_new]
        let mut step_crossings: Vec<Crossing<D>> = Vec::new();
        for (idx, ev) in events.iter().enumerate() {
            let g_new = (ev.guard)(t_new, &y_new);
            if ev.direction.matches(g_prev[idx], g_new) {
                let guard_at = |s: f64| {
                    let ys = hermite(t, &y, &f, t_new, &y_new, &f_new, s);
                    (ev.guard)(s, &ys)
                };
                let found = roots::brent(guard_at, t, t_new, 0.0, event_xtol, 200);
                let (tc, bracket) = match found {
                    Some(b) => (b.root, (b.lo, b.hi)),
                    None => (t_new, (t_new, t_new)),
                };
                let state = hermite(t, &y, &f, t_new, &y_new, &f_new, tc);
                step_crossings.push(Crossing {
                    event: idx,
                    t: tc,
                    state,
                    bracket,
                });
            }
            g_prev[idx] = g_new;
        }
        step_crossings.sort_by(|a, b| a.t.total_cmp(&b.t));
        if let Some(stop) = step_crossings.iter().position(|c| events[c.event].terminal) {
            step_crossings.truncate(stop + 1);
            let c = step_crossings[stop];
            crossings.extend(step_crossings);
            if c.t > t {
                let fc = rhs(c.t, &c.state);
                traj.push(c.t, c.state, fc);
            }
            return Ok((traj, crossings));
        }
        crossings.extend(step_crossings);

        t = t_new;
        y = y_new;
        f = f_new;
        traj.push(t, y, f);

        let mut factor = SAFETY * err.max(1e-10).powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
        factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
        if rejected_last {
            factor = factor.min(1.0);
        }
        rejected_last = false;
        err_prev = err.max(1e-4);
        if !last {
            h = (h_try * factor).min(cfg.h_max);
        }
    }

    Ok((traj, crossings))
}

fn dp_step<const D: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    h: f64,
    cfg: &IntegratorConfig,
) -> ([f64; D], [f64; D], f64)
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    let stage = |coeffs: &[(f64, &[f64; D])]| -> [f64; D] {
        std::array::from_fn(|i| y[i] + h * coeffs.iter().map(|(a, k)| a * k[i]).sum::<f64>())
    };
    let k2 = rhs(t + C2 * h, &stage(&[(A21, k1)]));
    let k3 = rhs(t + C3 * h, &stage(&[(A31, k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &stage(&[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(
        t + C5 * h,
        &stage(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = rhs(
        t + h,
        &stage(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = stage(&[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y_new);

    let mut sum = 0.0;
    for i in 0..D {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale).powi(2);
    }
    let err = (sum / D as f64).sqrt();
    (y_new, k7, err)
}
