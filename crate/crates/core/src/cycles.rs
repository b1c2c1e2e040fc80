//! Attracting limit cycles of the co-moving systems and rate sweeps.
//!
//! A cycle is located as a fixed point of the return map to the half-line
//! section `{x1 = x1*, dx1/dt > 0}` through the equilibrium. Points on the
//! section are parameterized by their offset `a = w - w* > 0` above the
//! equilibrium, and the return map `P(a)` is evaluated by integrating one
//! revolution in coordinates centred on the equilibrium.
//!
//! Strongly contracting cycles (relaxation oscillations) converge under plain
//! iteration of `P` in a handful of returns. Close to the Hopf point the map is
//! nearly neutral, so instead the sign change of `g(a) = P(a) - a` is bracketed
//! (`g > 0` inside the cycle where the unstable equilibrium pushes outward,
//! `g < 0` outside) and the root is polished with Brent's method. Either way
//! the cycle is declared converged when two successive section states agree to
//! within `return_tol`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::analysis::{self, EquilibriumReport};
use crate::models::{from_comoving, CoMovingState, Family, FullState, Model};
use crate::odeint::{self, Direction, EventSpec, IntegratorConfig};
use crate::roots;
use crate::CycleError;

/// Settings for [`find_limit_cycle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    /// Time integrated from the perturbed equilibrium before returns are
    /// collected.
    pub transient_time: f64,
    /// Budget of return-map evaluations.
    pub max_returns: usize,
    /// Successive section states closer than this count as converged.
    pub return_tol: f64,
    /// Initial offset in `x1` from the equilibrium.
    pub perturbation: f64,
    /// Minimum number of samples over one period of the converged cycle.
    pub samples: usize,
    /// Give up on a single revolution after this much time.
    pub max_return_time: f64,
    pub integrator: IntegratorConfig,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            transient_time: 50.0,
            max_returns: 200,
            return_tol: 1e-9,
            perturbation: 1e-4,
            samples: 400,
            max_return_time: 200.0,
            integrator: IntegratorConfig::with_tolerances(1e-10, 1e-12),
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<(), CycleError> {
        let bad = |m: &str| Err(CycleError::InvalidConfig(m.to_string()));
        if !(self.transient_time >= 0.0 && self.transient_time.is_finite()) {
            return bad("transient_time must be finite and nonnegative");
        }
        if self.max_returns < 3 {
            return bad("max_returns must be at least 3");
        }
        if !(self.return_tol > 0.0) {
            return bad("return_tol must be positive");
        }
        if !(self.perturbation > 0.0 && self.perturbation.is_finite()) {
            return bad("perturbation must be positive");
        }
        if self.samples < 2 {
            return bad("samples must be at least 2");
        }
        if !(self.max_return_time > 0.0 && self.max_return_time.is_finite()) {
            return bad("max_return_time must be positive");
        }
        self.integrator.validate()?;
        Ok(())
    }
}

/// A periodic orbit of the co-moving system.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycleResult {
    pub r: f64,
    pub period: f64,
    /// Samples over one period starting on the section; `sample_times` are
    /// measured from the first sample.
    pub samples: Vec<CoMovingState>,
    pub sample_times: Vec<f64>,
    /// Largest Euclidean distance of a sample from [`qse_comoving`].
    pub max_distance_from_qse: f64,
    /// Largest Euclidean distance of a sample from the co-moving equilibrium.
    pub max_distance_from_equilibrium: f64,
    /// Half of the peak-to-peak range of `x1` over the cycle.
    pub amplitude_x1: f64,
    pub x1_min: f64,
    pub x1_max: f64,
    /// Offset `w - w*` of the section point.
    pub section_offset: f64,
    pub equilibrium: CoMovingState,
    pub converged: bool,
    pub returns_used: usize,
}

/// The equilibrium is attracting at this rate; the state tracks it without
/// cycling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableState {
    pub r: f64,
    pub equilibrium: CoMovingState,
    /// Steady lag of the tracked equilibrium behind the QSE.
    pub distance_from_qse: f64,
}

impl StableState {
    /// The equilibrium viewed as a constant "cycle" of the given period.
    pub fn as_constant_cycle(&self, period: f64) -> LimitCycleResult {
        LimitCycleResult {
            r: self.r,
            period,
            samples: vec![self.equilibrium; 2],
            sample_times: vec![0.0, period],
            max_distance_from_qse: self.distance_from_qse,
            max_distance_from_equilibrium: 0.0,
            amplitude_x1: 0.0,
            x1_min: self.equilibrium.x1,
            x1_max: self.equilibrium.x1,
            section_offset: 0.0,
            equilibrium: self.equilibrium,
            converged: true,
            returns_used: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CycleOutcome {
    Stable(StableState),
    Cycle(LimitCycleResult),
}

/// Row status as reported in sweep tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Stable,
    Converged,
    NotConverged,
    Failed,
}

impl RowStatus {
    pub fn label(self) -> &'static str {
        match self {
            RowStatus::Stable => "stable",
            RowStatus::Converged => "true",
            RowStatus::NotConverged | RowStatus::Failed => "false",
        }
    }
}

impl CycleOutcome {
    pub fn r(&self) -> f64 {
        match self {
            CycleOutcome::Stable(s) => s.r,
            CycleOutcome::Cycle(c) => c.r,
        }
    }

    /// Largest distance from the QSE: the steady lag for a stable
    /// equilibrium, the farthest cycle sample otherwise.
    pub fn max_distance(&self) -> f64 {
        match self {
            CycleOutcome::Stable(s) => s.distance_from_qse,
            CycleOutcome::Cycle(c) => c.max_distance_from_qse,
        }
    }

    pub fn max_distance_from_equilibrium(&self) -> f64 {
        match self {
            CycleOutcome::Stable(_) => 0.0,
            CycleOutcome::Cycle(c) => c.max_distance_from_equilibrium,
        }
    }

    pub fn amplitude_x1(&self) -> f64 {
        match self {
            CycleOutcome::Stable(_) => 0.0,
            CycleOutcome::Cycle(c) => c.amplitude_x1,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            CycleOutcome::Stable(_) => None,
            CycleOutcome::Cycle(c) => Some(c.period),
        }
    }

    pub fn status(&self) -> RowStatus {
        match self {
            CycleOutcome::Stable(_) => RowStatus::Stable,
            CycleOutcome::Cycle(c) if c.converged => RowStatus::Converged,
            CycleOutcome::Cycle(_) => RowStatus::NotConverged,
        }
    }

    pub fn cycle(&self) -> Option<&LimitCycleResult> {
        match self {
            CycleOutcome::Stable(_) => None,
            CycleOutcome::Cycle(c) => Some(c),
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, CycleOutcome::Stable(_))
    }
}

/// The QSE of the full system in co-moving coordinates. It does not move in
/// these coordinates: `(0, 0)` for the polynomial fold and
/// `(-α, α - α³/3)` for van der Pol.
pub fn qse_comoving(model: &Model) -> CoMovingState {
    match model {
        Model::Ashwin(_) => CoMovingState::new(0.0, 0.0),
        Model::VanDerPol(p) => {
            let x = -p.alpha();
            CoMovingState::new(x, crate::models::critical_manifold(x, Family::VanDerPol))
        }
    }
}

struct ReturnMap<'m> {
    model: &'m Model,
    eq: CoMovingState,
    cfg: &'m CycleConfig,
}

struct Revolution {
    offset: f64,
}

impl<'m> ReturnMap<'m> {
    fn rhs(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |_t, u| {
            let s = CoMovingState::new(self.eq.x1 + u[0], self.eq.w + u[1]);
            self.model.comoving_rhs(s).to_array()
        }
    }

    /// Integrates from an arbitrary deviation `u0` to the next section
    /// crossing.
    fn next_crossing(&self, u0: [f64; 2]) -> Result<Revolution, CycleError> {
        let events = [EventSpec::new(|_t, u: &[f64; 2]| u[0], Direction::Rising, true)];
        let (_, crossings) = odeint::integrate_with_events(
            self.rhs(),
            u0,
            (0.0, self.cfg.max_return_time),
            &self.cfg.integrator,
            &events,
        )?;
        let c = crossings.last().ok_or(CycleError::NoReturn {
            max_time: self.cfg.max_return_time,
        })?;
        Ok(Revolution { offset: c.state[1] })
    }

    fn apply(&self, a: f64) -> Result<Revolution, CycleError> {
        self.next_crossing([0.0, a])
    }
}

/// Converges the attracting limit cycle at the model's rate, or reports the
/// equilibrium as stable.
pub fn find_limit_cycle(model: &Model, cfg: &CycleConfig) -> Result<CycleOutcome, CycleError> {
    find_limit_cycle_seeded(model, cfg, None)
}

/// Like [`find_limit_cycle`], starting from a section offset `seed` (for
/// example the previous cycle of a sweep) instead of the perturbed
/// equilibrium. The transient is skipped when seeded.
pub fn find_limit_cycle_seeded(
    model: &Model,
    cfg: &CycleConfig,
    seed: Option<f64>,
) -> Result<CycleOutcome, CycleError> {
    cfg.validate()?;
    let report = analysis::solve_equilibrium(model)?;
    let eq = CoMovingState::new(report.x1_star, report.w_star);
    let r = model.rate();
    let qse = qse_comoving(model);
    if report.leading_real_part() <= 0.0 {
        return Ok(CycleOutcome::Stable(StableState {
            r,
            equilibrium: eq,
            distance_from_qse: eq.distance(&qse),
        }));
    }

    let map = ReturnMap { model, eq, cfg };
    let mut returns = 0usize;

    let a0 = match seed {
        Some(a) if a > 0.0 && a.is_finite() => a,
        _ => {
            let start = [cfg.perturbation, 0.0];
            let traj = odeint::integrate(map.rhs(), start, (0.0, cfg.transient_time), &cfg.integrator)?;
            map.next_crossing(traj.final_state())?.offset
        }
    };

    let search = FixedPointSearch::new(&map, &report, cfg);
    let (found, used) = search.run(a0, &mut returns)?;
    sample_cycle(&map, found, used, cfg, qse)
}

struct FixedPointSearch<'a, 'm> {
    map: &'a ReturnMap<'m>,
    cfg: &'a CycleConfig,
    tiny: f64,
}

/// Result of the fixed-point search: section offset and whether it met
/// `return_tol`.
struct SearchOutcome {
    offset: f64,
    converged: bool,
}

impl<'a, 'm> FixedPointSearch<'a, 'm> {
    fn new(map: &'a ReturnMap<'m>, report: &EquilibriumReport, cfg: &'a CycleConfig) -> Self {
        let scale = 1.0 + report.w_star.abs();
        Self {
            map,
            cfg,
            tiny: 1e-13 * scale,
        }
    }

    fn run(&self, a0: f64, returns: &mut usize) -> Result<(SearchOutcome, usize), CycleError> {
        let cfg = self.cfg;
        let tol = cfg.return_tol;
        let budget = cfg.max_returns;
        // (a, g(a)) pairs seen so far
        let mut seen: Vec<(f64, f64)> = Vec::new();

        let mut eval = |a: f64, returns: &mut usize, seen: &mut Vec<(f64, f64)>| -> Result<f64, CycleError> {
            *returns += 1;
            let rev = self.map.apply(a)?;
            let g = rev.offset - a;
            seen.push((a, g));
            Ok(g)
        };

        // Plain iteration while the map contracts quickly.
        let mut a = a0.max(self.tiny);
        let mut g_prev: Option<f64> = None;
        loop {
            if *returns >= budget {
                return Ok((self.best(&seen, tol), *returns));
            }
            let g = eval(a, returns, &mut seen)?;
            if g.abs() <= tol {
                return Ok((
                    SearchOutcome {
                        offset: a,
                        converged: true,
                    },
                    *returns,
                ));
            }
            let fast = match g_prev {
                None => true,
                Some(gp) => (g / gp).abs() < 0.3,
            };
            if !fast || a + g <= self.tiny {
                break;
            }
            g_prev = Some(g);
            a += g;
        }

        // Bracket the sign change of g.
        let lower = |seen: &[(f64, f64)]| {
            seen.iter()
                .filter(|(_, g)| *g > 0.0)
                .map(|(a, g)| (*a, *g))
                .max_by(|x, y| x.0.total_cmp(&y.0))
        };
        let upper = |seen: &[(f64, f64)]| {
            seen.iter()
                .filter(|(_, g)| *g < 0.0)
                .map(|(a, g)| (*a, *g))
                .min_by(|x, y| x.0.total_cmp(&y.0))
        };

        let mut failures = 0;
        loop {
            if *returns >= budget {
                return Ok((self.best(&seen, tol), *returns));
            }
            match (lower(&seen), upper(&seen)) {
                (Some(lo), Some(hi)) if lo.0 < hi.0 => {
                    return self.polish(lo, hi, returns, &mut seen, &mut eval);
                }
                (Some(lo), Some(hi)) => {
                    // inconsistent ordering: probe between them
                    let mid = 0.5 * (lo.0 + hi.0);
                    eval(mid, returns, &mut seen)?;
                    let _ = hi;
                }
                (Some(lo), None) => {
                    let mut probe = 2.0 * lo.0 + lo.1;
                    loop {
                        match eval(probe, returns, &mut seen) {
                            Ok(_) => break,
                            Err(CycleError::Integration(_) | CycleError::NoReturn { .. }) if failures < 30 => {
                                failures += 1;
                                probe = 0.5 * (lo.0 + probe);
                                if *returns >= budget {
                                    return Ok((self.best(&seen, tol), *returns));
                                }
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
                (None, Some(hi)) => {
                    let probe = 0.5 * hi.0;
                    if probe < self.tiny {
                        // collapsed onto the equilibrium: no cycle found
                        return Ok((
                            SearchOutcome {
                                offset: hi.0,
                                converged: false,
                            },
                            *returns,
                        ));
                    }
                    eval(probe, returns, &mut seen)?;
                }
                (None, None) => {
                    // every evaluation hit g == 0 exactly
                    return Ok((self.best(&seen, tol), *returns));
                }
            }
        }
    }

    fn polish<E>(
        &self,
        lo: (f64, f64),
        hi: (f64, f64),
        returns: &mut usize,
        seen: &mut Vec<(f64, f64)>,
        eval: &mut E,
    ) -> Result<(SearchOutcome, usize), CycleError>
    where
        E: FnMut(f64, &mut usize, &mut Vec<(f64, f64)>) -> Result<f64, CycleError>,
    {
        let tol = self.cfg.return_tol;
        let remaining = self.cfg.max_returns.saturating_sub(*returns);
        let mut failure = None;
        let mut g_of = |a: f64| -> f64 {
            if failure.is_some() {
                return 0.0;
            }
            match eval(a, returns, seen) {
                Ok(g) => g,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        };
        let found = roots::brent_with_values(&mut g_of, lo.0, lo.1, hi.0, hi.1, tol, self.tiny, remaining);
        if let Some(e) = failure {
            return Err(e);
        }
        let found = found.expect("bracket has a sign change");
        Ok((
            SearchOutcome {
                offset: found.root,
                converged: found.f_root.abs() <= tol,
            },
            *returns,
        ))
    }

    fn best(&self, seen: &[(f64, f64)], tol: f64) -> SearchOutcome {
        let (a, g) = seen
            .iter()
            .copied()
            .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .unwrap_or((0.0, f64::INFINITY));
        SearchOutcome {
            offset: a,
            converged: g.abs() <= tol,
        }
    }
}

fn sample_cycle(
    map: &ReturnMap<'_>,
    search: SearchOutcome,
    returns: usize,
    cfg: &CycleConfig,
    qse: CoMovingState,
) -> Result<CycleOutcome, CycleError> {
    let eq = map.eq;
    let a = search.offset;
    let events = [EventSpec::new(|_t, u: &[f64; 2]| u[0], Direction::Rising, true)];
    let (traj, crossings) = odeint::integrate_with_events(
        map.rhs(),
        [0.0, a],
        (0.0, cfg.max_return_time),
        &cfg.integrator,
        &events,
    )?;
    if crossings.is_empty() {
        return Err(CycleError::NoReturn {
            max_time: cfg.max_return_time,
        });
    }
    let period = traj.t_end();
    let to_state = |u: [f64; 2]| CoMovingState::new(eq.x1 + u[0], eq.w + u[1]);

    // Uniform samples merged with the integrator nodes, then each extremum of
    // interest is refined on the dense output and inserted as its own sample.
    let mut points: Vec<(f64, [f64; 2])> = traj.sample_uniform(cfg.samples);
    points.extend(traj.times().iter().copied().zip(traj.states().iter().copied()));
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|a, b| a.0 == b.0);

    let objectives: [&dyn Fn(&CoMovingState) -> f64; 4] = [
        &|s| s.distance(&qse),
        &|s| s.distance(&eq),
        &|s| s.x1,
        &|s| -s.x1,
    ];
    for objective in objectives {
        let score = |u: [f64; 2]| objective(&to_state(u));
        let k = (0..points.len())
            .max_by(|&i, &j| score(points[i].1).total_cmp(&score(points[j].1)))
            .expect("nonempty samples");
        let lo = points[k.saturating_sub(1)].0;
        let hi = points[(k + 1).min(points.len() - 1)].0;
        let t_best = golden_max(|t| score(traj.dense_eval(t).expect("inside span")), lo, hi);
        let u_best = traj.dense_eval(t_best).expect("inside span");
        if score(u_best) > score(points[k].1) {
            let at = points.partition_point(|p| p.0 < t_best);
            if points.get(at).map_or(true, |p| p.0 != t_best) {
                points.insert(at, (t_best, u_best));
            }
        }
    }

    let sample_times: Vec<f64> = points.iter().map(|p| p.0).collect();
    let samples: Vec<CoMovingState> = points.iter().map(|p| to_state(p.1)).collect();
    let max_distance_from_qse = samples.iter().map(|s| s.distance(&qse)).fold(0.0, f64::max);
    let max_distance_from_equilibrium = samples.iter().map(|s| s.distance(&eq)).fold(0.0, f64::max);
    let x1_min = samples.iter().map(|s| s.x1).fold(f64::INFINITY, f64::min);
    let x1_max = samples.iter().map(|s| s.x1).fold(f64::NEG_INFINITY, f64::max);
    let closes = samples[0].distance(samples.last().expect("nonempty")) <= cfg.return_tol;
    Ok(CycleOutcome::Cycle(LimitCycleResult {
        r: map.model.rate(),
        period,
        samples,
        sample_times,
        max_distance_from_qse,
        max_distance_from_equilibrium,
        amplitude_x1: 0.5 * (x1_max - x1_min),
        x1_min,
        x1_max,
        section_offset: a,
        equilibrium: eq,
        converged: search.converged && closes,
        returns_used: returns,
    }))
}

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        x1
    } else {
        x2
    }
}

/// How a sweep is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Seed each row from the previous converged cycle. Forces sequential
    /// evaluation.
    pub warm_start: bool,
    /// Worker threads for cold sweeps.
    pub workers: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            warm_start: true,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub outcome: Result<CycleOutcome, CycleError>,
}

impl SweepRow {
    pub fn status(&self) -> RowStatus {
        match &self.outcome {
            Ok(o) => o.status(),
            Err(_) => RowStatus::Failed,
        }
    }

    /// The max-distance value of a stable or converged row.
    pub fn max_distance(&self) -> Option<f64> {
        match &self.outcome {
            Ok(o) if o.status() != RowStatus::NotConverged => Some(o.max_distance()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub family: Family,
    pub epsilon: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn converged_cycles(&self) -> impl Iterator<Item = &LimitCycleResult> {
        self.rows.iter().filter_map(|row| match &row.outcome {
            Ok(CycleOutcome::Cycle(c)) if c.converged => Some(c),
            _ => None,
        })
    }
}

/// Runs [`find_limit_cycle`] at every rate of `r_grid`. The rate stored in
/// `model` is ignored. Per-row failures are recorded in the row.
pub fn rate_sweep(
    model: &Model,
    r_grid: &[f64],
    cfg: &CycleConfig,
    opts: SweepOptions,
) -> Result<SweepResult, CycleError> {
    cfg.validate()?;
    if r_grid.is_empty() {
        return Err(CycleError::InvalidConfig("rate grid is empty".into()));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CycleError::InvalidConfig("rate grid must be strictly increasing".into()));
    }

    let row_at = |r: f64, seed: Option<f64>| -> Result<CycleOutcome, CycleError> {
        let m = model.with_rate(r)?;
        let first = find_limit_cycle_seeded(&m, cfg, seed);
        match (&first, seed) {
            (Ok(CycleOutcome::Cycle(c)), Some(_)) if !c.converged => find_limit_cycle(&m, cfg),
            (Err(_), Some(_)) => find_limit_cycle(&m, cfg),
            _ => first,
        }
    };

    let rows = if opts.warm_start {
        let mut rows = Vec::with_capacity(r_grid.len());
        let mut seed = None;
        for &r in r_grid {
            let outcome = row_at(r, seed);
            seed = match &outcome {
                Ok(CycleOutcome::Cycle(c)) if c.converged => Some(c.section_offset),
                _ => None,
            };
            rows.push(SweepRow { r, outcome });
        }
        rows
    } else {
        let workers = opts.workers.clamp(1, r_grid.len());
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; r_grid.len()]);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= r_grid.len() {
                        break;
                    }
                    let r = r_grid[i];
                    let row = SweepRow {
                        r,
                        outcome: row_at(r, None),
                    };
                    slots.lock().expect("worker panicked")[i] = Some(row);
                });
            }
        });
        slots
            .into_inner()
            .expect("worker panicked")
            .into_iter()
            .map(|row| row.expect("every row evaluated"))
            .collect()
    };

    Ok(SweepResult {
        family: model.family(),
        epsilon: model.epsilon(),
        rows,
    })
}

/// Rate where `max_distance` grows fastest across the sweep.
///
/// Slopes are finite differences between consecutive rows that have a
/// distance (stable or converged). Each slope is attributed to the midpoint of
/// its interval; ties go to the smallest rate.
pub fn explosion_rate(sweep: &SweepResult) -> Result<f64, CycleError> {
    let converged = sweep.rows.iter().filter(|r| r.status() == RowStatus::Converged).count();
    if converged < 3 {
        return Err(CycleError::InsufficientData {
            needed: 3,
            found: converged,
        });
    }
    let points: Vec<(f64, f64)> = sweep
        .rows
        .iter()
        .filter_map(|row| row.max_distance().map(|d| (row.r, d)))
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for w in points.windows(2) {
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let mid = 0.5 * (w[0].0 + w[1].0);
        // slopes equal up to rounding count as ties
        if best.map_or(true, |(s, _)| slope - s > 1e-9 * s.abs().max(slope.abs())) {
            best = Some((slope, mid));
        }
    }
    Ok(best.expect("at least two points").1)
}

/// Replays a cycle in the original coordinates along `λ = r t`, starting at
/// `t0`, for `periods` revolutions.
pub fn spiral_trajectory(cycle: &LimitCycleResult, t0: f64, periods: usize) -> Vec<(f64, FullState)> {
    let n = cycle.samples.len();
    let mut out = Vec::with_capacity(periods * n);
    for k in 0..periods {
        let last_period = k + 1 == periods;
        let take = if last_period { n } else { n.saturating_sub(1) };
        for (s, &dt) in cycle.samples.iter().zip(&cycle.sample_times).take(take) {
            let t = t0 + k as f64 * cycle.period + dt;
            out.push((t, from_comoving(*s, t, cycle.r)));
        }
    }
    out
}
