//! The two model families: a polynomial fold forced at a constant rate and a
//! linearly forced van der Pol oscillator.
//!
//! Both are planar fast/slow systems
//!
//! ```text
//! ε x1' = x2 + λ + F(x1)
//!   x2' = G(x1)
//!    λ' = r
//! ```
//!
//! with `F(x) = x(x - 1)`, `G(x) = -S(x)` for the polynomial fold and
//! `F(x) = x - x³/3`, `G(x) = -x - α` for van der Pol. The substitution
//! `w = x2 + λ` removes the explicit drift and leaves an autonomous system in
//! `(x1, w)` where the rate `r` is an ordinary parameter.

use std::fmt;

use crate::ModelError;

/// Half-width of the band around `x1 = 1/2` where the reduced slow flow is
/// considered singular.
pub const SINGULAR_GUARD: f64 = 1e-8;

/// Which of the two model families a parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Polynomial fold, `ε x1' = w + x1(x1 - 1)`, `w' = r - S(x1)`.
    Ashwin,
    /// Forced van der Pol, `ε x1' = w + x1 - x1³/3`, `w' = r - x1 - α`.
    VanDerPol,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Ashwin => "ashwin",
            Family::VanDerPol => "vdp",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ashwin" => Ok(Family::Ashwin),
            "vdp" | "vanderpol" | "van-der-pol" => Ok(Family::VanDerPol),
            other => Err(ModelError::UnknownFamily(other.to_string())),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), ModelError> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidEpsilon(epsilon))
    }
}

fn check_rate(r: f64) -> Result<(), ModelError> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidRate(r))
    }
}

/// Parameters of the polynomial fold system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AshwinParams {
    epsilon: f64,
    r: f64,
    n: u32,
}

impl AshwinParams {
    /// Validates `ε > 0`, `r ≥ 0` and that the degree `n` is odd and at least 5.
    pub fn new(epsilon: f64, r: f64, n: u32) -> Result<Self, ModelError> {
        check_epsilon(epsilon)?;
        check_rate(r)?;
        if n < 5 || n % 2 == 0 {
            return Err(ModelError::InvalidDegree(n));
        }
        Ok(Self { epsilon, r, n })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn with_rate(self, r: f64) -> Result<Self, ModelError> {
        Self::new(self.epsilon, r, self.n)
    }
}

/// Parameters of the forced van der Pol system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdpParams {
    epsilon: f64,
    r: f64,
    alpha: f64,
}

impl VdpParams {
    /// Validates `ε > 0`, `r ≥ 0` and `α > 1`.
    pub fn new(epsilon: f64, r: f64, alpha: f64) -> Result<Self, ModelError> {
        check_epsilon(epsilon)?;
        check_rate(r)?;
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(ModelError::InvalidAlpha(alpha));
        }
        Ok(Self { epsilon, r, alpha })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_rate(self, r: f64) -> Result<Self, ModelError> {
        Self::new(self.epsilon, r, self.alpha)
    }
}

/// A state of the full, non-autonomous system. Also used for its time
/// derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FullState {
    pub x1: f64,
    pub x2: f64,
    pub lambda: f64,
}

impl FullState {
    pub fn new(x1: f64, x2: f64, lambda: f64) -> Self {
        Self { x1, x2, lambda }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.lambda]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.lambda.is_finite()
    }
}

/// A state of the co-moving system, `w = x2 + λ`. Also used for its time
/// derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoMovingState {
    pub x1: f64,
    pub w: f64,
}

impl CoMovingState {
    pub fn new(x1: f64, w: f64) -> Self {
        Self { x1, w }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x1, self.w]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }

    pub fn distance(&self, other: &CoMovingState) -> f64 {
        (self.x1 - other.x1).hypot(self.w - other.w)
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.w.is_finite()
    }
}

/// A turning point of the critical manifold, in co-moving coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldPoint {
    pub x1: f64,
    pub w: f64,
}

/// `S(x) = x + x² + … + xⁿ`, evaluated by Horner's rule.
pub fn poly_sum(x: f64, n: u32) -> f64 {
    debug_assert!(n >= 1);
    let mut acc = 1.0;
    for _ in 1..n {
        acc = 1.0 + x * acc;
    }
    x * acc
}

/// `S'(x) = 1 + 2x + … + n xⁿ⁻¹`, evaluated by Horner's rule.
pub fn poly_sum_deriv(x: f64, n: u32) -> f64 {
    debug_assert!(n >= 1);
    let mut acc = n as f64;
    for k in (1..n).rev() {
        acc = k as f64 + x * acc;
    }
    acc
}

pub fn ashwin_full_rhs(s: FullState, p: &AshwinParams) -> FullState {
    FullState {
        x1: (s.x2 + s.lambda + s.x1 * (s.x1 - 1.0)) / p.epsilon,
        x2: -poly_sum(s.x1, p.n),
        lambda: p.r,
    }
}

pub fn ashwin_comoving_rhs(s: CoMovingState, p: &AshwinParams) -> CoMovingState {
    CoMovingState {
        x1: (s.w + s.x1 * (s.x1 - 1.0)) / p.epsilon,
        w: p.r - poly_sum(s.x1, p.n),
    }
}

/// Slow flow on the critical manifold after rescaling time by `-(2x1 - 1)`.
///
/// The rescaling reverses the direction of time on the repelling branch
/// `x1 > 1/2`; compare [`reduced_rhs`].
pub fn desingularized_rhs(x1: f64, p: &AshwinParams) -> f64 {
    p.r - poly_sum(x1, p.n)
}

/// Slow flow of `x1` on the critical manifold, `(S(x1) - r) / (2x1 - 1)`.
pub fn reduced_rhs(x1: f64, p: &AshwinParams) -> Result<f64, ModelError> {
    let denom = 2.0 * x1 - 1.0;
    if denom.abs() <= SINGULAR_GUARD {
        return Err(ModelError::SingularFold { x1 });
    }
    Ok((poly_sum(x1, p.n) - p.r) / denom)
}

pub fn vdp_full_rhs(s: FullState, p: &VdpParams) -> FullState {
    FullState {
        x1: (s.x2 + s.x1 - s.x1 * s.x1 * s.x1 / 3.0 + s.lambda) / p.epsilon,
        x2: -s.x1 - p.alpha,
        lambda: p.r,
    }
}

pub fn vdp_comoving_rhs(s: CoMovingState, p: &VdpParams) -> CoMovingState {
    CoMovingState {
        x1: (s.w + s.x1 - s.x1 * s.x1 * s.x1 / 3.0) / p.epsilon,
        w: p.r - s.x1 - p.alpha,
    }
}

pub fn to_comoving(s: FullState) -> CoMovingState {
    CoMovingState {
        x1: s.x1,
        w: s.x2 + s.lambda,
    }
}

/// Inverse of [`to_comoving`] along the forcing `λ = r t`.
pub fn from_comoving(s: CoMovingState, t: f64, r: f64) -> FullState {
    let lambda = r * t;
    FullState {
        x1: s.x1,
        x2: s.w - lambda,
        lambda,
    }
}

/// The `w` value of the fast nullcline (critical manifold) above `x1`.
pub fn critical_manifold(x1: f64, family: Family) -> f64 {
    match family {
        Family::Ashwin => x1 - x1 * x1,
        Family::VanDerPol => x1 * x1 * x1 / 3.0 - x1,
    }
}

/// `d/dx1` of [`critical_manifold`].
pub fn critical_manifold_slope(x1: f64, family: Family) -> f64 {
    match family {
        Family::Ashwin => 1.0 - 2.0 * x1,
        Family::VanDerPol => x1 * x1 - 1.0,
    }
}

/// Folds of the critical manifold, ordered by `x1`.
pub fn fold_points(family: Family) -> Vec<FoldPoint> {
    let xs: &[f64] = match family {
        Family::Ashwin => &[0.5],
        Family::VanDerPol => &[-1.0, 1.0],
    };
    xs.iter()
        .map(|&x1| FoldPoint {
            x1,
            w: critical_manifold(x1, family),
        })
        .collect()
}

/// A validated parameter set of either family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Ashwin(AshwinParams),
    VanDerPol(VdpParams),
}

impl Model {
    pub fn family(&self) -> Family {
        match self {
            Model::Ashwin(_) => Family::Ashwin,
            Model::VanDerPol(_) => Family::VanDerPol,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Model::Ashwin(p) => p.epsilon,
            Model::VanDerPol(p) => p.epsilon,
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            Model::Ashwin(p) => p.r,
            Model::VanDerPol(p) => p.r,
        }
    }

    pub fn with_rate(&self, r: f64) -> Result<Model, ModelError> {
        Ok(match self {
            Model::Ashwin(p) => Model::Ashwin(p.with_rate(r)?),
            Model::VanDerPol(p) => Model::VanDerPol(p.with_rate(r)?),
        })
    }

    pub fn comoving_rhs(&self, s: CoMovingState) -> CoMovingState {
        match self {
            Model::Ashwin(p) => ashwin_comoving_rhs(s, p),
            Model::VanDerPol(p) => vdp_comoving_rhs(s, p),
        }
    }

    pub fn full_rhs(&self, s: FullState) -> FullState {
        match self {
            Model::Ashwin(p) => ashwin_full_rhs(s, p),
            Model::VanDerPol(p) => vdp_full_rhs(s, p),
        }
    }

    pub fn critical_manifold(&self, x1: f64) -> f64 {
        critical_manifold(x1, self.family())
    }

    pub fn fold_points(&self) -> Vec<FoldPoint> {
        fold_points(self.family())
    }
}

impl From<AshwinParams> for Model {
    fn from(p: AshwinParams) -> Self {
        Model::Ashwin(p)
    }
}

impl From<VdpParams> for Model {
    fn from(p: VdpParams) -> Self {
        Model::VanDerPol(p)
    }
}
