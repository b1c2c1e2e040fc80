//! Equilibria of the co-moving systems, their linearization and the Hopf
//! point where the equilibrium loses stability.
//!
//! For the polynomial fold the equilibrium solves `S(x1*) = r`,
//! `w* = x1* - x1*²`, and the Jacobian there is
//!
//! ```text
//! | (2x1* - 1)/ε   1/ε |
//! |  -S'(x1*)       0  |
//! ```
//!
//! Its trace changes sign exactly when `x1*` passes the fold at `1/2` while the
//! determinant `S'(x1*)/ε` stays positive, so a complex pair crosses the
//! imaginary axis at `r_c = S(1/2) = 1 - 2⁻ᴺ` with frequency `sqrt(S'(1/2)/ε)`.
//! The van der Pol system behaves the same way at its left fold, `r = α - 1`,
//! and regains stability past the right fold, `r = α + 1`.

use num_complex::Complex64;

use crate::models::{critical_manifold, poly_sum, poly_sum_deriv, AshwinParams, Model, VdpParams};
use crate::roots;
use crate::AnalysisError;

/// 2×2 matrix, row-major.
pub type Matrix2 = [[f64; 2]; 2];

/// Real parts below this magnitude count as zero.
pub const CENTER_THRESHOLD: f64 = 1e-12;

const EQUILIBRIUM_RESIDUAL: f64 = 1e-12;
const MAX_BRACKET_DOUBLINGS: u32 = 10;
const HOPF_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    /// Real eigenvalues of opposite sign. Never occurs for the two model
    /// families (their Jacobian determinant is positive), but keeps
    /// [`classify`] total.
    Saddle,
    Center,
    Degenerate,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::StableNode | Stability::StableFocus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    pub x1_star: f64,
    pub w_star: f64,
    pub jacobian: Matrix2,
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
}

impl EquilibriumReport {
    fn build(x1_star: f64, w_star: f64, model: &Model) -> Self {
        let jacobian = jacobian_comoving(x1_star, model);
        let eigenvalues = eigenvalues_2x2(&jacobian);
        Self {
            x1_star,
            w_star,
            jacobian,
            eigenvalues,
            stability: classify(&eigenvalues),
        }
    }

    /// Largest real part of the eigenvalue pair.
    pub fn leading_real_part(&self) -> f64 {
        self.eigenvalues[0].re.max(self.eigenvalues[1].re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfReport {
    pub r_hopf: f64,
    pub x1_at_hopf: f64,
    /// Imaginary part of the crossing pair, in rad per unit time.
    pub omega: f64,
}

/// Equilibrium of the polynomial fold system with `x1* >= 0`.
pub fn solve_equilibrium_ashwin(p: &AshwinParams) -> Result<EquilibriumReport, AnalysisError> {
    let r = p.rate();
    let n = p.degree();
    if !(r >= 0.0) {
        return Err(AnalysisError::BracketFailure { r });
    }
    let x1_star = if r == 0.0 {
        0.0
    } else {
        let mut hi = 1.0;
        let mut doublings = 0;
        while poly_sum(hi, n) <= r {
            hi *= 2.0;
            doublings += 1;
            if doublings > MAX_BRACKET_DOUBLINGS {
                return Err(AnalysisError::BracketFailure { r });
            }
        }
        let found = roots::newton_bisect(
            |x| (poly_sum(x, n) - r, poly_sum_deriv(x, n)),
            0.0,
            hi,
            EQUILIBRIUM_RESIDUAL * r.max(1.0),
            0.0,
        )
        .ok_or(AnalysisError::BracketFailure { r })?;
        found.root
    };
    let w_star = critical_manifold(x1_star, crate::models::Family::Ashwin);
    Ok(EquilibriumReport::build(x1_star, w_star, &Model::Ashwin(*p)))
}

/// Equilibrium of the van der Pol system, `x1* = r - α`.
pub fn solve_equilibrium_vdp(p: &VdpParams) -> EquilibriumReport {
    let x1_star = p.rate() - p.alpha();
    let w_star = critical_manifold(x1_star, crate::models::Family::VanDerPol);
    EquilibriumReport::build(x1_star, w_star, &Model::VanDerPol(*p))
}

pub fn solve_equilibrium(model: &Model) -> Result<EquilibriumReport, AnalysisError> {
    match model {
        Model::Ashwin(p) => solve_equilibrium_ashwin(p),
        Model::VanDerPol(p) => Ok(solve_equilibrium_vdp(p)),
    }
}

/// Jacobian of the co-moving vector field at `(x1_star, ·)`; it does not
/// depend on `w`.
pub fn jacobian_comoving(x1_star: f64, model: &Model) -> Matrix2 {
    let eps = model.epsilon();
    match model {
        Model::Ashwin(p) => [
            [(2.0 * x1_star - 1.0) / eps, 1.0 / eps],
            [-poly_sum_deriv(x1_star, p.degree()), 0.0],
        ],
        Model::VanDerPol(_) => [[(1.0 - x1_star * x1_star) / eps, 1.0 / eps], [-1.0, 0.0]],
    }
}

/// Closed-form eigenvalues of the polynomial-fold Jacobian,
/// `(2x - 1 ± sqrt((1 - 2x)² - 4ε S'(x))) / 2ε`, `+` root first.
pub fn eigenvalues_analytic_ashwin(x1_star: f64, p: &AshwinParams) -> [Complex64; 2] {
    let eps = p.epsilon();
    let a = 2.0 * x1_star - 1.0;
    let disc = Complex64::new(a * a - 4.0 * eps * poly_sum_deriv(x1_star, p.degree()), 0.0);
    let root = disc.sqrt();
    let two_eps = 2.0 * eps;
    [(a + root) / two_eps, (a - root) / two_eps]
}

/// Eigenvalues of a 2×2 matrix from its trace and determinant.
///
/// Real pairs are computed as `q = tr/2 + sign(tr) sqrt(disc)` and `det/q` to
/// avoid cancellation. Complex pairs are returned with positive imaginary part
/// first.
pub fn eigenvalues_2x2(m: &Matrix2) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let q = half + disc.sqrt().copysign(half);
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let other = det / q;
        let (big, small) = (q, other);
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, im), Complex64::new(half, -im)]
    }
}

pub fn classify(eigenvalues: &[Complex64; 2]) -> Stability {
    let [a, b] = *eigenvalues;
    let complex = a.im != 0.0 || b.im != 0.0;
    if complex {
        let re = a.re.max(b.re);
        let re_min = a.re.min(b.re);
        if re.abs() < CENTER_THRESHOLD && re_min.abs() < CENTER_THRESHOLD {
            Stability::Center
        } else if re < 0.0 {
            Stability::StableFocus
        } else if re_min > 0.0 {
            Stability::UnstableFocus
        } else {
            Stability::Degenerate
        }
    } else {
        let scale = a.re.abs().max(b.re.abs());
        if (a.re - b.re).abs() <= CENTER_THRESHOLD * scale
            || a.re.abs() < CENTER_THRESHOLD
            || b.re.abs() < CENTER_THRESHOLD
        {
            Stability::Degenerate
        } else if a.re < 0.0 && b.re < 0.0 {
            Stability::StableNode
        } else if a.re > 0.0 && b.re > 0.0 {
            Stability::UnstableNode
        } else {
            Stability::Saddle
        }
    }
}

/// Rate at which the equilibrium reaches the fold: `1 - 2⁻ᴺ` for the
/// polynomial fold and `α - 1` for van der Pol.
pub fn critical_rate(model: &Model) -> f64 {
    match model {
        Model::Ashwin(p) => 1.0 - 0.5f64.powi(p.degree() as i32),
        Model::VanDerPol(p) => p.alpha() - 1.0,
    }
}

/// Rate at which the van der Pol equilibrium crosses the right fold and
/// becomes stable again, `α + 1`. `None` for the polynomial fold.
pub fn restabilization_rate(model: &Model) -> Option<f64> {
    match model {
        Model::Ashwin(_) => None,
        Model::VanDerPol(p) => Some(p.alpha() + 1.0),
    }
}

fn leading_real_part_at(model: &Model, r: f64) -> Result<(f64, EquilibriumReport), AnalysisError> {
    let m = model.with_rate(r)?;
    let eq = solve_equilibrium(&m)?;
    Ok((eq.leading_real_part(), eq))
}

/// Bisects `r_bracket` on the largest real part of the equilibrium's
/// eigenvalues. The rate stored in `model` is ignored.
pub fn locate_hopf_numeric(model: &Model, r_bracket: (f64, f64)) -> Result<HopfReport, AnalysisError> {
    let (r_lo, r_hi) = r_bracket;
    let no_change = AnalysisError::NoSignChange { r_lo, r_hi };
    let (re_lo, _) = leading_real_part_at(model, r_lo)?;
    let (re_hi, _) = leading_real_part_at(model, r_hi)?;
    if re_lo == 0.0 || re_hi == 0.0 || re_lo.signum() == re_hi.signum() {
        if re_lo == 0.0 && re_hi != 0.0 {
            return hopf_report(model, r_lo);
        }
        if re_hi == 0.0 && re_lo != 0.0 {
            return hopf_report(model, r_hi);
        }
        return Err(no_change);
    }
    let mut failure = None;
    let (a, b) = roots::bisect(
        |r| match leading_real_part_at(model, r) {
            Ok((re, _)) => re,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        r_lo,
        r_hi,
        HOPF_WIDTH,
    )
    .ok_or(no_change)?;
    if let Some(e) = failure {
        return Err(e);
    }
    hopf_report(model, 0.5 * (a + b))
}

fn hopf_report(model: &Model, r: f64) -> Result<HopfReport, AnalysisError> {
    let (_, eq) = leading_real_part_at(model, r)?;
    let omega = eq.eigenvalues[0].im.abs();
    if omega == 0.0 {
        return Err(AnalysisError::NotOscillatory { r });
    }
    Ok(HopfReport {
        r_hopf: r,
        x1_at_hopf: eq.x1_star,
        omega,
    })
}
