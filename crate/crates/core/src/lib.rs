//! Numerical tools for rate-induced tipping in planar fast/slow systems.
//!
//! A state tracking an equilibrium that drifts at constant rate `r` is
//! studied in co-moving coordinates, where the drift becomes an ordinary
//! parameter. There the critical rate shows up as a Hopf bifurcation and the
//! post-critical behaviour as an attracting limit cycle.
//!
//! * [`models`] defines the polynomial-fold and van der Pol families.
//! * [`odeint`] is an adaptive Dormand–Prince integrator with dense output
//!   and event location.
//! * [`analysis`] finds equilibria, Jacobian spectra and Hopf rates.
//! * [`cycles`] finds limit cycles and runs rate sweeps.
//!
//! ```
//! use fastslow::analysis::{critical_rate, solve_equilibrium};
//! use fastslow::models::{AshwinParams, Model};
//!
//! let model: Model = AshwinParams::new(0.02, 0.9, 5)?.into();
//! assert!(model.rate() < critical_rate(&model));
//! assert!(solve_equilibrium(&model)?.stability.is_stable());
//! # Ok::<(), fastslow::AnalysisError>(())
//! ```

pub mod analysis;
pub mod cycles;
pub mod models;
pub mod odeint;
mod error;
pub mod roots;

pub use error::{AnalysisError, CycleError, ModelError, OdeError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/comoving.md")]
    mod comoving {}
    #[doc = include_str!("../../../book/src/integrator.md")]
    mod integrator {}
    #[doc = include_str!("../../../book/src/hopf.md")]
    mod hopf {}
    #[doc = include_str!("../../../book/src/cycles.md")]
    mod cycles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
