//! Numerical toolkit for the second-order sharp-interface expansion of the
//! mass-constrained Cahn-Hilliard energy.
//!
//! The crate computes, at desk scale, every constant and construction entering
//! the expansion
//!
//! ```text
//! F_eps = F0 + eps * (2 c_W * P) + eps^2 * F2 + o(eps^2)
//! ```
//!
//! and verifies it numerically:
//!
//! * [`potential`]: double-well potentials `W` with well data `(a, b, c, q, ell)`
//!   and hypothesis validation;
//! * [`profile`]: the heteroclinic profile `z' = sqrt(W(z))` and the constants
//!   `c_W`, `c_sym`, shift integrals and transition shifts `tau`;
//! * [`isoperimetry`]: isoperimetric profiles, the smoothed touching minorant
//!   `I*`, the volume function `V' = I*(V)`, rearranged domains and weights
//!   `eta` (from rearrangement or level sets of canonical sets);
//! * [`rearrangement`]: monotone rearrangement of 2-D grid functions with its
//!   contraction / equimeasurability / truncation / Polya-Szego contract;
//! * [`solver1d`]: graded-grid discretization and projected-Newton minimization
//!   of the weighted functional `int (W(v) + eps^2 v'^2) eta dt` under the mass
//!   constraint, multiplier extraction and recovery sequences;
//! * [`asymptotics`]: predicted first/second-order coefficients and eps-sweep
//!   verification with Richardson extrapolation.

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod interp;
pub mod isoperimetry;
pub mod ode;
pub mod potential;
pub mod profile;
pub mod quad;
pub mod rearrangement;
pub mod rootfind;
pub mod solver1d;

pub use error::{Error, Result};
pub use potential::{validate_potential, well_data, Potential, WellData};
pub use profile::{
    compute_csym, compute_cw, shift_integral, solve_profile, solve_tau, solve_tau_with_multiplier,
    Profile,
};
