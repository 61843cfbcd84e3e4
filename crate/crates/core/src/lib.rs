//! Loewner-Kufarev evolution of conformal maps of the unit disc.
//!
//! The crate integrates `dw/dt = -w p(w, t)` (and its expanding counterpart)
//! for Carathéodory-class driving terms `p`, co-evolving `w_z`, and measures
//! the boundary behaviour of the resulting maps: Hölder exponents, the
//! three-point (bounded turning) condition, rectifiability, Jordan-ness and
//! the continuity of the inverse map. The [`apps`] module couples the flow to
//! densities derived from the map itself (Hele-Shaw and Carleson-Makarov).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod boundary;
pub mod diagnostics;
pub mod driving;
mod error;
pub mod flow;
pub mod geometry;
pub mod interp;
mod ode;
pub mod regression;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A point of the complex plane, usually of the unit disc.
pub type ComplexPoint = Complex64;

pub(crate) fn ensure_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { z, modulus: f64::NAN })
    }
}
