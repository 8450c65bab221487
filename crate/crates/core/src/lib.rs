//! Renormalized volume toolkit for hyperbolic 3-space.
//!
//! The crate is organised by geometric object:
//!
//! * [`hyp3`]: ball model, Busemann functions, closed-form balls, tubes and
//!   equidistant surfaces.
//! * [`surfaces`]: rotationally symmetric star-shaped surfaces with spectral
//!   curvature computation.
//! * [`foliation`]: equidistant flow, W-volume invariance, asymptotics and
//!   Minkowski-type inequalities.
//! * [`sphere`]: conformal metrics on S², Polyakov differences and the
//!   area-normalized Ricci flow.
//! * [`epstein`]: horosphere envelopes of zonal conformal factors.
//! * [`profile`]: isoperimetric profiles, Hawking mass and brane functional.
//! * [`tube`]: Jacobi spectra of tubes about geodesics.
//! * [`io`] and [`cli`]: file formats and the `renvol` command line.
//!
//! Mean curvature is the average of the principal curvatures throughout.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod epstein;
pub mod error;
pub mod foliation;
pub mod hyp3;
pub mod io;
pub mod profile;
pub mod quadrature;
pub mod sphere;
pub mod surfaces;
pub mod tube;

pub use error::{Error, Result};
