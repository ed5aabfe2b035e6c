//! Exact arithmetic for cut-and-project sets over p-adic and finite-adelic
//! groups.
//!
//! Adeles are modeled at valuation resolution: an adele is represented by the
//! finitely supported profile of its component valuations, never by its unit
//! parts. Every quantity computed here (box membership, adelic norms, Haar
//! measures of boxes, dilations) depends on valuations alone, so nothing is
//! lost for these computations.
//!
//! Module map:
//! - [`exactnum`]: rationals, p-adic valuations, quadratic irrationals.
//! - [`adelic`]: valuation profiles, adelic boxes, norms and measures.
//! - [`modelsets`]: windows and generalized Farey fractions.
//! - [`density`]: Følner schedules and exact density tables.
//! - [`cutproject`]: lattices `ℤ[1/Q](u,t)`, covolumes and cut-and-project sets.
//! - [`sumsetgeo`]: arc sets on the circle, Kneser checks, Minkowski differences.
//! - [`solenoid`]: truncated solenoids, the embedding of ℝ, characters and lifting.

pub mod adelic;
pub mod cutproject;
pub mod density;
pub mod error;
pub mod exactnum;
pub mod modelsets;
pub mod solenoid;
pub mod sumsetgeo;

pub use adelic::{AdelicBox, ValuationProfile};
pub use error::{Error, Result};
pub use exactnum::{Prime, QuadExtReal, Rational, Valuation};
pub use modelsets::{FareySpec, RationalPointSet, Window1D};
pub use solenoid::{PadicRep, PrimeSchedule, SolPoint};
