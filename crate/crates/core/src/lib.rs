//! Cut-and-project schemes over Z and R with compact or Euclidean internal
//! groups, weak model sets generated from a window, their period groups,
//! quotients, autocorrelation, and B-free systems as a special case.

pub mod bfree;
pub mod cli;
pub mod configuration;
pub mod descriptor;
pub mod diffraction;
pub mod error;
pub mod group;
pub mod measure;
pub mod quotient;
pub mod scheme;
pub mod window;

pub use error::{Error, Result};
pub use group::{GroupElement, GroupKind, InternalGroup};
pub use measure::Measure;
pub use scheme::{GCoord, LatticePoint, Physical, Region, Scheme};
pub use window::{Interval, IntervalUnion, Subgroup, Window};
