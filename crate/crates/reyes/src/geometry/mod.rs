//! The simplex as a metric vector space: closure, perturbation, powering,
//! the Aitchison inner product and norm, clr/ilr transforms, contrast
//! matrices, geometric centering, and zero replacement.
//!
//! All operations here are pure functions of immutable values and are safe
//! to share across threads.

mod composition;
mod contrast;
mod sample;
mod zeros;

pub use composition::{clr_inverse, closure, ilr_inverse, Composition, MIN_PART};
pub use contrast::{ContrastMatrix, ContrastScheme};
pub use sample::CompositionSample;
pub use zeros::{replace_zeros, DeltaPolicy};
