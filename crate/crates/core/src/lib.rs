//! Exact radial convolution algebra on free groups, Lorentz norms on counting
//! measure, set-search estimators for operator norms of `λ(f)`, and
//! verifiers for the associated inequalities.

pub mod error;
pub mod lorentz;
pub mod numeric;
pub mod operators;
pub mod radial;
pub mod report;
pub mod surd;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
pub use lorentz::{lorentz_norm, rearrange, rearrange_radial, weak_norm, LorentzIndex, Rearrangement};
pub use operators::{ElementSet, FunctionOnGroup};
pub use radial::RadialFunction;
pub use surd::Surd;
pub use words::{BallIndex, FreeGroupCtx, Letter, ReducedWord};
