//! Negative energy density of one- and two-mode states of a massless scalar field.

pub mod energy;
pub mod error;
pub mod families;
pub mod fock;
pub mod optimizer;
pub mod verify;

pub use error::{Error, Result};
pub use families::{FamilyKind, FamilyParams, Moments, OneModeMoments, TwoModeMoments};
