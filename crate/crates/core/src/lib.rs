//! Exact seminorm and lattice arithmetic over truncated perfected Laurent
//! rings.
//!
//! The model ring is the depth-k, precision-N truncation of the completed
//! perfection of F_p((T)): elements are finite F_p-combinations of monomials
//! `T^(a/p^k)` with exponent below N (and at or above a Laurent floor).
//! The norm fixes `||T|| = 1/2`, so every norm value is `2^(-e)` for a grid
//! rational e, and all comparisons are exact.
//!
//! On top of the ring sit finitely generated lattices with gauge seminorms,
//! modules of almost elements, torsion and almost-isomorphism tests, and
//! tensor-product seminorms — all carried out in exact arithmetic with
//! explicit precision-loss tracking.

pub mod error;
pub mod valnorm;
pub mod ring;
pub mod parse;
pub mod linalg;
pub mod fpwin;
pub mod lattice;
pub mod almostmod;
pub mod tensor;

pub use almostmod::{LatticeMap, ModulePresentation, Outcome, Verdict};
pub use error::{Error, Result};
pub use parse::parse_element;
pub use ring::{RingConfig, RingElement};
pub use valnorm::{Exp, NormValue};
