//! An exact-arithmetic workbench for Fⁿ-crystals over finite fields.
//!
//! Elements of `W_m(F_{p^d})` are Galois-ring elements ([`GaloisRingElement`]);
//! a crystal ([`FCrystal`]) is a square matrix `M` over that ring with a twist
//! `n`, acting as `x ↦ M·σⁿ(x)` (column convention `F(e_j) = Σ_i M[i][j] e_i`).
//! On top of that sit Hodge and Newton polygons, families over affine space
//! with their strata, and Artin–Schreier systems `x = A·x^{[p]}`.

pub mod artinschreier;
pub mod caps;
pub mod error;
pub mod fcrystal;
pub mod io;
pub mod linalg;
pub mod polygons;
pub mod random;
pub mod strata;
pub mod suites;
pub mod wittring;

pub use artinschreier::AsInstance;
pub use caps::Caps;
pub use error::{Error, Result};
pub use fcrystal::FCrystal;
pub use polygons::{BreakPoint, Polygon, PolygonKind};
pub use strata::{ClosedPoint, FamilyCrystal, StratumReport};
pub use wittring::{FieldElement, FieldParams, GaloisRingElement};

/// Exact slope type.
pub type Rational = num_rational::Rational64;
