//! Finite fields `F_{p^d}` and truncated Witt vectors `W_m(F_{p^d})`,
//! realized as Galois rings `(Z/p^m)[u]/(f̂)`.

mod approx;
mod element;
mod embed;
mod field;
pub(crate) mod modulus;
mod params;

pub use approx::Approx;
pub use element::GaloisRingElement;
pub use embed::{base_change_element, Embedding};
pub use field::FieldElement;
pub use params::FieldParams;
