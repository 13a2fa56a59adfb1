//! Field and polynomial arithmetic underneath everything else.

pub mod field;
pub mod ntt;
pub mod poly;

pub use field::{is_prime_u64, select_field, Fe, FieldConfig, PRIME_TABLE};
pub use poly::{interpolate, Poly};
