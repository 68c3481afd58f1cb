pub mod arith;
pub mod bundle_p1;
pub mod dcoh;
pub mod diffops;
pub mod dmod;
pub mod error;
pub mod field;
pub mod gen;
pub mod json;
pub mod laurent;
pub mod linalg;
pub mod poly;
pub mod spectral;
pub mod towers;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Fe, Field, FieldSpec};
