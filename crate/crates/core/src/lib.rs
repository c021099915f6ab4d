//! Convex operational models: regular cones, COMs and their morphisms,
//! composites, conditioning, teleportation and self-duality checks.

pub mod com;
pub mod composite;
pub mod conditioning;
pub mod cone;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod matching;
pub mod models;
pub mod protocols;
pub mod scalar;
pub mod selfdual;
pub mod settings;

pub use error::{ComError, Result};
pub use scalar::{Field, Q};
