pub mod analytics;
pub mod channels;
pub mod config;
pub mod ed;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod majorana;
pub mod models;
pub mod momentum;
pub mod run;
pub mod spectral;
pub mod stochastic;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
