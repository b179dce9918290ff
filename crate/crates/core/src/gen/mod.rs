//! Problem generators: a finite-volume discretization of the coupled
//! radiation/electron/ion diffusion equations, and a synthetic builder with
//! prescribed dominance and coupling strengths.
//!
//! Every generator output passes [`crate::threet::validate`]; invalid
//! configurations error instead of producing an instance.

mod fv;
mod synthetic;

pub use fv::{gen_fv, Boundary, Field, FvProblemConfig};
pub use synthetic::{gen_synthetic, random_config, SyntheticConfig};
