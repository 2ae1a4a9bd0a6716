//! Single source localization on a facially reduced Euclidean distance
//! matrix model.
//!
//! The fixed anchor–anchor distances are replaced by one linear constraint
//! `⟨D, H⟩ = 0`, where `H` exposes the minimal face of the EDM cone that
//! contains them ([`face`]). The rank-constrained nearest-EDM problem on
//! that face is solved by a majorized penalty iteration whose subproblem has
//! a closed form ([`solver`]), and the source is read off by classical MDS
//! plus Procrustes alignment ([`recovery`]).

pub mod analysis;
pub mod edm;
pub mod error;
pub mod face;
pub mod harness;
pub mod instance;
pub mod pipeline;
pub mod projection;
pub mod recovery;
pub mod solver;
pub mod sym;

pub use error::{Error, Result};
pub use face::{exposing_vector, FaceCertificate};
pub use instance::{Instance, Noise};
pub use pipeline::{locate, Solution};
pub use solver::{frmpa_run, SolverConfig, SolverTrace};
pub use sym::SymMatrix;
