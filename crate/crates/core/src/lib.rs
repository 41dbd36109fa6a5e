//! Normalization of factorizations over symmetric cones, and the
//! compact-encoding pipeline that turns normalization into counting lower
//! bounds on extension complexity.
//!
//! Layout:
//! - [`cone`]: cone descriptors and membership tests
//! - [`barrier`]: self-scaled barriers, Hessians and their square roots
//! - [`scaling`]: the scaling program, its KKT certificate and Nesterov–Todd points
//! - [`recovery`]: linear-map recovery from paired sets and the half-cone counterexample
//! - [`net`]: ε-nets and max-volume subsystem selection
//! - [`encoding`]: compact encoding of a factorized polytope and its reconstruction
//! - [`polytope`]: exact 0/1 and cyclic instance families
//! - [`bounds`]: log-domain counting bounds
//! - [`io`]: JSON schemas and run manifests
//! - [`pipeline`]: instance to reconstruction in one call
//! - [`cli`]: the `conescale` command line

pub mod barrier;
pub mod bounds;
pub mod cli;
pub mod cone;
pub mod encoding;
pub mod error;
pub mod io;
pub mod recovery;
mod minnorm;
pub mod net;
pub mod pipeline;
pub mod polytope;
mod newton;
pub mod scaling;

pub use error::{Error, Result};
