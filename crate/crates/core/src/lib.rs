//! Online coreset construction for `l_p` subspace embeddings and tensor
//! contractions, with merge-reduce streaming, evaluation tools and a
//! latent-variable-model (topic) application.

pub mod bench;
pub mod cli;
pub mod error;
pub mod eval;
pub mod io;
pub mod leverage;
pub mod linalg;
pub mod lvm;
pub mod rng;
pub mod sampler;
pub mod stream;

pub use error::{CoresetError, Result};
