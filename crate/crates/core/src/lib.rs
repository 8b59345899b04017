pub mod error;
pub mod experiment;
pub mod fermion;
pub mod fock;
pub mod index;
pub mod lattice;
pub mod maps;
pub mod sdp;
pub mod variational;

pub use error::{Error, Result};
