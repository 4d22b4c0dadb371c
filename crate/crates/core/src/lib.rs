pub mod efg;
pub mod error;
pub mod fd;
pub mod fueter;
pub mod gallery;
pub mod pde;
pub mod quadrature;
pub mod rq;
pub mod sov;
pub mod special;

pub use error::{Error, Result};
