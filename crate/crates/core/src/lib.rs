pub mod elliptic;
pub mod error;
pub mod fd_oracle;
pub mod hamel2d;
pub mod io;
pub mod landau3d;
pub mod quad;
pub mod sphere_solver;
pub mod suite;
pub mod verify;

pub use error::{Error, Result};
