pub mod curve;
pub mod error;
pub mod germ;
pub mod newton;
pub mod piecewise;
pub mod rational;
pub mod scalars;

pub use error::Error;
pub mod io;
pub mod riemann_roch;
pub mod verify;
