pub mod catalog;
pub mod cli;
pub mod error;
pub mod metric;
pub mod ode;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod roots;

pub use error::{Error, Result};
