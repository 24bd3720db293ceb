pub mod baselines;
pub mod error;
pub mod io;
pub mod kernel;
pub mod model;
pub mod optimizer;
pub mod oracle;

pub use error::{Error, Result};
