//! Path signatures, lead-lag analysis and signature-based causality tools for
//! multivariate time series.

pub mod causality;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod leadlag;
pub mod path;
pub mod signature;
pub mod stats;
pub mod tensor;

pub use error::{Error, Result};
pub use path::Path;
pub use tensor::{shuffle, TruncatedTensor, Word};
