//! Growth indicators of entire functions represented by vector-valued
//! Dirichlet series, in the generalised (index-pair) sense.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod growth;
pub mod indicators;
pub mod levelindex;
pub mod oracle;
pub mod series;
pub mod theorems;

pub use error::{Error, Result};
pub use levelindex::ExtReal;
