pub mod ansatz;
pub mod circuit;
pub mod cli;
pub mod compose;
pub mod diagram;
pub mod error;
pub mod frames;
pub mod ingest;
pub mod pregroup;
pub mod pipeline;
pub mod rewrite;
pub mod sandwich;
pub mod sim;
pub mod synthetic;
pub mod tree;

pub use error::{Error, Result};
