//! Everything around `stand-core` that needs `std`: dataset and model files,
//! the timing harness, benchmark runs with CSV/JSON traces, and the HTTP
//! teaching service. The `stand` binary wires these into a command line.

pub mod bench;
mod error;
pub mod export;
pub mod formats;
pub mod service;
pub mod timing;

pub use error::{Error, Result};
pub use export::{Model, ModelExport};
pub use formats::{load_dataset, load_path, write_dataset, Format, LabelPolicy};
