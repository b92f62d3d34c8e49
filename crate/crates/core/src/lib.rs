pub mod align;
pub mod annotate;
pub mod backend;
pub mod dataset;
pub mod dictionary;
pub mod eval;
pub mod generate;
pub mod model;
pub mod net;
pub mod parse;
pub mod presets;
pub mod prompt;
pub mod runner;
pub mod tokenize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
