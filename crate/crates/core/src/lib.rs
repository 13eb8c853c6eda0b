pub mod error;
pub mod seed;
pub mod special;
pub mod distributions;
pub mod blockmax;
pub mod stats;
pub mod mode;
pub mod scaling;
pub mod estimators;
pub mod sim;
pub mod ingest;
pub mod timeseries;
pub mod cli;
