pub mod archive;
pub mod config;
pub mod demo;
pub mod formats;
pub mod pipeline;
pub mod records;
pub mod scrub;
pub mod service;
pub mod stats;
pub mod synth;
