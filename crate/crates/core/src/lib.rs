//! Data engine for mining API signature updates and building code-editing
//! benchmarks from real-world invocations.

pub mod arglist;
pub mod bench;
pub mod diff;
pub mod locate;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod search;
pub mod synth;
pub mod text;
