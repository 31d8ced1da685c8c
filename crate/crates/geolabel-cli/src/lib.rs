//! Batch harness over the geolabel library: instance generation, label
//! construction, decode-vs-oracle verification, and scaling benchmarks.

pub mod commands;
pub mod pipeline;

pub use commands::{
    cmd_bench, cmd_gen, cmd_label, cmd_verify, load_instance, run_bench, verify_labels,
    BenchRecord, BenchSummary, ExperimentConfig, VerifyReport,
};
pub use pipeline::{
    build_labels, compatible_schemes, dedicated_scheme, segment_relation_decomposition,
    unit_disk_decomposition, BuildOutput, Scheme, SchemeParams,
};
