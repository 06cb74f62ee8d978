//! Configuration, file formats and the replicated experiment runner.

pub mod config;
pub mod experiment;
pub mod io;

pub use config::{Algorithm, ExperimentConfig, InitSpec, OutputSpec, PriorSpec, SizesKeyword, SizesSpec};
pub use experiment::{
    build_priors, fit_graph, run_experiment, sample_instance, ExperimentSummary, FitResult, FitSpec, LossAggregate,
    ReplicationRow,
};
pub use io::{
    parse_edgelist, parse_labels, read_edgelist, read_labels, write_edgelist, write_edgelist_to, write_labels,
    write_labels_to,
};
