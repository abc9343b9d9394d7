//! Map zoo, map-spec parsing, the approximation experiment and CSV reports.

mod experiment;
mod report;
mod spec;
pub mod zoo;

pub use experiment::{
    base_indices, generate_target, run_approximation_experiment, run_experiments, with_workers,
    ApproximationRow, ExperimentConfig, ExperimentOutcome, TargetOrbit, MAX_SEED_ATTEMPTS,
};
pub use report::{emit_report, format_real, write_report, REPORT_HEADER};
pub use spec::{load_map_spec, resolve_map, BranchRecord, GeneratorSpec, MapSpec, Number, NumberLit};
pub use zoo::LoadedMap;

use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Float,
    Rational,
}

impl LoadedMap {
    /// Explicit choice, else the map file's choice, else rational whenever
    /// the map has an exact form.
    pub fn select_backend(&self, requested: Option<Backend>) -> crate::Result<Backend> {
        let chosen = requested.or(self.backend).unwrap_or(if self.exact.is_some() {
            Backend::Rational
        } else {
            Backend::Float
        });
        if chosen == Backend::Rational && self.exact.is_none() {
            return Err(crate::Error::NoExactForm);
        }
        Ok(chosen)
    }
}
