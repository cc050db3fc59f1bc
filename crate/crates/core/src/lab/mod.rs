//! Inequality checks over gallery items and randomized step fields.

pub mod checks;
pub mod morrey;
pub mod report;
pub mod sampler;

pub use checks::{
    check_ac_norm, check_distance_bound, check_embedding_eps, check_equivalence, check_general_holder, check_holder,
    check_poincare_ratio, embedding_constant, poincare_ratio, witness_strict_inclusion, AcTarget, WitnessBundle,
};
pub use morrey::{check_morrey_1d, check_morrey_nd, morrey_1d_constant};
pub use report::{format_number, merge_reports, summarize, to_csv, to_jsonl, CheckReport, Params, Summary, Verdict};
pub use sampler::{estimate_holder_seminorm, PairSampler, SampleStrategy};
pub mod suites;
pub use suites::{run_suite, Suite};
