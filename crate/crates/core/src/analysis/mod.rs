//! Assumption validators, a-priori bounds, positivity certification and the
//! parameter-continuation harness.

mod assumptions;
mod bounds;
mod continuation;
mod positivity;

pub use assumptions::{
    check_a2, check_a3, check_a5, check_a6, check_a8, validate_assumptions, AssumptionEntry, AssumptionReport,
    Sampling, Status, Witness, A8_TOLERANCE,
};
pub use bounds::{apriori_bound, emden_coercivity_bound, AprioriBound, EmdenBound};
pub use continuation::{
    continuation_run, convergence_observed, ContinuationOptions, ContinuationReport, ContinuationStep,
    ContinuationSummary, LIMIT_SLACK,
};
pub use positivity::{comparison_check, positivity_check, ComparisonCheck, PositivityCheck};
