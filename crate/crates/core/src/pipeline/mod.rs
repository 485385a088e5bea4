//! The public-private learner: compress public data into a candidate set,
//! then pick one candidate with the ε-DP Scheffé tournament on private
//! data. Also the shifted/agnostic variant, a sample-size calculator, and
//! the seeded experiment harness.

mod config;
mod experiment;
mod learn;
mod suggest;

pub use config::{Family, LearnerConfig};
pub use experiment::{
    random_truth, run_experiment, ExperimentReport, ExperimentSpec, PublicSource, TrialRecord,
    TruthSpec, MIN_COMPONENT_SEPARATION,
};
pub use learn::{generate_candidates, pp_learn, pp_learn_agnostic_shifted, LearnOutcome, Learner};
pub use suggest::{suggest_n, SuggestN, SuggestRequest};
