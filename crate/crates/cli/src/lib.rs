//! Experiment harness for the persuasion learning laboratory: instance
//! generators, seeded parallel experiment runs, and CSV/text reporting.

pub mod experiment;
pub mod generate;

pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentReport, GeometryTrial, Mode, PacTrial,
    ProfileKind, RegretTrial,
};
pub use generate::{
    gen_hardness1, gen_hardness2_known, gen_hardness3, gen_random_instance, GenError,
};
