//! Exact-arithmetic laboratory for online Bayesian persuasion with a
//! hidden prior and hidden receiver preferences: rational numerics, an
//! exact simplex solver, polytope geometry, the round-protocol simulator,
//! the explore-then-commit learner, and its PAC variants.

pub mod environment;
pub mod exactnum;
pub mod geometry;
pub mod learner;
pub mod lp;
pub mod model;
pub mod pac;
