//! PAC variants of the learner: instead of balancing exploration against a
//! round horizon, explore until a γ-optimal scheme is identified with
//! probability ≥ 1 − η, then return the scheme and the exact round count.

use num_bigint::BigInt;
use num_traits::One;

use crate::environment::RoundOracle;
use crate::exactnum::{rat_int, to_f64, Rational};
use crate::learner::{
    build_search_space, compute_signaling, find_polytopes, AbortReason, ConstantProfile,
    SearchSpace, SearchStop,
};
use crate::model::SignalingScheme;

/// Accuracy/confidence targets for a PAC run. γ is the tolerated
/// suboptimality of the output scheme, η the failure probability; both
/// internal confidence shares (phase-1 δ and phase-2 ζ) are η/2.
#[derive(Debug, Clone)]
pub struct PacConfig {
    pub gamma: Rational,
    pub eta: Rational,
    pub profile: ConstantProfile,
    pub learner_seed: u64,
}

impl PacConfig {
    pub fn new(gamma: Rational, eta: Rational, profile: ConstantProfile) -> Self {
        assert!(
            gamma > Rational::new(BigInt::from(0), BigInt::one()) && gamma < Rational::one(),
            "gamma must lie in (0,1)"
        );
        assert!(
            eta > Rational::new(BigInt::from(0), BigInt::one()) && eta < Rational::one(),
            "eta must lie in (0,1)"
        );
        PacConfig {
            gamma,
            eta,
            profile,
            learner_seed: 0,
        }
    }
}

/// Rounds ε1 down to the largest power of two not exceeding it: ε = 2^{−k}
/// for the smallest k with 2^{−k} ≤ ε1, so ε ∈ [ε1/2, ε1] and
/// B_ε = O(log(1/ε1)).
pub fn compute_threshold(eps1: &Rational) -> Rational {
    assert!(
        eps1 > &Rational::new(BigInt::from(0), BigInt::one()) && eps1 <= &Rational::one(),
        "threshold seed must lie in (0,1]"
    );
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut eps = half.clone();
    while &eps > eps1 {
        eps *= &half;
    }
    eps
}

/// Hoeffding-scale phase-1 length T1 = ⌈(1/(2ε²))·ln(2d/δ)⌉: long enough
/// that every coordinate of μ̂ lands within ε of μ with probability ≥ 1 − δ.
pub fn pac_phase_one_length(epsilon: &Rational, delta: &Rational, d: usize) -> usize {
    let e = to_f64(epsilon);
    let arg = 2.0 * d as f64 / to_f64(delta);
    ((1.0 / (2.0 * e * e)) * arg.ln()).ceil().max(1.0) as usize
}

/// The result of a PAC run: the committed scheme, how many environment
/// rounds it took to find, and the internal accuracy the run settled on.
#[derive(Debug, Clone)]
pub struct PacOutcome {
    pub scheme: SignalingScheme,
    pub rounds_used: usize,
    pub epsilon: Rational,
    pub t1: usize,
}

/// Unknown-prior PAC learner: estimate the prior over T1 uninformative
/// rounds, learn the best-response regions inside X_ε, and return the LP
/// scheme for the frozen estimate. ε1 = γ/(12nd), δ = ζ = η/2.
pub fn run_pac(env: &mut dyn RoundOracle, cfg: &PacConfig) -> Result<PacOutcome, AbortReason> {
    let d = env.num_states();
    let n = env.num_actions();
    let delta = &cfg.eta / rat_int(2);
    let zeta = delta.clone();
    let eps1 = &cfg.gamma / rat_int(12 * (n as i64) * (d as i64));
    let epsilon = compute_threshold(&eps1);
    let t1 = pac_phase_one_length(&epsilon, &delta, d);
    let space = build_search_space(env, t1, &epsilon)?;
    finish(env, space, &zeta, cfg, t1)
}

/// Known-prior PAC learner: the prior is read off the environment, phase 1
/// is skipped entirely, and the whole confidence budget η goes to the
/// region search. ε1 = γ/(10nd).
pub fn run_pac_known_prior(
    env: &mut dyn RoundOracle,
    cfg: &PacConfig,
) -> Result<PacOutcome, AbortReason> {
    let d = env.num_states();
    let n = env.num_actions();
    let mu = env
        .exposed_prior()
        .expect("known-prior run needs an environment with the prior exposed")
        .to_vec();
    let eps1 = &cfg.gamma / rat_int(10 * (n as i64) * (d as i64));
    let epsilon = compute_threshold(&eps1);
    let space = SearchSpace::from_prior(mu, &epsilon)?;
    let zeta = cfg.eta.clone();
    finish(env, space, &zeta, cfg, 0)
}

fn finish(
    env: &mut dyn RoundOracle,
    space: SearchSpace,
    zeta: &Rational,
    cfg: &PacConfig,
    t1: usize,
) -> Result<PacOutcome, AbortReason> {
    let regions = find_polytopes(env, &space, zeta, cfg.profile, cfg.learner_seed, None)
        .map_err(|stop| match stop {
            SearchStop::Abort(a) => a,
            SearchStop::OutOfRounds => unreachable!("PAC runs have no round limit"),
        })?;
    let scheme = compute_signaling(&regions, &space.mu_hat, env.sender_utility());
    Ok(PacOutcome {
        scheme,
        rounds_used: env.round() - 1,
        epsilon: space.epsilon.clone(),
        t1,
    })
}
