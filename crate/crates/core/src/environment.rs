//! The repeated-interaction simulator. It owns the hidden instance, draws
//! states and signals from a seeded generator, and exposes to the learner
//! only what the protocol allows: round feedback, the empirical prior
//! estimate, the sender's own utility table, and (when enabled) a direct
//! best-response query that consumes no rounds.

use crate::exactnum::{format_rational, Rational};
use crate::model::{chosen_action, sender_expected_utility, Instance, SignalingScheme};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("no observations yet: prior estimate needs at least one completed round")]
    NoObservations,
    #[error("direct queries require the direct oracle mode")]
    ModeViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Every piece of feedback costs a protocol round.
    Simulated,
    /// Best-response queries are answered instantly without consuming
    /// rounds; round-based play is still available.
    Direct,
}

/// Feedback from one completed round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub t: usize,
    pub theta: usize,
    pub signal_index: usize,
    pub signal: String,
    pub action: usize,
    pub u_s: Rational,
}

/// Empirical state frequencies after t − 1 completed rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorEstimate {
    pub counts: Vec<u64>,
    pub t: usize,
}

impl PriorEstimate {
    /// μ̂_θ = N_θ / (t − 1), exactly.
    pub fn mu_hat(&self) -> Vec<Rational> {
        let denom = BigInt::from(self.t as u64 - 1);
        self.counts
            .iter()
            .map(|&c| Rational::new(BigInt::from(c), denom.clone()))
            .collect()
    }
}

/// What the learner is allowed to see. Implementations must not leak the
/// prior or the receiver's utilities; the learner modules are written
/// against this trait alone.
pub trait RoundOracle {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// The sender knows their own utility table.
    fn sender_utility(&self) -> &[Vec<Rational>];
    /// Current round counter t (starts at 1, increments per played round).
    fn round(&self) -> usize;
    fn oracle_mode(&self) -> OracleMode;
    fn commit_and_play(&mut self, phi: &SignalingScheme) -> RoundOutcome;
    fn prior_estimate(&self) -> Result<PriorEstimate, EnvError>;
    /// Answer the receiver's choice under slice `x` without playing a round.
    fn direct_action_query(&mut self, x: &[Rational]) -> Result<usize, EnvError>;
    /// The true prior, available only when the environment was built with
    /// the prior exposed (the known-prior setting).
    fn exposed_prior(&self) -> Option<&[Rational]> {
        None
    }
}

/// Per-scheme precomputation, rebuilt only when the committed table changes.
/// Long runs re-commit the same scheme for thousands of consecutive rounds;
/// caching turns each such round into two CDF lookups.
struct SchemeCache {
    table: Vec<Vec<Rational>>,
    /// Exact expected sender utility of the scheme under the true instance.
    expected: Rational,
    /// Per-state cumulative signal masses, as ⌈c·2^64⌉ draw thresholds.
    cdfs: Vec<Vec<u128>>,
    /// Receiver's chosen action per signal; `None` for all-zero slices.
    actions: Vec<Option<usize>>,
}

pub struct Environment {
    instance: Instance,
    rng: ChaCha8Rng,
    t: usize,
    counts: Vec<u64>,
    transcript: Vec<RoundOutcome>,
    mode: OracleMode,
    direct_queries: u64,
    expose_prior: bool,
    recording: bool,
    prior_cdf: Vec<u128>,
    cache: Option<SchemeCache>,
    /// Harness-side ledger: exact expected sender utility of the committed
    /// scheme, run-length encoded as (first round, value). Never read by
    /// the learner.
    expected_rle: Vec<(usize, Rational)>,
}

impl Environment {
    pub fn new(instance: Instance, seed: u64, mode: OracleMode) -> Self {
        let d = instance.d;
        let mut prior_cdf = Vec::with_capacity(d);
        let mut acc = Rational::zero();
        for w in &instance.prior {
            acc += w;
            prior_cdf.push(Self::ceil_shift64(&acc));
        }
        Environment {
            instance,
            rng: ChaCha8Rng::seed_from_u64(seed),
            t: 1,
            counts: vec![0; d],
            transcript: Vec::new(),
            mode,
            direct_queries: 0,
            expose_prior: false,
            recording: true,
            prior_cdf,
            cache: None,
            expected_rle: Vec::new(),
        }
    }

    /// Disable per-round transcript storage (counts and the expected-utility
    /// ledger still accrue); for runs of millions of rounds.
    pub fn set_recording(&mut self, on: bool) {
        self.recording = on;
    }

    /// Known-prior variant: identical, but `exposed_prior` reveals μ.
    pub fn with_exposed_prior(instance: Instance, seed: u64, mode: OracleMode) -> Self {
        let mut env = Self::new(instance, seed, mode);
        env.expose_prior = true;
        env
    }

    /// ⌈c·2^64⌉ for a cumulative weight c ∈ [0,1]. A 64-bit draw k encodes
    /// the exact uniform k/2^64, and k/2^64 < c ⟺ k < ⌈c·2^64⌉, so
    /// inverse-CDF sampling needs only integer comparisons per round.
    fn ceil_shift64(c: &Rational) -> u128 {
        let num: BigInt = c.numer() << 64u32;
        let den = c.denom();
        let q: BigInt = (num + den - 1) / den;
        let (_, digits) = q.to_u64_digits();
        match digits.as_slice() {
            [] => 0,
            [lo] => *lo as u128,
            [lo, hi] => ((*hi as u128) << 64) | *lo as u128,
            _ => unreachable!("cumulative weights never exceed 1"),
        }
    }

    /// Inverse-CDF sample: first index whose cumulative weight exceeds the
    /// exact uniform k/2^64.
    fn cdf_index(thresholds: &[u128], k: u64) -> usize {
        for (i, t) in thresholds.iter().enumerate() {
            if (k as u128) < *t {
                return i;
            }
        }
        thresholds.len() - 1 // guard against k landing on total weight exactly 1
    }

    pub fn transcript(&self) -> &[RoundOutcome] {
        &self.transcript
    }

    pub fn direct_queries(&self) -> u64 {
        self.direct_queries
    }

    /// Harness-side: exact expected utilities of the schemes committed so
    /// far, one per round (expanded from the run-length encoding).
    pub fn expected_utility_log(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.t - 1);
        for (i, (start, v)) in self.expected_rle.iter().enumerate() {
            let end = self
                .expected_rle
                .get(i + 1)
                .map_or(self.t, |(s, _)| *s);
            for _ in *start..end {
                out.push(v.clone());
            }
        }
        out
    }

    /// The expected-utility ledger as (first round, per-round value) runs.
    pub fn expected_utility_rle(&self) -> &[(usize, Rational)] {
        &self.expected_rle
    }

    /// Harness-side access to the hidden instance (reporting only).
    pub fn ground_truth(&self) -> &Instance {
        &self.instance
    }

    /// Transcript as CSV with columns t, theta, signal, action, u_s.
    pub fn transcript_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "theta", "signal", "action", "u_s"])
            .expect("csv header");
        for r in &self.transcript {
            w.write_record([
                r.t.to_string(),
                r.theta.to_string(),
                r.signal.clone(),
                r.action.to_string(),
                format_rational(&r.u_s),
            ])
            .expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }
}

impl RoundOracle for Environment {
    fn num_states(&self) -> usize {
        self.instance.d
    }

    fn num_actions(&self) -> usize {
        self.instance.n
    }

    fn sender_utility(&self) -> &[Vec<Rational>] {
        &self.instance.sender_utility
    }

    fn round(&self) -> usize {
        self.t
    }

    fn oracle_mode(&self) -> OracleMode {
        self.mode
    }

    fn commit_and_play(&mut self, phi: &SignalingScheme) -> RoundOutcome {
        let stale = match &self.cache {
            Some(c) => c.table != phi.table,
            None => true,
        };
        if stale {
            debug_assert!(phi.validate().is_ok());
            debug_assert_eq!(phi.table.len(), self.instance.d);
            let d = self.instance.d;
            let m = phi.num_signals();
            let mut actions: Vec<Option<usize>> = vec![None; m];
            let mut expected = Rational::zero();
            for (s, slot) in actions.iter_mut().enumerate() {
                let x = phi.slice_by_index(s);
                if x.iter().all(|v| v.is_zero()) {
                    continue;
                }
                let a = chosen_action(&self.instance, &x).expect("nonzero slice");
                *slot = Some(a);
                expected += (0..d)
                    .map(|t| {
                        &self.instance.prior[t]
                            * &phi.table[t][s]
                            * &self.instance.sender_utility[t][a]
                    })
                    .sum::<Rational>();
            }
            debug_assert_eq!(expected, sender_expected_utility(&self.instance, phi));
            let cdfs = phi
                .table
                .iter()
                .map(|row| {
                    let mut acc = Rational::zero();
                    row.iter()
                        .map(|w| {
                            acc += w;
                            Self::ceil_shift64(&acc)
                        })
                        .collect()
                })
                .collect();
            self.cache = Some(SchemeCache {
                table: phi.table.clone(),
                expected,
                cdfs,
                actions,
            });
        }
        // Fixed draw order: state first, then signal; each draw is one
        // 64-bit word encoding the exact uniform k/2^64.
        let k_state = self.rng.next_u64();
        let theta = Self::cdf_index(&self.prior_cdf, k_state);
        let k_signal = self.rng.next_u64();
        let cache = self.cache.as_ref().expect("cache built above");
        let signal_index = Self::cdf_index(&cache.cdfs[theta], k_signal);
        let action = cache.actions[signal_index]
            .expect("a sent signal has positive mass in the sending state");
        let expected = cache.expected.clone();
        match self.expected_rle.last() {
            Some((_, v)) if *v == expected => {}
            _ => self.expected_rle.push((self.t, expected)),
        }
        let outcome = RoundOutcome {
            t: self.t,
            theta,
            signal_index,
            signal: phi.signals[signal_index].clone(),
            action,
            u_s: self.instance.sender_utility[theta][action].clone(),
        };
        self.counts[theta] += 1;
        if self.recording {
            self.transcript.push(outcome.clone());
        }
        self.t += 1;
        outcome
    }

    fn prior_estimate(&self) -> Result<PriorEstimate, EnvError> {
        if self.t < 2 {
            return Err(EnvError::NoObservations);
        }
        Ok(PriorEstimate {
            counts: self.counts.clone(),
            t: self.t,
        })
    }

    fn direct_action_query(&mut self, x: &[Rational]) -> Result<usize, EnvError> {
        if self.mode != OracleMode::Direct {
            return Err(EnvError::ModeViolation);
        }
        self.direct_queries += 1;
        Ok(chosen_action(&self.instance, x).expect("query slice must be nonzero"))
    }

    fn exposed_prior(&self) -> Option<&[Rational]> {
        if self.expose_prior {
            Some(&self.instance.prior)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int, to_f64};
    use num_traits::Signed;
    use rand::Rng;

    fn instance_2x2() -> Instance {
        Instance::new(
            2,
            2,
            vec![rat(3, 4), rat(1, 4)],
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
            ],
            vec![
                vec![rat(1, 2), rat_int(1)],
                vec![rat_int(0), rat(1, 3)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn determinism_same_seed_same_transcript() {
        let phi = SignalingScheme::two_signal(&[rat(1, 3), rat(2, 3)]);
        let mut a = Environment::new(instance_2x2(), 42, OracleMode::Simulated);
        let mut b = Environment::new(instance_2x2(), 42, OracleMode::Simulated);
        for _ in 0..200 {
            assert_eq!(a.commit_and_play(&phi), b.commit_and_play(&phi));
        }
        assert_eq!(a.transcript_csv(), b.transcript_csv());
        let mut c = Environment::new(instance_2x2(), 43, OracleMode::Simulated);
        let differs = (0..200).any(|_| c.commit_and_play(&phi) != a.transcript()[0]);
        assert!(differs);
    }

    #[test]
    fn golden_transcript_seed_42() {
        // Recorded once; any drift in the draw order or sampling scheme
        // shows up as a diff against this frozen transcript.
        let mut env = Environment::new(instance_2x2(), 42, OracleMode::Simulated);
        let phi = SignalingScheme::uninformative(2);
        for _ in 0..20 {
            env.commit_and_play(&phi);
        }
        let got = env.transcript_csv();
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/golden/transcript_seed42.csv");
        match std::fs::read_to_string(path) {
            Ok(want) => assert_eq!(got, want, "transcript drifted from recorded fixture"),
            Err(_) => std::fs::write(path, &got).expect("record fixture"),
        }
    }

    #[test]
    fn full_revelation_plays_statewise_argmax() {
        let mut env = Environment::new(instance_2x2(), 7, OracleMode::Simulated);
        let phi = SignalingScheme::full_revelation(2);
        for _ in 0..100 {
            let r = env.commit_and_play(&phi);
            // Point-mass posterior: receiver argmax, here action = state.
            assert_eq!(r.signal_index, r.theta);
            assert_eq!(r.action, r.theta);
            assert_eq!(r.u_s, env.ground_truth().sender_utility[r.theta][r.action]);
        }
        assert_eq!(env.round(), 101);
        assert_eq!(env.transcript().len(), 100);
    }

    #[test]
    fn prior_estimate_counts() {
        let mut env = Environment::new(instance_2x2(), 0, OracleMode::Simulated);
        assert_eq!(env.prior_estimate(), Err(EnvError::NoObservations));
        let phi = SignalingScheme::uninformative(2);
        for _ in 0..300 {
            env.commit_and_play(&phi);
        }
        let est = env.prior_estimate().unwrap();
        assert_eq!(est.counts.iter().sum::<u64>(), 300);
        let mu_hat = est.mu_hat();
        let total: Rational = mu_hat.iter().cloned().sum();
        assert_eq!(total, rat_int(1));
        assert_eq!(
            mu_hat[0],
            Rational::new(est.counts[0].into(), 300.into())
        );
    }

    #[test]
    fn prior_estimate_small_example() {
        // Observations θ0, θ0, θ1 → μ̂ = (2/3, 1/3).
        let est = PriorEstimate {
            counts: vec![2, 1],
            t: 4,
        };
        assert_eq!(est.mu_hat(), vec![rat(2, 3), rat(1, 3)]);
    }

    #[test]
    fn prior_estimate_concentrates() {
        // 10⁴ rounds on μ = (3/4, 1/4): |μ̂ − μ| ≤ 1/20 in ≥ 99/100 seeds
        // (Hoeffding gives failure probability ≪ 1/100 per seed).
        let phi = SignalingScheme::uninformative(2);
        let tol = rat(1, 20);
        let mut good = 0;
        for seed in 0..100u64 {
            let mut env = Environment::new(instance_2x2(), seed, OracleMode::Simulated);
            for _ in 0..10_000 {
                env.commit_and_play(&phi);
            }
            let mu_hat = env.prior_estimate().unwrap().mu_hat();
            let dev0 = (mu_hat[0].clone() - rat(3, 4)).abs();
            let dev1 = (mu_hat[1].clone() - rat(1, 4)).abs();
            if dev0 <= tol && dev1 <= tol {
                good += 1;
            }
        }
        assert!(good >= 99, "only {good}/100 seeds concentrated");
    }

    #[test]
    fn signal_frequency_matches_slice_mass() {
        // Two-signal scheme with slice x: frequency of s1 over 10⁵ rounds
        // is within 3σ of q = Σ_θ μ_θ x_θ.
        let x = vec![rat(1, 3), rat(2, 3)];
        let q = rat(3, 4) * rat(1, 3) + rat(1, 4) * rat(2, 3); // 5/12
        let phi = SignalingScheme::two_signal(&x);
        let mut env = Environment::new(instance_2x2(), 2, OracleMode::Simulated);
        let t = 100_000;
        let mut s1 = 0u64;
        for _ in 0..t {
            if env.commit_and_play(&phi).signal_index == 0 {
                s1 += 1;
            }
        }
        let qf = to_f64(&q);
        let sigma = (qf * (1.0 - qf) / t as f64).sqrt();
        let freq = s1 as f64 / t as f64;
        assert!((freq - qf).abs() <= 3.0 * sigma, "freq {freq} vs {qf}");
    }

    #[test]
    fn direct_queries_match_chosen_action_and_cost_nothing() {
        let inst = instance_2x2();
        let mut env = Environment::new(inst.clone(), 5, OracleMode::Direct);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = rat(rng.gen_range(0..=8), 8);
            let x = vec![a.clone(), rat_int(1) - a];
            if x.iter().all(|v| v.is_zero()) {
                continue;
            }
            assert_eq!(
                env.direct_action_query(&x).unwrap(),
                crate::model::chosen_action(&inst, &x).unwrap()
            );
        }
        assert_eq!(env.round(), 1);
        assert_eq!(env.transcript().len(), 0);
        assert_eq!(env.direct_queries(), 100);
    }

    #[test]
    fn mode_violation() {
        let mut env = Environment::new(instance_2x2(), 5, OracleMode::Simulated);
        assert_eq!(
            env.direct_action_query(&[rat(1, 2), rat(1, 2)]),
            Err(EnvError::ModeViolation)
        );
    }

    #[test]
    fn learner_view_compiles_against_trait_alone() {
        // The learner-facing surface: a function generic over the trait can
        // reach feedback and the sender's table, but nothing hidden.
        fn probe<O: RoundOracle>(o: &mut O) -> (usize, usize, Rational) {
            let phi = SignalingScheme::uninformative(o.num_states());
            let r = o.commit_and_play(&phi);
            let u = o.sender_utility()[r.theta][r.action].clone();
            (o.num_actions(), o.round(), u)
        }
        let mut env = Environment::new(instance_2x2(), 1, OracleMode::Simulated);
        let (n, t, u) = probe(&mut env);
        assert_eq!((n, t), (2, 2));
        assert_eq!(u, env.transcript()[0].u_s);
        assert_eq!(env.exposed_prior(), None);
        let env2 = Environment::with_exposed_prior(instance_2x2(), 1, OracleMode::Simulated);
        assert_eq!(env2.exposed_prior().unwrap(), &[rat(3, 4), rat(1, 4)]);
    }

    #[test]
    fn rle_log_and_recording_switch() {
        let inst = instance_2x2();
        let mut env = Environment::new(inst.clone(), 3, OracleMode::Simulated);
        env.set_recording(false);
        let phi1 = SignalingScheme::uninformative(2);
        let phi2 = SignalingScheme::full_revelation(2);
        for _ in 0..5 {
            env.commit_and_play(&phi1);
        }
        for _ in 0..3 {
            env.commit_and_play(&phi2);
        }
        assert!(env.transcript().is_empty());
        assert_eq!(env.round(), 9);
        assert_eq!(
            env.expected_utility_rle(),
            &[
                (1, sender_expected_utility(&inst, &phi1)),
                (6, sender_expected_utility(&inst, &phi2)),
            ]
        );
        assert_eq!(env.expected_utility_log().len(), 8);
        assert_eq!(
            env.expected_utility_log()[4],
            sender_expected_utility(&inst, &phi1)
        );
    }

    #[test]
    fn expected_utility_log_tracks_commitments() {
        let inst = instance_2x2();
        let mut env = Environment::new(inst.clone(), 2, OracleMode::Simulated);
        let phi1 = SignalingScheme::uninformative(2);
        let phi2 = SignalingScheme::full_revelation(2);
        env.commit_and_play(&phi1);
        env.commit_and_play(&phi2);
        assert_eq!(
            env.expected_utility_log(),
            &[
                sender_expected_utility(&inst, &phi1),
                sender_expected_utility(&inst, &phi2)
            ]
        );
    }
}
