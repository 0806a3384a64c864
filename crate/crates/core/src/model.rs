//! Persuasion instances, signaling schemes, slices, receiver best responses
//! with sender-favorable tie-breaking, and exact ground-truth oracles.
//!
//! States are indexed 0..d, actions 0..n. All quantities are exact
//! rationals; comparisons are exact, so tie-breaking is deterministic.

use crate::exactnum::{
    bit_complexity, format_rational, parse_rational, vector_bit_complexity, Rational,
};
use crate::geometry::Hyperplane;
use crate::lp::{self, LinearProgram, LpStatus, Relation};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance invalid: {0}")]
    InvalidInstance(String),
    #[error("signaling scheme invalid: {0}")]
    InvalidScheme(String),
    #[error("unknown signal {0:?}")]
    UnknownSignal(String),
    #[error("slice is identically zero: posterior undefined")]
    ZeroSlice,
    #[error("actions coincide: no separating hyperplane")]
    EqualActions,
    #[error("malformed instance file: {0}")]
    Malformed(String),
}

/// A persuasion instance: d states, n actions, interior prior, receiver and
/// sender utility tables in [0,1] (rows = states, columns = actions).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub d: usize,
    pub n: usize,
    pub prior: Vec<Rational>,
    pub receiver_utility: Vec<Vec<Rational>>,
    pub sender_utility: Vec<Vec<Rational>>,
}

/// On-disk shape of an instance: all rationals as "p/q" strings (integers
/// may omit the denominator).
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    d: usize,
    n: usize,
    prior: Vec<String>,
    receiver_utility: Vec<Vec<String>>,
    sender_utility: Vec<Vec<String>>,
}

impl Instance {
    /// Fully validated constructor; reports the first violation found.
    pub fn new(
        d: usize,
        n: usize,
        prior: Vec<Rational>,
        receiver_utility: Vec<Vec<Rational>>,
        sender_utility: Vec<Vec<Rational>>,
    ) -> Result<Self, ModelError> {
        let inst = Instance {
            d,
            n,
            prior,
            receiver_utility,
            sender_utility,
        };
        inst.validate(true)?;
        Ok(inst)
    }

    /// Constructor for the lower-bound instance families, which at small d
    /// may contain receiver actions with identical utility columns (the
    /// sender-favorable tie-break then separates them). All other
    /// invariants are still enforced.
    pub fn new_allow_equivalent_actions(
        d: usize,
        n: usize,
        prior: Vec<Rational>,
        receiver_utility: Vec<Vec<Rational>>,
        sender_utility: Vec<Vec<Rational>>,
    ) -> Result<Self, ModelError> {
        let inst = Instance {
            d,
            n,
            prior,
            receiver_utility,
            sender_utility,
        };
        inst.validate(false)?;
        Ok(inst)
    }

    fn validate(&self, reject_equivalent_actions: bool) -> Result<(), ModelError> {
        let err = |m: String| Err(ModelError::InvalidInstance(m));
        if self.d < 2 || self.n < 2 {
            return err(format!("need d ≥ 2 and n ≥ 2, got d={}, n={}", self.d, self.n));
        }
        if self.prior.len() != self.d {
            return err(format!(
                "prior has {} entries, expected {}",
                self.prior.len(),
                self.d
            ));
        }
        for (theta, p) in self.prior.iter().enumerate() {
            if !p.is_positive() {
                return err(format!("prior[{theta}] must be strictly positive"));
            }
        }
        let total: Rational = self.prior.iter().cloned().sum();
        if !total.is_one() {
            return err(format!("prior sums to {}, not 1", format_rational(&total)));
        }
        for (name, table) in [
            ("receiver_utility", &self.receiver_utility),
            ("sender_utility", &self.sender_utility),
        ] {
            if table.len() != self.d {
                return err(format!("{name} has {} rows, expected {}", table.len(), self.d));
            }
            for (theta, row) in table.iter().enumerate() {
                if row.len() != self.n {
                    return err(format!(
                        "{name}[{theta}] has {} entries, expected {}",
                        row.len(),
                        self.n
                    ));
                }
                for (a, u) in row.iter().enumerate() {
                    if u.is_negative() || u > &Rational::one() {
                        return err(format!("{name}[{theta}][{a}] outside [0,1]"));
                    }
                }
            }
        }
        if reject_equivalent_actions {
            for i in 0..self.n {
                for j in i + 1..self.n {
                    if (0..self.d).all(|t| self.receiver_utility[t][i] == self.receiver_utility[t][j])
                    {
                        return err(format!("receiver actions {i} and {j} are equivalent"));
                    }
                }
            }
        }
        Ok(())
    }

    /// B := B_μ + B_u, the instance bit-complexity driving search budgets.
    pub fn bit_complexity_b(&self) -> u64 {
        let b_mu = vector_bit_complexity(&self.prior).expect("prior nonempty");
        let b_u = self
            .receiver_utility
            .iter()
            .flatten()
            .map(bit_complexity)
            .max()
            .expect("utilities nonempty");
        b_mu + b_u
    }

    pub fn from_json_str(s: &str) -> Result<Self, ModelError> {
        let file: InstanceFile =
            serde_json::from_str(s).map_err(|e| ModelError::Malformed(e.to_string()))?;
        let parse_vec = |v: &[String]| -> Result<Vec<Rational>, ModelError> {
            v.iter()
                .map(|s| parse_rational(s).map_err(|e| ModelError::Malformed(e.to_string())))
                .collect()
        };
        let prior = parse_vec(&file.prior)?;
        let ru = file
            .receiver_utility
            .iter()
            .map(|r| parse_vec(r))
            .collect::<Result<Vec<_>, _>>()?;
        let su = file
            .sender_utility
            .iter()
            .map(|r| parse_vec(r))
            .collect::<Result<Vec<_>, _>>()?;
        // Files may carry the lower-bound instance families, which contain
        // payoff-equivalent receiver actions by construction.
        Instance::new_allow_equivalent_actions(file.d, file.n, prior, ru, su)
    }

    pub fn to_json_string(&self) -> String {
        let fmt_vec = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
        let file = InstanceFile {
            d: self.d,
            n: self.n,
            prior: fmt_vec(&self.prior),
            receiver_utility: self.receiver_utility.iter().map(|r| fmt_vec(r)).collect(),
            sender_utility: self.sender_utility.iter().map(|r| fmt_vec(r)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }
}

/// Per-state distributions over a common signal set; rows sum to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalingScheme {
    pub signals: Vec<String>,
    /// table[theta][s] = φ_θ(signal s)
    pub table: Vec<Vec<Rational>>,
}

impl SignalingScheme {
    pub fn new(signals: Vec<String>, table: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let scheme = SignalingScheme { signals, table };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |m: String| Err(ModelError::InvalidScheme(m));
        for (theta, row) in self.table.iter().enumerate() {
            if row.len() != self.signals.len() {
                return err(format!("row {theta} width mismatch"));
            }
            for p in row {
                if p.is_negative() {
                    return err(format!("negative probability in row {theta}"));
                }
            }
            let total: Rational = row.iter().cloned().sum();
            if !total.is_one() {
                return err(format!(
                    "row {theta} sums to {}, not 1",
                    format_rational(&total)
                ));
            }
        }
        Ok(())
    }

    /// The single-signal scheme revealing nothing.
    pub fn uninformative(d: usize) -> Self {
        SignalingScheme {
            signals: vec!["s".into()],
            table: vec![vec![Rational::one()]; d],
        }
    }

    /// One signal per state, sent deterministically.
    pub fn full_revelation(d: usize) -> Self {
        let signals = (0..d).map(|t| format!("s{t}")).collect();
        let table = (0..d)
            .map(|t| {
                let mut row = vec![Rational::zero(); d];
                row[t] = Rational::one();
                row
            })
            .collect();
        SignalingScheme { signals, table }
    }

    /// The two-signal scheme with φ_θ(s1) = x_θ, φ_θ(s2) = 1 − x_θ.
    pub fn two_signal(x: &[Rational]) -> Self {
        let table = x
            .iter()
            .map(|v| vec![v.clone(), Rational::one() - v])
            .collect();
        SignalingScheme {
            signals: vec!["s1".into(), "s2".into()],
            table,
        }
    }

    pub fn num_signals(&self) -> usize {
        self.signals.len()
    }

    /// The slice of this scheme with respect to signal index `s`.
    pub fn slice_by_index(&self, s: usize) -> Vec<Rational> {
        self.table.iter().map(|row| row[s].clone()).collect()
    }
}

/// The slice x_θ = φ_θ(s) of the scheme with respect to a named signal.
pub fn slice_of(phi: &SignalingScheme, signal: &str) -> Result<Vec<Rational>, ModelError> {
    let s = phi
        .signals
        .iter()
        .position(|name| name == signal)
        .ok_or_else(|| ModelError::UnknownSignal(signal.to_string()))?;
    Ok(phi.slice_by_index(s))
}

/// Receiver score of action `a` under slice `x`: Σ_θ μ_θ x_θ u_θ(a).
fn receiver_score(inst: &Instance, x: &[Rational], a: usize) -> Rational {
    (0..inst.d)
        .map(|t| &inst.prior[t] * &x[t] * &inst.receiver_utility[t][a])
        .sum()
}

/// Sender score of action `a` under slice `x`: Σ_θ μ_θ x_θ u^s_θ(a).
fn sender_score(inst: &Instance, x: &[Rational], a: usize) -> Rational {
    (0..inst.d)
        .map(|t| &inst.prior[t] * &x[t] * &inst.sender_utility[t][a])
        .sum()
}

/// The set of receiver best responses under slice `x`, in index order.
pub fn best_response_set(inst: &Instance, x: &[Rational]) -> Result<Vec<usize>, ModelError> {
    if x.iter().all(|v| v.is_zero()) {
        return Err(ModelError::ZeroSlice);
    }
    let scores: Vec<Rational> = (0..inst.n).map(|a| receiver_score(inst, x, a)).collect();
    let best = scores.iter().max().expect("n ≥ 2").clone();
    Ok((0..inst.n).filter(|&a| scores[a] == best).collect())
}

/// The action actually played: among the best responses, the one maximizing
/// the sender's score, residual ties broken by lowest index.
pub fn chosen_action(inst: &Instance, x: &[Rational]) -> Result<usize, ModelError> {
    let candidates = best_response_set(inst, x)?;
    let mut best = candidates[0];
    let mut best_score = sender_score(inst, x, best);
    for &a in &candidates[1..] {
        let s = sender_score(inst, x, a);
        if s > best_score {
            best = a;
            best_score = s;
        }
    }
    Ok(best)
}

/// Exact sender expected utility of the scheme: Σ_s Σ_θ μ_θ φ_θ(s)
/// u^s_θ(a^φ(s)); signals with all-zero slices contribute nothing.
pub fn sender_expected_utility(inst: &Instance, phi: &SignalingScheme) -> Rational {
    let mut total = Rational::zero();
    for s in 0..phi.num_signals() {
        let x = phi.slice_by_index(s);
        if x.iter().all(|v| v.is_zero()) {
            continue;
        }
        let a = chosen_action(inst, &x).expect("nonzero slice");
        total += sender_score(inst, &x, a);
    }
    total
}

/// Exact OPT and a witness direct scheme, via the persuasive-scheme LP:
/// maximize Σ_a Σ_θ μ_θ φ_θ(a) u^s_θ(a) subject to the incentive rows
/// Σ_θ μ_θ φ_θ(a)(u_θ(a) − u_θ(a′)) ≥ 0 and Σ_a φ_θ(a) = 1.
pub fn compute_opt(inst: &Instance) -> (Rational, SignalingScheme) {
    let (d, n) = (inst.d, inst.n);
    let var = |t: usize, a: usize| t * n + a; // φ_θ(a)
    let mut prog = LinearProgram::new(d * n);
    for t in 0..d {
        for a in 0..n {
            prog.upper[var(t, a)] = Some(Rational::one());
            prog.objective[var(t, a)] = &inst.prior[t] * &inst.sender_utility[t][a];
        }
    }
    for a in 0..n {
        for a2 in 0..n {
            if a == a2 {
                continue;
            }
            let mut row = vec![Rational::zero(); d * n];
            for t in 0..d {
                row[var(t, a)] =
                    &inst.prior[t] * (&inst.receiver_utility[t][a] - &inst.receiver_utility[t][a2]);
            }
            prog.add_row(row, Relation::Ge, Rational::zero());
        }
    }
    for t in 0..d {
        let mut row = vec![Rational::zero(); d * n];
        for a in 0..n {
            row[var(t, a)] = Rational::one();
        }
        prog.add_row(row, Relation::Eq, Rational::one());
    }
    let sol = lp::solve(&prog);
    assert_eq!(
        sol.status,
        LpStatus::Optimal,
        "the uninformative direct scheme is always feasible"
    );
    let signals = (0..n).map(|a| format!("a{a}")).collect();
    let table = (0..d)
        .map(|t| (0..n).map(|a| sol.point[var(t, a)].clone()).collect())
        .collect();
    let witness = SignalingScheme { signals, table };
    debug_assert!(witness.validate().is_ok());
    (sol.value, witness)
}

/// The canonical separating hyperplane between two distinct actions:
/// coefficients μ_θ(u_θ(a_i) − u_θ(a_j)), offset 0. Ground truth for tests;
/// never exposed to the learner.
pub fn true_separating_hyperplane(
    inst: &Instance,
    a_i: usize,
    a_j: usize,
) -> Result<Hyperplane, ModelError> {
    if a_i == a_j {
        return Err(ModelError::EqualActions);
    }
    let coeffs: Vec<Rational> = (0..inst.d)
        .map(|t| &inst.prior[t] * (&inst.receiver_utility[t][a_i] - &inst.receiver_utility[t][a_j]))
        .collect();
    if coeffs.iter().all(|c| c.is_zero()) {
        return Err(ModelError::EqualActions);
    }
    Ok(Hyperplane::new(coeffs, Rational::zero()))
}

/// The distribution over posteriors induced by a scheme: each signal with
/// positive mass contributes ξ_θ = μ_θ φ_θ(s) / Σ_{θ′} μ_{θ′} φ_{θ′}(s)
/// with weight equal to that mass; equal posteriors are merged.
pub fn posterior_form(inst: &Instance, phi: &SignalingScheme) -> Vec<(Vec<Rational>, Rational)> {
    let mut out: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for s in 0..phi.num_signals() {
        let mass: Rational = (0..inst.d)
            .map(|t| &inst.prior[t] * &phi.table[t][s])
            .sum();
        if !mass.is_positive() {
            continue;
        }
        let posterior: Vec<Rational> = (0..inst.d)
            .map(|t| &inst.prior[t] * &phi.table[t][s] / &mass)
            .collect();
        match out.iter_mut().find(|(p, _)| *p == posterior) {
            Some((_, w)) => *w += mass,
            None => out.push((posterior, mass)),
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};

    /// d=2 instance with μ=(1/2,1/2), u(a1)=(1,0), u(a2)=(0,1).
    fn symmetric_instance(sender_equal: bool) -> Instance {
        let us = if sender_equal {
            vec![
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(1, 2), rat(1, 2)],
            ]
        } else {
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
            ]
        };
        Instance::new(
            2,
            2,
            vec![rat(1, 2), rat(1, 2)],
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
            ],
            us,
        )
        .unwrap()
    }

    #[test]
    fn validation_rejects_bad_instances() {
        // Degenerate prior.
        assert!(Instance::new(
            2,
            2,
            vec![rat_int(1), rat_int(0)],
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
        )
        .is_err());
        // Duplicate receiver columns.
        assert!(Instance::new(
            2,
            2,
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 3), rat(1, 3)]],
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
        )
        .is_err());
        // Utility out of range.
        assert!(Instance::new(
            2,
            2,
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![rat_int(2), rat_int(0)], vec![rat_int(0), rat_int(1)]],
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = symmetric_instance(false);
        let s = inst.to_json_string();
        let back = Instance::from_json_str(&s).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn slice_of_examples() {
        let full = SignalingScheme::full_revelation(2);
        assert_eq!(slice_of(&full, "s0").unwrap(), vec![rat_int(1), rat_int(0)]);
        let unin = SignalingScheme::uninformative(2);
        assert_eq!(slice_of(&unin, "s").unwrap(), vec![rat_int(1), rat_int(1)]);
        let x = vec![rat(1, 3), rat(2, 3)];
        let two = SignalingScheme::two_signal(&x);
        assert_eq!(slice_of(&two, "s1").unwrap(), x);
        assert!(slice_of(&two, "nope").is_err());
    }

    #[test]
    fn best_response_and_tie_breaking() {
        let inst = symmetric_instance(true);
        assert_eq!(
            best_response_set(&inst, &[rat_int(1), rat_int(0)]).unwrap(),
            vec![0]
        );
        assert_eq!(
            best_response_set(&inst, &[rat_int(1), rat_int(1)]).unwrap(),
            vec![0, 1]
        );
        // Sender indifferent → lowest index.
        assert_eq!(chosen_action(&inst, &[rat_int(1), rat_int(1)]).unwrap(), 0);
        assert!(best_response_set(&inst, &[rat_int(0), rat_int(0)]).is_err());
    }

    #[test]
    fn scaling_invariance() {
        let inst = symmetric_instance(false);
        let x = vec![rat(1, 3), rat(1, 5)];
        let scaled: Vec<Rational> = x.iter().map(|v| v * rat(2, 7)).collect();
        assert_eq!(
            best_response_set(&inst, &x).unwrap(),
            best_response_set(&inst, &scaled).unwrap()
        );
        assert_eq!(
            chosen_action(&inst, &x).unwrap(),
            chosen_action(&inst, &scaled).unwrap()
        );
    }

    #[test]
    fn aligned_utilities_full_revelation_is_optimal() {
        let inst = symmetric_instance(false); // sender = receiver
        let (opt, witness) = compute_opt(&inst);
        // Full revelation yields Σ_θ μ_θ max_a u_θ(a) = 1.
        assert_eq!(opt, rat_int(1));
        assert_eq!(sender_expected_utility(&inst, &witness), opt);
        let full = SignalingScheme::full_revelation(2);
        assert_eq!(sender_expected_utility(&inst, &full), rat_int(1));
    }

    #[test]
    fn opt_dominates_random_schemes() {
        use rand::{Rng, SeedableRng};
        let inst = symmetric_instance(false);
        let (opt, _) = compute_opt(&inst);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut table = Vec::new();
            for _ in 0..2 {
                let a = rat(rng.gen_range(0..=4), 4);
                table.push(vec![a.clone(), Rational::one() - a]);
            }
            let phi = SignalingScheme::new(vec!["x".into(), "y".into()], table).unwrap();
            assert!(sender_expected_utility(&inst, &phi) <= opt);
        }
    }

    #[test]
    fn separating_hyperplane_examples() {
        let inst = symmetric_instance(false);
        let h = true_separating_hyperplane(&inst, 0, 1).unwrap();
        assert_eq!(h.coeffs, vec![rat_int(1), rat_int(-1)]);
        assert_eq!(h.offset, rat_int(0));
        // H_ij and H_ji canonicalize to the same hyperplane.
        let h2 = true_separating_hyperplane(&inst, 1, 0).unwrap();
        assert_eq!(h, h2);
        assert!(true_separating_hyperplane(&inst, 0, 0).is_err());
    }

    #[test]
    fn posterior_form_consistency() {
        use rand::{Rng, SeedableRng};
        let inst = symmetric_instance(false);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let mut table = Vec::new();
            for _ in 0..2 {
                let a = rat(rng.gen_range(0..=6), 6);
                table.push(vec![a.clone(), Rational::one() - a]);
            }
            let phi = SignalingScheme::new(vec!["x".into(), "y".into()], table).unwrap();
            let posts = posterior_form(&inst, &phi);
            for t in 0..2 {
                let mixed: Rational = posts.iter().map(|(p, w)| &p[t] * w).sum();
                assert_eq!(mixed, inst.prior[t]);
            }
        }
        // Full revelation → point masses with the prior weights.
        let posts = posterior_form(&inst, &SignalingScheme::full_revelation(2));
        assert_eq!(posts.len(), 2);
        assert_eq!(posts[0].0, vec![rat_int(0), rat_int(1)]);
        assert_eq!(posts[0].1, rat(1, 2));
        // Uninformative → the prior with weight 1.
        let posts = posterior_form(&inst, &SignalingScheme::uninformative(2));
        assert_eq!(posts, vec![(inst.prior.clone(), rat_int(1))]);
    }

    #[test]
    fn expected_utility_slice_decomposition() {
        // Σ_s Σ_θ μ_θ φ_θ(s) u^s_θ(a^φ(s)) computed per slice matches the
        // aggregate routine.
        let inst = symmetric_instance(false);
        let phi = SignalingScheme::new(
            vec!["u".into(), "v".into()],
            vec![
                vec![rat(3, 4), rat(1, 4)],
                vec![rat(1, 4), rat(3, 4)],
            ],
        )
        .unwrap();
        let mut total = Rational::zero();
        for s in 0..2 {
            let x = phi.slice_by_index(s);
            let a = chosen_action(&inst, &x).unwrap();
            total += sender_score(&inst, &x, a);
        }
        assert_eq!(total, sender_expected_utility(&inst, &phi));
    }

    #[test]
    fn bit_complexity_of_instance() {
        let inst = symmetric_instance(false);
        // B_μ = bits(1)+bits(2) = 3; B_u = bits(1)+bits(1) = 2.
        assert_eq!(inst.bit_complexity_b(), 5);
    }
}
