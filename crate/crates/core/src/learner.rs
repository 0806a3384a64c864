//! The explore-then-commit learner: prior estimation and the restricted
//! search space, membership-oracle geometry learning (region discovery,
//! hyperplane reconstruction, segment binary search), and the committed
//! signaling LP, plus the regret-run driver tying the phases together.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::environment::{Environment, OracleMode, RoundOracle};
use crate::exactnum::{
    bit_complexity, bitlen, pow2, rat, rat_int, stern_brocot_search_closed, to_f64,
    vector_bit_complexity, Rational,
};
use crate::geometry::{
    enumerate_cells, fit_homogeneous_hyperplane, independent_vertex_centroid,
    practical_perturbation_radius, sample_int, GeometryError, Halfspace, Hyperplane, Polytope,
};
use crate::lp::{self, LinearProgram, LpStatus, Relation};
use crate::model::{chosen_action, compute_opt, Instance, SignalingScheme};

/// Whether search constants come from the worst-case analysis or from
/// exact instance-specific distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    Theoretical,
    Practical,
}

/// Tuning knobs shared by every search subroutine: the assumed upper bound
/// on the bit-complexity of the products μ_θ u_θ(a), and a safety factor
/// applied to practical budgets and depths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantProfile {
    pub mode: ProfileMode,
    pub b_bound: u64,
    pub safety_factor: u64,
}

impl ConstantProfile {
    pub fn practical(b_bound: u64) -> Self {
        ConstantProfile {
            mode: ProfileMode::Practical,
            b_bound,
            safety_factor: 2,
        }
    }

    pub fn theoretical(b_bound: u64) -> Self {
        ConstantProfile {
            mode: ProfileMode::Theoretical,
            b_bound,
            safety_factor: 1,
        }
    }
}

/// A clean-event violation: the trial is unsalvageable and is recorded with
/// the reason.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AbortReason {
    #[error("simulated action oracle exhausted its budget of {budget} rounds")]
    BudgetExhausted { budget: u64 },
    #[error("every state was estimated at or below the 2ε cutoff; the search space is empty")]
    EmptyThetaTilde,
    #[error("hyperplane reconstruction failed after retries: {0}")]
    RankDeficient(String),
    #[error("no rational of admissible complexity in the final bracket: {0}")]
    NoRationalWithinDepth(String),
    #[error("observed feedback contradicts the learned regions: {0}")]
    DegenerateGeometry(String),
}

/// Why a search routine stopped early: a clean-event abort, or the round
/// budget of the enclosing run was exhausted (normal termination for
/// fixed-horizon runs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchStop {
    Abort(AbortReason),
    OutOfRounds,
}

impl From<AbortReason> for SearchStop {
    fn from(a: AbortReason) -> Self {
        SearchStop::Abort(a)
    }
}

/// Phase-1 output: the estimated prior, the surviving states, and the
/// restricted search polytope X_ε with the bit sizes downstream constants
/// depend on.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    pub epsilon: Rational,
    pub mu_hat: Vec<Rational>,
    /// States with μ̂_θ > 2ε.
    pub theta_tilde: Vec<usize>,
    /// {x ∈ Δ : Σ_{θ∈Θ̃} μ̂_θ x_θ ≥ 2ε}.
    pub x_eps: Polytope,
    pub b_eps: u64,
    pub b_mu_hat: u64,
}

impl SearchSpace {
    /// Builds Θ̃ and X_ε from an estimated (or known) prior.
    pub fn from_prior(mu_hat: Vec<Rational>, epsilon: &Rational) -> Result<Self, AbortReason> {
        let d = mu_hat.len();
        let two_eps = epsilon * rat_int(2);
        let theta_tilde: Vec<usize> = (0..d).filter(|&t| mu_hat[t] > two_eps).collect();
        if theta_tilde.is_empty() {
            return Err(AbortReason::EmptyThetaTilde);
        }
        let coeffs: Vec<Rational> = (0..d)
            .map(|t| {
                if theta_tilde.contains(&t) {
                    mu_hat[t].clone()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let x_eps = Polytope::simplex(d).intersect_halfspace(Halfspace::new(coeffs, two_eps));
        let b_eps = bit_complexity(epsilon);
        let b_mu_hat = vector_bit_complexity(&mu_hat).expect("d ≥ 1");
        Ok(SearchSpace {
            epsilon: epsilon.clone(),
            mu_hat,
            theta_tilde,
            x_eps,
            b_eps,
            b_mu_hat,
        })
    }

    /// L = B + B_ε + B_μ̂, the bit budget the worst-case constants take.
    pub fn l_bits(&self, profile: &ConstantProfile) -> u64 {
        profile.b_bound + self.b_eps + self.b_mu_hat
    }
}

/// T1 = ⌈(12/ε)·ln(2d/δ)⌉, the phase-1 length of the regret algorithm.
pub fn phase_one_length(epsilon: &Rational, delta: &Rational, d: usize) -> usize {
    let e = to_f64(epsilon);
    let arg = 2.0 * d as f64 / to_f64(delta);
    ((12.0 / e) * arg.ln()).ceil().max(1.0) as usize
}

/// Default exploration accuracy: min(⌈√(B·n)·d⁴⌉ / ⌈√T⌉, 1/(6d+1)),
/// keeping ε inside the admissible range (0, 1/(6d)).
pub fn default_epsilon(b_bound: u64, n: usize, d: usize, t: usize) -> Rational {
    let num = ((b_bound as f64 * n as f64).sqrt() * (d as f64).powi(4)).ceil() as i64;
    let den = (t as f64).sqrt().ceil() as i64;
    let candidate = rat(num, den);
    let cap = rat(1, 6 * d as i64 + 1);
    candidate.min(cap)
}

/// Phase 1: commits the uninformative scheme for `t1` rounds, estimates the
/// prior from the observed states, and builds the search space.
pub fn build_search_space(
    env: &mut dyn RoundOracle,
    t1: usize,
    epsilon: &Rational,
) -> Result<SearchSpace, AbortReason> {
    let phi = SignalingScheme::uninformative(env.num_states());
    for _ in 0..t1 {
        env.commit_and_play(&phi);
    }
    let mu_hat = env
        .prior_estimate()
        .expect("phase 1 plays at least one round")
        .mu_hat();
    SearchSpace::from_prior(mu_hat, epsilon)
}

/// One receiver-action query at slice `x`: free in Direct mode; in Simulated
/// mode commits the two-signal scheme (s1 ↦ x) until s1 is sent, up to
/// `budget` rounds.
pub fn action_oracle(
    env: &mut dyn RoundOracle,
    x: &[Rational],
    budget: u64,
) -> Result<usize, AbortReason> {
    match env.oracle_mode() {
        OracleMode::Direct => Ok(env
            .direct_action_query(x)
            .expect("direct queries allowed in Direct mode")),
        OracleMode::Simulated => {
            let phi = SignalingScheme::two_signal(x);
            for _ in 0..budget {
                let o = env.commit_and_play(&phi);
                if o.signal_index == 0 {
                    return Ok(o.action);
                }
            }
            Err(AbortReason::BudgetExhausted { budget })
        }
    }
}

/// The learned best-response geometry: one polytope per action (full-
/// dimensional for closed actions, a possibly empty face otherwise), the
/// closed set, and the learned hyperplanes with their action-pair labels.
#[derive(Debug, Clone)]
pub struct RegionCollection {
    pub regions: Vec<Polytope>,
    pub closed: Vec<usize>,
    pub hyperplanes: Vec<((usize, usize), Hyperplane)>,
}

impl RegionCollection {
    /// Coverage invariant: every full-dimensional cell of the learned
    /// arrangement inside X_ε lies in some closed region.
    pub fn closed_regions_cover(&self, x_eps: &Polytope) -> bool {
        let hs: Vec<Hyperplane> = self.hyperplanes.iter().map(|(_, h)| h.clone()).collect();
        enumerate_cells(&hs, x_eps)
            .iter()
            .all(|(_, pt)| self.closed.iter().any(|&a| self.regions[a].contains(pt)))
    }
}

/// The region with no points: 0·x ≥ 1.
pub fn empty_region(d: usize) -> Polytope {
    let never = Halfspace {
        coeffs: vec![Rational::zero(); d],
        offset: Rational::one(),
    };
    Polytope::new(d, vec![], vec![never])
}

/// Drives one phase-2 search: owns the environment handle, the query
/// memoization, the per-trial randomness, and the failure-probability split.
pub struct Searcher<'a> {
    env: &'a mut dyn RoundOracle,
    pub space: &'a SearchSpace,
    pub delta: Rational,
    pub profile: ConstantProfile,
    rng: ChaCha8Rng,
    cache: HashMap<Vec<Rational>, usize>,
    round_limit: Option<usize>,
    /// Reusing an already-learned hyperplane for a new region is only worth
    /// the (small) mislabeling risk when oracle queries cost rounds.
    reuse_hyperplanes: bool,
    pub oracle_queries: u64,
}

impl<'a> Searcher<'a> {
    /// `zeta` is the phase-2 failure budget; the per-query δ follows the
    /// split δ = ζ / (2n²(2(d+n)+n)).
    pub fn new(
        env: &'a mut dyn RoundOracle,
        space: &'a SearchSpace,
        zeta: &Rational,
        profile: ConstantProfile,
        seed: u64,
        round_limit: Option<usize>,
    ) -> Self {
        let d = env.num_states() as i64;
        let n = env.num_actions() as i64;
        let delta = zeta / rat_int(2 * n * n * (2 * (d + n) + n));
        let reuse = env.oracle_mode() == OracleMode::Simulated;
        Searcher {
            env,
            space,
            delta,
            profile,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cache: HashMap::new(),
            round_limit,
            reuse_hyperplanes: reuse,
            oracle_queries: 0,
        }
    }

    fn rounds_played(&self) -> usize {
        self.env.round() - 1
    }

    /// Per-query round budget ⌈(1/ε)·ln(1/δ)⌉ · safety_factor.
    fn query_budget(&self) -> u64 {
        let e = to_f64(&self.space.epsilon);
        let inv_delta = 1.0 / to_f64(&self.delta);
        let base = ((1.0 / e) * inv_delta.ln()).ceil().max(1.0) as u64;
        base * self.profile.safety_factor
    }

    /// Memoized action query; identical points never cost rounds twice.
    pub fn query(&mut self, x: &[Rational]) -> Result<usize, SearchStop> {
        if let Some(&a) = self.cache.get(x) {
            return Ok(a);
        }
        let a = match self.env.oracle_mode() {
            OracleMode::Direct => self
                .env
                .direct_action_query(x)
                .expect("direct queries allowed in Direct mode"),
            OracleMode::Simulated => {
                let budget = self.query_budget();
                let phi = SignalingScheme::two_signal(x);
                let mut found = None;
                for _ in 0..budget {
                    if let Some(lim) = self.round_limit {
                        if self.rounds_played() >= lim {
                            return Err(SearchStop::OutOfRounds);
                        }
                    }
                    let o = self.env.commit_and_play(&phi);
                    if o.signal_index == 0 {
                        found = Some(o.action);
                        break;
                    }
                }
                match found {
                    Some(a) => a,
                    None => return Err(AbortReason::BudgetExhausted { budget }.into()),
                }
            }
        };
        self.oracle_queries += 1;
        self.cache.insert(x.to_vec(), a);
        Ok(a)
    }

    /// A random strictly interior point of `p`. The theoretical profile uses
    /// the verbatim grid; the practical profile samples a coarse dyadic grid
    /// around the vertex centroid so downstream segment endpoints stay at
    /// workable bit sizes, verifying strict interiority exactly.
    pub fn sample_interior(&mut self, p: &Polytope) -> Result<Vec<Rational>, SearchStop> {
        let l = self.space.l_bits(&self.profile);
        let res = match self.profile.mode {
            ProfileMode::Theoretical => {
                sample_int(p, &self.delta, &self.profile, l, &mut self.rng)
            }
            ProfileMode::Practical => self.sample_coarse(p),
        };
        res.map_err(|e| AbortReason::RankDeficient(format!("interior sampling failed: {e}")).into())
    }

    fn sample_coarse(&mut self, p: &Polytope) -> Result<Vec<Rational>, GeometryError> {
        let d = p.dim;
        let c = independent_vertex_centroid(p)?;
        let rho = practical_perturbation_radius(p, &c)?;
        // Grid spacing 2^{-k} fine enough that the admissible ±(9/10)ρ move
        // spans ≳ 2^10 grid points per axis: enough randomness to dodge any
        // single unknown hyperplane with high probability, at ~k bits.
        let mut k = inv_log2_ceil(&rho) + 11;
        for attempt in 0..48u32 {
            let scale = BigInt::one() << (k as usize);
            let radius: BigInt =
                (rho.numer() * &scale * BigInt::from(9)) / (rho.denom() * BigInt::from(10));
            let radius = radius.min(BigInt::from(1u64 << 24));
            let r = radius.to_i64().unwrap_or(0);
            if r < 1 {
                k += 2;
                continue;
            }
            let mut x: Vec<Rational> = Vec::with_capacity(d);
            let mut sum = Rational::zero();
            for ci in c.iter().take(d - 1) {
                let base = round_scaled(ci, k);
                let j = self.rng.gen_range(-r..=r);
                let xi = Rational::new(base + BigInt::from(j), scale.clone());
                sum += &xi;
                x.push(xi);
            }
            x.push(Rational::one() - sum);
            if p.strictly_contains(&x) {
                return Ok(x);
            }
            if attempt % 8 == 7 {
                k += 2;
            }
        }
        // The coarse grid kept landing outside; fall back to the exact-
        // radius sampler (correct at any bit size).
        let l = self.space.l_bits(&self.profile);
        sample_int(p, &self.delta, &self.profile, l, &mut self.rng)
    }

    /// A random point of the simplex facet {x_i = 0}: a sample of the
    /// (d−1)-simplex with a zero spliced in at coordinate `i`.
    fn facet_sample(&mut self, i: usize) -> Result<Vec<Rational>, SearchStop> {
        let d = self.space.x_eps.dim;
        let sub = Polytope::simplex(d - 1);
        let mut y = self.sample_interior(&sub)?;
        y.insert(i, Rational::zero());
        Ok(y)
    }

    /// Bisects λ ∈ [0,1] along x1 → x2 (invariant: the λ1 side answers a_j),
    /// then reconstructs the exact crossing by closed-interval mediant
    /// descent. Returns (boundary point, λ, neighbor): the final bracket is
    /// narrower than the gap between any two crossings along the segment, so
    /// the action observed at its far end is the action adjacent to a_j
    /// across the crossed boundary — not necessarily the action at x2.
    pub fn binary_search(
        &mut self,
        a_j: usize,
        x1: &[Rational],
        x2: &[Rational],
    ) -> Result<(Vec<Rational>, Rational, usize), SearchStop> {
        let d = self.space.x_eps.dim as u64;
        let b = self.profile.b_bound;
        let (iters, depth, max_bits) = match self.profile.mode {
            ProfileMode::Theoretical => {
                let b_x = vector_bit_complexity(x1)
                    .expect("nonempty")
                    .max(vector_bit_complexity(x2).expect("nonempty"));
                let base = 5 * b_x + 8 * b;
                (6 * d * base, 3 * d * base, None)
            }
            ProfileMode::Practical => {
                // The true crossing is λ* = (c·x1)/(c·(x1−x2)) for a product
                // hyperplane c: its denominator divides a d(B+2)-bit integer
                // times the lcm D of the endpoint coordinate denominators.
                // 2K+2 halvings leave a bracket shorter than 1/(2q*²), inside
                // which λ* is the unique rational with denominator ≤ q*.
                let mut lcm = BigInt::one();
                for q in x1.iter().chain(x2.iter()) {
                    lcm = lcm.lcm(q.denom());
                }
                let k = d * (b + 2) + bitlen(&lcm) + bitlen(&BigInt::from(d)) + 2;
                let iters = self.profile.safety_factor * (2 * k + 2);
                (iters, u64::MAX >> 1, Some(2 * k + 4))
            }
        };
        let diff: Vec<Rational> = x2.iter().zip(x1).map(|(b, a)| b - a).collect();
        let point =
            |lam: &Rational| -> Vec<Rational> {
                x1.iter()
                    .zip(&diff)
                    .map(|(a, dlt)| a + lam * dlt)
                    .collect()
            };
        let mut lo = Rational::zero();
        let mut hi = Rational::one();
        let half = rat(1, 2);
        for _ in 0..iters {
            let mid = (&lo + &hi) * &half;
            if self.query(&point(&mid))? == a_j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let neighbor = self.query(&point(&hi))?;
        let lam = stern_brocot_search_closed(&lo, &hi, depth).map_err(|e| {
            SearchStop::Abort(AbortReason::NoRationalWithinDepth(e.to_string()))
        })?;
        if let Some(mb) = max_bits {
            if bit_complexity(&lam) > mb {
                return Err(AbortReason::NoRationalWithinDepth(format!(
                    "reconstructed crossing needs {} bits, bound {} (B_bound too small?)",
                    bit_complexity(&lam),
                    mb
                ))
                .into());
            }
        }
        Ok((point(&lam), lam, neighbor))
    }

    /// Recovers the exact separating hyperplane crossed between the region
    /// of a_j around `x_int` and the off-region witness `w`: binary search
    /// for one boundary point, then (for d ≥ 3) offset points around it,
    /// classified by the oracle, feed d−2 further cross-pair searches; the
    /// homogeneous hyperplane through the d−1 boundary points is the answer,
    /// labeled with the action adjacent across the found boundary.
    pub fn find_hyperplane(
        &mut self,
        a_j: usize,
        u_aj: &Polytope,
        x_int: &[Rational],
        w: &[Rational],
    ) -> Result<(Hyperplane, usize), SearchStop> {
        let mut last = String::new();
        for _ in 0..3 {
            match self.find_hyperplane_once(a_j, u_aj, x_int, w) {
                Ok(h) => return Ok(h),
                Err(SearchStop::Abort(AbortReason::RankDeficient(msg))) => last = msg,
                Err(e) => return Err(e),
            }
        }
        Err(AbortReason::RankDeficient(format!("3 attempts failed; last: {last}")).into())
    }

    fn find_hyperplane_once(
        &mut self,
        a_j: usize,
        u_aj: &Polytope,
        x_int: &[Rational],
        w: &[Rational],
    ) -> Result<(Hyperplane, usize), SearchStop> {
        let d = self.space.x_eps.dim;
        let x = self.sample_interior(u_aj)?;
        let (x1, x2) = if self.query(&x)? == a_j {
            (x.clone(), w.to_vec())
        } else {
            (x_int.to_vec(), x.clone())
        };
        let (x0, _, neighbor) = self.binary_search(a_j, &x1, &x2)?;
        let mut pts = vec![x0.clone()];
        if d > 2 {
            let dirs: Vec<Vec<Rational>> = (0..d)
                .map(|i| self.facet_sample(i))
                .collect::<Result<_, _>>()?;
            let alpha = self.offset_scale(&x0, &dirs)?;
            let offset = |s: &[Rational], sign: i64| -> Vec<Rational> {
                x0.iter()
                    .zip(s)
                    .map(|(c, si)| c + rat_int(sign) * &alpha * (si - c))
                    .collect()
            };
            let mut side_j = Vec::with_capacity(d);
            let mut side_k = Vec::with_capacity(d);
            for s in &dirs {
                let plus = offset(s, 1);
                let minus = offset(s, -1);
                if self.query(&plus)? == a_j {
                    side_j.push(plus);
                    side_k.push(minus);
                } else {
                    side_j.push(minus);
                    side_k.push(plus);
                }
            }
            for m in 0..d - 2 {
                let (p, q) = (&side_j[m], &side_k[(m + 1) % d]);
                let (xm, _, _) = self.binary_search(a_j, p, q)?;
                pts.push(xm);
            }
        }
        let h = fit_homogeneous_hyperplane(&pts).map_err(|e| {
            SearchStop::Abort(AbortReason::RankDeficient(format!("fit failed: {e}")))
        })?;
        // x1 sits strictly inside the a_j region, so it must be strictly off
        // the separating hyperplane; a zero residual means the boundary
        // points were degenerate.
        if h.eval(&x1).is_zero() {
            return Err(AbortReason::RankDeficient("fit passes through the interior endpoint".into()).into());
        }
        Ok((h, neighbor))
    }

    /// Offset radius α: the printed 2^{−4d(B_x+B+B_μ̂+B_ε)}/d (Theoretical),
    /// or the largest power of two ≤ 1/64 keeping every offset point inside
    /// X_ε (Practical).
    fn offset_scale(
        &self,
        x0: &[Rational],
        dirs: &[Vec<Rational>],
    ) -> Result<Rational, SearchStop> {
        match self.profile.mode {
            ProfileMode::Theoretical => {
                let d = self.space.x_eps.dim as u64;
                let b_x = vector_bit_complexity(x0).expect("nonempty");
                let exp = 4 * d * (b_x + self.space.l_bits(&self.profile));
                Ok(pow2(-(exp as i64)) / rat_int(d as i64))
            }
            ProfileMode::Practical => {
                let mut alpha = rat(1, 64);
                for _ in 0..80 {
                    let ok = dirs.iter().all(|s| {
                        [Rational::one(), -Rational::one()].iter().all(|sign| {
                            let p: Vec<Rational> = x0
                                .iter()
                                .zip(s)
                                .map(|(c, si)| c + sign * &alpha * (si - c))
                                .collect();
                            self.space.x_eps.contains(&p)
                        })
                    });
                    if ok {
                        return Ok(alpha);
                    }
                    alpha = alpha * rat(1, 2);
                }
                Err(AbortReason::RankDeficient("no admissible offset radius".into()).into())
            }
        }
    }

    /// The pulled-in vertex probe λx^int + (1−λ)v.
    fn pull_point(&self, x_int: &[Rational], v: &[Rational]) -> Vec<Rational> {
        let b_x = vector_bit_complexity(x_int).expect("nonempty");
        let lam = match self.profile.mode {
            ProfileMode::Theoretical => {
                let d = self.space.x_eps.dim as u64;
                let exp = d * (b_x + 4 * self.space.l_bits(&self.profile)) + 1;
                rat_int(d as i64) * pow2(-(exp as i64))
            }
            ProfileMode::Practical => {
                let exp = self.profile.safety_factor * (b_x + self.profile.b_bound);
                pow2(-(exp as i64))
            }
        };
        x_int
            .iter()
            .zip(v)
            .map(|(xi, vi)| &lam * xi + (Rational::one() - &lam) * vi)
            .collect()
    }

    /// Algorithm "Find-Fully-Dimensional-Regions": discovers every full-
    /// dimensional best-response region inside X_ε by repeatedly probing an
    /// uncovered cell, then shrinking a candidate region with learned
    /// hyperplanes until all its vertices confirm the probed action.
    pub fn find_fully_dimensional_regions(
        &mut self,
    ) -> Result<(Vec<usize>, HashMap<usize, Polytope>, Vec<((usize, usize), Hyperplane)>), SearchStop>
    {
        let n = self.env.num_actions();
        let d = self.space.x_eps.dim;
        let mut closed: Vec<usize> = Vec::new();
        let mut regions: HashMap<usize, Polytope> = HashMap::new();
        let mut learned: Vec<((usize, usize), Hyperplane)> = Vec::new();
        let max_cuts = 8 * n * n * (d + 2);
        let mut cuts = 0usize;

        loop {
            // Coverage check: the learned arrangement's cells inside X_ε.
            let hs: Vec<Hyperplane> = {
                let mut v: Vec<Hyperplane> = learned.iter().map(|(_, h)| h.clone()).collect();
                v.dedup();
                v
            };
            let cells = enumerate_cells(&hs, &self.space.x_eps);
            let mut target: Option<Polytope> = None;
            let mut x_int: Option<Vec<Rational>> = None;
            for (signs, pt) in &cells {
                if closed.iter().any(|&a| regions[&a].contains(pt)) {
                    continue;
                }
                let mut cell = self.space.x_eps.clone();
                for (h, s) in hs.iter().zip(signs) {
                    cell = cell.intersect_halfspace(if *s > 0 {
                        h.upper_halfspace()
                    } else {
                        h.lower_halfspace()
                    });
                }
                match self.sample_interior(&cell) {
                    Ok(p) => {
                        x_int = Some(p);
                        target = Some(cell);
                        break;
                    }
                    Err(SearchStop::Abort(_)) => continue, // sliver cell; skip
                    Err(e) => return Err(e),
                }
            }
            let Some(_cell) = target else {
                return Ok((closed, regions, learned)); // X_ε covered
            };
            let x_int = x_int.expect("set alongside target");
            let a_j = self.query(&x_int)?;
            if closed.contains(&a_j) {
                return Err(AbortReason::DegenerateGeometry(format!(
                    "action {a_j} observed outside its closed region"
                ))
                .into());
            }

            let mut u = self.space.x_eps.clone();
            'passes: loop {
                let verts = u.vertices().to_vec();
                if verts.is_empty() {
                    return Err(AbortReason::DegenerateGeometry(format!(
                        "candidate region for action {a_j} collapsed"
                    ))
                    .into());
                }
                for v in &verts {
                    let pull = self.pull_point(&x_int, v);
                    let a = self.query(&pull)?;
                    if a == a_j {
                        continue;
                    }
                    // Any hyperplane already learned as a boundary of U(a_j)
                    // that separates the probe from the interior point is a
                    // valid cut; re-searching it would only burn rounds.
                    let reused = if self.reuse_hyperplanes {
                        learned.iter().find(|(k, h)| {
                            (k.0 == a_j || k.1 == a_j)
                                && h.eval(&x_int).is_positive() != h.eval(&pull).is_positive()
                        })
                    } else {
                        None
                    };
                    let h = match reused {
                        Some((_, h)) => h.clone(),
                        None => {
                            // Prefer the low-bit vertex itself as the off-
                            // region endpoint when it answers ≠ a_j.
                            let w = if self.query(v)? != a_j { v } else { &pull };
                            let (h, neighbor) = self.find_hyperplane(a_j, &u, &x_int, w)?;
                            learned.push(((a_j.min(neighbor), a_j.max(neighbor)), h.clone()));
                            h
                        }
                    };
                    let side_val = h.eval(&x_int);
                    if side_val.is_zero() {
                        return Err(AbortReason::DegenerateGeometry(
                            "probe point lies on a learned hyperplane".into(),
                        )
                        .into());
                    }
                    let side = if side_val.is_positive() {
                        h.upper_halfspace()
                    } else {
                        h.lower_halfspace()
                    };
                    let u_next = u.intersect_halfspace(side);
                    if u_next.vertices() == u.vertices() {
                        return Err(AbortReason::DegenerateGeometry(
                            "learned hyperplane fails to cut the candidate region".into(),
                        )
                        .into());
                    }
                    cuts += 1;
                    if cuts > max_cuts {
                        return Err(AbortReason::DegenerateGeometry(
                            "region refinement failed to terminate".into(),
                        )
                        .into());
                    }
                    u = u_next;
                    continue 'passes; // restart the vertex loop on the cut region
                }
                break; // a clean pass: every vertex confirms a_j
            }
            let region = u.minimal_h_representation().unwrap_or(u);
            regions.insert(a_j, region);
            closed.push(a_j);
        }
    }

    /// Algorithm "Find-Face": assigns each unclosed action the face of a
    /// closed region spanned by the closed-region vertices where the oracle
    /// answers that action; empty if the action is never observed.
    pub fn find_faces(
        &mut self,
        closed: &[usize],
        regions: &HashMap<usize, Polytope>,
    ) -> Result<HashMap<usize, Polytope>, SearchStop> {
        let n = self.env.num_actions();
        let d = self.space.x_eps.dim;
        // Query every vertex of every closed region (memoized).
        let mut answers: HashMap<usize, Vec<(usize, Vec<Rational>)>> = HashMap::new();
        let mut sorted = closed.to_vec();
        sorted.sort_unstable();
        for &a_i in &sorted {
            for v in regions[&a_i].vertices().to_vec() {
                let a = self.query(&v)?;
                answers.entry(a_i).or_default().push((a, v));
            }
        }
        let mut faces = HashMap::new();
        for a_j in 0..n {
            if closed.contains(&a_j) {
                continue;
            }
            let mut face = empty_region(d);
            for &a_i in &sorted {
                let hits: Vec<&Vec<Rational>> = answers[&a_i]
                    .iter()
                    .filter(|(a, _)| *a == a_j)
                    .map(|(_, v)| v)
                    .collect();
                if hits.is_empty() {
                    continue;
                }
                let reg = &regions[&a_i];
                let kept: Vec<Hyperplane> = reg
                    .inequalities
                    .iter()
                    .filter(|h| hits.iter().all(|v| h.slack(v).is_zero()))
                    .map(|h| h.boundary())
                    .collect();
                let mut candidate = reg.clone();
                for h in kept {
                    candidate = candidate.intersect_hyperplane(h);
                }
                if !candidate.is_empty() {
                    face = candidate;
                    break; // lowest qualifying closed action wins
                }
            }
            faces.insert(a_j, face);
        }
        Ok(faces)
    }
}

/// Smallest e ≥ 0 with 2^e ≥ 1/q (q > 0).
fn inv_log2_ceil(q: &Rational) -> u64 {
    if q >= &Rational::one() {
        return 0;
    }
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    let ceil_inv = (den + num - 1u32) / num;
    ceil_inv.bits()
}

/// ⌊q·2^k⌉ for q ≥ 0 (round half up).
fn round_scaled(q: &Rational, k: u64) -> BigInt {
    let scaled_num: BigInt = q.numer() << (k as usize);
    ((scaled_num << 1) + q.denom()) / (q.denom() << 1)
}

/// Algorithm "Find-Polytopes": full-dimensional regions, then faces for the
/// remaining actions.
pub fn find_polytopes(
    env: &mut dyn RoundOracle,
    space: &SearchSpace,
    zeta: &Rational,
    profile: ConstantProfile,
    seed: u64,
    round_limit: Option<usize>,
) -> Result<RegionCollection, SearchStop> {
    let n = env.num_actions();
    let mut s = Searcher::new(env, space, zeta, profile, seed, round_limit);
    let (closed, full, hyperplanes) = s.find_fully_dimensional_regions()?;
    let faces = s.find_faces(&closed, &full)?;
    let d = space.x_eps.dim;
    let regions = (0..n)
        .map(|a| {
            full.get(&a)
                .or_else(|| faces.get(&a))
                .cloned()
                .unwrap_or_else(|| empty_region(d))
        })
        .collect();
    Ok(RegionCollection {
        regions,
        closed,
        hyperplanes,
    })
}

/// The conic lift R^□ of a region: every constraint c·x ≥/= b becomes the
/// homogeneous (c − b·1)·x ≥/= 0 (so membership is scale-invariant on the
/// segment α·x′, α ∈ [0,1]), the normalization equality drops, and the unit
/// box bounds close the set. The empty region lifts to {0}.
pub fn lift_to_box(region: &Polytope) -> Polytope {
    let d = region.dim;
    let mut ineqs: Vec<Halfspace> = Vec::new();
    let mut eqs: Vec<Hyperplane> = Vec::new();
    if region.is_empty() {
        for i in 0..d {
            let mut c = vec![Rational::zero(); d];
            c[i] = Rational::one();
            eqs.push(Hyperplane::new(c, Rational::zero()));
        }
    } else {
        let homogenize = |coeffs: &[Rational], offset: &Rational| -> Option<Vec<Rational>> {
            let c: Vec<Rational> = coeffs.iter().map(|ci| ci - offset).collect();
            if c.iter().all(|v| v.is_zero()) {
                None
            } else {
                Some(c)
            }
        };
        for h in &region.equalities {
            if let Some(c) = homogenize(&h.coeffs, &h.offset) {
                eqs.push(Hyperplane::new(c, Rational::zero()));
            }
        }
        for h in &region.inequalities {
            if let Some(c) = homogenize(&h.coeffs, &h.offset) {
                ineqs.push(Halfspace::new(c, Rational::zero()));
            }
        }
    }
    for i in 0..d {
        let mut lo = vec![Rational::zero(); d];
        lo[i] = Rational::one();
        ineqs.push(Halfspace::new(lo.clone(), Rational::zero())); // x_i ≥ 0
        let hi: Vec<Rational> = lo.iter().map(|c| -c.clone()).collect();
        ineqs.push(Halfspace::new(hi, -Rational::one())); // x_i ≤ 1
    }
    Polytope::new(d, eqs, ineqs)
}

/// The committed-scheme LP: maximize Σ_a Σ_θ μ̂_θ x^a_θ u^s_θ(a) over
/// x^a ∈ R^□(a) with per-state capacity Σ_a x^a_θ ≤ 1; the solution slices
/// become the signals, with the residual mass on s*.
pub fn compute_signaling(
    regions: &RegionCollection,
    mu_hat: &[Rational],
    sender_utility: &[Vec<Rational>],
) -> SignalingScheme {
    let d = mu_hat.len();
    let n = regions.regions.len();
    let var = |a: usize, t: usize| a * d + t;
    let mut prog = LinearProgram::new(n * d);
    for a in 0..n {
        for t in 0..d {
            prog.upper[var(a, t)] = Some(Rational::one());
            prog.objective[var(a, t)] = &mu_hat[t] * &sender_utility[t][a];
        }
        let lifted = lift_to_box(&regions.regions[a]);
        for h in &lifted.equalities {
            let mut row = vec![Rational::zero(); n * d];
            for t in 0..d {
                row[var(a, t)] = h.coeffs[t].clone();
            }
            prog.add_row(row, Relation::Eq, h.offset.clone());
        }
        for h in &lifted.inequalities {
            let mut row = vec![Rational::zero(); n * d];
            for t in 0..d {
                row[var(a, t)] = h.coeffs[t].clone();
            }
            prog.add_row(row, Relation::Ge, h.offset.clone());
        }
    }
    for t in 0..d {
        let mut row = vec![Rational::zero(); n * d];
        for a in 0..n {
            row[var(a, t)] = Rational::one();
        }
        prog.add_row(row, Relation::Le, Rational::one());
    }
    let sol = lp::solve(&prog);
    assert_eq!(sol.status, LpStatus::Optimal, "all-zero slices are feasible");
    let mut signals = vec!["s*".to_string()];
    signals.extend((0..n).map(|a| format!("a{a}")));
    let table: Vec<Vec<Rational>> = (0..d)
        .map(|t| {
            let mut row = Vec::with_capacity(n + 1);
            let used: Rational = (0..n).map(|a| sol.point[var(a, t)].clone()).sum();
            row.push(Rational::one() - used);
            row.extend((0..n).map(|a| sol.point[var(a, t)].clone()));
            row
        })
        .collect();
    SignalingScheme::new(signals, table).expect("capacity rows keep rows substochastic")
}

/// The halfspace of slices where the receiver weakly prefers `a` to `b`;
/// `None` when the two actions are payoff-equivalent. Ground truth for
/// tests; never exposed to the learner.
pub fn preference_halfspace(inst: &Instance, a: usize, b: usize) -> Option<Halfspace> {
    let coeffs: Vec<Rational> = (0..inst.d)
        .map(|t| &inst.prior[t] * (&inst.receiver_utility[t][a] - &inst.receiver_utility[t][b]))
        .collect();
    if coeffs.iter().all(|c| c.is_zero()) {
        None
    } else {
        Some(Halfspace::new(coeffs, Rational::zero()))
    }
}

/// Ground-truth best-response regions X_ε(a) cut from the true hyperplanes.
pub fn true_regions(inst: &Instance, x_eps: &Polytope) -> Vec<Polytope> {
    (0..inst.n)
        .map(|a| {
            let mut p = x_eps.clone();
            for b in 0..inst.n {
                if b == a {
                    continue;
                }
                if let Some(h) = preference_halfspace(inst, a, b) {
                    p = p.intersect_halfspace(h);
                }
            }
            p
        })
        .collect()
}

/// Test oracle: the vertex-form optimum over X_ε — maximize the mass placed
/// on ground-truth region vertices, weighted by the sender value of the
/// action each vertex induces, under per-state capacity 1.
pub fn lp_vertices_oracle(inst: &Instance, x_eps: &Polytope) -> Rational {
    let mut verts: Vec<Vec<Rational>> = Vec::new();
    for r in true_regions(inst, x_eps) {
        for v in r.vertices() {
            if !verts.contains(v) {
                verts.push(v.clone());
            }
        }
    }
    let m = verts.len();
    let mut prog = LinearProgram::new(m);
    for (j, v) in verts.iter().enumerate() {
        let a = chosen_action(inst, v).expect("region vertices are nonzero");
        prog.objective[j] = (0..inst.d)
            .map(|t| &inst.prior[t] * &v[t] * &inst.sender_utility[t][a])
            .sum();
    }
    for t in 0..inst.d {
        let row = verts.iter().map(|v| v[t].clone()).collect();
        prog.add_row(row, Relation::Le, Rational::one());
    }
    let sol = lp::solve(&prog);
    assert_eq!(sol.status, LpStatus::Optimal, "α = 0 is feasible");
    sol.value
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("slice lies outside the region of its induced action")]
    MembershipViolation,
}

/// Test oracle: Carathéodory weights expressing the normalized slice `x` as
/// a convex combination of its own ground-truth region's vertices.
pub fn decompose_slice(
    inst: &Instance,
    x_eps: &Polytope,
    x: &[Rational],
) -> Result<Vec<(Vec<Rational>, Rational)>, DecomposeError> {
    let a = chosen_action(inst, x).map_err(|_| DecomposeError::MembershipViolation)?;
    let region = &true_regions(inst, x_eps)[a];
    if !region.contains(x) {
        return Err(DecomposeError::MembershipViolation);
    }
    let verts = region.vertices().to_vec();
    let m = verts.len();
    let mut prog = LinearProgram::new(m);
    prog.add_row(vec![Rational::one(); m], Relation::Eq, Rational::one());
    for t in 0..inst.d {
        let row = verts.iter().map(|v| v[t].clone()).collect();
        prog.add_row(row, Relation::Eq, x[t].clone());
    }
    let sol = lp::solve(&prog);
    assert_eq!(
        sol.status,
        LpStatus::Optimal,
        "a region member is a convex combination of its vertices"
    );
    Ok(verts
        .into_iter()
        .zip(sol.point)
        .filter(|(_, w)| w.is_positive())
        .collect())
}

/// Configuration for a regret run.
#[derive(Debug, Clone)]
pub struct RegretConfig {
    pub horizon: usize,
    pub profile: ConstantProfile,
    pub learner_seed: u64,
    pub epsilon_override: Option<Rational>,
    /// Budget knob: shortens (or stretches) phase 1 away from the analysis
    /// value; exploration guarantees degrade gracefully.
    pub t1_override: Option<usize>,
    /// Re-solve the phase-3 LP every this many rounds (1 = paper behavior).
    pub resolve_stride: usize,
}

impl RegretConfig {
    pub fn new(horizon: usize, profile: ConstantProfile) -> Self {
        RegretConfig {
            horizon,
            profile,
            learner_seed: 0,
            epsilon_override: None,
            t1_override: None,
            resolve_stride: 1,
        }
    }
}

/// The exact record of one regret run: phase boundaries, the per-round
/// expected utility of each committed scheme (run-length encoded), realized
/// payoffs, and the ground-truth OPT the regret is measured against.
#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub horizon: usize,
    pub opt: Rational,
    pub epsilon: Rational,
    pub t1: usize,
    /// Rounds consumed through the end of phase 2.
    pub phase2_end: usize,
    pub abort: Option<AbortReason>,
    /// (first round, per-round expected utility) runs covering 1..=horizon.
    pub expected: Vec<(usize, Rational)>,
    /// Realized sender payoff per round (empty if the run skipped recording).
    pub realized: Vec<Rational>,
}

impl RegretTrace {
    /// Which phase round `t` (1-based) belongs to.
    pub fn phase(&self, t: usize) -> u8 {
        if t <= self.t1 {
            1
        } else if t <= self.phase2_end {
            2
        } else {
            3
        }
    }

    /// Σ of expected utilities over rounds 1..=t.
    pub fn expected_sum(&self, t: usize) -> Rational {
        let t = t.min(self.horizon);
        let mut total = Rational::zero();
        for (i, (start, v)) in self.expected.iter().enumerate() {
            if *start > t {
                break;
            }
            let end = self
                .expected
                .get(i + 1)
                .map_or(self.horizon + 1, |(s, _)| *s)
                .min(t + 1);
            total += v * rat_int((end - start) as i64);
        }
        total
    }

    /// Cumulative regret R_t = t·OPT − Σ expected utilities.
    pub fn cumulative_regret(&self, t: usize) -> Rational {
        let t = t.min(self.horizon);
        &self.opt * rat_int(t as i64) - self.expected_sum(t)
    }

    pub fn total_regret(&self) -> Rational {
        self.cumulative_regret(self.horizon)
    }

    /// Per-round expected utility, expanded.
    pub fn expected_per_round(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.horizon);
        for (i, (start, v)) in self.expected.iter().enumerate() {
            let end = self
                .expected
                .get(i + 1)
                .map_or(self.horizon + 1, |(s, _)| *s);
            for _ in *start..end {
                out.push(v.clone());
            }
        }
        out
    }
}

/// Algorithm "Learn-to-Persuade-w/o-Clue": phase 1 estimates the prior,
/// phase 2 learns the region geometry through the action oracle, phase 3
/// commits the LP scheme, re-solved with the running prior estimate. Exactly
/// `horizon` environment rounds are consumed; aborted trials idle out the
/// remainder on the uninformative scheme.
pub fn run_regret(env: &mut Environment, cfg: &RegretConfig) -> RegretTrace {
    let t_total = cfg.horizon;
    assert!(t_total >= 1);
    let d = env.num_states();
    let n = env.num_actions();
    let delta = Rational::new(BigInt::one(), BigInt::from(t_total)); // δ = ζ = 1/T
    let zeta = delta.clone();
    let epsilon = cfg
        .epsilon_override
        .clone()
        .unwrap_or_else(|| default_epsilon(cfg.profile.b_bound, n, d, t_total));
    let t1 = cfg
        .t1_override
        .unwrap_or_else(|| phase_one_length(&epsilon, &delta, d))
        .min(t_total);
    let (opt, _) = compute_opt(env.ground_truth());

    let mut abort = None;
    let mut phase2_end = t1;
    match build_search_space(env, t1, &epsilon) {
        Err(a) => abort = Some(a),
        Ok(space) => {
            match find_polytopes(
                env,
                &space,
                &zeta,
                cfg.profile,
                cfg.learner_seed,
                Some(t_total),
            ) {
                Err(SearchStop::OutOfRounds) => phase2_end = env.round() - 1,
                Err(SearchStop::Abort(a)) => {
                    abort = Some(a);
                    phase2_end = env.round() - 1;
                }
                Ok(regions) => {
                    phase2_end = env.round() - 1;
                    let us = env.sender_utility().to_vec();
                    let stride = cfg.resolve_stride.max(1);
                    let mut phi: Option<SignalingScheme> = None;
                    let mut i = 0usize;
                    while env.round() - 1 < t_total {
                        if phi.is_none() || i % stride == 0 {
                            let mu_t = env
                                .prior_estimate()
                                .expect("phases 1–2 played rounds")
                                .mu_hat();
                            phi = Some(compute_signaling(&regions, &mu_t, &us));
                        }
                        env.commit_and_play(phi.as_ref().expect("just resolved"));
                        i += 1;
                    }
                }
            }
        }
    }
    let filler = SignalingScheme::uninformative(d);
    while env.round() - 1 < t_total {
        env.commit_and_play(&filler);
    }
    RegretTrace {
        horizon: t_total,
        opt,
        epsilon,
        t1,
        phase2_end,
        abort,
        expected: env.expected_utility_rle().to_vec(),
        realized: env.transcript().iter().map(|r| r.u_s.clone()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Environment;
    use crate::model::{sender_expected_utility, true_separating_hyperplane};

    /// d=2, n=2: receiver wants to match the state, sender always wants a1.
    fn matching_2x2() -> Instance {
        Instance::new(
            2,
            2,
            vec![rat(1, 2), rat(1, 2)],
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
            ],
            vec![
                vec![rat_int(0), rat_int(1)],
                vec![rat_int(0), rat_int(1)],
            ],
        )
        .unwrap()
    }

    /// One receiver action dominates everywhere.
    fn dominant_2x2() -> Instance {
        Instance::new(
            2,
            2,
            vec![rat(1, 2), rat(1, 2)],
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(1), rat(1, 2)],
            ],
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat(1, 2), rat_int(1)],
            ],
        )
        .unwrap()
    }

    fn full_space(d: usize) -> SearchSpace {
        SearchSpace::from_prior(vec![rat(1, d as i64); d], &rat(1, 16)).unwrap()
    }

    #[test]
    fn search_space_thresholds() {
        // μ̂ = (1/2, 1/2), ε = 1/8: both states survive, the cut is slack
        // everywhere, X_ε keeps the whole simplex.
        let s = SearchSpace::from_prior(vec![rat(1, 2), rat(1, 2)], &rat(1, 8)).unwrap();
        assert_eq!(s.theta_tilde, vec![0, 1]);
        assert_eq!(s.x_eps.vertices().len(), 2);
        for v in s.x_eps.vertices() {
            assert!(Polytope::simplex(2).contains(v));
        }
        // μ̂ = (9/10, 1/10), ε = 1/8: only θ0 survives; (9/10)x0 ≥ 1/4.
        let s = SearchSpace::from_prior(vec![rat(9, 10), rat(1, 10)], &rat(1, 8)).unwrap();
        assert_eq!(s.theta_tilde, vec![0]);
        assert!(s.x_eps.contains(&[rat_int(1), rat_int(0)]));
        assert!(!s.x_eps.contains(&[rat_int(0), rat_int(1)]));
        assert!(s.x_eps.contains(&[rat(5, 18), rat(13, 18)]));
        // Everything at or below the cutoff: abort.
        assert_eq!(
            SearchSpace::from_prior(vec![rat(1, 2), rat(1, 2)], &rat(1, 4)).unwrap_err(),
            AbortReason::EmptyThetaTilde
        );
    }

    #[test]
    fn build_search_space_consumes_t1_rounds() {
        let mut env = Environment::new(matching_2x2(), 7, OracleMode::Simulated);
        let s = build_search_space(&mut env, 100, &rat(1, 16)).unwrap();
        assert_eq!(env.round(), 101);
        let total: Rational = s.mu_hat.iter().cloned().sum();
        assert_eq!(total, Rational::one());
    }

    #[test]
    fn action_oracle_direct_and_simulated_agree() {
        let inst = matching_2x2();
        let x = vec![rat(2, 3), rat(1, 3)];
        let mut direct = Environment::new(inst.clone(), 0, OracleMode::Direct);
        let a_direct = action_oracle(&mut direct, &x, 10).unwrap();
        assert_eq!(direct.round(), 1); // zero rounds consumed
        let mut sim = Environment::new(inst.clone(), 0, OracleMode::Simulated);
        let a_sim = action_oracle(&mut sim, &x, 10_000).unwrap();
        assert_eq!(a_direct, a_sim);
        assert_eq!(a_direct, chosen_action(&inst, &x).unwrap());
    }

    #[test]
    fn binary_search_recovers_exact_crossing() {
        // Matching instance: H_12 is the diagonal; e1 → e2 crosses at 1/2.
        let inst = matching_2x2();
        let mut env = Environment::new(inst, 0, OracleMode::Direct);
        let space = full_space(2);
        for profile in [ConstantProfile::practical(8), ConstantProfile::theoretical(8)] {
            let mut s = Searcher::new(&mut env, &space, &rat(1, 50), profile, 1, None);
            let (pt, lam, neighbor) = s
                .binary_search(0, &[rat_int(1), rat_int(0)], &[rat_int(0), rat_int(1)])
                .unwrap();
            assert_eq!(lam, rat(1, 2));
            assert_eq!(pt, vec![rat(1, 2), rat(1, 2)]);
            assert_eq!(neighbor, 1);
        }
    }

    #[test]
    fn binary_search_skewed_crossing() {
        // Receiver utilities tilted so the boundary sits at x0 = 1/3 along
        // the e1 → e2 segment: u(a0) = (1, 0), u(a1) = (0, 1/2) under the
        // uniform prior crosses where x0 = x1/2.
        let inst = Instance::new(
            2,
            2,
            vec![rat(1, 2), rat(1, 2)],
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat(1, 2)],
            ],
            vec![
                vec![rat_int(0), rat_int(1)],
                vec![rat_int(0), rat_int(1)],
            ],
        )
        .unwrap();
        let mut env = Environment::new(inst.clone(), 0, OracleMode::Direct);
        let space = full_space(2);
        let mut s = Searcher::new(
            &mut env,
            &space,
            &rat(1, 50),
            ConstantProfile::practical(8),
            1,
            None,
        );
        let (pt, lam, neighbor) = s
            .binary_search(0, &[rat_int(1), rat_int(0)], &[rat_int(0), rat_int(1)])
            .unwrap();
        assert_eq!(lam, rat(2, 3));
        assert_eq!(neighbor, 1);
        let h = true_separating_hyperplane(&inst, 0, 1).unwrap();
        assert!(h.eval(&pt).is_zero());
    }

    #[test]
    fn find_polytopes_dominant_action() {
        let inst = dominant_2x2();
        // a1 weakly dominates? Check: scores μθ xθ uθ(a): under any x,
        // receiver compares (x0 + x1) vs (x1/2)… a0 dominates here.
        let mut env = Environment::new(inst.clone(), 3, OracleMode::Direct);
        let space = full_space(2);
        let rc = find_polytopes(
            &mut env,
            &space,
            &rat(1, 50),
            ConstantProfile::practical(8),
            9,
            None,
        )
        .unwrap();
        assert_eq!(rc.closed.len(), 1);
        assert!(rc.hyperplanes.is_empty());
        let a = rc.closed[0];
        assert_eq!(a, chosen_action(&inst, &[rat(1, 2), rat(1, 2)]).unwrap());
        assert!(rc.closed_regions_cover(&space.x_eps));
        for (b, r) in rc.regions.iter().enumerate() {
            if b != a {
                assert!(r.is_empty());
            }
        }
    }

    #[test]
    fn find_polytopes_matching_instance_exact() {
        let inst = matching_2x2();
        let truth = true_separating_hyperplane(&inst, 0, 1).unwrap();
        for profile in [ConstantProfile::practical(8)] {
            let mut env = Environment::new(inst.clone(), 5, OracleMode::Direct);
            let space = full_space(2);
            let rc = find_polytopes(&mut env, &space, &rat(1, 50), profile, 11, None).unwrap();
            assert_eq!(rc.closed.len(), 2);
            for (_, h) in &rc.hyperplanes {
                assert_eq!(h, &truth);
            }
            assert!(rc.closed_regions_cover(&space.x_eps));
            // Learned regions match the ground-truth vertex sets.
            let gt = true_regions(&inst, &space.x_eps);
            for &a in &rc.closed {
                let mut got = rc.regions[a].vertices().to_vec();
                let mut want = gt[a].vertices().to_vec();
                got.sort();
                want.sort();
                assert_eq!(got, want, "action {a}");
            }
        }
    }

    #[test]
    fn find_polytopes_simulated_mode_consumes_rounds() {
        let inst = matching_2x2();
        let mut env = Environment::new(inst.clone(), 5, OracleMode::Simulated);
        let space = full_space(2);
        let rc = find_polytopes(
            &mut env,
            &space,
            &rat(1, 50),
            ConstantProfile::practical(8),
            11,
            None,
        )
        .unwrap();
        assert_eq!(rc.closed.len(), 2);
        assert!(env.round() > 1, "simulated queries consume rounds");
        let truth = true_separating_hyperplane(&inst, 0, 1).unwrap();
        for (_, h) in &rc.hyperplanes {
            assert_eq!(h, &truth);
        }
    }

    #[test]
    fn lift_to_box_scales_region_vertices() {
        let space = full_space(2);
        let lifted = lift_to_box(&space.x_eps);
        for v in space.x_eps.vertices() {
            for alpha in [rat_int(0), rat(1, 2), rat_int(1)] {
                let scaled: Vec<Rational> = v.iter().map(|c| c * &alpha).collect();
                assert!(lifted.contains(&scaled));
            }
        }
        // The empty region lifts to the origin alone.
        let zero = lift_to_box(&empty_region(2));
        assert!(zero.contains(&[rat_int(0), rat_int(0)]));
        assert!(!zero.contains(&[rat(1, 2), rat_int(0)]));
    }

    #[test]
    fn compute_signaling_uninformative_on_degenerate_regions() {
        let rc = RegionCollection {
            regions: vec![empty_region(2), empty_region(2)],
            closed: vec![],
            hyperplanes: vec![],
        };
        let us = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ];
        let phi = compute_signaling(&rc, &[rat(1, 2), rat(1, 2)], &us);
        assert_eq!(phi.signals[0], "s*");
        for t in 0..2 {
            assert_eq!(phi.table[t][0], Rational::one());
        }
    }

    #[test]
    fn lp_chain_matches_vertex_oracle() {
        // With μ̂ = μ and ground-truth regions, the committed-scheme LP value
        // equals the vertex-form oracle and the scheme is near-optimal.
        for inst in [matching_2x2(), dominant_2x2()] {
            let eps = rat(1, 16);
            let space = SearchSpace::from_prior(inst.prior.clone(), &eps).unwrap();
            let regions = true_regions(&inst, &space.x_eps);
            let closed: Vec<usize> = (0..inst.n)
                .filter(|&a| regions[a].is_full_dimensional())
                .collect();
            let rc = RegionCollection {
                regions,
                closed,
                hyperplanes: vec![],
            };
            let phi = compute_signaling(&rc, &inst.prior, &inst.sender_utility);
            let achieved = sender_expected_utility(&inst, &phi);
            let oracle = lp_vertices_oracle(&inst, &space.x_eps);
            assert!(achieved >= &oracle - rat_int(0), "scheme ≥ oracle value");
            let (opt, _) = compute_opt(&inst);
            let slack = eps * rat_int(10 * inst.n as i64 * inst.d as i64);
            assert!(achieved >= opt - slack, "10εnd guarantee");
        }
    }

    #[test]
    fn decompose_slice_cases() {
        let inst = matching_2x2();
        let space = full_space(2);
        // A vertex decomposes onto itself.
        let regions = true_regions(&inst, &space.x_eps);
        let v = regions[0].vertices()[0].clone();
        let parts = decompose_slice(&inst, &space.x_eps, &v).unwrap();
        assert_eq!(parts, vec![(v.clone(), Rational::one())]);
        // A midpoint splits (1/2, 1/2).
        let v2 = regions[0].vertices()[1].clone();
        let mid: Vec<Rational> =
            v.iter().zip(&v2).map(|(a, b)| (a + b) * rat(1, 2)).collect();
        let mut parts = decompose_slice(&inst, &space.x_eps, &mid).unwrap();
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|(_, w)| *w == rat(1, 2)));
        // Reconstruction is exact and the utility inequality holds.
        let recon: Vec<Rational> = (0..2)
            .map(|t| parts.iter().map(|(v, w)| &v[t] * w).sum())
            .collect();
        assert_eq!(recon, mid);
    }

    #[test]
    fn run_regret_tiny_horizon_all_phase_one() {
        let inst = matching_2x2();
        let mut env = Environment::new(inst.clone(), 1, OracleMode::Simulated);
        let cfg = RegretConfig::new(5, ConstantProfile::practical(8));
        let trace = run_regret(&mut env, &cfg);
        assert_eq!(trace.t1, 5);
        assert_eq!(trace.phase(3), 1);
        let u0 = sender_expected_utility(&inst, &SignalingScheme::uninformative(2));
        assert_eq!(trace.expected_sum(5), u0 * rat_int(5));
        assert!(trace.total_regret() >= Rational::zero());
    }

    #[test]
    fn run_regret_full_pipeline_small() {
        let inst = matching_2x2();
        let mut env = Environment::new(inst.clone(), 12, OracleMode::Simulated);
        let mut cfg = RegretConfig::new(600, ConstantProfile::practical(8));
        cfg.epsilon_override = Some(rat(1, 13));
        cfg.t1_override = Some(64);
        cfg.resolve_stride = 16;
        let trace = run_regret(&mut env, &cfg);
        assert_eq!(env.round(), 601);
        assert!(trace.abort.is_none(), "abort: {:?}", trace.abort);
        assert!(trace.phase2_end > trace.t1);
        assert!(trace.phase2_end < 600, "phase 3 reached");
        // Regret is nonnegative and cumulative sums are consistent.
        assert!(trace.total_regret() >= Rational::zero());
        let per_round = trace.expected_per_round();
        assert_eq!(per_round.len(), 600);
        let direct_sum: Rational = per_round.iter().cloned().sum();
        assert_eq!(direct_sum, trace.expected_sum(600));
        // Phase 3 commits a near-optimal scheme on this easy instance.
        let (opt, _) = compute_opt(&inst);
        let last = per_round.last().unwrap();
        assert!(opt.clone() - last <= rat(1, 4), "phase-3 gap too large: {last}");
    }
}
