//! Instance generators: seeded random instances with capped bit complexity,
//! plus the three hand-constructed lower-bound families.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use persuasion_core::exactnum::{bit_complexity, rat, rat_int, Rational};
use persuasion_core::model::Instance;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("could not draw distinct receiver action columns after 100 attempts")]
    GenerationExhausted,
    #[error("invalid generator parameters: {0}")]
    BadParameters(String),
}

/// A random instance whose prior and utilities are reduced rationals with
/// bit complexity (numerator plus denominator bit length) at most `bit_cap`.
/// The prior is interior; receiver action columns are pairwise distinct,
/// redrawn on collision. Deterministic per seed.
pub fn gen_random_instance(
    d: usize,
    n: usize,
    bit_cap: u64,
    seed: u64,
) -> Result<Instance, GenError> {
    if d < 2 || n < 2 || bit_cap < 2 {
        return Err(GenError::BadParameters(format!(
            "need d ≥ 2, n ≥ 2, bit_cap ≥ 2, got d={d}, n={n}, bit_cap={bit_cap}"
        )));
    }
    // Splitting the cap between numerator and denominator keeps every
    // reduced entry within bit_cap total bits.
    let half_cap = 1u64 << (bit_cap / 2);
    if (half_cap - 1) < d as u64 {
        return Err(GenError::BadParameters(format!(
            "bit_cap {bit_cap} leaves no room for a {d}-part interior prior"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Interior prior over a common denominator q: a uniform composition of q
    // into d positive parts, so each reduced μ_θ = p_i/q stays within the cap.
    let q = rng.gen_range(d as u64..half_cap);
    let mut cuts: Vec<u64> = Vec::with_capacity(d - 1);
    while cuts.len() < d - 1 {
        let c = rng.gen_range(1..q);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut bounds = vec![0u64];
    bounds.extend(cuts);
    bounds.push(q);
    let prior: Vec<Rational> = bounds
        .windows(2)
        .map(|w| rat((w[1] - w[0]) as i64, q as i64))
        .collect();

    let mut draw_entry = |rng: &mut ChaCha8Rng| -> Rational {
        let den = rng.gen_range(1..half_cap);
        let num = rng.gen_range(0..=den);
        rat(num as i64, den as i64)
    };
    let draw_column = |rng: &mut ChaCha8Rng, draw: &mut dyn FnMut(&mut ChaCha8Rng) -> Rational| {
        (0..d).map(|_| draw(rng)).collect::<Vec<_>>()
    };

    // Receiver columns drawn per action, redrawn on duplicates.
    let mut columns: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut attempts = 0;
        loop {
            let col = draw_column(&mut rng, &mut draw_entry);
            if !columns.contains(&col) {
                columns.push(col);
                break;
            }
            attempts += 1;
            if attempts >= 100 {
                return Err(GenError::GenerationExhausted);
            }
        }
    }
    let receiver: Vec<Vec<Rational>> = (0..d)
        .map(|t| (0..n).map(|a| columns[a][t].clone()).collect())
        .collect();
    let sender: Vec<Vec<Rational>> = (0..d)
        .map(|_| (0..n).map(|_| draw_entry(&mut rng)).collect())
        .collect();

    debug_assert!(prior.iter().all(|p| bit_complexity(p) <= bit_cap));
    Instance::new(d, n, prior, receiver, sender).map_err(|e| GenError::BadParameters(e.to_string()))
}

/// The exponential-in-d lower-bound family: uniform prior, d matching
/// actions, a "target" action the sender wants that is a best response at a
/// single posterior determined by the bit vector p, and a safe fallback.
pub fn gen_hardness1(d: usize, p: &[u8]) -> Result<Instance, GenError> {
    if d < 2 || d % 2 != 0 {
        return Err(GenError::BadParameters(format!("d must be even ≥ 2, got {d}")));
    }
    if p.len() != d || p.iter().any(|&b| b > 1) {
        return Err(GenError::BadParameters("p must be a 0/1 vector of length d".into()));
    }
    if p.iter().map(|&b| b as usize).sum::<usize>() != d / 2 {
        return Err(GenError::BadParameters("p must have exactly d/2 ones".into()));
    }
    let n = d + 2;
    let prior = vec![rat(1, d as i64); d];
    let two_over_d = rat(2, d as i64);
    let receiver: Vec<Vec<Rational>> = (0..d)
        .map(|i| {
            let mut row: Vec<Rational> = (0..d)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect();
            row.push(&two_over_d * rat_int(p[i] as i64));
            row.push(two_over_d.clone());
            row
        })
        .collect();
    let sender: Vec<Vec<Rational>> = (0..d)
        .map(|_| {
            let mut row = vec![Rational::zero(); n];
            row[d] = Rational::one();
            row
        })
        .collect();
    Instance::new_allow_equivalent_actions(d, n, prior, receiver, sender)
        .map_err(|e| GenError::BadParameters(e.to_string()))
}

/// The √T regret lower-bound pair: two d=2, n=4 instances whose oracle
/// feedback is identical everywhere (a1 when x1 > x2, a2 when 0 < x1 < x2,
/// a3 on the diagonal, a4 at x1 = 0) but whose priors tilt opposite ways,
/// so only prior estimation can tell them apart. `eps` ∈ (0, 1/4).
pub fn gen_hardness3(which: u8, eps: &Rational) -> Result<Instance, GenError> {
    if which != 1 && which != 2 {
        return Err(GenError::BadParameters(format!("which must be 1 or 2, got {which}")));
    }
    if !(eps > &Rational::zero() && eps < &rat(1, 4)) {
        return Err(GenError::BadParameters(format!("eps must lie in (0, 1/4), got {eps}")));
    }
    let inv = |base: i64, scale: i64| Rational::one() / (rat_int(base) + rat_int(scale) * eps);
    let half = rat(1, 2);
    let (prior, receiver) = if which == 1 {
        (
            vec![&half + eps, &half - eps],
            vec![
                vec![inv(2, 4), inv(10, 20), rat(3, 10), Rational::zero()],
                vec![inv(10, -20), inv(2, -4), rat(3, 10), inv(2, -4)],
            ],
        )
    } else {
        (
            vec![&half - eps, &half + eps],
            vec![
                vec![inv(2, -4), inv(10, -20), rat(3, 10), Rational::zero()],
                vec![inv(10, 20), inv(2, 4), rat(3, 10), inv(2, 4)],
            ],
        )
    };
    let sender = vec![
        vec![Rational::zero(), Rational::zero(), Rational::one(), Rational::zero()],
        vec![Rational::zero(), Rational::zero(), Rational::zero(), Rational::one()],
    ];
    Instance::new(2, 4, prior, receiver, sender).map_err(|e| GenError::BadParameters(e.to_string()))
}

/// The known-prior sample-complexity lower-bound pair: two d=2, n=3
/// instances sharing the prior (4γ, 1−4γ) that differ only at the posterior
/// (1,0), where instance 1 rewards the sender's favorite action and
/// instance 2 does not. Requires γ ∈ (0, 1/5].
pub fn gen_hardness2_known(gamma: &Rational, which: u8) -> Result<Instance, GenError> {
    if which != 1 && which != 2 {
        return Err(GenError::BadParameters(format!("which must be 1 or 2, got {which}")));
    }
    if !(gamma > &Rational::zero() && gamma <= &rat(1, 5)) {
        return Err(GenError::BadParameters(format!("gamma must lie in (0, 1/5], got {gamma}")));
    }
    let four_gamma = rat_int(4) * gamma;
    let prior = vec![four_gamma.clone(), Rational::one() - &four_gamma];
    let a3_top = if which == 1 { Rational::one() } else { rat(1, 2) };
    let receiver = vec![
        vec![Rational::one(), rat(1, 2), a3_top],
        vec![rat(1, 2), Rational::one(), Rational::zero()],
    ];
    let sender = vec![
        vec![Rational::zero(), rat(1, 2), Rational::one()],
        vec![Rational::zero(), rat(1, 2), Rational::one()],
    ];
    Instance::new(2, 3, prior, receiver, sender).map_err(|e| GenError::BadParameters(e.to_string()))
}
