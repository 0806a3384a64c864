//! Exact polytopes in slice space: halfspaces, vertex enumeration, minimal
//! H-representations, full-dimensionality tests, interior sampling, and cell
//! enumeration of hyperplane arrangements.
//!
//! Everything here is desk-scale by design (dimension ≤ ~5, a few dozen
//! constraints): vertex enumeration is brute force over d-subsets of
//! constraint boundaries, which is exact, deterministic and fast enough.

use crate::exactnum::{bit_complexity, rat_int, Rational};
use crate::lp;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("points are linearly dependent")]
    RankDeficient,
    #[error("fewer than d linearly independent vertices")]
    DegenerateVertexSet,
    #[error("sampled point is not strictly interior")]
    SampleNotInterior,
}

/// The set {x : coeffs·x = offset}, stored canonically: the first nonzero
/// coefficient is +1, so equal hyperplanes compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperplane {
    pub coeffs: Vec<Rational>,
    pub offset: Rational,
}

impl Hyperplane {
    /// Builds and canonicalizes; panics if all coefficients are zero.
    pub fn new(coeffs: Vec<Rational>, offset: Rational) -> Self {
        let lead = coeffs
            .iter()
            .find(|c| !c.is_zero())
            .expect("hyperplane needs a nonzero coefficient")
            .clone();
        let coeffs = coeffs.iter().map(|c| c / &lead).collect();
        Hyperplane {
            coeffs,
            offset: &offset / &lead,
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) - &self.offset
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.eval(x).is_zero()
    }

    /// The halfspace coeffs·x ≥ offset bounded by this hyperplane.
    pub fn upper_halfspace(&self) -> Halfspace {
        Halfspace {
            coeffs: self.coeffs.clone(),
            offset: self.offset.clone(),
        }
    }

    /// The halfspace coeffs·x ≤ offset bounded by this hyperplane.
    pub fn lower_halfspace(&self) -> Halfspace {
        Halfspace {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
            offset: -self.offset.clone(),
        }
    }
}

/// The set {x : coeffs·x ≥ offset}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub coeffs: Vec<Rational>,
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(coeffs: Vec<Rational>, offset: Rational) -> Self {
        assert!(
            coeffs.iter().any(|c| !c.is_zero()),
            "halfspace needs a nonzero coefficient"
        );
        Halfspace { coeffs, offset }
    }

    /// Signed slack coeffs·x − offset (≥ 0 inside).
    pub fn slack(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) - &self.offset
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        !self.slack(x).is_negative()
    }

    pub fn strictly_contains(&self, x: &[Rational]) -> bool {
        self.slack(x).is_positive()
    }

    pub fn boundary(&self) -> Hyperplane {
        Hyperplane::new(self.coeffs.clone(), self.offset.clone())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An exact H-representation with a lazily enumerated, write-once vertex
/// cache. Immutable after construction; intersections build new polytopes.
#[derive(Debug)]
pub struct Polytope {
    pub dim: usize,
    pub equalities: Vec<Hyperplane>,
    pub inequalities: Vec<Halfspace>,
    vertices: OnceLock<Vec<Vec<Rational>>>,
}

impl Clone for Polytope {
    fn clone(&self) -> Self {
        let cell = OnceLock::new();
        if let Some(v) = self.vertices.get() {
            let _ = cell.set(v.clone());
        }
        Polytope {
            dim: self.dim,
            equalities: self.equalities.clone(),
            inequalities: self.inequalities.clone(),
            vertices: cell,
        }
    }
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.equalities == other.equalities
            && self.inequalities == other.inequalities
    }
}

impl Polytope {
    pub fn new(dim: usize, equalities: Vec<Hyperplane>, inequalities: Vec<Halfspace>) -> Self {
        Polytope {
            dim,
            equalities,
            inequalities,
            vertices: OnceLock::new(),
        }
    }

    /// The standard simplex Δ in R^d: Σx = 1, x ≥ 0.
    pub fn simplex(d: usize) -> Self {
        let ones = vec![Rational::one(); d];
        let equalities = vec![Hyperplane::new(ones, Rational::one())];
        let inequalities = (0..d)
            .map(|i| {
                let mut c = vec![Rational::zero(); d];
                c[i] = Rational::one();
                Halfspace::new(c, Rational::zero())
            })
            .collect();
        Polytope::new(d, equalities, inequalities)
    }

    /// The unit box [0,1]^d.
    pub fn unit_box(d: usize) -> Self {
        let mut ineqs = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut c = vec![Rational::zero(); d];
            c[i] = Rational::one();
            ineqs.push(Halfspace::new(c.clone(), Rational::zero()));
            c[i] = -Rational::one();
            ineqs.push(Halfspace::new(c, -Rational::one()));
        }
        Polytope::new(d, Vec::new(), ineqs)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.equalities.iter().all(|h| h.contains(x))
            && self.inequalities.iter().all(|h| h.contains(x))
    }

    /// Membership with strict inequality on every halfspace.
    pub fn strictly_contains(&self, x: &[Rational]) -> bool {
        self.equalities.iter().all(|h| h.contains(x))
            && self.inequalities.iter().all(|h| h.strictly_contains(x))
    }

    pub fn intersect_halfspace(&self, h: Halfspace) -> Polytope {
        let mut ineqs = self.inequalities.clone();
        ineqs.push(h);
        Polytope::new(self.dim, self.equalities.clone(), ineqs)
    }

    pub fn intersect_hyperplane(&self, h: Hyperplane) -> Polytope {
        let mut eqs = self.equalities.clone();
        eqs.push(h);
        Polytope::new(self.dim, eqs, self.inequalities.clone())
    }

    /// Exact feasibility via LP (the set may still be lower-dimensional).
    pub fn is_empty(&self) -> bool {
        let mut prog = lp::LinearProgram::new(self.dim);
        for j in 0..self.dim {
            prog.lower[j] = Some(rat_int(-2));
            prog.upper[j] = Some(rat_int(2));
        }
        for h in &self.inequalities {
            prog.add_row(h.coeffs.clone(), lp::Relation::Ge, h.offset.clone());
        }
        for h in &self.equalities {
            prog.add_row(h.coeffs.clone(), lp::Relation::Eq, h.offset.clone());
        }
        lp::solve(&prog).status == lp::LpStatus::Infeasible
    }

    /// Exact, deduplicated, lexicographically sorted vertex set, computed by
    /// solving every d-subset of constraint boundaries (equalities always
    /// included) and keeping the feasible unique solutions. Cached.
    pub fn vertices(&self) -> &[Vec<Rational>] {
        self.vertices.get_or_init(|| enumerate_vertices_impl(self))
    }

    /// True iff the polytope has positive (d−1)-volume within its affine
    /// hull {Σx = 1}; the normalization equality must be present.
    pub fn is_full_dimensional(&self) -> bool {
        lp::interior_point(&self.inequalities, &self.equalities).is_some()
    }

    /// Same point set with no removable inequality, deterministic scan order.
    pub fn minimal_h_representation(&self) -> Result<Polytope, GeometryError> {
        if self.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        let mut kept: Vec<Halfspace> = self.inequalities.clone();
        let mut i = 0;
        while i < kept.len() {
            if lp::is_redundant(i, &kept, &self.equalities) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(Polytope::new(self.dim, self.equalities.clone(), kept))
    }
}

/// Exact vertex enumeration: brute force over d-subsets of constraint
/// boundaries with the equalities always included.
fn enumerate_vertices_impl(p: &Polytope) -> Vec<Vec<Rational>> {
    let d = p.dim;
    let eq_rows: Vec<(Vec<Rational>, Rational)> = p
        .equalities
        .iter()
        .map(|h| (h.coeffs.clone(), h.offset.clone()))
        .collect();
    let eq_rank = row_rank(&eq_rows.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>());
    if eq_rank > d {
        return Vec::new();
    }
    let need = d - eq_rank;
    let m = p.inequalities.len();
    if need > m {
        // Not enough boundaries to pin a point unless the equalities alone
        // determine one.
        if need > 0 {
            return Vec::new();
        }
    }
    let mut found: Vec<Vec<Rational>> = Vec::new();
    let mut idx: Vec<usize> = (0..need).collect();
    loop {
        let mut rows = eq_rows.clone();
        for &i in &idx {
            let h = &p.inequalities[i];
            rows.push((h.coeffs.clone(), h.offset.clone()));
        }
        if let Some(x) = solve_unique(&rows, d) {
            if p.contains(&x) {
                found.push(x);
            }
        }
        if need == 0 {
            break;
        }
        // Next combination of `need` indices out of m, lexicographic.
        let mut k = need;
        loop {
            if k == 0 {
                idx.clear();
                break;
            }
            k -= 1;
            if idx[k] + 1 <= m - (need - k) {
                idx[k] += 1;
                for j in k + 1..need {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if idx.is_empty() {
            break;
        }
    }
    found.sort();
    found.dedup();
    found
}

/// Rank of a set of row vectors, by exact Gaussian elimination.
pub fn row_rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let d = rows[0].len();
    let mut mat: Vec<Vec<Rational>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..d {
        let pivot = (rank..mat.len()).find(|&r| !mat[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        mat.swap(rank, pr);
        let pv = mat[rank][col].clone();
        for r in 0..mat.len() {
            if r != rank && !mat[r][col].is_zero() {
                let f = &mat[r][col] / &pv;
                for c in col..d {
                    let t = &f * &mat[rank][c];
                    mat[r][c] -= t;
                }
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    rank
}

/// Unique solution of the linear system `rows · x = rhs`, if it exists.
pub fn solve_unique(rows: &[(Vec<Rational>, Rational)], d: usize) -> Option<Vec<Rational>> {
    let mut mat: Vec<Vec<Rational>> = rows
        .iter()
        .map(|(c, b)| {
            let mut r = c.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..d {
        let pivot = (rank..mat.len()).find(|&r| !mat[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        mat.swap(rank, pr);
        let pv = mat[rank][col].clone();
        for c in col..=d {
            let t = &mat[rank][c] / &pv;
            mat[rank][c] = t;
        }
        for r in 0..mat.len() {
            if r != rank && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in col..=d {
                    let t = &f * &mat[rank][c];
                    mat[r][c] -= t;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    if rank < d {
        return None; // underdetermined
    }
    // Consistency: any residual zero-row must have zero rhs.
    for r in rank..mat.len() {
        if !mat[r][d].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); d];
    for (r, &col) in pivot_cols.iter().enumerate() {
        x[col] = mat[r][d].clone();
    }
    Some(x)
}

/// The canonical homogeneous hyperplane through the origin containing the
/// given d−1 linearly independent points: its normal is the exact
/// one-dimensional null space of the point matrix.
pub fn fit_homogeneous_hyperplane(points: &[Vec<Rational>]) -> Result<Hyperplane, GeometryError> {
    let d = points.first().ok_or(GeometryError::RankDeficient)?.len();
    if points.len() != d - 1 || row_rank(&points.to_vec()) != d - 1 {
        return Err(GeometryError::RankDeficient);
    }
    // Reduce the (d−1)×d matrix and read a null vector off the free column.
    let mut mat: Vec<Vec<Rational>> = points.to_vec();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..d {
        let pivot = (rank..mat.len()).find(|&r| !mat[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        mat.swap(rank, pr);
        let pv = mat[rank][col].clone();
        for c in col..d {
            let t = &mat[rank][c] / &pv;
            mat[rank][c] = t;
        }
        for r in 0..mat.len() {
            if r != rank && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in col..d {
                    let t = &f * &mat[rank][c];
                    mat[r][c] -= t;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    let free_col = (0..d)
        .find(|c| !pivot_cols.contains(c))
        .expect("rank d−1 leaves one free column");
    let mut normal = vec![Rational::zero(); d];
    normal[free_col] = Rational::one();
    for (r, &col) in pivot_cols.iter().enumerate() {
        normal[col] = -mat[r][free_col].clone();
    }
    Ok(Hyperplane::new(normal, Rational::zero()))
}

/// Maximum bit-complexity over all vertex coordinates; used by the vertex
/// bit-bound assertions.
pub fn max_vertex_bit_complexity(p: &Polytope) -> u64 {
    p.vertices()
        .iter()
        .flat_map(|v| v.iter().map(bit_complexity))
        .max()
        .unwrap_or(0)
}

/// True iff all coordinates of every vertex share a single denominator,
/// i.e. each coordinate's reduced denominator divides the vertex-wide lcm
/// that stays within the bit bound. Checked in assertion mode.
pub fn vertices_share_denominator_within(p: &Polytope, bound: u64) -> bool {
    p.vertices().iter().all(|v| {
        let mut lcm = BigInt::one();
        for c in v {
            lcm = num_integer::lcm(lcm, c.denom().clone());
        }
        crate::exactnum::bitlen(&lcm) <= bound
    })
}

/// All full-dimensional cells of the arrangement of `hyperplanes` inside
/// `within`, each tagged with its sign vector (+1 above, −1 below) and one
/// strictly interior point. Deterministic depth-first order, plus-side
/// first.
pub fn enumerate_cells(
    hyperplanes: &[Hyperplane],
    within: &Polytope,
) -> Vec<(Vec<i8>, Vec<Rational>)> {
    let mut out = Vec::new();
    let mut signs = Vec::with_capacity(hyperplanes.len());
    let mut chosen: Vec<Halfspace> = within.inequalities.clone();
    recurse_cells(
        hyperplanes,
        within,
        &mut signs,
        &mut chosen,
        &mut out,
    );
    out
}

fn recurse_cells(
    hyperplanes: &[Hyperplane],
    within: &Polytope,
    signs: &mut Vec<i8>,
    chosen: &mut Vec<Halfspace>,
    out: &mut Vec<(Vec<i8>, Vec<Rational>)>,
) {
    let level = signs.len();
    match lp::interior_point(chosen, &within.equalities) {
        None => {}
        Some(point) => {
            if level == hyperplanes.len() {
                out.push((signs.clone(), point));
            } else {
                let h = &hyperplanes[level];
                for (sign, half) in [
                    (1i8, h.upper_halfspace()),
                    (-1i8, h.lower_halfspace()),
                ] {
                    signs.push(sign);
                    chosen.push(half);
                    recurse_cells(hyperplanes, within, signs, chosen, out);
                    chosen.pop();
                    signs.pop();
                }
            }
        }
    }
}

/// One draw of Algorithm "Sample-Int": a random strictly interior normalized
/// slice of `p`, built from the centroid of d linearly independent vertices
/// plus a grid perturbation of radius ρ.
///
/// The theoretical profile uses the verbatim constants (ρ from the printed
/// doubly-exponential formula with `l_bits` = B + B_ε + B_μ̂); the practical
/// profile takes ρ as half the exact minimum slack-to-sensitivity ratio of
/// the centroid against every defining constraint, which preserves the one
/// property downstream code uses (strict interiority) at workable bit sizes.
pub fn sample_int<R: Rng>(
    p: &Polytope,
    delta: &Rational,
    profile: &crate::learner::ConstantProfile,
    l_bits: u64,
    rng: &mut R,
) -> Result<Vec<Rational>, GeometryError> {
    let d = p.dim;
    let centroid = independent_vertex_centroid(p)?;

    let rho = match profile.mode {
        crate::learner::ProfileMode::Theoretical => {
            // ρ = (d³ · 2^{9d³L + 4dL})^{-1}
            let d3 = (d as u64).pow(3);
            let exp = 9 * d3 * l_bits + 4 * (d as u64) * l_bits;
            Rational::new(BigInt::one(), BigInt::from(d3) * (BigInt::one() << exp as usize))
        }
        crate::learner::ProfileMode::Practical => practical_perturbation_radius(p, &centroid)?,
    };

    // M = ⌈√d / δ⌉: smallest M with M²·δ² ≥ d.
    let m_grid = ceil_sqrt_ratio(d as u64, delta);
    let m_big = BigInt::from(m_grid);

    let mut x = vec![Rational::zero(); d];
    let mut sum = Rational::zero();
    for (i, xi) in x.iter_mut().enumerate().take(d - 1) {
        let k: i64 = rng.gen_range(-(m_grid as i64)..=(m_grid as i64));
        let y = Rational::new(BigInt::from(k), m_big.clone());
        *xi = &centroid[i] + &rho * &y;
        sum += xi.clone();
    }
    x[d - 1] = Rational::one() - sum;

    if !p.strictly_contains(&x) {
        return Err(GeometryError::SampleNotInterior);
    }
    Ok(x)
}

/// Centroid of a deterministic choice of `dim` linearly independent vertices
/// of `p`; strictly interior to `p` relative to its affine hull whenever `p`
/// is full-dimensional within that hull.
pub fn independent_vertex_centroid(p: &Polytope) -> Result<Vec<Rational>, GeometryError> {
    let d = p.dim;
    let mut chosen: Vec<Vec<Rational>> = Vec::with_capacity(d);
    for v in p.vertices() {
        let mut trial = chosen.clone();
        trial.push(v.clone());
        if row_rank(&trial) == trial.len() {
            chosen = trial;
            if chosen.len() == d {
                break;
            }
        }
    }
    if chosen.len() < d {
        return Err(GeometryError::DegenerateVertexSet);
    }
    let d_rat = rat_int(d as i64);
    let mut centroid = vec![Rational::zero(); d];
    for v in &chosen {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x;
        }
    }
    for c in centroid.iter_mut() {
        *c /= &d_rat;
    }
    Ok(centroid)
}

/// Largest per-coordinate move radius ρ guaranteed to keep `x + Δ` strictly
/// inside `p` for any normalized move Δ with |Δ_i| ≤ ρ (i < d) and
/// Δ_d = −Σ_{i<d} Δ_i: half the exact minimum slack-to-sensitivity ratio of
/// `x` against every defining inequality.
pub fn practical_perturbation_radius(
    p: &Polytope,
    x: &[Rational],
) -> Result<Rational, GeometryError> {
    let d = p.dim;
    let mut best: Option<Rational> = None;
    for h in &p.inequalities {
        let slack = h.slack(x);
        if !slack.is_positive() {
            return Err(GeometryError::SampleNotInterior);
        }
        let sens: Rational = (0..d - 1)
            .map(|i| (&h.coeffs[i] - &h.coeffs[d - 1]).abs())
            .sum();
        if sens.is_zero() {
            continue; // constraint invariant along the move
        }
        let r = slack / (&sens * rat_int(2));
        best = Some(match best {
            None => r,
            Some(b) => b.min(r),
        });
    }
    Ok(best.unwrap_or_else(Rational::one))
}

/// Smallest integer M with (M·δ)² ≥ d.
fn ceil_sqrt_ratio(d: u64, delta: &Rational) -> u64 {
    let num = delta.numer().magnitude();
    let den = delta.denom().magnitude();
    // M ≥ √d · den / num  ⇔  M² num² ≥ d den².
    let target = den * den * d;
    let num2 = num * num;
    let mut m = (target.clone() / &num2).sqrt();
    while &(&m * &m) * &num2 < target {
        m += 1u32;
    }
    u64::try_from(&m).expect("grid resolution fits in u64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn v(coords: &[(i64, i64)]) -> Vec<Rational> {
        coords.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn hyperplane_canonical_form() {
        let h = Hyperplane::new(vec![rat_int(-2), rat_int(4)], rat_int(6));
        assert_eq!(h.coeffs, vec![rat_int(1), rat_int(-2)]);
        assert_eq!(h.offset, rat_int(-3));
        let h2 = Hyperplane::new(vec![rat_int(1), rat_int(-2)], rat_int(-3));
        assert_eq!(h, h2);
    }

    #[test]
    fn simplex_vertices() {
        let p = Polytope::simplex(3);
        let verts = p.vertices();
        assert_eq!(
            verts,
            &[
                v(&[(0, 1), (0, 1), (1, 1)]),
                v(&[(0, 1), (1, 1), (0, 1)]),
                v(&[(1, 1), (0, 1), (0, 1)]),
            ]
        );
    }

    #[test]
    fn box_vertices() {
        let p = Polytope::unit_box(2);
        assert_eq!(p.vertices().len(), 4);
    }

    #[test]
    fn empty_polytope_has_no_vertices() {
        let p = Polytope::simplex(2).intersect_halfspace(Halfspace::new(
            vec![rat_int(1), rat_int(1)],
            rat_int(2),
        ));
        assert!(p.is_empty());
        assert!(p.vertices().is_empty());
    }

    #[test]
    fn full_dimensionality() {
        assert!(Polytope::simplex(3).is_full_dimensional());
        // Simplex pinned to the facet x1 = 0 via two opposite inequalities.
        let mut p = Polytope::simplex(3);
        p = p.intersect_halfspace(Halfspace::new(
            vec![rat_int(-1), rat_int(0), rat_int(0)],
            rat_int(0),
        ));
        assert!(!p.is_full_dimensional());
    }

    #[test]
    fn minimal_h_representation_drops_redundant_rows() {
        let p = Polytope::simplex(2)
            .intersect_halfspace(Halfspace::new(vec![rat_int(1), rat_int(0)], rat_int(0)))
            .intersect_halfspace(Halfspace::new(vec![rat_int(-1), rat_int(0)], rat_int(-2)));
        let min = p.minimal_h_representation().unwrap();
        assert_eq!(min.inequalities.len(), 2);
        assert_eq!(min.vertices(), p.vertices());
        // Idempotent.
        let again = min.minimal_h_representation().unwrap();
        assert_eq!(again.inequalities, min.inequalities);
    }

    #[test]
    fn minimal_h_representation_empty_error() {
        let p = Polytope::simplex(2).intersect_halfspace(Halfspace::new(
            vec![rat_int(1), rat_int(1)],
            rat_int(2),
        ));
        assert_eq!(
            p.minimal_h_representation(),
            Err(GeometryError::EmptyPolytope)
        );
    }

    #[test]
    fn fit_hyperplane_examples() {
        let h = fit_homogeneous_hyperplane(&[v(&[(1, 2), (1, 2)])]).unwrap();
        assert_eq!(h.coeffs, vec![rat_int(1), rat_int(-1)]);
        assert_eq!(h.offset, rat_int(0));

        let h = fit_homogeneous_hyperplane(&[
            v(&[(1, 1), (0, 1), (0, 1)]),
            v(&[(0, 1), (1, 1), (0, 1)]),
        ])
        .unwrap();
        assert_eq!(h.coeffs, vec![rat_int(0), rat_int(0), rat_int(1)]);

        assert_eq!(
            fit_homogeneous_hyperplane(&[
                v(&[(1, 1), (0, 1), (0, 1)]),
                v(&[(2, 1), (0, 1), (0, 1)]),
            ]),
            Err(GeometryError::RankDeficient)
        );
    }

    #[test]
    fn cell_enumeration() {
        let simplex = Polytope::simplex(2);
        assert_eq!(enumerate_cells(&[], &simplex).len(), 1);
        let split = Hyperplane::new(vec![rat_int(1), rat_int(-1)], rat_int(0));
        let cells = enumerate_cells(&[split.clone()], &simplex);
        assert_eq!(cells.len(), 2);
        // A hyperplane missing the simplex cuts nothing.
        let outside = Hyperplane::new(vec![rat_int(1), rat_int(1)], rat_int(3));
        assert_eq!(enumerate_cells(&[outside], &simplex).len(), 1);
        let both = enumerate_cells(
            &[split, Hyperplane::new(vec![rat_int(1), rat_int(0)], rat(3, 4))],
            &simplex,
        );
        assert_eq!(both.len(), 3);
    }

    #[test]
    fn sample_int_interiority_and_centroid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let p = Polytope::simplex(2);
        let profile = crate::learner::ConstantProfile::practical(8);
        for _ in 0..200 {
            let x = sample_int(&p, &rat(1, 10), &profile, 16, &mut rng).unwrap();
            assert!(p.strictly_contains(&x));
        }
        let p3 = Polytope::simplex(3);
        for _ in 0..200 {
            let x = sample_int(&p3, &rat(1, 20), &profile, 16, &mut rng).unwrap();
            assert!(p3.strictly_contains(&x));
        }
    }

    #[test]
    fn sample_int_theoretical_profile() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let p = Polytope::simplex(2);
        let profile = crate::learner::ConstantProfile::theoretical(8);
        for _ in 0..20 {
            let x = sample_int(&p, &rat(1, 10), &profile, 12, &mut rng).unwrap();
            assert!(p.strictly_contains(&x));
        }
    }

    #[test]
    fn solve_unique_cases() {
        // x + y = 1, x − y = 0 → (1/2, 1/2)
        let rows = vec![
            (v(&[(1, 1), (1, 1)]), rat_int(1)),
            (v(&[(1, 1), (-1, 1)]), rat_int(0)),
        ];
        assert_eq!(solve_unique(&rows, 2).unwrap(), v(&[(1, 2), (1, 2)]));
        // Underdetermined.
        let rows = vec![(v(&[(1, 1), (1, 1)]), rat_int(1))];
        assert!(solve_unique(&rows, 2).is_none());
        // Inconsistent.
        let rows = vec![
            (v(&[(1, 1), (1, 1)]), rat_int(1)),
            (v(&[(2, 1), (2, 1)]), rat_int(3)),
        ];
        assert!(solve_unique(&rows, 2).is_none());
    }

    #[test]
    fn ceil_sqrt_ratio_values() {
        // √2 / (1/10) ≈ 14.14 → 15
        assert_eq!(ceil_sqrt_ratio(2, &rat(1, 10)), 15);
        // √4 / 1 = 2
        assert_eq!(ceil_sqrt_ratio(4, &rat_int(1)), 2);
    }
}
