//! Exact rational linear programming.
//!
//! A deliberately simple two-phase primal simplex with Bland's anti-cycling
//! rule, run entirely over arbitrary-precision rationals: no scaling, no
//! presolve, no floating point. Programs in this crate have at most a few
//! dozen variables, so correctness and bit-for-bit determinism win over
//! asymptotics.

use crate::exactnum::Rational;
use crate::geometry::{Halfspace, Hyperplane};
use num_traits::{One, Signed, Zero};

/// Row relation in a linear program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// A linear program in the form: maximize `objective · x` subject to the
/// rows and per-variable bounds. The default variable bound is `x ≥ 0`;
/// a `None` lower bound makes the variable free below.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub rows: Vec<(Vec<Rational>, Relation, Rational)>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

impl LinearProgram {
    /// A program over `n` variables with empty objective and rows, bounds
    /// `x ≥ 0`.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); n],
            rows: Vec::new(),
            lower: vec![Some(Rational::zero()); n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, rel: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "row width mismatch");
        self.rows.push((coeffs, rel, rhs));
    }

    /// Mark a variable as free (unbounded in both directions).
    pub fn set_free(&mut self, j: usize) {
        self.lower[j] = None;
        self.upper[j] = None;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Populated iff status is Optimal; satisfies every row exactly.
    pub point: Vec<Rational>,
    /// Populated iff status is Optimal; equals objective · point exactly.
    pub value: Rational,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        LpSolution {
            status,
            point: Vec::new(),
            value: Rational::zero(),
        }
    }
}

/// How each user variable maps onto the nonnegative simplex variables.
#[derive(Clone)]
enum VarMap {
    /// x = l + y_k
    Shift(usize, Rational),
    /// x = u − y_k
    Flip(usize, Rational),
    /// x = y_k − y_{k+1}
    Split(usize),
}

/// Exact optimum of the program via two-phase simplex with Bland's rule.
/// Deterministic given input ordering.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars();
    assert_eq!(lp.lower.len(), n);
    assert_eq!(lp.upper.len(), n);

    // --- Rewrite onto nonnegative variables. ---
    let mut maps: Vec<VarMap> = Vec::with_capacity(n);
    let mut k = 0usize; // structural column count
    let mut extra_rows: Vec<(usize, Rational)> = Vec::new(); // y_k ≤ bound
    for j in 0..n {
        match (&lp.lower[j], &lp.upper[j]) {
            (Some(l), Some(u)) => {
                let span = u - l;
                if span.is_negative() {
                    return LpSolution::non_optimal(LpStatus::Infeasible);
                }
                maps.push(VarMap::Shift(k, l.clone()));
                extra_rows.push((k, span));
                k += 1;
            }
            (Some(l), None) => {
                maps.push(VarMap::Shift(k, l.clone()));
                k += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Flip(k, u.clone()));
                k += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split(k));
                k += 2;
            }
        }
    }

    // Objective over the y variables (the constant shift is irrelevant to
    // pivoting; the reported value is recomputed from the recovered point).
    let mut obj_y = vec![Rational::zero(); k];
    for (j, m) in maps.iter().enumerate() {
        let c = &lp.objective[j];
        match m {
            VarMap::Shift(col, _) => obj_y[*col] += c,
            VarMap::Flip(col, _) => obj_y[*col] -= c,
            VarMap::Split(col) => {
                obj_y[*col] += c;
                obj_y[*col + 1] -= c;
            }
        }
    }

    // Rows over the y variables.
    let mut rows_y: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for (coeffs, rel, rhs) in &lp.rows {
        let mut row = vec![Rational::zero(); k];
        let mut r = rhs.clone();
        for (j, m) in maps.iter().enumerate() {
            let c = &coeffs[j];
            if c.is_zero() {
                continue;
            }
            match m {
                VarMap::Shift(col, l) => {
                    row[*col] += c;
                    r -= c * l;
                }
                VarMap::Flip(col, u) => {
                    row[*col] -= c;
                    r -= c * u;
                }
                VarMap::Split(col) => {
                    row[*col] += c;
                    row[*col + 1] -= c;
                }
            }
        }
        rows_y.push((row, *rel, r));
    }
    for (col, bound) in extra_rows {
        let mut row = vec![Rational::zero(); k];
        row[col] = Rational::one();
        rows_y.push((row, Relation::Le, bound));
    }

    // --- Build the tableau: columns = structural | slacks | artificials. ---
    let m = rows_y.len();
    let mut n_slack = 0usize;
    let mut n_art = 0usize;
    for (_, rel, _) in &rows_y {
        match rel {
            Relation::Le | Relation::Ge => n_slack += 1,
            Relation::Eq => {}
        }
    }
    // Count artificials after rhs sign normalization below; allocate lazily.
    let slack_base = k;
    let art_base = k + n_slack;

    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m); // m × (cols + 1)
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut slack_idx = 0usize;
    let mut art_cols: Vec<usize> = Vec::new();
    // First pass: determine which rows need an artificial column.
    let mut staged: Vec<(Vec<Rational>, Rational, Option<usize>, bool)> = Vec::new();
    for (mut row, rel, mut rhs) in rows_y {
        let mut rel = rel;
        if rhs.is_negative() {
            for c in row.iter_mut() {
                *c = -c.clone();
            }
            rhs = -rhs;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        let (slack, needs_art) = match rel {
            Relation::Le => {
                let s = slack_base + slack_idx;
                slack_idx += 1;
                (Some((s, Rational::one())), false)
            }
            Relation::Ge => {
                let s = slack_base + slack_idx;
                slack_idx += 1;
                (Some((s, -Rational::one())), true)
            }
            Relation::Eq => (None, true),
        };
        if needs_art {
            n_art += 1;
        }
        staged.push((row, rhs, slack.map(|(i, _)| i), needs_art));
    }
    // Materialize. A row's slack sign is +1 without an artificial (Le) and
    // −1 with one (Ge surplus); Eq rows carry only the artificial.
    let total_cols = k + n_slack + n_art;
    let mut art_idx = 0usize;
    for (row, rhs, slack_col, has_art) in staged {
        let mut trow = vec![Rational::zero(); total_cols + 1];
        trow[..k].clone_from_slice(&row);
        trow[total_cols] = rhs;
        let b;
        match (slack_col, has_art) {
            (Some(s), false) => {
                trow[s] = Rational::one();
                b = s;
            }
            (Some(s), true) => {
                trow[s] = -Rational::one();
                let a = art_base + art_idx;
                art_idx += 1;
                trow[a] = Rational::one();
                art_cols.push(a);
                b = a;
            }
            (None, true) => {
                let a = art_base + art_idx;
                art_idx += 1;
                trow[a] = Rational::one();
                art_cols.push(a);
                b = a;
            }
            (None, false) => unreachable!("equality rows always take an artificial"),
        }
        tab.push(trow);
        basis.push(b);
    }
    debug_assert_eq!(art_idx, n_art);

    // --- Phase 1: drive the artificials to zero. ---
    if n_art > 0 {
        // Reduced costs for maximize −Σ artificials.
        let mut red = vec![Rational::zero(); total_cols];
        for (a, r) in red.iter_mut().enumerate().take(total_cols) {
            if a >= art_base {
                *r = -Rational::one();
            }
        }
        let mut objval = Rational::zero();
        for (i, &b) in basis.iter().enumerate() {
            if b >= art_base {
                // c_B = −1 for artificial basics: fold the row into the costs.
                for j in 0..total_cols {
                    let t = tab[i][j].clone();
                    red[j] += t;
                }
                objval -= &tab[i][total_cols];
            }
        }
        // Basic columns must show zero reduced cost.
        for &b in &basis {
            red[b] = Rational::zero();
        }
        if !pivot_loop(&mut tab, &mut basis, &mut red, &mut objval, total_cols) {
            unreachable!("phase 1 is bounded: the objective is at most zero");
        }
        if objval.is_negative() {
            return LpSolution::non_optimal(LpStatus::Infeasible);
        }
        // Drive any residual basic artificials out (degenerate pivots), or
        // drop their rows when the row is identically zero elsewhere.
        let mut i = 0;
        while i < tab.len() {
            if basis[i] >= art_base {
                let piv = (0..art_base).find(|&j| !tab[i][j].is_zero());
                match piv {
                    Some(j) => pivot(&mut tab, &mut basis, i, j, total_cols, None),
                    None => {
                        tab.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // --- Phase 2: optimize the real objective. ---
    let art_limit = art_base; // artificial columns are frozen out
    let mut red = vec![Rational::zero(); total_cols];
    red[..k].clone_from_slice(&obj_y);
    let mut objval = Rational::zero();
    // Eliminate basic columns from the cost row.
    for (i, &b) in basis.iter().enumerate() {
        if b < k && !obj_y[b].is_zero() {
            let cb = obj_y[b].clone();
            for j in 0..total_cols {
                let t = &cb * &tab[i][j];
                red[j] -= t;
            }
            objval += &cb * &tab[i][total_cols];
        }
    }
    for &b in &basis {
        red[b] = Rational::zero();
    }
    if !pivot_loop(&mut tab, &mut basis, &mut red, &mut objval, art_limit) {
        return LpSolution::non_optimal(LpStatus::Unbounded);
    }

    // --- Recover the original variables. ---
    let mut y = vec![Rational::zero(); total_cols];
    for (i, &b) in basis.iter().enumerate() {
        y[b] = tab[i][total_cols].clone();
    }
    let mut point = Vec::with_capacity(n);
    for mp in &maps {
        let v = match mp {
            VarMap::Shift(col, l) => l + &y[*col],
            VarMap::Flip(col, u) => u - &y[*col],
            VarMap::Split(col) => &y[*col] - &y[*col + 1],
        };
        point.push(v);
    }
    let value: Rational = lp
        .objective
        .iter()
        .zip(&point)
        .map(|(c, x)| c * x)
        .sum();
    LpSolution {
        status: LpStatus::Optimal,
        point,
        value,
    }
}

/// Bland pivot loop over columns `0..col_limit`. Returns false on
/// unboundedness.
fn pivot_loop(
    tab: &mut Vec<Vec<Rational>>,
    basis: &mut [usize],
    red: &mut [Rational],
    objval: &mut Rational,
    col_limit: usize,
) -> bool {
    loop {
        // Entering: smallest-index column with positive reduced cost.
        let enter = (0..col_limit).find(|&j| red[j].is_positive());
        let Some(e) = enter else {
            return true;
        };
        // Leaving: minimum ratio, ties by smallest basis variable index.
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..tab.len() {
            if tab[i][e].is_positive() {
                let ncols = tab[i].len() - 1;
                let ratio = &tab[i][ncols] / &tab[i][e];
                match &best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < *br || (ratio == *br && basis[i] < basis[*bi]) {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = best else {
            return false;
        };
        let width = tab[0].len();
        pivot(tab, basis, r, e, width - 1, Some((red, objval)));
    }
}

/// Gauss-Jordan pivot on (row, col); optionally folds the cost row along.
fn pivot(
    tab: &mut [Vec<Rational>],
    basis: &mut [usize],
    row: usize,
    col: usize,
    ncols: usize,
    cost: Option<(&mut [Rational], &mut Rational)>,
) {
    let p = tab[row][col].clone();
    debug_assert!(!p.is_zero());
    for j in 0..=ncols {
        let t = &tab[row][j] / &p;
        tab[row][j] = t;
    }
    for i in 0..tab.len() {
        if i == row || tab[i][col].is_zero() {
            continue;
        }
        let f = tab[i][col].clone();
        for j in 0..=ncols {
            let t = &f * &tab[row][j];
            tab[i][j] -= t;
        }
    }
    if let Some((red, objval)) = cost {
        if !red[col].is_zero() {
            let f = red[col].clone();
            for (j, r) in red.iter_mut().enumerate().take(ncols) {
                let t = &f * &tab[row][j];
                *r -= t;
            }
            *objval += &f * &tab[row][ncols];
        }
    }
    basis[row] = col;
}

/// A strictly interior point of the region cut out by the halfspaces and
/// equalities, found by maximizing a uniform slack `t` with `c·x ≥ b + t` on
/// every inequality. Returns the point iff the optimal slack is positive.
/// The region is clamped to the box [−2, 2]^d before solving so the slack
/// program is never unbounded.
pub fn interior_point(
    halfspaces: &[Halfspace],
    equalities: &[Hyperplane],
) -> Option<Vec<Rational>> {
    let d = halfspaces
        .first()
        .map(|h| h.coeffs.len())
        .or_else(|| equalities.first().map(|h| h.coeffs.len()))?;
    let mut lp = LinearProgram::new(d + 1); // x_0..x_{d−1}, t
    for j in 0..d {
        lp.lower[j] = Some(crate::exactnum::rat_int(-2));
        lp.upper[j] = Some(crate::exactnum::rat_int(2));
    }
    lp.set_free(d);
    lp.upper[d] = Some(Rational::one()); // cap the slack
    lp.objective[d] = Rational::one();
    for h in halfspaces {
        let mut row: Vec<Rational> = h.coeffs.clone();
        row.push(-Rational::one());
        lp.add_row(row, Relation::Ge, h.offset.clone());
    }
    for h in equalities {
        let mut row: Vec<Rational> = h.coeffs.clone();
        row.push(Rational::zero());
        lp.add_row(row, Relation::Eq, h.offset.clone());
    }
    let sol = solve(&lp);
    if sol.status == LpStatus::Optimal && sol.value.is_positive() {
        Some(sol.point[..d].to_vec())
    } else {
        None
    }
}

/// True iff dropping `row_index` leaves the feasible set unchanged, tested
/// by minimizing the dropped row's left-hand side subject to the remaining
/// constraints (clamped to [−2, 2]^d for boundedness).
pub fn is_redundant(
    row_index: usize,
    halfspaces: &[Halfspace],
    equalities: &[Hyperplane],
) -> bool {
    let target = &halfspaces[row_index];
    let d = target.coeffs.len();
    let mut lp = LinearProgram::new(d);
    for j in 0..d {
        lp.lower[j] = Some(crate::exactnum::rat_int(-2));
        lp.upper[j] = Some(crate::exactnum::rat_int(2));
    }
    // Minimize c_r · x  ⇔  maximize −c_r · x.
    for (j, c) in target.coeffs.iter().enumerate() {
        lp.objective[j] = -c.clone();
    }
    for (i, h) in halfspaces.iter().enumerate() {
        if i == row_index {
            continue;
        }
        lp.add_row(h.coeffs.clone(), Relation::Ge, h.offset.clone());
    }
    for h in equalities {
        lp.add_row(h.coeffs.clone(), Relation::Eq, h.offset.clone());
    }
    let sol = solve(&lp);
    match sol.status {
        // min c_r·x = −value; redundant iff it never dips below the offset.
        LpStatus::Optimal => -sol.value >= target.offset,
        // The rest of the system is already empty: the row changes nothing.
        LpStatus::Infeasible => true,
        LpStatus::Unbounded => false,
    }
}
