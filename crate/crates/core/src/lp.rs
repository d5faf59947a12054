//! Maximin weights over a finite parameter set.
//!
//! Solves
//!
//! ```text
//! max t  s.t.  sum_i w_i phi[i][j] >= t  for every column j,
//!              sum_i w_i = 1,  w >= 0
//! ```
//!
//! with a dense tableau simplex. Instances here have at most a few hundred
//! rows and columns. The matrix is scaled by a power of two and duplicate
//! columns are removed before solving.
//!
//! The tableau is kept in double-double arithmetic. Near the optimum the
//! parameter columns crowd together, and the objective differences that
//! decide the weights shrink quadratically with the weight error; plain
//! doubles lose them to pivot round-off after a few dozen cuts.

use twofloat::TwoFloat;

use crate::error::{Error, Result};

type D = TwoFloat;

const PIVOT_TOL: f64 = 1e-14;
const OPT_TOL: f64 = 1e-20;
const DEGENERATE_STEP: f64 = 1e-28;
const CLAMP_TOL: f64 = 1e-14;
const ZERO: D = TwoFloat::from_f64(0.0);
const ONE: D = TwoFloat::from_f64(1.0);

#[derive(Clone, Debug)]
pub struct WeightLpInstance {
    /// `phi[i][j]` for candidate point `i` and parameter `j`.
    phi: Vec<Vec<f64>>,
}

impl WeightLpInstance {
    pub fn new(phi: Vec<Vec<f64>>) -> Result<Self> {
        let n = phi.len();
        if n == 0 {
            return Err(Error::Lp("no candidate points".into()));
        }
        let m = phi[0].len();
        if m == 0 {
            return Err(Error::Lp("no parameter columns".into()));
        }
        for (i, row) in phi.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Lp(format!("row {i} has {} columns, expected {m}", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Lp(format!("row {i} has invalid entry {v}")));
            }
        }
        Ok(Self { phi })
    }

    pub fn rows(&self) -> usize {
        self.phi.len()
    }

    pub fn cols(&self) -> usize {
        self.phi[0].len()
    }

    pub fn phi(&self) -> &[Vec<f64>] {
        &self.phi
    }

    /// `min_j sum_i w_i phi[i][j]`.
    pub fn value(&self, weights: &[f64]) -> f64 {
        (0..self.cols())
            .map(|j| weights.iter().zip(&self.phi).map(|(w, row)| w * row[j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    /// The simplex hit its pivot limit or lost feasibility; the weights are the
    /// best iterate.
    InfeasibleNumerics,
}

#[derive(Clone, Debug)]
pub struct WeightLpSolution {
    pub weights: Vec<f64>,
    pub t: f64,
    pub status: LpStatus,
}

struct Tableau {
    /// Rows `0..m` are the maximin constraints, row `m` the simplex row.
    a: Vec<Vec<D>>,
    rhs: Vec<D>,
    cost: Vec<D>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.rhs[row];
        for r in 0..self.a.len() {
            if r == row {
                continue;
            }
            let f = self.a[r][col];
            if f != 0.0 {
                for (v, pv) in self.a[r].iter_mut().zip(&pivot_row) {
                    if *pv != 0.0 {
                        *v -= f * pv;
                    }
                }
                self.a[r][col] = ZERO;
                self.rhs[r] -= f * pivot_rhs;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                if *pv != 0.0 {
                    *v -= f * pv;
                }
            }
            self.cost[col] = ZERO;
        }
        self.basis[row] = col;
    }
}

fn dedup_columns(phi: &[Vec<f64>]) -> Vec<usize> {
    let m = phi[0].len();
    let mut keep: Vec<usize> = Vec::with_capacity(m);
    for j in 0..m {
        let dup = keep
            .iter()
            .any(|&k| phi.iter().all(|row| row[k].to_bits() == row[j].to_bits()));
        if !dup {
            keep.push(j);
        }
    }
    keep
}

pub fn solve_weight_lp(instance: &WeightLpInstance) -> WeightLpSolution {
    let n = instance.rows();
    let cols = dedup_columns(&instance.phi);
    let m = cols.len();
    let max_entry = instance
        .phi
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &b| a.max(b));
    // A power of two keeps the scaled entries exact.
    let scale = if max_entry > 0.0 { 2f64.powi(max_entry.log2().ceil() as i32) } else { 0.0 };

    if scale == 0.0 {
        let mut weights = vec![0.0; n];
        weights[0] = 1.0;
        return WeightLpSolution { weights, t: 0.0, status: LpStatus::Optimal };
    }

    // Variables: w_0..w_{n-1}, t, s_0..s_{m-1}.
    let t_col = n;
    let width = n + 1 + m;
    let mut a = vec![vec![ZERO; width]; m + 1];
    let mut rhs = vec![ZERO; m + 1];
    for (r, &j) in cols.iter().enumerate() {
        for i in 0..n {
            a[r][i] = D::from(-instance.phi[i][j] / scale);
        }
        a[r][t_col] = ONE;
        a[r][n + 1 + r] = ONE;
    }
    for v in a[m].iter_mut().take(n) {
        *v = ONE;
    }
    rhs[m] = ONE;
    let mut cost = vec![ZERO; width];
    cost[t_col] = -ONE;
    let mut basis: Vec<usize> = (0..m).map(|r| n + 1 + r).collect();
    basis.push(usize::MAX);
    let mut tab = Tableau { a, rhs, cost, basis };

    // Start from the best single point: feasible with t = 0.
    let start = (0..n)
        .max_by(|&x, &y| {
            let vx = cols.iter().map(|&j| instance.phi[x][j]).fold(f64::INFINITY, f64::min);
            let vy = cols.iter().map(|&j| instance.phi[y][j]).fold(f64::INFINITY, f64::min);
            vx.total_cmp(&vy).then(y.cmp(&x))
        })
        .unwrap_or(0);
    tab.pivot(m, start);

    let max_pivots = 50 * (n + m + 10);
    let mut status = LpStatus::InfeasibleNumerics;
    let mut degenerate_run = 0usize;
    for _ in 0..max_pivots {
        let bland = degenerate_run > 20;
        let entering = if bland {
            (0..width).find(|&c| tab.cost[c] < -OPT_TOL)
        } else {
            (0..width)
                .filter(|&c| tab.cost[c] < -OPT_TOL)
                .min_by(|&x, &y| {
                    tab.cost[x]
                        .partial_cmp(&tab.cost[y])
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(x.cmp(&y))
                })
        };
        let Some(col) = entering else {
            status = LpStatus::Optimal;
            break;
        };
        let mut leave: Option<(usize, D)> = None;
        for r in 0..=m {
            let coef = tab.a[r][col];
            if coef > PIVOT_TOL {
                let ratio = tab.rhs[r].max(ZERO) / coef;
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - DEGENERATE_STEP
                            || (ratio <= lratio + DEGENERATE_STEP && tab.basis[r] < tab.basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            // t is bounded by the largest entry, so this only happens through
            // round-off.
            break;
        };
        degenerate_run = if ratio <= DEGENERATE_STEP { degenerate_run + 1 } else { 0 };
        tab.pivot(row, col);
    }

    let mut weights = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            weights[b] = tab.rhs[r].hi() + tab.rhs[r].lo();
        }
    }
    if weights.iter().any(|w| *w < -1e-9) {
        status = LpStatus::InfeasibleNumerics;
    }
    for w in weights.iter_mut() {
        if *w < CLAMP_TOL {
            *w = 0.0;
        }
    }
    let sum: f64 = weights.iter().sum();
    if sum > 0.0 {
        for w in weights.iter_mut() {
            *w /= sum;
        }
    } else {
        weights[start] = 1.0;
        status = LpStatus::InfeasibleNumerics;
    }
    let t = instance.value(&weights);
    WeightLpSolution { weights, t, status }
}

/// Like [`solve_weight_lp`] but turns numerical failure into an error.
pub fn solve_weight_lp_strict(instance: &WeightLpInstance) -> Result<WeightLpSolution> {
    let sol = solve_weight_lp(instance);
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::InfeasibleNumerics => Err(Error::Lp(format!(
            "simplex failed on a {}x{} instance (best t = {})",
            instance.rows(),
            instance.cols(),
            sol.t
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn solve(phi: Vec<Vec<f64>>) -> WeightLpSolution {
        let sol = solve_weight_lp(&WeightLpInstance::new(phi).unwrap());
        assert_eq!(sol.status, LpStatus::Optimal);
        sol
    }

    #[test]
    fn single_column_puts_all_weight_on_max() {
        let sol = solve(vec![vec![1.0], vec![4.0], vec![2.0]]);
        assert_eq!(sol.weights, vec![0.0, 1.0, 0.0]);
        assert_eq!(sol.t, 4.0);
    }

    #[test]
    fn single_row() {
        let sol = solve(vec![vec![3.0, 0.5, 2.0]]);
        assert_eq!(sol.weights, vec![1.0]);
        assert_eq!(sol.t, 0.5);
    }

    #[test]
    fn identity_splits_evenly() {
        let sol = solve(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((sol.weights[0] - 0.5).abs() < 1e-12);
        assert!((sol.t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let sol = solve(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(sol.t, 0.0);
        assert_eq!(sol.weights.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(WeightLpInstance::new(vec![]).is_err());
        assert!(WeightLpInstance::new(vec![vec![]]).is_err());
        assert!(WeightLpInstance::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(WeightLpInstance::new(vec![vec![-1.0]]).is_err());
        assert!(WeightLpInstance::new(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn duplicate_columns_are_harmless() {
        let col = [0.3, 0.9, 0.1];
        let phi: Vec<Vec<f64>> = col.iter().map(|&v| vec![v, v, v, 1.0 - v]).collect();
        let sol = solve(phi.clone());
        let ref_sol = solve(col.iter().map(|&v| vec![v, 1.0 - v]).collect());
        assert!((sol.t - ref_sol.t).abs() < 1e-12);
    }

    /// Max over a simplex grid of resolution `1 / res` (three points).
    fn grid_oracle(phi: &[Vec<f64>], res: usize) -> f64 {
        let inst = WeightLpInstance::new(phi.to_vec()).unwrap();
        let mut best = f64::NEG_INFINITY;
        for a in 0..=res {
            for b in 0..=(res - a) {
                let w = [a as f64 / res as f64, b as f64 / res as f64, (res - a - b) as f64 / res as f64];
                best = best.max(inst.value(&w));
            }
        }
        best
    }

    fn arb_phi(rows: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..7).prop_flat_map(move |m| {
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, m), rows)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn solution_invariants(phi in (1usize..8).prop_flat_map(arb_phi)) {
            let inst = WeightLpInstance::new(phi).unwrap();
            let sol = solve_weight_lp(&inst);
            prop_assert_eq!(sol.status, LpStatus::Optimal);
            prop_assert!(sol.weights.iter().all(|w| *w >= 0.0));
            prop_assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            prop_assert!((sol.t - inst.value(&sol.weights)).abs() <= 1e-9);
        }

        #[test]
        fn matches_grid_oracle(phi in arb_phi(3)) {
            let sol = solve_weight_lp(&WeightLpInstance::new(phi.clone()).unwrap());
            let oracle = grid_oracle(&phi, 1000);
            // LP is exact; the grid can only undershoot, by at most a resolution step.
            prop_assert!(sol.t >= oracle - 1e-12);
            prop_assert!(sol.t <= oracle + 2e-3);
        }

        #[test]
        fn adding_a_column_never_increases_t(phi in (1usize..6).prop_flat_map(arb_phi), extra in prop::collection::vec(0.0f64..1.0, 6)) {
            let base = solve_weight_lp(&WeightLpInstance::new(phi.clone()).unwrap());
            let grown: Vec<Vec<f64>> = phi.iter().zip(&extra).map(|(r, e)| {
                let mut r = r.clone();
                r.push(*e);
                r
            }).collect();
            let more = solve_weight_lp(&WeightLpInstance::new(grown).unwrap());
            prop_assert!(more.t <= base.t + 1e-12);
        }

        #[test]
        fn scale_equivariance(phi in (1usize..6).prop_flat_map(arb_phi), c in 1e-6f64..1e3) {
            let base = solve_weight_lp(&WeightLpInstance::new(phi.clone()).unwrap());
            let scaled: Vec<Vec<f64>> = phi.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
            let inst = WeightLpInstance::new(scaled).unwrap();
            let sol = solve_weight_lp(&inst);
            prop_assert!((sol.t - c * base.t).abs() <= 1e-9 * c.max(1.0));
            // the original optimal weights achieve the scaled optimum
            prop_assert!((inst.value(&base.weights) - sol.t).abs() <= 1e-9 * c.max(1.0));
        }
    }
}
