//! Cutting-plane method for linear semi-infinite programs.
//!
//! The finite master problem is solved over the current index list, the most
//! violated index is found by a lower-level oracle, and it is added to the
//! list until no constraint is violated by more than the tolerance.

use crate::error::Result;

/// A semi-infinite program `max c(x)` s.t. `g(x, y) >= 0` for all `y` in `Y`.
pub trait LsipProblem {
    type Decision: Clone;
    type Index: Clone;

    /// Solves the master problem with the constraints indexed by `indices`.
    fn solve_upper(&mut self, indices: &[Self::Index]) -> Result<Self::Decision>;

    /// Returns `argmin_y g(x, y)` and the minimal value.
    fn solve_lower(&mut self, x: &Self::Decision) -> Result<(Self::Index, f64)>;
}

#[derive(Clone, Debug)]
pub struct BfOutcome<D, I> {
    pub decision: D,
    pub indices: Vec<I>,
    /// Most violating index of the last iteration and its constraint value.
    pub last_index: I,
    pub last_violation: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Runs until `min_y g(x, y) >= -tol` or `max_iter` master solves.
/// The lower-level index of the final iteration is appended as well, so the
/// returned list is ready to warm-start a later call.
pub fn blankenship_falk<P: LsipProblem>(
    problem: &mut P,
    initial: Vec<P::Index>,
    tol: f64,
    max_iter: usize,
) -> Result<BfOutcome<P::Decision, P::Index>> {
    let mut indices = initial;
    let mut k = 0;
    loop {
        k += 1;
        let x = problem.solve_upper(&indices)?;
        let (y, g) = problem.solve_lower(&x)?;
        indices.push(y.clone());
        let converged = g >= -tol;
        if converged || k >= max_iter {
            return Ok(BfOutcome {
                decision: x,
                indices,
                last_index: y,
                last_violation: g,
                converged,
                iterations: k,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_weight_lp, WeightLpInstance};

    /// max t s.t. w0 (0 - th)^2 + w1 (1 - th)^2 >= t for th in [0, 1].
    struct Toy {
        lower_calls: usize,
    }

    fn phi(x: f64, th: f64) -> f64 {
        (x - th) * (x - th)
    }

    impl LsipProblem for Toy {
        type Decision = (Vec<f64>, f64);
        type Index = f64;

        fn solve_upper(&mut self, thetas: &[f64]) -> Result<(Vec<f64>, f64)> {
            let rows = [0.0, 1.0]
                .iter()
                .map(|&x| thetas.iter().map(|&th| phi(x, th)).collect())
                .collect();
            let sol = solve_weight_lp(&WeightLpInstance::new(rows)?);
            Ok((sol.weights, sol.t))
        }

        fn solve_lower(&mut self, (w, t): &(Vec<f64>, f64)) -> Result<(f64, f64)> {
            self.lower_calls += 1;
            // Weighted mean minimizes the weighted squared distance.
            let th = w[1];
            Ok((th, w[0] * phi(0.0, th) + w[1] * phi(1.0, th) - t))
        }
    }

    #[test]
    fn converges_to_equal_weights() {
        let mut p = Toy { lower_calls: 0 };
        let out = blankenship_falk(&mut p, vec![0.0], 1e-12, 50).unwrap();
        assert!(out.converged);
        let (w, t) = out.decision;
        // The gap is -(w0 - 1/2)^2, so a 1e-12 tolerance pins weights to 1e-6.
        assert!((w[0] - 0.5).abs() < 1e-6 && (w[1] - 0.5).abs() < 1e-6, "{w:?}");
        assert!(t >= 0.25 - 1e-15 && t <= 0.25 + 1e-12, "t = {t}");
        assert!((out.last_index - 0.5).abs() < 1e-6);
        assert_eq!(p.lower_calls, out.iterations);
    }

    /// max t s.t. t <= y for y in [1, 2].
    struct Interval;

    impl LsipProblem for Interval {
        type Decision = f64;
        type Index = f64;

        fn solve_upper(&mut self, ys: &[f64]) -> Result<f64> {
            Ok(ys.iter().copied().fold(f64::INFINITY, f64::min))
        }

        fn solve_lower(&mut self, t: &f64) -> Result<(f64, f64)> {
            Ok((1.0, 1.0 - t))
        }
    }

    #[test]
    fn binding_index_present_converges_at_once() {
        let out = blankenship_falk(&mut Interval, vec![2.0, 1.0], 1e-12, 50).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.decision, 1.0);
        assert!(out.last_violation >= -1e-12);

        let out = blankenship_falk(&mut Interval, vec![2.0], 1e-12, 50).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 2);
    }

    #[test]
    fn stops_at_iteration_limit() {
        let mut p = Toy { lower_calls: 0 };
        let out = blankenship_falk(&mut p, vec![0.0], 1e-12, 1).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.indices, vec![0.0, 1.0]);
    }
}
