//! Sparse symmetric positive-definite solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

/// Factorized SPD matrix assembled from `(row, col, value)` triplets
/// (duplicates are summed; both triangles must be supplied).
pub struct SpdSolver {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl SpdSolver {
    pub fn new(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, String> {
        let t: Vec<_> = triplets.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t).map_err(|e| format!("{e:?}"))?;
        let llt = a.sp_cholesky(Side::Lower).map_err(|e| format!("{e:?}"))?;
        Ok(SpdSolver { llt, n })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.llt.solve_in_place(b.as_mut());
        (0..self.n).map(|i| b[(i, 0)]).collect()
    }
}

/// Number of eigenvalues of a small dense symmetric matrix below
/// `rel_tol · λ_max` (used to report rank deficiency).
pub fn nullspace_dim(n: usize, triplets: &[(usize, usize, f64)], rel_tol: f64) -> usize {
    let mut a = Mat::<f64>::zeros(n, n);
    for &(i, j, v) in triplets {
        a[(i, j)] += v;
    }
    match a.self_adjoint_eigenvalues(Side::Lower) {
        Ok(ev) => {
            let max = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            ev.iter().filter(|x| x.abs() <= rel_tol * max.max(f64::MIN_POSITIVE)).count()
        }
        Err(_) => n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let s = SpdSolver::new(2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let x = s.solve(&[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_system_is_reported() {
        let trip = [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)];
        assert!(SpdSolver::new(2, &trip).is_err());
        assert_eq!(nullspace_dim(2, &trip, 1e-10), 1);
    }
}
