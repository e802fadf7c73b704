//! Stationary distributions of composite generators.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Largest dimension solved with a dense LU factorization.
const DENSE_LIMIT: usize = 1500;

fn reaches_all(m: &CsrMatrix, start: usize) -> bool {
    let n = m.n_rows();
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(s) = queue.pop_front() {
        for (t, v) in m.row(s) {
            if v > 0.0 && !seen[t] {
                seen[t] = true;
                count += 1;
                queue.push_back(t);
            }
        }
    }
    count == n
}

/// True when every state reaches every other state.
pub fn is_irreducible(q: &CsrMatrix) -> bool {
    q.n_rows() <= 1 || (reaches_all(q, 0) && reaches_all(&q.transpose(), 0))
}

/// ‖πQ‖∞.
pub fn residual(q: &CsrMatrix, pi: &[f64]) -> f64 {
    let mut r = vec![0.0; q.n_cols()];
    q.mul_vec_transposed(pi, &mut r);
    r.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// π with πQ = 0, π ≥ 0 and Σπ = 1 for an irreducible generator.
pub fn stationary_distribution(q: &CsrMatrix) -> Result<Vec<f64>> {
    let n = q.n_rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty generator".into()));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    if !is_irreducible(q) {
        return Err(Error::Reducible);
    }
    let pi = if n <= DENSE_LIMIT { dense_solve(q)? } else { gauss_seidel(q)? };
    Ok(pi)
}

fn normalize(pi: &mut [f64]) {
    for x in pi.iter_mut() {
        *x = x.max(0.0);
    }
    let s: f64 = pi.iter().sum();
    for x in pi.iter_mut() {
        *x /= s;
    }
}

/// Solves Qᵀπ = 0 with the last equation replaced by Σπ = 1.
fn dense_solve(q: &CsrMatrix) -> Result<Vec<f64>> {
    let n = q.n_rows();
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for (c, v) in q.row(r) {
            a[(c, r)] = v;
        }
    }
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or(Error::Reducible)?;
    let mut pi: Vec<f64> = x.iter().copied().collect();
    normalize(&mut pi);
    Ok(pi)
}

/// Gauss–Seidel sweeps on the balance equations π_j |q_jj| = Σ_{i≠j} π_i q_ij.
fn gauss_seidel(q: &CsrMatrix) -> Result<Vec<f64>> {
    let n = q.n_rows();
    let qt = q.transpose();
    let diag = q.diagonal();
    let mut pi = vec![1.0 / n as f64; n];
    let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut prev = pi.clone();
    for sweep in 0..50_000 {
        for j in 0..n {
            if diag[j] == 0.0 {
                continue;
            }
            let inflow: f64 = qt.row(j).filter(|&(i, _)| i != j).map(|(i, v)| pi[i] * v).sum();
            pi[j] = inflow / -diag[j];
        }
        normalize(&mut pi);
        if sweep % 5 == 4 {
            // Slowly mixing chains reach a small residual long before the
            // iterates settle, so both are required.
            let change = pi.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if change < 1e-15 && residual(q, &pi) < 1e-13 * scale.max(1.0) {
                return Ok(pi);
            }
            prev.copy_from_slice(&pi);
        }
    }
    let r = residual(q, &pi);
    if r < 1e-10 {
        Ok(pi)
    } else {
        Err(Error::InvalidArgument(format!("stationary solve did not converge (residual {r:e})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_closed_form() {
        let q = CsrMatrix::from_dense(&[vec![-0.3, 0.3], vec![2.0, -2.0]]);
        let pi = stationary_distribution(&q).unwrap();
        assert!((pi[0] - 2.0 / 2.3).abs() < 1e-14);
        assert!(residual(&q, &pi) < 1e-12);
    }

    #[test]
    fn absorbing_chain_is_reducible() {
        let q = CsrMatrix::from_dense(&[
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, -1.0, 1.0, 0.0],
            vec![0.0, 0.0, -1.0, 1.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ]);
        assert!(matches!(stationary_distribution(&q), Err(Error::Reducible)));
    }

    #[test]
    fn iterative_matches_dense() {
        // Birth-death chain on 30 states.
        let n = 30;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            if i + 1 < n {
                rows[i][i + 1] = 1.0 + i as f64 * 0.1;
            }
            if i > 0 {
                rows[i][i - 1] = 2.0;
            }
            rows[i][i] = -rows[i].iter().sum::<f64>();
        }
        let q = CsrMatrix::from_dense(&rows);
        let a = dense_solve(&q).unwrap();
        let b = gauss_seidel(&q).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
