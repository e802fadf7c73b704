//! Arc travel-time kernels: expected traversal times, end-state transition
//! matrices and Laplace–Stieltjes transforms via matrix-exponential actions.

mod expm;
mod kernel;

use std::sync::Arc;

pub use expm::{expm_action, expm_action_transposed, ExpmWorkspace, LinearOp, Transposed, DEFAULT_TOL};
pub use kernel::ArcKernel;

use crate::background::{Model, StateSpace};
use crate::error::{Error, Result};
use crate::network::ArcId;
use crate::sparse::{CsrBuilder, CsrMatrix};

/// Expected traversal times and end-state distribution of one arc.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcTransit {
    pub arc: ArcId,
    pub distance: f64,
    /// Expected traversal time (hours) from each start state.
    pub phi: Vec<f64>,
    /// `p[s][s']`: probability of state s' on arrival when entering in s.
    pub p: Vec<Vec<f64>>,
}

/// Φ and P for an arc of length `d` over generator `q` with per-state speeds.
pub fn arc_transit(arc: ArcId, q: &CsrMatrix, speeds: &[f64], d: f64) -> Result<ArcTransit> {
    let kernel = ArcKernel::new(Arc::new(q.clone()), speeds, d, arc)?;
    let mut ws = ExpmWorkspace::new(DEFAULT_TOL)?;
    Ok(ArcTransit { arc, distance: d, phi: kernel.phi(&mut ws)?, p: kernel.transition_matrix(&mut ws)? })
}

/// Ψ(d | α) = exp{d V⁻¹ (Q − αI)}: entry (s, s') is E[e^{−ατ} 1{end state s'}].
pub fn arc_lst(q: &CsrMatrix, speeds: &[f64], d: f64, alpha: f64) -> Result<Vec<Vec<f64>>> {
    let n = q.n_rows();
    if speeds.len() != n {
        return Err(Error::InvalidArgument(format!("{} speeds for {n} states", speeds.len())));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("transform argument {alpha}")));
    }
    if let Some(&v) = speeds.iter().find(|&&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::NonPositiveSpeed { arc: 0, speed: v });
    }
    let mut b = CsrBuilder::with_capacity(n, n, q.nnz() + n);
    for r in 0..n {
        let c = d / speeds[r];
        let mut diag_done = false;
        for (j, v) in q.row(r) {
            if j > r && !diag_done {
                b.push(r, -c * alpha);
                diag_done = true;
            }
            if j == r {
                b.push(j, c * (v - alpha));
                diag_done = true;
            } else {
                b.push(j, c * v);
            }
        }
        if !diag_done {
            b.push(r, -c * alpha);
        }
        b.finish_row();
    }
    let m = b.build();
    let mut ws = ExpmWorkspace::new(DEFAULT_TOL)?;
    let mut psi = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ws.apply_in_place(&m, &mut e)?;
        for (i, row) in psi.iter_mut().enumerate() {
            row[j] = e[i].clamp(0.0, 1.0);
        }
    }
    Ok(psi)
}

/// Φ^r and P^r of arc `a` over its reduced space at radius `r`.
pub fn arc_transit_reduced(model: &Model, a: ArcId, r: usize) -> Result<(StateSpace, ArcTransit)> {
    let space = model.reduced_space(a, r)?;
    let q = model.generator(&space);
    let speeds = model.speeds_on(&space, a);
    let d = model.network().arc(a)?.length_km;
    let t = arc_transit(a, &q, &speeds, d)?;
    Ok((space, t))
}

/// Dense matrix exponential by scaling and squaring; reference for small
/// matrices.
pub fn dense_expm(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let e = mat.exp();
    (0..n).map(|i| (0..n).map(|j| e[(i, j)]).collect()).collect()
}

/// The (n+1)-dimensional block matrix `[d V⁻¹ Q, d V⁻¹ 1; 0, 0]` in dense form.
pub fn dense_block(q: &CsrMatrix, speeds: &[f64], d: f64) -> Vec<Vec<f64>> {
    let n = q.n_rows();
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for r in 0..n {
        let c = d / speeds[r];
        for (j, v) in q.row(r) {
            m[r][j] = c * v;
        }
        m[r][n] = c;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(up: f64, down: f64) -> CsrMatrix {
        CsrMatrix::from_dense(&[vec![-up, up], vec![down, -down]])
    }

    #[test]
    fn deterministic_arc() {
        let q = CsrMatrix::from_dense(&[vec![0.0]]);
        let t = arc_transit(0, &q, &[60.0], 60.0).unwrap();
        assert_eq!(t.p, vec![vec![1.0]]);
        assert!((t.phi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distance() {
        let t = arc_transit(0, &two_state(1.0, 2.0), &[100.0, 10.0], 0.0).unwrap();
        assert_eq!(t.phi, vec![0.0, 0.0]);
        assert_eq!(t.p, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn two_state_matches_dense_block() {
        let q = two_state(1.0, 1.0);
        let speeds = [100.0, 10.0];
        let t = arc_transit(0, &q, &speeds, 60.0).unwrap();
        let e = dense_expm(&dense_block(&q, &speeds, 60.0));
        for s in 0..2 {
            assert!((t.phi[s] - e[s][2]).abs() < 1e-9, "{} vs {}", t.phi[s], e[s][2]);
            for s2 in 0..2 {
                assert!((t.p[s][s2] - e[s][s2]).abs() < 1e-9);
            }
        }
        assert!((t.phi[0] - 1.0166).abs() < 1e-3);
    }

    #[test]
    fn non_positive_speed_rejected() {
        assert!(matches!(
            arc_transit(3, &two_state(1.0, 1.0), &[100.0, 0.0], 1.0),
            Err(Error::NonPositiveSpeed { arc: 3, .. })
        ));
    }

    #[test]
    fn lst_single_state() {
        let q = CsrMatrix::from_dense(&[vec![0.0]]);
        let psi = arc_lst(&q, &[50.0], 100.0, 0.7).unwrap();
        assert!((psi[0][0] - (-0.7f64 * 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn lst_at_zero_is_stochastic() {
        let psi = arc_lst(&two_state(0.3, 2.0), &[80.0, 20.0], 30.0, 0.0).unwrap();
        for row in psi {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }
}
