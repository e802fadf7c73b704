//! Arc traversal kernels built on the block generator
//! `[c∘Q, c; 0, 0]` with `c = d / v` per state.

use std::sync::Arc;

use super::expm::{ExpmWorkspace, LinearOp};
use crate::error::{Error, Result};
use crate::network::ArcId;
use crate::sparse::CsrMatrix;

/// Traversal of one arc of length `d` over a background generator `Q`:
/// row `s` of `Q` is scaled by the time `d / v(s)` it takes to cover the
/// arc at the speed of state `s`.
#[derive(Debug, Clone)]
pub struct ArcKernel {
    q: Arc<CsrMatrix>,
    /// d / v(s), hours.
    time: Vec<f64>,
    eta: f64,
    shifted_norm: f64,
}

impl ArcKernel {
    pub fn new(q: Arc<CsrMatrix>, speeds: &[f64], d: f64, arc: ArcId) -> Result<Self> {
        if speeds.len() != q.n_rows() {
            return Err(Error::InvalidArgument(format!(
                "{} speeds for a {}-state generator",
                speeds.len(),
                q.n_rows()
            )));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::InvalidArgument(format!("arc length {d}")));
        }
        if let Some(&v) = speeds.iter().find(|&&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::NonPositiveSpeed { arc, speed: v });
        }
        let time: Vec<f64> = speeds.iter().map(|v| d / v).collect();
        let mut k = ArcKernel { q, time, eta: 0.0, shifted_norm: 0.0 };
        let diag = k.q.diagonal();
        k.eta = diag.iter().zip(&k.time).map(|(q, c)| (q * c).abs()).fold(0.0, f64::max);
        let norm = k.column_norm();
        k.eta = k.eta.max(0.5 * norm);
        k.shifted_norm = if k.eta > 0.0 { k.column_shifted_norm(k.eta) } else { 1.0 };
        Ok(k)
    }

    pub fn dim(&self) -> usize {
        self.q.n_rows()
    }

    pub fn is_zero_length(&self) -> bool {
        self.time.iter().all(|&t| t == 0.0)
    }

    /// Time to cover the arc at each state's speed, d / v(s).
    pub fn traversal_times(&self) -> &[f64] {
        &self.time
    }

    fn column_norm(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.time[r] * self.q.row(r).map(|(_, v)| v.abs()).sum::<f64>() + self.time[r])
            .fold(0.0, f64::max)
    }

    fn column_shifted_norm(&self, eta: f64) -> f64 {
        (0..self.dim())
            .map(|r| {
                let c = self.time[r];
                let mut diag = 1.0;
                let mut off = c / eta;
                for (j, v) in self.q.row(r) {
                    if j == r {
                        diag += c * v / eta;
                    } else {
                        off += (c * v).abs() / eta;
                    }
                }
                diag.abs() + off
            })
            .fold(1.0, f64::max)
    }

    /// Expected traversal time from every start state.
    pub fn phi(&self, ws: &mut ExpmWorkspace) -> Result<Vec<f64>> {
        if self.is_zero_length() {
            return Ok(vec![0.0; self.dim()]);
        }
        self.value(ws, &vec![0.0; self.dim()])
    }

    /// Φ + P j: expected traversal time plus expected terminal value `j`
    /// at the end state.
    pub fn value(&self, ws: &mut ExpmWorkspace, j: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if self.is_zero_length() {
            return Ok(j.to_vec());
        }
        let mut v = Vec::with_capacity(n + 1);
        v.extend_from_slice(j);
        v.push(1.0);
        ws.apply_in_place(&ColumnBlock(self), &mut v)?;
        v.truncate(n);
        Ok(v)
    }

    /// Pushes a start distribution `p` through the arc: returns the end-state
    /// distribution and the expected traversal time. Errors are bounded
    /// relative to the l1 norm of `p`.
    pub fn propagate(&self, ws: &mut ExpmWorkspace, p: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = self.dim();
        if self.is_zero_length() {
            return Ok((p.to_vec(), 0.0));
        }
        let mut v = Vec::with_capacity(n + 1);
        v.extend_from_slice(p);
        v.push(0.0);
        ws.apply_in_place(&RowBlock(self), &mut v)?;
        let d = v.pop().unwrap_or(0.0);
        Ok((v, d))
    }

    /// End-state transition matrix, built column by column.
    pub fn transition_matrix(&self, ws: &mut ExpmWorkspace) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut p = vec![vec![0.0; n]; n];
        if self.is_zero_length() {
            for (i, row) in p.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            return Ok(p);
        }
        let mut v = vec![0.0; n + 1];
        for j in 0..n {
            v.fill(0.0);
            v[j] = 1.0;
            ws.apply_in_place(&ColumnBlock(self), &mut v)?;
            for (i, row) in p.iter_mut().enumerate() {
                row[j] = v[i];
            }
        }
        Ok(p)
    }
}

/// (x, x_last) -> (c∘(Q x) + c x_last, 0)
struct ColumnBlock<'a>(&'a ArcKernel);

impl LinearOp for ColumnBlock<'_> {
    fn dim(&self) -> usize {
        self.0.dim() + 1
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.0.dim();
        self.0.q.mul_vec(&x[..n], &mut y[..n]);
        let last = x[n];
        for (yi, c) in y[..n].iter_mut().zip(&self.0.time) {
            *yi = c * (*yi + last);
        }
        y[n] = 0.0;
    }

    fn max_abs_diag(&self) -> f64 {
        self.0.eta
    }

    fn norm_bound(&self) -> f64 {
        self.0.column_norm()
    }

    fn shifted_norm(&self, eta: f64) -> f64 {
        if eta == self.0.eta {
            self.0.shifted_norm
        } else {
            self.0.column_shifted_norm(eta)
        }
    }
}

/// (r, r_last) -> ((r∘c) Q, r·c)
struct RowBlock<'a>(&'a ArcKernel);

impl LinearOp for RowBlock<'_> {
    fn dim(&self) -> usize {
        self.0.dim() + 1
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.0.dim();
        y.fill(0.0);
        let mut last = 0.0;
        for r in 0..n {
            let xr = x[r] * self.0.time[r];
            if xr == 0.0 {
                continue;
            }
            last += xr;
            for (j, v) in self.0.q.row(r) {
                y[j] += v * xr;
            }
        }
        y[n] = last;
    }

    // Row vectors are measured in the l1 norm, whose induced bound is the
    // largest row sum: the same quantity as for column actions. Column sums
    // would count the accumulator column d/v(s) once per state.
    fn max_abs_diag(&self) -> f64 {
        self.0.eta
    }

    fn norm_bound(&self) -> f64 {
        self.0.column_norm()
    }

    fn shifted_norm(&self, eta: f64) -> f64 {
        ColumnBlock(self.0).shifted_norm(eta)
    }
}
