//! Actions of matrix exponentials by uniformization.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Default kernel tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest Poisson rate handled in one uniformization step.
const STEP_RATE: f64 = 20.0;

/// A square operator `x -> M x` whose diagonal is bounded below by
/// `-shift()` and whose shifted form `I + M/shift` is entrywise
/// non-negative (or close to it).
pub trait LinearOp {
    fn dim(&self) -> usize;
    /// y = M x
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Largest diagonal magnitude.
    fn max_abs_diag(&self) -> f64;
    /// Infinity norm of M (largest row sum of |entries|).
    fn norm_bound(&self) -> f64;
    /// Infinity norm of I + M/eta.
    fn shifted_norm(&self, eta: f64) -> f64;
}

impl LinearOp for CsrMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }

    fn max_abs_diag(&self) -> f64 {
        self.max_abs_diagonal()
    }

    fn norm_bound(&self) -> f64 {
        (0..self.n_rows()).map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    fn shifted_norm(&self, eta: f64) -> f64 {
        (0..self.n_rows())
            .map(|r| {
                let mut diag = 1.0;
                let mut off = 0.0;
                for (c, v) in self.row(r) {
                    if c == r {
                        diag += v / eta;
                    } else {
                        off += v.abs() / eta;
                    }
                }
                diag.abs() + off
            })
            .fold(0.0, f64::max)
    }
}

/// The transpose of an operator, i.e. row-vector products `xᵀ M`.
pub struct Transposed<'a>(pub &'a CsrMatrix);

impl LinearOp for Transposed<'_> {
    fn dim(&self) -> usize {
        self.0.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.mul_vec_transposed(x, y)
    }

    fn max_abs_diag(&self) -> f64 {
        self.0.max_abs_diagonal()
    }

    fn norm_bound(&self) -> f64 {
        let mut col = vec![0.0; self.0.n_cols()];
        for r in 0..self.0.n_rows() {
            for (c, v) in self.0.row(r) {
                col[c] += v.abs();
            }
        }
        col.into_iter().fold(0.0, f64::max)
    }

    fn shifted_norm(&self, eta: f64) -> f64 {
        let mut col = vec![0.0; self.0.n_cols()];
        let mut diag = vec![1.0; self.0.n_cols()];
        for r in 0..self.0.n_rows() {
            for (c, v) in self.0.row(r) {
                if c == r {
                    diag[c] += v / eta;
                } else {
                    col[c] += v.abs() / eta;
                }
            }
        }
        col.iter().zip(&diag).map(|(o, d)| o + d.abs()).fold(0.0, f64::max)
    }
}

/// Reusable buffers for repeated actions.
#[derive(Debug, Clone)]
pub struct ExpmWorkspace {
    tol: f64,
    term: Vec<f64>,
    next: Vec<f64>,
    acc: Vec<f64>,
}

impl ExpmWorkspace {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-4) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} not in (0, 1e-4]")));
        }
        Ok(ExpmWorkspace { tol, term: Vec::new(), next: Vec::new(), acc: Vec::new() })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// e^M v.
    pub fn apply<O: LinearOp + ?Sized>(&mut self, op: &O, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = v.to_vec();
        self.apply_in_place(op, &mut out)?;
        Ok(out)
    }

    /// e^{tM} v for t ≥ 0.
    pub fn apply_scaled<O: LinearOp + ?Sized>(&mut self, op: &O, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        let scaled = Scaled { op, t };
        self.apply(&scaled, v)
    }

    /// Overwrites `v` with e^M v.
    pub fn apply_in_place<O: LinearOp + ?Sized>(&mut self, op: &O, v: &mut [f64]) -> Result<()> {
        let n = op.dim();
        if v.len() != n {
            return Err(Error::InvalidArgument(format!("vector of length {} for {n}x{n} operator", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        let diag = op.max_abs_diag();
        let norm = op.norm_bound();
        if !(diag.is_finite() && norm.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        if norm == 0.0 {
            return Ok(());
        }
        // Shift so that I + M/eta has a non-negative diagonal.
        let eta = diag.max(0.5 * norm);
        let nu = op.shifted_norm(eta);
        let rho = eta * nu;
        let steps = (rho / STEP_RATE).ceil().max(1.0) as usize;
        let eta_s = eta / steps as f64;
        let tol = 0.1 * self.tol / steps as f64;

        self.term.resize(n, 0.0);
        self.next.resize(n, 0.0);
        self.acc.resize(n, 0.0);
        for _ in 0..steps {
            self.step(op, eta, eta_s, nu, tol, v)?;
        }
        Ok(())
    }

    /// One step of e^{M/steps} v with Poisson rate eta_s.
    fn step<O: LinearOp + ?Sized>(
        &mut self,
        op: &O,
        eta: f64,
        eta_s: f64,
        nu: f64,
        tol: f64,
        v: &mut [f64],
    ) -> Result<()> {
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Ok(());
        }
        self.term.copy_from_slice(v);
        let w0 = (-eta_s).exp();
        let mut weight = w0;
        for (a, t) in self.acc.iter_mut().zip(&self.term) {
            *a = weight * t;
        }
        // Tail bound: sum over j > k of e^{-eta_s} (eta_s nu)^j / j!.
        let total = (eta_s * (nu - 1.0)).exp();
        let mut bound_term = w0;
        let mut bound_sum = w0;
        let max_terms = (20.0 * (eta_s * nu) + 200.0) as usize;
        let inv_eta = 1.0 / eta;
        for j in 1..=max_terms {
            // term <- (I + M/eta) term
            op.apply(&self.term, &mut self.next);
            for (nx, t) in self.next.iter_mut().zip(&self.term) {
                *nx = t + *nx * inv_eta;
            }
            std::mem::swap(&mut self.term, &mut self.next);
            weight *= eta_s / j as f64;
            for (a, t) in self.acc.iter_mut().zip(&self.term) {
                *a += weight * t;
            }
            bound_term *= eta_s * nu / j as f64;
            bound_sum += bound_term;
            if j as f64 > eta_s * nu && (total - bound_sum) <= tol * total.max(1.0) {
                break;
            }
        }
        v.copy_from_slice(&self.acc);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix exponential action"));
        }
        Ok(())
    }
}

struct Scaled<'a, O: ?Sized> {
    op: &'a O,
    t: f64,
}

impl<O: LinearOp + ?Sized> LinearOp for Scaled<'_, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y);
        for v in y.iter_mut() {
            *v *= self.t;
        }
    }

    fn max_abs_diag(&self) -> f64 {
        self.op.max_abs_diag() * self.t
    }

    fn norm_bound(&self) -> f64 {
        self.op.norm_bound() * self.t
    }

    fn shifted_norm(&self, eta: f64) -> f64 {
        self.op.shifted_norm(eta / self.t)
    }
}

/// e^M v for a sparse matrix.
pub fn expm_action(m: &CsrMatrix, v: &[f64], tol: f64) -> Result<Vec<f64>> {
    if m.n_rows() != m.n_cols() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    ExpmWorkspace::new(tol)?.apply(m, v)
}

/// vᵀ e^M for a sparse matrix, returned as a vector.
pub fn expm_action_transposed(m: &CsrMatrix, v: &[f64], tol: f64) -> Result<Vec<f64>> {
    if m.n_rows() != m.n_cols() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    ExpmWorkspace::new(tol)?.apply(&Transposed(m), v)
}
