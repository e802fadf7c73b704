use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ArcId;

const ROW_SUM_TOL: f64 = 1e-12;

/// Dense CTMC generator: non-negative off-diagonal rates, zero row sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Generator {
    n: usize,
    data: Vec<f64>,
}

impl Generator {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidBackground("generator has no states".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidBackground(format!(
                    "generator row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            let mut scale: f64 = 1.0;
            for (j, &q) in row.iter().enumerate() {
                if !q.is_finite() {
                    return Err(Error::NonFinite("generator"));
                }
                if i != j && q < 0.0 {
                    return Err(Error::InvalidBackground(format!("negative off-diagonal rate {q} at ({i},{j})")));
                }
                sum += q;
                scale = scale.max(q.abs());
            }
            if sum.abs() > ROW_SUM_TOL * scale {
                return Err(Error::InvalidBackground(format!("generator row {i} sums to {sum}, not 0")));
            }
            data.extend_from_slice(row);
        }
        Ok(Generator { n, data })
    }

    /// Builds a generator from off-diagonal rates; the diagonal is filled in.
    pub fn from_rates(n: usize, rates: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![vec![0.0; n]; n];
        for &(i, j, q) in rates {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidBackground(format!("bad transition ({i},{j})")));
            }
            rows[i][j] += q;
            rows[i][i] -= q;
        }
        Generator::new(rows)
    }

    /// Two-state chain: 0 -> 1 at `up`, 1 -> 0 at `down`.
    pub fn two_state(up: f64, down: f64) -> Self {
        Generator::new(vec![vec![-up, up], vec![down, -down]]).expect("valid two-state generator")
    }

    pub fn trivial() -> Self {
        Generator { n: 1, data: vec![0.0] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.rate(i, i)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Tridiagonal structure: only jumps to adjacent states.
    pub fn is_birth_death(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || i.abs_diff(j) == 1 || self.rate(i, j) == 0.0))
    }
}

impl TryFrom<Vec<Vec<f64>>> for Generator {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Generator::new(rows)
    }
}

impl From<Generator> for Vec<Vec<f64>> {
    fn from(g: Generator) -> Self {
        g.to_rows()
    }
}

/// A ⊕ B = A ⊗ I + I ⊗ B, with B's index varying fastest.
pub fn kronecker_sum(a: &Generator, b: &Generator) -> Generator {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut data = vec![0.0; n * n];
    for ia in 0..na {
        for ib in 0..nb {
            let row = ia * nb + ib;
            for ja in 0..na {
                data[row * n + ja * nb + ib] += a.rate(ia, ja);
            }
            for jb in 0..nb {
                data[row * n + ia * nb + jb] += b.rate(ib, jb);
            }
        }
    }
    Generator { n, data }
}

/// Congestion process of a single arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcChain {
    pub arc: ArcId,
    pub generator: Generator,
    /// States counted as uncongested for the incident cap and neighbour counts.
    #[serde(default = "default_free")]
    pub free_states: Vec<usize>,
}

fn default_free() -> Vec<usize> {
    vec![0]
}

impl ArcChain {
    pub fn new(arc: ArcId, generator: Generator) -> Self {
        ArcChain { arc, generator, free_states: vec![0] }
    }

    pub fn constant(arc: ArcId) -> Self {
        ArcChain::new(arc, Generator::trivial())
    }

    pub fn n_states(&self) -> usize {
        self.generator.dim()
    }

    pub fn is_free(&self, state: usize) -> bool {
        self.free_states.contains(&state)
    }
}

/// Generator used for one arc while the global process is in state `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOverride {
    pub y: usize,
    pub arc: ArcId,
    pub generator: Generator,
}

/// Network-wide modulator (weather, rush hour).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalProcess {
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ChainOverride>,
}

impl GlobalProcess {
    pub fn new(generator: Generator) -> Self {
        GlobalProcess { generator, overrides: Vec::new() }
    }

    pub fn m_states(&self) -> usize {
        self.generator.dim()
    }

    pub fn override_for(&self, y: usize, arc: ArcId) -> Option<&Generator> {
        self.overrides.iter().find(|o| o.y == y && o.arc == arc).map(|o| &o.generator)
    }

    pub fn has_override_for_arc(&self, arc: ArcId) -> bool {
        self.overrides.iter().any(|o| o.arc == arc)
    }
}
