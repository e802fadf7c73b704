//! Search with reduced local models: labels carry only the expected time and
//! each arc is evaluated in its own neighbourhood space.

use std::ops::Deref;
use std::sync::OnceLock;

use super::edsger::{label_search, SearchResult};
use super::search::LowerBounds;
use crate::background::{CompositeState, Model, StateSpace};
use crate::error::{Error, Result};
use crate::network::{ArcId, NodeId};
use crate::sparse::CsrMatrix;
use crate::transit::{arc_transit, ExpmWorkspace, DEFAULT_TOL};

/// Neighbourhood space, generator and expected traversal times of one arc.
#[derive(Debug, Clone)]
pub struct ReducedArc {
    pub space: StateSpace,
    pub q: CsrMatrix,
    pub phi: Vec<f64>,
}

/// Query-independent reduced models, built lazily per arc. `M` is any
/// handle to the model (`&Model`, `Arc<Model>`, ...).
#[derive(Debug)]
pub struct StarEngine<M> {
    model: M,
    radius: usize,
    arcs: Vec<OnceLock<ReducedArc>>,
}

impl<M: Deref<Target = Model>> StarEngine<M> {
    /// `radius` defaults to the velocity radius and may not be smaller.
    pub fn new(model: M, radius: Option<usize>) -> Result<Self> {
        let radius = radius.unwrap_or(model.radius());
        if radius < model.radius() {
            return Err(Error::InvalidArgument(format!(
                "radius {radius} is below the velocity radius {}",
                model.radius()
            )));
        }
        let arcs = (0..model.network().num_arcs()).map(|_| OnceLock::new()).collect();
        Ok(StarEngine { model, radius, arcs })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn reduced(&self, a: ArcId) -> Result<&ReducedArc> {
        if let Some(r) = self.arcs[a].get() {
            return Ok(r);
        }
        let space = self.model.reduced_space(a, self.radius)?;
        let q = self.model.generator(&space);
        let speeds = self.model.speeds_on(&space, a);
        let d = self.model.network().arc(a)?.length_km;
        let phi = arc_transit(a, &q, &speeds, d)?.phi;
        Ok(self.arcs[a].get_or_init(|| ReducedArc { space, q, phi }))
    }

    /// Builds every arc's reduced model up front.
    pub fn prepare_all(&self) -> Result<()> {
        for a in 0..self.arcs.len() {
            self.reduced(a)?;
        }
        Ok(())
    }

    /// Expected traversal time of arc `a` entered `elapsed` hours after
    /// departure in `s0`, with `s0` propagated in the arc's reduced space.
    pub fn relax(&self, ws: &mut ExpmWorkspace, a: ArcId, s0: &CompositeState, elapsed: f64) -> Result<f64> {
        let r = self.reduced(a)?;
        let idx = self
            .model
            .truncate(&r.space, s0)
            .ok_or_else(|| Error::InvalidArgument(format!("state {s0:?} lies outside the reduced space of arc {a}")))?;
        if elapsed == 0.0 {
            return Ok(r.phi[idx]);
        }
        let v = ws.apply_scaled(&r.q, elapsed, &r.phi)?;
        Ok(v[idx])
    }

    pub fn shortest_path(
        &self,
        origin: NodeId,
        s0: &CompositeState,
        destination: NodeId,
        lb: &LowerBounds,
    ) -> Result<SearchResult> {
        if s0.arcs.len() != self.model.network().num_arcs() {
            return Err(Error::InvalidArgument("state does not cover every arc".into()));
        }
        let mut ws = ExpmWorkspace::new(DEFAULT_TOL)?;
        label_search(self.model.network(), origin, destination, lb, (), |label, a| {
            Ok((label.d + self.relax(&mut ws, a, s0, label.d)?, ()))
        })
    }
}

/// One-shot search; builds the reduced models it touches.
pub fn edsger_star_sp(
    model: &Model,
    radius: Option<usize>,
    origin: NodeId,
    s0: &CompositeState,
    destination: NodeId,
    lb: &LowerBounds,
) -> Result<SearchResult> {
    StarEngine::new(model, radius)?.shortest_path(origin, s0, destination, lb)
}
