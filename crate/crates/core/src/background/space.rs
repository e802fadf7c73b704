use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ArcId;

/// Default bound on the number of enumerated composite states.
pub const DEFAULT_STATE_LIMIT: usize = 1 << 24;

/// A composite background state: global modulator state and one state per
/// coordinate arc. Without a global process `global` is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompositeState {
    pub global: usize,
    pub arcs: Vec<usize>,
}

impl CompositeState {
    pub fn all_free(n_arcs: usize) -> Self {
        CompositeState { global: 0, arcs: vec![0; n_arcs] }
    }
}

/// Description of one coordinate of a state space.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Coord {
    pub arc: ArcId,
    pub n_states: usize,
    pub free: Vec<bool>,
}

/// Enumerated composite states. Codes are mixed-radix with the first arc
/// coordinate varying fastest and the global state most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    coords: Vec<Coord>,
    global_states: usize,
    has_global: bool,
    strides: Vec<u64>,
    global_stride: u64,
    cap: Option<usize>,
    /// Sorted codes of the kept states; `None` when every product state is kept.
    codes: Option<Vec<u64>>,
}

impl StateSpace {
    /// Enumerates all states within the cap, optionally intersected with `kept`.
    pub(crate) fn build(
        coords: Vec<Coord>,
        global_states: Option<usize>,
        cap: Option<usize>,
        kept: Option<&[CompositeState]>,
        limit: usize,
    ) -> Result<Self> {
        let has_global = global_states.is_some();
        let global_states = global_states.unwrap_or(1);
        let mut strides = Vec::with_capacity(coords.len());
        let mut stride: u64 = 1;
        for c in &coords {
            strides.push(stride);
            stride = stride
                .checked_mul(c.n_states as u64)
                .ok_or(Error::StateSpaceTooLarge { size: f64::INFINITY, limit })?;
        }
        let global_stride = stride;
        let product = (global_stride as f64) * global_states as f64;

        let cap = cap.filter(|&c| c < coords.len());
        let mut space = StateSpace { coords, global_states, has_global, strides, global_stride, cap, codes: None };

        if let Some(kept) = kept {
            let mut codes: Vec<u64> = Vec::with_capacity(kept.len());
            for s in kept {
                if !space.is_product_state(s) {
                    return Err(Error::InvalidArgument(format!("kept state {s:?} is not a valid state")));
                }
                if space.within_cap(s) {
                    codes.push(space.encode(s));
                }
            }
            codes.sort_unstable();
            codes.dedup();
            space.codes = Some(codes);
            return Ok(space);
        }

        let count = space.count_within_cap();
        if count > limit as f64 {
            return Err(Error::StateSpaceTooLarge { size: count, limit });
        }
        if space.cap.is_some() && count < product {
            space.codes = Some(space.enumerate_capped());
        } else if product > u64::MAX as f64 / 2.0 {
            return Err(Error::StateSpaceTooLarge { size: product, limit });
        }
        Ok(space)
    }

    /// Number of states satisfying the cap, without enumerating anything.
    pub(crate) fn count(coords: Vec<Coord>, global_states: Option<usize>, cap: Option<usize>) -> f64 {
        let cap = cap.filter(|&c| c < coords.len());
        let space = StateSpace {
            coords,
            global_states: global_states.unwrap_or(1),
            has_global: global_states.is_some(),
            strides: Vec::new(),
            global_stride: 0,
            cap,
            codes: None,
        };
        space.count_within_cap()
    }

    /// Number of states satisfying the cap, without enumerating them.
    fn count_within_cap(&self) -> f64 {
        let Some(cap) = self.cap else {
            return self.coords.iter().map(|c| c.n_states as f64).product::<f64>() * self.global_states as f64;
        };
        // ways[k] = number of partial states with k congested coordinates
        let mut ways = vec![0.0f64; cap + 1];
        ways[0] = 1.0;
        for c in &self.coords {
            let free = c.free.iter().filter(|&&f| f).count() as f64;
            let busy = c.n_states as f64 - free;
            for k in (0..=cap).rev() {
                let mut w = ways[k] * free;
                if k > 0 {
                    w += ways[k - 1] * busy;
                }
                ways[k] = w;
            }
        }
        ways.iter().sum::<f64>() * self.global_states as f64
    }

    fn enumerate_capped(&self) -> Vec<u64> {
        let cap = self.cap.unwrap_or(usize::MAX);
        let mut out = Vec::new();
        // Depth-first from the most significant coordinate keeps codes sorted.
        fn rec(space: &StateSpace, level: usize, code: u64, busy: usize, cap: usize, out: &mut Vec<u64>) {
            if level == 0 {
                out.push(code);
                return;
            }
            let j = level - 1;
            let c = &space.coords[j];
            for x in 0..c.n_states {
                let b = busy + usize::from(!c.free[x]);
                if b <= cap {
                    rec(space, j, code + x as u64 * space.strides[j], b, cap, out);
                }
            }
        }
        for y in 0..self.global_states {
            rec(self, self.coords.len(), y as u64 * self.global_stride, 0, cap, &mut out);
        }
        out
    }

    pub fn len(&self) -> usize {
        match &self.codes {
            Some(c) => c.len(),
            None => (self.global_stride * self.global_states as u64) as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Arcs covered by the coordinates, in coordinate order.
    pub fn arcs(&self) -> impl Iterator<Item = ArcId> + '_ {
        self.coords.iter().map(|c| c.arc)
    }

    pub fn num_coords(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_arc(&self, j: usize) -> ArcId {
        self.coords[j].arc
    }

    pub fn coord_states(&self, j: usize) -> usize {
        self.coords[j].n_states
    }

    pub fn coord_is_free(&self, j: usize, x: usize) -> bool {
        self.coords[j].free[x]
    }

    pub fn has_global(&self) -> bool {
        self.has_global
    }

    pub fn global_states(&self) -> usize {
        self.global_states
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn stride(&self, j: usize) -> u64 {
        self.strides[j]
    }

    pub fn global_stride(&self) -> u64 {
        self.global_stride
    }

    /// True when every product state is enumerated (no cap or pruning).
    pub fn is_full_product(&self) -> bool {
        self.codes.is_none()
    }

    pub fn code(&self, index: usize) -> u64 {
        match &self.codes {
            Some(c) => c[index],
            None => index as u64,
        }
    }

    pub fn index_of_code(&self, code: u64) -> Option<usize> {
        match &self.codes {
            Some(c) => c.binary_search(&code).ok(),
            None => ((code as f64) < self.len() as f64).then_some(code as usize),
        }
    }

    fn is_product_state(&self, s: &CompositeState) -> bool {
        s.arcs.len() == self.coords.len()
            && s.global < self.global_states
            && s.arcs.iter().zip(&self.coords).all(|(&x, c)| x < c.n_states)
    }

    fn within_cap(&self, s: &CompositeState) -> bool {
        match self.cap {
            None => true,
            Some(cap) => s.arcs.iter().zip(&self.coords).filter(|(&x, c)| !c.free[x]).count() <= cap,
        }
    }

    pub fn busy_count(&self, s: &CompositeState) -> usize {
        s.arcs.iter().zip(&self.coords).filter(|(&x, c)| !c.free[x]).count()
    }

    /// Mixed-radix code of a state given in coordinate order.
    pub fn encode(&self, s: &CompositeState) -> u64 {
        let mut code = s.global as u64 * self.global_stride;
        for (j, &x) in s.arcs.iter().enumerate() {
            code += x as u64 * self.strides[j];
        }
        code
    }

    pub fn decode_code(&self, mut code: u64) -> CompositeState {
        let global = (code / self.global_stride) as usize;
        code %= self.global_stride;
        let arcs = self
            .coords
            .iter()
            .map(|c| {
                let x = (code % c.n_states as u64) as usize;
                code /= c.n_states as u64;
                x
            })
            .collect();
        CompositeState { global, arcs }
    }

    pub fn state(&self, index: usize) -> CompositeState {
        self.decode_code(self.code(index))
    }

    /// Index of a state given in coordinate order.
    pub fn index_of(&self, s: &CompositeState) -> Option<usize> {
        if !self.is_product_state(s) || !self.within_cap(s) {
            return None;
        }
        self.index_of_code(self.encode(s))
    }

    /// Index of the state read off a view indexed by arc id.
    pub fn index_of_view(&self, global: usize, arc_state: impl Fn(ArcId) -> usize) -> Option<usize> {
        let s = CompositeState {
            global: if self.has_global { global } else { 0 },
            arcs: self.coords.iter().map(|c| arc_state(c.arc)).collect(),
        };
        self.index_of(&s)
    }

    pub fn iter(&self) -> impl Iterator<Item = CompositeState> + '_ {
        (0..self.len()).map(move |i| self.state(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(arc: ArcId) -> Coord {
        Coord { arc, n_states: 2, free: vec![true, false] }
    }

    #[test]
    fn two_arcs_order() {
        let s = StateSpace::build(vec![two_state(0), two_state(1)], None, None, None, 100).unwrap();
        let states: Vec<Vec<usize>> = s.iter().map(|c| c.arcs).collect();
        assert_eq!(states, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn cap_one_three_arcs() {
        let s = StateSpace::build((0..3).map(two_state).collect(), None, Some(1), None, 100).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.index_of(&CompositeState { global: 0, arcs: vec![1, 1, 0] }), None);
        assert_eq!(s.index_of(&CompositeState { global: 0, arcs: vec![0, 0, 1] }), Some(3));
    }

    #[test]
    fn seventeen_binary_coordinates() {
        let s = StateSpace::build((0..16).map(two_state).collect(), Some(2), None, None, 1 << 20).unwrap();
        assert_eq!(s.len(), 1 << 17);
        let st = s.state(s.len() - 1);
        assert_eq!(st.global, 1);
        assert!(st.arcs.iter().all(|&x| x == 1));
    }

    #[test]
    fn limit_is_enforced() {
        let err = StateSpace::build((0..30).map(two_state).collect(), None, None, None, 1000).unwrap_err();
        assert!(matches!(err, Error::StateSpaceTooLarge { .. }));
    }

    #[test]
    fn kept_subset() {
        let kept = vec![CompositeState { global: 0, arcs: vec![1, 1] }, CompositeState::all_free(2)];
        let s = StateSpace::build(vec![two_state(0), two_state(1)], None, None, Some(&kept), 100).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.state(0), CompositeState::all_free(2));
    }
}
