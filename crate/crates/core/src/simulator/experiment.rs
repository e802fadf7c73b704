//! Simulation campaigns comparing routing policies on shared sample paths.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::realized::optimal_realized;
use super::stationary::{is_irreducible, stationary_distribution};
use super::trajectory::{substream, Trajectory};
use crate::background::{CompositeState, Model, StateSpace};
use crate::error::{Error, Result};
use crate::network::{Network, NodeId};
use crate::reduction::ReducedStarOracle;
use crate::routing::{
    drive, ds_route, evaluate_policy, extract_policy, path_min_time, value_iteration, DdOracle, DsOracle, EdsgerOracle,
    FullModel, Oracle, PolicyTable, StarEngine, StarOracle, TableOracle, ViOptions,
};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Vi,
    Edsger,
    EdsgerStar,
    Ds,
    Dd,
    ReducedEdsgerStar,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Vi => "vi",
            PolicyKind::Edsger => "edsger",
            PolicyKind::EdsgerStar => "edsger-star",
            PolicyKind::Ds => "ds",
            PolicyKind::Dd => "dd",
            PolicyKind::ReducedEdsgerStar => "reduced-edsger-star",
        }
    }

    fn needs_full_space(self) -> bool {
        matches!(self, PolicyKind::Vi | PolicyKind::Edsger)
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidArgument(format!("unknown policy {s:?}")))
    }
}

/// How initial background states are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialScheme {
    Uniform,
    Stationary,
    Fixed,
    Both,
}

/// A node given by its file id or its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeKey {
    Id(usize),
    Label(String),
}

impl NodeKey {
    pub fn resolve(&self, net: &Network) -> Result<NodeId> {
        match self {
            NodeKey::Id(id) => net.node_by_source_id(*id).ok_or_else(|| Error::UnknownNodeKey(id.to_string())),
            NodeKey::Label(s) => net.resolve_node(s).ok_or_else(|| Error::UnknownNodeKey(s.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub m: usize,
    #[serde(default = "one")]
    pub l: usize,
}

fn one() -> usize {
    1
}

fn default_exact_limit() -> usize {
    512
}

fn default_horizon_factor() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policies: Vec<PolicyKind>,
    pub od_pairs: Vec<(NodeKey, NodeKey)>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    pub initial_state: InitialScheme,
    /// Start state for the `fixed` scheme, one entry per arc.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_state: Option<CompositeState>,
    /// Neighbourhood radius of the reduced-space searches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionParams>,
    /// Exact expected values are computed when the full space has at most
    /// this many states.
    #[serde(default = "default_exact_limit")]
    pub exact_state_limit: usize,
    /// Initial trajectory horizon as a multiple of the maximum-speed time.
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
    /// Adds `runtime_s` rows. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_runtime: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("experiment config: {e}")))
    }

    fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::InvalidArgument("no policies given".into()));
        }
        if self.od_pairs.is_empty() {
            return Err(Error::InvalidArgument("no origin-destination pairs given".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("replications must be positive".into()));
        }
        if !(self.horizon_factor.is_finite() && self.horizon_factor > 0.0) {
            return Err(Error::InvalidArgument("horizon_factor must be positive".into()));
        }
        if self.initial_state == InitialScheme::Fixed && self.fixed_state.is_none() {
            return Err(Error::InvalidArgument("the fixed scheme needs fixed_state".into()));
        }
        if self.policies.contains(&PolicyKind::ReducedEdsgerStar) && self.reduction.is_none() {
            return Err(Error::InvalidArgument("reduced-edsger-star needs reduction parameters".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub policy: String,
    pub origin: String,
    pub destination: String,
    pub metric: String,
    pub value: f64,
    pub se: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    /// Value of one metric, if present.
    pub fn value(&self, policy: &str, metric: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.policy == policy && r.metric == metric)
    }

    /// CSV with a fixed column order; `manifest` is written as a comment line.
    pub fn to_csv(&self, manifest: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(id) = manifest {
            let _ = writeln!(out, "# manifest {id}");
        }
        out.push_str("policy,od,metric,value,se,reps\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{}->{},{},{},{},{}",
                r.policy, r.origin, r.destination, r.metric, r.value, r.se, r.reps
            );
        }
        out
    }
}

/// Draws initial states for one scheme.
enum Sampler {
    Index { space: Arc<StateSpace>, weights: Option<WeightedIndex<f64>> },
    Product { chains: Vec<Vec<f64>>, global: Vec<f64> },
    Fixed(CompositeState),
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> CompositeState {
        match self {
            Sampler::Index { space, weights } => {
                let i = match weights {
                    Some(w) => w.sample(rng),
                    None => rng.random_range(0..space.len()),
                };
                space.state(i)
            }
            Sampler::Product { chains, global } => {
                let pick = |p: &[f64], rng: &mut ChaCha8Rng| {
                    if p.len() == 1 {
                        0
                    } else {
                        WeightedIndex::new(p).expect("valid distribution").sample(rng)
                    }
                };
                let g = pick(global, rng);
                CompositeState { global: g, arcs: chains.iter().map(|p| pick(p, rng)).collect() }
            }
            Sampler::Fixed(s) => s.clone(),
        }
    }
}

fn chain_distribution(g: &crate::background::Generator, stationary: bool) -> Result<Vec<f64>> {
    let n = g.dim();
    if !stationary || n == 1 {
        return Ok(vec![1.0 / n as f64; n]);
    }
    stationary_distribution(&CsrMatrix::from_dense(&g.to_rows()))
}

/// Everything computed once per model and reused across OD pairs.
struct Shared<'m> {
    model: &'m Model,
    full: Option<FullModel<'m>>,
    space: Option<Arc<StateSpace>>,
    stationary: Option<Result<Vec<f64>>>,
}

impl<'m> Shared<'m> {
    fn new(model: &'m Model, need_full: bool) -> Result<Self> {
        let space = match model.full_space() {
            Ok(s) => Some(Arc::new(s)),
            Err(Error::StateSpaceTooLarge { .. }) if !need_full => None,
            Err(e) => return Err(e),
        };
        let full = match (&space, need_full) {
            (Some(s), true) => Some(FullModel::with_space(model, (**s).clone())?),
            _ => None,
        };
        Ok(Shared { model, full, space, stationary: None })
    }

    /// Solves for the stationary distribution once; failures are kept.
    fn prepare_stationary(&mut self) {
        if let (None, Some(space)) = (&self.stationary, &self.space) {
            let q = match &self.full {
                Some(fm) => fm.generator().clone(),
                None => self.model.generator(space),
            };
            self.stationary =
                Some(if is_irreducible(&q) { stationary_distribution(&q) } else { Err(Error::Reducible) });
        }
    }

    fn stationary(&self) -> Result<&[f64]> {
        match &self.stationary {
            Some(Ok(pi)) => Ok(pi),
            Some(Err(Error::Reducible)) => Err(Error::Reducible),
            Some(Err(e)) => Err(Error::InvalidArgument(format!("stationary distribution unavailable: {e}"))),
            None => Err(Error::InvalidArgument("stationary distribution not prepared".into())),
        }
    }

    fn sampler(&self, stationary: bool) -> Result<Sampler> {
        if let Some(space) = &self.space {
            let weights = if stationary {
                let pi = self.stationary()?;
                Some(WeightedIndex::new(pi).map_err(|e| Error::InvalidArgument(format!("stationary weights: {e}")))?)
            } else {
                None
            };
            return Ok(Sampler::Index { space: Arc::clone(space), weights });
        }
        let model = self.model;
        if model.cap().is_some() || model.global().is_some_and(|g| !g.overrides.is_empty()) {
            return Err(Error::StateSpaceTooLarge { size: model.count_full_states(), limit: model.state_limit() });
        }
        let chains = (0..model.network().num_arcs())
            .map(|a| chain_distribution(&model.chain(a).generator, stationary))
            .collect::<Result<Vec<_>>>()?;
        let global = match model.global() {
            Some(g) => chain_distribution(&g.generator, stationary)?,
            None => vec![1.0],
        };
        Ok(Sampler::Product { chains, global })
    }
}

struct RepOutcome {
    times: Vec<f64>,
    optimal: f64,
    decision_s: Vec<f64>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every policy on shared sample paths and reports realized means,
/// percentage losses against the realized optimum and, when the space is
/// small enough, exact expected values.
pub fn run_experiment(model: &Model, config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let net = model.network();
    let mut policies = config.policies.clone();
    policies.dedup();
    let need_full = policies.iter().any(|p| p.needs_full_space());
    let mut shared = Shared::new(model, need_full)?;
    let exact_full = match (&shared.full, &shared.space) {
        (Some(_), _) => true,
        (None, Some(s)) if s.len() <= config.exact_state_limit => {
            shared.full = Some(FullModel::with_space(model, (**s).clone())?);
            true
        }
        _ => false,
    };
    let exact = exact_full && shared.space.as_ref().is_some_and(|s| s.len() <= config.exact_state_limit);
    let wants_weights = matches!(config.initial_state, InitialScheme::Stationary | InitialScheme::Both);
    if exact || wants_weights {
        shared.prepare_stationary();
    }
    let schemes: Vec<(bool, u64)> = match config.initial_state {
        InitialScheme::Uniform | InitialScheme::Fixed => vec![(false, 0)],
        InitialScheme::Stationary => vec![(true, 1)],
        InitialScheme::Both => vec![(false, 0), (true, 1)],
    };
    let samplers = schemes
        .iter()
        .map(|&(stationary, tag)| {
            let sampler = match (&config.fixed_state, config.initial_state) {
                (Some(s), InitialScheme::Fixed) => Sampler::Fixed(s.clone()),
                _ => shared.sampler(stationary)?,
            };
            Ok((stationary, tag, sampler))
        })
        .collect::<Result<Vec<_>>>()?;

    let star = StarEngine::new(model, config.radius)?;
    let star_oracle = policies.contains(&PolicyKind::EdsgerStar).then(|| StarOracle::new(star));
    let reduced_oracle = match config.reduction {
        Some(p) if policies.contains(&PolicyKind::ReducedEdsgerStar) => {
            Some(ReducedStarOracle::new(model, p.m, p.l, config.radius)?)
        }
        _ => None,
    };
    let ds = DsOracle::new(net);
    let dd = DdOracle::new(model);

    let mut rows = Vec::new();
    for (od_index, (o_key, d_key)) in config.od_pairs.iter().enumerate() {
        let origin = o_key.resolve(net)?;
        let destination = d_key.resolve(net)?;
        let (o_name, d_name) = (node_name(net, origin), node_name(net, destination));

        let vi_table: Option<PolicyTable> = match (&shared.full, policies.contains(&PolicyKind::Vi)) {
            (Some(fm), true) => Some(value_iteration(fm, destination, ViOptions::default())?.policy),
            _ => None,
        };
        let full_space = shared.full.as_ref().map(|fm| fm.space());
        let vi_oracle = vi_table.clone().zip(full_space).map(|(t, s)| TableOracle::new("vi", s, t));
        let edsger_oracle = shared.full.as_ref().map(EdsgerOracle::new);
        let oracles: Vec<&dyn Oracle> = policies
            .iter()
            .map(|p| -> &dyn Oracle {
                match p {
                    PolicyKind::Vi => vi_oracle.as_ref().expect("vi oracle"),
                    PolicyKind::Edsger => edsger_oracle.as_ref().expect("edsger oracle"),
                    PolicyKind::EdsgerStar => star_oracle.as_ref().expect("star oracle"),
                    PolicyKind::Ds => &ds,
                    PolicyKind::Dd => &dd,
                    PolicyKind::ReducedEdsgerStar => reduced_oracle.as_ref().expect("reduced oracle"),
                }
            })
            .collect();

        let mut exact_uniform: Option<Vec<f64>> = None;
        let mut exact_weighted: Option<Vec<f64>> = None;
        if exact && config.initial_state != InitialScheme::Fixed {
            let fm = shared.full.as_ref().expect("full model");
            let mut uni = Vec::new();
            let mut values = Vec::new();
            for (p, oracle) in policies.iter().zip(&oracles) {
                let table = match (p, &vi_table) {
                    (PolicyKind::Vi, Some(t)) => t.clone(),
                    _ => extract_policy(fm, *oracle, destination)?,
                };
                let v = evaluate_policy(fm, &table)?.values.node(origin).to_vec();
                uni.push(v.iter().sum::<f64>() / v.len() as f64);
                values.push(v);
            }
            exact_uniform = Some(uni);
            if let Ok(pi) = shared.stationary() {
                exact_weighted =
                    Some(values.iter().map(|v| v.iter().zip(pi).map(|(x, w)| x * w).sum::<f64>()).collect());
            }
        }

        let ds_time = path_min_time(net, &ds_route(net, origin, destination)?);
        let horizon = (config.horizon_factor * ds_time).max(1e-6);

        let mut realized: Vec<(bool, Vec<RepOutcome>)> = Vec::new();
        for &(stationary, tag, ref sampler) in &samplers {
            let reps = config.replications;
            let outcomes = crate::par::map_indexed(reps, |rep| -> Result<RepOutcome> {
                let stream = ((od_index as u64) << 40) | (tag << 32) | rep as u64;
                let mut rng = substream(config.seed, stream);
                let s0 = sampler.draw(&mut rng);
                let mut traj = Trajectory::sample(model, s0, horizon, rng)?;
                let mut times = Vec::with_capacity(oracles.len());
                let mut decision_s = Vec::with_capacity(oracles.len());
                for oracle in &oracles {
                    let rec = drive(*oracle, &mut traj, origin, destination, 0.0)?;
                    times.push(rec.travel_time());
                    decision_s.push(rec.decision_time.as_secs_f64());
                }
                let optimal = optimal_realized(&mut traj, origin, destination, 0.0)?;
                for (t, oracle) in times.iter().zip(&oracles) {
                    assert!(
                        optimal <= t + 1e-9 * t.max(1.0),
                        "realized optimum {optimal} exceeds {} time {t}",
                        oracle.name()
                    );
                }
                Ok(RepOutcome { times, optimal, decision_s })
            });
            realized.push((stationary, outcomes.into_iter().collect::<Result<Vec<_>>>()?));
        }

        for (pi, p) in policies.iter().enumerate() {
            let mut push = |metric: &str, value: f64, se: f64, reps: usize| {
                rows.push(ResultRow {
                    policy: p.name().to_string(),
                    origin: o_name.clone(),
                    destination: d_name.clone(),
                    metric: metric.to_string(),
                    value,
                    se,
                    reps,
                });
            };
            let n_states = shared.space.as_ref().map_or(0, |s| s.len());
            let uniform_draws = realized.iter().find(|(s, _)| !s).map(|(_, o)| o);
            let weighted_draws = realized.iter().find(|(s, _)| *s).map(|(_, o)| o);
            let times_of = |o: &Vec<RepOutcome>| o.iter().map(|r| r.times[pi]).collect::<Vec<_>>();
            let loss_of = |o: &Vec<RepOutcome>| {
                o.iter().map(|r| (r.times[pi] - r.optimal) / r.optimal * 100.0).collect::<Vec<_>>()
            };

            if let Some(u) = &exact_uniform {
                push("mean", u[pi], 0.0, n_states);
            } else if let Some(o) = uniform_draws {
                let (m, se) = mean_se(&times_of(o));
                push("mean", m, se, o.len());
            }
            if let Some(w) = &exact_weighted {
                push("weighted_mean", w[pi], 0.0, n_states);
            } else if let Some(o) = weighted_draws {
                let (m, se) = mean_se(&times_of(o));
                push("weighted_mean", m, se, o.len());
            }
            if let Some(o) = uniform_draws {
                let (m, se) = mean_se(&loss_of(o));
                push("loss_pct_uniform", m, se, o.len());
            }
            if let Some(o) = weighted_draws {
                let (m, se) = mean_se(&loss_of(o));
                push("loss_pct_weighted", m, se, o.len());
            }
            if config.record_runtime {
                let all: Vec<f64> = realized.iter().flat_map(|(_, o)| o.iter().map(|r| r.decision_s[pi])).collect();
                let (m, se) = mean_se(&all);
                push("runtime_s", m, se, all.len());
            }
        }
    }
    Ok(ExperimentResult { rows })
}

fn node_name(net: &Network, k: NodeId) -> String {
    let label = &net.nodes()[k].label;
    if label.is_empty() {
        k.to_string()
    } else {
        label.clone()
    }
}
