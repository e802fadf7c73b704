use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmroute::background::{CompositeState, Model};
use mmroute::fixtures;
use mmroute::network::NodeId;

/// Where the model comes from: a pair of files or a bundled fixture.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Network JSON file.
    #[arg(long, requires = "background", conflicts_with = "fixture")]
    pub network: Option<PathBuf>,
    /// Background JSON file.
    #[arg(long, requires = "network")]
    pub background: Option<PathBuf>,
    /// Bundled instance instead of files (see `mmroute fixture --list`).
    #[arg(long)]
    pub fixture: Option<String>,
    /// Override the incident cap (`none` removes it).
    #[arg(long)]
    pub cap: Option<String>,
    /// Largest full state space handled (full-space algorithms keep about
    /// states x arcs matrix entries in memory).
    #[arg(long, default_value_t = 1 << 20)]
    pub state_limit: usize,
}

impl ModelArgs {
    pub fn load(&self) -> Result<Model> {
        let model = match (&self.network, &self.background, &self.fixture) {
            (Some(n), Some(b), None) => {
                Model::load(n, b).with_context(|| format!("loading {} and {}", n.display(), b.display()))?
            }
            (None, None, Some(name)) => fixtures::by_name(name)?,
            _ => bail!("give either --network and --background, or --fixture"),
        };
        let model = model.with_state_limit(self.state_limit);
        Ok(match self.cap.as_deref() {
            None => model,
            Some("none") => model.with_cap(None),
            Some(c) => model.with_cap(Some(c.parse().with_context(|| format!("--cap {c:?}"))?)),
        })
    }

    /// Input paths (or the fixture name) for the run manifest.
    pub fn describe(&self) -> Vec<String> {
        match &self.fixture {
            Some(f) => vec![format!("fixture:{f}")],
            None => [&self.network, &self.background]
                .iter()
                .flat_map(|p| p.as_ref())
                .map(|p| p.display().to_string())
                .collect(),
        }
    }

    /// Bytes that determine the model, for manifest ids.
    pub fn content(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        if let Some(f) = &self.fixture {
            out.extend_from_slice(f.as_bytes());
        }
        for p in [&self.network, &self.background].into_iter().flatten() {
            out.extend(std::fs::read(p).with_context(|| format!("reading {}", p.display()))?);
        }
        if let Some(c) = &self.cap {
            out.extend_from_slice(c.as_bytes());
        }
        Ok(out)
    }
}

pub fn node(model: &Model, key: &str) -> Result<NodeId> {
    model.network().resolve_node(key).ok_or_else(|| mmroute::Error::UnknownNodeKey(key.to_string()).into())
}

/// Parses `x1,...,xn` (or `y,x1,...,xn` when the model has a global
/// process); states are 0-based. `None` gives the all-free state.
pub fn state(model: &Model, text: Option<&str>) -> Result<CompositeState> {
    let n = model.network().num_arcs();
    let Some(text) = text else {
        return Ok(CompositeState::all_free(n));
    };
    let values: Vec<usize> = text
        .split(',')
        .map(|v| v.trim().parse::<usize>().with_context(|| format!("--state entry {v:?}")))
        .collect::<Result<_>>()?;
    let has_global = model.global().is_some();
    let want = n + usize::from(has_global);
    if values.len() != want {
        bail!(
            "--state has {} entries, expected {want} ({}one per arc)",
            values.len(),
            if has_global { "the global state, then " } else { "" }
        );
    }
    let (global, arcs) = if has_global { (values[0], values[1..].to_vec()) } else { (0, values) };
    for (a, &x) in arcs.iter().enumerate() {
        if x >= model.chain(a).n_states() {
            bail!("--state: arc {a} has {} states, got {x}", model.chain(a).n_states());
        }
    }
    if let Some(g) = model.global() {
        if global >= g.m_states() {
            bail!("--state: global process has {} states, got {global}", g.m_states());
        }
    }
    Ok(CompositeState { global, arcs })
}
