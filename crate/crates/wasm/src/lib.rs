//! Browser bindings: travel-time curves of one arc, routes on the bundled
//! instances and hypoexponential hitting curves. Every function returns a
//! JSON string or throws a string error.

use mmroute::background::{CompositeState, Model};
use mmroute::fixtures;
use mmroute::network::NodeId;
use mmroute::reduction::hypoexp_cdf;
use mmroute::routing::{dd_route, ds_route, lower_bounds, StarEngine};
use mmroute::transit::{arc_transit, ExpmWorkspace, DEFAULT_TOL};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

type JsResult = Result<String, JsError>;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn load(name: &str) -> Result<Model, JsError> {
    fixtures::by_name(name).map_err(err)
}

fn node(model: &Model, key: &str) -> Result<NodeId, JsError> {
    model.network().resolve_node(key).ok_or_else(|| err(format!("no node {key:?}")))
}

fn label(model: &Model, k: NodeId) -> String {
    let n = &model.network().nodes()[k];
    if n.label.is_empty() {
        n.id.to_string()
    } else {
        n.label.clone()
    }
}

/// Bundled instances with their nodes and arcs.
#[wasm_bindgen]
pub fn fixture_info(name: &str) -> JsResult {
    let model = load(name)?;
    let net = model.network();
    let arcs: Vec<Value> = net
        .arcs()
        .iter()
        .map(|a| {
            json!({
                "id": a.id,
                "from": label(&model, a.tail),
                "to": label(&model, a.head),
                "length_km": a.length_km,
                "max_speed_kmh": a.max_speed_kmh,
                "states": model.chain(a.id).n_states(),
            })
        })
        .collect();
    let nodes: Vec<String> = (0..net.num_nodes()).map(|k| label(&model, k)).collect();
    Ok(json!({ "names": fixtures::NAMES, "nodes": nodes, "arcs": arcs }).to_string())
}

/// Expected time to cover `points + 1` evenly spaced distances along `arc`,
/// starting from every arc free, in the arc's own neighbourhood space.
#[wasm_bindgen]
pub fn transit_curve(name: &str, arc: usize, points: usize) -> JsResult {
    let model = load(name)?;
    let a = model.network().arc(arc).map_err(err)?.clone();
    let space = model.reduced_space(arc, model.radius()).map_err(err)?;
    let q = model.generator(&space);
    let speeds = model.speeds_on(&space, arc);
    let s = model
        .truncate(&space, &CompositeState::all_free(model.network().num_arcs()))
        .ok_or_else(|| err("free state lies outside the space"))?;
    let points = points.max(1);
    let mut distance = Vec::with_capacity(points + 1);
    let mut expected = Vec::with_capacity(points + 1);
    for i in 0..=points {
        let d = a.length_km * i as f64 / points as f64;
        let t = arc_transit(arc, &q, &speeds, d).map_err(err)?;
        distance.push(d);
        expected.push(t.phi[s]);
    }
    Ok(json!({ "distance_km": distance, "expected_h": expected, "free_flow_h": a.length_km / a.max_speed_kmh })
        .to_string())
}

/// Route from `origin` to `dest` with every arc free at departure.
/// `algo` is `edsger-star`, `ds` (static maximum speeds) or `dd` (current speeds).
#[wasm_bindgen]
pub fn route(name: &str, origin: &str, dest: &str, algo: &str) -> JsResult {
    let model = load(name)?;
    let (o, d) = (node(&model, origin)?, node(&model, dest)?);
    let s0 = CompositeState::all_free(model.network().num_arcs());
    let engine = StarEngine::new(&model, None).map_err(err)?;
    let path = match algo {
        "edsger-star" => {
            let lb = lower_bounds(model.network(), d).map_err(err)?;
            engine.shortest_path(o, &s0, d, &lb).map_err(err)?.path
        }
        "ds" => ds_route(model.network(), o, d).map_err(err)?,
        "dd" => dd_route(&model, o, &s0, d).map_err(err)?,
        other => return Err(err(format!("unknown algorithm {other:?}"))),
    };
    // Expected arc times along the fixed path, each from the state at departure.
    let mut ws = ExpmWorkspace::new(DEFAULT_TOL).map_err(err)?;
    let mut elapsed = 0.0;
    let mut legs = Vec::with_capacity(path.len());
    for &a in &path {
        elapsed += engine.relax(&mut ws, a, &s0, elapsed).map_err(err)?;
        let arc = &model.network().arcs()[a];
        legs.push(json!({ "arc": a, "from": label(&model, arc.tail), "to": label(&model, arc.head), "cumulative_h": elapsed }));
    }
    Ok(json!({ "algorithm": algo, "path": path, "legs": legs, "total_h": elapsed }).to_string())
}

/// P(sum of exponentials with the given distinct rates <= t) on a grid of
/// `points + 1` times in [0, horizon].
#[wasm_bindgen]
pub fn hypoexp_curve(rates: &[f64], horizon: f64, points: usize) -> JsResult {
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(err("horizon must be positive"));
    }
    let points = points.max(1);
    let mut t = Vec::with_capacity(points + 1);
    let mut p = Vec::with_capacity(points + 1);
    for i in 0..=points {
        let m = horizon * i as f64 / points as f64;
        t.push(m);
        p.push(hypoexp_cdf(rates, m).map_err(err)?);
    }
    Ok(json!({ "t_h": t, "probability": p }).to_string())
}

// Only success paths run natively: building a `JsError` needs a JS host.
#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: JsResult) -> Value {
        serde_json::from_str(&s.unwrap_or_else(|_| panic!("call failed"))).unwrap()
    }

    #[test]
    fn fig5_route_takes_the_upper_arc() {
        let r = parse(route("fig5", "k0", "k*", "edsger-star"));
        assert_eq!(r["path"][0], 0);
        assert!((r["legs"][0]["cumulative_h"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn transit_curve_starts_at_zero_and_ends_at_arc_time() {
        let c = parse(transit_curve("fig5", 1, 4));
        let e = c["expected_h"].as_array().unwrap();
        assert_eq!(e[0].as_f64().unwrap(), 0.0);
        assert!((e[4].as_f64().unwrap() - 1.01663).abs() < 1e-5);
    }

    #[test]
    fn hypoexp_curve_rises_to_one() {
        let c = parse(hypoexp_curve(&[1.0, 2.0], 40.0, 8));
        let p = c["probability"].as_array().unwrap();
        assert_eq!(p[0].as_f64().unwrap(), 0.0);
        assert!(p[8].as_f64().unwrap() > 0.999_999);
    }
}
