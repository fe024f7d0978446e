//! Seeded instance generators.
//!
//! `tree_perturbed` draws from ChaCha8 seeded with `seed_from_u64(seed)`.
//! For `i = 1..n`, in order: the parent of vertex `v{i}` is uniform in
//! `0..i`; the codomain length of edge `e{i-1}` (from the parent to `v{i}`)
//! is `1 + u1`; the domain length is that times `L_max^(2 u2 - 1)`, where
//! `u1`, `u2` are uniform in `[0, 1)`. The map is the combinatorial identity.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Dir, EdgeId, GraphPoint, MetricGraph, Step, VertexId};
use crate::io::{to_json, GraphFile, MapFile};
use crate::map::GraphMap;
use crate::theorem::{Hypothesis, TheoremReport, Verdict, CERTIFY_TOL};
use crate::walk::{Segment, Walk};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusSpec {
    TreePerturbed {
        n: usize,
        #[serde(rename = "L_max")]
        l_max: f64,
        seed: u64,
    },
    CycleCover { k: usize, n: usize },
    Mcsimpleminded { tunnel_len: f64, circumference: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", deny_unknown_fields)]
pub enum ExpectedVerdict {
    Certified {
        #[serde(rename = "L_max")]
        l_max: f64,
    },
    HypothesisFailure { hypothesis: Hypothesis },
}

impl ExpectedVerdict {
    pub fn matches(&self, report: &TheoremReport) -> bool {
        match (self, &report.verdict) {
            (ExpectedVerdict::Certified { l_max }, Verdict::Certified { l }) => *l <= l_max + CERTIFY_TOL,
            (ExpectedVerdict::HypothesisFailure { hypothesis }, v) => v.failed_hypothesis() == Some(*hypothesis),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub spec: CorpusSpec,
    pub expected: ExpectedVerdict,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: CorpusSpec,
    pub map: GraphMap,
    pub expected: ExpectedVerdict,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("invalid generator parameters: {0}")]
pub struct SpecError(pub String);

impl CorpusSpec {
    pub fn generate(&self) -> Result<Instance, SpecError> {
        let (map, expected) = match *self {
            CorpusSpec::TreePerturbed { n, l_max, seed } => (
                gen_tree_perturbed(n, l_max, seed)?,
                ExpectedVerdict::Certified { l_max },
            ),
            CorpusSpec::CycleCover { k, n } => (
                gen_cycle_cover(k, n)?,
                ExpectedVerdict::HypothesisFailure { hypothesis: Hypothesis::SimplyConnected },
            ),
            CorpusSpec::Mcsimpleminded { tunnel_len, circumference } => (
                gen_mcsimpleminded(tunnel_len, circumference)?,
                ExpectedVerdict::HypothesisFailure { hypothesis: Hypothesis::SimplyConnected },
            ),
        };
        Ok(Instance { spec: self.clone(), map, expected })
    }
}

/// Random tree with identity map and per-edge length distortion in
/// `[1/L_max, L_max]`, log-uniform.
pub fn gen_tree_perturbed(n: usize, l_max: f64, seed: u64) -> Result<GraphMap, SpecError> {
    if n < 2 {
        return Err(SpecError(format!("n = {n} must be at least 2")));
    }
    if !(l_max >= 1.0 && l_max.is_finite()) {
        return Err(SpecError(format!("L_max = {l_max} must be at least 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut cod = MetricGraph::builder().vertices(names.iter().cloned());
    let mut dom = MetricGraph::builder().vertices(names.iter().cloned());
    for i in 1..n {
        let parent = rng.random_range(0..i);
        let len = 1.0 + rng.random::<f64>();
        let factor = l_max.powf(2.0 * rng.random::<f64>() - 1.0);
        let id = format!("e{}", i - 1);
        cod = cod.edge_with_id(id.clone(), names[parent].clone(), names[i].clone(), len);
        dom = dom.edge_with_id(id, names[parent].clone(), names[i].clone(), len * factor);
    }
    let (dom, cod) = (dom.build().expect("tree is connected"), cod.build().expect("tree is connected"));
    let vertex_map = dom.vertex_ids().collect();
    let edge_map = dom.edge_ids().map(|e| vec![Step::new(e, Dir::Fwd)]).collect();
    Ok(GraphMap::new(dom, cod, vertex_map, edge_map).expect("identity is well formed"))
}

fn unit_cycle(vertex: &str, edge: &str, k: usize) -> MetricGraph {
    let mut b = MetricGraph::builder().vertices((0..k).map(|i| format!("{vertex}{i}")));
    for i in 0..k {
        b = b.edge_with_id(format!("{edge}{i}"), format!("{vertex}{i}"), format!("{vertex}{}", (i + 1) % k), 1.0);
    }
    b.build().expect("cycle is connected")
}

/// `n`-fold cover of the unit `k`-cycle by the unit `n k`-cycle.
pub fn gen_cycle_cover(k: usize, n: usize) -> Result<GraphMap, SpecError> {
    if k < 3 || n < 1 {
        return Err(SpecError(format!("need k >= 3 and n >= 1, got k = {k}, n = {n}")));
    }
    let dom = unit_cycle("x", "xe", n * k);
    let cod = unit_cycle("y", "ye", k);
    let vertex_map = (0..n * k).map(|j| VertexId(j % k)).collect();
    let edge_map = (0..n * k).map(|j| vec![Step::new(EdgeId(j % k), Dir::Fwd)]).collect();
    Ok(GraphMap::new(dom, cod, vertex_map, edge_map).expect("cover is well formed"))
}

/// Codomain vertex positions around the tube.
fn tube_positions(tunnel_len: f64, circumference: f64) -> Vec<f64> {
    let end = tunnel_len.rem_euclid(circumference);
    let slack = 1e-9 * circumference;
    if end > slack && end < circumference - slack {
        vec![0.0, end]
    } else {
        vec![0.0, circumference / 2.0]
    }
}

/// A path of length `tunnel_len` wound at unit speed around a cycle of
/// length `circumference`. Both ends of the path are boundary vertices.
pub fn gen_mcsimpleminded(tunnel_len: f64, circumference: f64) -> Result<GraphMap, SpecError> {
    if !(circumference > 0.0 && circumference.is_finite() && tunnel_len.is_finite()) {
        return Err(SpecError("lengths must be positive and finite".into()));
    }
    if !(tunnel_len > circumference) {
        return Err(SpecError(format!(
            "tunnel_len = {tunnel_len} must exceed circumference = {circumference}"
        )));
    }
    let pos = tube_positions(tunnel_len, circumference);
    let cod = MetricGraph::builder()
        .vertices(["y0", "y1"])
        .edge_with_id("ye0", "y0", "y1", pos[1])
        .edge_with_id("ye1", "y1", "y0", circumference - pos[1])
        .build()
        .expect("tube is connected");

    // Domain vertices at every lift of a codomain vertex, plus both ends.
    let slack = 1e-9 * tunnel_len;
    let mut cuts: Vec<(f64, usize)> = Vec::new();
    for w in 0..=(tunnel_len / circumference).floor() as usize {
        for (j, p) in pos.iter().enumerate() {
            let s = w as f64 * circumference + p;
            if s <= tunnel_len + slack {
                cuts.push((s.min(tunnel_len), j));
            }
        }
    }
    debug_assert!(cuts.last().is_some_and(|(s, _)| tunnel_len - s <= slack));
    let n = cuts.len();
    let mut dom = MetricGraph::builder().vertices((0..n).map(|i| format!("x{i}")));
    let mut edge_map = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        dom = dom.edge_with_id(format!("xe{i}"), format!("x{i}"), format!("x{}", i + 1), cuts[i + 1].0 - cuts[i].0);
        edge_map.push(vec![Step::new(EdgeId(cuts[i].1), Dir::Fwd)]);
    }
    let dom = dom.boundary("x0").boundary(format!("x{}", n - 1)).build().expect("path is connected");
    let vertex_map = cuts.iter().map(|(_, j)| VertexId(*j)).collect();
    Ok(GraphMap::new(dom, cod, vertex_map, edge_map).expect("winding is well formed"))
}

/// Point at arclength `s` along a path-shaped domain whose edges are listed
/// in order.
pub fn point_along_path(g: &MetricGraph, s: f64) -> GraphPoint {
    let mut acc = 0.0;
    for e in g.edge_ids() {
        let len = g.edge(e).len;
        if s <= acc + len {
            return GraphPoint::at_length(g, e, s - acc);
        }
        acc += len;
    }
    GraphPoint::Vertex(g.edge(EdgeId(g.edge_count() - 1)).b)
}

/// Loop starting at `start` going `winds` times around a cycle-shaped
/// codomain in the direction of its edges.
pub fn cycle_loop(g: &MetricGraph, start: &GraphPoint, winds: usize) -> Walk {
    let k = g.edge_count();
    let mut segs = Vec::new();
    match *start {
        GraphPoint::Vertex(v) => {
            let first = g.edge_ids().position(|e| g.edge(e).a == v).expect("cycle vertex");
            for i in 0..k * winds {
                segs.push(Segment::full(Step::new(EdgeId((first + i) % k), Dir::Fwd)));
            }
        }
        GraphPoint::Interior { edge, t } => {
            for _ in 0..winds {
                segs.push(Segment::new(edge, t, 1.0));
                for i in 1..k {
                    segs.push(Segment::full(Step::new(EdgeId((edge.0 + i) % k), Dir::Fwd)));
                }
                segs.push(Segment::new(edge, 0.0, t));
            }
        }
    }
    Walk::new(*start, segs)
}

/// Writes `domain.json`, `codomain.json`, `map.json` and `expected.json`.
pub fn write_instance(inst: &Instance, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let m = &inst.map;
    fs::write(dir.join("domain.json"), to_json(&GraphFile::of(m.domain())))?;
    fs::write(dir.join("codomain.json"), to_json(&GraphFile::of(m.codomain())))?;
    fs::write(dir.join("map.json"), to_json(&MapFile::of(m)))?;
    let sidecar = Sidecar { spec: inst.spec.clone(), expected: inst.expected.clone() };
    fs::write(dir.join("expected.json"), to_json(&sidecar))?;
    Ok(())
}
