//! Combinatorial maps between metric graphs.
//!
//! A [`GraphMap`] sends vertices to vertices and each domain edge onto a
//! nonempty walk of whole codomain edges, traversed at constant speed. The
//! ratio of image length to edge length is the edge's stretch factor.

mod bilipschitz;
mod lq;
mod multiplicity;

pub use bilipschitz::{local_bilipschitz_constant, LocalBilipschitzReport};
pub use lq::{lq_verify, lq_verify_with_mesh, LqFailure, LqReport, LqViolation, TruncatedProbe};
pub use multiplicity::{
    max_multiplicity_in_ball, multiplicity, multiplicity_bound, BallMultiplicity, Fiber,
};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Dir, EdgeId, GraphPoint, MetricGraph, Step, VertexId};
use crate::tol;
use crate::walk::{Segment, Walk};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("malformed map: {0}")]
    Malformed(String),
    #[error("map is not locally injective: {p} and {q} are distinct but have the same image")]
    NotLocallyInjective { p: String, q: String },
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("image walk of domain edge `{0}` backtracks; fibers are not well defined")]
    NonImmersedEdge(String),
    #[error("point is not on the graph")]
    PointNotOnGraph,
}

/// Image walk of one domain edge together with cumulative arclength offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageWalk {
    steps: Vec<Step>,
    /// `offsets[k]` is the arclength at which step `k` begins;
    /// `offsets[steps.len()]` is the total length.
    offsets: Vec<f64>,
}

/// Where an arclength position along an image walk falls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Location {
    /// At the vertex between steps `k - 1` and `k` (`0` and `len` are the
    /// ends of the walk).
    Junction(usize),
    /// Strictly inside step `k`, `local` arclength from its start.
    Inside { k: usize, local: f64 },
}

impl ImageWalk {
    fn new(codomain: &MetricGraph, steps: Vec<Step>) -> Self {
        let mut offsets = Vec::with_capacity(steps.len() + 1);
        let mut acc = 0.0;
        offsets.push(acc);
        for s in &steps {
            acc += codomain.edge(s.edge).len;
            offsets.push(acc);
        }
        ImageWalk { steps, offsets }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn length(&self) -> f64 {
        *self.offsets.last().expect("offsets never empty")
    }

    pub(crate) fn offset(&self, k: usize) -> f64 {
        self.offsets[k]
    }

    pub(crate) fn locate(&self, lambda: f64) -> Location {
        let slack = tol::eps(self.length());
        let k = self.offsets.partition_point(|&o| o <= lambda + slack);
        // offsets[k - 1] <= lambda + slack < offsets[k]
        let k = k.max(1) - 1;
        if (lambda - self.offsets[k]).abs() <= slack {
            return Location::Junction(k);
        }
        if k + 1 < self.offsets.len() && (self.offsets[k + 1] - lambda).abs() <= slack {
            return Location::Junction(k + 1);
        }
        let k = k.min(self.steps.len() - 1);
        Location::Inside { k, local: lambda - self.offsets[k] }
    }

    /// Codomain point at arclength `lambda` along the walk.
    pub fn point_at(&self, codomain: &MetricGraph, lambda: f64) -> GraphPoint {
        match self.locate(lambda) {
            Location::Junction(k) if k == self.steps.len() => {
                GraphPoint::Vertex(codomain.step_end(self.steps[k - 1]))
            }
            Location::Junction(k) => GraphPoint::Vertex(codomain.step_start(self.steps[k])),
            Location::Inside { k, local } => {
                let s = self.steps[k];
                let frac = local / codomain.edge(s.edge).len;
                let t = match s.dir {
                    Dir::Fwd => frac,
                    Dir::Rev => 1.0 - frac,
                };
                GraphPoint::on_edge(codomain, s.edge, t)
            }
        }
    }

    /// Codomain edge parameter reached `local` arclength into step `k`.
    pub(crate) fn param_in_step(&self, codomain: &MetricGraph, k: usize, local: f64) -> f64 {
        let s = self.steps[k];
        let frac = (local / codomain.edge(s.edge).len).clamp(0.0, 1.0);
        match s.dir {
            Dir::Fwd => frac,
            Dir::Rev => 1.0 - frac,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GraphMap {
    domain: MetricGraph,
    codomain: MetricGraph,
    vertex_map: Vec<VertexId>,
    edge_map: Vec<ImageWalk>,
}

/// A structural defect of a map encoding.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapViolation {
    /// The image walk does not start at the image of the edge's `a` end.
    StartMismatch { edge: String },
    /// The image walk does not end at the image of the edge's `b` end.
    EndMismatch { edge: String },
    /// Steps `position` and `position + 1` do not share a vertex.
    Discontinuous { edge: String, position: usize },
    /// Steps `position` and `position + 1` form `e` followed by `e` reversed.
    Backtrack { edge: String, position: usize },
    /// Stretch factor is not finite and positive.
    BadStretch { edge: String, stretch: f64 },
}

/// Two germs at a domain vertex with the same image germ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalInjectivityWitness {
    pub vertex: String,
    pub germs: (String, String),
    pub image_germ: String,
}

impl GraphMap {
    pub fn new(
        domain: MetricGraph,
        codomain: MetricGraph,
        vertex_map: Vec<VertexId>,
        edge_map: Vec<Vec<Step>>,
    ) -> Result<Self, MapError> {
        if vertex_map.len() != domain.vertex_count() {
            return Err(MapError::Malformed(format!(
                "vertex map has {} entries for {} domain vertices",
                vertex_map.len(),
                domain.vertex_count()
            )));
        }
        if edge_map.len() != domain.edge_count() {
            return Err(MapError::Malformed(format!(
                "edge map has {} entries for {} domain edges",
                edge_map.len(),
                domain.edge_count()
            )));
        }
        if let Some(v) = vertex_map.iter().find(|v| v.0 >= codomain.vertex_count()) {
            return Err(MapError::Malformed(format!("vertex image {v} out of range")));
        }
        let mut walks = Vec::with_capacity(edge_map.len());
        for (i, steps) in edge_map.into_iter().enumerate() {
            if steps.is_empty() {
                return Err(MapError::Malformed(format!(
                    "domain edge `{}` has an empty image walk",
                    domain.edge(EdgeId(i)).id
                )));
            }
            if let Some(s) = steps.iter().find(|s| s.edge.0 >= codomain.edge_count()) {
                return Err(MapError::Malformed(format!("image edge {} out of range", s.edge)));
            }
            walks.push(ImageWalk::new(&codomain, steps));
        }
        Ok(GraphMap { domain, codomain, vertex_map, edge_map: walks })
    }

    /// The identity map of `g`.
    pub fn identity(g: &MetricGraph) -> Self {
        let vertex_map = g.vertex_ids().collect();
        let edge_map = g.edge_ids().map(|e| vec![Step::new(e, Dir::Fwd)]).collect();
        GraphMap::new(g.clone(), g.clone(), vertex_map, edge_map).expect("identity is well formed")
    }

    pub fn domain(&self) -> &MetricGraph {
        &self.domain
    }

    pub fn codomain(&self) -> &MetricGraph {
        &self.codomain
    }

    pub fn vertex_image(&self, v: VertexId) -> VertexId {
        self.vertex_map[v.0]
    }

    pub fn edge_image(&self, e: EdgeId) -> &ImageWalk {
        &self.edge_map[e.0]
    }

    /// Image length divided by edge length.
    pub fn stretch(&self, e: EdgeId) -> f64 {
        self.edge_map[e.0].length() / self.domain.edge(e).len
    }

    pub fn max_stretch(&self) -> f64 {
        self.domain.edge_ids().map(|e| self.stretch(e)).fold(0.0, f64::max)
    }

    /// Smallest constant `L` with `1/L <= stretch <= L` on every edge.
    pub fn stretch_bound(&self) -> f64 {
        self.domain
            .edge_ids()
            .map(|e| {
                let s = self.stretch(e);
                s.max(1.0 / s)
            })
            .fold(1.0, f64::max)
    }

    /// Default locality scale: half the shortest codomain edge divided by the
    /// largest stretch factor.
    pub fn default_r0(&self) -> f64 {
        let shortest = self.codomain.min_edge_length().unwrap_or(1.0);
        0.5 * shortest / self.max_stretch().max(f64::MIN_POSITIVE)
    }

    pub fn image_point(&self, p: &GraphPoint) -> GraphPoint {
        match *p {
            GraphPoint::Vertex(v) => GraphPoint::Vertex(self.vertex_map[v.0]),
            GraphPoint::Interior { edge, t } => {
                let w = &self.edge_map[edge.0];
                w.point_at(&self.codomain, t * w.length())
            }
        }
    }

    /// Image germ of the domain germ `germ` (leaving its start vertex).
    pub fn germ_image(&self, germ: Step) -> Step {
        let w = &self.edge_map[germ.edge.0];
        match germ.dir {
            Dir::Fwd => w.steps[0],
            Dir::Rev => w.steps[w.steps.len() - 1].reversed(),
        }
    }

    /// `U` composed with a domain walk, as a codomain walk.
    pub fn image_of_walk(&self, beta: &Walk) -> Walk {
        let cod = &self.codomain;
        let mut out = Vec::new();
        for seg in beta.segments() {
            let w = &self.edge_map[seg.edge.0];
            let total = w.length();
            let (l1, l2) = (seg.from * total, seg.to * total);
            let slack = tol::eps(total);
            let n = w.steps.len();
            if l1 < l2 {
                for k in 0..n {
                    let (o0, o1) = (w.offsets[k], w.offsets[k + 1]);
                    let lo = l1.max(o0);
                    let hi = l2.min(o1);
                    if hi - lo > slack {
                        out.push(Segment::new(
                            w.steps[k].edge,
                            w.param_in_step(cod, k, lo - o0),
                            w.param_in_step(cod, k, hi - o0),
                        ));
                    }
                }
            } else {
                for k in (0..n).rev() {
                    let (o0, o1) = (w.offsets[k], w.offsets[k + 1]);
                    let hi = l1.min(o1);
                    let lo = l2.max(o0);
                    if hi - lo > slack {
                        out.push(Segment::new(
                            w.steps[k].edge,
                            w.param_in_step(cod, k, hi - o0),
                            w.param_in_step(cod, k, lo - o0),
                        ));
                    }
                }
            }
        }
        Walk::new(self.image_point(&beta.start()), out)
    }

    /// Splits codomain edge `c` at `t`, rewriting every image walk through
    /// it. The domain is unchanged, so this is the same map on a finer
    /// cell structure of the codomain.
    pub fn subdivide_codomain_edge(&self, c: EdgeId, t: f64) -> GraphMap {
        let (codomain, _) = self.codomain.subdivide_edge(c, t);
        let first = codomain.edge_by_name(&format!("{}.0", self.codomain.edge(c).id)).unwrap();
        let second = codomain.edge_by_name(&format!("{}.1", self.codomain.edge(c).id)).unwrap();
        let rename = |e: EdgeId| codomain.edge_by_name(&self.codomain.edge(e).id).unwrap();
        let edge_map = self
            .edge_map
            .iter()
            .map(|w| {
                w.steps
                    .iter()
                    .flat_map(|s| {
                        if s.edge != c {
                            vec![Step::new(rename(s.edge), s.dir)]
                        } else if s.dir == Dir::Fwd {
                            vec![Step::new(first, Dir::Fwd), Step::new(second, Dir::Fwd)]
                        } else {
                            vec![Step::new(second, Dir::Rev), Step::new(first, Dir::Rev)]
                        }
                    })
                    .collect()
            })
            .collect();
        let vertex_map = self
            .vertex_map
            .iter()
            .map(|v| codomain.vertex_by_name(self.codomain.vertex_name(*v)).unwrap())
            .collect();
        GraphMap::new(self.domain.clone(), codomain, vertex_map, edge_map)
            .expect("subdivision keeps the map well formed")
    }

    /// Splits domain edge `e` at junction `k` of its image walk (between
    /// steps `k - 1` and `k`), so each half maps onto part of the old walk.
    pub fn subdivide_domain_edge(&self, e: EdgeId, k: usize) -> GraphMap {
        let w = &self.edge_map[e.0];
        assert!(k > 0 && k < w.steps.len(), "junction must be interior to the image walk");
        let t = w.offsets[k] / w.length();
        let (domain, new_vertex) = self.domain.subdivide_edge(e, t);
        let old_id = &self.domain.edge(e).id;
        let mut edge_map = vec![Vec::new(); domain.edge_count()];
        for old in self.domain.edge_ids() {
            let steps = &self.edge_map[old.0].steps;
            if old == e {
                edge_map[domain.edge_by_name(&format!("{old_id}.0")).unwrap().0] = steps[..k].to_vec();
                edge_map[domain.edge_by_name(&format!("{old_id}.1")).unwrap().0] = steps[k..].to_vec();
            } else {
                edge_map[domain.edge_by_name(&self.domain.edge(old).id).unwrap().0] = steps.clone();
            }
        }
        let mut vertex_map = vec![VertexId(0); domain.vertex_count()];
        for v in self.domain.vertex_ids() {
            let nv = domain.vertex_by_name(self.domain.vertex_name(v)).unwrap();
            vertex_map[nv.0] = self.vertex_map[v.0];
        }
        vertex_map[new_vertex.0] = self.codomain.step_start(w.steps[k]);
        GraphMap::new(domain, self.codomain.clone(), vertex_map, edge_map)
            .expect("subdivision keeps the map well formed")
    }
}

/// Structural validation: continuity, immersion of every edge, and finite
/// positive stretch. An empty list means the encoding is sound.
pub fn verify_map(m: &GraphMap) -> Vec<MapViolation> {
    let (dom, cod) = (&m.domain, &m.codomain);
    let mut out = Vec::new();
    for e in dom.edge_ids() {
        let edge = dom.edge(e);
        let id = || edge.id.clone();
        let steps = &m.edge_map[e.0].steps;
        if cod.step_start(steps[0]) != m.vertex_map[edge.a.0] {
            out.push(MapViolation::StartMismatch { edge: id() });
        }
        if cod.step_end(steps[steps.len() - 1]) != m.vertex_map[edge.b.0] {
            out.push(MapViolation::EndMismatch { edge: id() });
        }
        for (k, pair) in steps.windows(2).enumerate() {
            if cod.step_end(pair[0]) != cod.step_start(pair[1]) {
                out.push(MapViolation::Discontinuous { edge: id(), position: k });
            }
            if pair[1] == pair[0].reversed() {
                out.push(MapViolation::Backtrack { edge: id(), position: k });
            }
        }
        let stretch = m.stretch(e);
        if !(stretch.is_finite() && stretch > 0.0) {
            out.push(MapViolation::BadStretch { edge: id(), stretch });
        }
    }
    out
}

fn describe_germ(g: &MetricGraph, s: Step) -> String {
    let sign = match s.dir {
        Dir::Fwd => "",
        Dir::Rev => "~",
    };
    format!("{sign}{}", g.edge(s.edge).id)
}

/// Checks that at every domain vertex distinct germs have distinct image
/// germs. Together with immersed edges this makes the map a local
/// embedding.
pub fn local_injectivity(m: &GraphMap) -> Result<(), LocalInjectivityWitness> {
    for v in m.domain.vertex_ids() {
        let germs = m.domain.germs(v);
        for (i, g1) in germs.iter().enumerate() {
            for g2 in &germs[i + 1..] {
                let (i1, i2) = (m.germ_image(*g1), m.germ_image(*g2));
                if i1 == i2 {
                    return Err(LocalInjectivityWitness {
                        vertex: m.domain.vertex_name(v).to_string(),
                        germs: (describe_germ(&m.domain, *g1), describe_germ(&m.domain, *g2)),
                        image_germ: describe_germ(&m.codomain, i1),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Cycle of `k` unit edges `c0 -> c1 -> ... -> c0`.
    pub fn unit_cycle(prefix: &str, k: usize) -> MetricGraph {
        let mut b = MetricGraph::builder();
        for i in 0..k {
            b = b.vertex(format!("{prefix}{i}"));
        }
        for i in 0..k {
            b = b.edge_with_id(
                format!("{prefix}e{i}"),
                format!("{prefix}{i}"),
                format!("{prefix}{}", (i + 1) % k),
                1.0,
            );
        }
        b.build().unwrap()
    }

    /// `n`-fold cover of the `k`-cycle by the `n k`-cycle.
    pub fn cycle_cover(k: usize, n: usize) -> GraphMap {
        let dom = unit_cycle("d", n * k);
        let cod = unit_cycle("c", k);
        let vertex_map = (0..n * k).map(|j| VertexId(j % k)).collect();
        let edge_map = (0..n * k).map(|j| vec![Step::new(EdgeId(j % k), Dir::Fwd)]).collect();
        GraphMap::new(dom, cod, vertex_map, edge_map).unwrap()
    }

    /// Path `A - B - C` folded onto the single edge `A' - B'`.
    pub fn fold() -> GraphMap {
        let dom = MetricGraph::builder()
            .vertices(["A", "B", "C"])
            .edge("A", "B", 1.0)
            .edge("B", "C", 1.0)
            .build()
            .unwrap();
        let cod = MetricGraph::builder().vertices(["A'", "B'"]).edge("A'", "B'", 1.0).build().unwrap();
        GraphMap::new(
            dom,
            cod,
            vec![VertexId(0), VertexId(1), VertexId(0)],
            vec![vec![Step::new(EdgeId(0), Dir::Fwd)], vec![Step::new(EdgeId(0), Dir::Rev)]],
        )
        .unwrap()
    }

    /// Small tree (a star with one long arm) scaled by `factor`: the domain
    /// has edge lengths `len / factor` and maps onto the codomain tree.
    pub fn scaled_tree(factor: f64) -> GraphMap {
        let shape = [("h", "x", 1.0), ("h", "y", 2.0), ("h", "z", 1.5), ("z", "w", 1.0)];
        let mut cod = MetricGraph::builder().vertices(["h", "x", "y", "z", "w"]);
        let mut dom = MetricGraph::builder().vertices(["h", "x", "y", "z", "w"]);
        for (a, b, len) in shape {
            cod = cod.edge(a, b, len);
            dom = dom.edge(a, b, len / factor);
        }
        let (dom, cod) = (dom.build().unwrap(), cod.build().unwrap());
        let vertex_map = dom.vertex_ids().collect();
        let edge_map = dom.edge_ids().map(|e| vec![Step::new(e, Dir::Fwd)]).collect();
        GraphMap::new(dom, cod, vertex_map, edge_map).unwrap()
    }
}
