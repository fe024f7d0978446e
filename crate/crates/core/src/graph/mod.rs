//! Weighted multigraphs carrying the path metric and the length measure.
//!
//! A [`MetricGraph`] is a finite connected multigraph whose edges are
//! isometric copies of real intervals. With the induced path metric it is a
//! complete, locally compact path-metric space, and the one-dimensional
//! length measure turns it into a metric measure space. Self-loops and
//! parallel edges are allowed.
//!
//! Vertices may carry a *boundary marker*. Markers have no metric effect;
//! they flag the places where a conceptually infinite space was truncated
//! so that lifting can report when a lift runs off the model.

mod ball;
mod distance;
mod point;

pub use ball::{ahlfors_constant, ball, AhlforsEstimate, BallRegion, BallSegment, Net};
pub use distance::{distance, DistanceTable, SourceDistances};
pub(crate) use distance::point_distance_from_vertex_distances;
pub use point::GraphPoint;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Direction of travel along an edge relative to its `a -> b` orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Fwd,
    Rev,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Fwd => Dir::Rev,
            Dir::Rev => Dir::Fwd,
        }
    }
}

/// A full traversal of one edge, also used as the germ of a walk leaving a
/// vertex along that edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub edge: EdgeId,
    pub dir: Dir,
}

impl Step {
    pub fn new(edge: EdgeId, dir: Dir) -> Self {
        Step { edge, dir }
    }

    pub fn reversed(self) -> Step {
        Step { edge: self.edge, dir: self.dir.flip() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: String,
    pub a: VertexId,
    pub b: VertexId,
    pub len: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.a == self.b
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("boundary marker references unknown vertex `{0}`")]
    UnknownBoundaryVertex(String),
    #[error("edge `{edge}` has invalid length {len}; lengths must be finite and > 0")]
    InvalidLength { edge: String, len: f64 },
    #[error("graph is not connected: vertex `{0}` is unreachable")]
    Disconnected(String),
    #[error("point is not on the graph")]
    PointNotOnGraph,
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("radius {0} is not positive")]
    NonpositiveRadius(f64),
}

/// Incrementally assembles a [`MetricGraph`]; validation happens in
/// [`GraphBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<String>,
    edges: Vec<(String, String, String, f64)>,
    boundary: Vec<String>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: impl Into<String>) -> Self {
        self.vertices.push(id.into());
        self
    }

    pub fn vertices<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.vertices.extend(ids.into_iter().map(Into::into));
        self
    }

    /// Adds an edge with an explicit id.
    pub fn edge_with_id(
        mut self,
        id: impl Into<String>,
        a: impl Into<String>,
        b: impl Into<String>,
        len: f64,
    ) -> Self {
        self.edges.push((id.into(), a.into(), b.into(), len));
        self
    }

    /// Adds an edge named `e<k>` where `k` is its position.
    pub fn edge(self, a: impl Into<String>, b: impl Into<String>, len: f64) -> Self {
        let id = format!("e{}", self.edges.len());
        self.edge_with_id(id, a, b, len)
    }

    pub fn boundary(mut self, id: impl Into<String>) -> Self {
        self.boundary.push(id.into());
        self
    }

    pub fn build(self) -> Result<MetricGraph, GraphError> {
        if self.vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut vertex_index = HashMap::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), VertexId(i)).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let mut edge_index = HashMap::with_capacity(self.edges.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, (id, a, b, len)) in self.edges.into_iter().enumerate() {
            if !(len.is_finite() && len > 0.0) {
                return Err(GraphError::InvalidLength { edge: id, len });
            }
            let lookup = |v: &String| {
                vertex_index.get(v).copied().ok_or_else(|| GraphError::UnknownVertex {
                    edge: id.clone(),
                    vertex: v.clone(),
                })
            };
            let (a, b) = (lookup(&a)?, lookup(&b)?);
            if edge_index.insert(id.clone(), EdgeId(i)).is_some() {
                return Err(GraphError::DuplicateEdge(id));
            }
            edges.push(Edge { id, a, b, len });
        }
        let mut boundary = vec![false; self.vertices.len()];
        for v in &self.boundary {
            let idx = vertex_index
                .get(v)
                .ok_or_else(|| GraphError::UnknownBoundaryVertex(v.clone()))?;
            boundary[idx.0] = true;
        }

        let mut incidence = vec![Vec::new(); self.vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.a.0].push(Step::new(EdgeId(i), Dir::Fwd));
            incidence[e.b.0].push(Step::new(EdgeId(i), Dir::Rev));
        }

        let graph = MetricGraph {
            vertex_names: self.vertices,
            vertex_index,
            edges,
            edge_index,
            boundary,
            incidence,
        };
        if let Some(v) = graph.first_unreachable_vertex() {
            return Err(GraphError::Disconnected(graph.vertex_name(v).to_string()));
        }
        Ok(graph)
    }
}

/// Finite connected weighted multigraph with the path metric and length
/// measure. Immutable once built.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    vertex_names: Vec<String>,
    vertex_index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    edge_index: HashMap<String, EdgeId>,
    boundary: Vec<bool>,
    /// Germs leaving each vertex. A self-loop contributes two germs.
    incidence: Vec<Vec<Step>>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_names == other.vertex_names
            && self.edges == other.edges
            && self.boundary == other.boundary
    }
}

impl MetricGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_names.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v.0]
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids().filter(|v| self.boundary[v.0])
    }

    /// Germs leaving `v`.
    pub fn germs(&self, v: VertexId) -> &[Step] {
        &self.incidence[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    pub fn step_start(&self, s: Step) -> VertexId {
        let e = self.edge(s.edge);
        match s.dir {
            Dir::Fwd => e.a,
            Dir::Rev => e.b,
        }
    }

    pub fn step_end(&self, s: Step) -> VertexId {
        self.step_start(s.reversed())
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.len).sum()
    }

    pub fn min_edge_length(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.len).min_by(f64::total_cmp)
    }

    /// Dimension of the cycle space, `|E| - |V| + 1`. Zero exactly when the
    /// graph is a tree, i.e. simply connected.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + 1 - self.vertex_names.len()
    }

    /// Splits edge `e` at parameter `t` into two edges meeting at a new
    /// vertex. Edge ids become `<id>.0` and `<id>.1`; the new vertex is
    /// `<id>@<t>`. Returns the new graph and the new vertex.
    pub fn subdivide_edge(&self, e: EdgeId, t: f64) -> (MetricGraph, VertexId) {
        assert!(t > 0.0 && t < 1.0, "subdivision parameter must lie in (0,1)");
        let old = self.edge(e);
        let new_vertex = format!("{}@{}", old.id, t);
        let mut b = GraphBuilder::new().vertices(self.vertex_names.iter().cloned());
        b = b.vertex(new_vertex.clone());
        for (i, edge) in self.edges.iter().enumerate() {
            let a = self.vertex_name(edge.a).to_string();
            let bb = self.vertex_name(edge.b).to_string();
            if i == e.0 {
                b = b
                    .edge_with_id(format!("{}.0", edge.id), a, new_vertex.clone(), t * edge.len)
                    .edge_with_id(
                        format!("{}.1", edge.id),
                        new_vertex.clone(),
                        bb,
                        (1.0 - t) * edge.len,
                    );
            } else {
                b = b.edge_with_id(edge.id.clone(), a, bb, edge.len);
            }
        }
        for v in self.boundary_vertices() {
            b = b.boundary(self.vertex_name(v).to_string());
        }
        let g = b.build().expect("subdivision preserves validity");
        let v = g.vertex_by_name(&new_vertex).expect("new vertex present");
        (g, v)
    }

    fn first_unreachable_vertex(&self) -> Option<VertexId> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([VertexId(0)]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for s in self.germs(v) {
                let w = self.step_end(*s);
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s).map(VertexId)
    }
}

/// Free-function form of [`MetricGraph::cycle_rank`].
pub fn cycle_rank(g: &MetricGraph) -> usize {
    g.cycle_rank()
}
