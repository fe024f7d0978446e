use super::{EdgeId, GraphError, MetricGraph, VertexId};
use crate::tol;

/// A point of a metric graph: a vertex, or an interior point of an edge at
/// fractional position `t` in `(0, 1)` measured from the edge's `a` end.
///
/// Use [`GraphPoint::on_edge`] to build interior points; it snaps
/// parameters within tolerance of `0` or `1` to the vertex form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphPoint {
    Vertex(VertexId),
    Interior { edge: EdgeId, t: f64 },
}

impl GraphPoint {
    pub fn on_edge(g: &MetricGraph, edge: EdgeId, t: f64) -> GraphPoint {
        let e = g.edge(edge);
        let slack = tol::eps(1.0);
        if t <= slack {
            GraphPoint::Vertex(e.a)
        } else if t >= 1.0 - slack {
            GraphPoint::Vertex(e.b)
        } else {
            GraphPoint::Interior { edge, t }
        }
    }

    /// Point at arclength `s` from the `a` end of `edge`.
    pub fn at_length(g: &MetricGraph, edge: EdgeId, s: f64) -> GraphPoint {
        Self::on_edge(g, edge, s / g.edge(edge).len)
    }

    pub fn as_vertex(&self) -> Option<VertexId> {
        match self {
            GraphPoint::Vertex(v) => Some(*v),
            GraphPoint::Interior { .. } => None,
        }
    }

    pub fn check(&self, g: &MetricGraph) -> Result<(), GraphError> {
        let ok = match *self {
            GraphPoint::Vertex(v) => v.0 < g.vertex_count(),
            GraphPoint::Interior { edge, t } => edge.0 < g.edge_count() && t > 0.0 && t < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(GraphError::PointNotOnGraph)
        }
    }

    /// Vertices bounding the cell that contains the point together with the
    /// arclength from the point to each.
    pub(crate) fn anchors(&self, g: &MetricGraph) -> [(VertexId, f64); 2] {
        match *self {
            GraphPoint::Vertex(v) => [(v, 0.0), (v, 0.0)],
            GraphPoint::Interior { edge, t } => {
                let e = g.edge(edge);
                [(e.a, t * e.len), (e.b, (1.0 - t) * e.len)]
            }
        }
    }

    /// Parameter of this point along edge `e`, if it lies on the closed
    /// edge. A vertex that is both ends of a self-loop reports `0`.
    pub fn param_on(&self, g: &MetricGraph, e: EdgeId) -> Option<f64> {
        match *self {
            GraphPoint::Interior { edge, t } => (edge == e).then_some(t),
            GraphPoint::Vertex(v) => {
                let edge = g.edge(e);
                if edge.a == v {
                    Some(0.0)
                } else if edge.b == v {
                    Some(1.0)
                } else {
                    None
                }
            }
        }
    }

    /// Equality up to the crate tolerance, measured in arclength.
    pub fn approx_eq(&self, other: &GraphPoint, g: &MetricGraph) -> bool {
        use GraphPoint::*;
        match (*self, *other) {
            (Vertex(v), Vertex(w)) => v == w,
            (Vertex(v), Interior { edge, t }) | (Interior { edge, t }, Vertex(v)) => {
                let e = g.edge(edge);
                let slack = tol::eps(e.len);
                (e.a == v && t * e.len <= slack) || (e.b == v && (1.0 - t) * e.len <= slack)
            }
            (Interior { edge: e1, t: t1 }, Interior { edge: e2, t: t2 }) => {
                e1 == e2 && (t1 - t2).abs() * g.edge(e1).len <= tol::eps(g.edge(e1).len)
            }
        }
    }

    /// Human readable form using the graph's ids.
    pub fn describe(&self, g: &MetricGraph) -> String {
        match *self {
            GraphPoint::Vertex(v) => g.vertex_name(v).to_string(),
            GraphPoint::Interior { edge, t } => format!("{}@{}", g.edge(edge).id, t),
        }
    }
}
