use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EdgeId, GraphError, GraphPoint, MetricGraph, Step, VertexId};
use crate::walk::{Segment, Walk};

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pred {
    /// Reached straight from the source, leaving its edge at this parameter.
    Source(f64),
    /// Reached by traversing this step.
    Step(Step),
}

/// Shortest-path tree rooted at a point of the graph.
#[derive(Clone, Debug)]
pub struct SourceDistances {
    source: GraphPoint,
    dist: Vec<f64>,
    pred: Vec<Option<Pred>>,
}

impl SourceDistances {
    pub fn new(g: &MetricGraph, source: GraphPoint) -> Result<Self, GraphError> {
        source.check(g)?;
        let n = g.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        match source {
            GraphPoint::Vertex(v) => {
                dist[v.0] = 0.0;
                heap.push(HeapItem { dist: 0.0, vertex: v.0 });
            }
            GraphPoint::Interior { edge, t } => {
                let e = g.edge(edge);
                for (v, d, exit) in [(e.a, t * e.len, 0.0), (e.b, (1.0 - t) * e.len, 1.0)] {
                    if d < dist[v.0] {
                        dist[v.0] = d;
                        pred[v.0] = Some(Pred::Source(exit));
                        heap.push(HeapItem { dist: d, vertex: v.0 });
                    }
                }
            }
        }
        while let Some(HeapItem { dist: d, vertex }) = heap.pop() {
            if d > dist[vertex] {
                continue;
            }
            for &s in g.germs(VertexId(vertex)) {
                let w = g.step_end(s);
                let nd = d + g.edge(s.edge).len;
                if nd < dist[w.0] {
                    dist[w.0] = nd;
                    pred[w.0] = Some(Pred::Step(s));
                    heap.push(HeapItem { dist: nd, vertex: w.0 });
                }
            }
        }
        Ok(SourceDistances { source, dist, pred })
    }

    pub fn source(&self) -> GraphPoint {
        self.source
    }

    /// Distances from the source to every vertex.
    pub fn vertex_distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn to_point(&self, g: &MetricGraph, q: &GraphPoint) -> f64 {
        point_distance_from_vertex_distances(g, &self.source, &self.dist, q)
    }

    /// A shortest walk from the source to `q`.
    pub fn geodesic_to(&self, g: &MetricGraph, q: &GraphPoint) -> Walk {
        let src = self.source;
        if src.approx_eq(q, g) {
            return Walk::constant(src);
        }
        enum Route {
            Direct(EdgeId, f64, f64),
            Via(VertexId, Option<Segment>),
        }
        let route = match *q {
            GraphPoint::Vertex(w) => Route::Via(w, None),
            GraphPoint::Interior { edge, t } => {
                let e = g.edge(edge);
                let via_a = self.dist[e.a.0] + t * e.len;
                let via_b = self.dist[e.b.0] + (1.0 - t) * e.len;
                let direct = match src {
                    GraphPoint::Interior { edge: se, t: st } if se == edge => {
                        Some(((st - t).abs() * e.len, st))
                    }
                    _ => None,
                };
                match direct {
                    Some((d, st)) if d <= via_a && d <= via_b => Route::Direct(edge, st, t),
                    _ if via_a <= via_b => {
                        Route::Via(e.a, Some(Segment::new(edge, 0.0, t)))
                    }
                    _ => Route::Via(e.b, Some(Segment::new(edge, 1.0, t))),
                }
            }
        };
        match route {
            Route::Direct(edge, from, to) => Walk::new(src, vec![Segment::new(edge, from, to)]),
            Route::Via(w, last) => {
                let mut steps = Vec::new();
                let mut v = w;
                let mut exit = None;
                loop {
                    match self.pred[v.0] {
                        Some(Pred::Step(s)) => {
                            steps.push(s);
                            v = g.step_start(s);
                        }
                        Some(Pred::Source(param)) => {
                            exit = Some(param);
                            break;
                        }
                        None => break,
                    }
                }
                let mut segments = Vec::with_capacity(steps.len() + 2);
                if let (Some(param), GraphPoint::Interior { edge, t }) = (exit, src) {
                    segments.push(Segment::new(edge, t, param));
                }
                segments.extend(steps.iter().rev().map(|s| Segment::full(*s)));
                segments.extend(last);
                Walk::new(src, segments)
            }
        }
    }
}

/// Distance from `p` to `q` given the distances from `p` to all vertices.
pub(crate) fn point_distance_from_vertex_distances(
    g: &MetricGraph,
    p: &GraphPoint,
    dv: &[f64],
    q: &GraphPoint,
) -> f64 {
    match *q {
        GraphPoint::Vertex(w) => dv[w.0],
        GraphPoint::Interior { edge, t } => {
            let e = g.edge(edge);
            let mut d = (dv[e.a.0] + t * e.len).min(dv[e.b.0] + (1.0 - t) * e.len);
            if let GraphPoint::Interior { edge: pe, t: pt } = *p {
                if pe == edge {
                    d = d.min((pt - t).abs() * e.len);
                }
            }
            d
        }
    }
}

/// Path-metric distance between two points of `g`.
pub fn distance(g: &MetricGraph, p: &GraphPoint, q: &GraphPoint) -> Result<f64, GraphError> {
    q.check(g)?;
    Ok(SourceDistances::new(g, *p)?.to_point(g, q))
}

/// All-pairs vertex distances; answers point-to-point queries in constant
/// time.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    n: usize,
    d: Vec<f64>,
}

impl DistanceTable {
    /// One Dijkstra run per vertex.
    pub fn new(g: &MetricGraph) -> Self {
        let n = g.vertex_count();
        let mut d = Vec::with_capacity(n * n);
        for v in g.vertex_ids() {
            let sd = SourceDistances::new(g, GraphPoint::Vertex(v)).expect("vertex on graph");
            d.extend_from_slice(sd.vertex_distances());
        }
        DistanceTable { n, d }
    }

    /// Floyd–Warshall. Independent of the Dijkstra route; used where a
    /// cross-check must not share code with the main path.
    pub fn floyd_warshall(g: &MetricGraph) -> Self {
        let n = g.vertex_count();
        let mut d = vec![f64::INFINITY; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        for e in g.edges() {
            let (a, b) = (e.a.0, e.b.0);
            if e.len < d[a * n + b] {
                d[a * n + b] = e.len;
                d[b * n + a] = e.len;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + d[k * n + j];
                    if cand < d[i * n + j] {
                        d[i * n + j] = cand;
                    }
                }
            }
        }
        DistanceTable { n, d }
    }

    #[inline]
    pub fn vertices(&self, a: VertexId, b: VertexId) -> f64 {
        self.d[a.0 * self.n + b.0]
    }

    /// Distance between arbitrary points.
    pub fn between(&self, g: &MetricGraph, p: &GraphPoint, q: &GraphPoint) -> f64 {
        let pa = p.anchors(g);
        let qa = q.anchors(g);
        let mut best = f64::INFINITY;
        for &(u, du) in &pa {
            for &(w, dw) in &qa {
                best = best.min(du + self.vertices(u, w) + dw);
            }
        }
        if let (GraphPoint::Interior { edge: e1, t: t1 }, GraphPoint::Interior { edge: e2, t: t2 }) =
            (*p, *q)
        {
            if e1 == e2 {
                best = best.min((t1 - t2).abs() * g.edge(e1).len);
            }
        }
        best
    }

    /// Distances from `p` to every vertex.
    pub fn from_point(&self, g: &MetricGraph, p: &GraphPoint) -> Vec<f64> {
        let [(a, da), (b, db)] = p.anchors(g);
        (0..self.n)
            .map(|w| (da + self.d[a.0 * self.n + w]).min(db + self.d[b.0 * self.n + w]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MetricGraph {
        MetricGraph::builder()
            .vertices(["a", "b", "c"])
            .edge("a", "b", 1.0)
            .edge("b", "c", 1.0)
            .edge("c", "a", 3.0)
            .build()
            .unwrap()
    }

    #[test]
    fn single_edge_and_identity() {
        let g = MetricGraph::builder().vertices(["A", "B"]).edge("A", "B", 2.0).build().unwrap();
        let (a, b) = (GraphPoint::Vertex(VertexId(0)), GraphPoint::Vertex(VertexId(1)));
        assert_eq!(distance(&g, &a, &b).unwrap(), 2.0);
        let mid = GraphPoint::on_edge(&g, EdgeId(0), 0.3);
        assert_eq!(distance(&g, &mid, &mid).unwrap(), 0.0);
    }

    #[test]
    fn triangle_goes_around_the_long_side() {
        let g = triangle();
        let d = distance(&g, &GraphPoint::Vertex(VertexId(2)), &GraphPoint::Vertex(VertexId(0)));
        assert_eq!(d.unwrap(), 2.0);
        let long_mid = GraphPoint::on_edge(&g, EdgeId(2), 0.5);
        let d = distance(&g, &long_mid, &GraphPoint::Vertex(VertexId(1))).unwrap();
        assert!((d - 2.5).abs() < 1e-12);
    }

    #[test]
    fn table_agrees_with_dijkstra_and_floyd() {
        let g = triangle();
        let t = DistanceTable::new(&g);
        let f = DistanceTable::floyd_warshall(&g);
        let pts = [
            GraphPoint::Vertex(VertexId(0)),
            GraphPoint::on_edge(&g, EdgeId(0), 0.25),
            GraphPoint::on_edge(&g, EdgeId(2), 0.1),
            GraphPoint::on_edge(&g, EdgeId(2), 0.9),
        ];
        for p in &pts {
            for q in &pts {
                let d = distance(&g, p, q).unwrap();
                assert!((t.between(&g, p, q) - d).abs() < 1e-12);
                assert!((f.between(&g, p, q) - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geodesics_have_distance_length() {
        let g = triangle();
        let p = GraphPoint::on_edge(&g, EdgeId(2), 0.1);
        let sd = SourceDistances::new(&g, p).unwrap();
        for q in [
            GraphPoint::on_edge(&g, EdgeId(2), 0.9),
            GraphPoint::on_edge(&g, EdgeId(1), 0.5),
            GraphPoint::Vertex(VertexId(1)),
            p,
        ] {
            let w = sd.geodesic_to(&g, &q);
            w.validate(&g).unwrap();
            assert!(w.start().approx_eq(&p, &g));
            assert!(w.end(&g).approx_eq(&q, &g));
            assert!((w.length(&g) - sd.to_point(&g, &q)).abs() < 1e-12);
        }
    }

    #[test]
    fn self_loop_distances() {
        let g = MetricGraph::builder().vertex("o").edge("o", "o", 4.0).build().unwrap();
        let p = GraphPoint::on_edge(&g, EdgeId(0), 0.1);
        let q = GraphPoint::on_edge(&g, EdgeId(0), 0.9);
        assert!((distance(&g, &p, &q).unwrap() - 0.8).abs() < 1e-12);
        let r = GraphPoint::on_edge(&g, EdgeId(0), 0.5);
        assert!((distance(&g, &p, &r).unwrap() - 1.6).abs() < 1e-12);
    }
}
