use serde::Serialize;

use super::distance::point_distance_from_vertex_distances;
use super::{EdgeId, GraphError, GraphPoint, MetricGraph, SourceDistances, VertexId};

/// A maximal piece `[lo, hi]` of one edge inside a ball, in arclength
/// measured from the edge's `a` end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallSegment {
    pub edge: EdgeId,
    pub lo: f64,
    pub hi: f64,
}

impl BallSegment {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

/// The ball `B(center, radius)` as a union of edge pieces.
#[derive(Clone, Debug)]
pub struct BallRegion {
    pub center: GraphPoint,
    pub radius: f64,
    pub segments: Vec<BallSegment>,
    pub volume: f64,
}

impl BallRegion {
    pub fn contains(&self, g: &MetricGraph, p: &GraphPoint) -> bool {
        match *p {
            GraphPoint::Vertex(v) => self.segments.iter().any(|s| {
                let e = g.edge(s.edge);
                (e.a == v && s.lo <= 0.0) || (e.b == v && s.hi >= e.len)
            }),
            GraphPoint::Interior { edge, t } => {
                let x = t * g.edge(edge).len;
                self.segments.iter().any(|s| s.edge == edge && s.lo <= x && x <= s.hi)
            }
        }
    }
}

/// Pieces of each edge within distance `r` of `center`, where `dv` holds
/// the distances from `center` to every vertex.
///
/// Along an edge the distance to the center is the minimum of at most three
/// linear functions, so each piece is found in closed form.
pub(crate) fn ball_segments(
    g: &MetricGraph,
    center: &GraphPoint,
    dv: &[f64],
    r: f64,
) -> Vec<BallSegment> {
    let mut out = Vec::new();
    if r <= 0.0 {
        return out;
    }
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(3);
    for (i, e) in g.edges().iter().enumerate() {
        let edge = EdgeId(i);
        pieces.clear();
        let (da, db) = (dv[e.a.0], dv[e.b.0]);
        if da < r {
            pieces.push((0.0, (r - da).min(e.len)));
        }
        if db < r {
            pieces.push(((e.len - (r - db)).max(0.0), e.len));
        }
        if let GraphPoint::Interior { edge: ce, t } = *center {
            if ce == edge {
                let c = t * e.len;
                pieces.push(((c - r).max(0.0), (c + r).min(e.len)));
            }
        }
        if pieces.is_empty() {
            continue;
        }
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut cur = pieces[0];
        for &(lo, hi) in &pieces[1..] {
            if lo <= cur.1 {
                cur.1 = cur.1.max(hi);
            } else {
                out.push(BallSegment { edge, lo: cur.0, hi: cur.1 });
                cur = (lo, hi);
            }
        }
        out.push(BallSegment { edge, lo: cur.0, hi: cur.1 });
    }
    out.retain(|s| !s.is_empty());
    out
}

/// The ball `B(center, r)` with its exact length measure.
pub fn ball(g: &MetricGraph, center: &GraphPoint, r: f64) -> Result<BallRegion, GraphError> {
    let sd = SourceDistances::new(g, *center)?;
    let r = r.max(0.0);
    let segments = ball_segments(g, center, sd.vertex_distances(), r);
    let volume = segments.iter().map(BallSegment::len).sum();
    Ok(BallRegion { center: *center, radius: r, segments, volume })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AhlforsEstimate {
    /// Smallest `C >= 1` with `C^-1 r^q <= mu(B(x,r)) <= C r^q` over the
    /// probed centers and radii.
    pub constant: f64,
    pub worst_center: usize,
    pub worst_radius: f64,
}

/// Ahlfors regularity constant of `g` probed at `samples` x `radii`.
pub fn ahlfors_constant(
    g: &MetricGraph,
    q: f64,
    radii: &[f64],
    samples: &[GraphPoint],
) -> Result<AhlforsEstimate, GraphError> {
    if samples.is_empty() || radii.is_empty() {
        return Err(GraphError::EmptySampleSet);
    }
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(GraphError::NonpositiveRadius(r));
    }
    let mut best = AhlforsEstimate { constant: 1.0, worst_center: 0, worst_radius: radii[0] };
    for (i, x) in samples.iter().enumerate() {
        let sd = SourceDistances::new(g, *x)?;
        for &r in radii {
            let volume: f64 = ball_segments(g, x, sd.vertex_distances(), r)
                .iter()
                .map(BallSegment::len)
                .sum();
            let scale = r.powf(q);
            let ratio = (scale / volume).max(volume / scale);
            if ratio > best.constant {
                best = AhlforsEstimate { constant: ratio, worst_center: i, worst_radius: r };
            }
        }
    }
    Ok(best)
}

/// Finite net of a graph: every vertex plus evenly spaced interior points
/// on each edge with spacing at most `mesh`.
#[derive(Clone, Debug)]
pub struct Net {
    mesh: f64,
    points: Vec<GraphPoint>,
    /// Per edge: index of its first interior point and the number of
    /// subintervals `k` (so `k - 1` interior points at `j / k`).
    slots: Vec<(usize, usize)>,
}

impl Net {
    pub fn new(g: &MetricGraph, mesh: f64) -> Net {
        assert!(mesh > 0.0, "mesh must be positive");
        let mut points: Vec<GraphPoint> = g.vertex_ids().map(GraphPoint::Vertex).collect();
        let mut slots = Vec::with_capacity(g.edge_count());
        for (i, e) in g.edges().iter().enumerate() {
            let k = ((e.len / mesh).ceil() as usize).max(1);
            slots.push((points.len(), k));
            for j in 1..k {
                points.push(GraphPoint::Interior { edge: EdgeId(i), t: j as f64 / k as f64 });
            }
        }
        Net { mesh, points, slots }
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn points(&self) -> &[GraphPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of net points `p` with `d(center, p) < r`. `dv` holds the
    /// distances from `center` to every vertex.
    pub fn members_in_ball(
        &self,
        g: &MetricGraph,
        center: &GraphPoint,
        dv: &[f64],
        r: f64,
    ) -> Vec<usize> {
        let mut out: Vec<usize> =
            (0..g.vertex_count()).filter(|&v| dv[v] < r).collect();
        for seg in ball_segments(g, center, dv, r) {
            let (first, k) = self.slots[seg.edge.0];
            if k < 2 {
                continue;
            }
            let len = g.edge(seg.edge).len;
            let lo = ((seg.lo / len * k as f64).ceil() as usize).max(1);
            let hi = ((seg.hi / len * k as f64).floor() as usize).min(k - 1);
            for j in lo..=hi {
                let idx = first + j - 1;
                if point_distance_from_vertex_distances(g, center, dv, &self.points[idx]) < r {
                    out.push(idx);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Vertices first, then interior points edge by edge.
    pub fn vertex_index(&self, v: VertexId) -> usize {
        v.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn long_path() -> MetricGraph {
        let mut b = MetricGraph::builder();
        for i in 0..=10 {
            b = b.vertex(format!("p{i}"));
        }
        for i in 0..10 {
            b = b.edge(format!("p{i}"), format!("p{}", i + 1), 1.0);
        }
        b.build().unwrap()
    }

    #[test]
    fn zero_radius_is_empty() {
        let g = long_path();
        let b = ball(&g, &GraphPoint::Vertex(VertexId(3)), 0.0).unwrap();
        assert!(b.segments.is_empty());
        assert_eq!(b.volume, 0.0);
    }

    #[test]
    fn interior_ball_on_path() {
        let g = long_path();
        let x = GraphPoint::on_edge(&g, EdgeId(4), 0.5);
        let b = ball(&g, &x, 0.3).unwrap();
        assert!((b.volume - 0.6).abs() < 1e-12);
        let b = ball(&g, &x, 1.7).unwrap();
        assert!((b.volume - 3.4).abs() < 1e-12);
        assert!(b.contains(&g, &GraphPoint::Vertex(VertexId(4))));
        assert!(!b.contains(&g, &GraphPoint::Vertex(VertexId(7))));
    }

    #[test]
    fn ahlfors_rejects_bad_input() {
        let g = long_path();
        let x = [GraphPoint::Vertex(VertexId(1))];
        assert_eq!(ahlfors_constant(&g, 1.0, &[0.5], &[]), Err(GraphError::EmptySampleSet));
        assert_eq!(ahlfors_constant(&g, 1.0, &[0.0], &x), Err(GraphError::NonpositiveRadius(0.0)));
        assert_eq!(
            ahlfors_constant(&g, 1.0, &[-1.0], &x),
            Err(GraphError::NonpositiveRadius(-1.0))
        );
    }

    #[test]
    fn net_spacing_and_ball_members() {
        let g = long_path();
        let net = Net::new(&g, 0.3);
        // ceil(1/0.3) = 4 subintervals, 3 interior points per edge
        assert_eq!(net.len(), 11 + 10 * 3);
        let x = GraphPoint::Vertex(VertexId(5));
        let sd = SourceDistances::new(&g, x).unwrap();
        let members = net.members_in_ball(&g, &x, sd.vertex_distances(), 0.6);
        // the vertex itself plus points at distance 0.25 and 0.5 on both sides
        assert_eq!(members.len(), 5);
    }
}
