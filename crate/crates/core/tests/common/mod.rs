#![allow(dead_code)]

use bilip::graph::{Dir, EdgeId, GraphPoint, MetricGraph, Step, VertexId};
use bilip::walk::{Segment, Walk};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};

/// Connected graph from a spanning-tree parent list plus extra chords.
pub fn graph_from(parents: &[(usize, f64)], chords: &[(usize, usize, f64)]) -> MetricGraph {
    let n = parents.len() + 1;
    let mut b = MetricGraph::builder().vertices((0..n).map(|i| format!("v{i}")));
    for (i, &(p, len)) in parents.iter().enumerate() {
        b = b.edge(format!("v{}", p % (i + 1)), format!("v{}", i + 1), len);
    }
    for &(a, c, len) in chords {
        b = b.edge(format!("v{}", a % n), format!("v{}", c % n), len);
    }
    b.build().expect("generated graph is valid")
}

pub fn arb_graph() -> impl Strategy<Value = MetricGraph> {
    (1usize..7)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((0usize..64, 0.1f64..3.0), n),
                prop::collection::vec((0usize..64, 0usize..64, 0.1f64..3.0), 0..4),
            )
        })
        .prop_map(|(parents, chords)| graph_from(&parents, &chords))
}

pub fn arb_tree() -> impl Strategy<Value = MetricGraph> {
    prop::collection::vec((0usize..64, 0.1f64..3.0), 1..8).prop_map(|p| graph_from(&p, &[]))
}

/// Point selected by an arbitrary index and parameter.
pub fn pick_point(g: &MetricGraph, sel: usize, t: f64) -> GraphPoint {
    let ne = g.edge_count();
    if sel.is_multiple_of(3) {
        GraphPoint::Vertex(VertexId(sel / 3 % g.vertex_count()))
    } else {
        GraphPoint::on_edge(g, EdgeId(sel % ne), t)
    }
}

pub fn random_point<R: Rng>(g: &MetricGraph, rng: &mut R) -> GraphPoint {
    let e = EdgeId(rng.random_range(0..g.edge_count()));
    GraphPoint::on_edge(g, e, rng.random_range(0.02..0.98))
}

/// Brute-force distance: every edge carrying `p` or `q` is split at those
/// points, then Floyd-Warshall on the resulting weighted graph.
pub fn oracle_distance(g: &MetricGraph, p: &GraphPoint, q: &GraphPoint) -> f64 {
    let n = g.vertex_count();
    let mut extra: Vec<(EdgeId, f64)> = Vec::new();
    let node_of = |pt: &GraphPoint, extra: &mut Vec<(EdgeId, f64)>| match *pt {
        GraphPoint::Vertex(v) => v.0,
        GraphPoint::Interior { edge, t } => {
            extra.push((edge, t));
            n + extra.len() - 1
        }
    };
    let ip = node_of(p, &mut extra);
    let iq = node_of(q, &mut extra);
    let total = n + extra.len();
    let mut d = vec![vec![f64::INFINITY; total]; total];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let link = |d: &mut Vec<Vec<f64>>, a: usize, b: usize, w: f64| {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    };
    for e in g.edge_ids() {
        let edge = g.edge(e);
        let mut stops: Vec<(f64, usize)> = vec![(0.0, edge.a.0), (1.0, edge.b.0)];
        for (k, &(ee, t)) in extra.iter().enumerate() {
            if ee == e {
                stops.push((t, n + k));
            }
        }
        stops.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in stops.windows(2) {
            link(&mut d, w[0].1, w[1].1, (w[1].0 - w[0].0) * edge.len);
        }
    }
    for k in 0..total {
        for i in 0..total {
            for j in 0..total {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d[ip][iq]
}

/// Measure of `{x : d(center, x) <= r}` by a midpoint rule with `m` cells
/// per edge, each cell distance taken from the brute-force oracle.
pub fn oracle_ball_volume(g: &MetricGraph, center: &GraphPoint, r: f64, m: usize) -> f64 {
    let mut vol = 0.0;
    for e in g.edge_ids() {
        let len = g.edge(e).len;
        for i in 0..m {
            let t = (i as f64 + 0.5) / m as f64;
            let x = GraphPoint::Interior { edge: e, t };
            if oracle_distance(g, center, &x) <= r {
                vol += len / m as f64;
            }
        }
    }
    vol
}

/// Point at arclength `s` along `w`.
pub fn point_on_walk(g: &MetricGraph, w: &Walk, s: f64) -> GraphPoint {
    let mut acc = 0.0;
    for seg in w.segments() {
        let len = seg.len(g);
        if s <= acc + len {
            let frac = if len > 0.0 { (s - acc) / len } else { 0.0 };
            return GraphPoint::on_edge(g, seg.edge, seg.from + frac * (seg.to - seg.from));
        }
        acc += len;
    }
    w.end(g)
}

/// Random walk of `steps` full edges from vertex `v`; with `partial` the
/// walk may start and end inside an edge.
pub fn random_walk<R: RngCore>(g: &MetricGraph, v: VertexId, steps: usize, partial: bool, rng: &mut R) -> Walk {
    let mut segs = Vec::new();
    let mut start = GraphPoint::Vertex(v);
    let mut at = v;
    if partial && rng.random_bool(0.5) {
        let s = *g.germs(v).choose(rng).expect("connected graph");
        let t0 = rng.random_range(0.05..0.95);
        let (from, to) = match s.dir {
            Dir::Fwd => (t0, 1.0),
            Dir::Rev => (1.0 - t0, 0.0),
        };
        start = GraphPoint::on_edge(g, s.edge, from);
        segs.push(Segment::new(s.edge, from, to));
        at = g.step_end(s);
    }
    for _ in 0..steps {
        let s: Step = *g.germs(at).choose(rng).expect("connected graph");
        segs.push(Segment::full(s));
        at = g.step_end(s);
    }
    if partial && rng.random_bool(0.5) {
        let s = *g.germs(at).choose(rng).expect("connected graph");
        let t = rng.random_range(0.05..0.95);
        let seg = match s.dir {
            Dir::Fwd => Segment::new(s.edge, 0.0, t),
            Dir::Rev => Segment::new(s.edge, 1.0, 1.0 - t),
        };
        segs.push(seg);
    }
    Walk::new(start, segs)
}
