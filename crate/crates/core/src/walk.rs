//! Finite walks on a metric graph.
//!
//! A walk is a start point and a list of segments, each running along a
//! single edge between two parameters. Consecutive segments share an
//! endpoint. The empty walk is the constant path at its start.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{Dir, EdgeId, GraphPoint, MetricGraph, Step};
use crate::tol;

/// Part of one edge traversed from parameter `from` to parameter `to`
/// (fractions of the edge length in the edge's own orientation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub edge: EdgeId,
    pub from: f64,
    pub to: f64,
}

impl Segment {
    pub fn new(edge: EdgeId, from: f64, to: f64) -> Self {
        Segment { edge, from, to }
    }

    /// The whole edge traversed in the step's direction.
    pub fn full(step: Step) -> Self {
        match step.dir {
            Dir::Fwd => Segment::new(step.edge, 0.0, 1.0),
            Dir::Rev => Segment::new(step.edge, 1.0, 0.0),
        }
    }

    pub fn dir(&self) -> Dir {
        if self.to >= self.from {
            Dir::Fwd
        } else {
            Dir::Rev
        }
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.edge, self.to, self.from)
    }

    pub fn len(&self, g: &MetricGraph) -> f64 {
        (self.to - self.from).abs() * g.edge(self.edge).len
    }

    pub fn start_point(&self, g: &MetricGraph) -> GraphPoint {
        GraphPoint::on_edge(g, self.edge, self.from)
    }

    pub fn end_point(&self, g: &MetricGraph) -> GraphPoint {
        GraphPoint::on_edge(g, self.edge, self.to)
    }

    pub fn approx_eq(&self, other: &Segment, g: &MetricGraph) -> bool {
        let slack = tol::eps(g.edge(self.edge).len) / g.edge(self.edge).len;
        self.edge == other.edge
            && (self.from - other.from).abs() <= slack
            && (self.to - other.to).abs() <= slack
    }

    /// Whether `other` retraces this segment backwards.
    pub fn is_reversed_by(&self, other: &Segment, g: &MetricGraph) -> bool {
        self.reversed().approx_eq(other, g)
    }

    /// The germ with which the segment leaves its start point.
    pub fn germ(&self) -> Step {
        Step::new(self.edge, self.dir())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("segment {0} is degenerate or has parameters outside [0, 1]")]
    InvalidSegment(usize),
    #[error("segment {0} does not start where the walk currently is")]
    Discontinuous(usize),
    #[error("start point is not on the graph")]
    BadStart,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Walk {
    start: GraphPoint,
    segments: Vec<Segment>,
}

impl Walk {
    pub fn new(start: GraphPoint, segments: Vec<Segment>) -> Self {
        Walk { start, segments }
    }

    pub fn constant(p: GraphPoint) -> Self {
        Walk { start: p, segments: Vec::new() }
    }

    /// Walk along whole edges starting at the start vertex of `steps[0]`.
    pub fn from_steps(g: &MetricGraph, steps: &[Step]) -> Option<Self> {
        let first = steps.first()?;
        Some(Walk::new(
            GraphPoint::Vertex(g.step_start(*first)),
            steps.iter().map(|s| Segment::full(*s)).collect(),
        ))
    }

    pub fn start(&self) -> GraphPoint {
        self.start
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }

    pub fn is_constant(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn end(&self, g: &MetricGraph) -> GraphPoint {
        self.point_before(g, self.segments.len())
    }

    /// The point where segment `i` starts (`i == len` gives the end).
    pub fn point_before(&self, g: &MetricGraph, i: usize) -> GraphPoint {
        if i == 0 {
            self.start
        } else {
            self.segments[i - 1].end_point(g)
        }
    }

    pub fn length(&self, g: &MetricGraph) -> f64 {
        self.segments.iter().map(|s| s.len(g)).sum()
    }

    pub fn is_loop(&self, g: &MetricGraph) -> bool {
        self.start.approx_eq(&self.end(g), g)
    }

    pub fn validate(&self, g: &MetricGraph) -> Result<(), WalkError> {
        self.start.check(g).map_err(|_| WalkError::BadStart)?;
        let mut at = self.start;
        for (i, s) in self.segments.iter().enumerate() {
            let in_range = |t: f64| (0.0..=1.0).contains(&t);
            if s.edge.0 >= g.edge_count()
                || !in_range(s.from)
                || !in_range(s.to)
                || s.len(g) <= tol::eps(g.edge(s.edge).len)
            {
                return Err(WalkError::InvalidSegment(i));
            }
            if !s.start_point(g).approx_eq(&at, g) {
                return Err(WalkError::Discontinuous(i));
            }
            at = s.end_point(g);
        }
        Ok(())
    }

    pub fn reversed(&self, g: &MetricGraph) -> Walk {
        Walk {
            start: self.end(g),
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Walk) -> Walk {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        Walk { start: self.start, segments }
    }

    /// Normal form up to reparametrization: drops negligible segments and
    /// merges consecutive pieces that continue along the same edge in the
    /// same direction.
    pub fn canonical(&self, g: &MetricGraph) -> Walk {
        let mut out: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            if s.len(g) <= tol::eps(g.edge(s.edge).len) {
                continue;
            }
            if let Some(last) = out.last_mut() {
                let slack = tol::eps(1.0);
                if last.edge == s.edge && last.dir() == s.dir() && (last.to - s.from).abs() <= slack {
                    last.to = s.to;
                    continue;
                }
            }
            out.push(*s);
        }
        Walk { start: self.start, segments: out }
    }

    /// Segment-wise equality up to tolerance.
    pub fn approx_eq(&self, other: &Walk, g: &MetricGraph) -> bool {
        self.start.approx_eq(&other.start, g)
            && self.segments.len() == other.segments.len()
            && self.segments.iter().zip(&other.segments).all(|(a, b)| a.approx_eq(b, g))
    }

    /// Equality after common subdivision.
    pub fn equivalent(&self, other: &Walk, g: &MetricGraph) -> bool {
        self.canonical(g).approx_eq(&other.canonical(g), g)
    }

    /// Splits every segment at every parameter value that any segment of the
    /// walk uses on the same edge. Afterwards two segments on one edge either
    /// coincide as sets or overlap in at most an endpoint, so every
    /// backtrack is an exact spur `s` followed by `s` reversed.
    pub fn refined(&self) -> Walk {
        let mut cuts: HashMap<EdgeId, Vec<f64>> = HashMap::new();
        if let GraphPoint::Interior { edge, t } = self.start {
            cuts.entry(edge).or_default().push(t);
        }
        for s in &self.segments {
            let c = cuts.entry(s.edge).or_default();
            c.push(s.from);
            c.push(s.to);
        }
        for c in cuts.values_mut() {
            c.sort_by(f64::total_cmp);
            c.dedup_by(|a, b| (*a - *b).abs() <= tol::eps(1.0));
        }
        let mut out = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            let c = &cuts[&s.edge];
            let (lo, hi) = if s.from < s.to { (s.from, s.to) } else { (s.to, s.from) };
            let slack = tol::eps(1.0);
            let inner: Vec<f64> =
                c.iter().copied().filter(|&t| t > lo + slack && t < hi - slack).collect();
            let mut prev = s.from;
            if s.dir() == Dir::Fwd {
                for &t in &inner {
                    out.push(Segment::new(s.edge, prev, t));
                    prev = t;
                }
            } else {
                for &t in inner.iter().rev() {
                    out.push(Segment::new(s.edge, prev, t));
                    prev = t;
                }
            }
            out.push(Segment::new(s.edge, prev, s.to));
        }
        Walk { start: self.start, segments: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;

    fn path3() -> MetricGraph {
        MetricGraph::builder()
            .vertices(["a", "b", "c"])
            .edge("a", "b", 1.0)
            .edge("b", "c", 2.0)
            .build()
            .unwrap()
    }

    #[test]
    fn validation_and_reversal() {
        let g = path3();
        let w = Walk::new(
            GraphPoint::Vertex(VertexId(0)),
            vec![Segment::new(EdgeId(0), 0.0, 1.0), Segment::new(EdgeId(1), 0.0, 0.5)],
        );
        w.validate(&g).unwrap();
        assert_eq!(w.length(&g), 2.0);
        let r = w.reversed(&g);
        r.validate(&g).unwrap();
        assert!(r.end(&g).approx_eq(&w.start(), &g));

        let broken = Walk::new(
            GraphPoint::Vertex(VertexId(0)),
            vec![Segment::new(EdgeId(1), 0.0, 0.5)],
        );
        assert_eq!(broken.validate(&g), Err(WalkError::Discontinuous(0)));
        let degenerate =
            Walk::new(GraphPoint::Vertex(VertexId(0)), vec![Segment::new(EdgeId(0), 0.0, 0.0)]);
        assert_eq!(degenerate.validate(&g), Err(WalkError::InvalidSegment(0)));
    }

    #[test]
    fn canonical_merges_split_pieces() {
        let g = path3();
        let split = Walk::new(
            GraphPoint::Vertex(VertexId(1)),
            vec![Segment::new(EdgeId(1), 0.0, 0.25), Segment::new(EdgeId(1), 0.25, 1.0)],
        );
        let whole = Walk::new(GraphPoint::Vertex(VertexId(1)), vec![Segment::new(EdgeId(1), 0.0, 1.0)]);
        assert!(split.equivalent(&whole, &g));
        assert!(!split.approx_eq(&whole, &g));
    }

    #[test]
    fn refinement_exposes_partial_backtracks() {
        let g = path3();
        // a -> c then back to the middle of b-c
        let w = Walk::new(
            GraphPoint::Vertex(VertexId(0)),
            vec![
                Segment::new(EdgeId(0), 0.0, 1.0),
                Segment::new(EdgeId(1), 0.0, 1.0),
                Segment::new(EdgeId(1), 1.0, 0.5),
            ],
        );
        let r = w.refined();
        assert_eq!(r.segments().len(), 4);
        assert!(r.segments()[2].is_reversed_by(&r.segments()[3], &g));
        assert!(r.equivalent(&w, &g));
    }
}
