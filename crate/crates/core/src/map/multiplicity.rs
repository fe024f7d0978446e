use super::{GraphMap, MapError};
use crate::graph::{ball, Dir, GraphPoint, SourceDistances};
use crate::tol;

/// The preimage set `U^{-1}{y}`.
#[derive(Clone, Debug)]
pub struct Fiber {
    pub point: GraphPoint,
    pub preimages: Vec<GraphPoint>,
}

impl Fiber {
    pub fn len(&self) -> usize {
        self.preimages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preimages.is_empty()
    }
}

fn ensure_immersed(m: &GraphMap) -> Result<(), MapError> {
    for e in m.domain().edge_ids() {
        let steps = m.edge_image(e).steps();
        if steps.windows(2).any(|p| p[1] == p[0].reversed()) {
            return Err(MapError::NonImmersedEdge(m.domain().edge(e).id.clone()));
        }
    }
    Ok(())
}

/// Exact fiber of `y`: each domain edge is affine onto its image walk, so
/// preimages are found by inverting the parametrization per occurrence.
pub fn multiplicity(m: &GraphMap, y: &GraphPoint) -> Result<Fiber, MapError> {
    y.check(m.codomain()).map_err(|_| MapError::PointNotOnGraph)?;
    ensure_immersed(m)?;
    let (dom, cod) = (m.domain(), m.codomain());
    let mut pre: Vec<GraphPoint> = Vec::new();
    match *y {
        GraphPoint::Vertex(u) => {
            pre.extend(dom.vertex_ids().filter(|v| m.vertex_image(*v) == u).map(GraphPoint::Vertex));
            for e in dom.edge_ids() {
                let w = m.edge_image(e);
                for k in 1..w.steps().len() {
                    if cod.step_start(w.steps()[k]) == u {
                        pre.push(GraphPoint::on_edge(dom, e, w.offset(k) / w.length()));
                    }
                }
            }
        }
        GraphPoint::Interior { edge: c, t } => {
            let len_c = cod.edge(c).len;
            for e in dom.edge_ids() {
                let w = m.edge_image(e);
                for (k, s) in w.steps().iter().enumerate() {
                    if s.edge != c {
                        continue;
                    }
                    let local = match s.dir {
                        Dir::Fwd => t,
                        Dir::Rev => 1.0 - t,
                    } * len_c;
                    pre.push(GraphPoint::on_edge(dom, e, (w.offset(k) + local) / w.length()));
                }
            }
        }
    }
    let mut merged: Vec<GraphPoint> = Vec::with_capacity(pre.len());
    for p in pre {
        if !merged.iter().any(|q| q.approx_eq(&p, dom)) {
            merged.push(p);
        }
    }
    Ok(Fiber { point: *y, preimages: merged })
}

/// Largest number of preimages of a single codomain point inside the open
/// ball `B(x0, radius)`.
#[derive(Clone, Debug)]
pub struct BallMultiplicity {
    pub count: usize,
    /// A codomain point attaining `count`.
    pub witness: GraphPoint,
    /// Its preimages inside the ball.
    pub preimages: Vec<GraphPoint>,
}

/// Exact maximum over all codomain points of `#(B(x0, R) ∩ U^{-1}{y})`.
///
/// On the interior of a codomain edge the count is piecewise constant; it
/// only changes where a sheet crosses the ball boundary. Each edge is swept
/// by evaluating midpoints between consecutive crossing parameters, and
/// every codomain vertex is checked directly.
pub fn max_multiplicity_in_ball(
    m: &GraphMap,
    x0: &GraphPoint,
    radius: f64,
) -> Result<BallMultiplicity, MapError> {
    ensure_immersed(m)?;
    let (dom, cod) = (m.domain(), m.codomain());
    x0.check(dom).map_err(|_| MapError::PointNotOnGraph)?;
    if !(radius > 0.0) {
        return Err(MapError::InvalidScale(format!("radius {radius} must be positive")));
    }
    let sd = SourceDistances::new(dom, *x0).map_err(|_| MapError::PointNotOnGraph)?;
    let inside = |p: &GraphPoint| tol::strictly_less(sd.to_point(dom, p), radius);
    let region = ball(dom, x0, radius).map_err(|_| MapError::PointNotOnGraph)?;

    let mut best: Option<(usize, GraphPoint)> = None;
    let mut consider = |count: usize, y: GraphPoint| {
        if best.is_none_or(|(c, _)| count > c) {
            best = Some((count, y));
        }
    };

    for u in cod.vertex_ids() {
        let y = GraphPoint::Vertex(u);
        let count = multiplicity(m, &y)?.preimages.iter().filter(|p| inside(p)).count();
        consider(count, y);
    }

    for c in cod.edge_ids() {
        let len_c = cod.edge(c).len;
        // Open parameter intervals on c, one list per sheet over c.
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for e in dom.edge_ids() {
            let w = m.edge_image(e);
            let scale = w.length() / dom.edge(e).len;
            for (k, s) in w.steps().iter().enumerate() {
                if s.edge != c {
                    continue;
                }
                for seg in region.segments.iter().filter(|seg| seg.edge == e) {
                    let lo = (seg.lo * scale - w.offset(k)) / len_c;
                    let hi = (seg.hi * scale - w.offset(k)) / len_c;
                    let (lo, hi) = (lo.max(0.0), hi.min(1.0));
                    if hi <= lo {
                        continue;
                    }
                    intervals.push(match s.dir {
                        Dir::Fwd => (lo, hi),
                        Dir::Rev => (1.0 - hi, 1.0 - lo),
                    });
                }
            }
        }
        if intervals.is_empty() {
            consider(0, GraphPoint::on_edge(cod, c, 0.5));
            continue;
        }
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        for &(lo, hi) in &intervals {
            cuts.push(lo);
            cuts.push(hi);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= tol::eps(1.0));
        for pair in cuts.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let count = intervals.iter().filter(|(lo, hi)| *lo < mid && mid < *hi).count();
            consider(count, GraphPoint::on_edge(cod, c, mid));
        }
    }

    let (count, witness) = best.expect("codomain has at least one vertex");
    let preimages: Vec<GraphPoint> =
        multiplicity(m, &witness)?.preimages.into_iter().filter(|p| inside(p)).collect();
    debug_assert_eq!(preimages.len(), count);
    Ok(BallMultiplicity { count, witness, preimages })
}

/// Nominal multiplicity bound `2 L^2 C^2` for an `L`-LQ map between spaces
/// with Ahlfors constant `C`. Informational; the exponent `q` does not
/// enter the nominal form.
pub fn multiplicity_bound(l: f64, c: f64, _q: f64) -> f64 {
    2.0 * l * l * c * c
}
