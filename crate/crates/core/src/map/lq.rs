use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{GraphMap, MapError};
use crate::graph::{GraphPoint, MetricGraph, Net, SourceDistances};
use crate::lifting::{lift_path, LiftError};
use crate::tol;
use crate::walk::Walk;

/// A failed ball inclusion `B(Ux0, r/L) ⊂ U B(x0, r) ⊂ B(Ux0, L r)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "inclusion", rename_all = "snake_case")]
pub enum LqViolation {
    /// A domain point within `r` of `x0` whose image lies beyond `L r` from
    /// `U x0`.
    Outer {
        center: String,
        radius: f64,
        point: String,
        image_distance: f64,
        bound: f64,
    },
    /// A codomain point within `r / L` of `U x0` whose geodesic lift from
    /// `x0` leaves `B(x0, r)`.
    Inner {
        center: String,
        radius: f64,
        target: String,
        lift_reach: f64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LqFailure {
    #[error("invalid LQ probe: {0}")]
    InvalidInput(String),
    #[error("lifting failed at center {center}, radius {radius}: {source}")]
    Lift { center: String, radius: f64, source: LiftError },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A probe whose inner inclusion could not be certified because a geodesic
/// lift ran into a boundary-marked vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedProbe {
    pub center: String,
    pub radius: f64,
    pub target: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LqReport {
    pub l: f64,
    pub mesh: f64,
    /// Number of (center, radius) probes.
    pub probes: usize,
    /// Total number of net points tested across all probes.
    pub points_checked: u64,
    /// First violation in (sample, radius) order.
    pub violation: Option<LqViolation>,
    pub truncated: Vec<TruncatedProbe>,
}

impl LqReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// LQ check with net spacing one eighth of the smallest radius.
pub fn lq_verify(
    m: &GraphMap,
    l: f64,
    samples: &[GraphPoint],
    radii: &[f64],
) -> Result<LqReport, LqFailure> {
    let mesh = radii.iter().copied().fold(f64::INFINITY, f64::min) / 8.0;
    lq_verify_with_mesh(m, l, samples, radii, mesh)
}

/// Largest distance from the source of `sd` reached along `beta`.
///
/// On each edge the distance is a minimum of affine functions of arclength,
/// so its maximum over a segment sits at an endpoint or where two of the
/// affine pieces cross.
fn reach(g: &MetricGraph, sd: &SourceDistances, beta: &Walk) -> f64 {
    let dv = sd.vertex_distances();
    let src = sd.source();
    let mut best = 0.0f64;
    for seg in beta.segments() {
        let e = g.edge(seg.edge);
        let (da, db) = (dv[e.a.0], dv[e.b.0]);
        let (lo, hi) = (seg.from.min(seg.to) * e.len, seg.from.max(seg.to) * e.len);
        let mut candidates = vec![lo, hi, 0.5 * (db + e.len - da)];
        if let Some(t0) = src.param_on(g, seg.edge) {
            let s0 = t0 * e.len;
            candidates.push(0.5 * (s0 + db + e.len));
            candidates.push(0.5 * (s0 - da));
        }
        for s in candidates {
            if s >= lo && s <= hi {
                best = best.max(sd.to_point(g, &GraphPoint::at_length(g, seg.edge, s)));
            }
        }
    }
    best
}

enum Probe {
    Pass { points: u64, truncated: Vec<TruncatedProbe> },
    Violation(LqViolation),
}

/// Checks both LQ inclusions with constant `l` at every sample and radius.
///
/// The outer inclusion is tested on a domain net of spacing `mesh`. The inner
/// inclusion is certified constructively: every codomain net point `z` in
/// `B(Ux0, r/l)` is joined to `Ux0` by a geodesic, which is lifted from
/// `x0`; the lift ends at a preimage of `z` and must stay in `B(x0, r)`.
pub fn lq_verify_with_mesh(
    m: &GraphMap,
    l: f64,
    samples: &[GraphPoint],
    radii: &[f64],
    mesh: f64,
) -> Result<LqReport, LqFailure> {
    let (dom, cod) = (m.domain(), m.codomain());
    if samples.is_empty() || radii.is_empty() {
        return Err(LqFailure::InvalidInput("samples and radii must be nonempty".into()));
    }
    if !(l >= 1.0 && l.is_finite()) {
        return Err(LqFailure::InvalidInput(format!("L = {l} must be finite and at least 1")));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(LqFailure::InvalidInput(format!("radius {r} must be positive")));
    }
    if !(mesh > 0.0) {
        return Err(LqFailure::InvalidInput(format!("mesh {mesh} must be positive")));
    }
    for x in samples {
        x.check(dom).map_err(|_| MapError::PointNotOnGraph)?;
    }
    let dom_net = Net::new(dom, mesh);
    let cod_net = Net::new(cod, mesh);

    let per_sample: Vec<Result<Vec<Probe>, LqFailure>> = samples
        .par_iter()
        .map(|x0| {
            let ux0 = m.image_point(x0);
            let dsd = SourceDistances::new(dom, *x0).map_err(|_| MapError::PointNotOnGraph)?;
            let csd = SourceDistances::new(cod, ux0).map_err(|_| MapError::PointNotOnGraph)?;
            let mut out = Vec::with_capacity(radii.len());
            for &r in radii {
                out.push(probe(m, x0, &ux0, &dsd, &csd, &dom_net, &cod_net, l, r)?);
            }
            Ok(out)
        })
        .collect();

    let mut report = LqReport { l, mesh, ..LqReport::default() };
    for probes in per_sample {
        for p in probes? {
            report.probes += 1;
            match p {
                Probe::Pass { points, truncated } => {
                    report.points_checked += points;
                    report.truncated.extend(truncated);
                }
                Probe::Violation(v) => {
                    report.violation.get_or_insert(v);
                }
            }
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn probe(
    m: &GraphMap,
    x0: &GraphPoint,
    ux0: &GraphPoint,
    dsd: &SourceDistances,
    csd: &SourceDistances,
    dom_net: &Net,
    cod_net: &Net,
    l: f64,
    r: f64,
) -> Result<Probe, LqFailure> {
    let (dom, cod) = (m.domain(), m.codomain());
    let mut points = 0u64;

    let bound = l * r;
    for i in dom_net.members_in_ball(dom, x0, dsd.vertex_distances(), r) {
        let p = &dom_net.points()[i];
        let d_img = csd.to_point(cod, &m.image_point(p));
        points += 1;
        if !tol::approx_le(d_img, bound) {
            return Ok(Probe::Violation(LqViolation::Outer {
                center: x0.describe(dom),
                radius: r,
                point: p.describe(dom),
                image_distance: d_img,
                bound,
            }));
        }
    }

    let mut truncated = Vec::new();
    for j in cod_net.members_in_ball(cod, ux0, csd.vertex_distances(), r / l) {
        let z = &cod_net.points()[j];
        let alpha = csd.geodesic_to(cod, z);
        points += 1;
        let beta = match lift_path(m, &alpha, x0) {
            Ok(beta) => beta,
            Err(LiftError::EscapedDomain { .. }) => {
                truncated.push(TruncatedProbe {
                    center: x0.describe(dom),
                    radius: r,
                    target: z.describe(cod),
                });
                continue;
            }
            Err(source) => {
                return Err(LqFailure::Lift { center: x0.describe(dom), radius: r, source })
            }
        };
        if beta.length(dom) <= r {
            continue;
        }
        let lift_reach = reach(dom, dsd, &beta);
        if !tol::approx_le(lift_reach, r) {
            return Ok(Probe::Violation(LqViolation::Inner {
                center: x0.describe(dom),
                radius: r,
                target: z.describe(cod),
                lift_reach,
            }));
        }
    }
    Ok(Probe::Pass { points, truncated })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::graph::{EdgeId, VertexId};

    fn all_vertices(m: &GraphMap) -> Vec<GraphPoint> {
        m.domain().vertex_ids().map(GraphPoint::Vertex).collect()
    }

    #[test]
    fn identity_passes() {
        let g = unit_cycle("v", 5);
        let m = GraphMap::identity(&g);
        let mut samples = all_vertices(&m);
        samples.push(GraphPoint::on_edge(&g, EdgeId(2), 0.3));
        let r = lq_verify(&m, 1.0, &samples, &[0.2, 0.7, 1.9, 4.0]).unwrap();
        assert!(r.passed(), "{:?}", r.violation);
        assert!(r.truncated.is_empty());
        assert_eq!(r.probes, 24);
    }

    #[test]
    fn scaling_by_two_is_two_lq_not_one_and_a_half() {
        let m = scaled_tree(2.0);
        let samples = all_vertices(&m);
        let radii = [0.1, 0.3, 0.6, 1.2];
        assert!(lq_verify(&m, 2.0, &samples, &radii).unwrap().passed());
        let r = lq_verify(&m, 1.5, &samples, &radii).unwrap();
        assert!(matches!(r.violation, Some(LqViolation::Outer { .. })), "{:?}", r.violation);
    }

    #[test]
    fn shrinking_map_fails_inner_inclusion() {
        // domain edges twice as long as their images: the image of B(x0, r)
        // is B(Ux0, r/2), so the inner inclusion needs L >= 2
        let m = scaled_tree(0.5);
        let samples = all_vertices(&m);
        let r = lq_verify(&m, 1.5, &samples, &[0.2, 0.5]).unwrap();
        assert!(matches!(r.violation, Some(LqViolation::Inner { .. })), "{:?}", r.violation);
        assert!(lq_verify(&m, 2.0, &samples, &[0.2, 0.5]).unwrap().passed());
    }

    #[test]
    fn cover_is_lq_at_every_radius() {
        let m = cycle_cover(6, 3);
        let r = lq_verify(&m, 1.0, &[GraphPoint::Vertex(VertexId(0))], &[0.5, 2.0, 5.0, 12.0]).unwrap();
        assert!(r.passed(), "{:?}", r.violation);
    }

    #[test]
    fn reach_of_a_walk_past_the_far_point() {
        let g = unit_cycle("v", 4);
        let sd = SourceDistances::new(&g, GraphPoint::Vertex(VertexId(0))).unwrap();
        // walk once around: the farthest point is the antipode at distance 2
        let w = Walk::from_steps(
            &g,
            &(0..4).map(|i| crate::graph::Step::new(EdgeId(i), crate::graph::Dir::Fwd)).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((reach(&g, &sd, &w) - 2.0).abs() < 1e-12);
        // a single edge from inside: midpoint source, walk to both ends
        let sd = SourceDistances::new(&g, GraphPoint::on_edge(&g, EdgeId(0), 0.5)).unwrap();
        let w = Walk::new(
            GraphPoint::on_edge(&g, EdgeId(0), 0.5),
            vec![crate::walk::Segment::new(EdgeId(0), 0.5, 0.0), crate::walk::Segment::new(EdgeId(3), 1.0, 0.0)],
        );
        assert!((reach(&g, &sd, &w) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let m = scaled_tree(1.0);
        assert!(lq_verify(&m, 1.0, &[], &[1.0]).is_err());
        assert!(lq_verify(&m, 0.5, &all_vertices(&m), &[1.0]).is_err());
        assert!(lq_verify(&m, 1.0, &all_vertices(&m), &[0.0]).is_err());
    }
}
