//! End-to-end verdict for a map: measure every hypothesis, run the proof
//! procedures, and compare against a brute-force all-pairs oracle.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    ahlfors_constant, cycle_rank, distance, point_distance_from_vertex_distances, DistanceTable,
    GraphPoint, MetricGraph, Net,
};
use crate::io::PointRepr;
use crate::lifting::{monodromy_injectivity, MonodromyOutcome, ObstructionKind};
use crate::map::{
    local_bilipschitz_constant, local_injectivity, lq_verify, max_multiplicity_in_ball,
    multiplicity_bound, verify_map, GraphMap, LqViolation, MapError, MapViolation,
};
use crate::tol;

/// Slack allowed between the oracle constant and the local constant.
pub const CERTIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    SimplyConnected,
    LocalInjectivity,
    LocallyBilipschitz,
    AhlforsRegular,
    Complete,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::SimplyConnected => "simply_connected",
            Hypothesis::LocalInjectivity => "local_injectivity",
            Hypothesis::LocallyBilipschitz => "locally_bilipschitz",
            Hypothesis::AhlforsRegular => "ahlfors_regular",
            Hypothesis::Complete => "complete",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    Certified {
        #[serde(rename = "L")]
        l: f64,
    },
    HypothesisFailure { hypothesis: Hypothesis, witness: String },
    /// Every hypothesis passed but some conclusion failed. This signals a
    /// defect in the implementation or the input, never a valid outcome.
    Refuted { reason: String, witness: Option<(PointRepr, PointRepr)> },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified { .. })
    }

    pub fn failed_hypothesis(&self) -> Option<Hypothesis> {
        match self {
            Verdict::HypothesisFailure { hypothesis, .. } => Some(*hypothesis),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypotheses {
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub r_0: f64,
    pub q: f64,
    #[serde(rename = "C_domain")]
    pub c_domain: f64,
    #[serde(rename = "C_codomain")]
    pub c_codomain: f64,
    pub cycle_rank_codomain: usize,
    pub local_injectivity: bool,
    pub escaped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalSummary {
    pub mesh: f64,
    pub net_size: usize,
    pub pairs_checked: u64,
    pub worst_pair: Option<(PointRepr, PointRepr)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LqSummary {
    pub probes: usize,
    pub points_checked: u64,
    pub passed: bool,
    pub violation: Option<LqViolation>,
    pub truncated: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromySummary {
    pub outcome: String,
    pub fibers_checked: usize,
    pub point: Option<PointRepr>,
    pub preimages: Option<(PointRepr, PointRepr)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplicitySummary {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub count: usize,
    pub center: PointRepr,
    pub witness: PointRepr,
    #[serde(rename = "K")]
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub mesh: f64,
    pub net_size: usize,
    pub pairs: u64,
    pub worst_pair: Option<(PointRepr, PointRepr)>,
    pub non_injective_pair: Option<(PointRepr, PointRepr)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub hypotheses: Hypotheses,
    pub verdict: Verdict,
    /// `null` when the oracle found two net points with the same image.
    #[serde(rename = "oracle_L")]
    pub oracle_l: Option<f64>,
    pub local: Option<LocalSummary>,
    pub lq: Option<LqSummary>,
    pub monodromy: Option<MonodromySummary>,
    pub multiplicity: Option<MultiplicitySummary>,
    pub oracle: OracleSummary,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoremError {
    #[error("malformed map: {0:?}")]
    MalformedMap(Vec<MapViolation>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("prerequisite missing: {0}")]
    PrerequisiteMissing(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Parameters of a theorem run. Meshes default to `r0 / 16` for the local
/// constant and `r0 / 4` for the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremConfig {
    pub q: f64,
    pub r0: f64,
    pub mesh: Option<f64>,
    pub oracle_mesh: Option<f64>,
    /// Radii `r0 * j / radius_count` for `j = 1..=radius_count`.
    pub radius_count: usize,
}

impl TheoremConfig {
    pub fn new(q: f64, r0: f64) -> Self {
        TheoremConfig { q, r0, mesh: None, oracle_mesh: None, radius_count: 5 }
    }

    pub fn radii(&self) -> Vec<f64> {
        (1..=self.radius_count).map(|j| self.r0 * j as f64 / self.radius_count as f64).collect()
    }
}

pub fn verify_theorem(m: &GraphMap, q: f64, r0: f64) -> Result<TheoremReport, TheoremError> {
    verify_theorem_with(m, &TheoremConfig::new(q, r0))
}

pub fn verify_theorem_with(m: &GraphMap, cfg: &TheoremConfig) -> Result<TheoremReport, TheoremError> {
    let (dom, cod) = (m.domain(), m.codomain());
    let (q, r0) = (cfg.q, cfg.r0);
    if !(q > 0.0 && q.is_finite()) {
        return Err(TheoremError::InvalidParameter(format!("q = {q} must be positive")));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(TheoremError::InvalidParameter(format!("r0 = {r0} must be positive")));
    }
    if cfg.radius_count == 0 {
        return Err(TheoremError::InvalidParameter("radius count must be positive".into()));
    }
    let mesh = cfg.mesh.unwrap_or(r0 / 16.0);
    let oracle_mesh = cfg.oracle_mesh.unwrap_or(r0 / 4.0);
    if !(oracle_mesh > 0.0) {
        return Err(TheoremError::InvalidParameter(format!("oracle mesh {oracle_mesh} must be positive")));
    }
    let violations = verify_map(m);
    let backtrack = violations.iter().find(|v| matches!(v, MapViolation::Backtrack { .. }));
    if violations.iter().any(|v| !matches!(v, MapViolation::Backtrack { .. })) {
        return Err(TheoremError::MalformedMap(violations));
    }

    let rank = cycle_rank(cod);
    let injectivity_witness = match (backtrack, local_injectivity(m)) {
        (Some(MapViolation::Backtrack { edge, position }), _) => {
            Some(format!("image walk of edge `{edge}` backtracks at step {position}"))
        }
        (_, Err(w)) => Some(format!(
            "germs {} and {} at vertex `{}` both map to {}",
            w.germs.0, w.germs.1, w.vertex, w.image_germ
        )),
        _ => None,
    };
    let locally_injective = injectivity_witness.is_none();

    let local = if locally_injective {
        Some(local_bilipschitz_constant(m, r0, mesh))
    } else {
        None
    };
    if let Some(Err(MapError::InvalidScale(s))) = &local {
        return Err(TheoremError::InvalidParameter(s.clone()));
    }
    let l = match &local {
        Some(Ok(rep)) => Some(rep.l),
        _ => None,
    };

    let radii = cfg.radii();
    let c_domain = ahlfors_constant(dom, q, &radii, &probe_points(dom))
        .expect("probe set and radii are nonempty")
        .constant;
    let c_codomain = ahlfors_constant(cod, q, &radii, &probe_points(cod))
        .expect("probe set and radii are nonempty")
        .constant;

    let vertices: Vec<GraphPoint> = dom.vertex_ids().map(GraphPoint::Vertex).collect();
    let lq = l.map(|l| match lq_verify(m, l, &vertices, &radii) {
        Ok(rep) => LqSummary {
            probes: rep.probes,
            points_checked: rep.points_checked,
            passed: rep.passed(),
            violation: rep.violation,
            truncated: rep.truncated.len(),
            error: None,
        },
        Err(e) => LqSummary {
            probes: 0,
            points_checked: 0,
            passed: false,
            violation: None,
            truncated: 0,
            error: Some(e.to_string()),
        },
    });

    let monodromy = locally_injective.then(|| monodromy_injectivity(m));

    let mut escaped = lq.as_ref().is_some_and(|s| s.truncated > 0);
    let mut escape_witness = None;
    if let Some(MonodromyOutcome::Obstruction(o)) = &monodromy {
        if let ObstructionKind::Escaped { partial } = &o.kind {
            escaped = true;
            escape_witness = Some(format!(
                "lift from {} escapes after length {}",
                o.preimages.0.describe(dom),
                partial.length(dom)
            ));
        }
    }
    if escaped && escape_witness.is_none() {
        escape_witness = Some("a geodesic lift in the LQ probe reached a boundary vertex".into());
    }

    let multiplicity = match l {
        Some(l) => {
            let mut best: Option<MultiplicitySummary> = None;
            for x in &vertices {
                let b = max_multiplicity_in_ball(m, x, r0)?;
                if best.as_ref().is_none_or(|s| b.count > s.count) {
                    best = Some(MultiplicitySummary {
                        radius: r0,
                        count: b.count,
                        center: PointRepr::of(dom, x),
                        witness: PointRepr::of(cod, &b.witness),
                        bound: multiplicity_bound(l, c_domain.max(c_codomain), q),
                    });
                }
            }
            best
        }
        None => None,
    };

    let oracle = global_bilipschitz_oracle(m, oracle_mesh);

    let pair = |g: &MetricGraph, (a, b): (GraphPoint, GraphPoint)| {
        (PointRepr::of(g, &a), PointRepr::of(g, &b))
    };
    let verdict = if rank > 0 {
        Verdict::HypothesisFailure {
            hypothesis: Hypothesis::SimplyConnected,
            witness: format!("cycle_rank = {rank}"),
        }
    } else if let Some(w) = injectivity_witness {
        Verdict::HypothesisFailure { hypothesis: Hypothesis::LocalInjectivity, witness: w }
    } else if let Some(Err(e)) = &local {
        Verdict::HypothesisFailure { hypothesis: Hypothesis::LocallyBilipschitz, witness: e.to_string() }
    } else if !(c_domain.is_finite() && c_codomain.is_finite()) {
        Verdict::HypothesisFailure {
            hypothesis: Hypothesis::AhlforsRegular,
            witness: format!("C_domain = {c_domain}, C_codomain = {c_codomain}"),
        }
    } else if escaped {
        Verdict::HypothesisFailure {
            hypothesis: Hypothesis::Complete,
            witness: escape_witness.unwrap_or_default(),
        }
    } else {
        let l = l.expect("local constant measured");
        let lq = lq.as_ref().expect("LQ run");
        if let Some(v) = &lq.violation {
            Verdict::Refuted { reason: format!("LQ inclusion fails: {v:?}"), witness: None }
        } else if let Some(e) = &lq.error {
            Verdict::Refuted { reason: format!("LQ check failed: {e}"), witness: None }
        } else if let Some(MonodromyOutcome::Obstruction(o)) = &monodromy {
            Verdict::Refuted {
                reason: format!("monodromy obstruction: {}", o.kind.name()),
                witness: Some(pair(dom, o.preimages)),
            }
        } else if let Some(p) = oracle.non_injective {
            Verdict::Refuted { reason: "oracle found two points with one image".into(), witness: Some(pair(dom, p)) }
        } else if oracle.l_star > l + CERTIFY_TOL {
            Verdict::Refuted {
                reason: format!("oracle constant {} exceeds local constant {l}", oracle.l_star),
                witness: oracle.worst_pair.map(|p| pair(dom, p)),
            }
        } else {
            Verdict::Certified { l }
        }
    };

    Ok(TheoremReport {
        hypotheses: Hypotheses {
            l,
            r_0: r0,
            q,
            c_domain,
            c_codomain,
            cycle_rank_codomain: rank,
            local_injectivity: locally_injective,
            escaped,
        },
        verdict,
        oracle_l: oracle.l_star.is_finite().then_some(oracle.l_star),
        local: match &local {
            Some(Ok(rep)) => Some(LocalSummary {
                mesh: rep.mesh,
                net_size: rep.net_size,
                pairs_checked: rep.pairs_checked,
                worst_pair: rep.worst_pair.map(|p| pair(dom, p)),
            }),
            _ => None,
        },
        lq,
        monodromy: monodromy.map(|o| match o {
            MonodromyOutcome::Injective { fibers_checked } => MonodromySummary {
                outcome: "injective".into(),
                fibers_checked,
                point: None,
                preimages: None,
            },
            MonodromyOutcome::Obstruction(o) => MonodromySummary {
                outcome: o.kind.name().into(),
                fibers_checked: 0,
                point: Some(PointRepr::of(cod, &o.point)),
                preimages: Some(pair(dom, o.preimages)),
            },
        }),
        multiplicity,
        oracle: OracleSummary {
            mesh: oracle_mesh,
            net_size: oracle.net_size,
            pairs: oracle.pairs,
            worst_pair: oracle.worst_pair.map(|p| pair(dom, p)),
            non_injective_pair: oracle.non_injective.map(|p| pair(dom, p)),
        },
    })
}

/// Vertices and edge midpoints.
fn probe_points(g: &MetricGraph) -> Vec<GraphPoint> {
    g.vertex_ids()
        .map(GraphPoint::Vertex)
        .chain(g.edge_ids().map(|e| GraphPoint::on_edge(g, e, 0.5)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    /// Global distortion over all net pairs; infinite when two distinct net
    /// points share an image.
    pub l_star: f64,
    pub worst_pair: Option<(GraphPoint, GraphPoint)>,
    /// Lexicographically first pair of net points with the same image.
    pub non_injective: Option<(GraphPoint, GraphPoint)>,
    pub net_size: usize,
    pub pairs: u64,
}

#[derive(Clone, Copy)]
struct Candidate {
    ratio: f64,
    i: usize,
    j: usize,
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(match a.ratio.total_cmp(&b.ratio) {
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Equal => {
                if (a.i, a.j) <= (b.i, b.j) {
                    a
                } else {
                    b
                }
            }
        }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Brute-force global distortion over every pair of net points. Distances
/// come from Floyd–Warshall tables, independent of the Dijkstra code used
/// elsewhere.
pub fn global_bilipschitz_oracle(m: &GraphMap, mesh: f64) -> OracleReport {
    let (dom, cod) = (m.domain(), m.codomain());
    let dom_table = DistanceTable::floyd_warshall(dom);
    let cod_table = DistanceTable::floyd_warshall(cod);
    let net = Net::new(dom, mesh);
    let points = net.points();
    let images: Vec<GraphPoint> = points.iter().map(|p| m.image_point(p)).collect();
    let dom_dv: Vec<Vec<f64>> = points.par_iter().map(|p| dom_table.from_point(dom, p)).collect();
    let cod_dv: Vec<Vec<f64>> = images.par_iter().map(|p| cod_table.from_point(cod, p)).collect();

    let (best, collision) = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Option<Candidate> = None;
            for j in i + 1..points.len() {
                let d = point_distance_from_vertex_distances(dom, &points[i], &dom_dv[i], &points[j]);
                let d_img =
                    point_distance_from_vertex_distances(cod, &images[i], &cod_dv[i], &images[j]);
                if d_img <= tol::REL_TOL * d + tol::ABS_TOL {
                    return (best, Some((i, j)));
                }
                best = pick(best, Some(Candidate { ratio: (d_img / d).max(d / d_img), i, j }));
            }
            (best, None)
        })
        .reduce(
            || (None, None),
            |(b1, c1), (b2, c2)| {
                let c = match (c1, c2) {
                    (Some(a), Some(b)) => Some(if a <= b { a } else { b }),
                    (a, None) => a,
                    (None, b) => b,
                };
                (pick(b1, b2), c)
            },
        );
    let n = points.len() as u64;
    OracleReport {
        l_star: if collision.is_some() {
            f64::INFINITY
        } else {
            best.map_or(1.0, |c| c.ratio.max(1.0))
        },
        worst_pair: best.map(|c| (points[c.i], points[c.j])),
        non_injective: collision.map(|(i, j)| (points[i], points[j])),
        net_size: points.len(),
        pairs: n * n.saturating_sub(1) / 2,
    }
}

/// Certified lower bound on `d'(Ux, Uy)` from disjoint balls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisjointBallsBound {
    pub domain_distance: f64,
    /// `d(x, y) / 2`, the radius of the two disjoint domain balls.
    pub radius: f64,
    /// `d(x, y) / L`.
    pub bound: f64,
}

/// `B(x, d/2)` and `B(y, d/2)` are disjoint, so their images are disjoint
/// when `U` is injective. Each image contains a ball of radius `d/(2L)`
/// about `Ux` resp. `Uy` by the LQ inner inclusion, hence
/// `d'(Ux, Uy) >= d/L`. Injectivity is taken from `monodromy`; the LQ
/// inclusions are checked here at both centres.
pub fn lower_bound_via_disjoint_balls(
    m: &GraphMap,
    x: &GraphPoint,
    y: &GraphPoint,
    l: f64,
    monodromy: &MonodromyOutcome,
) -> Result<DisjointBallsBound, TheoremError> {
    if !monodromy.is_injective() {
        return Err(TheoremError::PrerequisiteMissing(
            "monodromy did not establish injectivity".into(),
        ));
    }
    let dom = m.domain();
    let d = distance(dom, x, y).map_err(|_| MapError::PointNotOnGraph)?;
    if d == 0.0 {
        return Ok(DisjointBallsBound { domain_distance: 0.0, radius: 0.0, bound: 0.0 });
    }
    let report = lq_verify(m, l, &[*x, *y], &[d / 2.0])
        .map_err(|e| TheoremError::PrerequisiteMissing(format!("LQ check failed: {e}")))?;
    if let Some(v) = report.violation {
        return Err(TheoremError::PrerequisiteMissing(format!("LQ inclusion fails: {v:?}")));
    }
    if !report.truncated.is_empty() {
        return Err(TheoremError::PrerequisiteMissing(
            "LQ inner inclusion is truncated by boundary vertices".into(),
        ));
    }
    Ok(DisjointBallsBound { domain_distance: d, radius: d / 2.0, bound: d / l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeId, VertexId};
    use crate::map::fixtures::*;

    #[test]
    fn identity_on_a_tree_is_certified() {
        let m = scaled_tree(1.0);
        let rep = verify_theorem(&m, 1.0, m.default_r0()).unwrap();
        assert_eq!(rep.verdict, Verdict::Certified { l: 1.0 });
        assert_eq!(rep.oracle_l, Some(1.0));
        assert_eq!(rep.multiplicity.as_ref().unwrap().count, 1);
    }

    #[test]
    fn scaled_tree_certified_at_two() {
        let m = scaled_tree(2.0);
        let rep = verify_theorem(&m, 1.0, m.default_r0()).unwrap();
        match rep.verdict {
            Verdict::Certified { l } => assert!((l - 2.0).abs() < 1e-9),
            v => panic!("{v:?}"),
        }
        assert!(rep.oracle_l.unwrap() <= 2.0 + CERTIFY_TOL);
    }

    #[test]
    fn cover_fails_simple_connectivity() {
        let m = cycle_cover(6, 3);
        let rep = verify_theorem(&m, 1.0, m.default_r0()).unwrap();
        assert_eq!(rep.verdict.failed_hypothesis(), Some(Hypothesis::SimplyConnected));
        assert_eq!(rep.hypotheses.cycle_rank_codomain, 1);
        assert!(rep.hypotheses.local_injectivity);
        assert!((rep.hypotheses.l.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(rep.oracle_l, None);
        assert_eq!(rep.monodromy.unwrap().outcome, "not_null_homotopic");
    }

    #[test]
    fn fold_fails_local_injectivity() {
        let m = fold();
        let rep = verify_theorem(&m, 1.0, 0.25).unwrap();
        assert_eq!(rep.verdict.failed_hypothesis(), Some(Hypothesis::LocalInjectivity));
        assert!(rep.oracle.non_injective_pair.is_some());
    }

    #[test]
    fn oracle_examples() {
        let g = unit_cycle("v", 4);
        assert_eq!(global_bilipschitz_oracle(&GraphMap::identity(&g), 0.25).l_star, 1.0);
        let o = global_bilipschitz_oracle(&scaled_tree(2.0), 0.1);
        assert!((o.l_star - 2.0).abs() < 1e-12);
        let o = global_bilipschitz_oracle(&cycle_cover(6, 3), 0.5);
        assert!(o.l_star.is_infinite());
        let (a, b) = o.non_injective.unwrap();
        let m = cycle_cover(6, 3);
        assert!(m.image_point(&a).approx_eq(&m.image_point(&b), m.codomain()));
    }

    #[test]
    fn disjoint_balls_bound() {
        let m = scaled_tree(2.0);
        let dom = m.domain();
        let x = GraphPoint::Vertex(VertexId(1));
        let y = GraphPoint::on_edge(dom, EdgeId(1), 0.5);
        let mono = monodromy_injectivity(&m);
        let b = lower_bound_via_disjoint_balls(&m, &x, &y, 2.0, &mono).unwrap();
        // d = 0.5 + 0.5, images 2 apart
        assert!((b.domain_distance - 1.0).abs() < 1e-12);
        assert!((b.bound - 0.5).abs() < 1e-12);
        let cover = cycle_cover(6, 3);
        let err = lower_bound_via_disjoint_balls(
            &cover,
            &GraphPoint::Vertex(VertexId(0)),
            &GraphPoint::Vertex(VertexId(3)),
            1.0,
            &monodromy_injectivity(&cover),
        );
        assert!(matches!(err, Err(TheoremError::PrerequisiteMissing(_))));
    }
}
