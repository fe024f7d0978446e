//! Path lifting, fiber transport, spur homotopies and monodromy.
//!
//! Lifting is combinatorial: a codomain walk is consumed one segment at a
//! time, and because every codomain segment lies inside a single edge its
//! lift lies inside a single occurrence of that edge in some domain edge's
//! image walk. Each codomain segment therefore lifts to exactly one domain
//! segment, and the continuation at every point is the unique domain germ
//! whose image is the next codomain germ.

mod homotopy;
mod monodromy;

pub use homotopy::{contract_loop, lift_homotopy, Homotopy, HomotopyError, Move};
pub use monodromy::{monodromy_injectivity, MonodromyOutcome, Obstruction, ObstructionKind};

use thiserror::Error;

use crate::graph::{Dir, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::map::{multiplicity, GraphMap, Location, MapError};
use crate::tol;
use crate::walk::{Segment, Walk, WalkError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("invalid walk: {0}")]
    InvalidWalk(#[from] WalkError),
    #[error("point is not on the graph")]
    PointNotOnGraph,
    #[error("start point maps to {found}, but the walk starts at {expected}")]
    StartMismatch { expected: String, found: String },
    #[error("lift reached boundary vertex `{boundary}` with {remaining} of the walk left")]
    EscapedDomain { partial: Walk, boundary: String, remaining: f64 },
    #[error("no continuation of the lift at {at}: the map is not a local homeomorphism there")]
    NoContinuation { partial: Walk, at: String },
    #[error("two germs at {at} have the same image; the map is not locally injective")]
    AmbiguousContinuation { at: String },
    #[error("lifts from {a} and {b} end at the same point")]
    LiftCollision { a: String, b: String },
    #[error("transported fiber does not match the target fiber: {0}")]
    FiberMismatch(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

impl LiftError {
    pub fn is_escape(&self) -> bool {
        matches!(self, LiftError::EscapedDomain { .. })
    }
}

#[derive(Clone, Copy, Debug)]
enum Pos {
    Vertex(VertexId),
    /// Interior of a domain edge, `lambda` arclength along its image walk.
    Edge { edge: EdgeId, lambda: f64 },
}

fn normalize(m: &GraphMap, pos: Pos) -> Pos {
    if let Pos::Edge { edge, lambda } = pos {
        let w = m.edge_image(edge);
        let e = m.domain().edge(edge);
        match w.locate(lambda) {
            Location::Junction(0) => return Pos::Vertex(e.a),
            Location::Junction(k) if k == w.steps().len() => return Pos::Vertex(e.b),
            _ => {}
        }
    }
    pos
}

/// Lifts the codomain walk `alpha` to the domain, starting at `x0`.
///
/// The lift `beta` satisfies `U ∘ beta = alpha` segment by segment. Running
/// into a boundary-marked vertex before `alpha` is used up yields
/// [`LiftError::EscapedDomain`] carrying the partial lift.
pub fn lift_path(m: &GraphMap, alpha: &Walk, x0: &GraphPoint) -> Result<Walk, LiftError> {
    let (dom, cod) = (m.domain(), m.codomain());
    x0.check(dom).map_err(|_| LiftError::PointNotOnGraph)?;
    alpha.validate(cod)?;
    let image = m.image_point(x0);
    if !image.approx_eq(&alpha.start(), cod) {
        return Err(LiftError::StartMismatch {
            expected: alpha.start().describe(cod),
            found: image.describe(cod),
        });
    }
    let mut pos = normalize(
        m,
        match *x0 {
            GraphPoint::Vertex(v) => Pos::Vertex(v),
            GraphPoint::Interior { edge, t } => {
                Pos::Edge { edge, lambda: t * m.edge_image(edge).length() }
            }
        },
    );
    let segments = alpha.segments();
    let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
    let remaining_after = |i: usize| segments[i..].iter().map(|s| s.len(cod)).sum::<f64>();

    for (i, seg) in segments.iter().enumerate() {
        let germ = seg.germ();
        let travel = seg.len(cod);
        let (edge, from, forward) = match pos {
            Pos::Vertex(v) => {
                let mut found = None;
                for &dg in dom.germs(v) {
                    if m.germ_image(dg) == germ {
                        if found.is_some() {
                            return Err(LiftError::AmbiguousContinuation {
                                at: dom.vertex_name(v).to_string(),
                            });
                        }
                        found = Some(dg);
                    }
                }
                match found {
                    Some(dg) => {
                        let from = match dg.dir {
                            Dir::Fwd => 0.0,
                            Dir::Rev => m.edge_image(dg.edge).length(),
                        };
                        (dg.edge, from, dg.dir == Dir::Fwd)
                    }
                    None => {
                        let partial = Walk::new(*x0, out);
                        return Err(if dom.is_boundary(v) {
                            LiftError::EscapedDomain {
                                partial,
                                boundary: dom.vertex_name(v).to_string(),
                                remaining: remaining_after(i),
                            }
                        } else {
                            LiftError::NoContinuation {
                                partial,
                                at: dom.vertex_name(v).to_string(),
                            }
                        });
                    }
                }
            }
            Pos::Edge { edge, lambda } => {
                let w = m.edge_image(edge);
                let steps = w.steps();
                let forward = match w.locate(lambda) {
                    Location::Inside { k, .. } => {
                        if steps[k].edge != germ.edge {
                            return Err(LiftError::NoContinuation {
                                partial: Walk::new(*x0, out),
                                at: GraphPoint::on_edge(dom, edge, lambda / w.length())
                                    .describe(dom),
                            });
                        }
                        steps[k].dir == germ.dir
                    }
                    Location::Junction(k) => {
                        if steps[k] == germ {
                            true
                        } else if steps[k - 1].reversed() == germ {
                            false
                        } else {
                            return Err(LiftError::NoContinuation {
                                partial: Walk::new(*x0, out),
                                at: GraphPoint::on_edge(dom, edge, lambda / w.length())
                                    .describe(dom),
                            });
                        }
                    }
                };
                (edge, lambda, forward)
            }
        };

        let total = m.edge_image(edge).length();
        let slack = tol::eps(total);
        let mut to = if forward { from + travel } else { from - travel };
        if to <= slack {
            to = 0.0;
        } else if to >= total - slack {
            to = total;
        }
        out.push(Segment::new(edge, from / total, to / total));
        let e = dom.edge(edge);
        pos = if to == 0.0 {
            Pos::Vertex(e.a)
        } else if to == total {
            Pos::Vertex(e.b)
        } else {
            Pos::Edge { edge, lambda: to }
        };
        if let Pos::Vertex(v) = pos {
            if dom.is_boundary(v) && i + 1 < segments.len() {
                return Err(LiftError::EscapedDomain {
                    partial: Walk::new(*x0, out),
                    boundary: dom.vertex_name(v).to_string(),
                    remaining: remaining_after(i + 1),
                });
            }
        }
    }
    Ok(Walk::new(*x0, out))
}

/// Pairing of two fibers obtained by lifting a connecting walk from every
/// point of the first fiber.
#[derive(Clone, Debug)]
pub struct FiberBijection {
    pub source: GraphPoint,
    pub target: GraphPoint,
    pub path: Walk,
    /// `(a, g(a))` for every `a` in the source fiber.
    pub pairs: Vec<(GraphPoint, GraphPoint)>,
    /// The lift starting at each `a`, in the order of `pairs`.
    pub lifts: Vec<Walk>,
}

impl FiberBijection {
    /// Image of `a` under the pairing.
    pub fn apply(&self, g: &MetricGraph, a: &GraphPoint) -> Option<GraphPoint> {
        self.pairs.iter().find(|(x, _)| x.approx_eq(a, g)).map(|(_, y)| *y)
    }

    /// The pairing as a permutation of `fiber` (source and target fibers
    /// must coincide, as for transport around a loop).
    pub fn permutation(&self, g: &MetricGraph, fiber: &[GraphPoint]) -> Option<Vec<usize>> {
        fiber
            .iter()
            .map(|a| {
                let b = self.apply(g, a)?;
                fiber.iter().position(|x| x.approx_eq(&b, g))
            })
            .collect()
    }
}

/// Transports the fiber over `z1` to the fiber over `z2` along `path`.
pub fn fiber_transport(
    m: &GraphMap,
    z1: &GraphPoint,
    z2: &GraphPoint,
    path: &Walk,
) -> Result<FiberBijection, LiftError> {
    let (dom, cod) = (m.domain(), m.codomain());
    path.validate(cod)?;
    if !path.start().approx_eq(z1, cod) || !path.end(cod).approx_eq(z2, cod) {
        return Err(LiftError::StartMismatch {
            expected: format!("{} -> {}", z1.describe(cod), z2.describe(cod)),
            found: format!("{} -> {}", path.start().describe(cod), path.end(cod).describe(cod)),
        });
    }
    let source_fiber = multiplicity(m, z1)?;
    let target_fiber = multiplicity(m, z2)?;
    let mut pairs = Vec::with_capacity(source_fiber.len());
    let mut lifts = Vec::with_capacity(source_fiber.len());
    for a in &source_fiber.preimages {
        let lift = lift_path(m, path, a)?;
        let end = lift.end(dom);
        if let Some((other, _)) = pairs.iter().find(|(_, b): &&(GraphPoint, GraphPoint)| b.approx_eq(&end, dom)) {
            return Err(LiftError::LiftCollision { a: other.describe(dom), b: a.describe(dom) });
        }
        pairs.push((*a, end));
        lifts.push(lift);
    }
    if target_fiber.len() != pairs.len() {
        return Err(LiftError::FiberMismatch(format!(
            "{} lifts but {} target preimages",
            pairs.len(),
            target_fiber.len()
        )));
    }
    if let Some((_, b)) =
        pairs.iter().find(|(_, b)| !target_fiber.preimages.iter().any(|t| t.approx_eq(b, dom)))
    {
        return Err(LiftError::FiberMismatch(format!(
            "lift endpoint {} is not a preimage of the target",
            b.describe(dom)
        )));
    }
    Ok(FiberBijection { source: *z1, target: *z2, path: path.clone(), pairs, lifts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{SourceDistances, Step};
    use crate::map::fixtures::*;

    /// Loop around the unit `k`-cycle once, starting at vertex 0.
    fn generator_loop(k: usize) -> Walk {
        Walk::new(
            GraphPoint::Vertex(VertexId(0)),
            (0..k).map(|i| Segment::full(Step::new(EdgeId(i), Dir::Fwd))).collect(),
        )
    }

    #[test]
    fn identity_lift_is_the_walk() {
        let m = scaled_tree(1.0);
        let g = m.codomain();
        let alpha = SourceDistances::new(g, GraphPoint::on_edge(g, EdgeId(1), 0.3))
            .unwrap()
            .geodesic_to(g, &GraphPoint::on_edge(g, EdgeId(3), 0.6));
        let beta = lift_path(&m, &alpha, &alpha.start()).unwrap();
        assert!(beta.approx_eq(&alpha, g));
    }

    #[test]
    fn cover_lift_ends_on_next_sheet() {
        let m = cycle_cover(6, 3);
        let alpha = generator_loop(6);
        let x0 = GraphPoint::Vertex(VertexId(0));
        let beta = lift_path(&m, &alpha, &x0).unwrap();
        assert_eq!(beta.length(m.domain()), 6.0);
        assert_eq!(beta.end(m.domain()), GraphPoint::Vertex(VertexId(6)));
        assert!(m.image_of_walk(&beta).equivalent(&alpha, m.codomain()));
    }

    #[test]
    fn lifting_backwards_and_from_interior_points() {
        let m = cycle_cover(6, 3);
        let alpha = generator_loop(6).reversed(m.codomain());
        let beta = lift_path(&m, &alpha, &GraphPoint::Vertex(VertexId(0))).unwrap();
        assert_eq!(beta.end(m.domain()), GraphPoint::Vertex(VertexId(12)));

        let cod = m.codomain();
        let z = GraphPoint::on_edge(cod, EdgeId(2), 0.5);
        let w = Walk::new(z, vec![Segment::new(EdgeId(2), 0.5, 0.0), Segment::new(EdgeId(1), 1.0, 0.5)]);
        let x0 = GraphPoint::on_edge(m.domain(), EdgeId(14), 0.5);
        let beta = lift_path(&m, &w, &x0).unwrap();
        assert_eq!(beta.end(m.domain()), GraphPoint::Interior { edge: EdgeId(13), t: 0.5 });
    }

    #[test]
    fn start_mismatch() {
        let m = cycle_cover(6, 2);
        let err = lift_path(&m, &generator_loop(6), &GraphPoint::Vertex(VertexId(1))).unwrap_err();
        assert!(matches!(err, LiftError::StartMismatch { .. }));
    }

    #[test]
    fn fold_has_no_unique_continuation() {
        let m = fold();
        let cod = m.codomain();
        let alpha = Walk::new(GraphPoint::Vertex(VertexId(1)), vec![Segment::new(EdgeId(0), 1.0, 0.5)]);
        let err = lift_path(&m, &alpha, &GraphPoint::Vertex(VertexId(1))).unwrap_err();
        assert!(matches!(err, LiftError::AmbiguousContinuation { .. }), "{err:?} {cod:?}");
    }

    #[test]
    fn transport_around_generator_is_a_three_cycle() {
        let m = cycle_cover(6, 3);
        let z = GraphPoint::Vertex(VertexId(0));
        let t = fiber_transport(&m, &z, &z, &generator_loop(6)).unwrap();
        let fiber = multiplicity(&m, &z).unwrap().preimages;
        let perm = t.permutation(m.domain(), &fiber).unwrap();
        assert!(perm.iter().enumerate().all(|(i, &j)| i != j));
        let cube: Vec<usize> = (0..3).map(|i| perm[perm[perm[i]]]).collect();
        assert_eq!(cube, vec![0, 1, 2]);
    }

    #[test]
    fn constant_transport_is_identity() {
        let m = cycle_cover(6, 3);
        let z = GraphPoint::on_edge(m.codomain(), EdgeId(4), 0.2);
        let t = fiber_transport(&m, &z, &z, &Walk::constant(z)).unwrap();
        assert_eq!(t.pairs.len(), 3);
        assert!(t.pairs.iter().all(|(a, b)| a.approx_eq(b, m.domain())));
    }
}
