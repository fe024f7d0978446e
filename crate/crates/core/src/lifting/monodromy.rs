use super::homotopy::{contract_loop, lift_homotopy, HomotopyError};
use super::LiftError;
use crate::graph::{GraphPoint, SourceDistances};
use crate::map::{multiplicity, GraphMap};
use crate::walk::Walk;

/// Why two preimages of one point could not be ruled out.
#[derive(Clone, Debug, PartialEq)]
pub enum ObstructionKind {
    /// The projected tether is an essential loop in the codomain.
    NotNullHomotopic { reduced: Walk },
    /// A stage of the contraction lifted into a boundary vertex.
    Escaped { partial: Walk },
    /// Some lift failed for a reason other than escape.
    LiftFailure(String),
    /// Every stage lifted yet the endpoint moved; the inputs are inconsistent.
    Contradiction { move_index: usize },
}

impl ObstructionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObstructionKind::NotNullHomotopic { .. } => "not_null_homotopic",
            ObstructionKind::Escaped { .. } => "escaped",
            ObstructionKind::LiftFailure(_) => "lift_failure",
            ObstructionKind::Contradiction { .. } => "contradiction",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction {
    /// Codomain point with at least two preimages.
    pub point: GraphPoint,
    pub preimages: (GraphPoint, GraphPoint),
    /// Domain geodesic between the two preimages.
    pub tether: Walk,
    pub kind: ObstructionKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MonodromyOutcome {
    Injective { fibers_checked: usize },
    Obstruction(Box<Obstruction>),
}

impl MonodromyOutcome {
    pub fn is_injective(&self) -> bool {
        matches!(self, MonodromyOutcome::Injective { .. })
    }
}

/// Runs the tether argument over every codomain vertex and every codomain
/// edge midpoint.
///
/// Fibers are constant along open codomain edges, so these probes see every
/// fiber. For a fiber with two preimages `x0 != y0`, a domain geodesic from
/// `x0` to `y0` projects to a loop at the common image. Contracting that
/// loop and lifting the contraction from `x0` would keep the lifted endpoint
/// at `y0` while shrinking the lift to the constant walk at `x0`, which is
/// impossible; the step that fails is reported.
pub fn monodromy_injectivity(m: &GraphMap) -> MonodromyOutcome {
    let (dom, cod) = (m.domain(), m.codomain());
    let probes = cod
        .vertex_ids()
        .map(GraphPoint::Vertex)
        .chain(cod.edge_ids().map(|c| GraphPoint::on_edge(cod, c, 0.5)));
    let mut fibers_checked = 0;
    for z in probes {
        fibers_checked += 1;
        let fiber = match multiplicity(m, &z) {
            Ok(f) => f,
            Err(e) => {
                return obstruction(
                    z,
                    (z, z),
                    Walk::constant(z),
                    ObstructionKind::LiftFailure(e.to_string()),
                )
            }
        };
        if fiber.len() < 2 {
            continue;
        }
        let (x0, y0) = (fiber.preimages[0], fiber.preimages[1]);
        let tether = SourceDistances::new(dom, x0)
            .expect("preimage lies on the domain")
            .geodesic_to(dom, &y0);
        let projected = m.image_of_walk(&tether);
        let kind = match contract_loop(cod, &projected) {
            Err(HomotopyError::NotNullHomotopic { reduced }) => {
                ObstructionKind::NotNullHomotopic { reduced }
            }
            Err(e) => ObstructionKind::LiftFailure(e.to_string()),
            Ok(h) => {
                let beta = match super::lift_path(m, &h.base, &x0) {
                    Ok(beta) => beta,
                    Err(e) => {
                        return obstruction(z, (x0, y0), tether, lift_kind(e));
                    }
                };
                match lift_homotopy(m, &h, &beta) {
                    Ok(last) => {
                        // The final stage is constant, so its lift ends at x0
                        // while every stage kept the endpoint of `beta`.
                        debug_assert!(last.is_constant());
                        ObstructionKind::Contradiction { move_index: h.moves.len() }
                    }
                    Err(HomotopyError::EndpointMoved { index }) => {
                        ObstructionKind::Contradiction { move_index: index }
                    }
                    Err(HomotopyError::Lift(e)) | Err(HomotopyError::MoveLiftFailure { source: e, .. }) => {
                        lift_kind(e)
                    }
                    Err(e) => ObstructionKind::LiftFailure(e.to_string()),
                }
            }
        };
        return obstruction(z, (x0, y0), tether, kind);
    }
    MonodromyOutcome::Injective { fibers_checked }
}

fn lift_kind(e: LiftError) -> ObstructionKind {
    match e {
        LiftError::EscapedDomain { partial, .. } => ObstructionKind::Escaped { partial },
        e => ObstructionKind::LiftFailure(e.to_string()),
    }
}

fn obstruction(
    point: GraphPoint,
    preimages: (GraphPoint, GraphPoint),
    tether: Walk,
    kind: ObstructionKind,
) -> MonodromyOutcome {
    MonodromyOutcome::Obstruction(Box::new(Obstruction { point, preimages, tether, kind }))
}
