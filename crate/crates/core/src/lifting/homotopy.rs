use thiserror::Error;

use super::{lift_path, LiftError};
use crate::graph::MetricGraph;
use crate::map::GraphMap;
use crate::walk::{Segment, Walk, WalkError};

/// Elementary endpoint-fixed homotopy of a walk.
#[derive(Clone, Debug, PartialEq)]
pub enum Move {
    /// Insert `segment` followed by its reversal before position `at`.
    InsertSpur { at: usize, segment: Segment },
    /// Delete segments `at` and `at + 1`, which must form a spur.
    DeleteSpur { at: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomotopyError {
    #[error("walk is not a loop")]
    NotALoop,
    #[error("loop is not null-homotopic; its reduced form has {} segments", reduced.segments().len())]
    NotNullHomotopic { reduced: Walk },
    #[error("move {index} does not apply to the current walk")]
    InvalidMove { index: usize },
    #[error("invalid walk: {0}")]
    InvalidWalk(#[from] WalkError),
    #[error("lift of the base walk failed: {0}")]
    Lift(LiftError),
    #[error("move {index} has no lift: {source}")]
    MoveLiftFailure { index: usize, source: LiftError },
    #[error("the lifted endpoint moved at move {index}")]
    EndpointMoved { index: usize },
    #[error("the incremental lift disagrees with a fresh lift after move {index}")]
    LiftMismatch { index: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// A base walk and a sequence of spur moves applied to it in order.
#[derive(Clone, Debug, PartialEq)]
pub struct Homotopy {
    pub base: Walk,
    pub moves: Vec<Move>,
}

impl Homotopy {
    pub fn new(base: Walk, moves: Vec<Move>) -> Self {
        Homotopy { base, moves }
    }

    /// Applies one move to `walk`, or returns `None` if it does not apply.
    pub fn apply(g: &MetricGraph, walk: &Walk, mv: &Move) -> Option<Walk> {
        let mut segs = walk.segments().to_vec();
        match *mv {
            Move::DeleteSpur { at } => {
                if at + 1 >= segs.len() || !segs[at].is_reversed_by(&segs[at + 1], g) {
                    return None;
                }
                segs.drain(at..at + 2);
            }
            Move::InsertSpur { at, segment } => {
                if at > segs.len()
                    || !segment.start_point(g).approx_eq(&walk.point_before(g, at), g)
                {
                    return None;
                }
                segs.splice(at..at, [segment, segment.reversed()]);
            }
        }
        Some(Walk::new(walk.start(), segs))
    }

    /// Every intermediate walk, starting with the base.
    pub fn stages(&self, g: &MetricGraph) -> Result<Vec<Walk>, HomotopyError> {
        let mut out = vec![self.base.clone()];
        for (index, mv) in self.moves.iter().enumerate() {
            let next = Homotopy::apply(g, out.last().expect("nonempty"), mv)
                .ok_or(HomotopyError::InvalidMove { index })?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn final_walk(&self, g: &MetricGraph) -> Result<Walk, HomotopyError> {
        Ok(self.stages(g)?.pop().expect("nonempty"))
    }
}

/// Contracts a loop to its base point by spur deletions.
///
/// The loop is first refined so every backtrack is an exact spur; free
/// reduction with a stack then deletes spurs one at a time. On a tree every
/// loop reduces to the constant walk. A nonempty reduced word is returned
/// as [`HomotopyError::NotNullHomotopic`].
pub fn contract_loop(g: &MetricGraph, loop_: &Walk) -> Result<Homotopy, HomotopyError> {
    loop_.validate(g)?;
    if !loop_.is_loop(g) {
        return Err(HomotopyError::NotALoop);
    }
    let base = loop_.refined();
    let mut stack: Vec<Segment> = Vec::with_capacity(base.segments().len());
    let mut moves = Vec::new();
    for s in base.segments() {
        match stack.last() {
            Some(top) if top.is_reversed_by(s, g) => {
                moves.push(Move::DeleteSpur { at: stack.len() - 1 });
                stack.pop();
            }
            _ => stack.push(*s),
        }
    }
    if !stack.is_empty() {
        return Err(HomotopyError::NotNullHomotopic { reduced: Walk::new(base.start(), stack) });
    }
    Ok(Homotopy { base, moves })
}

/// Lifts every stage of `h` starting from the lift `beta` of its base.
///
/// Each move is lifted locally: a spur deletion removes the matching pair of
/// lifted segments and a spur insertion lifts the inserted segment from the
/// current point. After every move the result is compared with a fresh lift
/// of the new stage and its endpoint with the previous endpoint. Returns the
/// lift of the final stage.
pub fn lift_homotopy(m: &GraphMap, h: &Homotopy, beta: &Walk) -> Result<Walk, HomotopyError> {
    let (dom, cod) = (m.domain(), m.codomain());
    beta.validate(dom)?;
    if !m.image_of_walk(beta).equivalent(&h.base, cod) {
        return Err(HomotopyError::PreconditionViolated(
            "the image of beta is not the base of the homotopy".into(),
        ));
    }
    let x0 = beta.start();
    let mut down = h.base.clone();
    let mut up = lift_path(m, &down, &x0).map_err(HomotopyError::Lift)?;
    let end = up.end(dom);
    if !end.approx_eq(&beta.end(dom), dom) {
        return Err(HomotopyError::PreconditionViolated(
            "beta is not the lift of the base from its start".into(),
        ));
    }

    for (index, mv) in h.moves.iter().enumerate() {
        let next_down =
            Homotopy::apply(cod, &down, mv).ok_or(HomotopyError::InvalidMove { index })?;
        let mut segs = up.segments().to_vec();
        match *mv {
            Move::DeleteSpur { at } => {
                if !segs[at].is_reversed_by(&segs[at + 1], dom) {
                    return Err(HomotopyError::LiftMismatch { index });
                }
                segs.drain(at..at + 2);
            }
            Move::InsertSpur { at, segment } => {
                let from = up.point_before(dom, at);
                let piece = Walk::new(segment.start_point(cod), vec![segment]);
                let lifted = lift_path(m, &piece, &from)
                    .map_err(|source| HomotopyError::MoveLiftFailure { index, source })?;
                let s = lifted.segments()[0];
                segs.splice(at..at, [s, s.reversed()]);
            }
        }
        let next_up = Walk::new(x0, segs);
        let fresh = lift_path(m, &next_down, &x0)
            .map_err(|source| HomotopyError::MoveLiftFailure { index, source })?;
        if !fresh.approx_eq(&next_up, dom) {
            return Err(HomotopyError::LiftMismatch { index });
        }
        if !next_up.end(dom).approx_eq(&end, dom) {
            return Err(HomotopyError::EndpointMoved { index });
        }
        down = next_down;
        up = next_up;
    }
    Ok(up)
}
