use rayon::prelude::*;

use super::{GraphMap, MapError};
use crate::graph::{point_distance_from_vertex_distances, DistanceTable, GraphPoint, Net};
use crate::tol;

/// Measured local bilipschitz constant of a map at scale `r0`.
///
/// Distances restricted to an edge are piecewise linear, so the constant
/// measured on a net of spacing `mesh` is exact up to `O(mesh)`.
#[derive(Clone, Debug)]
pub struct LocalBilipschitzReport {
    pub l: f64,
    pub r0: f64,
    pub mesh: f64,
    /// Pair of domain net points realizing `l`, if any pair was compared.
    pub worst_pair: Option<(GraphPoint, GraphPoint)>,
    pub net_size: usize,
    pub pairs_checked: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Worst {
    ratio: f64,
    i: usize,
    j: usize,
}

impl Worst {
    /// Larger ratio wins; ties go to the lexicographically smaller pair so
    /// the parallel reduction is deterministic.
    fn max(self, other: Worst) -> Worst {
        match self.ratio.total_cmp(&other.ratio) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => other,
            std::cmp::Ordering::Equal => {
                if (self.i, self.j) <= (other.i, other.j) {
                    self
                } else {
                    other
                }
            }
        }
    }
}

/// Largest distortion `max(d'(Up,Uq)/d(p,q), d(p,q)/d'(Up,Uq))` over pairs
/// of net points lying in a common ball `B(x, r0)` centred at a net point.
///
/// Each qualifying pair is visited once: `q` ranges over net points within
/// `2 r0` of `p`, and the pair is kept when the sorted lists of centres
/// within `r0` of `p` and of `q` intersect.
///
/// Fails with [`MapError::NotLocallyInjective`] when two distinct net
/// points in such a ball share an image.
pub fn local_bilipschitz_constant(
    m: &GraphMap,
    r0: f64,
    mesh: f64,
) -> Result<LocalBilipschitzReport, MapError> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(MapError::InvalidScale(format!("r0 = {r0} must be positive")));
    }
    if !(mesh > 0.0) || mesh > r0 / 4.0 + tol::eps(r0) {
        return Err(MapError::InvalidScale(format!("mesh = {mesh} must lie in (0, r0/4]")));
    }
    let (dom, cod) = (m.domain(), m.codomain());
    let dom_table = DistanceTable::new(dom);
    let cod_table = DistanceTable::new(cod);
    let net = Net::new(dom, mesh);
    let points = net.points();
    let images: Vec<GraphPoint> = points.iter().map(|p| m.image_point(p)).collect();
    let dvs: Vec<Vec<f64>> = points.par_iter().map(|p| dom_table.from_point(dom, p)).collect();
    let centers: Vec<Vec<usize>> = (0..points.len())
        .into_par_iter()
        .map(|i| net.members_in_ball(dom, &points[i], &dvs[i], r0))
        .collect();

    // per point: worst pair and pair count, or a collapsed pair
    type Row = Result<(Option<Worst>, u64), (usize, usize)>;
    let per_point: Vec<Row> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Option<Worst> = None;
            let mut count = 0u64;
            for j in net.members_in_ball(dom, &points[i], &dvs[i], 2.0 * r0) {
                if j <= i || !sorted_intersect(&centers[i], &centers[j]) {
                    continue;
                }
                let d = point_distance_from_vertex_distances(dom, &points[i], &dvs[i], &points[j]);
                if d <= tol::eps(r0) {
                    continue;
                }
                let d_img = cod_table.between(cod, &images[i], &images[j]);
                if d_img <= tol::REL_TOL * d + tol::ABS_TOL {
                    return Err((i, j));
                }
                count += 1;
                let w = Worst { ratio: (d_img / d).max(d / d_img), i, j };
                best = Some(best.map_or(w, |b| b.max(w)));
            }
            Ok((best, count))
        })
        .collect();

    let mut best: Option<Worst> = None;
    let mut pairs_checked = 0;
    for r in per_point {
        match r {
            Ok((w, count)) => {
                pairs_checked += count;
                if let Some(w) = w {
                    best = Some(best.map_or(w, |b| b.max(w)));
                }
            }
            Err((i, j)) => {
                return Err(MapError::NotLocallyInjective {
                    p: points[i].describe(dom),
                    q: points[j].describe(dom),
                })
            }
        }
    }
    Ok(LocalBilipschitzReport {
        l: best.map_or(1.0, |w| w.ratio.max(1.0)),
        r0,
        mesh,
        worst_pair: best.map(|w| (points[w.i], points[w.j])),
        net_size: points.len(),
        pairs_checked,
    })
}

fn sorted_intersect(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::graph::MetricGraph;

    #[test]
    fn identity_has_constant_one() {
        let g = MetricGraph::builder()
            .vertices(["a", "b", "c", "d"])
            .edge("a", "b", 1.0)
            .edge("b", "c", 2.0)
            .edge("b", "d", 0.5)
            .edge("c", "d", 2.0)
            .build()
            .unwrap();
        let r = local_bilipschitz_constant(&GraphMap::identity(&g), 0.25, 0.25 / 16.0).unwrap();
        assert!((r.l - 1.0).abs() < 1e-12);
        assert!(r.pairs_checked > 0);
    }

    #[test]
    fn uniform_scaling_by_two() {
        let m = scaled_tree(2.0);
        let r0 = m.default_r0();
        let r = local_bilipschitz_constant(&m, r0, r0 / 16.0).unwrap();
        assert!((r.l - 2.0).abs() < 1e-9, "L = {}", r.l);
    }

    #[test]
    fn cycle_cover_is_a_local_isometry() {
        let m = cycle_cover(6, 3);
        let r = local_bilipschitz_constant(&m, 0.5, 0.5 / 16.0).unwrap();
        assert!((r.l - 1.0).abs() < 1e-9);
        // scale past half the codomain circumference: sheets wrap
        let r = local_bilipschitz_constant(&m, 4.0, 0.25);
        assert!(r.is_err() || r.unwrap().l > 1.0 + 1e-6);
    }

    #[test]
    fn rejects_bad_mesh() {
        let m = scaled_tree(1.0);
        assert!(matches!(
            local_bilipschitz_constant(&m, 1.0, 0.5),
            Err(MapError::InvalidScale(_))
        ));
        assert!(matches!(
            local_bilipschitz_constant(&m, 0.0, 0.1),
            Err(MapError::InvalidScale(_))
        ));
    }

    #[test]
    fn fold_is_caught() {
        let m = fold();
        let err = local_bilipschitz_constant(&m, 0.4, 0.1).unwrap_err();
        assert!(matches!(err, MapError::NotLocallyInjective { .. }));
    }
}
