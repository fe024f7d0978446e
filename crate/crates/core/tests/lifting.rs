mod common;

use bilip::corpus::{gen_cycle_cover, gen_tree_perturbed};
use bilip::graph::{distance, Dir, EdgeId, GraphPoint, MetricGraph, SourceDistances, VertexId};
use bilip::lifting::{contract_loop, fiber_transport, lift_homotopy, lift_path, HomotopyError};
use bilip::map::{local_bilipschitz_constant, multiplicity};
use bilip::walk::Walk;
use common::{random_point, random_walk};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn triangle() -> MetricGraph {
    MetricGraph::builder()
        .vertices(["a", "b", "c"])
        .edge("a", "b", 1.0)
        .edge("b", "c", 1.0)
        .edge("c", "a", 1.0)
        .build()
        .unwrap()
}

/// Net signed traversals of edge `e0`; on a cycle this is the class of the
/// loop in the fundamental group.
fn winding(w: &Walk) -> i64 {
    w.segments()
        .iter()
        .filter(|s| s.edge == EdgeId(0))
        .map(|s| if s.dir() == Dir::Fwd { 1 } else { -1 })
        .sum()
}

/// Every closed walk of full steps on the triangle up to `len` steps from `a`.
fn closed_walks(g: &MetricGraph, len: usize) -> Vec<Walk> {
    let mut out = Vec::new();
    let mut stack = vec![(VertexId(0), Vec::new())];
    while let Some((v, steps)) = stack.pop() {
        if !steps.is_empty() && v == VertexId(0) {
            out.push(Walk::from_steps(g, &steps).unwrap());
        }
        if steps.len() == len {
            continue;
        }
        for &s in g.germs(v) {
            let mut next = steps.clone();
            next.push(s);
            stack.push((g.step_end(s), next));
        }
    }
    out
}

#[test]
fn triangle_loops_contract_iff_winding_is_zero() {
    let g = triangle();
    let loops = closed_walks(&g, 9);
    assert!(loops.len() > 100);
    for w in &loops {
        let k = winding(w);
        match contract_loop(&g, w) {
            Ok(h) => {
                assert_eq!(k, 0, "{w:?}");
                assert!(h.final_walk(&g).unwrap().is_constant());
            }
            Err(HomotopyError::NotNullHomotopic { reduced }) => {
                assert_ne!(k, 0);
                assert!((reduced.length(&g) - 3.0 * k.abs() as f64).abs() < 1e-9);
            }
            Err(e) => panic!("{e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_lifts_project_back_and_respect_stretch(
        n in 2usize..14,
        seed in 0u64..10_000,
        steps in 0usize..12,
        walk_seed in any::<u64>(),
    ) {
        let m = gen_tree_perturbed(n, 3.0, seed).unwrap();
        let (dom, cod) = (m.domain(), m.codomain());
        let mut rng = ChaCha8Rng::seed_from_u64(walk_seed);
        let x = VertexId(rng.random_range(0..dom.vertex_count()));
        let alpha = random_walk(cod, m.vertex_image(x), steps, true, &mut rng);
        let x0 = multiplicity(&m, &alpha.start()).unwrap().preimages[0];
        let beta = lift_path(&m, &alpha, &x0).unwrap();
        prop_assert!(m.image_of_walk(&beta).equivalent(&alpha, cod));
        let l = local_bilipschitz_constant(&m, m.default_r0(), m.default_r0() / 16.0).unwrap().l;
        let (la, lb) = (alpha.length(cod), beta.length(dom));
        let eps = 1e-9 * la;
        prop_assert!(la / l - eps <= lb && lb <= l * la + eps, "{la} {lb} {l}");
    }

    #[test]
    fn reversed_lift_retraces(k in 3usize..7, n in 1usize..4, walk_seed in any::<u64>()) {
        let m = gen_cycle_cover(k, n).unwrap();
        let (dom, cod) = (m.domain(), m.codomain());
        let mut rng = ChaCha8Rng::seed_from_u64(walk_seed);
        let alpha = random_walk(cod, VertexId(0), rng.random_range(0..20), true, &mut rng);
        let fiber = multiplicity(&m, &alpha.start()).unwrap();
        prop_assert_eq!(fiber.len(), n);
        for x0 in &fiber.preimages {
            let beta = lift_path(&m, &alpha, x0).unwrap();
            prop_assert!((beta.length(dom) - alpha.length(cod)).abs() < 1e-9);
            let back = lift_path(&m, &alpha.reversed(cod), &beta.end(dom)).unwrap();
            prop_assert!(back.equivalent(&beta.reversed(dom), dom));
        }
    }

    #[test]
    fn projected_loops_lift_to_closed_contractions(
        n in 2usize..12,
        seed in 0u64..10_000,
        steps in 1usize..10,
        walk_seed in any::<u64>(),
    ) {
        let m = gen_tree_perturbed(n, 3.0, seed).unwrap();
        let (dom, cod) = (m.domain(), m.codomain());
        let mut rng = ChaCha8Rng::seed_from_u64(walk_seed);
        let x = VertexId(rng.random_range(0..dom.vertex_count()));
        let out = random_walk(dom, x, steps, false, &mut rng);
        let home = SourceDistances::new(dom, out.end(dom)).unwrap().geodesic_to(dom, &GraphPoint::Vertex(x));
        let gamma = out.concat(&home);
        let alpha = m.image_of_walk(&gamma);
        let h = contract_loop(cod, &alpha).unwrap();
        let beta = lift_path(&m, &alpha, &GraphPoint::Vertex(x)).unwrap();
        prop_assert!(beta.end(dom).approx_eq(&GraphPoint::Vertex(x), dom));
        let last = lift_homotopy(&m, &h, &beta).unwrap();
        prop_assert!(last.is_constant());
        prop_assert!(last.start().approx_eq(&GraphPoint::Vertex(x), dom));
    }

    #[test]
    fn transport_composes_along_concatenated_paths(
        k in 3usize..7,
        n in 2usize..4,
        walk_seed in any::<u64>(),
    ) {
        let m = gen_cycle_cover(k, n).unwrap();
        let (dom, cod) = (m.domain(), m.codomain());
        let mut rng = ChaCha8Rng::seed_from_u64(walk_seed);
        let p = random_walk(cod, VertexId(rng.random_range(0..k)), rng.random_range(0..10), true, &mut rng);
        let z1 = p.start();
        let z2 = p.end(cod);
        let z3 = random_point(cod, &mut rng);
        let q = SourceDistances::new(cod, z2).unwrap().geodesic_to(cod, &z3);
        let tp = fiber_transport(&m, &z1, &z2, &p).unwrap();
        let tq = fiber_transport(&m, &z2, &z3, &q).unwrap();
        let tpq = fiber_transport(&m, &z1, &z3, &p.concat(&q)).unwrap();
        prop_assert_eq!(tpq.pairs.len(), n);
        for (a, c) in &tpq.pairs {
            let b = tp.apply(dom, a).unwrap();
            prop_assert!(tq.apply(dom, &b).unwrap().approx_eq(c, dom));
            prop_assert!(distance(dom, a, c).unwrap() <= p.concat(&q).length(cod) + 1e-9);
        }
    }
}
