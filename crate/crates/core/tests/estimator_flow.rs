mod common;

use std::f64::consts::PI;

use bemfem::app::{builtin_problem, eoc, run_uniform_study};
use bemfem::assembly::{solve_problem, AssemblyConfig};
use bemfem::estimate::{
    bubble_constants, eta, interpolation_ratios, oscillation, poincare_patch_bound, quasi_interpolate, patch_triangles, EstimatorConfig,
    InterpolationVariant,
};
use bemfem::geometry::Point2;
use bemfem::mesh::{build_patches, BoundaryClass};
use common::*;
use proptest::prelude::*;

fn sinsin(x: Point2) -> f64 {
    (PI * x.x).sin() * (PI * x.y).sin()
}

fn sinsin_grad(x: Point2) -> Point2 {
    Point2::new(PI * (PI * x.x).cos() * (PI * x.y).sin(), PI * (PI * x.x).sin() * (PI * x.y).cos())
}

#[test]
fn eta_follows_the_h1_error_on_the_smooth_study() {
    let p = builtin_problem("sinsin").unwrap();
    let (cfg, est) = (AssemblyConfig::default(), EstimatorConfig::default());
    for k in 1..=2 {
        let rows = run_uniform_study(&p, k, 4, &cfg, &est).unwrap();
        let (a, b) = (&rows[2], &rows[3]);
        let eoc_eta = eoc(a.eta_r, b.eta_r, a.h_max, b.h_max);
        let eoc_h1 = b.eoc_energy.unwrap();
        assert!((eoc_eta - eoc_h1).abs() <= 0.1, "k={k}: {eoc_eta} vs {eoc_h1}");
        // efficiency: no blow-up of the effectivity
        let eff: Vec<f64> = rows.iter().map(|r| r.eta_r / r.energy_error.unwrap()).collect();
        assert!(eff.windows(2).all(|w| w[1] <= 1.2 * w[0]), "{eff:?}");
    }
}

#[test]
fn oscillation_is_of_higher_order() {
    let p = builtin_problem("sinsin").unwrap();
    let (cfg, est) = (AssemblyConfig::default(), EstimatorConfig::default());
    let total = |n: usize| oscillation(&p.mesh(n), &p.spec, 1, &cfg, &est).iter().map(|v| v * v).sum::<f64>().sqrt();
    let (o1, o2) = (total(4), total(8));
    // h_K ‖f - Π_1 f‖ decays like h^3
    assert!(eoc(o1, o2, 1.0, 0.5) > 2.7, "{o1} {o2}");
}

#[test]
fn poincare_bounds_are_finite_on_the_corpus() {
    for f in corpus() {
        let t = build_patches(&f.mesh);
        let families = [&t.node, &t.node_tilde, &t.edge, &t.edge_tilde, &t.element, &t.element_tilde];
        for fam in families {
            for p in fam.iter() {
                let b = poincare_patch_bound(&f.mesh, &t, p);
                assert!(b.bound.is_finite() && b.bound > 0.0, "{} {:?} {}: {}", f.name, p.kind, p.anchor, b.bound);
            }
        }
    }
}

#[test]
fn poincare_bound_dominates_monte_carlo_estimate() {
    let mut r = rng(21);
    let corpus = corpus();
    let mut checked = 0;
    for f in corpus.iter().step_by(3) {
        let t = build_patches(&f.mesh);
        for p in [&t.node[f.mesh.num_nodes() / 2], &t.node_tilde[f.mesh.num_nodes() / 3], &t.element[0]] {
            let b = poincare_patch_bound(&f.mesh, &t, p);
            let lower = monte_carlo_poincare(&patch_triangles(&t, p), p.diameter, &mut r, 64);
            assert!(b.bound >= lower, "{} {:?}: bound {} < estimate {lower}", f.name, p.kind, b.bound);
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

#[test]
fn interpolation_ratio_stays_bounded_under_refinement() {
    let maxima: Vec<f64> = (0..4)
        .map(|i| {
            let m = l_tiles(2 << i);
            let t = build_patches(&m);
            let q = quasi_interpolate(&m, &t, &sinsin, InterpolationVariant::Tilde, 8);
            let r = interpolation_ratios(&m, &t, &q, &sinsin, &sinsin_grad, 8).unwrap();
            r.into_iter().fold(0.0, f64::max)
        })
        .collect();
    let (lo, hi) = maxima.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo <= 1.5, "{maxima:?}");
    assert!(maxima[3] <= maxima[0] * 1.05, "{maxima:?}");
}

#[test]
fn bubble_constants_are_finite_on_the_corpus() {
    for f in corpus().iter().take(20) {
        for el in f.mesh.elements() {
            let c = bubble_constants(&f.mesh, el.id, 2);
            let all = [c.element_mass, c.element_gradient].into_iter().chain(c.edge_mass).chain(c.edge_gradient).chain(c.edge_extension);
            for v in all {
                assert!(v.is_finite() && v > 0.0, "{} element {}: {v}", f.name, el.id);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn indicators_are_nonnegative_and_vanish_on_dirichlet_edges(seed in 0u64..500, k in 1usize..=2) {
        let p = builtin_problem("sinsin").unwrap();
        let base = Fixture { name: "ltiles".into(), mesh: p.mesh(2), area: 1.0 };
        let (refined, _) = random_refinements(&base, seed, 2);
        let mesh = &refined[1].mesh;
        let (cfg, est) = (AssemblyConfig::default(), EstimatorConfig::default());
        let sol = solve_problem(mesh, k, &p.spec, &cfg).unwrap();
        let ind = eta(mesh, &sol, &p.spec, &cfg, &est).unwrap();
        for v in ind.eta.iter().chain(&ind.element_residual).chain(&ind.edge_residual).chain(&ind.delta) {
            prop_assert!(*v >= 0.0 && v.is_finite());
        }
        for e in mesh.edges() {
            if e.boundary_class == BoundaryClass::Dirichlet && e.is_boundary() {
                prop_assert_eq!(ind.edge_residual[e.id], 0.0);
            }
        }
        let sum: f64 = ind.eta.iter().map(|v| v * v).sum();
        prop_assert!((sum.sqrt() - ind.eta_r).abs() <= 1e-12 * ind.eta_r);
    }
}
