mod common;

use bemfem::adapt::{adapt_loop, coarsen, dof_count, AdaptConfig};
use bemfem::app::{builtin_problem, eoc, export, run_adaptive_study};
use bemfem::assembly::{solve_problem, AssemblyConfig};
use bemfem::error::{Error, MeshError};
use bemfem::estimate::EstimatorConfig;
use bemfem::mesh::io::load_mesh;
use common::*;

fn defaults() -> (AssemblyConfig, EstimatorConfig) {
    (AssemblyConfig::default(), EstimatorConfig::default())
}

#[test]
fn smooth_problem_estimate_decreases() {
    let p = builtin_problem("sinsin").unwrap();
    let (cfg, est) = defaults();
    let ac = AdaptConfig { max_steps: 10, ..AdaptConfig::default() };
    let s = adapt_loop(p.initial_mesh(), &p.spec, &ac, &cfg, &est, None).unwrap();
    assert_eq!(s.history.len(), 10);
    assert!(s.history[9].eta_r < s.history[0].eta_r);
    assert!(s.history.windows(2).all(|w| w[1].dof >= w[0].dof));
}

#[test]
fn first_marking_localises_at_the_singularity() {
    let p = builtin_problem("jump_singular").unwrap();
    let (cfg, est) = defaults();
    let m0 = p.initial_mesh();
    let ac = AdaptConfig { max_steps: 2, ..AdaptConfig::default() };
    let s = adapt_loop(m0.clone(), &p.spec, &ac, &cfg, &est, None).unwrap();
    let marked = &s.marked[0];
    assert!(!marked.is_empty());
    let touching = marked.iter().filter(|&&k| m0.element_points(k).iter().any(|q| q.norm() < 1e-12)).count();
    let beside = marked
        .iter()
        .filter(|&&k| {
            let c = m0.element(k).kernel_center;
            c.x * c.y < 0.0 && c.norm() < 0.5
        })
        .count();
    let n = marked.len() as f64;
    assert!(touching as f64 >= 0.6 * n, "{marked:?}");
    assert!(beside as f64 >= 0.6 * n, "{marked:?}");
}

#[test]
fn dof_budget_reached_means_no_refinement() {
    let p = builtin_problem("jump_singular").unwrap();
    let (cfg, est) = defaults();
    let m0 = p.initial_mesh();
    let dof = dof_count(&solve_problem(&m0, 1, &p.spec, &cfg).unwrap());
    let ac = AdaptConfig { max_dof: dof, ..AdaptConfig::default() };
    let s = adapt_loop(m0.clone(), &p.spec, &ac, &cfg, &est, None).unwrap();
    assert_eq!(s.history.len(), 1);
    assert!(s.marked.is_empty());
    assert_eq!(s.mesh.num_elements(), m0.num_elements());
}

#[test]
fn dof_growth_is_bounded_by_marked_elements() {
    let p = builtin_problem("jump_singular").unwrap();
    let (cfg, est) = defaults();
    for k in 1..=2 {
        let ac = AdaptConfig { max_steps: 8, order: k, ..AdaptConfig::default() };
        let s = adapt_loop(p.initial_mesh(), &p.spec, &ac, &cfg, &est, None).unwrap();
        // a split adds at most two nodes, three edges and one element
        let per_element = 2 + 3 * (k - 1) + k * (k - 1) / 2;
        for (i, w) in s.history.windows(2).enumerate() {
            let growth = w[1].dof - w[0].dof;
            assert!(growth <= 2 * s.marked[i].len() * per_element, "k={k} step {i}: {growth}");
        }
    }
}

#[test]
fn coarsening_undoes_refinement() {
    let p = builtin_problem("jump_singular").unwrap();
    let (cfg, est) = defaults();
    let ac = AdaptConfig { max_steps: 2, ..AdaptConfig::default() };
    let s = adapt_loop(p.initial_mesh(), &p.spec, &ac, &cfg, &est, None).unwrap();
    let before = s.mesh.num_elements();
    let pairs = s.siblings.clone();
    assert_eq!(pairs.len(), s.marked[0].len());
    let c = coarsen(s.clone(), &pairs).unwrap();
    assert_eq!(c.mesh.num_elements(), before - pairs.len());
    assert_eq!(c.mesh.num_elements(), p.initial_mesh().num_elements());
    assert!(c.solution.is_none() && c.indicators.is_none());
    let f = Fixture { name: "coarsened".into(), mesh: c.mesh, area: 4.0 };
    assert!(geometry_violations(&f).is_empty());

    // two elements that were never split together
    assert!(pairs.len() >= 2);
    let (a, b) = (pairs[0].0, pairs[1].1);
    match coarsen(s, &[(a, b)]) {
        Err(Error::Mesh(MeshError::NotSiblings(x, y))) => assert_eq!((x, y), (a, b)),
        other => panic!("expected NotSiblings, got {:?}", other.map(|s| s.mesh.num_elements())),
    }
}

#[test]
fn loop_writes_artifacts_and_deterministic_history() {
    let p = builtin_problem("jump_singular").unwrap();
    let (cfg, est) = defaults();
    let ac = AdaptConfig { max_steps: 4, ..AdaptConfig::default() };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let rows = run_adaptive_study(&p, &ac, &cfg, &est, Some(d1.path())).unwrap();
    run_adaptive_study(&p, &ac, &cfg, &est, Some(d2.path())).unwrap();
    let h1 = std::fs::read(d1.path().join("history.csv")).unwrap();
    let h2 = std::fs::read(d2.path().join("history.csv")).unwrap();
    assert_eq!(h1, h2);
    let text = String::from_utf8(h1).unwrap();
    assert_eq!(text.lines().next(), Some(export::CSV_HEADER));
    assert_eq!(text.lines().count(), rows.len() + 1);
    for step in 0..rows.len() {
        let m = load_mesh(&d1.path().join(format!("step_{step:03}.polymesh"))).unwrap();
        assert!((m.area() - 4.0).abs() < 1e-12);
        let vtk = std::fs::read_to_string(d1.path().join(format!("step_{step:03}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
        assert!(vtk.contains("SCALARS eta") && vtk.contains("SCALARS delta"));
    }
}

#[test]
fn eoc_columns_are_recomputable() {
    let p = builtin_problem("jump_singular").unwrap();
    let (cfg, est) = defaults();
    let ac = AdaptConfig { max_steps: 6, ..AdaptConfig::default() };
    let rows = run_adaptive_study(&p, &ac, &cfg, &est, None).unwrap();
    for w in rows.windows(2) {
        let (x0, x1) = ((w[0].dof as f64).powf(-0.5), (w[1].dof as f64).powf(-0.5));
        let e = eoc(w[0].energy_error.unwrap(), w[1].energy_error.unwrap(), x0, x1);
        let l = eoc(w[0].l2_error.unwrap(), w[1].l2_error.unwrap(), x0, x1);
        assert!((e - w[1].eoc_energy.unwrap()).abs() <= 1e-12);
        assert!((l - w[1].eoc_l2.unwrap()).abs() <= 1e-12);
    }
    // and from the written table, up to its 13 significant digits
    let csv = export::history_csv(&rows);
    let parsed: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect()).collect();
    for w in parsed.windows(2) {
        let e = eoc(w[0][5], w[1][5], w[0][2].powf(-0.5), w[1][2].powf(-0.5));
        assert!((e - w[1][7]).abs() <= 1e-9 * (1.0 + e.abs()), "{e} vs {}", w[1][7]);
    }
}
