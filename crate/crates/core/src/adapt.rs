//! Adaptive loop: solve, estimate, mark, refine.

use std::path::Path;

use crate::app::{export, StudyRecord};
use crate::assembly::{solve_problem, AssemblyConfig, DiscreteSolution, ProblemSpec};
use crate::error::{MeshError, Result};
use crate::estimate::{eta, EstimatorConfig, ErrorIndicators};
use crate::mesh::{glue_elements, regularity_report, split_elements, PolygonalMesh, RegularityLimits};

/// Greedy bulk marking: elements by descending `η_K²` (ties by smaller id)
/// until the marked sum reaches `θ Σ η_K²`. `θ = 0` marks nothing.
pub fn doerfler_mark(eta: &[f64], theta: f64) -> Vec<usize> {
    if theta <= 0.0 {
        return Vec::new();
    }
    let total: f64 = eta.iter().map(|e| e * e).sum();
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    let goal = theta * total;
    let mut sum = 0.0;
    let mut marked = Vec::new();
    for k in order {
        if sum >= goal || eta[k] <= 0.0 {
            break;
        }
        sum += eta[k] * eta[k];
        marked.push(k);
    }
    marked
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptConfig {
    pub theta: f64,
    pub max_dof: usize,
    pub max_steps: usize,
    pub order: usize,
    pub limits: RegularityLimits,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self { theta: 0.5, max_dof: 30_000, max_steps: 40, order: 1, limits: RegularityLimits::default() }
    }
}

/// State after the last completed step.
#[derive(Debug, Clone)]
pub struct LoopState {
    pub step: usize,
    pub mesh: PolygonalMesh,
    /// `None` after coarsening until the next solve.
    pub solution: Option<DiscreteSolution>,
    pub indicators: Option<ErrorIndicators>,
    pub history: Vec<StudyRecord>,
    /// Elements marked in each refinement step.
    pub marked: Vec<Vec<usize>>,
    /// Sibling pairs `(child_a, child_b)` of splits that can be undone.
    pub siblings: Vec<(usize, usize)>,
    /// Elements violating the regularity limits, per step.
    pub irregular: Vec<Vec<usize>>,
}

/// Unknowns of the discrete system, bubbles included.
pub fn dof_count(sol: &DiscreteSolution) -> usize {
    sol.handler.num_free() + sol.handler.num_bubbles()
}

/// Runs the loop from `mesh` until `max_dof` or `max_steps`; artifacts of
/// every step go to `out` when given.
pub fn adapt_loop(
    mesh: PolygonalMesh,
    problem: &ProblemSpec,
    config: &AdaptConfig,
    cfg: &AssemblyConfig,
    est: &EstimatorConfig,
    out: Option<&Path>,
) -> Result<LoopState> {
    assert!((0.0..=1.0).contains(&config.theta), "theta must lie in [0, 1]");
    let mut state = LoopState {
        step: 0,
        mesh,
        solution: None,
        indicators: None,
        history: Vec::new(),
        marked: Vec::new(),
        siblings: Vec::new(),
        irregular: Vec::new(),
    };
    loop {
        let sol = solve_problem(&state.mesh, config.order, problem, cfg)?;
        let ind = eta(&state.mesh, &sol, problem, cfg, est)?;
        let rec = StudyRecord::measure(state.step, &state.mesh, &sol, &ind, problem, cfg, est, state.history.last(), true)?;
        state.irregular.push(regularity_report(&state.mesh, &config.limits).failures(&config.limits));
        if let Some(dir) = out {
            export::write_step(dir, state.step, &state.mesh, &ind)?;
        }
        state.history.push(rec);
        let dof = dof_count(&sol);
        state.solution = Some(sol);
        if let Some(dir) = out {
            export::write_history(&dir.join("history.csv"), &state.history)?;
        }
        if dof >= config.max_dof || state.step + 1 >= config.max_steps {
            state.indicators = Some(ind);
            return Ok(state);
        }
        let marked = doerfler_mark(&ind.eta, config.theta);
        state.indicators = Some(ind);
        if marked.is_empty() {
            return Ok(state);
        }
        refine_marked(&mut state, &marked)?;
        state.step += 1;
    }
}

fn refine_marked(state: &mut LoopState, marked: &[usize]) -> Result<()> {
    let (mesh, records) = split_elements(&state.mesh, marked)?;
    state.siblings.retain(|&(a, b)| !marked.contains(&a) && !marked.contains(&b));
    state.siblings.extend(records.iter().map(|r| (r.child_a, r.child_b)));
    state.mesh = mesh;
    state.marked.push(marked.to_vec());
    state.solution = None;
    state.indicators = None;
    Ok(())
}

/// Glues sibling pairs; ids refer to the current mesh. The solution and
/// indicators are dropped.
pub fn coarsen(mut state: LoopState, pairs: &[(usize, usize)]) -> Result<LoopState> {
    let mut pending: Vec<(usize, usize)> = pairs.to_vec();
    while let Some((a, b)) = pending.pop() {
        let pos = state
            .siblings
            .iter()
            .position(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
            .ok_or(MeshError::NotSiblings(a, b))?;
        state.siblings.swap_remove(pos);
        let g = glue_elements(&state.mesh, a, b)?;
        let map = |k: usize| g.element_map[k];
        state.siblings = state.siblings.iter().filter_map(|&(x, y)| Some((map(x)?, map(y)?))).collect();
        pending = pending.iter().map(|&(x, y)| Some((map(x)?, map(y)?))).collect::<Option<Vec<_>>>().ok_or(MeshError::NotSiblings(a, b))?;
        state.mesh = g.mesh;
    }
    state.solution = None;
    state.indicators = None;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn marking_examples() {
        assert_eq!(doerfler_mark(&[4.0, 3.0, 2.0, 1.0], 0.5), vec![0]);
        assert_eq!(doerfler_mark(&[1.0, 0.0, 2.0], 1.0), vec![2, 0]);
        assert!(doerfler_mark(&[1.0, 2.0], 0.0).is_empty());
        assert_eq!(doerfler_mark(&[1.0, 1.0, 1.0], 0.5), vec![0, 1]);
    }

    proptest! {
        #[test]
        fn greedy_matches_exhaustive_minimum(eta in proptest::collection::vec(0.0f64..10.0, 1..=12), theta in 0.01f64..=1.0) {
            let marked = doerfler_mark(&eta, theta);
            let total: f64 = eta.iter().map(|e| e * e).sum();
            let sum: f64 = marked.iter().map(|&k| eta[k] * eta[k]).sum();
            prop_assert!(sum >= theta * total || marked.len() == eta.iter().filter(|e| **e > 0.0).count());
            let n = eta.len();
            let best = (0u32..1 << n)
                .filter(|s| (0..n).filter(|i| s >> i & 1 == 1).map(|i| eta[i] * eta[i]).sum::<f64>() >= theta * total)
                .map(|s| s.count_ones() as usize)
                .min();
            if let Some(best) = best {
                prop_assert_eq!(marked.len(), best);
            }
        }
    }
}
