//! CSV tables, legacy VTK indicator files and gnuplot data.

use std::fmt::Write as _;
use std::path::Path;

use super::StudyRecord;
use crate::error::Result;
use crate::estimate::ErrorIndicators;
use crate::mesh::{io::save_mesh, PolygonalMesh};

pub const CSV_HEADER: &str = "step,h_max,dof,eta_R,delta_R,energy_error,l2_error,eoc_energy,eoc_l2";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

pub fn history_csv(rows: &[StudyRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.12e},{},{:.12e},{:.12e},{},{},{},{}",
            r.step,
            r.h_max,
            r.dof,
            r.eta_r,
            r.delta_r,
            opt(r.energy_error),
            opt(r.l2_error),
            opt(r.eoc_energy),
            opt(r.eoc_l2)
        );
    }
    s
}

pub fn write_history(path: &Path, rows: &[StudyRecord]) -> Result<()> {
    std::fs::write(path, history_csv(rows))?;
    Ok(())
}

/// Unstructured grid with one polygon cell per element and cell arrays
/// `eta` and `delta`.
pub fn indicator_vtk(mesh: &PolygonalMesh, ind: &ErrorIndicators) -> String {
    let mut s = String::from("# vtk DataFile Version 3.0\nerror indicators\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.num_nodes());
    for n in mesh.nodes() {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", n.position.x, n.position.y);
    }
    let size: usize = mesh.elements().iter().map(|e| e.num_vertices() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.num_elements(), size);
    for el in mesh.elements() {
        let ids: Vec<String> = el.boundary_loop.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", el.num_vertices(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.num_elements());
    for _ in 0..mesh.num_elements() {
        s.push_str("7\n");
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.num_elements());
    for (name, vals) in [("eta", &ind.eta), ("delta", &ind.delta)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in vals.iter() {
            let _ = writeln!(s, "{v:.16e}");
        }
    }
    s
}

/// `step_###.polymesh` and `step_###.vtk`.
pub fn write_step(dir: &Path, step: usize, mesh: &PolygonalMesh, ind: &ErrorIndicators) -> Result<()> {
    save_mesh(mesh, &dir.join(format!("step_{step:03}.polymesh")))?;
    std::fs::write(dir.join(format!("step_{step:03}.vtk")), indicator_vtk(mesh, ind))?;
    Ok(())
}

/// Two-column files `<prefix>_energy.dat`, `<prefix>_eta.dat` and
/// `<prefix>_l2.dat` against DoF.
pub fn write_gnuplot(dir: &Path, prefix: &str, rows: &[StudyRecord]) -> Result<()> {
    let curves: [(&str, fn(&StudyRecord) -> Option<f64>); 3] =
        [("energy", |r| r.energy_error), ("eta", |r| Some(r.eta_r)), ("l2", |r| r.l2_error)];
    for (name, f) in curves {
        let mut s = format!("# dof {name}\n");
        for r in rows {
            if let Some(v) = f(r) {
                let _ = writeln!(s, "{} {v:.12e}", r.dof);
            }
        }
        std::fs::write(dir.join(format!("{prefix}_{name}.dat")), s)?;
    }
    Ok(())
}
