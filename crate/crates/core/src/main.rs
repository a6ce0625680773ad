use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bemfem::adapt::AdaptConfig;
use bemfem::app::config::RunConfig;
use bemfem::app::{builtin_problem, export, run_adaptive_study, run_uniform_study, StudyRecord};
use bemfem::assembly::solve_problem;
use bemfem::error::{Error, Result};
use bemfem::estimate::eta;
use bemfem::mesh::io::{load_mesh, save_mesh};
use bemfem::mesh::{regularity_report, split_elements, RegularityLimits};

#[derive(Parser)]
#[command(name = "bemfem", version, about = "Adaptive BEM-based FEM on polygonal meshes")]
struct Cli {
    /// key = value file overriding numerical parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a mesh file and print its regularity parameters.
    CheckMesh { file: PathBuf },
    /// Solve a built-in problem on a given mesh.
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convergence study on uniformly refined meshes.
    UniformStudy {
        #[arg(long, default_value = "sinsin")]
        problem: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adaptive refinement driven by the residual indicators.
    AdaptiveStudy {
        #[arg(long, default_value = "jump_singular")]
        problem: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, default_value_t = 30_000)]
        max_dof: usize,
        #[arg(long, default_value_t = 60)]
        max_steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split the listed elements and write the refined mesh.
    Refine {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_delimiter = ',')]
        elements: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_table(order: usize, rows: &[StudyRecord]) {
    println!("order {order}");
    print!("{}", export::history_csv(rows));
}

fn write_study(dir: &Path, rows: &[StudyRecord]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    export::write_history(&dir.join("history.csv"), rows)?;
    export::write_gnuplot(dir, "curve", rows)
}

fn run(cli: Cli) -> Result<()> {
    let rc = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let (cfg, est) = (rc.assembly, rc.estimator);
    match cli.command {
        Command::CheckMesh { file } => {
            let mesh = load_mesh(&file)?;
            mesh.check_consistency()?;
            let limits = RegularityLimits::default();
            let rep = regularity_report(&mesh, &limits);
            println!(
                "nodes {} edges {} elements {} area {:.12}",
                mesh.num_nodes(),
                mesh.num_edges(),
                mesh.num_elements(),
                mesh.area()
            );
            println!("sigma {:.6} c {:.6} aux aspect {:.6}", rep.sigma_max, rep.c_max, rep.max_aux_aspect);
            let bad = rep.failures(&limits);
            if !bad.is_empty() {
                return Err(Error::Problem(format!("elements violate the regularity limits: {bad:?}")));
            }
            println!("ok");
        }
        Command::Solve { mesh, problem, order, out } => {
            let p = builtin_problem(&problem)?;
            let mesh = load_mesh(&mesh)?;
            let sol = solve_problem(&mesh, order, &p.spec, &cfg)?;
            let ind = eta(&mesh, &sol, &p.spec, &cfg, &est)?;
            let rec = StudyRecord::measure(0, &mesh, &sol, &ind, &p.spec, &cfg, &est, None, false)?;
            std::fs::create_dir_all(&out)?;
            export::write_step(&out, 0, &mesh, &ind)?;
            export::write_history(&out.join("history.csv"), std::slice::from_ref(&rec))?;
            std::fs::write(out.join("indicators.txt"), ind.dump())?;
            print_table(order, &[rec]);
        }
        Command::UniformStudy { problem, orders, levels, out } => {
            let p = builtin_problem(&problem)?;
            for k in orders {
                let rows = run_uniform_study(&p, k, levels, &cfg, &est)?;
                write_study(&out.join(format!("order_{k}")), &rows)?;
                print_table(k, &rows);
            }
        }
        Command::AdaptiveStudy { problem, orders, theta, max_dof, max_steps, out } => {
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::Config(format!("theta must lie in [0, 1], got {theta}")));
            }
            let p = builtin_problem(&problem)?;
            for k in orders {
                let ac = AdaptConfig { theta, max_dof, max_steps, order: k, ..AdaptConfig::default() };
                let dir = out.join(format!("order_{k}"));
                let rows = run_adaptive_study(&p, &ac, &cfg, &est, Some(&dir))?;
                write_study(&dir, &rows)?;
                print_table(k, &rows);
            }
        }
        Command::Refine { mesh, elements, out } => {
            let m = load_mesh(&mesh)?;
            let (refined, records) = split_elements(&m, &elements)?;
            save_mesh(&refined, &out)?;
            for r in records {
                println!("split {} -> {} {}", r.parent, r.child_a, r.child_b);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let threads = std::env::var("BEMFEM_THREADS").ok().and_then(|v| v.parse().ok());
    bemfem::parallel::init_threads(threads);
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
