use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hpdg::formats::{self, FieldHeader};
use hpdg::study::{run_study, scf_config, write_outputs};
use hpdg::StudyConfig;
use hpdg_core::scf::solve_ground_state;
use hpdg_core::{assemble_sip, build_graded_mesh, HpSpace, PenaltyConfig};

#[derive(Parser)]
#[command(name = "hpdg", version, about = "Graded hp-DG ground states and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the level sweep against a finer reference and write tables.
    Study(Overrides),
    /// Solve one level and print the eigenvalue.
    Solve {
        #[command(flatten)]
        overrides: Overrides,
        /// Write the solution coefficients here.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Write the lower triangle of the linear SIP matrix here.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Print the elements and faces of a graded mesh.
    Mesh {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 2)]
        levels: usize,
    },
}

#[derive(Args)]
struct Overrides {
    /// `key = value` file; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    min_level: Option<String>,
    #[arg(long)]
    p0: Option<String>,
    #[arg(long)]
    slope: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    pot_sign: Option<String>,
    /// 2, 3, 4 or linear.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    penalty: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    ref_extra_levels: Option<String>,
    #[arg(long)]
    ref_extra_degree: Option<String>,
    /// half-up, floor or ceil.
    #[arg(long)]
    rounding: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Overrides {
    fn resolve(&self) -> anyhow::Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                StudyConfig::from_kv_str(&text)?
            }
            None => StudyConfig::default(),
        };
        let pairs = [
            ("dim", &self.dim),
            ("sigma", &self.sigma),
            ("levels", &self.levels),
            ("ell_min", &self.min_level),
            ("p0", &self.p0),
            ("slope", &self.slope),
            ("alpha", &self.alpha),
            ("pot_sign", &self.pot_sign),
            ("delta", &self.delta),
            ("penalty", &self.penalty),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("theta", &self.theta),
            ("ref_extra_levels", &self.ref_extra_levels),
            ("ref_extra_degree", &self.ref_extra_degree),
            ("rounding", &self.rounding),
            ("out", &self.out),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Study(o) => {
            let cfg = o.resolve()?;
            let outcome = run_study(&cfg)?;
            write_outputs(&outcome, &cfg.out).with_context(|| format!("writing {}", cfg.out.display()))?;
            print!("{}", formats::convergence_csv(&outcome.records));
            for l in outcome.levels.iter().filter(|l| !l.converged) {
                eprintln!("level {} did not converge (residual {:e})", l.ell, l.residual);
            }
            if !outcome.reference.converged {
                eprintln!("reference did not converge (residual {:e})", outcome.reference.residual);
            }
            Ok(outcome.all_converged())
        }
        Command::Solve { overrides, field, dump_matrix } => {
            let cfg = overrides.resolve()?;
            let mesh = Arc::new(build_graded_mesh(cfg.dim, cfg.sigma, cfg.levels)?);
            let space = Arc::new(HpSpace::new(mesh, cfg.p0, cfg.slope, cfg.rounding)?);
            let scf = scf_config(&cfg);
            if let Some(path) = dump_matrix {
                let a = assemble_sip(&space, &cfg.potential(), &PenaltyConfig { alpha0: cfg.penalty })?;
                fs::write(&path, formats::matrix_dump(&a)).with_context(|| format!("writing {}", path.display()))?;
            }
            let report = solve_ground_state(&space, &scf)?;
            print!("{}", formats::scf_log(&report.lambda_history, &report.residual_history));
            println!("N {} lambda {:.16e} converged {}", space.ndofs(), report.lambda, report.converged);
            if let Some(path) = field {
                let text = formats::write_field(&FieldHeader::of(&space), report.solution.coeffs());
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(report.converged)
        }
        Command::Mesh { dim, sigma, levels } => {
            let mesh = build_graded_mesh(dim, sigma, levels)?;
            print!("{}", formats::mesh_dump(&mesh));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
