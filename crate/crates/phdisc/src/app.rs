//! Subcommand dispatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use phdisc_core::assembly::io_map_description;
use phdisc_core::element::{build_dirac_pair, compute_matrices, element_state_space};
use phdisc_core::simulate::run;
use phdisc_core::sparse::CsrMatrix;
use phdisc_core::{compose_chain, sparsity_report, Hamiltonian, Scenario};

use crate::config::{parse_config, ConfigError, MeshSpec, RunConfig};
use crate::io::{write_csv, write_triplets};
use crate::verify::run_suite;

#[derive(Debug, Parser)]
#[command(
    name = "phdisc",
    version,
    about = "Structure-preserving discretization of 1D port-Hamiltonian systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suite; exit status 1 on any failure.
    Verify(Common),
    /// Print M1..M6, E, F and (A, B, C, D) of one element.
    Matrices {
        #[command(flatten)]
        common: Common,
        /// 1-based element index.
        #[arg(long, default_value_t = 1)]
        element: usize,
    },
    /// Write A_N, B_N, C_N, D_N as triplet files plus a sparsity report.
    Assemble(Common),
    /// Integrate the configured scenario and write `simulation.csv`.
    Simulate(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `out_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub n_elements: Option<usize>,
    /// One value, or a comma-separated list with one value per element.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sigma: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or arguments: exit code 2.
    Usage(anyhow::Error),
    /// Invariant violation or runtime error: exit code 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<phdisc_core::Error> for Failure {
    fn from(e: phdisc_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl Common {
    pub fn load(&self) -> Result<RunConfig, Failure> {
        let text = fs::read_to_string(&self.config)
            .with_context(|| format!("reading {}", self.config.display()))
            .map_err(Failure::Usage)?;
        let usage = |e: ConfigError| Failure::Usage(anyhow::Error::new(e).context(self.config.display().to_string()));
        let mut cfg = parse_config(&text).map_err(usage)?;
        if let Some(n) = self.n_elements {
            cfg.mesh = MeshSpec::Uniform(n);
        }
        if let Some(s) = &self.sigma {
            cfg.sigma = s.clone();
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn execute<W: Write>(cli: &Cli, out: &mut W) -> Result<(), Failure> {
    match &cli.command {
        Command::Verify(common) => verify(&common.load()?, out),
        Command::Matrices { common, element } => matrices(&common.load()?, *element, out),
        Command::Assemble(common) => assemble(&common.load()?, out),
        Command::Simulate(common) => simulate(&common.load()?, out),
    }
}

fn io_err(e: std::io::Error) -> Failure {
    Failure::Runtime(e.into())
}

fn verify<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<(), Failure> {
    let mesh = cfg.build_mesh()?;
    let report = run_suite(&mesh, &cfg.sigma)?;
    write!(out, "{report}").map_err(io_err)?;
    if report.passed() {
        writeln!(out, "all {} checks passed", report.checks.len()).map_err(io_err)?;
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed()).count();
        Err(Failure::Runtime(anyhow::anyhow!("{failed} invariant check(s) failed")))
    }
}

fn matrices<W: Write>(cfg: &RunConfig, index: usize, out: &mut W) -> Result<(), Failure> {
    let mesh = cfg.build_mesh()?;
    let el = mesh.element_of(index).map_err(|e| Failure::Usage(e.into()))?;
    let sigma = if cfg.sigma.len() == 1 {
        cfg.sigma[0]
    } else {
        cfg.sigma[index - 1]
    };
    let m = compute_matrices(&el, sigma)?;
    let pair = build_dirac_pair(&m)?;
    let model = element_state_space(&pair)?;
    let w = |out: &mut W, name: &str, body: String| writeln!(out, "{name} ={body}").map_err(io_err);
    writeln!(
        out,
        "element {index}: [{}, {}], h = {}, sigma = {sigma}",
        el.a, el.b, el.h
    )
    .map_err(io_err)?;
    for (name, mat) in [
        ("M1", &m.m1),
        ("M2", &m.m2),
        ("M3", &m.m3),
        ("M4", &m.m4),
        ("M5", &m.m5),
    ] {
        w(out, name, format!("{mat:.6}"))?;
    }
    w(out, "M6", format!("{:.6}", m.m6))?;
    w(out, "E", format!("{:.6}", pair.e))?;
    w(out, "F", format!("{:.6}", pair.f))?;
    w(out, "A", format!("{:.6}", model.a))?;
    w(out, "B", format!("{:.6}", model.b))?;
    w(out, "C", format!("{:.6}", model.c))?;
    w(out, "D", format!("{:.6}", model.d))?;
    Ok(())
}

fn assemble<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<(), Failure> {
    let mesh = cfg.build_mesh()?;
    let model = compose_chain(&mesh, &cfg.sigma)?;
    create_dir(&cfg.out_dir)?;
    let d = CsrMatrix::from_dense(&DMatrix::from_column_slice(2, 2, model.d.as_slice()), 0.0);
    for (name, m) in [
        ("A.txt", &model.a),
        ("B.txt", &model.b),
        ("C.txt", &model.c),
        ("D.txt", &d),
    ] {
        let path = cfg.out_dir.join(name);
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_triplets(std::io::BufWriter::new(file), m).with_context(|| format!("writing {}", path.display()))?;
    }
    let report = sparsity_report(&model, cfg.threshold);
    let text = format!("{report}\n\n{}", io_map_description(&model));
    let path = cfg.out_dir.join("sparsity.txt");
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    writeln!(out, "{text}").map_err(io_err)?;
    writeln!(
        out,
        "wrote A.txt, B.txt, C.txt, D.txt, sparsity.txt to {}",
        cfg.out_dir.display()
    )
    .map_err(io_err)?;
    Ok(())
}

fn simulate<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<(), Failure> {
    let missing = |k: &str| {
        Failure::Usage(anyhow::anyhow!(
            "simulate needs `{k}` (or its shorthand) in the configuration"
        ))
    };
    let dp = cfg.density_p.ok_or_else(|| missing("density_p"))?.build()?;
    let dq = cfg.density_q.ok_or_else(|| missing("density_q"))?.build()?;
    let mesh = cfg.build_mesh()?;
    let model = compose_chain(&mesh, &cfg.sigma)?;
    let ham = Hamiltonian::new(&mesh, dp, dq, cfg.quad_order)?;
    let inputs = [cfg.signal_left.build(), cfg.signal_right.build()];
    let scenario = Scenario::new(model, ham, inputs, cfg.integrator, cfg.dt, cfg.t_end, None)?;
    let result = run(&scenario)?;
    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("simulation.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(std::io::BufWriter::new(file), &result).with_context(|| format!("writing {}", path.display()))?;
    writeln!(out, "rows: {}", result.len()).map_err(io_err)?;
    writeln!(out, "H(t_end) = {:.6e}", result.hamiltonian[result.len() - 1]).map_err(io_err)?;
    writeln!(out, "max |yᵀu| = {:.6e}", result.max_power()).map_err(io_err)?;
    writeln!(
        out,
        "max |ΔH/Δt - yᵀu| (central, interior) = {:.6e}",
        result.max_power_residual()
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "max per-step midpoint balance = {:.6e}",
        result.max_midpoint_balance()
    )
    .map_err(io_err)?;
    writeln!(out, "wrote {}", path.display()).map_err(io_err)?;
    Ok(())
}
