//! Command-line front end.
//!
//! Every command writes one artifact (stdout or `--out`). Failures print
//! `{"error": code-name, "detail": message}` on stderr and exit with the code
//! of [`Error::exit_code`].

pub mod grid;
pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::compare::{
    theorem2_check, theorem3_check, theorem_prime_check, Comparison, ComparisonReport, Ensemble,
    Summary,
};
use crate::error::{Error, Result};
use crate::functional::{area_functional, gradient, h_area_functional, h_gradient, PotentialSpec};
use crate::optimize::{
    maximize_hyperbolic, maximize_potential_hyperbolic, minimize_potential_sphere, minimize_sphere,
    OptimizerOpts,
};
use crate::quadrature::{Method, QuadratureSpec};
use crate::regions::json::{parse_region, AnyRegion};
use crate::regions::{Domain, Shape};
use crate::{HyperPoint, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Projected area at a tangent point.
    Eval,
    /// Riemannian gradient at a tangent point.
    Grad,
    /// Minimize over the sphere.
    Optimize,
    /// Multi-start maximization over hyperbolic space.
    HypOptimize,
    /// Compare the extremum with the area-matched disc.
    CompareDisc,
    /// Run the invariant suite on the built-in fixtures.
    Verify,
    /// Sample the functional on an angular grid (CSV).
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    S2,
    H2,
}

/// One CLI invocation.
#[derive(Clone, Debug, Parser)]
#[command(
    name = "gnomon",
    version,
    about = "Gnomonic projection areas on S^n and H^n"
)]
pub struct JobSpec {
    #[arg(value_enum)]
    pub command: Command,
    /// Region document (JSON).
    #[arg(long)]
    pub region: Option<PathBuf>,
    /// Tangent point as a JSON array; hyperbolic points accept spatial or full coordinates.
    #[arg(long)]
    pub point: Option<String>,
    /// auto | cap | polygon | mc
    #[arg(long, default_value = "auto")]
    pub quad: String,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 100_000_000)]
    pub max_evals: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    /// Grid cells per angular axis.
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Distance profile for potential functionals, e.g. `power:1`, `exp:-1`.
    #[arg(long)]
    pub potential: Option<String>,
    /// Compare a seeded ensemble instead of `--region`.
    #[arg(long, value_enum)]
    pub ensemble: Option<Space>,
    /// cap-union | perturbed-polygon
    #[arg(long, default_value = "perturbed-polygon")]
    pub shape: String,
    /// Caps or vertices per ensemble member.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Measure of every ensemble member.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub area: f64,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

/// Artifact text plus an optional failure to report after writing it.
#[derive(Debug)]
pub struct Outcome {
    pub artifact: String,
    pub failure: Option<Error>,
}

impl Outcome {
    fn ok(artifact: String) -> Self {
        Self {
            artifact,
            failure: None,
        }
    }
}

impl JobSpec {
    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let q = QuadratureSpec {
            method: self.quad.parse::<Method>()?,
            rel_tol: self.rel_tol,
            mc_samples: self.mc_samples,
            seed: self.seed,
            max_evals: self.max_evals,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn optimizer(&self) -> Result<OptimizerOpts> {
        let o = OptimizerOpts {
            grad_tol: self.grad_tol,
            max_iters: self.max_iters,
            starts: self.starts,
            seed: self.seed,
            ..OptimizerOpts::default()
        };
        o.validate()?;
        Ok(o)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(if self.command == Command::Grid {
            Format::Csv
        } else {
            Format::Json
        })
    }

    /// Command-specific checks that run before any computation.
    pub fn validate(&self) -> Result<()> {
        self.quadrature()?;
        self.optimizer()?;
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidOption(format!(
                    "{} requires {what}",
                    self.name()
                )))
            }
        };
        match self.command {
            Command::Eval | Command::Grad => {
                need(self.region.is_some(), "--region")?;
                need(self.point.is_some(), "--point")?;
            }
            Command::Optimize | Command::HypOptimize => need(self.region.is_some(), "--region")?,
            Command::Grid => {
                need(self.region.is_some(), "--region")?;
                need(self.res >= 1, "--res >= 1")?;
            }
            Command::CompareDisc => {
                need(
                    self.region.is_some() != self.ensemble.is_some(),
                    "exactly one of --region, --ensemble",
                )?;
                if self.ensemble.is_some() {
                    self.shape.parse::<Shape>()?;
                    need(self.count >= 1 && self.k >= 1, "--count >= 1 and --k >= 1")?;
                    need(self.area > 0.0, "--area > 0")?;
                }
            }
            Command::Verify => {}
        }
        let csv_ok = matches!(
            self.command,
            Command::Eval | Command::CompareDisc | Command::Grid
        );
        need(self.format() == Format::Json || csv_ok, "--format json")?;
        need(
            self.format() == Format::Csv || self.command != Command::Grid,
            "--format csv",
        )?;
        if let Some(p) = &self.potential {
            need(
                matches!(
                    self.command,
                    Command::Optimize | Command::HypOptimize | Command::CompareDisc
                ),
                "no --potential",
            )?;
            p.parse::<PotentialSpec>()?;
        }
        Ok(())
    }

    fn name(&self) -> String {
        self.command
            .to_possible_value()
            .map_or_else(String::new, |v| v.get_name().to_string())
    }

    fn load_region(&self) -> Result<AnyRegion> {
        let path = self.region.as_ref().expect("validated");
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        parse_region(&src)
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_coords(src: &str) -> Result<Vec<f64>> {
    serde_json::from_str(src).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("--point: {e}"),
    })
}

fn sphere_point(src: &str, n: usize) -> Result<SpherePoint> {
    let c = parse_coords(src)?;
    if c.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: c.len(),
        });
    }
    SpherePoint::new(c)
}

fn hyper_point(src: &str, n: usize) -> Result<HyperPoint> {
    let c = parse_coords(src)?;
    match c.len() {
        l if l == n => Ok(HyperPoint::from_spatial(&c)),
        l if l == n + 1 => HyperPoint::new(c),
        l => Err(Error::DimensionMismatch {
            expected: n + 1,
            got: l,
        }),
    }
}

fn eval(job: &JobSpec, q: &QuadratureSpec) -> Result<String> {
    let point = job.point.as_deref().expect("validated");
    let (x, e) = match job.load_region()? {
        AnyRegion::Sphere(r) => {
            let x = sphere_point(point, r.dim())?;
            let e = area_functional(&r, &x, q)?;
            (x.into_coords(), e)
        }
        AnyRegion::Hyper(r) => {
            let x = hyper_point(point, r.dim())?;
            let e = h_area_functional(&r, &x, q)?;
            (x.into_coords(), e)
        }
    };
    Ok(match job.format() {
        Format::Json => to_json(&json!({
            "point": x,
            "value": e.value,
            "err_est": e.err_est,
            "evals": e.evals,
            "method_used": e.method_used,
        })),
        Format::Csv => format!(
            "value,err_est,evals,method_used\n{},{},{},{}\n",
            e.value,
            e.err_est,
            e.evals,
            serde_json::to_value(e.method_used)
                .expect("serializable")
                .as_str()
                .unwrap_or_default()
        ),
    })
}

fn grad(job: &JobSpec, q: &QuadratureSpec) -> Result<String> {
    let point = job.point.as_deref().expect("validated");
    let (x, g, norm) = match job.load_region()? {
        AnyRegion::Sphere(r) => {
            let x = sphere_point(point, r.dim())?;
            let g = gradient(&r, &x, q)?;
            let norm = g.norm();
            (x.into_coords(), g.into_vec(), norm)
        }
        AnyRegion::Hyper(r) => {
            let x = hyper_point(point, r.dim())?;
            let g = h_gradient(&r, &x, q)?;
            let norm = g.norm();
            (x.into_coords(), g.into_vec(), norm)
        }
    };
    Ok(to_json(&json!({"point": x, "gradient": g, "norm": norm})))
}

fn potential(job: &JobSpec) -> Result<Option<PotentialSpec>> {
    job.potential.as_deref().map(str::parse).transpose()
}

fn optimize(job: &JobSpec, q: &QuadratureSpec, o: &OptimizerOpts) -> Result<String> {
    let AnyRegion::Sphere(r) = job.load_region()? else {
        return Err(Error::InvalidOption(
            "optimize needs a spherical region (use hyp-optimize)".into(),
        ));
    };
    let found = match potential(job)? {
        Some(p) => minimize_potential_sphere(&r, &p, q, o)?,
        None => minimize_sphere(&r, q, o)?,
    };
    Ok(to_json(&vec![found]))
}

fn hyp_optimize(job: &JobSpec, q: &QuadratureSpec, o: &OptimizerOpts) -> Result<String> {
    let AnyRegion::Hyper(r) = job.load_region()? else {
        return Err(Error::InvalidOption(
            "hyp-optimize needs a hyperbolic region (use optimize)".into(),
        ));
    };
    let found = match potential(job)? {
        Some(p) => vec![maximize_potential_hyperbolic(&r, &p, q, o)?],
        None => maximize_hyperbolic(&r, q, o)?,
    };
    Ok(to_json(&found))
}

fn compare_disc(job: &JobSpec, q: &QuadratureSpec, o: &OptimizerOpts) -> Result<Outcome> {
    let cmp = match potential(job)? {
        Some(p) => Comparison::Potential(p),
        None => Comparison::Area,
    };
    let reports: Vec<ComparisonReport> = match job.ensemble {
        Some(space) => Ensemble {
            hyperbolic: space == Space::H2,
            shape: job.shape.parse()?,
            k: job.k,
            count: job.count,
            area: job.area,
            seed: job.seed,
        }
        .run(&cmp, q, o)?,
        None => {
            let r = job.load_region()?;
            let id = job.region.as_ref().and_then(|p| p.file_stem()).map_or_else(
                || "region".to_string(),
                |s| s.to_string_lossy().into_owned(),
            );
            vec![match (&cmp, &r) {
                (Comparison::Area, AnyRegion::Sphere(s)) => theorem2_check(&id, s, q, o)?,
                (Comparison::Area, AnyRegion::Hyper(h)) => theorem3_check(&id, h, q, o)?,
                (Comparison::Potential(p), _) => theorem_prime_check(&id, &r, p, q, o)?,
            }]
        }
    };
    let summary = Summary::of(&reports);
    let artifact = match job.format() {
        Format::Json => to_json(&json!({"reports": reports, "summary": summary})),
        Format::Csv => {
            let mut s = String::from("region_id,region_measure,cap_radius,region_extremum,cap_extremum,gap,equality_flag\n");
            for r in &reports {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.region_id,
                    r.region_measure,
                    r.cap_radius,
                    r.region_extremum,
                    r.cap_extremum,
                    r.gap,
                    r.equality_flag as u8
                )
                .expect("string write");
            }
            s
        }
    };
    let failure = (summary.violations > 0).then(|| {
        Error::VerificationFailed(format!(
            "{} of {} comparisons have gap below -{:e} (min gap {:e})",
            summary.violations,
            summary.count,
            crate::compare::GAP_TOL,
            summary.min_gap
        ))
    });
    Ok(Outcome { artifact, failure })
}

fn verify_cmd(job: &JobSpec, q: &QuadratureSpec, o: &OptimizerOpts) -> Outcome {
    let report = verify::run_suite(q, o, job.seed);
    let failure = (report.failed > 0).then(|| {
        let names: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        Error::VerificationFailed(format!(
            "{} of {} checks failed: {}",
            report.failed,
            report.checks.len(),
            names.join(", ")
        ))
    });
    Outcome {
        artifact: to_json(&report),
        failure,
    }
}

/// Executes a validated job and returns its artifact.
pub fn run(job: &JobSpec) -> Result<Outcome> {
    job.validate()?;
    let q = job.quadrature()?;
    let o = job.optimizer()?;
    let work = || match job.command {
        Command::Eval => eval(job, &q).map(Outcome::ok),
        Command::Grad => grad(job, &q).map(Outcome::ok),
        Command::Optimize => optimize(job, &q, &o).map(Outcome::ok),
        Command::HypOptimize => hyp_optimize(job, &q, &o).map(Outcome::ok),
        Command::CompareDisc => compare_disc(job, &q, &o),
        Command::Verify => Ok(verify_cmd(job, &q, &o)),
        Command::Grid => grid::grid(&job.load_region()?, job.res, &q).map(Outcome::ok),
    };
    if job.threads == 0 {
        return work();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(job.threads)
        .build()
        .map_err(|e| Error::InvalidOption(format!("--threads: {e}")))?
        .install(work)
}

fn error_body(e: &Error) -> String {
    json!({"error": e.code_name(), "detail": e.to_string()}).to_string()
}

/// Parses `args`, runs the job, writes its artifact and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let job = match JobSpec::try_parse_from(args) {
        Ok(job) => job,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let detail = e.kind().to_string();
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or(&detail)
                .trim_start_matches("error: ");
            eprintln!("{}", json!({"error": "invalid-option", "detail": first}));
            return 1;
        }
    };
    let outcome = match run(&job) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}", error_body(&e));
            return e.exit_code();
        }
    };
    let written = match &job.out {
        Some(path) => std::fs::write(path, &outcome.artifact)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(outcome.artifact.as_bytes())
                .map_err(|e| Error::Io(e.to_string()))
        }
    };
    if let Err(e) = written {
        eprintln!("{}", error_body(&e));
        return e.exit_code();
    }
    match outcome.failure {
        Some(e) => {
            eprintln!("{}", error_body(&e));
            e.exit_code()
        }
        None => 0,
    }
}
