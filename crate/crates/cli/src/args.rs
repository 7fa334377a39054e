//! Command-line flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser};

use crate::job::{parse_domain, CommandKind, JobSpec, PlotFormat, Tolerances};
use crate::run::run;

#[derive(Debug, Parser)]
#[command(name = "sasaki", version, about = "Sasakian 3-manifold structures: construction and verification")]
pub struct Cli {
    /// Command to run; may instead come from the job file
    #[arg(value_enum)]
    pub command: Option<CommandKind>,

    /// JSON job file; flags given on the command line take precedence
    #[arg(long)]
    pub job: Option<PathBuf>,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Conformal factor P0(u, v)
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// Second conformal factor for `isometry` (defaults to --p0)
    #[arg(long, allow_hyphen_values = true)]
    pub p0_tilde: Option<String>,
    /// Target scalar curvature R(u, v) for `solve`
    #[arg(long = "R", visible_alias = "r", allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Tanaka-Webster curvature of a constant-W family
    #[arg(long = "W", visible_alias = "w", allow_negative_numbers = true)]
    pub w: Option<f64>,
    /// Dirichlet data for ln P0 in `solve`
    #[arg(long, allow_hyphen_values = true)]
    pub boundary: Option<String>,
    /// Initial guess for ln P0 in `solve`
    #[arg(long, allow_hyphen_values = true)]
    pub guess: Option<String>,
    /// Real part of the holomorphic map z(w), in terms of u, v
    #[arg(long, allow_hyphen_values = true)]
    pub map_u: Option<String>,
    /// Imaginary part of the holomorphic map z(w)
    #[arg(long, allow_hyphen_values = true)]
    pub map_v: Option<String>,
    /// Field to plot
    #[arg(long, allow_hyphen_values = true)]
    pub field: Option<String>,
    /// Grid CSV (u,v,value) to plot
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Rectangle u_min,u_max,v_min,v_max
    #[arg(long, value_parser = parse_domain, allow_hyphen_values = true)]
    pub domain: Option<[f64; 4]>,
    /// Nodes per side
    #[arg(long)]
    pub grid: Option<usize>,
    /// Baseline v0 of the integral defining A
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    /// Number of random sample points
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for the sample points
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<PlotFormat>,
    /// Artifact path: grid CSV, directory of CSVs for `build`, or plot file
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the JSON report here
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Tolerance overrides, one per check family
    #[arg(long)]
    pub tol_sasakian: Option<f64>,
    #[arg(long)]
    pub tol_curvature: Option<f64>,
    #[arg(long)]
    pub tol_route: Option<f64>,
    #[arg(long)]
    pub tol_eta: Option<f64>,
    #[arg(long)]
    pub tol_reduced: Option<f64>,
    #[arg(long)]
    pub tol_pullback: Option<f64>,
    #[arg(long)]
    pub tol_flatness: Option<f64>,
    #[arg(long)]
    pub tol_isometry: Option<f64>,
    #[arg(long)]
    pub tol_solve: Option<f64>,
    #[arg(long)]
    pub tol_newton: Option<f64>,
}

impl Cli {
    /// Flags overlaid on the job file, if any.
    pub fn job_spec(self) -> Result<JobSpec, crate::error::CliError> {
        let f = self.flags;
        let flags = JobSpec {
            command: self.command,
            p0: f.p0,
            p0_tilde: f.p0_tilde,
            r: f.r,
            w: f.w,
            boundary: f.boundary,
            guess: f.guess,
            map_u: f.map_u,
            map_v: f.map_v,
            field: f.field,
            input: f.input,
            domain: f.domain,
            grid: f.grid,
            v0: f.v0,
            samples: f.samples,
            seed: f.seed,
            tolerances: Tolerances {
                sasakian: f.tol_sasakian,
                curvature: f.tol_curvature,
                route: f.tol_route,
                eta: f.tol_eta,
                reduced: f.tol_reduced,
                pullback: f.tol_pullback,
                flatness: f.tol_flatness,
                isometry: f.tol_isometry,
                solve: f.tol_solve,
                newton: f.tol_newton,
            },
            format: f.format,
            output: f.output,
            report: f.report,
        };
        Ok(match &self.job {
            Some(path) => flags.overlay(JobSpec::from_json_file(path)?),
            None => flags,
        })
    }
}

/// Parses arguments, runs the job and prints the report to `out`.
/// Returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let job = match cli.job_spec() {
        Ok(j) => j,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            let mut report = crate::report::Report::new("none", serde_json::Value::Null);
            report.fail_with(e.to_string());
            let _ = writeln!(out, "{}", report.to_json());
            return e.exit_code();
        }
    };
    let outcome = run(&job);
    let _ = writeln!(out, "{}", outcome.report.to_json());
    if let Some(msg) = &outcome.report.verdict.error {
        let _ = writeln!(err, "{msg}");
    }
    outcome.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> JobSpec {
        Cli::try_parse_from(std::iter::once("sasaki").chain(args.iter().copied()))
            .unwrap()
            .job_spec()
            .unwrap()
    }

    #[test]
    fn spec_style_flags() {
        let j = parse(&["family", "--W", "-2"]);
        assert_eq!((j.command, j.w), (Some(CommandKind::Family), Some(-2.0)));
        let j = parse(&["solve", "--R", "sin(u)*cos(v)", "--grid", "129", "--domain", "-1,1,-1,1", "--boundary", "0"]);
        assert_eq!(j.r.as_deref(), Some("sin(u)*cos(v)"));
        assert_eq!(j.domain, Some([-1.0, 1.0, -1.0, 1.0]));
        assert_eq!(j.grid, Some(129));
        let j = parse(&["solve", "--R", "-2 - u", "--boundary", "-u/2"]);
        assert_eq!((j.r.as_deref(), j.boundary.as_deref()), (Some("-2 - u"), Some("-u/2")));
        let j = parse(&["verify", "--p0", "1/sqrt(2)", "--tol-sasakian", "1e-6"]);
        assert_eq!(j.tolerances.sasakian, Some(1e-6));
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["sasaki", "frobnicate"], &mut o, &mut e), 2);
        assert_eq!(main_with_args(["sasaki", "verify"], &mut o, &mut e), 2);
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["sasaki", "verify", "--p0", "1+*u"], &mut o, &mut e), 2);
        let v: serde_json::Value = serde_json::from_slice(&o).unwrap();
        assert_eq!(v["verdict"]["status"], "error");
        assert!(String::from_utf8(e).unwrap().contains("offset 2"));
    }
}
