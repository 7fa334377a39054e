//! Job description shared by command-line flags and JSON job files.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Export normal-form metric components on a grid
    Build,
    /// Sasakian verification of the structure generated by P0
    Verify,
    /// Constant-W eta-Einstein family report
    Family,
    /// Solve for P0 with prescribed scalar curvature R
    Solve,
    /// Cotton tensor and conformal flatness
    Conformal,
    /// Contact isometry criterion for two P0 and a holomorphic map
    Isometry,
    /// Heatmap or data table of a scalar field
    Plot,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Build => "build",
            CommandKind::Verify => "verify",
            CommandKind::Family => "family",
            CommandKind::Solve => "solve",
            CommandKind::Conformal => "conformal",
            CommandKind::Isometry => "isometry",
            CommandKind::Plot => "plot",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlotFormat {
    /// Binary portable pixmap
    Ppm,
    /// Whitespace-separated `u v value` rows, gnuplot-ready
    Table,
}

/// Tolerance overrides; `None` keeps the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub sasakian: Option<f64>,
    /// Agreement between independent curvature routes.
    pub curvature: Option<f64>,
    /// Spin-coefficient against tensor-route frame components.
    pub route: Option<f64>,
    pub eta: Option<f64>,
    pub reduced: Option<f64>,
    pub pullback: Option<f64>,
    pub flatness: Option<f64>,
    pub isometry: Option<f64>,
    /// End-to-end curvature error of a solved `P0`.
    pub solve: Option<f64>,
    /// Newton residual.
    pub newton: Option<f64>,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        sasakian: Some(1e-8),
        curvature: Some(1e-8),
        route: Some(1e-6),
        eta: Some(1e-6),
        reduced: Some(1e-6),
        pullback: Some(1e-6),
        flatness: Some(1e-5),
        isometry: Some(1e-10),
        solve: Some(5e-3),
        newton: Some(1e-10),
    };

    fn overlay(self, base: Tolerances) -> Tolerances {
        Tolerances {
            sasakian: self.sasakian.or(base.sasakian),
            curvature: self.curvature.or(base.curvature),
            route: self.route.or(base.route),
            eta: self.eta.or(base.eta),
            reduced: self.reduced.or(base.reduced),
            pullback: self.pullback.or(base.pullback),
            flatness: self.flatness.or(base.flatness),
            isometry: self.isometry.or(base.isometry),
            solve: self.solve.or(base.solve),
            newton: self.newton.or(base.newton),
        }
    }

    fn all(&self) -> [Option<f64>; 10] {
        [
            self.sasakian,
            self.curvature,
            self.route,
            self.eta,
            self.reduced,
            self.pullback,
            self.flatness,
            self.isometry,
            self.solve,
            self.newton,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobSpec {
    pub command: Option<CommandKind>,
    pub p0: Option<String>,
    pub p0_tilde: Option<String>,
    #[serde(alias = "R")]
    pub r: Option<String>,
    #[serde(alias = "W")]
    pub w: Option<f64>,
    pub boundary: Option<String>,
    pub guess: Option<String>,
    pub map_u: Option<String>,
    pub map_v: Option<String>,
    pub field: Option<String>,
    /// Grid CSV (`u,v,value`) to plot.
    pub input: Option<PathBuf>,
    /// `[u_min, u_max, v_min, v_max]`
    pub domain: Option<[f64; 4]>,
    pub grid: Option<usize>,
    pub v0: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub format: Option<PlotFormat>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub const DEFAULT_DOMAIN: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

macro_rules! overlay_fields {
    ($top:expr, $base:expr; $($f:ident),*) => {
        JobSpec {
            $($f: $top.$f.or($base.$f),)*
            tolerances: $top.tolerances.overlay($base.tolerances),
        }
    };
}

impl JobSpec {
    pub fn from_json_file(path: &Path) -> Result<JobSpec, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read job file {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid job file {}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn overlay(self, base: JobSpec) -> JobSpec {
        overlay_fields!(self, base; command, p0, p0_tilde, r, w, boundary, guess, map_u, map_v,
            field, input, domain, grid, v0, samples, seed, format, output, report)
    }

    pub fn tol(&self) -> Tolerances {
        self.tolerances.overlay(Tolerances::DEFAULT)
    }

    pub fn command(&self) -> Result<CommandKind, CliError> {
        self.command
            .ok_or_else(|| CliError::Usage("no command given (flag or job file `command`)".into()))
    }

    pub fn require<'a, T>(&self, value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| {
            CliError::Usage(format!(
                "`{}` needs --{flag}",
                self.command.map(CommandKind::name).unwrap_or("?")
            ))
        })
    }

    /// Static checks: tolerances positive, domain ordered, referenced files present.
    pub fn validate(&self) -> Result<(), CliError> {
        self.command()?;
        if self.tolerances.all().iter().flatten().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::Usage("tolerances must be positive and finite".into()));
        }
        if let Some([a, b, c, d]) = self.domain {
            if !(a < b && c < d) || [a, b, c, d].iter().any(|x| !x.is_finite()) {
                return Err(CliError::Usage(format!("invalid domain {a},{b},{c},{d}")));
            }
        }
        if let Some(w) = self.w {
            if !w.is_finite() {
                return Err(CliError::Usage(format!("W = {w} is not finite")));
            }
        }
        if let Some(path) = &self.input {
            if !path.is_file() {
                return Err(CliError::Usage(format!("input file {} does not exist", path.display())));
            }
        }
        if self.samples == Some(0) {
            return Err(CliError::Usage("--samples must be positive".into()));
        }
        Ok(())
    }
}

pub fn parse_domain(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected u_min,u_max,v_min,v_max, got `{s}`"));
    }
    let mut out = [0.0; 4];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}
