//! Command implementations.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use sasaki_core::conformal::conformal_flatness_check;
use sasaki_core::curvature::curvature;
use sasaki_core::elliptic::{
    rebuilt_curvature_error, solve_prescribed_curvature_from, structure_from_solution, GridField, GridSpec,
    SolverConfig,
};
use sasaki_core::eta::{euler_pullback_residual, fit_eta_einstein, scalar_curvature_sign, EtaEinsteinFamily};
use sasaki_core::field::{Domain, Rect, ScalarJetField};
use sasaki_core::jet::Point;
use sasaki_core::npp::{ricci_from_spin, ricci_projection};
use sasaki_core::sasaki::{build_normal_form, contact_isometry_check, HolomorphicMap, SasakianStructure};

use crate::error::CliError;
use crate::expr::ExprField;
use crate::job::{CommandKind, JobSpec, PlotFormat, DEFAULT_DOMAIN};
use crate::plot::Raster;
use crate::report::{Report, Status};

pub const DEFAULT_SAMPLES: usize = 100;
pub const CONFORMAL_SAMPLES: usize = 20;
pub const EULER_SAMPLES: usize = 50;
pub const DEFAULT_GRID: usize = 65;
pub const PLOT_GRID: usize = 129;
pub const SOLVE_SEED: u64 = 17;

/// Report plus process exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

/// Runs one job. Every outcome, including usage errors, carries a report.
pub fn run(job: &JobSpec) -> Outcome {
    let start = Instant::now();
    let name = job.command.map(CommandKind::name).unwrap_or("none");
    let inputs = serde_json::to_value(job).unwrap_or(serde_json::Value::Null);
    let mut report = Report::new(name, inputs);
    let result = job.validate().and_then(|_| dispatch(job, &mut report));
    let exit_code = match result {
        Ok(()) => {
            report.settle();
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            report.fail_with(e.to_string());
            e.exit_code()
        }
    };
    report.runtime_ms = start.elapsed().as_millis() as u64;
    if let Some(path) = &job.report {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            report.fail_with(format!("cannot write report {}: {e}", path.display()));
            return Outcome { report, exit_code: 1 };
        }
    }
    Outcome { report, exit_code }
}

fn dispatch(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    match job.command()? {
        CommandKind::Build => build(job, report),
        CommandKind::Verify => verify(job, report),
        CommandKind::Family => family(job, report),
        CommandKind::Solve => solve(job, report),
        CommandKind::Conformal => conformal(job, report),
        CommandKind::Isometry => isometry(job, report),
        CommandKind::Plot => plot(job, report),
    }
}

fn expression(text: &str, flag: &'static str) -> Result<Arc<ExprField>, CliError> {
    ExprField::parse(text)
        .map(Arc::new)
        .map_err(|source| CliError::Expression { flag, source })
}

fn rect(job: &JobSpec) -> Result<Rect, CliError> {
    let [a, b, c, d] = job.domain.unwrap_or(DEFAULT_DOMAIN);
    Rect::new(a, b, c, d).map_err(|e| CliError::Usage(e.to_string()))
}

fn normal_form(job: &JobSpec) -> Result<SasakianStructure, CliError> {
    let p0 = expression(job.require(&job.p0, "p0")?, "p0")?;
    let r = rect(job)?;
    let v0 = job
        .v0
        .unwrap_or(if r.v_min <= 0.0 && 0.0 <= r.v_max { 0.0 } else { 0.5 * (r.v_min + r.v_max) });
    Ok(build_normal_form(p0, Domain::Rect(r), v0)?)
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// Per-sample quantities shared by `verify` and `family`.
struct Pointwise {
    scalar: f64,
    tw: f64,
    reduced: f64,
    route: f64,
}

fn pointwise(s: &SasakianStructure, samples: &[Point]) -> Result<Vec<Pointwise>, CliError> {
    Ok(samples
        .par_iter()
        .map(|&p| {
            let scalar = curvature(s, p)?.scalar;
            let tw = s.scalar_curvature_tw(p[1], p[2])?;
            let reduced = s.reduced_residual(p[1], p[2])?.max_norm();
            let triad = s.adapted_frame(p, 2)?;
            let route = ricci_from_spin(s, &triad, p)?.max_difference(&ricci_projection(s, &triad, p)?);
            Ok(Pointwise { scalar, tw, reduced, route })
        })
        .collect::<sasaki_core::Result<_>>()?)
}

fn sasakian_checks(
    s: &SasakianStructure,
    samples: &[Point],
    job: &JobSpec,
    report: &mut Report,
) -> Result<Vec<Pointwise>, CliError> {
    let tol = job.tol();
    let v = s.verify(samples, tol.sasakian.unwrap())?;
    for (name, x) in [
        ("sasakian.killing", v.killing),
        ("sasakian.unit_length", v.unit_length),
        ("sasakian.kappa", v.kappa),
        ("sasakian.sigma", v.sigma),
        ("sasakian.epsilon", v.epsilon),
        ("sasakian.divergence", v.divergence),
        ("sasakian.twist", v.twist),
        ("sasakian.curvature_condition", v.sasaki_condition),
    ] {
        report.put(name, x);
    }
    report.check("sasakian", v.passed);

    let rows = pointwise(s, samples)?;
    let lo = rows.iter().map(|r| r.scalar).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.scalar).fold(f64::NEG_INFINITY, f64::max);
    let mean = rows.iter().map(|r| r.scalar).sum::<f64>() / rows.len() as f64;
    report.put("scalar_curvature.min", lo);
    report.put("scalar_curvature.max", hi);
    report.put("scalar_curvature.mean", mean);
    report.put("tanaka_webster.mean", (mean + 2.0) / 4.0);
    let tw = max(rows.iter().map(|r| (r.scalar - r.tw).abs()));
    report.put("scalar_curvature.route_difference", tw);
    report.check("curvature_routes_agree", tw <= tol.curvature.unwrap());
    let reduced = max(rows.iter().map(|r| r.reduced));
    report.put("reduced_system", reduced);
    report.check("reduced_system", reduced <= tol.reduced.unwrap());
    let route = max(rows.iter().map(|r| r.route));
    report.put("ricci.route_difference", route);
    report.check("ricci_routes_agree", route <= tol.route.unwrap());
    report.put("samples", samples.len() as f64);
    Ok(rows)
}

fn verify(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    let s = normal_form(job)?;
    let samples = s.sample_points(job.samples.unwrap_or(DEFAULT_SAMPLES), job.seed.unwrap_or(1));
    sasakian_checks(&s, &samples, job, report)?;
    Ok(())
}

fn family(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    let w = *job.require(&job.w, "W")?;
    let tol = job.tol();
    let fam = EtaEinsteinFamily::new(w)?;
    let s = fam.structure()?;
    let n = job.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = job.seed.unwrap_or(1);
    let samples = fam.sample_points(n, seed);
    report.put("W", w);
    report.put("scalar_curvature.sign", scalar_curvature_sign(w) as i8 as f64);
    let rows = sasakian_checks(&s, &samples, job, report)?;
    let r_err = max(rows.iter().map(|r| (r.scalar - fam.scalar_curvature()).abs()));
    report.put("scalar_curvature.closed_form_error", r_err);
    report.check("scalar_curvature_closed_form", r_err <= tol.eta.unwrap());

    let fit = fit_eta_einstein(&s, &samples, tol.eta.unwrap())?;
    report.put("eta_einstein.a", fit.a);
    report.put("eta_einstein.b", fit.b);
    report.put("eta_einstein.residual", fit.residual);
    report.put("eta_einstein.a_error", (fit.a - fam.a()).abs());
    report.put("eta_einstein.a_plus_b_error", (fit.a + fit.b - 2.0).abs());
    report.check("eta_einstein", fit.eta_einstein);
    report.check(
        "eta_einstein_closed_form",
        (fit.a - fam.a()).abs() <= tol.eta.unwrap() && (fit.b - fam.b()).abs() <= tol.eta.unwrap(),
    );

    let euler = fam.euler_points(n.min(EULER_SAMPLES), seed);
    let pulled: Vec<_> = euler
        .par_iter()
        .map(|&x| euler_pullback_residual(&s, w, fam.class, x))
        .collect::<sasaki_core::Result<_>>()?;
    let metric = max(pulled.iter().map(|p| p.metric));
    let contact = max(pulled.iter().map(|p| p.contact));
    report.put("euler.metric", metric);
    report.put("euler.contact", contact);
    report.check("euler_pullback", metric.max(contact) <= tol.pullback.unwrap());

    let omega = samples
        .iter()
        .map(|p| Ok((s.omega0(p[1], p[2])? - fam.omega0(p[1], p[2])?).abs()))
        .collect::<sasaki_core::Result<Vec<f64>>>()?;
    report.put("omega0.closed_form_difference", max(omega));
    report.verdict.conclusion = Some(format!("{} geometry", fam.class.geometry()));
    Ok(())
}

fn solve(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    let r_target = expression(job.require(&job.r, "R")?, "R")?;
    let boundary = expression(job.boundary.as_deref().unwrap_or("0"), "boundary")?;
    let guess = job.guess.as_deref().map(|g| expression(g, "guess")).transpose()?;
    let tol = job.tol();
    let spec = GridSpec::covering(rect(job)?, job.grid.unwrap_or(DEFAULT_GRID))?;
    let config = SolverConfig { tolerance: tol.newton.unwrap(), ..SolverConfig::default() };
    let sol = solve_prescribed_curvature_from(
        &*r_target,
        spec,
        &*boundary,
        guess.as_deref().map(|g| g as &dyn ScalarJetField),
        &config,
    )?;
    report.put("newton.iterations", sol.report.iterations as f64);
    report.put("newton.residual", sol.report.residual);
    report.put("corner.max_mismatch", max(sol.corners.corners.iter().map(|c| c.mismatch.abs())));
    let p0 = sol.p0();
    report.put("p0.min", p0.values().iter().copied().fold(f64::INFINITY, f64::min));
    report.put("p0.max", p0.values().iter().copied().fold(f64::NEG_INFINITY, f64::max));
    report.check("converged", sol.report.residual <= tol.newton.unwrap());
    if let Some(path) = &job.output {
        p0.save(path).map_err(|e| output_error(path, e))?;
    }
    let s = structure_from_solution(&sol)?;
    let pts = s.domain().random_points(job.samples.unwrap_or(DEFAULT_SAMPLES), job.seed.unwrap_or(SOLVE_SEED));
    let check = rebuilt_curvature_error(&s, &*r_target, &pts)?;
    report.put("end_to_end.tensor", check.tensor);
    report.put("end_to_end.tanaka_webster", check.tanaka_webster);
    report.check("end_to_end", check.tensor.max(check.tanaka_webster) <= tol.solve.unwrap());
    Ok(())
}

fn conformal(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    let n = job.samples.unwrap_or(CONFORMAL_SAMPLES);
    let seed = job.seed.unwrap_or(1);
    let (s, samples) = match (&job.p0, job.w) {
        (Some(_), None) => {
            let s = normal_form(job)?;
            let pts = s.sample_points(n, seed);
            (s, pts)
        }
        (None, Some(w)) => {
            let fam = EtaEinsteinFamily::new(w)?;
            (fam.structure()?, fam.sample_points(n, seed))
        }
        _ => return Err(CliError::Usage("`conformal` needs exactly one of --p0 and --W".into())),
    };
    let tol = job.tol();
    let c = conformal_flatness_check(&s, &samples, tol.flatness.unwrap())?;
    report.put("cotton.max_norm", c.max_norm);
    report.put("cotton.trace", c.max_trace);
    report.put("cotton.antisymmetry", c.max_antisymmetry);
    report.put("c00", c.c00);
    report.put("cpm", c.cpm);
    report.put("components.spread", c.component_spread);
    report.put("components.route_difference", c.route_difference);
    report.put("samples", c.samples as f64);
    report.check("flat", c.flat);
    report.check("component_routes_agree", c.route_difference <= tol.route.unwrap());
    report.verdict.conclusion = Some(
        match (c.flat, c.round_signature) {
            (true, true) => "conformally flat; C00 = C+- = 1/2",
            (true, false) => "conformally flat",
            (false, _) => "not conformally flat",
        }
        .to_string(),
    );
    Ok(())
}

fn isometry(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    let p0 = expression(job.require(&job.p0, "p0")?, "p0")?;
    let p0_tilde = expression(job.p0_tilde.as_deref().or(job.p0.as_deref()).unwrap(), "p0-tilde")?;
    let map = HolomorphicMap {
        u: expression(job.map_u.as_deref().unwrap_or("u"), "map-u")?,
        v: expression(job.map_v.as_deref().unwrap_or("v"), "map-v")?,
    };
    let pts = Domain::Rect(rect(job)?).random_points(job.samples.unwrap_or(DEFAULT_SAMPLES), job.seed.unwrap_or(1));
    let v = contact_isometry_check(&*p0, &*p0_tilde, &map, &pts, job.tol().isometry.unwrap())?;
    report.put("isometry.max_residual", v.max_residual);
    report.put("samples", v.samples as f64);
    report.check("contact_isometric", v.isometric);
    report.verdict.conclusion =
        Some(if v.isometric { "contact isometric" } else { "not contact isometric" }.to_string());
    Ok(())
}

fn build(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    let s = normal_form(job)?;
    let spec = GridSpec::covering(rect(job)?, job.grid.unwrap_or(DEFAULT_GRID))?;
    let comps: Vec<[f64; 4]> = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let (u, v) = (spec.u(k % spec.nx), spec.v(k / spec.nx));
            let p = s.p0_jet(u, v, 0)?.value();
            let a = s.a_jet(u, v, 0)?.value();
            let h = 0.5 / (p * p);
            Ok([p, a, a * a + h, h])
        })
        .collect::<sasaki_core::Result<_>>()?;
    let grid = |c: usize| GridField::new(spec, comps.iter().map(|x| x[c]).collect());
    let fields = [("p0", grid(0)?), ("g_ru", grid(1)?), ("g_uu", grid(2)?), ("g_vv", grid(3)?)];
    // det g = g_vv (g_uu − g_ru²) with g_rr = 1
    let det: Vec<f64> = comps.iter().map(|x| x[3] * (x[2] - x[1] * x[1])).collect();
    report.put("det.min", det.iter().copied().fold(f64::INFINITY, f64::min));
    report.put("det.max", det.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    report.put("p0.min_abs", comps.iter().map(|x| x[0].abs()).fold(f64::INFINITY, f64::min));
    report.put("g_ru.max_abs", max(comps.iter().map(|x| x[1].abs())));
    report.put("nodes", spec.len() as f64);
    report.check("nondegenerate", det.iter().all(|d| *d > 0.0 && d.is_finite()));
    if let Some(dir) = &job.output {
        std::fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
        for (name, f) in &fields {
            let path = dir.join(format!("{name}.csv"));
            f.save(&path).map_err(|e| output_error(&path, e))?;
        }
    }
    Ok(())
}

fn plot(job: &JobSpec, report: &mut Report) -> Result<(), CliError> {
    let out = job.require(&job.output, "output")?;
    let raster = match (&job.field, &job.input) {
        (Some(text), None) => {
            let f = expression(text, "field")?;
            let spec = GridSpec::covering(rect(job)?, job.grid.unwrap_or(PLOT_GRID))?;
            Raster {
                nx: spec.nx,
                ny: spec.ny,
                u: (0..spec.nx).map(|i| spec.u(i)).collect(),
                v: (0..spec.ny).map(|j| spec.v(j)).collect(),
                values: (0..spec.len())
                    .map(|k| f.value(spec.u(k % spec.nx), spec.v(k / spec.nx)).ok())
                    .collect(),
            }
        }
        (None, Some(path)) => {
            let g = GridField::load(path)?;
            let spec = *g.spec();
            Raster {
                nx: spec.nx,
                ny: spec.ny,
                u: (0..spec.nx).map(|i| spec.u(i)).collect(),
                v: (0..spec.ny).map(|j| spec.v(j)).collect(),
                values: g.values().iter().map(|&x| Some(x)).collect(),
            }
        }
        _ => return Err(CliError::Usage("`plot` needs exactly one of --field and --input".into())),
    };
    let format = job.format.unwrap_or(match out.extension().and_then(|e| e.to_str()) {
        Some("ppm") => PlotFormat::Ppm,
        _ => PlotFormat::Table,
    });
    let file = std::fs::File::create(out).map_err(|e| output_error(out, e))?;
    let w = std::io::BufWriter::new(file);
    match format {
        PlotFormat::Ppm => raster.write_ppm(w),
        PlotFormat::Table => raster.write_table(w),
    }
    .map_err(|e| output_error(out, e))?;
    if let Some((lo, hi)) = raster.range() {
        report.put("min", lo);
        report.put("max", hi);
    }
    report.put("nodes", raster.values.len() as f64);
    report.put("missing", raster.missing() as f64);
    report.check("all_nodes_evaluated", raster.missing() == 0);
    Ok(())
}

impl Outcome {
    pub fn status(&self) -> Status {
        self.report.verdict.status
    }
}
