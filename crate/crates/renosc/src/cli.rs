//! Command dispatch and artifact emission for the `renosc` binary.
//!
//! Commands: classify | count | box | curves | validate | propagate.
//! Reports are flat `key: value` text on stdout; CSV attachments land in
//! the output directory (default `.`) with shortest round-trip numeric
//! formatting, so identical config + seed gives byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{emit_complex, RunConfig};
use crate::count::{self, EigencountRequest, LeftBoundary, TruncationPlan};
use crate::endpoint::{
    classify_endpoint, niessen_curve, CurvePlan, EndpointClassification, NiessenCurve,
    NiessenKind,
};
use crate::error::{Error, Result};
use crate::numerics::{C64, Tolerances};
use crate::propagate;
use crate::system::{builtin_system, BoundaryMatrixAlpha, Endpoint, EndpointKind, ProbePlan};

pub fn usage() -> String {
    "usage: renosc <command> [flags]\n\
     commands: classify | count | box | curves | validate | propagate\n\
     flags: --config PATH --system NAME --endpoint a|b --lambda0 re+imi\n\
     \t--lambda1 X --lambda2 X --alpha \"a1,a2\" --beta re+imi --beta-b re+imi\n\
     \t--xmax X --x-min-offset X --tol-ode X --tol-flow X --out DIR --seed N\n\
     \t--grid N --param key=value"
        .to_string()
}

fn tolerances_from(cfg: &RunConfig) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(t) = cfg.tol_ode {
        tol.ode_rtol = t;
        tol.ode_atol = t * 1e-2;
    }
    if let Some(t) = cfg.tol_flow {
        tol.flow_locate = t;
    }
    tol
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    PathBuf::from(cfg.out_dir.clone().unwrap_or_else(|| ".".into()))
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

fn build_request<'a>(
    cfg: &RunConfig,
    sys: &'a crate::system::HamiltonianSystem,
) -> Result<EigencountRequest<'a>> {
    let lambda1 = cfg
        .lambda1
        .ok_or_else(|| Error::Config("lambda1 is required".into()))?;
    let lambda2 = cfg
        .lambda2
        .ok_or_else(|| Error::Config("lambda2 is required".into()))?;
    let left = if sys.kind_a == EndpointKind::Regular {
        let alpha_row = cfg.alpha.clone().unwrap_or_else(|| {
            // Dirichlet by default
            vec![crate::numerics::ONE, crate::numerics::ZERO]
        });
        LeftBoundary::Regular(BoundaryMatrixAlpha::from_row(&alpha_row)?)
    } else {
        LeftBoundary::Singular(vec![cfg.beta_a])
    };
    let mut plan = TruncationPlan::defaults_for(sys);
    if let Some(x) = cfg.x_max {
        plan.x_max = x;
    }
    if let Some(o) = cfg.x_min_offset {
        plan.x_min_offset = o;
        plan.depth_a = o;
    }
    Ok(EigencountRequest {
        sys,
        left,
        beta_b: vec![cfg.beta_b],
        lambda0: cfg.lambda0,
        lambda1,
        lambda2,
        plan,
        tol: tolerances_from(cfg),
    })
}

fn curve_csv(curve: &NiessenCurve) -> String {
    let dim = curve.dim();
    let mut s = String::from("x,track,eigenvalue");
    for i in 0..dim {
        let _ = write!(s, ",v{}_re,v{}_im", i + 1, i + 1);
    }
    s.push('\n');
    for (k, &x) in curve.abscissae.iter().enumerate() {
        for j in 0..dim {
            let _ = write!(s, "{x},{j},{}", curve.values[k][j]);
            for i in 0..dim {
                let z = curve.vectors[k][j][i];
                let _ = write!(s, ",{},{}", z.re, z.im);
            }
            s.push('\n');
        }
    }
    s
}

fn classification_report(class: &EndpointClassification, kind_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind: {kind_label}");
    let _ = writeln!(
        s,
        "endpoint: {}",
        match class.endpoint {
            Endpoint::A => "a",
            Endpoint::B => "b",
        }
    );
    let _ = writeln!(s, "lambda: {}", emit_complex(class.lambda));
    let _ = writeln!(s, "m: {}", class.m);
    let _ = writeln!(s, "case: {}", class.case);
    let _ = writeln!(s, "probe_abscissa: {}", class.final_abscissa);
    for (j, v) in &class.finite_limits {
        let _ = writeln!(s, "limit_{}: {v}", j + 1);
    }
    for (j, v) in &class.limit_vectors {
        let parts: Vec<String> = v.iter().map(|z| emit_complex(*z)).collect();
        let _ = writeln!(s, "vector_{}: {}", j + 1, parts.join(", "));
    }
    for (j, v) in &class.divergence_evidence {
        let _ = writeln!(s, "divergent_{}: {v:e}", j + 1);
    }
    s
}

fn cmd_classify(cfg: &RunConfig) -> Result<()> {
    let sys = builtin_system(&cfg.system, &cfg.system_params)?;
    let tol = tolerances_from(cfg);
    let endpoint = cfg.endpoint.unwrap_or(Endpoint::B);
    if endpoint == Endpoint::A && sys.kind_a == EndpointKind::Regular {
        return Err(Error::Contract(
            "endpoint a is regular; nothing to classify".into(),
        ));
    }
    let plan = match endpoint {
        Endpoint::A => CurvePlan::toward(&sys, Endpoint::A, cfg.x_min_offset.unwrap_or(1e-5), 30),
        Endpoint::B => CurvePlan::toward(&sys, Endpoint::B, cfg.x_max.unwrap_or(25.0), 25),
    };
    let curve = niessen_curve(&sys, NiessenKind::A, cfg.lambda0, &plan, &tol)?;
    let class = classify_endpoint(&curve, &tol)?;
    print!("{}", classification_report(&class, "A"));
    if class.r.map_or(false, |r| r > 0) {
        let basis = crate::endpoint::build_niessen_basis(&class, &[cfg.beta_a], &tol)?;
        for (j, rho) in basis.radii.iter().enumerate() {
            println!("rho_{}: {rho}", j + 1);
            println!("beta_{}: {}", j + 1, emit_complex(basis.betas[j]));
            println!("kappa_{}: {}", j + 1, emit_complex(basis.kappas[j]));
        }
    }
    write_file(&out_dir(cfg), "classify_curve.csv", &curve_csv(&curve))?;
    Ok(())
}

fn count_report_text(report: &count::EigencountReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "count: {}", report.count);
    let _ = writeln!(s, "lower_bound_only: {}", report.lower_bound_only);
    let _ = writeln!(s, "window: {}, {}", report.window.0, report.window.1);
    for (k, cp) in report.conjugate_points.iter().enumerate() {
        let _ = writeln!(
            s,
            "conjugate_{}: x = {}, multiplicity = {}, direction = {}",
            k + 1,
            cp.t,
            cp.multiplicity,
            cp.direction
        );
    }
    if let Some(w) = &report.gap_warning {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(s, "class_b: {}", report.class_b_kind_b.case);
    if let Some(c) = &report.class_a_kind_a {
        let _ = writeln!(s, "class_a: {}", c.case);
    }
    if let Some(b) = &report.basis_a {
        for (j, rho) in b.radii.iter().enumerate() {
            let _ = writeln!(s, "rho_a_{}: {rho}", j + 1);
            let _ = writeln!(s, "beta_a_{}: {}", j + 1, emit_complex(b.betas[j]));
        }
    }
    s
}

fn conjugate_csv(points: &[crate::maslov::ConjugatePoint]) -> String {
    let mut s = String::from("t,multiplicity,direction\n");
    for cp in points {
        let _ = writeln!(s, "{},{},{}", cp.t, cp.multiplicity, cp.direction);
    }
    s
}

fn phase_csv(trace: &[(f64, Vec<f64>)]) -> String {
    let n = trace.first().map_or(0, |(_, p)| p.len());
    let mut s = String::from("t");
    for j in 0..n {
        let _ = write!(s, ",phase_{}", j + 1);
    }
    s.push('\n');
    for (t, phases) in trace {
        let _ = write!(s, "{t}");
        for p in phases {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

fn cmd_count(cfg: &RunConfig) -> Result<()> {
    let sys = builtin_system(&cfg.system, &cfg.system_params)?;
    let req = build_request(cfg, &sys)?;
    let report = count::count_eigenvalues(&req)?;
    print!("{}", count_report_text(&report));
    let dir = out_dir(cfg);
    write_file(&dir, "conjugate_points.csv", &conjugate_csv(&report.conjugate_points))?;
    write_file(&dir, "eigenphases.csv", &phase_csv(&report.flow.phase_trace))?;
    Ok(())
}

fn cmd_box(cfg: &RunConfig) -> Result<()> {
    let sys = builtin_system(&cfg.system, &cfg.system_params)?;
    let req = build_request(cfg, &sys)?;
    let report = count::box_report(&req)?;
    for (name, shelf) in [
        ("bottom", &report.bottom),
        ("right", &report.right),
        ("top", &report.top),
        ("left", &report.left),
    ] {
        println!("{name}_index: {}", shelf.index);
        for cp in &shelf.conjugate_points {
            println!(
                "{name}_conjugate: t = {}, multiplicity = {}, direction = {}",
                cp.t, cp.multiplicity, cp.direction
            );
        }
    }
    println!("loop_total: {}", report.loop_total);
    let dir = out_dir(cfg);
    write_file(&dir, "box_left_phases.csv", &phase_csv(&report.left.phase_trace))?;
    write_file(&dir, "box_top_phases.csv", &phase_csv(&report.top.phase_trace))?;
    Ok(())
}

fn cmd_curves(cfg: &RunConfig) -> Result<()> {
    let sys = builtin_system(&cfg.system, &cfg.system_params)?;
    let req = build_request(cfg, &sys)?;
    let m = cfg.grid.max(2);
    let grid: Vec<f64> = (0..m)
        .map(|k| req.lambda1 + (req.lambda2 - req.lambda1) * k as f64 / (m as f64 - 1.0))
        .collect();
    let curves = count::spectral_curves(&req, &grid)?;
    println!("curves: {}", curves.curve_count());
    let mut s = String::from("lambda,curve,x\n");
    for j in 0..curves.curve_count() {
        for (lam, x) in curves.locus(j) {
            let _ = writeln!(s, "{lam},{j},{x}");
        }
    }
    let dir = out_dir(cfg);
    write_file(&dir, "spectral_curves.csv", &s)?;
    write_file(&dir, "eigenphases.csv", &phase_csv(&curves.phase_trace))?;
    Ok(())
}

fn cmd_validate(cfg: &RunConfig) -> Result<()> {
    let sys = builtin_system(&cfg.system, &cfg.system_params)?;
    let tol = tolerances_from(cfg);
    let (c, d) = if sys.a.is_finite() {
        (sys.a + 1.0, sys.a + 2.0)
    } else {
        (0.0, 1.0)
    };
    let probe = ProbePlan {
        c,
        d,
        samples: 5,
        seed: cfg.seed,
        lambda: cfg.lambda1.unwrap_or(0.1),
    };
    let report = crate::system::validate_assumptions(&sys, &probe, &tol);
    println!("hermitian_defect_b0: {:e}", report.hermiticity_defect_b0);
    println!("hermitian_defect_b1: {:e}", report.hermiticity_defect_b1);
    println!("hermitian_ok: {}", report.hermitian_ok);
    for (k, q) in report.atkinson_quadratures.iter().enumerate() {
        println!("atkinson_{}: {q}", k + 1);
    }
    println!("atkinson_ok: {}", report.atkinson_ok);
    println!("real_coefficients: {}", report.real_coefficients);
    if !report.all_ok() {
        return Err(Error::Inconsistency("assumption checks failed".into()));
    }
    Ok(())
}

fn cmd_propagate(cfg: &RunConfig) -> Result<()> {
    let sys = builtin_system(&cfg.system, &cfg.system_params)?;
    let tol = tolerances_from(cfg);
    let lambda = cfg
        .lambda1
        .map(|l| C64::new(l, 0.0))
        .unwrap_or(cfg.lambda0);
    let x_max = cfg.x_max.unwrap_or(10.0);
    let count = 200;
    let xs: Vec<f64> = (1..=count)
        .map(|k| sys.anchor + (x_max - sys.anchor) * k as f64 / count as f64)
        .collect();
    let traj = propagate::fundamental_matrix_with(&sys, lambda, &xs, &tol)?;
    let dim = sys.dim();
    let mut s = String::from("x");
    for i in 0..dim {
        for j in 0..dim {
            let _ = write!(s, ",phi{}{}_re,phi{}{}_im", i + 1, j + 1, i + 1, j + 1);
        }
    }
    s.push('\n');
    for (x, m) in &traj.samples {
        let _ = write!(s, "{x}");
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                let _ = write!(s, ",{},{}", z.re, z.im);
            }
        }
        s.push('\n');
    }
    println!("steps: {}", traj.stats.steps);
    println!("rejected: {}", traj.stats.rejected);
    println!("samples: {}", traj.samples.len());
    write_file(&out_dir(cfg), "trajectory.csv", &s)?;
    Ok(())
}

/// Dispatch a parsed configuration to its command.
pub fn dispatch(cfg: &RunConfig) -> Result<()> {
    match cfg.command.as_str() {
        "classify" => cmd_classify(cfg),
        "count" => cmd_count(cfg),
        "box" => cmd_box(cfg),
        "curves" => cmd_curves(cfg),
        "validate" => cmd_validate(cfg),
        "propagate" => cmd_propagate(cfg),
        other => Err(Error::Config(format!("unknown command {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_command_runs_for_hydrogen() {
        let mut cfg = RunConfig::default();
        cfg.command = "classify".into();
        cfg.system = "hydrogen_radial".into();
        cfg.endpoint = Some(Endpoint::A);
        cfg.out_dir = Some(std::env::temp_dir().join("renosc_test_classify").to_string_lossy().into_owned());
        dispatch(&cfg).unwrap();
    }

    #[test]
    fn validate_command_runs() {
        let mut cfg = RunConfig::default();
        cfg.command = "validate".into();
        cfg.system = "schrodinger_gap".into();
        cfg.lambda1 = Some(0.1);
        dispatch(&cfg).unwrap();
    }

    #[test]
    fn unknown_command_is_config_error() {
        let mut cfg = RunConfig::default();
        cfg.command = "frobnicate".into();
        match dispatch(&cfg) {
            Err(Error::Config(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
