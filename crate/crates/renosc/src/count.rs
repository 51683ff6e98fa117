//! Top-level renormalized-oscillation eigenvalue counting.
//!
//! The number of eigenvalues of the self-adjoint realization on [λ1, λ2)
//! equals the Maslov index of the pair (left frame at λ1, right frame at λ2)
//! along x, evaluated here as a spectral flow over a finite window with the
//! right frame realized stably (backward transport at limit-point
//! endpoints). Also provides Maslov-box summaries, spectral-curve datasets,
//! and a truncated regular counter used for oracle cross-checks.

use crate::endpoint::{
    self, classify_endpoint, frame_path_for_side, niessen_curve, singular_frame, CurvePlan,
    EndpointClassification, NiessenBasis, NiessenKind, SidePathSpec,
};
use crate::error::{Error, Result};
use crate::maslov::{self, ConjugatePoint, FnPath, MaslovResult};
use crate::numerics::{CMatrix, Tolerances, C64};
use crate::propagate::FramePath;
use crate::system::{BoundaryMatrixAlpha, Endpoint, EndpointKind, HamiltonianSystem};

/// Boundary data at the left endpoint.
#[derive(Debug, Clone)]
pub enum LeftBoundary {
    /// Regular endpoint with boundary matrix α (frame J α* at a).
    Regular(BoundaryMatrixAlpha),
    /// Singular endpoint: Niessen-basis β choices at λ0 (None = positive
    /// real point of each circle).
    Singular(Vec<Option<C64>>),
}

/// Truncation and probing plan for a counting run.
#[derive(Debug, Clone)]
pub struct TruncationPlan {
    /// Flow window upper end.
    pub x_max: f64,
    /// Offset from a singular left endpoint for the flow window start.
    pub x_min_offset: f64,
    /// Probe depth (offset from a) for classification and kind-B curves.
    pub depth_a: f64,
    /// Probe depth toward b for kind-A classification.
    pub depth_a_kind: f64,
    /// Probe depth toward b for kind-B curves (and divergence rates).
    pub depth_b: f64,
    pub probe_count: usize,
    /// Initial flow samples; 0 picks automatically from the window length.
    pub flow_samples: usize,
}

impl TruncationPlan {
    pub fn defaults_for(sys: &HamiltonianSystem) -> Self {
        let x_max = if sys.b.is_finite() {
            sys.b - 1e-6 * (sys.b - sys.a)
        } else {
            50.0
        };
        TruncationPlan {
            x_max,
            x_min_offset: 1e-5,
            depth_a: 1e-5,
            depth_a_kind: 25.0,
            depth_b: 40.0,
            probe_count: 30,
            flow_samples: 0,
        }
    }

    fn samples_for(&self, x_lo: f64, x_hi: f64) -> usize {
        if self.flow_samples > 0 {
            self.flow_samples
        } else {
            ((x_hi - x_lo) * 4.0).ceil().clamp(64.0, 2048.0) as usize
        }
    }
}

/// A full counting request.
pub struct EigencountRequest<'a> {
    pub sys: &'a HamiltonianSystem,
    pub left: LeftBoundary,
    /// β choices for the right-endpoint basis (used when b is not limit
    /// point at λ2).
    pub beta_b: Vec<Option<C64>>,
    pub lambda0: C64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub plan: TruncationPlan,
    pub tol: Tolerances,
}

impl<'a> EigencountRequest<'a> {
    pub fn new(sys: &'a HamiltonianSystem, left: LeftBoundary, lambda1: f64, lambda2: f64) -> Self {
        EigencountRequest {
            sys,
            left,
            beta_b: Vec::new(),
            lambda0: C64::new(0.0, 1.0),
            lambda1,
            lambda2,
            plan: TruncationPlan::defaults_for(sys),
            tol: Tolerances::default(),
        }
    }

    fn with_lambda2(&self, lambda2: f64) -> EigencountRequest<'a> {
        EigencountRequest {
            sys: self.sys,
            left: self.left.clone(),
            beta_b: self.beta_b.clone(),
            lambda0: self.lambda0,
            lambda1: self.lambda1,
            lambda2,
            plan: self.plan.clone(),
            tol: self.tol.clone(),
        }
    }
}

/// Result of a counting run.
#[derive(Debug, Clone)]
pub struct EigencountReport {
    /// N([λ1, λ2)); equals the Maslov index of the flow.
    pub count: i64,
    pub conjugate_points: Vec<ConjugatePoint>,
    pub flow: MaslovResult,
    /// Set when λ1 or λ2 is detected as an eigenvalue, in which case the
    /// count is a lower bound only.
    pub lower_bound_only: bool,
    pub class_b_kind_a: Option<EndpointClassification>,
    pub class_b_kind_b: EndpointClassification,
    pub class_a_kind_a: Option<EndpointClassification>,
    pub class_a_kind_b: Option<EndpointClassification>,
    pub basis_a: Option<NiessenBasis>,
    pub basis_b: Option<NiessenBasis>,
    /// Left-frame coefficients at the anchor (singular non-limit-point case).
    pub left_coeffs: Option<CMatrix>,
    pub gap_warning: Option<String>,
    pub window: (f64, f64),
}

impl EigencountReport {
    fn validate(&self) -> Result<()> {
        if self.count < 0 {
            return Err(Error::Inconsistency(format!(
                "negative eigenvalue count {}",
                self.count
            )));
        }
        Ok(())
    }
}

/// Initial flow grid weighted by the coefficient-norm bound on the phase
/// velocity (|dθ/dx| ≤ 2(‖B0+λ1B1‖ + ‖B0+λ2B1‖) for normalized frames),
/// with a log-spaced prelude near a finite singular left endpoint where the
/// norm bound is far too pessimistic. Capped so the budget stays sane; the
/// flow engine's curvature validation covers the capped regions.
fn flow_grid(
    sys: &HamiltonianSystem,
    lambda1: f64,
    lambda2: f64,
    x_lo: f64,
    x_hi: f64,
) -> Vec<f64> {
    let mut pts = vec![x_lo];
    let mut start = x_lo;
    if sys.kind_a == EndpointKind::Singular && sys.a.is_finite() {
        let stop = (sys.a + 1.0).min(0.5 * (x_lo + x_hi));
        if stop > x_lo + 1e-12 {
            let n_log = 160;
            let o_lo = x_lo - sys.a;
            let o_hi = stop - sys.a;
            for k in 1..=n_log {
                let t = k as f64 / n_log as f64;
                pts.push(sys.a + o_lo * (o_hi / o_lo).powf(t));
            }
            start = stop;
        }
    }
    let dim = 2.0 * sys.n as f64;
    let v = |x: f64| -> f64 {
        let b1 = sys.coeff_at(x, C64::new(lambda1, 0.0)).norm_max();
        let b2 = sys.coeff_at(x, C64::new(lambda2, 0.0)).norm_max();
        2.0 * dim * (b1.max(1.0) + b2.max(1.0))
    };
    let span = (x_hi - start).max(1e-12);
    let floor = span / 1500.0;
    let cap = span / 32.0;
    let mut x = start;
    let mut budget = 4000usize;
    while x < x_hi && budget > 0 {
        let step = ((std::f64::consts::PI / 3.0) / v(x)).clamp(floor, cap);
        x = (x + step).min(x_hi);
        pts.push(x);
        budget -= 1;
    }
    if *pts.last().unwrap() < x_hi {
        pts.push(x_hi);
    }
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * (1.0 + a.abs()));
    pts
}

fn custom_or_default_grid(req: &EigencountRequest, x_lo: f64, x_hi: f64) -> Vec<f64> {
    if req.plan.flow_samples > 0 {
        let count = req.plan.flow_samples;
        (0..=count)
            .map(|k| x_lo + (x_hi - x_lo) * k as f64 / count as f64)
            .collect()
    } else {
        flow_grid(req.sys, req.lambda1, req.lambda2, x_lo, x_hi)
    }
}

/// Conjugate points that contributed to the index (direction ≠ 0); band
/// episodes at window edges with no net contribution stay in the raw flow.
fn counted_points(flow: &MaslovResult) -> Vec<ConjugatePoint> {
    flow.conjugate_points
        .iter()
        .filter(|cp| cp.direction != 0)
        .cloned()
        .collect()
}

fn gap_warning(sys: &HamiltonianSystem, lambda1: f64, lambda2: f64) -> Option<String> {
    sys.known_gap.and_then(|(lo, hi)| {
        if lambda1 < lo || lambda2 > hi {
            Some(format!(
                "[{lambda1}, {lambda2}] is not inside the known essential-spectrum gap ({lo}, {hi})"
            ))
        } else {
            None
        }
    })
}

/// Right-side (endpoint b) path spec at real λ: limit-point sides use the
/// attractor route; otherwise the λ0 Niessen basis pins coefficients via
/// the annihilation construction.
fn right_side_spec(
    req: &EigencountRequest,
    lambda: f64,
    class_b_kind_b: &EndpointClassification,
    basis_b: &mut Option<NiessenBasis>,
) -> Result<SidePathSpec> {
    let n = req.sys.n;
    let _ = lambda;
    if class_b_kind_b.m == n {
        Ok(SidePathSpec {
            coeffs: None,
            endpoint: Endpoint::B,
            limit_point: true,
            divergence_rate: class_b_kind_b.divergence_rate,
        })
    } else {
        let plan = CurvePlan::toward(
            req.sys,
            Endpoint::B,
            req.plan.depth_a_kind,
            req.plan.probe_count,
        );
        let curve = niessen_curve(req.sys, NiessenKind::A, req.lambda0, &plan, &req.tol)?;
        let class = classify_endpoint(&curve, &req.tol)?;
        let basis = endpoint::build_niessen_basis(&class, &req.beta_b, &req.tol)?;
        let frame = singular_frame(req.sys, &basis, class_b_kind_b, &req.tol)?;
        *basis_b = Some(basis);
        Ok(SidePathSpec {
            coeffs: Some(frame.w),
            endpoint: Endpoint::B,
            limit_point: false,
            divergence_rate: class_b_kind_b.divergence_rate,
        })
    }
}

/// Detect an endpoint eigenvalue by intersecting the (λ, λ) frame pair at a
/// few interior abscissae (a true eigenvalue intersects at every x).
fn endpoint_eigenvalue_flag(
    left: &FramePath,
    right: &FramePath,
    x_lo: f64,
    x_hi: f64,
    tol: &Tolerances,
) -> Result<bool> {
    let mut hits = 0;
    for frac in [0.31, 0.57, 0.83] {
        let x = x_lo + (x_hi - x_lo) * frac;
        let f1 = left.eval(x)?;
        let f2 = right.eval(x)?;
        if maslov::intersection_dim(&f1, &f2, 1e-5, tol)? > 0 {
            hits += 1;
        }
    }
    Ok(hits == 3)
}

/// Count eigenvalues on [λ1, λ2) for a system regular at a (boundary
/// matrix α), singular at b.
pub fn count_regular_singular(req: &EigencountRequest) -> Result<EigencountReport> {
    let alpha = match &req.left {
        LeftBoundary::Regular(a) => a.clone(),
        LeftBoundary::Singular(_) => {
            return Err(Error::Contract(
                "count_regular_singular needs a regular left boundary".into(),
            ))
        }
    };
    if req.sys.kind_a != EndpointKind::Regular {
        return Err(Error::Contract("system is not regular at a".into()));
    }
    if !(req.lambda1 < req.lambda2) {
        return Err(Error::Contract("need λ1 < λ2".into()));
    }
    let sys = req.sys;
    let tol = &req.tol;
    let x_lo = sys.a;
    let x_hi = req.plan.x_max;

    let plan_b = CurvePlan::toward(sys, Endpoint::B, req.plan.depth_a_kind, req.plan.probe_count);
    let curve_a0 = niessen_curve(sys, NiessenKind::A, req.lambda0, &plan_b, tol)?;
    let class_b_kind_a = classify_endpoint(&curve_a0, tol)?;

    let plan_b2 = CurvePlan::toward(sys, Endpoint::B, req.plan.depth_b, req.plan.probe_count);
    let curve_b2 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda2, 0.0), &plan_b2, tol)?;
    let class_b_kind_b = classify_endpoint(&curve_b2, tol)?;

    let mut basis_b = None;
    let spec_b = right_side_spec(req, req.lambda2, &class_b_kind_b, &mut basis_b)?;
    let right = frame_path_for_side(sys, C64::new(req.lambda2, 0.0), &spec_b, x_lo, x_hi, tol)?;

    let left = FramePath::new(
        sys,
        C64::new(req.lambda1, 0.0),
        sys.a,
        &alpha.initial_frame(),
        true,
        tol,
    )?;

    let n = sys.n;
    let path = FnPath {
        f: |x: f64| Ok((left.eval(x)?, right.eval(x)?)),
        n,
    };
    let grid = custom_or_default_grid(req, x_lo, x_hi);
    let flow = maslov::spectral_flow_grid(&path, &grid, "left shelf", tol)?;

    // endpoint-eigenvalue caveats from the (λ2, λ2) and (λ1, λ1) pairs
    let left_l2 = FramePath::new(
        sys,
        C64::new(req.lambda2, 0.0),
        sys.a,
        &alpha.initial_frame(),
        true,
        tol,
    )?;
    let flag2 = endpoint_eigenvalue_flag(&left_l2, &right, x_lo, x_hi, tol)?;
    let curve_b1 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda1, 0.0), &plan_b2, tol)?;
    let class_b1 = classify_endpoint(&curve_b1, tol)?;
    let mut basis_b1 = None;
    let req1 = req.with_lambda2(req.lambda1);
    let spec_b1 = right_side_spec(&req1, req.lambda1, &class_b1, &mut basis_b1)?;
    let right_l1 = frame_path_for_side(sys, C64::new(req.lambda1, 0.0), &spec_b1, x_lo, x_hi, tol)?;
    let flag1 = endpoint_eigenvalue_flag(&left, &right_l1, x_lo, x_hi, tol)?;

    let report = EigencountReport {
        count: flow.index,
        conjugate_points: counted_points(&flow),
        flow,
        lower_bound_only: flag1 || flag2,
        class_b_kind_a: Some(class_b_kind_a),
        class_b_kind_b,
        class_a_kind_a: None,
        class_a_kind_b: None,
        basis_a: None,
        basis_b,
        left_coeffs: None,
        gap_warning: gap_warning(sys, req.lambda1, req.lambda2),
        window: (x_lo, x_hi),
    };
    report.validate()?;
    Ok(report)
}

/// Build the left-side frame path at real λ for a singular left endpoint:
/// limit-point sides use the forward attractor; otherwise the annihilation
/// coefficients are transported from the anchor (backward to the window
/// start, then re-seeded forward).
fn left_singular_path<'a>(
    sys: &'a HamiltonianSystem,
    basis_a: &NiessenBasis,
    class_kind_b: &EndpointClassification,
    lambda: f64,
    x_lo: f64,
    x_hi: f64,
    tol: &Tolerances,
) -> Result<(FramePath<'a>, Option<CMatrix>)> {
    let n = sys.n;
    if class_kind_b.m == n {
        let spec = SidePathSpec {
            coeffs: None,
            endpoint: Endpoint::A,
            limit_point: true,
            divergence_rate: class_kind_b.divergence_rate,
        };
        let p = frame_path_for_side(sys, C64::new(lambda, 0.0), &spec, x_lo, x_hi, tol)?;
        Ok((p, None))
    } else {
        let frame = singular_frame(sys, basis_a, class_kind_b, tol)?;
        let w = frame.w;
        let back = FramePath::new(sys, C64::new(lambda, 0.0), sys.anchor, &w, false, tol)?;
        let at_lo = back.eval(x_lo)?;
        let fwd = FramePath::new(sys, C64::new(lambda, 0.0), x_lo, &at_lo, true, tol)?;
        Ok((fwd, Some(w)))
    }
}

/// Count eigenvalues on [λ1, λ2) for a system singular at both endpoints.
pub fn count_singular_singular(req: &EigencountRequest) -> Result<EigencountReport> {
    let betas_a = match &req.left {
        LeftBoundary::Singular(b) => b.clone(),
        LeftBoundary::Regular(_) => {
            return Err(Error::Contract(
                "count_singular_singular needs a singular left boundary".into(),
            ))
        }
    };
    if !(req.lambda1 < req.lambda2) {
        return Err(Error::Contract("need λ1 < λ2".into()));
    }
    let sys = req.sys;
    let tol = &req.tol;
    if !sys.a.is_finite() {
        return Err(Error::Contract(
            "doubly singular counting requires a finite left endpoint".into(),
        ));
    }
    let x_lo = sys.a + req.plan.x_min_offset;
    let x_hi = req.plan.x_max;

    let plan_a = CurvePlan::toward(sys, Endpoint::A, req.plan.depth_a, req.plan.probe_count);
    let curve_a0 = niessen_curve(sys, NiessenKind::A, req.lambda0, &plan_a, tol)?;
    let class_a_kind_a = classify_endpoint(&curve_a0, tol)?;
    let basis_a = endpoint::build_niessen_basis(&class_a_kind_a, &betas_a, tol)?;
    let curve_a1 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda1, 0.0), &plan_a, tol)?;
    let class_a_kind_b = classify_endpoint(&curve_a1, tol)?;
    let (left, left_coeffs) = left_singular_path(
        sys,
        &basis_a,
        &class_a_kind_b,
        req.lambda1,
        x_lo,
        x_hi,
        tol,
    )?;

    let plan_b2 = CurvePlan::toward(sys, Endpoint::B, req.plan.depth_b, req.plan.probe_count);
    let curve_b2 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda2, 0.0), &plan_b2, tol)?;
    let class_b_kind_b = classify_endpoint(&curve_b2, tol)?;
    let mut basis_b = None;
    let spec_b = right_side_spec(req, req.lambda2, &class_b_kind_b, &mut basis_b)?;
    let right = frame_path_for_side(sys, C64::new(req.lambda2, 0.0), &spec_b, x_lo, x_hi, tol)?;

    let n = sys.n;
    let path = FnPath {
        f: |x: f64| Ok((left.eval(x)?, right.eval(x)?)),
        n,
    };
    let grid = custom_or_default_grid(req, x_lo, x_hi);
    let flow = maslov::spectral_flow_grid(&path, &grid, "left shelf", tol)?;

    // caveat flags from the (λ, λ) pairs
    let curve_a2 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda2, 0.0), &plan_a, tol)?;
    let class_a2 = classify_endpoint(&curve_a2, tol)?;
    let (left_l2, _) =
        left_singular_path(sys, &basis_a, &class_a2, req.lambda2, x_lo, x_hi, tol)?;
    let flag2 = endpoint_eigenvalue_flag(&left_l2, &right, x_lo, x_hi, tol)?;
    let curve_b1 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda1, 0.0), &plan_b2, tol)?;
    let class_b1 = classify_endpoint(&curve_b1, tol)?;
    let mut basis_b1 = None;
    let req1 = req.with_lambda2(req.lambda1);
    let spec_b1 = right_side_spec(&req1, req.lambda1, &class_b1, &mut basis_b1)?;
    let right_l1 = frame_path_for_side(sys, C64::new(req.lambda1, 0.0), &spec_b1, x_lo, x_hi, tol)?;
    let flag1 = endpoint_eigenvalue_flag(&left, &right_l1, x_lo, x_hi, tol)?;

    let report = EigencountReport {
        count: flow.index,
        conjugate_points: counted_points(&flow),
        flow,
        lower_bound_only: flag1 || flag2,
        class_b_kind_a: None,
        class_b_kind_b,
        class_a_kind_a: Some(class_a_kind_a),
        class_a_kind_b: Some(class_a_kind_b),
        basis_a: Some(basis_a),
        basis_b,
        left_coeffs,
        gap_warning: gap_warning(sys, req.lambda1, req.lambda2),
        window: (x_lo, x_hi),
    };
    report.validate()?;
    Ok(report)
}

/// Dispatch on the left boundary data.
pub fn count_eigenvalues(req: &EigencountRequest) -> Result<EigencountReport> {
    match req.left {
        LeftBoundary::Regular(_) => count_regular_singular(req),
        LeftBoundary::Singular(_) => count_singular_singular(req),
    }
}

/// Count eigenvalues of a truncated regular problem on [c, d] with
/// Lagrangian boundary matrices at both ends, via the same Maslov flow.
/// Used for oracle cross-checks.
#[allow(clippy::too_many_arguments)]
pub fn count_truncated_regular(
    sys: &HamiltonianSystem,
    alpha_left: &BoundaryMatrixAlpha,
    alpha_right: &BoundaryMatrixAlpha,
    c: f64,
    d: f64,
    lambda1: f64,
    lambda2: f64,
    tol: &Tolerances,
) -> Result<MaslovResult> {
    let left = FramePath::new(
        sys,
        C64::new(lambda1, 0.0),
        c,
        &alpha_left.initial_frame(),
        true,
        tol,
    )?;
    let right = FramePath::new(
        sys,
        C64::new(lambda2, 0.0),
        d,
        &alpha_right.initial_frame(),
        false,
        tol,
    )?;
    let n = sys.n;
    let path = FnPath {
        f: |x: f64| Ok((left.eval(x)?, right.eval(x)?)),
        n,
    };
    let grid = flow_grid(sys, lambda1, lambda2, c, d);
    maslov::spectral_flow_grid(&path, &grid, "truncated", tol)
}

/// Maslov-box report over [x_lo, x_hi] × [λ1, λ2] for a regular-left
/// request: per-shelf flows plus the honestly-evaluated closed-loop total.
pub fn box_report(req: &EigencountRequest) -> Result<maslov::BoxReport> {
    let sys = req.sys;
    let tol = &req.tol;
    let alpha = match &req.left {
        LeftBoundary::Regular(a) => a.clone(),
        LeftBoundary::Singular(_) => {
            return Err(Error::Contract(
                "the box report is implemented for the regular-left case".into(),
            ))
        }
    };
    let x_lo = sys.a;
    let x_hi = req.plan.x_max;
    let plan_b2 = CurvePlan::toward(sys, Endpoint::B, req.plan.depth_b, req.plan.probe_count);
    let curve_b2 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda2, 0.0), &plan_b2, tol)?;
    let class_b_kind_b = classify_endpoint(&curve_b2, tol)?;
    let mut basis_b = None;
    let spec_b = right_side_spec(req, req.lambda2, &class_b_kind_b, &mut basis_b)?;
    let right = frame_path_for_side(sys, C64::new(req.lambda2, 0.0), &spec_b, x_lo, x_hi, tol)?;
    let right_frame = |x: f64| right.eval(x);

    let f0 = alpha.initial_frame();
    let a = sys.a;
    let tolc = tol.clone();
    let left_frame = move |x: f64, lam: f64| -> Result<CMatrix> {
        if (x - a).abs() < 1e-14 * (1.0 + a.abs()) {
            return Ok(f0.clone());
        }
        let traj = crate::propagate::transport_frame(sys, C64::new(lam, 0.0), &f0, a, &[x], &tolc)?;
        Ok(traj.value_at(x).unwrap().clone())
    };

    maslov::maslov_box(
        sys.n,
        &left_frame,
        &right_frame,
        x_lo,
        x_hi,
        req.lambda1,
        req.lambda2,
        req.plan.samples_for(x_lo, x_hi).min(192),
        tol,
    )
}

/// Conjugate-point loci against the fixed λ2 right frame over a λ grid.
#[derive(Debug, Clone)]
pub struct SpectralCurves {
    pub lambdas: Vec<f64>,
    /// crossings[k] = ascending conjugate-point abscissae at λ = lambdas[k].
    pub crossings: Vec<Vec<f64>>,
    /// Eigenphase trace of the λ1 run for export.
    pub phase_trace: Vec<(f64, Vec<f64>)>,
}

impl SpectralCurves {
    /// Number of distinct loci = max crossing count over the grid.
    pub fn curve_count(&self) -> usize {
        self.crossings.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Locus j as (λ, x) pairs, counting from the lowest crossing.
    pub fn locus(&self, j: usize) -> Vec<(f64, f64)> {
        self.lambdas
            .iter()
            .zip(&self.crossings)
            .filter_map(|(&l, c)| c.get(j).map(|&x| (l, x)))
            .collect()
    }
}

/// For each λ in the grid, the conjugate points of the pair
/// (left frame at λ, right frame at λ2) over the flow window.
pub fn spectral_curves(req: &EigencountRequest, lambda_grid: &[f64]) -> Result<SpectralCurves> {
    let sys = req.sys;
    let tol = &req.tol;
    let alpha = match &req.left {
        LeftBoundary::Regular(a) => a.clone(),
        LeftBoundary::Singular(_) => {
            return Err(Error::Contract(
                "spectral curves are implemented for the regular-left case".into(),
            ))
        }
    };
    let x_lo = sys.a;
    let x_hi = req.plan.x_max;
    let plan_b2 = CurvePlan::toward(sys, Endpoint::B, req.plan.depth_b, req.plan.probe_count);
    let curve_b2 = niessen_curve(sys, NiessenKind::B, C64::new(req.lambda2, 0.0), &plan_b2, tol)?;
    let class_b_kind_b = classify_endpoint(&curve_b2, tol)?;
    let mut basis_b = None;
    let spec_b = right_side_spec(req, req.lambda2, &class_b_kind_b, &mut basis_b)?;
    let right = frame_path_for_side(sys, C64::new(req.lambda2, 0.0), &spec_b, x_lo, x_hi, tol)?;

    let mut crossings = Vec::with_capacity(lambda_grid.len());
    let mut trace = Vec::new();
    for (k, &lam) in lambda_grid.iter().enumerate() {
        let left = FramePath::new(
            sys,
            C64::new(lam, 0.0),
            sys.a,
            &alpha.initial_frame(),
            true,
            tol,
        )?;
        let path = FnPath {
            f: |x: f64| Ok((left.eval(x)?, right.eval(x)?)),
            n: sys.n,
        };
        let grid = flow_grid(sys, lam, req.lambda2, x_lo, x_hi);
        let flow = maslov::spectral_flow_grid(&path, &grid, "curve", tol)?;
        let mut xs: Vec<f64> = flow
            .conjugate_points
            .iter()
            .filter(|cp| cp.direction != 0)
            .flat_map(|cp| std::iter::repeat(cp.t).take(cp.multiplicity))
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        crossings.push(xs);
        if k == 0 {
            trace = flow.phase_trace;
        }
    }
    Ok(SpectralCurves {
        lambdas: lambda_grid.to_vec(),
        crossings,
        phase_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::builtin_system;

    fn gap_alpha() -> BoundaryMatrixAlpha {
        let c = (std::f64::consts::PI / 8.0).cos();
        let s = (std::f64::consts::PI / 8.0).sin();
        BoundaryMatrixAlpha::from_row(&[C64::new(c, 0.0), C64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn gap_count_is_four() {
        let sys = builtin_system("schrodinger_gap", &[]).unwrap();
        let req = EigencountRequest::new(&sys, LeftBoundary::Regular(gap_alpha()), -0.31, 0.2);
        let report = count_regular_singular(&req).unwrap();
        assert_eq!(report.count, 4, "conj {:?}", report.conjugate_points);
        assert!(!report.lower_bound_only);
        assert_eq!(report.conjugate_points.len(), 4);
        assert!(report.conjugate_points.iter().all(|cp| cp.direction == 1));
    }

    #[test]
    fn gap_empty_window_inside_gap() {
        let sys = builtin_system("schrodinger_gap", &[]).unwrap();
        let req = EigencountRequest::new(&sys, LeftBoundary::Regular(gap_alpha()), 0.15, 0.2);
        let report = count_regular_singular(&req).unwrap();
        assert_eq!(report.count, 0);
        assert!(report.conjugate_points.is_empty());
    }

    #[test]
    fn hydrogen_beta1_counts_two() {
        let sys = builtin_system("hydrogen_radial", &[]).unwrap();
        let mut req =
            EigencountRequest::new(&sys, LeftBoundary::Singular(vec![None]), -5.0, -0.375);
        req.plan.x_max = 40.0;
        let report = count_singular_singular(&req).unwrap();
        assert_eq!(report.count, 2, "conj {:?}", report.conjugate_points);
        let ts: Vec<f64> = report.conjugate_points.iter().map(|c| c.t).collect();
        assert!((ts[0] - 1.95).abs() < 0.1, "{ts:?}");
        assert!((ts[1] - 5.00).abs() < 0.1, "{ts:?}");
    }

    #[test]
    fn hydrogen_beta2_counts_three() {
        let sys = builtin_system("hydrogen_radial", &[]).unwrap();
        let beta2 = C64::new(0.2952, -1.4663);
        let mut req = EigencountRequest::new(
            &sys,
            LeftBoundary::Singular(vec![Some(beta2)]),
            -5.0,
            -0.375,
        );
        req.plan.x_max = 40.0;
        let report = count_singular_singular(&req).unwrap();
        assert_eq!(report.count, 3, "conj {:?}", report.conjugate_points);
        let ts: Vec<f64> = report.conjugate_points.iter().map(|c| c.t).collect();
        assert!((ts[0] - 0.68).abs() < 0.1, "{ts:?}");
        assert!((ts[1] - 2.00).abs() < 0.1, "{ts:?}");
        assert!((ts[2] - 5.00).abs() < 0.1, "{ts:?}");
    }

    #[test]
    fn truncated_regular_free_particle() {
        // free particle on [0, π], Dirichlet: eigenvalues k²; [0.5, 5)
        // holds k = 1, 2
        let sys = builtin_system("constant_demo", &[]).unwrap();
        let dirichlet =
            BoundaryMatrixAlpha::from_row(&[crate::numerics::ONE, crate::numerics::ZERO])
                .unwrap();
        let tol = Tolerances::default();
        let res = count_truncated_regular(
            &sys,
            &dirichlet,
            &dirichlet,
            0.0,
            std::f64::consts::PI,
            0.5,
            5.0,
            &tol,
        )
        .unwrap();
        assert_eq!(res.index, 2, "{:?}", res.conjugate_points);
    }
}
