//! The Maslov index as a spectral flow through -1.
//!
//! For Lagrangian frames X_i = (X_i; Y_i) the unitary
//! W̃ = -(X1+iY1)(X1-iY1)⁻¹ (X2-iY2)(X2+iY2)⁻¹ has -1 as an eigenvalue with
//! multiplicity dim(ℓ1 ∩ ℓ2). Along a path, eigenphases of W̃ are tracked
//! continuously; transversal passes of the phase through π count +1
//! (counterclockwise) or -1 (clockwise), and contributions at endpoints and
//! plateaus follow the arrival/departure rules: arrivals count only
//! counterclockwise, departures only clockwise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{
    self, orthonormalize_columns, solve, unitary_eig, CMatrix, Tolerances, C64,
};

/// Split a 2n x n frame into (X, Y) blocks.
fn split_frame(f: &CMatrix) -> (CMatrix, CMatrix) {
    let n = f.cols;
    let mut x = CMatrix::zeros(n, n);
    let mut y = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            x[(i, j)] = f[(i, j)];
            y[(i, j)] = f[(n + i, j)];
        }
    }
    (x, y)
}

/// ‖F* J F‖ relative to ‖F‖², the Lagrangian-plane defect.
pub fn lagrangian_defect(f: &CMatrix) -> f64 {
    let n = f.cols;
    let j = CMatrix::symplectic_j(n);
    let scale = f.norm_max().powi(2).max(1e-300);
    f.adjoint().mul(&j).mul(f).norm_max() / scale
}

/// The unitary W̃ for a pair of Lagrangian frames.
pub fn wtilde(f1: &CMatrix, f2: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    if f1.cols != f2.cols || f1.rows != f2.rows || f1.rows != 2 * f1.cols {
        return Err(Error::Contract("wtilde: frame shape mismatch".into()));
    }
    for (name, f) in [("F1", f1), ("F2", f2)] {
        if lagrangian_defect(f) > 1e-6 {
            return Err(Error::Contract(format!(
                "wtilde: {name} is not Lagrangian (defect {:.3e})",
                lagrangian_defect(f)
            )));
        }
    }
    let (x1, y1) = split_frame(f1);
    let (x2, y2) = split_frame(f2);
    let i = C64::new(0.0, 1.0);
    let a1 = x1.add(&y1.scale(i));
    let b1 = x1.sub(&y1.scale(i));
    let a2 = x2.sub(&y2.scale(i));
    let b2 = x2.add(&y2.scale(i));
    // A·B⁻¹ computed as solve(B*, A*)* without forming inverses
    let t1 = solve(&b1.adjoint(), &a1.adjoint(), tol)
        .map_err(|_| Error::Contract("wtilde: X1 - iY1 is singular (bad frame)".into()))?
        .adjoint();
    let t2 = solve(&b2.adjoint(), &a2.adjoint(), tol)
        .map_err(|_| Error::Contract("wtilde: X2 + iY2 is singular (bad frame)".into()))?
        .adjoint();
    let w = t1.mul(&t2).scale(C64::new(-1.0, 0.0));
    let n = w.rows;
    let defect = w.adjoint().mul(&w).sub(&CMatrix::identity(n)).norm_max();
    if defect > tol.unitarity {
        return Err(Error::Contract(format!(
            "wtilde: result unitarity defect {defect:.3e}"
        )));
    }
    Ok(w)
}

/// Singular values below an absolute threshold; the right notion for
/// matrices with a natural O(1) scale (W̃ + I is bounded by 2, Wronskians
/// of orthonormal frames by 1), where a relative test against σ_max breaks
/// down when the whole matrix is near zero.
fn count_small_singular(m: &CMatrix, thresh: f64) -> usize {
    let (_, s, _) = numerics::svd(m);
    s.iter().filter(|&&x| x < thresh).count()
}

/// dim(ℓ1 ∩ ℓ2) via dim ker(W̃ + I), cross-checked against
/// dim ker(F1* J F2).
pub fn intersection_dim(
    f1: &CMatrix,
    f2: &CMatrix,
    tolval: f64,
    tol: &Tolerances,
) -> Result<usize> {
    let n = f1.cols;
    let w = wtilde(f1, f2, tol)?;
    let wp = w.add(&CMatrix::identity(n));
    let k1 = count_small_singular(&wp, tolval);
    let q1 = orthonormalize_columns(f1)?;
    let q2 = orthonormalize_columns(f2)?;
    let j = CMatrix::symplectic_j(n);
    let wron = q1.adjoint().mul(&j).mul(&q2);
    let k2 = count_small_singular(&wron, tolval);
    if k1 != k2 {
        // tolerate genuinely borderline singular values
        let borderline = |m: &CMatrix| {
            let (_, s, _) = numerics::svd(m);
            let smax = s.first().copied().unwrap_or(0.0).max(1e-300);
            s.iter()
                .any(|&x| x / smax > tolval / 30.0 && x / smax < tolval * 30.0)
        };
        if !(borderline(&wp) || borderline(&wron)) {
            return Err(Error::Inconsistency(format!(
                "intersection dim disagreement: ker(W̃+I) = {k1}, ker(F1*JF2) = {k2}"
            )));
        }
    }
    Ok(k1)
}

/// One conjugate point of a flow.
#[derive(Debug, Clone)]
pub struct ConjugatePoint {
    /// Path parameter (x or λ).
    pub t: f64,
    pub multiplicity: usize,
    /// +1 counterclockwise, -1 clockwise, 0 for endpoint/plateau episodes
    /// with no net contribution.
    pub direction: i32,
    pub halfwidth: f64,
}

/// Outcome of a spectral-flow evaluation.
#[derive(Debug, Clone)]
pub struct MaslovResult {
    pub index: i64,
    pub conjugate_points: Vec<ConjugatePoint>,
    pub path: String,
    /// (t, sorted eigenphases) samples for export.
    pub phase_trace: Vec<(f64, Vec<f64>)>,
}

/// A parameterized pair of Lagrangian frames.
pub trait FlowPath {
    fn frames_at(&self, t: f64) -> Result<(CMatrix, CMatrix)>;
    fn dim(&self) -> usize;
}

/// FlowPath from a closure.
pub struct FnPath<F: Fn(f64) -> Result<(CMatrix, CMatrix)>> {
    pub f: F,
    pub n: usize,
}

impl<F: Fn(f64) -> Result<(CMatrix, CMatrix)>> FlowPath for FnPath<F> {
    fn frames_at(&self, t: f64) -> Result<(CMatrix, CMatrix)> {
        (self.f)(t)
    }
    fn dim(&self) -> usize {
        self.n
    }
}

struct Sample {
    t: f64,
    /// Lifted (continuous) phases per track.
    lifted: Vec<f64>,
    /// Eigenvectors per track, matched to the track order.
    vectors: Vec<Vec<C64>>,
}

fn eig_of_pair(
    path: &dyn FlowPath,
    t: f64,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let (f1, f2) = path.frames_at(t)?;
    let w = wtilde(&f1, &f2, tol)?;
    let (phases, vecs) = unitary_eig(&w, tol)?;
    let cols = (0..w.rows).map(|j| vecs.col(j)).collect();
    Ok((phases, cols))
}

/// Match new (phases, vectors) to the track order of `prev`, returning
/// lifted phases and reordered vectors; None when the assignment is
/// ambiguous or a phase moved a quarter turn or more.
fn match_tracks(
    prev: &Sample,
    phases: &[f64],
    vectors: &[Vec<C64>],
) -> Option<(Vec<f64>, Vec<Vec<C64>>)> {
    let n = phases.len();
    let mut used = vec![false; n];
    let mut lifted = vec![0.0; n];
    let mut out_vecs: Vec<Vec<C64>> = vec![Vec::new(); n];
    for j in 0..n {
        let mut best = 0.0;
        let mut best_k = usize::MAX;
        for (k, v) in vectors.iter().enumerate() {
            if used[k] {
                continue;
            }
            let ov = numerics::inner(v, &prev.vectors[j]).norm();
            if ov > best {
                best = ov;
                best_k = k;
            }
        }
        if best_k == usize::MAX || best < 0.55 {
            return None;
        }
        used[best_k] = true;
        let raw = phases[best_k];
        let prev_ph = prev.lifted[j];
        let k_shift = ((prev_ph - raw) / (2.0 * PI)).round();
        let cand = raw + 2.0 * PI * k_shift;
        if (cand - prev_ph).abs() > 0.5 * PI {
            return None;
        }
        lifted[j] = cand;
        out_vecs[j] = vectors[best_k].clone();
    }
    Some((lifted, out_vecs))
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Side {
    Below,
    Above,
    /// Inside the hysteresis band; remembers the side it entered from
    /// (None when the path started there).
    InBand(Option<bool>),
}

/// Evaluate the spectral flow of W̃ through -1 along a path on [t0, t1].
///
/// Samples adaptively so each eigenphase moves less than π/2 between
/// consecutive samples, applies arrival/departure rules with a hysteresis
/// band around π, and localizes transversal crossings by bisection to
/// `tol.flow_locate`.
pub fn spectral_flow(
    path: &dyn FlowPath,
    t0: f64,
    t1: f64,
    initial_samples: usize,
    label: &str,
    tol: &Tolerances,
) -> Result<MaslovResult> {
    let count = initial_samples.max(8);
    let grid: Vec<f64> = (0..=count)
        .map(|k| t0 + (t1 - t0) * k as f64 / count as f64)
        .collect();
    spectral_flow_grid(path, &grid, label, tol)
}

/// As `spectral_flow` with an explicit (strictly increasing) initial grid;
/// callers with knowledge of the local phase velocity pre-weight the grid
/// so no step swings the phase near a full turn.
pub fn spectral_flow_grid(
    path: &dyn FlowPath,
    grid: &[f64],
    label: &str,
    tol: &Tolerances,
) -> Result<MaslovResult> {
    if grid.len() < 2 || !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Contract(
            "spectral_flow: grid must be strictly increasing".into(),
        ));
    }
    let t0 = grid[0];
    let n = path.dim();
    let mut samples: Vec<Sample> = Vec::new();
    {
        let (phases, vecs) = eig_of_pair(path, t0, tol)?;
        samples.push(Sample {
            t: t0,
            lifted: phases,
            vectors: vecs,
        });
    }
    let mut pending: Vec<f64> = grid[1..].to_vec();
    let mut guard = 0usize;
    while let Some(&t_next) = pending.first() {
        guard += 1;
        if guard > 400_000 {
            return Err(Error::RefinementNeeded(
                "spectral flow sampling did not stabilize".into(),
            ));
        }
        let prev = samples.last().unwrap();
        let too_small = (t_next - prev.t).abs() < 1e-12 * (1.0 + t_next.abs());
        let subdivide = |pending: &mut Vec<f64>, prev_t: f64, t_next: f64| -> Result<()> {
            if too_small {
                return Err(Error::RefinementNeeded(format!(
                    "phase tracking ambiguous at t = {t_next}"
                )));
            }
            pending.insert(0, 0.5 * (prev_t + t_next));
            Ok(())
        };
        // Nearest-branch lifting aliases swings larger than π to small
        // steps the other way. Two guards: the lift through the midpoint
        // must land on the same branch as the direct lift, and the
        // three-point second difference must be small — an aliased branch
        // assignment of a smooth fast swing shows up as large curvature.
        let (phases_next, vecs_next) = eig_of_pair(path, t_next, tol)?;
        let direct = match_tracks(prev, &phases_next, &vecs_next);
        let tm = 0.5 * (prev.t + t_next);
        let (phases_mid, vecs_mid) = eig_of_pair(path, tm, tol)?;
        let mid = match_tracks(prev, &phases_mid, &vecs_mid);
        let (direct, mid) = match (direct, mid) {
            (Some(d), Some(m)) => (d, m),
            _ => {
                subdivide(&mut pending, prev.t, t_next)?;
                continue;
            }
        };
        let mid_sample = Sample {
            t: tm,
            lifted: mid.0,
            vectors: mid.1,
        };
        let via = match match_tracks(&mid_sample, &phases_next, &vecs_next) {
            Some(v) => v,
            None => {
                subdivide(&mut pending, prev.t, t_next)?;
                continue;
            }
        };
        let branch_mismatch = via
            .0
            .iter()
            .zip(&direct.0)
            .any(|(a, b)| (a - b).abs() > 1.0);
        let curvature_bad = (0..n).any(|j| {
            (prev.lifted[j] - 2.0 * mid_sample.lifted[j] + via.0[j]).abs() > 0.35
        });
        if branch_mismatch || curvature_bad {
            subdivide(&mut pending, prev.t, t_next)?;
            continue;
        }
        samples.push(mid_sample);
        samples.push(Sample {
            t: t_next,
            lifted: via.0,
            vectors: via.1,
        });
        pending.remove(0);
    }

    let h = tol.flow_hysteresis;
    let nearest_level = |s: f64| -> f64 { PI + 2.0 * PI * ((s - PI) / (2.0 * PI)).round() };
    let classify = |s: f64, level: f64| -> Side {
        if s > level + h {
            Side::Above
        } else if s < level - h {
            Side::Below
        } else {
            Side::InBand(None)
        }
    };

    let mut index: i64 = 0;
    let mut points: Vec<ConjugatePoint> = Vec::new();
    for j in 0..n {
        let s0 = samples[0].lifted[j];
        let mut level = nearest_level(s0);
        let mut state = classify(s0, level);
        let mut band_entry_t = samples[0].t;
        for w in samples.windows(2) {
            let (ta, tb) = (w[0].t, w[1].t);
            let sb = w[1].lifted[j];
            if !matches!(state, Side::InBand(_)) && (sb - level).abs() > PI {
                // the phase wandered toward the next crossing level
                level = nearest_level(sb);
                state = classify(sb, level);
                continue;
            }
            let new_raw = classify(sb, level);
            match (state, new_raw) {
                (Side::Below, Side::Below) | (Side::Above, Side::Above) => {}
                (Side::Below, Side::Above) => {
                    let t_star = locate_crossing(path, j, &w[0], level, ta, tb, tol)?;
                    index += 1;
                    points.push(ConjugatePoint {
                        t: t_star,
                        multiplicity: 1,
                        direction: 1,
                        halfwidth: tol.flow_locate,
                    });
                    state = Side::Above;
                }
                (Side::Above, Side::Below) => {
                    let t_star = locate_crossing(path, j, &w[0], level, ta, tb, tol)?;
                    index -= 1;
                    points.push(ConjugatePoint {
                        t: t_star,
                        multiplicity: 1,
                        direction: -1,
                        halfwidth: tol.flow_locate,
                    });
                    state = Side::Below;
                }
                (Side::Below, Side::InBand(_)) => {
                    // arrival from below (counterclockwise): +1
                    let t_star = locate_crossing(path, j, &w[0], level, ta, tb, tol)
                        .unwrap_or(0.5 * (ta + tb));
                    index += 1;
                    band_entry_t = t_star;
                    points.push(ConjugatePoint {
                        t: t_star,
                        multiplicity: 1,
                        direction: 1,
                        halfwidth: tol.flow_locate,
                    });
                    state = Side::InBand(Some(true));
                }
                (Side::Above, Side::InBand(_)) => {
                    // arrival from above (clockwise): no contribution
                    band_entry_t = 0.5 * (ta + tb);
                    state = Side::InBand(Some(false));
                }
                (Side::InBand(entered), Side::Above) => {
                    // departure counterclockwise: no contribution
                    if entered.is_none() {
                        points.push(ConjugatePoint {
                            t: band_entry_t,
                            multiplicity: 1,
                            direction: 0,
                            halfwidth: (tb - band_entry_t).abs(),
                        });
                    }
                    state = Side::Above;
                }
                (Side::InBand(entered), Side::Below) => {
                    // departure clockwise: -1
                    index -= 1;
                    let t_star = if entered == Some(true) {
                        locate_crossing(path, j, &w[0], level, ta, tb, tol)
                            .unwrap_or(0.5 * (ta + tb))
                    } else {
                        band_entry_t
                    };
                    points.push(ConjugatePoint {
                        t: t_star,
                        multiplicity: 1,
                        direction: -1,
                        halfwidth: tol.flow_locate,
                    });
                    state = Side::Below;
                }
                (Side::InBand(e), Side::InBand(_)) => {
                    state = Side::InBand(e);
                }
            }
        }
    }

    // merge simultaneous same-direction crossings into multiplicities, and
    // cancel opposite pairs closer than the localization tolerance — those
    // are indistinguishable from a tangential touch and net to zero
    points.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    let mut merged: Vec<ConjugatePoint> = Vec::new();
    for p in points {
        if let Some(last) = merged.last_mut() {
            if (p.t - last.t).abs() <= 2.0 * tol.flow_locate {
                if p.direction == last.direction {
                    last.multiplicity += p.multiplicity;
                    continue;
                }
                if p.direction == -last.direction && p.multiplicity == last.multiplicity {
                    last.direction = 0;
                    continue;
                }
            }
        }
        merged.push(p);
    }

    let phase_trace = samples
        .iter()
        .map(|s| {
            let mut ph: Vec<f64> = s.lifted.iter().map(|&x| wrap_phase(x)).collect();
            ph.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (s.t, ph)
        })
        .collect();
    Ok(MaslovResult {
        index,
        conjugate_points: merged,
        path: label.to_string(),
        phase_trace,
    })
}

fn wrap_phase(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Bisect for the parameter where track `j`'s lifted phase equals `level`.
fn locate_crossing(
    path: &dyn FlowPath,
    j: usize,
    from: &Sample,
    level: f64,
    ta: f64,
    tb: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let mut lo = ta;
    let mut hi = tb;
    let mut anchor = Sample {
        t: from.t,
        lifted: from.lifted.clone(),
        vectors: from.vectors.clone(),
    };
    let mut lo_val = anchor.lifted[j] - level;
    for _ in 0..64 {
        if (hi - lo).abs() <= 2.0 * tol.flow_locate {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (phases, vecs) = eig_of_pair(path, mid, tol)?;
        let (lifted, vectors) = match match_tracks(&anchor, &phases, &vecs) {
            Some(ok) => ok,
            None => {
                hi = mid;
                continue;
            }
        };
        let val = lifted[j] - level;
        if (val > 0.0) == (lo_val > 0.0) {
            lo = mid;
            lo_val = val;
            anchor = Sample {
                t: mid,
                lifted,
                vectors,
            };
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Nullity-sum route: detected zeros of the Wronskian F1* J F2 along the
/// path, each counted with its kernel dimension. Independent of the W̃
/// phase machinery (grid scan plus golden-section refinement of σ_min).
pub fn nullity_sum(
    path: &dyn FlowPath,
    t0: f64,
    t1: f64,
    grid: usize,
    tolval: f64,
    _tol: &Tolerances,
) -> Result<(usize, Vec<(f64, usize)>)> {
    let n = path.dim();
    let j = CMatrix::symplectic_j(n);
    let sigma_min = |t: f64| -> Result<f64> {
        let (f1, f2) = path.frames_at(t)?;
        let q1 = orthonormalize_columns(&f1)?;
        let q2 = orthonormalize_columns(&f2)?;
        let w = q1.adjoint().mul(&j).mul(&q2);
        let (_, s, _) = numerics::svd(&w);
        Ok(s.last().copied().unwrap_or(0.0))
    };
    let m = grid.max(64);
    let ts: Vec<f64> = (0..=m)
        .map(|k| t0 + (t1 - t0) * k as f64 / m as f64)
        .collect();
    let mut vals = Vec::with_capacity(ts.len());
    for &t in &ts {
        vals.push(sigma_min(t)?);
    }
    let mut crossings = Vec::new();
    let mut total = 0usize;
    for k in 1..ts.len() - 1 {
        if vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1] && vals[k] < 0.5 {
            let (mut a, mut b) = (ts[k - 1], ts[k + 1]);
            let phi = 0.5 * (3.0 - 5.0f64.sqrt());
            let mut x1 = a + phi * (b - a);
            let mut x2 = b - phi * (b - a);
            let mut f1v = sigma_min(x1)?;
            let mut f2v = sigma_min(x2)?;
            for _ in 0..80 {
                if (b - a).abs() < 1e-11 * (1.0 + a.abs()) {
                    break;
                }
                if f1v < f2v {
                    b = x2;
                    x2 = x1;
                    f2v = f1v;
                    x1 = a + phi * (b - a);
                    f1v = sigma_min(x1)?;
                } else {
                    a = x1;
                    x1 = x2;
                    f1v = f2v;
                    x2 = b - phi * (b - a);
                    f2v = sigma_min(x2)?;
                }
            }
            let t_star = 0.5 * (a + b);
            let (f1, f2) = path.frames_at(t_star)?;
            let q1 = orthonormalize_columns(&f1)?;
            let q2 = orthonormalize_columns(&f2)?;
            let w = q1.adjoint().mul(&j).mul(&q2);
            let dim = count_small_singular(&w, tolval.max(1e-6));
            if dim > 0 {
                total += dim;
                crossings.push((t_star, dim));
            }
        }
    }
    Ok((total, crossings))
}

/// Per-shelf results of a Maslov-box evaluation, all in canonical
/// orientation (x increasing, λ increasing), plus the honestly-evaluated
/// closed-loop total (bottom and right forward; top and left reversed).
#[derive(Debug, Clone)]
pub struct BoxReport {
    pub bottom: MaslovResult,
    pub right: MaslovResult,
    pub top: MaslovResult,
    pub left: MaslovResult,
    pub loop_total: i64,
}

/// Evaluate the four shelves of a Maslov box from closures producing the
/// left frame as a function of (x, λ) and the λ2-frame as a function of x,
/// over [x_lo, x_hi] × [λ1, λ2].
#[allow(clippy::too_many_arguments)]
pub fn maslov_box(
    n: usize,
    left_frame: &dyn Fn(f64, f64) -> Result<CMatrix>,
    right_frame: &dyn Fn(f64) -> Result<CMatrix>,
    x_lo: f64,
    x_hi: f64,
    lambda1: f64,
    lambda2: f64,
    samples: usize,
    tol: &Tolerances,
) -> Result<BoxReport> {
    let f2_bottom = right_frame(x_lo)?;
    let bottom_path = FnPath {
        f: |lam: f64| Ok((left_frame(x_lo, lam)?, f2_bottom.clone())),
        n,
    };
    let bottom = spectral_flow(&bottom_path, lambda1, lambda2, samples, "bottom", tol)?;

    let right_path = FnPath {
        f: |x: f64| Ok((left_frame(x, lambda2)?, right_frame(x)?)),
        n,
    };
    let right = spectral_flow(&right_path, x_lo, x_hi, samples, "right", tol)?;

    let f2_top = right_frame(x_hi)?;
    let top_path = FnPath {
        f: |lam: f64| Ok((left_frame(x_hi, lam)?, f2_top.clone())),
        n,
    };
    let top = spectral_flow(&top_path, lambda1, lambda2, samples, "top", tol)?;

    let left_path = FnPath {
        f: |x: f64| Ok((left_frame(x, lambda1)?, right_frame(x)?)),
        n,
    };
    let left = spectral_flow(&left_path, x_lo, x_hi, samples, "left", tol)?;

    let top_rev_path = FnPath {
        f: |lam: f64| {
            let l = lambda1 + lambda2 - lam;
            Ok((left_frame(x_hi, l)?, f2_top.clone()))
        },
        n,
    };
    let top_rev = spectral_flow(&top_rev_path, lambda1, lambda2, samples, "top-rev", tol)?;
    let left_rev_path = FnPath {
        f: |x: f64| {
            let xx = x_lo + x_hi - x;
            Ok((left_frame(xx, lambda1)?, right_frame(xx)?))
        },
        n,
    };
    let left_rev = spectral_flow(&left_rev_path, x_lo, x_hi, samples, "left-rev", tol)?;

    let loop_total = bottom.index + right.index + top_rev.index + left_rev.index;
    Ok(BoxReport {
        bottom,
        right,
        top,
        left,
        loop_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ONE, ZERO};

    fn tolerances() -> Tolerances {
        Tolerances::default()
    }

    fn frame1(a: f64, b: f64) -> CMatrix {
        CMatrix::from_rows(&[vec![C64::new(a, 0.0)], vec![C64::new(b, 0.0)]]).unwrap()
    }

    #[test]
    fn wtilde_equal_frames_is_minus_identity() {
        let tol = tolerances();
        let f = frame1(0.6, 0.8);
        let w = wtilde(&f, &f, &tol).unwrap();
        assert!((w[(0, 0)] + ONE).norm() < 1e-12);
    }

    #[test]
    fn wtilde_transverse_pair() {
        let tol = tolerances();
        let f1 = frame1(1.0, 0.0);
        let f2 = frame1(0.0, 1.0);
        let w = wtilde(&f1, &f2, &tol).unwrap();
        assert!((w[(0, 0)] - ONE).norm() < 1e-12);
    }

    #[test]
    fn wtilde_frame_invariance() {
        let tol = tolerances();
        // Lagrangian frames for n = 2: [I; S] with S Hermitian
        let s = CMatrix::from_rows(&[
            vec![C64::new(0.3, 0.0), C64::new(0.1, 0.2)],
            vec![C64::new(0.1, -0.2), C64::new(-0.7, 0.0)],
        ])
        .unwrap();
        let s2 = CMatrix::from_rows(&[
            vec![C64::new(-1.1, 0.0), C64::new(0.4, -0.3)],
            vec![C64::new(0.4, 0.3), C64::new(0.2, 0.0)],
        ])
        .unwrap();
        let mk = |s: &CMatrix| {
            let mut f = CMatrix::zeros(4, 2);
            for i in 0..2 {
                for j in 0..2 {
                    f[(i, j)] = if i == j { ONE } else { ZERO };
                    f[(2 + i, j)] = s[(i, j)];
                }
            }
            f
        };
        let f1 = mk(&s);
        let f2 = mk(&s2);
        let c = CMatrix::from_rows(&[
            vec![C64::new(2.0, 1.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.0, -0.4), C64::new(1.5, 0.0)],
        ])
        .unwrap();
        let w_a = wtilde(&f1, &f2, &tol).unwrap();
        let w_b = wtilde(&f1, &f2.mul(&c), &tol).unwrap();
        assert!(w_a.sub(&w_b).norm_max() < 1e-8);
        let g = w_a.adjoint().mul(&w_a).sub(&CMatrix::identity(2));
        assert!(g.norm_max() < 1e-10);
    }

    #[test]
    fn intersection_dims() {
        let tol = tolerances();
        let f = frame1(0.6, 0.8);
        assert_eq!(intersection_dim(&f, &f, 1e-8, &tol).unwrap(), 1);
        let f1 = frame1(1.0, 0.0);
        let f2 = frame1(0.0, 1.0);
        assert_eq!(intersection_dim(&f1, &f2, 1e-8, &tol).unwrap(), 0);
    }

    #[test]
    fn rotating_line_flow_has_index_one() {
        // F1(t) = (cos t, sin t), F2 = (0,1): W̃ = e^{2it}, crossing at π/2
        let tol = tolerances();
        let path = FnPath {
            f: |t: f64| Ok((frame1(t.cos(), t.sin()), frame1(0.0, 1.0))),
            n: 1,
        };
        let res =
            spectral_flow(&path, 0.0, std::f64::consts::PI, 64, "rotating line", &tol).unwrap();
        assert_eq!(res.index, 1, "{res:?}");
        assert_eq!(res.conjugate_points.len(), 1);
        let cp = &res.conjugate_points[0];
        assert!(
            (cp.t - std::f64::consts::FRAC_PI_2).abs() < 2e-3,
            "t {}",
            cp.t
        );
        assert_eq!(cp.direction, 1);
        assert_eq!(cp.multiplicity, 1);
    }

    #[test]
    fn constant_transverse_flow_is_zero() {
        let tol = tolerances();
        let path = FnPath {
            f: |_t: f64| Ok((frame1(1.0, 0.0), frame1(0.0, 1.0))),
            n: 1,
        };
        let res = spectral_flow(&path, 0.0, 1.0, 16, "constant", &tol).unwrap();
        assert_eq!(res.index, 0);
        assert!(res.conjugate_points.is_empty());
    }

    #[test]
    fn reversed_rotation_counts_minus_one() {
        let tol = tolerances();
        let path = FnPath {
            f: |t: f64| Ok((frame1((-t).cos(), (-t).sin()), frame1(0.0, 1.0))),
            n: 1,
        };
        let res = spectral_flow(&path, 0.0, std::f64::consts::PI, 64, "cw", &tol).unwrap();
        assert_eq!(res.index, -1);
        assert_eq!(res.conjugate_points[0].direction, -1);
    }

    #[test]
    fn path_additivity_exact() {
        let tol = tolerances();
        let mk = || FnPath {
            f: |t: f64| Ok((frame1((2.3 * t).cos(), (2.3 * t).sin()), frame1(0.2, 1.0))),
            n: 1,
        };
        let t0 = 0.0;
        let t1 = 2.0;
        let tm = 0.83;
        let whole = spectral_flow(&mk(), t0, t1, 64, "whole", &tol).unwrap();
        let first = spectral_flow(&mk(), t0, tm, 64, "first", &tol).unwrap();
        let second = spectral_flow(&mk(), tm, t1, 64, "second", &tol).unwrap();
        assert_eq!(whole.index, first.index + second.index);
    }

    #[test]
    fn endpoint_departure_rules() {
        let tol = tolerances();
        // starts exactly at -1 and departs counterclockwise: index 0
        let path_ccw = FnPath {
            f: |t: f64| Ok((frame1(t.cos(), t.sin()), frame1(1.0, 0.0))),
            n: 1,
        };
        let res = spectral_flow(&path_ccw, 0.0, 1.0, 32, "depart ccw", &tol).unwrap();
        assert_eq!(res.index, 0, "{res:?}");
        // departs clockwise: index -1
        let path_cw = FnPath {
            f: |t: f64| Ok((frame1((-t).cos(), (-t).sin()), frame1(1.0, 0.0))),
            n: 1,
        };
        let res = spectral_flow(&path_cw, 0.0, 1.0, 32, "depart cw", &tol).unwrap();
        assert_eq!(res.index, -1, "{res:?}");
        // arrives counterclockwise at the end: +1
        let path_arr = FnPath {
            f: |t: f64| Ok((frame1(t.cos(), t.sin()), frame1(1.0, 0.0))),
            n: 1,
        };
        let res = spectral_flow(
            &path_arr,
            std::f64::consts::PI - 1.0,
            std::f64::consts::PI,
            32,
            "arrive ccw",
            &tol,
        )
        .unwrap();
        assert_eq!(res.index, 1, "{res:?}");
    }

    #[test]
    fn nullity_sum_matches_flow_on_rotation() {
        let tol = tolerances();
        let path = FnPath {
            f: |t: f64| Ok((frame1((1.7 * t).cos(), (1.7 * t).sin()), frame1(0.0, 1.0))),
            n: 1,
        };
        let t1 = 4.0;
        let flow = spectral_flow(&path, 0.0, t1, 128, "rotation", &tol).unwrap();
        let (count, locs) = nullity_sum(&path, 0.0, t1, 512, 1e-6, &tol).unwrap();
        assert_eq!(count as i64, flow.index, "flow {flow:?} locs {locs:?}");
        for (cp, (t, _)) in flow.conjugate_points.iter().zip(&locs) {
            assert!((cp.t - t).abs() < 1e-2);
        }
    }

    #[test]
    fn two_dimensional_double_crossing() {
        // two lines rotating together: a multiplicity-2 crossing
        let tol = tolerances();
        let path = FnPath {
            f: |t: f64| {
                let mut f1 = CMatrix::zeros(4, 2);
                f1[(0, 0)] = C64::new(t.cos(), 0.0);
                f1[(2, 0)] = C64::new(t.sin(), 0.0);
                f1[(1, 1)] = C64::new(t.cos(), 0.0);
                f1[(3, 1)] = C64::new(t.sin(), 0.0);
                let mut f2 = CMatrix::zeros(4, 2);
                f2[(2, 0)] = ONE;
                f2[(3, 1)] = ONE;
                Ok((f1, f2))
            },
            n: 2,
        };
        let res = spectral_flow(&path, 0.0, std::f64::consts::PI, 64, "double", &tol).unwrap();
        assert_eq!(res.index, 2);
        assert_eq!(res.conjugate_points.len(), 1);
        assert_eq!(res.conjugate_points[0].multiplicity, 2);
    }
}
