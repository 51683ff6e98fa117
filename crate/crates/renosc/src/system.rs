//! Hamiltonian system instances J y' = (B0(x) + λ B1(x)) y and numerical
//! validation of the standing assumptions (Hermitian coefficients, Atkinson
//! positivity).

use std::sync::Arc;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{CMatrix, Tolerances, C64};
use crate::propagate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    Regular,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    A,
    B,
}

/// Coefficient map x -> 2n x 2n Hermitian matrix.
pub type CoeffFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// A linear Hamiltonian system on (a, b). Endpoints may be infinite
/// (represented by ±f64::INFINITY); `anchor` is the base point where the
/// fundamental matrix is pinned to the identity. For a regular endpoint a
/// the anchor may sit at a itself.
#[derive(Clone)]
pub struct HamiltonianSystem {
    pub name: String,
    pub n: usize,
    pub b0: CoeffFn,
    pub b1: CoeffFn,
    pub a: f64,
    pub b: f64,
    pub kind_a: EndpointKind,
    pub kind_b: EndpointKind,
    pub anchor: f64,
    /// Known essential-spectrum gap (λ_lo, λ_hi), if any; used only to warn.
    pub known_gap: Option<(f64, f64)>,
    /// Set when the coefficients are real-valued, in which case the
    /// m_a/m_b consistency assumption holds automatically.
    pub real_coefficients: bool,
}

impl std::fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("interval", &(self.a, self.b))
            .field("anchor", &self.anchor)
            .finish()
    }
}

impl HamiltonianSystem {
    pub fn b0_at(&self, x: f64) -> CMatrix {
        (self.b0)(x)
    }

    pub fn b1_at(&self, x: f64) -> CMatrix {
        (self.b1)(x)
    }

    /// B0(x) + λ B1(x).
    pub fn coeff_at(&self, x: f64, lambda: C64) -> CMatrix {
        self.b0_at(x).add(&self.b1_at(x).scale(lambda))
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Scalar Schrödinger-form view (n = 1, B0 = diag(-q, 1/p), B1 = diag(w, 0)),
    /// recovering (p, q, w) at a point. Errors when the structure does not match.
    pub fn scalar_form_at(&self, x: f64) -> Result<(f64, f64, f64)> {
        if self.n != 1 {
            return Err(Error::Contract("scalar form requires n = 1".into()));
        }
        let b0 = self.b0_at(x);
        let b1 = self.b1_at(x);
        let offdiag = b0[(0, 1)].norm() + b0[(1, 0)].norm() + b1[(0, 1)].norm() + b1[(1, 0)].norm();
        if offdiag > 1e-12 || b1[(1, 1)].norm() > 1e-12 {
            return Err(Error::Contract(
                "system is not in scalar Schrödinger form".into(),
            ));
        }
        let p = 1.0 / b0[(1, 1)].re;
        let q = -b0[(0, 0)].re;
        let w = b1[(0, 0)].re;
        if !(p.is_finite() && w > 0.0) {
            return Err(Error::Contract(
                "scalar form needs 1/p finite and w > 0".into(),
            ));
        }
        Ok((p, q, w))
    }
}

/// A rank-n boundary matrix α with α J α* = 0.
#[derive(Debug, Clone)]
pub struct BoundaryMatrixAlpha {
    pub alpha: CMatrix,
}

impl BoundaryMatrixAlpha {
    pub fn new(alpha: CMatrix) -> Result<Self> {
        let n2 = alpha.cols;
        if n2 % 2 != 0 || alpha.rows != n2 / 2 {
            return Err(Error::Contract(format!(
                "boundary matrix must be n x 2n, got {}x{}",
                alpha.rows, alpha.cols
            )));
        }
        let n = n2 / 2;
        let j = CMatrix::symplectic_j(n);
        let lag = alpha.mul(&j).mul(&alpha.adjoint()).norm_max();
        let scale = alpha.norm_max().powi(2).max(1e-300);
        if lag > 1e-10 * scale {
            return Err(Error::Contract(format!(
                "alpha J alpha* = {lag:.3e} is not zero"
            )));
        }
        let rank = n - crate::numerics::kernel_dim(&alpha, 1e-10);
        if rank != n {
            return Err(Error::Contract("boundary matrix is rank deficient".into()));
        }
        Ok(BoundaryMatrixAlpha { alpha })
    }

    /// Row vector (α1, α2, ...) for n = 1.
    pub fn from_row(row: &[C64]) -> Result<Self> {
        BoundaryMatrixAlpha::new(CMatrix::from_rows(&[row.to_vec()])?)
    }

    /// The initial frame J α* for the regular left endpoint.
    pub fn initial_frame(&self) -> CMatrix {
        let n = self.alpha.rows;
        CMatrix::symplectic_j(n).mul(&self.alpha.adjoint())
    }
}

fn diag2(d0: C64, d1: C64) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = d0;
    m[(1, 1)] = d1;
    m
}

/// Construct one of the built-in systems.
///
/// Recognized names: `schrodinger_gap`, `hydrogen_radial` (params `gamma`,
/// `ell`), `constant_demo`, `custom_expression` (params `p`, `q`, `w`, `a`,
/// `b` as expressions/numbers).
pub fn builtin_system(name: &str, params: &[(String, String)]) -> Result<HamiltonianSystem> {
    let get = |key: &str| -> Option<&str> {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    match name {
        "schrodinger_gap" => Ok(HamiltonianSystem {
            name: name.into(),
            n: 1,
            b0: Arc::new(|x: f64| {
                let v = x.sin() + 60.0 / (1.0 + x * x);
                diag2(C64::new(-v, 0.0), C64::new(1.0, 0.0))
            }),
            b1: Arc::new(|_x: f64| diag2(C64::new(1.0, 0.0), C64::new(0.0, 0.0))),
            a: 0.0,
            b: f64::INFINITY,
            kind_a: EndpointKind::Regular,
            kind_b: EndpointKind::Singular,
            anchor: 0.0,
            known_gap: Some((-0.3477, 0.5948)),
            real_coefficients: true,
        }),
        "hydrogen_radial" => {
            let gamma: f64 = match get("gamma") {
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config(format!("bad gamma {s:?}")))?,
                None => 4.0,
            };
            let ell: f64 = match get("ell") {
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config(format!("bad ell {s:?}")))?,
                None => 0.0,
            };
            Ok(HamiltonianSystem {
                name: name.into(),
                n: 1,
                b0: Arc::new(move |x: f64| {
                    diag2(
                        C64::new(gamma * x - ell * (ell + 1.0), 0.0),
                        C64::new(1.0 / (x * x), 0.0),
                    )
                }),
                b1: Arc::new(|x: f64| diag2(C64::new(x * x, 0.0), C64::new(0.0, 0.0))),
                a: 0.0,
                b: f64::INFINITY,
                kind_a: EndpointKind::Singular,
                kind_b: EndpointKind::Singular,
                anchor: 1.0,
                known_gap: None,
                real_coefficients: true,
            })
        }
        "constant_demo" => Ok(HamiltonianSystem {
            name: name.into(),
            n: 1,
            b0: Arc::new(|_x: f64| diag2(C64::new(0.0, 0.0), C64::new(1.0, 0.0))),
            b1: Arc::new(|_x: f64| diag2(C64::new(1.0, 0.0), C64::new(0.0, 0.0))),
            a: 0.0,
            b: f64::INFINITY,
            kind_a: EndpointKind::Regular,
            kind_b: EndpointKind::Singular,
            anchor: 0.0,
            known_gap: None,
            real_coefficients: true,
        }),
        "custom_expression" => {
            let p = Expr::parse(get("p").unwrap_or("1"))?;
            let q = Expr::parse(get("q").unwrap_or("0"))?;
            let w = Expr::parse(get("w").unwrap_or("1"))?;
            let a: f64 = get("a")
                .unwrap_or("0")
                .parse()
                .map_err(|_| Error::Config("bad interval start".into()))?;
            let b: f64 = match get("b") {
                Some("inf") | None => f64::INFINITY,
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config("bad interval end".into()))?,
            };
            let anchor: f64 = match get("anchor") {
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config("bad anchor".into()))?,
                None if a.is_finite() => a,
                None => 1.0,
            };
            let kind_a = if get("singular_a") == Some("true") || !a.is_finite() {
                EndpointKind::Singular
            } else {
                EndpointKind::Regular
            };
            Ok(HamiltonianSystem {
                name: name.into(),
                n: 1,
                b0: Arc::new(move |x: f64| {
                    diag2(C64::new(-q.eval(x), 0.0), C64::new(1.0 / p.eval(x), 0.0))
                }),
                b1: Arc::new(move |x: f64| diag2(C64::new(w.eval(x), 0.0), C64::new(0.0, 0.0))),
                a,
                b,
                kind_a,
                kind_b: EndpointKind::Singular,
                anchor,
                known_gap: None,
                real_coefficients: true,
            })
        }
        other => Err(Error::Config(format!("unknown system {other:?}"))),
    }
}

/// Sampling plan for assumption validation.
#[derive(Debug, Clone)]
pub struct ProbePlan {
    /// Compact subinterval [c, d] of (a, b) for the Atkinson quadratures.
    pub c: f64,
    pub d: f64,
    /// Number of random initial vectors.
    pub samples: usize,
    pub seed: u64,
    /// Spectral parameter used for the sampled solutions.
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub hermiticity_defect_b0: f64,
    pub hermiticity_defect_b1: f64,
    pub hermitian_ok: bool,
    /// Atkinson quadratures ∫(B1 y, y) over [c, d] for each random solution.
    pub atkinson_quadratures: Vec<f64>,
    pub atkinson_ok: bool,
    pub real_coefficients: bool,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.hermitian_ok && self.atkinson_ok
    }
}

/// Check Hermiticity of the coefficients over samples of [c, d] and strict
/// positivity of the Atkinson quadrature for random solutions. Failures are
/// recorded in the report, not raised.
pub fn validate_assumptions(
    sys: &HamiltonianSystem,
    probe: &ProbePlan,
    tol: &Tolerances,
) -> ValidationReport {
    let mut defect0: f64 = 0.0;
    let mut defect1: f64 = 0.0;
    let grid = 64;
    for k in 0..=grid {
        let x = probe.c + (probe.d - probe.c) * (k as f64) / (grid as f64);
        defect0 = defect0.max(sys.b0_at(x).hermitian_defect());
        defect1 = defect1.max(sys.b1_at(x).hermitian_defect());
    }
    let scale0 = sys.b0_at(0.5 * (probe.c + probe.d)).norm_max().max(1.0);
    let hermitian_ok = defect0 <= 1e-10 * scale0 && defect1 <= 1e-10 * scale0;

    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let dim = sys.dim();
    let lambda = C64::new(probe.lambda, 0.0);
    let mut quads = Vec::with_capacity(probe.samples);
    for _ in 0..probe.samples {
        let mut y0 = CMatrix::zeros(dim, 1);
        for i in 0..dim {
            y0[(i, 0)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let nrm = y0.norm_fro();
        if nrm == 0.0 {
            continue;
        }
        let y0 = y0.scale(C64::new(1.0 / nrm, 0.0));
        match propagate::integrate_with_quadrature(sys, lambda, probe.c, &y0, &[probe.d], tol) {
            Ok(res) => {
                let (_, quad) = &res[0];
                quads.push(quad[(0, 0)].re);
            }
            Err(_) => quads.push(f64::NAN),
        }
    }
    let atkinson_ok = !quads.is_empty() && quads.iter().all(|&q| q.is_finite() && q > 0.0);
    ValidationReport {
        hermiticity_defect_b0: defect0,
        hermiticity_defect_b1: defect1,
        hermitian_ok,
        atkinson_quadratures: quads,
        atkinson_ok,
        real_coefficients: sys.real_coefficients,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schrodinger_gap_coefficients() {
        let sys = builtin_system("schrodinger_gap", &[]).unwrap();
        let b0 = sys.b0_at(0.0);
        assert!((b0[(0, 0)].re + 60.0).abs() < 1e-12);
        assert!((b0[(1, 1)].re - 1.0).abs() < 1e-12);
        let b1 = sys.b1_at(3.7);
        assert!((b1[(0, 0)].re - 1.0).abs() < 1e-12);
        assert_eq!(b1[(1, 1)], crate::numerics::ZERO);
    }

    #[test]
    fn hydrogen_coefficients_at_one() {
        let sys = builtin_system("hydrogen_radial", &[]).unwrap();
        let b0 = sys.b0_at(1.0);
        assert!((b0[(0, 0)].re - 4.0).abs() < 1e-12);
        assert!((b0[(1, 1)].re - 1.0).abs() < 1e-12);
        let b1 = sys.b1_at(1.0);
        assert!((b1[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_demo_is_free_schroedinger() {
        let sys = builtin_system("constant_demo", &[]).unwrap();
        for &x in &[0.0, 1.0, 17.2] {
            assert_eq!(sys.b0_at(x).hermitian_defect(), 0.0);
            assert_eq!(sys.b1_at(x).hermitian_defect(), 0.0);
        }
        let (p, q, w) = sys.scalar_form_at(2.0).unwrap();
        assert_eq!((p, q, w), (1.0, 0.0, 1.0));
    }

    #[test]
    fn custom_expression_system() {
        let params = vec![
            ("q".to_string(), "x^2".to_string()),
            ("a".to_string(), "-8".to_string()),
            ("b".to_string(), "8".to_string()),
        ];
        let sys = builtin_system("custom_expression", &params).unwrap();
        let (p, q, w) = sys.scalar_form_at(2.0).unwrap();
        assert_eq!((p, q, w), (1.0, 4.0, 1.0));
    }

    #[test]
    fn unknown_system_rejected() {
        assert!(builtin_system("nonsense", &[]).is_err());
    }

    #[test]
    fn atkinson_positive_for_gap_system() {
        let sys = builtin_system("schrodinger_gap", &[]).unwrap();
        let probe = ProbePlan {
            c: 1.0,
            d: 2.0,
            samples: 5,
            seed: 42,
            lambda: 0.1,
        };
        let report = validate_assumptions(&sys, &probe, &Tolerances::default());
        assert!(report.hermitian_ok);
        assert!(report.atkinson_ok, "quads {:?}", report.atkinson_quadratures);
        assert!(report.atkinson_quadratures.iter().all(|&q| q > 0.0));
    }

    #[test]
    fn atkinson_positive_for_hydrogen() {
        let sys = builtin_system("hydrogen_radial", &[]).unwrap();
        let probe = ProbePlan {
            c: 0.5,
            d: 1.5,
            samples: 5,
            seed: 7,
            lambda: -1.0,
        };
        let report = validate_assumptions(&sys, &probe, &Tolerances::default());
        assert!(report.atkinson_ok);
    }

    #[test]
    fn atkinson_fails_for_degenerate_weight() {
        // B1 = 0 has zero quadrature: the check must fail.
        let sys = HamiltonianSystem {
            name: "degenerate".into(),
            n: 1,
            b0: Arc::new(|_x| diag2(C64::new(0.0, 0.0), C64::new(1.0, 0.0))),
            b1: Arc::new(|_x| CMatrix::zeros(2, 2)),
            a: 0.0,
            b: 10.0,
            kind_a: EndpointKind::Regular,
            kind_b: EndpointKind::Regular,
            anchor: 0.0,
            known_gap: None,
            real_coefficients: true,
        };
        let probe = ProbePlan {
            c: 1.0,
            d: 2.0,
            samples: 3,
            seed: 1,
            lambda: 0.0,
        };
        let report = validate_assumptions(&sys, &probe, &Tolerances::default());
        assert!(!report.atkinson_ok);
        assert!(report
            .atkinson_quadratures
            .iter()
            .all(|&q| q.abs() < 1e-12));
    }

    #[test]
    fn boundary_matrix_checks() {
        // alpha = (cos pi/8, sin pi/8) is a valid 1x2 boundary matrix
        let c = (std::f64::consts::PI / 8.0).cos();
        let s = (std::f64::consts::PI / 8.0).sin();
        let alpha =
            BoundaryMatrixAlpha::from_row(&[C64::new(c, 0.0), C64::new(s, 0.0)]).unwrap();
        let f = alpha.initial_frame();
        assert!((f[(0, 0)].re + s).abs() < 1e-15);
        assert!((f[(1, 0)].re - c).abs() < 1e-15);
        // rank-deficient row rejected
        assert!(BoundaryMatrixAlpha::from_row(&[crate::numerics::ZERO, crate::numerics::ZERO])
            .is_err());
    }
}
