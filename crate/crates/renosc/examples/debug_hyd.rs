use renosc::endpoint::{classify_endpoint, niessen_curve, CurvePlan, NiessenKind};
use renosc::numerics::{Tolerances, C64};
use renosc::system::{builtin_system, Endpoint};

fn main() {
    let sys = builtin_system("hydrogen_radial", &[]).unwrap();
    let tol = Tolerances::default();
    let plan_a = CurvePlan::toward(&sys, Endpoint::A, 1e-5, 30);
    for lam in [-5.0, -0.375] {
        let curve = niessen_curve(&sys, NiessenKind::B, C64::new(lam, 0.0), &plan_a, &tol).unwrap();
        let k = curve.final_index();
        println!("lambda = {lam}");
        for kk in [k - 2, k - 1, k] {
            println!(
                "  x={:.3e} values={:?} norm={:.3e}",
                curve.abscissae[kk], curve.values[kk], curve.matrix_norms[kk]
            );
        }
        match classify_endpoint(&curve, &tol) {
            Ok(c) => println!("  m={} case={} finite={:?}", c.m, c.case, c.finite_limits),
            Err(e) => println!("  classify error: {e}"),
        }
    }
}
