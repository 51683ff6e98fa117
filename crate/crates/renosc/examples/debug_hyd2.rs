use renosc::endpoint::{classify_endpoint, niessen_curve, CurvePlan, NiessenKind};
use renosc::numerics::{Tolerances, C64};
use renosc::system::{builtin_system, Endpoint};

fn main() {
    let sys = builtin_system("hydrogen_radial", &[]).unwrap();
    let tol = Tolerances::default();
    // kind-B toward B at lambda2 and lambda1, depth 40 as in the count path
    let plan_b2 = CurvePlan::toward(&sys, Endpoint::B, 40.0, 30);
    for lam in [-0.375, -5.0] {
        match niessen_curve(&sys, NiessenKind::B, C64::new(lam, 0.0), &plan_b2, &tol) {
            Ok(curve) => {
                let k = curve.final_index();
                println!("lambda={lam} last values={:?}", curve.values[k]);
                match classify_endpoint(&curve, &tol) {
                    Ok(c) => println!("  m={} case={}", c.m, c.case),
                    Err(e) => println!("  classify error: {e}"),
                }
            }
            Err(e) => println!("lambda={lam} curve error: {e}"),
        }
    }
}
