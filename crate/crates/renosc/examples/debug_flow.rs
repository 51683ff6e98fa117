// Scratch diagnostics for the gap-system flow near x = 0.
use renosc::count::{EigencountRequest, LeftBoundary};
use renosc::endpoint::{self, classify_endpoint, niessen_curve, CurvePlan, NiessenKind};
use renosc::maslov::wtilde;
use renosc::numerics::{Tolerances, C64};
use renosc::propagate::FramePath;
use renosc::system::{builtin_system, BoundaryMatrixAlpha, Endpoint};

fn main() {
    let sys = builtin_system("schrodinger_gap", &[]).unwrap();
    let tol = Tolerances::default();
    let c = (std::f64::consts::PI / 8.0).cos();
    let s = (std::f64::consts::PI / 8.0).sin();
    let alpha = BoundaryMatrixAlpha::from_row(&[C64::new(c, 0.0), C64::new(s, 0.0)]).unwrap();

    let plan_b2 = CurvePlan::toward(&sys, Endpoint::B, 40.0, 30);
    let curve_b2 = niessen_curve(&sys, NiessenKind::B, C64::new(0.2, 0.0), &plan_b2, &tol).unwrap();
    let class_b2 = classify_endpoint(&curve_b2, &tol).unwrap();
    println!("divergence rate estimate: {:?}", class_b2.divergence_rate);

    let spec = endpoint::SidePathSpec {
        coeffs: None,
        endpoint: Endpoint::B,
        limit_point: true,
        divergence_rate: class_b2.divergence_rate,
    };
    let right = endpoint::frame_path_for_side(&sys, C64::new(0.2, 0.0), &spec, 0.0, 50.0, &tol)
        .unwrap();
    let left = FramePath::new(&sys, C64::new(-0.31, 0.0), 0.0, &alpha.initial_frame(), true, &tol)
        .unwrap();

    for &x in &[
        0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0,
    ] {
        let f1 = left.eval(x).unwrap();
        let f2 = right.eval(x).unwrap();
        let w = wtilde(&f1, &f2, &tol).unwrap();
        let ph = w[(0, 0)].im.atan2(w[(0, 0)].re);
        println!(
            "x={x:8.4}  f1=({:+.4},{:+.4})  f2=({:+.4},{:+.4})  phase={ph:+.6}",
            f1[(0, 0)].re,
            f1[(1, 0)].re,
            f2[(0, 0)].re,
            f2[(1, 0)].re
        );
    }
    let _ = EigencountRequest::new(&sys, LeftBoundary::Regular(alpha), -0.31, 0.2);
}
