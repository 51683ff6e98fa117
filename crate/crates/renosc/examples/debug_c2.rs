use renosc::count::{count_regular_singular, EigencountRequest, LeftBoundary};
use renosc::numerics::C64;
use renosc::system::{builtin_system, BoundaryMatrixAlpha};

fn main() {
    let sys = builtin_system("schrodinger_gap", &[]).unwrap();
    let c = (std::f64::consts::PI / 8.0).cos();
    let s = (std::f64::consts::PI / 8.0).sin();
    let alpha = BoundaryMatrixAlpha::from_row(&[C64::new(c, 0.0), C64::new(s, 0.0)]).unwrap();
    let eigs = [-0.3154, -0.2946, -0.2542, -0.1613, 0.1332];
    for e in eigs {
        let mut req = EigencountRequest::new(
            &sys,
            LeftBoundary::Regular(alpha.clone()),
            e - 5e-3,
            e + 5e-3,
        );
        req.plan.x_max = 80.0;
        match count_regular_singular(&req) {
            Ok(r) => println!(
                "window {e}: N={} pts={:?} lower_bound={}",
                r.count,
                r.conjugate_points.iter().map(|p| p.t).collect::<Vec<_>>(),
                r.lower_bound_only
            ),
            Err(err) => println!("window {e}: ERROR {err}"),
        }
    }
    for k in 0..4 {
        let mid = 0.5 * (eigs[k] + eigs[k + 1]);
        let mut req = EigencountRequest::new(
            &sys,
            LeftBoundary::Regular(alpha.clone()),
            mid - 5e-3,
            mid + 5e-3,
        );
        req.plan.x_max = 80.0;
        match count_regular_singular(&req) {
            Ok(r) => println!("between {mid}: N={}", r.count),
            Err(err) => println!("between {mid}: ERROR {err}"),
        }
    }
}
