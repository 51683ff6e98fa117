use renosc::count::{spectral_curves, EigencountRequest, LeftBoundary};
use renosc::numerics::C64;
use renosc::system::{builtin_system, BoundaryMatrixAlpha};

fn main() {
    let sys = builtin_system("schrodinger_gap", &[]).unwrap();
    let c = (std::f64::consts::PI / 8.0).cos();
    let s = (std::f64::consts::PI / 8.0).sin();
    let alpha = BoundaryMatrixAlpha::from_row(&[C64::new(c, 0.0), C64::new(s, 0.0)]).unwrap();
    let req = EigencountRequest::new(&sys, LeftBoundary::Regular(alpha), -0.31, 0.2);
    let m = 18;
    let grid: Vec<f64> = (0..m)
        .map(|k| -0.31 + (0.2 + 0.31) * k as f64 / (m as f64 - 1.0))
        .collect();
    let curves = spectral_curves(&req, &grid).unwrap();
    println!("curve count: {}", curves.curve_count());
    for (lam, xs) in curves.lambdas.iter().zip(&curves.crossings) {
        println!("lambda {lam:+.4}: {:?}", xs.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
}
