//! Spectral calculus on the orientation circle: derivatives, integration by
//! parts, and the stress identity for a trace-free matrix.

use active_doi::grid::OrientationGrid;
use active_doi::sphere::{laplace_beltrami, sphere_integrate, SpectralCircle};

fn main() {
    let orient = OrientationGrid::new(32).expect("even angle count");
    let circle = SpectralCircle::new(&orient);
    let f: Vec<f64> = (0..orient.len()).map(|k| (3.0 * orient.angle(k)).sin()).collect();
    let g: Vec<f64> = (0..orient.len()).map(|k| (3.0 * orient.angle(k) + 0.4).sin() + 0.5).collect();

    let df = circle.derivative(&f);
    let exact: Vec<f64> = (0..orient.len()).map(|k| 3.0 * (3.0 * orient.angle(k)).cos()).collect();
    let err = df.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |d/dphi sin 3phi - 3 cos 3phi| = {err:.2e}");

    let lf = laplace_beltrami(&circle, &f);
    let dg = circle.derivative(&g);
    let lhs: Vec<f64> = lf.iter().zip(&g).map(|(a, b)| a * b).collect();
    let rhs: Vec<f64> = df.iter().zip(&dg).map(|(a, b)| -a * b).collect();
    println!(
        "int (lap f) g = {:.12}, -int f' g' = {:.12}",
        sphere_integrate(&orient, &lhs),
        sphere_integrate(&orient, &rhs)
    );

    // A = [[p, q], [s, -p]]: int (t.Am) f' = int f (2 m.Am)
    let (p, q, s) = (0.3, -0.7, 0.2);
    let (mut l, mut r) = (0.0, 0.0);
    for k in 0..orient.len() {
        let (m, t) = (orient.m(k), orient.t(k));
        let am = [p * m[0] + q * m[1], s * m[0] - p * m[1]];
        l += (t[0] * am[0] + t[1] * am[1]) * df[k];
        r += f[k] * 2.0 * (m[0] * am[0] + m[1] * am[1]);
    }
    println!("stress identity: {:.12} vs {:.12}", l * orient.weight(), r * orient.weight());
}
