// The two stacked ensembles against the plain learners they are built from,
// on a synthetic task with both a linear and a nonlinear signal.

use tabkit::models::{cv_scores, ModelParams};
use tabkit::numkit::{Matrix, RngStream};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// 500 rows, 10 features: f0..f3 carry a linear signal, f4/f5 interact
// multiplicatively, the rest are noise.
fn mixed_dataset(seed: u64) -> (Matrix, Vec<usize>) {
    let mut rng = RngStream::seeded(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..500 {
        let f: Vec<f64> = (0..10).map(|_| rng.normal()).collect();
        let linear = 1.2 * f[0] - 0.8 * f[1] + 0.5 * f[2] - 0.4 * f[3];
        let nonlinear = 1.5 * f[4] * f[5];
        let noise = 0.3 * rng.normal();
        y.push((linear + nonlinear + noise > 0.0) as usize);
        rows.push(f);
    }
    (Matrix::from_rows(rows).unwrap(), y)
}

fn main() {
    let (x, y) = mixed_dataset(42);

    for (ensemble, base) in [("lrforest", "logreg"), ("svtree", "linsvm")] {
        let pe = ModelParams::default_for(ensemble).unwrap();
        let pb = ModelParams::default_for(base).unwrap();
        let se = cv_scores(&pe, &x, &y, 5, 42).unwrap();
        let sb = cv_scores(&pb, &x, &y, 5, 42).unwrap();
        println!(
            "{ensemble:<9} 5-fold cv {:.4}   vs {base:<7} {:.4}",
            mean(&se),
            mean(&sb)
        );
    }

    // A single decision tree for reference; the ensembles should sit above it.
    let pt = ModelParams::default_for("dtree").unwrap();
    let st = cv_scores(&pt, &x, &y, 5, 42).unwrap();
    println!("dtree     5-fold cv {:.4}", mean(&st));
}
