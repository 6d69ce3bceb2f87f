//! Shared fixtures for the integration tests.
//!
//! The diabetes table is generated, not downloaded: 768 rows with the
//! familiar 8 clinical measurements, drawn from per-class Gaussians whose
//! moments match the published per-outcome summary statistics of the Pima
//! screening data (counts 500/268). Values are clipped to the published
//! ranges and rounded to the precision the original file uses, so models
//! see the same shape of problem without any network dependency.

use tabkit::numkit::RngStream;

/// Path of the committed copy, relative to this crate's manifest.
pub const DIABETES_RELPATH: &str = "/../../data/diabetes.csv";

pub fn diabetes_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/diabetes.csv").to_string()
}

struct Feature {
    name: &'static str,
    mean: [f64; 2], // indexed by outcome
    sd: [f64; 2],
    min: f64,
    max: f64,
    decimals: i32,
}

const FEATURES: [Feature; 8] = [
    Feature {
        name: "Pregnancies",
        mean: [3.30, 4.87],
        sd: [3.02, 3.74],
        min: 0.0,
        max: 17.0,
        decimals: 0,
    },
    Feature {
        name: "Glucose",
        mean: [109.98, 141.26],
        sd: [26.14, 31.94],
        min: 0.0,
        max: 199.0,
        decimals: 0,
    },
    Feature {
        name: "BloodPressure",
        mean: [68.18, 70.82],
        sd: [18.06, 21.49],
        min: 0.0,
        max: 122.0,
        decimals: 0,
    },
    Feature {
        name: "SkinThickness",
        mean: [19.66, 22.16],
        sd: [14.89, 17.68],
        min: 0.0,
        max: 99.0,
        decimals: 0,
    },
    Feature {
        name: "Insulin",
        mean: [68.79, 100.34],
        sd: [98.87, 138.69],
        min: 0.0,
        max: 846.0,
        decimals: 0,
    },
    Feature {
        name: "BMI",
        mean: [30.30, 35.14],
        sd: [7.69, 7.26],
        min: 0.0,
        max: 67.1,
        decimals: 1,
    },
    Feature {
        name: "DiabetesPedigreeFunction",
        mean: [0.43, 0.55],
        sd: [0.30, 0.37],
        min: 0.078,
        max: 2.42,
        decimals: 3,
    },
    Feature {
        name: "Age",
        mean: [31.19, 37.07],
        sd: [11.67, 10.97],
        min: 21.0,
        max: 81.0,
        decimals: 0,
    },
];

const CLASS_COUNTS: [usize; 2] = [500, 268];
const SEED: u64 = 4242;

pub fn diabetes_csv() -> String {
    let mut rng = RngStream::seeded(SEED);
    let mut rows: Vec<(Vec<f64>, usize)> = Vec::new();
    for (outcome, &count) in CLASS_COUNTS.iter().enumerate() {
        for _ in 0..count {
            let row = FEATURES
                .iter()
                .map(|f| {
                    let v = (f.mean[outcome] + f.sd[outcome] * rng.normal())
                        .clamp(f.min, f.max);
                    let scale = 10f64.powi(f.decimals);
                    (v * scale).round() / scale
                })
                .collect();
            rows.push((row, outcome));
        }
    }
    rng.shuffle(&mut rows);

    let mut csv = FEATURES
        .iter()
        .map(|f| f.name)
        .collect::<Vec<_>>()
        .join(",");
    csv.push_str(",Outcome\n");
    for (row, outcome) in rows {
        for (f, v) in FEATURES.iter().zip(row) {
            match f.decimals {
                0 => csv.push_str(&format!("{v:.0},")),
                1 => csv.push_str(&format!("{v:.1},")),
                _ => csv.push_str(&format!("{v:.3},")),
            }
        }
        csv.push_str(&format!("{outcome}\n"));
    }
    csv
}
