// Grid and random hyperparameter search with k-fold cross-validation.

use tabkit::data::{load_csv, standardize};
use tabkit::models::{hyper_search, ModelParams, SearchMode, SearchSpec};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/diabetes.csv");

fn main() {
    let mut ds = load_csv(DATA, Some("Outcome")).unwrap();
    standardize(&mut ds, None).unwrap();
    let (x, y) = ds.to_xy().unwrap();

    // Exhaustive grid over the logistic-regression knobs.
    let spec = SearchSpec {
        base: ModelParams::default_for("logreg").unwrap(),
        axes: vec![
            ("l2".into(), vec![0.0, 0.01, 0.1]),
            ("epochs".into(), vec![100.0, 300.0]),
        ],
        mode: SearchMode::Grid,
        folds: 5,
        seed: 42,
    };
    let result = hyper_search(&spec, &x, &y).unwrap();
    println!("grid search, {} trials:", result.trials.len());
    for t in &result.trials {
        println!("  {:?} -> {:.4}", t.assignment, t.mean_accuracy);
    }
    println!("best: {:?} at {:.4}\n", result.best_assignment, result.best_score);

    // Random search samples the grid instead of sweeping it -- handy once
    // the axes multiply out to something large.
    let spec = SearchSpec {
        base: ModelParams::default_for("rforest").unwrap(),
        axes: vec![
            ("n_trees".into(), vec![25.0, 50.0, 100.0, 200.0]),
            ("max_depth".into(), vec![3.0, 5.0, 8.0, 12.0]),
        ],
        mode: SearchMode::Random { n_iter: 5 },
        folds: 3,
        seed: 42,
    };
    let result = hyper_search(&spec, &x, &y).unwrap();
    println!("random search, {} of 16 grid points:", result.trials.len());
    for t in &result.trials {
        println!("  {:?} -> {:.4}", t.assignment, t.mean_accuracy);
    }
    println!("best: {:?} at {:.4}", result.best_assignment, result.best_score);
}
