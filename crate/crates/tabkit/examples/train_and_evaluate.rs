// Train an LRForest on the bundled diabetes table and score the held-out split.

use tabkit::data::{load_csv, standardize, train_test_split, SplitSpec};
use tabkit::metrics::{classification_report, mannwhitney_auc};
use tabkit::models::{fit, ModelParams};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/diabetes.csv");

fn main() {
    let mut ds = load_csv(DATA, Some("Outcome")).unwrap();
    println!("loaded {} rows, {} features", ds.n_rows(), ds.feature_names().len());

    // The meta learner trains with gradient descent, so bring every feature
    // to zero mean / unit variance first.
    standardize(&mut ds, None).unwrap();

    let spec = SplitSpec { test_fraction: 0.2, stratified: true, seed: 42 };
    let (train, test) = train_test_split(&ds, &spec).unwrap();

    let (x_train, y_train) = train.to_xy().unwrap();
    let (x_test, y_test) = test.to_xy().unwrap();

    let params = ModelParams::default_for("lrforest").unwrap();
    let model = fit(&params, &x_train, &y_train, 42).unwrap();

    let y_pred = model.predict(&x_test).unwrap();
    let names = test.class_names().unwrap();
    let report = classification_report(&y_test, &y_pred, Some(&names)).unwrap();
    println!("{}", report.render_text());

    let scores = model.predict_proba(&x_test).unwrap().col(1);
    println!("ROC AUC: {:.4}", mannwhitney_auc(&y_test, &scores).unwrap());
}
