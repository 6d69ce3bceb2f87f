// Explain a single prediction: which features, when dropped or shuffled,
// actually move the model's accuracy.

use tabkit::data::{load_csv, standardize};
use tabkit::explain::medley_interpret;
use tabkit::models::ModelParams;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/diabetes.csv");

fn main() {
    let mut ds = load_csv(DATA, Some("Outcome")).unwrap();
    standardize(&mut ds, None).unwrap();
    let (x, _) = ds.to_xy().unwrap();

    let instance = x.row(0).to_vec();
    let params = ModelParams::default_for("rforest").unwrap();
    let explanation = medley_interpret(&params, &ds, &instance, 5, 42).unwrap();

    println!("predicted class: {}", explanation.predicted_class);
    println!("baseline accuracy: {:.4}\n", explanation.baseline_accuracy);
    println!("{}", explanation.render_csv());

    // Combined score = drop-column and permutation importance averaged;
    // ranked_features sorts by its magnitude.
    let names = ds.feature_names();
    print!("top 3:");
    for &j in explanation.ranked_features().iter().take(3) {
        print!(" {}", names[j]);
    }
    println!();
}
