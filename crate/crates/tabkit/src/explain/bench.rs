//! Recall of explainers on datasets with known ("gold") important features.
//!
//! A gold dataset labels standard-normal rows through a logistic rule over a
//! small set of feature indices; an explainer is scored by how much of that
//! set lands in its top-K features by |score|.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::explain::{
    drop_column_importances, greedy_explain, local_linear_explain, parzen_explain,
    permutation_importances, rank_by_magnitude, surrogate::greedy_scores, LocalLinearConfig,
};
use crate::models::{fit, ClassifierModel, ModelParams};
use crate::numkit::{stats, Matrix, RngStream};

pub const EXPLAINER_IDS: [&str; 6] = ["medley", "drop", "perm", "local_linear", "greedy", "parzen"];

const PERM_REPEATS: usize = 5;
const PARZEN_BANDWIDTH: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldConfig {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    /// Gold coefficient magnitudes are drawn uniformly from [1, 1 + coef_spread].
    pub coef_spread: f64,
    /// Scale of extra Gaussian noise added to the logit before thresholding.
    pub noise: f64,
    pub seed: u64,
}

impl Default for GoldConfig {
    fn default() -> Self {
        GoldConfig {
            d: 10,
            k: 3,
            n: 400,
            coef_spread: 1.0,
            noise: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldDataset {
    pub dataset: Dataset,
    /// Sorted feature indices that actually drive the label.
    pub gold_features: Vec<usize>,
    /// Length-d logit coefficients; exactly 0 off the gold set.
    pub coefficients: Vec<f64>,
    pub generator_config: GoldConfig,
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

/// Draw a gold dataset: X ~ N(0,1), gold indices from child stream 0,
/// coefficients (magnitude ≥ 1, random sign) from child stream 1, rows and
/// label thresholds from child stream 2; y = 1[sigmoid(c·x + noise·ε) > u].
pub fn generate_gold(config: &GoldConfig) -> Result<GoldDataset> {
    if config.d == 0 || config.n < 2 {
        return Err(Error::Usage(
            "gold data needs at least 1 feature and 2 rows".into(),
        ));
    }
    if config.k == 0 || config.k > config.d {
        return Err(Error::Usage(format!(
            "gold set size {} must be in 1..={}",
            config.k, config.d
        )));
    }
    if !(config.coef_spread >= 0.0) || !(config.noise >= 0.0) {
        return Err(Error::Usage(
            "coef_spread and noise must be non-negative".into(),
        ));
    }
    let root = RngStream::seeded(config.seed);
    let mut pick_rng = root.split(0);
    let mut gold = pick_rng.choose_indices(config.k, config.d);
    gold.sort_unstable();

    let mut coef_rng = root.split(1);
    let mut coefficients = vec![0.0; config.d];
    for &j in &gold {
        let magnitude = 1.0 + config.coef_spread * coef_rng.next_f64();
        let sign = if coef_rng.next_below(2) == 0 { 1.0 } else { -1.0 };
        coefficients[j] = sign * magnitude;
    }

    let mut row_rng = root.split(2);
    let mut rows = Vec::with_capacity(config.n);
    let mut y = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let row: Vec<f64> = (0..config.d).map(|_| row_rng.normal()).collect();
        let mut logit: f64 = row.iter().zip(&coefficients).map(|(x, c)| x * c).sum();
        if config.noise > 0.0 {
            logit += config.noise * row_rng.normal();
        }
        let u = row_rng.next_f64();
        y.push(usize::from(sigmoid(logit) > u));
        rows.push(row);
    }
    let dataset = Dataset::from_xy(&Matrix::from_rows(rows)?, &y, "y")?;
    Ok(GoldDataset {
        dataset,
        gold_features: gold,
        coefficients,
        generator_config: config.clone(),
    })
}

/// Fraction of the gold set found in the top-k features by |score|
/// (magnitude ties go to the lower index).
pub fn topk_recall(scores: &[f64], gold: &[usize], k: usize) -> Result<f64> {
    if gold.is_empty() {
        return Err(Error::Usage("gold set is empty".into()));
    }
    if k == 0 || k > scores.len() {
        return Err(Error::Usage(format!(
            "top-k size {k} must be in 1..={}",
            scores.len()
        )));
    }
    if gold.iter().any(|&j| j >= scores.len()) {
        return Err(Error::Usage("gold index out of range".into()));
    }
    let top = &rank_by_magnitude(scores)[..k];
    let hits = top.iter().filter(|j| gold.contains(j)).count();
    Ok(hits as f64 / gold.len() as f64)
}

/// The fixed evaluation suite: 10 datasets, d=10, K=3, with per-dataset
/// seeds split from `seed`.
pub fn default_gold_suite(seed: u64) -> Result<Vec<GoldDataset>> {
    let root = RngStream::seeded(seed);
    (0..10)
        .map(|i| {
            let mut stream = root.split(i);
            generate_gold(&GoldConfig {
                seed: stream.next_u64(),
                ..Default::default()
            })
        })
        .collect()
}

fn explain_instances<F>(
    suite: &[GoldDataset],
    model_kind: &ModelParams,
    n_instances: usize,
    mut explain: F,
) -> Result<Vec<f64>>
where
    F: FnMut(&ClassifierModel, &GoldDataset, &Matrix, usize) -> Result<Vec<f64>>,
{
    if suite.is_empty() {
        return Err(Error::Usage("explainer suite is empty".into()));
    }
    let mut per_dataset = Vec::with_capacity(suite.len());
    for gold_ds in suite {
        let (x, y) = gold_ds.dataset.to_xy()?;
        if n_instances == 0 || n_instances > x.n_rows() {
            return Err(Error::Usage(format!(
                "n_instances {n_instances} must be in 1..={}",
                x.n_rows()
            )));
        }
        let model = fit(model_kind, &x, &y, gold_ds.generator_config.seed)?;
        let mut total = 0.0;
        for t in 0..n_instances {
            let scores = explain(&model, gold_ds, &x, t)?;
            total += topk_recall(&scores, &gold_ds.gold_features, gold_ds.gold_features.len())?;
        }
        per_dataset.push(total / n_instances as f64);
    }
    Ok(per_dataset)
}

fn column_stds(x: &Matrix) -> Vec<f64> {
    (0..x.n_cols())
        .map(|j| stats::population_std(&x.col(j)))
        .collect()
}

fn recall_per_dataset(
    explainer_id: &str,
    suite: &[GoldDataset],
    model_kind: &ModelParams,
    n_instances: usize,
) -> Result<Vec<f64>> {
    match explainer_id {
        // knock-out scores are a property of the training run, so compute
        // them once per dataset and share them across instances
        "medley" | "drop" | "perm" => {
            let mut cached: Option<Vec<f64>> = None;
            explain_instances(suite, model_kind, n_instances, |model, gold_ds, _x, t| {
                if t == 0 {
                    let seed = gold_ds.generator_config.seed;
                    let ds = &gold_ds.dataset;
                    cached = Some(match explainer_id {
                        "drop" => drop_column_importances(model_kind, ds, ds, seed)?.1,
                        "perm" => permutation_importances(model, ds, PERM_REPEATS, seed)?,
                        _ => {
                            let drop = drop_column_importances(model_kind, ds, ds, seed)?.1;
                            let perm = permutation_importances(model, ds, PERM_REPEATS, seed)?;
                            drop.iter().zip(&perm).map(|(d, p)| d + p).collect()
                        }
                    });
                }
                Ok(cached.clone().unwrap())
            })
        }
        "local_linear" => {
            let mut stds: Vec<f64> = Vec::new();
            explain_instances(suite, model_kind, n_instances, |model, gold_ds, x, t| {
                if t == 0 {
                    stds = column_stds(x);
                }
                let mut stream = RngStream::seeded(gold_ds.generator_config.seed)
                    .split(10_000 + t as u64);
                let cfg = LocalLinearConfig {
                    seed: stream.next_u64(),
                    ..Default::default()
                };
                local_linear_explain(model, &x.row(t), &stds, &cfg)
            })
        }
        "greedy" => explain_instances(suite, model_kind, n_instances, |model, gold_ds, x, t| {
            let picks = greedy_explain(model, &x.row(t), gold_ds.gold_features.len())?;
            Ok(greedy_scores(&picks, x.n_cols()))
        }),
        "parzen" => explain_instances(suite, model_kind, n_instances, |model, _gold_ds, x, t| {
            Ok(parzen_explain(model, x, &x.row(t), PARZEN_BANDWIDTH)?.1)
        }),
        other => Err(Error::Usage(format!(
            "unknown explainer '{other}' (expected one of {})",
            EXPLAINER_IDS.join(", ")
        ))),
    }
}

/// Mean recall of one explainer over a suite: per dataset, fit the model,
/// explain the first `n_instances` rows, score top-K recall against the
/// gold set, and average over every (dataset, instance) pair. The model fit
/// seed is each dataset's generator seed.
pub fn recall_on_gold(
    explainer_id: &str,
    suite: &[GoldDataset],
    model_kind: &ModelParams,
    n_instances: usize,
) -> Result<f64> {
    let per_dataset = recall_per_dataset(explainer_id, suite, model_kind, n_instances)?;
    Ok(per_dataset.iter().sum::<f64>() / per_dataset.len() as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub suite_size: usize,
    pub rows_per_dataset: usize,
    pub n_features: usize,
    pub n_gold: usize,
    pub n_instances: usize,
    pub model: ModelParams,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            suite_size: 10,
            rows_per_dataset: 400,
            n_features: 10,
            n_gold: 3,
            n_instances: 20,
            model: ModelParams::default_for("logreg").unwrap(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub methods: Vec<String>,
    /// Mean recall per method, aligned with `methods`.
    pub mean_recall: Vec<f64>,
    /// Per-dataset mean recalls: outer index dataset, inner index method.
    pub per_dataset: Vec<Vec<f64>>,
    pub config: BenchmarkConfig,
}

impl BenchmarkResult {
    pub fn recall_for(&self, method: &str) -> Option<f64> {
        self.methods
            .iter()
            .position(|m| m == method)
            .map(|i| self.mean_recall[i])
    }

    pub fn render_text(&self) -> String {
        let mut out = String::from("method        mean recall\n");
        for (m, r) in self.methods.iter().zip(&self.mean_recall) {
            out.push_str(&format!("{m:<13} {r:.4}\n"));
        }
        out
    }
}

/// Run every explainer over one generated suite and collect mean recalls.
pub fn xai_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkResult> {
    if config.suite_size == 0 {
        return Err(Error::Usage("suite_size must be at least 1".into()));
    }
    let root = RngStream::seeded(config.seed);
    let suite: Vec<GoldDataset> = (0..config.suite_size)
        .map(|i| {
            let mut stream = root.split(i as u64);
            generate_gold(&GoldConfig {
                d: config.n_features,
                k: config.n_gold,
                n: config.rows_per_dataset,
                seed: stream.next_u64(),
                ..Default::default()
            })
        })
        .collect::<Result<_>>()?;

    let mut methods = Vec::new();
    let mut mean_recall = Vec::new();
    let mut columns = Vec::new();
    for id in EXPLAINER_IDS {
        let per_dataset =
            recall_per_dataset(id, &suite, &config.model, config.n_instances)?;
        methods.push(id.to_string());
        mean_recall.push(per_dataset.iter().sum::<f64>() / per_dataset.len() as f64);
        columns.push(per_dataset);
    }
    let per_dataset = (0..config.suite_size)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok(BenchmarkResult {
        methods,
        mean_recall,
        per_dataset,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LogregParams;

    #[test]
    fn gold_generation_shape_and_coefficients() {
        let cfg = GoldConfig {
            d: 8,
            k: 3,
            n: 200,
            seed: 5,
            ..Default::default()
        };
        let g = generate_gold(&cfg).unwrap();
        assert_eq!(g.dataset.n_rows(), 200);
        assert_eq!(g.dataset.feature_names().len(), 8);
        assert_eq!(g.gold_features.len(), 3);
        assert!(g.gold_features.windows(2).all(|w| w[0] < w[1]));
        assert!(g.gold_features.iter().all(|&j| j < 8));
        for j in 0..8 {
            if g.gold_features.contains(&j) {
                assert!(g.coefficients[j].abs() >= 1.0, "{:?}", g.coefficients);
            } else {
                assert_eq!(g.coefficients[j], 0.0);
            }
        }
        let labels = g.dataset.labels().unwrap();
        assert!(labels.iter().all(|&c| c <= 1));
        assert!(labels.contains(&0) && labels.contains(&1));
        // determinism
        let h = generate_gold(&cfg).unwrap();
        assert_eq!(g.coefficients, h.coefficients);
        assert_eq!(g.dataset.data, h.dataset.data);
    }

    #[test]
    fn gold_saturation_and_validation() {
        let all = generate_gold(&GoldConfig {
            d: 4,
            k: 4,
            n: 50,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(all.gold_features, vec![0, 1, 2, 3]);
        assert!(generate_gold(&GoldConfig {
            d: 4,
            k: 5,
            ..Default::default()
        })
        .is_err());
        assert!(generate_gold(&GoldConfig {
            d: 4,
            k: 0,
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn gold_labels_follow_the_logit() {
        let g = generate_gold(&GoldConfig {
            d: 6,
            k: 2,
            n: 2000,
            seed: 9,
            ..Default::default()
        })
        .unwrap();
        let (x, y) = g.dataset.to_xy().unwrap();
        let mut strong_pos = (0, 0);
        let mut strong_neg = (0, 0);
        for i in 0..x.n_rows() {
            let s: f64 = (0..6).map(|j| x.get(i, j) * g.coefficients[j]).sum();
            if s > 2.0 {
                strong_pos = (strong_pos.0 + y[i], strong_pos.1 + 1);
            } else if s < -2.0 {
                strong_neg = (strong_neg.0 + y[i], strong_neg.1 + 1);
            }
        }
        assert!(strong_pos.1 > 50 && strong_neg.1 > 50);
        assert!((strong_pos.0 as f64) / (strong_pos.1 as f64) > 0.75);
        assert!((strong_neg.0 as f64) / (strong_neg.1 as f64) < 0.25);
    }

    #[test]
    fn logreg_recovers_gold_support() {
        let g = generate_gold(&GoldConfig {
            d: 6,
            k: 2,
            n: 4000,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        let (x, y) = g.dataset.to_xy().unwrap();
        let model = fit(
            &ModelParams::Logreg(LogregParams::default()),
            &x,
            &y,
            0,
        )
        .unwrap();
        let w: Vec<f64> = match &model {
            crate::models::ClassifierModel::Logreg(m) => (0..6)
                .map(|j| m.weights.get(1, j) - m.weights.get(0, j))
                .collect(),
            _ => unreachable!(),
        };
        let min_gold = g
            .gold_features
            .iter()
            .map(|&j| w[j].abs())
            .fold(f64::INFINITY, f64::min);
        for j in 0..6 {
            if !g.gold_features.contains(&j) {
                assert!(
                    w[j].abs() < 0.1 * min_gold,
                    "off-gold weight {} vs min gold {min_gold}",
                    w[j]
                );
            }
        }
    }

    #[test]
    fn topk_recall_oracle_and_adversary() {
        let gold = vec![1, 3];
        // perfect explainer puts mass exactly on the gold set
        let mut oracle = vec![0.0; 6];
        for &j in &gold {
            oracle[j] = 1.0;
        }
        assert_eq!(topk_recall(&oracle, &gold, 2).unwrap(), 1.0);
        // adversary scores only the complement
        let mut adversary = vec![1.0; 6];
        for &j in &gold {
            adversary[j] = 0.0;
        }
        assert_eq!(topk_recall(&adversary, &gold, 2).unwrap(), 0.0);
        // magnitude counts, sign does not
        assert_eq!(topk_recall(&[0.1, -9.0, 0.2, 5.0, 0.0, 0.0], &gold, 2).unwrap(), 1.0);
        // all-equal scores: ties resolve to the lowest indices
        assert_eq!(topk_recall(&[1.0; 6], &gold, 2).unwrap(), 0.5);
        assert!(topk_recall(&[1.0; 6], &[], 2).is_err());
        assert!(topk_recall(&[1.0; 6], &gold, 0).is_err());
        assert!(topk_recall(&[1.0; 6], &gold, 7).is_err());
        assert!(topk_recall(&[1.0; 2], &[5], 1).is_err());
    }

    #[test]
    fn recall_runner_with_oracle_closure_is_one() {
        let suite = vec![
            generate_gold(&GoldConfig {
                d: 5,
                k: 2,
                n: 80,
                seed: 11,
                ..Default::default()
            })
            .unwrap(),
            generate_gold(&GoldConfig {
                d: 5,
                k: 2,
                n: 80,
                seed: 12,
                ..Default::default()
            })
            .unwrap(),
        ];
        let model = ModelParams::Logreg(LogregParams::default());
        let per = explain_instances(&suite, &model, 3, |_, gold_ds, _, _| {
            let mut s = vec![0.0; 5];
            for &j in &gold_ds.gold_features {
                s[j] = 1.0;
            }
            Ok(s)
        })
        .unwrap();
        assert_eq!(per, vec![1.0, 1.0]);
        let adv = explain_instances(&suite, &model, 3, |_, gold_ds, _, _| {
            let mut s = vec![1.0; 5];
            for &j in &gold_ds.gold_features {
                s[j] = 0.0;
            }
            Ok(s)
        })
        .unwrap();
        assert_eq!(adv, vec![0.0, 0.0]);
    }

    #[test]
    fn recall_on_gold_small_suite() {
        let suite: Vec<GoldDataset> = (0..2)
            .map(|i| {
                generate_gold(&GoldConfig {
                    d: 5,
                    k: 2,
                    n: 200,
                    seed: 20 + i,
                    ..Default::default()
                })
                .unwrap()
            })
            .collect();
        let model = ModelParams::Logreg(LogregParams::default());
        let medley = recall_on_gold("medley", &suite, &model, 3).unwrap();
        assert!((0.0..=1.0).contains(&medley));
        assert!(medley >= 0.75, "medley recall {medley}");
        let again = recall_on_gold("medley", &suite, &model, 3).unwrap();
        assert_eq!(medley, again);
        for id in ["drop", "perm", "local_linear", "greedy", "parzen"] {
            let r = recall_on_gold(id, &suite, &model, 3).unwrap();
            assert!((0.0..=1.0).contains(&r), "{id} recall {r}");
        }
        assert!(recall_on_gold("shap", &suite, &model, 3).is_err());
        assert!(recall_on_gold("medley", &suite, &model, 0).is_err());
        assert!(recall_on_gold("medley", &[], &model, 3).is_err());
    }

    #[test]
    fn benchmark_smoke() {
        let cfg = BenchmarkConfig {
            suite_size: 2,
            rows_per_dataset: 150,
            n_features: 5,
            n_gold: 2,
            n_instances: 2,
            seed: 4,
            ..Default::default()
        };
        let result = xai_benchmark(&cfg).unwrap();
        assert_eq!(result.methods.len(), EXPLAINER_IDS.len());
        assert_eq!(result.per_dataset.len(), 2);
        assert_eq!(result.per_dataset[0].len(), EXPLAINER_IDS.len());
        for r in &result.mean_recall {
            assert!((0.0..=1.0).contains(r));
        }
        assert!(result.recall_for("medley").is_some());
        assert!(result.recall_for("nope").is_none());
        let text = result.render_text();
        assert!(text.contains("medley") && text.contains("parzen"));
    }

    #[test]
    fn default_suite_is_stable() {
        let a = default_gold_suite(0).unwrap();
        let b = default_gold_suite(0).unwrap();
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.gold_features, y.gold_features);
            assert_eq!(x.dataset.data, y.dataset.data);
        }
        let c = default_gold_suite(1).unwrap();
        assert_ne!(a[0].dataset.data, c[0].dataset.data);
    }
}
