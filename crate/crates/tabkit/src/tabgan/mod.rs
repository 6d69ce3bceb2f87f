//! Adversarial synthesis of tabular data: a generator/discriminator pair
//! trained on standardized rows, plus the filtering pipeline that turns raw
//! generator output into an augmentation set (quantile band against the real
//! data, realism ranking by a real-vs-synthetic forest, post-processing back
//! into the data's native ranges and codes).

pub mod mlp;

use serde::{Deserialize, Serialize};

use crate::data::{ColumnMeta, Dataset};
use crate::error::{Error, Result};
use crate::metrics::mannwhitney_auc;
use crate::models::forest::{self, ForestParams};
use crate::numkit::{stats, Matrix, Optimizer, RngStream};

pub use mlp::{bce_with_logits, nonsaturating_loss, sigmoid, Mlp};

/// Generator input dimension.
pub const NOISE_DIM: usize = 100;
/// Hidden widths shared by both nets.
pub const HIDDEN_WIDTHS: [usize; 3] = [50, 25, 12];
const LEARNING_RATE: f64 = 2e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GanParams {
    pub batch_size: usize,
    pub patience: usize,
    pub epochs: usize,
}

impl Default for GanParams {
    fn default() -> Self {
        GanParams {
            batch_size: 64,
            patience: 25,
            epochs: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub disc: f64,
    pub gen: f64,
}

/// Generator 100→50→25→12→d, discriminator d→50→25→12→1 (logit head; apply
/// [`sigmoid`] for a probability). Each net carries its own Adam state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GanModel {
    pub generator: Mlp,
    pub discriminator: Mlp,
    pub gen_opt: Optimizer,
    pub disc_opt: Optimizer,
    pub epoch: usize,
    pub best_loss: f64,
    pub patience_counter: usize,
    pub loss_history: Vec<EpochLoss>,
}

impl GanModel {
    pub fn init(d: usize, seed: u64) -> Result<GanModel> {
        if d == 0 {
            return Err(Error::Usage("data dimension must be at least 1".into()));
        }
        let root = RngStream::seeded(seed);
        let mut gen_widths = vec![NOISE_DIM];
        gen_widths.extend_from_slice(&HIDDEN_WIDTHS);
        gen_widths.push(d);
        let mut disc_widths = vec![d];
        disc_widths.extend_from_slice(&HIDDEN_WIDTHS);
        disc_widths.push(1);
        Ok(GanModel {
            generator: Mlp::init(&gen_widths, &mut root.split(0))?,
            discriminator: Mlp::init(&disc_widths, &mut root.split(1))?,
            gen_opt: Optimizer::adam(LEARNING_RATE),
            disc_opt: Optimizer::adam(LEARNING_RATE),
            epoch: 0,
            best_loss: f64::INFINITY,
            patience_counter: 0,
            loss_history: Vec::new(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.generator.n_outputs()
    }

    /// Discriminator's probability that each row is real.
    pub fn realism(&self, x: &Matrix) -> Result<Vec<f64>> {
        let logits = self.discriminator.forward(x)?;
        Ok((0..logits.n_rows())
            .map(|i| sigmoid(logits.get(i, 0)))
            .collect())
    }
}

fn sample_noise(n: usize, rng: &mut RngStream) -> Matrix {
    Matrix::from_fn(n, NOISE_DIM, |_, _| rng.normal())
}

/// Alternating adversarial training on the dataset's full column set
/// (callers standardize first). The discriminator sees real-vs-generated
/// batches under binary cross-entropy; the generator trains against the
/// non-saturating objective. Early stop: `patience` epochs without a new
/// best generator loss.
pub fn gan_train(real: &Dataset, params: &GanParams, seed: u64) -> Result<GanModel> {
    let cats = real.categorical_columns();
    if !cats.is_empty() {
        return Err(Error::CategoricalUnsupported(cats.join(", ")));
    }
    if real.has_missing() {
        return Err(Error::Data(
            "dataset has missing values; impute before adversarial training".into(),
        ));
    }
    let n = real.n_rows();
    let d = real.n_cols();
    if n == 0 {
        return Err(Error::EmptyDataset("no rows to train on".into()));
    }
    if params.batch_size == 0 {
        return Err(Error::Usage("batch size must be at least 1".into()));
    }
    if params.batch_size > n {
        return Err(Error::BadBatchSize {
            batch: params.batch_size,
            rows: n,
        });
    }

    let mut model = GanModel::init(d, seed)?;
    let root = RngStream::seeded(seed);
    let mut shuffle_rng = root.split(2);
    let mut noise_rng = root.split(3);

    for _ in 0..params.epochs {
        let order = shuffle_rng.permutation(n);
        let mut d_sum = 0.0;
        let mut g_sum = 0.0;
        let mut batches = 0.0;
        for chunk in order.chunks(params.batch_size) {
            let real_batch = real.data.select_rows(chunk);
            let b = chunk.len();

            // Discriminator step: real rows target 1, generated rows 0.
            let fake = model.generator.forward(&sample_noise(b, &mut noise_rng))?;
            let joined = real_batch.vstack(&fake)?;
            let mut targets = vec![1.0; b];
            targets.extend(std::iter::repeat(0.0).take(b));
            let trace = model.discriminator.forward_trace(&joined)?;
            let (d_loss, dlogit) = bce_with_logits(trace.last().unwrap(), &targets)?;
            let (d_grads, _) = model.discriminator.backward(&trace, &dlogit)?;
            model
                .discriminator
                .apply_step(&mut model.disc_opt, &d_grads)?;

            // Generator step on fresh noise, through the updated critic.
            let gen_trace = model
                .generator
                .forward_trace(&sample_noise(b, &mut noise_rng))?;
            let disc_trace = model
                .discriminator
                .forward_trace(gen_trace.last().unwrap())?;
            let (g_loss, dlogit) = nonsaturating_loss(disc_trace.last().unwrap())?;
            let (_, d_fake) = model.discriminator.backward(&disc_trace, &dlogit)?;
            let (g_grads, _) = model.generator.backward(&gen_trace, &d_fake)?;
            model.generator.apply_step(&mut model.gen_opt, &g_grads)?;

            d_sum += d_loss;
            g_sum += g_loss;
            batches += 1.0;
        }
        let g_epoch = g_sum / batches;
        model.loss_history.push(EpochLoss {
            disc: d_sum / batches,
            gen: g_epoch,
        });
        model.epoch += 1;
        if g_epoch < model.best_loss {
            model.best_loss = g_epoch;
            model.patience_counter = 0;
        } else {
            model.patience_counter += 1;
            if model.patience_counter >= params.patience {
                break;
            }
        }
    }
    Ok(model)
}

/// n rows of generator output from seeded standard-normal noise.
pub fn gan_generate(model: &GanModel, n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Ok(Matrix::zeros(0, model.n_features()));
    }
    let mut rng = RngStream::seeded(seed);
    model.generator.forward(&sample_noise(n, &mut rng))
}

/// Keep rows whose every numeric value sits inside the reference column's
/// [bot_q, top_q] empirical quantile band (inclusive). Returns the kept
/// rows and the drop count. Categorical reference columns are ignored.
pub fn quantile_filter(
    data: &Matrix,
    bot_q: f64,
    top_q: f64,
    reference: &Dataset,
) -> Result<(Matrix, usize)> {
    if !(0.0..=1.0).contains(&bot_q) || !(0.0..=1.0).contains(&top_q) || bot_q >= top_q {
        return Err(Error::Usage(format!(
            "quantile band needs 0 <= bot < top <= 1, got [{bot_q}, {top_q}]"
        )));
    }
    if data.n_cols() != reference.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} candidate columns vs {} reference columns",
            data.n_cols(),
            reference.n_cols()
        )));
    }
    let mut bands: Vec<Option<(f64, f64)>> = Vec::with_capacity(reference.n_cols());
    for (j, meta) in reference.columns.iter().enumerate() {
        if meta.kind.is_categorical() {
            bands.push(None);
            continue;
        }
        let observed: Vec<f64> = reference
            .data
            .col(j)
            .into_iter()
            .filter(|v| v.is_finite())
            .collect();
        if observed.is_empty() {
            bands.push(None);
        } else {
            bands.push(Some((
                stats::quantile(&observed, bot_q),
                stats::quantile(&observed, top_q),
            )));
        }
    }
    let keep: Vec<usize> = (0..data.n_rows())
        .filter(|&i| {
            data.row(i)
                .iter()
                .zip(&bands)
                .all(|(v, &band)| band.map_or(true, |(lo, hi)| *v >= lo && *v <= hi))
        })
        .collect();
    let dropped = data.n_rows() - keep.len();
    Ok((data.select_rows(&keep), dropped))
}

/// Rank synthetic rows by how real they look to a forest trained to tell
/// real (class 0) from synthetic (class 1): indices ordered most-real-like
/// first, plus the classifier's held-out AUC (0.5 ≈ indistinguishable).
///
/// The 30% held-out rows are chosen by position, and when both sides have
/// the same row count the SAME positions are held out on each side. A
/// synthetic set that is a verbatim copy of the real one is then scored on
/// aligned duplicate pairs — no split can tell them apart, so the AUC sits
/// at chance instead of the anti-signal that broken pairs would induce.
pub fn adversarial_rank(
    real: &Matrix,
    synthetic: &Matrix,
    adv_config: &ForestParams,
    seed: u64,
) -> Result<(Vec<usize>, f64)> {
    if real.n_rows() < 2 || synthetic.n_rows() < 2 {
        return Err(Error::EmptyDataset(
            "adversarial ranking needs at least two real and two synthetic rows".into(),
        ));
    }
    if real.n_cols() != synthetic.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "real has {} columns, synthetic {}",
            real.n_cols(),
            synthetic.n_cols()
        )));
    }
    let (n_r, n_s) = (real.n_rows(), synthetic.n_rows());
    let held_count = |n: usize| ((n as f64 * 0.3).round() as usize).clamp(1, n - 1);

    let root = RngStream::seeded(seed);
    let mut pick_rng = root.split(0);
    let held_r = pick_rng.choose_indices(held_count(n_r), n_r);
    let held_s = if n_s == n_r {
        held_r.clone()
    } else {
        pick_rng.choose_indices(held_count(n_s), n_s)
    };

    let complement = |held: &[usize], n: usize| -> Vec<usize> {
        let mut out_of = vec![false; n];
        for &i in held {
            out_of[i] = true;
        }
        (0..n).filter(|&i| !out_of[i]).collect()
    };
    let train_r = complement(&held_r, n_r);
    let train_s = complement(&held_s, n_s);

    let tr_x = real.select_rows(&train_r).vstack(&synthetic.select_rows(&train_s))?;
    let mut tr_y = vec![0usize; train_r.len()];
    tr_y.extend(std::iter::repeat(1).take(train_s.len()));
    let model = forest::fit(adv_config, &tr_x, &tr_y, root.split(1).next_u64())?;

    let ho_x = real.select_rows(&held_r).vstack(&synthetic.select_rows(&held_s))?;
    let mut ho_y = vec![0usize; held_r.len()];
    ho_y.extend(std::iter::repeat(1).take(held_s.len()));
    let ho_scores = model.predict_proba(&ho_x)?.col(1);
    let auc = mannwhitney_auc(&ho_y, &ho_scores)?;

    let synth_scores = model.predict_proba(synthetic)?.col(1);
    let mut order: Vec<usize> = (0..synthetic.n_rows()).collect();
    order.sort_by(|&a, &b| {
        synth_scores[a]
            .partial_cmp(&synth_scores[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok((order, auc))
}

/// [`adversarial_rank`] plus truncation to the ⌈keep_frac·n⌉ most
/// real-like rows. keep_frac = 1 keeps everything, only reordered.
pub fn adversarial_filter(
    real: &Matrix,
    synthetic: &Matrix,
    adv_config: &ForestParams,
    keep_frac: f64,
    seed: u64,
) -> Result<(Matrix, f64)> {
    if !(keep_frac > 0.0 && keep_frac <= 1.0) {
        return Err(Error::Usage(format!(
            "keep_frac must be in (0, 1], got {keep_frac}"
        )));
    }
    let (order, auc) = adversarial_rank(real, synthetic, adv_config, seed)?;
    let k = ((keep_frac * order.len() as f64).ceil() as usize).min(order.len());
    Ok((synthetic.select_rows(&order[..k]), auc))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GanPipeConfig {
    /// Final budget: gen_x_times × (real row count) synthetic rows.
    pub gen_x_times: usize,
    pub bot_filter_quantile: f64,
    pub top_filter_quantile: f64,
    pub is_post_process: bool,
    /// Oversampling multiplier on the budget before filtering.
    pub pregeneration_frac: f64,
    /// false tags the output for use alongside the real rows.
    pub only_generated_data: bool,
    pub adversarial_config: ForestParams,
    pub gan_params: GanParams,
    /// Declared categorical columns; any entry is a hard error, the
    /// generator models continuous data only.
    pub cat_cols: Option<Vec<String>>,
}

impl Default for GanPipeConfig {
    fn default() -> Self {
        GanPipeConfig {
            gen_x_times: 100,
            bot_filter_quantile: 0.001,
            top_filter_quantile: 0.999,
            is_post_process: true,
            pregeneration_frac: 2.0,
            only_generated_data: false,
            adversarial_config: ForestParams {
                n_trees: 50,
                max_depth: Some(10),
                min_samples_split: 2,
                max_features: None,
            },
            gan_params: GanParams::default(),
            cat_cols: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GanPipeReport {
    pub config: GanPipeConfig,
    pub seed: u64,
    pub epochs_run: usize,
    pub rows_pregenerated: usize,
    pub rows_dropped_by_quantile: usize,
    pub rows_requested: usize,
    pub rows_kept: usize,
    pub adversarial_auc: Option<f64>,
    pub adversarial_model: String,
    pub combine_with_real: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipeOutput {
    pub gen_x: Matrix,
    pub gen_y: Vec<usize>,
    pub report: GanPipeReport,
}

fn integer_coded_columns(x: &Matrix) -> Vec<bool> {
    (0..x.n_cols())
        .map(|j| {
            let col = x.col(j);
            col.iter()
                .filter(|v| v.is_finite())
                .all(|v| v.fract() == 0.0)
        })
        .collect()
}

fn nearest_code(v: f64, codes: &[f64]) -> f64 {
    let mut best = codes[0];
    let mut best_dist = (v - best).abs();
    for &c in &codes[1..] {
        let dist = (v - c).abs();
        if dist < best_dist {
            best = c;
            best_dist = dist;
        }
    }
    best
}

/// Full augmentation pipeline. Trains the nets on the standardized
/// [train_x | train_y] block, oversamples, drops out-of-band rows against
/// the training quantiles, orders the rest by adversarial realism (scored
/// against test_x when given, else train_x), restores native scales and
/// codes, and truncates to gen_x_times × n rows.
pub fn generate_data_pipe(
    train_x: &Matrix,
    train_y: &[usize],
    test_x: Option<&Matrix>,
    cfg: &GanPipeConfig,
    seed: u64,
) -> Result<PipeOutput> {
    if let Some(cats) = &cfg.cat_cols {
        if !cats.is_empty() {
            return Err(Error::CategoricalUnsupported(cats.join(", ")));
        }
    }
    let n = train_x.n_rows();
    let d = train_x.n_cols();
    if n == 0 || d == 0 {
        return Err(Error::EmptyDataset("no training data".into()));
    }
    if train_y.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} training rows vs {} labels",
            train_y.len()
        )));
    }
    if cfg.gen_x_times == 0 {
        return Err(Error::Usage("gen_x_times must be at least 1".into()));
    }
    if !(cfg.pregeneration_frac > 0.0) {
        return Err(Error::Usage(format!(
            "pregeneration_frac must be positive, got {}",
            cfg.pregeneration_frac
        )));
    }
    if let Some(t) = test_x {
        if t.n_cols() != d {
            return Err(Error::ShapeMismatch(format!(
                "test has {} columns, train {d}",
                t.n_cols()
            )));
        }
    }
    if train_x.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(
            "training data has missing or non-finite values; impute first".into(),
        ));
    }

    // Reference dataset in native units: features plus the target column.
    let reference = Dataset::from_xy(train_x, train_y, "y")?;
    let combined = &reference.data;
    let width = d + 1;

    let integer_cols = integer_coded_columns(train_x);
    let mut means = vec![0.0; width];
    let mut denoms = vec![1.0; width];
    let mut mins = vec![0.0; width];
    let mut maxs = vec![0.0; width];
    for j in 0..width {
        let col = combined.col(j);
        means[j] = stats::mean(&col);
        let sd = stats::population_std(&col);
        denoms[j] = if sd > 0.0 { sd } else { 1.0 };
        mins[j] = stats::min(&col);
        maxs[j] = stats::max(&col);
    }

    let standardized = Matrix::from_fn(n, width, |i, j| {
        (combined.get(i, j) - means[j]) / denoms[j]
    });
    let std_ds = Dataset::new(
        (0..width)
            .map(|j| ColumnMeta::numeric(format!("z{j}")))
            .collect(),
        standardized,
        None,
    )?;

    let root = RngStream::seeded(seed);
    let train_seed = root.split(0).next_u64();
    let gen_seed = root.split(1).next_u64();
    let adv_seed = root.split(2).next_u64();

    let model = gan_train(&std_ds, &cfg.gan_params, train_seed)?;

    let budget = cfg.gen_x_times * n;
    let pregen_n = (cfg.pregeneration_frac * budget as f64).ceil() as usize;
    let raw = gan_generate(&model, pregen_n, gen_seed)?;
    let candidates = Matrix::from_fn(raw.n_rows(), width, |i, j| {
        raw.get(i, j) * denoms[j] + means[j]
    });

    let (mut survivors, dropped) = quantile_filter(
        &candidates,
        cfg.bot_filter_quantile,
        cfg.top_filter_quantile,
        &reference,
    )?;

    let mut warnings = Vec::new();
    let mut auc = None;
    if survivors.n_rows() == 0 {
        warnings.push("no synthetic rows survived the quantile filter".to_string());
    } else if survivors.n_rows() < 4 {
        warnings.push(format!(
            "only {} rows survived the quantile filter; adversarial ranking skipped",
            survivors.n_rows()
        ));
    } else {
        let feature_idx: Vec<usize> = (0..d).collect();
        let synth_x = survivors.select_cols(&feature_idx);
        let real_side = test_x.unwrap_or(train_x);
        let (order, a) =
            adversarial_rank(real_side, &synth_x, &cfg.adversarial_config, adv_seed)?;
        survivors = survivors.select_rows(&order);
        auc = Some(a);
    }

    // Native-range cleanup, then decode the target to a valid class code.
    let mut codes: Vec<f64> = train_y.iter().map(|&c| c as f64).collect();
    codes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    codes.dedup();
    let kept = survivors.n_rows().min(budget);
    if survivors.n_rows() < budget {
        warnings.push(format!(
            "requested {budget} rows but only {} survived filtering",
            survivors.n_rows()
        ));
    }
    let mut gen_x = Matrix::zeros(kept, d);
    let mut gen_y = Vec::with_capacity(kept);
    for i in 0..kept {
        for j in 0..d {
            let mut v = survivors.get(i, j);
            if cfg.is_post_process {
                v = v.clamp(mins[j], maxs[j]);
                if integer_cols[j] {
                    v = v.round();
                }
            }
            gen_x.set(i, j, v);
        }
        gen_y.push(nearest_code(survivors.get(i, d), &codes) as usize);
    }

    let report = GanPipeReport {
        config: cfg.clone(),
        seed,
        epochs_run: model.epoch,
        rows_pregenerated: pregen_n,
        rows_dropped_by_quantile: dropped,
        rows_requested: budget,
        rows_kept: kept,
        adversarial_auc: auc,
        adversarial_model: "random_forest".to_string(),
        combine_with_real: !cfg.only_generated_data,
        warnings,
    };
    Ok(PipeOutput {
        gen_x,
        gen_y,
        report,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    /// Columns x1..xd plus a real-valued target y.
    pub dataset: Dataset,
    /// Ground-truth weights, zero outside the informative set.
    pub coefficients: Vec<f64>,
    pub informative: Vec<usize>,
}

/// Linear regression data: X ~ N(0,1), y = Xw + noise_sd·ε with
/// n_informative nonzero weights drawn uniformly from [1, 100].
pub fn make_regression(
    n: usize,
    d: usize,
    n_informative: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<RegressionData> {
    if n == 0 {
        return Err(Error::EmptyDataset("regression sample of size 0".into()));
    }
    if d == 0 {
        return Err(Error::Usage("need at least one feature".into()));
    }
    if n_informative > d {
        return Err(Error::Usage(format!(
            "n_informative = {n_informative} exceeds {d} features"
        )));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::Usage(format!(
            "noise_sd must be non-negative, got {noise_sd}"
        )));
    }
    let root = RngStream::seeded(seed);
    let mut informative = root.split(0).choose_indices(n_informative, d);
    informative.sort_unstable();
    let mut coef_rng = root.split(1);
    let mut coefficients = vec![0.0; d];
    for &j in &informative {
        coefficients[j] = coef_rng.uniform(1.0, 100.0);
    }
    let mut x_rng = root.split(2);
    let x = Matrix::from_fn(n, d, |_, _| x_rng.normal());
    let mut noise_rng = root.split(3);
    let mut data = Matrix::zeros(n, d + 1);
    for i in 0..n {
        let y = stats::dot(x.row(i), &coefficients) + noise_sd * noise_rng.normal();
        for j in 0..d {
            data.set(i, j, x.get(i, j));
        }
        data.set(i, d, y);
    }
    let mut columns: Vec<ColumnMeta> = (1..=d).map(|j| ColumnMeta::numeric(format!("x{j}"))).collect();
    columns.push(ColumnMeta::numeric("y"));
    let dataset = Dataset::new(columns, data, Some(d))?;
    Ok(RegressionData {
        dataset,
        coefficients,
        informative,
    })
}

#[cfg(test)]
mod tests;
