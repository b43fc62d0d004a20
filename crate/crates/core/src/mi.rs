//! Mutual information assembled from entropy estimates.
//!
//! Continuous-continuous MI combines three entropies of standardized
//! samples; continuous-discrete MI mixes class-conditional entropies with
//! empirical class frequencies. Confidence half-widths of the components
//! are added in quadrature (components treated as independent).

use rayon::prelude::*;

use crate::compress::Encoder;
use crate::entropy::{estimate_entropy, EntropyEstimate, EstimatorConfig, EstimatorKind};
use crate::numerics::Matrix;
use crate::scalar::Scalar;
use crate::{Error, Mat, Result};

/// Latent dimension at which kNN entropy estimates become unreliable;
/// crossing it is reported as a note, not an error.
pub const LATENT_DIM_WARNING: usize = 8;

/// Component entropies behind one MI estimate.
#[derive(Debug, Clone)]
pub enum MiComponents {
    Continuous {
        h_x: EntropyEstimate,
        h_y: EntropyEstimate,
        h_joint: EntropyEstimate,
    },
    Discrete {
        h_x: EntropyEstimate,
        class_probs: Vec<f64>,
        h_conditional: Vec<EntropyEstimate>,
    },
}

/// MI point estimate with a 95% CI, in nats.
#[derive(Debug, Clone)]
pub struct MiEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: EstimatorKind,
    pub components: MiComponents,
    /// Diagnostics: encoder descriptions, latent-dimension warnings, clamps.
    pub notes: Vec<String>,
}

impl MiEstimate {
    pub fn ci_half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// Exact arithmetic residual of the defining combination; zero by
    /// construction, exposed so tests can assert the invariant.
    pub fn identity_residual(&self) -> f64 {
        match &self.components {
            MiComponents::Continuous { h_x, h_y, h_joint } => {
                self.value - (h_x.value + h_y.value - h_joint.value)
            }
            MiComponents::Discrete {
                h_x,
                class_probs,
                h_conditional,
            } => {
                let cond: f64 = class_probs
                    .iter()
                    .zip(h_conditional)
                    .map(|(p, h)| p * h.value)
                    .sum();
                self.value - (h_x.value - cond)
            }
        }
    }
}

/// Row-aligned features with one integer class label per row.
#[derive(Debug, Clone)]
pub struct LabeledSamples<S: Scalar> {
    pub features: Matrix<S>,
    pub labels: Vec<usize>,
}

impl<S: Scalar> LabeledSamples<S> {
    pub fn new(features: Matrix<S>, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows vs {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(LabeledSamples { features, labels })
    }
}

/// Per-coordinate z-score. Zero-variance coordinates are left unscaled
/// (their contribution degenerates identically before and after).
fn standardize<S: Scalar>(points: &Matrix<S>) -> Matrix<S> {
    let means = points.col_means();
    let scales: Vec<S> = points
        .col_stds()
        .into_iter()
        .map(|s| if s > S::zero() { S::one() / s } else { S::one() })
        .collect();
    points.standardized(&means, &scales)
}

fn quadrature_ci(value: f64, half_widths: &[f64]) -> (f64, f64) {
    let half = half_widths.iter().map(|h| h * h).sum::<f64>().sqrt();
    (value - half, value + half)
}

/// MI between two continuous sample blocks: the samples are
/// standardized per coordinate (the additive log-scale terms cancel in the
/// combination), and the joint entropy runs on the columnwise concatenation.
pub fn mi_continuous<S: Scalar>(
    x: &Matrix<S>,
    y: &Matrix<S>,
    config: &EstimatorConfig,
) -> Result<MiEstimate> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch(format!(
            "mi_continuous: {} x-rows vs {} y-rows",
            x.rows(),
            y.rows()
        )));
    }
    let xs = standardize(x);
    let ys = standardize(y);
    let joint = xs.hstack(&ys)?;
    let h_x = estimate_entropy(&xs, config)?;
    let h_y = estimate_entropy(&ys, config)?;
    let h_joint = estimate_entropy(&joint, config)?;

    let value = h_x.value + h_y.value - h_joint.value;
    let (ci_low, ci_high) = quadrature_ci(
        value,
        &[
            h_x.ci_half_width(),
            h_y.ci_half_width(),
            h_joint.ci_half_width(),
        ],
    );
    let mut notes = Vec::new();
    let clamps = h_x.warnings + h_y.warnings + h_joint.warnings;
    if clamps > 0 {
        notes.push(format!("{clamps} clamped entropy contributions"));
    }
    Ok(MiEstimate {
        value,
        ci_low,
        ci_high,
        method: config.kind,
        components: MiComponents::Continuous { h_x, h_y, h_joint },
        notes,
    })
}

/// MI between continuous features and discrete labels:
/// h(x) minus the empirical-frequency mixture of class-conditional
/// entropies. Classes are processed in ascending label order.
pub fn mi_discrete<S: Scalar>(
    samples: &LabeledSamples<S>,
    config: &EstimatorConfig,
) -> Result<MiEstimate> {
    let n = samples.features.rows();
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let xs = standardize(&samples.features);

    let mut classes: Vec<usize> = samples.labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let needed = config.min_samples();
    let mut class_rows: Vec<(usize, Vec<usize>)> = Vec::with_capacity(classes.len());
    for &class in &classes {
        let rows: Vec<usize> = samples
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect();
        if rows.len() < needed {
            return Err(Error::ClassTooSmall {
                class,
                got: rows.len(),
                needed,
            });
        }
        class_rows.push((class, rows));
    }

    let h_x = estimate_entropy(&xs, config)?;
    // Parallel over classes; collect preserves class order.
    let conditionals: Vec<Result<EntropyEstimate>> = class_rows
        .par_iter()
        .map(|(_, rows)| estimate_entropy(&xs.select_rows(rows), config))
        .collect();
    let mut class_probs = Vec::with_capacity(class_rows.len());
    let mut h_conditional = Vec::with_capacity(class_rows.len());
    for ((_, rows), res) in class_rows.iter().zip(conditionals) {
        class_probs.push(rows.len() as f64 / n as f64);
        h_conditional.push(res?);
    }

    let cond_mean: f64 = class_probs
        .iter()
        .zip(&h_conditional)
        .map(|(p, h)| p * h.value)
        .sum();
    let value = h_x.value - cond_mean;
    let mut halves = vec![h_x.ci_half_width()];
    halves.extend(
        class_probs
            .iter()
            .zip(&h_conditional)
            .map(|(p, h)| p * h.ci_half_width()),
    );
    let (ci_low, ci_high) = quadrature_ci(value, &halves);

    let mut notes = Vec::new();
    let clamps: usize = h_x.warnings + h_conditional.iter().map(|h| h.warnings).sum::<usize>();
    if clamps > 0 {
        notes.push(format!("{clamps} clamped entropy contributions"));
    }
    Ok(MiEstimate {
        value,
        ci_low,
        ci_high,
        method: config.kind,
        components: MiComponents::Discrete {
            h_x,
            class_probs,
            h_conditional,
        },
        notes,
    })
}

/// Second argument of a compressed MI estimate.
#[derive(Debug, Clone, Copy)]
pub enum MiTarget<'a> {
    Continuous(&'a Mat),
    Discrete(&'a [usize]),
}

/// Apply fitted encoders, then estimate MI on the codes.
pub fn mi_compressed(
    x: &Mat,
    target: MiTarget<'_>,
    encoder_x: &Encoder,
    encoder_y: Option<&Encoder>,
    config: &EstimatorConfig,
) -> Result<MiEstimate> {
    let codes_x = encoder_x.encode(x)?;
    let mut notes = Vec::new();
    if codes_x.cols() >= LATENT_DIM_WARNING && !matches!(encoder_x, Encoder::Identity) {
        notes.push(format!(
            "x latent dim {} >= {LATENT_DIM_WARNING}: kNN entropy may be unreliable",
            codes_x.cols()
        ));
    }
    notes.push(format!("encoder_x: {}", encoder_x.describe()));

    let mut estimate = match target {
        MiTarget::Continuous(y) => {
            let enc_y = encoder_y.unwrap_or(&Encoder::Identity);
            let codes_y = enc_y.encode(y)?;
            if codes_y.cols() >= LATENT_DIM_WARNING && !matches!(enc_y, Encoder::Identity) {
                notes.push(format!(
                    "y latent dim {} >= {LATENT_DIM_WARNING}: kNN entropy may be unreliable",
                    codes_y.cols()
                ));
            }
            notes.push(format!("encoder_y: {}", enc_y.describe()));
            mi_continuous(&codes_x, &codes_y, config)?
        }
        MiTarget::Discrete(labels) => {
            let samples = LabeledSamples::new(codes_x, labels.to_vec())?;
            mi_discrete(&samples, config)?
        }
    };
    estimate.notes.extend(notes);
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_gaussian, Rng};

    fn wkl() -> EstimatorConfig {
        EstimatorConfig::default()
    }

    #[test]
    fn independent_pairs_near_zero() {
        let mut rng = Rng::new(1);
        let joint = sample_gaussian(&Mat::identity(2), 5000, &mut rng).unwrap();
        let x = joint.block(0, 5000, 0, 1);
        let y = joint.block(0, 5000, 1, 2);
        let est = mi_continuous(&x, &y, &wkl()).unwrap();
        assert!(est.value.abs() <= 0.1, "MI {}", est.value);
        assert!(est.identity_residual().abs() < 1e-12);
    }

    #[test]
    fn correlated_pair_recovers_half_nat() {
        // a chosen so the true MI is exactly 0.5 nats.
        let a = (1.0 - (-1.0f64).exp()).sqrt();
        let cov = Mat::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        let joint = sample_gaussian(&cov, 5000, &mut Rng::new(2)).unwrap();
        let x = joint.block(0, 5000, 0, 1);
        let y = joint.block(0, 5000, 1, 2);
        let est = mi_continuous(&x, &y, &wkl()).unwrap();
        assert!((est.value - 0.5).abs() <= 0.15, "MI {}", est.value);
    }

    #[test]
    fn shuffling_destroys_dependence() {
        let a = 0.9;
        let cov = Mat::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        let joint = sample_gaussian(&cov, 5000, &mut Rng::new(3)).unwrap();
        let x = joint.block(0, 5000, 0, 1);
        let y = joint.block(0, 5000, 1, 2);
        let perm = Rng::new(4).permutation(5000);
        let y_shuffled = y.select_rows(&perm);
        let est = mi_continuous(&x, &y_shuffled, &wkl()).unwrap();
        assert!(est.value.abs() <= 0.1, "MI {}", est.value);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = 0.6;
        let cov = Mat::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        let joint = sample_gaussian(&cov, 400, &mut Rng::new(5)).unwrap();
        let x = joint.block(0, 400, 0, 1);
        let y = joint.block(0, 400, 1, 2);
        let xy = mi_continuous(&x, &y, &wkl()).unwrap();
        let yx = mi_continuous(&y, &x, &wkl()).unwrap();
        assert!((xy.value - yx.value).abs() < 1e-9);
    }

    #[test]
    fn standardization_cancels_affine_rescaling() {
        let a = 0.7;
        let cov = Mat::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        let joint = sample_gaussian(&cov, 500, &mut Rng::new(6)).unwrap();
        let x = joint.block(0, 500, 0, 1);
        let y = joint.block(0, 500, 1, 2);
        let x_scaled = x.map(|v| 5.0 * v + 3.0);
        let base = mi_continuous(&x, &y, &wkl()).unwrap();
        let scaled = mi_continuous(&x_scaled, &y, &wkl()).unwrap();
        assert!((base.value - scaled.value).abs() < 1e-9);
        let kl = EstimatorConfig::of_kind(EstimatorKind::Kl);
        let base_kl = mi_continuous(&x, &y, &kl).unwrap();
        let scaled_kl = mi_continuous(&x_scaled, &y, &kl).unwrap();
        assert!((base_kl.value - scaled_kl.value).abs() < 1e-9);
    }

    #[test]
    fn sign_label_carries_ln2() {
        let mut rng = Rng::new(7);
        let n = 10_000;
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let v = rng.normal();
            rows.push(vec![v]);
            labels.push(usize::from(v > 0.0));
        }
        let samples = LabeledSamples::new(Mat::from_rows(&rows).unwrap(), labels).unwrap();
        let est = mi_discrete(&samples, &wkl()).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((est.value - ln2).abs() <= 0.05, "MI {}", est.value);
        assert!(est.identity_residual().abs() < 1e-12);
    }

    #[test]
    fn independent_labels_near_zero() {
        let mut rng = Rng::new(8);
        let n = 10_000;
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            rows.push(vec![rng.normal()]);
            labels.push(rng.below(4) as usize);
        }
        let samples = LabeledSamples::new(Mat::from_rows(&rows).unwrap(), labels).unwrap();
        let est = mi_discrete(&samples, &wkl()).unwrap();
        assert!(est.value.abs() <= 0.05, "MI {}", est.value);
    }

    /// Numerical-quadrature oracle: for unit-variance components with means
    /// 6 sigma apart, the mixture entropy is within 0.01 nats of
    /// H(label) + h(component), i.e. the cluster test's target ln 10 is the
    /// true MI up to < 0.01.
    #[test]
    fn separated_mixture_mi_gap_oracle() {
        let n_classes = 10usize;
        let spacing = 6.0;
        let h_normal = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        // h(mixture) by trapezoid quadrature over a generous support.
        let lo = -10.0;
        let hi = spacing * (n_classes as f64 - 1.0) + 10.0;
        let steps = 400_000;
        let dx = (hi - lo) / steps as f64;
        let mut h_mix = 0.0;
        for i in 0..=steps {
            let x = lo + i as f64 * dx;
            let mut p = 0.0;
            for c in 0..n_classes {
                let d = x - spacing * c as f64;
                p += (-0.5 * d * d).exp();
            }
            p /= n_classes as f64 * (2.0 * std::f64::consts::PI).sqrt();
            if p > 0.0 {
                let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                h_mix += w * (-p * p.ln()) * dx;
            }
        }
        let true_mi = h_mix - h_normal;
        let gap = (n_classes as f64).ln() - true_mi;
        assert!(gap.abs() < 0.01, "gap {gap}");
    }

    #[test]
    fn ten_separated_clusters_carry_ln10() {
        let mut rng = Rng::new(9);
        let n_per = 1000;
        let spacing = 6.0;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        // 10 cluster centers on a 2-D grid, 6 sigma apart.
        for c in 0..10usize {
            let cx = (c % 5) as f64 * spacing;
            let cy = (c / 5) as f64 * spacing;
            for _ in 0..n_per {
                rows.push(vec![cx + rng.normal(), cy + rng.normal()]);
                labels.push(c);
            }
        }
        let samples = LabeledSamples::new(Mat::from_rows(&rows).unwrap(), labels).unwrap();
        let est = mi_discrete(&samples, &wkl()).unwrap();
        let ln10 = 10.0f64.ln();
        assert!((est.value - ln10).abs() <= 0.1, "MI {}", est.value);
    }

    #[test]
    fn small_class_is_rejected_by_name() {
        let features = Mat::from_rows(&[
            vec![0.0],
            vec![1.0],
            vec![2.0],
            vec![3.0],
            vec![4.0],
            vec![5.0],
            vec![6.0],
        ])
        .unwrap();
        let labels = vec![0, 0, 0, 0, 0, 0, 7];
        let samples = LabeledSamples::new(features, labels).unwrap();
        match mi_discrete(&samples, &wkl()) {
            Err(Error::ClassTooSmall { class, .. }) => assert_eq!(class, 7),
            other => panic!("expected ClassTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn identity_encoder_matches_continuous_path() {
        let a = 0.5;
        let cov = Mat::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        let joint = sample_gaussian(&cov, 500, &mut Rng::new(10)).unwrap();
        let x = joint.block(0, 500, 0, 1);
        let y = joint.block(0, 500, 1, 2);
        let direct = mi_continuous(&x, &y, &wkl()).unwrap();
        let via = mi_compressed(
            &x,
            MiTarget::Continuous(&y),
            &Encoder::Identity,
            None,
            &wkl(),
        )
        .unwrap();
        assert_eq!(direct.value, via.value);
        assert_eq!(direct.ci_low, via.ci_low);
        assert_eq!(direct.ci_high, via.ci_high);
    }

    #[test]
    fn wide_latent_warns_not_errs() {
        let points = sample_gaussian(&Mat::identity(9), 300, &mut Rng::new(11)).unwrap();
        let y = sample_gaussian(&Mat::identity(1), 300, &mut Rng::new(12)).unwrap();
        let model = crate::compress::pca_fit(&points, 8).unwrap();
        let est = mi_compressed(
            &points,
            MiTarget::Continuous(&y),
            &Encoder::Pca(model),
            None,
            &wkl(),
        )
        .unwrap();
        assert!(est.notes.iter().any(|n| n.contains("latent dim 8")));
    }
}
