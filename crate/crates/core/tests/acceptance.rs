//! Acceptance suite: one test per shipping criterion, each printing a
//! single pass/fail line. Run with `cargo test --test acceptance`.

use infocomp::bounds::{verify_chain_monte_carlo, ChainSpec};
use infocomp::compress::{pca_encode, pca_fit};
use infocomp::entropy::kde::j_b;
use infocomp::entropy::weights::{solve_wkl_weights, support_set};
use infocomp::entropy::{estimate_entropy, EstimatorConfig, EstimatorKind};
use infocomp::infoflow::{
    confusion_matrix_mi, gaussian_blobs, run_info_plane, train_classifier, InfoPlaneConfig,
    NetSpec, TrainClassifierConfig,
};
use infocomp::mi::mi_continuous;
use infocomp::nn::{grads_flat, loss_and_grad, Activation, DenseNet, Loss, Target};
use infocomp::numerics::special::ln_gamma;
use infocomp::numerics::{digamma, sample_gaussian, unit_ball_volume, Rng, EULER_GAMMA};
use infocomp::spatial::{brute_force_knn, NeighborIndex};
use infocomp::synth::{
    run_benchmark, sample_pair, BenchmarkConfig, CompressionSpec, EmbeddingSpec, GaussianPairSpec,
    Variant,
};
use infocomp::Mat;

fn report(criterion: usize, label: &str, pass: bool, detail: &str) {
    let verdict = if pass { "pass" } else { "FAIL" };
    println!("criterion {criterion} ({label}): {verdict} — {detail}");
    assert!(pass, "criterion {criterion} ({label}): {detail}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn wkl() -> EstimatorConfig {
    EstimatorConfig::wkl(5)
}

#[test]
fn criterion_1_gaussian_oracle_grid() {
    let kappas = [0.0, 0.5, 1.0, 2.0, 3.0];
    let mut worst: f64 = 0.0;
    for dim in [1usize, 2] {
        for &kappa in &kappas {
            let estimates: Vec<f64> = (0..5)
                .map(|seed| {
                    let spec = GaussianPairSpec {
                        n_prime: dim,
                        m_prime: dim,
                        kappa,
                        seed: 1000 + seed,
                    };
                    let (xi, eta) = sample_pair(&spec, 5000).unwrap();
                    mi_continuous(&xi, &eta, &wkl()).unwrap().value
                })
                .collect();
            let err = (median(estimates) - kappa).abs();
            worst = worst.max(err);
        }
    }
    report(
        1,
        "gaussian oracle grid",
        worst <= 0.25,
        &format!("worst 5-seed median error {worst:.4} nats (limit 0.25)"),
    );
}

fn grid_mse(config: &BenchmarkConfig) -> f64 {
    let rows = run_benchmark(config).unwrap();
    let se: f64 = rows
        .iter()
        .map(|r| (r.estimate.value - r.true_mi) * (r.estimate.value - r.true_mi))
        .sum();
    se / rows.len() as f64
}

#[test]
fn criterion_2_compression_necessity() {
    let base = BenchmarkConfig {
        kappa_grid: BenchmarkConfig::default_grid(),
        n_samples: 5000,
        n_prime: 2,
        m_prime: 2,
        embedding: EmbeddingSpec::GaussianImage { side: 16 },
        compression: CompressionSpec::Pca { latent: 2 },
        estimator: wkl(),
        variants: vec![Variant::Compressed],
        seed: 21,
    };
    let mse_compressed = grid_mse(&base);

    let raw = BenchmarkConfig {
        embedding: EmbeddingSpec::GaussianImage { side: 8 },
        compression: CompressionSpec::None,
        estimator: EstimatorConfig::of_kind(EstimatorKind::Kl),
        ..base
    };
    let mse_raw = grid_mse(&raw);

    report(
        2,
        "compression necessity",
        mse_compressed <= 3.0 && mse_raw >= 10.0,
        &format!(
            "PCA(2)+WKL on 16x16 images: grid MSE {mse_compressed:.3} (limit 3.0); \
             KL on raw 8x8 images: grid MSE {mse_raw:.3} (floor 10.0)"
        ),
    );
}

#[test]
fn criterion_3_principal_subspace_counterexample() {
    // X = (X1, X2) with Var(X1) = 1, Var(X2) = sigma; Y correlates only
    // with the low-variance coordinate, carrying exactly 1 nat. PCA(1)
    // keeps X1 and discards all of the information.
    let sigma: f64 = 0.5;
    let kappa: f64 = 1.0;
    let rho_sq = 1.0 - (-2.0 * kappa).exp();
    let a = (rho_sq * sigma).sqrt();
    let cov = Mat::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, sigma, a],
        vec![0.0, a, 1.0],
    ])
    .unwrap();
    let mut rng = Rng::new(42);
    let joint = sample_gaussian(&cov, 10_000, &mut rng).unwrap();
    let x = joint.block(0, joint.rows(), 0, 2);
    let y = joint.block(0, joint.rows(), 2, 3);

    let mi_full = mi_continuous(&x, &y, &wkl()).unwrap().value;
    let codes = pca_encode(&pca_fit(&x, 1).unwrap(), &x).unwrap();
    let mi_pca = mi_continuous(&codes, &y, &wkl()).unwrap().value;

    report(
        3,
        "principal-subspace counterexample",
        (0.75..=1.25).contains(&mi_full) && mi_pca <= 0.05,
        &format!("full MI {mi_full:.4} (want [0.75, 1.25]), PCA(1) MI {mi_pca:.4} (limit 0.05)"),
    );
}

/// Two orthonormal 16-vectors via Gram-Schmidt; rows of the returned 2x16.
fn random_orthonormal_pair(rng: &mut Rng) -> Mat {
    let mut u: Vec<f64> = (0..16).map(|_| rng.normal()).collect();
    let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= nu);
    let mut w: Vec<f64> = (0..16).map(|_| rng.normal()).collect();
    let dot: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
    w.iter_mut().zip(&u).for_each(|(v, &ui)| *v -= dot * ui);
    let nw = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= nw);
    Mat::from_rows(&[u, w]).unwrap()
}

#[test]
fn criterion_4_orthogonal_embedding_invariance() {
    let diffs: Vec<f64> = (0..5)
        .map(|seed| {
            let spec = GaussianPairSpec {
                n_prime: 2,
                m_prime: 2,
                kappa: 1.0,
                seed: 300 + seed,
            };
            let (xi, eta) = sample_pair(&spec, 5000).unwrap();
            let mi_raw = mi_continuous(&xi, &eta, &wkl()).unwrap().value;

            let mut rng = Rng::new(700 + seed);
            let qx = random_orthonormal_pair(&mut rng);
            let qy = random_orthonormal_pair(&mut rng);
            let ex = xi.matmul(&qx).unwrap(); // N x 16
            let ey = eta.matmul(&qy).unwrap();
            let cx = pca_encode(&pca_fit(&ex, 2).unwrap(), &ex).unwrap();
            let cy = pca_encode(&pca_fit(&ey, 2).unwrap(), &ey).unwrap();
            let mi_embedded = mi_continuous(&cx, &cy, &wkl()).unwrap().value;
            (mi_embedded - mi_raw).abs()
        })
        .collect();
    let med = median(diffs);
    report(
        4,
        "orthogonal embedding invariance",
        med <= 0.1,
        &format!("median |MI shift| {med:.4} nats over 5 seeds (limit 0.1)"),
    );
}

#[test]
fn criterion_5_bound_chain_monte_carlo() {
    let spec = ChainSpec {
        n_constructions: 20,
        n_samples: 4000,
        estimator: wkl(),
        seed: 7,
    };
    let rep = verify_chain_monte_carlo(&spec).unwrap();
    report(
        5,
        "bound chain Monte Carlo",
        rep.violation_rate <= 0.1 && rep.independence_violation_rate <= 0.1,
        &format!(
            "within-bounds rate {:.2}, independence-equality rate {:.2} (both need >= 0.90)",
            1.0 - rep.violation_rate,
            1.0 - rep.independence_violation_rate
        ),
    );
}

fn check_digamma() -> Result<(), String> {
    if (digamma(1.0).unwrap() + EULER_GAMMA).abs() > 1e-10 {
        return Err("digamma(1) != -gamma".into());
    }
    for &x in &[0.3, 0.5, 1.0, 1.7, 3.2, 7.9, 25.0] {
        let gap = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
        if gap.abs() > 1e-10 {
            return Err(format!("recurrence residual {gap:e} at x={x}"));
        }
    }
    Ok(())
}

fn check_ball_volumes() -> Result<(), String> {
    let cases = [
        (1, 2.0),
        (2, std::f64::consts::PI),
        (3, 4.0 * std::f64::consts::PI / 3.0),
    ];
    for (n, want) in cases {
        let got = unit_ball_volume(n).unwrap();
        if (got - want).abs() > 1e-12 * want {
            return Err(format!("V_{n} = {got}, want {want}"));
        }
    }
    Ok(())
}

/// Midpoint quadrature of the 1-d kernel self-convolution integral.
fn kernel_overlap_quadrature(delta: f64, b: f64) -> f64 {
    let steps = 400_000usize;
    let lo = -12.0 * b + delta.min(0.0);
    let hi = 12.0 * b + delta.max(0.0);
    let h = (hi - lo) / steps as f64;
    let norm = 1.0 / (b * (2.0 * std::f64::consts::PI).sqrt());
    (0..steps)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * h;
            let k1 = norm * (-(x * x) / (2.0 * b * b)).exp();
            let d = x - delta;
            let k2 = norm * (-(d * d) / (2.0 * b * b)).exp();
            k1 * k2 * h
        })
        .sum()
}

fn check_kernel_overlap() -> Result<(), String> {
    for &(delta, b) in &[(0.0, 1.0), (0.9, 0.7), (2.5, 1.3)] {
        let want = kernel_overlap_quadrature(delta, b);
        let got = j_b(delta * delta, 1, b);
        if ((got - want) / want).abs() > 1e-6 {
            return Err(format!("J_b({delta}, {b}): {got} vs quadrature {want}"));
        }
    }
    // Separability in 2-d: the overlap factorizes per coordinate.
    let (dx, dy, b) = (0.9, 0.4, 0.8);
    let want = kernel_overlap_quadrature(dx, b) * kernel_overlap_quadrature(dy, b);
    let got = j_b(dx * dx + dy * dy, 2, b);
    if ((got - want) / want).abs() > 1e-6 {
        return Err(format!("2-d J_b: {got} vs quadrature product {want}"));
    }
    Ok(())
}

fn check_kd_tree_vs_brute() -> Result<(), String> {
    let mut rng = Rng::new(909);
    for case in 0..50 {
        let n = 10 + rng.below(50);
        let d = 1 + rng.below(5);
        let k = 1 + rng.below(5.min(n - 1));
        let mut data = Mat::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                data.set(i, j, rng.normal());
            }
        }
        let tree = NeighborIndex::build(&data).unwrap();
        for q in 0..n {
            let fast = tree.knn_excluding_self(q, k).unwrap();
            let slow = brute_force_knn(&data, q, k).unwrap();
            if fast != slow {
                return Err(format!("case {case}: query {q} disagrees (n={n}, d={d}, k={k})"));
            }
        }
    }
    Ok(())
}

fn check_wkl_weight_constraints() -> Result<(), String> {
    let ratio = |j: usize, l: usize, n: usize| {
        (ln_gamma(j as f64 + 2.0 * l as f64 / n as f64) - ln_gamma(j as f64)).exp()
    };
    for k in 1..=8 {
        for n in 1..=10 {
            let w = solve_wkl_weights(k, n).unwrap();
            if w.fallback {
                continue;
            }
            let sum: f64 = w.w.iter().sum();
            if (sum - 1.0).abs() > 1e-8 {
                return Err(format!("k={k} n={n}: weights sum to {sum}"));
            }
            let support = support_set(k, n);
            for (j, &wj) in w.w.iter().enumerate() {
                if wj != 0.0 && !support.contains(&(j + 1)) {
                    return Err(format!("k={k} n={n}: weight off support at {}", j + 1));
                }
            }
            for l in 1..=(n / 4) {
                let resid: f64 = w
                    .w
                    .iter()
                    .enumerate()
                    .map(|(j, &wj)| wj * ratio(j + 1, l, n))
                    .sum();
                if resid.abs() > 1e-8 {
                    return Err(format!("k={k} n={n}: moment residual {resid:e} at l={l}"));
                }
            }
        }
    }
    Ok(())
}

fn check_autoencoder_gradients() -> Result<(), String> {
    let mut rng = Rng::new(55);
    let net_rng = &mut rng.child(0);
    let mut net = DenseNet::new(
        &[3, 5, 2, 5, 3],
        &[
            Activation::LeakyRelu(0.2),
            Activation::Tanh,
            Activation::LeakyRelu(0.2),
            Activation::Identity,
        ],
        net_rng,
    );
    let mut x = Mat::zeros(4, 3);
    for i in 0..4 {
        for j in 0..3 {
            x.set(i, j, rng.normal());
        }
    }

    let eval = |net: &DenseNet| {
        let out = net.forward(&x);
        loss_and_grad(&out, Target::Dense(&x), Loss::Mae).0
    };
    let trace = net.forward_trace(&x, None);
    let (_, d_out) = loss_and_grad(trace.outputs.last().unwrap(), Target::Dense(&x), Loss::Mae);
    let analytic = grads_flat(&net.backward(&x, &trace, &d_out));

    let mut params = net.params_flat();
    let h = 1e-5;
    for p in 0..params.len() {
        let orig = params[p];
        params[p] = orig + h;
        net.set_params_flat(&params);
        let up = eval(&net);
        params[p] = orig - h;
        net.set_params_flat(&params);
        let down = eval(&net);
        params[p] = orig;
        net.set_params_flat(&params);
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[p].abs().max(1.0);
        if ((analytic[p] - numeric) / scale).abs() > 1e-5 {
            return Err(format!(
                "param {p}: analytic {} vs numeric {numeric}",
                analytic[p]
            ));
        }
    }
    Ok(())
}

#[test]
fn criterion_6_estimator_micro_oracles() {
    let checks: [(&str, Result<(), String>); 6] = [
        ("digamma recurrence", check_digamma()),
        ("unit-ball volumes", check_ball_volumes()),
        ("kernel overlap vs quadrature", check_kernel_overlap()),
        ("kd-tree vs brute force", check_kd_tree_vs_brute()),
        ("neighbor-weight constraints", check_wkl_weight_constraints()),
        ("autoencoder gradients", check_autoencoder_gradients()),
    ];
    let failures: Vec<String> = checks
        .into_iter()
        .filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}")))
        .collect();
    report(
        6,
        "estimator micro-oracles",
        failures.is_empty(),
        &if failures.is_empty() {
            "6/6 oracle groups hold".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_7_entropy_closed_forms() {
    const H_STD_NORMAL: f64 = 1.4189385332046727; // 0.5 ln(2 pi e)
    let n = 10_000;
    let mut rng = Rng::new(77);
    let gauss = Mat::from_rows(&(0..n).map(|_| vec![rng.normal()]).collect::<Vec<_>>()).unwrap();
    let unif = Mat::from_rows(&(0..n).map(|_| vec![rng.uniform()]).collect::<Vec<_>>()).unwrap();

    let mut detail = String::new();
    let mut ok = true;
    for kind in EstimatorKind::ALL {
        let config = EstimatorConfig::of_kind(kind);
        let hg = estimate_entropy(&gauss, &config).unwrap().value;
        let hu = estimate_entropy(&unif, &config).unwrap().value;
        ok &= (hg - H_STD_NORMAL).abs() <= 0.15 && hu.abs() <= 0.15;
        detail.push_str(&format!("{kind}: N(0,1) {hg:.3}, U[0,1] {hu:.3}; "));
    }

    let mut g4 = Mat::zeros(n, 4);
    for i in 0..n {
        for j in 0..4 {
            g4.set(i, j, rng.normal());
        }
    }
    let h4 = estimate_entropy(&g4, &wkl()).unwrap().value;
    ok &= (h4 - 4.0 * H_STD_NORMAL).abs() <= 0.15;
    detail.push_str(&format!("wkl N(0,I4) {h4:.3} (want {:.3})", 4.0 * H_STD_NORMAL));

    report(7, "entropy closed forms", ok, &detail);
}

#[test]
fn criterion_8_information_plane_run() {
    let net_spec = NetSpec {
        input_dim: 12,
        hidden: vec![12, 12, 12, 12],
        n_classes: 10,
        noise_to_signal: 1e-3,
    };
    let plane_config = |seed: u64| InfoPlaneConfig {
        train: TrainClassifierConfig {
            epochs: 30,
            seed,
            ..TrainClassifierConfig::default()
        },
        latent_dim: 4,
        estimator: wkl(),
    };

    let mut ok = true;
    let mut detail = String::new();
    let mut growths = Vec::new();
    for seed in 0..5u64 {
        let data = gaussian_blobs(500, 10, 12, 11);
        let records = run_info_plane(&data, &net_spec, &plane_config(seed)).unwrap();

        // (a) label-side MI cannot exceed the label entropy.
        let cap = 10f64.ln();
        for r in &records {
            if r.mi_l_y.value > cap + r.mi_l_y.ci_half_width() {
                ok = false;
                detail.push_str(&format!(
                    "seed {seed}: layer {} epoch {} label MI {:.3} over ln 10; ",
                    r.layer, r.epoch, r.mi_l_y.value
                ));
            }
        }

        let last_layer = net_spec.layer_count();
        let final_rec = records
            .iter()
            .find(|r| r.layer == last_layer && r.epoch == 29)
            .unwrap();
        let first_rec = records
            .iter()
            .find(|r| r.layer == last_layer && r.epoch == 0)
            .unwrap();
        growths.push(final_rec.mi_l_y.value - first_rec.mi_l_y.value);

        if seed == 0 {
            // (b) final-layer label MI dominates the confusion-matrix MI of
            // hard predictions (within estimator noise). The epoch-29 record
            // measures the net after 29 training epochs.
            let mut train = plane_config(seed).train;
            train.epochs = 29;
            let (net, _) = train_classifier(&data, &net_spec, &train).unwrap();
            let preds = net.predict(&data.features);
            let cmi = confusion_matrix_mi(&preds, &data.labels).unwrap();
            let floor = cmi - 2.0 * final_rec.mi_l_y.ci_half_width();
            if final_rec.mi_l_y.value < floor {
                ok = false;
            }
            detail.push_str(&format!(
                "final-layer label MI {:.3} vs confusion MI {:.3} (floor {:.3}); ",
                final_rec.mi_l_y.value, cmi, floor
            ));

            // (d) bitwise reproducibility under a fixed seed.
            let rerun = run_info_plane(&data, &net_spec, &plane_config(seed)).unwrap();
            let same = records.len() == rerun.len()
                && records.iter().zip(&rerun).all(|(a, b)| {
                    a.mi_x_l.value.to_bits() == b.mi_x_l.value.to_bits()
                        && a.mi_l_y.value.to_bits() == b.mi_l_y.value.to_bits()
                        && a.loss.to_bits() == b.loss.to_bits()
                });
            if !same {
                ok = false;
                detail.push_str("rerun not bitwise identical; ");
            }
        }
    }
    let med_growth = median(growths);
    if med_growth <= 0.0 {
        ok = false;
    }
    detail.push_str(&format!("median final-layer label-MI growth {med_growth:.3} nats"));
    report(8, "information-plane run", ok, &detail);
}
