//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them inline).

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ilr::dataset::{CensorMode, CollapseStrategy, Dataset};
use ilr::envelope::{
    fit_imprecise, fit_imprecise_bruteforce, predict_interval, BruteForceLimits,
    ImpreciseOptions, ModelSet,
};
use ilr::eval::{
    auc, classify, roc, roc3d, roc_band, ternary_confusion, uncertainty_stats, Decision,
    DecisionRule, TernaryConfusion,
};
use ilr::interval::{Interval, UncertainLabel};
use ilr::logistic::{fit_mle, nll, nll_gradient, Coefficients, FitOptions};

fn report<F: FnOnce() + UnwindSafe>(name: &str, body: F) {
    match catch_unwind(body) {
        Ok(()) => println!("{name}: PASS"),
        Err(e) => {
            println!("{name}: FAIL");
            resume_unwind(e);
        }
    }
}

fn grid21(lo: f64, hi: f64) -> Vec<f64> {
    (0..21).map(|i| lo + (hi - lo) * i as f64 / 20.0).collect()
}

fn envelope_on_grid(ms: &ModelSet, grid: &[f64]) -> Vec<Interval> {
    grid.iter()
        .map(|&x| predict_interval(ms, &[Interval::point(x)]).unwrap())
        .collect()
}

fn curve_on_grid(beta: &Coefficients, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&x| beta.predict_proba(&[x])).collect()
}

fn curve_inside(envelope: &[Interval], curve: &[f64], tol: f64) -> bool {
    envelope
        .iter()
        .zip(curve)
        .all(|(iv, &p)| iv.lo() - tol <= p && p <= iv.hi() + tol)
}

#[test]
fn check_01_statistics_from_published_counts() {
    report("check 01 statistics from published counts", || {
        let with_abstentions = TernaryConfusion::new(26, 2, 10, 46, 10, 6);
        let st = uncertainty_stats(&with_abstentions);
        assert!((st.s_prime.unwrap() - 0.722).abs() <= 0.001);
        assert!((st.t_prime.unwrap() - 0.958).abs() <= 0.001);
        assert!((st.sigma.unwrap() - 0.217).abs() <= 0.001);
        assert!((st.tau.unwrap() - 0.111).abs() <= 0.001);

        let classical = TernaryConfusion::new(36, 5, 10, 49, 0, 0);
        let st = uncertainty_stats(&classical);
        assert!((st.s.unwrap() - 0.783).abs() <= 0.001);
        assert!((st.t.unwrap() - 0.907).abs() <= 0.001);
    });
}

#[test]
fn check_02_gradient_matches_finite_differences() {
    report("check 02 gradient matches finite differences", || {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for _ in 0..20 {
            let m = rng.gen_range(1..=4usize);
            let n = rng.gen_range(10..=100usize);
            let xs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect();
            let ys: Vec<f64> = (0..n).map(|_| f64::from(rng.gen::<bool>())).collect();
            let beta_vals: Vec<f64> = (0..=m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let beta = Coefficients::new(beta_vals.clone()).unwrap();
            let grad = nll_gradient(&beta, &xs, &ys).unwrap();
            for j in 0..=m {
                let h = 1e-5 * (1.0 + beta_vals[j].abs());
                let mut up = beta_vals.clone();
                up[j] += h;
                let mut down = beta_vals.clone();
                down[j] -= h;
                let fd = (nll(&Coefficients::new(up).unwrap(), &xs, &ys).unwrap()
                    - nll(&Coefficients::new(down).unwrap(), &xs, &ys).unwrap())
                    / (2.0 * h);
                let rel = (grad[j] - fd).abs() / fd.abs().max(1e-6);
                assert!(
                    rel < 1e-5,
                    "component {j}: analytic {} vs fd {fd} (rel {rel})",
                    grad[j]
                );
            }
        }
    });
}

#[test]
fn check_03_analytic_mle_cases() {
    report("check 03 analytic mle cases", || {
        // Intercept-only: the MLE is logit of the label mean.
        let data = Dataset::new(
            vec![],
            [true, true, true, false]
                .iter()
                .map(|&y| ilr::dataset::DataPoint {
                    features: vec![],
                    label: UncertainLabel::Known(y),
                })
                .collect(),
        )
        .unwrap();
        let model = fit_mle(&data, &FitOptions::default()).unwrap();
        assert!((model.coefficients.intercept() - 3.0f64.ln()).abs() < 1e-6);

        // Fully symmetric labels: all coefficients vanish.
        let data = Dataset::from_precise(
            &[vec![-1.0], vec![-1.0], vec![1.0], vec![1.0]],
            &[false, true, false, true],
        )
        .unwrap();
        let model = fit_mle(&data, &FitOptions::default()).unwrap();
        for b in model.coefficients.as_slice() {
            assert!(b.abs() < 1e-6, "expected zero coefficient, got {b}");
        }

        // Complete separation is detected and reported.
        let data =
            Dataset::from_precise(&[vec![-1.0], vec![1.0]], &[false, true]).unwrap();
        let model = fit_mle(&data, &FitOptions::default()).unwrap();
        assert!(model.report.separation_detected);
        assert!(model.coefficients.as_slice().iter().all(|b| b.is_finite()));
    });
}

#[test]
fn check_04_label_enumeration_matches_bruteforce() {
    report("check 04 label enumeration matches brute force", || {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let grid = grid21(0.0, 10.0);
        for round in 0..20 {
            let n = rng.gen_range(10..=30usize);
            let q = rng.gen_range(1..=6usize);
            let truth =
                Coefficients::new(vec![rng.gen_range(-6.0..-4.0), rng.gen_range(0.7..1.3)])
                    .unwrap();
            let mut data =
                Dataset::synthesize(n, rng.gen(), &truth, Interval::new(0.0, 10.0).unwrap());
            let mut rows: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                rows.swap(i, rng.gen_range(0..=i));
            }
            data = data.censor_labels(&rows[..q]).unwrap();

            let heur = fit_imprecise(&data, &ImpreciseOptions::default()).unwrap();
            let brute =
                fit_imprecise_bruteforce(&data, &BruteForceLimits::default()).unwrap();

            let env_h = envelope_on_grid(&heur, &grid);
            let env_b = envelope_on_grid(&brute, &grid);
            for (h, b) in env_h.iter().zip(&env_b) {
                assert!(
                    (h.lo() - b.lo()).abs() <= 1e-3 && (h.hi() - b.hi()).abs() <= 1e-3,
                    "round {round}: envelope [{}, {}] vs brute [{}, {}]",
                    h.lo(),
                    h.hi(),
                    b.lo(),
                    b.hi()
                );
            }
            for (h, b) in heur
                .coefficient_bounds()
                .iter()
                .zip(brute.coefficient_bounds())
            {
                assert!((h.lo() - b.lo()).abs() <= 1e-3 * b.lo().abs().max(1.0));
                assert!((h.hi() - b.hi()).abs() <= 1e-3 * b.hi().abs().max(1.0));
            }
        }
    });
}

#[test]
fn check_05_envelope_contains_corner_oracle() {
    report("check 05 envelope contains corner oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        let grid = grid21(0.0, 10.0);
        for round in 0..20 {
            let n = rng.gen_range(10..=14usize);
            let cells = rng.gen_range(1..=8usize);
            let truth =
                Coefficients::new(vec![rng.gen_range(-6.0..-4.0), rng.gen_range(0.7..1.3)])
                    .unwrap();
            let precise =
                Dataset::synthesize(n, rng.gen(), &truth, Interval::new(0.5, 9.5).unwrap());
            let mut points = precise.points().to_vec();
            let mut rows: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                rows.swap(i, rng.gen_range(0..=i));
            }
            for &row in &rows[..cells] {
                let x = points[row].features[0].lo();
                let w = rng.gen_range(0.1..0.5);
                points[row].features[0] = Interval::new(x - w, x + w).unwrap();
            }
            let data = Dataset::new(precise.feature_names().to_vec(), points).unwrap();

            let heur = fit_imprecise(&data, &ImpreciseOptions::default()).unwrap();
            let brute =
                fit_imprecise_bruteforce(&data, &BruteForceLimits::default()).unwrap();

            let env_h = envelope_on_grid(&heur, &grid);
            let env_b = envelope_on_grid(&brute, &grid);
            for (i, (h, b)) in env_h.iter().zip(&env_b).enumerate() {
                assert!(
                    h.lo() <= b.lo() + 1e-6 && b.hi() <= h.hi() + 1e-6,
                    "round {round} grid {i}: [{}, {}] does not contain [{}, {}]",
                    h.lo(),
                    h.hi(),
                    b.lo(),
                    b.hi()
                );
            }
        }
    });
}

#[test]
fn check_06_precise_data_collapses_to_point_fit() {
    report("check 06 precise data collapses to point fit", || {
        let truth = Coefficients::new(vec![-5.0, 1.0]).unwrap();
        let data = Dataset::synthesize(40, 6, &truth, Interval::new(0.0, 10.0).unwrap());
        let point = fit_mle(&data, &FitOptions::default()).unwrap();
        let set = fit_imprecise(&data, &ImpreciseOptions::default()).unwrap();
        for member in set.models() {
            for (a, b) in member
                .coefficients
                .as_slice()
                .iter()
                .zip(point.coefficients.as_slice())
            {
                assert!((a - b).abs() < 1e-6, "member {a} vs precise {b}");
            }
        }
        for x in grid21(0.0, 10.0) {
            let p = predict_interval(&set, &[Interval::point(x)]).unwrap();
            assert!(p.width() < 1e-9, "width {} at x = {x}", p.width());
        }
    });
}

#[test]
fn check_07_envelope_contains_interior_refits() {
    report("check 07 envelope contains interior refits", || {
        let truth = Coefficients::new(vec![-5.0, 1.0]).unwrap();
        let seed = 31;
        let precise = Dataset::synthesize(50, seed, &truth, Interval::new(0.0, 10.0).unwrap());
        let censored = precise
            .intervalize(CensorMode::Symmetric, 0.375, seed + 1)
            .unwrap();
        let opts = ImpreciseOptions {
            include_corners: false,
            ..ImpreciseOptions::default()
        };
        let set = fit_imprecise(&censored, &opts).unwrap();
        let grid = grid21(0.0, 10.0);
        let envelope = envelope_on_grid(&set, &grid);

        // Random interior completions must (almost always) refit inside.
        let mut rng = ChaCha8Rng::seed_from_u64(707);
        let labels: Vec<bool> = censored
            .points()
            .iter()
            .map(|p| matches!(p.label, UncertainLabel::Known(true)))
            .collect();
        let mut violations = 0;
        for _ in 0..200 {
            let xs: Vec<Vec<f64>> = censored
                .points()
                .iter()
                .map(|p| {
                    let cell = p.features[0];
                    vec![cell.lo() + rng.gen::<f64>() * cell.width()]
                })
                .collect();
            let refit = fit_mle(
                &Dataset::from_precise(&xs, &labels).unwrap(),
                &FitOptions::default(),
            )
            .unwrap();
            let curve = curve_on_grid(&refit.coefficients, &grid);
            if !curve_inside(&envelope, &curve, 1e-6) {
                violations += 1;
            }
        }
        let rate = violations as f64 / 200.0;
        println!("check 07 interior refit violation rate: {:.1}% ({violations} of 200)", rate * 100.0);
        assert!(rate <= 0.05, "violation rate {rate} above 5%");

        // The midpoint-collapse model stays inside the envelope.
        let midpoint = fit_mle(
            &censored.collapse(CollapseStrategy::Midpoint).unwrap(),
            &FitOptions::default(),
        )
        .unwrap();
        assert!(curve_inside(
            &envelope,
            &curve_on_grid(&midpoint.coefficients, &grid),
            1e-6
        ));

        // Biased censorings: each envelope must cover the model fitted on
        // the uncensored data, which every censored cell still contains.
        let true_fit = fit_mle(&precise, &FitOptions::default()).unwrap();
        let true_curve = curve_on_grid(&true_fit.coefficients, &grid);
        for (i, mode) in [
            CensorMode::LeftBiased,
            CensorMode::RightBiased,
            CensorMode::SplitBiased { split: 5.0 },
        ]
        .into_iter()
        .enumerate()
        {
            let biased = precise
                .intervalize(mode, 0.375, seed + 2 + i as u64)
                .unwrap();
            let biased_set = fit_imprecise(&biased, &opts).unwrap();
            let biased_env = envelope_on_grid(&biased_set, &grid);
            assert!(
                curve_inside(&biased_env, &true_curve, 1e-6),
                "true-data model escaped the envelope for {mode:?}"
            );
        }
    });
}

#[test]
fn check_08_auc_equals_concordance() {
    report("check 08 auc equals concordance", || {
        fn concordance(scores: &[f64], truth: &[bool]) -> f64 {
            let mut total = 0.0;
            let mut pairs = 0.0;
            for (sp, _) in scores.iter().zip(truth).filter(|(_, &y)| y) {
                for (sn, _) in scores.iter().zip(truth).filter(|(_, &y)| !y) {
                    pairs += 1.0;
                    total += if sp > sn {
                        1.0
                    } else if sp == sn {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
            total / pairs
        }

        let mut rng = ChaCha8Rng::seed_from_u64(808);
        for round in 0..50 {
            let n = rng.gen_range(4..=200usize);
            // Half the rounds quantize scores to force ties (including the
            // exact endpoints 0 and 1).
            let quantize = round % 2 == 0;
            let mut scores = Vec::with_capacity(n);
            let mut truth = Vec::with_capacity(n);
            for _ in 0..n {
                let s: f64 = rng.gen();
                scores.push(if quantize {
                    (s * 20.0).round() / 20.0
                } else {
                    s
                });
                truth.push(rng.gen::<bool>());
            }
            truth[0] = true;
            truth[1] = false;
            let curve = roc(&scores, &truth).unwrap();
            let diff = (auc(&curve) - concordance(&scores, &truth)).abs();
            assert!(diff <= 1e-12, "round {round}: diff {diff}");
        }

        let scores = [0.9, 0.85, 0.8, 0.3, 0.2, 0.1];
        let truth = [true, true, true, false, false, false];
        assert_eq!(auc(&roc(&scores, &truth).unwrap()), 1.0);
        let inverted: Vec<bool> = truth.iter().map(|y| !y).collect();
        let a = auc(&roc(&scores, &truth).unwrap());
        let b = auc(&roc(&scores, &inverted).unwrap());
        assert!((b - (1.0 - a)).abs() <= 1e-12);
    });
}

#[test]
fn check_09_interval_auc_and_abstention_coherence() {
    report("check 09 interval auc and abstention coherence", || {
        let truth = Coefficients::new(vec![-5.0, 1.0]).unwrap();
        let seed = 31;
        let precise = Dataset::synthesize(50, seed, &truth, Interval::new(0.0, 10.0).unwrap());
        let censored = precise
            .intervalize(CensorMode::Symmetric, 0.375, seed + 1)
            .unwrap();
        let opts = ImpreciseOptions {
            include_corners: false,
            ..ImpreciseOptions::default()
        };
        let set = fit_imprecise(&censored, &opts).unwrap();

        // Interval AUC contains every member's AUC.
        let band = roc_band(&set, &precise).unwrap();
        let xs = precise.precise_features().unwrap();
        let ys: Vec<bool> = precise
            .known_labels()
            .unwrap()
            .iter()
            .map(|&y| y == 1.0)
            .collect();
        for member in set.models() {
            let scores: Vec<f64> = xs
                .iter()
                .map(|x| member.coefficients.predict_proba(x))
                .collect();
            let a = auc(&roc(&scores, &ys).unwrap());
            assert!(
                band.auc.lo() - 1e-12 <= a && a <= band.auc.hi() + 1e-12,
                "member AUC {a} outside [{}, {}]",
                band.auc.lo(),
                band.auc.hi()
            );
        }

        // ... and the midpoint-collapse model's AUC.
        let midpoint = fit_mle(
            &censored.collapse(CollapseStrategy::Midpoint).unwrap(),
            &FitOptions::default(),
        )
        .unwrap();
        let mid_scores: Vec<f64> = xs
            .iter()
            .map(|x| midpoint.coefficients.predict_proba(x))
            .collect();
        let mid_auc = auc(&roc(&mid_scores, &ys).unwrap());
        assert!(band.auc.lo() - 1e-12 <= mid_auc && mid_auc <= band.auc.hi() + 1e-12);

        // Thresholds outside every prediction interval abstain on nothing.
        let predictions: Vec<Interval> = precise
            .points()
            .iter()
            .map(|p| predict_interval(&set, &p.features).unwrap())
            .collect();
        let labels: Vec<UncertainLabel> = precise.points().iter().map(|p| p.label).collect();
        let p_min = predictions.iter().map(|p| p.lo()).fold(f64::INFINITY, f64::min);
        let p_max = predictions
            .iter()
            .map(|p| p.hi())
            .fold(f64::NEG_INFINITY, f64::max);
        for threshold in [p_min * 0.5, p_max + (1.0 - p_max) * 0.5] {
            let decisions: Vec<Decision> = predictions
                .iter()
                .map(|&p| classify(p, threshold, DecisionRule::Abstain).unwrap())
                .collect();
            let stats =
                uncertainty_stats(&ternary_confusion(&decisions, &labels).unwrap());
            assert_eq!(stats.sigma, Some(0.0), "sigma at threshold {threshold}");
            assert_eq!(stats.tau, Some(0.0), "tau at threshold {threshold}");
        }
        // Same property on the 3-D sweep wherever its grid leaves the
        // prediction range.
        for point in roc3d(&set, &precise).unwrap() {
            if point.threshold < p_min || point.threshold > p_max {
                assert_eq!(point.sigma, Some(0.0));
                assert_eq!(point.tau, Some(0.0));
            }
        }
    });
}

#[test]
fn check_10_cli_end_to_end_determinism() {
    report("check 10 cli end-to-end determinism", || {
        let bin = env!("CARGO_BIN_EXE_ilr");
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();

        let run = |cmd: &[String]| {
            let status = Command::new(bin)
                .args(cmd)
                .status()
                .expect("failed to run binary");
            assert!(status.success(), "command {cmd:?} failed: {status}");
        };
        let pipeline = |tag: &str, seed: u64| -> Vec<std::path::PathBuf> {
            let base = root.join(tag);
            std::fs::create_dir_all(&base).unwrap();
            let train = base.join("train.csv");
            let test = base.join("test.csv");
            let model = base.join("model.json");
            let rep = base.join("report.json");
            let plots = base.join("plots");
            run(&[
                "synth".into(),
                "--n".into(),
                "30".into(),
                "--seed".into(),
                seed.to_string(),
                "--truth-beta".into(),
                "-5,1".into(),
                "--intervalize".into(),
                "symmetric".into(),
                "--epsilon".into(),
                "0.375".into(),
                "--out".into(),
                train.display().to_string(),
            ]);
            run(&[
                "synth".into(),
                "--n".into(),
                "25".into(),
                "--seed".into(),
                (seed + 60).to_string(),
                "--truth-beta".into(),
                "-5,1".into(),
                "--out".into(),
                test.display().to_string(),
            ]);
            run(&[
                "fit".into(),
                "--data".into(),
                train.display().to_string(),
                "--mode".into(),
                "imprecise".into(),
                "--seed".into(),
                seed.to_string(),
                "--out".into(),
                model.display().to_string(),
            ]);
            run(&[
                "eval".into(),
                "--model".into(),
                model.display().to_string(),
                "--test".into(),
                test.display().to_string(),
                "--threshold".into(),
                "0.5".into(),
                "--rule".into(),
                "abstain".into(),
                "--seed".into(),
                seed.to_string(),
                "--out".into(),
                rep.display().to_string(),
                "--plot-data".into(),
                plots.display().to_string(),
            ]);
            vec![
                train,
                test,
                model,
                rep,
                plots.join("roc.csv"),
                plots.join("roc_band.csv"),
                plots.join("roc3d.csv"),
                plots.join("scatter.csv"),
            ]
        };

        let first = pipeline("a", 5);
        let second = pipeline("b", 5);
        for (f, s) in first.iter().zip(&second) {
            let fb = std::fs::read(f).unwrap();
            let sb = std::fs::read(s).unwrap();
            assert_eq!(fb, sb, "{} differs between identical runs", f.display());
        }

        // A different seed must change the dataset digest.
        let third = pipeline("c", 6);
        let schema = ilr::dataset::CsvSchema::default();
        let d5 =
            Dataset::load_csv(std::fs::File::open(&first[0]).unwrap(), &schema).unwrap();
        let d6 =
            Dataset::load_csv(std::fs::File::open(&third[0]).unwrap(), &schema).unwrap();
        assert_ne!(d5.digest(), d6.digest());
    });
}
