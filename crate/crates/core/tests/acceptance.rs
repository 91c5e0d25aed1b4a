//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use credal_aode::cli::render_json;
use credal_aode::credal::{CredalEnsemble, CredalVariant};
use credal_aode::dataset::{
    load_csv, stratified_folds, ColumnKind, Dataset, Discretizer, Imputer, RawTable, Schema,
};
use credal_aode::ensemble::{
    robust_exp, DeterminateKind, Ensemble, EnsembleScores, EnsembleSettings,
};
use credal_aode::eval::{
    cross_validate, utility, wilcoxon_signed_rank, ClassifierKind, EvalReport, Utility,
};
use credal_aode::optimize::{
    minimize_ratio, ratio_min_exceeds, solve_fractional, FractionalLp, RatioProgram,
};
use credal_aode::spode::{conditional_log_likelihood, fit_null};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use common::*;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Containment of the determinate argmax in credal predictions.
#[derive(Default)]
struct Containment {
    checked: usize,
    singletons: usize,
    violations: usize,
    singleton_mismatches: usize,
    /// Misses where the credal and determinate feasible model sets differ.
    explained: usize,
}

impl Containment {
    fn check(&mut self, set: &[usize], posterior: &[f64], feasible_differs: bool) {
        self.checked += 1;
        let best = argmax(posterior);
        if set.len() == 1 {
            self.singletons += 1;
            if set[0] != best && !feasible_differs {
                self.singleton_mismatches += 1;
            }
        }
        if !set.contains(&best) {
            if feasible_differs {
                self.explained += 1;
                eprintln!(
                    "  note: argmax {best} outside {set:?} with differing feasible model sets"
                );
            } else {
                self.violations += 1;
            }
        }
    }
}

/// Whether COMP-AODE and COMP-AODE* use different SPODEs.
fn comp_feasible_differs(ensemble: &Ensemble, credal: &CredalEnsemble) -> bool {
    let determinate: Vec<usize> = (0..ensemble.k())
        .filter(|&j| ensemble.raw_compression()[j] > 0.0)
        .collect();
    determinate != credal.comp().models()
}

fn check_instance(
    containment: &mut Containment,
    ensemble: &Ensemble,
    credal: &CredalEnsemble,
    posteriors: &[Vec<f64>],
    comp_differs: bool,
) {
    for variant in [CredalVariant::BmaStar, CredalVariant::CompStar] {
        let p = credal.predict_from(variant, posteriors).unwrap();
        let determinate = ensemble.combine(variant.counterpart(), posteriors);
        let differs = variant == CredalVariant::CompStar && comp_differs;
        containment.check(&p.classes, &determinate, differs);
    }
}

fn fractional_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..1000 {
        let k = rng.gen_range(1..=8);
        let lower = 0.01;
        let total = 1.0 - rng.gen_range(0..=3) as f64 * lower;
        let lp = if i % 2 == 0 {
            // Mixture-style: posterior times relative likelihood.
            let lik: Vec<f64> = (0..k)
                .map(|_| (-rng.gen_range(0.0..9.2f64)).exp())
                .collect();
            FractionalLp {
                numerator: lik.iter().map(|l| l * rng.gen_range(0.01..1.0)).collect(),
                numerator_constant: 0.0,
                denominator: lik.iter().map(|l| l * rng.gen_range(0.01..1.0)).collect(),
                denominator_constant: 0.0,
                lower_bound: lower,
                total,
            }
        } else {
            FractionalLp {
                numerator: (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                numerator_constant: rng.gen_range(-0.5..0.5),
                denominator: (0..k).map(|_| rng.gen_range(0.05..1.0)).collect(),
                denominator_constant: rng.gen_range(0.0..0.5),
                lower_bound: lower,
                total,
            }
        };
        let oracle = vertex_min(&lp);
        match solve_fractional(&lp) {
            Ok(s) => {
                let err = (s.value - oracle).abs();
                worst = worst.max(err);
                if err > 1e-8 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        failures == 0 && elapsed < Duration::from_secs(10),
        format!(
            "1000 programs, {failures} mismatches, max |diff| {worst:.2e}, {}",
            secs(elapsed)
        ),
    )
}

fn ratio_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let eps: f64 = 0.01;
    let threshold = 1.0 + MARGIN;
    let (mut value_ok, mut decision_ok, mut dominating) = (0, 0, 0);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let kt = rng.gen_range(1..=3);
        let k = kt + rng.gen_range(0..=2);
        let n = rng.gen_range(30..=300) as f64;
        let ll0 = -n * rng.gen_range(0.3..LN_2);
        let ll: Vec<f64> = (0..kt).map(|_| ll0 * rng.gen_range(0.2..0.9)).collect();
        let alpha: Vec<f64> = (0..kt)
            .map(|_| {
                if i % 2 == 0 {
                    rng.gen_range(0.01..0.99)
                } else {
                    0.5 + rng.gen_range(-0.02..0.02)
                }
            })
            .collect();
        let beta: Vec<f64> = alpha.iter().map(|a| 1.0 - a).collect();
        let offsets: Vec<f64> = ll.iter().map(|l| eps.ln() + ll0 - l).collect();
        let a: f64 = alpha.iter().zip(&offsets).map(|(x, o)| x * o).sum();
        let b: f64 = beta.iter().zip(&offsets).map(|(x, o)| x * o).sum();
        let total = 1.0 - (k - kt + 1) as f64 * eps;

        let grid = grid_ratio_min(&alpha, &beta, a, b, eps, total);
        let rp = RatioProgram::new(alpha, beta, a, b, eps, total).unwrap();
        let sol = minimize_ratio(&rp, SEED);
        let rel = (sol.value - grid).abs() / grid.abs();
        worst = worst.max(rel);
        value_ok += usize::from(rel <= 1e-4);
        let grid_decision = grid > threshold;
        dominating += usize::from(grid_decision);
        decision_ok += usize::from(
            (sol.value > threshold) == grid_decision
                && ratio_min_exceeds(&rp, threshold, SEED) == grid_decision,
        );
    }
    let elapsed = start.elapsed();
    Outcome::new(
        value_ok == 100 && decision_ok == 100 && elapsed < Duration::from_secs(60),
        format!(
            "values {value_ok}/100 (max rel {worst:.2e}), decisions {decision_ok}/100 ({dominating} dominating), {}",
            secs(elapsed)
        ),
    )
}

fn grid_sets(containment: &mut Containment) -> Outcome {
    let start = Instant::now();
    let settings = EnsembleSettings::default();
    let (mut instances, mut bma_ok, mut comp_ok) = (0, 0, 0);
    let (mut bma_wide, mut comp_wide) = (0, 0);
    let mut ll_drift = 0.0f64;
    for d in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + d);
        let k = rng.gen_range(1..=3);
        let l = rng.gen_range(2..=4);
        let data = random_dataset(&mut rng, 60, k, l, 3);
        let train = data.subset(&(0..45).collect::<Vec<_>>());
        let test = data.subset(&(45..60).collect::<Vec<_>>());
        let ensemble = Ensemble::fit(&train, settings);
        let credal = CredalEnsemble::new(&ensemble, SEED).unwrap();
        let comp_differs = comp_feasible_differs(&ensemble, &credal);

        let train_posts: Vec<Vec<Vec<f64>>> = train
            .instances()
            .map(|(_, x)| ensemble.posteriors(x))
            .collect();
        let ll = log_likelihoods(&train_posts, train.classes());
        for (a, b) in ll.iter().zip(&ensemble.scores().spode_ll) {
            ll_drift = ll_drift.max((a - b).abs());
        }
        let null_ll: f64 = train
            .classes()
            .iter()
            .map(|&c| ensemble.null().marginal()[c].ln())
            .sum();

        for (_, x) in test.instances() {
            instances += 1;
            let posts = ensemble.posteriors(x);
            let bma = credal
                .predict_from(CredalVariant::BmaStar, &posts)
                .unwrap()
                .classes;
            let comp = credal
                .predict_from(CredalVariant::CompStar, &posts)
                .unwrap()
                .classes;
            let bma_grid = bma_grid_set(&posts, &ll, settings.epsilon, settings.prune_log_ratio);
            let comp_grid = comp_grid_set(&posts, &ll, null_ll, settings.epsilon);
            bma_ok += usize::from(bma == bma_grid);
            comp_ok += usize::from(comp == comp_grid);
            bma_wide += usize::from(bma_grid.len() > 1);
            comp_wide += usize::from(comp_grid.len() > 1);
            if bma != bma_grid || comp != comp_grid {
                eprintln!("  mismatch: dataset {d}: bma {bma:?} vs {bma_grid:?}, comp {comp:?} vs {comp_grid:?}");
            }
            check_instance(containment, &ensemble, &credal, &posts, comp_differs);
        }
    }
    Outcome::new(
        bma_ok == instances && comp_ok == instances && ll_drift < 1e-9,
        format!(
            "{instances} instances: BMA* {bma_ok} equal ({bma_wide} indeterminate), COMP* {comp_ok} equal ({comp_wide} indeterminate), {}",
            secs(start.elapsed())
        ),
    )
}

fn utility_anchors() -> Outcome {
    let checks = [
        (utility(0.5, Utility::U65), 0.65),
        (utility(0.5, Utility::U80), 0.8),
        (utility(1.0, Utility::U65), 1.0),
        (utility(1.0, Utility::U80), 1.0),
        (utility(0.0, Utility::U65), 0.0),
        (utility(0.0, Utility::U80), 0.0),
    ];
    let exact = checks.iter().filter(|(got, want)| got == want).count();
    Outcome::new(
        exact == checks.len(),
        format!("{exact}/{} anchors exact", checks.len()),
    )
}

fn degenerate_equivalences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut posterior_gap = 0.0f64;
    for _ in 0..20 {
        let k = rng.gen_range(2..=6);
        let l = rng.gen_range(2..=4);
        let ds = random_dataset(&mut rng, 200, k, l, 4);
        let fitted = Ensemble::fit(&ds, EnsembleSettings::default());
        let best = fitted
            .scores()
            .spode_ll
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let scores = EnsembleScores {
            spode_ll: vec![best; k],
            ..fitted.scores().clone()
        };
        let equal = Ensemble::from_parts(
            fitted.spodes().to_vec(),
            fitted.null().clone(),
            scores,
            EnsembleSettings::default(),
        );
        assert!(equal.comp_weights().is_some());
        for (_, x) in ds.instances() {
            let posts = equal.posteriors(x);
            let aode = equal.combine(DeterminateKind::Aode, &posts);
            for kind in [DeterminateKind::BmaAode, DeterminateKind::CompAode] {
                let other = equal.combine(kind, &posts);
                for (p, q) in aode.iter().zip(&other) {
                    posterior_gap = posterior_gap.max((p - q).abs());
                }
            }
        }
    }

    let mut exp_gap = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=20);
        let logs: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let naive: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let sum: f64 = naive.iter().sum();
        for (r, v) in robust_exp(&logs).iter().zip(&naive) {
            exp_gap = exp_gap.max((r - v / sum).abs());
        }
    }

    let n = 10_000;
    let probs = [0.5, 0.3, 0.2];
    let dist = rand::distributions::WeightedIndex::new(probs).unwrap();
    let classes: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let rows: Vec<Vec<usize>> = (0..n).map(|_| vec![rng.gen_range(0..2)]).collect();
    let ds = Dataset::new(
        vec!["x".into()],
        vec![vec!["0".into(), "1".into()]],
        vec!["a".into(), "b".into(), "c".into()],
        classes.clone(),
        rows,
    )
    .unwrap();
    let null_ll = conditional_log_likelihood(&fit_null(&ds), &ds);
    let entropy: f64 = (0..3)
        .map(|c| classes.iter().filter(|&&v| v == c).count() as f64 / n as f64)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    let ll_gap = (null_ll + n as f64 * entropy).abs();

    Outcome::new(
        posterior_gap <= 1e-12 && exp_gap <= 1e-12 && ll_gap <= 0.05,
        format!(
            "equal-likelihood posterior gap {posterior_gap:.1e}, robust vs naive exp gap {exp_gap:.1e}, |LL0 + nH| = {ll_gap:.2e}"
        ),
    )
}

struct DatasetSpec {
    name: &'static str,
    all_categorical: bool,
}

const DATASETS: [DatasetSpec; 7] = [
    DatasetSpec {
        name: "iris",
        all_categorical: false,
    },
    DatasetSpec {
        name: "wine",
        all_categorical: false,
    },
    DatasetSpec {
        name: "glass",
        all_categorical: false,
    },
    DatasetSpec {
        name: "heart-c",
        all_categorical: false,
    },
    DatasetSpec {
        name: "breast-w",
        all_categorical: false,
    },
    DatasetSpec {
        name: "pima",
        all_categorical: false,
    },
    DatasetSpec {
        name: "zoo",
        all_categorical: true,
    },
];

fn load(spec: &DatasetSpec) -> RawTable {
    let path = data_dir().join(format!("{}.csv", spec.name));
    let mut schema = Schema::new();
    if spec.all_categorical {
        let header = std::fs::read_to_string(&path).unwrap();
        for name in header.lines().next().unwrap().split(',') {
            schema.insert(name.to_string(), ColumnKind::Categorical);
        }
    }
    load_csv(&path, "class", &schema).unwrap()
}

/// Containment over every cross-validation cell, fitted independently of
/// the evaluation harness.
fn cv_containment(table: &RawTable, containment: &mut Containment) {
    let plan = stratified_folds(&table.class_codes(), 10, 5, SEED).unwrap();
    for split in &plan.splits {
        let imputed = Imputer::fit(table, &split.train).unwrap().apply(table);
        let disc = Discretizer::fit(&imputed, &split.train).unwrap();
        let train = disc.transform_rows(&imputed, &split.train).unwrap();
        let test = disc.transform_rows(&imputed, &split.test).unwrap();
        let ensemble = Ensemble::fit(&train, EnsembleSettings::default());
        let credal = CredalEnsemble::new(&ensemble, SEED).unwrap();
        let comp_differs = comp_feasible_differs(&ensemble, &credal);
        for (_, x) in test.instances() {
            check_instance(
                containment,
                &ensemble,
                &credal,
                &ensemble.posteriors(x),
                comp_differs,
            );
        }
    }
}

fn report(reports: &[EvalReport], kind: ClassifierKind) -> &EvalReport {
    reports.iter().find(|r| r.classifier == kind).unwrap()
}

fn directional(containment: &mut Containment) -> Outcome {
    let start = Instant::now();
    let (mut a, mut b, mut c) = (0, 0, 0);
    let (mut d_checked, mut d_ok) = (0, 0);
    eprintln!(
        "  {:<9} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}  safe/dependent accuracy (BMA*, COMP*)",
        "dataset", "acc", "acc", "brier", "brier", "det", "det"
    );
    eprintln!(
        "  {:<9} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "", "AODE", "BMA", "AODE", "COMP", "BMA*", "COMP*"
    );
    for spec in &DATASETS {
        let table = load(spec);
        let plan = stratified_folds(&table.class_codes(), 10, 5, SEED).unwrap();
        let reports = cross_validate(
            &table,
            &plan,
            &ClassifierKind::ALL,
            EnsembleSettings::default(),
            SEED,
        )
        .unwrap();
        let aode = &report(&reports, ClassifierKind::Aode).aggregate;
        let bma = &report(&reports, ClassifierKind::BmaAode).aggregate;
        let comp = &report(&reports, ClassifierKind::CompAode).aggregate;
        let bma_star = report(&reports, ClassifierKind::BmaAodeStar);
        let comp_star = report(&reports, ClassifierKind::CompAodeStar);
        a += usize::from(aode.accuracy >= bma.accuracy);
        b += usize::from(comp.brier <= aode.brier);
        c += usize::from(comp_star.aggregate.determinacy >= bma_star.aggregate.determinacy);
        let mut safety = Vec::new();
        for r in [bma_star, comp_star] {
            let s = r.safety;
            let text = match (s.safe_accuracy(), s.dependent_accuracy()) {
                (Some(safe), Some(dep)) => {
                    if s.dependent_total >= 10 {
                        d_checked += 1;
                        d_ok += usize::from(dep < safe);
                    }
                    format!("{safe:.3}/{dep:.3} (n={})", s.dependent_total)
                }
                _ => format!("n={}", s.dependent_total),
            };
            safety.push(text);
        }
        eprintln!(
            "  {:<9} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}  {}",
            spec.name,
            aode.accuracy,
            bma.accuracy,
            aode.brier,
            comp.brier,
            bma_star.aggregate.determinacy,
            comp_star.aggregate.determinacy,
            safety.join(", ")
        );
        cv_containment(&table, containment);
    }
    let n = DATASETS.len();
    let majority = n / 2 + 1;
    let elapsed = start.elapsed();
    Outcome::new(
        a >= majority && b >= majority && c >= majority && d_ok == d_checked && elapsed < Duration::from_secs(900),
        format!(
            "{n} datasets: (a) {a}/{n}, (b) {b}/{n}, (c) {c}/{n}, (d) {d_ok}/{d_checked} checked, {}",
            secs(elapsed)
        ),
    )
}

fn containment_outcome(c: &Containment) -> Outcome {
    Outcome::new(
        c.violations == 0 && c.singleton_mismatches == 0,
        format!(
            "{} credal predictions ({} singletons): {} misses, {} singleton mismatches, {} logged with differing feasible sets",
            c.checked, c.singletons, c.violations, c.singleton_mismatches, c.explained
        ),
    )
}

fn wilcoxon_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut mismatches = 0;
    let cases = 5000;
    for i in 0..cases {
        let n = rng.gen_range(1..=10);
        // Small integer ranges produce zero differences and tied magnitudes.
        let spread = if i % 2 == 0 { 4 } else { 1000 };
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0..spread) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0..spread) as f64).collect();
        let got = wilcoxon_signed_rank(&a, &b).unwrap().p_value;
        if got != enumerated_signed_rank_p(&a, &b) {
            mismatches += 1;
        }
    }
    Outcome::new(
        mismatches == 0,
        format!("{cases} samples, {mismatches} mismatches"),
    )
}

fn run_cli(out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_credal-aode"))
        .args(["eval", "--data"])
        .arg(data_dir().join("iris.csv"))
        .args(["--runs", "2", "--folds", "5", "--out"])
        .arg(out)
        .env_remove("CREDAL_AODE_SEED")
        .output()
        .unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let (r1, r2) = (run_cli(&p1), run_cli(&p2));
    if !r1.status.success() || !r2.status.success() {
        return Outcome::new(
            false,
            format!("CLI failed: {}", String::from_utf8_lossy(&r1.stderr)),
        );
    }
    let (b1, b2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

    let table = load(&DATASETS[0]);
    let plan = stratified_folds(&table.class_codes(), 2, 5, SEED).unwrap();
    let render = || {
        render_json(
            &cross_validate(
                &table,
                &plan,
                &ClassifierKind::ALL,
                EnsembleSettings::default(),
                SEED,
            )
            .unwrap(),
        )
    };
    let (j1, j2) = (render(), render());
    Outcome::new(
        b1 == b2 && j1 == j2 && j1.as_bytes() == b1.as_slice(),
        format!(
            "CLI reports {} bytes, identical: {}; library rendering identical: {}",
            b1.len(),
            b1 == b2,
            j1 == j2
        ),
    )
}

fn main() {
    let mut containment = Containment::default();
    let c1 = fractional_oracle();
    let c2 = ratio_oracle();
    let c3 = grid_sets(&mut containment);
    let c5 = utility_anchors();
    let c6 = degenerate_equivalences();
    let c7 = directional(&mut containment);
    let c4 = containment_outcome(&containment);
    let c8 = wilcoxon_exact();
    let c9 = determinism();
    let results = [
        (
            "fractional LP via Charnes-Cooper matches vertex enumeration",
            c1,
        ),
        ("log-ratio minimizer matches grid search", c2),
        ("credal sets match prior-grid enumeration", c3),
        ("credal sets contain the determinate argmax", c4),
        ("utility anchors", c5),
        ("degenerate equivalences", c6),
        ("directional behaviour on public datasets", c7),
        ("exact Wilcoxon p-values match sign enumeration", c8),
        ("byte-identical reports", c9),
    ];

    println!();
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!("{tag} [{}] {name}: {}", i + 1, outcome.detail);
    }
    println!(
        "{}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
