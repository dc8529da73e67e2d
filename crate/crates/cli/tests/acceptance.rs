//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topofc::embed::embed;
use topofc::graphstore::parse_tudataset;
use topofc::learn::{gradient_check, MlpConfig, MlpModel};
use topofc::pgh::{betti_curve, betti_oracle, decompose, PersistenceDecomposition, WeightedGraph};
use topofc::pipeline::{crossval, PipelineConfig};
use topofc::wasser::{embedding_distance, wasserstein_p, wasserstein_p_matched, ValueSet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Independent repetitions of the k-fold protocol, averaged.
const CV_REPEATS: u64 = 3;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(-1.0..=1.0)));
            }
        }
    }
    // copy another edge's weight onto roughly a tenth of the edges
    if edges.len() > 1 {
        for k in 0..edges.len() {
            if rng.gen_bool(0.1) {
                let src = rng.gen_range(0..edges.len());
                edges[k].2 = edges[src].2;
            }
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let densities = [0.3, 0.6, 1.0];
    let mut points = 0usize;
    let mut ties = 0usize;
    for t in 0..1000 {
        let n = rng.gen_range(1..=12);
        let g = random_graph(&mut rng, n, densities[t % 3]);
        let mut weights: Vec<f64> = g.edges().iter().map(|e| e.2).collect();
        weights.sort_by(f64::total_cmp);
        let before = weights.len();
        weights.dedup();
        ties += before - weights.len();
        let mut eps = Vec::new();
        match (weights.first(), weights.last()) {
            (Some(&lo), Some(&hi)) => {
                eps.push(lo - 1.0);
                for (k, &w) in weights.iter().enumerate() {
                    eps.push(w);
                    if let Some(&next) = weights.get(k + 1) {
                        eps.push((w + next) / 2.0);
                    }
                }
                eps.push(hi + 1.0);
            }
            _ => eps.extend([-1.0, 0.0, 1.0]),
        }
        let curve = betti_curve(&decompose(&g), &eps).map_err(|e| e.to_string())?;
        for (k, &e) in eps.iter().enumerate() {
            let (b0, b1) = betti_oracle(&g, e);
            if (curve.beta0[k], curve.beta1[k]) != (b0, b1) {
                return Err(format!("graph {t} (n={n}) differs at epsilon {e}"));
            }
            points += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        secs < 30.0,
        format!("1000 graphs, {points} thresholds, {ties} tied weights, {secs:.2} s (limit 30 s)"),
    )
}

fn complete_graph(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, rng.gen_range(-1.0..=1.0)));
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

fn cardinalities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 2..=50 {
        let d = decompose(&complete_graph(&mut rng, n));
        let deaths = (1 + n * (n - 1) / 2) - n;
        if d.births.len() != n - 1 || d.deaths.len() != deaths {
            return Err(format!(
                "n={n}: |B|={} |D|={} (expected {} and {deaths})",
                d.births.len(),
                d.deaths.len(),
                n - 1
            ));
        }
    }
    Ok("complete graphs n = 2..50: |B| = n-1, |D| = 1 + n(n-3)/2".into())
}

fn random_set(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = rng.gen_range(2..=30);
    let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn sampled(values: &[f64], m: usize) -> Vec<f64> {
    let d = PersistenceDecomposition {
        births: values.to_vec(),
        deaths: Vec::new(),
        num_nodes: values.len() + 1,
        num_components: 1,
    };
    embed(&d, m, 1).unwrap().v_b
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..50)
        .map(|_| (random_set(&mut rng), random_set(&mut rng)))
        .collect();
    let ms = [100usize, 1000, 10000];
    let mut details = Vec::new();
    let mut ok = true;
    for p in [1.0, 2.0] {
        let mut mean_err = Vec::new();
        let mut worst_rel = 0.0f64;
        for &m in &ms {
            let mut total = 0.0;
            for (a, b) in &pairs {
                let exact = wasserstein_p(
                    &ValueSet::new(a.clone()).unwrap(),
                    &ValueSet::new(b.clone()).unwrap(),
                    p,
                )
                .unwrap();
                let approx = embedding_distance(&sampled(a, m), &sampled(b, m), p, m).unwrap();
                let err = (approx - exact).abs();
                total += err;
                if m == 10000 {
                    worst_rel = worst_rel.max(err / exact);
                }
            }
            mean_err.push(total / pairs.len() as f64);
        }
        let logs_m: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
        let logs_e: Vec<f64> = mean_err.iter().map(|e| e.ln()).collect();
        let s = slope(&logs_m, &logs_e);
        ok &= worst_rel < 0.01 && s <= -0.9;
        details.push(format!(
            "p={p}: max rel err {worst_rel:.2e} at m=1e4, slope {s:.3}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    check(
        ok,
        format!("{}; {secs:.2} s (limit 60 s)", details.join("; ")),
    )
}

fn metric_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_triangle = f64::NEG_INFINITY;
    let mut worst_closed = 0.0f64;
    for t in 0..10_000 {
        let k = rng.gen_range(1..=25);
        let mut draw =
            || ValueSet::new((0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap();
        let (a, b, c) = (draw(), draw(), draw());
        let p = if t % 2 == 0 { 1.0 } else { 2.0 };
        let w = |x: &ValueSet, y: &ValueSet| wasserstein_p(x, y, p).unwrap();
        if w(&a, &b).to_bits() != w(&b, &a).to_bits() {
            return Err(format!("triple {t}: asymmetric"));
        }
        worst_triangle = worst_triangle.max(w(&a, &c) - w(&a, &b) - w(&b, &c));
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c)] {
            worst_closed =
                worst_closed.max((wasserstein_p_matched(x, y, p).unwrap() - w(x, y)).abs());
        }
    }
    let mut uneven = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..1000 {
        let a = ValueSet::new(random_set(&mut uneven)).unwrap();
        let b = ValueSet::new(random_set(&mut uneven)).unwrap();
        for p in [1.0, 2.0] {
            if wasserstein_p(&a, &b, p).unwrap().to_bits()
                != wasserstein_p(&b, &a, p).unwrap().to_bits()
            {
                return Err("asymmetric on sets of different sizes".into());
            }
        }
    }
    check(
        worst_triangle <= 1e-9 && worst_closed <= 1e-12,
        format!("10^4 triples: symmetry exact, worst triangle excess {worst_triangle:.2e}, closed form gap {worst_closed:.2e}"),
    )
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let cfg = MlpConfig {
            hidden_dim: rng.gen_range(1..=16),
            weight_decay: if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.0..1e-2)
            },
            seed: rng.gen(),
            ..MlpConfig::new(rng.gen_range(1..=10), rng.gen_range(2..=5))
        };
        let model = MlpModel::init(cfg.clone(), &mut rng).unwrap();
        let batch: Vec<(Vec<f64>, usize)> = (0..rng.gen_range(1..=8))
            .map(|_| {
                let x = (0..cfg.input_dim)
                    .map(|_| rng.gen_range(-2.0..2.0))
                    .collect();
                (x, rng.gen_range(0..cfg.num_classes))
            })
            .collect();
        worst = worst.max(gradient_check(&model, &batch).map_err(|e| e.to_string())?);
    }
    check(
        worst < 1e-4,
        format!("100 draws, max relative error {worst:.2e} (limit 1e-4)"),
    )
}

fn repeated_kfold(name: &str, dir: PathBuf) -> Result<(f64, f64, Vec<f64>, Duration), String> {
    let ds = parse_tudataset(&dir, name).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut accs = Vec::new();
    let mut f1s = Vec::new();
    for seed in 0..CV_REPEATS {
        let mut cfg = PipelineConfig::default();
        cfg.cv.seed = seed;
        let r = crossval(&ds, &cfg, 1).map_err(|e| e.to_string())?;
        accs.push(100.0 * r.mean_accuracy);
        f1s.push(100.0 * r.mean_weighted_f1);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok((mean(&accs), mean(&f1s), accs, start.elapsed()))
}

fn fmt_runs(v: &[f64]) -> String {
    v.iter()
        .map(|a| format!("{a:.2}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn mutag() -> Outcome {
    let (acc, _, runs, t) = repeated_kfold("MUTAG", common::mutag_dir())?;
    let secs = t.as_secs_f64();
    check(
        (77.0..=87.0).contains(&acc) && secs < 300.0,
        format!(
            "mean accuracy {acc:.2} over {CV_REPEATS} seeds (runs {}), band [77, 87]; {secs:.1} s (limit 300 s)",
            fmt_runs(&runs)
        ),
    )
}

fn proteins() -> Outcome {
    let dir = std::env::var_os("TOPOFC_PROTEINS_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/PROTEINS"));
    if !dir.join("PROTEINS_A.txt").is_file() {
        return Err(format!(
            "dataset not found at {} (set TOPOFC_PROTEINS_DIR); criterion not evaluated",
            dir.display()
        ));
    }
    let (acc, f1, runs, t) = repeated_kfold("PROTEINS", dir)?;
    let secs = t.as_secs_f64();
    check(
        (69.0..=79.0).contains(&acc) && (68.5..=78.5).contains(&f1) && secs < 900.0,
        format!(
            "mean accuracy {acc:.2} (runs {}), band [69, 79]; weighted F1 {f1:.2}, band [68.5, 78.5]; {secs:.1} s",
            fmt_runs(&runs)
        ),
    )
}

fn large_decompose() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = complete_graph(&mut rng, 1000);
    let start = Instant::now();
    let d = decompose(&g);
    let secs = start.elapsed().as_secs_f64();
    check(
        secs < 1.0 && d.births.len() == 999 && d.deaths.len() == 498_501,
        format!("K1000 (499500 edges) in {:.3} s (limit 1 s)", secs),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for (k, workers) in ["1", "8", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}.jsonl"));
        let status = common::run(&[
            "crossval",
            "--dataset",
            common::mutag_dir().to_str().unwrap(),
            "--features",
            "labels+ldp",
            "--mn",
            "avg",
            "--protocol",
            "kfold:5",
            "--seed",
            "7",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        reports.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(
        reports[0] == reports[1] && reports[0] == reports[2],
        format!(
            "MUTAG crossval, workers 1/8/1: {} bytes each, identical = {}",
            reports[0].len(),
            reports[0] == reports[1] && reports[1] == reports[2]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("decomposition cardinalities", cardinalities),
        ("embedding distance convergence", convergence),
        ("wasserstein metric properties", metric_properties),
        ("mlp gradient check", gradients),
        ("MUTAG 5-fold reproduction", mutag),
        ("PROTEINS 5-fold reproduction", proteins),
        ("decompose K1000 under 1 s", large_decompose),
        ("crossval determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
