//! Acceptance run: every criterion at its tolerance, one PASS/FAIL line
//! each. Exits nonzero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use burstwatch::evaluation::{precision_recall_f, rmse, staged_evaluation, Confusion, Report, ALL_POSITIVE, GLOBAL_MEAN, PRIOR_RANDOM};
use burstwatch::features::{
    derivative_features, extract_3grams, network_features, polyfit, prototype_values, similarity, HistoricEntry,
    RetweetMentionNetwork, StageIndex, Task, BASE_DIMS, PROTOTYPE_K,
};
use burstwatch::ingest::Lexicons;
use burstwatch::lifecycle::{EndOfStream, LifecycleParams};
use burstwatch::models::{optimize_classifier, stratified_split, train_weighted_svm, SvmConfig};
use burstwatch::pipeline::{
    build_tables, class_balance, compare_truth, detect, featurize, predict, summarize, train, Dataset, RunConfig,
};
use burstwatch::storage::Store;
use burstwatch::synth::{generate, StreamScenario, DEFAULT_PROFILE};
use burstwatch::{evaluation::Prediction, features::FeatureMatrix, models::TrainedModel};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_loop() -> Outcome {
    let start = Instant::now();
    let lex = Lexicons::bundled();
    let cfg = RunConfig::default();
    let checks = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let mut buf = Vec::new();
            let g = generate(&StreamScenario::small(seed), &mut buf).map_err(|e| e.to_string())?;
            let det = detect(buf.as_slice(), &lex, cfg.engine(), EndOfStream::Drain).map_err(|e| e.to_string())?;
            Ok((seed, compare_truth(&det.output.events, &g.truth)))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let took = start.elapsed();
    let records: usize = checks.iter().map(|c| c.1.truth_records).sum();
    let mismatches: usize = checks.iter().map(|c| c.1.mismatches.len()).sum();
    let first = checks
        .iter()
        .find_map(|(seed, c)| c.mismatches.first().map(|m| format!(" (first: seed {seed}: {m})")));
    check(
        mismatches == 0 && records > 0 && took < Duration::from_secs(120),
        format!(
            "200 scenarios, {records} truth records, {mismatches} mismatches{}, {:.1}s",
            first.unwrap_or_default(),
            took.as_secs_f64()
        ),
    )
}

fn random_series(rng: &mut ChaCha8Rng) -> (Vec<u32>, LifecycleParams) {
    let segments: Vec<(u8, usize, u32)> = (0..rng.random_range(1..10))
        .map(|_| (rng.random_range(0..4), rng.random_range(1..600), rng.random_range(0..300)))
        .collect();
    let delta = if rng.random_bool(0.5) { 50 } else { rng.random_range(5..120) };
    let window = if rng.random_bool(0.5) { 5 } else { rng.random_range(1..10) };
    let p = LifecycleParams {
        delta,
        window_minutes: window,
        ..LifecycleParams::default()
    };
    (series_from_segments(&segments), p)
}

fn streaming_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let (mut cycles, mut bad) = (0, 0);
    for _ in 0..1000 {
        let (counts, p) = random_series(&mut rng);
        let want = brute_cycles(&counts, &p);
        let got = cycles_from_transitions(&stream_transitions(&counts, &p));
        cycles += want.len();
        bad += (got != want) as usize;
    }
    check(bad == 0, format!("1000 series, {cycles} oracle cycles, {bad} differing series"))
}

fn feature_oracles() -> Outcome {
    const REL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures: Vec<String> = Vec::new();
    for _ in 0..500 {
        let n = rng.random_range(1..500);
        let c: Vec<u32> = (0..n).map(|_| rng.random_range(0..2000)).collect();
        let got = derivative_features(&c);
        let want = brute_derivatives(&c);
        for i in [2, 3, 4, 5, 8, 9, 10] {
            if got[i] != want[i] {
                failures.push(format!("derivative feature {i}"));
            }
        }
        for i in [0, 1, 6, 7] {
            if !close(got[i], want[i], REL) {
                failures.push(format!("derivative feature {i}"));
            }
        }

        let c: Vec<u32> = (0..rng.random_range(1..200)).map(|_| rng.random_range(0..300)).collect();
        let p = polyfit(&c);
        let fit = if c.len() >= 8 { brute_fit_values(&c, 6) } else { c.iter().map(|&v| v as f64).collect() };
        if fit.iter().enumerate().any(|(i, w)| !close(p.eval(i as f64), *w, REL)) {
            failures.push("polyfit".into());
        }

        let edges: Vec<(u8, u8)> = (0..rng.random_range(0..80)).map(|_| (rng.random_range(0..12), rng.random_range(0..12))).collect();
        let mut g = RetweetMentionNetwork::new();
        for (a, b) in &edges {
            g.add_edge(&format!("u{a}"), &format!("u{b}"));
        }
        let f = network_features(&g);
        let (order, density, avg, h) = brute_network(&edges);
        if f.order != order || !close(f.density, density, REL) || !close(f.average_degree, avg, REL) || !close(f.degree_entropy, h, REL) {
            failures.push("network".into());
        }

        let a: Vec<f64> = (0..BASE_DIMS).map(|_| rng.random_range(-1e3..1e3)).collect();
        let b: Vec<f64> = (0..BASE_DIMS).map(|_| rng.random_range(-1e3..1e3)).collect();
        if !close(similarity(&a, &b).map_err(|e| e.to_string())?, brute_similarity(&a, &b), REL) {
            failures.push("similarity".into());
        }

        let es: Vec<HistoricEntry> = (0..rng.random_range(0..40))
            .map(|i| HistoricEntry {
                key: format!("h{:03}", i % 17),
                cycle: i as u32 / 17,
                base: (0..BASE_DIMS).map(|_| (rng.random_range(-5.0f64..5.0) * 4.0).round() / 4.0).collect(),
                burst_candidate: rng.random_bool(0.7),
                burst: rng.random_bool(0.3),
                tbb: rng.random_bool(0.6).then(|| rng.random_range(1..1440)),
                tra: rng.random_bool(0.6).then(|| rng.random_range(1..1440)),
            })
            .collect();
        let q: Vec<f64> = (0..BASE_DIMS).map(|_| rng.random_range(-5.0..5.0)).collect();
        let idx = StageIndex::new(es.clone());
        for task in Task::ALL {
            let got = prototype_values(&idx.ranked(&q, task).map_err(|e| e.to_string())?, task);
            let want = brute_prototypes(&es, &q, task);
            if (0..PROTOTYPE_K).any(|k| !close(got[k], want[k], REL)) {
                failures.push(format!("prototypes {}", task.name()));
            }
        }
    }
    failures.sort();
    failures.dedup();
    check(
        failures.is_empty(),
        format!("500 random cases per family; failing: {}", if failures.is_empty() { "none".into() } else { failures.join(", ") }),
    )
}

fn sax_example() -> Outcome {
    let got = extract_3grams("ACBF");
    let want: BTreeSet<String> = ["ACF", "ABF", "CBF"].map(String::from).into();
    check(got == want, format!("ACBF -> {got:?}"))
}

/// Imbalanced set: roughly one positive in eight, two informative columns.
fn imbalanced(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let pos = rng.random_bool(0.125);
        let shift = if pos { 1.0 } else { 0.0 };
        x.push((0..6).map(|d| if d < 2 { shift + rng.random_range(-1.0..1.0) } else { rng.random_range(-3.0..3.0) }).collect());
        y.push(pos);
    }
    (x, y)
}

fn weight_search() -> Outcome {
    let svm = SvmConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (seed, beta) in [(1u64, 1.0), (2, 0.5), (3, 2.0)] {
        let (x, y) = imbalanced(seed, 800);
        let (tns, tts) = stratified_split(&y, 0.75, seed).map_err(|e| e.to_string())?;
        let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<bool>) { (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect()) };
        let ((nx, ny), (tx, ty)) = (pick(&tns), pick(&tts));
        let got = optimize_classifier(&nx, &ny, &tx, &ty, beta, &svm).map_err(|e| e.to_string())?;

        let pos = ny.iter().filter(|&&v| v).count();
        let ratio = (ny.len() - pos) as f64 / pos as f64;
        let top = 2 * ratio.ceil() as u64;
        let (mut best_w, mut best_f, mut f_max, mut f_unweighted) = (1.0, None, 0.0, None);
        for w in 1..=top {
            let c = train_weighted_svm(&nx, &ny, w as f64, &svm).map_err(|e| e.to_string())?;
            let pred: Vec<bool> = tx.iter().map(|r| c.predict(r)).collect();
            let (tp, fp, fn_, _) = brute_confusion(&pred, &ty);
            let f = brute_prf(tp, fp, fn_, beta).2;
            if w == 1 {
                (best_f, f_unweighted) = (f, f);
            }
            if let Some(f) = f.filter(|&f| f > f_max) {
                (best_w, best_f, f_max) = (w as f64, Some(f), f);
            }
        }
        let same = got.w == best_w && got.f == best_f && got.trace.len() == top as usize;
        let no_worse = got.f.unwrap_or(0.0) >= f_unweighted.unwrap_or(0.0);
        ok &= same && no_worse;
        lines.push(format!(
            "beta {beta}: grid 1..{top}, w {} vs oracle {best_w}, F {:?} vs {best_f:?}, w=1 F {f_unweighted:?}",
            got.w, got.f
        ));
    }
    check(ok, lines.join("; "))
}

fn metric_cases() -> Outcome {
    let mut bad = Vec::new();
    let labels = |tp: usize, fp: usize, fn_: usize, tn: usize| -> (Vec<bool>, Vec<bool>) {
        let mut p = Vec::new();
        let mut t = Vec::new();
        for (n, pv, tv) in [(tp, true, true), (fp, true, false), (fn_, false, true), (tn, false, false)] {
            p.extend(std::iter::repeat_n(pv, n));
            t.extend(std::iter::repeat_n(tv, n));
        }
        (p, t)
    };
    type Case = ((usize, usize, usize, usize), f64, (Option<f64>, Option<f64>, Option<f64>));
    let cases: [Case; 7] = [
        ((1, 1, 1, 5), 1.0, (Some(0.5), Some(0.5), Some(0.5))),
        ((1, 1, 1, 5), 2.0, (Some(0.5), Some(0.5), Some(0.5))),
        ((3, 1, 0, 2), 1.0, (Some(0.75), Some(1.0), Some(6.0 / 7.0))),
        ((3, 1, 0, 2), 0.5, (Some(0.75), Some(1.0), Some(15.0 / 19.0))),
        ((1, 0, 3, 2), 2.0, (Some(1.0), Some(0.25), Some(5.0 / 17.0))),
        ((0, 0, 4, 4), 1.0, (None, Some(0.0), None)),
        ((0, 2, 2, 4), 1.0, (Some(0.0), Some(0.0), None)),
    ];
    for ((tp, fp, fn_, tn), beta, want) in cases {
        let (p, t) = labels(tp, fp, fn_, tn);
        let c = Confusion::from_labels(&p, &t);
        let s = precision_recall_f(&p, &t, beta);
        if (c.tp, c.fp, c.fn_, c.tn) != (tp as u64, fp as u64, fn_ as u64, tn as u64) || (s.precision, s.recall, s.f) != want {
            bad.push(format!("tp={tp} fp={fp} fn={fn_} tn={tn} beta={beta}: {s:?}"));
        }
    }
    let rm: [(&[f64], &[f64], Option<f64>); 3] = [
        (&[1.0, 2.0, 3.0], &[1.0, 4.0, 3.0], Some((4.0f64 / 3.0).sqrt())),
        (&[0.0, 0.0], &[3.0, 4.0], Some(12.5f64.sqrt())),
        (&[], &[], None),
    ];
    for (a, b, want) in rm {
        if rmse(a, b) != want {
            bad.push(format!("rmse {a:?} {b:?}"));
        }
    }
    check(bad.is_empty(), format!("10 hand-computed cases; failing: {}", if bad.is_empty() { "none".into() } else { bad.join("; ") }))
}

/// Everything one benchmark run produces.
struct Chain {
    cfg: RunConfig,
    scenarios: Vec<StreamScenario>,
    stream_hashes: Vec<String>,
    truth: Vec<Vec<burstwatch::synth::TruthRecord>>,
    detections: Vec<burstwatch::lifecycle::EngineOutput>,
    tables: burstwatch::pipeline::HistoricTables,
    train_m: Vec<FeatureMatrix>,
    test_m: Vec<FeatureMatrix>,
    models: Vec<TrainedModel>,
    preds: Vec<Prediction>,
    report: Report,
    took: Duration,
}

fn run_chain(seed: u64) -> Result<Chain, String> {
    let start = Instant::now();
    let cfg = RunConfig {
        seed,
        betas: vec![0.5, 1.0, 2.0],
        ..RunConfig::default()
    };
    let lex = Lexicons::bundled();
    let (mut scenarios, mut stream_hashes, mut truth, mut detections) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for d in Dataset::ALL {
        let sc = cfg.scenario_for(d, &StreamScenario::benchmark(0));
        let mut buf = Vec::new();
        let g = generate(&sc, &mut buf).map_err(|e| e.to_string())?;
        stream_hashes.push(hex::encode(Sha256::digest(&buf)));
        let det = detect(buf.as_slice(), &lex, cfg.engine(), EndOfStream::Drain).map_err(|e| e.to_string())?;
        scenarios.push(sc);
        truth.push(g.truth);
        detections.push(det.output);
    }
    let tables = build_tables(&detections[0].snapshots, &detections[0].events, &cfg.stages, cfg.sax).map_err(|e| e.to_string())?;
    let train_m = featurize(&detections[1].snapshots, &detections[1].events, &tables).map_err(|e| e.to_string())?;
    let test_m = featurize(&detections[2].snapshots, &detections[2].events, &tables).map_err(|e| e.to_string())?;
    let models = train(&train_m, &cfg).map_err(|e| e.to_string())?;
    let preds = predict(&models, &test_m).map_err(|e| e.to_string())?;
    let report = staged_evaluation(&test_m, &models, &preds, &cfg.stages);
    Ok(Chain {
        cfg,
        scenarios,
        stream_hashes,
        truth,
        detections,
        tables,
        train_m,
        test_m,
        models,
        preds,
        report,
        took: start.elapsed(),
    })
}

fn persist(c: &Chain, root: &Path) -> Result<(), String> {
    let store = Store::open(root, "acceptance").map_err(|e| e.to_string())?.with_created_at(0);
    fn s<T>(r: Result<T, burstwatch::storage::StorageError>) -> Result<(), String> {
        r.map(|_| ()).map_err(|e| e.to_string())
    }
    for (i, d) in Dataset::ALL.into_iter().enumerate() {
        s(store.save_scenario(d, &c.scenarios[i]))?;
        s(store.save_truth(d, &c.truth[i]))?;
        s(store.save_events(d, &c.detections[i].events))?;
        s(store.save_snapshots(d, &c.detections[i].snapshots))?;
        let summary = summarize(&c.detections[i].snapshots, &c.detections[i].events, &c.cfg.stages, Some(&c.truth[i])).map_err(|e| e.to_string())?;
        s(store.save_stats(d, &summary))?;
    }
    s(store.save_tables(&c.tables))?;
    s(store.save_features(Dataset::Train, &c.train_m))?;
    s(store.save_features(Dataset::Test, &c.test_m))?;
    s(store.save_models(&c.models))?;
    s(store.save_predictions(Dataset::Test, &c.preds))?;
    s(store.save_report(&c.report))?;
    Ok(())
}

fn files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn beta_tradeoff(c: &Chain) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for &st in &c.cfg.stages {
        let g = |m: &str, k: &str| c.report.get(st, Task::Burst, m, k);
        let (p05, p2) = (g("weighted-linear-svm-f0.5", "precision"), g("weighted-linear-svm-f2", "precision"));
        let (r05, r2) = (g("weighted-linear-svm-f0.5", "recall"), g("weighted-linear-svm-f2", "recall"));
        let holds = matches!((p05, p2, r05, r2), (Some(a), Some(b), Some(x), Some(y)) if a >= b && y >= x);
        ok &= holds;
        let f = |v: Option<f64>| v.map_or("undefined".into(), |v| format!("{v:.3}"));
        lines.push(format!("{st}min P {}>={} R {}>={}", f(p05), f(p2), f(r2), f(r05)));
    }
    check(ok, lines.join("; "))
}

fn class_shape(c: &Chain) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, d) in Dataset::ALL.into_iter().enumerate() {
        let bal = class_balance(&c.detections[i].snapshots, &c.detections[i].events, &c.cfg.stages);
        let shares: Vec<f64> = bal.iter().map(|b| b.share().unwrap_or(f64::NAN)).collect();
        let near = shares.iter().zip(DEFAULT_PROFILE).all(|(s, p)| (s - p).abs() <= 0.03);
        let falling = shares.windows(2).all(|w| w[1] < w[0]);
        ok &= near && falling && shares.len() == DEFAULT_PROFILE.len();
        lines.push(format!(
            "{}: {}",
            d.name(),
            shares.iter().map(|s| format!("{:.2}%", 100.0 * s)).collect::<Vec<_>>().join(" ")
        ));
    }
    check(ok, lines.join("; "))
}

fn benchmark(c: &Chain) -> Outcome {
    let r = &c.report;
    let triggered = c.truth[2].len();
    let mut fails = Vec::new();
    let f1 = "weighted-linear-svm-f1";
    let first = c.cfg.stages[0];
    let f1_first = r.get(first, Task::Burst, f1, "f1");
    if f1_first.is_none_or(|f| f < 0.6) {
        fails.push(format!("F1 at {first}min {f1_first:?}"));
    }
    for &st in &c.cfg.stages {
        let f = r.get(st, Task::Burst, f1, "f1");
        for b in [ALL_POSITIVE, PRIOR_RANDOM] {
            let base = r.get(st, Task::Burst, b, "f1");
            if !matches!((f, base), (Some(f), Some(b)) if f > b) {
                fails.push(format!("{st}min F1 {f:?} vs {b} {base:?}"));
            }
        }
        for task in [Task::Tbb, Task::Tra] {
            let base = r.get(st, task, GLOBAL_MEAN, "rmse");
            for m in r.models(task).into_iter().filter(|m| *m != GLOBAL_MEAN) {
                let v = r.get(st, task, m, "rmse");
                if !matches!((v, base), (Some(v), Some(b)) if v < b) {
                    fails.push(format!("{st}min {} {m} RMSE {v:?} vs {base:?}", task.name()));
                }
            }
        }
    }
    if c.took >= Duration::from_secs(600) {
        fails.push("chain over 10 minutes".into());
    }
    check(
        fails.is_empty() && triggered >= 2000,
        format!(
            "{triggered} triggered test hashtags, F1 at {first}min {:.3}, chain {:.0}s; failing: {}",
            f1_first.unwrap_or(f64::NAN),
            c.took.as_secs_f64(),
            if fails.is_empty() { "none".into() } else { fails.join("; ") }
        ),
    )
}

fn determinism(a: &Chain) -> Outcome {
    let b = run_chain(a.cfg.seed)?;
    let da = tempfile::tempdir().map_err(|e| e.to_string())?;
    let db = tempfile::tempdir().map_err(|e| e.to_string())?;
    persist(a, da.path())?;
    persist(&b, db.path())?;
    let (fa, fb) = (files(da.path()), files(db.path()));
    let mut diff: Vec<String> = Vec::new();
    if fa.iter().map(|f| &f.0).ne(fb.iter().map(|f| &f.0)) {
        diff.push("file lists".into());
    }
    diff.extend(fa.iter().zip(&fb).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.clone()));
    if a.stream_hashes != b.stream_hashes {
        diff.push("streams".into());
    }
    check(
        diff.is_empty(),
        format!(
            "3 streams and {} artifacts incl. {} models compared; differing: {}",
            fa.len(),
            a.models.len(),
            if diff.is_empty() { "none".into() } else { diff.join(", ") }
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        match &o {
            Ok(d) => println!("PASS {name}: {d}"),
            Err(d) => println!("FAIL {name}: {d}"),
        }
        results.push((name, o));
    };
    report("definitions closed loop", closed_loop());
    report("streaming/replay equivalence", streaming_equivalence());
    report("feature oracles", feature_oracles());
    report("SAX 3-grams", sax_example());
    report("class-weight search fidelity", weight_search());
    report("metric unit cases", metric_cases());
    match run_chain(0) {
        Ok(chain) => {
            report("F-beta trade-off", beta_tradeoff(&chain));
            report("class-balance shape", class_shape(&chain));
            report("synthetic benchmark", benchmark(&chain));
            report("determinism", determinism(&chain));
        }
        Err(e) => {
            for name in ["F-beta trade-off", "class-balance shape", "synthetic benchmark", "determinism"] {
                report(name, Err(format!("benchmark chain failed: {e}")));
            }
        }
    }
    let failed = results.iter().filter(|r| r.1.is_err()).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
