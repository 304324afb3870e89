mod common;

use std::collections::BTreeMap;

use burstwatch::evaluation::{precision_recall_f, rmse, staged_evaluation, Confusion, Prediction, DATA};
use burstwatch::features::Task;
use burstwatch::ingest::Lexicons;
use burstwatch::lifecycle::{label_instance, outcomes_from_events, CycleOutcome, EndOfStream};
use burstwatch::pipeline::{build_tables, detect, featurize, RunConfig};
use burstwatch::synth::{generate, StreamScenario};
use common::{brute_confusion, brute_prf};
use proptest::prelude::*;

fn outcome() -> impl Strategy<Value = CycleOutcome> {
    (0i64..100, prop::option::of((1i64..1440, 1i64..3000))).prop_map(|(trigger, burst)| {
        let onset = burst.map(|(b, _)| trigger + b);
        CycleOutcome {
            key: "k".into(),
            cycle: 0,
            trigger_minute: trigger,
            c1: 60,
            threshold: 110,
            onset,
            offburst: burst.map(|(b, d)| trigger + b + d),
            labeled_negative: burst.is_none().then_some(trigger + 1440),
            death: None,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn metrics_match_counting(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 0..200),
        beta in prop_oneof![Just(0.5), Just(1.0), Just(2.0), 0.1f64..5.0],
    ) {
        let pred: Vec<bool> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let c = Confusion::from_labels(&pred, &truth);
        let (tp, fp, fn_, tn) = brute_confusion(&pred, &truth);
        prop_assert_eq!((c.tp, c.fp, c.fn_, c.tn), (tp, fp, fn_, tn));
        let s = precision_recall_f(&pred, &truth, beta);
        let (p, r, f) = brute_prf(tp, fp, fn_, beta);
        prop_assert_eq!((s.precision, s.recall, s.f), (p, r, f));
    }

    #[test]
    fn rmse_matches_definition(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 0..100)) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let want = (!pairs.is_empty()).then(|| {
            let mut s = 0.0;
            for i in 0..a.len() {
                s += (a[i] - b[i]).powi(2);
            }
            (s / a.len() as f64).sqrt()
        });
        prop_assert_eq!(rmse(&a, &b), want);
    }

    #[test]
    fn labels_respect_eligibility(o in outcome(), stage in 1i64..2000) {
        let t_p = o.trigger_minute + stage;
        let l = label_instance(&o, t_p).unwrap();
        prop_assert_eq!(l.burst, o.onset.is_some());
        if o.task2_eligible(t_p) {
            prop_assert!(o.onset.unwrap() > t_p);
            prop_assert!(l.tbb.unwrap() >= 1);
        }
        if o.task3_eligible(t_p) {
            prop_assert!(o.onset.unwrap() <= t_p && t_p < o.offburst.unwrap());
            prop_assert!(l.tra.unwrap() >= 1);
        }
        prop_assert!(!(o.task2_eligible(t_p) && o.task3_eligible(t_p)));
        prop_assert_eq!(o.task1_eligible(t_p), !o.onset.is_some_and(|b| b <= t_p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Detected small streams: featurized rows obey the task filters and the
    /// report's class balance adds up.
    #[test]
    fn featurized_instances_and_report_totals(seed in 0u64..1000) {
        let cfg = RunConfig::default();
        let mut buf = Vec::new();
        generate(&StreamScenario::small(seed), &mut buf).unwrap();
        let det = detect(buf.as_slice(), &Lexicons::bundled(), cfg.engine(), EndOfStream::Drain).unwrap().output;
        let tables = build_tables(&det.snapshots, &det.events, &cfg.stages, cfg.sax).unwrap();
        let matrices = featurize(&det.snapshots, &det.events, &tables).unwrap();
        let outcomes: BTreeMap<(String, u32), CycleOutcome> = outcomes_from_events(&det.events);
        for m in &matrices {
            for r in &m.rows {
                let v = &r.vector;
                let o = &outcomes[&(v.key.clone(), v.cycle)];
                match m.task {
                    Task::Burst => prop_assert!(o.onset.is_none_or(|b| b > v.prediction_minute)),
                    Task::Tbb => prop_assert!(o.onset.unwrap() > v.prediction_minute),
                    Task::Tra => prop_assert!(o.onset.unwrap() <= v.prediction_minute && v.prediction_minute < o.offburst.unwrap()),
                }
            }
        }
        let none: Vec<Prediction> = Vec::new();
        let report = staged_evaluation(&matrices, &[], &none, &cfg.stages);
        let mut prev = f64::INFINITY;
        for &s in &cfg.stages {
            let get = |metric: &str| report.get(s, Task::Burst, DATA, metric).unwrap();
            prop_assert_eq!(get("eligible"), get("positives") + get("negatives"));
            prop_assert!(get("eligible") <= prev);
            prev = get("eligible");
        }
    }
}
