//! Brute-force oracles shared by the property and acceptance tests. Each is
//! a direct, unoptimized reading of the definition it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use burstwatch::features::{HistoricEntry, Task, BASE_DIMS, PROTOTYPE_K};
use burstwatch::lifecycle::{EventKind, LifecycleMachine, LifecycleParams, Transition};

/// Lifecycle moments of one cycle in series coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cycle {
    pub trigger: i64,
    pub c1: u32,
    pub threshold: u32,
    pub onset: Option<i64>,
    pub negative: Option<i64>,
    pub offburst: Option<i64>,
    pub death: i64,
}

/// Builds a count series from (kind, length, level) segments: long silence,
/// low chatter, a plateau, or a single spike followed by silence.
pub fn series_from_segments(segments: &[(u8, usize, u32)]) -> Vec<u32> {
    let mut out = Vec::new();
    for &(kind, len, level) in segments {
        match kind % 4 {
            0 => out.extend(std::iter::repeat_n(0, 4 * len)),
            1 => out.extend((0..len).map(|i| (level as usize + 7 * i) as u32 % 13)),
            2 => out.extend(std::iter::repeat_n(level, len.min(60))),
            _ => {
                out.push(level);
                out.extend(std::iter::repeat_n(0, len));
            }
        }
    }
    if out.is_empty() {
        out.push(0);
    }
    out
}

/// Definitions applied to a finished series followed by silence.
pub fn brute_cycles(counts: &[u32], p: &LifecycleParams) -> Vec<Cycle> {
    let w = p.window_minutes as i64;
    let h = p.burst_horizon_minutes as i64;
    let q = p.offburst_quiet_minutes as i64;
    let dq = p.death_quiet_minutes as i64;
    let at = |i: i64| if i >= 0 && (i as usize) < counts.len() { counts[i as usize] } else { 0 };
    let window = |i: i64| -> u64 { (i - w + 1..=i).map(|j| at(j) as u64).sum() };
    let hot = |i: i64| window(i) > p.delta as u64;
    let end = counts.len() as i64 + h + q + dq + w + 2;
    let mut out = Vec::new();
    let mut from = 0;
    loop {
        let Some(s) = (from..end).find(|&i| hot(i)) else { break };
        let c1 = at(s);
        let threshold = (c1 + p.delta).max((3 * c1).div_ceil(2));
        let onset = (s + 1..=s + h).find(|&i| at(i) > threshold);
        let (offburst, resolved) = match onset {
            Some(b) => {
                let t = (b + 1..).find(|&t| (t..t + q).all(|i| at(i) < threshold)).unwrap();
                (Some(t), t + q - 1)
            }
            None => (None, s + h),
        };
        let death = (resolved..).find(|&m| (m - dq + 1..=m).all(|i| !hot(i))).unwrap();
        out.push(Cycle {
            trigger: s,
            c1,
            threshold,
            onset,
            negative: onset.is_none().then_some(s + h),
            offburst,
            death,
        });
        from = death + 1;
    }
    out
}

/// Feeds only the non-zero minutes to a fresh machine, then one silent
/// minute far enough out to resolve everything.
pub fn stream_transitions(counts: &[u32], p: &LifecycleParams) -> Vec<Transition> {
    let mut m = LifecycleMachine::new(*p);
    let mut out = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            out.extend(m.advance(i as i64, c).unwrap());
        }
    }
    let tail = (p.burst_horizon_minutes + p.offburst_quiet_minutes + p.death_quiet_minutes + p.window_minutes + 2) as i64;
    out.extend(m.advance(counts.len() as i64 + tail, 0).unwrap());
    out
}

/// Folds transitions into cycles; panics on an incomplete cycle.
pub fn cycles_from_transitions(ts: &[Transition]) -> Vec<Cycle> {
    let mut out: Vec<Cycle> = Vec::new();
    for t in ts {
        match t.kind {
            EventKind::Triggered => {
                assert_eq!(t.cycle as usize, out.len(), "cycles are numbered in order");
                out.push(Cycle {
                    trigger: t.minute,
                    c1: t.c1,
                    threshold: t.threshold,
                    onset: None,
                    negative: None,
                    offburst: None,
                    death: i64::MIN,
                });
            }
            EventKind::BurstOnset => out[t.cycle as usize].onset = Some(t.minute),
            EventKind::LabeledNegative => out[t.cycle as usize].negative = Some(t.minute),
            EventKind::OffBurst => out[t.cycle as usize].offburst = Some(t.minute),
            EventKind::Death => out[t.cycle as usize].death = t.minute,
        }
    }
    assert!(out.iter().all(|c| c.death != i64::MIN), "every cycle dies after the silent tail");
    out
}

/// Confusion counts by a plain loop.
pub fn brute_confusion(pred: &[bool], truth: &[bool]) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for i in 0..pred.len() {
        match (pred[i], truth[i]) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    (tp, fp, fn_, tn)
}

/// Precision, recall and F-beta from counts, `None` where a denominator is 0
/// (F as well when precision and recall are both 0).
pub fn brute_prf(tp: u64, fp: u64, fn_: u64, beta: f64) -> (Option<f64>, Option<f64>, Option<f64>) {
    let p = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
    let r = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
    let f = match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some((1.0 + beta * beta) * p * r / (beta * beta * p + r)),
        _ => None,
    };
    (p, r, f)
}

/// The eleven shape features by their textbook formulas.
pub fn brute_derivatives(c: &[u32]) -> [f64; 11] {
    let v: Vec<f64> = c.iter().map(|&x| x as f64).collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    let idx_max = v.iter().position(|&x| x == max).unwrap() as f64;
    let last = *v.last().unwrap();
    let mut out = [mean, std, last - v[0], last - max, last - min, idx_max, 0.0, 0.0, 0.0, 0.0, 0.0];
    if v.len() > 1 {
        let d: Vec<f64> = (1..v.len()).map(|j| v[j] - v[j - 1]).collect();
        let m = d.len() as f64;
        let e = d.iter().map(|x| x.abs()).sum::<f64>() / m;
        out[6] = e;
        out[7] = (d.iter().map(|x| (x.abs() - e).powi(2)).sum::<f64>() / m).sqrt();
        out[8] = *d.last().unwrap();
        out[9] = d.iter().cloned().fold(f64::MIN, f64::max);
        let pos = d.iter().filter(|&&x| x >= 0.0).count() as f64;
        out[10] = pos - (m - pos);
    }
    out
}

/// Least squares by normal equations and Gaussian elimination, in the
/// scaled variable x / (n - 1). Returns fitted values at every point.
pub fn brute_fit_values(c: &[u32], order: usize) -> Vec<f64> {
    let n = c.len();
    let s = (n - 1).max(1) as f64;
    let k = order + 1;
    let mut a = vec![vec![0.0; k + 1]; k];
    for (i, &y) in c.iter().enumerate() {
        let x = i as f64 / s;
        for r in 0..k {
            for col in 0..k {
                a[r][col] += x.powi((r + col) as i32);
            }
            a[r][k] += y as f64 * x.powi(r as i32);
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for cc in col..=k {
                    a[r][cc] -= f * a[col][cc];
                }
            }
        }
    }
    let w: Vec<f64> = (0..k).map(|r| a[r][k] / a[r][r]).collect();
    (0..n)
        .map(|i| {
            let x = i as f64 / s;
            w.iter().enumerate().map(|(p, wp)| wp * x.powi(p as i32)).sum()
        })
        .collect()
}

pub fn brute_3grams(s: &str) -> BTreeSet<String> {
    let c: Vec<char> = s.chars().collect();
    let mut out = BTreeSet::new();
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            for k in j + 1..c.len() {
                if k == c.len() - 1 {
                    out.insert([c[i], c[j], c[k]].iter().collect());
                }
            }
        }
    }
    out
}

/// Order, density, average degree and degree entropy of the simple directed
/// graph on the distinct non-loop edges.
pub fn brute_network(edges: &[(u8, u8)]) -> (f64, f64, f64, f64) {
    let set: BTreeSet<(u8, u8)> = edges.iter().copied().filter(|(a, b)| a != b).collect();
    let verts: BTreeSet<u8> = set.iter().flat_map(|&(a, b)| [a, b]).collect();
    let v = verts.len() as f64;
    if verts.len() < 2 {
        return (v, 0.0, 0.0, 0.0);
    }
    let mut deg: BTreeMap<u8, usize> = BTreeMap::new();
    for &(a, b) in &set {
        *deg.entry(a).or_default() += 1;
        *deg.entry(b).or_default() += 1;
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for d in deg.values() {
        *hist.entry(*d).or_default() += 1;
    }
    let h: f64 = hist
        .values()
        .map(|&k| {
            let p = k as f64 / v;
            -p * p.ln()
        })
        .sum();
    (v, set.len() as f64 / (v * (v - 1.0)), 2.0 * set.len() as f64 / v, h)
}

/// `1 / (1 + euclidean distance)`.
pub fn brute_similarity(a: &[f64], b: &[f64]) -> f64 {
    1.0 / (1.0 + a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Prototype values for k = 1..=PROTOTYPE_K: z-score with the entries'
/// population statistics, rank labelled entries by similarity (ties by key
/// and cycle), then sum burst labels or similarity-weight the times.
pub fn brute_prototypes(es: &[HistoricEntry], q: &[f64], task: Task) -> Vec<f64> {
    let mut sorted = es.to_vec();
    sorted.sort_by(|a, b| (&a.key, a.cycle).cmp(&(&b.key, b.cycle)));
    let n = sorted.len() as f64;
    let mean: Vec<f64> = (0..BASE_DIMS).map(|d| sorted.iter().map(|e| e.base[d]).sum::<f64>() / n).collect();
    let sd: Vec<f64> = (0..BASE_DIMS)
        .map(|d| (sorted.iter().map(|e| (e.base[d] - mean[d]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    let z = |x: &[f64]| -> Vec<f64> {
        (0..BASE_DIMS).map(|d| if sd[d] > 0.0 { (x[d] - mean[d]) / sd[d] } else { 0.0 }).collect()
    };
    let zq = z(q);
    let mut scored: Vec<(f64, usize, f64)> = Vec::new();
    for (i, e) in sorted.iter().enumerate() {
        let label = match task {
            Task::Burst => e.burst_candidate.then_some(e.burst as u8 as f64),
            Task::Tbb => e.tbb.map(|v| v as f64),
            Task::Tra => e.tra.map(|v| v as f64),
        };
        if let Some(v) = label {
            scored.push((brute_similarity(&zq, &z(&e.base)), i, v));
        }
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    (1..=PROTOTYPE_K)
        .map(|k| {
            let top = &scored[..k.min(scored.len())];
            if top.is_empty() {
                0.0
            } else if task == Task::Burst {
                top.iter().map(|t| t.2).sum()
            } else {
                top.iter().map(|t| t.0 * t.2).sum::<f64>() / top.iter().map(|t| t.0).sum::<f64>()
            }
        })
        .collect()
}

/// Relative closeness with an absolute floor of `rel` near zero.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
