//! Batch evaluation of the lifecycle definitions over a complete count
//! series. Written against whole arrays rather than minute by minute, so it
//! can check the streaming machine.

use crate::lifecycle::{burst_threshold, LifecycleParams};

/// Lifecycle moments of one cycle, in the series' minute coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCycle {
    pub trigger: i64,
    pub c1: u32,
    pub threshold: u32,
    pub onset: Option<i64>,
    pub offburst: Option<i64>,
    pub death: Option<i64>,
}

/// Every cycle in `counts` (minute `origin + i` holds `counts[i]`). The
/// series is taken to be followed by silence, so every cycle resolves.
pub fn oracle_cycles(origin: i64, counts: &[u32], params: &LifecycleParams) -> Vec<OracleCycle> {
    let w = params.window_minutes as i64;
    let delta = params.delta as u64;
    let horizon = params.burst_horizon_minutes as i64;
    let quiet = params.offburst_quiet_minutes as i64;
    let death_quiet = params.death_quiet_minutes as i64;
    let n = counts.len() as i64;
    let at = |i: i64| -> u32 {
        if (0..n).contains(&i) {
            counts[i as usize]
        } else {
            0
        }
    };
    // Silence after the series: long enough for any cycle to die.
    let end = n + horizon + quiet + death_quiet + w + 2;
    let mut prefix = vec![0u64; (end + 1) as usize];
    for i in 0..end {
        prefix[(i + 1) as usize] = prefix[i as usize] + at(i) as u64;
    }
    let window = |i: i64| prefix[(i + 1) as usize] - prefix[(i - w + 1).max(0) as usize];
    let hot: Vec<bool> = (0..end).map(|i| window(i) > delta).collect();
    let mut hot_prefix = vec![0u64; (end + 1) as usize];
    for i in 0..end as usize {
        hot_prefix[i + 1] = hot_prefix[i] + hot[i] as u64;
    }
    let hot_in = |from: i64, to: i64| hot_prefix[(to + 1) as usize] > hot_prefix[from.max(0) as usize];

    let mut out = Vec::new();
    let mut from = 0i64;
    while let Some(s) = (from..end).find(|&i| hot[i as usize]) {
        let c1 = at(s);
        let thr = burst_threshold(c1, params.delta);
        let onset = (s + 1..=s + horizon).find(|&i| at(i) > thr);
        let (offburst, resolved) = match onset {
            Some(b) => {
                let t = (b + 1..end)
                    .find(|&t| (t..t + quiet).all(|i| at(i) < thr))
                    .expect("silence follows the series");
                (Some(t), t + quiet - 1)
            }
            None => (None, s + horizon),
        };
        // First minute from resolution with no hot window in the last
        // `death_quiet` minutes.
        let death = (resolved..end)
            .find(|&m| !hot_in(m - death_quiet + 1, m))
            .expect("silence follows the series");
        out.push(OracleCycle {
            trigger: origin + s,
            c1,
            threshold: thr,
            onset: onset.map(|b| origin + b),
            offburst: offburst.map(|t| origin + t),
            death: Some(origin + death),
        });
        from = death + 1;
    }
    out
}
