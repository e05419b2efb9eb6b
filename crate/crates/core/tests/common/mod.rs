//! Reference implementations used as test oracles. Deliberately naive.

#![allow(dead_code)]

use hetsim::metrics::TradePoint;

/// Self-scheduling by stepping a clock from event to event: at each instant
/// every idle core, lowest index first, takes the next chunk.
pub fn step_schedule(durations: &[Vec<f64>], n_cores: usize) -> (Vec<usize>, f64) {
    let mut free = vec![0.0f64; n_cores];
    let mut assignment = Vec::with_capacity(durations.len());
    let mut t = 0.0f64;
    let mut next = 0;
    while next < durations.len() {
        for core in 0..n_cores {
            if next < durations.len() && free[core] <= t {
                free[core] = t + durations[next][core];
                assignment.push(core);
                next += 1;
            }
        }
        if next < durations.len() {
            t = free.iter().copied().filter(|&f| f > t).fold(f64::INFINITY, f64::min);
        }
    }
    let makespan = free.iter().copied().fold(0.0, f64::max);
    (assignment, makespan)
}

/// Quadratic dominance filter. Exact duplicates keep the smallest name.
/// Result is sorted by delay.
pub fn dominance_filter(points: &[TradePoint]) -> Vec<TradePoint> {
    let mut keep: Vec<TradePoint> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let dominated = points.iter().any(|q| {
            q.delay_s <= p.delay_s && q.energy_j <= p.energy_j && (q.delay_s < p.delay_s || q.energy_j < p.energy_j)
        });
        let shadowed = points.iter().enumerate().any(|(j, q)| {
            j != i && q.delay_s == p.delay_s && q.energy_j == p.energy_j && q.config < p.config
        });
        if !dominated && !shadowed {
            keep.push(p.clone());
        }
    }
    keep.sort_by(|a, b| a.delay_s.total_cmp(&b.delay_s));
    keep
}

/// All (a, b, c) with a + b + c = n, each within its bounds, counted by brute force.
pub fn count_triples(n: u32, lo: [u32; 3], hi: [u32; 3]) -> usize {
    let mut count = 0;
    for a in 0..=n {
        for b in 0..=n {
            for c in 0..=n {
                let v = [a, b, c];
                if a + b + c == n && (0..3).all(|i| v[i] >= lo[i] && v[i] <= hi[i]) {
                    count += 1;
                }
            }
        }
    }
    count
}
