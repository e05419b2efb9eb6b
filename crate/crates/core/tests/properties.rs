//! Invariants over randomly generated cores, profiles, configs and point sets.

use std::collections::BTreeMap;

use proptest::prelude::*;

use hetsim::core_model::{ClassTable, CoreRegistry, CoreTypeSpec};
use hetsim::engine::{schedule_parallel, simulate, simulate_with, SimOptions, Slot, SystemConfig};
use hetsim::metrics::{ideal_point, improvement, pareto_front, Metric, TradePoint};
use hetsim::workload::{load_profile, serial_fraction, InstructionMix, Phase, WorkloadProfile};

const NAMES: [&str; 3] = ["S", "M", "B"];

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn mix() -> impl Strategy<Value = InstructionMix> {
    prop::array::uniform5(0.0..1.0f64)
        .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            InstructionMix::new(ClassTable::new(w.map(|x| x / s))).unwrap()
        })
}

fn cpi_table() -> impl Strategy<Value = ClassTable> {
    prop::array::uniform5(0.3..8.0f64).prop_map(ClassTable::new)
}

fn core_spec(name: &'static str) -> impl Strategy<Value = CoreTypeSpec> {
    (cpi_table(), prop::sample::select(vec![0.5e9, 1e9, 2e9]), 0.01..2.0f64, 0.01..1.0f64, 0.1..4.0f64).prop_map(
        move |(cpi, f, dynp, stat, area)| CoreTypeSpec {
            name: name.to_string(),
            frequency_hz: f,
            cpi,
            out_of_order: false,
            dynamic_power_w: dynp,
            static_power_w: stat,
            area_mm2: area,
            bytes_per_mem_instr: 4.0,
        },
    )
}

fn registry() -> impl Strategy<Value = CoreRegistry> {
    (core_spec(NAMES[0]), core_spec(NAMES[1]), core_spec(NAMES[2]))
        .prop_map(|(a, b, c)| CoreRegistry::new(vec![a, b, c]).unwrap())
}

/// One block is a Serial phase followed by (Parallel, Sync) pairs.
fn block() -> impl Strategy<Value = Vec<Phase>> {
    (
        1_000u64..5_000_000,
        mix(),
        prop::collection::vec((1u32..64, 1u64..200_000, mix(), 0.0..0.01f64), 0..3),
    )
        .prop_map(|(serial, smix, pars)| {
            let mut phases = vec![Phase::Serial {
                instructions: serial,
                mix: smix,
            }];
            for (chunks, per_chunk, m, sync) in pars {
                phases.push(Phase::Parallel {
                    instructions: u64::from(chunks) * per_chunk,
                    chunk_count: chunks,
                    mix: m,
                });
                phases.push(Phase::Sync { duration_s: sync });
            }
            phases
        })
}

fn profile_of(name: &str, phases: Vec<Phase>) -> WorkloadProfile {
    WorkloadProfile {
        name: name.to_string(),
        dwarf: String::new(),
        bottleneck: String::new(),
        notes: None,
        cpi_overrides: BTreeMap::new(),
        phases,
    }
}

fn blocks() -> impl Strategy<Value = Vec<Vec<Phase>>> {
    prop::collection::vec(block(), 1..4)
}

fn counts() -> impl Strategy<Value = [u32; 3]> {
    prop::array::uniform3(0u32..4).prop_filter("some core", |c| c.iter().sum::<u32>() > 0)
}

fn config(reg: &CoreRegistry, c: [u32; 3]) -> SystemConfig {
    let pairs: Vec<(&str, u32)> = NAMES.iter().copied().zip(c).filter(|(_, n)| *n > 0).collect();
    SystemConfig::from_counts(&pairs, reg).unwrap()
}

fn points() -> impl Strategy<Value = Vec<TradePoint>> {
    prop::collection::vec((1u8..10, 1u8..10, 0.0..1.0f64), 1..45).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (d, e, jitter))| {
                // Half the points sit on a coarse grid to force ties.
                let (d, e) = if i % 2 == 0 {
                    (f64::from(d), f64::from(e))
                } else {
                    (f64::from(d) + jitter, f64::from(e) + jitter)
                };
                TradePoint::new(format!("p{i:02}"), "w", d, e, 0.0)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn effective_cpi_is_linear_in_mix(core in core_spec("X"), a in mix(), b in mix(), alpha in 0.0..=1.0f64) {
        let blended = a.blend(&b, alpha);
        let lhs = core.effective_cpi(&blended, None);
        let rhs = alpha * core.effective_cpi(&a, None) + (1.0 - alpha) * core.effective_cpi(&b, None);
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn scaling_cpi_scales_effective_cpi(core in core_spec("X"), m in mix(), k in 0.1..10.0f64) {
        let scaled = CoreTypeSpec { cpi: core.cpi.scaled(k), ..core.clone() };
        prop_assert!(close(scaled.effective_cpi(&m, None), k * core.effective_cpi(&m, None), 1e-12));
        prop_assert!(close(scaled.throughput(&m, None), core.throughput(&m, None) / k, 1e-12));
    }

    #[test]
    fn core_file_round_trip_is_bit_exact(reg in registry(), m in mix()) {
        let back = CoreRegistry::from_json(&reg.to_json()).unwrap();
        for c in reg.iter() {
            let d = back.get(&c.name).unwrap();
            prop_assert_eq!(c.effective_cpi(&m, None).to_bits(), d.effective_cpi(&m, None).to_bits());
        }
    }

    #[test]
    fn profile_round_trip_is_identity(bs in blocks()) {
        let p = profile_of("rt", bs.concat());
        let back = load_profile(&p.to_json(), None).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn serial_fraction_is_scale_invariant(bs in blocks(), k in 2u64..50, core in core_spec("X")) {
        // Instruction counts and barrier time scale together.
        let p = profile_of("s", bs.concat());
        let scaled = profile_of("s", p.phases.iter().map(|ph| match ph {
            Phase::Serial { instructions, mix } => Phase::Serial { instructions: instructions * k, mix: *mix },
            Phase::Parallel { instructions, chunk_count, mix } => Phase::Parallel {
                instructions: instructions * k, chunk_count: *chunk_count, mix: *mix,
            },
            Phase::Sync { duration_s } => Phase::Sync { duration_s: duration_s * k as f64 },
        }).collect());
        let (a, b) = (serial_fraction(&p, &core), serial_fraction(&scaled, &core));
        prop_assert!(close(a, b, 1e-12), "{a} vs {b}");
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn chunks_cover_the_phase(bs in blocks()) {
        let p = profile_of("c", bs.concat());
        let sum: u64 = p.phases.iter().map(|ph| match ph {
            Phase::Parallel { .. } => ph.chunk_sizes().iter().sum(),
            other => other.instructions(),
        }).sum();
        prop_assert_eq!(sum, p.total_instructions());
    }

    #[test]
    fn simulation_is_deterministic(reg in registry(), bs in blocks(), c in counts()) {
        let p = profile_of("d", bs.concat());
        let cfg = config(&reg, c);
        let opts = SimOptions { record_trace: true, ..SimOptions::default() };
        let a = simulate_with(&p, &cfg, &reg, &opts).unwrap();
        let b = simulate_with(&p, &cfg, &reg, &opts).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn delay_respects_makespan_bounds(reg in registry(), bs in blocks(), c in counts()) {
        let p = profile_of("b", bs.concat());
        let cfg = config(&reg, c);
        let r = simulate(&p, &cfg, &reg).unwrap();
        let active: Vec<&CoreTypeSpec> = cfg.slots.iter()
            .flat_map(|s| std::iter::repeat_n(reg.get(&s.core_type).unwrap(), s.count as usize))
            .collect();
        let mut lower = r.serial_s;
        let mut upper = r.serial_s + r.sync_s;
        let mut stretch = r.contention_stretch.iter();
        for ph in &p.phases {
            if let Phase::Parallel { instructions, mix, .. } = ph {
                let s = stretch.next().unwrap();
                let total_tp: f64 = active.iter().map(|c| p.throughput(c, mix)).sum();
                lower += *instructions as f64 / total_tp;
                let slowest = active.iter().map(|c| s / p.throughput(c, mix)).fold(0.0, f64::max);
                upper += ph.chunk_sizes().iter().map(|&k| k as f64 * slowest).sum::<f64>();
            }
        }
        prop_assert!(r.delay_s >= lower * (1.0 - 1e-9), "delay {} below {lower}", r.delay_s);
        prop_assert!(r.delay_s <= upper * (1.0 + 1e-9), "delay {} above {upper}", r.delay_s);
        prop_assert!(r.delay_s >= r.serial_s);
        prop_assert_eq!(r.total_instructions(), p.total_instructions());
        prop_assert_eq!(r.edp_js, r.delay_s * r.energy_j);
        for s in &r.contention_stretch {
            prop_assert!(*s >= 1.0);
        }
        for (d, s) in r.bandwidth_demand_bps.iter().zip(&r.contention_stretch) {
            prop_assert!(d / s <= r.mem_bandwidth_bps * (1.0 + 1e-12));
        }
    }

    #[test]
    fn no_core_idles_while_chunks_wait(reg in registry(), bs in blocks(), c in counts()) {
        let p = profile_of("w", bs.concat());
        let cfg = config(&reg, c);
        let opts = SimOptions { record_trace: true, ..SimOptions::default() };
        let r = simulate_with(&p, &cfg, &reg, &opts).unwrap();
        let trace = r.schedule_trace.unwrap();
        let mut rest = &trace[..];
        for ph in &p.phases {
            let Phase::Parallel { chunk_count, .. } = ph else { continue };
            let (phase, tail) = rest.split_at(*chunk_count as usize);
            rest = tail;
            let phase_start = phase[0].start_s;
            let mut free: Vec<f64> = vec![phase_start; r.per_core.len()];
            for e in phase {
                let earliest = free.iter().copied().fold(f64::INFINITY, f64::min);
                prop_assert_eq!(e.start_s, free[e.core_id]);
                prop_assert!(e.start_s <= earliest, "chunk {} waited while a core was idle", e.chunk_id);
                free[e.core_id] = e.end_s;
            }
        }
        prop_assert!(rest.is_empty());
    }

    #[test]
    fn adding_an_identical_core_never_slows(reg in registry(), bs in blocks(), ty in 0usize..3, n in 1u32..6) {
        let p = profile_of("m", bs.concat());
        let one = |k: u32| SystemConfig::new(vec![Slot::new(NAMES[ty], k)], &reg, f64::MAX).unwrap();
        let a = simulate(&p, &one(n), &reg).unwrap();
        let b = simulate(&p, &one(n + 1), &reg).unwrap();
        prop_assert!(b.delay_s <= a.delay_s * (1.0 + 1e-12), "{} -> {}", a.delay_s, b.delay_s);
    }

    #[test]
    fn energy_is_additive_over_blocks(reg in registry(), bs in blocks(), c in counts(), idle in 0.0..0.5f64) {
        let cfg = config(&reg, c);
        let opts = SimOptions { idle_dynamic_fraction: idle, record_trace: false };
        let whole = profile_of("e", bs.concat());
        // Pin the main core so every piece uses the same one.
        let mix0 = whole.aggregate_mix();
        let pinned = |phases: Vec<Phase>| {
            let mut p = profile_of("e", phases);
            for name in NAMES {
                p.cpi_overrides.insert(name.to_string(), whole.effective_cpi(reg.get(name).unwrap(), &mix0));
            }
            p
        };
        let all = simulate_with(&pinned(bs.concat()), &cfg, &reg, &opts).unwrap();
        let parts: Vec<_> = bs.iter().map(|b| simulate_with(&pinned(b.clone()), &cfg, &reg, &opts).unwrap()).collect();
        let e: f64 = parts.iter().map(|r| r.energy_j).sum();
        let d: f64 = parts.iter().map(|r| r.delay_s).sum();
        prop_assert!(close(all.energy_j, e, 1e-9), "{} vs {e}", all.energy_j);
        prop_assert!(close(all.delay_s, d, 1e-9));
    }

    #[test]
    fn makespan_within_greedy_bound(sizes in prop::collection::vec(0.1..5.0f64, 1..40), speeds in prop::collection::vec(0.25..4.0f64, 1..5)) {
        let durations: Vec<Vec<f64>> = sizes.iter().map(|s| speeds.iter().map(|v| s / v).collect()).collect();
        let sched = schedule_parallel(&durations, speeds.len());
        let work: f64 = sizes.iter().sum();
        let rate: f64 = speeds.iter().sum();
        let dmax = durations.iter().flatten().copied().fold(0.0, f64::max);
        prop_assert!(sched.makespan >= work / rate * (1.0 - 1e-12));
        prop_assert!(sched.makespan <= (work / rate + dmax) * (1.0 + 1e-12));
        let busy_max = sched.busy.iter().copied().fold(0.0, f64::max);
        prop_assert!(close(sched.makespan, busy_max, 1e-12));
    }

    #[test]
    fn pareto_is_idempotent_and_covers(pts in points()) {
        let front = pareto_front(&pts);
        prop_assert_eq!(&pareto_front(&front.0), &front);
        for w in front.0.windows(2) {
            prop_assert!(w[0].delay_s < w[1].delay_s && w[0].energy_j > w[1].energy_j);
        }
        for q in &pts {
            if !front.contains_config(&q.config) {
                prop_assert!(front.0.iter().any(|p| p.dominates(q) || (p.delay_s == q.delay_s && p.energy_j == q.energy_j)));
            }
        }
    }

    #[test]
    fn pareto_names_survive_energy_scaling(pts in points(), k in 0.01..100.0f64) {
        let scaled: Vec<TradePoint> = pts.iter()
            .map(|p| TradePoint::new(p.config.clone(), "w", p.delay_s, p.energy_j * k, 0.0))
            .collect();
        let names = |s: &[TradePoint]| {
            let mut v: Vec<String> = pareto_front(s).0.into_iter().map(|p| p.config).collect();
            v.sort();
            v
        };
        prop_assert_eq!(names(&pts), names(&scaled));
    }

    #[test]
    fn ideal_point_bounds_smp_points(pts in points()) {
        let ideal = ideal_point(&pts).unwrap();
        for p in &pts {
            prop_assert!(ideal.delay_s <= p.delay_s && ideal.energy_j <= p.energy_j);
        }
        prop_assert_eq!(improvement(&pts[0], &pts[0], Metric::Edp).unwrap(), 0.0);
    }
}

/// Greedy self-scheduling on heterogeneous cores can get slower when a slow
/// core is added: the slow core grabs a chunk the fast core would have
/// finished sooner.
#[test]
fn adding_a_slow_core_can_slow_heterogeneous_configs() {
    let fast_only = schedule_parallel(&[vec![1.0], vec![1.0]], 1);
    let with_slow = schedule_parallel(&[vec![1.0, 10.0], vec![1.0, 10.0]], 2);
    assert_eq!(fast_only.makespan, 2.0);
    assert_eq!(with_slow.makespan, 10.0);
}
