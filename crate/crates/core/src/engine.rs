//! Deterministic simulation of one workload on one system configuration.
//!
//! Serial phases run on the main core (the enabled core with the highest
//! throughput for the profile). Parallel phases are split into chunks that
//! are handed, in index order, to whichever core frees up first. Sync phases
//! idle every enabled core for a fixed time. When the aggregate memory
//! demand of a parallel phase exceeds the bandwidth cap, every chunk
//! duration of that phase is stretched by `demand / cap`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core_model::{CoreRegistry, CoreTypeSpec};
use crate::error::{ConfigError, SimError};
use crate::workload::{InstructionMix, Phase, WorkloadProfile};
use crate::SCHEMA_VERSION;

/// Shared DRAM bandwidth available to all cores, bytes per second.
pub const DEFAULT_MEM_BANDWIDTH_BPS: f64 = 25.6e9;
pub const DEFAULT_L2_PER_CLUSTER_BYTES: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slot {
    #[serde(rename = "type")]
    pub core_type: String,
    pub count: u32,
    /// Power-gated cores of this slot. They draw nothing and run nothing.
    #[serde(default)]
    pub disabled: u32,
}

impl Slot {
    pub fn new(core_type: impl Into<String>, count: u32) -> Self {
        Slot {
            core_type: core_type.into(),
            count,
            disabled: 0,
        }
    }

    pub fn enabled(&self) -> u32 {
        self.count - self.disabled
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Canonical `xAt+yAu+...` name over enabled cores.
    pub name: String,
    pub slots: Vec<Slot>,
    pub mem_bandwidth_bps: f64,
    /// Annotation only.
    pub l2_per_cluster_bytes: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    #[serde(default = "schema_v1")]
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    slots: Vec<Slot>,
    #[serde(default = "default_bandwidth")]
    mem_bandwidth_bps: f64,
    #[serde(default = "default_l2")]
    l2_per_cluster_bytes: u64,
}

fn schema_v1() -> u32 {
    SCHEMA_VERSION
}

fn default_bandwidth() -> f64 {
    DEFAULT_MEM_BANDWIDTH_BPS
}

fn default_l2() -> u64 {
    DEFAULT_L2_PER_CLUSTER_BYTES
}

/// Canonical name: enabled counts per type, slowest type first (IntAlu-only
/// throughput), zero counts omitted. `"none"` when nothing is enabled.
pub fn canonical_name(slots: &[Slot], cores: &CoreRegistry) -> String {
    let parts: Vec<String> = cores
        .by_ascending_throughput()
        .into_iter()
        .filter_map(|spec| {
            let n: u32 = slots
                .iter()
                .filter(|s| s.core_type == spec.name)
                .map(Slot::enabled)
                .sum();
            (n > 0).then(|| format!("{n}{}", spec.name))
        })
        .collect();
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join("+")
    }
}

impl SystemConfig {
    pub fn new(slots: Vec<Slot>, cores: &CoreRegistry, mem_bandwidth_bps: f64) -> Result<Self, ConfigError> {
        let provisional = slots
            .iter()
            .map(|s| format!("{}{}", s.count, s.core_type))
            .collect::<Vec<_>>()
            .join("+");
        let invalid = |reason: String| ConfigError::InvalidSystem {
            system: provisional.clone(),
            reason,
        };
        for s in &slots {
            if !cores.contains(&s.core_type) {
                return Err(invalid(format!("unknown core type `{}`", s.core_type)));
            }
            if s.disabled > s.count {
                return Err(invalid(format!(
                    "slot `{}` disables {} of {} cores",
                    s.core_type, s.disabled, s.count
                )));
            }
        }
        if !(mem_bandwidth_bps.is_finite() && mem_bandwidth_bps > 0.0) {
            return Err(invalid(format!("mem_bandwidth_bps must be > 0 (got {mem_bandwidth_bps})")));
        }
        Ok(SystemConfig {
            name: canonical_name(&slots, cores),
            slots,
            mem_bandwidth_bps,
            l2_per_cluster_bytes: DEFAULT_L2_PER_CLUSTER_BYTES,
        })
    }

    /// One slot per `(type, count)` pair, in the given order.
    pub fn from_counts(counts: &[(&str, u32)], cores: &CoreRegistry) -> Result<Self, ConfigError> {
        let slots = counts.iter().map(|&(t, n)| Slot::new(t, n)).collect();
        Self::new(slots, cores, DEFAULT_MEM_BANDWIDTH_BPS)
    }

    /// Parse a canonical-style name such as `"2A7+5A9+1A15"`.
    pub fn parse(name: &str, cores: &CoreRegistry) -> Result<Self, ConfigError> {
        let bad = |reason: String| ConfigError::InvalidSystem {
            system: name.to_string(),
            reason,
        };
        let mut slots = Vec::new();
        for part in name.split('+') {
            let digits = part.chars().take_while(|c| c.is_ascii_digit()).count();
            if digits == 0 || digits == part.len() {
                return Err(bad(format!("cannot parse `{part}` as <count><type>")));
            }
            let count: u32 = part[..digits]
                .parse()
                .map_err(|_| bad(format!("bad count in `{part}`")))?;
            slots.push(Slot::new(&part[digits..], count));
        }
        Self::new(slots, cores, DEFAULT_MEM_BANDWIDTH_BPS)
    }

    pub fn from_json(text: &str, cores: &CoreRegistry) -> Result<Self, ConfigError> {
        let doc: SystemDoc =
            serde_json::from_str(text).map_err(|e| ConfigError::json("system file", e))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                found: doc.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let mut cfg = Self::new(doc.slots, cores, doc.mem_bandwidth_bps)?;
        cfg.l2_per_cluster_bytes = doc.l2_per_cluster_bytes;
        if let Some(given) = doc.name {
            if given != cfg.name && cfg.enabled_cores() > 0 {
                return Err(ConfigError::InvalidSystem {
                    system: given,
                    reason: format!("name does not match canonical name `{}`", cfg.name),
                });
            }
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, cores: &CoreRegistry) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, cores).map_err(|e| match e {
            ConfigError::Json { source, .. } => ConfigError::json(path.display().to_string(), source),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = SystemDoc {
            schema_version: SCHEMA_VERSION,
            name: Some(self.name.clone()),
            slots: self.slots.clone(),
            mem_bandwidth_bps: self.mem_bandwidth_bps,
            l2_per_cluster_bytes: self.l2_per_cluster_bytes,
        };
        serde_json::to_string_pretty(&doc).expect("system serializes")
    }

    pub fn enabled_cores(&self) -> u32 {
        self.slots.iter().map(Slot::enabled).sum()
    }

    /// Total (enabled + disabled) cores of `core_type`.
    pub fn count_of(&self, core_type: &str) -> u32 {
        self.slots
            .iter()
            .filter(|s| s.core_type == core_type)
            .map(|s| s.count)
            .sum()
    }

    /// Number of distinct core types with at least one enabled core.
    pub fn heterogeneity(&self) -> usize {
        let mut types: Vec<&str> = self
            .slots
            .iter()
            .filter(|s| s.enabled() > 0)
            .map(|s| s.core_type.as_str())
            .collect();
        types.sort_unstable();
        types.dedup();
        types.len()
    }

    pub fn with_bandwidth(mut self, bps: f64) -> Self {
        self.mem_bandwidth_bps = bps;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Fraction of dynamic power charged during Sync phases (barrier spin).
    pub idle_dynamic_fraction: f64,
    pub record_trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            idle_dynamic_fraction: 0.0,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreUsage {
    pub core_id: usize,
    pub core_type: String,
    pub busy_s: f64,
    pub idle_s: f64,
    pub instructions_executed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEntry {
    pub chunk_id: u64,
    pub core_id: usize,
    pub core_type: String,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimResult {
    pub schema_version: u32,
    pub workload: String,
    pub config: String,
    pub delay_s: f64,
    pub energy_j: f64,
    pub edp_js: f64,
    /// Core id that ran the Serial phases.
    pub main_core: usize,
    /// Time spent in Serial phases on the main core.
    pub serial_s: f64,
    pub sync_s: f64,
    pub per_core: Vec<CoreUsage>,
    /// One entry per Parallel phase, in phase order.
    pub contention_stretch: Vec<f64>,
    pub bandwidth_demand_bps: Vec<f64>,
    pub mem_bandwidth_bps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_trace: Option<Vec<TraceEntry>>,
}

impl SimResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::json("result", e))
    }

    pub fn total_instructions(&self) -> u64 {
        self.per_core.iter().map(|c| c.instructions_executed).sum()
    }

    pub fn max_stretch(&self) -> f64 {
        self.contention_stretch.iter().copied().fold(1.0, f64::max)
    }
}

pub fn write_trace_csv<W: Write>(trace: &[TraceEntry], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["chunk_id", "core_id", "core_type", "start_s", "end_s"])?;
    for e in trace {
        w.write_record([
            e.chunk_id.to_string(),
            e.core_id.to_string(),
            e.core_type.clone(),
            e.start_s.to_string(),
            e.end_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of self-scheduling one parallel phase. Times are relative to the
/// phase start.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelSchedule {
    /// Core index per chunk.
    pub assignment: Vec<usize>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Sum of chunk durations per core.
    pub busy: Vec<f64>,
    pub makespan: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct FreeAt {
    time: f64,
    core: usize,
}

impl Eq for FreeAt {}

impl Ord for FreeAt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.core.cmp(&other.core))
    }
}

impl PartialOrd for FreeAt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy self-scheduling. `durations[chunk][core]` is the time chunk
/// `chunk` takes on core `core`. Chunks are dispatched in index order to the
/// core with the smallest next-free time; ties go to the lowest core index.
pub fn schedule_parallel(durations: &[Vec<f64>], n_cores: usize) -> ParallelSchedule {
    assert!(n_cores > 0, "schedule_parallel needs at least one core");
    let mut heap: BinaryHeap<Reverse<FreeAt>> =
        (0..n_cores).map(|core| Reverse(FreeAt { time: 0.0, core })).collect();
    let mut s = ParallelSchedule {
        assignment: Vec::with_capacity(durations.len()),
        start: Vec::with_capacity(durations.len()),
        end: Vec::with_capacity(durations.len()),
        busy: vec![0.0; n_cores],
        makespan: 0.0,
    };
    for row in durations {
        let Reverse(free) = heap.pop().expect("heap holds every core");
        let d = row[free.core];
        let end = free.time + d;
        s.assignment.push(free.core);
        s.start.push(free.time);
        s.end.push(end);
        s.busy[free.core] += d;
        s.makespan = s.makespan.max(end);
        heap.push(Reverse(FreeAt {
            time: end,
            core: free.core,
        }));
    }
    s
}

/// Aggregate memory traffic the `active` cores would generate on `mix`
/// without any throttling.
pub fn bandwidth_demand(profile: &WorkloadProfile, active: &[&CoreTypeSpec], mix: &InstructionMix) -> f64 {
    let mem = mix.memory_fraction();
    active
        .iter()
        .map(|c| profile.throughput(c, mix) * mem * c.bytes_per_mem_instr)
        .sum()
}

/// Slowdown applied to every chunk of a phase whose demand exceeds the cap.
pub fn contention_stretch(demand_bps: f64, cap_bps: f64) -> f64 {
    if demand_bps <= cap_bps {
        1.0
    } else {
        demand_bps / cap_bps
    }
}

/// Static power over the whole run for every listed (enabled) core, plus
/// dynamic power while busy, plus `idle_dynamic_fraction` of dynamic power
/// during barriers.
pub fn energy_of(
    per_core: &[CoreUsage],
    delay_s: f64,
    sync_s: f64,
    cores: &CoreRegistry,
    options: &SimOptions,
) -> Result<f64, SimError> {
    per_core.iter().try_fold(0.0, |acc, u| {
        let spec = cores
            .get(&u.core_type)
            .ok_or_else(|| SimError::UnknownCoreType(u.core_type.clone()))?;
        Ok(acc
            + spec.static_power_w * delay_s
            + spec.dynamic_power_w * u.busy_s
            + options.idle_dynamic_fraction * spec.dynamic_power_w * sync_s)
    })
}

/// Enabled core instances in declaration order.
pub fn enabled_cores<'a>(config: &SystemConfig, cores: &'a CoreRegistry) -> Result<Vec<&'a CoreTypeSpec>, SimError> {
    let mut out = Vec::new();
    for slot in &config.slots {
        let spec = cores
            .get(&slot.core_type)
            .ok_or_else(|| SimError::UnknownCoreType(slot.core_type.clone()))?;
        out.extend(std::iter::repeat_n(spec, slot.enabled() as usize));
    }
    if out.is_empty() {
        return Err(SimError::NoEnabledCores(config.name.clone()));
    }
    Ok(out)
}

/// Index of the enabled core with the highest throughput on the profile's
/// aggregate mix; ties go to the earliest declared core.
pub fn main_core(profile: &WorkloadProfile, active: &[&CoreTypeSpec]) -> usize {
    let mix = profile.aggregate_mix();
    let mut best = 0;
    let mut best_tp = f64::NEG_INFINITY;
    for (i, c) in active.iter().enumerate() {
        let tp = profile.throughput(c, &mix);
        if tp > best_tp {
            best = i;
            best_tp = tp;
        }
    }
    best
}

pub fn simulate(profile: &WorkloadProfile, config: &SystemConfig, cores: &CoreRegistry) -> Result<SimResult, SimError> {
    simulate_with(profile, config, cores, &SimOptions::default())
}

pub fn simulate_with(
    profile: &WorkloadProfile,
    config: &SystemConfig,
    cores: &CoreRegistry,
    options: &SimOptions,
) -> Result<SimResult, SimError> {
    let active = enabled_cores(config, cores)?;
    let n = active.len();
    let main = main_core(profile, &active);

    let mut now = 0.0_f64;
    let mut serial_s = 0.0;
    let mut sync_s = 0.0;
    let mut busy = vec![0.0_f64; n];
    let mut executed = vec![0_u64; n];
    let mut stretches = Vec::new();
    let mut demands = Vec::new();
    let mut trace = options.record_trace.then(Vec::new);
    let mut next_chunk_id = 0_u64;

    for phase in &profile.phases {
        match phase {
            Phase::Serial { instructions, mix } => {
                let spec = active[main];
                let d = *instructions as f64 * profile.effective_cpi(spec, mix) / spec.frequency_hz;
                busy[main] += d;
                executed[main] += instructions;
                serial_s += d;
                now += d;
            }
            Phase::Parallel { mix, .. } => {
                let demand = bandwidth_demand(profile, &active, mix);
                let stretch = contention_stretch(demand, config.mem_bandwidth_bps);
                demands.push(demand);
                stretches.push(stretch);

                let secs_per_instr: Vec<f64> = active
                    .iter()
                    .map(|c| profile.effective_cpi(c, mix) / c.frequency_hz)
                    .collect();
                let sizes = phase.chunk_sizes();
                let durations: Vec<Vec<f64>> = sizes
                    .iter()
                    .map(|&k| secs_per_instr.iter().map(|s| k as f64 * s * stretch).collect())
                    .collect();
                let sched = schedule_parallel(&durations, n);
                for (i, b) in sched.busy.iter().enumerate() {
                    busy[i] += b;
                }
                for (chunk, &core) in sched.assignment.iter().enumerate() {
                    executed[core] += sizes[chunk];
                }
                if let Some(trace) = trace.as_mut() {
                    for chunk in 0..sizes.len() {
                        let core = sched.assignment[chunk];
                        trace.push(TraceEntry {
                            chunk_id: next_chunk_id + chunk as u64,
                            core_id: core,
                            core_type: active[core].name.clone(),
                            start_s: now + sched.start[chunk],
                            end_s: now + sched.end[chunk],
                        });
                    }
                }
                next_chunk_id += sizes.len() as u64;
                now += sched.makespan;
            }
            Phase::Sync { duration_s } => {
                sync_s += duration_s;
                now += duration_s;
            }
        }
    }

    let delay = now;
    let per_core: Vec<CoreUsage> = active
        .iter()
        .enumerate()
        .map(|(i, c)| CoreUsage {
            core_id: i,
            core_type: c.name.clone(),
            busy_s: busy[i],
            idle_s: delay - busy[i],
            instructions_executed: executed[i],
        })
        .collect();
    let energy = energy_of(&per_core, delay, sync_s, cores, options)?;

    Ok(SimResult {
        schema_version: SCHEMA_VERSION,
        workload: profile.name.clone(),
        config: config.name.clone(),
        delay_s: delay,
        energy_j: energy,
        edp_js: energy * delay,
        main_core: main,
        serial_s,
        sync_s,
        per_core,
        contention_stretch: stretches,
        bandwidth_demand_bps: demands,
        mem_bandwidth_bps: config.mem_bandwidth_bps,
        schedule_trace: trace,
    })
}
