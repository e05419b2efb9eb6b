//! Design-space enumeration and the (workload x config) sweep.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_model::CoreRegistry;
use crate::engine::{simulate, SimResult, Slot, SystemConfig, DEFAULT_MEM_BANDWIDTH_BPS};
use crate::error::{ConfigError, Error, SimError};
use crate::metrics::{
    area_of, ideal_point, improvement, iso_edp_samples, pareto_front, IdealPoint, Metric, ParetoSet, TradePoint,
};
use crate::workload::WorkloadProfile;
use crate::SCHEMA_VERSION;

pub const DEFAULT_TOTAL_CORES: u32 = 8;
pub const DEFAULT_BASELINE: &str = "4A7+4A15";
/// Samples per iso-EDP curve in plot data.
pub const ISO_EDP_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// The three homogeneous configs.
    PaperSmp,
    /// 4A7+4A15, 7A7+1A15, 7A9+1A15.
    PaperH2,
    /// Every composition with 1..=6 cores of each type.
    PaperH3,
    /// Every composition, zeros allowed.
    Full,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper-smp" => Ok(Preset::PaperSmp),
            "paper-h2" => Ok(Preset::PaperH2),
            "paper-h3" => Ok(Preset::PaperH3),
            "full" => Ok(Preset::Full),
            other => Err(format!("unknown preset `{other}` (paper-smp, paper-h2, paper-h3, full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constraints {
    pub min: BTreeMap<String, u32>,
    pub max: BTreeMap<String, u32>,
    /// At least one core of the fastest type.
    pub require_big: bool,
    /// Allowed numbers of distinct core types present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<BTreeSet<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DseQuery {
    #[serde(default = "default_total")]
    pub total_cores: u32,
    /// Column order of the count tuple; also the slot declaration order.
    pub core_types: Vec<String>,
    #[serde(default)]
    pub constraints: Constraints,
    /// Profile names to run, in report order. Empty means every profile given.
    #[serde(default)]
    pub workloads: Vec<String>,
    #[serde(default = "default_baseline")]
    pub baseline: String,
    #[serde(default = "default_bandwidth")]
    pub mem_bandwidth_bps: f64,
    /// Fixed list of count tuples; replaces full enumeration when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<Vec<u32>>>,
}

fn default_total() -> u32 {
    DEFAULT_TOTAL_CORES
}

fn default_baseline() -> String {
    DEFAULT_BASELINE.to_string()
}

fn default_bandwidth() -> f64 {
    DEFAULT_MEM_BANDWIDTH_BPS
}

impl DseQuery {
    /// Unconstrained query over every registry type, slowest first.
    pub fn full(cores: &CoreRegistry, total_cores: u32) -> Self {
        DseQuery {
            total_cores,
            core_types: cores.by_ascending_throughput().iter().map(|c| c.name.clone()).collect(),
            constraints: Constraints::default(),
            workloads: Vec::new(),
            baseline: DEFAULT_BASELINE.to_string(),
            mem_bandwidth_bps: DEFAULT_MEM_BANDWIDTH_BPS,
            explicit: None,
        }
    }

    pub fn preset(preset: Preset, cores: &CoreRegistry, total_cores: u32) -> Self {
        let mut q = Self::full(cores, total_cores);
        match preset {
            Preset::Full => {}
            Preset::PaperSmp => q.constraints.levels = Some(BTreeSet::from([1])),
            Preset::PaperH2 => {
                let names = ["4A7+4A15", "7A7+1A15", "7A9+1A15"];
                q.explicit = Some(
                    names
                        .iter()
                        .map(|n| {
                            let cfg = SystemConfig::parse(n, cores).expect("preset names parse");
                            q.core_types.iter().map(|t| cfg.count_of(t)).collect()
                        })
                        .collect(),
                );
            }
            Preset::PaperH3 => {
                let hi = total_cores.saturating_sub(2);
                for t in &q.core_types {
                    q.constraints.min.insert(t.clone(), 1);
                    q.constraints.max.insert(t.clone(), hi);
                }
            }
        }
        q
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::json("query", e))
    }

    fn bounds(&self) -> (Vec<u32>, Vec<u32>) {
        let lo = self
            .core_types
            .iter()
            .map(|t| self.constraints.min.get(t).copied().unwrap_or(0))
            .collect();
        let hi = self
            .core_types
            .iter()
            .map(|t| self.constraints.max.get(t).copied().unwrap_or(self.total_cores))
            .collect();
        (lo, hi)
    }
}

fn compositions(total: u32, lo: &[u32], hi: &[u32], prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let i = prefix.len();
    if i + 1 == lo.len() {
        if (lo[i]..=hi[i]).contains(&total) {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    let rest_min: u32 = lo[i + 1..].iter().sum();
    for n in lo[i]..=hi[i].min(total) {
        if n + rest_min > total {
            break;
        }
        prefix.push(n);
        compositions(total - n, lo, hi, prefix, out);
        prefix.pop();
    }
}

/// Every count tuple meeting the query, in lexicographic order, as configs
/// with one slot per nonzero type.
pub fn enumerate_configs(query: &DseQuery, cores: &CoreRegistry) -> Result<Vec<SystemConfig>, ConfigError> {
    let k = query.core_types.len();
    let err = |m: String| ConfigError::InvalidQuery(m);
    if query.total_cores == 0 {
        return Err(err("total_cores must be >= 1".into()));
    }
    if k == 0 {
        return Err(err("no core types given".into()));
    }
    for (i, t) in query.core_types.iter().enumerate() {
        if !cores.contains(t) {
            return Err(ConfigError::UnknownCoreType(t.clone()));
        }
        if query.core_types[..i].contains(t) {
            return Err(err(format!("core type `{t}` listed twice")));
        }
    }
    for key in query.constraints.min.keys().chain(query.constraints.max.keys()) {
        if !query.core_types.contains(key) {
            return Err(err(format!("constraint names `{key}`, which is not among the query's core types")));
        }
    }
    let (lo, hi) = query.bounds();
    for (i, t) in query.core_types.iter().enumerate() {
        if lo[i] > hi[i] {
            return Err(err(format!("min {} exceeds max {} for `{t}`", lo[i], hi[i])));
        }
    }
    let sum_lo: u32 = lo.iter().sum();
    let sum_hi: u64 = hi.iter().map(|&h| u64::from(h)).sum();
    if sum_lo > query.total_cores {
        return Err(err(format!(
            "sum of minimum counts ({sum_lo}) exceeds total_cores ({})",
            query.total_cores
        )));
    }
    if sum_hi < u64::from(query.total_cores) {
        return Err(err(format!(
            "sum of maximum counts ({sum_hi}) is below total_cores ({})",
            query.total_cores
        )));
    }
    if let Some(levels) = &query.constraints.levels {
        if levels.is_empty() || levels.iter().any(|&l| l == 0 || l > k) {
            return Err(err(format!("heterogeneity levels {levels:?} must be a non-empty subset of 1..={k}")));
        }
    }

    let big = cores
        .by_ascending_throughput()
        .into_iter()
        .rev()
        .find(|c| query.core_types.contains(&c.name))
        .map(|c| query.core_types.iter().position(|t| *t == c.name).unwrap())
        .unwrap();

    let candidates = match &query.explicit {
        Some(list) => {
            for counts in list {
                if counts.len() != k {
                    return Err(err(format!("explicit tuple {counts:?} needs {k} counts")));
                }
            }
            list.clone()
        }
        None => {
            let mut out = Vec::new();
            compositions(query.total_cores, &lo, &hi, &mut Vec::with_capacity(k), &mut out);
            out
        }
    };

    let keep = |counts: &[u32]| {
        let level = counts.iter().filter(|&&n| n > 0).count();
        counts.iter().sum::<u32>() == query.total_cores
            && counts.iter().zip(lo.iter().zip(&hi)).all(|(n, (l, h))| (l..=h).contains(&n))
            && query.constraints.levels.as_ref().is_none_or(|ls| ls.contains(&level))
            && (!query.constraints.require_big || counts[big] >= 1)
    };
    let kept: Vec<Vec<u32>> = candidates.into_iter().filter(|c| keep(c)).collect();
    if kept.is_empty() {
        let mut why = Vec::new();
        if let Some(levels) = &query.constraints.levels {
            why.push(format!("levels {levels:?}"));
        }
        if query.constraints.require_big {
            why.push(format!("require_big (`{}` >= 1)", query.core_types[big]));
        }
        if query.explicit.is_some() {
            why.push("explicit config list".to_string());
        }
        return Err(err(format!(
            "no configuration with {} cores satisfies the constraints ({})",
            query.total_cores,
            why.join(", ")
        )));
    }
    kept.iter()
        .map(|counts| {
            let slots = query
                .core_types
                .iter()
                .zip(counts)
                .filter(|(_, &n)| n > 0)
                .map(|(t, &n)| Slot::new(t.clone(), n))
                .collect();
            SystemConfig::new(slots, cores, query.mem_bandwidth_bps)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRow {
    pub config: String,
    pub counts: Vec<u32>,
    pub level: usize,
    pub delay_s: f64,
    pub energy_j: f64,
    pub edp_js: f64,
    pub area_mm2: f64,
    pub pareto: bool,
    pub best_edp: bool,
    pub impr_edp_vs_baseline_pct: f64,
    pub area_gain_vs_baseline: f64,
    pub max_contention_stretch: f64,
}

impl PointRow {
    pub fn trade_point(&self, workload: &str) -> TradePoint {
        TradePoint {
            config: self.config.clone(),
            workload: workload.to_string(),
            delay_s: self.delay_s,
            energy_j: self.energy_j,
            edp_js: self.edp_js,
            area_mm2: self.area_mm2,
        }
    }
}

/// Best-EDP config against a reference, both as percent and as ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub reference: String,
    pub delay_pct: f64,
    pub energy_pct: f64,
    pub edp_pct: f64,
    /// reference / best
    pub delay_x: f64,
    pub energy_x: f64,
    pub edp_x: f64,
}

impl Comparison {
    fn new(reference: &TradePoint, best: &TradePoint) -> Result<Self, crate::metrics::MetricError> {
        Ok(Comparison {
            reference: reference.config.clone(),
            delay_pct: improvement(reference, best, Metric::Delay)?,
            energy_pct: improvement(reference, best, Metric::Energy)?,
            edp_pct: improvement(reference, best, Metric::Edp)?,
            delay_x: reference.delay_s / best.delay_s,
            energy_x: reference.energy_j / best.energy_j,
            edp_x: reference.edp_js / best.edp_js,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadReport {
    pub workload: String,
    pub points: Vec<PointRow>,
    pub pareto: ParetoSet,
    pub best_edp: String,
    pub baseline: TradePoint,
    /// From the homogeneous configs of the query's core types.
    pub ideal: Option<IdealPoint>,
    /// Homogeneous reference points used for `ideal`.
    pub smp_reference: Vec<TradePoint>,
    pub best_vs_baseline: Comparison,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_vs_ideal_edp_pct: Option<f64>,
}

impl WorkloadReport {
    pub fn point(&self, config: &str) -> Option<&PointRow> {
        self.points.iter().find(|p| p.config == config)
    }

    pub fn best(&self) -> &PointRow {
        self.point(&self.best_edp).expect("best config is among the points")
    }

    pub fn trade_points(&self) -> Vec<TradePoint> {
        self.points.iter().map(|p| p.trade_point(&self.workload)).collect()
    }

    /// Rows of `series,config,delay_s,energy_j,edp_js` for plotting: every
    /// point, the Pareto polyline, the ideal point, and iso-EDP samples at
    /// the best EDP and at the ideal EDP.
    pub fn plot_rows(&self) -> Vec<PlotRow> {
        let mut rows = Vec::new();
        let row = |series: &str, config: &str, d: f64, e: f64| PlotRow {
            series: series.to_string(),
            config: config.to_string(),
            delay_s: d,
            energy_j: e,
            edp_js: d * e,
        };
        for p in &self.points {
            rows.push(PlotRow {
                edp_js: p.edp_js,
                ..row("point", &p.config, p.delay_s, p.energy_j)
            });
        }
        for p in self.pareto.points() {
            rows.push(PlotRow {
                edp_js: p.edp_js,
                ..row("pareto", &p.config, p.delay_s, p.energy_j)
            });
        }
        let mut d_min = self.points.iter().map(|p| p.delay_s).fold(f64::INFINITY, f64::min);
        let mut d_max = self.points.iter().map(|p| p.delay_s).fold(0.0, f64::max);
        if let Some(ideal) = &self.ideal {
            let label = format!("ideal({}/{})", ideal.delay_from, ideal.energy_from);
            rows.push(row("ideal", &label, ideal.delay_s, ideal.energy_j));
            d_min = d_min.min(ideal.delay_s);
            d_max = d_max.max(ideal.delay_s);
        }
        let (lo, hi) = (d_min / 1.25, d_max * 1.25);
        let best = self.best();
        let mut curves = vec![("iso_best", best.config.clone(), best.edp_js)];
        if let Some(ideal) = &self.ideal {
            curves.push(("iso_ideal", "ideal".to_string(), ideal.edp_js()));
        }
        for (series, label, edp) in curves {
            if let Ok(samples) = iso_edp_samples(edp, lo, hi, ISO_EDP_SAMPLES) {
                for (d, e) in samples {
                    rows.push(PlotRow {
                        edp_js: edp,
                        ..row(series, &label, d, e)
                    });
                }
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub series: String,
    pub config: String,
    pub delay_s: f64,
    pub energy_j: f64,
    pub edp_js: f64,
}

pub fn write_plot_csv<W: Write>(rows: &[PlotRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DseReport {
    pub schema_version: u32,
    pub query: DseQuery,
    pub workloads: Vec<WorkloadReport>,
    /// Number of workloads for which each config has the best EDP.
    pub best_edp_tally: BTreeMap<String, usize>,
}

impl DseReport {
    pub fn workload(&self, name: &str) -> Option<&WorkloadReport> {
        self.workloads.iter().find(|w| w.workload == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::json("report", e))
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["workload".to_string(), "config".to_string()];
        h.extend(self.query.core_types.iter().map(|t| format!("n_{}", t.to_lowercase())));
        h.extend(
            [
                "delay_s",
                "energy_j",
                "edp_js",
                "area_mm2",
                "pareto",
                "best_edp",
                "impr_edp_vs_baseline_pct",
                "area_gain_vs_baseline",
            ]
            .map(String::from),
        );
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for wr in &self.workloads {
            for p in &wr.points {
                let mut rec = vec![wr.workload.clone(), p.config.clone()];
                rec.extend(p.counts.iter().map(u32::to_string));
                rec.extend([
                    p.delay_s.to_string(),
                    p.energy_j.to_string(),
                    p.edp_js.to_string(),
                    p.area_mm2.to_string(),
                    u8::from(p.pareto).to_string(),
                    u8::from(p.best_edp).to_string(),
                    p.impr_edp_vs_baseline_pct.to_string(),
                    p.area_gain_vs_baseline.to_string(),
                ]);
                w.write_record(rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn select_profiles<'a>(query: &DseQuery, profiles: &'a [WorkloadProfile]) -> Result<Vec<&'a WorkloadProfile>, ConfigError> {
    if query.workloads.is_empty() {
        if profiles.is_empty() {
            return Err(ConfigError::InvalidQuery("no workload profiles given".into()));
        }
        return Ok(profiles.iter().collect());
    }
    query
        .workloads
        .iter()
        .map(|name| {
            profiles
                .iter()
                .find(|p| &p.name == name)
                .ok_or_else(|| ConfigError::InvalidQuery(format!("workload `{name}` not found among profiles")))
        })
        .collect()
}

/// Simulate every (workload, config) pair and assemble the report. `jobs`
/// sets the worker count (0 = all CPUs); it never affects the output.
pub fn run_dse(query: &DseQuery, cores: &CoreRegistry, profiles: &[WorkloadProfile], jobs: usize) -> Result<DseReport, Error> {
    let selected = select_profiles(query, profiles)?;
    let configs = enumerate_configs(query, cores)?;
    let baseline = SystemConfig::parse(&query.baseline, cores)?.with_bandwidth(query.mem_bandwidth_bps);
    let smp: Vec<SystemConfig> = query
        .core_types
        .iter()
        .map(|t| {
            SystemConfig::new(vec![Slot::new(t.clone(), query.total_cores)], cores, query.mem_bandwidth_bps)
        })
        .collect::<Result<_, _>>()?;

    // Enumerated configs first, then reference configs not already present.
    let mut all: Vec<&SystemConfig> = configs.iter().collect();
    for extra in std::iter::once(&baseline).chain(smp.iter()) {
        if !all.iter().any(|c| c.name == extra.name) {
            all.push(extra);
        }
    }
    let index: BTreeMap<&str, usize> = all.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();

    let pairs: Vec<(usize, usize)> = (0..selected.len())
        .flat_map(|w| (0..all.len()).map(move |c| (w, c)))
        .collect();
    let sim_pair = |&(w, c): &(usize, usize)| {
        simulate(selected[w], all[c], cores).map_err(|e| SimError::Annotated {
            workload: selected[w].name.clone(),
            config: all[c].name.clone(),
            source: Box::new(e),
        })
    };
    let results: Vec<Result<SimResult, SimError>> = if jobs == 1 {
        pairs.iter().map(sim_pair).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool")
            .install(|| pairs.par_iter().map(sim_pair).collect())
    };
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let areas: Vec<f64> = all.iter().map(|c| area_of(c, cores)).collect::<Result<_, _>>()?;
    let base_idx = index[baseline.name.as_str()];
    let base_area = areas[base_idx];

    let mut reports = Vec::with_capacity(selected.len());
    let mut tally = BTreeMap::new();
    for (w, profile) in selected.iter().enumerate() {
        let sim = |c: usize| &results[w * all.len() + c];
        let tp = |c: usize| {
            let r = sim(c);
            TradePoint {
                config: all[c].name.clone(),
                workload: profile.name.clone(),
                delay_s: r.delay_s,
                energy_j: r.energy_j,
                edp_js: r.edp_js,
                area_mm2: areas[c],
            }
        };
        let baseline_tp = tp(base_idx);
        let points: Vec<TradePoint> = (0..configs.len()).map(tp).collect();
        let front = pareto_front(&points);
        let best = (0..points.len())
            .min_by(|&a, &b| points[a].edp_js.total_cmp(&points[b].edp_js).then(a.cmp(&b)))
            .expect("at least one config");
        let smp_reference: Vec<TradePoint> = smp.iter().map(|c| tp(index[c.name.as_str()])).collect();
        let ideal = ideal_point(&smp_reference);

        let rows = points
            .iter()
            .enumerate()
            .map(|(c, p)| {
                Ok(PointRow {
                    config: p.config.clone(),
                    counts: query.core_types.iter().map(|t| configs[c].count_of(t)).collect(),
                    level: configs[c].heterogeneity(),
                    delay_s: p.delay_s,
                    energy_j: p.energy_j,
                    edp_js: p.edp_js,
                    area_mm2: p.area_mm2,
                    pareto: front.contains_config(&p.config),
                    best_edp: c == best,
                    impr_edp_vs_baseline_pct: improvement(&baseline_tp, p, Metric::Edp).map_err(|e| {
                        ConfigError::InvalidQuery(format!("workload `{}`: {e}", profile.name))
                    })?,
                    area_gain_vs_baseline: base_area / p.area_mm2,
                    max_contention_stretch: sim(c).max_stretch(),
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;

        let best_tp = &points[best];
        let best_vs_baseline = Comparison::new(&baseline_tp, best_tp)
            .map_err(|e| ConfigError::InvalidQuery(format!("workload `{}`: {e}", profile.name)))?;
        let best_vs_ideal_edp_pct = ideal.as_ref().and_then(|i| {
            let ideal_tp = TradePoint::new("ideal", &profile.name, i.delay_s, i.energy_j, 0.0);
            improvement(&ideal_tp, best_tp, Metric::Edp).ok()
        });
        *tally.entry(best_tp.config.clone()).or_insert(0) += 1;
        reports.push(WorkloadReport {
            workload: profile.name.clone(),
            points: rows,
            pareto: front,
            best_edp: best_tp.config.clone(),
            baseline: baseline_tp,
            ideal,
            smp_reference,
            best_vs_baseline,
            best_vs_ideal_edp_pct,
        });
    }

    Ok(DseReport {
        schema_version: SCHEMA_VERSION,
        query: query.clone(),
        workloads: reports,
        best_edp_tally: tally,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(cfgs: &[SystemConfig]) -> Vec<String> {
        cfgs.iter().map(|c| c.name.clone()).collect()
    }

    #[test]
    fn stars_and_bars_counts() {
        let reg = CoreRegistry::shipped();
        assert_eq!(enumerate_configs(&DseQuery::full(&reg, 8), &reg).unwrap().len(), 45);
        let mut q = DseQuery::full(&reg, 8);
        for t in ["A7", "A9", "A15"] {
            q.constraints.min.insert(t.into(), 1);
        }
        assert_eq!(enumerate_configs(&q, &reg).unwrap().len(), 21);
    }

    #[test]
    fn presets() {
        let reg = CoreRegistry::shipped();
        let smp = enumerate_configs(&DseQuery::preset(Preset::PaperSmp, &reg, 8), &reg).unwrap();
        let mut n = names(&smp);
        n.sort();
        assert_eq!(n, ["8A15", "8A7", "8A9"]);
        let h2 = enumerate_configs(&DseQuery::preset(Preset::PaperH2, &reg, 8), &reg).unwrap();
        let mut n = names(&h2);
        n.sort();
        assert_eq!(n, ["4A7+4A15", "7A7+1A15", "7A9+1A15"]);
        let h3 = enumerate_configs(&DseQuery::preset(Preset::PaperH3, &reg, 8), &reg).unwrap();
        assert_eq!(h3.len(), 21);
        assert!(names(&h3).contains(&"1A7+1A9+6A15".to_string()));
        assert!(names(&h3).contains(&"6A7+1A9+1A15".to_string()));
    }

    #[test]
    fn lexicographic_order() {
        let reg = CoreRegistry::shipped();
        let cfgs = enumerate_configs(&DseQuery::full(&reg, 2), &reg).unwrap();
        assert_eq!(names(&cfgs), ["2A15", "1A9+1A15", "2A9", "1A7+1A15", "1A7+1A9", "2A7"]);
    }

    #[test]
    fn unsatisfiable_constraints_name_the_cause() {
        let reg = CoreRegistry::shipped();
        let mut q = DseQuery::full(&reg, 8);
        for t in ["A7", "A9", "A15"] {
            q.constraints.min.insert(t.into(), 3);
        }
        let e = enumerate_configs(&q, &reg).unwrap_err().to_string();
        assert!(e.contains("sum of minimum counts (9)"), "{e}");

        let mut q = DseQuery::full(&reg, 8);
        q.constraints.max.insert("A15".into(), 0);
        q.constraints.require_big = true;
        let e = enumerate_configs(&q, &reg).unwrap_err().to_string();
        assert!(e.contains("require_big"), "{e}");

        let mut q = DseQuery::full(&reg, 8);
        q.constraints.min.insert("A9".into(), 5);
        q.constraints.max.insert("A9".into(), 4);
        assert!(enumerate_configs(&q, &reg).unwrap_err().to_string().contains("min 5 exceeds max 4"));
    }

    #[test]
    fn query_json_defaults() {
        let q = DseQuery::from_json(r#"{"core_types":["A7","A15"]}"#).unwrap();
        assert_eq!(q.total_cores, 8);
        assert_eq!(q.baseline, "4A7+4A15");
        assert!(DseQuery::from_json(r#"{"core_types":[],"bogus":1}"#).is_err());
    }
}
