//! Delay / energy trade-off geometry: Pareto fronts, the ideal point,
//! iso-EDP curves, improvements and silicon area.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::core_model::CoreRegistry;
use crate::engine::SystemConfig;
use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradePoint {
    pub config: String,
    pub workload: String,
    pub delay_s: f64,
    pub energy_j: f64,
    pub edp_js: f64,
    pub area_mm2: f64,
}

impl TradePoint {
    /// Builds a point with `edp = delay * energy`.
    pub fn new(config: impl Into<String>, workload: impl Into<String>, delay_s: f64, energy_j: f64, area_mm2: f64) -> Self {
        TradePoint {
            config: config.into(),
            workload: workload.into(),
            delay_s,
            energy_j,
            edp_js: delay_s * energy_j,
            area_mm2,
        }
    }

    /// Weakly better on both axes, strictly better on at least one.
    pub fn dominates(&self, other: &TradePoint) -> bool {
        self.delay_s <= other.delay_s
            && self.energy_j <= other.energy_j
            && (self.delay_s < other.delay_s || self.energy_j < other.energy_j)
    }

    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Delay => self.delay_s,
            Metric::Energy => self.energy_j,
            Metric::Edp => self.edp_js,
        }
    }
}

/// Non-dominated points by ascending delay (energy strictly decreasing).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParetoSet(pub Vec<TradePoint>);

impl ParetoSet {
    pub fn points(&self) -> &[TradePoint] {
        &self.0
    }

    pub fn contains_config(&self, config: &str) -> bool {
        self.0.iter().any(|p| p.config == config)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Non-dominated subset of `points` on (delay, energy). Points equal on both
/// axes collapse to the one with the lexicographically smallest config name.
pub fn pareto_front(points: &[TradePoint]) -> ParetoSet {
    let mut sorted: Vec<&TradePoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.delay_s
            .total_cmp(&b.delay_s)
            .then_with(|| a.energy_j.total_cmp(&b.energy_j))
            .then_with(|| a.config.cmp(&b.config))
    });
    let mut front = Vec::new();
    let mut best_energy = f64::INFINITY;
    for p in sorted {
        if p.energy_j < best_energy {
            best_energy = p.energy_j;
            front.push(p.clone());
        }
    }
    ParetoSet(front)
}

/// Coordinate-wise minimum of homogeneous-configuration points, with the
/// configs that supplied each coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealPoint {
    pub delay_s: f64,
    pub energy_j: f64,
    pub delay_from: String,
    pub energy_from: String,
}

impl IdealPoint {
    pub fn edp_js(&self) -> f64 {
        self.delay_s * self.energy_j
    }
}

/// Returns `None` when `smp_points` is empty. Ties keep the first point.
pub fn ideal_point(smp_points: &[TradePoint]) -> Option<IdealPoint> {
    let first = smp_points.first()?;
    let mut ideal = IdealPoint {
        delay_s: first.delay_s,
        energy_j: first.energy_j,
        delay_from: first.config.clone(),
        energy_from: first.config.clone(),
    };
    for p in &smp_points[1..] {
        if p.delay_s < ideal.delay_s {
            ideal.delay_s = p.delay_s;
            ideal.delay_from = p.config.clone();
        }
        if p.energy_j < ideal.energy_j {
            ideal.energy_j = p.energy_j;
            ideal.energy_from = p.config.clone();
        }
    }
    Some(ideal)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("iso-EDP samples need edp > 0, 0 < d_min < d_max and n >= 2 (got edp={edp}, range=[{d_min}, {d_max}], n={n})")]
    IsoEdpInput { edp: f64, d_min: f64, d_max: f64, n: usize },
    #[error("baseline {metric} is {value}; improvement needs a positive baseline")]
    ZeroBaseline { metric: Metric, value: f64 },
}

/// `n` points of constant `edp` with delay log-spaced over `[d_min, d_max]`.
/// The endpoints are exactly `d_min` and `d_max`.
pub fn iso_edp_samples(edp: f64, d_min: f64, d_max: f64, n: usize) -> Result<Vec<(f64, f64)>, MetricError> {
    let valid = edp.is_finite() && edp > 0.0 && d_min > 0.0 && d_min < d_max && d_max.is_finite() && n >= 2;
    if !valid {
        return Err(MetricError::IsoEdpInput { edp, d_min, d_max, n });
    }
    let (lo, hi) = (d_min.ln(), d_max.ln());
    let last = n - 1;
    Ok((0..n)
        .map(|i| {
            let d = match i {
                0 => d_min,
                i if i == last => d_max,
                i => (lo + (hi - lo) * i as f64 / last as f64).exp(),
            };
            (d, edp / d)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Delay,
    Energy,
    Edp,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Delay => "delay",
            Metric::Energy => "energy",
            Metric::Edp => "edp",
        })
    }
}

/// Percent by which `candidate` beats `baseline` on `metric`; negative when
/// it is worse.
pub fn improvement(baseline: &TradePoint, candidate: &TradePoint, metric: Metric) -> Result<f64, MetricError> {
    let b = baseline.value(metric);
    if b.is_nan() || b <= 0.0 {
        return Err(MetricError::ZeroBaseline { metric, value: b });
    }
    Ok(100.0 * (b - candidate.value(metric)) / b)
}

/// Silicon area of every core instance, including power-gated ones.
pub fn area_of(config: &SystemConfig, cores: &CoreRegistry) -> Result<f64, ConfigError> {
    config.slots.iter().try_fold(0.0, |acc, s| {
        let spec = cores
            .get(&s.core_type)
            .ok_or_else(|| ConfigError::UnknownCoreType(s.core_type.clone()))?;
        Ok(acc + f64::from(s.count) * spec.area_mm2)
    })
}

/// `area(baseline) / area(candidate)`: how many times smaller the candidate is.
pub fn area_gain(baseline: &SystemConfig, candidate: &SystemConfig, cores: &CoreRegistry) -> Result<f64, ConfigError> {
    Ok(area_of(baseline, cores)? / area_of(candidate, cores)?)
}
