//! Profiled workloads: a phase sequence (serial master thread, chunked
//! parallel regions, barriers) with instruction mixes and optional measured
//! per-core-type CPI.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core_model::{ClassTable, ClassTableDoc, CoreRegistry, CoreTypeSpec, InstructionClass};
use crate::error::ConfigError;
use crate::SCHEMA_VERSION;

/// Chunk count used when a parallel phase does not specify one.
pub const DEFAULT_CHUNK_COUNT: u32 = 512;

/// Largest deviation of a mix sum from 1 that is accepted (and renormalised).
pub const MIX_SUM_TOLERANCE: f64 = 1e-6;

// Sums closer to 1 than this are kept bit-for-bit so reloading is exact.
const MIX_RENORMALIZE_THRESHOLD: f64 = 1e-12;

/// Fraction of dynamic instructions per class. Fractions lie in [0, 1] and
/// sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstructionMix(ClassTable);

impl InstructionMix {
    pub fn new(fractions: ClassTable) -> Result<Self, String> {
        for (class, f) in fractions.iter() {
            if !(f.is_finite() && (0.0..=1.0).contains(&f)) {
                return Err(format!("mix fraction {class} = {f} is outside [0, 1]"));
            }
        }
        let sum = fractions.sum();
        let dev = (sum - 1.0).abs();
        if dev > MIX_SUM_TOLERANCE {
            return Err(format!("mix fractions sum to {sum}, expected 1"));
        }
        if dev > MIX_RENORMALIZE_THRESHOLD {
            return Ok(InstructionMix(fractions.scaled(1.0 / sum)));
        }
        Ok(InstructionMix(fractions))
    }

    /// A mix made entirely of one class.
    pub fn pure(class: InstructionClass) -> Self {
        let mut t = ClassTable::default();
        t[class] = 1.0;
        InstructionMix(t)
    }

    pub fn fractions(&self) -> &ClassTable {
        &self.0
    }

    pub fn get(&self, class: InstructionClass) -> f64 {
        self.0[class]
    }

    /// MemRead + MemWrite share.
    pub fn memory_fraction(&self) -> f64 {
        self.0[InstructionClass::MemRead] + self.0[InstructionClass::MemWrite]
    }

    /// Convex combination `alpha * self + (1 - alpha) * other`.
    pub fn blend(&self, other: &InstructionMix, alpha: f64) -> InstructionMix {
        let mut t = ClassTable::default();
        for class in InstructionClass::ALL {
            t[class] = alpha * self.0[class] + (1.0 - alpha) * other.0[class];
        }
        InstructionMix(t)
    }

    fn from_doc(doc: &ClassTableDoc) -> Result<Self, String> {
        let mut t = ClassTable::default();
        for class in InstructionClass::ALL {
            t[class] = doc.get(class).unwrap_or(0.0);
        }
        Self::new(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseKind {
    Serial,
    Parallel,
    Sync,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    /// Master-thread execution on the main core.
    Serial { instructions: u64, mix: InstructionMix },
    /// A loop split into `chunk_count` self-scheduled chunks.
    Parallel {
        instructions: u64,
        chunk_count: u32,
        mix: InstructionMix,
    },
    /// Barrier of fixed duration; every enabled core idles.
    Sync { duration_s: f64 },
}

impl Phase {
    pub fn kind(&self) -> PhaseKind {
        match self {
            Phase::Serial { .. } => PhaseKind::Serial,
            Phase::Parallel { .. } => PhaseKind::Parallel,
            Phase::Sync { .. } => PhaseKind::Sync,
        }
    }

    pub fn instructions(&self) -> u64 {
        match *self {
            Phase::Serial { instructions, .. } | Phase::Parallel { instructions, .. } => instructions,
            Phase::Sync { .. } => 0,
        }
    }

    pub fn mix(&self) -> Option<&InstructionMix> {
        match self {
            Phase::Serial { mix, .. } | Phase::Parallel { mix, .. } => Some(mix),
            Phase::Sync { .. } => None,
        }
    }

    /// Instruction count of each chunk of a parallel phase. All chunks get
    /// `instructions / chunk_count`; the last one absorbs the remainder.
    pub fn chunk_sizes(&self) -> Vec<u64> {
        match *self {
            Phase::Parallel {
                instructions,
                chunk_count,
                ..
            } => {
                let k = u64::from(chunk_count);
                let base = instructions / k;
                let mut sizes = vec![base; chunk_count as usize];
                if let Some(last) = sizes.last_mut() {
                    *last = instructions - base * (k - 1);
                }
                sizes
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProfile {
    pub name: String,
    pub dwarf: String,
    pub bottleneck: String,
    pub notes: Option<String>,
    /// Measured effective CPI per core-type name, applied to every phase.
    pub cpi_overrides: BTreeMap<String, f64>,
    pub phases: Vec<Phase>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseDoc {
    kind: PhaseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    instructions: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chunk_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mix: Option<ClassTableDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    #[serde(default = "schema_v1")]
    schema_version: u32,
    name: String,
    #[serde(default)]
    dwarf: String,
    #[serde(default)]
    bottleneck: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    #[serde(default)]
    cpi_overrides: BTreeMap<String, f64>,
    phases: Vec<PhaseDoc>,
}

fn schema_v1() -> u32 {
    SCHEMA_VERSION
}

fn phase_from_doc(profile: &str, index: usize, doc: PhaseDoc) -> Result<Phase, ConfigError> {
    let bad = |reason: String| ConfigError::InvalidPhase {
        profile: profile.to_string(),
        phase: index,
        reason,
    };
    let counted = |doc: &PhaseDoc| -> Result<(u64, InstructionMix), ConfigError> {
        if doc.duration_s.is_some() {
            return Err(bad(format!("{:?} phase takes `instructions`, not `duration_s`", doc.kind)));
        }
        let instructions = doc
            .instructions
            .ok_or_else(|| bad("missing `instructions`".into()))?;
        if instructions == 0 {
            return Err(bad("`instructions` must be > 0".into()));
        }
        let mix = doc.mix.as_ref().ok_or_else(|| bad("missing `mix`".into()))?;
        let mix = InstructionMix::from_doc(mix).map_err(bad)?;
        Ok((instructions, mix))
    };
    match doc.kind {
        PhaseKind::Serial => {
            if doc.chunk_count.is_some() {
                return Err(bad("`chunk_count` only applies to Parallel phases".into()));
            }
            let (instructions, mix) = counted(&doc)?;
            Ok(Phase::Serial { instructions, mix })
        }
        PhaseKind::Parallel => {
            let (instructions, mix) = counted(&doc)?;
            let chunk_count = doc.chunk_count.unwrap_or(DEFAULT_CHUNK_COUNT);
            if chunk_count == 0 {
                return Err(bad("`chunk_count` must be >= 1".into()));
            }
            if u64::from(chunk_count) > instructions {
                return Err(bad(format!(
                    "`chunk_count` {chunk_count} exceeds `instructions` {instructions}"
                )));
            }
            Ok(Phase::Parallel {
                instructions,
                chunk_count,
                mix,
            })
        }
        PhaseKind::Sync => {
            if doc.instructions.is_some() || doc.mix.is_some() || doc.chunk_count.is_some() {
                return Err(bad("Sync phase takes only `duration_s`".into()));
            }
            let duration_s = doc
                .duration_s
                .ok_or_else(|| bad("missing `duration_s`".into()))?;
            if !(duration_s.is_finite() && duration_s >= 0.0) {
                return Err(bad(format!("`duration_s` must be finite and >= 0 (got {duration_s})")));
            }
            Ok(Phase::Sync { duration_s })
        }
    }
}

fn phase_to_doc(phase: &Phase) -> PhaseDoc {
    match phase {
        Phase::Serial { instructions, mix } => PhaseDoc {
            kind: PhaseKind::Serial,
            instructions: Some(*instructions),
            duration_s: None,
            chunk_count: None,
            mix: Some(ClassTableDoc::from_table(mix.fractions())),
        },
        Phase::Parallel {
            instructions,
            chunk_count,
            mix,
        } => PhaseDoc {
            kind: PhaseKind::Parallel,
            instructions: Some(*instructions),
            duration_s: None,
            chunk_count: Some(*chunk_count),
            mix: Some(ClassTableDoc::from_table(mix.fractions())),
        },
        Phase::Sync { duration_s } => PhaseDoc {
            kind: PhaseKind::Sync,
            instructions: None,
            duration_s: Some(*duration_s),
            chunk_count: None,
            mix: None,
        },
    }
}

/// Parse and validate a profile document. When `cores` is given, every
/// `cpi_overrides` key must name one of its core types.
pub fn load_profile(text: &str, cores: Option<&CoreRegistry>) -> Result<WorkloadProfile, ConfigError> {
    let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| ConfigError::json("profile", e))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::SchemaVersion {
            found: doc.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let name = doc.name;
    let invalid = |reason: String| ConfigError::InvalidProfile {
        profile: name.clone(),
        reason,
    };
    if name.trim().is_empty() {
        return Err(invalid("name must not be empty".into()));
    }
    if doc.phases.is_empty() {
        return Err(ConfigError::EmptyPhases { profile: name });
    }
    for (core, &cpi) in &doc.cpi_overrides {
        if !(cpi.is_finite() && cpi > 0.0) {
            return Err(invalid(format!("cpi override for `{core}` must be > 0 (got {cpi})")));
        }
        if let Some(reg) = cores {
            if !reg.contains(core) {
                return Err(invalid(format!("cpi override names unknown core type `{core}`")));
            }
        }
    }
    let phases = doc
        .phases
        .into_iter()
        .enumerate()
        .map(|(i, p)| phase_from_doc(&name, i, p))
        .collect::<Result<Vec<_>, _>>()?;
    let first_serial = phases.iter().position(|p| p.kind() == PhaseKind::Serial);
    let first_parallel = phases.iter().position(|p| p.kind() == PhaseKind::Parallel);
    if let (Some(s), Some(p)) = (first_serial, first_parallel) {
        if s > p {
            return Err(invalid(format!(
                "first Serial phase ({s}) must precede the first Parallel phase ({p})"
            )));
        }
    }
    Ok(WorkloadProfile {
        name,
        dwarf: doc.dwarf,
        bottleneck: doc.bottleneck,
        notes: doc.notes,
        cpi_overrides: doc.cpi_overrides,
        phases,
    })
}

impl WorkloadProfile {
    pub fn load(path: impl AsRef<Path>, cores: Option<&CoreRegistry>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        load_profile(&text, cores).map_err(|e| match e {
            ConfigError::Json { source, .. } => ConfigError::json(path.display().to_string(), source),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = ProfileDoc {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            dwarf: self.dwarf.clone(),
            bottleneck: self.bottleneck.clone(),
            notes: self.notes.clone(),
            cpi_overrides: self.cpi_overrides.clone(),
            phases: self.phases.iter().map(phase_to_doc).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("profile serializes")
    }

    pub fn total_instructions(&self) -> u64 {
        self.phases.iter().map(Phase::instructions).sum()
    }

    pub fn cpi_override(&self, core: &str) -> Option<f64> {
        self.cpi_overrides.get(core).copied()
    }

    /// Effective CPI of `core` on `mix`, honouring this profile's overrides.
    pub fn effective_cpi(&self, core: &CoreTypeSpec, mix: &InstructionMix) -> f64 {
        core.effective_cpi(mix, self.cpi_override(&core.name))
    }

    pub fn throughput(&self, core: &CoreTypeSpec, mix: &InstructionMix) -> f64 {
        core.throughput(mix, self.cpi_override(&core.name))
    }

    /// Instruction-weighted mix over all Serial and Parallel phases.
    pub fn aggregate_mix(&self) -> InstructionMix {
        let total = self.total_instructions();
        let mut t = ClassTable::default();
        if total == 0 {
            return InstructionMix::pure(InstructionClass::Other);
        }
        for phase in &self.phases {
            if let Some(mix) = phase.mix() {
                let w = phase.instructions() as f64 / total as f64;
                for class in InstructionClass::ALL {
                    t[class] += w * mix.get(class);
                }
            }
        }
        InstructionMix(t)
    }

    /// Seconds the profile would take on a single `core`, split into
    /// (serial, parallel, sync).
    pub fn single_core_times(&self, core: &CoreTypeSpec) -> (f64, f64, f64) {
        let (mut serial, mut parallel, mut sync) = (0.0, 0.0, 0.0);
        for phase in &self.phases {
            match phase {
                Phase::Serial { instructions, mix } => {
                    serial += *instructions as f64 * self.effective_cpi(core, mix) / core.frequency_hz;
                }
                Phase::Parallel { instructions, mix, .. } => {
                    parallel += *instructions as f64 * self.effective_cpi(core, mix) / core.frequency_hz;
                }
                Phase::Sync { duration_s } => sync += duration_s,
            }
        }
        (serial, parallel, sync)
    }
}

/// Share of single-core execution time spent in Serial phases on
/// `reference`.
pub fn serial_fraction(profile: &WorkloadProfile, reference: &CoreTypeSpec) -> f64 {
    let (serial, parallel, sync) = profile.single_core_times(reference);
    let total = serial + parallel + sync;
    if total > 0.0 {
        serial / total
    } else {
        0.0
    }
}
