//! Core types: per-class CPI tables, power and area parameters, and the
//! registry that loads them from a core-definition file.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::workload::InstructionMix;
use crate::SCHEMA_VERSION;

/// Dynamic instruction classes tracked by profiles and CPI tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InstructionClass {
    IntAlu,
    SimdFloat,
    MemRead,
    MemWrite,
    Other,
}

impl InstructionClass {
    pub const ALL: [InstructionClass; 5] = [
        InstructionClass::IntAlu,
        InstructionClass::SimdFloat,
        InstructionClass::MemRead,
        InstructionClass::MemWrite,
        InstructionClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InstructionClass::IntAlu => "IntAlu",
            InstructionClass::SimdFloat => "SimdFloat",
            InstructionClass::MemRead => "MemRead",
            InstructionClass::MemWrite => "MemWrite",
            InstructionClass::Other => "Other",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn is_memory(self) -> bool {
        matches!(self, InstructionClass::MemRead | InstructionClass::MemWrite)
    }
}

impl fmt::Display for InstructionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One `f64` per instruction class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassTable([f64; 5]);

impl ClassTable {
    pub const fn new(values: [f64; 5]) -> Self {
        ClassTable(values)
    }

    pub fn splat(value: f64) -> Self {
        ClassTable([value; 5])
    }

    pub fn iter(&self) -> impl Iterator<Item = (InstructionClass, f64)> + '_ {
        InstructionClass::ALL.iter().map(move |&c| (c, self[c]))
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        ClassTable(self.0.map(|v| v * k))
    }
}

impl Index<InstructionClass> for ClassTable {
    type Output = f64;

    fn index(&self, class: InstructionClass) -> &f64 {
        &self.0[class.index()]
    }
}

impl IndexMut<InstructionClass> for ClassTable {
    fn index_mut(&mut self, class: InstructionClass) -> &mut f64 {
        &mut self.0[class.index()]
    }
}

/// Class-keyed JSON object. All keys optional at this layer; callers decide
/// whether a missing key is an error (CPI tables) or zero (mixes).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ClassTableDoc {
    #[serde(rename = "IntAlu", default, skip_serializing_if = "Option::is_none")]
    int_alu: Option<f64>,
    #[serde(rename = "SimdFloat", default, skip_serializing_if = "Option::is_none")]
    simd_float: Option<f64>,
    #[serde(rename = "MemRead", default, skip_serializing_if = "Option::is_none")]
    mem_read: Option<f64>,
    #[serde(rename = "MemWrite", default, skip_serializing_if = "Option::is_none")]
    mem_write: Option<f64>,
    #[serde(rename = "Other", default, skip_serializing_if = "Option::is_none")]
    other: Option<f64>,
}

impl ClassTableDoc {
    pub(crate) fn get(&self, class: InstructionClass) -> Option<f64> {
        match class {
            InstructionClass::IntAlu => self.int_alu,
            InstructionClass::SimdFloat => self.simd_float,
            InstructionClass::MemRead => self.mem_read,
            InstructionClass::MemWrite => self.mem_write,
            InstructionClass::Other => self.other,
        }
    }

    pub(crate) fn from_table(table: &ClassTable) -> Self {
        ClassTableDoc {
            int_alu: Some(table[InstructionClass::IntAlu]),
            simd_float: Some(table[InstructionClass::SimdFloat]),
            mem_read: Some(table[InstructionClass::MemRead]),
            mem_write: Some(table[InstructionClass::MemWrite]),
            other: Some(table[InstructionClass::Other]),
        }
    }
}

/// Microarchitecture, power and area parameters of one core type.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreTypeSpec {
    pub name: String,
    pub frequency_hz: f64,
    pub cpi: ClassTable,
    /// Informational; latency hiding is already folded into `cpi`.
    pub out_of_order: bool,
    /// Watts drawn above static while executing instructions.
    pub dynamic_power_w: f64,
    /// Watts drawn whenever the core is enabled.
    pub static_power_w: f64,
    pub area_mm2: f64,
    pub bytes_per_mem_instr: f64,
}

impl CoreTypeSpec {
    /// Cycles per instruction for `mix`. A measured override, when present,
    /// replaces the mix-weighted table lookup.
    pub fn effective_cpi(&self, mix: &InstructionMix, cpi_override: Option<f64>) -> f64 {
        if let Some(measured) = cpi_override {
            return measured;
        }
        mix.fractions().iter().map(|(c, f)| f * self.cpi[c]).sum()
    }

    /// Instructions per second for `mix`.
    pub fn throughput(&self, mix: &InstructionMix, cpi_override: Option<f64>) -> f64 {
        self.frequency_hz / self.effective_cpi(mix, cpi_override)
    }

    /// Single-core throughput on an IntAlu-only mix; used to order core types.
    pub fn int_alu_throughput(&self) -> f64 {
        self.frequency_hz / self.cpi[InstructionClass::IntAlu]
    }

    pub fn total_power_w(&self) -> f64 {
        self.static_power_w + self.dynamic_power_w
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &'static str, reason: &str| ConfigError::InvalidCore {
            core: self.name.clone(),
            field,
            reason: reason.to_string(),
        };
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let positive = [
            ("frequency_hz", self.frequency_hz),
            ("static_power_w", self.static_power_w),
            ("area_mm2", self.area_mm2),
            ("bytes_per_mem_instr", self.bytes_per_mem_instr),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, &format!("must be finite and > 0 (got {v})")));
            }
        }
        if !(self.dynamic_power_w.is_finite() && self.dynamic_power_w >= 0.0) {
            return Err(invalid(
                "dynamic_power_w",
                &format!("must be finite and >= 0 (got {})", self.dynamic_power_w),
            ));
        }
        for (class, v) in self.cpi.iter() {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::InvalidCore {
                    core: self.name.clone(),
                    field: "cpi",
                    reason: format!("{class} must be finite and > 0 (got {v})"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoreDoc {
    name: String,
    frequency_hz: f64,
    cpi: ClassTableDoc,
    out_of_order: bool,
    dynamic_power_w: f64,
    static_power_w: f64,
    area_mm2: f64,
    bytes_per_mem_instr: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoreFileDoc {
    #[serde(default = "default_schema_version")]
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    cores: Vec<CoreDoc>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl TryFrom<CoreDoc> for CoreTypeSpec {
    type Error = ConfigError;

    fn try_from(doc: CoreDoc) -> Result<Self, ConfigError> {
        let mut cpi = ClassTable::default();
        for class in InstructionClass::ALL {
            cpi[class] = doc.cpi.get(class).ok_or_else(|| ConfigError::MissingCpi {
                core: doc.name.clone(),
                class: class.to_string(),
            })?;
        }
        let spec = CoreTypeSpec {
            name: doc.name,
            frequency_hz: doc.frequency_hz,
            cpi,
            out_of_order: doc.out_of_order,
            dynamic_power_w: doc.dynamic_power_w,
            static_power_w: doc.static_power_w,
            area_mm2: doc.area_mm2,
            bytes_per_mem_instr: doc.bytes_per_mem_instr,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&CoreTypeSpec> for CoreDoc {
    fn from(spec: &CoreTypeSpec) -> Self {
        CoreDoc {
            name: spec.name.clone(),
            frequency_hz: spec.frequency_hz,
            cpi: ClassTableDoc::from_table(&spec.cpi),
            out_of_order: spec.out_of_order,
            dynamic_power_w: spec.dynamic_power_w,
            static_power_w: spec.static_power_w,
            area_mm2: spec.area_mm2,
            bytes_per_mem_instr: spec.bytes_per_mem_instr,
        }
    }
}

/// Named core types in file declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreRegistry {
    cores: Vec<CoreTypeSpec>,
    provenance: Option<String>,
}

impl CoreRegistry {
    pub fn new(cores: Vec<CoreTypeSpec>) -> Result<Self, ConfigError> {
        for (i, c) in cores.iter().enumerate() {
            c.validate()?;
            if cores[..i].iter().any(|o| o.name == c.name) {
                return Err(ConfigError::DuplicateCore(c.name.clone()));
            }
        }
        Ok(CoreRegistry {
            cores,
            provenance: None,
        })
    }

    /// The calibrated A7/A9/A15 definitions bundled with the crate.
    pub fn shipped() -> Self {
        Self::from_json(crate::data::CORES_JSON).expect("bundled core file is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let doc: CoreFileDoc =
            serde_json::from_str(text).map_err(|e| ConfigError::json("core file", e))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                found: doc.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let cores = doc
            .cores
            .into_iter()
            .map(CoreTypeSpec::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        let mut reg = Self::new(cores)?;
        reg.provenance = doc.provenance;
        Ok(reg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            ConfigError::Json { source, .. } => ConfigError::json(path.display().to_string(), source),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = CoreFileDoc {
            schema_version: SCHEMA_VERSION,
            provenance: self.provenance.clone(),
            cores: self.cores.iter().map(CoreDoc::from).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("core file serializes")
    }

    pub fn get(&self, name: &str) -> Option<&CoreTypeSpec> {
        self.cores.iter().find(|c| c.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CoreTypeSpec> {
        self.cores.iter()
    }

    pub fn names(&self) -> Vec<String> {
        self.cores.iter().map(|c| c.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    /// Core types sorted by ascending IntAlu-only throughput, ties by name.
    /// This is the order used for canonical configuration names.
    pub fn by_ascending_throughput(&self) -> Vec<&CoreTypeSpec> {
        let mut v: Vec<&CoreTypeSpec> = self.cores.iter().collect();
        v.sort_by(|a, b| {
            a.int_alu_throughput()
                .total_cmp(&b.int_alu_throughput())
                .then_with(|| a.name.cmp(&b.name))
        });
        v
    }

    /// Warnings for core types whose power does not grow with single-core
    /// throughput. Faster types are expected to draw more in total and in
    /// dynamic power.
    pub fn power_ordering_warnings(&self) -> Vec<String> {
        let ordered = self.by_ascending_throughput();
        let mut out = Vec::new();
        for pair in ordered.windows(2) {
            let (slow, fast) = (pair[0], pair[1]);
            if slow.total_power_w() >= fast.total_power_w() {
                out.push(format!(
                    "static+dynamic power of `{}` ({} W) is not below that of faster `{}` ({} W)",
                    slow.name,
                    slow.total_power_w(),
                    fast.name,
                    fast.total_power_w()
                ));
            }
        }
        if let (Some(slow), Some(fast)) = (ordered.first(), ordered.last()) {
            if ordered.len() > 1 && slow.dynamic_power_w > fast.dynamic_power_w {
                out.push(format!(
                    "dynamic power of `{}` ({} W) exceeds that of the fastest core `{}` ({} W)",
                    slow.name, slow.dynamic_power_w, fast.name, fast.dynamic_power_w
                ));
            }
        }
        out
    }
}
