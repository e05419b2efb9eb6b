//! Calibrated inputs bundled into the binary.

use crate::core_model::CoreRegistry;
use crate::workload::{load_profile, WorkloadProfile};

pub const CORES_JSON: &str = include_str!("../data/cores.json");

/// Shipped profiles as `(name, document)`.
pub const PROFILES: [(&str, &str); 7] = [
    ("heartwall", include_str!("../data/profiles/heartwall.json")),
    ("lud", include_str!("../data/profiles/lud.json")),
    ("nw", include_str!("../data/profiles/nw.json")),
    ("kmeans", include_str!("../data/profiles/kmeans.json")),
    ("nn", include_str!("../data/profiles/nn.json")),
    ("backprop", include_str!("../data/profiles/backprop.json")),
    ("srad_v1", include_str!("../data/profiles/srad_v1.json")),
];

pub fn shipped_profiles() -> Vec<WorkloadProfile> {
    let cores = CoreRegistry::shipped();
    PROFILES
        .iter()
        .map(|(name, text)| {
            load_profile(text, Some(&cores)).unwrap_or_else(|e| panic!("bundled profile {name}: {e}"))
        })
        .collect()
}

pub fn shipped_profile(name: &str) -> Option<WorkloadProfile> {
    let cores = CoreRegistry::shipped();
    PROFILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| load_profile(text, Some(&cores)).expect("bundled profile is valid"))
}
