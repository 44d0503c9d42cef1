//! Scenarios shipped with the binary.

use crate::config::{ConfigError, Scenario};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../scenarios/", $name, ".toml")))),*]
    };
}

/// `(name, TOML source)` in display order.
pub const BUNDLED: &[(&str, &str)] = bundled![
    "singlet-correlation",
    "three-point-model",
    "chsh-bounded-models",
    "tsirelson",
    "localized-chsh",
    "epr-construction",
    "epr-sampling",
    "epr-sampling-gaussian",
    "disentanglement-scan",
    "localized-bounded-model",
    "contexts",
];

pub fn source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Option<Result<Scenario, ConfigError>> {
    source(name).map(|text| Scenario::from_toml(text, name))
}

/// Every bundled scenario, parsed.
pub fn all() -> Vec<Scenario> {
    BUNDLED
        .iter()
        .map(|(name, text)| Scenario::from_toml(text, name).unwrap_or_else(|e| panic!("bundled scenario {name}: {e}")))
        .collect()
}
