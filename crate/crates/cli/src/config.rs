//! Scenario files: TOML with a `kind` and a kind-specific `[params]` table.

use std::fmt;
use std::path::Path;

use bellspace::epr::{tmsv_moments, CrossMomentMatrix, NoiseDistribution};
use bellspace::lhv::{sqrt3_model, LhvModel, LhvModelSpec};
use bellspace::spatial::{DetectorRegion, Wavepacket};
use bellspace::UnitVector3;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

const TOP_LEVEL_KEYS: [&str; 6] = ["name", "description", "seed", "output", "kind", "params"];

/// A parsed and validated scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub seed: u64,
    /// Base name for emitted files, relative to the output directory.
    pub output: String,
    #[serde(flatten)]
    pub kind: ScenarioKind,
}

#[derive(Debug, Clone, Deserialize)]
struct ScenarioFile {
    name: Option<String>,
    description: Option<String>,
    #[serde(default)]
    seed: u64,
    output: Option<String>,
    #[serde(flatten)]
    kind: ScenarioKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum ScenarioKind {
    SpinCorr(SpinCorrParams),
    Chsh(ChshParams),
    LhvVerify(LhvVerifyParams),
    EprConstruct(EprConstructParams),
    EprSample(EprSampleParams),
    SpatialScan(SpatialScanParams),
    Theorem4(Theorem4Params),
    ContextCheck(ContextCheckParams),
}

impl ScenarioKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScenarioKind::SpinCorr(_) => "spin-corr",
            ScenarioKind::Chsh(_) => "chsh",
            ScenarioKind::LhvVerify(_) => "lhv-verify",
            ScenarioKind::EprConstruct(_) => "epr-construct",
            ScenarioKind::EprSample(_) => "epr-sample",
            ScenarioKind::SpatialScan(_) => "spatial-scan",
            ScenarioKind::Theorem4(_) => "theorem4",
            ScenarioKind::ContextCheck(_) => "context-check",
        }
    }
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::from_toml(&text, stem)
    }

    /// Parses and validates; `default_name` is used when the file has no `name`.
    pub fn from_toml(text: &str, default_name: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if let Some(key) = table.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::Parse(format!("unknown top-level key `{key}`")));
        }
        let file: ScenarioFile = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let name = file.name.unwrap_or_else(|| default_name.to_string());
        let output = file.output.unwrap_or_else(|| name.clone());
        if output.is_empty() || output.contains(['/', '\\']) || output.starts_with('.') {
            return Err(invalid(format!("output `{output}` must be a plain file name")));
        }
        let scenario = Scenario { name, description: file.description, seed: file.seed, output, kind: file.kind };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match &self.kind {
            ScenarioKind::SpinCorr(p) => {
                if p.pairs == 0 && p.explicit.is_empty() {
                    return Err(invalid("spin-corr needs `pairs` > 0 or explicit pairs"));
                }
                check_tolerance(p.tolerance)
            }
            ScenarioKind::Chsh(p) => {
                p.correlation.build()?;
                check_tolerance(p.tolerance)
            }
            ScenarioKind::LhvVerify(p) => {
                if let ModelSource::Random { count } = p.model {
                    if count == 0 {
                        return Err(invalid("random model count must be positive"));
                    }
                }
                p.model.build_fixed()?;
                if p.mc_pairs > 0 && (p.mc_samples == 0 || p.mc_sigma_limit <= 0.0) {
                    return Err(invalid("mc_samples must be at least 1 and mc_sigma_limit positive"));
                }
                check_tolerance(p.tolerance)
            }
            ScenarioKind::EprConstruct(p) => {
                for m in &p.moments {
                    m.resolve()?;
                }
                if p.moments.is_empty() && p.random == 0 {
                    return Err(invalid("epr-construct needs explicit moments or `random` > 0"));
                }
                if p.grid == 0 {
                    return Err(invalid("grid must be positive"));
                }
                check_tolerance(p.tolerance)
            }
            ScenarioKind::EprSample(p) => {
                p.moments.resolve()?;
                if p.samples == 0 || p.trials == 0 {
                    return Err(invalid("samples and trials must be at least 1"));
                }
                if !(0.0..=1.0).contains(&p.min_fraction) || p.sigma_limit <= 0.0 {
                    return Err(invalid("min_fraction must lie in [0, 1] and sigma_limit be positive"));
                }
                Ok(())
            }
            ScenarioKind::SpatialScan(p) => {
                let g = p.geometry()?;
                if !g.o1.is_bounded() {
                    return Err(invalid("region1 must be bounded for a disentanglement scan"));
                }
                p.shifts.build()?;
                check_tolerance(p.tolerance)
            }
            ScenarioKind::Theorem4(p) => {
                for case in &p.cases {
                    for g in [case.g1, case.g2] {
                        if !(0.0..=1.0).contains(&g) {
                            return Err(invalid(format!("localization probability {g} outside [0, 1]")));
                        }
                    }
                }
                if let Some(scan) = &p.scan {
                    scan.geometry()?;
                    scan.shifts.build()?;
                }
                if p.cases.is_empty() && p.scan.is_none() {
                    return Err(invalid("theorem4 needs `cases` or `scan`"));
                }
                Ok(())
            }
            ScenarioKind::ContextCheck(p) => {
                if p.families.is_empty() && p.covariance_max_sites.is_none() {
                    return Err(invalid("context-check needs families or covariance_max_sites"));
                }
                for f in &p.families {
                    f.family.build()?;
                }
                if let Some(n) = p.covariance_max_sites {
                    if !(2..=64).contains(&n) {
                        return Err(invalid("covariance_max_sites must lie in 2..=64"));
                    }
                }
                if p.all_subsets_max_sites > 16 {
                    return Err(invalid("all_subsets_max_sites must be at most 16"));
                }
                check_tolerance(p.tolerance)
            }
        }
    }
}

fn check_tolerance(t: f64) -> Result<(), ConfigError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("tolerance {t} must be finite and nonnegative")))
    }
}

fn default_spin_tolerance() -> f64 {
    1e-12
}

fn default_chsh_tolerance() -> f64 {
    1e-9
}

fn default_lhv_tolerance() -> f64 {
    1e-14
}

fn default_mc_sigma_limit() -> f64 {
    5.0
}

fn default_subset_sites() -> usize {
    10
}

fn default_grid() -> usize {
    20
}

fn default_sigma_limit() -> f64 {
    4.0
}

fn default_min_fraction() -> f64 {
    0.99
}

fn default_max_final_g() -> f64 {
    1e-6
}

fn default_context_tolerance() -> f64 {
    bellspace::context::DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinCorrParams {
    /// Number of random setting pairs.
    #[serde(default)]
    pub pairs: usize,
    /// Extra `[a, b]` pairs.
    #[serde(default)]
    pub explicit: Vec<[UnitVector3; 2]>,
    #[serde(default = "default_spin_tolerance")]
    pub tolerance: f64,
}

/// A correlation function to feed the CHSH machinery.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CorrelationSpec {
    /// Singlet prediction.
    Quantum {},
    /// Singlet prediction scaled by a localization factor.
    Localized {
        g: f64,
    },
    /// Exact expectation of a hidden-variable model.
    Model {
        model: ModelSource,
    },
    Constant {
        value: f64,
    },
}

pub enum BuiltCorrelation {
    Quantum,
    Localized(f64),
    Model(Box<LhvModel>),
    Constant(f64),
}

impl bellspace::Correlation for BuiltCorrelation {
    fn correlate(&self, a: &UnitVector3, b: &UnitVector3) -> f64 {
        match self {
            BuiltCorrelation::Quantum => bellspace::spin::spin_correlation(a, b),
            BuiltCorrelation::Localized(g) => g * bellspace::spin::spin_correlation(a, b),
            BuiltCorrelation::Model(m) => bellspace::lhv::model_correlation(m, a, b),
            BuiltCorrelation::Constant(v) => *v,
        }
    }
}

impl CorrelationSpec {
    pub fn build(&self) -> Result<BuiltCorrelation, ConfigError> {
        Ok(match self {
            CorrelationSpec::Quantum {} => BuiltCorrelation::Quantum,
            CorrelationSpec::Localized { g } => {
                if !(0.0..=1.0).contains(g) {
                    return Err(invalid(format!("localization factor {g} outside [0, 1]")));
                }
                BuiltCorrelation::Localized(*g)
            }
            CorrelationSpec::Model { model } => match model.build_fixed()? {
                Some(m) => BuiltCorrelation::Model(Box::new(m)),
                None => return Err(invalid("a CHSH correlation needs a fixed model, not `random`")),
            },
            CorrelationSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(invalid("constant correlation must be finite"));
                }
                BuiltCorrelation::Constant(*value)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshParams {
    pub correlation: CorrelationSpec,
    /// Fixed coplanar angles `[a, a′, b, b′]` in degrees; optimize when absent.
    #[serde(default)]
    pub angles_deg: Option<[f64; 4]>,
    /// Expected CHSH value.
    #[serde(default)]
    pub expect: Option<f64>,
    #[serde(default = "default_chsh_tolerance")]
    pub tolerance: f64,
    /// Upper bound the value must respect.
    #[serde(default)]
    pub at_most: Option<f64>,
}

/// Where a hidden-variable model comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSource {
    /// The three-point `√3 a_λ` model.
    Sqrt3 {},
    /// `count` random models with `|ξ|, |η| ≤ 1`.
    Random {
        count: usize,
    },
    /// The scaled three-point model for a localization product `g1 g2`.
    Theorem4 {
        g1: f64,
        g2: f64,
    },
    Inline {
        weights: Vec<f64>,
        xi: bellspace::lhv::VariableFamily,
        eta: bellspace::lhv::VariableFamily,
    },
}

impl ModelSource {
    /// The model, or `None` for the random family.
    pub fn build_fixed(&self) -> Result<Option<LhvModel>, ConfigError> {
        Ok(match self {
            ModelSource::Sqrt3 {} => Some(sqrt3_model()),
            ModelSource::Random { .. } => None,
            ModelSource::Theorem4 { g1, g2 } => {
                Some(bellspace::spatial::theorem4_model(*g1, *g2).map_err(|e| invalid(e.to_string()))?.0)
            }
            ModelSource::Inline { weights, xi, eta } => {
                let spec = LhvModelSpec { weights: weights.clone(), xi: xi.clone(), eta: eta.clone() };
                Some(LhvModel::try_from(spec).map_err(|e| invalid(e.to_string()))?)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LhvVerifyParams {
    pub model: ModelSource,
    /// Random CHSH settings evaluated per model.
    #[serde(default)]
    pub settings: usize,
    /// Random `(a, b)` pairs compared against `target`.
    #[serde(default)]
    pub pairs: usize,
    #[serde(default)]
    pub target: Target,
    /// Random `(a, b)` pairs estimated by Monte Carlo.
    #[serde(default)]
    pub mc_pairs: usize,
    #[serde(default)]
    pub mc_samples: u64,
    /// Every Monte Carlo estimate must land within this many standard errors.
    #[serde(default = "default_mc_sigma_limit")]
    pub mc_sigma_limit: f64,
    #[serde(default = "default_lhv_tolerance")]
    pub tolerance: f64,
    /// Expected applicability of the CHSH bound to the model(s).
    #[serde(default)]
    pub expect_applicable: Option<bool>,
    /// Expected sup-norm of both variables of a fixed model.
    #[serde(default)]
    pub expect_sup_norm: Option<f64>,
}

/// Reference function for the pair check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// `a · b`
    Dot,
    /// `−a · b`
    MinusDot,
    #[default]
    None,
}

/// Cross moments given directly, by squeezing, or both.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentsSpec {
    Explicit { a: f64, b: f64, c: f64, d: f64 },
    Tmsv { tmsv: f64 },
}

impl MomentsSpec {
    pub fn resolve(&self) -> Result<CrossMomentMatrix, ConfigError> {
        match *self {
            MomentsSpec::Explicit { a, b, c, d } => {
                if [a, b, c, d].iter().all(|x| x.is_finite()) {
                    Ok(CrossMomentMatrix::new(a, b, c, d))
                } else {
                    Err(invalid("cross moments must be finite"))
                }
            }
            MomentsSpec::Tmsv { tmsv } => tmsv_moments(tmsv).map_err(|e| invalid(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprConstructParams {
    #[serde(default)]
    pub moments: Vec<MomentsSpec>,
    /// Additional random matrices with entries in `[-5, 5]`; every tenth has `A = 0`.
    #[serde(default)]
    pub random: usize,
    /// Angles per axis on the `(α₁, α₂)` grid.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_spin_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprSampleParams {
    pub moments: MomentsSpec,
    /// Radians.
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(default)]
    pub noise: NoiseDistribution,
    pub samples: u64,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default = "default_sigma_limit")]
    pub sigma_limit: f64,
    #[serde(default = "default_min_fraction")]
    pub min_fraction: f64,
}

fn one() -> u64 {
    1
}

/// A region bound: a number, or the strings `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            x if x == f64::INFINITY => serializer.serialize_str("inf"),
            x if x == f64::NEG_INFINITY => serializer.serialize_str("-inf"),
            x => serializer.serialize_f64(x),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BoundVisitor;

        impl Visitor<'_> for BoundVisitor {
            type Value = Bound;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Bound, E> {
                Ok(Bound(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Bound, E> {
                Ok(Bound(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Bound, E> {
                Ok(Bound(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Bound, E> {
                match v.trim() {
                    "inf" | "+inf" => Ok(Bound(f64::INFINITY)),
                    "-inf" => Ok(Bound(f64::NEG_INFINITY)),
                    other => Err(E::custom(format!("unrecognized bound `{other}`"))),
                }
            }
        }

        deserializer.deserialize_any(BoundVisitor)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub lo: [Bound; 3],
    pub hi: [Bound; 3],
}

impl RegionConfig {
    pub fn build(&self) -> Result<DetectorRegion, ConfigError> {
        DetectorRegion::new(self.lo.map(|b| b.0), self.hi.map(|b| b.0)).map_err(|e| invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: [f64; 3],
    pub sigma: f64,
}

impl PacketConfig {
    pub fn build(&self) -> Result<Wavepacket, ConfigError> {
        Wavepacket::new(self.center, self.sigma).map_err(|e| invalid(e.to_string()))
    }
}

pub struct BuiltGeometry {
    pub p1: Wavepacket,
    pub p2: Wavepacket,
    pub o1: DetectorRegion,
    pub o2: DetectorRegion,
}

macro_rules! geometry_builder {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn geometry(&self) -> Result<BuiltGeometry, ConfigError> {
                Ok(BuiltGeometry {
                    p1: self.packet1.build()?,
                    p2: self.packet2.build()?,
                    o1: self.region1.build()?,
                    o2: self.region2.build()?,
                })
            }
        }
    )*};
}

geometry_builder!(SpatialScanParams, Theorem4Scan);

/// Evenly spaced translations `start..=stop` (lengths) along `direction`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSchedule {
    pub direction: [f64; 3],
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl ShiftSchedule {
    pub fn build(&self) -> Result<Vec<[f64; 3]>, ConfigError> {
        let norm = self.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("shift direction must be a nonzero finite vector"));
        }
        if self.steps == 0 || !self.start.is_finite() || !self.stop.is_finite() || self.stop < self.start {
            return Err(invalid("shift schedule needs steps > 0 and finite start <= stop"));
        }
        let unit = self.direction.map(|d| d / norm);
        Ok((0..=self.steps)
            .map(|k| {
                let s = self.start + (self.stop - self.start) * k as f64 / self.steps as f64;
                unit.map(|u| u * s)
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialScanParams {
    pub packet1: PacketConfig,
    pub packet2: PacketConfig,
    pub region1: RegionConfig,
    pub region2: RegionConfig,
    pub a: UnitVector3,
    pub b: UnitVector3,
    pub shifts: ShiftSchedule,
    #[serde(default = "default_max_final_g")]
    pub max_final_g: f64,
    #[serde(default = "default_spin_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityPair {
    pub g1: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem4Scan {
    pub packet1: PacketConfig,
    pub packet2: PacketConfig,
    pub region1: RegionConfig,
    pub region2: RegionConfig,
    pub shifts: ShiftSchedule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem4Params {
    pub a: UnitVector3,
    pub b: UnitVector3,
    #[serde(default)]
    pub cases: Vec<ProbabilityPair>,
    #[serde(default)]
    pub scan: Option<Theorem4Scan>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `{σ_x, σ_z}`.
    PauliPair {},
    /// Translation generators on an `n`-site ring.
    Circulant {
        n: usize,
    },
    /// Translation generators plus one site projector, which breaks commutativity.
    CirculantPerturbed {
        n: usize,
    },
    Charges {
        charges: Vec<Vec<i64>>,
    },
    /// Real matrices, row-major, with optional imaginary parts.
    Matrices {
        dim: usize,
        real: Vec<Vec<f64>>,
        #[serde(default)]
        imag: Vec<Vec<f64>>,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Vec<bellspace::hilbert::Operator>, ConfigError> {
        use bellspace::context::TranslationSystem;
        use bellspace::hilbert::Operator;
        use num_complex::Complex64;

        let err = |e: &dyn fmt::Display| invalid(e.to_string());
        Ok(match self {
            FamilySpec::PauliPair {} => vec![Operator::pauli_x(), Operator::pauli_z()],
            FamilySpec::Circulant { n } => TranslationSystem::new(*n).map_err(|e| err(&e))?.generators(),
            FamilySpec::CirculantPerturbed { n } => {
                let system = TranslationSystem::new(*n).map_err(|e| err(&e))?;
                let mut ops = system.generators();
                ops.push(system.projector(&[0]).map_err(|e| err(&e))?);
                ops
            }
            FamilySpec::Charges { charges } => {
                let dim = charges.first().map(Vec::len).unwrap_or(0);
                if dim == 0 {
                    return Err(invalid("charge family needs a nonempty assignment"));
                }
                bellspace::context::internal_symmetry_context(charges, dim)
                    .map(|c| c.operators().to_vec())
                    .map_err(|e| err(&e))?
            }
            FamilySpec::Matrices { dim, real, imag } => {
                if real.is_empty() || (!imag.is_empty() && imag.len() != real.len()) {
                    return Err(invalid("matrix family needs real parts and matching imaginary parts"));
                }
                let mut ops = Vec::with_capacity(real.len());
                for (k, re) in real.iter().enumerate() {
                    let im = imag.get(k);
                    if re.len() != dim * dim || im.is_some_and(|v| v.len() != dim * dim) {
                        return Err(invalid(format!("matrix {k} must have {} entries", dim * dim)));
                    }
                    let entries: Vec<Complex64> =
                        re.iter().enumerate().map(|(i, &x)| Complex64::new(x, im.map_or(0.0, |v| v[i]))).collect();
                    ops.push(Operator::from_rows(*dim, &entries).map_err(|e| err(&e))?);
                }
                ops
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "toml::Table")]
pub struct FamilyCase {
    pub label: String,
    #[serde(flatten)]
    pub family: FamilySpec,
    pub expect: Expectation,
    /// Expected worst commutator norm when rejected.
    #[serde(default)]
    pub expect_norm: Option<f64>,
}

// serde's flatten would silently drop unknown keys, so split the table by hand
impl TryFrom<toml::Table> for FamilyCase {
    type Error = String;

    fn try_from(mut table: toml::Table) -> Result<Self, String> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Head {
            label: String,
            expect: Expectation,
            #[serde(default)]
            expect_norm: Option<f64>,
        }

        let mut head = toml::Table::new();
        for key in ["label", "expect", "expect_norm"] {
            if let Some(v) = table.remove(key) {
                head.insert(key.into(), v);
            }
        }
        let head: Head = head.try_into().map_err(|e: toml::de::Error| e.message().to_string())?;
        let family: FamilySpec = table.try_into().map_err(|e: toml::de::Error| e.message().to_string())?;
        Ok(Self { label: head.label, family, expect: head.expect, expect_norm: head.expect_norm })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextCheckParams {
    #[serde(default)]
    pub families: Vec<FamilyCase>,
    /// Exhaustive covariance check on rings of 2..=n sites.
    #[serde(default)]
    pub covariance_max_sites: Option<usize>,
    /// Rings up to this size check every subset; larger rings check
    /// singletons and cyclic intervals.
    #[serde(default = "default_subset_sites")]
    pub all_subsets_max_sites: usize,
    #[serde(default = "default_context_tolerance")]
    pub tolerance: f64,
}
