// SPDX-License-Identifier: Apache-2.0

//! YAML configuration schema.
//!
//! One file configures every stage: the `testbench` section describes the
//! device workload, `interface` declares the captured boundary, and `flow`
//! holds per-stage options plus the output directory. Numeric fields that
//! usually read better in hex (addresses, fuse words) accept either YAML
//! integers or `"0x..."` strings.

use serde::{Deserialize, Serialize};

use retrace_core::artifact::{EncodeOptions, WordWidth, XPolicy};
use retrace_core::bits::Bits;
use retrace_core::engine::ReplayOptions;
use retrace_core::golden::{ByteOrder, Normalization, WordOrder};
use retrace_core::ifspec::{
    CheckPolicy, ClockSpec, Direction, InterfaceSpec, ResetSpec, SignalBinding, SpecError,
    StartCondition,
};
use retrace_core::romgen::RomGenOptions;
use retrace_core::sim::{RandomizationConfig, ToyGpuConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error("interface: {0}")]
    Interface(#[from] SpecError),
    #[error("signal '{name}': bad check mask '{mask}': {reason}")]
    BadMask {
        name: String,
        mask: String,
        reason: String,
    },
    #[error("romgen word_width must be 8, 16, 32, or 64, got {0}")]
    BadWordWidth(u32),
}

/// Integer-or-hex-string parsing for address-like fields.
mod hexnum {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Str(String),
    }

    fn parse(raw: Raw) -> Result<u64, String> {
        match raw {
            Raw::Int(n) => Ok(n),
            Raw::Str(s) => {
                let t = s.trim().replace('_', "");
                let r = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
                    u64::from_str_radix(h, 16)
                } else {
                    t.parse()
                };
                r.map_err(|_| format!("'{s}' is not an integer"))
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        parse(Raw::deserialize(d)?).map_err(D::Error::custom)
    }

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:#x}"))
    }

    pub mod vec32 {
        use super::*;

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u32>, D::Error> {
            let raws = Vec::<Raw>::deserialize(d)?;
            raws.into_iter()
                .map(|r| {
                    let v = parse(r).map_err(D::Error::custom)?;
                    u32::try_from(v).map_err(|_| D::Error::custom("value exceeds 32 bits"))
                })
                .collect()
        }

        pub fn serialize<S: Serializer>(v: &[u32], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|w| format!("{w:#x}")))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub testbench: TestbenchConfig,
    pub interface: InterfaceConfig,
    #[serde(default)]
    pub flow: FlowConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestbenchConfig {
    #[serde(with = "hexnum")]
    pub mem_base: u64,
    #[serde(default = "default_word_count")]
    pub word_count: u32,
    #[serde(default, with = "hexnum::vec32")]
    pub fuse_words: Vec<u32>,
    #[serde(default)]
    pub randomization: RandomizationSection,
}

fn default_word_count() -> u32 {
    16
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizationSection {
    pub enabled: bool,
    pub seed: u64,
    pub max_stall: u32,
}

impl Default for RandomizationSection {
    fn default() -> Self {
        let d = RandomizationConfig::default();
        RandomizationSection {
            enabled: d.enabled,
            seed: d.seed,
            max_stall: d.max_stall,
        }
    }
}

impl TestbenchConfig {
    pub fn gpu_config(&self) -> ToyGpuConfig {
        ToyGpuConfig {
            mem_base: self.mem_base,
            word_count: self.word_count,
            fuse_words: self.fuse_words.clone(),
            randomization: RandomizationConfig {
                enabled: self.randomization.enabled,
                seed: self.randomization.seed,
                max_stall: self.randomization.max_stall,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceConfig {
    pub clock: ClockConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset: Option<ResetConfig>,
    pub signals: Vec<SignalConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockConfig {
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetConfig {
    pub path: String,
    #[serde(default = "default_level")]
    pub active_level: Level,
    #[serde(default)]
    pub start: StartKeyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    High,
    Low,
}

fn default_level() -> Level {
    Level::High
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKeyword {
    FirstEdge,
    #[default]
    AfterResetDeassert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub name: String,
    pub path: String,
    pub width: usize,
    pub direction: DirectionKeyword,
    #[serde(default)]
    pub check: CheckKeyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKeyword {
    Agent,
    Dut,
}

/// Check policy as a compact string: `strict`, `ignore`, or
/// `masked:<hex>` where the hex mask covers the signal width.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CheckKeyword {
    #[default]
    Strict,
    Ignore,
    Masked(String),
}

impl Serialize for CheckKeyword {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CheckKeyword::Strict => s.serialize_str("strict"),
            CheckKeyword::Ignore => s.serialize_str("ignore"),
            CheckKeyword::Masked(hex) => s.serialize_str(&format!("masked:{hex}")),
        }
    }
}

impl<'de> Deserialize<'de> for CheckKeyword {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "strict" => Ok(CheckKeyword::Strict),
            "ignore" => Ok(CheckKeyword::Ignore),
            other => match other.strip_prefix("masked:") {
                Some(hex) => Ok(CheckKeyword::Masked(hex.trim().to_string())),
                None => Err(serde::de::Error::custom(format!(
                    "check must be 'strict', 'ignore', or 'masked:<hex>', got '{s}'"
                ))),
            },
        }
    }
}

impl InterfaceConfig {
    /// Validate into the library model.
    pub fn to_spec(&self) -> Result<InterfaceSpec, ConfigError> {
        let bindings = self
            .signals
            .iter()
            .map(|s| {
                let check = match &s.check {
                    CheckKeyword::Strict => CheckPolicy::Strict,
                    CheckKeyword::Ignore => CheckPolicy::Ignore,
                    CheckKeyword::Masked(hex) => {
                        let cleaned = hex.strip_prefix("0x").unwrap_or(hex);
                        let mask = Bits::from_hex(s.width, cleaned).map_err(|e| {
                            ConfigError::BadMask {
                                name: s.name.clone(),
                                mask: hex.clone(),
                                reason: e.to_string(),
                            }
                        })?;
                        CheckPolicy::Masked(mask)
                    }
                };
                Ok(SignalBinding {
                    name: s.name.clone(),
                    capture_path: s.path.clone(),
                    width: s.width,
                    direction: match s.direction {
                        DirectionKeyword::Agent => Direction::AgentDriven,
                        DirectionKeyword::Dut => Direction::DutDriven,
                    },
                    check,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let reset = self.reset.as_ref().map(|r| ResetSpec {
            capture_path: r.path.clone(),
            active_level: r.active_level == Level::High,
            start: match r.start {
                StartKeyword::FirstEdge => StartCondition::FirstEdge,
                StartKeyword::AfterResetDeassert => StartCondition::AfterResetDeassert,
            },
        });
        Ok(InterfaceSpec::new(
            ClockSpec {
                capture_path: self.clock.path.clone(),
            },
            reset,
            bindings,
        )?)
    }

    /// Inverse of [`to_spec`](Self::to_spec); round-trips exactly.
    #[cfg(test)]
    pub fn from_spec(spec: &InterfaceSpec) -> Self {
        InterfaceConfig {
            clock: ClockConfig {
                path: spec.clock().capture_path.clone(),
            },
            reset: spec.reset().map(|r| ResetConfig {
                path: r.capture_path.clone(),
                active_level: if r.active_level {
                    Level::High
                } else {
                    Level::Low
                },
                start: match r.start {
                    StartCondition::FirstEdge => StartKeyword::FirstEdge,
                    StartCondition::AfterResetDeassert => StartKeyword::AfterResetDeassert,
                },
            }),
            signals: spec
                .bindings()
                .iter()
                .map(|b| SignalConfig {
                    name: b.name.clone(),
                    path: b.capture_path.clone(),
                    width: b.width,
                    direction: match b.direction {
                        Direction::AgentDriven => DirectionKeyword::Agent,
                        Direction::DutDriven => DirectionKeyword::Dut,
                    },
                    check: match &b.check {
                        CheckPolicy::Strict => CheckKeyword::Strict,
                        CheckPolicy::Ignore => CheckKeyword::Ignore,
                        CheckPolicy::Masked(m) => CheckKeyword::Masked(m.to_hex()),
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub out_dir: String,
    pub max_cycles: u64,
    pub x_policy: XPolicyKeyword,
    pub period_tolerance: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit_period: Option<u64>,
    pub replay: ReplaySection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub romgen: Option<RomGenSection>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            out_dir: "out".into(),
            max_cycles: 10_000,
            x_policy: XPolicyKeyword::Error,
            period_tolerance: 0,
            explicit_period: None,
            replay: ReplaySection::default(),
            compare: None,
            romgen: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XPolicyKeyword {
    #[default]
    Error,
    ZeroWithWarning,
}

impl FlowConfig {
    pub fn encode_options(&self) -> EncodeOptions {
        EncodeOptions {
            x_policy: match self.x_policy {
                XPolicyKeyword::Error => XPolicy::Error,
                XPolicyKeyword::ZeroWithWarning => XPolicy::ZeroWithWarning,
            },
            explicit_period: self.explicit_period,
            period_tolerance: self.period_tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReplaySection {
    pub check: bool,
    pub stop_on_first_mismatch: bool,
    pub max_recorded_mismatches: usize,
}

impl Default for ReplaySection {
    fn default() -> Self {
        let d = ReplayOptions::default();
        ReplaySection {
            check: d.check_enabled,
            stop_on_first_mismatch: d.stop_on_first_mismatch,
            max_recorded_mismatches: d.max_recorded_mismatches,
        }
    }
}

impl ReplaySection {
    pub fn replay_options(&self) -> ReplayOptions {
        ReplayOptions {
            check_enabled: self.check,
            stop_on_first_mismatch: self.stop_on_first_mismatch,
            max_recorded_mismatches: self.max_recorded_mismatches,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(with = "hexnum")]
    pub base: u64,
    /// Bytes to dump and compare.
    pub length: u64,
    #[serde(default = "default_word_size")]
    pub word_size: usize,
    #[serde(default)]
    pub word_order: WordOrderKeyword,
    #[serde(default)]
    pub byte_order: ByteOrderKeyword,
}

fn default_word_size() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordOrderKeyword {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ByteOrderKeyword {
    #[default]
    Little,
    Big,
}

impl CompareSection {
    pub fn normalization(&self) -> Normalization {
        Normalization {
            word_size: self.word_size,
            word_order: match self.word_order {
                WordOrderKeyword::Ascending => WordOrder::Ascending,
                WordOrderKeyword::Descending => WordOrder::Descending,
            },
            byte_order: match self.byte_order {
                ByteOrderKeyword::Little => ByteOrder::Little,
                ByteOrderKeyword::Big => ByteOrder::Big,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RomGenSection {
    pub module_name: String,
    pub word_width: u32,
    pub include_checker: bool,
}

impl Default for RomGenSection {
    fn default() -> Self {
        let d = RomGenOptions::default();
        RomGenSection {
            module_name: d.module_name,
            word_width: d.word_width.bits() as u32,
            include_checker: d.include_checker,
        }
    }
}

impl RomGenSection {
    pub fn romgen_options(&self) -> Result<RomGenOptions, ConfigError> {
        let word_width =
            WordWidth::try_from(self.word_width).map_err(|_| ConfigError::BadWordWidth(self.word_width))?;
        Ok(RomGenOptions {
            module_name: self.module_name.clone(),
            word_width,
            include_checker: self.include_checker,
        })
    }
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_yaml::from_str(&text)?)
}
