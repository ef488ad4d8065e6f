//! Experiment configuration: one human-editable TOML file per run with a
//! versioned schema. Unknown keys are rejected so typos cannot silently
//! change an experiment; every run emits a config echo plus its hash for
//! provenance.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use zqsim::engine::noise::NoiseModel;
use zqsim::qec::distill::DistillSpec;
use zqsim::qec::gerb::GerbSpec;
use zqsim::qec::meta::MeasBasis;
use zqsim::qec::repcode::RepCodeSpec;

pub const CONFIG_SCHEMA: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Repcode,
    Distill,
    Gerb,
    RamseyMcm,
    Replenish,
    LeakageMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepcodeSection {
    pub distance: u32,
    pub cycles: u32,
    #[serde(default)]
    pub phase_sensitive: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistillSection {
    pub encoded: bool,
    /// "XX", "YY" or "ZZ".
    pub basis: String,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub antiferro_variant: bool,
}

fn default_retries() -> u32 {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GerbSection {
    pub n_blocks: u32,
    pub pair_count: u32,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseySection {
    /// MCM-cycle counts to scan (one circuit per entry).
    pub cycle_counts: Vec<u32>,
    #[serde(default = "default_true")]
    pub include_light: bool,
    /// Analysis phases in quarter turns.
    #[serde(default = "default_phases")]
    pub phases: Vec<i32>,
    /// Register qubits per phase point.
    #[serde(default = "default_replicas")]
    pub replicas: u32,
    #[serde(default = "default_block_ms")]
    pub block_ms: f64,
}

fn default_true() -> bool {
    true
}
fn default_phases() -> Vec<i32> {
    vec![0, 1, 2, 3]
}
fn default_replicas() -> u32 {
    2
}
fn default_block_ms() -> f64 {
    23.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplenishSection {
    pub trials: u32,
    #[serde(default = "default_vacancies")]
    pub sz_vacancies: u32,
}

fn default_vacancies() -> u32 {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageMapSection {
    /// Register-detuning grid: start, stop, points.
    pub register_detuning: (f64, f64, usize),
    /// Imaging-detuning grid: start, stop, points.
    pub imaging_detuning: (f64, f64, usize),
    pub image_duration: f64,
    pub imaging_rabi: f64,
    /// Common rescaling of all frequencies/rates/times (tractability knob).
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kind: ExperimentKind,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub base_seed: u64,
    /// 0 = library default worker count. Results are thread-count invariant.
    #[serde(default)]
    pub threads: usize,
    pub out_dir: PathBuf,
    /// Path to a noise TOML, or the literal "noiseless" / "defaults".
    #[serde(default = "default_noise")]
    pub noise: String,
    #[serde(default)]
    pub repcode: Option<RepcodeSection>,
    #[serde(default)]
    pub distill: Option<DistillSection>,
    #[serde(default)]
    pub gerb: Option<GerbSection>,
    #[serde(default)]
    pub ramsey: Option<RamseySection>,
    #[serde(default)]
    pub replenish: Option<ReplenishSection>,
    #[serde(default)]
    pub leakage_map: Option<LeakageMapSection>,
}

fn default_shots() -> u64 {
    1000
}
fn default_noise() -> String {
    "defaults".to_string()
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            bail!("unsupported config schema {} (expected {CONFIG_SCHEMA})", self.schema);
        }
        let need = |present: bool, name: &str| -> Result<()> {
            if !present {
                bail!("kind = \"{name}\" requires a [{name}] section");
            }
            Ok(())
        };
        match self.kind {
            ExperimentKind::Repcode => need(self.repcode.is_some(), "repcode")?,
            ExperimentKind::Distill => {
                need(self.distill.is_some(), "distill")?;
                let d = self.distill.as_ref().unwrap();
                parse_basis(&d.basis)?;
            }
            ExperimentKind::Gerb => need(self.gerb.is_some(), "gerb")?,
            ExperimentKind::RamseyMcm => need(self.ramsey.is_some(), "ramsey")?,
            ExperimentKind::Replenish => need(self.replenish.is_some(), "replenish")?,
            ExperimentKind::LeakageMap => need(self.leakage_map.is_some(), "leakage_map")?,
        }
        Ok(())
    }

    /// Loads the referenced noise model ("defaults", "noiseless", or a path
    /// relative to `base`).
    pub fn load_noise(&self, base: &Path) -> Result<NoiseModel> {
        match self.noise.as_str() {
            "defaults" => Ok(NoiseModel::bench_defaults()),
            "noiseless" => Ok(NoiseModel::noiseless()),
            path => {
                let p = base.join(path);
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("reading noise model {}", p.display()))?;
                Ok(NoiseModel::from_toml(&text)?)
            }
        }
    }

    pub fn echo_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn repcode_spec(&self) -> RepCodeSpec {
        let s = self.repcode.as_ref().expect("validated");
        RepCodeSpec {
            distance: s.distance,
            cycles: s.cycles,
            phase_sensitive: s.phase_sensitive,
            seed: s.seed,
        }
    }

    pub fn distill_spec(&self) -> Result<DistillSpec> {
        let s = self.distill.as_ref().expect("validated");
        Ok(DistillSpec {
            encoded: s.encoded,
            basis: parse_basis(&s.basis)?,
            max_retries: s.max_retries,
            antiferro_variant: s.antiferro_variant,
        })
    }

    pub fn gerb_spec(&self) -> GerbSpec {
        let s = self.gerb.as_ref().expect("validated");
        GerbSpec { n_blocks: s.n_blocks, pair_count: s.pair_count, seed: s.seed }
    }
}

pub fn parse_basis(s: &str) -> Result<MeasBasis> {
    match s.to_ascii_uppercase().as_str() {
        "XX" => Ok(MeasBasis::Xx),
        "YY" => Ok(MeasBasis::Yy),
        "ZZ" => Ok(MeasBasis::Zz),
        other => bail!("unknown basis `{other}` (expected XX, YY or ZZ)"),
    }
}

/// FNV-1a based content hash used to stamp every output file. This is a
/// provenance checksum, not a security primitive.
pub fn config_hash(echo: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in echo.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    // Double-width: hash the reversed text too.
    let mut h2: u64 = 0xcbf2_9ce4_8422_2325;
    for b in echo.as_bytes().iter().rev() {
        h2 ^= *b as u64;
        h2 = h2.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{h:016x}{h2:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = 1
kind = "repcode"
shots = 10
out_dir = "out"
[repcode]
distance = 3
cycles = 2
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Repcode);
        assert_eq!(cfg.repcode_spec().distance, 3);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let bad = format!("{MINIMAL}\nnot_a_key = 1\n");
        assert!(toml::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn unknown_section_key_is_rejected() {
        let bad = MINIMAL.replace("cycles = 2", "cycles = 2\ntypo_field = true");
        assert!(toml::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn missing_section_fails_validation() {
        let bad = r#"
schema = 1
kind = "distill"
out_dir = "out"
"#;
        let cfg: ExperimentConfig = toml::from_str(bad).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let cfg: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        let h1 = config_hash(&cfg.echo_toml());
        let h2 = config_hash(&cfg.echo_toml());
        assert_eq!(h1, h2);
        let mut cfg2 = cfg.clone();
        cfg2.shots = 11;
        assert_ne!(h1, config_hash(&cfg2.echo_toml()));
    }
}
