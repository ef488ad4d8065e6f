//! Circuit metadata sidecars: detector definitions, observables, herald and
//! basis information. Serialized as JSON next to the canonical circuit text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::QubitId;

/// Key of one recorded MCM outcome: the measured qubit and the op's cycle
/// tag. Unique within a shot (or within one herald attempt).
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct MeasKey {
    pub qubit: QubitId,
    pub cycle: u32,
}

impl MeasKey {
    pub fn new(qubit: QubitId, cycle: u32) -> Self {
        MeasKey { qubit, cycle }
    }
}

/// A detector: a set of measurements whose parity is 0 in the absence of
/// error (references to known initial/final states are already folded in,
/// so every detector's noiseless parity is even).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorDef {
    pub id: u32,
    /// Spatial check index on the ring, 0..N-1.
    pub check: u32,
    /// Time index: 0 = first cycle (vs initial state), 1..cycles-1 = bulk,
    /// cycles = final (vs transversal readout).
    pub cycle: u32,
    pub measurements: Vec<MeasKey>,
}

/// The logical readout: XOR of the listed final measurements, with a
/// software frame correction from the echo bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableDef {
    pub measurements: Vec<MeasKey>,
    pub frame_flip: bool,
}

/// Repetition-code structure consumed by the decoder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepCodeMeta {
    pub distance: u32,
    pub cycles: u32,
    pub phase_sensitive: bool,
    pub detectors: Vec<DetectorDef>,
    pub observable: ObservableDef,
    /// Ring position (= qubit index) holding data index k at the end.
    pub final_data_positions: Vec<QubitId>,
}

/// Which Bell state the blocks target.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellVariant {
    /// |Φ⁺⟩ pairs.
    PhiPlus,
    /// |Ψ⁻⟩ pairs (anti-ferromagnetic variant).
    PsiMinus,
}

#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "UPPERCASE")]
pub enum MeasBasis {
    Xx,
    Yy,
    Zz,
}

impl MeasBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasBasis::Xx => "XX",
            MeasBasis::Yy => "YY",
            MeasBasis::Zz => "ZZ",
        }
    }
}

/// Distillation circuit structure consumed by the analysis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillMeta {
    pub encoded: bool,
    pub basis: MeasBasis,
    pub variant: BellVariant,
    pub data_block: Vec<QubitId>,
    pub bitflip_block: Vec<QubitId>,
    pub phaseflip_block: Vec<QubitId>,
    /// Cycle tag of the reset MCM at the start of each attempt.
    pub reset_cycle: u32,
    /// Cycle tag of the ancilla-block MCM inside the loop.
    pub ancilla_cycle: u32,
    /// Cycle tag of the final data measurement after the loop.
    pub final_cycle: u32,
    /// Expected parity of the final logical pair measurement: true = odd.
    pub expected_odd: bool,
}

/// Ramsey-with-MCM structure: which qubit carries which analysis phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyMeta {
    pub n_mcm_cycles: u32,
    pub include_light: bool,
    /// (qubit, phase quarter-turns) of the final analysis pulse.
    pub phase_of_qubit: Vec<(QubitId, i32)>,
    pub final_cycle: u32,
}

/// GERB structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GerbMeta {
    pub n_blocks: u32,
    pub seed: u64,
    pub pairs: Vec<(QubitId, QubitId)>,
    pub final_cycle: u32,
}

/// JSON sidecar emitted with every generated circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub schema: u32,
    pub kind: String,
    /// Generator parameter echo.
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repcode: Option<RepCodeMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distill: Option<DistillMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramsey: Option<RamseyMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gerb: Option<GerbMeta>,
}

impl CircuitMeta {
    pub fn new(kind: &str) -> Self {
        CircuitMeta {
            schema: 1,
            kind: kind.to_string(),
            params: BTreeMap::new(),
            repcode: None,
            distill: None,
            ramsey: None,
            gerb: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("meta serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
