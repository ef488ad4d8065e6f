//! Deterministic fault injection, used by the matching-graph builder
//! (single-fault propagation) and by fault-injection tests.

use crate::circuit::QubitId;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum PauliKind {
    X,
    Y,
    Z,
}

impl PauliKind {
    pub fn flags(self) -> (bool, bool) {
        match self {
            PauliKind::X => (true, false),
            PauliKind::Y => (true, true),
            PauliKind::Z => (false, true),
        }
    }

    pub const ALL: [PauliKind; 3] = [PauliKind::X, PauliKind::Y, PauliKind::Z];
}

/// Faults to force during a run, independent of the sampled noise.
#[derive(Clone, Debug, Default)]
pub struct FaultPlan {
    /// Apply Pauli on qubit immediately after executing op `op_index`.
    pub pauli_after: Vec<(usize, QubitId, PauliKind)>,
    /// Flip the recorded outcome of qubit at MCM op `op_index`.
    pub flip_outcome: Vec<(usize, QubitId)>,
    /// Force the atom to be lost at MCM op `op_index` (before projection).
    pub force_lost: Vec<(usize, QubitId)>,
}

impl FaultPlan {
    pub fn pauli(op_index: usize, q: QubitId, p: PauliKind) -> Self {
        FaultPlan { pauli_after: vec![(op_index, q, p)], ..Default::default() }
    }

    pub fn readout_flip(op_index: usize, q: QubitId) -> Self {
        FaultPlan { flip_outcome: vec![(op_index, q)], ..Default::default() }
    }

    pub fn lost(op_index: usize, q: QubitId) -> Self {
        FaultPlan { force_lost: vec![(op_index, q)], ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.pauli_after.is_empty() && self.flip_outcome.is_empty() && self.force_lost.is_empty()
    }
}
