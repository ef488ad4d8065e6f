//! Stabilizer tableau extended with per-qubit presence and leakage masks,
//! plus a software Pauli frame that is never physically applied.

use super::tableau::Tableau;
use crate::rng::ShotRng;

/// Simulation state of one shot: tableau over the circuit qubits, presence
/// and leakage masks, and the tracked software frame.
///
/// Loss is absorbing: once an atom is absent, gates skip it and measurements
/// return LOST until it is revived by a conditional fill.
#[derive(Clone, Debug)]
pub struct LossyStabilizerState {
    tableau: Tableau,
    present: u64,
    leaked: u64,
    frame_x: u64,
    frame_z: u64,
}

impl LossyStabilizerState {
    pub fn all_zero(n: usize) -> Self {
        assert!(n <= 64);
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        LossyStabilizerState {
            tableau: Tableau::zero_state(n),
            present: full,
            leaked: 0,
            frame_x: 0,
            frame_z: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.tableau.n_qubits()
    }

    pub fn is_present(&self, slot: usize) -> bool {
        self.present & (1 << slot) != 0
    }

    pub fn is_leaked(&self, slot: usize) -> bool {
        self.leaked & (1 << slot) != 0
    }

    /// Present and inside the qubit subspace: participates in gates.
    pub fn is_active(&self, slot: usize) -> bool {
        self.is_present(slot) && !self.is_leaked(slot)
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    /// Symplectic integrity of the underlying tableau.
    pub fn check_symplectic(&self) -> bool {
        self.tableau.check_symplectic()
    }

    /// Removes the atom: the qubit is first dephased by an unrecorded Z
    /// measurement (tracing out), then marked absent.
    pub fn lose_atom(&mut self, slot: usize, rng: &mut ShotRng) {
        if !self.is_present(slot) {
            return;
        }
        let _ = self.tableau.measure_z(slot, rng);
        self.present &= !(1 << slot);
        self.leaked &= !(1 << slot);
    }

    /// Marks the atom as leaked out of the qubit subspace while still
    /// physically trapped. Dephases like a loss.
    pub fn mark_leaked(&mut self, slot: usize, rng: &mut ShotRng) {
        if !self.is_active(slot) {
            return;
        }
        let _ = self.tableau.measure_z(slot, rng);
        self.leaked |= 1 << slot;
    }

    /// Installs a fresh atom in |0⟩ at this slot.
    pub fn revive(&mut self, slot: usize, rng: &mut ShotRng) {
        self.tableau.reset_zero(slot, rng);
        self.present |= 1 << slot;
        self.leaked &= !(1 << slot);
        self.frame_x &= !(1 << slot);
        self.frame_z &= !(1 << slot);
    }

    // -- Gates: silently skip inactive qubits ------------------------------

    pub fn rz(&mut self, slot: usize, quarter_turns: u8) {
        if self.is_active(slot) {
            self.tableau.rz(slot, quarter_turns);
        }
    }

    pub fn sx(&mut self, slot: usize) {
        if self.is_active(slot) {
            self.tableau.sx(slot);
        }
    }

    pub fn x(&mut self, slot: usize) {
        if self.is_active(slot) {
            self.tableau.x(slot);
        }
    }

    /// Applies CZ only when both operands are active; the caller handles the
    /// partner channel otherwise. Returns whether the gate was applied.
    pub fn cz(&mut self, a: usize, b: usize) -> bool {
        if self.is_active(a) && self.is_active(b) {
            self.tableau.cz(a, b);
            true
        } else {
            false
        }
    }

    /// Pauli error injection (X then Z as flagged).
    pub fn pauli(&mut self, slot: usize, px: bool, pz: bool) {
        if self.is_active(slot) {
            self.tableau.pauli(slot, px, pz);
        }
    }

    /// Projective Z measurement of an active qubit, including the software
    /// frame in the reported value. Caller must check activity.
    pub fn measure_z(&mut self, slot: usize, rng: &mut ShotRng) -> bool {
        debug_assert!(self.is_active(slot));
        self.tableau.measure_z(slot, rng) ^ (self.frame_x & (1 << slot) != 0)
    }

    pub fn reset_zero(&mut self, slot: usize, rng: &mut ShotRng) {
        if self.is_active(slot) {
            self.tableau.reset_zero(slot, rng);
            self.frame_x &= !(1 << slot);
            self.frame_z &= !(1 << slot);
        }
    }

    // -- Software Pauli frame ----------------------------------------------

    pub fn frame_flip_x(&mut self, slot: usize) {
        self.frame_x ^= 1 << slot;
    }

    pub fn frame_flip_z(&mut self, slot: usize) {
        self.frame_z ^= 1 << slot;
    }

    pub fn frame(&self, slot: usize) -> (bool, bool) {
        (self.frame_x & (1 << slot) != 0, self.frame_z & (1 << slot) != 0)
    }
}
