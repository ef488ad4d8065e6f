//! Dense statevector oracle for validating the tableau engine on small
//! (≤ 6 qubit), noiseless circuits, with identical measurement-sampling
//! semantics. Also supports exact enumeration of outcome-record
//! distributions for goodness-of-fit checks.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::circuit::{Circuit, NativeOp, QubitId};
use crate::rng::ShotRng;

pub const MAX_ORACLE_QUBITS: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("statevector oracle limited to {MAX_ORACLE_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("statevector oracle is noiseless and does not support {0}")]
    UnsupportedOp(String),
}

/// Dense state over n qubits; amplitude index bit q is qubit q.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero_state(n: usize) -> Result<Self, OracleError> {
        if n > MAX_ORACLE_QUBITS {
            return Err(OracleError::TooManyQubits(n));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    fn apply_1q(&mut self, q: usize, m: [[C64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn rz(&mut self, q: usize, quarter_turns: u8) {
        // diag(1, i^k) — equal to RZ(kπ/2) up to global phase.
        let i_pow = match quarter_turns & 3 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                self.amps[i] *= i_pow;
            }
        }
    }

    pub fn sx(&mut self, q: usize) {
        let h = 0.5;
        let m = [
            [C64::new(h, h), C64::new(h, -h)],
            [C64::new(h, -h), C64::new(h, h)],
        ];
        self.apply_1q(q, m);
    }

    pub fn x(&mut self, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let m = [
            [C64::new(r, 0.0), C64::new(r, 0.0)],
            [C64::new(r, 0.0), C64::new(-r, 0.0)],
        ];
        self.apply_1q(q, m);
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let ma = 1usize << a;
        let mb = 1usize << b;
        for i in 0..self.amps.len() {
            if i & ma != 0 && i & mb != 0 {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Project onto outcome and renormalize. Returns the branch probability.
    pub fn project(&mut self, q: usize, outcome: bool) -> f64 {
        let bit = 1usize << q;
        let p = if outcome { self.prob_one(q) } else { 1.0 - self.prob_one(q) };
        let norm = p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit != 0) != outcome) || norm == 0.0 {
                if (i & bit != 0) != outcome {
                    *a = C64::new(0.0, 0.0);
                }
            } else {
                *a /= norm;
            }
        }
        p
    }

    pub fn measure(&mut self, q: usize, rng: &mut ShotRng) -> bool {
        let p1 = self.prob_one(q);
        let outcome = rng.uniform() < p1;
        self.project(q, outcome);
        outcome
    }
}

/// One sampled run of a noiseless circuit through the dense oracle.
/// Returns the ordered measurement record (MCM targets in op order).
pub fn run_oracle(circuit: &Circuit, seed: u64) -> Result<Vec<bool>, OracleError> {
    let n = circuit.n_qubits();
    let mut sv = StateVector::zero_state(n)?;
    let mut rng = ShotRng::from_seed(seed);
    let slot = |q: QubitId| circuit.slot_of(q).expect("validated circuit");
    let mut record = Vec::new();
    for op in &circuit.ops {
        match op {
            NativeOp::Rz { q, angle } => sv.rz(slot(*q), angle.turns_mod4()),
            NativeOp::Sx { q } => sv.sx(slot(*q)),
            NativeOp::X { q } => sv.x(slot(*q)),
            NativeOp::Cz { a, b } => sv.cz(slot(*a), slot(*b)),
            NativeOp::Mcm { targets, .. } => {
                for t in targets {
                    record.push(sv.measure(slot(*t), &mut rng));
                }
            }
            NativeOp::Reset0 { targets } => {
                for t in targets {
                    let q = slot(*t);
                    if sv.measure(q, &mut rng) {
                        sv.x(q);
                    }
                }
            }
            NativeOp::Move { .. } | NativeOp::Idle { .. } => {}
            other => return Err(OracleError::UnsupportedOp(format!("{other:?}"))),
        }
    }
    Ok(record)
}

/// Exact distribution over measurement records of a noiseless circuit,
/// obtained by branching at every measurement. Records are bit vectors in
/// op order; probabilities sum to 1 within numerical error.
pub fn enumerate_outcomes(circuit: &Circuit) -> Result<Vec<(Vec<bool>, f64)>, OracleError> {
    let n = circuit.n_qubits();
    let sv = StateVector::zero_state(n)?;
    let mut out = Vec::new();
    recurse(circuit, 0, sv, Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

fn recurse(
    circuit: &Circuit,
    op_index: usize,
    mut sv: StateVector,
    record: Vec<bool>,
    prob: f64,
    out: &mut Vec<(Vec<bool>, f64)>,
) -> Result<(), OracleError> {
    let slot = |q: QubitId| circuit.slot_of(q).expect("validated circuit");
    let mut record = record;
    for (i, op) in circuit.ops.iter().enumerate().skip(op_index) {
        match op {
            NativeOp::Rz { q, angle } => sv.rz(slot(*q), angle.turns_mod4()),
            NativeOp::Sx { q } => sv.sx(slot(*q)),
            NativeOp::X { q } => sv.x(slot(*q)),
            NativeOp::Cz { a, b } => sv.cz(slot(*a), slot(*b)),
            NativeOp::Mcm { targets, .. } | NativeOp::Reset0 { targets } => {
                let is_reset = matches!(op, NativeOp::Reset0 { .. });
                // Branch on the first target; re-enter for the rest by
                // rewriting the op list view. Simplest: branch one target at
                // a time via an expanded recursion.
                return branch_targets(
                    circuit, i, sv, record, prob, targets, 0, is_reset, out,
                );
            }
            NativeOp::Move { .. } | NativeOp::Idle { .. } => {}
            other => return Err(OracleError::UnsupportedOp(format!("{other:?}"))),
        }
        let _ = &mut record;
    }
    if prob > 1e-12 {
        out.push((record, prob));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn branch_targets(
    circuit: &Circuit,
    op_index: usize,
    sv: StateVector,
    record: Vec<bool>,
    prob: f64,
    targets: &[QubitId],
    t_index: usize,
    is_reset: bool,
    out: &mut Vec<(Vec<bool>, f64)>,
) -> Result<(), OracleError> {
    if t_index == targets.len() {
        return recurse(circuit, op_index + 1, sv, record, prob, out);
    }
    let q = circuit.slot_of(targets[t_index]).expect("validated circuit");
    for outcome in [false, true] {
        let mut branch = sv.clone();
        let p = branch.project(q, outcome);
        if p <= 1e-12 {
            continue;
        }
        let mut rec = record.clone();
        if is_reset {
            if outcome {
                branch.x(q);
            }
        } else {
            rec.push(outcome);
        }
        branch_targets(circuit, op_index, branch, rec, prob * p, targets, t_index + 1, is_reset, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, Role, Site, ZoneKind, ZoneLayout};

    fn builder(n: usize) -> CircuitBuilder {
        let mut b = CircuitBuilder::new(ZoneLayout::default());
        for i in 0..n {
            b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Mz, i as u32));
        }
        b
    }

    #[test]
    fn bell_prep_amplitudes() {
        // H(0), then CNOT(0→1) as H(1)·CZ·H(1): |00⟩ → (|00⟩ + |11⟩)/√2.
        let mut sv = StateVector::zero_state(2).unwrap();
        sv.h(0);
        sv.h(1);
        sv.cz(0, 1);
        sv.h(1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let a = sv.amplitudes();
        assert!((a[0].re - r).abs() < 1e-12);
        assert!((a[3].re - r).abs() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
    }

    #[test]
    fn native_h_equals_h_up_to_phase() {
        // RZ(1)·SX·RZ(1) must act as H on both basis states up to a global
        // phase common to the whole map.
        let mut sv = StateVector::zero_state(1).unwrap();
        sv.rz(0, 1);
        sv.sx(0);
        sv.rz(0, 1);
        let a = sv.amplitudes().to_vec();
        let norm0 = a[0].norm();
        let norm1 = a[1].norm();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((norm0 - r).abs() < 1e-12 && (norm1 - r).abs() < 1e-12);
        // Relative phase between components must be 0 (H|0⟩ = |+⟩).
        let rel = (a[1] / a[0]).re;
        assert!((rel - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compile_cnot_truth_table() {
        // H(t)·CZ·H(t) on each computational basis input.
        for (c_in, t_in) in [(false, false), (false, true), (true, false), (true, true)] {
            let mut sv = StateVector::zero_state(2).unwrap();
            if c_in {
                sv.x(0);
            }
            if t_in {
                sv.x(1);
            }
            sv.rz(1, 1);
            sv.sx(1);
            sv.rz(1, 1);
            sv.cz(0, 1);
            sv.rz(1, 1);
            sv.sx(1);
            sv.rz(1, 1);
            let want = (c_in as usize) | (((t_in ^ c_in) as usize) << 1);
            let amp = sv.amplitudes()[want].norm();
            assert!((amp - 1.0).abs() < 1e-10, "basis ({c_in},{t_in})");
        }
    }

    #[test]
    fn double_native_h_is_identity() {
        let mut b = builder(1);
        b.h(crate::circuit::QubitId(0)).unwrap();
        b.h(crate::circuit::QubitId(0)).unwrap();
        let c = b.build();
        let dist = enumerate_outcomes(&c).unwrap();
        // No measurements: single branch with probability 1 and empty record.
        assert_eq!(dist.len(), 1);
        assert!(dist[0].0.is_empty());
        assert!((dist[0].1 - 1.0).abs() < 1e-12);
    }

    /// Build the 2ⁿ×2ⁿ matrix of an op sequence by evolving basis states.
    fn unitary_of(n: usize, ops: &[crate::circuit::NativeOp]) -> Vec<Vec<C64>> {
        use crate::circuit::NativeOp;
        let dim = 1usize << n;
        let mut cols = Vec::with_capacity(dim);
        for basis in 0..dim {
            let mut sv = StateVector::zero_state(n).unwrap();
            for q in 0..n {
                if basis & (1 << q) != 0 {
                    sv.x(q);
                }
            }
            for op in ops {
                match op {
                    NativeOp::Rz { q, angle } => sv.rz(q.0 as usize, angle.turns_mod4()),
                    NativeOp::Sx { q } => sv.sx(q.0 as usize),
                    NativeOp::X { q } => sv.x(q.0 as usize),
                    NativeOp::Cz { a, b } => sv.cz(a.0 as usize, b.0 as usize),
                    other => panic!("unitary_of: unsupported {other:?}"),
                }
            }
            cols.push(sv.amplitudes().to_vec());
        }
        cols
    }

    /// |tr(U†V)| = 2ⁿ iff U = V up to global phase.
    fn trace_overlap(u: &[Vec<C64>], v: &[Vec<C64>]) -> f64 {
        let dim = u.len();
        let mut tr = C64::new(0.0, 0.0);
        for c in 0..dim {
            for r in 0..dim {
                tr += u[c][r].conj() * v[c][r];
            }
        }
        tr.norm()
    }

    #[test]
    fn compiled_gates_match_textbook_unitaries_up_to_phase() {
        use crate::circuit::{cnot_sequence, h_sequence, QubitId};
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // H (columns of the textbook matrix).
        let h_cols = vec![
            vec![C64::new(r, 0.0), C64::new(r, 0.0)],
            vec![C64::new(r, 0.0), C64::new(-r, 0.0)],
        ];
        let u = unitary_of(1, &h_sequence(QubitId(0)));
        assert!((trace_overlap(&u, &h_cols) - 2.0).abs() < 1e-12);

        // CNOT (control = qubit 0, target = qubit 1).
        let mut cnot_cols = vec![vec![C64::new(0.0, 0.0); 4]; 4];
        for (input, output) in [(0usize, 0usize), (1, 3), (2, 2), (3, 1)] {
            cnot_cols[input][output] = C64::new(1.0, 0.0);
        }
        let u = unitary_of(2, &cnot_sequence(QubitId(0), QubitId(1)).unwrap());
        assert!(
            (trace_overlap(&u, &cnot_cols) - 4.0).abs() < 1e-12,
            "overlap {}",
            trace_overlap(&u, &cnot_cols)
        );
    }

    #[test]
    fn enumeration_matches_bell_statistics() {
        let mut b = builder(2);
        b.h(crate::circuit::QubitId(0)).unwrap();
        b.cnot(crate::circuit::QubitId(0), crate::circuit::QubitId(1)).unwrap();
        b.push(crate::circuit::NativeOp::Mcm {
            targets: vec![crate::circuit::QubitId(0), crate::circuit::QubitId(1)],
            cycle: Some(0),
        })
        .unwrap();
        let c = b.build();
        let mut dist = enumerate_outcomes(&c).unwrap();
        dist.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(dist.len(), 2);
        assert_eq!(dist[0].0, vec![false, false]);
        assert_eq!(dist[1].0, vec![true, true]);
        assert!((dist[0].1 - 0.5).abs() < 1e-12);
        assert!((dist[1].1 - 0.5).abs() < 1e-12);
    }
}
