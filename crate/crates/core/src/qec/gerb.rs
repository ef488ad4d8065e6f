//! Global-echo randomized benchmarking: N repeated blocks of a random
//! global 1Q operation and two CZ gates separated by an echo pulse, followed
//! by a precomputed inversion that returns every pair to |11⟩ in the absence
//! of errors.
//!
//! The echo identity CZ·(X⊗X)·CZ = Y⊗Y makes each block act as the product
//! single-qubit operator (Y·C)⊗(Y·C), so the inversion is a single-qubit
//! Clifford computed by tracking the stabilizer of |1⟩ through the blocks.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, NativeOp, QubitId, Role, Site, ZoneKind, ZoneLayout};
use crate::qec::clifford1q::{clifford_group, map_stabilizer_to, Axis, SignedPauli};
use crate::qec::meta::{CircuitMeta, GerbMeta};
use crate::qec::repcode::GenError;
use crate::rng::ShotRng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GerbSpec {
    pub n_blocks: u32,
    pub pair_count: u32,
    pub seed: u64,
}

pub fn gen_gerb(spec: &GerbSpec) -> Result<(Circuit, CircuitMeta), GenError> {
    if spec.pair_count == 0 {
        return Err(GenError::BadParameter("pair_count must be >= 1".into()));
    }
    let n_qubits = 2 * spec.pair_count;
    let layout = ZoneLayout::default();
    if n_qubits > layout.zone(ZoneKind::Mz).capacity || n_qubits > 64 {
        return Err(GenError::TooLarge(spec.pair_count));
    }

    let mut b = CircuitBuilder::new(layout);
    let mut pairs = Vec::new();
    for p in 0..spec.pair_count {
        let a = b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Register, 2 * p));
        let bq = b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Register, 2 * p + 1));
        pairs.push((a, bq));
    }
    b.meta("kind", "gerb");
    b.meta("n_blocks", spec.n_blocks);
    b.meta("pair_count", spec.pair_count);
    b.meta("seed", spec.seed);

    let all: Vec<QubitId> = (0..n_qubits).map(QubitId).collect();

    // Prepare |11⟩ on every pair.
    for &q in &all {
        b.push(NativeOp::X { q }).unwrap();
    }

    // Stabilizer of each (identical) qubit, tracked through the blocks.
    let mut stab = SignedPauli::MINUS_Z; // |1⟩
    let group = clifford_group();
    let mut rng = ShotRng::from_seed(spec.seed);
    let y = SignedPauli { axis: Axis::Y, neg: false };

    for _ in 0..spec.n_blocks {
        let c = &group[rng.below(group.len())];
        // Random global 1Q operation on every qubit.
        for &q in &all {
            b.push_all(c.native_ops(q)).unwrap();
        }
        // Two CZ layers separated by a global echo pulse.
        for &(qa, qb) in &pairs {
            b.push(NativeOp::Cz { a: qa, b: qb }).unwrap();
        }
        for &q in &all {
            b.push(NativeOp::X { q }).unwrap();
        }
        for &(qa, qb) in &pairs {
            b.push(NativeOp::Cz { a: qa, b: qb }).unwrap();
        }
        // Net per-qubit action of the block: first C, then Y (echo folds the
        // CZ pair into Y⊗Y).
        stab = c.conjugate(stab);
        stab = conj_by_y(stab, y);
    }

    // Inversion returning the tracked state to |1⟩ on every qubit.
    let inv = map_stabilizer_to(stab, SignedPauli::MINUS_Z);
    for &q in &all {
        b.push_all(inv.native_ops(q)).unwrap();
    }

    // Readout.
    for (i, &q) in all.iter().enumerate() {
        b.push(NativeOp::Move { q, to: Site::new(ZoneKind::Mz, i as u32) }).unwrap();
    }
    b.push(NativeOp::Mcm { targets: all.clone(), cycle: Some(0) }).unwrap();

    let circuit = b.build();
    let mut meta = CircuitMeta::new("gerb");
    meta.param("n_blocks", spec.n_blocks);
    meta.param("pair_count", spec.pair_count);
    meta.param("seed", spec.seed);
    meta.gerb = Some(GerbMeta { n_blocks: spec.n_blocks, seed: spec.seed, pairs, final_cycle: 0 });
    Ok((circuit, meta))
}

/// Conjugation by Y: X → −X, Z → −Z, Y → Y.
fn conj_by_y(p: SignedPauli, _y: SignedPauli) -> SignedPauli {
    match p.axis {
        Axis::Y => p,
        _ => SignedPauli { axis: p.axis, neg: !p.neg },
    }
}

/// Per-pair GERB outcome tallies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GerbTally {
    pub shots: u64,
    /// Both atoms of the pair survived to readout.
    pub pair_survivals: u64,
    /// Both survived and read |11⟩.
    pub successes: u64,
    /// Successes among surviving pairs only.
    pub success_given_survival: f64,
    pub total_success_probability: f64,
    pub survival_probability: f64,
}

pub fn tally(records: &[crate::engine::record::ShotRecord], meta: &GerbMeta) -> GerbTally {
    use crate::engine::record::MeasValue;
    let mut t = GerbTally::default();
    for rec in records {
        for &(qa, qb) in &meta.pairs {
            t.shots += 1;
            let va = rec.outcome_at(qa, meta.final_cycle, 0);
            let vb = rec.outcome_at(qb, meta.final_cycle, 0);
            let (Some(va), Some(vb)) = (va, vb) else { continue };
            if va == MeasValue::Lost || vb == MeasValue::Lost {
                continue;
            }
            t.pair_survivals += 1;
            if va == MeasValue::One && vb == MeasValue::One {
                t.successes += 1;
            }
        }
    }
    if t.shots > 0 {
        t.total_success_probability = t.successes as f64 / t.shots as f64;
        t.survival_probability = t.pair_survivals as f64 / t.shots as f64;
    }
    if t.pair_survivals > 0 {
        t.success_given_survival = t.successes as f64 / t.pair_survivals as f64;
    }
    t
}
