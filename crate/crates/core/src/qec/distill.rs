//! Heralded Bell-pair distillation with conditional retries.
//!
//! Three blocks hold Bell pairs (encoded mode: two physical pairs per block,
//! forming a logical Bell pair of the four-qubit error-detecting code).
//! Each attempt resets all blocks through an MCM cycle (which also images
//! the previous attempt's data state), prepares the pairs, applies
//! transversal CNOTs A→B and C→A, and measures blocks B (bit-flip check, Z
//! basis) and C (phase check, X basis) via MCM. The attempt heralds success
//! when every check pair has its expected parity; otherwise the loop body
//! repeats. After success the data block is rotated to the requested basis
//! and measured.

use serde::{Deserialize, Serialize};

use crate::circuit::{
    Circuit, CircuitBuilder, HeraldLoop, NativeOp, ParityGroup, QubitId, Role, Site, ZoneKind,
    ZoneLayout,
};
use crate::engine::record::{MeasValue, ShotRecord};
use crate::qec::meta::{BellVariant, CircuitMeta, DistillMeta, MeasBasis};
use crate::qec::repcode::GenError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillSpec {
    /// Encoded mode: 3 blocks × 4 physical qubits; unencoded: 3 × 2.
    pub encoded: bool,
    pub basis: MeasBasis,
    pub max_retries: u32,
    /// Prepare |Ψ⁻⟩ pairs instead of |Φ⁺⟩ (anti-ferromagnetic variant).
    pub antiferro_variant: bool,
}

/// Cycle tags used inside the distillation program.
pub const RESET_CYCLE: u32 = 0;
pub const ANCILLA_CYCLE: u32 = 1;
pub const FINAL_CYCLE: u32 = 2;

pub fn gen_distillation(spec: &DistillSpec) -> Result<(Circuit, CircuitMeta), GenError> {
    if spec.max_retries < 1 {
        return Err(GenError::BadParameter("max_retries must be >= 1".into()));
    }
    let bs = if spec.encoded { 4u32 } else { 2u32 };
    let n = 3 * bs;
    let layout = ZoneLayout::default();

    let mut b = CircuitBuilder::new(layout);
    for i in 0..n {
        let role = if i < bs { Role::Data } else { Role::Ancilla };
        b.add_qubit(Some(role), Site::new(ZoneKind::Register, i));
    }
    b.meta("kind", "distill");
    b.meta("encoded", spec.encoded);
    b.meta("basis", spec.basis.as_str());
    b.meta("max_retries", spec.max_retries);
    b.meta("variant", if spec.antiferro_variant { "psi_minus" } else { "phi_plus" });

    let q = QubitId;
    let block_a: Vec<QubitId> = (0..bs).map(q).collect();
    let block_b: Vec<QubitId> = (bs..2 * bs).map(q).collect();
    let block_c: Vec<QubitId> = (2 * bs..3 * bs).map(q).collect();
    let all: Vec<QubitId> = (0..n).map(q).collect();
    let mz_site = |qu: QubitId| Site::new(ZoneKind::Mz, qu.0);
    let reg_site = |qu: QubitId| Site::new(ZoneKind::Register, qu.0);

    let body_start = b.op_count();

    // Reset of every block via a full MCM cycle: image, reset, replace lost
    // atoms, and return to the register.
    for &qu in &all {
        b.push(NativeOp::Move { q: qu, to: mz_site(qu) }).unwrap();
    }
    b.push(NativeOp::Mcm { targets: all.clone(), cycle: Some(RESET_CYCLE) }).unwrap();
    b.push(NativeOp::Reset0 { targets: all.clone() }).unwrap();
    b.push(NativeOp::CondFill { zone: ZoneKind::Mz }).unwrap();
    for &qu in &all {
        b.push(NativeOp::Move { q: qu, to: reg_site(qu) }).unwrap();
    }

    // Bell-pair preparation per block: pairs (0,1) and, in encoded mode,
    // (2,3). Two |Φ⁺⟩ (or |Ψ⁻⟩) pairs per block prepare the logical Bell
    // pair of the error-detecting code.
    for block in [&block_a, &block_b, &block_c] {
        for pair in block.chunks(2) {
            let (p0, p1) = (pair[0], pair[1]);
            b.h(p0).unwrap();
            b.cnot(p0, p1).unwrap();
            if spec.antiferro_variant {
                b.push(NativeOp::X { q: p1 }).unwrap();
                b.push(NativeOp::rz(p1, 2)).unwrap();
            }
        }
    }

    // Transversal CNOTs: A→B catches bit flips, C→A catches phase flips.
    for i in 0..bs as usize {
        b.cnot(block_a[i], block_b[i]).unwrap();
    }
    for i in 0..bs as usize {
        b.cnot(block_c[i], block_a[i]).unwrap();
    }

    // Rotate C to the X basis, then measure both ancilla blocks.
    for &qu in &block_c {
        b.h(qu).unwrap();
    }
    let ancillas: Vec<QubitId> = block_b.iter().chain(&block_c).copied().collect();
    for &qu in &ancillas {
        b.push(NativeOp::Move { q: qu, to: mz_site(qu) }).unwrap();
    }
    b.push(NativeOp::Mcm { targets: ancillas.clone(), cycle: Some(ANCILLA_CYCLE) }).unwrap();
    for &qu in &ancillas {
        b.push(NativeOp::Move { q: qu, to: reg_site(qu) }).unwrap();
    }

    let body_end = b.op_count();

    // Herald: every check pair must carry its expected parity. The bit-flip
    // block reads even parity for both variants; the phase block reads odd
    // parity for |Ψ⁻⟩ pairs.
    let mut parity_groups = Vec::new();
    for pair in block_b.chunks(2) {
        parity_groups.push(ParityGroup {
            members: pair.iter().map(|&qu| (qu, ANCILLA_CYCLE)).collect(),
            odd: false,
        });
    }
    for pair in block_c.chunks(2) {
        parity_groups.push(ParityGroup {
            members: pair.iter().map(|&qu| (qu, ANCILLA_CYCLE)).collect(),
            odd: spec.antiferro_variant,
        });
    }

    // Epilogue: rotate the data block to the measurement basis and read it.
    match spec.basis {
        MeasBasis::Zz => {}
        MeasBasis::Xx => {
            for &qu in &block_a {
                b.h(qu).unwrap();
            }
        }
        MeasBasis::Yy => {
            // SX maps the Y component onto the measured Z axis; the trailing
            // virtual RZ keeps the pulse pattern uniform across bases.
            for &qu in &block_a {
                b.push(NativeOp::Sx { q: qu }).unwrap();
                b.push(NativeOp::rz(qu, 1)).unwrap();
            }
        }
    }
    for &qu in &block_a {
        b.push(NativeOp::Move { q: qu, to: mz_site(qu) }).unwrap();
    }
    b.push(NativeOp::Mcm { targets: block_a.clone(), cycle: Some(FINAL_CYCLE) }).unwrap();

    let herald = HeraldLoop {
        body_start,
        body_end,
        max_retries: spec.max_retries,
        parity_groups,
    };
    let circuit = b.build_with_herald(Some(herald));

    // The distilled data block ends in the |Φ⁺⟩-type logical pair for both
    // preparation variants (the anti-ferromagnetic ancilla signs cancel
    // through the transversal CNOTs), so only the YY basis reads odd parity.
    let expected_odd = matches!(spec.basis, MeasBasis::Yy);

    let mut meta = CircuitMeta::new("distill");
    meta.param("encoded", spec.encoded);
    meta.param("basis", spec.basis.as_str());
    meta.param("max_retries", spec.max_retries);
    meta.param("variant", if spec.antiferro_variant { "psi_minus" } else { "phi_plus" });
    meta.distill = Some(DistillMeta {
        encoded: spec.encoded,
        basis: spec.basis,
        variant: if spec.antiferro_variant { BellVariant::PsiMinus } else { BellVariant::PhiPlus },
        data_block: block_a,
        bitflip_block: block_b,
        phaseflip_block: block_c,
        reset_cycle: RESET_CYCLE,
        ancilla_cycle: ANCILLA_CYCLE,
        final_cycle: FINAL_CYCLE,
        expected_odd,
    });
    Ok((circuit, meta))
}

// ---------------------------------------------------------------------------
// Shot tallying
// ---------------------------------------------------------------------------

/// Outcome classification of one data-block readout.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DistillTally {
    pub shots: u64,
    /// Herald never passed within the retry budget (excluded from fidelity).
    pub herald_exhausted: u64,
    /// Logical parity disagreed with the target eigenvalue.
    pub failures: u64,
    /// Parity agreed.
    pub successes: u64,
    /// A detected-but-uncorrectable error in the final readout (stabilizer
    /// parity violation or too many lost atoms); excluded, reported apart.
    pub uncorrectable: u64,
    pub mean_retries: f64,
}

/// Decodes one block readout of `bits` (length 2 or 4, None = lost atom)
/// into a logical pair parity, or None when detection fails.
fn block_parity(bits: &[Option<bool>]) -> Option<bool> {
    let lost = bits.iter().filter(|b| b.is_none()).count();
    match (bits.len(), lost) {
        (2, 0) => Some(bits[0].unwrap() ^ bits[1].unwrap()),
        (2, _) => None,
        (4, 0) => {
            let total =
                bits.iter().fold(false, |acc, b| acc ^ b.unwrap());
            if total {
                // Odd overall parity: a detected single error.
                None
            } else {
                Some(bits[0].unwrap() ^ bits[1].unwrap())
            }
        }
        (4, 1) => {
            // The code corrects one loss: the surviving intact pair carries
            // the same logical parity.
            let lost_idx = bits.iter().position(|b| b.is_none()).unwrap();
            let (p0, p1) = if lost_idx < 2 { (2, 3) } else { (0, 1) };
            Some(bits[p0].unwrap() ^ bits[p1].unwrap())
        }
        _ => None,
    }
}

/// Tallies heralded-success shots: final-basis failures vs the target
/// eigenvalue, with uncorrectable shots excluded and counted separately.
pub fn tally(records: &[ShotRecord], meta: &DistillMeta) -> DistillTally {
    let mut t = DistillTally::default();
    let mut retries_sum = 0.0;
    for rec in records {
        t.shots += 1;
        retries_sum += rec.retries() as f64;
        if rec.herald_exhausted {
            t.herald_exhausted += 1;
            continue;
        }
        let bits: Vec<Option<bool>> = meta
            .data_block
            .iter()
            .map(|&qu| match rec.outcome_at(qu, meta.final_cycle, 0) {
                Some(MeasValue::Zero) => Some(false),
                Some(MeasValue::One) => Some(true),
                _ => None,
            })
            .collect();
        match block_parity(&bits) {
            None => t.uncorrectable += 1,
            Some(parity) => {
                if parity == meta.expected_odd {
                    t.successes += 1;
                } else {
                    t.failures += 1;
                }
            }
        }
    }
    if t.shots > 0 {
        t.mean_retries = retries_sum / t.shots as f64;
    }
    t
}

/// Logical readout of failed attempts, measured by the *next* attempt's
/// reset MCM (which images the data block before resetting it). Always in
/// the computational basis.
pub fn tally_preherald(records: &[ShotRecord], meta: &DistillMeta) -> DistillTally {
    let mut t = DistillTally::default();
    // Post-distillation states are |Φ⁺⟩-type for both variants: ZZ reads
    // even parity.
    let expected_odd = false;
    for rec in records {
        let n_attempts = rec.attempts.len() as u32;
        for attempt in &rec.attempts {
            if attempt.herald_pass || attempt.index + 1 > n_attempts {
                continue;
            }
            // The reset of attempt k+1 measured the failed state of attempt k.
            let next = attempt.index + 1;
            let bits: Vec<Option<bool>> = meta
                .data_block
                .iter()
                .map(|&qu| {
                    rec.outcomes
                        .iter()
                        .find(|o| {
                            o.qubit == qu
                                && o.cycle == Some(meta.reset_cycle)
                                && o.attempt == next
                        })
                        .and_then(|o| o.value.bit())
                })
                .collect();
            if bits.iter().all(|b| b.is_none()) {
                continue;
            }
            t.shots += 1;
            match block_parity(&bits) {
                None => t.uncorrectable += 1,
                Some(parity) => {
                    if parity == expected_odd {
                        t.successes += 1;
                    } else {
                        t.failures += 1;
                    }
                }
            }
        }
    }
    t
}
