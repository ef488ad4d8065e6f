//! Walking ring/repetition code generator.
//!
//! The code is a distance-N repetition code on a ring of 2N atoms with
//! swap-compiled syndrome extraction: each cycle the information stored at
//! ring position i moves to position i+1 (mod 2N), the freshly written
//! parity checks are measured via MCM, and the measured atoms are reset and
//! (if lost) replaced from the reservoir. Every atom is measured at least
//! once every two cycles and touches at most 4 CZ gates in between.
//!
//! Per cycle (par = cycle mod 2, data at positions ≡ par):
//!   layer A: CNOT(p → p+1) for every data position p — copies data right;
//!   layer B: CNOT(p+1 → p+2) — turns old data sites into parity checks.
//! Positions ≡ par then hold the N ring parities and are measured; the odd
//! check count (N, not N−1) closes the ring so no spatial boundary exists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    Circuit, CircuitBuilder, NativeOp, QubitId, Role, Site, ZoneKind, ZoneLayout,
};
use crate::qec::meta::{CircuitMeta, DetectorDef, MeasKey, ObservableDef, RepCodeMeta};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepCodeSpec {
    /// Code distance N: odd, ≥ 3. Uses 2N physical qubits.
    pub distance: u32,
    /// Syndrome-extraction cycles, ≥ 1.
    pub cycles: u32,
    /// Insert Hadamard pairs around each MCM on idle qubits, making the code
    /// sensitive to phase errors during measurement.
    pub phase_sensitive: bool,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("distance must be odd and >= 3, got {0}")]
    BadDistance(u32),
    #[error("cycles must be >= 1, got {0}")]
    BadCycles(u32),
    #[error("distance {0} needs more sites than the measurement zone holds")]
    TooLarge(u32),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

/// Ring position measuring the parity of data pair (k, k+1 mod N) at cycle c.
pub fn check_position(n: u32, k: u32, c: u32) -> u32 {
    (2 * k + 2 + c) % (2 * n)
}

/// Ring position holding data index k at the END of cycle c−1 (equivalently
/// at the start of cycle c).
pub fn data_position(n: u32, k: u32, c: u32) -> u32 {
    (2 * k + c) % (2 * n)
}

pub fn gen_walking_repcode(spec: &RepCodeSpec) -> Result<(Circuit, CircuitMeta), GenError> {
    let n = spec.distance;
    if n < 3 || n.is_multiple_of(2) {
        return Err(GenError::BadDistance(n));
    }
    if spec.cycles < 1 {
        return Err(GenError::BadCycles(spec.cycles));
    }
    let layout = ZoneLayout::default();
    if n > layout.zone(ZoneKind::Mz).capacity || 2 * n > 64 {
        return Err(GenError::TooLarge(n));
    }
    let ring = 2 * n;
    let cycles = spec.cycles;

    let mut b = CircuitBuilder::new(layout);
    // Qubit p = ring position p; home site REG:p. Initial roles follow the
    // first cycle (even positions hold data).
    for p in 0..ring {
        let role = if p % 2 == 0 { Role::Data } else { Role::Ancilla };
        b.add_qubit(Some(role), Site::new(ZoneKind::Register, p));
    }
    b.meta("kind", "repcode");
    b.meta("distance", n);
    b.meta("cycles", cycles);
    b.meta("phase_sensitive", spec.phase_sensitive);
    b.meta("seed", spec.seed);

    let q = |p: u32| QubitId(p % ring);
    for c in 0..cycles {
        let par = c % 2;
        // Syndrome extraction with the swap folded in.
        for j in 0..n {
            b.cnot(q(2 * j + par), q(2 * j + par + 1)).unwrap();
        }
        for j in 0..n {
            b.cnot(q(2 * j + par + 1), q(2 * j + par + 2)).unwrap();
        }
        let measured: Vec<QubitId> = (0..n).map(|j| q(2 * j + par)).collect();
        let idle: Vec<QubitId> = (0..n).map(|j| q(2 * j + par + 1)).collect();
        for (site, &m) in measured.iter().enumerate() {
            b.push(NativeOp::Move { q: m, to: Site::new(ZoneKind::Mz, site as u32) })
                .unwrap();
        }
        if spec.phase_sensitive {
            for &i in &idle {
                b.h(i).unwrap();
            }
        }
        b.push(NativeOp::Mcm { targets: measured.clone(), cycle: Some(c) }).unwrap();
        // Echo pulse on the non-measured qubits during the MCM block.
        for &i in &idle {
            b.push(NativeOp::X { q: i }).unwrap();
        }
        if spec.phase_sensitive {
            for &i in &idle {
                b.h(i).unwrap();
            }
        }
        b.push(NativeOp::Reset0 { targets: measured.clone() }).unwrap();
        b.push(NativeOp::CondFill { zone: ZoneKind::Mz }).unwrap();
        for &m in &measured {
            b.push(NativeOp::Move { q: m, to: Site::new(ZoneKind::Register, m.0) })
                .unwrap();
        }
    }
    // Final transversal readout of the walked data half.
    let data_final: Vec<QubitId> = (0..n).map(|k| q(data_position(n, k, cycles))).collect();
    for (site, &d) in data_final.iter().enumerate() {
        b.push(NativeOp::Move { q: d, to: Site::new(ZoneKind::Mz, site as u32) })
            .unwrap();
    }
    b.push(NativeOp::Mcm { targets: data_final.clone(), cycle: Some(cycles) }).unwrap();

    let circuit = b.build();

    // Detector definitions. All references to known initial/final states are
    // parity-invariant under the echo frame, so every detector's noiseless
    // parity is 0.
    let mut detectors = Vec::new();
    let mut id = 0u32;
    for k in 0..n {
        detectors.push(DetectorDef {
            id,
            check: k,
            cycle: 0,
            measurements: vec![MeasKey::new(q(check_position(n, k, 0)), 0)],
        });
        id += 1;
    }
    for c in 1..cycles {
        for k in 0..n {
            detectors.push(DetectorDef {
                id,
                check: k,
                cycle: c,
                measurements: vec![
                    MeasKey::new(q(check_position(n, k, c - 1)), c - 1),
                    MeasKey::new(q(check_position(n, k, c)), c),
                ],
            });
            id += 1;
        }
    }
    for k in 0..n {
        detectors.push(DetectorDef {
            id,
            check: k,
            cycle: cycles,
            measurements: vec![
                MeasKey::new(q(check_position(n, k, cycles - 1)), cycles - 1),
                MeasKey::new(q(data_position(n, k, cycles)), cycles),
                MeasKey::new(q(data_position(n, k + 1, cycles)), cycles),
            ],
        });
        id += 1;
    }

    // The echo X lands once per cycle on the walked data; in the
    // phase-sensitive variant it is conjugated to Z by the Hadamard pair and
    // leaves the bit frame alone.
    let frame_flip = !spec.phase_sensitive && cycles % 2 == 1;
    let observable = ObservableDef {
        measurements: vec![MeasKey::new(q(data_position(n, 0, cycles)), cycles)],
        frame_flip,
    };

    let mut meta = CircuitMeta::new("repcode");
    meta.param("distance", n);
    meta.param("cycles", cycles);
    meta.param("phase_sensitive", spec.phase_sensitive);
    meta.param("seed", spec.seed);
    meta.repcode = Some(RepCodeMeta {
        distance: n,
        cycles,
        phase_sensitive: spec.phase_sensitive,
        detectors,
        observable,
        final_data_positions: data_final,
    });
    Ok((circuit, meta))
}
