//! Ramsey sequences with interleaved MCM cycles, used to extract register
//! contrast and atom loss per cycle. One register qubit per analysis-phase
//! entry; a set of dummy MZ atoms is measured and reset every cycle. With
//! the light off, each MCM block degrades to an idle period of the same
//! duration (timing-based noise only).

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, NativeOp, QubitId, Role, Site, ZoneKind, ZoneLayout};
use crate::engine::record::{MeasValue, ShotRecord};
use crate::qec::meta::{CircuitMeta, RamseyMeta};
use crate::qec::repcode::GenError;

/// Dummy atoms measured in the MZ during each cycle.
pub const MZ_DUMMIES: u32 = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseySpec {
    pub n_mcm_cycles: u32,
    /// With the light off, MCM blocks become idle periods of equal duration.
    pub include_light: bool,
    /// Analysis phases in quarter turns; one register qubit per entry.
    pub phase_scan: Vec<i32>,
    /// Wall time of one MCM block, used for the light-off idle periods.
    pub block_ms: f64,
}

impl Default for RamseySpec {
    fn default() -> Self {
        RamseySpec {
            n_mcm_cycles: 0,
            include_light: true,
            phase_scan: vec![0, 1, 2, 3],
            block_ms: 23.0,
        }
    }
}

pub fn gen_ramsey_mcm(spec: &RamseySpec) -> Result<(Circuit, CircuitMeta), GenError> {
    if spec.phase_scan.is_empty() {
        return Err(GenError::BadParameter("phase_scan must be non-empty".into()));
    }
    let n_reg = spec.phase_scan.len() as u32;
    let layout = ZoneLayout::default();
    if n_reg > layout.zone(ZoneKind::Register).capacity
        || n_reg + MZ_DUMMIES > layout.zone(ZoneKind::Mz).capacity
        || n_reg + MZ_DUMMIES > 64
    {
        return Err(GenError::TooLarge(n_reg));
    }

    let mut b = CircuitBuilder::new(layout);
    let reg: Vec<QubitId> = (0..n_reg)
        .map(|i| b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Register, i)))
        .collect();
    let dummies: Vec<QubitId> = (0..MZ_DUMMIES)
        .map(|i| b.add_qubit(Some(Role::Ancilla), Site::new(ZoneKind::Mz, i)))
        .collect();
    b.meta("kind", "ramsey_mcm");
    b.meta("n_mcm_cycles", spec.n_mcm_cycles);
    b.meta("include_light", spec.include_light);

    // Opening π/2 pulse.
    for &q in &reg {
        b.push(NativeOp::Sx { q }).unwrap();
    }

    for c in 0..spec.n_mcm_cycles {
        if spec.include_light {
            b.push(NativeOp::Mcm { targets: dummies.clone(), cycle: Some(c) }).unwrap();
            // Composite echo pulse on the register during the block.
            for &q in &reg {
                b.push(NativeOp::X { q }).unwrap();
            }
            b.push(NativeOp::Reset0 { targets: dummies.clone() }).unwrap();
            b.push(NativeOp::CondFill { zone: ZoneKind::Mz }).unwrap();
        } else {
            b.push(NativeOp::Idle { ms: spec.block_ms }).unwrap();
            for &q in &reg {
                b.push(NativeOp::X { q }).unwrap();
            }
        }
    }

    // Phase-scanned closing π/2 pulse.
    for (i, &q) in reg.iter().enumerate() {
        let k = spec.phase_scan[i].rem_euclid(4);
        if k != 0 {
            b.push(NativeOp::rz(q, k)).unwrap();
        }
        b.push(NativeOp::Sx { q }).unwrap();
    }

    // Readout: move register qubits next to the dummies and image everything.
    for (i, &q) in reg.iter().enumerate() {
        b.push(NativeOp::Move { q, to: Site::new(ZoneKind::Mz, MZ_DUMMIES + i as u32) })
            .unwrap();
    }
    let final_cycle = spec.n_mcm_cycles;
    // The dummies share the imaged zone, so the final image reads them too.
    let mut final_targets = reg.clone();
    final_targets.extend(&dummies);
    b.push(NativeOp::Mcm { targets: final_targets, cycle: Some(final_cycle) }).unwrap();

    let circuit = b.build();
    let mut meta = CircuitMeta::new("ramsey_mcm");
    meta.param("n_mcm_cycles", spec.n_mcm_cycles);
    meta.param("include_light", spec.include_light);
    meta.param("block_ms", spec.block_ms);
    meta.ramsey = Some(RamseyMeta {
        n_mcm_cycles: spec.n_mcm_cycles,
        include_light: spec.include_light,
        phase_of_qubit: reg
            .iter()
            .zip(&spec.phase_scan)
            .map(|(&q, &p)| (q, p))
            .collect(),
        final_cycle,
    });
    Ok((circuit, meta))
}

/// Survival and phase-resolved brightness of the register qubits.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RamseyTally {
    pub register_trials: u64,
    pub register_survivals: u64,
    /// (phase quarter-turns, P(1) among survivors).
    pub p1_by_phase: Vec<(i32, f64)>,
    pub contrast: f64,
    pub survival: f64,
}

pub fn tally(records: &[ShotRecord], meta: &RamseyMeta) -> RamseyTally {
    use std::collections::BTreeMap;
    let mut t = RamseyTally::default();
    // phase → (ones, survivors)
    let mut by_phase: BTreeMap<i32, (u64, u64)> = BTreeMap::new();
    for rec in records {
        for &(q, phase) in &meta.phase_of_qubit {
            t.register_trials += 1;
            match rec.outcome_at(q, meta.final_cycle, 0) {
                Some(MeasValue::Lost) | None => {}
                Some(v) => {
                    t.register_survivals += 1;
                    let e = by_phase.entry(phase).or_insert((0, 0));
                    e.0 += (v == MeasValue::One) as u64;
                    e.1 += 1;
                }
            }
        }
    }
    t.p1_by_phase = by_phase
        .into_iter()
        .map(|(phase, (ones, n))| (phase, if n > 0 { ones as f64 / n as f64 } else { 0.0 }))
        .collect();
    if t.register_trials > 0 {
        t.survival = t.register_survivals as f64 / t.register_trials as f64;
    }
    t.contrast = crate::analysis::contrast_quadrature(&t.p1_by_phase).unwrap_or(0.0);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::noise::NoiseModel;
    use crate::engine::run_batch;

    #[test]
    fn zero_cycles_noiseless_contrast_is_one() {
        let spec = RamseySpec::default();
        let (c, meta) = gen_ramsey_mcm(&spec).unwrap();
        assert!(c.validate().is_ok(), "{}", c.validate());
        let recs = run_batch(&c, &NoiseModel::noiseless(), 400, 7).unwrap();
        let t = tally(&recs, &meta.ramsey.unwrap());
        assert_eq!(t.survival, 1.0);
        assert!((t.contrast - 1.0).abs() < 0.1, "contrast {}", t.contrast);
    }

    #[test]
    fn register_survival_tracks_per_cycle_loss() {
        // 10 cycles at the measured per-cycle register loss: survival must
        // sit near (1 − p)^10 within a few binomial sigma.
        let mut noise = NoiseModel::noiseless();
        noise.p_register_loss_per_mcm = 0.0106;
        let spec = RamseySpec {
            n_mcm_cycles: 10,
            include_light: true,
            phase_scan: vec![0, 1, 2, 3, 0, 1, 2, 3],
            block_ms: 23.0,
        };
        let (c, meta) = gen_ramsey_mcm(&spec).unwrap();
        let shots = 3000u64;
        let recs = run_batch(&c, &noise, shots, 13).unwrap();
        let t = tally(&recs, &meta.ramsey.unwrap());
        let expect = (1.0f64 - 0.0106).powi(10);
        let n = t.register_trials as f64;
        let sigma = (expect * (1.0 - expect) / n).sqrt();
        assert!(
            (t.survival - expect).abs() < 5.0 * sigma,
            "survival {} vs expected {expect}",
            t.survival
        );
    }

    #[test]
    fn light_off_survival_matches_vacuum_binomial() {
        // With the light off only the vacuum-limited idle loss applies:
        // survival ≈ (1 − block/τ)^n, cross-checked in closed form.
        let noise = NoiseModel::bench_defaults();
        let n_cycles = 10u32;
        let spec = RamseySpec {
            n_mcm_cycles: n_cycles,
            include_light: false,
            phase_scan: vec![0, 1, 2, 3],
            block_ms: 23.0,
        };
        let (c, meta) = gen_ramsey_mcm(&spec).unwrap();
        let recs = run_batch(&c, &noise, 4000, 29).unwrap();
        let t = tally(&recs, &meta.ramsey.unwrap());
        let p_idle = 1.0 - (-0.023f64 / noise.vacuum_lifetime_s).exp();
        // The final readout also costs one bright-image survival factor.
        let p_read = 1.0
            - (1.0 - noise.p_mcm_loss_bright)
                * (1.0 - noise.p_background_loss_per_image).powi(2);
        let expect = (1.0 - p_idle).powi(n_cycles as i32) * (1.0 - p_read);
        let n = t.register_trials as f64;
        let sigma = (expect * (1.0 - expect) / n).sqrt();
        assert!(
            (t.survival - expect).abs() < 5.0 * sigma + 2e-3,
            "survival {} vs expected {expect}",
            t.survival
        );
    }

    #[test]
    fn contrast_decays_with_dephasing() {
        let mut noise = NoiseModel::noiseless();
        noise.p_register_dephase_per_mcm = 0.05;
        let contrast_at = |n_cycles: u32| -> f64 {
            let spec = RamseySpec {
                n_mcm_cycles: n_cycles,
                include_light: true,
                phase_scan: vec![0, 1, 2, 3, 0, 1, 2, 3],
                block_ms: 23.0,
            };
            let (c, meta) = gen_ramsey_mcm(&spec).unwrap();
            let recs = run_batch(&c, &noise, 1500, 31).unwrap();
            tally(&recs, &meta.ramsey.unwrap()).contrast
        };
        let c0 = contrast_at(0);
        let c8 = contrast_at(8);
        let expect8 = (1.0f64 - 2.0 * 0.05).powi(8);
        assert!(c0 > 0.95, "zero-cycle contrast {c0}");
        assert!((c8 - expect8).abs() < 0.1, "contrast {c8} vs {expect8}");
    }
}
