//! Monte-Carlo shot execution: Clifford tableau simulation with qubit loss,
//! three-valued MCM, noise-channel injection, conditional fills, and herald
//! retry loops.
//!
//! Each shot owns its state and a counter-based random stream derived from
//! `(base_seed, shot index)`, so batches are reproducible bit-exactly and
//! independent of worker scheduling.

pub mod fault;
pub mod noise;
pub mod record;
pub mod state;
pub mod statevector;
pub mod tableau;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, NativeOp, QubitId, Site, ZoneKind};
use crate::logistics::{self, ZoneOccupancy};
use crate::rng::{derive_seed, ShotRng};

use fault::FaultPlan;
use noise::NoiseModel;
use record::{AttemptRecord, FillEvent, McmOutcome, MeasValue, ShotRecord};
use state::LossyStabilizerState;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("circuit failed validation:\n{0}")]
    InvalidCircuit(String),
}

/// Executes one shot. The circuit must be structurally valid (see
/// [`crate::circuit::validate`]); `run_batch` checks this once per batch.
pub fn run_shot(circuit: &Circuit, noise: &NoiseModel, seed: u64) -> ShotRecord {
    run_shot_with_faults(circuit, noise, seed, &FaultPlan::default())
}

/// One shot with deterministic fault injection on top of sampled noise.
pub fn run_shot_with_faults(
    circuit: &Circuit,
    noise: &NoiseModel,
    seed: u64,
    faults: &FaultPlan,
) -> ShotRecord {
    let mut exec = Executor::new(circuit, noise, faults, seed);
    exec.run();
    exec.into_record()
}

/// Runs `n_shots` independent shots; shot `i` uses `derive_seed(base_seed, i)`.
/// Results are identical for any worker count.
pub fn run_batch(
    circuit: &Circuit,
    noise: &NoiseModel,
    n_shots: u64,
    base_seed: u64,
) -> Result<Vec<ShotRecord>, EngineError> {
    let report = circuit.validate();
    if !report.is_ok() {
        return Err(EngineError::InvalidCircuit(report.to_string()));
    }
    Ok((0..n_shots)
        .into_par_iter()
        .map(|i| run_shot(circuit, noise, derive_seed(base_seed, i)))
        .collect())
}

/// Sequential variant used by tests that compare against the parallel path.
pub fn run_batch_sequential(
    circuit: &Circuit,
    noise: &NoiseModel,
    n_shots: u64,
    base_seed: u64,
) -> Result<Vec<ShotRecord>, EngineError> {
    let report = circuit.validate();
    if !report.is_ok() {
        return Err(EngineError::InvalidCircuit(report.to_string()));
    }
    Ok((0..n_shots)
        .map(|i| run_shot(circuit, noise, derive_seed(base_seed, i)))
        .collect())
}

struct Executor<'a> {
    circuit: &'a Circuit,
    noise: &'a NoiseModel,
    faults: &'a FaultPlan,
    seed: u64,
    rng: ShotRng,
    state: LossyStabilizerState,
    slot_of: BTreeMap<QubitId, usize>,
    residence: Vec<Site>,
    occupancy: ZoneOccupancy,
    outcomes: Vec<McmOutcome>,
    fills: Vec<FillEvent>,
    attempts: Vec<AttemptRecord>,
    herald_exhausted: bool,
    attempt: u32,
}

impl<'a> Executor<'a> {
    fn new(circuit: &'a Circuit, noise: &'a NoiseModel, faults: &'a FaultPlan, seed: u64) -> Self {
        let n = circuit.n_qubits();
        let mut slot_of = BTreeMap::new();
        let mut residence = Vec::with_capacity(n);
        let mut occupancy = ZoneOccupancy::with_full_reservoir(circuit.layout.clone());
        for (slot, decl) in circuit.qubits.iter().enumerate() {
            slot_of.insert(decl.id, slot);
            residence.push(decl.at);
            debug_assert!(
                !occupancy.is_occupied(decl.at),
                "qubit declared on an occupied site {}",
                decl.at
            );
            occupancy.set(decl.at, true);
        }
        Executor {
            circuit,
            noise,
            faults,
            seed,
            rng: ShotRng::from_seed(seed),
            state: LossyStabilizerState::all_zero(n),
            slot_of,
            residence,
            occupancy,
            outcomes: Vec::new(),
            fills: Vec::new(),
            attempts: Vec::new(),
            herald_exhausted: false,
            attempt: 0,
        }
    }

    fn slot(&self, q: QubitId) -> usize {
        *self.slot_of.get(&q).expect("validated circuit: known qubit")
    }

    fn run(&mut self) {
        match self.circuit.herald.clone() {
            None => {
                for i in 0..self.circuit.ops.len() {
                    self.exec_op(i);
                }
            }
            Some(h) => {
                for i in 0..h.body_start {
                    self.exec_op(i);
                }
                loop {
                    self.attempt += 1;
                    let span_start = self.outcomes.len();
                    for i in h.body_start..h.body_end {
                        self.exec_op(i);
                    }
                    let pass = self.herald_pass(&h, span_start);
                    self.attempts.push(AttemptRecord { index: self.attempt, herald_pass: pass });
                    if pass {
                        break;
                    }
                    if self.attempt > h.max_retries {
                        self.herald_exhausted = true;
                        break;
                    }
                }
                self.attempt = 0;
                for i in h.body_end..self.circuit.ops.len() {
                    self.exec_op(i);
                }
            }
        }
    }

    fn herald_pass(&self, h: &crate::circuit::HeraldLoop, span_start: usize) -> bool {
        let span = &self.outcomes[span_start..];
        for group in &h.parity_groups {
            let mut parity = false;
            for &(q, c) in &group.members {
                let found = span
                    .iter()
                    .find(|o| o.qubit == q && o.cycle == Some(c));
                match found.map(|o| o.value) {
                    Some(MeasValue::Zero) => {}
                    Some(MeasValue::One) => parity = !parity,
                    // A missing atom cannot confirm the check.
                    Some(MeasValue::Lost) | None => return false,
                }
            }
            if parity != group.odd {
                return false;
            }
        }
        true
    }

    fn exec_op(&mut self, i: usize) {
        // Debug builds verify tableau symplectic integrity on one sampled op
        // per shot (a full per-op check is cubic and would dominate).
        #[cfg(debug_assertions)]
        {
            if i == (self.seed as usize) % self.circuit.ops.len().max(1) {
                debug_assert!(self.state.check_symplectic(), "symplectic violation at op {i}");
            }
        }
        match &self.circuit.ops[i] {
            NativeOp::Rz { q, angle } => {
                // Virtual frame update: noiseless.
                let s = self.slot(*q);
                self.state.rz(s, angle.turns_mod4());
            }
            NativeOp::Sx { q } => {
                let s = self.slot(*q);
                self.state.sx(s);
                self.pulse_noise(s);
            }
            NativeOp::X { q } => {
                let s = self.slot(*q);
                self.state.x(s);
                self.pulse_noise(s);
            }
            NativeOp::Cz { a, b } => {
                let (sa, sb) = (self.slot(*a), self.slot(*b));
                self.exec_cz(sa, sb);
            }
            NativeOp::Mcm { targets, cycle } => {
                let targets = targets.clone();
                self.exec_mcm(i, &targets, *cycle);
            }
            NativeOp::Reset0 { targets } => {
                for t in targets.clone() {
                    let s = self.slot(t);
                    self.state.reset_zero(s, &mut self.rng);
                }
            }
            NativeOp::Move { q, to } => {
                let s = self.slot(*q);
                self.exec_move(s, *to);
            }
            NativeOp::CondFill { zone } => {
                let zone = *zone;
                self.exec_cond_fill(i, zone);
            }
            NativeOp::Idle { ms } => {
                let ms = *ms;
                self.exec_idle(ms);
            }
        }
        for &(fi, q, p) in &self.faults.pauli_after {
            if fi == i {
                let (px, pz) = p.flags();
                let s = self.slot(q);
                self.state.pauli(s, px, pz);
            }
        }
    }

    fn pulse_noise(&mut self, slot: usize) {
        if self.rng.bernoulli(self.noise.p_1q_pauli) {
            let k = self.rng.below(3);
            let (px, pz) = fault::PauliKind::ALL[k].flags();
            self.state.pauli(slot, px, pz);
        }
    }

    fn exec_cz(&mut self, sa: usize, sb: usize) {
        let a_act = self.state.is_active(sa);
        let b_act = self.state.is_active(sb);
        if a_act && b_act {
            self.state.cz(sa, sb);
            let lose_a = self.rng.bernoulli(self.noise.p_cz_loss);
            let lose_b = self.rng.bernoulli(self.noise.p_cz_loss);
            let leak_a = !lose_a && self.rng.bernoulli(self.noise.p_cz_leak_residual);
            let leak_b = !lose_b && self.rng.bernoulli(self.noise.p_cz_leak_residual);
            if lose_a {
                self.lose(sa);
            } else if leak_a {
                self.state.mark_leaked(sa, &mut self.rng);
            }
            if lose_b {
                self.lose(sb);
            } else if leak_b {
                self.state.mark_leaked(sb, &mut self.rng);
            }
            let a_out = lose_a || leak_a;
            let b_out = lose_b || leak_b;
            if a_out != b_out {
                // Half-completed gate: maximal dephasing on the surviving
                // partner.
                let survivor = if a_out { sb } else { sa };
                if self.rng.bernoulli(0.5) {
                    self.state.pauli(survivor, false, true);
                }
            } else if !a_out && !b_out && self.rng.bernoulli(self.noise.p_cz_pauli) {
                // Uniform over the 15 non-identity two-qubit Paulis.
                let k = self.rng.below(15) + 1;
                let pa = k / 4;
                let pb = k % 4;
                let flags = |p: usize| -> (bool, bool) {
                    match p {
                        0 => (false, false),
                        1 => (true, false),
                        2 => (true, true),
                        _ => (false, true),
                    }
                };
                let (ax, az) = flags(pa);
                let (bx, bz) = flags(pb);
                self.state.pauli(sa, ax, az);
                self.state.pauli(sb, bx, bz);
            }
        } else if a_act != b_act {
            // One operand missing: the pulse acts on the survivor alone,
            // dephasing it and possibly ejecting it.
            let survivor = if a_act { sa } else { sb };
            if self.rng.bernoulli(0.5) {
                self.state.pauli(survivor, false, true);
            }
            if self.rng.bernoulli(self.noise.p_cz_loss) {
                self.lose(survivor);
            }
        }
    }

    /// Loses the atom and vacates its site.
    fn lose(&mut self, slot: usize) {
        if self.state.is_present(slot) {
            self.state.lose_atom(slot, &mut self.rng);
            self.occupancy.set(self.residence[slot], false);
        }
    }

    fn exec_mcm(&mut self, op_index: usize, targets: &[QubitId], cycle: Option<u32>) {
        for &q in targets {
            let slot = self.slot(q);
            debug_assert!(
                self.residence[slot].zone != ZoneKind::Register,
                "MCM of register-resident {q}"
            );
            let forced_lost = self
                .faults
                .force_lost
                .iter()
                .any(|&(fi, fq)| fi == op_index && fq == q);
            let value = if forced_lost {
                self.lose(slot);
                MeasValue::Lost
            } else if !self.state.is_present(slot) {
                MeasValue::Lost
            } else if self.state.is_leaked(slot) {
                // Outside the imaging subspace: dark in both images.
                MeasValue::Lost
            } else {
                self.measure_target(op_index, q, slot)
            };
            self.outcomes.push(McmOutcome {
                op_index: op_index as u32,
                attempt: self.attempt,
                qubit: q,
                cycle,
                value,
            });
        }
        self.register_side_channels();
        self.reservoir_image_decay();
    }

    /// Two-image protocol for one present, unleaked target.
    fn measure_target(&mut self, op_index: usize, q: QubitId, slot: usize) -> MeasValue {
        let mut v = self.state.measure_z(slot, &mut self.rng);
        // Physical spin flips during the block.
        if v && self.rng.bernoulli(self.noise.p_flip_1to0) {
            v = false;
            self.state.pauli(slot, true, false);
        } else if !v && self.rng.bernoulli(self.noise.p_flip_0to1) {
            v = true;
            self.state.pauli(slot, true, false);
        }
        // |1⟩ is bright in both images, |0⟩ only in the second.
        let n_bright = if v { 2 } else { 1 };
        let survive = (1.0 - self.noise.p_mcm_loss_bright).powi(n_bright)
            * (1.0 - self.noise.p_background_loss_per_image).powi(2);
        if self.rng.bernoulli(1.0 - survive) {
            self.lose(slot);
            return MeasValue::Lost;
        }
        let mut recorded = v;
        if self.rng.bernoulli(self.noise.p_distinguish) {
            recorded = !recorded;
        }
        if self
            .faults
            .flip_outcome
            .iter()
            .any(|&(fi, fq)| fi == op_index && fq == q)
        {
            recorded = !recorded;
        }
        MeasValue::from_bit(recorded)
    }

    /// Loss and Z-dephasing on every register-resident atom, lumped once per
    /// MCM block.
    fn register_side_channels(&mut self) {
        for slot in 0..self.residence.len() {
            if self.residence[slot].zone != ZoneKind::Register || !self.state.is_present(slot) {
                continue;
            }
            if self.rng.bernoulli(self.noise.p_register_loss_per_mcm) {
                self.lose(slot);
            } else if self.rng.bernoulli(self.noise.p_register_dephase_per_mcm) {
                self.state.pauli(slot, false, true);
            }
        }
    }

    /// Anonymous reservoir atoms are imaged every MCM block too: |0⟩ atoms
    /// are bright in the second image.
    fn reservoir_image_decay(&mut self) {
        let p = self.noise.p_mcm_loss_bright + 2.0 * self.noise.p_background_loss_per_image;
        if p <= 0.0 {
            return;
        }
        for site in self.occupancy.occupied_sites(ZoneKind::Sz) {
            if self.rng.bernoulli(p) {
                self.occupancy.set(site, false);
            }
        }
    }

    fn exec_move(&mut self, slot: usize, to: Site) {
        let old = self.residence[slot];
        if old == to {
            return;
        }
        if self.state.is_present(slot) {
            self.occupancy.set(old, false);
            if self.rng.bernoulli(self.noise.p_move_fail_parallel) {
                self.state.lose_atom(slot, &mut self.rng);
            } else {
                debug_assert!(!self.occupancy.is_occupied(to), "move onto occupied {to}");
                self.occupancy.set(to, true);
            }
        }
        self.residence[slot] = to;
    }

    fn exec_cond_fill(&mut self, op_index: usize, zone: ZoneKind) {
        // Image-based vacancy detection: leaked atoms look absent.
        let mut vacant_slots: Vec<usize> = (0..self.residence.len())
            .filter(|&s| {
                self.residence[s].zone == zone
                    && (!self.state.is_present(s) || self.state.is_leaked(s))
            })
            .collect();
        vacant_slots.sort_unstable();
        if vacant_slots.is_empty() {
            return;
        }
        let sources = self.occupancy.occupied_sites(ZoneKind::Sz);
        // Partial fill when the reservoir is short; the rest stay absent and
        // signal that replenishment is required.
        let n_fill = vacant_slots.len().min(sources.len());
        if n_fill == 0 {
            return;
        }
        let vac_sites: Vec<Site> = vacant_slots[..n_fill]
            .iter()
            .map(|&s| self.residence[s])
            .collect();
        let plan = logistics::plan_moves(
            &vac_sites,
            &sources,
            &self.circuit.layout,
            self.noise.plan_base_latency_ms,
            self.noise.plan_per_move_ms,
        )
        .expect("sources cover truncated vacancies");
        for (k, &(src, dst)) in plan.moves.iter().enumerate() {
            let slot = vacant_slots[k];
            debug_assert_eq!(self.residence[slot], dst);
            self.occupancy.set(src, false);
            let mut success = !self.rng.bernoulli(self.noise.p_move_fail);
            if success && self.state.is_leaked(slot) {
                // Collision with the dark leaked atom: both are lost.
                self.state.lose_atom(slot, &mut self.rng);
                self.occupancy.set(dst, false);
                success = false;
            } else if success {
                self.state.revive(slot, &mut self.rng);
                self.occupancy.set(dst, true);
            }
            self.fills.push(FillEvent {
                op_index: op_index as u32,
                attempt: self.attempt,
                qubit: self.circuit.qubits[slot].id,
                dst,
                success,
            });
        }
    }

    fn exec_idle(&mut self, ms: f64) {
        let t = ms / 1000.0;
        let p_loss = if self.noise.vacuum_lifetime_s.is_finite() && self.noise.vacuum_lifetime_s > 0.0
        {
            1.0 - (-t / self.noise.vacuum_lifetime_s).exp()
        } else {
            0.0
        };
        let p_z = (1.0 - (-self.noise.idle_dephase_rate * t).exp()) / 2.0;
        for slot in 0..self.residence.len() {
            if !self.state.is_present(slot) {
                continue;
            }
            if self.rng.bernoulli(p_loss) {
                self.lose(slot);
            } else if self.rng.bernoulli(p_z) {
                self.state.pauli(slot, false, true);
            }
        }
        if p_loss > 0.0 {
            for zone in [ZoneKind::Sz, ZoneKind::Lz] {
                for site in self.occupancy.occupied_sites(zone) {
                    if self.rng.bernoulli(p_loss) {
                        self.occupancy.set(site, false);
                    }
                }
            }
        }
    }

    fn into_record(self) -> ShotRecord {
        let n = self.residence.len();
        let mut final_measurements = vec![None; n];
        for o in &self.outcomes {
            let slot = self.slot_of[&o.qubit];
            final_measurements[slot] = Some(o.value);
        }
        ShotRecord {
            seed: self.seed,
            outcomes: self.outcomes,
            final_measurements,
            fills_performed: self.fills,
            attempts: self.attempts,
            herald_exhausted: self.herald_exhausted,
        }
    }
}
