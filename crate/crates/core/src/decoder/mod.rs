//! Detector extraction from shot records, matching-graph construction from
//! the noise model, per-shot loss-aware graph edits, exact minimum-weight
//! perfect matching and logical-failure determination.
//!
//! The base graph is built by single-fault propagation: every elementary
//! fault of the noise model is injected into a noiseless run and the set of
//! flipped detectors recorded. Ring-code detector locality guarantees at
//! most two flips per fault; single-flip faults connect to the boundary
//! node. Per-shot edits exploit loss information: timelike edges touching
//! loss-randomized detectors drop to weight zero, as do the partner-qubit
//! dephasing edges of CZ gates the lost atom may have corrupted.

pub mod matching;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, NativeOp, QubitId};
use crate::engine::fault::PauliKind;
use crate::engine::noise::NoiseModel;
use crate::engine::record::{MeasValue, ShotRecord};
use crate::qec::meta::{MeasKey, RepCodeMeta};
use crate::rng::{derive_seed, ShotRng};

/// Salt for the lost-bit substitution stream derived from the shot seed.
const LOST_BIT_SALT: u64 = 0x4c4f_5354;

#[derive(Debug, Error, PartialEq)]
pub enum DecoderError {
    #[error("shot record is missing measurement (qubit {0}, cycle {1})")]
    MissingMeasurement(QubitId, u32),
    #[error("fault at op {op_index} flips {flips} detectors (> 2)")]
    FaultTooWide { op_index: usize, flips: usize },
    #[error("fault at op {op_index} flips the observable but no detector")]
    UndetectableLogicalFault { op_index: usize },
}

/// One extracted detector value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorRecord {
    pub id: u32,
    pub check: u32,
    pub cycle: u32,
    pub parity: bool,
    /// A measurement in this detector was LOST.
    pub loss_touched: bool,
    /// The parity contains a substituted random bit.
    pub randomized: bool,
}

/// Measurement bits of one shot with LOST values substituted by seeded
/// random bits (one draw per lost measurement, in outcome order).
struct BitTable {
    bits: BTreeMap<(QubitId, u32), (bool, bool)>, // (value, was_lost)
}

impl BitTable {
    fn from_shot(shot: &ShotRecord) -> Self {
        let mut rng = ShotRng::from_seed(derive_seed(shot.seed, LOST_BIT_SALT));
        let mut bits = BTreeMap::new();
        for o in &shot.outcomes {
            let Some(cycle) = o.cycle else { continue };
            let entry = match o.value {
                MeasValue::Zero => (false, false),
                MeasValue::One => (true, false),
                MeasValue::Lost => (rng.fair_bit(), true),
            };
            bits.insert((o.qubit, cycle), entry);
        }
        BitTable { bits }
    }

    fn get(&self, key: &MeasKey) -> Result<(bool, bool), DecoderError> {
        self.bits
            .get(&(key.qubit, key.cycle))
            .copied()
            .ok_or(DecoderError::MissingMeasurement(key.qubit, key.cycle))
    }
}

/// Computes all detector parities for a repetition-code shot. LOST outcomes
/// are replaced by random values from the shot's seed stream and flagged.
pub fn extract_detectors(
    shot: &ShotRecord,
    meta: &RepCodeMeta,
) -> Result<Vec<DetectorRecord>, DecoderError> {
    let table = BitTable::from_shot(shot);
    let mut out = Vec::with_capacity(meta.detectors.len());
    for det in &meta.detectors {
        let mut parity = false;
        let mut lost = false;
        for key in &det.measurements {
            let (bit, was_lost) = table.get(key)?;
            parity ^= bit;
            lost |= was_lost;
        }
        out.push(DetectorRecord {
            id: det.id,
            check: det.check,
            cycle: det.cycle,
            parity,
            loss_touched: lost,
            randomized: lost,
        });
    }
    Ok(out)
}

/// Observed value of the logical observable (frame-corrected), using the
/// same lost-bit substitution stream as `extract_detectors`.
pub fn observed_logical(shot: &ShotRecord, meta: &RepCodeMeta) -> Result<bool, DecoderError> {
    let table = BitTable::from_shot(shot);
    let mut v = meta.observable.frame_flip;
    for key in &meta.observable.measurements {
        v ^= table.get(key)?.0;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Matching graph
// ---------------------------------------------------------------------------

/// Sentinel detector id for the boundary node.
pub const BOUNDARY: u32 = u32::MAX;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultClass {
    /// Pauli error on a data-carrying qubit (space-like edge).
    SpacelikeData,
    /// Misread measurement (time-like edge).
    TimelikeReadout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingEdge {
    pub a: u32,
    /// Second endpoint, or [`BOUNDARY`].
    pub b: u32,
    pub probability: f64,
    /// `ln((1−p)/p)`; 0 when p = 0.5.
    pub weight: f64,
    pub fault: FaultClass,
    pub flips_logical: bool,
}

/// Weighted detector graph with a boundary node, plus the lookups needed
/// for per-shot loss edits. The base graph is immutable per
/// (circuit, noise model); overlays never mutate it.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub n_detectors: usize,
    pub edges: Vec<MatchingEdge>,
    /// Incident edge indices per detector (boundary edges included on the
    /// detector side).
    adjacency: Vec<Vec<usize>>,
    /// Timelike edges touching each detector.
    timelike_of: Vec<Vec<usize>>,
    /// For a LOST measurement (qubit, cycle): partner-qubit dephasing edges
    /// of every CZ inside the loss uncertainty window.
    loss_window_edges: HashMap<(QubitId, u32), Vec<usize>>,
}

impl MatchingGraph {
    /// Timelike edges incident on a detector.
    pub fn timelike_edges_of(&self, detector: u32) -> &[usize] {
        &self.timelike_of[detector as usize]
    }

    /// Loss-correlated partner edges for a lost measurement key.
    pub fn loss_window_edges_of(&self, qubit: QubitId, cycle: u32) -> &[usize] {
        self.loss_window_edges
            .get(&(qubit, cycle))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Dump in a documented text form (one edge per line) for cross-checking
    /// against external decoders.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("detectors {}\n", self.n_detectors));
        for e in &self.edges {
            let b = if e.b == BOUNDARY { "boundary".to_string() } else { e.b.to_string() };
            s.push_str(&format!(
                "edge {} {} p={:.6e} w={:.6} class={:?} logical={}\n",
                e.a, b, e.probability, e.weight, e.fault, e.flips_logical
            ));
        }
        s
    }
}

fn edge_weight_of(p: f64) -> f64 {
    let p = p.clamp(1e-12, 0.5);
    ((1.0 - p) / p).ln()
}

/// Pauli-frame fault propagator: walks the circuit once per fault, tracking
/// the conjugated Pauli as X/Z bit masks and recording which measurement
/// outcomes flip. Noiseless by construction, so no randomness is involved;
/// cross-checked against full engine fault injection in tests.
struct FramePropagator<'a> {
    circuit: &'a Circuit,
    slot_of: BTreeMap<QubitId, usize>,
}

enum Inject {
    /// Apply Paulis to the listed slots after executing op `op`.
    After { op: usize, paulis: Vec<(usize, PauliKind)> },
    /// Flip the recorded outcome of `qubit` at MCM op `op`.
    Readout { op: usize, qubit: QubitId },
    /// Apply a Pauli before the first op (state-preparation error).
    AtStart { slot: usize, pauli: PauliKind },
}

impl<'a> FramePropagator<'a> {
    fn new(circuit: &'a Circuit) -> Self {
        let slot_of = circuit
            .qubits
            .iter()
            .enumerate()
            .map(|(s, d)| (d.id, s))
            .collect();
        FramePropagator { circuit, slot_of }
    }

    /// Returns the set of flipped measurement keys.
    fn flipped_measurements(&self, inject: &Inject) -> HashSet<(QubitId, u32)> {
        let mut fx: u64 = 0;
        let mut fz: u64 = 0;
        let mut flips = HashSet::new();
        if let Inject::AtStart { slot, pauli } = inject {
            let (px, pz) = pauli.flags();
            fx |= (px as u64) << slot;
            fz |= (pz as u64) << slot;
        }
        for (i, op) in self.circuit.ops.iter().enumerate() {
            match op {
                NativeOp::Rz { q, angle } => {
                    if angle.turns_mod4() % 2 == 1 {
                        let s = self.slot_of[q];
                        fz ^= ((fx >> s) & 1) << s;
                    }
                }
                NativeOp::Sx { q } => {
                    let s = self.slot_of[q];
                    fx ^= ((fz >> s) & 1) << s;
                }
                NativeOp::X { .. } => {}
                NativeOp::Cz { a, b } => {
                    let sa = self.slot_of[a];
                    let sb = self.slot_of[b];
                    let xa = (fx >> sa) & 1;
                    let xb = (fx >> sb) & 1;
                    fz ^= xb << sa;
                    fz ^= xa << sb;
                }
                NativeOp::Mcm { targets, cycle } => {
                    for t in targets {
                        let s = self.slot_of[t];
                        let mut flip = (fx >> s) & 1 == 1;
                        if let Inject::Readout { op, qubit } = inject {
                            if *op == i && qubit == t {
                                flip = !flip;
                            }
                        }
                        if flip {
                            if let Some(c) = cycle {
                                flips.insert((*t, *c));
                            }
                        }
                    }
                }
                NativeOp::Reset0 { targets } => {
                    for t in targets {
                        let s = self.slot_of[t];
                        fx &= !(1 << s);
                        fz &= !(1 << s);
                    }
                }
                NativeOp::Move { .. } | NativeOp::CondFill { .. } | NativeOp::Idle { .. } => {}
            }
            if let Inject::After { op, paulis } = inject {
                if *op == i {
                    for (slot, p) in paulis {
                        let (px, pz) = p.flags();
                        fx ^= (px as u64) << slot;
                        fz ^= (pz as u64) << slot;
                    }
                }
            }
        }
        flips
    }
}

/// Builds the base matching graph by enumerating every elementary fault of
/// the noise model and propagating it through the circuit.
pub fn build_matching_graph(
    circuit: &Circuit,
    meta: &RepCodeMeta,
    noise: &NoiseModel,
) -> Result<MatchingGraph, DecoderError> {
    let prop = FramePropagator::new(circuit);
    let slot_of = prop.slot_of.clone();

    // Detector membership of each measurement key, and the observable set.
    let mut dets_of_meas: HashMap<(QubitId, u32), Vec<u32>> = HashMap::new();
    for det in &meta.detectors {
        for key in &det.measurements {
            dets_of_meas.entry((key.qubit, key.cycle)).or_default().push(det.id);
        }
    }
    let observable: HashSet<(QubitId, u32)> = meta
        .observable
        .measurements
        .iter()
        .map(|k| (k.qubit, k.cycle))
        .collect();

    // Accumulated edges keyed by (endpoints, logical effect).
    let mut acc: BTreeMap<(u32, u32, bool), (f64, FaultClass)> = BTreeMap::new();
    // (cz op index, slot) → accumulator key of the partner Z-dephasing edge.
    let mut partner_key_of: HashMap<(usize, usize), (u32, u32, bool)> = HashMap::new();

    let mut add_fault = |inject: Inject,
                         p: f64,
                         class: FaultClass,
                         op_index: usize,
                         partner_slot: Option<usize>|
     -> Result<(), DecoderError> {
        if p <= 0.0 {
            return Ok(());
        }
        let flips = prop.flipped_measurements(&inject);
        let mut det_parity: BTreeMap<u32, bool> = BTreeMap::new();
        let mut logical = false;
        for key in &flips {
            if let Some(ids) = dets_of_meas.get(key) {
                for &id in ids {
                    *det_parity.entry(id).or_insert(false) ^= true;
                }
            }
            if observable.contains(key) {
                logical = !logical;
            }
        }
        let flipped: Vec<u32> = det_parity
            .into_iter()
            .filter(|&(_, v)| v)
            .map(|(id, _)| id)
            .collect();
        let key = match flipped.len() {
            0 => {
                if logical {
                    return Err(DecoderError::UndetectableLogicalFault { op_index });
                }
                return Ok(());
            }
            1 => (flipped[0], BOUNDARY, logical),
            2 => (flipped[0], flipped[1], logical),
            n => return Err(DecoderError::FaultTooWide { op_index, flips: n }),
        };
        let entry = acc.entry(key).or_insert((0.0, class));
        entry.0 = entry.0 * (1.0 - p) + p * (1.0 - entry.0);
        // Faults of different classes can share endpoints in short circuits;
        // the readout label must win so loss edits can zero the edge.
        if class == FaultClass::TimelikeReadout {
            entry.1 = FaultClass::TimelikeReadout;
        }
        if let Some(ps) = partner_slot {
            partner_key_of.insert((op_index, ps), key);
        }
        Ok(())
    };

    // Initialization errors (residual |1⟩ after loading).
    for decl in &circuit.qubits {
        add_fault(
            Inject::AtStart { slot: slot_of[&decl.id], pauli: PauliKind::X },
            noise.p_init_error,
            FaultClass::SpacelikeData,
            0,
            None,
        )?;
    }

    let p_readout = 1.0
        - (1.0 - noise.p_distinguish) * (1.0 - 0.5 * (noise.p_flip_1to0 + noise.p_flip_0to1));
    let pauli_of = |k: usize| -> Option<PauliKind> {
        match k {
            0 => None,
            1 => Some(PauliKind::X),
            2 => Some(PauliKind::Y),
            _ => Some(PauliKind::Z),
        }
    };

    // Residence tracking for the register-dephasing channel.
    let mut residence: BTreeMap<QubitId, crate::circuit::ZoneKind> =
        circuit.qubits.iter().map(|d| (d.id, d.at.zone)).collect();

    for (i, op) in circuit.ops.iter().enumerate() {
        match op {
            NativeOp::Sx { q } | NativeOp::X { q } => {
                for p in PauliKind::ALL {
                    add_fault(
                        Inject::After { op: i, paulis: vec![(slot_of[q], p)] },
                        noise.p_1q_pauli / 3.0,
                        FaultClass::SpacelikeData,
                        i,
                        None,
                    )?;
                }
            }
            NativeOp::Cz { a, b } => {
                let (sa, sb) = (slot_of[a], slot_of[b]);
                for k in 1..16 {
                    let pa = pauli_of(k / 4);
                    let pb = pauli_of(k % 4);
                    let mut paulis = Vec::new();
                    if let Some(p) = pa {
                        paulis.push((sa, p));
                    }
                    if let Some(p) = pb {
                        paulis.push((sb, p));
                    }
                    // Lone-Z components are exactly the loss-correlated
                    // partner channels; remember their edges for per-shot
                    // reweighting.
                    let partner = match (pa, pb) {
                        (Some(PauliKind::Z), None) => Some(sa),
                        (None, Some(PauliKind::Z)) => Some(sb),
                        _ => None,
                    };
                    add_fault(
                        Inject::After { op: i, paulis },
                        noise.p_cz_pauli / 15.0,
                        FaultClass::SpacelikeData,
                        i,
                        partner,
                    )?;
                }
            }
            NativeOp::Mcm { targets, .. } => {
                for t in targets {
                    add_fault(
                        Inject::Readout { op: i, qubit: *t },
                        p_readout,
                        FaultClass::TimelikeReadout,
                        i,
                        None,
                    )?;
                }
                for decl in &circuit.qubits {
                    if residence[&decl.id] == crate::circuit::ZoneKind::Register {
                        add_fault(
                            Inject::After {
                                op: i,
                                paulis: vec![(slot_of[&decl.id], PauliKind::Z)],
                            },
                            noise.p_register_dephase_per_mcm,
                            FaultClass::SpacelikeData,
                            i,
                            None,
                        )?;
                    }
                }
            }
            NativeOp::Reset0 { targets } => {
                for t in targets {
                    add_fault(
                        Inject::After { op: i, paulis: vec![(slot_of[t], PauliKind::X)] },
                        noise.p_init_error,
                        FaultClass::SpacelikeData,
                        i,
                        None,
                    )?;
                }
            }
            NativeOp::Move { q, to } => {
                residence.insert(*q, to.zone);
            }
            NativeOp::CondFill { .. } | NativeOp::Rz { .. } | NativeOp::Idle { .. } => {}
        }
    }

    // Materialize edges.
    let n_detectors = meta.detectors.len();
    let mut edges = Vec::with_capacity(acc.len());
    let mut key_to_idx = HashMap::new();
    for (&(a, b, logical), &(p, class)) in &acc {
        key_to_idx.insert((a, b, logical), edges.len());
        edges.push(MatchingEdge {
            a,
            b,
            probability: p,
            weight: edge_weight_of(p),
            fault: class,
            flips_logical: logical,
        });
    }
    let mut adjacency = vec![Vec::new(); n_detectors];
    let mut timelike_of = vec![Vec::new(); n_detectors];
    for (idx, e) in edges.iter().enumerate() {
        adjacency[e.a as usize].push(idx);
        if e.b != BOUNDARY {
            adjacency[e.b as usize].push(idx);
        }
        if e.fault == FaultClass::TimelikeReadout {
            timelike_of[e.a as usize].push(idx);
            if e.b != BOUNDARY {
                timelike_of[e.b as usize].push(idx);
            }
        }
    }

    // Loss windows: for each MCM outcome (q, c), collect the partner
    // dephasing edges of every CZ on q since q's previous measurement.
    let mut loss_window_edges: HashMap<(QubitId, u32), Vec<usize>> = HashMap::new();
    let mut open_czs: BTreeMap<QubitId, Vec<(usize, QubitId)>> = BTreeMap::new();
    for (i, op) in circuit.ops.iter().enumerate() {
        match op {
            NativeOp::Cz { a, b } => {
                open_czs.entry(*a).or_default().push((i, *b));
                open_czs.entry(*b).or_default().push((i, *a));
            }
            NativeOp::Mcm { targets, cycle: Some(c) } => {
                for t in targets {
                    let window = open_czs.remove(t).unwrap_or_default();
                    let mut edge_ids = Vec::new();
                    for (cz_op, partner) in window {
                        if let Some(key) = partner_key_of.get(&(cz_op, slot_of[&partner])) {
                            edge_ids.push(key_to_idx[key]);
                        }
                    }
                    edge_ids.sort_unstable();
                    edge_ids.dedup();
                    loss_window_edges.insert((*t, *c), edge_ids);
                }
            }
            _ => {}
        }
    }

    Ok(MatchingGraph { n_detectors, edges, adjacency, timelike_of, loss_window_edges })
}

// ---------------------------------------------------------------------------
// Per-shot loss edits and decoding
// ---------------------------------------------------------------------------

/// Per-shot overlay: edges forced to weight 0 (p = 0.5). Never mutates the
/// base graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShotEdits {
    pub zeroed: HashSet<usize>,
}

/// Computes the loss-aware overlay for one shot: zero-weight timelike edges
/// into loss-randomized detectors, and zero-weight loss-correlated partner
/// edges for every CZ the lost atom may have corrupted.
pub fn apply_loss_edits(
    graph: &MatchingGraph,
    detectors: &[DetectorRecord],
    shot: &ShotRecord,
) -> ShotEdits {
    let mut edits = ShotEdits::default();
    for det in detectors {
        if det.randomized {
            for &e in &graph.timelike_of[det.id as usize] {
                edits.zeroed.insert(e);
            }
        }
    }
    for o in &shot.outcomes {
        if o.value == MeasValue::Lost {
            if let Some(cycle) = o.cycle {
                if let Some(edge_ids) = graph.loss_window_edges.get(&(o.qubit, cycle)) {
                    edits.zeroed.extend(edge_ids.iter().copied());
                }
            }
        }
    }
    edits
}

/// Result of decoding one syndrome.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Predicted parity of the logical observable flip.
    pub logical_flip: bool,
    /// Total matching weight.
    pub weight: f64,
    /// Matched pairs (detector id, detector id or [`BOUNDARY`]).
    pub pairs: Vec<(u32, u32)>,
}

/// Shortest paths (Dijkstra) from a flagged detector to every node and the
/// boundary, tracking the logical-flip parity along the chosen path.
fn shortest_paths(
    graph: &MatchingGraph,
    edits: &ShotEdits,
    src: u32,
) -> (Vec<(f64, bool)>, (f64, bool)) {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Cand(f64, u32, bool);
    impl Eq for Cand {}
    impl Ord for Cand {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0
                .total_cmp(&other.0)
                .then(self.1.cmp(&other.1))
                .then(self.2.cmp(&other.2))
        }
    }
    impl PartialOrd for Cand {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let n = graph.n_detectors;
    let mut dist = vec![(f64::INFINITY, false); n];
    let mut boundary = (f64::INFINITY, false);
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = (0.0, false);
    heap.push(Reverse(Cand(0.0, src, false)));
    while let Some(Reverse(Cand(d, u, flip))) = heap.pop() {
        let ui = u as usize;
        if done[ui] || d > dist[ui].0 {
            continue;
        }
        done[ui] = true;
        for &ei in &graph.adjacency[ui] {
            let e = &graph.edges[ei];
            let w = if edits.zeroed.contains(&ei) { 0.0 } else { e.weight };
            let nd = d + w;
            let nflip = flip ^ e.flips_logical;
            if e.b == BOUNDARY {
                if nd < boundary.0 {
                    boundary = (nd, nflip);
                }
                continue;
            }
            let v = if e.a == u { e.b } else { e.a } as usize;
            if nd < dist[v].0 {
                dist[v] = (nd, nflip);
                heap.push(Reverse(Cand(nd, v as u32, nflip)));
            }
        }
    }
    (dist, boundary)
}

/// Exact minimum-weight perfect matching of the flagged detectors against
/// each other and the boundary. Empty syndromes decode to the identity.
#[allow(clippy::needless_range_loop)]
pub fn decode(graph: &MatchingGraph, edits: &ShotEdits, syndrome: &[u32]) -> DecodeResult {
    let mut flagged: Vec<u32> = syndrome.to_vec();
    flagged.sort_unstable();
    flagged.dedup();
    let k = flagged.len();
    if k == 0 {
        return DecodeResult { logical_flip: false, weight: 0.0, pairs: Vec::new() };
    }

    let mut pairdist = vec![vec![(f64::INFINITY, false); k]; k];
    let mut bdist = vec![(f64::INFINITY, false); k];
    for (i, &d) in flagged.iter().enumerate() {
        let (dv, bd) = shortest_paths(graph, edits, d);
        bdist[i] = bd;
        for (j, &dj) in flagged.iter().enumerate() {
            pairdist[i][j] = dv[dj as usize];
        }
    }

    // Virtual layout: 0..k = flagged detectors, k..2k = boundary images.
    // Boundary images pair among themselves at zero cost, so any subset of
    // detectors may match to the boundary.
    let big = 1e7;
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let w = pairdist[i][j].0;
            edges.push((i, j, if w.is_finite() { w } else { big }));
        }
        let w = bdist[i].0;
        edges.push((i, k + i, if w.is_finite() { w } else { big }));
        for j in i + 1..k {
            edges.push((k + i, k + j, 0.0));
        }
    }
    let mate = matching::min_weight_perfect_matching(2 * k, &edges);

    let mut logical = false;
    let mut weight = 0.0;
    let mut pairs = Vec::new();
    for i in 0..k {
        let m = mate[i];
        if m < k {
            if m > i {
                weight += pairdist[i][m].0;
                logical ^= pairdist[i][m].1;
                pairs.push((flagged[i], flagged[m]));
            }
        } else {
            weight += bdist[i].0;
            logical ^= bdist[i].1;
            pairs.push((flagged[i], BOUNDARY));
        }
    }
    DecodeResult { logical_flip: logical, weight, pairs }
}

/// Exhaustive minimum matching cost over all pairings (detectors may also
/// match to the boundary), for cross-checking `decode` on small instances.
pub fn brute_force_decode_weight(
    graph: &MatchingGraph,
    edits: &ShotEdits,
    syndrome: &[u32],
) -> f64 {
    let mut flagged: Vec<u32> = syndrome.to_vec();
    flagged.sort_unstable();
    flagged.dedup();
    let k = flagged.len();
    if k == 0 {
        return 0.0;
    }
    let mut pairdist = vec![vec![f64::INFINITY; k]; k];
    let mut bdist = vec![f64::INFINITY; k];
    for (i, &d) in flagged.iter().enumerate() {
        let (dv, bd) = shortest_paths(graph, edits, d);
        bdist[i] = bd.0;
        for (j, &dj) in flagged.iter().enumerate() {
            pairdist[i][j] = dv[dj as usize].0;
        }
    }
    fn rec(pairdist: &[Vec<f64>], bdist: &[f64], used: &mut [bool], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        let Some(first) = used.iter().position(|&u| !u) else {
            *best = acc;
            return;
        };
        used[first] = true;
        rec(pairdist, bdist, used, acc + bdist[first], best);
        for j in first + 1..used.len() {
            if !used[j] {
                used[j] = true;
                rec(pairdist, bdist, used, acc + pairdist[first][j], best);
                used[j] = false;
            }
        }
        used[first] = false;
    }
    let mut best = f64::INFINITY;
    rec(&pairdist, &bdist, &mut vec![false; k], 0.0, &mut best);
    best
}

/// Failure statistics of a decoded batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureStats {
    pub shots: u64,
    pub failures: u64,
    pub rate: f64,
    pub wilson_95: (f64, f64),
}

/// Decodes one shot end to end. Returns whether the decoder's prediction
/// disagrees with the observed logical value (a logical failure).
pub fn decode_shot(
    shot: &ShotRecord,
    meta: &RepCodeMeta,
    graph: &MatchingGraph,
) -> Result<bool, DecoderError> {
    let detectors = extract_detectors(shot, meta)?;
    let edits = apply_loss_edits(graph, &detectors, shot);
    let syndrome: Vec<u32> = detectors.iter().filter(|d| d.parity).map(|d| d.id).collect();
    let result = decode(graph, &edits, &syndrome);
    let observed = observed_logical(shot, meta)?;
    Ok(result.logical_flip != observed)
}

/// Decodes a batch and reports the logical failure rate with a Wilson 95%
/// interval.
pub fn logical_failure_rate(
    shots: &[ShotRecord],
    meta: &RepCodeMeta,
    graph: &MatchingGraph,
) -> Result<FailureStats, DecoderError> {
    let mut failures = 0u64;
    for shot in shots {
        if decode_shot(shot, meta, graph)? {
            failures += 1;
        }
    }
    let n = shots.len() as u64;
    let rate = if n == 0 { 0.0 } else { failures as f64 / n as f64 };
    let wilson_95 = crate::analysis::wilson_interval(failures, n, 0.95).unwrap_or((0.0, 1.0));
    Ok(FailureStats { shots: n, failures, rate, wilson_95 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::fault::FaultPlan;
    use crate::engine::{run_shot, run_shot_with_faults};
    use crate::qec::repcode::{gen_walking_repcode, RepCodeSpec};

    fn build(d: u32, cycles: u32, sensitive: bool) -> (Circuit, RepCodeMeta) {
        let (c, meta) = gen_walking_repcode(&RepCodeSpec {
            distance: d,
            cycles,
            phase_sensitive: sensitive,
            seed: 3,
        })
        .unwrap();
        (c, meta.repcode.unwrap())
    }

    #[test]
    fn noiseless_shot_extracts_all_zero() {
        let (c, meta) = build(3, 3, false);
        let rec = run_shot(&c, &NoiseModel::noiseless(), 1);
        let dets = extract_detectors(&rec, &meta).unwrap();
        assert_eq!(dets.len(), (3 * (3 + 1)) as usize);
        assert!(dets.iter().all(|d| !d.parity && !d.loss_touched));
    }

    #[test]
    fn every_fault_flips_at_most_two_detectors() {
        // Graph construction asserts locality internally; exercise a spread
        // of distances in both variants.
        let noise = NoiseModel::bench_defaults();
        for d in [3u32, 5, 9] {
            for sensitive in [false, true] {
                let (c, meta) = build(d, 4, sensitive);
                build_matching_graph(&c, &meta, &noise).unwrap();
            }
        }
    }

    #[test]
    fn frame_propagator_agrees_with_engine_fault_injection() {
        let (c, meta) = build(3, 3, true);
        let prop = FramePropagator::new(&c);
        let noiseless = NoiseModel::noiseless();
        let mut checked = 0;
        for (i, op) in c.ops.iter().enumerate() {
            if i % 7 != 0 {
                continue;
            }
            let targets = op.targets();
            let Some(&q) = targets.first() else { continue };
            for pk in [PauliKind::X, PauliKind::Z] {
                let slot = c.slot_of(q).unwrap();
                let flips = prop.flipped_measurements(&Inject::After {
                    op: i,
                    paulis: vec![(slot, pk)],
                });
                let rec = run_shot_with_faults(&c, &noiseless, 42, &FaultPlan::pauli(i, q, pk));
                let dets = extract_detectors(&rec, &meta).unwrap();
                for det_def in &meta.detectors {
                    let want = det_def
                        .measurements
                        .iter()
                        .filter(|k| flips.contains(&(k.qubit, k.cycle)))
                        .count()
                        % 2
                        == 1;
                    let got = dets[det_def.id as usize].parity;
                    assert_eq!(got, want, "op {i} pauli {pk:?} det {}", det_def.id);
                }
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn graph_counts_match_hand_enumeration_small_case() {
        // d=3, 1 cycle: 3 first-cycle + 3 final detectors.
        let (c, meta) = build(3, 1, false);
        let noise = NoiseModel::bench_defaults();
        let g = build_matching_graph(&c, &meta, &noise).unwrap();
        assert_eq!(g.n_detectors, 6);
        for dets in &g.adjacency {
            assert!(!dets.is_empty(), "isolated detector");
        }
        let timelike_count =
            g.edges.iter().filter(|e| e.fault == FaultClass::TimelikeReadout).count();
        assert!(timelike_count >= 3, "got {timelike_count} timelike edges");
    }

    #[test]
    fn uniform_probability_gives_uniform_weights() {
        let (c, meta) = build(3, 2, false);
        // Readout errors only: all edges share one weight.
        let mut noise = NoiseModel::noiseless();
        noise.p_distinguish = 0.01;
        let g = build_matching_graph(&c, &meta, &noise).unwrap();
        assert!(!g.edges.is_empty());
        let w0 = g.edges[0].weight;
        assert!(g.edges.iter().all(|e| (e.weight - w0).abs() < 1e-12));
    }

    #[test]
    fn half_probability_fault_gets_zero_weight() {
        assert_eq!(edge_weight_of(0.5), 0.0);
    }

    #[test]
    fn empty_syndrome_decodes_to_identity() {
        let (c, meta) = build(3, 2, false);
        let g = build_matching_graph(&c, &meta, &NoiseModel::bench_defaults()).unwrap();
        let r = decode(&g, &ShotEdits::default(), &[]);
        assert!(!r.logical_flip);
        assert_eq!(r.weight, 0.0);
    }

    #[test]
    fn injected_x_pair_decodes_without_logical_failure() {
        let (c, meta) = build(3, 3, false);
        let noise = NoiseModel::bench_defaults();
        let g = build_matching_graph(&c, &meta, &noise).unwrap();
        let mut mcm_idx = None;
        for (i, op) in c.ops.iter().enumerate() {
            if matches!(op, NativeOp::Mcm { cycle: Some(1), .. }) {
                mcm_idx = Some(i);
                break;
            }
        }
        for k in 0..3u32 {
            let pos = crate::qec::repcode::data_position(3, k, 2);
            let faults = FaultPlan::pauli(mcm_idx.unwrap(), QubitId(pos), PauliKind::X);
            let rec = run_shot_with_faults(&c, &NoiseModel::noiseless(), 9, &faults);
            let failed = decode_shot(&rec, &meta, &g).unwrap();
            assert!(!failed, "single data X must be corrected (k={k})");
        }
    }

    #[test]
    fn lost_ancilla_zeroes_its_timelike_edges() {
        let (c, meta) = build(3, 3, false);
        let noise = NoiseModel::bench_defaults();
        let g = build_matching_graph(&c, &meta, &noise).unwrap();
        let mut target = None;
        for (i, op) in c.ops.iter().enumerate() {
            if let NativeOp::Mcm { targets, cycle: Some(1) } = op {
                target = Some((i, targets[0]));
                break;
            }
        }
        let (idx, victim) = target.unwrap();
        let rec =
            run_shot_with_faults(&c, &NoiseModel::noiseless(), 7, &FaultPlan::lost(idx, victim));
        let dets = extract_detectors(&rec, &meta).unwrap();
        let edits = apply_loss_edits(&g, &dets, &rec);
        let randomized: Vec<u32> = dets.iter().filter(|d| d.randomized).map(|d| d.id).collect();
        assert_eq!(randomized.len(), 2, "a lost bulk measurement touches 2 detectors");
        for id in &randomized {
            for e in g.timelike_edges_of(*id) {
                assert!(edits.zeroed.contains(e));
            }
        }
        // Timelike edges not touching a randomized detector stay intact
        // unless they double as loss-correlated partner edges of the lost
        // atom's CZ window (fault classes can share endpoints).
        let window: std::collections::HashSet<usize> = rec
            .outcomes
            .iter()
            .filter(|o| o.value == crate::engine::record::MeasValue::Lost)
            .flat_map(|o| {
                g.loss_window_edges_of(o.qubit, o.cycle.unwrap()).iter().copied()
            })
            .collect();
        for (idx, e) in g.edges.iter().enumerate() {
            if e.fault != FaultClass::TimelikeReadout {
                continue;
            }
            let touches =
                randomized.contains(&e.a) || (e.b != BOUNDARY && randomized.contains(&e.b));
            if !touches && !window.contains(&idx) {
                assert!(!edits.zeroed.contains(&idx), "unexpected zeroed timelike edge {idx}");
            }
        }
    }

    #[test]
    fn lost_atom_cz_window_maps_to_partner_edges() {
        // Sensitive variant so partner-Z faults appear as edges.
        let (c, meta) = build(3, 3, true);
        let noise = NoiseModel::bench_defaults();
        let g = build_matching_graph(&c, &meta, &noise).unwrap();
        let some_window = g
            .loss_window_edges
            .values()
            .find(|v| !v.is_empty())
            .expect("sensitive variant has partner edges");
        for &e in some_window {
            assert!(e < g.edges.len());
        }
        // Every MCM outcome key has a window entry (possibly empty in the
        // first cycle before any CZ).
        assert!(!g.loss_window_edges.is_empty());
    }

    #[test]
    fn decode_weight_matches_brute_force_on_random_syndromes() {
        let (c, meta) = build(5, 4, false);
        let noise = NoiseModel::bench_defaults();
        let g = build_matching_graph(&c, &meta, &noise).unwrap();
        let mut rng = crate::rng::ShotRng::from_seed(31);
        for _ in 0..200 {
            // Real extractions always flag an even number of detectors
            // (every fault and every lost-bit substitution flips pairs).
            let k = 2 * (1 + rng.below(4));
            let mut syndrome = Vec::new();
            while syndrome.len() < k {
                let d = rng.below(g.n_detectors) as u32;
                if !syndrome.contains(&d) {
                    syndrome.push(d);
                }
            }
            let edits = ShotEdits::default();
            let got = decode(&g, &edits, &syndrome).weight;
            let want = brute_force_decode_weight(&g, &edits, &syndrome);
            assert!((got - want).abs() < 1e-6, "syndrome {syndrome:?}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_weight_edits_never_increase_matching_weight() {
        let (c, meta) = build(3, 3, false);
        let noise = NoiseModel::bench_defaults();
        let g = build_matching_graph(&c, &meta, &noise).unwrap();
        let mut rng = crate::rng::ShotRng::from_seed(77);
        for _ in 0..50 {
            let mut syndrome = Vec::new();
            while syndrome.len() < 4 {
                let d = rng.below(g.n_detectors) as u32;
                if !syndrome.contains(&d) {
                    syndrome.push(d);
                }
            }
            let base = decode(&g, &ShotEdits::default(), &syndrome).weight;
            let mut edits = ShotEdits::default();
            for e in 0..g.edges.len() {
                if rng.below(3) == 0 {
                    edits.zeroed.insert(e);
                }
            }
            let edited = decode(&g, &edits, &syndrome).weight;
            assert!(edited <= base + 1e-9, "edits increased weight: {edited} > {base}");
        }
    }
}
