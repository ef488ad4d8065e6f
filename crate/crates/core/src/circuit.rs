//! Native-gateset circuit representation, zone model, and compilation of
//! textbook gates into native operations.
//!
//! The native set is (`RZ(k·π/2)`, `SX`, `X`, `CZ`) plus measurement-cycle
//! operations (`MCM`, `RESET0`, `MOVE`, `COND_FILL`, `IDLE`). Circuits are
//! immutable after construction and serialize to a line-oriented text format
//! (one op per line) that round-trips byte-identically.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a circuit qubit. Indices are unique within a circuit.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct QubitId(pub u32);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Role tag for a qubit, drawn from a closed set.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Data,
    Ancilla,
    Reservoir,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Data => "data",
            Role::Ancilla => "ancilla",
            Role::Reservoir => "reservoir",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "data" => Some(Role::Data),
            "ancilla" => Some(Role::Ancilla),
            "reservoir" => Some(Role::Reservoir),
            _ => None,
        }
    }
}

/// Spatial zones of the processor.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum ZoneKind {
    /// Register: holds qubits during a circuit; site-resolved 1Q gates.
    Register,
    /// Interaction zone: parallel CZ gates.
    Iz,
    /// Measurement zone: MCM imaging targets.
    Mz,
    /// Storage zone: nearby reservoir used to refill the MZ.
    Sz,
    /// Loading zone: fresh atoms from the transport lattice.
    Lz,
}

impl ZoneKind {
    pub const ALL: [ZoneKind; 5] = [
        ZoneKind::Register,
        ZoneKind::Iz,
        ZoneKind::Mz,
        ZoneKind::Sz,
        ZoneKind::Lz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ZoneKind::Register => "REG",
            ZoneKind::Iz => "IZ",
            ZoneKind::Mz => "MZ",
            ZoneKind::Sz => "SZ",
            ZoneKind::Lz => "LZ",
        }
    }

    pub fn parse(s: &str) -> Option<ZoneKind> {
        match s {
            "REG" => Some(ZoneKind::Register),
            "IZ" => Some(ZoneKind::Iz),
            "MZ" => Some(ZoneKind::Mz),
            "SZ" => Some(ZoneKind::Sz),
            "LZ" => Some(ZoneKind::Lz),
            _ => None,
        }
    }
}

impl fmt::Display for ZoneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One zone: capacity and site grid.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub kind: ZoneKind,
    pub capacity: u32,
    pub rows: u32,
    pub cols: u32,
}

/// Geometry of all zones. Defaults match the machine: 128 register sites in
/// eight column pairs, a 16-site interaction row, 32-site MZ and SZ rows, and
/// a 75-site loading array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneLayout {
    zones: [Zone; 5],
}

impl Default for ZoneLayout {
    fn default() -> Self {
        ZoneLayout {
            zones: [
                Zone { kind: ZoneKind::Register, capacity: 128, rows: 8, cols: 16 },
                Zone { kind: ZoneKind::Iz, capacity: 16, rows: 1, cols: 16 },
                Zone { kind: ZoneKind::Mz, capacity: 32, rows: 2, cols: 16 },
                Zone { kind: ZoneKind::Sz, capacity: 32, rows: 2, cols: 16 },
                Zone { kind: ZoneKind::Lz, capacity: 75, rows: 5, cols: 15 },
            ],
        }
    }
}

impl ZoneLayout {
    pub fn zone(&self, kind: ZoneKind) -> &Zone {
        self.zones
            .iter()
            .find(|z| z.kind == kind)
            .expect("layout covers all zone kinds")
    }

    pub fn zones(&self) -> &[Zone; 5] {
        &self.zones
    }

    pub fn with_capacity(mut self, kind: ZoneKind, capacity: u32, rows: u32, cols: u32) -> Self {
        for z in self.zones.iter_mut() {
            if z.kind == kind {
                *z = Zone { kind, capacity, rows, cols };
            }
        }
        self
    }
}

/// A tweezer site: zone plus flat site index (`row = index / cols`).
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Site {
    pub zone: ZoneKind,
    pub index: u32,
}

impl Site {
    pub fn new(zone: ZoneKind, index: u32) -> Self {
        Site { zone, index }
    }

    pub fn row_col(&self, layout: &ZoneLayout) -> (u32, u32) {
        let cols = layout.zone(self.zone).cols.max(1);
        (self.index / cols, self.index % cols)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.zone, self.index)
    }
}

/// RZ rotation angle in units of π/2, kept rational so that malformed
/// (non-Clifford) angles survive parsing and surface in validation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RzAngle {
    pub num: i32,
    pub den: i32,
}

impl RzAngle {
    pub fn quarter_turns(k: i32) -> Self {
        RzAngle { num: k, den: 1 }
    }

    /// True when the angle is an integer multiple of π/2.
    pub fn is_clifford(&self) -> bool {
        self.den != 0 && self.num % self.den == 0
    }

    /// Integer number of quarter turns, reduced mod 4. Panics on
    /// non-Clifford angles; call after validation.
    pub fn turns_mod4(&self) -> u8 {
        assert!(self.is_clifford(), "non-Clifford RZ angle {self}");
        (self.num / self.den).rem_euclid(4) as u8
    }
}

impl fmt::Display for RzAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// One native operation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NativeOp {
    /// Z rotation by `angle`·π/2. Virtual (software frame) on this machine.
    Rz { q: QubitId, angle: RzAngle },
    /// π/2 rotation about X.
    Sx { q: QubitId },
    /// π rotation about X (echo pulse).
    X { q: QubitId },
    /// Controlled-Z on a distinct pair.
    Cz { a: QubitId, b: QubitId },
    /// Two-image midcircuit measurement of `targets` (never register-resident).
    Mcm { targets: Vec<QubitId>, cycle: Option<u32> },
    /// Reset targets to |0⟩ (cooling + optical pumping after MCM).
    Reset0 { targets: Vec<QubitId> },
    /// Parallel tweezer move of one qubit to a destination site.
    Move { q: QubitId, to: Site },
    /// Conditional single-tweezer fill of detected vacancies in `zone` from
    /// the storage-zone reservoir, based on the most recent MCM images.
    CondFill { zone: ZoneKind },
    /// Idle period; only timing-based noise (vacuum loss, slow dephasing).
    Idle { ms: f64 },
}

impl NativeOp {
    pub fn rz(q: QubitId, quarter_turns: i32) -> Self {
        NativeOp::Rz { q, angle: RzAngle::quarter_turns(quarter_turns) }
    }

    /// Qubits referenced by this op.
    pub fn targets(&self) -> Vec<QubitId> {
        match self {
            NativeOp::Rz { q, .. } | NativeOp::Sx { q } | NativeOp::X { q } => vec![*q],
            NativeOp::Cz { a, b } => vec![*a, *b],
            NativeOp::Mcm { targets, .. } | NativeOp::Reset0 { targets } => targets.clone(),
            NativeOp::Move { q, .. } => vec![*q],
            NativeOp::CondFill { .. } | NativeOp::Idle { .. } => vec![],
        }
    }
}

/// Declaration of a circuit qubit: identity, role tag, and starting site.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitDecl {
    pub id: QubitId,
    pub role: Option<Role>,
    pub at: Site,
}

/// A parity group evaluated by a herald: the XOR of the listed measurement
/// outcomes, identified by `(qubit, cycle_tag)` within one loop attempt,
/// must equal `odd`. A LOST outcome in the group fails the herald (the
/// check cannot be confirmed without the atom).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityGroup {
    pub members: Vec<(QubitId, u32)>,
    /// Expected parity: false = even, true = odd.
    #[serde(default)]
    pub odd: bool,
}

/// Retry-loop structure for heralded preparation: ops in
/// `[body_start, body_end)` repeat until every parity group of the attempt
/// is even, or `max_retries` extra attempts are exhausted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeraldLoop {
    pub body_start: usize,
    pub body_end: usize,
    pub max_retries: u32,
    pub parity_groups: Vec<ParityGroup>,
}

/// An ordered program of native operations over declared qubits.
///
/// Circuits are immutable after construction and safe to share across
/// concurrent shot workers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubits: Vec<QubitDecl>,
    pub ops: Vec<NativeOp>,
    pub layout: ZoneLayout,
    /// Retry-loop branch point for heralded preparation circuits.
    pub herald: Option<HeraldLoop>,
    /// Generator parameters for provenance (echoed into metadata sidecars).
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Position of `q` in the declaration list.
    pub fn slot_of(&self, q: QubitId) -> Option<usize> {
        self.qubits.iter().position(|d| d.id == q)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("unknown qubit {0}")]
    UnknownQubit(QubitId),
    #[error("identical qubits in two-qubit gate: {0}")]
    IdenticalQubits(QubitId),
    #[error("duplicate qubit id {0}")]
    DuplicateQubit(QubitId),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Three-op Euler sequence equal to H up to global phase: RZ(π/2)·SX·RZ(π/2).
pub fn h_sequence(q: QubitId) -> Vec<NativeOp> {
    vec![NativeOp::rz(q, 1), NativeOp::Sx { q }, NativeOp::rz(q, 1)]
}

/// CNOT as an H-conjugated CZ: H(t), CZ(c,t), H(t).
pub fn cnot_sequence(control: QubitId, target: QubitId) -> Result<Vec<NativeOp>, CircuitError> {
    if control == target {
        return Err(CircuitError::IdenticalQubits(control));
    }
    let mut ops = h_sequence(target);
    ops.push(NativeOp::Cz { a: control, b: target });
    ops.extend(h_sequence(target));
    Ok(ops)
}

/// Incremental circuit builder used by the generators. Checks qubit existence
/// on every push; structural invariants beyond that are left to `validate`.
pub struct CircuitBuilder {
    qubits: Vec<QubitDecl>,
    ops: Vec<NativeOp>,
    layout: ZoneLayout,
    metadata: BTreeMap<String, String>,
}

impl CircuitBuilder {
    pub fn new(layout: ZoneLayout) -> Self {
        CircuitBuilder { qubits: Vec::new(), ops: Vec::new(), layout, metadata: BTreeMap::new() }
    }

    pub fn add_qubit(&mut self, role: Option<Role>, at: Site) -> QubitId {
        let id = QubitId(self.qubits.len() as u32);
        self.qubits.push(QubitDecl { id, role, at });
        id
    }

    pub fn meta(&mut self, key: &str, value: impl fmt::Display) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    fn check(&self, q: QubitId) -> Result<(), CircuitError> {
        if self.qubits.iter().any(|d| d.id == q) {
            Ok(())
        } else {
            Err(CircuitError::UnknownQubit(q))
        }
    }

    pub fn push(&mut self, op: NativeOp) -> Result<(), CircuitError> {
        for t in op.targets() {
            self.check(t)?;
        }
        if let NativeOp::Cz { a, b } = &op {
            if a == b {
                return Err(CircuitError::IdenticalQubits(*a));
            }
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn push_all(&mut self, ops: Vec<NativeOp>) -> Result<(), CircuitError> {
        for op in ops {
            self.push(op)?;
        }
        Ok(())
    }

    pub fn h(&mut self, q: QubitId) -> Result<(), CircuitError> {
        self.check(q)?;
        self.push_all(h_sequence(q))
    }

    pub fn cnot(&mut self, control: QubitId, target: QubitId) -> Result<(), CircuitError> {
        self.check(control)?;
        self.check(target)?;
        self.push_all(cnot_sequence(control, target)?)
    }

    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    pub fn build(self) -> Circuit {
        self.build_with_herald(None)
    }

    pub fn build_with_herald(self, herald: Option<HeraldLoop>) -> Circuit {
        Circuit {
            qubits: self.qubits,
            ops: self.ops,
            layout: self.layout,
            herald,
            metadata: self.metadata,
        }
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// One structural problem found by `validate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    UnknownTarget { op_index: usize, q: QubitId },
    DuplicateQubitId { q: QubitId },
    NonCliffordAngle { op_index: usize, angle: RzAngle },
    CzIdenticalTargets { op_index: usize, q: QubitId },
    DuplicateMcmTarget { op_index: usize, q: QubitId },
    McmInRegister { op_index: usize, q: QubitId },
    /// A qubit sits in an imaged zone (IZ/MZ/SZ/LZ) during an MCM it is not
    /// a target of; the image would project it.
    UnmeasuredInImagingZone { op_index: usize, q: QubitId, zone: ZoneKind },
    CapacityExceeded { op_index: Option<usize>, zone: ZoneKind, have: u32, capacity: u32 },
    SiteCollision { op_index: Option<usize>, site: Site },
    SiteOutOfRange { op_index: Option<usize>, site: Site, capacity: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownTarget { op_index, q } => {
                write!(f, "op {op_index}: unknown target {q}")
            }
            Violation::DuplicateQubitId { q } => write!(f, "duplicate qubit id {q}"),
            Violation::NonCliffordAngle { op_index, angle } => {
                write!(f, "op {op_index}: non-Clifford angle {angle}·π/2")
            }
            Violation::CzIdenticalTargets { op_index, q } => {
                write!(f, "op {op_index}: CZ with identical targets {q}")
            }
            Violation::DuplicateMcmTarget { op_index, q } => {
                write!(f, "op {op_index}: duplicate MCM target {q}")
            }
            Violation::McmInRegister { op_index, q } => {
                write!(f, "op {op_index}: MCM of register-resident qubit {q}")
            }
            Violation::UnmeasuredInImagingZone { op_index, q, zone } => {
                write!(f, "op {op_index}: qubit {q} sits unmeasured in imaged zone {zone}")
            }
            Violation::CapacityExceeded { op_index, zone, have, capacity } => match op_index {
                Some(i) => write!(f, "op {i}: zone {zone} over capacity ({have}/{capacity})"),
                None => write!(f, "initial placement: zone {zone} over capacity ({have}/{capacity})"),
            },
            Violation::SiteCollision { op_index, site } => match op_index {
                Some(i) => write!(f, "op {i}: two qubits at site {site}"),
                None => write!(f, "initial placement: two qubits at site {site}"),
            },
            Violation::SiteOutOfRange { op_index, site, capacity } => match op_index {
                Some(i) => write!(f, "op {i}: site {site} outside zone capacity {capacity}"),
                None => write!(f, "initial placement: site {site} outside zone capacity {capacity}"),
            },
        }
    }
}

/// Report of all invariant violations; empty iff the circuit is runnable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            writeln!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Checks every structural invariant: unknown targets, duplicate ids,
/// non-Clifford angles, MCM of register-resident qubits, zone capacity and
/// site collisions through the move sequence.
pub fn validate(circuit: &Circuit) -> ValidationReport {
    let mut out = ValidationReport::default();
    let mut seen = std::collections::BTreeSet::new();
    for d in &circuit.qubits {
        if !seen.insert(d.id) {
            out.violations.push(Violation::DuplicateQubitId { q: d.id });
        }
    }

    // Residence tracking: site per qubit slot, updated through MOVE ops.
    let mut residence: BTreeMap<QubitId, Site> = BTreeMap::new();
    let mut occupied: BTreeMap<Site, QubitId> = BTreeMap::new();
    for d in &circuit.qubits {
        let cap = circuit.layout.zone(d.at.zone).capacity;
        if d.at.index >= cap {
            out.violations.push(Violation::SiteOutOfRange { op_index: None, site: d.at, capacity: cap });
        }
        if occupied.insert(d.at, d.id).is_some() {
            out.violations.push(Violation::SiteCollision { op_index: None, site: d.at });
        }
        residence.insert(d.id, d.at);
    }
    for kind in ZoneKind::ALL {
        let have = circuit.qubits.iter().filter(|d| d.at.zone == kind).count() as u32;
        let cap = circuit.layout.zone(kind).capacity;
        if have > cap {
            out.violations.push(Violation::CapacityExceeded { op_index: None, zone: kind, have, capacity: cap });
        }
    }

    let known = |q: &QubitId| seen.contains(q);
    for (i, op) in circuit.ops.iter().enumerate() {
        for t in op.targets() {
            if !known(&t) {
                out.violations.push(Violation::UnknownTarget { op_index: i, q: t });
            }
        }
        match op {
            NativeOp::Rz { angle, .. } => {
                if !angle.is_clifford() {
                    out.violations.push(Violation::NonCliffordAngle { op_index: i, angle: *angle });
                }
            }
            NativeOp::Cz { a, b } => {
                if a == b {
                    out.violations.push(Violation::CzIdenticalTargets { op_index: i, q: *a });
                }
            }
            NativeOp::Mcm { targets, .. } => {
                let mut tset = std::collections::BTreeSet::new();
                for t in targets {
                    if !tset.insert(*t) {
                        out.violations.push(Violation::DuplicateMcmTarget { op_index: i, q: *t });
                    }
                    if let Some(site) = residence.get(t) {
                        if site.zone == ZoneKind::Register {
                            out.violations.push(Violation::McmInRegister { op_index: i, q: *t });
                        }
                    }
                }
                // Everything in an imaged zone gets projected; a circuit
                // qubit parked there must be an MCM target.
                for (q, site) in &residence {
                    if site.zone != ZoneKind::Register && !tset.contains(q) {
                        out.violations.push(Violation::UnmeasuredInImagingZone {
                            op_index: i,
                            q: *q,
                            zone: site.zone,
                        });
                    }
                }
            }
            NativeOp::Move { q, to } => {
                let cap = circuit.layout.zone(to.zone).capacity;
                if to.index >= cap {
                    out.violations.push(Violation::SiteOutOfRange { op_index: Some(i), site: *to, capacity: cap });
                    continue;
                }
                if let Some(old) = residence.get(q).copied() {
                    if let Some(occ) = occupied.get(to) {
                        if occ != q {
                            out.violations.push(Violation::SiteCollision { op_index: Some(i), site: *to });
                            continue;
                        }
                    }
                    occupied.remove(&old);
                    occupied.insert(*to, *q);
                    residence.insert(*q, *to);
                }
            }
            _ => {}
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Canonical text serialization
// ---------------------------------------------------------------------------

/// Writes the canonical line-oriented form: one `QUBIT`/`META` header line
/// per entry, then one op per line. Stable for byte-identical round trips.
pub fn to_text(circuit: &Circuit) -> String {
    let mut s = String::new();
    s.push_str("# zqsim circuit v1\n");
    for z in circuit.layout.zones() {
        s.push_str(&format!(
            "ZONE {} capacity={} rows={} cols={}\n",
            z.kind, z.capacity, z.rows, z.cols
        ));
    }
    for (k, v) in &circuit.metadata {
        s.push_str(&format!("META {k}={v}\n"));
    }
    if let Some(h) = &circuit.herald {
        s.push_str(&format!(
            "HERALD body_start={} body_end={} max_retries={}\n",
            h.body_start, h.body_end, h.max_retries
        ));
        for g in &h.parity_groups {
            let members: Vec<String> =
                g.members.iter().map(|(q, c)| format!("{}:{}", q.0, c)).collect();
            let parity = if g.odd { "odd" } else { "even" };
            s.push_str(&format!("HGROUP parity={} {}\n", parity, members.join(" ")));
        }
    }
    for d in &circuit.qubits {
        match d.role {
            Some(r) => s.push_str(&format!("QUBIT {} role={} at={}\n", d.id.0, r.as_str(), d.at)),
            None => s.push_str(&format!("QUBIT {} at={}\n", d.id.0, d.at)),
        }
    }
    for op in &circuit.ops {
        match op {
            NativeOp::Rz { q, angle } => s.push_str(&format!("RZ {} angle={}\n", q.0, angle)),
            NativeOp::Sx { q } => s.push_str(&format!("SX {}\n", q.0)),
            NativeOp::X { q } => s.push_str(&format!("X {}\n", q.0)),
            NativeOp::Cz { a, b } => s.push_str(&format!("CZ {} {}\n", a.0, b.0)),
            NativeOp::Mcm { targets, cycle } => {
                let t: Vec<String> = targets.iter().map(|q| q.0.to_string()).collect();
                match cycle {
                    Some(c) => s.push_str(&format!("MCM {} cycle={}\n", t.join(" "), c)),
                    None => s.push_str(&format!("MCM {}\n", t.join(" "))),
                }
            }
            NativeOp::Reset0 { targets } => {
                let t: Vec<String> = targets.iter().map(|q| q.0.to_string()).collect();
                s.push_str(&format!("RESET0 {}\n", t.join(" ")));
            }
            NativeOp::Move { q, to } => s.push_str(&format!("MOVE {} to={}\n", q.0, to)),
            NativeOp::CondFill { zone } => s.push_str(&format!("COND_FILL {zone}\n")),
            NativeOp::Idle { ms } => s.push_str(&format!("IDLE ms={ms}\n")),
        }
    }
    s
}

fn parse_site(s: &str, line: usize) -> Result<Site, CircuitError> {
    let (z, i) = s.split_once(':').ok_or_else(|| CircuitError::Parse {
        line,
        msg: format!("bad site `{s}` (expected ZONE:index)"),
    })?;
    let zone = ZoneKind::parse(z).ok_or_else(|| CircuitError::Parse {
        line,
        msg: format!("unknown zone `{z}`"),
    })?;
    let index = i.parse().map_err(|_| CircuitError::Parse {
        line,
        msg: format!("bad site index `{i}`"),
    })?;
    Ok(Site { zone, index })
}

fn parse_qubit(tok: &str, line: usize) -> Result<QubitId, CircuitError> {
    tok.parse::<u32>().map(QubitId).map_err(|_| CircuitError::Parse {
        line,
        msg: format!("bad qubit index `{tok}`"),
    })
}

fn parse_angle(s: &str, line: usize) -> Result<RzAngle, CircuitError> {
    let bad = || CircuitError::Parse { line, msg: format!("bad angle `{s}`") };
    if let Some((n, d)) = s.split_once('/') {
        let num = n.parse().map_err(|_| bad())?;
        let den: i32 = d.parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(RzAngle { num, den })
    } else {
        Ok(RzAngle::quarter_turns(s.parse().map_err(|_| bad())?))
    }
}

/// Parses the canonical text form produced by [`to_text`].
pub fn from_text(text: &str) -> Result<Circuit, CircuitError> {
    let mut layout = ZoneLayout::default();
    let mut qubits = Vec::new();
    let mut ops = Vec::new();
    let mut metadata = BTreeMap::new();
    let mut herald: Option<HeraldLoop> = None;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut toks = l.split_whitespace();
        let head = toks.next().unwrap();
        let rest: Vec<&str> = toks.collect();
        let kv = |key: &str| -> Option<&str> {
            rest.iter().find_map(|t| t.strip_prefix(&format!("{key}=")))
        };
        let plain: Vec<&str> = rest.iter().filter(|t| !t.contains('=')).copied().collect();
        match head {
            "ZONE" => {
                let zone = ZoneKind::parse(plain.first().copied().unwrap_or("")).ok_or_else(|| {
                    CircuitError::Parse { line, msg: "ZONE needs a zone name".into() }
                })?;
                let get = |k: &str| -> Result<u32, CircuitError> {
                    kv(k)
                        .ok_or_else(|| CircuitError::Parse { line, msg: format!("ZONE missing {k}") })?
                        .parse()
                        .map_err(|_| CircuitError::Parse { line, msg: format!("bad ZONE {k}") })
                };
                layout = layout.with_capacity(zone, get("capacity")?, get("rows")?, get("cols")?);
            }
            "META" => {
                let (k, v) = rest
                    .first()
                    .and_then(|t| t.split_once('='))
                    .ok_or_else(|| CircuitError::Parse { line, msg: "META needs key=value".into() })?;
                metadata.insert(k.to_string(), v.to_string());
            }
            "HERALD" => {
                let get = |k: &str| -> Result<usize, CircuitError> {
                    kv(k)
                        .ok_or_else(|| CircuitError::Parse { line, msg: format!("HERALD missing {k}") })?
                        .parse()
                        .map_err(|_| CircuitError::Parse { line, msg: format!("bad HERALD {k}") })
                };
                herald = Some(HeraldLoop {
                    body_start: get("body_start")?,
                    body_end: get("body_end")?,
                    max_retries: get("max_retries")? as u32,
                    parity_groups: Vec::new(),
                });
            }
            "HGROUP" => {
                let h = herald.as_mut().ok_or_else(|| CircuitError::Parse {
                    line,
                    msg: "HGROUP before HERALD".into(),
                })?;
                let odd = match kv("parity") {
                    Some("odd") => true,
                    Some("even") | None => false,
                    Some(other) => {
                        return Err(CircuitError::Parse {
                            line,
                            msg: format!("bad HGROUP parity `{other}`"),
                        })
                    }
                };
                let mut members = Vec::new();
                for t in &plain {
                    let (q, c) = t.split_once(':').ok_or_else(|| CircuitError::Parse {
                        line,
                        msg: format!("bad HGROUP member `{t}`"),
                    })?;
                    members.push((
                        parse_qubit(q, line)?,
                        c.parse().map_err(|_| CircuitError::Parse {
                            line,
                            msg: format!("bad cycle in HGROUP member `{t}`"),
                        })?,
                    ));
                }
                h.parity_groups.push(ParityGroup { members, odd });
            }
            "QUBIT" => {
                let id = parse_qubit(
                    plain.first().copied().ok_or_else(|| CircuitError::Parse {
                        line,
                        msg: "QUBIT needs an index".into(),
                    })?,
                    line,
                )?;
                let role = match kv("role") {
                    Some(r) => Some(Role::parse(r).ok_or_else(|| CircuitError::Parse {
                        line,
                        msg: format!("unknown role `{r}`"),
                    })?),
                    None => None,
                };
                let at = parse_site(
                    kv("at").ok_or_else(|| CircuitError::Parse { line, msg: "QUBIT missing at=".into() })?,
                    line,
                )?;
                qubits.push(QubitDecl { id, role, at });
            }
            "RZ" => {
                let q = parse_qubit(plain.first().copied().unwrap_or(""), line)?;
                let angle = parse_angle(
                    kv("angle").ok_or_else(|| CircuitError::Parse { line, msg: "RZ missing angle=".into() })?,
                    line,
                )?;
                ops.push(NativeOp::Rz { q, angle });
            }
            "SX" => ops.push(NativeOp::Sx { q: parse_qubit(plain.first().copied().unwrap_or(""), line)? }),
            "X" => ops.push(NativeOp::X { q: parse_qubit(plain.first().copied().unwrap_or(""), line)? }),
            "CZ" => {
                if plain.len() != 2 {
                    return Err(CircuitError::Parse { line, msg: "CZ needs two targets".into() });
                }
                ops.push(NativeOp::Cz { a: parse_qubit(plain[0], line)?, b: parse_qubit(plain[1], line)? });
            }
            "MCM" => {
                let targets = plain
                    .iter()
                    .map(|t| parse_qubit(t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                let cycle = match kv("cycle") {
                    Some(c) => Some(c.parse().map_err(|_| CircuitError::Parse {
                        line,
                        msg: format!("bad cycle `{c}`"),
                    })?),
                    None => None,
                };
                ops.push(NativeOp::Mcm { targets, cycle });
            }
            "RESET0" => {
                let targets = plain
                    .iter()
                    .map(|t| parse_qubit(t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                ops.push(NativeOp::Reset0 { targets });
            }
            "MOVE" => {
                let q = parse_qubit(plain.first().copied().unwrap_or(""), line)?;
                let to = parse_site(
                    kv("to").ok_or_else(|| CircuitError::Parse { line, msg: "MOVE missing to=".into() })?,
                    line,
                )?;
                ops.push(NativeOp::Move { q, to });
            }
            "COND_FILL" => {
                let zone = ZoneKind::parse(plain.first().copied().unwrap_or("")).ok_or_else(|| {
                    CircuitError::Parse { line, msg: "COND_FILL needs a zone".into() }
                })?;
                ops.push(NativeOp::CondFill { zone });
            }
            "IDLE" => {
                let ms = kv("ms")
                    .ok_or_else(|| CircuitError::Parse { line, msg: "IDLE missing ms=".into() })?
                    .parse()
                    .map_err(|_| CircuitError::Parse { line, msg: "bad IDLE ms".into() })?;
                ops.push(NativeOp::Idle { ms });
            }
            other => {
                return Err(CircuitError::Parse { line, msg: format!("unknown opcode `{other}`") });
            }
        }
    }
    Ok(Circuit { qubits, ops, layout, herald, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_qubit_circuit() -> CircuitBuilder {
        let mut b = CircuitBuilder::new(ZoneLayout::default());
        b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Register, 0));
        b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Register, 1));
        b
    }

    #[test]
    fn h_sequence_shape() {
        let ops = h_sequence(QubitId(0));
        assert_eq!(
            ops,
            vec![
                NativeOp::rz(QubitId(0), 1),
                NativeOp::Sx { q: QubitId(0) },
                NativeOp::rz(QubitId(0), 1)
            ]
        );
    }

    #[test]
    fn cnot_rejects_identical_qubits() {
        assert_eq!(
            cnot_sequence(QubitId(3), QubitId(3)),
            Err(CircuitError::IdenticalQubits(QubitId(3)))
        );
    }

    #[test]
    fn builder_rejects_unknown_qubit() {
        let mut b = two_qubit_circuit();
        assert!(b.push(NativeOp::Sx { q: QubitId(9) }).is_err());
    }

    #[test]
    fn empty_circuit_validates_clean() {
        let c = CircuitBuilder::new(ZoneLayout::default()).build();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn non_clifford_angle_is_flagged() {
        let mut b = two_qubit_circuit();
        // π/3 = (2/3)·(π/2)
        b.push(NativeOp::Rz { q: QubitId(0), angle: RzAngle { num: 2, den: 3 } })
            .unwrap();
        let report = b.build().validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::NonCliffordAngle { .. }));
    }

    #[test]
    fn mcm_in_register_is_flagged() {
        let mut b = two_qubit_circuit();
        b.push(NativeOp::Mcm { targets: vec![QubitId(0)], cycle: Some(0) }).unwrap();
        let report = b.build().validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::McmInRegister { .. })));
    }

    #[test]
    fn mcm_after_move_to_mz_is_clean() {
        let mut b = two_qubit_circuit();
        b.push(NativeOp::Move { q: QubitId(0), to: Site::new(ZoneKind::Mz, 0) }).unwrap();
        b.push(NativeOp::Mcm { targets: vec![QubitId(0)], cycle: Some(0) }).unwrap();
        assert!(b.build().validate().is_ok());
    }

    #[test]
    fn move_collision_is_flagged() {
        let mut b = two_qubit_circuit();
        b.push(NativeOp::Move { q: QubitId(0), to: Site::new(ZoneKind::Register, 1) }).unwrap();
        let report = b.build().validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SiteCollision { .. })));
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        let mut b = two_qubit_circuit();
        b.meta("kind", "unit");
        b.meta("seed", 42u64);
        b.h(QubitId(0)).unwrap();
        b.cnot(QubitId(0), QubitId(1)).unwrap();
        b.push(NativeOp::Move { q: QubitId(1), to: Site::new(ZoneKind::Mz, 3) }).unwrap();
        b.push(NativeOp::Mcm { targets: vec![QubitId(1)], cycle: Some(0) }).unwrap();
        b.push(NativeOp::Reset0 { targets: vec![QubitId(1)] }).unwrap();
        b.push(NativeOp::CondFill { zone: ZoneKind::Mz }).unwrap();
        b.push(NativeOp::Idle { ms: 23.0 }).unwrap();
        let c = b.build();
        let text = to_text(&c);
        let c2 = from_text(&text).unwrap();
        assert_eq!(c, c2);
        assert_eq!(text, to_text(&c2));
    }

    #[test]
    fn parse_rejects_unknown_opcode() {
        assert!(matches!(
            from_text("FOO 1\n"),
            Err(CircuitError::Parse { line: 1, .. })
        ));
    }
}
