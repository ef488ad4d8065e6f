//! Desk-scale simulator and analysis stack for a zoned neutral-atom quantum
//! processor with midcircuit measurement (MCM), ancilla reuse, atom-loss
//! replacement and reservoir replenishment.
//!
//! The crate is organized around the lifecycle of an experiment:
//!
//! - [`circuit`] — native-gateset circuit IR, zone model, compilation of
//!   textbook gates into the native set, validation and text serialization.
//! - [`qec`] — parameterized generators for the experiment circuits: the
//!   walking ring/repetition code, heralded Bell-pair distillation in the
//!   four-qubit error-detecting code, global-echo randomized benchmarking and Ramsey-with-MCM.
//! - [`engine`] — Clifford tableau simulation extended with per-qubit
//!   presence/leakage tracking, three-valued MCM, Monte-Carlo noise injection
//!   and a dense statevector oracle for validation.
//! - [`logistics`] — zone occupancy, conditional fill planning after MCM, and
//!   the reservoir replenishment sequence with its coherence cost.
//! - [`decoder`] — detector extraction, matching-graph construction from the
//!   noise model, per-shot loss-aware edits and exact minimum-weight perfect
//!   matching.
//! - [`lindblad`] — multi-level Lindblad solver for the imaging "hiding"
//!   shifts and leakage-driven loss landscape.
//! - [`analysis`] — detection frequencies, Wilson intervals, Bell fidelity,
//!   decay fits and retry histograms.

pub mod analysis;
pub mod circuit;
pub mod decoder;
pub mod engine;
pub mod lindblad;
pub mod logistics;
pub mod qec;
pub mod rng;
