//! Parameterized generators for the experiment circuits: the walking
//! ring/repetition code, heralded four-qubit-code Bell distillation (encoded and
//! unencoded), global-echo randomized benchmarking, and Ramsey sequences
//! with interleaved MCM cycles.
//!
//! Generators are pure functions of their spec (and seed); each returns the
//! circuit plus a JSON metadata sidecar (spec echo, qubit roles, detector
//! and herald definitions).

pub mod bell;
pub mod clifford1q;
pub mod distill;
pub mod gerb;
pub mod meta;
pub mod ramsey;
pub mod repcode;

use crate::engine::record::ShotRecord;
use crate::qec::meta::RepCodeMeta;

/// Raw detector parities of one repetition-code shot plus a flag for any
/// loss-randomized detector. Thin wrapper over the decoder's extraction,
/// convenient for generator-level tests.
pub fn detector_parities(shot: &ShotRecord, meta: &RepCodeMeta) -> (Vec<bool>, bool) {
    let dets = crate::decoder::extract_detectors(shot, meta)
        .expect("metadata consistent with shot");
    let any_lost = dets.iter().any(|d| d.loss_touched);
    (dets.into_iter().map(|d| d.parity).collect(), any_lost)
}
