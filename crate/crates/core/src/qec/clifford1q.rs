//! The 24-element single-qubit Clifford group, generated from the native
//! pulses S (= RZ(π/2)) and SX. Elements carry their native word so random
//! benchmarking layers and computed inversions compile directly to the
//! machine gateset.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::circuit::{NativeOp, QubitId};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Gen1 {
    /// RZ(π/2).
    S,
    /// √X pulse.
    Sx,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A signed Pauli axis (±X/±Y/±Z), e.g. a single-qubit stabilizer.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SignedPauli {
    pub axis: Axis,
    pub neg: bool,
}

impl SignedPauli {
    pub const MINUS_Z: SignedPauli = SignedPauli { axis: Axis::Z, neg: true };
    pub const PLUS_Z: SignedPauli = SignedPauli { axis: Axis::Z, neg: false };
}

type Mat = [[C64; 2]; 2]; // row major

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn dagger(a: &Mat) -> Mat {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn pauli_mat(axis: Axis) -> Mat {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => [[o, one], [one, o]],
        Axis::Y => [[o, -i], [i, o]],
        Axis::Z => [[one, o], [o, -one]],
    }
}

/// Canonical form up to global phase: rotate so the first nonzero entry is
/// positive real, then round to a hashable fixed-point key.
fn phase_canonical_key(m: &Mat) -> [(i64, i64); 4] {
    let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
    let pivot = flat
        .iter()
        .find(|c| c.norm() > 1e-9)
        .expect("nonzero matrix");
    let phase = pivot / pivot.norm();
    let mut key = [(0i64, 0i64); 4];
    for (k, c) in flat.iter().enumerate() {
        let v = c / phase;
        key[k] = ((v.re * 1e6).round() as i64, (v.im * 1e6).round() as i64);
    }
    key
}

#[derive(Clone, Debug)]
pub struct Clifford1 {
    pub matrix: Mat,
    /// Native word in application order (first pulse first).
    pub word: Vec<Gen1>,
}

impl Clifford1 {
    /// Conjugation action on a signed Pauli: P → U P U†.
    pub fn conjugate(&self, p: SignedPauli) -> SignedPauli {
        let m = mat_mul(&mat_mul(&self.matrix, &pauli_mat(p.axis)), &dagger(&self.matrix));
        let m = if p.neg {
            [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]]
        } else {
            m
        };
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for neg in [false, true] {
                let t = pauli_mat(axis);
                let s = if neg { -1.0 } else { 1.0 };
                let close = (0..2).all(|i| {
                    (0..2).all(|j| (m[i][j] - t[i][j] * s).norm() < 1e-6)
                });
                if close {
                    return SignedPauli { axis, neg };
                }
            }
        }
        panic!("conjugated Pauli left the Pauli group");
    }

    /// Native ops applying this Clifford to `q` (RZ ops are virtual).
    pub fn native_ops(&self, q: QubitId) -> Vec<NativeOp> {
        self.word
            .iter()
            .map(|g| match g {
                Gen1::S => NativeOp::rz(q, 1),
                Gen1::Sx => NativeOp::Sx { q },
            })
            .collect()
    }
}

/// The full 24-element group, BFS-enumerated from {S, SX} so words are
/// shortest native decompositions.
pub fn clifford_group() -> &'static Vec<Clifford1> {
    static GROUP: OnceLock<Vec<Clifford1>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let s_mat: Mat = [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
        ];
        let sx_mat: Mat = [
            [C64::new(0.5, 0.5), C64::new(0.5, -0.5)],
            [C64::new(0.5, -0.5), C64::new(0.5, 0.5)],
        ];
        let identity: Mat = [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ];
        let mut seen = std::collections::HashMap::new();
        let mut group = vec![Clifford1 { matrix: identity, word: vec![] }];
        seen.insert(phase_canonical_key(&identity), ());
        let mut frontier = std::collections::VecDeque::from([0usize]);
        while let Some(idx) = frontier.pop_front() {
            let cur = group[idx].clone();
            for (gen, gmat) in [(Gen1::S, s_mat), (Gen1::Sx, sx_mat)] {
                // gen applied after the current word.
                let m = mat_mul(&gmat, &cur.matrix);
                let key = phase_canonical_key(&m);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                    e.insert(());
                    let mut word = cur.word.clone();
                    word.push(gen);
                    group.push(Clifford1 { matrix: m, word });
                    frontier.push_back(group.len() - 1);
                }
            }
        }
        assert_eq!(group.len(), 24, "S and SX generate the 1Q Clifford group");
        group
    })
}

/// Finds a group element V with V·stab·V† = target.
pub fn map_stabilizer_to(stab: SignedPauli, target: SignedPauli) -> &'static Clifford1 {
    clifford_group()
        .iter()
        .find(|c| c.conjugate(stab) == target)
        .expect("1Q Clifford group acts transitively on signed axes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_has_24_elements() {
        assert_eq!(clifford_group().len(), 24);
    }

    #[test]
    fn identity_fixes_all_axes() {
        let id = &clifford_group()[0];
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for neg in [false, true] {
                let p = SignedPauli { axis, neg };
                assert_eq!(id.conjugate(p), p);
            }
        }
    }

    #[test]
    fn s_gate_rotates_x_to_y() {
        let group = clifford_group();
        let s = group
            .iter()
            .find(|c| c.word == vec![Gen1::S])
            .expect("S is a one-step word");
        assert_eq!(
            s.conjugate(SignedPauli { axis: Axis::X, neg: false }),
            SignedPauli { axis: Axis::Y, neg: false }
        );
        assert_eq!(
            s.conjugate(SignedPauli { axis: Axis::Z, neg: false }),
            SignedPauli { axis: Axis::Z, neg: false }
        );
    }

    #[test]
    fn sx_gate_rotates_z_to_minus_y() {
        let group = clifford_group();
        let sx = group.iter().find(|c| c.word == vec![Gen1::Sx]).unwrap();
        assert_eq!(
            sx.conjugate(SignedPauli { axis: Axis::Z, neg: false }),
            SignedPauli { axis: Axis::Y, neg: true }
        );
    }

    #[test]
    fn every_stabilizer_maps_to_minus_z() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for neg in [false, true] {
                let p = SignedPauli { axis, neg };
                let v = map_stabilizer_to(p, SignedPauli::MINUS_Z);
                assert_eq!(v.conjugate(p), SignedPauli::MINUS_Z);
            }
        }
    }

    #[test]
    fn words_are_short() {
        for c in clifford_group() {
            assert!(c.word.len() <= 6, "word too long: {:?}", c.word);
        }
    }
}
