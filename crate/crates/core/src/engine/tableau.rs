//! Stabilizer/destabilizer tableau over up to 64 qubits.
//!
//! Rows store X/Z bit masks in single words plus a sign bit. Gate updates are
//! O(rows); measurement is the standard destabilizer-assisted procedure, so
//! no Gaussian elimination is needed at sample time.

use crate::rng::ShotRng;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct PauliRow {
    pub x: u64,
    pub z: u64,
    /// Sign bit: `true` means −1.
    pub sign: bool,
}

impl PauliRow {
    fn identity() -> Self {
        PauliRow { x: 0, z: 0, sign: false }
    }
}

/// Exponent of i contributed by multiplying single-qubit Paulis of `a` into
/// `b`, summed over all qubits (mod 4).
fn phase_exponent(a: &PauliRow, b: &PauliRow) -> i32 {
    let mut g: i32 = 0;
    // a = X: g += z_b (2 x_b − 1); a = Y: g += z_b − x_b; a = Z: g += x_b (1 − 2 z_b)
    let ax = a.x & !a.z;
    let ay = a.x & a.z;
    let az = !a.x & a.z;
    g += (ax & b.z & b.x).count_ones() as i32;
    g -= (ax & b.z & !b.x).count_ones() as i32;
    g += (ay & b.z & !b.x).count_ones() as i32;
    g -= (ay & !b.z & b.x).count_ones() as i32;
    g += (az & b.x & !b.z).count_ones() as i32;
    g -= (az & b.x & b.z).count_ones() as i32;
    g
}

/// Multiply Pauli `a` into `b`, returning the product row.
///
/// When the operands anticommute the true product carries a factor of ±i;
/// that only happens for destabilizer rows, whose phases are never read, so
/// the dropped factor is harmless bookkeeping.
fn row_product(a: &PauliRow, b: &PauliRow) -> PauliRow {
    let g = phase_exponent(a, b);
    let total = 2 * (a.sign as i32) + 2 * (b.sign as i32) + g;
    PauliRow {
        x: a.x ^ b.x,
        z: a.z ^ b.z,
        sign: total.rem_euclid(4) >= 2,
    }
}

/// Standard tableau: rows 0..n are destabilizers, n..2n stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliRow>,
}

impl Tableau {
    /// All-|0⟩ state: destabilizer X_i, stabilizer Z_i.
    pub fn zero_state(n: usize) -> Self {
        assert!(n <= 64, "tableau limited to 64 qubits");
        let mut rows = vec![PauliRow::identity(); 2 * n];
        for i in 0..n {
            rows[i].x = 1 << i;
            rows[n + i].z = 1 << i;
        }
        Tableau { n, rows }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizer(&self, i: usize) -> &PauliRow {
        &self.rows[self.n + i]
    }

    fn mul_into(&mut self, target: usize, source: usize) {
        self.rows[target] = row_product(&self.rows[source], &self.rows[target]);
    }

    // -- Clifford gates (conjugation P → U P U†) --------------------------

    pub fn x(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in &mut self.rows {
            row.sign ^= row.z & m != 0;
        }
    }

    pub fn z(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in &mut self.rows {
            row.sign ^= row.x & m != 0;
        }
    }

    /// S gate: X→Y, Y→−X, Z→Z.
    pub fn s(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in &mut self.rows {
            row.sign ^= (row.x & row.z & m) != 0;
            row.z ^= row.x & m;
        }
    }

    /// S† gate: X→−Y, Y→X, Z→Z.
    pub fn sdg(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in &mut self.rows {
            row.sign ^= (row.x & !row.z & m) != 0;
            row.z ^= row.x & m;
        }
    }

    /// √X gate: X→X, Z→−Y, Y→Z.
    pub fn sx(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in &mut self.rows {
            row.sign ^= (row.z & !row.x & m) != 0;
            row.x ^= row.z & m;
        }
    }

    pub fn h(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in &mut self.rows {
            row.sign ^= (row.x & row.z & m) != 0;
            let xb = row.x & m;
            let zb = row.z & m;
            row.x = (row.x & !m) | zb;
            row.z = (row.z & !m) | xb;
        }
    }

    /// RZ by k quarter turns (mod 4): 0 = identity, 1 = S, 2 = Z, 3 = S†.
    pub fn rz(&mut self, q: usize, quarter_turns: u8) {
        match quarter_turns & 3 {
            0 => {}
            1 => self.s(q),
            2 => self.z(q),
            3 => self.sdg(q),
            _ => unreachable!(),
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        assert_ne!(a, b);
        let ma = 1u64 << a;
        let mb = 1u64 << b;
        for row in &mut self.rows {
            let xa = row.x & ma != 0;
            let xb = row.x & mb != 0;
            let za = row.z & ma != 0;
            let zb = row.z & mb != 0;
            row.sign ^= xa && xb && (za ^ zb);
            if xb {
                row.z ^= ma;
            }
            if xa {
                row.z ^= mb;
            }
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t);
        let mc = 1u64 << c;
        let mt = 1u64 << t;
        for row in &mut self.rows {
            let xc = row.x & mc != 0;
            let zt = row.z & mt != 0;
            let xt = row.x & mt != 0;
            let zc = row.z & mc != 0;
            row.sign ^= xc && zt && (xt == zc);
            if xc {
                row.x ^= mt;
            }
            if zt {
                row.z ^= mc;
            }
        }
    }

    /// Apply a Pauli indicated by (x, z) flags to qubit q (noise injection).
    pub fn pauli(&mut self, q: usize, px: bool, pz: bool) {
        if px {
            self.x(q);
        }
        if pz {
            self.z(q);
        }
    }

    // -- Measurement ------------------------------------------------------

    /// Z-basis measurement outcome is deterministic iff no stabilizer
    /// anticommutes with Z_q. Returns the forced outcome when deterministic.
    pub fn peek_z(&self, q: usize) -> Option<bool> {
        let m = 1u64 << q;
        if (self.n..2 * self.n).any(|i| self.rows[i].x & m != 0) {
            return None;
        }
        Some(self.deterministic_outcome(q))
    }

    fn deterministic_outcome(&self, q: usize) -> bool {
        let m = 1u64 << q;
        let mut scratch = PauliRow::identity();
        for i in 0..self.n {
            if self.rows[i].x & m != 0 {
                scratch = row_product(&self.rows[self.n + i], &scratch);
            }
        }
        debug_assert_eq!(scratch.x, 0, "scratch row must be a pure Z product");
        debug_assert_eq!(scratch.z, m, "scratch row must equal ±Z_q");
        scratch.sign
    }

    /// Projective Z measurement with the given randomness source.
    pub fn measure_z(&mut self, q: usize, rng: &mut ShotRng) -> bool {
        let m = 1u64 << q;
        let p = (self.n..2 * self.n).find(|&i| self.rows[i].x & m != 0);
        match p {
            Some(p) => {
                for i in 0..2 * self.n {
                    if i != p && self.rows[i].x & m != 0 {
                        self.mul_into(i, p);
                    }
                }
                let outcome = rng.fair_bit();
                self.rows[p - self.n] = self.rows[p];
                self.rows[p] = PauliRow { x: 0, z: m, sign: outcome };
                outcome
            }
            None => self.deterministic_outcome(q),
        }
    }

    /// Reset qubit to |0⟩: measure, then flip if needed.
    pub fn reset_zero(&mut self, q: usize, rng: &mut ShotRng) {
        if self.measure_z(q, rng) {
            self.x(q);
        }
    }

    // -- Invariant checks ---------------------------------------------------

    /// Full symplectic integrity check: destabilizer i anticommutes with
    /// stabilizer i and commutes with every other row.
    pub fn check_symplectic(&self) -> bool {
        let anticommute = |a: &PauliRow, b: &PauliRow| -> bool {
            ((a.x & b.z).count_ones() + (a.z & b.x).count_ones()) % 2 == 1
        };
        for i in 0..self.n {
            for j in 0..self.n {
                let want = i == j;
                if anticommute(&self.rows[i], &self.rows[self.n + j]) != want {
                    return false;
                }
                if anticommute(&self.rows[i], &self.rows[j]) {
                    return false;
                }
                if anticommute(&self.rows[self.n + i], &self.rows[self.n + j]) {
                    return false;
                }
            }
        }
        true
    }
}
