//! Dense complex matrices sized for ≤ 20-level systems: multiplication,
//! Hermitian eigen-extremes (cyclic Jacobi), and elementwise helpers used by
//! the integrator.

pub use num_complex::Complex64;
use num_complex::Complex64 as C64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        Self::zeros_rect(dim, dim)
    }

    pub fn zeros_rect(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn dagger(&self) -> CMat {
        let mut out = CMat::zeros_rect(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(c, r) = self.at(r, c).conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros_rect(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    *out.at_mut(r, c) += a * other.at(k, c);
                }
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &CMat) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &CMat) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
    }

    pub fn scale_assign(&mut self, s: C64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn axpy(&mut self, s: f64, other: &CMat) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    /// Max elementwise modulus; used for step-error norms.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of a Hermitian matrix via cyclic complex Jacobi
    /// rotations. Intended for small density matrices.
    pub fn min_eigenvalue_hermitian(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 1 {
            return self.at(0, 0).re;
        }
        let mut a = self.clone();
        for _sweep in 0..60 {
            let mut off: f64 = 0.0;
            for r in 0..n {
                for c in r + 1..n {
                    off = off.max(a.at(r, c).norm());
                }
            }
            if off < 1e-12 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.at(p, q);
                    if apq.norm() < 1e-15 {
                        continue;
                    }
                    let app = a.at(p, p).re;
                    let aqq = a.at(q, q).re;
                    // Phase so the pivot becomes real, then a real Jacobi
                    // rotation.
                    let phase = apq / apq.norm();
                    let g = apq.norm();
                    let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                    let (s, c) = theta.sin_cos();
                    // Column rotation: [p q] ← [p q]·R with
                    // R = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]] … apply as
                    // unitary conjugation U† A U with U acting on p,q.
                    let u_pp = C64::new(c, 0.0);
                    let u_pq = phase * s;
                    let u_qp = -phase.conj() * s;
                    let u_qq = C64::new(c, 0.0);
                    // A ← U† A U; update rows then columns.
                    for k in 0..n {
                        let akp = a.at(k, p);
                        let akq = a.at(k, q);
                        *a.at_mut(k, p) = akp * u_pp + akq * u_qp;
                        *a.at_mut(k, q) = akp * u_pq + akq * u_qq;
                    }
                    for k in 0..n {
                        let apk = a.at(p, k);
                        let aqk = a.at(q, k);
                        *a.at_mut(p, k) = u_pp.conj() * apk + u_qp.conj() * aqk;
                        *a.at_mut(q, k) = u_pq.conj() * apk + u_qq.conj() * aqk;
                    }
                    let _ = (app, aqq);
                }
            }
        }
        (0..n).map(|i| a.at(i, i).re).fold(f64::INFINITY, f64::min)
    }
}
