//! Dense complex matrices at desk scale: just enough linear algebra for
//! finite-dimensional crossed-product models, G-index kernels, and the
//! matrix-exponential oracle. No external solver dependencies; sizes stay
//! in the tens.

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        CMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        Self::from_rows(
            &rows
                .iter()
                .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect::<Vec<_>>(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.set(i * rhs.rows + k, j * rhs.cols + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert_eq!(a.rows(), a.cols());
    let norm = a.max_abs() * a.rows() as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.scale(Complex64::new(1.0 / f64::powi(2.0, squarings as i32), 0.0));
    let mut term = CMatrix::identity(a.rows());
    let mut sum = CMatrix::identity(a.rows());
    for k in 1..=24 {
        term = term.mul(&b).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    let mut out = sum;
    for _ in 0..squarings {
        out = out.mul(&out);
    }
    out
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns (eigenvalues ascending, unitary V) with
/// `a = V diag(λ) V*`.
pub fn hermitian_eig(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut h = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = h.max_abs().max(1e-300);
    for _sweep in 0..120 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(h.get(p, q).norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let gamma = h.get(p, q);
                let m = gamma.norm();
                if m <= 1e-300 {
                    continue;
                }
                let phi = gamma.im.atan2(gamma.re);
                let alpha = h.get(p, p).re;
                let beta = h.get(q, q).re;
                let theta = 0.5 * (-2.0 * m).atan2(alpha - beta);
                let (s, c) = theta.sin_cos();
                let eip = Complex64::new(phi.cos(), phi.sin());
                // columns p and q of the rotation
                let rpp = Complex64::new(c, 0.0);
                let rpq = eip * s;
                let rqp = -eip.conj() * s;
                let rqq = Complex64::new(c, 0.0);
                // h ← R* h R applied on the (p, q) plane
                for i in 0..n {
                    let hip = h.get(i, p);
                    let hiq = h.get(i, q);
                    h.set(i, p, hip * rpp + hiq * rqp);
                    h.set(i, q, hip * rpq + hiq * rqq);
                }
                for j in 0..n {
                    let hpj = h.get(p, j);
                    let hqj = h.get(q, j);
                    h.set(p, j, rpp.conj() * hpj + rqp.conj() * hqj);
                    h.set(q, j, rpq.conj() * hpj + rqq.conj() * hqj);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * rpp + viq * rqp);
                    v.set(i, q, vip * rpq + viq * rqq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| h.get(i, i).re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let mut vs = CMatrix::zeros(n, n);
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            vs.set(i, newj, v.get(i, oldj));
        }
    }
    (sorted, vs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::Rng64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm_matches_scalar_exponential() {
        let a = CMatrix::from_rows(&[vec![c(0.3, 0.1)]]);
        let e = expm(&a);
        let exact = Complex64::new(0.3, 0.1).exp();
        assert!((e.get(0, 0) - exact).norm() < 1e-13);
    }

    #[test]
    fn expm_rotation_block() {
        // exp of [[0, -t],[t, 0]] is the rotation by t
        let t = 0.73;
        let a = CMatrix::from_real_rows(&[vec![0.0, -t], vec![t, 0.0]]);
        let e = expm(&a);
        assert!((e.get(0, 0).re - t.cos()).abs() < 1e-13);
        assert!((e.get(1, 0).re - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn hermitian_eig_reconstructs() {
        let mut rng = Rng64::new(5);
        for n in [2usize, 3, 5, 8] {
            let mut a = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, c(rng.symmetric(1.0), rng.symmetric(1.0)));
                }
            }
            let h = a.add(&a.adjoint()).scale(c(0.5, 0.0));
            let (vals, v) = hermitian_eig(&h);
            let mut lam = CMatrix::zeros(n, n);
            for (i, &val) in vals.iter().enumerate() {
                lam.set(i, i, c(val, 0.0));
            }
            let rebuilt = v.mul(&lam).mul(&v.adjoint());
            assert!(rebuilt.sub(&h).max_abs() < 1e-11, "n = {n}");
            let vv = v.adjoint().mul(&v);
            assert!(vv.sub(&CMatrix::identity(n)).max_abs() < 1e-11);
        }
    }
}
