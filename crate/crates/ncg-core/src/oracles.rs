//! Fixed faithful matrix representations and related oracle machinery.
//! Compiled only for tests and for downstream verification suites (via
//! the `oracles` feature); not part of the regular API surface.

use num_complex::Complex64;

use crate::linalg::CMatrix;

fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
        vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
    ])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
    ])
}

/// Chirality-ordered generators of ℂ_n on (ℂ²)^{⊗⌈n/2⌉}:
/// e_{2j-1} = Z^{⊗(j-1)} ⊗ X ⊗ 1, e_{2j} = Z^{⊗(j-1)} ⊗ Y ⊗ 1.
/// Faithful, with e_i e_j + e_j e_i = 2δ_{ij}.
pub fn pauli_rep(n: usize) -> Vec<CMatrix> {
    let k = n.div_ceil(2);
    (1..=n)
        .map(|i| {
            let pair = (i + 1) / 2; // 1-based qubit index
            let mut m = CMatrix::identity(1);
            for q in 1..=k {
                let factor = if q < pair {
                    pauli_z()
                } else if q > pair {
                    CMatrix::identity(2)
                } else if i % 2 == 1 {
                    pauli_x()
                } else {
                    pauli_y()
                };
                m = m.kron(&factor);
            }
            m
        })
        .collect()
}
