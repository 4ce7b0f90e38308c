//! Exact arithmetic in the complexified Clifford algebra ℂ_n with the
//! convention e_i² = +1, so that c(ξ)² = |ξ|²·1. Sign conventions vary
//! across the literature; this one is forced by the wave-operator closed
//! form `exp(isc(ξ)) = cos(s|ξ|) + i c(ξ) sin(s|ξ|)/|ξ|`.
//!
//! Basis multivectors are indexed by subsets of generators encoded as
//! bitmasks; an element of rank n stores 2ⁿ complex coefficients.

use num_complex::Complex64;
use num_rational::Ratio;
use thiserror::Error;

use crate::util::pairwise_sum_f64;

#[derive(Debug, Error, PartialEq)]
pub enum CliffordError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("vector dimension {0} does not match rank {1}")]
    DimensionMismatch(usize, usize),
    #[error("quadrature step {step:.3e} cannot resolve oscillation at |ξ| = {freq:.3e}; need step ≤ {bound:.3e}")]
    QuadratureUnresolved { step: f64, freq: f64, bound: f64 },
}

/// Element of ℂ_n as 2ⁿ multivector coefficients, blade-indexed by bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordElement {
    rank: usize,
    coeffs: Vec<Complex64>,
}

/// Sign of the blade product e_S · e_T under e_i² = +1, counting the
/// transpositions needed to sort the concatenation. The product blade is
/// the symmetric difference S △ T.
pub fn blade_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl CliffordElement {
    pub fn zero(rank: usize) -> Self {
        CliffordElement {
            rank,
            coeffs: vec![Complex64::new(0.0, 0.0); 1 << rank],
        }
    }

    pub fn one(rank: usize) -> Self {
        let mut e = Self::zero(rank);
        e.coeffs[0] = Complex64::new(1.0, 0.0);
        e
    }

    /// The generator e_i (1-based axis index).
    pub fn generator(rank: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= rank, "generator index out of range");
        let mut e = Self::zero(rank);
        e.coeffs[1 << (i - 1)] = Complex64::new(1.0, 0.0);
        e
    }

    pub fn scalar(rank: usize, z: Complex64) -> Self {
        let mut e = Self::zero(rank);
        e.coeffs[0] = z;
        e
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coeff(&self, blade: usize) -> Complex64 {
        self.coeffs[blade]
    }

    pub fn set_coeff(&mut self, blade: usize, z: Complex64) {
        self.coeffs[blade] = z;
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.rank, rhs.rank);
        CliffordElement {
            rank: self.rank,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.rank, rhs.rank);
        CliffordElement {
            rank: self.rank,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        CliffordElement {
            rank: self.rank,
            coeffs: self.coeffs.iter().map(|c| c * z).collect(),
        }
    }

    /// Coefficient ℓ² norm.
    pub fn norm(&self) -> f64 {
        pairwise_sum_f64(&self.coeffs.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>()).sqrt()
    }

    /// Grading involution ε: negates odd-parity blades.
    pub fn grading(&self) -> Self {
        CliffordElement {
            rank: self.rank,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(
                    |(blade, c)| {
                        if blade.count_ones() % 2 == 1 {
                            -c
                        } else {
                            *c
                        }
                    },
                )
                .collect(),
        }
    }

    /// True if only blades of the given parity (0 even, 1 odd) are present.
    pub fn has_pure_parity(&self, parity: u32, tol: f64) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(blade, c)| blade.count_ones() % 2 == parity % 2 || c.norm() <= tol)
    }

    /// Adjoint for the Euclidean convention: complex conjugation combined
    /// with blade reversal, matching conjugate-transpose in any faithful
    /// representation with self-adjoint generators.
    pub fn adjoint(&self) -> Self {
        CliffordElement {
            rank: self.rank,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(blade, c)| {
                    let k = blade.count_ones() as u64;
                    let sign = if (k * (k.saturating_sub(1)) / 2) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    c.conj() * sign
                })
                .collect(),
        }
    }

    /// Image under the algebra automorphism induced by an orthogonal map
    /// R on ℝⁿ: e_i ↦ Σ_j R[j][i] e_j, extended multiplicatively.
    pub fn apply_orthogonal(&self, r: &[Vec<f64>]) -> Self {
        let n = self.rank;
        assert_eq!(r.len(), n);
        let images: Vec<CliffordElement> = (0..n)
            .map(|i| {
                let col: Vec<f64> = (0..n).map(|j| r[j][i]).collect();
                clifford_vector(n, &col).expect("square matrix")
            })
            .collect();
        let mut out = CliffordElement::zero(n);
        for (blade, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let mut prod = CliffordElement::one(n);
            for i in 0..n {
                if blade & (1 << i) != 0 {
                    prod = clifford_mul(&prod, &images[i]).expect("same rank");
                }
            }
            out = out.add(&prod.scale(*c));
        }
        out
    }
}

/// Structure-constant multiplication in ℂ_n.
pub fn clifford_mul(
    a: &CliffordElement,
    b: &CliffordElement,
) -> Result<CliffordElement, CliffordError> {
    if a.rank != b.rank {
        return Err(CliffordError::RankMismatch(a.rank, b.rank));
    }
    let mut out = CliffordElement::zero(a.rank);
    for (sa, ca) in a.coeffs.iter().enumerate() {
        if ca.norm_sqr() == 0.0 {
            continue;
        }
        for (sb, cb) in b.coeffs.iter().enumerate() {
            if cb.norm_sqr() == 0.0 {
                continue;
            }
            let sign = blade_sign(sa, sb);
            out.coeffs[sa ^ sb] += ca * cb * sign;
        }
    }
    Ok(out)
}

/// Clifford multiplication element c(ξ) = Σ ξ_j e_j.
pub fn clifford_vector(rank: usize, xi: &[f64]) -> Result<CliffordElement, CliffordError> {
    if xi.len() != rank {
        return Err(CliffordError::DimensionMismatch(xi.len(), rank));
    }
    let mut e = CliffordElement::zero(rank);
    for (j, &x) in xi.iter().enumerate() {
        e.coeffs[1 << j] = Complex64::new(x, 0.0);
    }
    Ok(e)
}

fn norm2(xi: &[f64]) -> f64 {
    pairwise_sum_f64(&xi.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt()
}

/// sin(s r)/r with the removable singularity at r = 0 evaluated by series.
fn sinc_over_r(s: f64, r: f64) -> f64 {
    if r.abs() < 1e-6 {
        let x = s * r;
        let x2 = x * x;
        s * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        (s * r).sin() / r
    }
}

/// Wave operator `exp(isc(ξ)) = cos(s|ξ|)·1 + i c(ξ) sin(s|ξ|)/|ξ|`.
pub fn wave_operator(rank: usize, s: f64, xi: &[f64]) -> Result<CliffordElement, CliffordError> {
    let c = clifford_vector(rank, xi)?;
    let r = norm2(xi);
    let mut out = c.scale(Complex64::new(0.0, sinc_over_r(s, r)));
    out.coeffs[0] += Complex64::new((s * r).cos(), 0.0);
    Ok(out)
}

/// Weight data for the χ quadratures: χ̂(s) = -i g(s)/s with g smooth,
/// even, supported in [-σ, σ].
pub struct ChiProfile<'a> {
    pub g: &'a dyn Fn(f64) -> f64,
    pub sigma: f64,
    /// Midpoint nodes per unit length of [-σ, σ].
    pub nodes_per_unit: usize,
}

impl<'a> ChiProfile<'a> {
    fn node_count(&self) -> usize {
        ((2.0 * self.sigma * self.nodes_per_unit as f64).ceil() as usize).max(16)
    }

    fn step(&self) -> f64 {
        2.0 * self.sigma / self.node_count() as f64
    }
}

/// χ(c(ξ)) = ∫ χ̂(s) exp(isc(ξ)) ds by symmetric midpoint quadrature.
///
/// The midpoint nodes come in ± pairs, so the even/odd split of the
/// integrand is performed by the summation itself and the 1/s factor in
/// χ̂ is never evaluated at s = 0. Refuses when the step cannot resolve
/// the e^{is|ξ|} oscillation.
pub fn chi_of_clifford(profile: &ChiProfile, xi: &[f64]) -> Result<CliffordElement, CliffordError> {
    let rank = xi.len();
    let m = profile.node_count();
    let h = profile.step();
    let freq = norm2(xi);
    let bound = std::f64::consts::PI / 4.0;
    if h * freq > bound {
        return Err(CliffordError::QuadratureUnresolved {
            step: h,
            freq,
            bound: bound / freq,
        });
    }
    let mut acc = CliffordElement::zero(rank);
    for j in 0..m {
        let s = -profile.sigma + (j as f64 + 0.5) * h;
        let w = (profile.g)(s) / s; // χ̂(s) = -i g(s)/s
        let wave = wave_operator(rank, s, xi)?;
        acc = acc.add(&wave.scale(Complex64::new(0.0, -w * h)));
    }
    Ok(acc)
}

/// Scalar normalizing function by the same midpoint rule:
/// χ(λ) = ∫ g(s) sin(λs)/s ds. Odd in λ bitwise.
pub fn chi_scalar(profile: &ChiProfile, lambda: f64) -> f64 {
    let m = profile.node_count();
    let h = profile.step();
    let l = lambda.abs();
    let terms: Vec<f64> = (0..m)
        .map(|j| {
            let s = -profile.sigma + (j as f64 + 0.5) * h;
            (profile.g)(s) * sinc_over_r(l, s) * h
        })
        .collect();
    let value = pairwise_sum_f64(&terms);
    if lambda.is_sign_negative() {
        -value
    } else {
        value
    }
}

/// Pair of polynomials with exact rational coefficients giving the n-th
/// derivative of h(y) = sin(y)/y as (sin·φ_n + cos·ψ_n)/y^{n+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPair {
    pub order: usize,
    /// Ascending coefficients of φ_n.
    pub phi: Vec<Ratio<i64>>,
    /// Ascending coefficients of ψ_n.
    pub psi: Vec<Ratio<i64>>,
}

fn poly_deriv(p: &[Ratio<i64>]) -> Vec<Ratio<i64>> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * Ratio::from_integer(k as i64))
        .collect()
}

fn poly_shift_up(p: &[Ratio<i64>]) -> Vec<Ratio<i64>> {
    let mut out = vec![Ratio::from_integer(0)];
    out.extend_from_slice(p);
    out
}

fn poly_sub(a: &[Ratio<i64>], b: &[Ratio<i64>]) -> Vec<Ratio<i64>> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|k| {
            let ca = a.get(k).copied().unwrap_or_else(|| Ratio::from_integer(0));
            let cb = b.get(k).copied().unwrap_or_else(|| Ratio::from_integer(0));
            ca - cb
        })
        .collect()
}

fn poly_scale(p: &[Ratio<i64>], c: Ratio<i64>) -> Vec<Ratio<i64>> {
    p.iter().map(|x| x * c).collect()
}

fn poly_trim(mut p: Vec<Ratio<i64>>) -> Vec<Ratio<i64>> {
    while p.len() > 1 && *p.last().unwrap() == Ratio::from_integer(0) {
        p.pop();
    }
    p
}

pub fn poly_eval(p: &[Ratio<i64>], y: f64) -> f64 {
    let mut acc = 0.0;
    for c in p.iter().rev() {
        acc = acc * y + (*c.numer() as f64) / (*c.denom() as f64);
    }
    acc
}

/// Polynomials for dⁿ/dyⁿ h(y), h(y) = sin(y)/y, by the recurrence
/// φ_{n+1} = yφ_n' − yψ_n − (n+1)φ_n,  ψ_{n+1} = yφ_n + yψ_n' − (n+1)ψ_n,
/// starting from (φ₀, ψ₀) = (1, 0).
pub fn h_derivative_polys(order: usize) -> PolyPair {
    let mut phi = vec![Ratio::from_integer(1)];
    let mut psi = vec![Ratio::from_integer(0)];
    for n in 0..order {
        let np1 = Ratio::from_integer((n + 1) as i64);
        let phi_next = poly_sub(
            &poly_sub(&poly_shift_up(&poly_deriv(&phi)), &poly_shift_up(&psi)),
            &poly_scale(&phi, np1),
        );
        let psi_next = poly_sub(
            &{
                let mut t = poly_shift_up(&phi);
                let u = poly_shift_up(&poly_deriv(&psi));
                let len = t.len().max(u.len());
                t.resize(len, Ratio::from_integer(0));
                for (k, c) in u.iter().enumerate() {
                    t[k] += c;
                }
                t
            },
            &poly_scale(&psi, np1),
        );
        phi = poly_trim(phi_next);
        psi = poly_trim(psi_next);
        debug_assert!(phi.len() <= n + 2 && psi.len() <= n + 2, "degree bound");
    }
    PolyPair { order, phi, psi }
}

impl PolyPair {
    /// Evaluate dⁿh/dyⁿ at y via the closed form.
    pub fn eval_derivative(&self, y: f64) -> f64 {
        let num = y.sin() * poly_eval(&self.phi, y) + y.cos() * poly_eval(&self.psi, y);
        num / y.powi(self.order as i32 + 1)
    }

    pub fn degree_bound_holds(&self) -> bool {
        self.phi.len() <= self.order + 1 && self.psi.len() <= self.order + 1
    }
}

/// h(y) = sin(y)/y with the removable singularity handled by series.
pub fn h_sinc(y: f64) -> f64 {
    sinc_over_r(1.0, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, CMatrix};
    use crate::oracles::pauli_rep;
    use crate::util::Rng64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn generator_relations() {
        for n in 1..=3 {
            for i in 1..=n {
                let ei = CliffordElement::generator(n, i);
                let sq = clifford_mul(&ei, &ei).unwrap();
                assert_eq!(sq, CliffordElement::one(n), "e_{i}^2 = 1");
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    let ej = CliffordElement::generator(n, j);
                    let anti = clifford_mul(&ei, &ej)
                        .unwrap()
                        .add(&clifford_mul(&ej, &ei).unwrap());
                    assert!(anti.norm() == 0.0, "anticommutation");
                }
            }
        }
    }

    #[test]
    fn vector_square_is_norm() {
        let v = clifford_vector(2, &[3.0, 4.0]).unwrap();
        let sq = clifford_mul(&v, &v).unwrap();
        assert!((sq.coeff(0) - c(25.0, 0.0)).norm() < 1e-14);
        assert!(sq.sub(&CliffordElement::one(2).scale(c(25.0, 0.0))).norm() < 1e-14);

        let v = clifford_vector(3, &[1.0, 2.0, 2.0]).unwrap();
        let sq = clifford_mul(&v, &v).unwrap();
        assert!(sq.sub(&CliffordElement::one(3).scale(c(9.0, 0.0))).norm() < 1e-13);
    }

    #[test]
    fn vector_edge_cases() {
        let z = clifford_vector(2, &[0.0, 0.0]).unwrap();
        assert_eq!(z, CliffordElement::zero(2));
        let e1 = clifford_vector(2, &[1.0, 0.0]).unwrap();
        assert_eq!(e1, CliffordElement::generator(2, 1));
        assert_eq!(
            clifford_vector(2, &[1.0]).unwrap_err(),
            CliffordError::DimensionMismatch(1, 2)
        );
        assert_eq!(
            clifford_mul(&CliffordElement::one(1), &CliffordElement::one(2)).unwrap_err(),
            CliffordError::RankMismatch(1, 2)
        );
    }

    #[test]
    fn wave_operator_basics() {
        let w = wave_operator(2, 0.0, &[0.3, -0.7]).unwrap();
        assert!(
            w.sub(&CliffordElement::one(2)).norm() < 1e-15,
            "s = 0 gives 1"
        );

        // ξ = (1,0): cos(s)·1 + i sin(s)·e1
        let s = 0.83;
        let w = wave_operator(2, s, &[1.0, 0.0]).unwrap();
        assert!((w.coeff(0) - c(s.cos(), 0.0)).norm() < 1e-15);
        assert!((w.coeff(1) - c(0.0, s.sin())).norm() < 1e-15);

        // group law in s
        let a = wave_operator(2, 0.4, &[1.0, 2.0]).unwrap();
        let b = wave_operator(2, 0.9, &[1.0, 2.0]).unwrap();
        let ab = clifford_mul(&a, &b).unwrap();
        let direct = wave_operator(2, 1.3, &[1.0, 2.0]).unwrap();
        assert!(ab.sub(&direct).norm() < 1e-14);
    }

    #[test]
    fn wave_operator_unitary() {
        let mut rng = Rng64::new(11);
        for _ in 0..50 {
            let s = rng.symmetric(3.0);
            let xi = [rng.symmetric(4.0), rng.symmetric(4.0)];
            let w = wave_operator(2, s, &xi).unwrap();
            let winv = wave_operator(2, -s, &xi).unwrap();
            let prod = clifford_mul(&w, &winv).unwrap();
            assert!(prod.sub(&CliffordElement::one(2)).norm() <= 1e-12);
            // conjugate-transpose route
            let prod2 = clifford_mul(&w, &w.adjoint()).unwrap();
            assert!(prod2.sub(&CliffordElement::one(2)).norm() <= 1e-12);
        }
    }

    #[test]
    fn wave_operator_matches_matrix_exponential() {
        // Oracle: generic scaling-and-squaring exponential of i s·rep(c(ξ))
        // in the fixed Pauli-type representation, n ∈ {1,2,3}.
        let mut rng = Rng64::new(23);
        let mut worst: f64 = 0.0;
        for n in 1..=3usize {
            let gens = pauli_rep(n);
            for _ in 0..34 {
                let s = rng.symmetric(2.0);
                let xi: Vec<f64> = (0..n).map(|_| rng.symmetric(3.0)).collect();
                let mut m = CMatrix::zeros(gens[0].rows(), gens[0].cols());
                for (g, &x) in gens.iter().zip(&xi) {
                    m = m.add(&g.scale(c(x, 0.0)));
                }
                let exact = expm(&m.scale(c(0.0, s)));
                let wave = wave_operator(n, s, &xi).unwrap();
                let mut rep_wave = CMatrix::zeros(exact.rows(), exact.cols());
                for blade in 0..(1usize << n) {
                    let coeff = wave.coeff(blade);
                    if coeff.norm() == 0.0 {
                        continue;
                    }
                    let mut b = CMatrix::identity(exact.rows());
                    for i in 0..n {
                        if blade & (1 << i) != 0 {
                            b = b.mul(&gens[i]);
                        }
                    }
                    rep_wave = rep_wave.add(&b.scale(coeff));
                }
                let err = rep_wave.sub(&exact).max_abs();
                worst = worst.max(err);
            }
        }
        assert!(
            worst <= 1e-10,
            "max abs error {worst:.3e} vs matrix exponential"
        );
    }

    fn test_profile() -> (f64, impl Fn(f64) -> f64) {
        let sigma = 1.0;
        (sigma, move |s: f64| {
            let u = s / sigma;
            if u.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - u * u)).exp() / std::f64::consts::PI
            }
        })
    }

    #[test]
    fn chi_of_clifford_scalar_reduction() {
        let (sigma, g) = test_profile();
        let profile = ChiProfile {
            g: &g,
            sigma,
            nodes_per_unit: 400,
        };
        // χ(c(ξ)) must equal χ(|ξ|)·c(ξ)/|ξ|.
        for xi in [[1.5, 0.0], [0.6, -2.0], [3.0, 4.0]] {
            let lhs = chi_of_clifford(&profile, &xi).unwrap();
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let chi = chi_scalar(&profile, r);
            let rhs = clifford_vector(2, &xi).unwrap().scale(c(chi / r, 0.0));
            assert!(lhs.sub(&rhs).norm() < 1e-10);
        }
        // ξ = 0 gives 0 (χ is odd).
        let z = chi_of_clifford(&profile, &[0.0, 0.0]).unwrap();
        assert!(z.norm() < 1e-12);
    }

    #[test]
    fn chi_of_clifford_oddness_and_selfadjoint() {
        let (sigma, g) = test_profile();
        let profile = ChiProfile {
            g: &g,
            sigma,
            nodes_per_unit: 400,
        };
        let xi = [1.2, 0.7];
        let v = chi_of_clifford(&profile, &xi).unwrap();
        // odd under the grading involution
        assert!(v.grading().add(&v).norm() < 1e-12);
        assert!(v.has_pure_parity(1, 1e-12));
        // self-adjoint
        assert!(v.adjoint().sub(&v).norm() < 1e-12);
    }

    #[test]
    fn chi_of_clifford_tends_to_unitary() {
        let (sigma, g) = test_profile();
        let profile = ChiProfile {
            g: &g,
            sigma,
            nodes_per_unit: 2200,
        };
        // ‖χ(c(ξ))² − 1‖ decays superpolynomially in |ξ|: fit the tail
        // model log(defect) = a − c√r on moderate radii and check the
        // value at |ξ| = 20 sits at or below the fitted tail.
        let defect_at = |r: f64| {
            let v = chi_of_clifford(&profile, &[r, 0.0]).unwrap();
            clifford_mul(&v, &v)
                .unwrap()
                .sub(&CliffordElement::one(2))
                .norm()
        };
        let fit_radii: [f64; 4] = [6.0, 8.0, 10.0, 12.0];
        let pts: Vec<(f64, f64)> = fit_radii
            .iter()
            .map(|&r| (r.sqrt(), defect_at(r).ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        assert!(slope < 0.0, "tail must decay, slope {slope}");
        let predicted = (intercept + slope * 20f64.sqrt()).exp();
        let measured = defect_at(20.0);
        assert!(
            measured <= 10.0 * predicted,
            "defect {measured:.3e} above fitted superpolynomial tail {predicted:.3e}"
        );
        assert!(measured < defect_at(5.0), "decreasing along |ξ|");
    }

    #[test]
    fn chi_quadrature_refuses_unresolved() {
        let (sigma, g) = test_profile();
        let profile = ChiProfile {
            g: &g,
            sigma,
            nodes_per_unit: 20,
        };
        let err = chi_of_clifford(&profile, &[400.0, 0.0]).unwrap_err();
        match err {
            CliffordError::QuadratureUnresolved { .. } => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn h_polys_first_orders() {
        let p0 = h_derivative_polys(0);
        assert_eq!(p0.phi, vec![Ratio::from_integer(1)]);
        assert_eq!(p0.psi, vec![Ratio::from_integer(0)]);

        // (φ₁, ψ₁) = (−1, y)
        let p1 = h_derivative_polys(1);
        assert_eq!(p1.phi, vec![Ratio::from_integer(-1)]);
        assert_eq!(p1.psi, vec![Ratio::from_integer(0), Ratio::from_integer(1)]);
    }

    #[test]
    fn h_polys_degree_bound() {
        for n in 0..=12 {
            assert!(h_derivative_polys(n).degree_bound_holds(), "order {n}");
        }
    }

    #[test]
    fn h_polys_match_low_order_finite_differences() {
        // Central differences are a healthy oracle up to third order;
        // beyond that f64 cancellation dominates and the moment oracle
        // below takes over.
        fn h(y: f64) -> f64 {
            y.sin() / y
        }
        fn fd(order: usize, y: f64, step: f64) -> f64 {
            if order == 0 {
                h(y)
            } else {
                (fd(order - 1, y + step, step) - fd(order - 1, y - step, step)) / (2.0 * step)
            }
        }
        for order in 0..=3 {
            let pp = h_derivative_polys(order);
            for &y in &[0.5, 2.0, 10.0] {
                let step = 1e-3;
                let oracle = fd(order, y, step);
                let closed = pp.eval_derivative(y);
                let denom = oracle.abs().max(1e-3);
                assert!(
                    ((closed - oracle) / denom).abs() <= 1e-6,
                    "order {order} at y={y}: closed {closed:.8e} vs fd {oracle:.8e}"
                );
            }
        }
    }

    #[test]
    fn h_polys_match_moment_oracle() {
        // dⁿ/dyⁿ sin(y)/y = ∫₀¹ tⁿ cos(ty + nπ/2) dt, evaluated by
        // Simpson's rule: an oracle independent of the recurrence.
        fn moment(order: usize, y: f64) -> f64 {
            let m = 4096usize;
            let h = 1.0 / m as f64;
            let f = |t: f64| {
                t.powi(order as i32) * (t * y + order as f64 * std::f64::consts::FRAC_PI_2).cos()
            };
            let mut acc = f(0.0) + f(1.0);
            for k in 1..m {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(k as f64 * h);
            }
            acc * h / 3.0
        }
        for order in 0..=6 {
            let pp = h_derivative_polys(order);
            for &y in &[0.5, 2.0, 10.0] {
                let oracle = moment(order, y);
                let closed = pp.eval_derivative(y);
                let denom = oracle.abs().max(1e-3);
                assert!(
                    ((closed - oracle) / denom).abs() <= 1e-6,
                    "order {order} at y={y}: closed {closed:.8e} vs moment {oracle:.8e}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn mul_is_associative(
            a in proptest::collection::vec(-2.0f64..2.0, 4),
            b in proptest::collection::vec(-2.0f64..2.0, 4),
            d in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let mk = |v: &[f64]| {
                let mut e = CliffordElement::zero(2);
                for (blade, &x) in v.iter().enumerate() {
                    e.set_coeff(blade, c(x, -0.25 * x));
                }
                e
            };
            let (x, y, z) = (mk(&a), mk(&b), mk(&d));
            let lhs = clifford_mul(&clifford_mul(&x, &y).unwrap(), &z).unwrap();
            let rhs = clifford_mul(&x, &clifford_mul(&y, &z).unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }

        #[test]
        fn parity_is_additive(
            i in 1usize..=3,
            j in 1usize..=3,
        ) {
            let a = CliffordElement::generator(3, i);
            let b = CliffordElement::generator(3, j);
            let p = clifford_mul(&a, &b).unwrap();
            prop_assert!(p.has_pure_parity(2, 0.0), "odd·odd is even");
        }
    }
}
