//! Finite cyclic symmetry: the ℤ_k ⊂ SL₂(ℤ) actions on the torus model
//! (k ∈ {1,2,3,4,6}), smooth crossed products by a finite group,
//! the twisted-group-algebra 2-cocycle, representation-ring arithmetic,
//! the G-index at matrix scale, and the [ρ] stabilization morphism.
//!
//! Generator matrices are fixed concrete choices. For k = 3, 6 they are
//! not orthogonal for the standard metric; each group carries an
//! explicit invariant Gram matrix and an orthogonalized generator
//! W g W⁻¹ (W = Gram^{1/2}) for uses where a genuine rotation is needed.

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::Algebra;
use crate::linalg::{hermitian_eig, CMatrix};
use crate::torus::{star_j, DeformationMatrix, TorusElement};
use crate::util::{e2pi, pairwise_sum_f64};

#[derive(Debug, Error, PartialEq)]
pub enum GroupError {
    #[error("unsupported cyclic order {0}; expected 1, 2, 3, 4, or 6")]
    UnsupportedOrder(usize),
    #[error("operator is not equivariant: defect {0:.3e}")]
    NotEquivariant(f64),
    #[error("kernel character multiplicities are not integral: {0:.3e} from integer")]
    NonIntegralMultiplicity(f64),
    #[error("input matrices do not form a representation: defect {0:.3e}")]
    NotARepresentation(f64),
    #[error("group mismatch: order {0} vs {1}")]
    GroupMismatch(usize, usize),
}

pub type IntMat2 = [[i64; 2]; 2];

const IDENTITY: IntMat2 = [[1, 0], [0, 1]];

fn mat_mul(a: IntMat2, b: IntMat2) -> IntMat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn det(m: IntMat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn transpose(m: IntMat2) -> IntMat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Inverse of an integer matrix with determinant ±1.
fn inverse(m: IntMat2) -> IntMat2 {
    let d = det(m);
    assert!(d == 1 || d == -1);
    [[d * m[1][1], -d * m[0][1]], [-d * m[1][0], d * m[0][0]]]
}

fn apply(m: IntMat2, v: [i64; 2]) -> [i64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn apply_f64(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// A finite cyclic group ℤ_k acting on ℝ² through a fixed SL₂(ℤ) matrix,
/// together with an invariant Gram matrix for the cases where the
/// generator is not orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicAction {
    order: usize,
    gen: IntMat2,
    gram: IntMat2,
}

impl CyclicAction {
    pub fn new(order: usize) -> Result<Self, GroupError> {
        let (gen, gram): (IntMat2, IntMat2) = match order {
            1 => (IDENTITY, IDENTITY),
            2 => ([[-1, 0], [0, -1]], IDENTITY),
            3 => ([[0, -1], [1, -1]], [[2, -1], [-1, 2]]),
            4 => ([[0, -1], [1, 0]], IDENTITY),
            6 => ([[0, -1], [1, 1]], [[2, 1], [1, 2]]),
            other => return Err(GroupError::UnsupportedOrder(other)),
        };
        let action = CyclicAction { order, gen, gram };
        debug_assert_eq!(det(gen), 1);
        debug_assert!(action.generator_order_is_exact());
        debug_assert!(action.gram_is_invariant());
        Ok(action)
    }

    pub fn generator_order_is_exact(&self) -> bool {
        let mut m = self.gen;
        for _ in 1..self.order {
            if m == IDENTITY {
                return false; // order strictly divides k
            }
            m = mat_mul(m, self.gen);
        }
        m == IDENTITY
    }

    pub fn gram_is_invariant(&self) -> bool {
        mat_mul(mat_mul(transpose(self.gen), self.gram), self.gen) == self.gram
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn generator(&self) -> IntMat2 {
        self.gen
    }

    pub fn gram(&self) -> IntMat2 {
        self.gram
    }

    /// Group elements as generator powers 0..k.
    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order
    }

    /// ρ_{g^power} as an exact integer matrix.
    pub fn mat(&self, power: usize) -> IntMat2 {
        let mut m = IDENTITY;
        for _ in 0..(power % self.order) {
            m = mat_mul(m, self.gen);
        }
        m
    }

    pub fn inverse_power(&self, power: usize) -> usize {
        (self.order - power % self.order) % self.order
    }

    /// W = Gram^{1/2} (symmetric square root of the invariant form).
    pub fn gram_sqrt(&self) -> [[f64; 2]; 2] {
        let (a, b, c) = (
            self.gram[0][0] as f64,
            self.gram[0][1] as f64,
            self.gram[1][1] as f64,
        );
        let s = (a * c - b * b).sqrt();
        let t = (a + c + 2.0 * s).sqrt();
        [[(a + s) / t, b / t], [b / t, (c + s) / t]]
    }

    /// The conjugated generator power W ρ W⁻¹: a true orthogonal map for
    /// the standard metric (a rotation by 2π·power/k for these groups).
    pub fn orthogonal_mat(&self, power: usize) -> [[f64; 2]; 2] {
        let w = self.gram_sqrt();
        let dw = w[0][0] * w[1][1] - w[0][1] * w[1][0];
        let winv = [[w[1][1] / dw, -w[0][1] / dw], [-w[1][0] / dw, w[0][0] / dw]];
        let m = self.mat(power);
        let mf = [
            [m[0][0] as f64, m[0][1] as f64],
            [m[1][0] as f64, m[1][1] as f64],
        ];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for p in 0..2 {
                    for q in 0..2 {
                        acc += w[i][p] * mf[p][q] * winv[q][j];
                    }
                }
                out[i][j] = acc;
            }
        }
        out
    }

    /// ρ_{g^power} x for a real vector.
    pub fn apply_real(&self, power: usize, x: [f64; 2]) -> [f64; 2] {
        let m = self.mat(power);
        apply_f64(
            &[
                [m[0][0] as f64, m[0][1] as f64],
                [m[1][0] as f64, m[1][1] as f64],
            ],
            x,
        )
    }

    /// JSON descriptor {"k": int, "gen": [[int]]}.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"k\":{},\"gen\":[[{},{}],[{},{}]]}}",
            self.order, self.gen[0][0], self.gen[0][1], self.gen[1][0], self.gen[1][1]
        )
    }

    /// The action on the dual side: "gy" abusively means (gᵀ)⁻¹y.
    pub fn apply_dual(&self, power: usize, y: [f64; 2]) -> [f64; 2] {
        let m = inverse(transpose(self.mat(power)));
        apply_f64(
            &[
                [m[0][0] as f64, m[0][1] as f64],
                [m[1][0] as f64, m[1][1] as f64],
            ],
            y,
        )
    }
}

/// β on the torus model: (β_g a)_m = a_{gᵀ m}, equivalently
/// β_g U_m = U_{(gᵀ)⁻¹ m}. Satisfies β_g α_x = α_{ρ_g x} β_g exactly on
/// coefficients.
pub fn beta(action: &CyclicAction, power: usize, a: &TorusElement) -> TorusElement {
    assert_eq!(a.dim(), 2, "the SL₂ actions live on the 2-torus model");
    beta_matrix(action.mat(power), a)
}

/// β for an arbitrary integer matrix of determinant ±1; the det = −1
/// case demonstrates the sharpness of the ×_J compatibility.
pub fn beta_matrix(g: IntMat2, a: &TorusElement) -> TorusElement {
    let gt_inv = inverse(transpose(g));
    let moved: Vec<(Vec<i64>, Complex64)> = a
        .support()
        .map(|(m, c)| {
            let v = apply(gt_inv, [m[0], m[1]]);
            (vec![v[0], v[1]], *c)
        })
        .collect();
    TorusElement::from_coeffs(2, &moved)
}

/// β_g(a ×_J b) − β_g(a) ×_J β_g(b): exactly zero for det(g) = 1, since
/// gJgᵀ = det(g)·J for antisymmetric 2×2 J and the integer phase layer
/// is preserved bitwise.
pub fn beta_respects_star(
    action: &CyclicAction,
    power: usize,
    a: &TorusElement,
    b: &TorusElement,
    j: &DeformationMatrix,
) -> TorusElement {
    let lhs = beta(action, power, &star_j(a, b, j).expect("dimensions agree"));
    let rhs =
        star_j(&beta(action, power, a), &beta(action, power, b), j).expect("dimensions agree");
    lhs.sub(&rhs)
}

/// Element of a crossed product A ⋊ ℤ_k: one coefficient-algebra value
/// per group element, indexed by generator power.
#[derive(Clone, Debug)]
pub struct CrossedElement<A> {
    order: usize,
    vals: Vec<A>,
}

impl<A: Algebra> CrossedElement<A> {
    pub fn new(order: usize, vals: Vec<A>) -> Self {
        assert_eq!(vals.len(), order, "carrier must be defined on all of G");
        CrossedElement { order, vals }
    }

    /// The element (a, g^power), zero elsewhere.
    pub fn single(order: usize, power: usize, a: A) -> Self {
        let zero = a.zero_like();
        let mut vals = vec![zero; order];
        vals[power % order] = a;
        CrossedElement { order, vals }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn val(&self, power: usize) -> &A {
        &self.vals[power % self.order]
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.order, rhs.order);
        CrossedElement {
            order: self.order,
            vals: self
                .vals
                .iter()
                .zip(&rhs.vals)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.order, rhs.order);
        CrossedElement {
            order: self.order,
            vals: self
                .vals
                .iter()
                .zip(&rhs.vals)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        CrossedElement {
            order: self.order,
            vals: self.vals.iter().map(|a| a.scale(z)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.vals.iter().map(A::norm).fold(0.0, f64::max)
    }
}

/// (a,g)·(a′,g′) = (a·g(a′), gg′), extended bilinearly; the action is
/// supplied as a closure power ↦ automorphism.
pub fn crossed_mul<A: Algebra>(
    x: &CrossedElement<A>,
    y: &CrossedElement<A>,
    act: impl Fn(usize, &A) -> A,
) -> Result<CrossedElement<A>, GroupError> {
    if x.order != y.order {
        return Err(GroupError::GroupMismatch(x.order, y.order));
    }
    let k = x.order;
    let zero = x.vals[0].zero_like();
    let mut vals = vec![zero; k];
    for g in 0..k {
        for h in 0..k {
            let term = x.vals[g].mul(&act(g, &y.vals[h]));
            vals[(g + h) % k] = vals[(g + h) % k].add(&term);
        }
    }
    Ok(CrossedElement { order: k, vals })
}

/// Seminorm of the smooth crossed product:
/// ‖Σ (a_g, g)‖ = C · Σ_g ‖g⁻¹(a_g)‖, with the coefficient seminorm
/// supplied as a closure.
pub fn crossed_seminorm<A: Algebra>(
    x: &CrossedElement<A>,
    scale: f64,
    act: impl Fn(usize, &A) -> A,
    coeff_norm: impl Fn(&A) -> f64,
) -> f64 {
    let k = x.order;
    let terms: Vec<f64> = (0..k)
        .map(|g| coeff_norm(&act((k - g) % k, &x.vals[g])))
        .collect();
    scale * pairwise_sum_f64(&terms)
}

/// The twisted-group-algebra 2-cocycle on ℤ²:
/// ω_θ(x, y) = e(θ(x₂y₁ − x₁y₂)). With θ = J₁₂ this is exactly the ×_J
/// phase on basis modes.
pub fn cocycle_omega(theta: f64, x: [i64; 2], y: [i64; 2]) -> Complex64 {
    e2pi(theta * (x[1] * y[0] - x[0] * y[1]) as f64)
}

/// Virtual character of ℤ_k: integer multiplicities indexed by the k
/// characters χ_j(g^a) = e(ja/k).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RGClass {
    order: usize,
    mults: Vec<i64>,
}

impl RGClass {
    pub fn zero(order: usize) -> Self {
        RGClass {
            order,
            mults: vec![0; order],
        }
    }

    pub fn from_mults(mults: Vec<i64>) -> Self {
        RGClass {
            order: mults.len(),
            mults,
        }
    }

    pub fn character(order: usize, j: usize) -> Self {
        let mut mults = vec![0; order];
        mults[j % order] = 1;
        RGClass { order, mults }
    }

    pub fn regular(order: usize) -> Self {
        RGClass {
            order,
            mults: vec![1; order],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mults(&self) -> &[i64] {
        &self.mults
    }

    pub fn dim(&self) -> i64 {
        self.mults.iter().sum()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.order, rhs.order);
        RGClass {
            order: self.order,
            mults: self
                .mults
                .iter()
                .zip(&rhs.mults)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.order, rhs.order);
        RGClass {
            order: self.order,
            mults: self
                .mults
                .iter()
                .zip(&rhs.mults)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Tensor product: cyclic convolution of multiplicities, since
    /// characters multiply as χ_i χ_j = χ_{i+j}.
    pub fn tensor(&self, rhs: &Self) -> Self {
        assert_eq!(self.order, rhs.order);
        let k = self.order;
        let mut mults = vec![0; k];
        for i in 0..k {
            for j in 0..k {
                mults[(i + j) % k] += self.mults[i] * rhs.mults[j];
            }
        }
        RGClass { order: k, mults }
    }

    /// JSON form: the multiplicity vector with the character-table
    /// header (χ_j(g^a) = e(ja/k)).
    pub fn to_json(&self) -> String {
        let header: Vec<String> = (0..self.order).map(|j| format!("\"chi_{j}\"")).collect();
        let mults: Vec<String> = self.mults.iter().map(|m| m.to_string()).collect();
        format!(
            "{{\"k\":{},\"header\":[{}],\"mults\":[{}]}}",
            self.order,
            header.join(","),
            mults.join(",")
        )
    }

    /// Character value at g^power.
    pub fn character_at(&self, power: usize) -> Complex64 {
        let k = self.order;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &m) in self.mults.iter().enumerate() {
            acc += e2pi((j * power) as f64 / k as f64) * m as f64;
        }
        acc
    }
}

/// A ℤ_k-graded space: basis ordered by character, with mults[j]
/// coordinates transforming by χ_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedGSpace {
    order: usize,
    mults: Vec<usize>,
}

impl GradedGSpace {
    pub fn new(order: usize, mults: Vec<usize>) -> Self {
        assert_eq!(mults.len(), order);
        GradedGSpace { order, mults }
    }

    pub fn dim(&self) -> usize {
        self.mults.iter().sum()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    /// The diagonal representation matrix of g^power.
    pub fn rep_matrix(&self, power: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        let mut at = 0;
        for (j, &mult) in self.mults.iter().enumerate() {
            let z = e2pi((j * power) as f64 / self.order as f64);
            for _ in 0..mult {
                m.set(at, at, z);
                at += 1;
            }
        }
        m
    }
}

/// G-index of an equivariant matrix: [ker T] − [coker T] ∈ R(G), with
/// character multiplicities extracted by character averaging over the
/// numerically computed kernels of T*T and TT*.
pub fn g_index(
    t: &CMatrix,
    dom: &GradedGSpace,
    cod: &GradedGSpace,
    tol: f64,
) -> Result<RGClass, GroupError> {
    assert_eq!(dom.order(), cod.order());
    let k = dom.order();
    assert_eq!(t.rows(), cod.dim());
    assert_eq!(t.cols(), dom.dim());
    // equivariance on the generator suffices for a cyclic group
    let defect = cod
        .rep_matrix(1)
        .mul(t)
        .sub(&t.mul(&dom.rep_matrix(1)))
        .max_abs();
    if defect > tol {
        return Err(GroupError::NotEquivariant(defect));
    }
    let scale = t.max_abs().max(1.0) * t.rows().max(t.cols()) as f64;
    let kernel_class = |h: &CMatrix, space: &GradedGSpace| -> Result<RGClass, GroupError> {
        let (vals, vecs) = hermitian_eig(h);
        // exact zeros of T*T land at rounding scale ε‖T‖²; a relative
        // threshold separates them from honest singular values
        let cutoff = (scale * scale * 1e-10).max(1e-18);
        let kernel_cols: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i].abs() <= cutoff)
            .collect();
        let mut mults = vec![0i64; k];
        for (j, slot) in mults.iter_mut().enumerate() {
            // multiplicity of χ_j = Σ_v ⟨v, P_j v⟩ over kernel vectors,
            // with P_j = (1/k) Σ_a conj(χ_j(a)) ρ(a)
            let mut acc = Complex64::new(0.0, 0.0);
            for &col in &kernel_cols {
                let v = vecs.column(col);
                for a in 0..k {
                    let rho = space.rep_matrix(a);
                    let mut rv = vec![Complex64::new(0.0, 0.0); v.len()];
                    for (r, item) in rv.iter_mut().enumerate() {
                        for c in 0..v.len() {
                            *item += rho.get(r, c) * v[c];
                        }
                    }
                    let inner: Complex64 = v.iter().zip(&rv).map(|(x, y)| x.conj() * y).sum();
                    acc += e2pi(-((j * a) as f64) / k as f64) * inner / k as f64;
                }
            }
            let rounded = acc.re.round();
            if (acc.re - rounded).abs() > 1e-6 || acc.im.abs() > 1e-6 {
                return Err(GroupError::NonIntegralMultiplicity(
                    (acc.re - rounded).abs().max(acc.im.abs()),
                ));
            }
            *slot = rounded as i64;
        }
        Ok(RGClass::from_mults(mults))
    };
    let ker = kernel_class(&t.adjoint().mul(t), dom)?;
    let coker = kernel_class(&t.mul(&t.adjoint()), cod)?;
    Ok(ker.sub(&coker))
}

/// The stabilization morphism Φ_V: A⋊G → M_l(A⋊G) induced by a
/// representation ρ of G on ℂ^l, at matrix coefficients: the value over
/// g becomes ρ(g) ⊗ x(g), with G acting trivially on the new matrix leg.
/// An algebra homomorphism; l = 1 trivial ρ is the identity embedding.
pub fn rho_stabilization(
    rep: &[CMatrix],
    x: &CrossedElement<CMatrix>,
) -> Result<CrossedElement<CMatrix>, GroupError> {
    let k = x.order();
    if rep.len() != k {
        return Err(GroupError::GroupMismatch(rep.len(), k));
    }
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            let defect = rep[a].mul(&rep[b]).sub(&rep[(a + b) % k]).max_abs();
            worst = worst.max(defect);
        }
    }
    if worst > 1e-9 {
        return Err(GroupError::NotARepresentation(worst));
    }
    let vals: Vec<CMatrix> = (0..k).map(|g| rep[g].kron(x.val(g))).collect();
    Ok(CrossedElement::new(k, vals))
}

/// Orthonormal bases (V, W) with V spanning ker J and W its orthogonal
/// complement; J restricted to W is invertible. The kernel of an
/// invariant form is invariant, so the splitting commutes with any
/// J-preserving group action.
pub fn split_degenerate(j: &DeformationMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = j.dim();
    // JᵀJ = −J² is symmetric PSD; its null eigenvectors span ker J
    let mut h = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += j.entry(m, r) * j.entry(m, c);
            }
            h.set(r, c, Complex64::new(acc, 0.0));
        }
    }
    let (vals, vecs) = hermitian_eig(&h);
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-30);
    let mut v_basis = Vec::new();
    let mut w_basis = Vec::new();
    for i in 0..n {
        let col: Vec<f64> = vecs.column(i).iter().map(|z| z.re).collect();
        if vals[i].abs() <= 1e-12 * scale {
            v_basis.push(col);
        } else {
            w_basis.push(col);
        }
    }
    (v_basis, w_basis)
}
