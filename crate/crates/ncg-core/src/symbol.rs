//! Pseudodifferential symbol calculus for ℝⁿ-actions at grid scale: the
//! normalizing function χ, the order-zero dual-Dirac symbol Σ(ξ) =
//! 1 ⊗ χ(c(ξ)), the multiplier action D_ρ on 𝒮(ℝⁿ, A), the commutator
//! and defect kernels, G-invariance checks, and the composition/adjoint
//! asymptotic expansions.
//!
//! The Fourier transform of Σ is never materialized as a bare
//! distribution: every use goes through the ε-regularized sum with
//! Richardson extrapolation, with a radial C^∞ taper so that box corners
//! do not break rotation invariance.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::clifford::{
    chi_of_clifford, chi_scalar, clifford_vector, ChiProfile, CliffordElement, CliffordError,
};
use crate::crossed::{CoeffAction, RnCrossedElement};
use crate::grid::{
    decay_order, fourier, Algebra, DecayReport, FourierSign, GridError, GridFunction, GridSpec,
};
use crate::group::CyclicAction;
use crate::torus::{self, trace, TorusElement};
use crate::util::{e2pi, factorial, multi_indices, pairwise_sum_f64, Rng64};

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("clifford error: {0}")]
    Clifford(#[from] CliffordError),
    #[error("grid error: {0}")]
    Grid(#[from] GridError),
    #[error("normalizing-function positivity fails at λ = {0}: χ = {1:.3e}")]
    NotPositive(f64, f64),
    #[error("normalizing-function limit check fails: χ({0}) = {1:.6}")]
    BadLimit(f64, f64),
    #[error("support radius must be positive, got {0}")]
    BadSupport(f64),
    #[error("symbol dimension {0} does not match grid dimension {1}")]
    DimensionMismatch(usize, usize),
}

/// Default support radius of χ̂. The weighted tail bound
/// (1+λ)⁶|χ²−1| ≤ 10 on [5, 50] forces a wide transform support for the
/// bump profile; see the constructor checks.
pub const DEFAULT_SIGMA: f64 = 16.0;

fn bump_profile(sigma: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    move |s: f64| {
        let u = s / sigma;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp() / std::f64::consts::PI
        }
    }
}

/// A normalizing function: odd, χ(λ) → ±1 at ±∞, with χ̂ compactly
/// supported and s·χ̂(s) = −i·g(s) smooth. The profile g is the standard
/// bump scaled to [−σ, σ] with g(0) = 1/π.
#[derive(Clone)]
pub struct NormalizingFunction {
    sigma: f64,
    nodes_per_unit: usize,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl NormalizingFunction {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn profile(&self, s: f64) -> f64 {
        (self.g)(s)
    }

    pub fn chi_data(&self) -> ChiProfile<'_> {
        ChiProfile {
            g: self.g.as_ref(),
            sigma: self.sigma,
            nodes_per_unit: self.nodes_per_unit,
        }
    }

    /// χ(λ) by quadrature; odd in λ bitwise.
    pub fn chi(&self, lambda: f64) -> f64 {
        chi_scalar(&self.chi_data(), lambda)
    }

    /// χ′(λ) = ∫ g(s) cos(λs) ds.
    pub fn chi_prime(&self, lambda: f64) -> f64 {
        let data = self.chi_data();
        let m = ((2.0 * self.sigma * self.nodes_per_unit as f64).ceil() as usize).max(16);
        let h = 2.0 * self.sigma / m as f64;
        let terms: Vec<f64> = (0..m)
            .map(|j| {
                let s = -self.sigma + (j as f64 + 0.5) * h;
                (data.g)(s) * (lambda * s).cos() * h
            })
            .collect();
        pairwise_sum_f64(&terms)
    }
}

/// Construct and validate a normalizing function with the bump profile.
/// The invariants (oddness, positivity on (0, Λ], the ±1 limits, and the
/// Dirichlet normalization πg(0) = 1) are runtime checks, not
/// assumptions.
pub fn build_chi(sigma: f64) -> Result<NormalizingFunction, SymbolError> {
    build_chi_with_profile(Arc::new(bump_profile(sigma)), sigma)
}

/// Low-level constructor accepting an arbitrary even profile supported
/// in [−σ, σ]; exists so that the validation path itself is testable.
pub fn build_chi_with_profile(
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    sigma: f64,
) -> Result<NormalizingFunction, SymbolError> {
    if !(sigma > 0.0) {
        return Err(SymbolError::BadSupport(sigma));
    }
    let chi = NormalizingFunction {
        sigma,
        nodes_per_unit: 128,
        g,
    };
    // Dirichlet limit: χ(∞) = π g(0) must be 1
    let limit = std::f64::consts::PI * chi.profile(0.0);
    if (limit - 1.0).abs() > 1e-10 {
        return Err(SymbolError::BadLimit(f64::INFINITY, limit));
    }
    // positivity on (0, Λ_test]
    const LAMBDA_TEST: f64 = 50.0;
    let mut lambda = 0.05;
    while lambda <= LAMBDA_TEST {
        let v = chi.chi(lambda);
        if v <= 0.0 {
            return Err(SymbolError::NotPositive(lambda, v));
        }
        lambda += 0.05;
    }
    // approach to 1
    let tail = chi.chi(LAMBDA_TEST);
    if (tail - 1.0).abs() > 1e-3 {
        return Err(SymbolError::BadLimit(LAMBDA_TEST, tail));
    }
    Ok(chi)
}

/// Value in B = A ⊗ ℂ_n in canonical blade-indexed form: one torus
/// coefficient per Clifford basis blade, so linear combinations cancel
/// exactly and norms are honest.
#[derive(Clone, Debug)]
pub struct TensorValue {
    cliff_rank: usize,
    torus_dim: usize,
    comps: Vec<TorusElement>,
}

impl TensorValue {
    pub fn zero(cliff_rank: usize, torus_dim: usize) -> Self {
        TensorValue {
            cliff_rank,
            torus_dim,
            comps: vec![TorusElement::zero(torus_dim); 1 << cliff_rank],
        }
    }

    /// c ⊗ t expanded over blades.
    pub fn elementary(cliff: CliffordElement, torus: TorusElement) -> Self {
        let rank = cliff.rank();
        let comps = (0..(1usize << rank))
            .map(|blade| torus.scale(cliff.coeff(blade)))
            .collect();
        TensorValue {
            cliff_rank: rank,
            torus_dim: torus.dim(),
            comps,
        }
    }

    pub fn component(&self, blade: usize) -> &TorusElement {
        &self.comps[blade]
    }
}

impl Algebra for TensorValue {
    fn zero_like(&self) -> Self {
        TensorValue::zero(self.cliff_rank, self.torus_dim)
    }
    fn add(&self, rhs: &Self) -> Self {
        TensorValue {
            cliff_rank: self.cliff_rank,
            torus_dim: self.torus_dim,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        TensorValue {
            cliff_rank: self.cliff_rank,
            torus_dim: self.torus_dim,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        let mut out = self.zero_like();
        for (sa, ta) in self.comps.iter().enumerate() {
            if ta.support_len() == 0 {
                continue;
            }
            for (sb, tb) in rhs.comps.iter().enumerate() {
                if tb.support_len() == 0 {
                    continue;
                }
                let sign = crate::clifford::blade_sign(sa, sb);
                let prod = torus::mul(ta, tb)
                    .expect("equal dims")
                    .scale(Complex64::new(sign, 0.0));
                out.comps[sa ^ sb] = out.comps[sa ^ sb].add(&prod);
            }
        }
        out
    }
    fn scale(&self, z: Complex64) -> Self {
        TensorValue {
            cliff_rank: self.cliff_rank,
            torus_dim: self.torus_dim,
            comps: self.comps.iter().map(|t| t.scale(z)).collect(),
        }
    }
    /// ℓ¹ over blades of the torus coefficient norm.
    fn norm(&self) -> f64 {
        pairwise_sum_f64(&self.comps.iter().map(Algebra::norm).collect::<Vec<_>>())
    }
    fn is_finite(&self) -> bool {
        self.comps.iter().all(Algebra::is_finite)
    }
}

/// Order-m symbol: ξ ↦ coefficient-algebra value with its nominal order.
#[derive(Clone)]
pub struct Symbol<A: Algebra> {
    pub order: f64,
    pub dim: usize,
    eval: Arc<dyn Fn(&[f64]) -> A + Send + Sync>,
}

impl<A: Algebra> Symbol<A> {
    pub fn new(order: f64, dim: usize, eval: impl Fn(&[f64]) -> A + Send + Sync + 'static) -> Self {
        Symbol {
            order,
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> A {
        (self.eval)(xi)
    }

    /// Iterated central difference ∂^k of the symbol at ξ.
    pub fn partial(&self, xi: &[f64], k: &[usize], step: f64) -> A {
        fn rec<A: Algebra>(
            eval: &dyn Fn(&[f64]) -> A,
            xi: &[f64],
            k: &[usize],
            axis: usize,
            step: f64,
        ) -> A {
            if axis >= k.len() {
                return eval(xi);
            }
            if k[axis] == 0 {
                return rec(eval, xi, k, axis + 1, step);
            }
            let mut reduced = k.to_vec();
            reduced[axis] -= 1;
            let mut hi = xi.to_vec();
            hi[axis] += step;
            let mut lo = xi.to_vec();
            lo[axis] -= step;
            let a = rec(eval, &hi, &reduced, axis, step);
            let b = rec(eval, &lo, &reduced, axis, step);
            a.sub(&b).scale(Complex64::new(1.0 / (2.0 * step), 0.0))
        }
        rec(self.eval.as_ref(), xi, k, 0, step)
    }

    /// Verify the order-m seminorm condition
    /// sup (1+|ξ|)^{|j|−m} ‖∂ʲρ(ξ)‖ < ∞ on sample shells; returns the
    /// largest weighted value seen per multi-index order.
    pub fn seminorm_estimates(
        &self,
        j_max: usize,
        shells: &[f64],
        samples_per_shell: usize,
        fd_step: f64,
    ) -> Vec<f64> {
        let mut rng = Rng64::new(414);
        let mut worst = vec![0.0f64; j_max + 1];
        for j in multi_indices(self.dim, j_max) {
            let total: usize = j.iter().sum();
            for &r in shells {
                for _ in 0..samples_per_shell {
                    let dir: Vec<f64> = (0..self.dim).map(|_| rng.symmetric(1.0)).collect();
                    let norm = pairwise_sum_f64(&dir.iter().map(|v| v * v).collect::<Vec<_>>())
                        .sqrt()
                        .max(1e-12);
                    let xi: Vec<f64> = dir.iter().map(|v| v / norm * r).collect();
                    let d = self.partial(&xi, &j, fd_step);
                    let w = (1.0 + r).powi(total as i32 - self.order as i32);
                    worst[total] = worst[total].max(w * d.norm());
                }
            }
        }
        worst
    }

    /// Homogeneous-principal-part check along rays: λ^{−m} ρ(λ ξ̂) must be
    /// Cauchy along λ ∈ {4, 8, 16} for each of `rays` directions.
    pub fn principal_part_cauchy(&self, rays: usize, tol: f64) -> bool {
        let lambdas = [4.0, 8.0, 16.0];
        for ray in 0..rays {
            let angle = std::f64::consts::TAU * ray as f64 / rays as f64;
            let dir: Vec<f64> = if self.dim == 1 {
                vec![if ray % 2 == 0 { 1.0 } else { -1.0 }]
            } else {
                let mut d = vec![0.0; self.dim];
                d[0] = angle.cos();
                d[1] = angle.sin();
                d
            };
            let vals: Vec<A> = lambdas
                .iter()
                .map(|&l| {
                    let xi: Vec<f64> = dir.iter().map(|v| v * l).collect();
                    self.eval(&xi)
                        .scale(Complex64::new(l.powf(-self.order), 0.0))
                })
                .collect();
            let d1 = vals[1].sub(&vals[0]).norm();
            let d2 = vals[2].sub(&vals[1]).norm();
            if d2 > d1.max(tol) || d2 > tol {
                return false;
            }
        }
        true
    }
}

/// The dual-Dirac symbol Σ(ξ) = 1 ⊗ χ(c(ξ)): an order-zero symbol with
/// values in ℂ_n, independent of the algebra leg. Evaluated by the
/// direct χ̂-quadrature.
pub fn sigma_symbol(chi: &NormalizingFunction, dim: usize) -> Symbol<CliffordElement> {
    let chi = chi.clone();
    Symbol::new(0.0, dim, move |xi: &[f64]| {
        chi_of_clifford(&chi.chi_data(), xi).expect("resolved quadrature")
    })
}

/// Per-radius memo for χ(r)/r over a grid: the profile is radial, so a
/// grid sweep only needs one quadrature per distinct radius. Exact (no
/// interpolation), keyed on the bit pattern of r².
struct RadialRatioCache<'a> {
    chi: &'a NormalizingFunction,
    memo: std::collections::HashMap<u64, f64>,
}

impl<'a> RadialRatioCache<'a> {
    fn new(chi: &'a NormalizingFunction) -> Self {
        RadialRatioCache {
            chi,
            memo: std::collections::HashMap::new(),
        }
    }

    /// χ(|ξ|)/|ξ|, with the removable singularity χ′(0) at the origin.
    fn ratio(&mut self, r_sq: f64) -> f64 {
        let key = r_sq.to_bits();
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let r = r_sq.sqrt();
        let v = if r < 1e-9 {
            self.chi.chi_prime(0.0)
        } else {
            self.chi.chi(r) / r
        };
        self.memo.insert(key, v);
        v
    }
}

/// Σ sampled over a grid through the spectral identity
/// χ(c(ξ)) = χ(|ξ|)·c(ξ)/|ξ| (validated against the direct quadrature in
/// the clifford tests); one χ evaluation per distinct radius.
pub fn sigma_values_on(chi: &NormalizingFunction, spec: &GridSpec) -> Vec<CliffordElement> {
    let mut cache = RadialRatioCache::new(chi);
    (0..spec.total_points())
        .map(|flat| {
            let xi = spec.coord_flat(flat);
            let r_sq = pairwise_sum_f64(&xi.iter().map(|v| v * v).collect::<Vec<_>>());
            let ratio = cache.ratio(r_sq);
            clifford_vector(spec.dim(), &xi)
                .expect("dims")
                .scale(Complex64::new(ratio, 0.0))
        })
        .collect()
}

fn h1(y: f64) -> f64 {
    // h′(y) = (y cos y − sin y)/y²
    if y.abs() < 1e-3 {
        let y2 = y * y;
        -y / 3.0 + y * y2 / 30.0 - y * y2 * y2 / 840.0
    } else {
        (y * y.cos() - y.sin()) / (y * y)
    }
}

fn h2(y: f64) -> f64 {
    // h″(y) = (sin(y)(2−y²) − 2y cos(y))/y³
    if y.abs() < 1e-3 {
        let y2 = y * y;
        -1.0 / 3.0 + y2 / 10.0 - y2 * y2 / 168.0
    } else {
        ((2.0 - y * y) * y.sin() - 2.0 * y * y.cos()) / (y * y * y)
    }
}

/// ∂Σ/∂ξ_j by differentiation under the χ̂-integral with the wave-
/// operator closed form:
/// ∂_j Σ(ξ) = ∫ g(s) [ c^j h(s|ξ|) + c(ξ) h′(s|ξ|) s ξ_j/|ξ| ] ds.
pub fn dsigma_value(chi: &NormalizingFunction, xi: &[f64], axis: usize) -> CliffordElement {
    let dim = xi.len();
    let r = pairwise_sum_f64(&xi.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
    let data = chi.chi_data();
    let m = ((2.0 * chi.sigma * chi.nodes_per_unit as f64).ceil() as usize).max(16);
    let h = 2.0 * chi.sigma / m as f64;
    let cj = CliffordElement::generator(dim, axis + 1);
    let cxi = clifford_vector(dim, xi).expect("dimensions agree");
    let mut acc = CliffordElement::zero(dim);
    for node in 0..m {
        let s = -chi.sigma + (node as f64 + 0.5) * h;
        let g = (data.g)(s);
        if g == 0.0 {
            continue;
        }
        let y = s * r;
        let hval = crate::clifford::h_sinc(y);
        let term1 = cj.scale(Complex64::new(g * hval * h, 0.0));
        let ang = if r > 1e-12 {
            h1(y) * s * xi[axis] / r
        } else {
            0.0
        };
        let term2 = cxi.scale(Complex64::new(g * ang * h, 0.0));
        acc = acc.add(&term1).add(&term2);
    }
    acc
}

/// Both decay measurements for ∂Σ/∂ξ_j at n = 2: along the matching
/// coordinate ray (the content that survives at n ≥ 2) and over full
/// radial shells (which sees the angular O(1/|ξ|) part of an order-zero
/// symbol's derivative).
#[derive(Clone, Debug)]
pub struct DerivativeDecay {
    pub along_axis: DecayReport,
    pub radial: DecayReport,
}

pub fn symbol_derivative_decay(
    chi: &NormalizingFunction,
    dim: usize,
    axis: usize,
    window: (f64, f64),
    ray_step: f64,
    radial_spec: &GridSpec,
) -> Result<DerivativeDecay, SymbolError> {
    // 1-d ray along the matching axis
    let ray_len = window.1 + 2.0;
    let ray_axis = crate::grid::Axis::new(ray_len, ray_step)?;
    let ray_spec = GridSpec::from_axes(vec![ray_axis])?;
    let ray = GridFunction::sample(&ray_spec, |t| {
        let mut xi = vec![0.0; dim];
        xi[axis] = t[0];
        Complex64::new(dsigma_value(chi, &xi, axis).norm(), 0.0)
    });
    let along_axis = decay_order(&ray, window, 6)?;
    // full radial shells
    let full = GridFunction::sample(radial_spec, |xi| dsigma_value(chi, xi, axis));
    let radial = decay_order(&full, window, 6)?;
    Ok(DerivativeDecay { along_axis, radial })
}

/// ∂ᴶH for |J| ≤ 2 with H(s, ξ) = h(s|ξ|).
fn partial_h(s: f64, xi: &[f64], j: &[usize]) -> f64 {
    let r = pairwise_sum_f64(&xi.iter().map(|v| v * v).collect::<Vec<_>>())
        .sqrt()
        .max(1e-300);
    let y = s * r;
    let total: usize = j.iter().sum();
    match total {
        0 => crate::clifford::h_sinc(y),
        1 => {
            let axis = j.iter().position(|&v| v > 0).unwrap();
            h1(y) * s * xi[axis] / r
        }
        2 => {
            if let Some(axis) = j.iter().position(|&v| v == 2) {
                let u = xi[axis] / r;
                h2(y) * s * s * u * u + h1(y) * s * (1.0 / r - xi[axis] * xi[axis] / (r * r * r))
            } else {
                let mut axes = j
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == 1)
                    .map(|(a, _)| a);
                let (a, b) = (axes.next().unwrap(), axes.next().unwrap());
                h2(y) * s * s * xi[a] * xi[b] / (r * r) - h1(y) * s * xi[a] * xi[b] / (r * r * r)
            }
        }
        _ => panic!("∂ᴶH implemented for |J| ≤ 2"),
    }
}

/// One cell of the weighted-moment sweep:
/// B(l, J; r) = r^l · |∫ g(s) ∂ᴶH(s, r·ξ̂) ds| on a fixed generic ray.
/// Bounded in r exactly when l ≤ |J| + 1; the growth exponent is
/// l − |J| − 1 otherwise.
pub fn h_moment_weighted(chi: &NormalizingFunction, l: usize, j: &[usize], r: f64) -> f64 {
    let dim = j.len();
    let dir: Vec<f64> = if dim == 1 {
        vec![1.0]
    } else {
        let mut d = vec![0.0; dim];
        d[0] = 0.7648421872844885f64.cos();
        d[1] = 0.7648421872844885f64.sin();
        d
    };
    let xi: Vec<f64> = dir.iter().map(|v| v * r).collect();
    let data = chi.chi_data();
    let m = ((2.0 * chi.sigma * chi.nodes_per_unit as f64).ceil() as usize).max(16);
    let h = 2.0 * chi.sigma / m as f64;
    let terms: Vec<f64> = (0..m)
        .map(|node| {
            let s = -chi.sigma + (node as f64 + 0.5) * h;
            (data.g)(s) * partial_h(s, &xi, j) * h
        })
        .collect();
    r.powi(l as i32) * pairwise_sum_f64(&terms).abs()
}

/// The regularized transform Σ̂ on a primal grid: per regularizer
/// strength, Σ(ξ)·e^{−πε|ξ|²}·(radial taper) is transformed exactly on
/// the dual pair, then the tableau is extrapolated to ε = 0 pointwise.
pub fn sigma_hat_grid(
    chi: &NormalizingFunction,
    primal: &GridSpec,
    epsilons: &[f64],
    taper_start: f64,
) -> Result<GridFunction<CliffordElement>, SymbolError> {
    let dual = primal.dual();
    let sigma_vals = sigma_values_on(chi, &dual);
    let min_l = dual
        .axes()
        .iter()
        .map(|a| a.half_width)
        .fold(f64::INFINITY, f64::min);
    let transforms: Vec<GridFunction<CliffordElement>> = epsilons
        .iter()
        .map(|&eps| {
            let damped: Vec<CliffordElement> = sigma_vals
                .iter()
                .enumerate()
                .map(|(flat, v)| {
                    let xi = dual.coord_flat(flat);
                    let r2 = pairwise_sum_f64(&xi.iter().map(|v| v * v).collect::<Vec<_>>());
                    let w = smooth_radial_window(r2.sqrt() / min_l, taper_start);
                    v.scale(Complex64::new(
                        (-std::f64::consts::PI * eps * r2).exp() * w,
                        0.0,
                    ))
                })
                .collect();
            let g = GridFunction::from_values(dual.clone(), damped).expect("same grid");
            fourier(&g, FourierSign::Minus)
        })
        .collect();
    // pointwise Neville extrapolation to ε = 0
    let total = primal.total_points();
    let order = epsilons.len() - 1;
    let values: Vec<CliffordElement> = (0..total)
        .map(|flat| {
            let pts: Vec<(f64, CliffordElement)> = epsilons
                .iter()
                .zip(&transforms)
                .map(|(&e, t)| (e, t.values()[flat].clone()))
                .collect();
            neville_zero(&pts, order)
        })
        .collect();
    Ok(GridFunction::from_values(primal.clone(), values)?)
}

fn smooth_radial_window(u: f64, start: f64) -> f64 {
    let t = (u - start) / (1.0 - start);
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        b / (a + b)
    }
}

fn neville_zero<A: Algebra>(points: &[(f64, A)], order: usize) -> A {
    let m = points.len();
    let order = order.min(m - 1);
    let mut rows: Vec<Vec<A>> = vec![points.iter().map(|(_, v)| v.clone()).collect()];
    for k in 1..=order {
        let prev = &rows[k - 1];
        let mut row = Vec::with_capacity(m - k);
        for i in k..m {
            let e_hi = points[i - k].0;
            let e_lo = points[i].0;
            let denom = e_hi - e_lo;
            row.push(
                prev[i - k + 1]
                    .scale(Complex64::new(e_hi / denom, 0.0))
                    .sub(&prev[i - k].scale(Complex64::new(e_lo / denom, 0.0))),
            );
        }
        rows.push(row);
    }
    rows[order].last().unwrap().clone()
}

/// Evaluate the regularized Σ̂ at one (possibly off-grid) point by the
/// tapered, damped direct sum over the dual grid.
pub fn sigma_hat_at(
    dual: &GridSpec,
    sigma_vals: &[CliffordElement],
    x: &[f64],
    epsilons: &[f64],
    taper_start: f64,
) -> CliffordElement {
    let min_l = dual
        .axes()
        .iter()
        .map(|a| a.half_width)
        .fold(f64::INFINITY, f64::min);
    let vol = dual.cell_volume();
    let pts: Vec<(f64, CliffordElement)> = epsilons
        .iter()
        .map(|&eps| {
            let mut acc = sigma_vals[0].zero_like();
            for (flat, v) in sigma_vals.iter().enumerate() {
                let xi = dual.coord_flat(flat);
                let r2 = pairwise_sum_f64(&xi.iter().map(|v| v * v).collect::<Vec<_>>());
                let w = smooth_radial_window(r2.sqrt() / min_l, taper_start);
                if w == 0.0 {
                    continue;
                }
                let dot =
                    pairwise_sum_f64(&x.iter().zip(&xi).map(|(a, b)| a * b).collect::<Vec<_>>());
                acc = acc.add(
                    &v.scale(e2pi(-dot) * ((-std::f64::consts::PI * eps * r2).exp() * w * vol)),
                );
            }
            (eps, acc)
        })
        .collect();
    neville_zero(&pts, epsilons.len() - 1)
}

/// D_ρ(u)(t) = ∫∫ α_{−t}(ρ(ξ)) u(s) e(−⟨t−s, ξ⟩) ds dξ, computed as the
/// exact dual-pair transform: D_ρ(u)(t) = hⁿ Σ_ξ α_{−t}(ρ(ξ)) ǔ(ξ) e(−⟨t,ξ⟩).
pub fn apply_d<A: Algebra, Act: CoeffAction<A>>(
    rho: &Symbol<A>,
    u: &RnCrossedElement<A, Act>,
) -> Result<RnCrossedElement<A, Act>, SymbolError> {
    let spec = u.data.spec().clone();
    if rho.dim != spec.dim() {
        return Err(SymbolError::DimensionMismatch(rho.dim, spec.dim()));
    }
    let u_check = fourier(&u.data, FourierSign::Plus);
    let dual = u_check.spec().clone();
    let vol = dual.cell_volume();
    let rho_vals: Vec<A> = (0..dual.total_points())
        .map(|flat| rho.eval(&dual.coord_flat(flat)))
        .collect();
    let values: Vec<A> = (0..spec.total_points())
        .map(|t_flat| {
            let t = spec.coord_flat(t_flat);
            let minus_t: Vec<f64> = t.iter().map(|v| -v).collect();
            let mut acc = u.data.values()[0].zero_like();
            for xi_flat in 0..dual.total_points() {
                let xi = dual.coord_flat(xi_flat);
                let dot =
                    pairwise_sum_f64(&t.iter().zip(&xi).map(|(a, b)| a * b).collect::<Vec<_>>());
                let moved = u.action.act(&minus_t, &rho_vals[xi_flat]);
                acc = acc.add(
                    &moved
                        .mul(&u_check.values()[xi_flat])
                        .scale(e2pi(-dot) * vol),
                );
            }
            acc
        })
        .collect();
    Ok(RnCrossedElement {
        data: GridFunction::from_values(spec, values)?,
        action: u.action.clone(),
    })
}

/// The commutator kernel x ↦ Σ̂(x) ⊗ (α_x(a) − a) on a primal grid, with
/// Σ̂ evaluated through the regularized transform. Identically zero for
/// α-invariant a; its decay order certifies that [a, D] lives in the
/// Schwartz crossed product.
pub fn dirac_commutator_kernel(
    a: &TorusElement,
    chi: &NormalizingFunction,
    primal: &GridSpec,
    epsilons: &[f64],
) -> Result<GridFunction<TensorValue>, SymbolError> {
    let cliff_dim = primal.dim();
    let sigma_hat = sigma_hat_grid(chi, primal, epsilons, 0.5)?;
    let values: Vec<TensorValue> = (0..primal.total_points())
        .map(|flat| {
            let x = primal.coord_flat(flat);
            let moved = torus::alpha(&x, a).sub(a);
            if moved.support_len() == 0 {
                TensorValue::zero(cliff_dim, a.dim())
            } else {
                TensorValue::elementary(sigma_hat.values()[flat].clone(), moved)
            }
        })
        .collect();
    Ok(GridFunction::from_values(primal.clone(), values)?)
}

/// The defect kernel: the transform of ξ ↦ (1 − χ(|ξ|)²)·1 ⊗ a. The
/// scalar profile is genuinely Schwartz, so the kernel decay certifies
/// a(1 − D²) ∈ B ⋊ ℝⁿ.
pub fn dirac_defect_kernel(
    a: &TorusElement,
    chi: &NormalizingFunction,
    primal: &GridSpec,
) -> Result<GridFunction<TensorValue>, SymbolError> {
    let dual = primal.dual();
    let mut cache = RadialRatioCache::new(chi);
    let profile: Vec<Complex64> = (0..dual.total_points())
        .map(|flat| {
            let xi = dual.coord_flat(flat);
            let r_sq = pairwise_sum_f64(&xi.iter().map(|v| v * v).collect::<Vec<_>>());
            let c = cache.ratio(r_sq) * r_sq.sqrt();
            Complex64::new(1.0 - c * c, 0.0)
        })
        .collect();
    let scalar = GridFunction::from_values(dual, profile)?;
    let transformed = fourier(&scalar, FourierSign::Minus);
    let one = CliffordElement::one(primal.dim());
    let values: Vec<TensorValue> = transformed
        .values()
        .iter()
        .map(|z| TensorValue::elementary(one.scale(*z), a.clone()))
        .collect();
    Ok(GridFunction::from_values(primal.clone(), values)?)
}

/// The scalar defect profile 1 − χ(|ξ|)² sampled radially, for tail
/// certification.
pub fn defect_profile(chi: &NormalizingFunction, radii: &[f64]) -> Vec<f64> {
    radii
        .iter()
        .map(|&r| {
            let c = chi.chi(r);
            1.0 - c * c
        })
        .collect()
}

/// Defect report for the G-invariance of the dual-Dirac operator.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    /// max over samples and group elements of
    /// ‖β_g(Σ((g̃ᵀ)ξ)) − Σ(ξ)‖ with g̃ the orthogonalized generator power.
    pub symbol_defect: f64,
    /// max defect of Σ̂(g̃x) = g̃·Σ̂(x) on sample points.
    pub transform_defect: f64,
}

/// Verify the rotation invariance of Σ in the group-invariant metric and
/// the equivariance of the regularized transform.
pub fn check_d_invariance(
    chi: &NormalizingFunction,
    group: &CyclicAction,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport, SymbolError> {
    let mut rng = Rng64::new(seed);
    let mut symbol_defect = 0.0f64;
    let sample_points: Vec<[f64; 2]> = (0..samples)
        .map(|_| {
            let angle = rng.unit() * std::f64::consts::TAU;
            let radius = 0.3 + rng.unit() * 2.2;
            [radius * angle.cos(), radius * angle.sin()]
        })
        .collect();
    for power in group.elements() {
        let r = group.orthogonal_mat(power);
        let rt = [[r[0][0], r[1][0]], [r[0][1], r[1][1]]];
        let rows: Vec<Vec<f64>> = vec![vec![r[0][0], r[0][1]], vec![r[1][0], r[1][1]]];
        for xi in &sample_points {
            let rotated = [
                rt[0][0] * xi[0] + rt[0][1] * xi[1],
                rt[1][0] * xi[0] + rt[1][1] * xi[1],
            ];
            let sigma_rot = chi_of_clifford(&chi.chi_data(), &rotated)?;
            let pulled = sigma_rot.apply_orthogonal(&rows);
            let direct = chi_of_clifford(&chi.chi_data(), &xi[..])?;
            symbol_defect = symbol_defect.max(pulled.sub(&direct).norm());
        }
    }
    // transform equivariance on a smaller sample (each point costs a
    // full dual-grid sum per regularizer strength)
    let primal = GridSpec::uniform(2, 8.0, 0.25)?;
    let dual = primal.dual();
    let sigma_vals = sigma_values_on(chi, &dual);
    let epsilons = [0.2, 0.1, 0.05];
    let mut transform_defect = 0.0f64;
    for power in group.elements() {
        let r = group.orthogonal_mat(power);
        let rows: Vec<Vec<f64>> = vec![vec![r[0][0], r[0][1]], vec![r[1][0], r[1][1]]];
        for xi in sample_points.iter().take(samples.min(8)) {
            let x = [xi[0], xi[1]];
            let gx = [
                r[0][0] * x[0] + r[0][1] * x[1],
                r[1][0] * x[0] + r[1][1] * x[1],
            ];
            let lhs = sigma_hat_at(&dual, &sigma_vals, &gx, &epsilons, 0.5);
            let rhs = sigma_hat_at(&dual, &sigma_vals, &x, &epsilons, 0.5).apply_orthogonal(&rows);
            transform_defect = transform_defect.max(lhs.sub(&rhs).norm());
        }
    }
    Ok(InvarianceReport {
        symbol_defect,
        transform_defect,
    })
}

/// Coefficient algebras carrying the derivation δ_j (the generator of
/// the ℝⁿ-action) used by the asymptotic expansions.
pub trait CoeffDerive: Algebra {
    fn derive_axis(&self, axis: usize) -> Self;
}

impl CoeffDerive for TorusElement {
    fn derive_axis(&self, axis: usize) -> Self {
        torus::derivation(axis + 1, self).expect("axis in range")
    }
}

impl CoeffDerive for Complex64 {
    fn derive_axis(&self, _axis: usize) -> Self {
        Complex64::new(0.0, 0.0) // trivial action
    }
}

/// Coefficient algebras with an involution.
pub trait CoeffStar: Algebra {
    fn star(&self) -> Self;
}

impl CoeffStar for TorusElement {
    fn star(&self) -> Self {
        self.adjoint()
    }
}

impl CoeffStar for Complex64 {
    fn star(&self) -> Self {
        self.conj()
    }
}

impl CoeffStar for CliffordElement {
    fn star(&self) -> Self {
        self.adjoint()
    }
}

impl CoeffDerive for CliffordElement {
    fn derive_axis(&self, _axis: usize) -> Self {
        CliffordElement::zero(self.rank()) // the action is trivial on ℂ_n
    }
}

fn iterate_derive<A: CoeffDerive>(v: &A, k: &[usize]) -> A {
    let mut out = v.clone();
    for (axis, &count) in k.iter().enumerate() {
        for _ in 0..count {
            out = out.derive_axis(axis);
        }
    }
    out
}

/// Expansion coefficient 1/(k!·(2πi)^{|k|}), the form consistent with
/// the e(s) = exp(2πis) transform convention and δ_j = −2πi m_j.
fn expansion_coeff(k: &[usize]) -> Complex64 {
    let total: usize = k.iter().sum();
    let kfact: f64 = k.iter().map(|&v| factorial(v)).product();
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
    two_pi_i.powi(-(total as i32)) / kfact
}

/// Truncated composition expansion
/// ρ(ξ) = Σ_{|k| ≤ N} (k!)⁻¹ (2πi)^{−|k|} ρ₁^{(k)}(ξ) δᵏ(ρ₂(ξ)),
/// the symbol of D_{ρ₁} D_{ρ₂} modulo order m₁ + m₂ − N − 1.
pub fn symbol_compose<A: CoeffDerive + 'static>(
    rho1: &Symbol<A>,
    rho2: &Symbol<A>,
    truncation: usize,
    fd_step: f64,
) -> Symbol<A> {
    assert!(truncation <= 3, "expansions are used at N ≤ 3");
    assert_eq!(rho1.dim, rho2.dim);
    let r1 = rho1.clone();
    let r2 = rho2.clone();
    let dim = rho1.dim;
    Symbol::new(rho1.order + rho2.order, dim, move |xi: &[f64]| {
        let mut acc: Option<A> = None;
        for k in multi_indices(dim, truncation) {
            let d1 = r1.partial(xi, &k, fd_step);
            let d2 = iterate_derive(&r2.eval(xi), &k);
            let term = d1.mul(&d2).scale(expansion_coeff(&k));
            acc = Some(match acc {
                None => term,
                Some(prev) => prev.add(&term),
            });
        }
        acc.expect("at least the k = 0 term")
    })
}

/// Truncated adjoint expansion
/// ρ′(ξ) = Σ_{|k| ≤ N} (k!)⁻¹ (2πi)^{−|k|} δᵏ((ρ^{(k)}(ξ))*),
/// the symbol of (D_ρ)* modulo the truncation order.
pub fn symbol_adjoint<A: CoeffDerive + CoeffStar + 'static>(
    rho: &Symbol<A>,
    truncation: usize,
    fd_step: f64,
) -> Symbol<A> {
    assert!(truncation <= 3, "expansions are used at N ≤ 3");
    let r = rho.clone();
    let dim = rho.dim;
    Symbol::new(rho.order, dim, move |xi: &[f64]| {
        let mut acc: Option<A> = None;
        for k in multi_indices(dim, truncation) {
            let term =
                iterate_derive(&r.partial(xi, &k, fd_step).star(), &k).scale(expansion_coeff(&k));
            acc = Some(match acc {
                None => term,
                Some(prev) => prev.add(&term),
            });
        }
        acc.expect("at least the k = 0 term")
    })
}

/// Grid ℓ² pairing ⟨u, v⟩ = hⁿ Σ_t τ(u(t)* v(t)) for torus-valued data.
pub fn torus_pairing<Act: CoeffAction<TorusElement>>(
    u: &RnCrossedElement<TorusElement, Act>,
    v: &RnCrossedElement<TorusElement, Act>,
) -> Complex64 {
    let spec = u.data.spec();
    let vol = spec.cell_volume();
    let terms: Vec<Complex64> = u
        .data
        .values()
        .iter()
        .zip(v.data.values())
        .map(|(a, b)| trace(&torus::mul(&a.adjoint(), b).expect("dims")) * vol)
        .collect();
    crate::util::pairwise_sum_c64(&terms)
}
