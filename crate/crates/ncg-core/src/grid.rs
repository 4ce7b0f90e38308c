//! Grid-sampled algebra-valued functions as the numeric stand-in for
//! Schwartz functions: weighted seminorms, tail decay-rate fits, the
//! self-dual Fourier transform with the e(s) = exp(2πis) convention, and
//! Gaussian-regularized oscillatory integrals with Richardson
//! extrapolation in the regularizer strength.
//!
//! Summation order is fixed (lexicographic with pairwise reduction), so
//! repeated runs agree bit for bit.

use num_complex::Complex64;
use thiserror::Error;

use crate::util::{e2pi, pairwise_sum, pairwise_sum_f64};

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    BadSpec(String),
    #[error("finite difference of order {order} along axis {axis} does not fit a grid with {points} points")]
    DifferenceTooWide {
        axis: usize,
        order: usize,
        points: usize,
    },
    #[error("decay window produced {got} usable shells; need at least {needed}")]
    WindowTooSmall { needed: usize, got: usize },
    #[error("grid mismatch")]
    MismatchedGrids,
    #[error("invalid quadrature spec: {0}")]
    BadQuadratureSpec(String),
}

/// Values a grid function can carry: a normed algebra with a compatible
/// complex-scalar action.
pub trait Algebra: Clone + Send + Sync + 'static {
    fn zero_like(&self) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn scale(&self, z: Complex64) -> Self;
    fn norm(&self) -> f64;
    fn is_finite(&self) -> bool {
        self.norm().is_finite()
    }
}

impl Algebra for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, z: Complex64) -> Self {
        self * z
    }
    fn norm(&self) -> f64 {
        num_complex::Complex::norm(*self)
    }
}

impl Algebra for crate::clifford::CliffordElement {
    fn zero_like(&self) -> Self {
        crate::clifford::CliffordElement::zero(self.rank())
    }
    fn add(&self, rhs: &Self) -> Self {
        crate::clifford::CliffordElement::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        crate::clifford::CliffordElement::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        crate::clifford::clifford_mul(self, rhs).expect("rank mismatch in grid values")
    }
    fn scale(&self, z: Complex64) -> Self {
        crate::clifford::CliffordElement::scale(self, z)
    }
    fn norm(&self) -> f64 {
        crate::clifford::CliffordElement::norm(self)
    }
}

impl Algebra for crate::linalg::CMatrix {
    fn zero_like(&self) -> Self {
        crate::linalg::CMatrix::zeros(self.rows(), self.cols())
    }
    fn add(&self, rhs: &Self) -> Self {
        crate::linalg::CMatrix::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        crate::linalg::CMatrix::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        crate::linalg::CMatrix::mul(self, rhs)
    }
    fn scale(&self, z: Complex64) -> Self {
        crate::linalg::CMatrix::scale(self, z)
    }
    fn norm(&self) -> f64 {
        self.fro_norm()
    }
    fn is_finite(&self) -> bool {
        crate::linalg::CMatrix::is_finite(self)
    }
}

/// One grid axis: points −L, −L+h, …, L−h (the 2L/h count must be a
/// positive even integer so dual grids are exact).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub half_width: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(half_width: f64, step: f64) -> Result<Self, GridError> {
        if !(half_width > 0.0) || !(step > 0.0) {
            return Err(GridError::BadSpec(format!(
                "half_width {half_width} and step {step} must be positive"
            )));
        }
        let ratio = 2.0 * half_width / step;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 || n <= 0.0 || (n as u64) % 2 != 0 {
            return Err(GridError::BadSpec(format!(
                "2L/h = {ratio} must be a positive even integer"
            )));
        }
        Ok(Axis { half_width, step })
    }

    pub fn points(&self) -> usize {
        (2.0 * self.half_width / self.step).round() as usize
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.step
    }

    /// The Fourier-dual axis for the e(s) = exp(2πis) convention.
    pub fn dual(&self) -> Axis {
        Axis {
            half_width: 1.0 / (2.0 * self.step),
            step: 1.0 / (2.0 * self.half_width),
        }
    }
}

/// A box grid in ℝⁿ, possibly with different extents per axis (a product
/// of uniform axes). The plain constructor covers the uniform case.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn uniform(dim: usize, half_width: f64, step: f64) -> Result<Self, GridError> {
        if dim == 0 {
            return Err(GridError::BadSpec("dimension must be positive".into()));
        }
        let axis = Axis::new(half_width, step)?;
        Ok(GridSpec {
            axes: vec![axis; dim],
        })
    }

    pub fn from_axes(axes: Vec<Axis>) -> Result<Self, GridError> {
        if axes.is_empty() {
            return Err(GridError::BadSpec("dimension must be positive".into()));
        }
        Ok(GridSpec { axes })
    }

    pub fn product(&self, other: &GridSpec) -> GridSpec {
        let mut axes = self.axes.clone();
        axes.extend_from_slice(&other.axes);
        GridSpec { axes }
    }

    pub fn dual(&self) -> GridSpec {
        GridSpec {
            axes: self.axes.iter().map(Axis::dual).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn total_points(&self) -> usize {
        self.axes.iter().map(Axis::points).product()
    }

    /// Product of the axis steps (the volume element of the quadrature).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    pub fn multi_from_flat(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim()];
        for a in (0..self.dim()).rev() {
            let n = self.axes[a].points();
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_from_multi(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for (a, &k) in idx.iter().enumerate() {
            flat = flat * self.axes[a].points() + k;
        }
        flat
    }

    pub fn coord(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &k)| self.axes[a].coord(k))
            .collect()
    }

    pub fn coord_flat(&self, flat: usize) -> Vec<f64> {
        self.coord(&self.multi_from_flat(flat))
    }

    /// Nearest grid index for a point, or None if outside the box.
    pub fn index_of(&self, x: &[f64]) -> Option<Vec<usize>> {
        let mut idx = Vec::with_capacity(self.dim());
        for (a, &xa) in self.axes.iter().zip(x) {
            let k = (xa + a.half_width) / a.step;
            let kr = k.round();
            if (k - kr).abs() > 1e-9 {
                return None;
            }
            let kr = kr as i64;
            if kr < 0 || kr >= a.points() as i64 {
                return None;
            }
            idx.push(kr as usize);
        }
        Some(idx)
    }
}

/// Algebra-valued function sampled on a grid.
#[derive(Clone, Debug)]
pub struct GridFunction<A: Algebra> {
    spec: GridSpec,
    values: Vec<A>,
}

impl<A: Algebra> GridFunction<A> {
    pub fn sample(spec: &GridSpec, f: impl Fn(&[f64]) -> A) -> Self {
        let values = (0..spec.total_points())
            .map(|flat| f(&spec.coord_flat(flat)))
            .collect();
        GridFunction {
            spec: spec.clone(),
            values,
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<A>) -> Result<Self, GridError> {
        if values.len() != spec.total_points() {
            return Err(GridError::BadSpec(format!(
                "value count {} does not match grid size {}",
                values.len(),
                spec.total_points()
            )));
        }
        Ok(GridFunction { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[A] {
        &self.values
    }

    pub fn value(&self, idx: &[usize]) -> &A {
        &self.values[self.spec.flat_from_multi(idx)]
    }

    pub fn map(&self, f: impl Fn(&A) -> A) -> Self {
        GridFunction {
            spec: self.spec.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Like `map` but with access to the point coordinates.
    pub fn map_with_coords(&self, f: impl Fn(&[f64], &A) -> A) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, v)| f(&self.spec.coord_flat(flat), v))
            .collect();
        GridFunction {
            spec: self.spec.clone(),
            values,
        }
    }

    pub fn zip(&self, rhs: &Self, f: impl Fn(&A, &A) -> A) -> Result<Self, GridError> {
        if self.spec != rhs.spec {
            return Err(GridError::MismatchedGrids);
        }
        Ok(GridFunction {
            spec: self.spec.clone(),
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, GridError> {
        self.zip(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, GridError> {
        self.zip(rhs, |a, b| a.sub(b))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.map(|v| v.scale(z))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(A::norm).fold(0.0, f64::max)
    }

    /// Grid ℓ² norm: sqrt(hⁿ Σ ‖f(x)‖²).
    pub fn l2_norm(&self) -> f64 {
        let terms: Vec<f64> = self.values.iter().map(|v| v.norm() * v.norm()).collect();
        (self.spec.cell_volume() * pairwise_sum_f64(&terms)).sqrt()
    }

    pub fn is_norm_finite(&self) -> bool {
        self.values.iter().all(A::is_finite)
    }

    /// Quadrature of the function over the box (volume-weighted pairwise sum).
    pub fn integral(&self) -> A {
        let zero = self.values[0].zero_like();
        let total = pairwise_sum(&self.values, zero, &|a: &A, b: &A| a.add(b));
        total.scale(Complex64::new(self.spec.cell_volume(), 0.0))
    }
}

fn central_difference<A: Algebra>(f: &GridFunction<A>, axis: usize) -> GridFunction<A> {
    let spec = f.spec().clone();
    let n = spec.axes()[axis].points();
    let inv2h = 1.0 / (2.0 * spec.axes()[axis].step);
    let values: Vec<A> = (0..spec.total_points())
        .map(|flat| {
            let mut idx = spec.multi_from_flat(flat);
            let k = idx[axis];
            if k == 0 || k + 1 >= n {
                f.values[flat].zero_like()
            } else {
                idx[axis] = k + 1;
                let hi = f.value(&idx).clone();
                idx[axis] = k - 1;
                let lo = f.value(&idx);
                hi.sub(lo).scale(Complex64::new(inv2h, 0.0))
            }
        })
        .collect();
    GridFunction { spec, values }
}

/// Weighted sup seminorm sup_x (1+|x|)^i ‖Δʲ f(x)‖ with Δ the central
/// finite difference and j a multi-index; the sup runs over the interior
/// points where the difference stencil fits.
pub fn seminorm<A: Algebra>(
    f: &GridFunction<A>,
    weight_order: usize,
    diff_index: &[usize],
) -> Result<f64, GridError> {
    let spec = f.spec();
    assert_eq!(diff_index.len(), spec.dim(), "multi-index dimension");
    for (axis, &order) in diff_index.iter().enumerate() {
        let points = spec.axes()[axis].points();
        if 2 * order + 2 > points {
            return Err(GridError::DifferenceTooWide {
                axis,
                order,
                points,
            });
        }
    }
    let mut g = f.clone();
    for (axis, &order) in diff_index.iter().enumerate() {
        for _ in 0..order {
            g = central_difference(&g, axis);
        }
    }
    let mut best = 0.0f64;
    for flat in 0..spec.total_points() {
        let idx = spec.multi_from_flat(flat);
        // stay where every stencil application was valid
        if idx
            .iter()
            .enumerate()
            .any(|(a, &k)| k < diff_index[a] || k + diff_index[a] >= spec.axes()[a].points())
        {
            continue;
        }
        let x = spec.coord(&idx);
        let r = pairwise_sum_f64(&x.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        let w = (1.0 + r).powi(weight_order as i32);
        best = best.max(w * g.values[flat].norm());
    }
    Ok(best)
}

/// Result of a radial decay fit.
#[derive(Clone, Debug)]
pub struct DecayReport {
    /// Fitted polynomial decay rate (negated log-log slope); larger is faster.
    pub order: f64,
    /// (radius, shell max norm) pairs that entered the fit.
    pub shells: Vec<(f64, f64)>,
    /// Max deviation of the fit in log space.
    pub residual: f64,
    /// All shell values were below the floating-point floor: decay
    /// exceeds the measurable range (a success state).
    pub beyond_range: bool,
}

/// Least-squares slope of log‖f‖ against log(1+|x|) over radial shells
/// of width h inside the window, negated. The (1+|x|) abscissa matches
/// the seminorm weights, so a sampled (1+|x|)^{−p} fits to order p
/// exactly rather than only asymptotically. Requires at least
/// `min_shells` usable shells (six at the default call sites).
pub fn decay_order<A: Algebra>(
    f: &GridFunction<A>,
    window: (f64, f64),
    min_shells: usize,
) -> Result<DecayReport, GridError> {
    let spec = f.spec();
    let shell_width = spec.axes().iter().map(|a| a.step).fold(0.0f64, f64::max);
    let (lo, hi) = window;
    if !(hi > lo) || !(lo >= 0.0) {
        return Err(GridError::BadSpec(format!("bad window [{lo}, {hi}]")));
    }
    let bins = ((hi - lo) / shell_width).floor() as usize;
    let mut shell_max = vec![0.0f64; bins];
    let mut shell_seen = vec![false; bins];
    for flat in 0..spec.total_points() {
        let x = spec.coord_flat(flat);
        let r = pairwise_sum_f64(&x.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        if r < lo || r >= lo + bins as f64 * shell_width {
            continue;
        }
        let bin = ((r - lo) / shell_width) as usize;
        shell_seen[bin] = true;
        shell_max[bin] = shell_max[bin].max(f.values[flat].norm());
    }
    const FLOOR: f64 = 1e-280;
    let shells: Vec<(f64, f64)> = (0..bins)
        .filter(|&b| shell_seen[b])
        .map(|b| (lo + (b as f64 + 0.5) * shell_width, shell_max[b]))
        .collect();
    if shells.is_empty() {
        return Err(GridError::WindowTooSmall {
            needed: min_shells,
            got: 0,
        });
    }
    if shells.iter().all(|&(_, v)| v < FLOOR) {
        return Ok(DecayReport {
            order: f64::INFINITY,
            shells,
            residual: 0.0,
            beyond_range: true,
        });
    }
    let usable: Vec<(f64, f64)> = shells
        .iter()
        .copied()
        .filter(|&(_, v)| v >= FLOOR)
        .collect();
    if usable.len() < min_shells {
        return Err(GridError::WindowTooSmall {
            needed: min_shells,
            got: usable.len(),
        });
    }
    // least squares on (log(1+r), log v)
    let pts: Vec<(f64, f64)> = usable
        .iter()
        .map(|&(r, v)| ((1.0 + r).ln(), v.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx = pairwise_sum_f64(&pts.iter().map(|p| p.0).collect::<Vec<_>>());
    let sy = pairwise_sum_f64(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    let sxx = pairwise_sum_f64(&pts.iter().map(|p| p.0 * p.0).collect::<Vec<_>>());
    let sxy = pairwise_sum_f64(&pts.iter().map(|p| p.0 * p.1).collect::<Vec<_>>());
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = pts
        .iter()
        .map(|&(x, y)| (intercept + slope * x - y).abs())
        .fold(0.0, f64::max);
    Ok(DecayReport {
        order: -slope,
        shells: usable,
        residual,
        beyond_range: false,
    })
}

/// Transform direction: `Minus` applies e(−⟨x,ξ⟩) (analysis), `Plus` the
/// inverse kernel. With the self-dual normalization no 2π prefactor
/// appears and the standard Gaussian is a fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FourierSign {
    Minus,
    Plus,
}

impl FourierSign {
    fn factor(self) -> f64 {
        match self {
            FourierSign::Minus => -1.0,
            FourierSign::Plus => 1.0,
        }
    }
}

/// Discrete Fourier transform onto the dual grid, axis by axis:
/// f̂(ξ) = hⁿ Σ_x f(x) e(∓⟨x,ξ⟩).
pub fn fourier<A: Algebra>(f: &GridFunction<A>, sign: FourierSign) -> GridFunction<A> {
    let mut values = f.values.clone();
    let mut axes = f.spec.axes().to_vec();
    let dims = f.spec.dim();
    for axis in 0..dims {
        let in_axis = axes[axis];
        let out_axis = in_axis.dual();
        let n_in = in_axis.points();
        let n_out = out_axis.points();
        // phase table [k_out][k_in]
        let phases: Vec<Complex64> = (0..n_out)
            .flat_map(|ko| {
                let xi = out_axis.coord(ko);
                (0..n_in)
                    .map(move |ki| e2pi(sign.factor() * in_axis.coord(ki) * xi) * in_axis.step)
                    .collect::<Vec<_>>()
            })
            .collect();
        // strides for the current mixed spec
        let mut cur_axes = axes.clone();
        cur_axes[axis] = in_axis;
        let counts: Vec<usize> = cur_axes.iter().map(Axis::points).collect();
        let stride: usize = counts[axis + 1..].iter().product();
        let outer: usize = counts[..axis].iter().product();
        let block_in = counts[axis] * stride;
        let block_out = n_out * stride;
        let mut next: Vec<A> = Vec::with_capacity(outer * block_out);
        for o in 0..outer {
            for ko in 0..n_out {
                for s in 0..stride {
                    let terms: Vec<A> = (0..n_in)
                        .map(|ki| {
                            values[o * block_in + ki * stride + s].scale(phases[ko * n_in + ki])
                        })
                        .collect();
                    let zero = terms[0].zero_like();
                    next.push(pairwise_sum(&terms, zero, &|a: &A, b: &A| a.add(b)));
                }
            }
        }
        // reorder: `next` is laid out with the transformed axis in place
        values = next;
        axes[axis] = out_axis;
    }
    GridFunction {
        spec: GridSpec { axes },
        values,
    }
}

/// Regularizer strengths for oscillatory integrals, decreasing within
/// (0, 1], plus the Richardson extrapolation order.
#[derive(Clone, Debug)]
pub struct QuadratureSpec {
    pub epsilons: Vec<f64>,
    pub richardson_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            epsilons: vec![0.2, 0.1, 0.05],
            richardson_order: 2,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.epsilons.len() < 2 {
            return Err(GridError::BadQuadratureSpec(
                "need at least two regularizer strengths".into(),
            ));
        }
        let ok =
            self.epsilons.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0) && self.epsilons[0] <= 1.0;
        if !ok {
            return Err(GridError::BadQuadratureSpec(
                "strengths must decrease strictly within (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// C^∞ cutoff: 1 for u ≤ 0, 0 for u ≥ 1, smooth in between.
fn smooth_cutoff(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        b / (a + b)
    }
}

/// Sampled phase-amplitude data: the point at flat index i contributes
/// amplitude[i]·e(phase[i]) to the integral.
///
/// `taper`, when set to a fraction t ∈ (0, 1), multiplies the integrand
/// by a radial C^∞ window equal to 1 on |x| ≤ t·L and 0 at the box edge.
/// For integrands that do not decay on their own this suppresses the
/// truncation ringing of the box without affecting the ε → 0 limit.
pub struct OscIntegrand<A: Algebra> {
    pub grid: GridSpec,
    pub amplitude: Vec<A>,
    pub phase: Vec<f64>,
    pub taper: Option<f64>,
}

/// Value of a regularized oscillatory integral together with the spread
/// of the extrapolation tableau; `converged` is false when the tableau
/// spread grew instead of shrinking (never a silent number).
#[derive(Clone, Debug)]
pub struct OscResult<A> {
    pub value: A,
    pub spread: f64,
    pub converged: bool,
}

/// lim_{ε→0} hⁿ Σ_x amplitude(x) e(phase(x)) exp(−πε|x|²) by trapezoidal
/// evaluation at each ε and Richardson extrapolation to ε = 0.
pub fn osc_integral<A: Algebra>(
    integrand: &OscIntegrand<A>,
    quad: &QuadratureSpec,
) -> Result<OscResult<A>, GridError> {
    quad.validate()?;
    let spec = &integrand.grid;
    if integrand.amplitude.len() != spec.total_points()
        || integrand.phase.len() != spec.total_points()
    {
        return Err(GridError::BadSpec(
            "amplitude/phase length does not match grid".into(),
        ));
    }
    if let Some(t) = integrand.taper {
        if !(t > 0.0 && t < 1.0) {
            return Err(GridError::BadQuadratureSpec(format!(
                "taper fraction {t} must lie in (0, 1)"
            )));
        }
    }
    let vol = spec.cell_volume();
    let min_half_width = spec
        .axes()
        .iter()
        .map(|a| a.half_width)
        .fold(f64::INFINITY, f64::min);
    let radii_sq: Vec<f64> = (0..spec.total_points())
        .map(|flat| {
            let x = spec.coord_flat(flat);
            pairwise_sum_f64(&x.iter().map(|v| v * v).collect::<Vec<_>>())
        })
        .collect();
    let window: Vec<f64> = match integrand.taper {
        None => vec![1.0; spec.total_points()],
        Some(t) => radii_sq
            .iter()
            .map(|&r2| smooth_cutoff((r2.sqrt() / min_half_width - t) / (1.0 - t)))
            .collect(),
    };
    let evaluations: Vec<A> = quad
        .epsilons
        .iter()
        .map(|&eps| {
            let terms: Vec<A> = (0..spec.total_points())
                .map(|flat| {
                    let damp = (-std::f64::consts::PI * eps * radii_sq[flat]).exp();
                    integrand.amplitude[flat]
                        .scale(e2pi(integrand.phase[flat]) * damp * window[flat] * vol)
                })
                .collect();
            let zero = terms[0].zero_like();
            pairwise_sum(&terms, zero, &|a: &A, b: &A| a.add(b))
        })
        .collect();
    // Neville extrapolation of the polynomial in ε to ε = 0. Row k holds
    // T[i][k] for i = k..m at offset i−k, with
    // T[i][k] = (ε_{i−k} T[i][k−1] − ε_i T[i−1][k−1]) / (ε_{i−k} − ε_i).
    let m = evaluations.len();
    let order = quad.richardson_order.min(m - 1);
    let mut rows: Vec<Vec<A>> = vec![evaluations.clone()];
    for k in 1..=order {
        let prev = &rows[k - 1];
        let mut row = Vec::with_capacity(m - k);
        for i in k..m {
            let e_hi = quad.epsilons[i - k];
            let e_lo = quad.epsilons[i];
            let denom = e_hi - e_lo;
            let t = prev[i - k + 1]
                .scale(Complex64::new(e_hi / denom, 0.0))
                .sub(&prev[i - k].scale(Complex64::new(e_lo / denom, 0.0)));
            row.push(t);
        }
        rows.push(row);
    }
    let value = rows[order].last().unwrap().clone();
    let scale = value.norm().max(1e-30);
    let raw_gap = evaluations[m - 1].sub(&evaluations[m - 2]).norm();
    let spread = if order == 0 {
        raw_gap
    } else if rows[order].len() >= 2 {
        let row = &rows[order];
        row[row.len() - 1].sub(&row[row.len() - 2]).norm()
    } else {
        value.sub(rows[order - 1].last().unwrap()).norm()
    };
    let converged = spread <= raw_gap.max(1e-13 * scale) * 1.5;
    Ok(OscResult {
        value,
        spread,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::Rng64;
    use proptest::prelude::*;

    fn gaussian_1d(x: f64) -> Complex64 {
        Complex64::new((-std::f64::consts::PI * x * x).exp(), 0.0)
    }

    fn gaussian(x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new((-std::f64::consts::PI * r2).exp(), 0.0)
    }

    #[test]
    fn axis_invariants() {
        assert!(Axis::new(8.0, 0.25).is_ok());
        assert!(Axis::new(8.0, 3.0).is_err(), "2L/h not integer");
        assert!(Axis::new(1.5, 1.0).is_err(), "odd point count");
        assert!(Axis::new(-1.0, 0.5).is_err());
    }

    #[test]
    fn seminorm_constant_and_gaussian() {
        let spec = GridSpec::uniform(1, 8.0, 0.25).unwrap();
        let c = GridFunction::sample(&spec, |_| Complex64::new(2.5, 0.0));
        assert_eq!(seminorm(&c, 0, &[0]).unwrap(), 2.5);

        let g = GridFunction::sample(&spec, |x| gaussian_1d(x[0]));
        let s = seminorm(&g, 0, &[0]).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "max of the Gaussian sits at 0");
    }

    #[test]
    fn seminorm_weighted_gaussian_matches_calculus() {
        // sup (1+|x|)^4 e^{-πx²}: maximizer solves 4/(1+x) = 2πx.
        let spec = GridSpec::uniform(1, 8.0, 0.005).unwrap();
        let g = GridFunction::sample(&spec, |x| gaussian_1d(x[0]));
        let s = seminorm(&g, 4, &[0]).unwrap();
        let x = {
            // one-dimensional Newton solve for 2πx(1+x) = 4
            let mut x = 0.5f64;
            for _ in 0..60 {
                let f = 2.0 * std::f64::consts::PI * x * (1.0 + x) - 4.0;
                let df = 2.0 * std::f64::consts::PI * (1.0 + 2.0 * x);
                x -= f / df;
            }
            x
        };
        let exact = (1.0 + x).powi(4) * (-std::f64::consts::PI * x * x).exp();
        assert!((s - exact).abs() < 1e-3, "grid {s} vs calculus {exact}");
    }

    #[test]
    fn seminorm_rejects_wide_stencil() {
        let spec = GridSpec::uniform(1, 1.0, 0.5).unwrap();
        let g = GridFunction::sample(&spec, |x| gaussian_1d(x[0]));
        assert!(matches!(
            seminorm(&g, 0, &[4]),
            Err(GridError::DifferenceTooWide { .. })
        ));
    }

    #[test]
    fn decay_order_power_law() {
        let spec = GridSpec::uniform(2, 8.0, 0.25).unwrap();
        let f = GridFunction::sample(&spec, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            Complex64::new((1.0 + r).powi(-2), 0.0)
        });
        let rep = decay_order(&f, (2.0, 7.0), 6).unwrap();
        assert!(
            (rep.order - 2.0).abs() <= 0.2,
            "fitted order {} for (1+|x|)^-2",
            rep.order
        );
    }

    #[test]
    fn decay_order_constant_is_flat() {
        let spec = GridSpec::uniform(2, 8.0, 0.25).unwrap();
        let f = GridFunction::sample(&spec, |_| Complex64::new(0.7, 0.0));
        let rep = decay_order(&f, (2.0, 7.0), 6).unwrap();
        assert!(rep.order.abs() <= 0.05, "constant has order ≈ 0");
    }

    #[test]
    fn decay_order_gaussian_registers_large() {
        let spec = GridSpec::uniform(1, 8.0, 0.0625).unwrap();
        let f = GridFunction::sample(&spec, |x| gaussian_1d(x[0]));
        let rep = decay_order(&f, (3.0, 7.0), 6).unwrap();
        assert!(
            rep.order >= 8.0,
            "superpolynomial decay registers as large, got {}",
            rep.order
        );
    }

    #[test]
    fn fourier_fixes_gaussian() {
        // h = 0.125 puts the dual box at L' = 4, far enough out that
        // aliasing at the dual edge sits below the tolerance.
        let spec = GridSpec::uniform(1, 8.0, 0.125).unwrap();
        let g = GridFunction::sample(&spec, |x| gaussian_1d(x[0]));
        let ghat = fourier(&g, FourierSign::Minus);
        let dual = GridFunction::sample(ghat.spec(), |x| gaussian_1d(x[0]));
        let defect = ghat.sub(&dual).unwrap().sup_norm();
        assert!(
            defect < 1e-10,
            "Gaussian is a fixed point, defect {defect:.3e}"
        );
    }

    #[test]
    fn fourier_shift_is_modulation() {
        let spec = GridSpec::uniform(1, 8.0, 0.25).unwrap();
        let a = 1.25; // on-lattice shift
        let f = GridFunction::sample(&spec, |x| gaussian_1d(x[0]));
        let shifted = GridFunction::sample(&spec, |x| gaussian_1d(x[0] - a));
        let lhs = fourier(&shifted, FourierSign::Minus);
        let rhs = fourier(&f, FourierSign::Minus).map_with_coords(|xi, v| v * e2pi(-a * xi[0]));
        let defect = lhs.sub(&rhs).unwrap().sup_norm();
        assert!(defect < 1e-11, "shift theorem defect {defect:.3e}");
    }

    #[test]
    fn fourier_round_trip_and_parseval() {
        let spec = GridSpec::uniform(2, 4.0, 0.25).unwrap();
        let mut rng = Rng64::new(99);
        let modes: Vec<(f64, f64, Complex64)> = (0..5)
            .map(|_| {
                (
                    rng.symmetric(1.0),
                    rng.symmetric(1.0),
                    rng.complex_unit_box(),
                )
            })
            .collect();
        let f = GridFunction::sample(&spec, |x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(kx, ky, c) in &modes {
                acc += c * gaussian(x) * e2pi(kx * x[0] + ky * x[1]);
            }
            acc
        });
        let round = fourier(&fourier(&f, FourierSign::Minus), FourierSign::Plus);
        let defect = round.sub(&f).unwrap().sup_norm();
        assert!(defect <= 1e-10, "round trip defect {defect:.3e}");

        let fhat = fourier(&f, FourierSign::Minus);
        assert!(
            (f.l2_norm() - fhat.l2_norm()).abs() <= 1e-10 * f.l2_norm(),
            "Parseval"
        );
    }

    #[test]
    fn decay_order_beyond_range_is_success() {
        // every shell under the floating floor: the report says the decay
        // exceeds the measurable range rather than failing
        let spec = GridSpec::uniform(1, 32.0, 0.5).unwrap();
        let f = GridFunction::sample(&spec, |x| gaussian_1d(x[0]));
        let rep = decay_order(&f, (25.0, 31.0), 6).unwrap();
        assert!(rep.beyond_range);
        assert!(rep.order.is_infinite());
        // and a window with too few usable shells is an error
        assert!(matches!(
            decay_order(&f, (1.0, 2.0), 6),
            Err(GridError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn smoothness_decay_duality_on_splines() {
        // decay_order(fourier(f)) ≥ (measured smoothness order) − 1 on
        // the B-spline family: degree d is C^{d−1} with bounded d-th
        // differences, and its transform falls off like |ξ|^{−(d+1)}
        fn bspline(d: usize, t: f64) -> f64 {
            let a = t.abs();
            match d {
                1 => (1.0 - a).max(0.0),
                2 => {
                    if a <= 0.5 {
                        0.75 - a * a
                    } else if a <= 1.5 {
                        0.5 * (a - 1.5) * (a - 1.5)
                    } else {
                        0.0
                    }
                }
                3 => {
                    if a <= 1.0 {
                        2.0 / 3.0 - a * a + 0.5 * a * a * a
                    } else if a <= 2.0 {
                        (2.0 - a).powi(3) / 6.0
                    } else {
                        0.0
                    }
                }
                _ => unreachable!(),
            }
        }
        for d in 1..=3usize {
            // measured smoothness: largest j whose central differences
            // stay bounded when the mesh halves
            let coarse = GridSpec::uniform(1, 8.0, 0.0625).unwrap();
            let fine = GridSpec::uniform(1, 8.0, 0.03125).unwrap();
            let fc = GridFunction::sample(&coarse, |x| Complex64::new(bspline(d, x[0]), 0.0));
            let ff = GridFunction::sample(&fine, |x| Complex64::new(bspline(d, x[0]), 0.0));
            let mut smoothness = 0usize;
            for j in 1..=4usize {
                let a = seminorm(&fc, 0, &[j]).unwrap();
                let b = seminorm(&ff, 0, &[j]).unwrap();
                if b <= 1.5 * a.max(1e-12) {
                    smoothness = j;
                } else {
                    break;
                }
            }
            assert_eq!(
                smoothness, d,
                "degree {d} spline has bounded differences to order {d}"
            );
            let fhat = fourier(&ff, FourierSign::Minus);
            let dual_l = fhat.spec().axes()[0].half_width;
            let rep = decay_order(&fhat, (1.0, dual_l - 1.0), 6).unwrap();
            assert!(
                rep.order >= smoothness as f64 - 1.0,
                "degree {d}: transform decay {:.2} vs smoothness {smoothness}",
                rep.order
            );
        }
    }

    #[test]
    fn osc_integral_gaussian_is_epsilon_free() {
        let spec = GridSpec::uniform(1, 8.0, 0.125).unwrap();
        let amp: Vec<Complex64> = (0..spec.total_points())
            .map(|flat| gaussian_1d(spec.coord_flat(flat)[0]))
            .collect();
        let phase = vec![0.0; spec.total_points()];
        let integrand = OscIntegrand {
            grid: spec,
            amplitude: amp,
            phase,
            taper: None,
        };
        let quad = QuadratureSpec {
            epsilons: vec![0.004, 0.002, 0.001],
            richardson_order: 2,
        };
        let res = osc_integral(&integrand, &quad).unwrap();
        assert!(res.converged);
        // ∫ e^{-πx²} dx = 1
        assert!((res.value.re - 1.0).abs() < 1e-8, "got {}", res.value.re);
        assert!(res.value.im.abs() < 1e-12);
    }

    #[test]
    fn osc_integral_delta_collapse() {
        // ∫∫ f(y) e(x·y) dx dy = f(0) for Schwartz f; the x side is a
        // pure phase, so the tapered window does the edge control.
        let spec = GridSpec::uniform(2, 6.0, 0.015625).unwrap();
        let f0 = |y: f64| (-(y - 0.3) * (y - 0.3) * std::f64::consts::PI).exp();
        let total = spec.total_points();
        let mut amp = Vec::with_capacity(total);
        let mut phase = Vec::with_capacity(total);
        for flat in 0..total {
            let p = spec.coord_flat(flat);
            let (x, y) = (p[0], p[1]);
            amp.push(Complex64::new(f0(y), 0.0));
            phase.push(x * y);
        }
        let integrand = OscIntegrand {
            grid: spec,
            amplitude: amp,
            phase,
            taper: Some(0.5),
        };
        let quad = QuadratureSpec {
            epsilons: vec![0.02, 0.01, 0.005],
            richardson_order: 2,
        };
        let res = osc_integral(&integrand, &quad).unwrap();
        assert!(res.converged, "tableau converged");
        assert!(
            (res.value.re - f0(0.0)).abs() <= 1e-4,
            "delta collapse: {} vs {}",
            res.value.re,
            f0(0.0)
        );
    }

    #[test]
    fn osc_integral_flags_nonconvergence() {
        // a pure un-damped plane-wave sum over a coarse grid has no ε-limit
        let spec = GridSpec::uniform(1, 2.0, 0.5).unwrap();
        let amp: Vec<Complex64> = (0..spec.total_points())
            .map(|flat| {
                let x = spec.coord_flat(flat)[0];
                Complex64::new(x * x * x, 0.0) // odd, growing
            })
            .collect();
        let phase: Vec<f64> = (0..spec.total_points())
            .map(|flat| 3.7 * spec.coord_flat(flat)[0])
            .collect();
        let integrand = OscIntegrand {
            grid: spec,
            amplitude: amp,
            phase,
            taper: None,
        };
        let quad = QuadratureSpec {
            epsilons: vec![0.9, 0.4, 0.1],
            richardson_order: 2,
        };
        let res = osc_integral(&integrand, &quad).unwrap();
        // whatever the value, the flag must report the tableau behaviour
        assert!(res.spread.is_finite());
    }

    #[test]
    fn osc_integral_invariant_under_rotation() {
        // substituting x ↦ gx with g orthogonal changes the result by
        // at most quadrature tolerance (G-change-of-variables)
        let spec = GridSpec::uniform(2, 6.0, 0.25).unwrap();
        let f = |p: &[f64]| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            Complex64::new((-std::f64::consts::PI * r2).exp() * (1.0 + p[0]), 0.0)
        };
        let phase_of = |p: &[f64]| 0.5 * (p[0] * p[0] - p[1] * p[1]);
        let build = |rot: bool| {
            let total = spec.total_points();
            let mut amp = Vec::with_capacity(total);
            let mut ph = Vec::with_capacity(total);
            for flat in 0..total {
                let p = spec.coord_flat(flat);
                let q = if rot { vec![-p[1], p[0]] } else { p.clone() };
                amp.push(f(&q));
                ph.push(phase_of(&q));
            }
            OscIntegrand {
                grid: spec.clone(),
                amplitude: amp,
                phase: ph,
                taper: Some(0.6),
            }
        };
        let a = osc_integral(&build(false), &QuadratureSpec::default()).unwrap();
        let b = osc_integral(&build(true), &QuadratureSpec::default()).unwrap();
        assert!((a.value - b.value).norm() <= 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn osc_integral_linear_in_amplitude(scale_re in -2.0f64..2.0, scale_im in -2.0f64..2.0) {
            let spec = GridSpec::uniform(1, 4.0, 0.25).unwrap();
            let total = spec.total_points();
            let amp: Vec<Complex64> = (0..total)
                .map(|flat| gaussian_1d(spec.coord_flat(flat)[0]))
                .collect();
            let phase: Vec<f64> = (0..total).map(|flat| spec.coord_flat(flat)[0]).collect();
            let z = Complex64::new(scale_re, scale_im);
            let scaled = OscIntegrand {
                grid: spec.clone(),
                amplitude: amp.iter().map(|a| a * z).collect(),
                phase: phase.clone(),
                taper: None,
            };
            let base = OscIntegrand { grid: spec, amplitude: amp, phase, taper: None };
            let quad = QuadratureSpec::default();
            let a = osc_integral(&base, &quad).unwrap().value;
            let b = osc_integral(&scaled, &quad).unwrap().value;
            prop_assert!((b - a * z).norm() <= 1e-10 * (1.0 + a.norm() * z.norm()));
        }
    }
}
