//! Grid model of the smooth crossed products 𝒮(ℝⁿ, A) ⋊ ℝⁿ: twisted
//! convolution, the dual ℝ_n-action, the translation action γ, the
//! Takesaki–Takai transform onto kernel data, the diagonal group action
//! on kernels, and the deformation-straightening transform Θ_J.
//!
//! Dual and primal copies of ℝⁿ are kept distinct: wherever a group
//! element meets a dual variable it acts through (gᵀ)⁻¹. Grids for the
//! dual leg must be the exact Fourier duals of the primal grids, which
//! also makes the lattice actions of −1 and the ℤ₄ rotation exact under
//! the periodic identification of ±L.

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{fourier, Algebra, DecayReport, FourierSign, GridError, GridFunction, GridSpec};
use crate::group::{beta, CyclicAction, IntMat2};
use crate::torus::{scaled_alpha, DeformationMatrix, TorusElement};
use crate::util::{e2pi, pairwise_sum_f64};

#[derive(Debug, Error, PartialEq)]
pub enum CrossedError {
    #[error("grid error: {0}")]
    Grid(#[from] GridError),
    #[error("elements live on different grids or carry different actions")]
    Mismatch,
    #[error("the dual leg must be the exact Fourier dual of the primal leg")]
    NotDualPair,
    #[error("kernel decay order {got:.2} below the required {want:.2} in variable group {group}")]
    NotSmoothing { group: usize, got: f64, want: f64 },
}

/// How ℝⁿ acts on the coefficient algebra.
pub trait CoeffAction<A: Algebra>: Clone + PartialEq + Send + Sync {
    fn act(&self, x: &[f64], v: &A) -> A;
}

/// The trivial action (any coefficient algebra).
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialAction;

impl<A: Algebra> CoeffAction<A> for TrivialAction {
    fn act(&self, _x: &[f64], v: &A) -> A {
        v.clone()
    }
}

/// The (scaled) translation action α^s on torus coefficients;
/// scale = 1 is α itself, scale = 0 the trivial action.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusTranslation {
    pub scale: f64,
}

impl CoeffAction<TorusElement> for TorusTranslation {
    fn act(&self, x: &[f64], v: &TorusElement) -> TorusElement {
        scaled_alpha(self.scale, x, v)
    }
}

/// Element of 𝒮(ℝⁿ, A) ⋊ ℝⁿ: grid data plus the action the convolution
/// twists by.
#[derive(Clone, Debug)]
pub struct RnCrossedElement<A: Algebra, Act: CoeffAction<A>> {
    pub data: GridFunction<A>,
    pub action: Act,
}

/// Report of mass lost to the box boundary by a shift; never silent.
#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub lost_fraction: f64,
}

impl<A: Algebra, Act: CoeffAction<A>> RnCrossedElement<A, Act> {
    pub fn new(data: GridFunction<A>, action: Act) -> Self {
        RnCrossedElement { data, action }
    }

    fn check_compatible(&self, rhs: &Self) -> Result<(), CrossedError> {
        if self.data.spec() != rhs.data.spec() || self.action != rhs.action {
            return Err(CrossedError::Mismatch);
        }
        Ok(())
    }

    /// Twisted convolution (f ∗ f′)(x) = hⁿ Σ_y f(y) α_y(f′(x−y)); points
    /// x − y outside the box contribute nothing.
    pub fn twisted_conv(&self, rhs: &Self) -> Result<Self, CrossedError> {
        self.twisted_conv_with(rhs, |a, b| a.mul(b))
    }

    /// Twisted convolution with the coefficient product supplied
    /// explicitly; passing the deformed product turns this into the
    /// convolution of the crossed product over A_J.
    pub fn twisted_conv_with(
        &self,
        rhs: &Self,
        coeff_mul: impl Fn(&A, &A) -> A,
    ) -> Result<Self, CrossedError> {
        self.check_compatible(rhs)?;
        let spec = self.data.spec().clone();
        let dims = spec.dim();
        let counts: Vec<usize> = spec.axes().iter().map(|a| a.points()).collect();
        let vol = spec.cell_volume();
        let total = spec.total_points();
        let mut values: Vec<A> = Vec::with_capacity(total);
        for out_flat in 0..total {
            let out_idx = spec.multi_from_flat(out_flat);
            let mut acc = self.data.values()[0].zero_like();
            for y_flat in 0..total {
                let fy = &self.data.values()[y_flat];
                if fy.norm() == 0.0 {
                    continue;
                }
                let y_idx = spec.multi_from_flat(y_flat);
                // x − y on the lattice: index offset against the center
                let mut target = Vec::with_capacity(dims);
                let mut inside = true;
                for a in 0..dims {
                    let k = out_idx[a] as i64 - y_idx[a] as i64 + (counts[a] / 2) as i64;
                    if k < 0 || k >= counts[a] as i64 {
                        inside = false;
                        break;
                    }
                    target.push(k as usize);
                }
                if !inside {
                    continue;
                }
                let y = spec.coord(&y_idx);
                let shifted = self.action.act(&y, rhs.data.value(&target));
                acc = acc.add(&coeff_mul(fy, &shifted));
            }
            values.push(acc.scale(Complex64::new(vol, 0.0)));
        }
        Ok(RnCrossedElement {
            data: GridFunction::from_values(spec, values)?,
            action: self.action.clone(),
        })
    }

    /// Dual action α̂_x(f)(s) = e(⟨x,s⟩) f(s).
    pub fn dual_action(&self, x: &[f64]) -> Self {
        let data = self.data.map_with_coords(|s, v| {
            let dot = pairwise_sum_f64(&s.iter().zip(x).map(|(a, b)| a * b).collect::<Vec<_>>());
            v.scale(e2pi(dot))
        });
        RnCrossedElement {
            data,
            action: self.action.clone(),
        }
    }

    /// Translation (γ_t f)(s) = f(s − t): an exact lattice shift when t
    /// is on-lattice, multilinear interpolation otherwise; shifted-out
    /// mass is reported, never silently dropped.
    pub fn gamma_action(&self, t: &[f64]) -> (Self, TruncationReport) {
        let spec = self.data.spec().clone();
        let values: Vec<A> = (0..spec.total_points())
            .map(|flat| {
                let x = spec.coord_flat(flat);
                let target: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
                sample_interpolated(&self.data, &target)
            })
            .collect();
        let data = GridFunction::from_values(spec, values).expect("same grid");
        let before = self.data.l2_norm();
        let after = data.l2_norm();
        let lost = if before > 0.0 {
            ((before * before - after * after).max(0.0)).sqrt() / before
        } else {
            0.0
        };
        (
            RnCrossedElement {
                data,
                action: self.action.clone(),
            },
            TruncationReport {
                lost_fraction: lost,
            },
        )
    }
}

/// Value of a grid function at an arbitrary point: exact lattice lookup
/// when the point is on-grid, multilinear interpolation of the 2ⁿ
/// surrounding lattice points otherwise, zero outside the box.
pub fn sample_interpolated<A: Algebra>(f: &GridFunction<A>, x: &[f64]) -> A {
    let spec = f.spec();
    let dims = spec.dim();
    let zero = f.values()[0].zero_like();
    let mut base = Vec::with_capacity(dims);
    let mut frac = Vec::with_capacity(dims);
    for (a, &xa) in spec.axes().iter().zip(x) {
        let pos = (xa + a.half_width) / a.step;
        if pos < -1e-9 || pos > a.points() as f64 - 1.0 + 1e-9 {
            return zero;
        }
        let lo = pos.floor().min(a.points() as f64 - 1.0).max(0.0);
        base.push(lo as usize);
        frac.push((pos - lo).clamp(0.0, 1.0));
    }
    let mut acc = zero.clone();
    for corner in 0..(1usize << dims) {
        let mut weight = 1.0;
        let mut idx = Vec::with_capacity(dims);
        let mut ok = true;
        for a in 0..dims {
            let hi = corner & (1 << a) != 0;
            let w = if hi { frac[a] } else { 1.0 - frac[a] };
            if w == 0.0 {
                ok = false;
                break;
            }
            let k = base[a] + if hi { 1 } else { 0 };
            if k >= spec.axes()[a].points() {
                ok = false;
                break;
            }
            weight *= w;
            idx.push(k);
        }
        if ok {
            acc = acc.add(&f.value(&idx).scale(Complex64::new(weight, 0.0)));
        }
    }
    acc
}

/// Like `sample_interpolated` but with the box treated periodically (the
/// discrete torus underlying the DFT grids): lattice hits are looked up
/// modulo 2L, making the −1 and ℤ₄ lattice actions exact permutations.
pub fn sample_periodic<A: Algebra>(f: &GridFunction<A>, x: &[f64]) -> A {
    let spec = f.spec();
    let dims = spec.dim();
    let mut base = Vec::with_capacity(dims);
    let mut frac = Vec::with_capacity(dims);
    for (a, &xa) in spec.axes().iter().zip(x) {
        let n = a.points() as i64;
        let pos = (xa + a.half_width) / a.step;
        let lo = pos.floor();
        let mut fr = pos - lo;
        // snap to the lattice when within rounding slack
        let mut lo_i = lo as i64;
        if fr > 1.0 - 1e-9 {
            lo_i += 1;
            fr = 0.0;
        } else if fr < 1e-9 {
            fr = 0.0;
        }
        base.push(((lo_i % n) + n) % n);
        frac.push(fr);
    }
    let zero = f.values()[0].zero_like();
    let mut acc = zero;
    for corner in 0..(1usize << dims) {
        let mut weight = 1.0;
        let mut idx = Vec::with_capacity(dims);
        let mut ok = true;
        for a in 0..dims {
            let n = spec.axes()[a].points() as i64;
            let hi = corner & (1 << a) != 0;
            let w = if hi { frac[a] } else { 1.0 - frac[a] };
            if w == 0.0 {
                ok = false;
                break;
            }
            weight *= w;
            let k = ((base[a] + if hi { 1 } else { 0 }) % n + n) % n;
            idx.push(k as usize);
        }
        if ok {
            acc = acc.add(&f.value(&idx).scale(Complex64::new(weight, 0.0)));
        }
    }
    acc
}

fn split_axes(spec: &GridSpec, first: usize) -> (GridSpec, GridSpec) {
    let axes = spec.axes();
    let a = GridSpec::from_axes(axes[..first].to_vec()).expect("nonempty");
    let b = GridSpec::from_axes(axes[first..].to_vec()).expect("nonempty");
    (a, b)
}

fn is_dual_pair(dual: &GridSpec, primal: &GridSpec) -> bool {
    dual.dim() == primal.dim()
        && dual.axes().iter().zip(primal.axes()).all(|(d, p)| {
            let pd = p.dual();
            (d.half_width - pd.half_width).abs() < 1e-9 && (d.step - pd.step).abs() < 1e-9
        })
}

/// The Takesaki–Takai transform
/// Φ(F)(s, r) = ∫_{ℝ_n} α_r⁻¹(F(t, s)) e(⟨r−s, t⟩) dt
/// for F sampled on (dual t) × (primal s); the output lives on
/// (primal s) × (primal r). Computed per s-slice as an exact discrete
/// Fourier transform of t ↦ F(t,s)·e(−⟨s,t⟩) onto the primal r-grid.
pub fn takai_map<A: Algebra, Act: CoeffAction<A>>(
    f: &GridFunction<A>,
    action: &Act,
    dual_dim: usize,
) -> Result<GridFunction<A>, CrossedError> {
    let (t_spec, s_spec) = split_axes(f.spec(), dual_dim);
    if !is_dual_pair(&t_spec, &s_spec) {
        return Err(CrossedError::NotDualPair);
    }
    let s_total = s_spec.total_points();
    let t_total = t_spec.total_points();
    let out_spec = s_spec.product(&s_spec);
    let mut values: Vec<A> = Vec::with_capacity(s_total * s_total);
    for s_flat in 0..s_total {
        let s = s_spec.coord_flat(s_flat);
        let slice_vals: Vec<A> = (0..t_total)
            .map(|t_flat| {
                let t = t_spec.coord_flat(t_flat);
                let dot =
                    pairwise_sum_f64(&t.iter().zip(&s).map(|(a, b)| a * b).collect::<Vec<_>>());
                let mut idx = t_spec.multi_from_flat(t_flat);
                idx.extend(s_spec.multi_from_flat(s_flat));
                f.value(&idx).scale(e2pi(-dot))
            })
            .collect();
        let slice = GridFunction::from_values(t_spec.clone(), slice_vals)?;
        // e(⟨r,t⟩) against the dual grid is exactly the inverse-kernel DFT
        let transformed = fourier(&slice, FourierSign::Plus);
        debug_assert_eq!(transformed.spec(), &s_spec);
        for r_flat in 0..s_total {
            let r = s_spec.coord_flat(r_flat);
            let minus_r: Vec<f64> = r.iter().map(|v| -v).collect();
            values.push(action.act(&minus_r, &transformed.values()[r_flat]));
        }
    }
    Ok(GridFunction::from_values(out_spec, values)?)
}

/// Product of the double crossed product (A⋊ℝⁿ)⋊ℝ_n on sampled data:
/// (F ⋆̂ F′)(t, s) = ∫dτ ∫dy F(τ, y) e(⟨τ, s−y⟩) α_y(F′(t−τ, s−y)).
pub fn double_crossed_mul<A: Algebra, Act: CoeffAction<A>>(
    f: &GridFunction<A>,
    g: &GridFunction<A>,
    action: &Act,
    dual_dim: usize,
) -> Result<GridFunction<A>, CrossedError> {
    if f.spec() != g.spec() {
        return Err(CrossedError::Mismatch);
    }
    let (t_spec, s_spec) = split_axes(f.spec(), dual_dim);
    let t_counts: Vec<usize> = t_spec.axes().iter().map(|a| a.points()).collect();
    let s_counts: Vec<usize> = s_spec.axes().iter().map(|a| a.points()).collect();
    let vol = t_spec.cell_volume() * s_spec.cell_volume();
    let t_total = t_spec.total_points();
    let s_total = s_spec.total_points();
    let zero = f.values()[0].zero_like();
    let mut values = vec![zero; t_total * s_total];
    for tau_flat in 0..t_total {
        let tau_idx = t_spec.multi_from_flat(tau_flat);
        let tau = t_spec.coord(&tau_idx);
        for y_flat in 0..s_total {
            let y_idx = s_spec.multi_from_flat(y_flat);
            let mut f_idx = tau_idx.clone();
            f_idx.extend(y_idx.iter().copied());
            let f_val = f.value(&f_idx);
            if f_val.norm() == 0.0 {
                continue;
            }
            let y = s_spec.coord(&y_idx);
            for t_flat in 0..t_total {
                let t_idx = t_spec.multi_from_flat(t_flat);
                // t − τ on the dual lattice
                let mut tmtau = Vec::with_capacity(t_idx.len());
                let mut inside = true;
                for a in 0..t_idx.len() {
                    let k = t_idx[a] as i64 - tau_idx[a] as i64 + (t_counts[a] / 2) as i64;
                    if k < 0 || k >= t_counts[a] as i64 {
                        inside = false;
                        break;
                    }
                    tmtau.push(k as usize);
                }
                if !inside {
                    continue;
                }
                for s_flat in 0..s_total {
                    let s_idx = s_spec.multi_from_flat(s_flat);
                    // s − y on the primal lattice
                    let mut smy = Vec::with_capacity(s_idx.len());
                    let mut ok = true;
                    for a in 0..s_idx.len() {
                        let k = s_idx[a] as i64 - y_idx[a] as i64 + (s_counts[a] / 2) as i64;
                        if k < 0 || k >= s_counts[a] as i64 {
                            ok = false;
                            break;
                        }
                        smy.push(k as usize);
                    }
                    if !ok {
                        continue;
                    }
                    let s = s_spec.coord(&s_idx);
                    let smy_coord: Vec<f64> = s.iter().zip(&y).map(|(a, b)| a - b).collect();
                    let phase = pairwise_sum_f64(
                        &tau.iter()
                            .zip(&smy_coord)
                            .map(|(a, b)| a * b)
                            .collect::<Vec<_>>(),
                    );
                    let mut g_idx = tmtau.clone();
                    g_idx.extend(smy.iter().copied());
                    let term = f_val
                        .mul(&action.act(&y, g.value(&g_idx)))
                        .scale(e2pi(phase) * vol);
                    let out = t_flat * s_total + s_flat;
                    values[out] = values[out].add(&term);
                }
            }
        }
    }
    Ok(GridFunction::from_values(f.spec().clone(), values)?)
}

/// Product on the image of Φ. In Φ(F)(s, r) the first slot is the
/// γ-crossed direction and the second the 𝒮(ℝⁿ, A)-function argument
/// (the opposite ordering transposes kernels), so
/// (P ⋆ Q)(s, r) = hⁿ Σ_y P(y, r) Q(s−y, r−y),
/// with the coefficient product taken pointwise in the function slot.
pub fn gamma_crossed_mul<A: Algebra>(
    p: &GridFunction<A>,
    q: &GridFunction<A>,
    half_dim: usize,
) -> Result<GridFunction<A>, CrossedError> {
    if p.spec() != q.spec() {
        return Err(CrossedError::Mismatch);
    }
    let (s_spec, r_spec) = split_axes(p.spec(), half_dim);
    if s_spec != r_spec {
        return Err(CrossedError::Mismatch);
    }
    let counts: Vec<usize> = s_spec.axes().iter().map(|a| a.points()).collect();
    let total = s_spec.total_points();
    let vol = s_spec.cell_volume();
    let zero = p.values()[0].zero_like();
    let mut values = vec![zero; total * total];
    for s_flat in 0..total {
        let s_idx = s_spec.multi_from_flat(s_flat);
        for y_flat in 0..total {
            let y_idx = s_spec.multi_from_flat(y_flat);
            // s − y on the lattice
            let mut smy = Vec::with_capacity(s_idx.len());
            let mut ok = true;
            for a in 0..s_idx.len() {
                let k = s_idx[a] as i64 - y_idx[a] as i64 + (counts[a] / 2) as i64;
                if k < 0 || k >= counts[a] as i64 {
                    ok = false;
                    break;
                }
                smy.push(k as usize);
            }
            if !ok {
                continue;
            }
            let smy_flat = s_spec.flat_from_multi(&smy);
            for r_flat in 0..total {
                let p_val = &p.values()[y_flat * total + r_flat];
                if p_val.norm() == 0.0 {
                    continue;
                }
                let r_idx = s_spec.multi_from_flat(r_flat);
                let mut rmy = Vec::with_capacity(r_idx.len());
                let mut ok2 = true;
                for a in 0..r_idx.len() {
                    let k = r_idx[a] as i64 - y_idx[a] as i64 + (counts[a] / 2) as i64;
                    if k < 0 || k >= counts[a] as i64 {
                        ok2 = false;
                        break;
                    }
                    rmy.push(k as usize);
                }
                if !ok2 {
                    continue;
                }
                let rmy_flat = s_spec.flat_from_multi(&rmy);
                let term = p_val
                    .mul(&q.values()[smy_flat * total + rmy_flat])
                    .scale(Complex64::new(vol, 0.0));
                let out = s_flat * total + r_flat;
                values[out] = values[out].add(&term);
            }
        }
    }
    Ok(GridFunction::from_values(p.spec().clone(), values)?)
}

/// Change of variables from γ-crossed data f(s, r) (γ-slot first) to an
/// operator kernel k(x, y) = f(x − y, x); under it the γ-product becomes
/// plain kernel composition.
pub fn to_kernel<A: Algebra>(
    f: &GridFunction<A>,
    half_dim: usize,
) -> Result<GridFunction<A>, CrossedError> {
    let (s_spec, _) = split_axes(f.spec(), half_dim);
    let counts: Vec<usize> = s_spec.axes().iter().map(|a| a.points()).collect();
    let total = s_spec.total_points();
    let zero = f.values()[0].zero_like();
    let mut values = vec![zero; total * total];
    for x_flat in 0..total {
        let x_idx = s_spec.multi_from_flat(x_flat);
        for y_flat in 0..total {
            let y_idx = s_spec.multi_from_flat(y_flat);
            let mut w = Vec::with_capacity(x_idx.len());
            let mut ok = true;
            for a in 0..x_idx.len() {
                let k = x_idx[a] as i64 - y_idx[a] as i64 + (counts[a] / 2) as i64;
                if k < 0 || k >= counts[a] as i64 {
                    ok = false;
                    break;
                }
                w.push(k as usize);
            }
            if !ok {
                continue;
            }
            let mut f_idx = w;
            f_idx.extend(x_idx.iter().copied());
            values[x_flat * total + y_flat] = f.value(&f_idx).clone();
        }
    }
    Ok(GridFunction::from_values(f.spec().clone(), values)?)
}

/// Kernel composition (k ∘ k′)(x, y) = hⁿ Σ_u k(x, u) k′(u, y).
pub fn kernel_compose<A: Algebra>(
    k: &GridFunction<A>,
    kp: &GridFunction<A>,
    half_dim: usize,
) -> Result<GridFunction<A>, CrossedError> {
    if k.spec() != kp.spec() {
        return Err(CrossedError::Mismatch);
    }
    let (s_spec, _) = split_axes(k.spec(), half_dim);
    let total = s_spec.total_points();
    let vol = s_spec.cell_volume();
    let zero = k.values()[0].zero_like();
    let mut values = vec![zero; total * total];
    for x_flat in 0..total {
        for u_flat in 0..total {
            let a = &k.values()[x_flat * total + u_flat];
            if a.norm() == 0.0 {
                continue;
            }
            for y_flat in 0..total {
                let term = a
                    .mul(&kp.values()[u_flat * total + y_flat])
                    .scale(Complex64::new(vol, 0.0));
                let out = x_flat * total + y_flat;
                values[out] = values[out].add(&term);
            }
        }
    }
    Ok(GridFunction::from_values(k.spec().clone(), values)?)
}

/// Diagonal group action on kernel data, g·k(x, y) = k(g⁻¹x, g⁻¹y), for
/// a real 2×2 matrix acting on each variable of a 4-axis kernel grid.
/// Lattice hits are exact (periodic identification); everything else is
/// bilinear interpolation.
pub fn kernel_group_action_real<A: Algebra>(
    g_inv: &[[f64; 2]; 2],
    k: &GridFunction<A>,
) -> GridFunction<A> {
    let spec = k.spec().clone();
    assert_eq!(spec.dim(), 4, "kernel over ℝ²×ℝ²");
    let values: Vec<A> = (0..spec.total_points())
        .map(|flat| {
            let c = spec.coord_flat(flat);
            let x = [
                g_inv[0][0] * c[0] + g_inv[0][1] * c[1],
                g_inv[1][0] * c[0] + g_inv[1][1] * c[1],
            ];
            let y = [
                g_inv[0][0] * c[2] + g_inv[0][1] * c[3],
                g_inv[1][0] * c[2] + g_inv[1][1] * c[3],
            ];
            sample_periodic(k, &[x[0], x[1], y[0], y[1]])
        })
        .collect();
    GridFunction::from_values(spec, values).expect("same grid")
}

fn is_orthogonal_int(m: IntMat2) -> bool {
    m[0][0] * m[0][0] + m[1][0] * m[1][0] == 1
        && m[0][1] * m[0][1] + m[1][1] * m[1][1] == 1
        && m[0][0] * m[0][1] + m[1][0] * m[1][1] == 0
}

/// Diagonal action for an integer matrix. Orthogonal matrices (±I, the
/// ℤ₄ rotations) permute the lattice exactly under the periodic
/// identification; the hexagonal shears leave the box, where wrapping
/// would alias interior mass, so those fall back to zero-fill lookups.
pub fn kernel_group_action_int<A: Algebra>(g_inv: IntMat2, k: &GridFunction<A>) -> GridFunction<A> {
    let gf = [
        [g_inv[0][0] as f64, g_inv[0][1] as f64],
        [g_inv[1][0] as f64, g_inv[1][1] as f64],
    ];
    if is_orthogonal_int(g_inv) {
        return kernel_group_action_real(&gf, k);
    }
    let spec = k.spec().clone();
    assert_eq!(spec.dim(), 4, "kernel over ℝ²×ℝ²");
    let values: Vec<A> = (0..spec.total_points())
        .map(|flat| {
            let c = spec.coord_flat(flat);
            let x = [
                gf[0][0] * c[0] + gf[0][1] * c[1],
                gf[1][0] * c[0] + gf[1][1] * c[1],
            ];
            let y = [
                gf[0][0] * c[2] + gf[0][1] * c[3],
                gf[1][0] * c[2] + gf[1][1] * c[3],
            ];
            sample_interpolated(k, &[x[0], x[1], y[0], y[1]])
        })
        .collect();
    GridFunction::from_values(spec, values).expect("same grid")
}

/// The combined group action on 𝒮(ℝ², A)-data with torus coefficients:
/// (g·f)(x) = β_g(f(ρ_g⁻¹ x)). Exact index permutation for the
/// orthogonal lattice elements; zero-fill lattice lookup for the shears.
pub fn torus_grid_group_action(
    group: &CyclicAction,
    power: usize,
    f: &GridFunction<TorusElement>,
) -> GridFunction<TorusElement> {
    let spec = f.spec().clone();
    assert_eq!(spec.dim(), 2);
    let inv = group.inverse_power(power);
    let wrap = is_orthogonal_int(group.mat(inv));
    let values: Vec<TorusElement> = (0..spec.total_points())
        .map(|flat| {
            let c = spec.coord_flat(flat);
            let moved = group.apply_real(inv, [c[0], c[1]]);
            let pulled = if wrap {
                sample_periodic(f, &moved)
            } else {
                sample_interpolated(f, &moved)
            };
            beta(group, power, &pulled)
        })
        .collect();
    GridFunction::from_values(spec, values).expect("same grid")
}

/// The straightening transform
/// Θ_J(f)(x) = ∫ α_{Jy}(f̂(y)) e(⟨x, y⟩) dy
/// with f̂ the grid Fourier transform; Θ₀ is the exact inverse transform
/// and hence the identity on the grid.
pub fn theta_j<Act: CoeffAction<TorusElement>>(
    f: &RnCrossedElement<TorusElement, Act>,
    j: &DeformationMatrix,
) -> Result<RnCrossedElement<TorusElement, Act>, CrossedError> {
    let spec = f.data.spec().clone();
    let fhat = fourier(&f.data, FourierSign::Minus);
    let dual = fhat.spec().clone();
    let twisted_vals: Vec<TorusElement> = (0..dual.total_points())
        .map(|flat| {
            let y = dual.coord_flat(flat);
            let jy = j.apply(&y);
            scaled_alpha(1.0, &jy, &fhat.values()[flat])
        })
        .collect();
    let twisted = GridFunction::from_values(dual, twisted_vals)?;
    let out = fourier(&twisted, FourierSign::Plus);
    debug_assert_eq!(out.spec(), &spec);
    Ok(RnCrossedElement {
        data: out,
        action: f.action.clone(),
    })
}

/// Decay order of a kernel in one variable group: the complementary
/// group is collapsed by the sup norm and the radial fit runs on what
/// remains.
pub fn marginal_decay<A: Algebra>(
    k: &GridFunction<A>,
    half_dim: usize,
    group: usize,
    window: (f64, f64),
) -> Result<DecayReport, GridError> {
    let (s_spec, r_spec) = split_axes(k.spec(), half_dim);
    let (keep, other, keep_first) = if group == 0 {
        (s_spec.clone(), r_spec, true)
    } else {
        (r_spec, s_spec.clone(), false)
    };
    let other_total = other.total_points();
    let keep_total = keep.total_points();
    let values: Vec<Complex64> = (0..keep_total)
        .map(|kf| {
            let mut sup = 0.0f64;
            for of in 0..other_total {
                let flat = if keep_first {
                    kf * other_total + of
                } else {
                    of * keep_total + kf
                };
                sup = sup.max(k.values()[flat].norm());
            }
            Complex64::new(sup, 0.0)
        })
        .collect();
    let marginal = GridFunction::from_values(keep, values)?;
    crate::grid::decay_order(&marginal, window, 6)
}

/// A smoothing-operator stand-in: kernel data whose decay order passes a
/// configured threshold in both variable groups.
#[derive(Clone, Debug)]
pub struct SmoothKernel<A: Algebra> {
    pub kernel: GridFunction<A>,
    pub half_dim: usize,
    pub decay_first: DecayReport,
    pub decay_second: DecayReport,
}

impl<A: Algebra> SmoothKernel<A> {
    pub fn certify(
        kernel: GridFunction<A>,
        half_dim: usize,
        threshold: f64,
        window: (f64, f64),
    ) -> Result<Self, CrossedError> {
        let decay_first = marginal_decay(&kernel, half_dim, 0, window)?;
        let decay_second = marginal_decay(&kernel, half_dim, 1, window)?;
        for (group, rep) in [(0usize, &decay_first), (1, &decay_second)] {
            if !rep.beyond_range && rep.order < threshold {
                return Err(CrossedError::NotSmoothing {
                    group,
                    got: rep.order,
                    want: threshold,
                });
            }
        }
        Ok(SmoothKernel {
            kernel,
            half_dim,
            decay_first,
            decay_second,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn scalar_grid(l: f64, h: f64) -> GridSpec {
        GridSpec::uniform(1, l, h).unwrap()
    }

    fn gaussian(x: f64) -> Complex64 {
        Complex64::new((-std::f64::consts::PI * x * x).exp(), 0.0)
    }

    #[test]
    fn twisted_conv_of_gaussians_matches_closed_form() {
        // trivial action: e^{-πx²} ∗ e^{-πx²} = 2^{-1/2} e^{-πx²/2}
        let spec = scalar_grid(8.0, 0.25);
        let f = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| gaussian(x[0])),
            TrivialAction,
        );
        let conv = f.twisted_conv(&f).unwrap();
        let exact = GridFunction::sample(&spec, |x| {
            Complex64::new(
                0.5f64.sqrt() * (-std::f64::consts::PI * x[0] * x[0] / 2.0).exp(),
                0.0,
            )
        });
        let defect = conv.data.sub(&exact).unwrap().sup_norm();
        assert!(defect <= 1e-6, "closed-form defect {defect:.3e}");
    }

    #[test]
    fn twisted_conv_approximate_identity() {
        // a narrow normalized bump convolved with f approaches f
        let mut sups = Vec::new();
        for &h in &[0.25, 0.125, 0.0625] {
            let spec = scalar_grid(8.0, h);
            let w = 8.0 * h; // bump width shrinks with the mesh
            let bump = RnCrossedElement::new(
                GridFunction::sample(&spec, |x| {
                    Complex64::new(
                        (-std::f64::consts::PI * (x[0] / w) * (x[0] / w)).exp() / w,
                        0.0,
                    )
                }),
                TrivialAction,
            );
            let f = RnCrossedElement::new(
                GridFunction::sample(&spec, |x| Complex64::new(1.0 / (1.0 + x[0] * x[0]), 0.0)),
                TrivialAction,
            );
            let conv = bump.twisted_conv(&f).unwrap();
            let diff = conv.data.sub(&f.data).unwrap();
            let defect = (0..spec.total_points())
                .filter(|&flat| spec.coord_flat(flat)[0].abs() < 4.0)
                .map(|flat| diff.values()[flat].norm())
                .fold(0.0f64, f64::max);
            sups.push(defect);
        }
        assert!(sups[0] > sups[1] && sups[1] > sups[2], "sup error {sups:?}");
        assert!(
            sups[1] / sups[2] >= 1.8,
            "refinement ratio {:.2}",
            sups[1] / sups[2]
        );
    }

    #[test]
    fn twisted_conv_associativity_small() {
        // with Schwartz-type data the box truncation sits below round-off
        let spec = scalar_grid(6.0, 0.25);
        let mk = |c: f64, w: f64| {
            RnCrossedElement::new(
                GridFunction::sample(&spec, move |x| {
                    Complex64::new(
                        (-std::f64::consts::PI * (x[0] - c) * (x[0] - c) / w).exp(),
                        0.0,
                    )
                }),
                TrivialAction,
            )
        };
        let (a, b, c) = (mk(0.5, 1.0), mk(-0.25, 0.5), mk(0.0, 2.0));
        let lhs = a.twisted_conv(&b).unwrap().twisted_conv(&c).unwrap();
        let rhs = a.twisted_conv(&b.twisted_conv(&c).unwrap()).unwrap();
        let defect = lhs.data.sub(&rhs.data).unwrap().sup_norm();
        assert!(defect <= 1e-4, "associativity defect {defect:.3e}");
    }

    #[test]
    fn twisted_conv_with_torus_action() {
        // single torus modes: the α_y twist folds into a modulated scalar
        // convolution per mode pair
        let spec = GridSpec::uniform(2, 4.0, 0.5).unwrap();
        let phi = |x: &[f64]| (-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1])).exp();
        let n = [0i64, 1];
        let f = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| {
                TorusElement::unitary(&[1, 0]).scale(Complex64::new(phi(x), 0.0))
            }),
            TorusTranslation { scale: 1.0 },
        );
        let g = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| {
                TorusElement::unitary(&n).scale(Complex64::new(phi(x), 0.0))
            }),
            TorusTranslation { scale: 1.0 },
        );
        let conv = f.twisted_conv(&g).unwrap();
        let counts: Vec<usize> = spec.axes().iter().map(|a| a.points()).collect();
        let mut worst = 0.0f64;
        for out_flat in 0..spec.total_points() {
            let out_idx = spec.multi_from_flat(out_flat);
            let x = spec.coord(&out_idx);
            // oracle: hⁿ Σ_y φ(y) e(−⟨y,n⟩) φ(x−y) over lattice-valid y
            let mut acc = Complex64::new(0.0, 0.0);
            for y_flat in 0..spec.total_points() {
                let y_idx = spec.multi_from_flat(y_flat);
                let ok = (0..2).all(|a| {
                    let k = out_idx[a] as i64 - y_idx[a] as i64 + (counts[a] / 2) as i64;
                    k >= 0 && k < counts[a] as i64
                });
                if !ok {
                    continue;
                }
                let y = spec.coord(&y_idx);
                let diff = [x[0] - y[0], x[1] - y[1]];
                acc += Complex64::new(phi(&y), 0.0)
                    * e2pi(-(y[0] * n[0] as f64 + y[1] * n[1] as f64))
                    * phi(&diff);
            }
            acc *= spec.cell_volume();
            let got = conv.data.values()[out_flat].coeff(&[1, 1]);
            worst = worst.max((got - acc).norm());
        }
        assert!(worst <= 1e-10, "mode decomposition defect {worst:.3e}");
    }

    #[test]
    fn dual_action_group_law_and_automorphism() {
        let spec = scalar_grid(6.0, 0.25);
        let f = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| gaussian(x[0])),
            TrivialAction,
        );
        let a = f.dual_action(&[0.3]).dual_action(&[0.4]);
        let b = f.dual_action(&[0.7]);
        assert!(
            a.data.sub(&b.data).unwrap().sup_norm() <= 1e-12,
            "group law"
        );
        // α̂ is an automorphism of the twisted convolution
        let g = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| gaussian(x[0] - 0.5)),
            TrivialAction,
        );
        let x = [0.37];
        let lhs = f.twisted_conv(&g).unwrap().dual_action(&x);
        let rhs = f.dual_action(&x).twisted_conv(&g.dual_action(&x)).unwrap();
        let defect = lhs.data.sub(&rhs.data).unwrap().sup_norm();
        assert!(defect <= 1e-6, "automorphism defect {defect:.3e}");
    }

    #[test]
    fn gamma_shifts_and_truncation() {
        let spec = scalar_grid(6.0, 0.25);
        let f = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| gaussian(x[0])),
            TrivialAction,
        );
        let (zero_shift, rep) = f.gamma_action(&[0.0]);
        assert_eq!(zero_shift.data.sub(&f.data).unwrap().sup_norm(), 0.0);
        assert!(rep.lost_fraction < 1e-12);
        // on-lattice shifts compose exactly
        let (s1, _) = f.gamma_action(&[0.5]);
        let (s2, _) = s1.gamma_action(&[0.75]);
        let (direct, _) = f.gamma_action(&[1.25]);
        assert_eq!(s2.data.sub(&direct.data).unwrap().sup_norm(), 0.0);
        // shifting most of the mass out is loudly reported
        let (_, lost) = f.gamma_action(&[5.5]);
        assert!(lost.lost_fraction > 0.1, "lost {:.3}", lost.lost_fraction);
        // γ intertwines the (untwisted) convolution
        let g = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| gaussian(x[0] + 0.5)),
            TrivialAction,
        );
        let t = [0.75];
        let (lhs, _) = f.twisted_conv(&g).unwrap().gamma_action(&t);
        let rhs = f.gamma_action(&t).0.twisted_conv(&g).unwrap();
        let defect = lhs.data.sub(&rhs.data).unwrap().sup_norm();
        assert!(defect <= 1e-6, "γ intertwining defect {defect:.3e}");
    }

    fn dual_primal_grid(l: f64, h: f64) -> (GridSpec, GridSpec, GridSpec) {
        let primal = GridSpec::uniform(1, l, h).unwrap();
        let dual = primal.dual();
        let product = dual.product(&primal);
        (product, dual, primal)
    }

    #[test]
    fn takai_requires_dual_pair() {
        let primal = GridSpec::uniform(1, 4.0, 0.5).unwrap();
        let bad = primal.product(&primal);
        let f = GridFunction::sample(&bad, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(
            takai_map(&f, &TrivialAction, 1),
            Err(CrossedError::NotDualPair)
        ));
    }

    #[test]
    fn takai_separable_matches_fourier_oracle() {
        // trivial action, F(t,s) = φ(t)ψ(s): Φ(F)(s,r) = ψ(s)·φ̌(r−s)
        let (product, dual, primal) = dual_primal_grid(8.0, 0.25);
        let phi = |t: f64| (-std::f64::consts::PI * t * t * 4.0).exp();
        let psi = |s: f64| (-std::f64::consts::PI * s * s / 2.0).exp();
        let f = GridFunction::sample(&product, |c| Complex64::new(phi(c[0]) * psi(c[1]), 0.0));
        let out = takai_map(&f, &TrivialAction, 1).unwrap();
        let phi_grid = GridFunction::sample(&dual, |t| Complex64::new(phi(t[0]), 0.0));
        let phi_check = |w: f64| {
            let mut acc = Complex64::new(0.0, 0.0);
            for flat in 0..dual.total_points() {
                let t = dual.coord_flat(flat)[0];
                acc += phi_grid.values()[flat] * e2pi(w * t);
            }
            acc * dual.cell_volume()
        };
        let n = primal.total_points();
        let mut worst = 0.0f64;
        for s_flat in 0..n {
            for r_flat in 0..n {
                let s = primal.coord_flat(s_flat)[0];
                let r = primal.coord_flat(r_flat)[0];
                let got = out.values()[s_flat * n + r_flat];
                let want = Complex64::new(psi(s), 0.0) * phi_check(r - s);
                worst = worst.max((got - want).norm());
            }
        }
        assert!(worst <= 1e-4, "separable oracle defect {worst:.3e}");
    }

    #[test]
    fn takai_multiplicative_on_refinement() {
        // Φ(F ⋆̂ F′) vs Φ(F) ⋆_γ Φ(F′) with kinked s-profiles so the
        // discretization error is measurable and shrinks under h ↦ h/2
        let mut defects = Vec::new();
        for &h in &[0.5, 0.25, 0.125] {
            let (product, _, _) = dual_primal_grid(4.0, h);
            // wide-in-t Gaussians keep the dual-box truncation far below
            // the s-side kink aliasing, which is the O(h²) term under test
            let f = GridFunction::sample(&product, |c| {
                Complex64::new(
                    (-std::f64::consts::PI * c[0] * c[0] * 2.0).exp()
                        * (-c[1].abs() - 2.0 * c[1] * c[1]).exp(),
                    0.0,
                )
            });
            let g = GridFunction::sample(&product, |c| {
                Complex64::new(
                    (-std::f64::consts::PI * c[0] * c[0] * 3.0).exp()
                        * (-(c[1] - 0.25).abs() - 2.0 * c[1] * c[1]).exp(),
                    0.0,
                )
            });
            let prod = double_crossed_mul(&f, &g, &TrivialAction, 1).unwrap();
            let lhs = takai_map(&prod, &TrivialAction, 1).unwrap();
            let pf = takai_map(&f, &TrivialAction, 1).unwrap();
            let pg = takai_map(&g, &TrivialAction, 1).unwrap();
            let rhs = gamma_crossed_mul(&pf, &pg, 1).unwrap();
            let defect = lhs.sub(&rhs).unwrap().sup_norm() / rhs.sup_norm().max(1e-30);
            defects.push(defect);
        }
        // the transform pair is spectrally accurate: each halving either
        // improves the defect by the contract factor or has already
        // converged past the floor (tolerance/100)
        let floor = 1e-5;
        for w in defects.windows(2) {
            assert!(
                w[0] / w[1] >= 1.8 || w[1] <= floor,
                "refinement stalled above the floor: {defects:?}"
            );
        }
        assert!(
            defects[2] <= 1e-3,
            "defect at finest grid {:.3e}",
            defects[2]
        );
    }

    #[test]
    fn gamma_vs_kernel_composition() {
        // the change of variables intertwines ⋆_γ with kernel composition
        let (product, _, _) = dual_primal_grid(4.0, 0.25);
        let f = GridFunction::sample(&product, |c| {
            Complex64::new(gaussian(c[0] * 2.0).re * gaussian(c[1]).re, 0.0)
        });
        let g = GridFunction::sample(&product, |c| {
            Complex64::new(gaussian(c[0] * 3.0).re * gaussian(c[1] - 0.25).re, 0.0)
        });
        let pf = takai_map(&f, &TrivialAction, 1).unwrap();
        let pg = takai_map(&g, &TrivialAction, 1).unwrap();
        let gamma_prod = gamma_crossed_mul(&pf, &pg, 1).unwrap();
        let kf = to_kernel(&pf, 1).unwrap();
        let kg = to_kernel(&pg, 1).unwrap();
        let kprod = kernel_compose(&kf, &kg, 1).unwrap();
        let back = to_kernel(&gamma_prod, 1).unwrap();
        let defect = back.sub(&kprod).unwrap().sup_norm() / kprod.sup_norm().max(1e-30);
        assert!(defect <= 1e-3, "kernel route defect {defect:.3e}");
    }

    #[test]
    fn kernel_action_identity_and_z2_exact() {
        let primal = GridSpec::uniform(2, 2.0, 0.5).unwrap();
        let kspec = primal.product(&primal);
        let k = GridFunction::sample(&kspec, |c| {
            Complex64::new(
                (-(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3])).exp() + 0.1 * c[0],
                0.2 * c[3],
            )
        });
        let id = kernel_group_action_int([[1, 0], [0, 1]], &k);
        assert_eq!(
            id.sub(&k).unwrap().sup_norm(),
            0.0,
            "identity acts trivially"
        );
        // g = −I is an exact index permutation under the periodic
        // identification: acting twice returns bitwise
        let once = kernel_group_action_int([[-1, 0], [0, -1]], &k);
        let twice = kernel_group_action_int([[-1, 0], [0, -1]], &once);
        assert_eq!(twice.sub(&k).unwrap().sup_norm(), 0.0, "ℤ₂ is exact");
    }

    #[test]
    fn kernel_action_composition_tolerance() {
        // real rotations off the lattice compose up to interpolation error
        let primal = GridSpec::uniform(2, 3.0, 0.1875).unwrap();
        let kspec = primal.product(&primal);
        let k = GridFunction::sample(&kspec, |c| {
            let r2: f64 = c.iter().map(|v| v * v).sum();
            Complex64::new((-r2).exp(), 0.0)
        });
        let z6 = CyclicAction::new(6).unwrap();
        let r1 = z6.orthogonal_mat(z6.inverse_power(1));
        let r2m = z6.orthogonal_mat(z6.inverse_power(2));
        let g_then_h = kernel_group_action_real(&r1, &kernel_group_action_real(&r1, &k));
        let gh = kernel_group_action_real(&r2m, &k);
        let defect = g_then_h.sub(&gh).unwrap().sup_norm();
        // bilinear interpolation error is O(h²·sup|∂²k|) ≈ 2e-2 here
        assert!(defect <= 6e-2, "composition defect {defect:.3e}");
    }

    #[test]
    fn theta_zero_is_identity() {
        let spec = GridSpec::uniform(2, 4.0, 0.5).unwrap();
        let f = RnCrossedElement::new(
            GridFunction::sample(&spec, |x| {
                TorusElement::unitary(&[1, 0]).scale(Complex64::new(
                    (-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1])).exp(),
                    0.0,
                ))
            }),
            TorusTranslation { scale: 1.0 },
        );
        let out = theta_j(&f, &DeformationMatrix::zero(2)).unwrap();
        let defect = out.data.sub(&f.data).unwrap().sup_norm();
        assert!(defect <= 1e-8, "Θ₀ defect {defect:.3e}");
    }

    #[test]
    fn smooth_kernel_certification() {
        // Φ of a rank-one-like element is a smoothing kernel: decay ≥ 4
        // in both variables
        let (product, _, _) = dual_primal_grid(8.0, 0.125);
        let f = GridFunction::sample(&product, |c| {
            Complex64::new(
                (-std::f64::consts::PI * c[0] * c[0] * 2.0).exp()
                    * (-std::f64::consts::PI * c[1] * c[1] / 4.0).exp(),
                0.0,
            )
        });
        let phi = takai_map(&f, &TrivialAction, 1).unwrap();
        let kernel = to_kernel(&phi, 1).unwrap();
        let sk = SmoothKernel::certify(kernel, 1, 4.0, (2.0, 7.0)).unwrap();
        assert!(sk.decay_first.order >= 4.0 || sk.decay_first.beyond_range);
        assert!(sk.decay_second.order >= 4.0 || sk.decay_second.beyond_range);
        // a slowly decaying kernel is rejected
        let primal = GridSpec::uniform(1, 8.0, 0.125).unwrap();
        let bad = GridFunction::sample(&primal.product(&primal), |c| {
            Complex64::new(1.0 / (1.0 + c[0] * c[0] + c[1] * c[1]), 0.0)
        });
        assert!(SmoothKernel::certify(bad, 1, 4.0, (2.0, 7.0)).is_err());
    }
}
