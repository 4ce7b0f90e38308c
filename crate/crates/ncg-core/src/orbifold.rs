//! Fixed-point and orbit counting for the cyclic actions on T², the
//! combinatorial route to the periodic-cyclic and K-theory ranks of the
//! symmetrized torus algebras. Exact rational arithmetic throughout; no
//! floating point enters the counting.

use num_rational::Ratio;
use thiserror::Error;

use crate::group::{CyclicAction, GroupError, IntMat2};
use crate::torus::{trace, DeformationMatrix, TorusElement};

#[derive(Debug, Error, PartialEq)]
pub enum OrbifoldError {
    #[error("group error: {0}")]
    Group(#[from] GroupError),
    #[error("fixed points of the identity are the whole torus; pass g ≠ e")]
    IdentityElement,
}

type Q = Ratio<i64>;

fn frac_mod_one(x: Q) -> Q {
    let one = Q::from_integer(1);
    let mut y = x - x.floor();
    if y < Q::from_integer(0) {
        y += one;
    }
    if y >= one {
        y -= one;
    }
    y
}

/// Fixed points of one nontrivial group element on T², with exact
/// rational representatives in [0,1)².
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointData {
    pub power: usize,
    pub points: Vec<[Q; 2]>,
    pub count: usize,
}

/// Enumerate the solutions of (ρ_g − I)x ∈ ℤ² in [0,1)². The count
/// equals |det(ρ_g − I)|, which never vanishes for g ≠ e in the five
/// admissible groups.
pub fn fixed_points(action: &CyclicAction, power: usize) -> Result<FixedPointData, OrbifoldError> {
    let power = power % action.order();
    if power == 0 {
        return Err(OrbifoldError::IdentityElement);
    }
    let g = action.mat(power);
    let m: IntMat2 = [[g[0][0] - 1, g[0][1]], [g[1][0], g[1][1] - 1]];
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert!(d != 0, "det(ρ_g − I) ≠ 0 for g ≠ e in these groups");
    // x = M⁻¹k = adj(M)k/d for k ∈ ℤ²; points in [0,1)² correspond to k
    // in M·[0,1)², so scanning the bounding box of that parallelogram
    // hits every solution
    let adj: IntMat2 = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
    let corners = [
        [0i64, 0],
        [m[0][0], m[1][0]],
        [m[0][1], m[1][1]],
        [m[0][0] + m[0][1], m[1][0] + m[1][1]],
    ];
    let lo0 = corners.iter().map(|c| c[0]).min().unwrap() - 1;
    let hi0 = corners.iter().map(|c| c[0]).max().unwrap() + 1;
    let lo1 = corners.iter().map(|c| c[1]).min().unwrap() - 1;
    let hi1 = corners.iter().map(|c| c[1]).max().unwrap() + 1;
    let mut points = Vec::new();
    for k0 in lo0..=hi0 {
        for k1 in lo1..=hi1 {
            let x = [
                Q::new(adj[0][0] * k0 + adj[0][1] * k1, d),
                Q::new(adj[1][0] * k0 + adj[1][1] * k1, d),
            ];
            let zero = Q::from_integer(0);
            let one = Q::from_integer(1);
            if x[0] >= zero && x[0] < one && x[1] >= zero && x[1] < one {
                points.push(x);
            }
        }
    }
    points.sort();
    points.dedup();
    for p in &points {
        let y0 = Q::from_integer(m[0][0]) * p[0] + Q::from_integer(m[0][1]) * p[1];
        let y1 = Q::from_integer(m[1][0]) * p[0] + Q::from_integer(m[1][1]) * p[1];
        assert!(y0.is_integer() && y1.is_integer());
    }
    let count = points.len();
    assert_eq!(count as i64, d.abs(), "count = |det(ρ_g − I)|");
    Ok(FixedPointData {
        power,
        points,
        count,
    })
}

/// Apply ρ_{g^power} to a torus point (mod ℤ²).
fn act_on_point(action: &CyclicAction, power: usize, p: [Q; 2]) -> [Q; 2] {
    let g = action.mat(power);
    [
        frac_mod_one(Q::from_integer(g[0][0]) * p[0] + Q::from_integer(g[0][1]) * p[1]),
        frac_mod_one(Q::from_integer(g[1][0]) * p[0] + Q::from_integer(g[1][1]) * p[1]),
    ]
}

/// Orbits of the full group on a list of fixed points (G abelian, so
/// each stratum is G-stable).
pub fn orbit_count(action: &CyclicAction, points: &[[Q; 2]]) -> usize {
    let mut seen = vec![false; points.len()];
    let mut orbits = 0;
    for start in 0..points.len() {
        if seen[start] {
            continue;
        }
        orbits += 1;
        for power in action.elements() {
            let moved = act_on_point(action, power, points[start]);
            if let Some(idx) = points.iter().position(|q| *q == moved) {
                seen[idx] = true;
            }
        }
    }
    orbits
}

/// Even/odd periodic-cyclic ranks of the symmetrized torus algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HPDims {
    pub even: usize,
    pub odd: usize,
}

/// Rank of the G-invariant part of H¹(T²) ≅ ℂ², from the character
/// average of ρ (the trace sum is divisible by |G|).
fn invariant_h1_rank(action: &CyclicAction) -> usize {
    let k = action.order() as i64;
    let trace_sum: i64 = action
        .elements()
        .map(|p| {
            let m = action.mat(p);
            m[0][0] + m[1][1]
        })
        .sum();
    assert_eq!(trace_sum % k, 0);
    (trace_sum / k) as usize
}

/// even = dim H^even(T²)^G + Σ_{g≠e} #(G-orbits on Fix(g)),
/// odd = dim H¹(T²)^G. Exact integers.
pub fn hp_dimensions(action: &CyclicAction) -> HPDims {
    let k = action.order();
    // H⁰ is always invariant; H² is preserved because det ρ = 1
    let mut even = 2;
    for power in 1..k {
        let data = fixed_points(action, power).expect("nontrivial element");
        even += orbit_count(action, &data.points);
    }
    let odd = if k == 1 { 2 } else { invariant_h1_rank(action) };
    HPDims { even, odd }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Independent counting route: the stringy orbifold Euler characteristic
/// (1/|G|) Σ_{g,h} χ(Fix(g) ∩ Fix(h)), with χ(T²) = 0 and χ(finite set)
/// its cardinality. Must equal even − odd of `hp_dimensions`.
pub fn euler_characteristic_cross_check(action: &CyclicAction) -> i64 {
    let k = action.order();
    let mut total: i64 = 0;
    for a in 0..k {
        for b in 0..k {
            // ⟨g^a, g^b⟩ = ⟨g^gcd(a,b,k)⟩ in a cyclic group
            let g = gcd(gcd(a as i64, b as i64), k as i64) as usize % k;
            if g == 0 {
                continue; // trivial subgroup fixes all of T²: χ = 0
            }
            let fix = fixed_points(action, g).expect("nontrivial");
            total += fix.count as i64;
        }
    }
    total / k as i64
}

/// K-theory ranks (K₀, K₁). Rationally the Chern character identifies
/// them with the cyclic ranks; this runs both counting pipelines and
/// insists they agree before returning.
pub fn k_ranks(action: &CyclicAction) -> Result<(usize, usize), OrbifoldError> {
    let k = action.order();
    if !matches!(k, 2 | 3 | 4 | 6) {
        return Err(OrbifoldError::Group(GroupError::UnsupportedOrder(k)));
    }
    let hp = hp_dimensions(action);
    let chi = euler_characteristic_cross_check(action);
    assert_eq!(
        hp.even as i64 - hp.odd as i64,
        chi,
        "two counting routes disagree"
    );
    Ok((hp.even, hp.odd))
}

/// Outcome of the θ-independence regression: counted ranks must be
/// identical at every θ, the β-automorphism defect of ×_θ must vanish,
/// and the G-average idempotent must have trace 1/|G|.
#[derive(Clone, Debug)]
pub struct ThetaIndependenceReport {
    pub thetas: Vec<f64>,
    pub dims: Vec<HPDims>,
    pub max_beta_defect: f64,
    pub max_idempotent_trace_error: f64,
    pub ranks_constant: bool,
}

/// Run the deformation pipeline at each θ and check that everything
/// counted is θ-independent while the numeric layer stays consistent.
pub fn theta_independence_regression(
    action: &CyclicAction,
    thetas: &[f64],
    sample_elements: &[(TorusElement, TorusElement)],
) -> ThetaIndependenceReport {
    use crate::group::{beta, beta_respects_star, crossed_mul, CrossedElement};

    let mut dims = Vec::new();
    let mut max_beta_defect = 0.0f64;
    let mut max_idem_err = 0.0f64;
    let k = action.order();
    for &theta in thetas {
        let j = DeformationMatrix::standard_2d(theta);
        dims.push(hp_dimensions(action));
        for (a, b) in sample_elements {
            for power in action.elements() {
                let defect = beta_respects_star(action, power, a, b, &j).sup_coeff();
                max_beta_defect = max_beta_defect.max(defect);
            }
        }
        // G-average idempotent p = (1/|G|) Σ_g (1, g) in A_θ ⋊ G
        let one = TorusElement::one(2);
        let p = CrossedElement::new(k, vec![one; k])
            .scale(num_complex::Complex64::new(1.0 / k as f64, 0.0));
        let act = |pw: usize, v: &TorusElement| beta(action, pw, v);
        let p2 = crossed_mul(&p, &p, act).expect("same group");
        max_idem_err = max_idem_err.max(p2.sub(&p).sup_norm());
        // canonical trace on the crossed product: τ(Σ (a_g, g)) = τ(a_e)
        let tr = trace(p.val(0));
        max_idem_err = max_idem_err.max((tr.re - 1.0 / k as f64).abs().max(tr.im.abs()));
    }
    let ranks_constant = dims.windows(2).all(|w| w[0] == w[1]);
    ThetaIndependenceReport {
        thetas: thetas.to_vec(),
        dims,
        max_beta_defect,
        max_idempotent_trace_error: max_idem_err,
        ranks_constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusElement;
    use crate::util::Rng64;
    use num_complex::Complex64;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn z2_fixed_points() {
        let z2 = CyclicAction::new(2).unwrap();
        let data = fixed_points(&z2, 1).unwrap();
        assert_eq!(data.count, 4);
        let expect = vec![
            [q(0, 1), q(0, 1)],
            [q(0, 1), q(1, 2)],
            [q(1, 2), q(0, 1)],
            [q(1, 2), q(1, 2)],
        ];
        assert_eq!(data.points, expect);
    }

    #[test]
    fn fixed_point_counts_by_group() {
        let counts: Vec<(usize, Vec<usize>)> = vec![
            (2, vec![4]),
            (3, vec![3, 3]),
            (4, vec![2, 4, 2]),
            (6, vec![1, 3, 4, 3, 1]),
        ];
        for (k, per_power) in counts {
            let g = CyclicAction::new(k).unwrap();
            for (power, &expect) in (1..k).zip(&per_power) {
                let data = fixed_points(&g, power).unwrap();
                assert_eq!(data.count, expect, "k = {k}, power = {power}");
            }
        }
    }

    #[test]
    fn identity_is_rejected() {
        let z4 = CyclicAction::new(4).unwrap();
        assert_eq!(
            fixed_points(&z4, 0).unwrap_err(),
            OrbifoldError::IdentityElement
        );
    }

    #[test]
    fn hp_dimensions_match_reported_constants() {
        // trivial group: de Rham cohomology of T²
        assert_eq!(
            hp_dimensions(&CyclicAction::new(1).unwrap()),
            HPDims { even: 2, odd: 2 }
        );
        let expectations = [(2usize, 6usize), (3, 8), (4, 9), (6, 10)];
        for (k, even) in expectations {
            let dims = hp_dimensions(&CyclicAction::new(k).unwrap());
            assert_eq!(dims, HPDims { even, odd: 0 }, "k = {k}");
        }
    }

    #[test]
    fn z2_orbit_detail() {
        // identity contributes 2; g = −I contributes 4 singleton orbits
        let z2 = CyclicAction::new(2).unwrap();
        let data = fixed_points(&z2, 1).unwrap();
        assert_eq!(orbit_count(&z2, &data.points), 4);
    }

    #[test]
    fn z4_orbit_detail() {
        // Fix(g²) = {0, ½}² splits as {0}, {(½,½)}, {(½,0),(0,½)}
        let z4 = CyclicAction::new(4).unwrap();
        let data = fixed_points(&z4, 2).unwrap();
        assert_eq!(data.count, 4);
        assert_eq!(orbit_count(&z4, &data.points), 3);
    }

    #[test]
    fn euler_route_agrees() {
        for k in [2usize, 3, 4, 6] {
            let g = CyclicAction::new(k).unwrap();
            let dims = hp_dimensions(&g);
            let chi = euler_characteristic_cross_check(&g);
            assert_eq!(dims.even as i64 - dims.odd as i64, chi, "k = {k}");
        }
    }

    #[test]
    fn k_ranks_match_reported() {
        let expectations = [(2usize, 6usize), (3, 8), (4, 9), (6, 10)];
        for (k, k0) in expectations {
            let g = CyclicAction::new(k).unwrap();
            assert_eq!(k_ranks(&g).unwrap(), (k0, 0), "k = {k}");
        }
        assert!(k_ranks(&CyclicAction::new(1).unwrap()).is_err());
    }

    #[test]
    fn theta_regression_is_flat() {
        let mut rng = Rng64::new(10);
        let mk = |rng: &mut Rng64| {
            let coeffs: Vec<(Vec<i64>, Complex64)> = (0..3)
                .map(|_| {
                    (
                        vec![rng.int_in(-2, 2), rng.int_in(-2, 2)],
                        rng.complex_unit_box(),
                    )
                })
                .collect();
            TorusElement::from_coeffs(2, &coeffs)
        };
        let samples: Vec<(TorusElement, TorusElement)> =
            (0..4).map(|_| (mk(&mut rng), mk(&mut rng))).collect();
        for k in [2usize, 3, 4, 6] {
            let g = CyclicAction::new(k).unwrap();
            let report = theta_independence_regression(
                &g,
                &[0.0, 0.3, std::f64::consts::FRAC_1_SQRT_2],
                &samples,
            );
            assert!(report.ranks_constant);
            assert_eq!(report.max_beta_defect, 0.0, "exact at every θ");
            assert!(report.max_idempotent_trace_error <= 1e-12);
        }
    }
}
