//! The verification suites behind `verify`: each runs a family of
//! checked identities at desk scale and reports measured defects. Suite
//! contents mirror the library's oracle tests at the configured sizes.

use std::collections::HashMap;

use ncg_core::clifford::{clifford_mul, h_derivative_polys, wave_operator, CliffordElement};
use ncg_core::crossed::{
    double_crossed_mul, gamma_crossed_mul, kernel_group_action_int, kernel_group_action_real,
    sample_interpolated, sample_periodic, takai_map, theta_j, torus_grid_group_action,
    RnCrossedElement, TorusTranslation, TrivialAction,
};
use ncg_core::grid::{
    decay_order, osc_integral, GridFunction, GridSpec, OscIntegrand, QuadratureSpec,
};
use ncg_core::group::{
    beta, beta_respects_star, cocycle_omega, crossed_mul, crossed_seminorm, g_index,
    rho_stabilization, CrossedElement, CyclicAction, GradedGSpace, RGClass,
};
use ncg_core::linalg::{expm, CMatrix};
use ncg_core::oracles::pauli_rep;
use ncg_core::orbifold::{
    euler_characteristic_cross_check, fixed_points, hp_dimensions, k_ranks, orbit_count,
    theta_independence_regression,
};
use ncg_core::report::{SuiteReport, VerifyRecord};
use ncg_core::symbol::{
    apply_d, build_chi, check_d_invariance, dirac_commutator_kernel, dirac_defect_kernel,
    sigma_symbol, symbol_adjoint, symbol_compose, symbol_derivative_decay, torus_pairing,
    NormalizingFunction, Symbol,
};
use ncg_core::torus::{
    smooth_seminorm, star_cross_terms, star_j, star_phase, trace, DeformationMatrix, TorusElement,
};
use ncg_core::util::{e2pi, Rng64};
use ncg_core::Complex64;

use crate::config::RunConfig;

fn rec(lemma_id: &str, l: f64, h: f64, defect: f64, ratios: Vec<f64>, pass: bool) -> VerifyRecord {
    VerifyRecord {
        lemma_id: lemma_id.to_string(),
        grid_l: l,
        grid_h: h,
        defect,
        refinement_ratios: ratios,
        pass,
    }
}

fn report(cfg: &RunConfig, suite: &str, records: Vec<VerifyRecord>) -> SuiteReport {
    SuiteReport {
        suite: suite.to_string(),
        config_hash: cfg.hash(),
        records,
    }
}

/// Ratio-or-converged refinement contract: every halving must improve
/// the defect by `ratio` unless it is already below `floor`.
fn refinement_ok(defects: &[f64], ratio: f64, floor: f64) -> bool {
    defects
        .windows(2)
        .all(|w| w[0] / w[1] >= ratio || w[1] <= floor)
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Option<SuiteReport> {
    match name {
        "clifford" => Some(clifford_suite(cfg)),
        "chi" => Some(chi_suite(cfg)),
        "sigma-decay" => Some(sigma_decay_suite(cfg)),
        "dirac-lemmas" => Some(dirac_suite(cfg)),
        "takai" => Some(takai_suite(cfg)),
        "theta-j" => Some(theta_suite(cfg)),
        "star-product" => Some(star_suite(cfg)),
        "crossed-g" => Some(crossed_g_suite(cfg)),
        "rg-index" => Some(rg_index_suite(cfg)),
        "hp-dims" => Some(hp_suite(cfg)),
        _ => None,
    }
}

// ─── clifford ────────────────────────────────────────────────────────

fn clifford_suite(cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    // wave operator vs generic matrix exponential in the fixed
    // representation: 100 random samples over n ∈ {1, 2, 3}
    let mut rng = Rng64::new(23);
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        let gens = pauli_rep(n);
        for _ in 0..34 {
            let s = rng.symmetric(2.0);
            let xi: Vec<f64> = (0..n).map(|_| rng.symmetric(3.0)).collect();
            let mut m = CMatrix::zeros(gens[0].rows(), gens[0].cols());
            for (g, &x) in gens.iter().zip(&xi) {
                m = m.add(&g.scale(Complex64::new(x, 0.0)));
            }
            let exact = expm(&m.scale(Complex64::new(0.0, s)));
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
            worst = worst.max(rep_wave.sub(&exact).max_abs());
        }
    }
    let tol = cfg.tol("wave_oracle");
    records.push(rec(
        "wave-vs-matrix-exponential",
        0.0,
        0.0,
        worst,
        vec![],
        worst <= tol,
    ));

    // group law / unitarity
    let mut unit_worst = 0.0f64;
    for _ in 0..50 {
        let s = rng.symmetric(3.0);
        let xi = [rng.symmetric(4.0), rng.symmetric(4.0)];
        let w = wave_operator(2, s, &xi).unwrap();
        let winv = wave_operator(2, -s, &xi).unwrap();
        let defect = clifford_mul(&w, &winv)
            .unwrap()
            .sub(&CliffordElement::one(2))
            .norm();
        unit_worst = unit_worst.max(defect);
    }
    records.push(rec(
        "wave-unitarity",
        0.0,
        0.0,
        unit_worst,
        vec![],
        unit_worst <= 1e-12,
    ));

    // derivative-polynomial degree bounds through order 12
    let degree_ok = (0..=12).all(|n| h_derivative_polys(n).degree_bound_holds());
    records.push(rec(
        "h-derivative-degree-bounds",
        0.0,
        0.0,
        0.0,
        vec![],
        degree_ok,
    ));
    report(cfg, "clifford", records)
}

// ─── chi ─────────────────────────────────────────────────────────────

fn chi_for(cfg: &RunConfig) -> NormalizingFunction {
    build_chi(cfg.chi_sigma).expect("default normalizing function validates")
}

fn chi_suite(cfg: &RunConfig) -> SuiteReport {
    let chi = chi_for(cfg);
    let mut records = Vec::new();
    // oddness is bitwise by construction
    let mut odd_defect = 0.0f64;
    for i in 1..200 {
        let l = 0.25 * i as f64;
        odd_defect = odd_defect.max((chi.chi(-l) + chi.chi(l)).abs());
    }
    records.push(rec(
        "chi-oddness",
        0.0,
        0.0,
        odd_defect,
        vec![],
        odd_defect <= 1e-12,
    ));
    // positivity on (0, 50]
    let mut min_val = f64::INFINITY;
    let mut l = 0.05;
    while l <= 50.0 {
        min_val = min_val.min(chi.chi(l));
        l += 0.05;
    }
    records.push(rec(
        "chi-positive",
        0.0,
        0.0,
        -min_val.min(0.0),
        vec![],
        min_val > 0.0,
    ));
    // weighted tail (1+λ)⁶ |χ²−1| on [5, 50]
    let mut sup = 0.0f64;
    let mut l = 5.0;
    while l <= 50.0 {
        let c = chi.chi(l);
        sup = sup.max((1.0 + l).powi(6) * (c * c - 1.0).abs());
        l += 0.25;
    }
    let bound = cfg.tol("chi_tail_weighted");
    records.push(rec(
        "chi-squared-tail-weighted",
        0.0,
        0.0,
        sup,
        vec![],
        sup <= bound,
    ));
    report(cfg, "chi", records)
}

// ─── sigma-decay ─────────────────────────────────────────────────────

fn sigma_decay_suite(cfg: &RunConfig) -> SuiteReport {
    let chi = chi_for(cfg);
    let threshold = cfg.tol("sigma_decay_threshold");
    let mut records = Vec::new();
    let radial_spec = GridSpec::uniform(2, 42.0, 0.5).unwrap();
    for axis in 0..2usize {
        let rep = symbol_derivative_decay(&chi, 2, axis, (5.0, 40.0), 0.25, &radial_spec).unwrap();
        let pass = rep.along_axis.order >= threshold || rep.along_axis.beyond_range;
        records.push(rec(
            &format!("dsigma-axis-{}-ray-decay", axis + 1),
            42.0,
            0.25,
            rep.along_axis.order,
            vec![],
            pass,
        ));
        // the full radial rate sees the angular 1/|ξ| part of the
        // order-zero symbol's derivative; reported, not gated
        records.push(rec(
            &format!("dsigma-axis-{}-radial-rate(informational)", axis + 1),
            42.0,
            0.5,
            rep.radial.order,
            vec![],
            true,
        ));
    }
    // order-zero seminorm condition on shells
    let sigma = sigma_symbol(&chi, 2);
    let worst = sigma.seminorm_estimates(2, &[1.0, 5.0, 20.0, 40.0], 4, 0.02);
    let finite = worst.iter().all(|w| w.is_finite() && *w < 50.0);
    records.push(rec(
        "sigma-order-zero-seminorms",
        0.0,
        0.0,
        worst.iter().fold(0.0f64, |a, &b| a.max(b)),
        vec![],
        finite,
    ));
    let principal = sigma.principal_part_cauchy(8, 1e-3);
    records.push(rec(
        "sigma-principal-part-cauchy",
        0.0,
        0.0,
        0.0,
        vec![],
        principal,
    ));
    report(cfg, "sigma-decay", records)
}

// ─── dirac-lemmas ────────────────────────────────────────────────────

fn dirac_suite(cfg: &RunConfig) -> SuiteReport {
    let chi = chi_for(cfg);
    let threshold = cfg.tol("kernel_decay_threshold");
    let mut records = Vec::new();
    let eps = cfg.epsilons.clone();

    // commutator kernel for a = U_{(1,0)}: σ = 2 keeps the transform
    // support well inside the decay window at an affordable grid
    let chi2 = build_chi(2.0).unwrap();
    let primal = GridSpec::uniform(2, 12.0, 0.2).unwrap();
    let a = TorusElement::unitary(&[1, 0]);
    let k = dirac_commutator_kernel(&a, &chi2, &primal, &eps).unwrap();
    let rep = decay_order(&k, (3.0, 10.0), 6).unwrap();
    records.push(rec(
        "commutator-kernel-decay",
        12.0,
        0.2,
        rep.order,
        vec![],
        rep.order >= threshold || rep.beyond_range,
    ));
    // α-invariant a commutes exactly
    let k0 = dirac_commutator_kernel(&TorusElement::one(2), &chi2, &primal, &eps).unwrap();
    let zero = k0.sup_norm();
    records.push(rec(
        "commutator-invariant-element",
        12.0,
        0.2,
        zero,
        vec![],
        zero == 0.0,
    ));

    // defect kernel at the default σ and a fine dual box
    let primal_fine = GridSpec::uniform(2, 12.0, 0.05).unwrap();
    let kd = dirac_defect_kernel(&TorusElement::one(2), &chi, &primal_fine).unwrap();
    let repd = decay_order(&kd, (4.0, 11.0), 6).unwrap();
    records.push(rec(
        "defect-kernel-decay",
        12.0,
        0.05,
        repd.order,
        vec![],
        repd.order >= threshold || repd.beyond_range,
    ));

    // the −I symbol defect vanishes identically (exact sign flips)
    let z2 = CyclicAction::new(2).unwrap();
    let mut rng_inv = Rng64::new(7);
    let mut minus_one_defect = 0.0f64;
    for _ in 0..50 {
        let xi = [rng_inv.symmetric(2.0), rng_inv.symmetric(2.0)];
        let direct = ncg_core::clifford::chi_of_clifford(&chi.chi_data(), &xi).unwrap();
        let rotated =
            ncg_core::clifford::chi_of_clifford(&chi.chi_data(), &[-xi[0], -xi[1]]).unwrap();
        let rows = vec![vec![-1.0, 0.0], vec![0.0, -1.0]];
        let pulled = rotated.apply_orthogonal(&rows);
        minus_one_defect = minus_one_defect.max(pulled.sub(&direct).norm());
    }
    let _ = z2;
    records.push(rec(
        "sigma-invariance-minus-one-exact",
        0.0,
        0.0,
        minus_one_defect,
        vec![],
        minus_one_defect == 0.0,
    ));

    // G-invariance of the dual-Dirac operator across all four groups
    let inv_tol = cfg.tol("d_invariance");
    for &kord in &cfg.groups {
        let group = CyclicAction::new(kord).unwrap();
        let repg = check_d_invariance(&chi, &group, 100, 99).unwrap();
        let worst = repg.symbol_defect.max(repg.transform_defect);
        records.push(rec(
            &format!("d-invariance-z{kord}"),
            8.0,
            0.25,
            worst,
            vec![],
            worst <= inv_tol,
        ));
    }

    // composition and adjoint expansions: operator-level defect falls
    // monotonically in the truncation order on the torus test family
    let spec = GridSpec::uniform(1, 8.0, 0.25).unwrap();
    let action = TorusTranslation { scale: 1.0 };
    let u = RnCrossedElement::new(
        GridFunction::sample(&spec, |x| {
            TorusElement::one(1).scale(Complex64::new(
                (-std::f64::consts::PI * x[0] * x[0]).exp(),
                0.0,
            ))
        }),
        action.clone(),
    );
    let r1 = Symbol::new(0.0, 1, |xi: &[f64]| {
        TorusElement::unitary(&[1]).scale(Complex64::new((-0.5 * xi[0] * xi[0]).exp(), 0.0))
    });
    let r2 = Symbol::new(0.0, 1, |xi: &[f64]| {
        TorusElement::unitary(&[-1]).scale(Complex64::new(
            (-0.8 * (xi[0] - 0.3) * (xi[0] - 0.3)).exp(),
            0.0,
        ))
    });
    let sequential = apply_d(&r1, &apply_d(&r2, &u).unwrap()).unwrap();
    let mut defects = Vec::new();
    for n in 1..=3usize {
        let comp = symbol_compose(&r1, &r2, n, 0.02);
        let composed = apply_d(&comp, &u).unwrap();
        defects.push(composed.data.sub(&sequential.data).unwrap().sup_norm());
    }
    let monotone = defects[0] > defects[1] && defects[1] > defects[2];
    records.push(rec(
        "composition-expansion-monotone",
        8.0,
        0.25,
        defects[2],
        vec![defects[0] / defects[1], defects[1] / defects[2]],
        monotone,
    ));
    // the adjoint expansion's remainder scales with the mode shift times
    // the symbol's derivative scale, so the test symbol varies slowly
    let rho_slow = Symbol::new(0.0, 1, |xi: &[f64]| {
        TorusElement::unitary(&[1]).scale(Complex64::new((-0.01 * xi[0] * xi[0]).exp(), 0.0))
    });
    let v = RnCrossedElement::new(
        GridFunction::sample(&spec, |x| {
            TorusElement::unitary(&[1]).scale(Complex64::new(
                (-std::f64::consts::PI * (x[0] + 0.3) * (x[0] + 0.3)).exp(),
                0.0,
            ))
        }),
        action,
    );
    let lhs = torus_pairing(&apply_d(&rho_slow, &u).unwrap(), &v);
    assert!(lhs.norm() > 1e-3, "pairing must be nonvacuous");
    let mut pairing_defects = Vec::new();
    for n in 1..=3usize {
        let rho_adj = symbol_adjoint(&rho_slow, n, 0.02);
        let rhs = torus_pairing(&u, &apply_d(&rho_adj, &v).unwrap());
        pairing_defects.push((lhs - rhs).norm());
    }
    let pairing_defect = pairing_defects[2];
    let monotone_adj =
        pairing_defects[0] >= pairing_defects[1] && pairing_defects[1] >= pairing_defects[2];
    records.push(rec(
        "adjoint-pairing",
        8.0,
        0.25,
        pairing_defect,
        vec![
            pairing_defects[0] / pairing_defects[1].max(1e-300),
            pairing_defects[1] / pairing_defects[2].max(1e-300),
        ],
        monotone_adj && pairing_defect <= 1e-4 * (1.0 + lhs.norm()),
    ));
    report(cfg, "dirac-lemmas", records)
}

// ─── takai ───────────────────────────────────────────────────────────

fn takai_mult_defect(l: f64, h: f64) -> f64 {
    let primal = GridSpec::uniform(1, l, h).unwrap();
    let spec = primal.dual().product(&primal);
    let f = GridFunction::sample(&spec, |c| {
        Complex64::new(
            (-std::f64::consts::PI * c[0] * c[0] * 2.0).exp()
                * (-c[1].abs() - 2.0 * c[1] * c[1]).exp(),
            0.0,
        )
    });
    let g = GridFunction::sample(&spec, |c| {
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
    lhs.sub(&rhs).unwrap().sup_norm() / rhs.sup_norm().max(1e-30)
}

fn takai_product_grid(l: f64, h: f64) -> GridSpec {
    let primal = GridSpec::uniform(2, l, h).unwrap();
    primal.dual().product(&primal)
}

fn takai_lattice_equiv_defect(kord: usize, l: f64, h: f64) -> f64 {
    let group = CyclicAction::new(kord).unwrap();
    let g = group.mat(1);
    let g_inv = group.mat(group.inverse_power(1));
    let gt = [[g[0][0], g[1][0]], [g[0][1], g[1][1]]];
    let spec = takai_product_grid(l, h);
    let closed = |c: &[f64]| {
        let t2 = c[0] * c[0] + c[1] * c[1];
        let s2 = c[2] * c[2] + c[3] * c[3];
        Complex64::new(
            (-std::f64::consts::PI * t2 * 3.0).exp() * (-1.5 * s2).exp(),
            0.0,
        )
    };
    let f = GridFunction::sample(&spec, |c| closed(c));
    let orthogonal = {
        let m = g_inv;
        m[0][0] * m[0][0] + m[1][0] * m[1][0] == 1
            && m[0][1] * m[0][1] + m[1][1] * m[1][1] == 1
            && m[0][0] * m[0][1] + m[1][0] * m[1][1] == 0
    };
    let moved_vals: Vec<Complex64> = (0..spec.total_points())
        .map(|flat| {
            let c = spec.coord_flat(flat);
            let t = [
                (gt[0][0] as f64) * c[0] + (gt[0][1] as f64) * c[1],
                (gt[1][0] as f64) * c[0] + (gt[1][1] as f64) * c[1],
            ];
            let sv = [
                (g_inv[0][0] as f64) * c[2] + (g_inv[0][1] as f64) * c[3],
                (g_inv[1][0] as f64) * c[2] + (g_inv[1][1] as f64) * c[3],
            ];
            let p = [t[0], t[1], sv[0], sv[1]];
            if orthogonal {
                sample_periodic(&f, &p)
            } else {
                sample_interpolated(&f, &p)
            }
        })
        .collect();
    let moved = GridFunction::from_values(spec.clone(), moved_vals).unwrap();
    let lhs = kernel_group_action_int(g_inv, &takai_map(&f, &TrivialAction, 2).unwrap());
    let rhs = takai_map(&moved, &TrivialAction, 2).unwrap();
    lhs.sub(&rhs).unwrap().sup_norm() / rhs.sup_norm().max(1e-30)
}

fn refine_steps(cfg: &RunConfig) -> Vec<f64> {
    (0..cfg.refine)
        .map(|i| 0.5 / f64::powi(2.0, i as i32))
        .collect()
}

fn takai_suite(cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    let tol = cfg.tol("takai_defect");
    let ratio = cfg.tol("refinement_ratio");
    // multiplicativity with the refinement contract
    let steps = refine_steps(cfg);
    let defects: Vec<f64> = steps.iter().map(|&h| takai_mult_defect(4.0, h)).collect();
    let ratios: Vec<f64> = defects.windows(2).map(|w| w[0] / w[1]).collect();
    let last = *defects.last().unwrap();
    let pass = last <= tol && refinement_ok(&defects, ratio, tol / 100.0);
    records.push(rec(
        "phi-multiplicativity",
        4.0,
        *steps.last().unwrap(),
        last,
        ratios,
        pass,
    ));

    // equivariance for the lattice actions; −I must be exact
    for &kord in &cfg.groups {
        let defect = takai_lattice_equiv_defect(kord, 5.0, 0.25);
        let pass = if kord == 2 {
            defect <= 1e-12
        } else {
            defect <= tol
        };
        records.push(rec(
            &format!("phi-equivariance-z{kord}"),
            5.0,
            0.25,
            defect,
            vec![],
            pass,
        ));
    }

    // the interpolated hexagonal rotation carries the refinement ratios
    let interp: Vec<f64> = steps
        .iter()
        .map(|&h| {
            let group = CyclicAction::new(6).unwrap();
            let r = group.orthogonal_mat(1);
            let rinv = group.orthogonal_mat(group.inverse_power(1));
            let spec = takai_product_grid(4.0, h);
            let closed = |c: &[f64]| {
                let t2 = c[0] * c[0] + c[1] * c[1];
                let s2 = c[2] * c[2] + c[3] * c[3];
                Complex64::new(
                    (-std::f64::consts::PI * t2 * 2.0).exp() * (-s2).exp() * (1.0 + 0.3 * c[2]),
                    0.0,
                )
            };
            let f = GridFunction::sample(&spec, |c| closed(c));
            let rt = [[r[0][0], r[1][0]], [r[0][1], r[1][1]]];
            let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
            let ri = [
                [r[1][1] / det, -r[0][1] / det],
                [-r[1][0] / det, r[0][0] / det],
            ];
            let moved = GridFunction::sample(&spec, |c| {
                let t = [
                    rt[0][0] * c[0] + rt[0][1] * c[1],
                    rt[1][0] * c[0] + rt[1][1] * c[1],
                ];
                let sv = [
                    ri[0][0] * c[2] + ri[0][1] * c[3],
                    ri[1][0] * c[2] + ri[1][1] * c[3],
                ];
                closed(&[t[0], t[1], sv[0], sv[1]])
            });
            let lhs = kernel_group_action_real(&rinv, &takai_map(&f, &TrivialAction, 2).unwrap());
            let rhs = takai_map(&moved, &TrivialAction, 2).unwrap();
            lhs.sub(&rhs).unwrap().sup_norm() / rhs.sup_norm().max(1e-30)
        })
        .collect();
    let iratios: Vec<f64> = interp.windows(2).map(|w| w[0] / w[1]).collect();
    let ipass = iratios.iter().all(|&r| r >= ratio);
    records.push(rec(
        "phi-equivariance-z6-interpolated-refinement",
        4.0,
        *steps.last().unwrap(),
        *interp.last().unwrap(),
        iratios,
        ipass,
    ));
    report(cfg, "takai", records)
}

// ─── theta-j ─────────────────────────────────────────────────────────

fn theta_smooth_mode(spec: &GridSpec, mode: [i64; 2], center: f64) -> GridFunction<TorusElement> {
    GridFunction::sample(spec, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        TorusElement::unitary(&mode).scale(Complex64::new(
            (-(x[0] - center) * (x[0] - center) - r2).exp(),
            0.0,
        ))
    })
}

fn theta_kinked_mode(spec: &GridSpec, mode: [i64; 2], center: f64) -> GridFunction<TorusElement> {
    GridFunction::sample(spec, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        TorusElement::unitary(&mode).scale(Complex64::new(
            (-(x[0] - center).abs() - 1.5 * r2).exp(),
            0.0,
        ))
    })
}

fn theta_hom_defect(l: f64, h: f64, j: &DeformationMatrix, kinked: bool) -> f64 {
    let spec = GridSpec::uniform(2, l, h).unwrap();
    let action = TorusTranslation { scale: 1.0 };
    let mk = if kinked {
        theta_kinked_mode
    } else {
        theta_smooth_mode
    };
    let f = RnCrossedElement::new(mk(&spec, [1, 0], 0.0), action.clone());
    let g = RnCrossedElement::new(mk(&spec, [0, 1], 0.25), action);
    let prod_j = f
        .twisted_conv_with(&g, |a, b| star_j(a, b, j).unwrap())
        .unwrap();
    let lhs = theta_j(&prod_j, j).unwrap();
    let tf = theta_j(&f, j).unwrap();
    let tg = theta_j(&g, j).unwrap();
    let rhs = tf.twisted_conv(&tg).unwrap();
    lhs.data.sub(&rhs.data).unwrap().sup_norm() / rhs.data.sup_norm().max(1e-30)
}

fn theta_suite(cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    let j = DeformationMatrix::standard_2d(0.3);
    let id_tol = cfg.tol("theta_identity");
    let tol = cfg.tol("theta_defect");
    let ratio = cfg.tol("refinement_ratio");

    // J = 0 is the identity at the default grid
    let spec = GridSpec::uniform(2, cfg.grid_l, cfg.grid_h).unwrap();
    let f = RnCrossedElement::new(
        theta_smooth_mode(&spec, [1, 0], 0.0),
        TorusTranslation { scale: 1.0 },
    );
    let out = theta_j(&f, &DeformationMatrix::zero(2)).unwrap();
    let id_defect = out.data.sub(&f.data).unwrap().sup_norm();
    records.push(rec(
        "theta-zero-identity",
        cfg.grid_l,
        cfg.grid_h,
        id_defect,
        vec![],
        id_defect <= id_tol,
    ));

    // homomorphism defect at the default grid (smooth data)
    let hom_default = theta_hom_defect(cfg.grid_l, cfg.grid_h, &j, false);
    records.push(rec(
        "theta-homomorphism-default-grid",
        cfg.grid_l,
        cfg.grid_h,
        hom_default,
        vec![],
        hom_default <= tol,
    ));

    // refinement contract on kinked data
    let steps = refine_steps(cfg);
    let defects: Vec<f64> = steps
        .iter()
        .map(|&h| theta_hom_defect(4.0, h, &j, true))
        .collect();
    let ratios: Vec<f64> = defects.windows(2).map(|w| w[0] / w[1]).collect();
    let last = *defects.last().unwrap();
    let rpass = last <= tol && refinement_ok(&defects, ratio, tol / 100.0);
    records.push(rec(
        "theta-homomorphism-refinement",
        4.0,
        *steps.last().unwrap(),
        last,
        ratios,
        rpass,
    ));

    // equivariance under the combined lattice actions
    let espec = GridSpec::uniform(2, 6.0, 0.25).unwrap();
    let action = TorusTranslation { scale: 1.0 };
    let ef = RnCrossedElement::new(theta_smooth_mode(&espec, [1, 0], 0.0), action.clone());
    for &kord in &cfg.groups {
        let group = CyclicAction::new(kord).unwrap();
        let mut worst = 0.0f64;
        for power in group.elements() {
            let lhs = torus_grid_group_action(&group, power, &theta_j(&ef, &j).unwrap().data);
            let moved = RnCrossedElement::new(
                torus_grid_group_action(&group, power, &ef.data),
                action.clone(),
            );
            let rhs = theta_j(&moved, &j).unwrap().data;
            worst = worst.max(lhs.sub(&rhs).unwrap().sup_norm());
        }
        records.push(rec(
            &format!("theta-equivariance-z{kord}"),
            6.0,
            0.25,
            worst,
            vec![],
            worst <= tol,
        ));
    }
    report(cfg, "theta-j", records)
}

// ─── star-product ────────────────────────────────────────────────────

fn star_block_integral(a: f64, b: f64) -> Complex64 {
    let spec = GridSpec::uniform(2, 12.0, 1.0 / 64.0).unwrap();
    let total = spec.total_points();
    let mut phase = Vec::with_capacity(total);
    for flat in 0..total {
        let p = spec.coord_flat(flat);
        phase.push(a * p[0] + p[0] * p[1] - b * p[1]);
    }
    let integrand = OscIntegrand {
        grid: spec,
        amplitude: vec![Complex64::new(1.0, 0.0); total],
        phase,
        taper: Some(0.5),
    };
    let quad = QuadratureSpec {
        epsilons: vec![0.004, 0.002, 0.001],
        richardson_order: 2,
    };
    osc_integral(&integrand, &quad).unwrap().value
}

fn star_suite(cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    let mut rng = Rng64::new(404);

    // bicharacter cocycle identity: exact integer phase arithmetic
    let mut exact = true;
    for _ in 0..200 {
        let m = [rng.int_in(-9, 9), rng.int_in(-9, 9)];
        let n = [rng.int_in(-9, 9), rng.int_in(-9, 9)];
        let p = [rng.int_in(-9, 9), rng.int_in(-9, 9)];
        let mn = [m[0] + n[0], m[1] + n[1]];
        let np = [n[0] + p[0], n[1] + p[1]];
        let lhs: Vec<i64> = star_cross_terms(&m, &n)
            .iter()
            .zip(star_cross_terms(&mn, &p))
            .map(|(a, b)| a + b)
            .collect();
        let rhs: Vec<i64> = star_cross_terms(&n, &p)
            .iter()
            .zip(star_cross_terms(&m, &np))
            .map(|(a, b)| a + b)
            .collect();
        exact &= lhs == rhs;
    }
    records.push(rec(
        "associativity-exact-phase-arithmetic",
        0.0,
        0.0,
        0.0,
        vec![],
        exact,
    ));

    // coefficient-level associativity on random elements
    let jm = DeformationMatrix::standard_2d(0.29);
    let mut assoc_worst = 0.0f64;
    for _ in 0..20 {
        let mk = |rng: &mut Rng64| {
            let coeffs: Vec<(Vec<i64>, Complex64)> = (0..3)
                .map(|_| {
                    (
                        vec![rng.int_in(-3, 3), rng.int_in(-3, 3)],
                        rng.complex_unit_box(),
                    )
                })
                .collect();
            TorusElement::from_coeffs(2, &coeffs)
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        let c = mk(&mut rng);
        let lhs = star_j(&star_j(&a, &b, &jm).unwrap(), &c, &jm).unwrap();
        let rhs = star_j(&a, &star_j(&b, &c, &jm).unwrap(), &jm).unwrap();
        assoc_worst = assoc_worst.max(lhs.sub(&rhs).sup_coeff());
    }
    records.push(rec(
        "associativity-coefficients",
        0.0,
        0.0,
        assoc_worst,
        vec![],
        assoc_worst <= 1e-12,
    ));

    // oscillatory-integral oracle vs the frozen phase formula,
    // |m|, |n| ≤ 3 in sup norm over the two factorized blocks
    let jval = 0.3;
    let jmat = DeformationMatrix::standard_2d(jval);
    let mut cache: HashMap<(u64, u64), Complex64> = HashMap::new();
    let block = |a: f64, b: f64, cache: &mut HashMap<(u64, u64), Complex64>| {
        let key = (a.to_bits(), b.to_bits());
        if let Some(&v) = cache.get(&key) {
            return v;
        }
        let v = star_block_integral(a, b);
        cache.insert(key, v);
        v
    };
    let mut phase_worst = 0.0f64;
    for m1 in -3..=3i64 {
        for m2 in -3..=3i64 {
            for n1 in -3..=3i64 {
                for n2 in -3..=3i64 {
                    let oracle = block(jval * m2 as f64, n1 as f64, &mut cache)
                        * block(-jval * m1 as f64, n2 as f64, &mut cache);
                    let formula = e2pi(star_phase(&jmat, &[m1, m2], &[n1, n2]));
                    phase_worst = phase_worst.max((oracle - formula).norm());
                }
            }
        }
    }
    let phase_tol = cfg.tol("star_phase");
    records.push(rec(
        "phase-vs-oscillatory-oracle",
        12.0,
        1.0 / 64.0,
        phase_worst,
        vec![],
        phase_worst <= phase_tol,
    ));

    // β is a ×_J-automorphism: exactly zero defect over all four groups
    // and 20 random J
    let mut beta_worst = 0.0f64;
    for _ in 0..20 {
        let jr = DeformationMatrix::standard_2d(rng.symmetric(0.9));
        for &kord in &cfg.groups {
            let group = CyclicAction::new(kord).unwrap();
            let mk = |rng: &mut Rng64| {
                let coeffs: Vec<(Vec<i64>, Complex64)> = (0..3)
                    .map(|_| {
                        (
                            vec![rng.int_in(-3, 3), rng.int_in(-3, 3)],
                            rng.complex_unit_box(),
                        )
                    })
                    .collect();
                TorusElement::from_coeffs(2, &coeffs)
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            for power in group.elements() {
                beta_worst =
                    beta_worst.max(beta_respects_star(&group, power, &a, &b, &jr).sup_coeff());
            }
        }
    }
    records.push(rec(
        "beta-automorphism-exact",
        0.0,
        0.0,
        beta_worst,
        vec![],
        beta_worst == 0.0,
    ));

    // trace symmetry under the deformed product is exact
    let mut trace_exact = true;
    for _ in 0..20 {
        let mk = |rng: &mut Rng64| {
            let coeffs: Vec<(Vec<i64>, Complex64)> = (0..4)
                .map(|_| {
                    (
                        vec![rng.int_in(-4, 4), rng.int_in(-4, 4)],
                        rng.complex_unit_box(),
                    )
                })
                .collect();
            TorusElement::from_coeffs(2, &coeffs)
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        trace_exact &= trace(&star_j(&a, &b, &jm).unwrap()) == trace(&star_j(&b, &a, &jm).unwrap());
    }
    records.push(rec(
        "trace-symmetry-exact",
        0.0,
        0.0,
        0.0,
        vec![],
        trace_exact,
    ));
    report(cfg, "star-product", records)
}

// ─── crossed-g ───────────────────────────────────────────────────────

fn crossed_g_suite(cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    let mut rng = Rng64::new(808);
    // unit and inverse relations in A ⋊ ℤ₄
    let group = CyclicAction::new(4).unwrap();
    let act = |p: usize, v: &TorusElement| beta(&group, p, v);
    let one = TorusElement::one(2);
    let g1 = CrossedElement::single(4, 1, one.clone());
    let g3 = CrossedElement::single(4, 3, one.clone());
    let prod = crossed_mul(&g1, &g3, act).unwrap();
    let unit_defect = prod.val(0).sub(&one).sup_coeff();
    records.push(rec(
        "crossed-unit-inverse",
        0.0,
        0.0,
        unit_defect,
        vec![],
        unit_defect == 0.0,
    ));

    // associativity with integer coefficients is exact
    let mut assoc = true;
    for _ in 0..10 {
        let mk = |rng: &mut Rng64| {
            let vals: Vec<TorusElement> = (0..4)
                .map(|_| {
                    let coeffs: Vec<(Vec<i64>, Complex64)> = (0..2)
                        .map(|_| {
                            (
                                vec![rng.int_in(-2, 2), rng.int_in(-2, 2)],
                                Complex64::new(rng.int_in(-3, 3) as f64, rng.int_in(-3, 3) as f64),
                            )
                        })
                        .collect();
                    TorusElement::from_coeffs(2, &coeffs)
                })
                .collect();
            CrossedElement::new(4, vals)
        };
        let x = mk(&mut rng);
        let y = mk(&mut rng);
        let z = mk(&mut rng);
        let lhs = crossed_mul(&crossed_mul(&x, &y, act).unwrap(), &z, act).unwrap();
        let rhs = crossed_mul(&x, &crossed_mul(&y, &z, act).unwrap(), act).unwrap();
        for p in 0..4 {
            assoc &= lhs.val(p).sub(rhs.val(p)).sup_coeff() == 0.0;
        }
    }
    records.push(rec(
        "crossed-associativity-exact",
        0.0,
        0.0,
        0.0,
        vec![],
        assoc,
    ));

    // seminorm of a support-permuting sum
    let m = [2i64, 1];
    let two = CrossedElement::new(
        2,
        vec![TorusElement::unitary(&m), TorusElement::unitary(&m)],
    );
    let z2 = CyclicAction::new(2).unwrap();
    let act2 = |p: usize, v: &TorusElement| beta(&z2, p, v);
    let r = 5.0f64.sqrt();
    let expect = 2.0 * (1.0 + r) * (1.0 + r);
    let got = crossed_seminorm(&two, 1.0, act2, |v| smooth_seminorm(v, 2));
    let sem_defect = (got - expect).abs();
    records.push(rec(
        "crossed-seminorm",
        0.0,
        0.0,
        sem_defect,
        vec![],
        sem_defect <= 1e-12,
    ));

    // cocycle bicharacter identity and the star-phase match
    let theta = 0.37;
    let jm = DeformationMatrix::standard_2d(theta);
    let mut coc_worst = 0.0f64;
    for _ in 0..50 {
        let x = [rng.int_in(-6, 6), rng.int_in(-6, 6)];
        let y = [rng.int_in(-6, 6), rng.int_in(-6, 6)];
        let z = [rng.int_in(-6, 6), rng.int_in(-6, 6)];
        let xy = [x[0] + y[0], x[1] + y[1]];
        let yz = [y[0] + z[0], y[1] + z[1]];
        let lhs = cocycle_omega(theta, x, y) * cocycle_omega(theta, xy, z);
        let rhs = cocycle_omega(theta, y, z) * cocycle_omega(theta, x, yz);
        coc_worst = coc_worst.max((lhs - rhs).norm());
        let p = star_j(&TorusElement::unitary(&x), &TorusElement::unitary(&y), &jm).unwrap();
        let mode = [x[0] + y[0], x[1] + y[1]];
        coc_worst = coc_worst.max((p.coeff(&mode) - cocycle_omega(theta, x, y)).norm());
    }
    let coc_tol = cfg.tol("cocycle");
    records.push(rec(
        "cocycle-bicharacter-and-star-match",
        0.0,
        0.0,
        coc_worst,
        vec![],
        coc_worst <= coc_tol,
    ));

    // [ρ]-stabilization is a homomorphism at matrix scale
    let k = 4;
    let repv: Vec<CMatrix> = (0..k)
        .map(|p| {
            let mut mtx = CMatrix::zeros(2, 2);
            mtx.set(0, 0, e2pi(p as f64 / k as f64));
            mtx.set(1, 1, Complex64::new(1.0, 0.0));
            mtx
        })
        .collect();
    let ug: Vec<CMatrix> = (0..k)
        .map(|p| {
            let mut mtx = CMatrix::zeros(2, 2);
            mtx.set(0, 0, Complex64::new(1.0, 0.0));
            mtx.set(1, 1, e2pi(p as f64 / k as f64));
            mtx
        })
        .collect();
    let act_m = |p: usize, v: &CMatrix| ug[p].mul(v).mul(&ug[(k - p) % k]);
    let big_u: Vec<CMatrix> = (0..k).map(|p| CMatrix::identity(2).kron(&ug[p])).collect();
    let act_stab = |p: usize, v: &CMatrix| big_u[p].mul(v).mul(&big_u[(k - p) % k]);
    let mut stab_worst = 0.0f64;
    for _ in 0..10 {
        let mk = |rng: &mut Rng64| {
            let vals: Vec<CMatrix> = (0..k)
                .map(|_| {
                    let mut mtx = CMatrix::zeros(2, 2);
                    for i in 0..2 {
                        for jj in 0..2 {
                            mtx.set(i, jj, rng.complex_unit_box());
                        }
                    }
                    mtx
                })
                .collect();
            CrossedElement::new(k, vals)
        };
        let x = mk(&mut rng);
        let y = mk(&mut rng);
        let xy = crossed_mul(&x, &y, act_m).unwrap();
        let lhs = rho_stabilization(&repv, &xy).unwrap();
        let rhs = crossed_mul(
            &rho_stabilization(&repv, &x).unwrap(),
            &rho_stabilization(&repv, &y).unwrap(),
            act_stab,
        )
        .unwrap();
        for p in 0..k {
            stab_worst = stab_worst.max(lhs.val(p).sub(rhs.val(p)).max_abs());
        }
    }
    let stab_tol = cfg.tol("stabilization");
    records.push(rec(
        "rho-stabilization-homomorphism",
        0.0,
        0.0,
        stab_worst,
        vec![],
        stab_worst <= stab_tol,
    ));
    report(cfg, "crossed-g", records)
}

// ─── rg-index ────────────────────────────────────────────────────────

fn random_equivariant(
    rng: &mut Rng64,
    dom: &GradedGSpace,
    cod: &GradedGSpace,
    ranks: &[usize],
) -> CMatrix {
    let k = dom.order();
    let mut t = CMatrix::zeros(cod.dim(), dom.dim());
    let mut dom_at = 0;
    let mut cod_at = 0;
    for j in 0..k {
        let (dm, cm, r) = (dom.mults()[j], cod.mults()[j], ranks[j]);
        let mut a = CMatrix::zeros(cm, cm);
        let mut b = CMatrix::zeros(dm, dm);
        for i in 0..cm {
            for l in 0..cm {
                a.set(i, l, rng.complex_unit_box());
            }
            a.set(i, i, a.get(i, i) + Complex64::new(3.0, 0.0));
        }
        for i in 0..dm {
            for l in 0..dm {
                b.set(i, l, rng.complex_unit_box());
            }
            b.set(i, i, b.get(i, i) + Complex64::new(3.0, 0.0));
        }
        let mut core = CMatrix::zeros(cm, dm);
        for i in 0..r {
            core.set(i, i, Complex64::new(1.0, 0.0));
        }
        let block = a.mul(&core).mul(&b);
        for i in 0..cm {
            for l in 0..dm {
                t.set(cod_at + i, dom_at + l, block.get(i, l));
            }
        }
        dom_at += dm;
        cod_at += cm;
    }
    t
}

fn rg_index_suite(cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    let mut rng = Rng64::new(2024);
    for &kord in &cfg.groups {
        let mut all_match = true;
        for _ in 0..25 {
            let dom_mults: Vec<usize> = (0..kord).map(|_| rng.int_in(1, 3) as usize).collect();
            let cod_mults: Vec<usize> = (0..kord).map(|_| rng.int_in(1, 3) as usize).collect();
            let dom = GradedGSpace::new(kord, dom_mults.clone());
            let cod = GradedGSpace::new(kord, cod_mults.clone());
            let ranks: Vec<usize> = (0..kord)
                .map(|j| rng.int_in(0, dom_mults[j].min(cod_mults[j]) as i64) as usize)
                .collect();
            let t = random_equivariant(&mut rng, &dom, &cod, &ranks);
            let idx = g_index(&t, &dom, &cod, 1e-8).unwrap();
            let expect = RGClass::from_mults(
                (0..kord)
                    .map(|j| dom_mults[j] as i64 - cod_mults[j] as i64)
                    .collect(),
            );
            all_match &= idx == expect;
        }
        records.push(rec(
            &format!("g-index-vs-rank-oracle-z{kord}"),
            0.0,
            0.0,
            0.0,
            vec![],
            all_match,
        ));
    }
    // homotopy invariance along a one-parameter equivariant family
    let k = 4;
    let dom = GradedGSpace::new(k, vec![2, 1, 2, 1]);
    let cod = GradedGSpace::new(k, vec![1, 1, 2, 2]);
    let t0 = random_equivariant(&mut rng, &dom, &cod, &[1, 1, 1, 1]);
    let s = random_equivariant(&mut rng, &dom, &cod, &[1, 1, 2, 1]);
    let base = g_index(&t0, &dom, &cod, 1e-8).unwrap();
    let homotopy_ok = (1..=5).all(|step| {
        let t = t0.add(&s.scale(Complex64::new(1e-11 * step as f64, 0.0)));
        g_index(&t, &dom, &cod, 1e-8).unwrap() == base
    });
    records.push(rec(
        "g-index-homotopy-invariance",
        0.0,
        0.0,
        0.0,
        vec![],
        homotopy_ok,
    ));

    // representation-ring laws
    let reg = RGClass::regular(4);
    let x = RGClass::from_mults(vec![2, -1, 0, 3]);
    let ring_ok = reg.tensor(&x) == RGClass::from_mults(vec![x.dim(); 4]);
    records.push(rec(
        "rg-ring-regular-absorbs",
        0.0,
        0.0,
        0.0,
        vec![],
        ring_ok,
    ));
    report(cfg, "rg-index", records)
}

// ─── hp-dims ─────────────────────────────────────────────────────────

fn hp_suite(cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    let expectations = [
        (1usize, 2usize, 2usize),
        (2, 6, 0),
        (3, 8, 0),
        (4, 9, 0),
        (6, 10, 0),
    ];
    for (k, even, odd) in expectations {
        let g = CyclicAction::new(k).unwrap();
        let dims = hp_dimensions(&g);
        let ok = dims.even == even && dims.odd == odd;
        records.push(rec(
            &format!("hp-dimensions-z{k}"),
            0.0,
            0.0,
            (dims.even as f64 - even as f64).abs() + (dims.odd as f64 - odd as f64).abs(),
            vec![],
            ok,
        ));
    }
    for (k, k0) in [(2usize, 6usize), (3, 8), (4, 9), (6, 10)] {
        let g = CyclicAction::new(k).unwrap();
        let ranks = k_ranks(&g).unwrap();
        let chi = euler_characteristic_cross_check(&g);
        let ok = ranks == (k0, 0) && chi == k0 as i64;
        records.push(rec(&format!("k-ranks-z{k}"), 0.0, 0.0, 0.0, vec![], ok));
    }
    // θ-independence regression across the deformation pipeline
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
    for &kord in &cfg.groups {
        let g = CyclicAction::new(kord).unwrap();
        let report_theta = theta_independence_regression(
            &g,
            &[0.0, 0.3, std::f64::consts::FRAC_1_SQRT_2],
            &samples,
        );
        let ok = report_theta.ranks_constant
            && report_theta.max_beta_defect == 0.0
            && report_theta.max_idempotent_trace_error <= 1e-12;
        records.push(rec(
            &format!("theta-independence-z{kord}"),
            0.0,
            0.0,
            report_theta
                .max_beta_defect
                .max(report_theta.max_idempotent_trace_error),
            vec![],
            ok,
        ));
    }
    report(cfg, "hp-dims", records)
}

/// Decay tables for external plotters: columns radius,value,fit_residual.
pub fn decay_table_csv(kind: &str, axis: usize, cfg: &RunConfig) -> Result<String, String> {
    use ncg_core::report::decay_csv;
    let chi = chi_for(cfg);
    match kind {
        "sigma-ray" => {
            if !(1..=2).contains(&axis) {
                return Err(format!("axis {axis} out of range 1..=2"));
            }
            let radial_spec = GridSpec::uniform(2, 42.0, 0.5).map_err(|e| e.to_string())?;
            let rep = symbol_derivative_decay(&chi, 2, axis - 1, (5.0, 40.0), 0.25, &radial_spec)
                .map_err(|e| e.to_string())?;
            Ok(decay_csv(&rep.along_axis.shells, rep.along_axis.residual))
        }
        "sigma-radial" => {
            if !(1..=2).contains(&axis) {
                return Err(format!("axis {axis} out of range 1..=2"));
            }
            let radial_spec = GridSpec::uniform(2, 42.0, 0.5).map_err(|e| e.to_string())?;
            let rep = symbol_derivative_decay(&chi, 2, axis - 1, (5.0, 40.0), 0.25, &radial_spec)
                .map_err(|e| e.to_string())?;
            Ok(decay_csv(&rep.radial.shells, rep.radial.residual))
        }
        "commutator" => {
            let chi2 = build_chi(2.0).map_err(|e| e.to_string())?;
            let primal = GridSpec::uniform(2, 12.0, 0.2).map_err(|e| e.to_string())?;
            let a = TorusElement::unitary(&[1, 0]);
            let k = dirac_commutator_kernel(&a, &chi2, &primal, &cfg.epsilons)
                .map_err(|e| e.to_string())?;
            let rep = decay_order(&k, (3.0, 10.0), 6).map_err(|e| e.to_string())?;
            Ok(decay_csv(&rep.shells, rep.residual))
        }
        "defect" => {
            let primal = GridSpec::uniform(2, 12.0, 0.05).map_err(|e| e.to_string())?;
            let k = dirac_defect_kernel(&TorusElement::one(2), &chi, &primal)
                .map_err(|e| e.to_string())?;
            let rep = decay_order(&k, (4.0, 11.0), 6).map_err(|e| e.to_string())?;
            Ok(decay_csv(&rep.shells, rep.residual))
        }
        other => Err(format!(
            "unknown decay table {other}; expected sigma-ray, sigma-radial, commutator, or defect"
        )),
    }
}

/// JSON for the `hp-dims --group Zk` surface, deterministic bytes.
pub fn hp_dims_json(k: usize) -> Result<String, String> {
    let g = CyclicAction::new(k).map_err(|e| e.to_string())?;
    let dims = hp_dimensions(&g);
    let (k0, k1) = if k == 1 {
        (dims.even, dims.odd)
    } else {
        k_ranks(&g).map_err(|e| e.to_string())?
    };
    let mut strata = String::new();
    for power in 1..k {
        let data = fixed_points(&g, power).map_err(|e| e.to_string())?;
        let orbits = orbit_count(&g, &data.points);
        if !strata.is_empty() {
            strata.push(',');
        }
        strata.push_str(&format!(
            "{{\"power\":{power},\"points\":{},\"orbits\":{orbits}}}",
            data.count
        ));
    }
    Ok(format!(
        "{{\"group\":\"Z{k}\",\"hp0\":{},\"hp1\":{},\"k0\":{k0},\"k1\":{k1},\"strata\":[{strata}]}}",
        dims.even, dims.odd
    ))
}

/// The canonical trace pairing τ((1/|G|)Σ_g (1,g)) used by the
/// θ-regression reports; exposed for the CLI.
pub fn average_idempotent_trace(k: usize) -> Complex64 {
    let one = TorusElement::one(2);
    let p = CrossedElement::new(k, vec![one; k]).scale(Complex64::new(1.0 / k as f64, 0.0));
    trace(p.val(0))
}

/// Run every suite named in the config, honoring NCT_THREADS for
/// cross-suite parallelism; records are assembled in suite order.
pub fn run_all(cfg: &RunConfig) -> Vec<SuiteReport> {
    let names: Vec<String> = cfg.suites.clone();
    let cap = std::env::var("NCT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| names.len().max(1));
    let mut reports: Vec<Option<SuiteReport>> = (0..names.len()).map(|_| None).collect();
    let mut next = 0usize;
    while next < names.len() {
        let batch_end = (next + cap).min(names.len());
        let batch: Vec<(usize, String)> =
            (next..batch_end).map(|i| (i, names[i].clone())).collect();
        let results: Vec<(usize, SuiteReport)> = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|(i, name)| {
                    let idx = *i;
                    let name = name.clone();
                    scope.spawn(move || {
                        let rep = run_suite(&name, cfg).expect("validated suite name");
                        (idx, rep)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (i, rep) in results {
            reports[i] = Some(rep);
        }
        next = batch_end;
    }
    reports.into_iter().map(|r| r.unwrap()).collect()
}
