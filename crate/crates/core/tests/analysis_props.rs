use proptest::prelude::*;
use supercool_core::blowup::{
    classify, fit_profile, regular_value, rescale, singular_value, unit_cylinder_grid, BlowupKind, ClassifyConfig,
};
use supercool_core::calpoly::CaloricPoly;
use supercool_core::examples::make_planar;
use supercool_core::field::{AnalyticField, Field, Sampler, SpaceTimeGrid, SpaceTimePoint};
use supercool_core::freeboundary::{
    boundary_stats, dyadic_scales, freezing_time, jump_scan, nucleation_scan, parabolic_dimension,
};
use supercool_core::functionals::{cutoff, frequency_trace, kernel, phi_gamma};
use supercool_core::solver::{Solver, SolverConfig};

/// `A = R diag(λ) Rᵀ` in 2D, or `[[λ₀]]` in 1D.
fn psd(dim: usize, lam: (f64, f64), theta: f64) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![lam.0]];
    }
    let (c, s) = (theta.cos(), theta.sin());
    vec![
        vec![c * c * lam.0 + s * s * lam.1, c * s * (lam.0 - lam.1)],
        vec![c * s * (lam.0 - lam.1), s * s * lam.0 + c * c * lam.1],
    ]
}

fn solved_bumps(params: &[(f64, f64, f64)]) -> Field {
    let n = 81;
    let dx: f64 = 2.0 / (n - 1) as f64;
    let dt = dx * dx;
    let nt = 120;
    let g = SpaceTimeGrid::line(n, -1.0, 1.0, nt, 0.0, (nt - 1) as f64 * dt).unwrap();
    let w0: Vec<f64> = (0..n)
        .map(|i| {
            let x = g.node(i)[0];
            params
                .iter()
                .map(|&(c, rho, s)| s * rho * rho / 16.0 * (1.0 - ((x - c) / rho).powi(2)).max(0.0).powi(2))
                .sum()
        })
        .collect();
    Solver::new(SolverConfig::new(g)).unwrap().run(&w0, false).unwrap().0
}

fn bump_params() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.5..0.5f64, 0.2..0.45f64, 0.3..1.0f64), 1..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cutoff_plateau_and_support(x in prop::collection::vec(-1.0..1.0f64, 2)) {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let z = cutoff(&x);
        prop_assert!((0.0..=1.0).contains(&z));
        if r <= 0.25 {
            prop_assert_eq!(z, 1.0);
        }
        if r >= 0.5 {
            prop_assert_eq!(z, 0.0);
        }
    }

    #[test]
    fn kernel_has_unit_mass(t in -2.0..-0.01f64) {
        let sigma = (-2.0 * t).sqrt();
        let n = 4000;
        let h = 24.0 * sigma / n as f64;
        let mass: f64 = (0..=n).map(|i| kernel(&[-12.0 * sigma + i as f64 * h], t) * h).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-6, "{mass}");
    }

    #[test]
    fn height_scales_for_homogeneous_samples(k in 1u32..=3, coeffs in prop::collection::vec(0.5..2.0f64, 2)) {
        // k-homogeneous: c₀ x^k + c₁ t x^{k-2} (second term only for k >= 2)
        let p = {
            let mut p = CaloricPoly::<f64>::x(1, 0).pow(k).scale(&coeffs[0]);
            if k >= 2 {
                p = p.add(&CaloricPoly::t(1).mul(&CaloricPoly::x(1, 0).pow(k - 2)).scale(&coeffs[1]));
            }
            p
        };
        let q = p.clone();
        let f = AnalyticField::new(move |x, t| q.eval(x, t), vec![(-4.0, 4.0)], (-1.0, 0.0), 0.01, 0.01).unwrap();
        let c = SpaceTimePoint::new(vec![0.0], 0.0);
        let radii = [0.05, 0.1, 0.2, 0.4];
        let trace = frequency_trace(&f, &c, &CaloricPoly::zero(1), &radii, 4.0, false).unwrap();
        let scaled: Vec<(f64, f64)> = trace
            .entries
            .iter()
            .map(|e| (e.h / e.r.powi(2 * k as i32), e.err_h / e.r.powi(2 * k as i32)))
            .collect();
        for w in scaled.windows(2) {
            prop_assert!((w[0].0 - w[1].0).abs() <= w[0].1 + w[1].1 + 1e-9 * w[0].0, "{w:?}");
        }
        for e in &trace.entries {
            prop_assert_eq!(e.phi_gamma, phi_gamma(e.h, e.d, e.r, 4.0));
            prop_assert!(e.h >= 0.0 && e.d >= 0.0);
        }
    }

    #[test]
    fn singular_members_are_recovered(
        dim in 1usize..=2,
        m in 0.0..1.0f64,
        split in 0.0..1.0f64,
        theta in 0.0..std::f64::consts::PI,
    ) {
        let tr = 1.0 - m;
        let a = psd(dim, (split * tr, (1.0 - split) * tr), theta);
        let a = if dim == 1 { vec![vec![tr]] } else { a };
        let aa = a.clone();
        let field = Field::from_fn(unit_cylinder_grid(dim), move |x, t| singular_value(m, &aa, x, t)).unwrap();
        let prof = fit_profile(&field);
        let BlowupKind::Singular { m: mf, a: af } = &prof.kind else {
            return Err(TestCaseError::fail(format!("fitted regular for m = {m}")));
        };
        prop_assert!((mf - m).abs() <= 1e-3, "{mf} vs {m}");
        for (ri, rf) in a.iter().zip(af) {
            for (x, y) in ri.iter().zip(rf) {
                prop_assert!((x - y).abs() <= 1e-3);
            }
        }
        // constraint set after projection
        prop_assert!((0.0..=1.0).contains(mf));
        prop_assert!(prof.a_eigenvalues().iter().all(|&v| v >= -1e-12));
        let trace: f64 = (0..dim).map(|i| af[i][i]).sum();
        prop_assert!((trace - (1.0 - mf)).abs() <= 1e-6);
    }

    #[test]
    fn half_space_members_are_recovered(dim in 1usize..=2, theta in 0.0..std::f64::consts::TAU) {
        let e = if dim == 1 { vec![if theta < std::f64::consts::PI { 1.0 } else { -1.0 }] } else { vec![theta.cos(), theta.sin()] };
        let ee = e.clone();
        let field = Field::from_fn(unit_cylinder_grid(dim), move |x, _| regular_value(&ee, x)).unwrap();
        let prof = fit_profile(&field);
        let BlowupKind::Regular { e: ef } = &prof.kind else {
            return Err(TestCaseError::fail("fitted singular"));
        };
        let norm: f64 = ef.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() <= 1e-9);
        prop_assert!(ef.iter().zip(&e).all(|(a, b)| (a - b).abs() <= 1e-3), "{ef:?} vs {e:?}");
    }

    #[test]
    fn freezing_time_matches_the_field(p in bump_params()) {
        let field = solved_bumps(&p);
        let g = field.grid();
        let fr = freezing_time(&field);
        prop_assert!(fr.defined_count() > 0);
        for i in 0..g.n_space() {
            let x = g.node(i);
            let changes_sign = field.at(0, i) > 0.0 && (0..g.nt).any(|k| field.at(k, i) <= 0.0);
            prop_assert_eq!(fr.defined(i), changes_sign);
            if !fr.defined(i) {
                continue;
            }
            let s = fr.s[i];
            prop_assert!(s >= g.origin_t && s <= g.t_end());
            if s - g.dt >= g.origin_t {
                prop_assert!(field.sample(&x, s - g.dt).unwrap() > 0.0);
            }
            if s + g.dt <= g.t_end() {
                prop_assert_eq!(field.sample(&x, s + g.dt).unwrap(), 0.0);
            }
        }
        let stats = boundary_stats(&field, &fr, &[2.0 * g.dx, 4.0 * g.dx, 8.0 * g.dx]);
        // tiny bumps freeze before any test radius fits below the graph
        match stats.c_d {
            Some(c) => prop_assert!(c > 0.0, "{c}"),
            None => prop_assert_eq!(stats.c_d_samples, 0),
        }
        prop_assert!(stats.grad_s.iter().all(|v| v.is_nan() || v.is_finite()));
    }

    #[test]
    fn planar_jump_slab_is_the_nucleation_set(n in 41usize..90, k0 in 20usize..60) {
        let g = SpaceTimeGrid::line(n, -1.0, 1.0, 81, 0.0, 0.4).unwrap();
        let t0 = g.time(k0);
        let field = make_planar(t0, g.clone()).unwrap();
        let fr = freezing_time(&field);
        let jumps = jump_scan(&fr, 0.1);
        prop_assert_eq!(jumps.len(), 1);
        prop_assert!((jumps[0] - t0).abs() < 1e-12);
        let mut hits: Vec<usize> = nucleation_scan(&field, &fr).iter().map(|h| h.node).collect();
        hits.sort_unstable();
        let slab: Vec<usize> = (0..g.n_space())
            .filter(|&i| g.nearest_time(fr.s[i]) == g.nearest_time(jumps[0]) && g.room(&g.node(i)) >= 4.0 * g.dx)
            .collect();
        prop_assert_eq!(hits, slab);
    }

    #[test]
    fn random_box_dimension(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<SpaceTimePoint> =
            (0..10_000).map(|_| SpaceTimePoint::new(vec![rng.random::<f64>()], rng.random::<f64>())).collect();
        let est = parabolic_dimension(&pts, &dyadic_scales(0.5, 4)).unwrap();
        prop_assert!((est.slope - 3.0).abs() <= 0.3, "{}", est.slope);
        prop_assert!(est.counts.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(est.interval.0 <= est.slope && est.slope <= est.interval.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn classification_is_scale_consistent(m in 0.3..1.0f64, r in 0.3..0.9f64) {
        // -m t + ½ (1 - m) x² on [-2, 2] × [-1, 0]: singular at the origin
        let g = SpaceTimeGrid::line(129, -2.0, 2.0, 129, -1.0, 0.0).unwrap();
        let f = Field::from_fn(g, move |x, t| -m * t + 0.5 * (1.0 - m) * x[0] * x[0]).unwrap();
        let p = SpaceTimePoint::new(vec![0.0], 0.0);
        let cfg = ClassifyConfig::default();
        let direct = classify(&f, &freezing_time(&f), &p, &[0.8, 0.4, 0.2], &cfg).unwrap();
        let scaled = rescale(&f, &p, r).unwrap();
        let again = classify(&scaled, &freezing_time(&scaled), &p, &[0.8, 0.4, 0.2], &cfg).unwrap();
        prop_assert_eq!(direct.verdict, again.verdict);
        prop_assert_eq!(direct.family, again.family);
        prop_assert_eq!(direct.stratum, again.stratum);
    }
}
