use proptest::prelude::*;
use supercool_core::calpoly::{
    gaussian_inner, poly_from_text, poly_to_text, project_caloric, rat, CaloricPoly, RatPoly, Term, WeightedSample,
};

/// Random rational polynomial in `(x, t)`; `j_max = 0` gives spatial ones.
fn poly(dim: usize, max_deg: u32, j_max: u32) -> impl Strategy<Value = RatPoly> {
    let term = (prop::collection::vec(0..=max_deg, dim), 0..=j_max, -9i64..=9, 1i64..=7);
    prop::collection::vec(term, 1..6).prop_map(move |terms| {
        let mut p = RatPoly::zero(dim);
        for (mut beta, j, n, d) in terms {
            // keep the parabolic degree within the bound
            while beta.iter().sum::<u32>() + 2 * j > max_deg {
                let i = beta.iter().position(|&b| b > 0).unwrap_or(0);
                if beta[i] == 0 {
                    break;
                }
                beta[i] -= 1;
            }
            if beta.iter().sum::<u32>() + 2 * j <= max_deg {
                p.add_term(Term::new(beta, j), rat(n, d));
            }
        }
        p
    })
}

fn homogeneous(dim: usize, k: u32) -> impl Strategy<Value = CaloricPoly<f64>> {
    prop::collection::vec((prop::collection::vec(0..=k, dim), -5.0..5.0f64), 1..5).prop_map(move |terms| {
        let mut p = CaloricPoly::<f64>::zero(dim);
        for (seed, c) in terms {
            // distribute degree k over x-exponents and a t-power
            let j = seed[0] / 2 % (k / 2 + 1);
            let mut left = k - 2 * j;
            let mut beta = vec![0; dim];
            for (a, s) in seed.iter().enumerate() {
                let take = if a + 1 == dim { left } else { (*s).min(left) };
                beta[a] = take;
                left -= take;
            }
            p.add_term(Term::new(beta, j), c);
        }
        p
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn caloric_extension_is_caloric(p in (1usize..=3).prop_flat_map(|d| poly(d, 12, 0))) {
        let q = CaloricPoly::caloric_extension(&p).unwrap();
        prop_assert!(q.heat_op().is_zero());
        prop_assert!(q.terms().all(|(_, c)| *c != rat(0, 1)));
    }

    #[test]
    fn gaussian_norm_is_nonnegative(p in (1usize..=2).prop_flat_map(|d| poly(d, 6, 2)), r in 0.1..2.0f64) {
        let v = gaussian_inner(&p, &p, r).unwrap();
        let a = abs_coeffs(&p.to_f64());
        prop_assert!(v >= -1e-12 * gaussian_inner(&a, &a, r).unwrap());
    }

    #[test]
    fn homogeneous_scaling(
        (k, p) in (1usize..=2, 1u32..=6).prop_flat_map(|(d, k)| (Just(k), homogeneous(d, k))),
        r in 0.05..3.0f64,
    ) {
        let at_r = gaussian_inner(&p, &p, r).unwrap();
        let at_1 = gaussian_inner(&p, &p, 1.0).unwrap();
        prop_assert!(rel(at_r, r.powi(2 * k as i32) * at_1) <= 1e-12, "{at_r} vs {}", r.powi(2 * k as i32) * at_1);
    }

    #[test]
    fn integration_by_parts(
        (f, g) in (1usize..=2).prop_flat_map(|d| (poly(d, 5, 2), poly(d, 5, 2))),
        r in 0.2..2.0f64,
    ) {
        // 2r² <∇f, ∇g>_r = <Zf, g>_r - 2r² <𝐇f, g>_r
        let (f, g) = (f.to_f64(), g.to_f64());
        let mut grad = 0.0;
        let mut scale = 0.0;
        for a in 0..f.dim() {
            grad += gaussian_inner(&f.diff_x(a), &g.diff_x(a), r).unwrap();
            scale += gaussian_inner(&abs_coeffs(&f.diff_x(a)), &abs_coeffs(&g.diff_x(a)), r).unwrap();
        }
        let lhs = 2.0 * r * r * grad;
        let rhs = gaussian_inner(&f.z_op(), &g, r).unwrap() - 2.0 * r * r * gaussian_inner(&f.heat_op(), &g, r).unwrap();
        let size = 2.0 * r * r * scale
            + gaussian_inner(&abs_coeffs(&f.z_op()), &abs_coeffs(&g), r).unwrap()
            + 2.0 * r * r * gaussian_inner(&abs_coeffs(&f.heat_op()), &abs_coeffs(&g), r).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (size.abs() + lhs.abs() + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn projection_is_idempotent(
        values in prop::collection::vec(-1.0..1.0f64, 45),
        k in 1u32..=3,
    ) {
        let samples: Vec<WeightedSample> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = vec![(i % 9) as f64 / 4.0 - 1.0];
                let t = -1.0 + (i / 9) as f64 / 5.0;
                WeightedSample::new(x, t, v, 1.0)
            })
            .collect();
        let once = project_caloric(&samples, 1, k).unwrap().poly;
        let again: Vec<WeightedSample> =
            samples.iter().map(|s| WeightedSample::new(s.x.clone(), s.t, once.eval(&s.x, s.t), s.weight)).collect();
        let twice = project_caloric(&again, 1, k).unwrap().poly;
        prop_assert!(twice.sub(&once).max_coeff() <= 1e-9 * once.max_coeff().max(1.0));
    }

    #[test]
    fn text_round_trip(p in (1usize..=3).prop_flat_map(|d| poly(d, 8, 3))) {
        let back: RatPoly = poly_from_text(&poly_to_text(&p)).unwrap();
        prop_assert_eq!(back, p);
    }
}

fn abs_coeffs(p: &CaloricPoly<f64>) -> CaloricPoly<f64> {
    CaloricPoly::from_terms(p.dim(), p.terms().map(|(t, c)| (t.clone(), c.abs())))
}
