use proptest::prelude::*;
use supercool_core::field::{field_from_bytes, field_to_bytes, Field, SpaceTimeGrid};

fn grid(dim: usize, n: usize, nt: usize) -> SpaceTimeGrid {
    if dim == 1 {
        SpaceTimeGrid::line(n, -1.0, 1.0, nt, 0.0, 1.0).unwrap()
    } else {
        SpaceTimeGrid::square(n, -1.0, 1.0, nt, 0.0, 1.0).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interpolation_reproduces_cellwise_multilinear(
        dim in 1usize..=2,
        n in 3usize..12,
        nt in 2usize..8,
        (a, b, c, d, e) in (1.5..3.0f64, -0.5..0.5f64, 1.5..3.0f64, -0.5..0.5f64, 0.0..0.4f64),
        probe in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        // positive product of affine factors, so the clamp at zero never acts
        let f = move |x: &[f64], t: f64| {
            let y = if x.len() > 1 { c + d * x[1] } else { 1.0 };
            (a + b * x[0]) * y * (2.0 - e * t)
        };
        let field = Field::from_fn(grid(dim, n, nt), f).unwrap();
        let x = &probe[..dim];
        let t = 0.5 * (probe[2] + 1.0);
        let v = field.interpolate_at(x, t).unwrap();
        let exact = f(x, t);
        prop_assert!((v - exact).abs() <= 1e-13 * exact.abs(), "{v} vs {exact}");
    }

    #[test]
    fn bytes_round_trip_bitwise(
        dim in 1usize..=2,
        n in 2usize..7,
        nt in 2usize..5,
        seed in prop::collection::vec(-1e3..1e3f64, 64),
        mono_tol in 1e-14..1e-6f64,
    ) {
        let g = grid(dim, n, nt);
        let values: Vec<f64> = (0..g.len()).map(|i| seed[i % seed.len()] * (1.0 + i as f64)).collect();
        let field = Field::new(g, values, mono_tol).unwrap();
        let back = field_from_bytes(&field_to_bytes(&field)).unwrap();
        prop_assert_eq!(back.grid(), field.grid());
        prop_assert_eq!(back.mono_tol().to_bits(), field.mono_tol().to_bits());
        prop_assert_eq!(back.max_violation().to_bits(), field.max_violation().to_bits());
        let same = back.values().iter().zip(field.values()).all(|(x, y)| x.to_bits() == y.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn eta_of_monotone_field_is_bounded_below(
        n in 3usize..10,
        nt in 3usize..10,
        rates in prop::collection::vec(0.0..2.0f64, 10),
    ) {
        let g = grid(1, n, nt);
        let field = Field::from_fn(g.clone(), |x, t| {
            let i = ((x[0] + 1.0) * 4.0) as usize % rates.len();
            (1.0 - rates[i] * t).max(0.0)
        })
        .unwrap();
        prop_assert!(field.is_monotone());
        for k in 1..g.nt {
            let eta = field.eta_slice(k).unwrap();
            prop_assert!(eta.iter().all(|&v| v >= -field.mono_tol() / g.dt));
        }
    }
}
