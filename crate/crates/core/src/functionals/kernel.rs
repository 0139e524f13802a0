use std::f64::consts::PI;

/// Backward heat kernel `G(x, t) = (-4πt)^{-d/2} exp(|x|²/(4t))` for `t < 0`.
pub fn kernel(x: &[f64], t: f64) -> f64 {
    if t >= 0.0 {
        return 0.0;
    }
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (-4.0 * PI * t).powf(-d / 2.0) * (r2 / (4.0 * t)).exp()
}

/// Smooth step: 1 for `s <= 0`, 0 for `s >= 1`, `C^∞` in between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - s)).exp();
        let b = (-1.0 / s).exp();
        a / (a + b)
    }
}

/// Fixed spatial cutoff: 1 on `B_{1/4}`, 0 outside `B_{1/2}`.
pub fn cutoff(x: &[f64]) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    smooth_step(4.0 * (r - 0.25))
}

/// Mass of `G(·, -r²)` outside `B_R` in dimension `d` (1 or 2).
pub fn kernel_tail_mass(dim: usize, big_r: f64, r: f64) -> f64 {
    match dim {
        1 => libm::erfc(big_r / (2.0 * r)),
        2 => (-(big_r * big_r) / (4.0 * r * r)).exp(),
        _ => {
            // chi distribution with d degrees of freedom: crude Chernoff bound
            let z2 = big_r * big_r / (2.0 * r * r);
            let d = dim as f64;
            if z2 <= d {
                1.0
            } else {
                ((z2 / d).powf(d / 2.0) * (-(z2 - d) / 2.0).exp()).min(1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_has_unit_mass() {
        for &t in &[-0.01, -0.1, -1.0] {
            let h = 1e-3;
            let mut s1 = 0.0;
            for i in -20000..=20000 {
                s1 += kernel(&[i as f64 * h], t) * h;
            }
            assert!((s1 - 1.0).abs() < 1e-6, "1D, t = {t}: {s1}");
        }
        let h = 0.01;
        let mut s2 = 0.0;
        for i in -300..=300 {
            for j in -300..=300 {
                s2 += kernel(&[i as f64 * h, j as f64 * h], -0.1) * h * h;
            }
        }
        assert!((s2 - 1.0).abs() < 1e-6, "{s2}");
    }

    #[test]
    fn cutoff_properties() {
        assert_eq!(cutoff(&[0.2, 0.1]), 1.0);
        assert_eq!(cutoff(&[0.5]), 0.0);
        assert_eq!(cutoff(&[0.7, 0.0]), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = cutoff(&[0.25 + 0.25 * i as f64 / 100.0]);
            assert!((0.0..=1.0).contains(&v) && v <= prev);
            prev = v;
        }
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tail_mass_matches_direct_sum() {
        let r = 0.2_f64;
        let big_r = 0.5;
        let h = 1e-4;
        let mut inside = 0.0;
        let m = (big_r / h) as i64;
        for i in -m..=m {
            inside += kernel(&[i as f64 * h], -r * r) * h;
        }
        assert!((1.0 - inside - kernel_tail_mass(1, big_r, r)).abs() < 1e-4);
    }
}
