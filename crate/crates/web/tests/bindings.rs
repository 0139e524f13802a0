use supercool_web::{frequency_curve_json, laguerre_json, radial_front_json};

#[test]
fn front_shrinks_to_zero() {
    let v = radial_front_json(2, 0.1).unwrap();
    let front: Vec<f64> = serde_json::from_value(v["front"].clone()).unwrap();
    assert!(front[0] >= 0.99 && front[0] <= 1.0);
    assert!(front.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*front.last().unwrap(), 0.0);
    let t_ext = v["extinction_time"].as_f64().unwrap();
    assert!(t_ext > 0.0 && t_ext < 0.1);
}

#[test]
fn front_rejects_bad_input() {
    assert!(radial_front_json(4, 0.1).is_err());
    // Δw0 <= 1 fails for a bump this tall
    assert!(radial_front_json(1, 1.0).is_err());
}

#[test]
fn laguerre_k2_d1() {
    let v = laguerre_json(2, 1).unwrap();
    assert_eq!(v["caloric"], true);
    assert!(v["c2"].as_f64().unwrap() > 0.0);
    let dr: Vec<f64> = serde_json::from_value(v["dr_p"].clone()).unwrap();
    let bound: Vec<f64> = serde_json::from_value(v["bound"].clone()).unwrap();
    // on the curve c1 t = -r² the derivative equals the bound
    for (a, b) in dr.iter().zip(&bound) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn frequency_curve_has_a_limit_near_two() {
    let v = frequency_curve_json(0.1, 4.0, false).unwrap();
    let r: Vec<f64> = serde_json::from_value(v["r"].clone()).unwrap();
    assert!(r.len() >= 4);
    let limit = v["phi_limit"].as_f64().unwrap();
    assert!(limit > 1.9 && limit < 2.6, "{limit}");
}
