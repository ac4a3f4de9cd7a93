use univlab_wasm::{distance_curve, l_abs_grid, pathology_text, weyl_curve};

#[test]
fn heatmap_matches_zeta_two() {
    // a 1×1 grid at s = 2 for the trivial character
    let v = l_abs_grid(1, 0, 2.0, 2.0, 0.0, 0.0, 1, 1).unwrap();
    assert!((v[0] - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-8);
}

#[test]
fn heatmap_layout_is_top_row_first() {
    let (nx, ny) = (3, 4);
    let v = l_abs_grid(4, 1, 1.5, 2.5, -5.0, 5.0, nx, ny).unwrap();
    assert_eq!(v.len(), nx * ny);
    let top_left = l_abs_grid(4, 1, 1.5, 1.5, 5.0, 5.0, 1, 1).unwrap()[0];
    let bottom_right = l_abs_grid(4, 1, 2.5, 2.5, -5.0, -5.0, 1, 1).unwrap()[0];
    assert!((v[0] - top_left).abs() < 1e-12);
    assert!((v[nx * ny - 1] - bottom_right).abs() < 1e-12);
}

#[test]
fn heatmap_rejects_bad_input() {
    assert!(l_abs_grid(4, 7, 1.5, 2.5, 0.0, 1.0, 2, 2).is_err());
    assert!(l_abs_grid(4, 1, 1.5, 2.5, 0.0, 1.0, 0, 2).is_err());
    assert!(l_abs_grid(4, 1, 1.5, 2.5, 0.0, 1.0, 1000, 1000).is_err());
}

#[test]
fn distance_curve_samples_the_lattice() {
    let v = distance_curve(1, 0, 4.0, 0.5, 4).unwrap();
    assert_eq!(v.len(), 2 * 5);
    let taus: Vec<f64> = v.iter().step_by(2).copied().collect();
    assert_eq!(taus, vec![2.0, 2.5, 3.0, 3.5, 4.0]);
    assert!(v.iter().skip(1).step_by(2).all(|d| d.is_finite() && *d > 0.0));
    assert!(distance_curve(1, 0, 1.0, 0.5, 4).is_err());
}

#[test]
fn pathological_weyl_sum_stays_at_one() {
    let v = weyl_curve("2pi/log(2)", 2.0, 0.0, 2, 5000, 6).unwrap();
    for pair in v.chunks(2) {
        assert!((pair[1] - 1.0).abs() < 1e-9, "N = {}: {}", pair[0], pair[1]);
    }
    assert_eq!(v[0], 10.0);
    assert_eq!(v[v.len() - 2], 5000.0);
}

#[test]
fn generic_weyl_sum_decays() {
    let v = weyl_curve("1.3", 1.0, 0.0, 2, 100_000, 5).unwrap();
    assert!(v[v.len() - 1] < 0.01);
}

#[test]
fn pathology_text_reports_data() {
    let t = pathology_text("4pi/log(12)").unwrap();
    assert!(t.contains("m* = 2"), "{t}");
    assert!(t.contains("A = [2, 3]"), "{t}");
    assert!(pathology_text("1.2345").unwrap().contains("not pathological"));
    assert!(pathology_text("pi/").is_err());
}
