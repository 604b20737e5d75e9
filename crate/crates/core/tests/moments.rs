use agf_core::channel::{
    choi_of_unitary, project_utp, random_cptp, random_hermiticity_preserving, random_mixed_unitary,
    utp_deviation_formula, ChoiMatrix,
};
use agf_core::linalg::{haar_unitary, SeedStream};
use agf_core::moments::{
    agf_variance_identity_check, design_agfs, design_combination, design_expansion_coeffs, coeffs_from_agfs,
    moment_empirical, second_moment_analytic, unitarity, DesignSet, MomentEnsemble,
};

#[test]
fn expansion_reconstructs_unital_channels() {
    let ds = DesignSet::full_clifford(1).unwrap();
    let mut rng = SeedStream::new(1, 0).rng();
    for _ in 0..5 {
        let x = random_mixed_unitary(2, 3, &mut rng);
        let c = design_expansion_coeffs(&x, &ds).unwrap();
        let mean: f64 = c.iter().sum::<f64>() / c.len() as f64;
        assert!((mean - 1.0).abs() < 1e-9);
        let back = design_combination(&ds, &c).unwrap();
        assert!((back.matrix().as_matrix() - x.matrix().as_matrix()).frobenius_norm() < 1e-9);
    }
}

#[test]
fn expansion_of_design_element_and_depolarizing() {
    let ds = DesignSet::full_clifford(1).unwrap();
    let x = choi_of_unitary(&ds.elements()[7]).unwrap();
    let c = design_expansion_coeffs(&x, &ds).unwrap();
    let back = design_combination(&ds, &c).unwrap();
    assert!((back.matrix().as_matrix() - x.matrix().as_matrix()).frobenius_norm() < 1e-9);
    let dep = ChoiMatrix::depolarizing(2);
    let c = design_expansion_coeffs(&dep, &ds).unwrap();
    assert!(c.iter().all(|v| (v - 1.0).abs() < 1e-9));
}

#[test]
fn expansion_of_non_unital_map_gives_projection() {
    let ds = DesignSet::full_clifford(1).unwrap();
    let mut rng = SeedStream::new(2, 0).rng();
    let x = random_cptp(2, 2, &mut rng);
    let c = coeffs_from_agfs(&design_agfs(&x, &ds).unwrap(), 2);
    let back = design_combination(&ds, &c).unwrap();
    let p = project_utp(&x).unwrap();
    assert!((back.matrix().as_matrix() - p.matrix().as_matrix()).frobenius_norm() < 1e-9);
    let dev = (x.matrix().as_matrix() - back.matrix().as_matrix()).frobenius_norm_sqr();
    assert!((dev - utp_deviation_formula(&x)).abs() < 1e-9);
}

#[test]
fn two_qubit_design_expansion() {
    let ds = DesignSet::full_clifford(2).unwrap();
    let mut rng = SeedStream::new(3, 0).rng();
    let x = random_mixed_unitary(4, 2, &mut rng);
    let c = design_expansion_coeffs(&x, &ds).unwrap();
    let back = design_combination(&ds, &c).unwrap();
    assert!((back.matrix().as_matrix() - x.matrix().as_matrix()).frobenius_norm() < 1e-9);
}

#[test]
fn variance_identity_on_full_design() {
    let ds = DesignSet::full_clifford(1).unwrap();
    let mut rng = SeedStream::new(4, 0).rng();
    for _ in 0..5 {
        let x = random_hermiticity_preserving(2, &mut rng);
        let (lhs, rhs) = agf_variance_identity_check(&x, &ds).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} {rhs}");
    }
    let u = choi_of_unitary(&haar_unitary(2, &mut rng)).unwrap();
    let (lhs, _) = agf_variance_identity_check(&u, &ds).unwrap();
    assert!((lhs - 1.0 / 36.0).abs() < 1e-10);
}

#[test]
fn second_moment_equals_design_average() {
    let ds = DesignSet::full_clifford(1).unwrap();
    let mut rng = SeedStream::new(5, 0).rng();
    for _ in 0..5 {
        let t = random_hermiticity_preserving(2, &mut rng);
        let r = moment_empirical(&t, MomentEnsemble::Design(&ds), 2, 0, SeedStream::new(0, 0)).unwrap();
        assert!((r.empirical - second_moment_analytic(&t)).abs() < 1e-10);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.samples, 24);
    }
}

#[test]
fn unitarity_is_invariant_under_unitary_pre_and_post_processing() {
    let mut rng = SeedStream::new(6, 0).rng();
    for d in [2, 3, 4] {
        let x = random_cptp(d, 2, &mut rng);
        let u0 = unitarity(&x);
        assert!((-1e-12..=1.0 + 1e-12).contains(&u0));
        let v = haar_unitary(d, &mut rng);
        let w = haar_unitary(d, &mut rng);
        let y = x.compose_unitaries(&v, &w).unwrap();
        assert!((unitarity(&y) - u0).abs() < 1e-10);
    }
}
