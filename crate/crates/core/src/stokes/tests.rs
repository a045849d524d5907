use super::*;
use crate::matrix_fss::{Potential, SingularOrder, SolverSettings};

fn equation(nu: Vec<f64>, coeffs: Vec<CMat>, t: f64) -> Equation {
    Equation::new(
        SingularOrder::new(nu).unwrap(),
        Potential::polynomial(coeffs).unwrap(),
        t,
        SolverSettings::default(),
    )
    .unwrap()
}

fn p3() -> Equation {
    crate::catalog::mixed_equation(1.0)
}

fn scalar_linear() -> Equation {
    equation(vec![0.3], vec![CMat::zeros(1, 1), CMat::from_element(1, 1, c(0.1, 0.0))], 1.0)
}

fn ray(radii: &[f64], angle: f64) -> Vec<C64> {
    radii.iter().map(|&r| C64::from_polar(r, angle)).collect()
}

fn slope(f: &LadderFit) -> f64 {
    f.fit.as_ref().unwrap().slope
}

#[test]
fn half_integer_free_case_matches_closed_form() {
    let eq = equation(vec![0.5], vec![CMat::zeros(1, 1)], std::f64::consts::PI);
    let s = compute_b(&eq, c(2.0, 0.0), &[0.3, 1.0, 3.0], WRONSKIAN_TOL).unwrap();
    let expect = [[c(1.0, 0.0), c(0.0, 2.0)], [c(1.0, 0.0), c(0.0, -2.0)]];
    for k in 1..=2 {
        for j in 1..=2 {
            assert!((s.multiplier(k, j)[(0, 0)] - expect[k - 1][j - 1]).norm() < 1e-12, "B{k}{j}");
        }
    }
    assert!((s.scaled_determinant() - c(0.0, -2.0)).norm() < 1e-12);
    assert!(s.reconstruction_residual.unwrap() < 1e-12);
}

#[test]
fn free_problem_gives_reference_multipliers() {
    let eq = p3().with_potential(Potential::zero(2)).unwrap();
    for rho in [c(9.0, 2.0), c(7.0, -3.0), c(30.0, 0.0)] {
        let s = compute_b(&eq, rho, &[], WRONSKIAN_TOL).unwrap();
        for k in 1..=2 {
            for j in 1..=2 {
                assert!(s.normalized_deviation(k, j) < 1e-12, "rho {rho} B{k}{j}");
            }
        }
        assert!((s.scaled_determinant() - c(-4.0, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn extraction_is_abscissa_independent_and_reconstructs() {
    let eq = p3();
    let grid = [0.01, 0.1, 0.35, 0.8, 1.0];
    for rho in [c(20.0, 0.0), c(18.0, 6.0), c(25.0, -4.0)] {
        let s = compute_b(&eq, rho, &grid, WRONSKIAN_TOL).unwrap();
        assert!(s.wronskian_deviation < 1e-10, "{}", s.wronskian_deviation);
        assert!(s.reconstruction_residual.unwrap() < 1e-8, "{:?}", s.reconstruction_residual);
        assert!(s.kernel_bounds.iter().all(|&b| b < 0.5));
        let rec = s.record();
        assert_eq!(rec.multipliers.len(), 4);
        assert_eq!(rec.multipliers[1].b.entries.len(), 4);
    }
    match compute_b(&eq, c(20.0, 0.0), &[], 1e-30) {
        Err(Error::Accuracy { .. }) => {}
        other => panic!("expected accuracy error, got {:?}", other.map(|s| s.wronskian_deviation)),
    }
}

#[test]
fn multiplier_remainders_decay_on_both_rays() {
    let eq = p3();
    let radii = geometric_ladder(16.0, 32.0, 6);
    let upper = verify_stokes_asymptotics(&eq, &ray(&radii, 0.0)).unwrap();
    let lower = verify_stokes_asymptotics(&eq, &ray(&radii, -0.05)).unwrap();
    assert!(upper.passes() && lower.passes());
    // Row 2 is exact above the axis, row 1 below it.
    assert!(upper.fits[2].exact && upper.fits[3].exact);
    assert!(lower.fits[0].exact && lower.fits[1].exact);
    for f in &upper.fits[0..2] {
        assert!((-2.4..=-1.7).contains(&slope(f)), "{} {}", f.label, slope(f));
    }
    for f in &lower.fits[2..4] {
        assert!((-2.2..=-1.7).contains(&slope(f)), "{} {}", f.label, slope(f));
    }
}

#[test]
fn scalar_linear_potential_decays_faster_than_the_bound() {
    let eq = scalar_linear();
    let rep = verify_stokes_asymptotics(&eq, &ray(&geometric_ladder(8.0, 32.0, 6), 0.0)).unwrap();
    assert!(rep.passes());
    for f in &rep.fits[0..2] {
        assert!(slope(f) <= -eq.order.beta_exp + SLOPE_BAND);
        assert!((slope(f) + 2.0).abs() < 0.1, "{} {}", f.label, slope(f));
    }
}

#[test]
fn bessel_solutions_follow_the_leading_form() {
    let free = equation(vec![0.5], vec![CMat::zeros(1, 1)], 1.0);
    let rep = verify_s_asymptotics(&free, 0.2, &ray(&[5.0, 10.0, 20.0], 0.2)).unwrap();
    assert!(rep.points.iter().all(|p| p.window_deviation.iter().flatten().all(|&d| d < 1e-12)));
    assert!(rep.fits.iter().all(|f| f.exact && f.passes));

    let radii = geometric_ladder(16.0, 32.0, 6);
    for (eq, angle) in [(p3(), 0.0), (p3(), 0.3), (scalar_linear(), 0.0)] {
        let rep = verify_s_asymptotics(&eq, 0.3, &ray(&radii, angle)).unwrap();
        assert!(rep.passes(), "{:?}", rep.fits);
        for f in &rep.fits {
            assert!((slope(f) + 1.0).abs() < 0.15, "{} {}", f.label, slope(f));
        }
    }
}
