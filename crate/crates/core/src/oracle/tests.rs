use super::*;
use crate::matrix_fss::{Potential, SingularOrder, SolverSettings};
use std::f64::consts::PI;

fn equation(nu: Vec<f64>, q: Vec<CMat>, t: f64) -> Equation {
    let m = nu.len();
    let pot = if q.is_empty() { Potential::zero(m) } else { Potential::polynomial(q).unwrap() };
    Equation::new(SingularOrder::new(nu).unwrap(), pot, t, SolverSettings::default()).unwrap()
}

fn p2() -> Equation {
    equation(vec![0.3], vec![CMat::zeros(1, 1), CMat::from_element(1, 1, c(0.1, 0.0))], 1.0)
}

fn p3() -> Equation {
    crate::catalog::mixed_equation(1.0)
}

#[test]
fn closed_forms() {
    let (v, _) = closed_form_reference("c1".parse().unwrap(), PI / 3.0, c(1.0, 0.0));
    assert!((v - c(0.5, 0.0)).norm() < 1e-15);
    let (v, _) = closed_form_reference("e1".parse().unwrap(), PI / 2.0, c(1.0, 0.0));
    assert!((v - I).norm() < 1e-15);
    let (v, d) = closed_form_reference(ClosedForm::C2, 2.0, c(0.0, 0.0));
    assert_eq!((v, d), (c(2.0, 0.0), c(1.0, 0.0)));
    assert!("s7".parse::<ClosedForm>().is_err());
}

#[test]
fn seed_matches_trigonometric_solution() {
    let eq = equation(vec![0.5], vec![CMat::from_element(1, 1, c(2.0, 0.0))], 1.0);
    let lambda = c(7.0, 3.0);
    let k = (lambda - 2.0).sqrt();
    let s = frobenius_seed(&eq, lambda, 0.3, false).unwrap();
    assert!((s.s[0][(0, 0)] - (k * 0.3).cos()).norm() < 1e-15);
    assert!((s.ds[1][(0, 0)] - (k * 0.3).cos()).norm() < 1e-15);
}

#[test]
fn seed_skips_resonances_without_forcing() {
    // nu_1 + nu_2 = 1 makes order 1 resonant; the forcing there is zero
    let eq = p3();
    let s = frobenius_seed(&eq, c(1.0, 0.0), 0.01, false).unwrap();
    assert!(s.s[0][(0, 1)].norm() < 1e-3 * s.s[0][(1, 1)].norm());
}

#[test]
fn direct_integration_of_free_case() {
    let eq = equation(vec![0.5], vec![], PI);
    let grid: Vec<f64> = (1..=10).map(|k| PI * k as f64 / 10.0).collect();
    for &lambda in &[c(4.0, 0.0), c(30.0, 5.0)] {
        let rho = sqrt_lambda(lambda);
        let s1 = direct_integrate(&eq, Family::S1, lambda, &grid, &OracleSettings::default()).unwrap();
        let s2 = direct_integrate(&eq, Family::S2Star, lambda, &grid, &OracleSettings::default()).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            let scale = (rho.im.abs() * x).exp();
            let (c1, _) = closed_form_reference(ClosedForm::C1, x, rho);
            let (c2, dc2) = closed_form_reference(ClosedForm::C2, x, rho);
            assert!((s1.values[i][(0, 0)] - c1).norm() < 1e-10 * scale);
            assert!((s2.values[i][(0, 0)] - c2).norm() < 1e-10 * scale);
            assert!((s2.derivatives[i][(0, 0)] - dc2).norm() < 1e-10 * scale);
        }
    }
    assert!(direct_integrate(&eq, Family::Y1, c(1.0, 0.0), &grid, &OracleSettings::default()).is_err());
}

#[test]
fn integral_equation_solver_agrees_with_direct_integration() {
    let grid: Vec<f64> = (0..=12).map(|k| 0.01 + 0.99 * k as f64 / 12.0).collect();
    for eq in [p2(), p3()] {
        for &lambda in &[c(3.0, 0.0), c(-12.0, 4.0), c(150.0, 10.0)] {
            for adjoint in [false, true] {
                let run = compare_bessel(&eq, lambda, &grid, adjoint, &OracleSettings::default()).unwrap();
                assert!(run.max_deviation < 1e-8, "lambda {lambda}: {}", run.max_deviation);
            }
        }
    }
}

#[test]
fn deviation_shrinks_with_tolerance() {
    let eq = p3();
    let grid = [0.01, 0.5, 1.0];
    let loose = OracleSettings { tolerance: 1e-6, x0: None };
    let a = compare_bessel(&eq, c(40.0, 0.0), &grid, false, &loose).unwrap();
    let b = compare_bessel(&eq, c(40.0, 0.0), &grid, false, &OracleSettings::default()).unwrap();
    assert!(b.max_deviation < a.max_deviation, "{} vs {}", b.max_deviation, a.max_deviation);
}

#[test]
fn shooting_finds_integer_eigenvalues() {
    let eq = equation(vec![0.5], vec![], PI);
    let z = CMat::zeros(1, 1);
    for n in [1.0, 4.0] {
        let r = shooting_eigenvalue(&eq, &z, &z, c(n + 0.05, 0.0), &OracleSettings::default()).unwrap();
        assert!((r - c(n, 0.0)).norm() < 1e-10, "{r}");
    }
}
