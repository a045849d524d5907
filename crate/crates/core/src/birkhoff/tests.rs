use super::*;
use crate::fit::loglog_slope;
use crate::linalg::wronskian;
use crate::matrix_fss::{build_diagonal, solve_bessel, Potential, SingularOrder, SolverSettings};

fn p3() -> Equation {
    crate::catalog::mixed_equation(1.0)
}

#[test]
fn zero_potential_gives_jost_solutions() {
    let eq = p3().with_potential(Potential::zero(2)).unwrap();
    let rho = c(15.0, 2.0);
    for k in 1..=2 {
        let y = solve_y(&eq, k, rho, None).unwrap();
        assert_eq!(y.report().deltas, vec![0.0]);
        assert_eq!(y.kernel_bound, 0.0);
        let xs = [0.01, 0.5, 1.0];
        let e = build_diagonal(&eq, if k == 1 { Family::E1 } else { Family::E2 }, &xs, rho).unwrap();
        let ev = y.evaluate(&xs).unwrap();
        for i in 0..xs.len() {
            assert!(max_norm(&(&ev.values[i] - &e.values[i])) <= 1e-14 * max_norm(&e.values[i]));
        }
    }
}

#[test]
fn birkhoff_solutions_solve_the_equation() {
    // Wronskians against the adjoint Bessel solutions are x-independent
    // exactly when Y solves the equation.
    let eq = p3();
    for &rho in &[c(20.0, 0.0), c(18.0, 6.0), c(25.0, -4.0)] {
        let st = solve_bessel(&eq, rho * rho, None, true).unwrap();
        for k in 1..=2 {
            let y = solve_y(&eq, k, rho, None).unwrap();
            let mut first: Option<CMat> = None;
            for &x in &[0.02, 0.3, 0.61, 1.0] {
                let (v, d) = y.at(x).unwrap();
                let s = st.at(x).unwrap();
                let w = wronskian(&s.s[0], &s.ds[0], &v, &d);
                match &first {
                    None => first = Some(w),
                    Some(w0) => assert!(max_norm(&(&w - w0)) < 1e-9 * max_norm(w0), "rho {rho} k {k} x {x}"),
                }
            }
        }
    }
}

#[test]
fn asymptotic_law_and_contraction() {
    let eq = p3();
    let rhos = [16.0, 24.0, 36.0, 54.0, 81.0, 121.5];
    let mut dev = Vec::new();
    let mut bounds = Vec::new();
    for &r in &rhos {
        let y = solve_y(&eq, 1, c(r, 0.0), None).unwrap();
        assert!(y.kernel_bound < CONTRACTION_LIMIT);
        assert!(y.report().contraction <= y.kernel_bound, "{} > {}", y.report().contraction, y.kernel_bound);
        let (v, d) = y.asymptotic_deviation(1.0).unwrap();
        dev.push(v.max(d));
        bounds.push(y.kernel_bound);
    }
    let fit = loglog_slope(&rhos, &dev).unwrap();
    assert!(fit.slope <= -eq.order.beta_exp + 0.1, "slope {}", fit.slope);
    let kfit = loglog_slope(&rhos, &bounds).unwrap();
    assert!(kfit.slope < -0.8, "kernel bound slope {}", kfit.slope);
}

#[test]
fn small_rho_is_rejected_with_the_bound() {
    let q = CMat::from_element(1, 1, c(400.0, 0.0));
    let eq = Equation::new(
        SingularOrder::new(vec![0.3]).unwrap(),
        Potential::polynomial(vec![q]).unwrap(),
        1.0,
        SolverSettings::default(),
    )
    .unwrap();
    match solve_y(&eq, 1, c(3.0, 0.0), None) {
        Err(Error::RhoTooSmall { bound, .. }) => assert!(bound >= CONTRACTION_LIMIT),
        other => panic!("expected rejection, got {:?}", other.map(|y| y.kernel_bound)),
    }
    let r = adaptive_threshold(&eq, c(1.0, 0.0), 3.0).unwrap();
    assert!(r > 3.0);
    assert!(solve_y(&eq, 2, c(r, 0.0), None).unwrap().kernel_bound < CONTRACTION_LIMIT);
}

#[test]
fn sector_boundary_discrepancy_is_the_predicted_homogeneous_term() {
    let eq = p3();
    let rep = sector_boundary(&eq, 30.0, &[0.05, 0.4, 1.0]).unwrap();
    for k in 0..2 {
        assert!(rep.cross_sector[k] > 1e-4, "{:?}", rep);
        assert!(rep.cross_sector_explained[k] < 1e-8, "{:?}", rep);
        assert!(rep.within_sector[k] < 1e-8, "{:?}", rep);
    }
    let free = sector_boundary(&eq.with_potential(Potential::zero(2)).unwrap(), 30.0, &[0.5]).unwrap();
    assert!(free.cross_sector[0] < 1e-14 && free.cross_sector[1] < 1e-14);
}
