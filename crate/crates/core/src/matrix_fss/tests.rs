use super::*;
use crate::linalg::{identity, max_norm, wronskian};

fn p3() -> Equation {
    crate::catalog::mixed_equation(1.0)
}

fn scalar(nu: f64, q: f64, t: f64) -> Equation {
    Equation::new(
        SingularOrder::new(vec![nu]).unwrap(),
        Potential::polynomial(vec![CMat::from_element(1, 1, c(q, 0.0))]).unwrap(),
        t,
        SolverSettings::default(),
    )
    .unwrap()
}

#[test]
fn order_validation() {
    assert!(SingularOrder::new(vec![0.3, 0.7]).is_err());
    assert!(SingularOrder::new(vec![2.0]).is_err());
    assert!(SingularOrder::new(vec![]).is_err());
    let o = SingularOrder::new(vec![0.7, 0.3]).unwrap();
    assert_eq!(o.beta_exp, 1.0);
    assert!((SingularOrder::new(vec![0.3]).unwrap().beta_exp - 0.6).abs() < 1e-15);
    assert!((o.mu(1, 1) - 0.2).abs() < 1e-15);
}

#[test]
fn diagonal_families_are_diagonal_with_unit_wronskian() {
    let eq = p3();
    let xs = [0.01, 0.3, 0.9];
    let rho = c(7.0, 0.5);
    let c1 = build_diagonal(&eq, Family::C1, &xs, rho).unwrap();
    let c2 = build_diagonal(&eq, Family::C2, &xs, rho).unwrap();
    let e1 = build_diagonal(&eq, Family::E1, &xs, rho).unwrap();
    let e2 = build_diagonal(&eq, Family::E2, &xs, rho).unwrap();
    for i in 0..xs.len() {
        assert_eq!(c1.values[i][(0, 1)], c(0.0, 0.0));
        let w = wronskian(&c1.values[i], &c1.derivatives[i], &c2.values[i], &c2.derivatives[i]);
        assert!(max_norm(&(w - identity(2))) < 1e-10);
        let w = wronskian(&e1.values[i], &e1.derivatives[i], &e2.values[i], &e2.derivatives[i]);
        assert!(max_norm(&(w - identity(2) * (c(0.0, -2.0) * rho))) < 1e-9 * rho.norm());
    }
    assert!(build_diagonal(&eq, Family::S1, &xs, rho).is_err());
    assert!(build_diagonal(&eq, Family::E1, &xs, c(0.0, 0.0)).is_err());
}

#[test]
fn zero_potential_gives_diagonal_solutions() {
    let eq = p3().with_potential(Potential::zero(2)).unwrap();
    for &lambda in &[c(3.0, 1.0), c(900.0, 0.0)] {
        let sol = solve_bessel(&eq, lambda, None, false).unwrap();
        assert_eq!(sol.report().deltas, vec![0.0]);
        let rho = sqrt_lambda(lambda);
        for &x in &[1e-6, 0.05, 0.5, 1.0] {
            let p = sol.at(x).unwrap();
            let c1 = build_diagonal(&eq, Family::C1, &[x], rho).unwrap();
            let c2 = build_diagonal(&eq, Family::C2, &[x], rho).unwrap();
            assert!(max_norm(&(&p.s[0] - &c1.values[0])) <= 1e-14 * max_norm(&c1.values[0]));
            assert!(max_norm(&(&p.ds[1] - &c2.derivatives[0])) <= 1e-14 * max_norm(&c2.derivatives[0]));
        }
    }
}

#[test]
fn constant_potential_matches_trigonometric_closed_form() {
    // nu = 1/2 removes the singular term, so S_1 = cos(kx), S_2 = sin(kx)/k
    // with k^2 = lambda - q.
    let q = 3.0;
    let eq = scalar(0.5, q, 2.0);
    for &lambda in &[c(10.0, 0.0), c(1.0, 4.0), c(-20.0, 0.0), c(2500.0, 30.0)] {
        let sol = solve_bessel(&eq, lambda, None, false).unwrap();
        let k = (lambda - q).sqrt();
        for &x in &[1e-4, 0.3, 1.1, 2.0] {
            let p = sol.at(x).unwrap();
            let kx = k * x;
            let scale = (k.im.abs() * x).exp();
            let exp = [kx.cos(), kx.sin() / k];
            let dexp = [-k * kx.sin(), kx.cos()];
            for j in 0..2 {
                assert!(
                    (p.s[j][(0, 0)] - exp[j]).norm() < 1e-11 * scale,
                    "lambda {lambda} x {x} j {j}: {} vs {}",
                    p.s[j][(0, 0)],
                    exp[j]
                );
                assert!((p.ds[j][(0, 0)] - dexp[j]).norm() < 1e-11 * scale * (1.0 + k.norm()));
            }
        }
    }
}

#[test]
fn block_wronskian_identities() {
    let eq = p3();
    for &lambda in &[c(5.0, 2.0), c(-30.0, 0.0), c(400.0, 0.0), c(2000.0, -300.0)] {
        let s = solve_bessel(&eq, lambda, None, false).unwrap();
        let t = solve_bessel(&eq, lambda, None, true).unwrap();
        for &x in &[0.001, 0.2, 0.7, 1.0] {
            let a = s.at(x).unwrap();
            let b = t.at(x).unwrap();
            let scale = (sqrt_lambda(lambda).im.abs() * x).exp().powi(2);
            let w = |j: usize, k: usize| wronskian(&b.s[j], &b.ds[j], &a.s[k], &a.ds[k]);
            let id = identity(2);
            assert!(max_norm(&(w(0, 1) - &id)) < 1e-9 * scale, "{lambda} {x}");
            assert!(max_norm(&(w(1, 0) + &id)) < 1e-9 * scale);
            assert!(max_norm(&w(0, 0)) < 1e-9 * scale);
            assert!(max_norm(&w(1, 1)) < 1e-9 * scale);
        }
    }
}

#[test]
fn small_x_behaviour() {
    let eq = p3();
    let lambda = c(4.0, 1.0);
    let s = solve_bessel(&eq, lambda, None, false).unwrap();
    let rho = sqrt_lambda(lambda);
    let mut xs = Vec::new();
    let mut ds = Vec::new();
    for k in 4..12 {
        let x = 0.5f64.powi(k);
        let p = s.at(x).unwrap();
        let cc = build_diagonal(&eq, Family::C1, &[x], rho).unwrap();
        let q = 1;
        let mu = eq.order.mu(1, q);
        let col = (&p.s[0] - &cc.values[0]).column(q).into_owned();
        xs.push(x);
        ds.push(col.iter().map(|z| z.norm()).fold(0.0, f64::max) * x.powf(-mu));
        // bounded after scaling
        assert!(p.s[0].column(q).iter().map(|z| z.norm()).fold(0.0, f64::max) * x.powf(-mu) < 2.0);
    }
    let fit = crate::fit::loglog_slope(&xs, &ds).unwrap();
    assert!(fit.slope > 2.0 * eq.order.nu[0] - 0.1, "slope {}", fit.slope);
}

#[test]
fn s_is_entire_in_lambda() {
    let eq = p3();
    let r = entirety_probe(&eq, 1, 0.6, c(2.0, 0.0), 1.0, 24).unwrap();
    assert!(r < 1e-10, "{r}");
    let r0 = entirety_probe(&eq.with_potential(Potential::zero(2)).unwrap(), 2, 0.6, c(0.0, 0.0), 1.0, 16).unwrap();
    assert!(r0 < 1e-12, "{r0}");
}
