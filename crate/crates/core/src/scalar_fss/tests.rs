use super::*;
use crate::linalg::{c, I};

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

// Reference values from an independent arbitrary-precision evaluation of
// Bessel and Hankel functions:
//   c_1(z) = Gamma(1-nu) 2^{-nu} sqrt(z) J_{-nu}(z)            (c10 = 1)
//   c_2(z) = c20 Gamma(1+nu) 2^{nu} sqrt(z) J_{nu}(z)          (c20 = 1/(2 nu))
//   e_1(z) = sqrt(pi z / 2) exp(i (nu pi/2 + pi/4)) H1_nu(z)
struct Ref {
    nu: f64,
    beta: [[C64; 2]; 2],
    e1: [(C64, C64, C64); 5],
    cs: [(C64, C64, C64, C64, C64); 4],
}

fn refs() -> Vec<Ref> {
    vec![
        Ref {
            nu: 0.3,
            beta: [
                [c(1.3974118202702874, -0.45404662415449446), c(-0.25996006240480814, 0.80007480438632954)],
                [c(1.3974118202702874, 0.45404662415449446), c(-0.25996006240480814, -0.80007480438632954)],
            ],
            e1: [
                (c(3.7, 0.0), c(-0.85672280498569382, -0.51060085477307136), c(0.51219000012316121, -0.86197699399775632)),
                (c(0.8, 2.5), c(0.05616170226260209, 0.057018986706815496), c(-0.056335465524613328, 0.056002769199424044)),
                (c(5.0, -1.0), c(0.73124422698019616, -2.622505398065282), c(2.6299626556907059, 0.73505791577210127)),
                (c(0.6, 0.9), c(0.32452229128052878, 0.21041796856514516), c(-0.1947079558964661, 0.32394799421106193)),
                (c(12.0, -3.0), c(16.902547857683019, -10.899697536878386), c(10.901431956348617, 16.913060381430581)),
            ],
            cs: [
                (c(1.2, 0.0), c(0.55777852812403733, 0.0), c(-0.61990913510730551, 0.0), c(1.4346747779944218, 0.0), c(0.19834395487631677, 0.0)),
                (c(1.0, 1.3), c(1.3654783506626333, -0.88232025302986509), c(-1.0718269157598779, -1.176151367541145), c(2.8418049469697991, 0.77730991066838764), c(0.80924918420120236, -2.5350218933581756)),
                (c(7.5, 0.0), c(0.52776447314144423, 0.0), c(-0.65516964991407151, 0.0), c(1.4664440660629819, 0.0), c(0.07433307207178115, 0.0)),
                (c(6.0, 4.0), c(18.973953181791051, 13.175945489935425), c(13.168689546801969, -18.995693388272585), c(0.84883438194674519, 40.319762946191498), c(40.378589891240361, -0.9060766631267015)),
            ],
        },
        Ref {
            nu: 0.7,
            beta: [
                [c(0.80007480438632954, 0.25996006240480814), c(0.45404662415449446, 1.3974118202702874)],
                [c(0.80007480438632954, -0.25996006240480814), c(0.45404662415449446, -1.3974118202702874)],
            ],
            e1: [
                (c(3.7, 0.0), c(-0.83437694779380652, -0.55849934093319871), c(0.55570231141057442, -0.82653365142173713)),
                (c(0.8, 2.5), c(0.058754266043866797, 0.061777463451380248), c(-0.062866506923464089, 0.058990837076783883)),
                (c(5.0, -1.0), c(0.83029855241322599, -2.5816647592832731), c(2.5707118786702866, 0.824152113472528)),
                (c(0.6, 0.9), c(0.35229317045266686, 0.2603642886275683), c(-0.28660664583632663, 0.35201721097811155)),
                (c(12.0, -3.0), c(17.01775152766521, -10.593550038828576), c(10.591209081390192, 17.00198491112478)),
            ],
            cs: [
                (c(1.2, 0.0), c(-0.04076850812275353, 0.0), c(-1.4278800266406295, 0.0), c(0.71287222312797839, 0.0), c(0.43896649093604093, 0.0)),
                (c(1.0, 1.3), c(0.52283224510538801, -2.3181418546672945), c(-2.6566189123257772, -0.55442338477215724), c(1.0880694452560719, 0.97857202859011982), c(1.1899978240884156, -0.84990997420140608)),
                (c(7.5, 0.0), c(0.035227896976768299, 0.0), c(-1.4673834766490291, 0.0), c(0.66924336919784336, 0.0), c(0.50991798329616841, 0.0)),
                (c(6.0, 4.0), c(39.738697360177105, -1.8234737406242477), c(-1.7378278019412284, -39.666318208174367), c(-12.528122235069322, 19.007846696782002), c(18.970635284188312, 12.544562531777851)),
            ],
        },
        Ref {
            nu: 1.6,
            beta: [
                [c(-0.16904118078715241, 1.0672840112373413), c(-0.96106669013992449, 0.15221800983236648)],
                [c(-0.16904118078715241, -1.0672840112373413), c(-0.96106669013992449, -0.15221800983236648)],
            ],
            e1: [
                (c(3.7, 0.0), c(-0.67689299945694432, -0.79208569671308557), c(0.7442415045420465, -0.60644289375329679)),
                (c(0.8, 2.5), c(0.073434153406639447, 0.092106687458307369), c(-0.10633742440647446, 0.075448669079034749)),
                (c(5.0, -1.0), c(1.3107865995893727, -2.3116256238383968), c(2.2202739900351131, 1.2318387023351647)),
                (c(0.6, 0.9), c(0.49637476044644159, 0.65450978002258982), c(-1.0771879646985544, 0.39400089010050865)),
                (c(12.0, -3.0), c(17.529951971370734, -8.9963876336411955), c(8.9867259483296165, 17.378948627598174)),
            ],
            cs: [
                (c(1.2, 0.0), c(1.106551091827391, 0.0), c(-0.84243537429396267, 0.0), c(0.39791685957726731, 0.0), c(0.60076824863667899, 0.0)),
                (c(1.0, 1.3), c(1.2092490490503132, -0.3546973871908675), c(0.39715921903263131, -0.70766068614097699), c(-0.10058294350733944, 0.94567421285354967), c(1.1408186988550471, 0.70407931191984167)),
                (c(7.5, 0.0), c(0.98208429117848309, 0.0), c(0.039463180562427982, 0.0), c(-0.38242201214105618, 0.0), c(1.0028756390166454, 0.0)),
                (c(6.0, 4.0), c(0.42858707949422298, 24.419564520843623), c(24.158828091209286, 0.084072547642179922), c(-25.958870492483869, -7.9273341435558006), c(-8.3790232574848604, 25.466395064280201)),
            ],
        },
    ]
}

#[test]
fn cosine_series_coefficients() {
    let o = ScalarOrder::new(0.5).unwrap();
    let s = series_coeffs(o, 1, c(1.0, 0.0), 2).unwrap();
    assert_eq!(s.coeffs.len(), 3);
    assert!(close(s.coeffs[1], c(-0.5, 0.0), 1e-16));
    assert!(close(s.coeffs[2], c(1.0 / 24.0, 0.0), 1e-16));
    let (v, _) = eval_c(&SeriesSolution::adaptive(o, 1, c(1.0, 0.0), 2.0).unwrap(), 1.0, c(1.0, 0.0)).unwrap();
    assert!((v.re - 1f64.cos()).abs() < 1e-15);
}

#[test]
fn recursion_residual_is_tiny() {
    for &nu in &[0.3, 0.7, 1.6, 2.45] {
        let o = ScalarOrder::new(nu).unwrap();
        for j in 1..=2 {
            let s = SeriesSolution::adaptive(o, j, c(0.7, -0.2), 2.0).unwrap();
            assert_eq!(s.coeffs[0], c(0.7, -0.2));
            for k in 1..s.coeffs.len() {
                let r = s.coeffs[k] * o.denominator(j, k) + s.coeffs[k - 1];
                assert!(r.norm() <= 1e-14 * s.coeffs[k - 1].norm());
            }
            assert!(s.tail_bound < 1e-15);
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(ScalarOrder::new(1.0).is_err());
    assert!(ScalarOrder::new(2.0 + 1e-12).is_err());
    assert!(ScalarOrder::new(-0.5).is_err());
    let o = ScalarOrder::new(0.3).unwrap();
    assert!(series_coeffs(o, 1, c(0.0, 0.0), 3).is_err());
    assert!(series_coeffs(o, 3, c(1.0, 0.0), 3).is_err());
    assert!(eval_jost(o, 1, 0.1, c(1.0, 0.0)).is_err());
    let s = SeriesSolution::adaptive(o, 1, c(1.0, 0.0), 2.0).unwrap();
    assert!(s.eval(3.0, c(1.0, 0.0)).is_err());
}

#[test]
fn series_matches_bessel_reference() {
    for r in refs() {
        let fss = ScalarFss::new(ScalarOrder::new(r.nu).unwrap(), c(1.0, 0.0)).unwrap();
        for &(z, c1, dc1, c2, dc2) in r.cs.iter().filter(|p| p.0.norm() <= 2.0) {
            let (v1, d1) = fss.series[0].eval_unscaled(z).unwrap();
            let (v2, d2) = fss.series[1].eval_unscaled(z).unwrap();
            assert!(close(v1, c1, 1e-14) && close(d1, dc1, 1e-14), "nu {} z {z}", r.nu);
            assert!(close(v2, c2, 1e-14) && close(d2, dc2, 1e-14), "nu {} z {z}", r.nu);
        }
    }
}

#[test]
fn jost_matches_hankel_reference() {
    for r in refs() {
        let o = ScalarOrder::new(r.nu).unwrap();
        let eng = JostEngine::new(o).unwrap();
        for &(z, e, de) in &r.e1 {
            let (v, d) = eng.e1(z).unwrap();
            assert!(close(v, e, 1e-13), "nu {} z {z}: {v} vs {e}", r.nu);
            assert!(close(d, de, 1e-13), "nu {} z {z}: {d} vs {de}", r.nu);
        }
    }
}

#[test]
fn beta_matches_reference_and_identities() {
    for r in refs() {
        let o = ScalarOrder::new(r.nu).unwrap();
        let b = beta_constants(o, c(1.0, 0.0), c(1.0 / (2.0 * r.nu), 0.0)).unwrap();
        for k in 0..2 {
            for j in 0..2 {
                assert!(close(b.beta[k][j], r.beta[k][j], 1e-13), "nu {}", r.nu);
            }
        }
        assert!(close(b.det(), c(0.0, -2.0), 1e-12));
        for j in 0..2 {
            let rel = (I * std::f64::consts::PI * o.mu(j + 1)).exp() * b.beta[0][j];
            assert!(close(b.beta[1][j], rel, 1e-12));
        }
        assert!(b.check_deviation < 1e-12);
    }
}

#[test]
fn closed_forms_at_half() {
    let o = ScalarOrder::new(0.5).unwrap();
    let b = beta_constants(o, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
    assert!(close(b.beta[0][0], c(1.0, 0.0), 1e-14));
    assert!(close(b.beta[0][1], c(0.0, 1.0), 1e-14));
    assert!(close(b.beta[1][0], c(1.0, 0.0), 1e-14));
    assert!(close(b.beta[1][1], c(0.0, -1.0), 1e-14));
    for &x in &[1.0, 2.5, 7.0, 30.0] {
        let (e, de) = eval_jost(o, 1, x, c(1.0, 0.0)).unwrap();
        assert!(close(e, (I * x).exp(), 1e-15));
        assert!(close(de, I * (I * x).exp(), 1e-15));
    }
    let fss = ScalarFss::new(o, c(1.0, 0.0)).unwrap();
    let rho = c(3.0, 0.5);
    let lambda = rho * rho;
    for &x in &[0.1, 0.5, 1.0, 2.0, 3.0] {
        let (c1, dc1) = fss.c(1, x, lambda, rho).unwrap();
        let (c2, dc2) = fss.c(2, x, lambda, rho).unwrap();
        assert!(close(c1, (rho * x).cos(), 1e-14));
        assert!(close(dc1, -rho * (rho * x).sin(), 1e-14));
        assert!(close(c2, (rho * x).sin() / rho, 1e-14));
        assert!(close(dc2, (rho * x).cos(), 1e-14));
    }
}

#[test]
fn scaled_solutions_switch_representation_consistently() {
    for r in refs() {
        let o = ScalarOrder::new(r.nu).unwrap();
        let fss = ScalarFss::new(o, c(1.0, 0.0)).unwrap();
        // x = 1 and rho = 6 + 4i exercise the Jost route for c_j
        let rho = c(6.0, 4.0);
        let &(_, c1, dc1, c2, dc2) = &r.cs[3];
        let (v1, d1) = fss.c(1, 1.0, rho * rho, rho).unwrap();
        let (v2, d2) = fss.c(2, 1.0, rho * rho, rho).unwrap();
        let s1 = cpow(rho, -o.mu1);
        let s2 = cpow(rho, -o.mu2);
        assert!(close(v1, s1 * c1, 1e-12), "nu {}", r.nu);
        assert!(close(d1, s1 * rho * dc1, 1e-12));
        assert!(close(v2, s2 * c2, 1e-12));
        assert!(close(d2, s2 * rho * dc2, 1e-12));
        // overlap band 1 <= |rho x| <= 2: series and Jost agree for e_k
        for &x in &[0.2, 0.25, 0.3] {
            let rho = c(5.0, 2.0);
            let lambda = rho * rho;
            let cc1 = fss.series[0].eval_lambda(x, lambda).unwrap();
            let cc2 = fss.series[1].eval_lambda(x, lambda).unwrap();
            for k in 1..=2 {
                let via_c = fss.e_from_c(k, rho, cc1, cc2);
                let direct = fss.e(k, x, rho).unwrap();
                assert!(close(direct.0, via_c.0, 1e-12) && close(direct.1, via_c.1, 1e-12));
            }
        }
    }
}

#[test]
fn wronskians_are_constant() {
    for &nu in &[0.3, 0.7, 1.6] {
        let o = ScalarOrder::new(nu).unwrap();
        let fss = ScalarFss::new(o, c(1.3, 0.4)).unwrap();
        for &rho in &[c(0.5, 0.0), c(4.0, 0.0), c(10.0, 3.0), c(7.0, -2.0), c(0.0, 3.0)] {
            let xs: Vec<f64> = (1..40).map(|i| 0.05 * i as f64).collect();
            let tab = fss.table(rho * rho, rho, &xs, true).unwrap();
            for p in &tab {
                let wc = p.c[0] * p.dc[1] - p.dc[0] * p.c[1];
                let we = p.e[0] * p.de[1] - p.de[0] * p.e[1];
                let cscale = (p.c[0] * p.dc[1]).norm().max(1.0);
                assert!((wc - 1.0).norm() <= 1e-13 * cscale, "nu {nu} rho {rho}: {wc}");
                let scale = (p.e[0].norm() * p.de[1].norm()).max(rho.norm());
                assert!((we - c(0.0, -2.0) * rho).norm() <= 1e-12 * scale, "nu {nu} rho {rho}: {we}");
            }
        }
    }
}

#[test]
fn table_agrees_with_pointwise_evaluation() {
    let o = ScalarOrder::new(0.3).unwrap();
    let fss = ScalarFss::new(o, c(1.0, 0.0)).unwrap();
    for &rho in &[c(40.0, 0.3), c(25.0, -0.2), c(3.0, 9.0)] {
        let xs: Vec<f64> = (1..60).map(|i| i as f64 / 59.0).collect();
        let tab = fss.table(rho * rho, rho, &xs, true).unwrap();
        for (p, &x) in tab.iter().zip(&xs) {
            for k in 1..=2 {
                let (e, de) = fss.e(k, x, rho).unwrap();
                assert!(close(p.e[k - 1], e, 1e-12), "rho {rho} x {x}");
                assert!(close(p.de[k - 1], de, 1e-12 * rho.norm()));
            }
        }
    }
}

#[test]
fn jost_asymptotic_constant_is_finite() {
    let o = ScalarOrder::new(0.3).unwrap();
    let grid: Vec<f64> = (0..50).map(|i| 1.0 + i as f64).collect();
    for k in 1..=2 {
        let js = JostSolution::on_grid(o, k, c(1.0, 0.0), &grid).unwrap();
        assert!(js.m0[0] < 1.0 && js.m0[1] < 1.0);
        // the deviation itself decays like 1/x
        let dev = |i: usize| (js.values[i] * (c(0.0, if k == 1 { -1.0 } else { 1.0 }) * grid[i]).exp() - 1.0).norm();
        let slope = (dev(49) / dev(9)).ln() / (grid[49] / grid[9]).ln();
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
    }
}
