//! Reference problems shared by the tests, the acceptance suite, the bench
//! and the command-line tool.

use std::f64::consts::PI;

use crate::linalg::{c, diag, CMat};
use crate::matrix_fss::{Equation, Potential, SingularOrder, SolverSettings};
use crate::spectral::BoundaryProblem;

pub fn equation(nu: Vec<f64>, potential: Potential, length: f64) -> Equation {
    Equation::new(SingularOrder::new(nu).unwrap(), potential, length, SolverSettings::default()).unwrap()
}

/// `m = 1`, `nu = 1/2`, `Q = 0`, `T = pi`: cosines and sines.
pub fn half_order_free() -> BoundaryProblem {
    let eq = equation(vec![0.5], Potential::zero(1), PI);
    BoundaryProblem::new(eq, CMat::zeros(1, 1), CMat::zeros(1, 1)).unwrap()
}

/// `m = 1`, `nu = 0.3`, `Q(x) = 0.1 x`, `T = 1`.
pub fn scalar_linear() -> Equation {
    equation(
        vec![0.3],
        Potential::polynomial(vec![CMat::zeros(1, 1), CMat::from_element(1, 1, c(0.1, 0.0))]).unwrap(),
        1.0,
    )
}

/// `Q(x) = s (Q0 + Q1 x + Q2 x^2)` with a coupling `Q0` entry.
pub fn mixed_potential(scale: f64) -> Potential {
    let r = |v: [f64; 4]| CMat::from_row_slice(2, 2, &v.map(|x| c(scale * x, 0.0)));
    Potential::polynomial(vec![
        r([1.0, 0.5, 0.5, 0.0]),
        r([1.0, 0.0, 0.0, 0.0]),
        r([0.0, 0.0, 0.0, -0.5]),
    ])
    .unwrap()
}

/// `m = 2`, `nu = (0.7, 0.3)`, `T = 1` with [`mixed_potential`].
pub fn mixed_equation(scale: f64) -> Equation {
    equation(vec![0.7, 0.3], mixed_potential(scale), 1.0)
}

pub fn mixed_h() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.0), c(0.1, 0.0), c(-0.2, 0.0)])
}

pub fn mixed_big_h() -> CMat {
    diag(&[c(0.2, 0.0), c(0.1, 0.0)])
}

/// [`mixed_equation`] with unit scale and both boundary matrices.
pub fn mixed_problem() -> BoundaryProblem {
    BoundaryProblem::new(mixed_equation(1.0), mixed_h(), mixed_big_h()).unwrap()
}

/// [`mixed_equation`] with potential scale `scale`, `h = 0` and
/// [`mixed_big_h`].
pub fn mixed_problem_without_h(scale: f64) -> BoundaryProblem {
    BoundaryProblem::new(mixed_equation(scale), CMat::zeros(2, 2), mixed_big_h()).unwrap()
}

/// `Q = 0`, `h = H = 0` for the given orders on `(0, 1]`.
pub fn free_problem(nu: Vec<f64>) -> BoundaryProblem {
    let m = nu.len();
    BoundaryProblem::new(equation(nu, Potential::zero(m), 1.0), CMat::zeros(m, m), CMat::zeros(m, m)).unwrap()
}
