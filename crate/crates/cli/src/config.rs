//! TOML problem description.
//!
//! ```toml
//! [order]
//! nu = [0.7, 0.3]
//!
//! [potential]
//! kind = "polynomial"                 # "zero" | "polynomial" | "nodes"
//! coefficients = [[[1.0, 0.0], [0.5, 0.0], [0.5, 0.0], [0.0, 0.0]]]
//!
//! [boundary]
//! length = 1.0
//! h = [[0.3, 0.0], [0.1, 0.0], [0.1, 0.0], [-0.2, 0.0]]
//! H = [[0.2, 0.0], [0.0, 0.0], [0.0, 0.0], [0.1, 0.0]]
//!
//! [solver]
//! picard_tol = 1e-12
//!
//! [tasks.eigs]
//! n = [1, 30]
//! ```
//!
//! Matrices are row-major lists of `[re, im]` pairs.

use std::path::Path;

use msl_core::linalg::{c, CMat, C64};
use msl_core::oracle::OracleSettings;
use msl_core::quadrature::MeshParams;
use msl_core::{BoundaryProblem, ContourSettings, Equation, Error, Potential, SingularOrder, SolverSettings};
use serde::Deserialize;

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub order: OrderSection,
    #[serde(default)]
    pub potential: PotentialSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub tasks: Tasks,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSection {
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    #[default]
    Zero,
    Polynomial,
    Nodes,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(default)]
    pub kind: PotentialKind,
    /// `Q_k` in `sum_k Q_k x^k`.
    #[serde(default)]
    pub coefficients: Vec<Vec<Pair>>,
    /// Node abscissas and values for piecewise interpolation.
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub values: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub length: f64,
    #[serde(default)]
    pub h: Option<Vec<Pair>>,
    #[serde(default, rename = "H")]
    pub big_h: Option<Vec<Pair>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub mesh: MeshParams,
    pub contour: ContourSettings,
    pub oracle: OracleSettings,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        SolverSection {
            picard_tol: s.picard_tol,
            picard_max_iter: s.picard_max_iter,
            mesh: s.mesh,
            contour: ContourSettings::default(),
            oracle: OracleSettings::default(),
        }
    }
}

impl SolverSection {
    pub fn fss(&self) -> SolverSettings {
        SolverSettings {
            mesh: self.mesh,
            picard_tol: self.picard_tol,
            picard_max_iter: self.picard_max_iter,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tasks {
    #[serde(default)]
    pub fss: FssTask,
    #[serde(default)]
    pub stokes: StokesTask,
    #[serde(default)]
    pub eigs: SpectrumTask,
    #[serde(default)]
    pub weights: Option<SpectrumTask>,
    #[serde(default, rename = "recover-nu")]
    pub recover_nu: Option<SpectrumTask>,
    #[serde(default)]
    pub verify: VerifyTask,
    #[serde(default, rename = "oracle-diff")]
    pub oracle_diff: OracleTask,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FssTask {
    pub lambda: Pair,
    /// Fractions of `T`; absolute abscissas are `x * T`.
    pub x: Vec<f64>,
    pub families: Vec<String>,
}

impl Default for FssTask {
    fn default() -> Self {
        FssTask {
            lambda: [100.0, 0.0],
            x: vec![0.01, 0.1, 0.25, 0.5, 0.75, 1.0],
            families: ["S1", "S2", "S1*", "S2*", "Y1", "Y2"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StokesTask {
    /// `|rho|` ladder: `points` geometric values from `start` to `start * span`.
    pub start: f64,
    pub span: f64,
    pub points: usize,
    /// Ray arguments; one fit per ray.
    pub angles: Vec<f64>,
}

impl Default for StokesTask {
    fn default() -> Self {
        StokesTask {
            start: 16.0,
            span: 32.0,
            points: 6,
            angles: vec![0.0, -0.05],
        }
    }
}

/// Circle indices either as an inclusive `[first, last]` range or as an
/// explicit list in `ladder`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumTask {
    pub n: Option<[usize; 2]>,
    pub ladder: Option<Vec<usize>>,
    /// Also search `|lambda| < low_radius` below the first circle.
    pub low: bool,
}

impl Default for SpectrumTask {
    fn default() -> Self {
        SpectrumTask {
            n: Some([1, 30]),
            ladder: None,
            low: false,
        }
    }
}

impl SpectrumTask {
    pub fn indices(&self) -> Result<Vec<usize>, Error> {
        if let Some(l) = &self.ladder {
            if l.is_empty() || l.contains(&0) {
                return Err(Error::InvalidInput("tasks: ladder must be non-empty with indices >= 1".into()));
            }
            return Ok(l.clone());
        }
        match self.n {
            Some([a, b]) if a >= 1 && a <= b => Ok((a..=b).collect()),
            Some([a, b]) => Err(Error::InvalidInput(format!("tasks: n = [{a}, {b}] is not a range of indices >= 1"))),
            None => Err(Error::InvalidInput("tasks: give either n or ladder".into())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyTask {
    pub lambdas: Vec<Pair>,
    /// Fractions of `T` at which the Wronskian identities are checked.
    pub x: Vec<f64>,
    /// Birkhoff contraction checks at these `rho`.
    pub rhos: Vec<Pair>,
    /// Real `rho` for the sector-boundary comparison; skipped when absent.
    pub sector_rho: Option<f64>,
}

impl Default for VerifyTask {
    fn default() -> Self {
        VerifyTask {
            lambdas: vec![[5.0, 2.0], [-30.0, 0.0], [400.0, 0.0]],
            x: vec![0.02, 0.3, 0.9],
            rhos: vec![[16.0, 0.0], [30.0, 5.0]],
            sector_rho: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleTask {
    pub lambdas: Vec<Pair>,
    /// Circles whose roots are re-derived by shooting.
    pub shooting: Vec<usize>,
}

impl Default for OracleTask {
    fn default() -> Self {
        OracleTask {
            lambdas: vec![[5.0, 2.0], [-30.0, 0.0], [400.0, 0.0]],
            shooting: vec![2, 5, 10],
        }
    }
}

fn pair(p: Pair) -> C64 {
    c(p[0], p[1])
}

pub fn complex(p: Pair) -> C64 {
    pair(p)
}

fn matrix(field: &str, m: usize, entries: &[Pair]) -> Result<CMat, Error> {
    if entries.len() != m * m {
        return Err(Error::InvalidInput(format!(
            "{field}: expected {} entries for a {m}x{m} matrix, got {}",
            m * m,
            entries.len()
        )));
    }
    Ok(CMat::from_row_iterator(m, m, entries.iter().map(|&p| pair(p))))
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config, Error> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Error> {
        let nu = &self.order.nu;
        if nu.is_empty() {
            return Err(Error::InvalidInput("order.nu: at least one entry is required".into()));
        }
        if let Some(i) = nu.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput(format!(
                "order.nu: entries must be nonincreasing, but nu[{}] = {} < nu[{}] = {}",
                i,
                nu[i],
                i + 1,
                nu[i + 1]
            )));
        }
        let s = &self.solver;
        let positive = [
            ("solver.picard_tol", s.picard_tol),
            ("solver.contour.weight_tol", s.contour.weight_tol),
            ("solver.contour.newton_tol", s.contour.newton_tol),
            ("solver.contour.alias_tol", s.contour.alias_tol),
            ("solver.contour.safety_floor", s.contour.safety_floor),
            ("solver.oracle.tolerance", s.oracle.tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name}: tolerance must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Multiplies every solver tolerance by `f`.
    pub fn scale_tolerances(&mut self, f: f64) -> Result<(), Error> {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::InvalidInput(format!("--tol-scale must be positive, got {f}")));
        }
        let s = &mut self.solver;
        s.picard_tol *= f;
        s.contour.weight_tol *= f;
        s.contour.newton_tol *= f;
        s.contour.alias_tol *= f;
        s.oracle.tolerance *= f;
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.order.nu.len()
    }

    pub fn potential(&self) -> Result<Potential, Error> {
        let m = self.m();
        let p = &self.potential;
        match p.kind {
            PotentialKind::Zero => Ok(Potential::zero(m)),
            PotentialKind::Polynomial => {
                let coeffs = p
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, e)| matrix(&format!("potential.coefficients[{k}]"), m, e))
                    .collect::<Result<Vec<_>, _>>()?;
                Potential::polynomial(coeffs)
            }
            PotentialKind::Nodes => {
                let values = p
                    .values
                    .iter()
                    .enumerate()
                    .map(|(k, e)| matrix(&format!("potential.values[{k}]"), m, e))
                    .collect::<Result<Vec<_>, _>>()?;
                Potential::nodes(p.x.clone(), values)
            }
        }
    }

    pub fn equation(&self) -> Result<Equation, Error> {
        Equation::new(
            SingularOrder::new(self.order.nu.clone())?,
            self.potential()?,
            self.boundary.length,
            self.solver.fss(),
        )
    }

    pub fn problem(&self) -> Result<BoundaryProblem, Error> {
        let m = self.m();
        let b = &self.boundary;
        let h = match &b.h {
            Some(e) => matrix("boundary.h", m, e)?,
            None => CMat::zeros(m, m),
        };
        let big_h = match &b.big_h {
            Some(e) => matrix("boundary.H", m, e)?,
            None => CMat::zeros(m, m),
        };
        BoundaryProblem::new(self.equation()?, h, big_h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: &str = r#"
[order]
nu = [0.5]

[boundary]
length = 3.141592653589793
"#;

    #[test]
    fn minimal_config() {
        let cfg = Config::parse(HALF).unwrap();
        let p = cfg.problem().unwrap();
        assert_eq!(p.m(), 1);
        assert!(p.eq.potential.is_zero());
        assert_eq!(cfg.tasks.eigs.indices().unwrap().len(), 30);
    }

    #[test]
    fn nu_ordering_names_the_field() {
        let text = HALF.replace("nu = [0.5]", "nu = [0.3, 0.7]");
        let err = Config::parse(&text).unwrap_err().to_string();
        assert!(err.contains("order.nu"), "{err}");
    }

    #[test]
    fn matrix_size_is_checked() {
        let text = format!("{HALF}h = [[1.0, 0.0], [2.0, 0.0]]\n");
        let err = Config::parse(&text).unwrap().problem().unwrap_err().to_string();
        assert!(err.contains("boundary.h"), "{err}");
    }

    #[test]
    fn tolerances_scale_and_must_be_positive() {
        let mut cfg = Config::parse(HALF).unwrap();
        let before = cfg.solver.picard_tol;
        cfg.scale_tolerances(10.0).unwrap();
        assert_eq!(cfg.solver.picard_tol, 10.0 * before);
        assert!(cfg.scale_tolerances(0.0).is_err());
        let text = format!("{HALF}\n[solver]\npicard_tol = -1.0\n");
        assert!(Config::parse(&text).unwrap_err().to_string().contains("solver.picard_tol"));
    }
}
