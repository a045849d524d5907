use msl_core::birkhoff::solve_y;
use msl_core::linalg::{sqrt_lambda, MatrixRecord};
use msl_core::matrix_fss::{build_diagonal, solve_s, solve_s_star, IterationReport};
use msl_core::oracle::OracleSettings;
use msl_core::spectral::{
    eigenvalue_asymptotics, locate_eigenvalues, recover_nu, residue_at, spectrum, weight_asymptotics,
    EigenvalueAsymptotics, LowEigenvalue, NuEstimate, WeightAsymptotics,
};
use msl_core::stokes::{compute_b, geometric_ladder, stokes_asymptotics_from, StokesAsymptotics, StokesRecord, WRONSKIAN_TOL};
use msl_core::verify::{birkhoff_checks, oracle_checks, shooting_checks, wronskian_checks, Check};
use msl_core::{par, BoundaryProblem, CMat, ContourSettings, Error, Family, FssEvaluation, SpectralDatum, C64};
use serde::Serialize;

use crate::config::{complex, Config, SpectrumTask};
use crate::output::{complex_cells, matrix_cells, matrix_headers, num, Table};

/// Result of one command: the CSV table, the JSON document and whether every
/// check it ran passed.
pub struct Outcome {
    pub table: Table,
    pub json: serde_json::Value,
    pub passed: bool,
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::InvalidInput(format!("serialization: {e}")))
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn parse_family(name: &str) -> Result<Family, Error> {
    Ok(match name {
        "C1" => Family::C1,
        "C2" => Family::C2,
        "E1" => Family::E1,
        "E2" => Family::E2,
        "S1" => Family::S1,
        "S2" => Family::S2,
        "S1*" => Family::S1Star,
        "S2*" => Family::S2Star,
        "Y1" => Family::Y1,
        "Y2" => Family::Y2,
        "phi" => Family::Phi,
        other => {
            return Err(Error::InvalidInput(format!(
                "tasks.fss.families: unknown family {other:?} (expected C1, C2, E1, E2, S1, S2, S1*, S2*, Y1, Y2 or phi)"
            )))
        }
    })
}

#[derive(Serialize)]
struct FamilyRecord {
    family: String,
    report: Option<IterationReport>,
}

#[derive(Serialize)]
struct FssDocument {
    lambda: [f64; 2],
    rho: [f64; 2],
    abscissas: Vec<f64>,
    families: Vec<FamilyRecord>,
}

fn evaluate_family(p: &BoundaryProblem, family: Family, lambda: C64, xs: &[f64]) -> Result<FssEvaluation, Error> {
    let eq = &p.eq;
    let rho = sqrt_lambda(lambda);
    match family {
        Family::C1 | Family::C2 | Family::E1 | Family::E2 => build_diagonal(eq, family, xs, rho),
        Family::S1 => solve_s(eq, 1, lambda, xs),
        Family::S2 => solve_s(eq, 2, lambda, xs),
        Family::S1Star => solve_s_star(eq, 1, lambda, xs),
        Family::S2Star => solve_s_star(eq, 2, lambda, xs),
        Family::Y1 => solve_y(eq, 1, rho, None)?.evaluate(xs),
        Family::Y2 => solve_y(eq, 2, rho, None)?.evaluate(xs),
        Family::Phi => p.phi(lambda, xs),
    }
}

pub fn fss(cfg: &Config, p: &BoundaryProblem) -> Result<Outcome, Error> {
    let task = &cfg.tasks.fss;
    let lambda = complex(task.lambda);
    let t = p.length();
    let xs: Vec<f64> = task.x.iter().map(|f| f * t).collect();
    if xs.iter().any(|&x| !(x > 0.0 && x <= t)) {
        return Err(Error::InvalidInput("tasks.fss.x: fractions must lie in (0, 1]".into()));
    }
    let families = task
        .families
        .iter()
        .map(|f| parse_family(f).map(|fam| (f.clone(), fam)))
        .collect::<Result<Vec<_>, _>>()?;
    let evals = par::try_map(&families, |(_, fam)| evaluate_family(p, *fam, lambda, &xs))?;

    let mut table = Table::new(["family", "x", "row", "col", "value_re", "value_im", "derivative_re", "derivative_im"]);
    let m = p.m();
    let mut records = Vec::new();
    for ((name, _), ev) in families.iter().zip(&evals) {
        for (i, &x) in ev.abscissas.iter().enumerate() {
            for r in 0..m {
                for k in 0..m {
                    let mut row = vec![name.clone(), num(x), (r + 1).to_string(), (k + 1).to_string()];
                    row.extend(complex_cells(ev.values[i][(r, k)]));
                    row.extend(complex_cells(ev.derivatives[i][(r, k)]));
                    table.push(row);
                }
            }
        }
        records.push(FamilyRecord {
            family: name.clone(),
            report: ev.report.clone(),
        });
    }
    let doc = FssDocument {
        lambda: task.lambda,
        rho: pair(sqrt_lambda(lambda)),
        abscissas: xs,
        families: records,
    };
    Ok(Outcome {
        table,
        json: to_json(&doc)?,
        passed: true,
    })
}

#[derive(Serialize)]
struct Ray {
    angle: f64,
    asymptotics: StokesAsymptotics,
    multipliers: Vec<StokesRecord>,
}

pub fn stokes(cfg: &Config, p: &BoundaryProblem) -> Result<Outcome, Error> {
    let task = &cfg.tasks.stokes;
    if task.points < 2 || task.start.is_nan() || task.start <= 0.0 || task.span.is_nan() || task.span <= 1.0 {
        return Err(Error::InvalidInput(
            "tasks.stokes: need points >= 2, start > 0 and span > 1".into(),
        ));
    }
    let m = p.m();
    let mut headers: Vec<String> = ["angle", "rho_re", "rho_im", "k", "j", "normalized_deviation"]
        .map(String::from)
        .to_vec();
    headers.extend(matrix_headers("b", m));
    headers.extend(matrix_headers("reference", m));
    let mut table = Table::new(headers);
    let mut rays = Vec::new();
    for &angle in &task.angles {
        let ladder: Vec<C64> = geometric_ladder(task.start, task.span, task.points)
            .into_iter()
            .map(|r| C64::from_polar(r, angle))
            .collect();
        let sets = par::try_map(&ladder, |&rho| compute_b(&p.eq, rho, &[], WRONSKIAN_TOL))?;
        for s in &sets {
            for k in 1..=2 {
                for j in 1..=2 {
                    let mut row = vec![num(angle)];
                    row.extend(complex_cells(s.rho));
                    row.extend([k.to_string(), j.to_string(), num(s.normalized_deviation(k, j))]);
                    row.extend(matrix_cells(s.multiplier(k, j)));
                    row.extend(matrix_cells(&s.reference(k, j)));
                    table.push(row);
                }
            }
        }
        rays.push(Ray {
            angle,
            asymptotics: stokes_asymptotics_from(&p.eq, &sets),
            multipliers: sets.iter().map(|s| s.record()).collect(),
        });
    }
    let passes = rays.iter().all(|r| r.asymptotics.passes());
    Ok(Outcome {
        table,
        json: to_json(&serde_json::json!({ "rays": rays, "passes": passes }))?,
        passed: true,
    })
}

#[derive(Serialize)]
struct ContourRecord {
    n: usize,
    q: usize,
    channels: Vec<usize>,
    center: f64,
    radius: f64,
    nodes: usize,
    count: usize,
    roots: Vec<[f64; 2]>,
    root_residuals: Vec<f64>,
    group_weight: MatrixRecord,
    weight_change: f64,
    weight_rank: usize,
    floor_ratio: f64,
}

impl From<&SpectralDatum> for ContourRecord {
    fn from(d: &SpectralDatum) -> Self {
        ContourRecord {
            n: d.n,
            q: d.group + 1,
            channels: d.channels.iter().map(|s| s + 1).collect(),
            center: d.center,
            radius: d.radius,
            nodes: d.nodes,
            count: d.count,
            roots: d.roots.iter().map(|&r| pair(r)).collect(),
            root_residuals: d.root_residuals.clone(),
            group_weight: (&d.group_weight).into(),
            weight_change: d.weight_change,
            weight_rank: d.weight_rank,
            floor_ratio: d.floor_ratio,
        }
    }
}

#[derive(Serialize)]
struct LowRecord {
    lambda: [f64; 2],
    rho: [f64; 2],
    multiplicity: usize,
    residual: f64,
    weight: MatrixRecord,
    residue_radius: f64,
    residue_change: f64,
}

struct LowWeight {
    eigenvalue: LowEigenvalue,
    weight: CMat,
    radius: f64,
    change: f64,
}

/// Low eigenvalues inside the disk below the first circles, each with the
/// residue of the Weyl function on a circle that excludes its neighbours.
fn low_spectrum(p: &BoundaryProblem, settings: &ContourSettings) -> Result<(f64, Vec<LowWeight>), Error> {
    let sp = spectrum(p, 1, settings, false)?;
    let mut others: Vec<C64> = sp.low.iter().map(|e| e.lambda).collect();
    others.extend(sp.contours.iter().flat_map(|d| d.lambdas()));
    let mut out = Vec::new();
    for e in &sp.low {
        let gap = others
            .iter()
            .filter(|&&l| (l - e.lambda).norm() > 1e-9 * (1.0 + e.lambda.norm()))
            .map(|l| (l - e.lambda).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = (0.4 * gap).min(1.0);
        let (weight, change) = residue_at(p, e.lambda, radius, settings.weight_tol)?;
        out.push(LowWeight {
            eigenvalue: e.clone(),
            weight,
            radius,
            change,
        });
    }
    Ok((sp.low_radius, out))
}

struct SpectralRun {
    data: Vec<SpectralDatum>,
    low_radius: Option<f64>,
    low: Vec<LowWeight>,
}

fn run_spectrum(cfg: &Config, p: &BoundaryProblem, task: &SpectrumTask) -> Result<SpectralRun, Error> {
    let ns = task.indices()?;
    let settings = &cfg.solver.contour;
    let data = locate_eigenvalues(p, &ns, settings)?;
    let (low_radius, low) = if task.low {
        let (r, l) = low_spectrum(p, settings)?;
        (Some(r), l)
    } else {
        (None, Vec::new())
    };
    Ok(SpectralRun { data, low_radius, low })
}

fn spectral_headers(m: usize) -> Vec<String> {
    let mut h: Vec<String> = ["n", "q", "rho_re", "rho_im", "multiplicity"].map(String::from).to_vec();
    h.extend(matrix_headers("w", m));
    h
}

/// One row per located root; the weight is the group weight of its circle.
/// Low eigenvalues are reported with `n = q = 0`.
fn spectral_rows(run: &SpectralRun) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for low in &run.low {
        let e = &low.eigenvalue;
        let mut row = vec!["0".to_string(), "0".to_string()];
        row.extend(complex_cells(sqrt_lambda(e.lambda)));
        row.push(e.multiplicity.to_string());
        row.extend(matrix_cells(&low.weight));
        rows.push(row);
    }
    for d in &run.data {
        for &r in &d.roots {
            let mut row = vec![d.n.to_string(), (d.group + 1).to_string()];
            row.extend(complex_cells(r));
            row.push(d.count.to_string());
            row.extend(matrix_cells(&d.group_weight));
            rows.push(row);
        }
    }
    rows
}

fn low_records(run: &SpectralRun) -> Vec<LowRecord> {
    run.low
        .iter()
        .map(|low| LowRecord {
            lambda: pair(low.eigenvalue.lambda),
            rho: pair(sqrt_lambda(low.eigenvalue.lambda)),
            multiplicity: low.eigenvalue.multiplicity,
            residual: low.eigenvalue.residual,
            weight: (&low.weight).into(),
            residue_radius: low.radius,
            residue_change: low.change,
        })
        .collect()
}

#[derive(Serialize)]
struct EigsDocument {
    contour_settings: ContourSettings,
    low_radius: Option<f64>,
    low: Vec<LowRecord>,
    contours: Vec<ContourRecord>,
    asymptotics: EigenvalueAsymptotics,
    passes: bool,
}

pub fn eigs(cfg: &Config, p: &BoundaryProblem) -> Result<Outcome, Error> {
    let run = run_spectrum(cfg, p, &cfg.tasks.eigs)?;
    let mut table = Table::new(spectral_headers(p.m()));
    for row in spectral_rows(&run) {
        table.push(row);
    }
    let asymptotics = eigenvalue_asymptotics(p, &run.data);
    let passes = asymptotics.passes();
    let doc = EigsDocument {
        contour_settings: cfg.solver.contour,
        low_radius: run.low_radius,
        low: low_records(&run),
        contours: run.data.iter().map(ContourRecord::from).collect(),
        asymptotics,
        passes,
    };
    Ok(Outcome {
        table,
        json: to_json(&doc)?,
        passed: true,
    })
}

#[derive(Serialize)]
struct WeightsDocument {
    contour_settings: ContourSettings,
    low_radius: Option<f64>,
    low: Vec<LowRecord>,
    contours: Vec<ContourRecord>,
    asymptotics: WeightAsymptotics,
    passes: bool,
}

pub fn weights(cfg: &Config, p: &BoundaryProblem) -> Result<Outcome, Error> {
    let task = cfg.tasks.weights.as_ref().unwrap_or(&cfg.tasks.eigs);
    let run = run_spectrum(cfg, p, task)?;
    let asymptotics = weight_asymptotics(p, &run.data);
    let m = p.m();
    let mut headers = spectral_headers(m);
    headers.extend(matrix_headers("a", m));
    headers.extend(["deviation", "off_support"].map(String::from));
    let mut table = Table::new(headers);
    let blank = 2 * m * m + 2;
    let rows = spectral_rows(&run);
    let mut it = rows.into_iter();
    for _ in &run.low {
        let mut row = it.next().unwrap();
        row.extend(std::iter::repeat_n(String::new(), blank));
        table.push(row);
    }
    for d in &run.data {
        let point = asymptotics.groups[d.group].points.iter().find(|w| w.n == d.n);
        for _ in &d.roots {
            let mut row = it.next().unwrap();
            match point {
                Some(w) => {
                    row.extend(w.normalized.entries.iter().flat_map(|z| [num(z[0]), num(z[1])]));
                    row.extend([num(w.deviation), num(w.off_support)]);
                }
                None => row.extend(std::iter::repeat_n(String::new(), blank)),
            }
            table.push(row);
        }
    }
    let passes = asymptotics.passes();
    let doc = WeightsDocument {
        contour_settings: cfg.solver.contour,
        low_radius: run.low_radius,
        low: low_records(&run),
        contours: run.data.iter().map(ContourRecord::from).collect(),
        asymptotics,
        passes,
    };
    Ok(Outcome {
        table,
        json: to_json(&doc)?,
        passed: true,
    })
}

#[derive(Serialize)]
struct NuRecord {
    q: usize,
    channel: usize,
    nu: f64,
    estimate: NuEstimate,
}

pub fn recover(cfg: &Config, p: &BoundaryProblem) -> Result<Outcome, Error> {
    let task = cfg.tasks.recover_nu.as_ref().unwrap_or(&cfg.tasks.eigs);
    let ns = task.indices()?;
    let data = locate_eigenvalues(p, &ns, &cfg.solver.contour)?;
    let consts = p.constants();
    let mut table = Table::new(["q", "channel", "nu", "nu_estimate", "error", "slope", "rms_residual"]);
    let mut records = Vec::new();
    for g in 0..consts.groups.len() {
        for est in recover_nu(&consts, &data, g)? {
            let nu = p.eq.order.nu[est.channel];
            table.push(vec![
                (g + 1).to_string(),
                (est.channel + 1).to_string(),
                num(nu),
                num(est.nu),
                num((est.nu - nu).abs()),
                num(est.fit.slope),
                num(est.fit.rms_residual),
            ]);
            records.push(NuRecord {
                q: g + 1,
                channel: est.channel + 1,
                nu,
                estimate: est,
            });
        }
    }
    Ok(Outcome {
        table,
        json: to_json(&serde_json::json!({ "indices": ns, "estimates": records }))?,
        passed: true,
    })
}

fn checks_table(groups: &[(&str, &[Check])]) -> Table {
    let mut table = Table::new(["group", "check", "value", "tolerance", "passed"]);
    for (g, checks) in groups {
        for ch in *checks {
            table.push(vec![
                g.to_string(),
                ch.name.clone(),
                num(ch.value),
                num(ch.tolerance),
                ch.passed.to_string(),
            ]);
        }
    }
    table
}

pub fn verify(cfg: &Config, p: &BoundaryProblem) -> Result<Outcome, Error> {
    let task = &cfg.tasks.verify;
    let t = p.length();
    let xs: Vec<f64> = task.x.iter().map(|f| f * t).collect();
    let lambdas: Vec<C64> = task.lambdas.iter().map(|&l| complex(l)).collect();
    let mut wr = Vec::new();
    for &l in &lambdas {
        wr.extend(wronskian_checks(&p.eq, l, &xs)?);
    }
    let oracle = oracle_checks(&p.eq, &lambdas, &cfg.solver.oracle)?;
    let rhos: Vec<C64> = task.rhos.iter().map(|&r| complex(r)).collect();
    let birk = birkhoff_checks(&p.eq, &rhos, task.sector_rho)?;
    let groups: [(&str, &[Check]); 3] = [("wronskian", &wr), ("oracle", &oracle), ("birkhoff", &birk)];
    let passed = groups.iter().all(|(_, c)| c.iter().all(|x| x.passed));
    Ok(Outcome {
        table: checks_table(&groups),
        json: to_json(&serde_json::json!({
            "wronskian": wr,
            "oracle": oracle,
            "birkhoff": birk,
            "sector_checked": task.sector_rho.is_some(),
            "passes": passed,
        }))?,
        passed,
    })
}

pub fn oracle_diff(cfg: &Config, p: &BoundaryProblem) -> Result<Outcome, Error> {
    let task = &cfg.tasks.oracle_diff;
    let settings: OracleSettings = cfg.solver.oracle;
    let lambdas: Vec<C64> = task.lambdas.iter().map(|&l| complex(l)).collect();
    let solutions = oracle_checks(&p.eq, &lambdas, &settings)?;
    let shooting = if task.shooting.is_empty() {
        Vec::new()
    } else {
        let data = locate_eigenvalues(p, &task.shooting, &cfg.solver.contour)?;
        shooting_checks(p, &data, &settings)?
    };
    let groups: [(&str, &[Check]); 2] = [("solutions", &solutions), ("shooting", &shooting)];
    let passed = groups.iter().all(|(_, c)| c.iter().all(|x| x.passed));
    Ok(Outcome {
        table: checks_table(&groups),
        json: to_json(&serde_json::json!({
            "oracle_settings": settings,
            "solutions": solutions,
            "shooting": shooting,
            "passes": passed,
        }))?,
        passed,
    })
}
