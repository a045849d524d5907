//! Parallel against sequential evaluation of the independent work units:
//! contours, Stokes ladder points and oracle comparisons.
//!
//! With the default `parallel` feature each benchmark runs twice, once on
//! the global rayon pool and once inside a one-thread pool. Building with
//! `--no-default-features` runs the plain sequential fallback instead; its
//! ids end in `sequential-fallback`, so
//!
//! ```text
//! cargo bench -p msl-core --bench solvers -- --save-baseline par
//! cargo bench -p msl-core --bench solvers --no-default-features
//! ```
//!
//! leaves both sets of reports side by side.

use std::hint::black_box;
use std::time::Duration;

use criterion::{BenchmarkId, Criterion};
use msl_core::catalog::{half_order_free, mixed_equation};
use msl_core::oracle::OracleSettings;
use msl_core::spectral::locate_eigenvalues;
use msl_core::stokes::{geometric_ladder, real_ladder, verify_stokes_asymptotics};
use msl_core::verify::{oracle_checks, sample_lambdas};
use msl_core::{par, ContourSettings};

struct Mode {
    label: String,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Mode {
    fn run<R>(&self, f: impl FnOnce() -> R + Send) -> R
    where
        R: Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(f);
        }
        f()
    }
}

fn modes() -> Vec<Mode> {
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        vec![
            Mode {
                label: format!("rayon-global-{}", rayon::current_num_threads()),
                pool: None,
            },
            Mode {
                label: "rayon-1-thread".into(),
                pool: Some(single),
            },
        ]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![Mode {
            label: "sequential-fallback".into(),
        }]
    }
}

fn contours(c: &mut Criterion) {
    let p = half_order_free();
    let ns: Vec<usize> = (1..=12).collect();
    let settings = ContourSettings::default();
    let mut g = c.benchmark_group("locate_eigenvalues");
    for mode in modes() {
        g.bench_function(BenchmarkId::new("half_order_n1_12", &mode.label), |b| {
            b.iter(|| mode.run(|| locate_eigenvalues(black_box(&p), &ns, &settings).unwrap()))
        });
    }
    g.finish();
}

fn stokes(c: &mut Criterion) {
    let eq = mixed_equation(1.0);
    let ladder = real_ladder(&geometric_ladder(16.0, 8.0, 4));
    let mut g = c.benchmark_group("stokes_ladder");
    for mode in modes() {
        g.bench_function(BenchmarkId::new("mixed_4_points", &mode.label), |b| {
            b.iter(|| mode.run(|| verify_stokes_asymptotics(black_box(&eq), &ladder).unwrap()))
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let eq = mixed_equation(1.0);
    let lambdas = sample_lambdas();
    let settings = OracleSettings::default();
    let mut g = c.benchmark_group("oracle");
    for mode in modes() {
        g.bench_function(BenchmarkId::new("direct_ode_3_lambdas", &mode.label), |b| {
            b.iter(|| mode.run(|| oracle_checks(black_box(&eq), &lambdas, &settings).unwrap()))
        });
    }
    g.finish();
}

fn main() {
    eprintln!("parallel build: {}", par::is_parallel());
    let mut criterion = Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_secs(1))
        .measurement_time(Duration::from_secs(5))
        .configure_from_args();
    contours(&mut criterion);
    stokes(&mut criterion);
    oracle(&mut criterion);
    criterion.final_summary();
}
