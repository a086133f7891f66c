//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). A failing criterion is
//! reported but does not fail the process unless `CONECOUNT_STRICT=1`.

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use conecount::counting::{cross_check_identity, predicted_exponents};
use conecount::enumeration::brute::brute_force_layer;
use conecount::enumeration::{Enumerator, Strategy};
use conecount::experiments::{run_experiment, to_csv, ExperimentConfig, ExperimentKind, ExperimentOutput};
use conecount::geometry::{c_cap, cap_measure_exact};
use conecount::group::sample_sphere;
use conecount::quadform::{EllipsoidForm, Rat};
use conecount::rng::rng_from_seed;
use conecount::spectral::{m_ff, p_d, SeparableFunction, Zonal, D_MAX};

// Tolerances.
const ENUM_Q_MAX: u64 = 60;
const ENUM_SECONDS: f64 = 60.0;
const CROSS_QUERIES: usize = 200;
const CAP_EXACT_TOL: f64 = 1e-10;
const CAP_R_MIN: f64 = 1e-3;
// Relative rounding floor on the cap measure itself.
const CAP_ROUNDING: f64 = 1e-14;
const EQUIDIST_SECONDS: f64 = 600.0;
const UNIT_MODULUS_TOL: f64 = 1e-10;
const SCALING_TOL: f64 = 1e-8;
const SCALING_DRAWS: usize = 100;
const SPECTRAL_N: usize = 9;

struct Suite {
    failed: Vec<usize>,
}

impl Suite {
    fn record(&mut self, id: usize, claim: &str, passed: bool, detail: String) {
        println!("{} {id:>2} {claim}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failed.push(id);
        }
    }

    fn experiment(&mut self, id: usize, claim: &str, cfg: ExperimentConfig) {
        let start = Instant::now();
        match run_experiment(&cfg) {
            Ok(out) => {
                let secs = start.elapsed().as_secs_f64();
                self.record(id, claim, out.passed(), format!("{} verdicts, {secs:.1} s", out.verdicts.len()));
                print_details(&out);
            }
            Err(e) => self.record(id, claim, false, format!("error: {e}")),
        }
    }
}

fn print_details(out: &ExperimentOutput) {
    for line in out.verdict_text().lines() {
        println!("       {line}");
    }
}

fn standard(n: usize) -> EllipsoidForm {
    EllipsoidForm::standard(n)
}

fn rat(k: i64) -> Rat {
    Rat::from_integer(BigInt::from(k))
}

fn enumeration_oracle(s: &mut Suite) {
    let start = Instant::now();
    let jobs: Vec<(usize, u64)> = (1..=3).flat_map(|n| (1..=ENUM_Q_MAX).map(move |q| (n, q))).collect();
    let results: Vec<(usize, u64, usize, bool)> = jobs
        .par_iter()
        .map(|&(n, q)| {
            let form = standard(n);
            let en = Enumerator::new(&form, Strategy::FinckePohst).unwrap();
            let mut fast: Vec<Vec<i64>> = en
                .layer(&BigInt::from(q))
                .into_iter()
                .map(|p| p.iter().map(|x| i64::try_from(x).unwrap()).collect())
                .collect();
            let mut slow = brute_force_layer(&form, q);
            fast.sort();
            slow.sort();
            (n, q, slow.len(), fast == slow)
        })
        .collect();
    let total: usize = results.iter().map(|r| r.2).sum();
    let mismatched = results.iter().filter(|r| !r.3).count();
    let secs = start.elapsed().as_secs_f64();
    s.record(
        1,
        "fincke-pohst layers equal brute force",
        mismatched == 0 && secs < ENUM_SECONDS,
        format!("{total} points for n=1..3, q<={ENUM_Q_MAX}, {mismatched} mismatched layers, {secs:.2} s"),
    );
}

fn reduction_identity(s: &mut Suite) {
    let forms = [
        ("standard:1", standard(1)),
        ("standard:2", standard(2)),
        ("diag(1,2,5)", EllipsoidForm::diagonal(&[rat(1), rat(2), rat(5)]).unwrap()),
    ];
    let mut rng = rng_from_seed(0xacce_0002);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, form) in &forms {
        let mut held = 0;
        for _ in 0..CROSS_QUERIES {
            let alpha = sample_sphere(form.n(), &mut rng);
            let r = rng.random_range(0.05..2.5);
            let t = rng.random_range(2.0..100.0);
            held += cross_check_identity(form, &alpha, r, t).unwrap_or(false) as usize;
        }
        ok &= held == CROSS_QUERIES;
        parts.push(format!("{name} {held}/{CROSS_QUERIES}"));
    }
    s.record(2, "rational-point count equals sector count", ok, parts.join(", "));
}

fn cap_measure(s: &mut Suite) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let lead = |r: f64| c_cap(n) * r.powi(n as i32);
        let diff = |r: f64| (cap_measure_exact(n, r).unwrap() - lead(r)).abs();
        let bound = |r: f64| r.powi(n as i32 + 2);
        let c = diff(CAP_R_MIN) / bound(CAP_R_MIN);
        let radii: Vec<f64> = (0..=60).map(|i| CAP_R_MIN * 1000f64.powf(i as f64 / 60.0)).collect();
        let over = radii.iter().filter(|&&r| diff(r) > c * bound(r) + CAP_ROUNDING * lead(r)).count();
        let worst = radii.iter().map(|&r| (diff(r) - CAP_ROUNDING * lead(r)).max(0.0) / bound(r)).fold(0.0, f64::max);
        ok &= over == 0;
        parts.push(format!("n={n} C={c:.3e} max ratio {worst:.3e}, {over}/61 radii above"));
    }
    let mut exact_err = 0.0f64;
    for n in 1..=4 {
        exact_err = exact_err.max((cap_measure_exact(n, 2.0).unwrap() - 1.0).abs());
    }
    exact_err = exact_err.max((cap_measure_exact(1, 2f64.sqrt()).unwrap() - 0.5).abs());
    ok &= exact_err <= CAP_EXACT_TOL;
    parts.push(format!("exact values off by {exact_err:.1e}"));
    s.record(3, "cap measure is c_cap r^n up to r^(n+2)", ok, parts.join(", "));
}

fn spectral(s: &mut Suite) {
    // Unit modulus on the critical line.
    let mut worst = 0.0f64;
    for n in 1..=SPECTRAL_N {
        for d in 0..=64 {
            for i in 0..=40 {
                let t = -50.0 + 2.5 * i as f64;
                let v = p_d(n, d, Complex64::new(n as f64 / 2.0, t)).unwrap();
                worst = worst.max((v.norm() - 1.0).abs());
            }
        }
    }
    let unit_ok = worst <= UNIT_MODULUS_TOL;

    // Scaling law under independent dilations.
    let f = SeparableFunction::new(3, vec![(1.0, 2.0)], Zonal::Cap(0.9)).unwrap();
    let fp = SeparableFunction::new(3, vec![(0.5, 0.8), (1.5, 3.0)], Zonal::CapComplement(1.2)).unwrap();
    let mut rng = rng_from_seed(0xacce_0010);
    let mut scale_err = 0.0f64;
    for _ in 0..SCALING_DRAWS {
        let l1 = rng.random_range(0.2..5.0);
        let l2 = rng.random_range(0.2..5.0);
        let sv = rng.random_range(1.55..2.95);
        let base = m_ff(&f, &fp, sv, D_MAX).unwrap().m;
        let scaled = m_ff(&f.scaled(l1), &fp.scaled(l2), sv, D_MAX).unwrap().m;
        scale_err = scale_err.max((scaled - l1.powf(sv) * l2.powf(sv) * base).abs() / base.abs());
    }
    let scale_ok = scale_err <= SCALING_TOL;

    // Cap bound at s = s_n, constant frozen on the smallest caps.
    let n = SPECTRAL_N;
    let sn = predicted_exponents(n).unwrap().s_n as f64;
    let radii = [0.05, 0.1, 0.2, 0.4, 0.8];
    let widths = [0.05, 0.2, 0.5, 1.0, 2.0];
    let ratio = |r: f64, w: f64| {
        let b = SeparableFunction::new(n, vec![(1.0, 1.0 + w)], Zonal::Cap(r)).unwrap();
        let m = m_ff(&b, &b, sn, D_MAX).unwrap();
        (m.m + m.tail_bound) / b.measure().unwrap().powf(2.0 * sn / n as f64)
    };
    let grid: Vec<Vec<f64>> = radii.iter().map(|&r| widths.iter().map(|&w| ratio(r, w)).collect()).collect();
    let c = grid[0].iter().copied().fold(0.0, f64::max);
    let over = grid.iter().flatten().filter(|&&x| x > c * (1.0 + 1e-9)).count();
    let max_ratio = grid.iter().flatten().copied().fold(0.0, f64::max);
    let cap_ok = over == 0;

    s.record(
        10,
        "spectral identities",
        unit_ok && scale_ok && cap_ok,
        format!(
            "max ||P_d|-1| = {worst:.1e}; scaling error {scale_err:.1e} over {SCALING_DRAWS} draws; \
             n={n} s={sn}: C={c:.4}, max ratio {max_ratio:.4}, {over}/25 cells above C"
        ),
    );
}

fn determinism(s: &mut Suite) {
    let mut configs = Vec::new();
    let mut eq = ExperimentConfig::new(ExperimentKind::Equidistribution, 2);
    eq.t_grid = vec![100.0, 200.0, 400.0];
    eq.trials = 12;
    eq.seed = 12;
    configs.push(eq);
    let mut wr = ExperimentConfig::new(ExperimentKind::Wellroundedness, 2);
    wr.checks = 2000;
    wr.seed = 12;
    configs.push(wr);
    let mut ok = true;
    let mut parts = Vec::new();
    for cfg in &configs {
        let csv_at = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_experiment(cfg).map(|o| to_csv(&o.rows)))
        };
        match (csv_at(1), csv_at(8)) {
            (Ok(a), Ok(b)) => {
                ok &= a == b;
                parts.push(format!("{} {} bytes {}", cfg.kind, a.len(), if a == b { "identical" } else { "differ" }));
            }
            (Err(e), _) | (_, Err(e)) => {
                ok = false;
                parts.push(format!("{}: {e}", cfg.kind));
            }
        }
    }
    s.record(12, "trials.csv is identical at 1 and 8 threads", ok, parts.join(", "));
}

fn main() {
    let mut s = Suite { failed: Vec::new() };

    enumeration_oracle(&mut s);
    reduction_identity(&mut s);
    cap_measure(&mut s);

    let start = Instant::now();
    s.experiment(4, "equidistribution in fixed caps", ExperimentConfig::new(ExperimentKind::Equidistribution, 2));
    let secs = start.elapsed().as_secs_f64();
    if secs >= EQUIDIST_SECONDS {
        s.record(4, "equidistribution runtime", false, format!("{secs:.0} s exceeds {EQUIDIST_SECONDS} s"));
    }

    s.experiment(5, "generic shrinking caps", ExperimentConfig::new(ExperimentKind::Generic, 2));
    s.experiment(6, "khintchine counting with convergent control", ExperimentConfig::new(ExperimentKind::Khintchine, 2));
    s.experiment(7, "well-roundedness inclusions", ExperimentConfig::new(ExperimentKind::Wellroundedness, 2));
    s.experiment(8, "linear-form volume constant", ExperimentConfig::new(ExperimentKind::Volume, 3));
    let mut vd = ExperimentConfig::new(ExperimentKind::Valdist, 3);
    vd.trials = 10;
    s.experiment(9, "value distribution of a linear form", vd);
    spectral(&mut s);
    s.experiment(11, "sum and integral of psi agree", ExperimentConfig::new(ExperimentKind::SumIntegral, 2));
    determinism(&mut s);

    println!("{} of 12 criteria passed", 12 - dedup(&s.failed));
    if !s.failed.is_empty() && std::env::var("CONECOUNT_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}

fn dedup(ids: &[usize]) -> usize {
    let mut v = ids.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}
