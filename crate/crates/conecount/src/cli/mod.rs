//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a usage or input error, 2 when an
//! experiment verdict fails. JSON reports carry a [`RunManifest`] whose
//! hash covers the whole report, so `verify_report` can recheck any saved
//! file.

mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

pub use manifest::{seal, verify_report, RunManifest};

use crate::counting::{
    count_cap, estimate_kappa, j_sum, near_hits, predicted_exponents, CountReport, KappaEstimate, QueryEcho,
};
use crate::enumeration::{enumerate_by_norm, enumerate_primitive, q_max_below, ConePoint};
use crate::error::{Error, Result};
use crate::experiments::{run_experiment, write_outputs, ExperimentConfig};
use crate::geometry::{c_cap, parse_direction, region_measure, MeasureMode, Psi, Region};
use crate::group::{sample_sphere, GroupElement};
use crate::quadform::{load_form, EllipsoidForm, QuadraticSpace};
use crate::rng::{derive_seed, rng_from_seed, task_rng};
use crate::spectral::{m_ff, SeparableFunction, Zonal, D_MAX};
use crate::valdist::{
    c_nm, count_homog, count_linear, random_g, random_h, v_f, v_l, v_l0, BoxUnion, HomogeneousFormOnCone,
    LinearMapOnCone, MC_SAMPLES,
};

#[derive(Parser, Debug)]
#[command(name = "conecount", version, about = "Primitive points on light cones of rational quadratic forms")]
struct Cli {
    /// Worker threads; defaults to the number of logical cores. Results do
    /// not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List primitive cone points as CSV (q,v_1,…,v_{n+2}).
    Enumerate(EnumerateArgs),
    /// Count points with q < T whose direction lies in a cap.
    CountCap(CountCapArgs),
    /// Count approximations within ψ(q) of one or more directions.
    CountKhintchine(KhintchineArgs),
    /// Cone measure of a region.
    Measure(MeasureArgs),
    /// Count cone points whose image under a linear map or form lies in a target.
    Valdist(ValdistArgs),
    /// Spectral bound M(f, f′; s) for separable functions.
    Spectral(SpectralArgs),
    /// Run a seeded experiment campaign from a config file.
    Experiment(ExperimentArgs),
    /// Print dimension constants and the exponent table.
    Constants(ConstantsArgs),
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    /// `standard:<n>` or a form file.
    #[arg(long)]
    form: String,
    /// Largest denominator q (ellipsoid forms).
    #[arg(long, conflicts_with = "norm")]
    qmax: Option<u64>,
    /// Bound on ‖v‖_Q (any form).
    #[arg(long)]
    norm: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountCapArgs {
    #[arg(long)]
    form: String,
    /// Cap center as comma-separated rationals; normalized to unit length.
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Chordal radius; 2 or more is the whole sphere.
    #[arg(long)]
    r: f64,
    #[arg(long = "T", alias = "t")]
    t: f64,
    /// A value for κ, or `auto` to estimate it from the form.
    #[arg(long, default_value = "auto")]
    kappa: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KhintchineArgs {
    #[arg(long)]
    form: String,
    /// `pow:c=…,lambda=…`, `logpow:c=…,lambda=…` or `const:c=…`.
    #[arg(long)]
    psi: String,
    #[arg(long = "T", alias = "t")]
    t: f64,
    /// Fixed direction; random directions are drawn when omitted.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "auto")]
    kappa: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Leading,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// `cap:<r>@<α>`, `sector:<T>,<r>@<α>` or `region:psi=<ψ>,T=<T>`.
    #[arg(long, allow_hyphen_values = true)]
    region: String,
    /// Dimension, needed for `region:` specs.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ValdistKind {
    Linear,
    Homog,
}

#[derive(Args, Debug)]
struct ValdistArgs {
    #[arg(long, value_enum)]
    kind: ValdistKind,
    #[arg(long)]
    n: usize,
    /// Rank of the map, or `p + q` for forms.
    #[arg(long)]
    m: usize,
    /// Degree of the form.
    #[arg(long)]
    d: Option<f64>,
    /// Positive part of the form's signature; defaults to `m − 1`.
    #[arg(long)]
    p: Option<usize>,
    /// `id` or `random:<seed>`.
    #[arg(long, default_value = "id")]
    g: String,
    /// `id` or `random:<seed>`.
    #[arg(long, default_value = "id")]
    h: String,
    /// `box:…` or `interval:a,b`.
    #[arg(long, allow_hyphen_values = true)]
    target: String,
    #[arg(long = "T", alias = "t")]
    t: f64,
    /// Defaults to `standard:<n>`.
    #[arg(long)]
    form: Option<String>,
    /// Monte Carlo draws for the volume constant.
    #[arg(long, default_value_t = MC_SAMPLES)]
    samples: u64,
    /// Seed for the volume constant.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "auto")]
    kappa: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    #[arg(long)]
    n: usize,
    /// Real part, in (n/2, n).
    #[arg(long)]
    s: f64,
    /// Radial intervals `a,b` separated by `;`.
    #[arg(long)]
    rho: String,
    /// Cap radius; 2 or more is the whole sphere.
    #[arg(long = "cap-r")]
    cap_r: f64,
    /// Second function; defaults to the first.
    #[arg(long)]
    rho2: Option<String>,
    #[arg(long = "cap-r2")]
    cap_r2: Option<f64>,
    #[arg(long, default_value_t = D_MAX)]
    dmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    json: bool,
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn dispatch(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        eprintln!("error: --threads must be positive");
        return 1;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let ctx = Ctx { argv: argv.to_vec(), threads };
    match pool.install(|| run(&cli.cmd, &ctx)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

struct Ctx {
    argv: Vec<String>,
    threads: usize,
}

impl Ctx {
    fn manifest(&self, seed: Option<u64>, space: Option<&QuadraticSpace>) -> RunManifest {
        let mut m = RunManifest::new(&self.argv, self.threads);
        m.seed = seed;
        m.form_fingerprint = space.map(|s| s.fingerprint());
        m
    }
}

fn run(cmd: &Command, ctx: &Ctx) -> Result<i32> {
    match cmd {
        Command::Enumerate(a) => enumerate(a),
        Command::CountCap(a) => cmd_count_cap(a, ctx),
        Command::CountKhintchine(a) => cmd_khintchine(a, ctx),
        Command::Measure(a) => cmd_measure(a, ctx),
        Command::Valdist(a) => cmd_valdist(a, ctx),
        Command::Spectral(a) => cmd_spectral(a, ctx),
        Command::Experiment(a) => cmd_experiment(a, ctx),
        Command::Constants(a) => cmd_constants(a, ctx),
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn emit_json(out: &Option<PathBuf>, v: &Value) -> Result<()> {
    let mut w = sink(out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(v)?)?;
    w.flush()?;
    Ok(())
}

/// A seed from the argument, or from entropy and reported on stderr.
fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn ellipsoid_of(space: &QuadraticSpace) -> Result<&EllipsoidForm> {
    space
        .ellipsoid()
        .ok_or_else(|| Error::Unsupported("this command needs a form with a definite spatial block".into()))
}

/// `κ̂` at `t`, raising `t` until enough points are available.
fn resolve_kappa(form: &EllipsoidForm, arg: &str, t: f64) -> Result<KappaEstimate> {
    if arg != "auto" {
        let k: f64 = arg.parse().map_err(|_| Error::Parse(format!("bad --kappa {arg:?}")))?;
        if !(k > 0.0) {
            return Err(Error::InvalidArgument("κ must be positive".into()));
        }
        return Ok(KappaEstimate::from_kappa(form.n(), k, "given"));
    }
    let mut t_fit = t.max(16.0);
    loop {
        match estimate_kappa(form, t_fit) {
            Err(Error::InsufficientPoints(_)) if t_fit < 1e5 => t_fit *= 2.0,
            other => return other,
        }
    }
}

fn enumerate(a: &EnumerateArgs) -> Result<i32> {
    let space = load_form(&a.form)?;
    let points: Box<dyn Iterator<Item = ConePoint>> = match (a.qmax, a.norm) {
        (Some(q), None) => Box::new(enumerate_primitive(ellipsoid_of(&space)?, q)),
        (None, Some(t)) => {
            let mut pts = enumerate_by_norm(&space, t)?;
            pts.sort_by(|x, y| x.q.cmp(&y.q).then_with(|| x.v.cmp(&y.v)));
            Box::new(pts.into_iter())
        }
        _ => return Err(Error::InvalidArgument("give exactly one of --qmax or --norm".into())),
    };
    let mut w = sink(&a.out)?;
    let cols: Vec<String> = (1..=space.dim()).map(|i| format!("v_{i}")).collect();
    writeln!(w, "q,{}", cols.join(","))?;
    for p in points {
        let vs: Vec<String> = p.v.iter().map(BigInt::to_string).collect();
        writeln!(w, "{},{}", p.q, vs.join(","))?;
    }
    w.flush()?;
    Ok(0)
}

fn report_json(r: &CountReport) -> Result<Value> {
    Ok(serde_json::to_value(r)?)
}

fn cmd_count_cap(a: &CountCapArgs, ctx: &Ctx) -> Result<i32> {
    let space = load_form(&a.form)?;
    let form = ellipsoid_of(&space)?;
    let alpha = parse_direction(&a.alpha)?;
    if alpha.len() != form.n() + 1 {
        return Err(Error::Dimension { expected: form.n() + 1, got: alpha.len() });
    }
    let kappa = resolve_kappa(form, &a.kappa, a.t)?;
    let report = count_cap(form, &alpha, a.r, a.t, &kappa)?;
    emit_json(&a.out, &seal(report_json(&report)?, ctx.manifest(None, Some(&space)))?)?;
    Ok(0)
}

fn cmd_khintchine(a: &KhintchineArgs, ctx: &Ctx) -> Result<i32> {
    let space = load_form(&a.form)?;
    let form = ellipsoid_of(&space)?;
    let n = form.n();
    let psi = Psi::parse(&a.psi)?;
    if !(a.t > 1.0) {
        return Err(Error::InvalidArgument(format!("need T > 1, got {}", a.t)));
    }
    let (seed, alphas) = match &a.alpha {
        Some(s) => {
            let al = parse_direction(s)?;
            if al.len() != n + 1 {
                return Err(Error::Dimension { expected: n + 1, got: al.len() });
            }
            (None, vec![al])
        }
        None => {
            if a.trials == 0 {
                return Err(Error::InvalidArgument("--trials must be positive".into()));
            }
            let s = seed_or_entropy(a.seed);
            (Some(s), (0..a.trials).map(|j| sample_sphere(n, &mut task_rng(s, &[0, j as u64]))).collect())
        }
    };
    let kappa = resolve_kappa(form, &a.kappa, a.t)?;
    let hits = near_hits(form, &alphas, |q| psi.eval(q as f64), q_max_below(a.t))?;
    let main = n as f64 * kappa.varkappa_hat * j_sum(&psi, n, a.t);
    let reports: Vec<Value> = hits
        .iter()
        .zip(&alphas)
        .enumerate()
        .map(|(j, (h, al))| {
            let query = QueryEcho {
                kind: "khintchine".into(),
                alpha: al.clone(),
                r: None,
                psi: Some(psi.to_string()),
                t: a.t,
                form: space.fingerprint(),
                seed: seed.map(|s| derive_seed(s, &[0, j as u64])),
            };
            report_json(&CountReport::new(query, h.q.len() as u64, main, kappa.source.clone()))
        })
        .collect::<Result<_>>()?;
    emit_json(&a.out, &seal(json!({ "reports": reports }), ctx.manifest(seed, Some(&space)))?)?;
    Ok(0)
}

fn cmd_measure(a: &MeasureArgs, ctx: &Ctx) -> Result<i32> {
    let region = Region::parse(&a.region)?;
    let mode = match a.mode {
        ModeArg::Exact => MeasureMode::Exact,
        ModeArg::Leading => MeasureMode::Leading,
    };
    let (n, value) = match &region {
        Region::Cap(c) => (c.n(), match mode {
            MeasureMode::Exact => c.measure(),
            MeasureMode::Leading => crate::geometry::cap_measure_leading(c.n(), c.radius),
        }),
        Region::Sector(s) => (s.cap.n(), s.measure(mode)),
        Region::Approx(r) => {
            let n = a.n.ok_or_else(|| Error::InvalidArgument("region: specs need --n".into()))?;
            (n, region_measure(&r.psi, n, r.t, mode)?)
        }
        Region::Generalized(g) => {
            (g.phi.parts.first().map_or(0, |p| p.0.n()), g.measure().ok_or_else(|| Error::Unsupported("measure of this union".into()))?)
        }
    };
    let mode_name = match mode {
        MeasureMode::Exact => "exact",
        MeasureMode::Leading => "leading",
    };
    let v = json!({ "region": a.region, "n": n, "mode": mode_name, "measure": value });
    emit_json(&a.out, &seal(v, ctx.manifest(None, None))?)?;
    Ok(0)
}

fn parse_g(s: &str, n: usize) -> Result<GroupElement> {
    match s {
        "id" => Ok(GroupElement::identity(n)),
        _ => {
            let seed = parse_random(s)?;
            Ok(random_g(n, &mut rng_from_seed(seed)))
        }
    }
}

fn parse_h(s: &str, m: usize) -> Result<nalgebra::DMatrix<f64>> {
    match s {
        "id" => Ok(nalgebra::DMatrix::identity(m, m)),
        _ => {
            let seed = parse_random(s)?;
            Ok(random_h(m, &mut rng_from_seed(seed)))
        }
    }
}

fn parse_random(s: &str) -> Result<u64> {
    s.strip_prefix("random:")
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected id or random:<seed>, got {s:?}")))
}

fn cmd_valdist(a: &ValdistArgs, ctx: &Ctx) -> Result<i32> {
    let space = load_form(a.form.as_deref().unwrap_or(&format!("standard:{}", a.n)))?;
    if space.n() != a.n {
        return Err(Error::Dimension { expected: a.n, got: space.n() });
    }
    let target = BoxUnion::parse(&a.target)?;
    let g = parse_g(&a.g, a.n)?;
    let h = parse_h(&a.h, a.m)?;
    let seed = seed_or_entropy(a.seed);
    let kappa = match space.ellipsoid() {
        Some(e) => resolve_kappa(e, &a.kappa, a.t)?,
        None => {
            let k: f64 = a.kappa.parse().map_err(|_| Error::InvalidArgument("this form needs an explicit --kappa".into()))?;
            KappaEstimate::from_kappa(a.n, k, "given")
        }
    };
    let (report, volume) = match a.kind {
        ValdistKind::Linear => {
            let l = LinearMapOnCone::from_parts(g, h)?;
            let vl = v_l(&l, a.samples, seed)?;
            (count_linear(&space, &l, &target, a.t, &kappa, &vl)?, vl)
        }
        ValdistKind::Homog => {
            let d = a.d.ok_or_else(|| Error::InvalidArgument("--kind homog needs --d".into()))?;
            let p = a.p.unwrap_or(a.m.saturating_sub(1));
            if p == 0 || p >= a.m {
                return Err(Error::InvalidArgument(format!("need 1 ≤ p < m, got p = {p}, m = {}", a.m)));
            }
            let f = HomogeneousFormOnCone::new(d, p, a.m - p, g, h)?;
            let vf = v_f(&f, a.samples, seed)?;
            (count_homog(&space, &f, &target, a.t, &kappa, &vf)?, vf)
        }
    };
    let mut v = report_json(&report)?;
    v["volume_constant"] = serde_json::to_value(&volume)?;
    emit_json(&a.out, &seal(v, ctx.manifest(Some(seed), Some(&space)))?)?;
    Ok(0)
}

fn parse_rho(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(|iv| {
            let (a, b) = iv.split_once(',').ok_or_else(|| Error::Parse(format!("bad interval {iv:?}")))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {x:?}")));
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

fn zonal_cap(r: f64) -> Zonal {
    if r >= 2.0 {
        Zonal::Full
    } else {
        Zonal::Cap(r)
    }
}

fn cmd_spectral(a: &SpectralArgs, ctx: &Ctx) -> Result<i32> {
    let f = SeparableFunction::new(a.n, parse_rho(&a.rho)?, zonal_cap(a.cap_r))?;
    let fp = match (&a.rho2, a.cap_r2) {
        (None, None) => f.clone(),
        (rho2, r2) => SeparableFunction::new(
            a.n,
            rho2.as_deref().map_or_else(|| Ok(f.rho.clone()), parse_rho)?,
            zonal_cap(r2.unwrap_or(a.cap_r)),
        )?,
    };
    let res = m_ff(&f, &fp, a.s, a.dmax)?;
    emit_json(&a.out, &seal(serde_json::to_value(&res)?, ctx.manifest(None, None))?)?;
    Ok(0)
}

fn config_sets(text: &str, key: &str) -> bool {
    text.lines()
        .filter_map(|l| l.split('#').next()?.split_once('='))
        .any(|(k, _)| k.trim() == key)
}

fn cmd_experiment(a: &ExperimentArgs, ctx: &Ctx) -> Result<i32> {
    let text = std::fs::read_to_string(&a.config)?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    cfg.seed = match a.seed {
        Some(s) => s,
        None if config_sets(&text, "seed") => cfg.seed,
        None => seed_or_entropy(None),
    };
    let out = run_experiment(&cfg)?;
    let space = load_form(&cfg.form).ok();
    let mut fit = out.fit_json();
    fit["config"] = json!({ "path": a.config.display().to_string(), "seed": cfg.seed, "T": cfg.t_grid, "trials": cfg.trials });
    let fit = seal(fit, ctx.manifest(Some(cfg.seed), space.as_ref()))?;
    write_outputs(&a.out, &out, &fit)?;
    print!("{}", out.verdict_text());
    Ok(if out.passed() { 0 } else { 2 })
}

fn cmd_constants(a: &ConstantsArgs, ctx: &Ctx) -> Result<i32> {
    let n = a.n;
    let tab = predicted_exponents(n)?;
    let cnm: Vec<(usize, f64, f64)> = (1..n).map(|m| Ok((m, c_nm(n, m)?, v_l0(n, m)))).collect::<Result<_>>()?;
    if a.json {
        let v = json!({
            "n": n,
            "c_cap": c_cap(n),
            "exponents": tab,
            "c_nm": cnm.iter().map(|&(m, c, _)| json!({"m": m, "value": c})).collect::<Vec<_>>(),
            "V_L0": cnm.iter().map(|&(m, _, v)| json!({"m": m, "value": v})).collect::<Vec<_>>(),
        });
        emit_json(&None, &seal(v, ctx.manifest(None, None))?)?;
        return Ok(0);
    }
    let mut w = sink(&None)?;
    writeln!(w, "c_cap({n})={}", c_cap(n))?;
    for (m, c, v) in &cnm {
        writeln!(w, "c_nm({n},{m})={c}")?;
        writeln!(w, "V_L0({n},{m})={v}")?;
    }
    if let Value::Object(map) = serde_json::to_value(&tab)? {
        for (k, v) in map {
            writeln!(w, "{k}={v}")?;
        }
    }
    w.flush()?;
    Ok(0)
}
