//! Seeded experiment campaigns.
//!
//! A campaign reads an [`ExperimentConfig`], runs independent trials keyed
//! by `(grid index, trial index)` and returns one [`TrialRow`] per trial
//! together with log-log fits and PASS/FAIL [`Verdict`]s. Output is
//! byte-identical for a given config and seed at any thread count.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Lists
//! are comma-separated, except `psi`, which is `;`-separated.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `kind` | `equidistribution`, `generic`, `khintchine`, `null-count`, `wellroundedness`, `valdist`, `volume`, `sum-integral` | required |
//! | `form` | `standard:<n>` or a form file | `standard:<n>` |
//! | `n` | dimension when no form is given | 2 |
//! | `T` | height grid, increasing | per kind |
//! | `r`, `gamma` | cap radius `r·T^{−γ}` | 0.3, 0 |
//! | `lambda` | shrinking exponent for `generic` (`ψ(T) = T^{−λ}`) | 0.4 |
//! | `psi` | radius functions, see [`Psi::parse`]; `generic` uses a log-power entry in place of `lambda` | per kind |
//! | `control_psi` | convergent control for `khintchine` | `pow:c=0.5,lambda=2` |
//! | `trials`, `seed` | trials per grid point, master seed | 50, 0 |
//! | `checks`, `eps_max` | inclusion checks per family, largest `ε` | 10000, 0.5 |
//! | `m`, `d`, `p`, `q` | linear rank; homogeneous degree and signature | 1, none, 2, 1 |
//! | `a`, `target` | shrinking rate and base target | 0, `box:-2,2` |
//! | `mc_samples` | Monte Carlo draws | 1000000 |
//! | `max_relerr`, `kappa_tol`, `slope_margin` | equidistribution thresholds | 0.05, 0.01, 0.15 |
//! | `pass_fraction`, `ratio_band` | trial pass rate, value-distribution band | 0.9, 0.15 |

mod campaigns;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Psi;
use crate::valdist::BoxUnion;

pub use campaigns::{
    psi_diverges, run_equidistribution, run_generic, run_khintchine, run_null_count, run_sum_integral, run_valdist,
    run_volume, run_wellroundedness,
};

/// Which campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Equidistribution,
    Generic,
    Khintchine,
    NullCount,
    Wellroundedness,
    Valdist,
    Volume,
    SumIntegral,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::Equidistribution,
        Self::Generic,
        Self::Khintchine,
        Self::NullCount,
        Self::Wellroundedness,
        Self::Valdist,
        Self::Volume,
        Self::SumIntegral,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Equidistribution => "equidistribution",
            Self::Generic => "generic",
            Self::Khintchine => "khintchine",
            Self::NullCount => "null-count",
            Self::Wellroundedness => "wellroundedness",
            Self::Valdist => "valdist",
            Self::Volume => "volume",
            Self::SumIntegral => "sum-integral",
        }
    }

    fn default_grid(&self) -> Vec<f64> {
        match self {
            Self::Equidistribution => vec![250.0, 500.0, 1000.0, 2000.0],
            Self::Generic | Self::Khintchine => vec![250.0, 500.0, 1000.0, 2000.0, 4000.0],
            Self::NullCount => vec![4000.0],
            Self::Wellroundedness => vec![100.0],
            Self::Valdist => vec![60.0, 90.0, 120.0],
            Self::Volume => vec![100.0],
            Self::SumIntegral => vec![1e2, 1e3, 1e4],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown experiment kind {s:?}")))
    }
}

/// Parameters of one campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub form: String,
    pub n: usize,
    pub t_grid: Vec<f64>,
    pub r: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub psi: Vec<Psi>,
    pub control_psi: Option<Psi>,
    pub trials: usize,
    pub seed: u64,
    pub checks: usize,
    pub eps_max: f64,
    pub m: usize,
    pub d: Option<f64>,
    pub p: usize,
    pub q: usize,
    pub a: f64,
    pub target: BoxUnion,
    pub mc_samples: u64,
    pub max_relerr: f64,
    pub kappa_tol: f64,
    pub slope_margin: f64,
    pub pass_fraction: f64,
    pub ratio_band: f64,
}

impl ExperimentConfig {
    /// Defaults for `kind` in dimension `n`.
    pub fn new(kind: ExperimentKind, n: usize) -> Self {
        let psi = match kind {
            ExperimentKind::NullCount => vec![Psi::Pow { c: 0.5, lambda: 2.0 }],
            ExperimentKind::SumIntegral => vec![
                Psi::Pow { c: 1.0, lambda: 1.0 },
                Psi::Pow { c: 1.0, lambda: 0.5 },
                Psi::LogPow { c: 1.0, lambda: 1.0 },
            ],
            _ => vec![Psi::Pow { c: 0.5, lambda: 1.0 }],
        };
        Self {
            kind,
            form: format!("standard:{n}"),
            n,
            t_grid: kind.default_grid(),
            r: 0.3,
            gamma: 0.0,
            lambda: 0.4,
            psi,
            control_psi: (kind == ExperimentKind::Khintchine).then_some(Psi::Pow { c: 0.5, lambda: 2.0 }),
            trials: 50,
            seed: 0,
            checks: 10_000,
            eps_max: 0.5,
            m: 1,
            d: None,
            p: 2,
            q: 1,
            a: 0.0,
            target: BoxUnion::interval(-2.0, 2.0),
            mc_samples: crate::valdist::MC_SAMPLES,
            max_relerr: 0.05,
            kappa_tol: 0.01,
            slope_margin: 0.15,
            pass_fraction: 0.9,
            ratio_band: 0.15,
        }
    }

    /// Parse the flat `key = value` format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: Vec<(String, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value, got {line:?}", i + 1)))?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| kv.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let kind: ExperimentKind = get("kind").ok_or_else(|| Error::Parse("config needs a kind".into()))?.parse()?;
        let n = get("n").map(|v| parse_num::<usize>("n", v)).transpose()?.unwrap_or(2);
        let mut cfg = Self::new(kind, n);
        for (k, v) in &kv {
            let v = v.as_str();
            match k.as_str() {
                "kind" | "n" => {}
                "form" => cfg.form = v.to_string(),
                "T" | "t" => cfg.t_grid = parse_list(k, v)?,
                "r" => cfg.r = parse_num(k, v)?,
                "gamma" => cfg.gamma = parse_num(k, v)?,
                "lambda" => cfg.lambda = parse_num(k, v)?,
                "psi" => cfg.psi = v.split(';').map(|s| Psi::parse(s.trim())).collect::<Result<_>>()?,
                "control_psi" => cfg.control_psi = if v == "none" { None } else { Some(Psi::parse(v)?) },
                "trials" => cfg.trials = parse_num(k, v)?,
                "seed" => cfg.seed = parse_num(k, v)?,
                "checks" => cfg.checks = parse_num(k, v)?,
                "eps_max" => cfg.eps_max = parse_num(k, v)?,
                "m" => cfg.m = parse_num(k, v)?,
                "d" => cfg.d = Some(parse_num(k, v)?),
                "p" => cfg.p = parse_num(k, v)?,
                "q" => cfg.q = parse_num(k, v)?,
                "a" => cfg.a = parse_num(k, v)?,
                "target" => cfg.target = BoxUnion::parse(v)?,
                "mc_samples" => cfg.mc_samples = parse_num(k, v)?,
                "max_relerr" => cfg.max_relerr = parse_num(k, v)?,
                "kappa_tol" => cfg.kappa_tol = parse_num(k, v)?,
                "slope_margin" => cfg.slope_margin = parse_num(k, v)?,
                "pass_fraction" => cfg.pass_fraction = parse_num(k, v)?,
                "ratio_band" => cfg.ratio_band = parse_num(k, v)?,
                other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
            }
        }
        if get("form").is_none() {
            cfg.form = format!("standard:{}", cfg.n);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() || self.t_grid.iter().any(|&t| !(t > 1.0 && t.is_finite())) {
            return Err(Error::InvalidArgument("T grid must be nonempty with every T > 1".into()));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("T grid must be strictly increasing".into()));
        }
        if self.trials == 0 || self.checks == 0 {
            return Err(Error::InvalidArgument("trials and checks must be positive".into()));
        }
        if self.psi.is_empty() {
            return Err(Error::InvalidArgument("psi list is empty".into()));
        }
        if !(self.eps_max > 0.0 && self.eps_max <= 0.5) {
            return Err(Error::InvalidArgument(format!("eps_max must lie in (0, 1/2], got {}", self.eps_max)));
        }
        Ok(())
    }
}

fn parse_num<F: FromStr>(key: &str, v: &str) -> Result<F> {
    v.trim().parse().map_err(|_| Error::Parse(format!("bad value for {key}: {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_num(key, x)).collect()
}

/// One line of `trials.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub kind: String,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub param: String,
    pub trial: usize,
    pub seed: u64,
    pub count: f64,
    pub main: f64,
    pub disc: f64,
    pub relerr: f64,
}

impl TrialRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(kind: &str, n: usize, t: f64, param: String, trial: usize, seed: u64, count: f64, main: f64) -> Self {
        let disc = count - main;
        let relerr = if main != 0.0 { disc / main } else if disc == 0.0 { 0.0 } else { f64::INFINITY };
        Self { kind: kind.to_string(), n, t, param, trial, seed, count, main, disc, relerr }
    }
}

pub const CSV_HEADER: &str = "kind,n,T,param,trial,seed,count,main,disc,relerr";

/// `trials.csv`: shortest round-trip decimals, LF line endings.
pub fn to_csv(rows: &[TrialRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let param = if r.param.contains([',', '"']) { format!("\"{}\"", r.param.replace('"', "\"\"")) } else { r.param.clone() };
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.kind, r.n, r.t, param, r.trial, r.seed, r.count, r.main, r.disc, r.relerr
        ));
    }
    s
}

/// Least squares on `(log x, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: usize,
    pub predicted_slope: Option<f64>,
    /// `predicted + margin − slope`; positive when the fit is within the
    /// allowed margin.
    pub margin: Option<f64>,
}

impl FitResult {
    pub fn with_prediction(mut self, predicted: f64, allowed: f64) -> Self {
        self.predicted_slope = Some(predicted);
        self.margin = Some(predicted + allowed - self.slope);
        self
    }
}

/// Ordinary least squares of `log y` on `log x`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<FitResult> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {}", pairs.len())));
    }
    if pairs.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidArgument("fit points must be positive and finite".into()));
    }
    let k = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct x".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(FitResult { slope, intercept, residual_rms: (rss / k).sqrt(), points: pairs.len(), predicted_slope: None, margin: None })
}

/// One checked claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(claim: &str, passed: bool, detail: String) -> Self {
        Self { claim: claim.to_string(), passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.claim, self.detail)
    }
}

/// Everything a campaign produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub rows: Vec<TrialRow>,
    pub fits: BTreeMap<String, FitResult>,
    /// Constants fitted once and then held fixed.
    pub frozen: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentOutput {
    pub fn new(kind: ExperimentKind) -> Self {
        Self { kind, rows: Vec::new(), fits: BTreeMap::new(), frozen: BTreeMap::new(), verdicts: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict_text(&self) -> String {
        let mut s: String = self.verdicts.iter().map(|v| v.line() + "\n").collect();
        for n in &self.notes {
            s.push_str(&format!("NOTE {n}\n"));
        }
        s
    }

    /// Contents of `fit.json` without run metadata.
    pub fn fit_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "fits": self.fits,
            "frozen": self.frozen,
            "verdicts": self.verdicts,
            "notes": self.notes,
            "passed": self.passed(),
        })
    }

    fn verdict(&mut self, claim: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict::new(claim, passed, detail));
    }
}

/// Run the campaign named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Equidistribution => run_equidistribution(cfg),
        ExperimentKind::Generic => run_generic(cfg),
        ExperimentKind::Khintchine => run_khintchine(cfg),
        ExperimentKind::NullCount => run_null_count(cfg),
        ExperimentKind::Wellroundedness => run_wellroundedness(cfg),
        ExperimentKind::Valdist => run_valdist(cfg),
        ExperimentKind::Volume => run_volume(cfg),
        ExperimentKind::SumIntegral => run_sum_integral(cfg),
    }
}

/// Write `trials.csv`, `fit.json` and `verdict.txt` into `dir`. `fit` is
/// normally [`ExperimentOutput::fit_json`], possibly with metadata added.
pub fn write_outputs(dir: &Path, out: &ExperimentOutput, fit: &serde_json::Value) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trials.csv"), to_csv(&out.rows))?;
    std::fs::write(dir.join("fit.json"), serde_json::to_string_pretty(fit)? + "\n")?;
    std::fs::write(dir.join("verdict.txt"), out.verdict_text())?;
    Ok(())
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let k = s.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn fit_examples() {
        let xs = [1.0, 2.0, 4.0, 8.0, 16.0];
        let f = fit_exponent(&xs.map(|x| (x, x * x))).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.residual_rms < 1e-12);
        let f = fit_exponent(&xs.map(|x| (x, 5.0))).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-12);
        let mut rng = rng_from_seed(11);
        let pts: Vec<(f64, f64)> = (1..=40)
            .map(|i| {
                let x = i as f64 * 10.0;
                let e: f64 = StandardNormal.sample(&mut rng);
                (x, x.powf(1.5) * (1.0 + 0.01 * e))
            })
            .collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((1.45..=1.55).contains(&f.slope), "{f:?}");
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, -2.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = ExperimentConfig::parse(
            "# demo\nkind = khintchine\nn = 2\nT = 100, 200, 400\npsi = pow:c=0.5,lambda=1\ntrials = 5\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Khintchine);
        assert_eq!(cfg.form, "standard:2");
        assert_eq!(cfg.t_grid, vec![100.0, 200.0, 400.0]);
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.seed, 9);
        assert!(ExperimentConfig::parse("kind = nope").is_err());
        assert!(ExperimentConfig::parse("kind = generic\nfoo = 1").is_err());
        assert!(ExperimentConfig::parse("kind = generic\nT = 10, 5").is_err());
        assert!(ExperimentConfig::parse("T = 10").is_err());
    }

    #[test]
    fn csv_format() {
        let rows = vec![TrialRow::new("generic", 2, 250.0, "0.3".into(), 0, 7, 12.0, 10.0)];
        let csv = to_csv(&rows);
        assert_eq!(csv, "kind,n,T,param,trial,seed,count,main,disc,relerr\ngeneric,2,250,0.3,0,7,12,10,2,0.2\n");
        let quoted = to_csv(&[TrialRow::new("x", 1, 2.0, "a,b".into(), 0, 0, 1.0, 1.0)]);
        assert!(quoted.contains(",\"a,b\","));
    }

    #[test]
    fn median_and_mean() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
    }
}
