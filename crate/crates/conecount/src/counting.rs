//! Counting rational points on a `𝒬`-sphere near a target, the main-term
//! predictions, and the predicted error exponents.
//!
//! A rational point `p/q` in lowest terms with `𝒬(p) = q²` is the primitive
//! cone point `(p, q)`. With `α = xτ̃` on the unit sphere the point lies in
//! the `𝒬`-cap of radius `r` about `x` iff
//! `s = 1 − ⟨pτ̃, α⟩/q < r²/2`, since `‖α − pτ̃/q‖² = 2s`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::enumeration::{count_all, q_max_below, Enumerator, Strategy};
use crate::error::{Error, Result};
use crate::geometry::{c_cap, cap_measure_exact, norm, Psi, Sector, SphericalCap};
use crate::quadform::{row_times, EllipsoidForm, QuadraticSpace};

/// Echo of the query that produced a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryEcho {
    pub kind: String,
    pub alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(rename = "T")]
    pub t: f64,
    pub form: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Count, main term and signed discrepancy for one query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub query: QueryEcho,
    pub count: u64,
    pub main_term: f64,
    pub discrepancy: f64,
    pub relative_error: f64,
    pub kappa_source: String,
}

impl CountReport {
    pub fn new(query: QueryEcho, count: u64, main_term: f64, kappa_source: String) -> Self {
        let discrepancy = count as f64 - main_term;
        Self { query, count, main_term, discrepancy, relative_error: discrepancy.abs() / main_term.max(1.0), kappa_source }
    }
}

/// Empirical leading constants of `#{(p, q) : q < T} ~ κ Tⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub kappa_hat: f64,
    pub omega_hat: f64,
    pub varkappa_hat: f64,
    /// Two-point extrapolation from `T` and `T/2`, assuming a correction
    /// of relative order `1/T`. Informational only.
    pub kappa_richardson: f64,
    pub t_fit: f64,
    pub count: u64,
    pub source: String,
}

impl KappaEstimate {
    /// Constants derived from a given `κ`.
    pub fn from_kappa(n: usize, kappa: f64, source: &str) -> Self {
        Self {
            kappa_hat: kappa,
            omega_hat: n as f64 * kappa,
            varkappa_hat: c_cap(n) * kappa,
            kappa_richardson: kappa,
            t_fit: f64::NAN,
            count: 0,
            source: source.to_string(),
        }
    }
}

/// Minimum number of points behind a `κ̂`.
pub const KAPPA_MIN_POINTS: u64 = 1000;

/// `κ̂ = count_all(T)/Tⁿ`, `ω̂ = nκ̂`, `ϰ̂ = c_cap(n)κ̂`.
pub fn estimate_kappa(form: &EllipsoidForm, t_fit: f64) -> Result<KappaEstimate> {
    let n = form.n();
    let en = Enumerator::new(form, Strategy::Auto)?.unsorted();
    let layers = en.layer_counts(q_max_below(t_fit))?;
    let count: u64 = layers.iter().sum();
    if count < KAPPA_MIN_POINTS {
        return Err(Error::InsufficientPoints(format!(
            "{count} points below T = {t_fit}, need {KAPPA_MIN_POINTS}"
        )));
    }
    let half = t_fit / 2.0;
    let count_half: u64 = layers[..q_max_below(half) as usize].iter().sum();
    let ni = n as i32;
    let kappa = count as f64 / t_fit.powi(ni);
    // count(T) ≈ κTⁿ + cT^{n−1}: eliminate c between T and T/2.
    let a = count as f64 / t_fit.powi(ni - 1);
    let b = count_half as f64 / half.powi(ni - 1);
    let kappa_richardson = (a - b) / (t_fit - half);
    let mut k = KappaEstimate::from_kappa(n, kappa, &format!("estimated:T={t_fit}"));
    k.kappa_richardson = kappa_richardson;
    k.t_fit = t_fit;
    k.count = count;
    Ok(k)
}

/// Points of `𝒬(p) = q²` whose direction came within a per-layer radius of
/// one target. `s[i] = ‖α − p_iτ̃/q_i‖²/2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NearHits {
    pub q: Vec<u64>,
    pub s: Vec<f64>,
}

impl NearHits {
    /// `#{hits : q < t, s < r(q)²/2}`. Only meaningful for radii no larger
    /// than the one used in the scan.
    pub fn count_with<F: Fn(u64) -> f64>(&self, t: f64, radius: F) -> u64 {
        self.q
            .iter()
            .zip(&self.s)
            .filter(|&(&q, &s)| (q as f64) < t && s < radius(q).powi(2) / 2.0)
            .count() as u64
    }

    /// `#{hits : q < t}`.
    pub fn count_below(&self, t: f64) -> u64 {
        self.q.iter().filter(|&&q| (q as f64) < t).count() as u64
    }
}

/// One pass over layers `1..=q_max`, collecting for each target `α_j` the
/// points with `‖α_j − pτ̃/q‖ < radius(q)`. A radius of 2 or more takes
/// the whole layer.
///
/// Points within `1e-12` of the boundary are decided exactly against the
/// binary values of `x = ατ̃⁻¹` and `radius(q)`.
pub fn near_hits<F: Fn(u64) -> f64>(
    form: &EllipsoidForm,
    alphas: &[Vec<f64>],
    radius: F,
    q_max: u64,
) -> Result<Vec<NearHits>> {
    let mut out = vec![NearHits::default(); alphas.len()];
    scan_near(form, alphas, radius, q_max, |j, q, s| {
        out[j].q.push(q);
        out[j].s.push(s);
    })?;
    Ok(out)
}

/// Like [`near_hits`], keeping only the number of hits per target.
pub fn near_counts<F: Fn(u64) -> f64>(form: &EllipsoidForm, alphas: &[Vec<f64>], radius: F, q_max: u64) -> Result<Vec<u64>> {
    let mut out = vec![0u64; alphas.len()];
    scan_near(form, alphas, radius, q_max, |j, _, _| out[j] += 1)?;
    Ok(out)
}

fn scan_near<F, V>(form: &EllipsoidForm, alphas: &[Vec<f64>], radius: F, q_max: u64, mut visit: V) -> Result<()>
where
    F: Fn(u64) -> f64,
    V: FnMut(usize, u64, f64),
{
    let k = form.n() + 1;
    for a in alphas {
        check_unit(a, k)?;
    }
    // ⟨pτ̃, α⟩ = ⟨p, w⟩ with w = τ̃αᵀ.
    let tt = form.tau_tilde().transpose();
    let ws: Vec<Vec<f64>> = alphas.iter().map(|a| row_times(a, &tt)).collect();
    let xs: Vec<Vec<f64>> = alphas.iter().map(|a| form.from_sphere(a)).collect();
    let en = Enumerator::new(form, Strategy::Auto)?.unsorted();
    en.for_each_layer(1, q_max, |q, pts| {
        let r = radius(q);
        let lim = r * r / 2.0;
        let qf = q as f64;
        for p in pts.chunks_exact(k) {
            for (j, w) in ws.iter().enumerate() {
                let d: f64 = p.iter().zip(w).map(|(&a, b)| a as f64 * b).sum();
                let s = 1.0 - d / qf;
                let inside = if r >= 2.0 {
                    true
                } else if (s - lim).abs() <= 1e-12 * (1.0 + lim) {
                    exact_inside(form, p, q, &xs[j], r)
                } else {
                    s < lim
                };
                if inside {
                    visit(j, q, s);
                }
            }
        }
    })
}

/// `𝒬(p/q − x) < r²`, i.e. `B(p, x) > q(1 − r²/2)` given `𝒬(x) = 1`, in
/// exact rational arithmetic on the binary inputs.
fn exact_inside(form: &EllipsoidForm, p: &[i64], q: u64, x: &[f64], r: f64) -> bool {
    let ex = |v: f64| BigRational::from_float(v).expect("finite");
    let xr: Vec<BigRational> = x.iter().map(|&v| ex(v)).collect();
    let a = form.a();
    let mut b = BigRational::from_integer(0.into());
    for (i, &pi) in p.iter().enumerate() {
        let mut row = BigRational::from_integer(0.into());
        for (l, xl) in xr.iter().enumerate() {
            row += &a[i][l] * xl;
        }
        b += row * BigInt::from(pi);
    }
    let one = BigRational::from_integer(1.into());
    let r = ex(r);
    b > (one - &r * &r / BigRational::from_integer(2.into())) * BigInt::from(q)
}

fn check_unit(a: &[f64], k: usize) -> Result<()> {
    if a.len() != k {
        return Err(Error::Dimension { expected: k, got: a.len() });
    }
    if (norm(a) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("target direction must be a unit vector".into()));
    }
    Ok(())
}

fn form_id(form: &EllipsoidForm) -> String {
    QuadraticSpace::from_ellipsoid(form).fingerprint()
}

/// `𝒩_𝒬(x, r, T)` for `x = ατ̃⁻¹`, with main term `κ̂ Tⁿ σ_n(𝔇_r)`.
pub fn count_cap(form: &EllipsoidForm, alpha: &[f64], r: f64, t: f64, kappa: &KappaEstimate) -> Result<CountReport> {
    if !(r > 0.0) || !(t > 1.0) {
        return Err(Error::InvalidArgument(format!("need r > 0 and T > 1, got r = {r}, T = {t}")));
    }
    let count = near_counts(form, &[alpha.to_vec()], |_| r, q_max_below(t))?[0];
    let n = form.n();
    let main = kappa.kappa_hat * t.powi(n as i32) * cap_measure_exact(n, r)?;
    let query = QueryEcho {
        kind: "cap".into(),
        alpha: alpha.to_vec(),
        r: Some(r),
        psi: None,
        t,
        form: form_id(form),
        seed: None,
    };
    Ok(CountReport::new(query, count, main, kappa.source.clone()))
}

/// `𝒩_ψ(x, T)`, with main term `n ϰ̂ J_ψ(T)`.
pub fn count_khintchine(form: &EllipsoidForm, alpha: &[f64], psi: &Psi, t: f64, kappa: &KappaEstimate) -> Result<CountReport> {
    psi.validate()?;
    if !(t > 1.0) {
        return Err(Error::InvalidArgument(format!("need T > 1, got {t}")));
    }
    let hits = near_hits(form, &[alpha.to_vec()], |q| psi.eval(q as f64), q_max_below(t))?;
    let n = form.n();
    let main = n as f64 * kappa.varkappa_hat * j_sum(psi, n, t);
    let query = QueryEcho {
        kind: "khintchine".into(),
        alpha: alpha.to_vec(),
        r: None,
        psi: Some(psi.to_string()),
        t,
        form: form_id(form),
        seed: None,
    };
    Ok(CountReport::new(query, hits[0].q.len() as u64, main, kappa.source.clone()))
}

/// `J_ψ(T) = Σ_{1 ≤ q < T} q^{n−1} ψ(q)ⁿ`.
pub fn j_sum(psi: &Psi, n: usize, t: f64) -> f64 {
    power_sum(psi, n, n, t)
}

/// `I_ψ(T) = Σ_{1 ≤ q < T} q^{n−1} ψ(q)^{n+2}`.
pub fn i_sum(psi: &Psi, n: usize, t: f64) -> f64 {
    power_sum(psi, n, n + 2, t)
}

fn power_sum(psi: &Psi, n: usize, e: usize, t: f64) -> f64 {
    // Summed from the small terms up.
    (1..=q_max_below(t))
        .rev()
        .map(|q| (q as f64).powi(n as i32 - 1) * psi.eval(q as f64).powi(e as i32))
        .sum()
}

/// Both sides of `𝒩_𝒬(x, r, T) = #(𝓛̃_Q ∩ S_{T,r,α})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    /// Rational points with `𝒬(p/q − x) < r²`.
    pub lhs: u64,
    /// Cone points with `vτ ∈ S_{T,r,α}`.
    pub rhs: u64,
    /// Points on which the two memberships disagree.
    pub mismatches: u64,
}

impl CrossCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs && self.mismatches == 0
    }
}

/// Evaluate both sides independently: the left by the `𝒬`-distance of `p/q`
/// to `x = ατ̃⁻¹`, the right by sector membership of `(p, q)τ` with `τ`
/// from the cone form's own diagonalization.
pub fn cross_check_counts(form: &EllipsoidForm, alpha: &[f64], r: f64, t: f64) -> Result<CrossCheck> {
    check_unit(alpha, form.n() + 1)?;
    let space = QuadraticSpace::from_ellipsoid(form);
    let x = form.from_sphere(alpha);
    let sector = Sector { t, cap: SphericalCap::new(alpha.to_vec(), r)? };
    let k = form.n() + 1;
    let en = Enumerator::new(form, Strategy::Auto)?.unsorted();
    let mut res = CrossCheck { lhs: 0, rhs: 0, mismatches: 0 };
    let mut err = None;
    en.for_each_layer(1, q_max_below(t), |q, pts| {
        let qf = q as f64;
        for p in pts.chunks_exact(k) {
            let diff: Vec<f64> = p.iter().zip(&x).map(|(&a, b)| a as f64 / qf - b).collect();
            let left = r >= 2.0 || form.value_f64(&diff) < r * r;
            let mut v: Vec<f64> = p.iter().map(|&a| a as f64).collect();
            v.push(qf);
            let right = match space.to_standard(&v) {
                Ok(w) => sector.contains(&w),
                Err(e) => {
                    err = Some(e);
                    false
                }
            };
            res.lhs += left as u64;
            res.rhs += right as u64;
            res.mismatches += (left != right) as u64;
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(res),
    }
}

pub fn cross_check_identity(form: &EllipsoidForm, alpha: &[f64], r: f64, t: f64) -> Result<bool> {
    Ok(cross_check_counts(form, alpha, r, t)?.holds())
}

/// Predicted exponents for one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub n: usize,
    /// `n > 1` and `n ≡ 1 mod 8`: the Eisenstein series has the extra pole.
    pub exceptional_pole: bool,
    /// `s_n = ⌊(n+2)/2⌋`.
    pub s_n: usize,
    /// `1`, or `2s_n/n` with the extra pole.
    pub beta: f64,
    /// With the extra pole, the other stated value `n/(n+1)`.
    pub beta_alt: Option<f64>,
    /// Fixed caps: error `≪ r^{−a} T^{−b}` relative, `(a, b)`.
    pub cap_r_exponent: f64,
    pub cap_t_exponent: f64,
    /// Shrinking caps `r = T^{−λ}`: error exponent factor on the main term.
    pub shrinking_factor: f64,
    /// Khintchine counting: error `J^{(n+3)/(n+4)} log J`.
    pub khintchine_exponent: f64,
    /// Family counting over all translates, `d = 2n+1`: `(δ, m(B))`
    /// exponents.
    pub all_translates_d: usize,
    pub all_translates_delta_exponent: f64,
    pub all_translates_measure_exponent: f64,
    /// Increasing families, a.e. translate, `d = n+1`.
    pub generic_d: usize,
    pub generic_measure_exponent: f64,
}

/// Exponents for the standard form in dimension `n`. Only `n` matters: the
/// extra pole condition is stated for `Q_n`.
pub fn predicted_exponents(n: usize) -> Result<ExponentTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let exceptional_pole = n > 1 && n % 8 == 1;
    let s_n = (n + 2) / 2;
    let nf = n as f64;
    let beta = if exceptional_pole { 2.0 * s_n as f64 / nf } else { 1.0 };
    let beta_alt = exceptional_pole.then(|| nf / (nf + 1.0));
    let d_all = 2 * n + 1;
    let d_gen = n + 1;
    Ok(ExponentTable {
        n,
        exceptional_pole,
        s_n,
        beta,
        beta_alt,
        cap_r_exponent: (3.0 - beta) * nf / (2.0 * nf + 3.0),
        cap_t_exponent: (2.0 - beta) * nf / (2.0 * nf + 3.0),
        shrinking_factor: 1.0 - (2.0 - beta) / (nf + 4.0),
        khintchine_exponent: (nf + 3.0) / (nf + 4.0),
        all_translates_d: d_all,
        all_translates_delta_exponent: -1.0 / (d_all as f64 + 2.0),
        all_translates_measure_exponent: 1.0 - (2.0 - beta) / (d_all as f64 + 2.0),
        generic_d: d_gen,
        generic_measure_exponent: 1.0 - (2.0 - beta) / (d_gen as f64 + 3.0),
    })
}

/// `#{(p, q) : q < T}` together with the main term `κ̂ Tⁿ`.
pub fn count_all_report(form: &EllipsoidForm, t: f64, kappa: &KappaEstimate) -> Result<CountReport> {
    let count = count_all(form, t)?;
    let query = QueryEcho {
        kind: "all".into(),
        alpha: Vec::new(),
        r: None,
        psi: None,
        t,
        form: form_id(form),
        seed: None,
    };
    Ok(CountReport::new(query, count, kappa.kappa_hat * t.powi(form.n() as i32), kappa.source.clone()))
}
