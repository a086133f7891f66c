//! Polar coordinates on the standard cone, caps, sectors, approximation
//! regions and their measures.
//!
//! A point of the positive cone of `Q_n` is `v = r·(α, 1)` with `r = v_{n+2}`
//! and `α ∈ S^n`. The cone measure in these coordinates is
//! `r^{n−1} dr dσ_n(α)` with `σ_n` the normalized sphere measure. Cap radii
//! are chordal: `𝔇_r(α) = {α′ : ‖α′ − α‖ < r}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadform::parse_rational;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `α₀ = (−1, 0, …, 0) ∈ S^n`.
pub fn alpha0(n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n + 1];
    a[0] = -1.0;
    a
}

/// `e₀ = (α₀, 1)`.
pub fn e0(n: usize) -> Vec<f64> {
    let mut e = alpha0(n);
    e.push(1.0);
    e
}

/// Parse a comma-separated list of rationals and scale it to unit length.
/// The rationals are converted to the nearest doubles before normalizing.
pub fn parse_direction(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| parse_rational(x).map(|r| r.to_f64().unwrap_or(f64::NAN)))
        .collect::<Result<_>>()?;
    let l = norm(&v);
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidArgument(format!("direction {s:?} has no length")));
    }
    Ok(v.into_iter().map(|x| x / l).collect())
}

/// Polar coordinates of a cone point.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub alpha: Vec<f64>,
}

pub fn to_polar(v: &[f64]) -> Result<PolarPoint> {
    let k = v.len();
    if k < 3 {
        return Err(Error::Dimension { expected: 3, got: k });
    }
    let r = v[k - 1];
    if !(r > 0.0) {
        return Err(Error::OffCone(format!("last coordinate {r} is not positive")));
    }
    let s: f64 = v[..k - 1].iter().map(|x| x * x).sum();
    let n2: f64 = s + r * r;
    if (s - r * r).abs() > 1e-9 * n2 {
        return Err(Error::OffCone(format!("Q_n(v) = {} is not zero", s - r * r)));
    }
    Ok(PolarPoint { r, alpha: v[..k - 1].iter().map(|x| x / r).collect() })
}

pub fn from_polar(p: &PolarPoint) -> Vec<f64> {
    let mut v: Vec<f64> = p.alpha.iter().map(|a| a * p.r).collect();
    v.push(p.r);
    v
}

/// Chordal radius to colatitude: `θ = arccos(1 − r²/2)`.
pub fn chordal_to_angle(r: f64) -> f64 {
    (1.0 - r * r / 2.0).max(-1.0).acos()
}

/// Colatitude to chordal radius: `r = 2 sin(θ/2)`.
pub fn angle_to_chordal(theta: f64) -> f64 {
    2.0 * (theta / 2.0).sin()
}

/// `σ_n(𝔇_r)`, the normalized measure of a cap of chordal radius `r` on
/// `S^n`: `½ I_{sin²θ}(n/2, 1/2)` for colatitude `θ ≤ π/2`, and one minus
/// that beyond.
pub fn cap_measure_exact(n: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("cap radius must be positive, got {r}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if r >= 2.0 {
        return Ok(1.0);
    }
    let x = (r * r * (1.0 - r * r / 4.0)).clamp(0.0, 1.0);
    let half = 0.5 * beta_reg(n as f64 / 2.0, 0.5, x);
    Ok(if r * r <= 2.0 { half } else { 1.0 - half })
}

/// `Γ(a/2)/Γ(b/2) = r·π^{e/2}`, returned as `(r, e)`. The power of `π`
/// is kept separate so that rational values come out exact.
pub(crate) fn gamma_half_ratio(a: usize, b: usize) -> (f64, i32) {
    if a.max(b) > 300 {
        return ((ln_gamma(a as f64 / 2.0) - ln_gamma(b as f64 / 2.0)).exp(), 0);
    }
    // Γ(k/2) = Γ(k₀/2)·Π_{j = k₀, k₀+2, …, k−2} j/2 with k₀ ∈ {1, 2}.
    let reduce = |k: usize| {
        let k0 = if k % 2 == 1 { 1 } else { 2 };
        let p = (k0..k).step_by(2).map(|j| j as f64 / 2.0).product::<f64>();
        (p, i32::from(k0 == 1))
    };
    let ((pa, ea), (pb, eb)) = (reduce(a), reduce(b));
    (pa / pb, ea - eb)
}

pub(crate) fn pi_half_pow(e: i32) -> f64 {
    if e == 0 {
        1.0
    } else {
        std::f64::consts::PI.powf(e as f64 / 2.0)
    }
}

/// `c_cap(n) = Γ((n+3)/2) / (π^{1/2} (n+1) Γ((n+2)/2))`.
pub fn c_cap(n: usize) -> f64 {
    let (r, e) = gamma_half_ratio(n + 3, n + 2);
    r / (n + 1) as f64 * pi_half_pow(e - 1)
}

/// `c_cap(n)·rⁿ`.
pub fn cap_measure_leading(n: usize, r: f64) -> f64 {
    c_cap(n) * r.powi(n as i32)
}

/// Exact or leading-order evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    Exact,
    Leading,
}

/// `m(S_{T,r,α}) = Tⁿ/n · σ_n(𝔇_r)`.
pub fn sector_measure(n: usize, t: f64, r: f64, mode: MeasureMode) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("height must be nonnegative, got {t}")));
    }
    let cap = match mode {
        MeasureMode::Exact => cap_measure_exact(n, r)?,
        MeasureMode::Leading => cap_measure_leading(n, r),
    };
    Ok(t.powi(n as i32) / n as f64 * cap)
}

/// Open cap `𝔇_r(α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalCap {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl SphericalCap {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if (norm(&center) - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument("cap center must be a unit vector".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("cap radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn n(&self) -> usize {
        self.center.len() - 1
    }

    /// `⟨α′, α⟩ > 1 − r²/2` for a unit vector `α′`. A radius of 2 or more
    /// is the whole sphere, antipode included.
    pub fn contains(&self, alpha: &[f64]) -> bool {
        self.radius >= 2.0 || dot(alpha, &self.center) > 1.0 - self.radius * self.radius / 2.0
    }

    /// Membership of `p/q` for an integer point with `‖p‖ = q`, decided
    /// exactly against the binary values of the center and radius.
    pub fn contains_lattice(&self, p: &[i64], q: i64) -> bool {
        if self.radius >= 2.0 {
            return true;
        }
        // ⟨p, α⟩ > q (1 − r²/2)
        let d: f64 = p.iter().zip(&self.center).map(|(&x, c)| x as f64 * c).sum();
        let rhs = q as f64 * (1.0 - self.radius * self.radius / 2.0);
        let scale = q as f64 * (1.0 + self.center.iter().map(|c| c.abs()).sum::<f64>());
        if (d - rhs).abs() > 1e-12 * scale {
            return d > rhs;
        }
        let ex = |x: f64| BigRational::from_float(x).expect("finite");
        let lhs: BigRational = p.iter().zip(&self.center).map(|(&x, &c)| ex(c) * BigInt::from(x)).sum();
        let r = ex(self.radius);
        let one = BigRational::from_integer(1.into());
        let two = BigRational::from_integer(2.into());
        lhs > (one - &r * &r / two) * BigInt::from(q)
    }

    pub fn measure(&self) -> f64 {
        cap_measure_exact(self.n(), self.radius).expect("radius validated")
    }
}

/// `S_{T,r,α} = {v : 0 < v_{n+2} < T, v/v_{n+2} ∈ 𝔇_r(α)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub t: f64,
    pub cap: SphericalCap,
}

impl Sector {
    pub fn contains(&self, v: &[f64]) -> bool {
        let k = v.len();
        let h = v[k - 1];
        if !(h > 0.0 && h < self.t) {
            return false;
        }
        let alpha: Vec<f64> = v[..k - 1].iter().map(|x| x / h).collect();
        // Off-cone points are judged by their direction vector normalized
        // the same way as on the cone.
        self.cap.contains(&alpha)
    }

    pub fn measure(&self, mode: MeasureMode) -> f64 {
        sector_measure(self.cap.n(), self.t, self.cap.radius, mode).expect("validated")
    }
}

/// Radius functions for approximation regions. All are positive,
/// continuous and nonincreasing on `[0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psi {
    /// `c·t^{−λ}` for `t ≥ 1`, and `c` below.
    Pow { c: f64, lambda: f64 },
    /// `c·(log t)^λ / t` for `t ≥ e^λ`, and its maximum value below.
    LogPow { c: f64, lambda: f64 },
    /// `c`.
    Const { c: f64 },
}

impl Psi {
    pub fn validate(&self) -> Result<()> {
        let (c, lambda) = match *self {
            Psi::Pow { c, lambda } => (c, lambda),
            Psi::LogPow { c, lambda } => {
                if !(lambda > 0.0) {
                    return Err(Error::InvalidArgument("log-power exponent must be positive".into()));
                }
                (c, lambda)
            }
            Psi::Const { c } => (c, 0.0),
        };
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("ψ scale must be positive, got {c}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("ψ is not decreasing for exponent {lambda}")));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Psi::Pow { c, lambda } => {
                if t <= 1.0 {
                    c
                } else {
                    c * t.powf(-lambda)
                }
            }
            Psi::LogPow { c, lambda } => {
                let t = t.max(lambda.exp());
                c * t.ln().powf(lambda) / t
            }
            Psi::Const { c } => c,
        }
    }

    /// `ψ(q)²` as an exact rational in the binary value of `c`, when it is
    /// one (constant, or power with `2λ` an integer).
    pub fn sq_exact(&self, q: u64) -> Option<BigRational> {
        let c = |c: f64| BigRational::from_float(c);
        match *self {
            Psi::Const { c: v } => c(v).map(|x| &x * &x),
            Psi::Pow { c: v, lambda } => {
                let two_l = 2.0 * lambda;
                if two_l.fract() != 0.0 || two_l > 64.0 {
                    return None;
                }
                let cc = c(v)?;
                if q <= 1 {
                    return Some(&cc * &cc);
                }
                let den = num_traits::pow(BigInt::from(q), two_l as usize);
                Some(&cc * &cc / BigRational::from_integer(den))
            }
            Psi::LogPow { .. } => None,
        }
    }

    /// Points where the formula changes.
    pub fn knots(&self) -> Vec<f64> {
        match *self {
            Psi::Pow { .. } => vec![1.0],
            Psi::LogPow { lambda, .. } => vec![lambda.exp()],
            Psi::Const { .. } => vec![],
        }
    }

    /// `ψ_ε^± (t) = (1 ± ε) ψ((1 + ε)^{∓1} t)`.
    pub fn perturbed(&self, eps: f64, plus: bool) -> PerturbedPsi {
        PerturbedPsi { base: *self, eps, plus }
    }

    /// Parse `pow:c=1,lambda=0.8`, `logpow:c=0.5,lambda=1` or `const:c=2`.
    /// `c` defaults to 1.
    pub fn parse(s: &str) -> Result<Self> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let mut c = 1.0;
        let mut lambda = None;
        for kv in params.split(',').filter(|x| !x.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad ψ parameter {kv:?}")))?;
            let v: f64 = parse_rational(v)?.to_f64().unwrap_or(f64::NAN);
            match k.trim() {
                "c" => c = v,
                "lambda" => lambda = Some(v),
                other => return Err(Error::Parse(format!("unknown ψ parameter {other:?}"))),
            }
        }
        let need = |l: Option<f64>| l.ok_or_else(|| Error::Parse(format!("ψ family {family:?} needs lambda")));
        let psi = match family.trim() {
            "pow" => Psi::Pow { c, lambda: need(lambda)? },
            "logpow" => Psi::LogPow { c, lambda: need(lambda)? },
            "const" => Psi::Const { c },
            other => return Err(Error::Parse(format!("unknown ψ family {other:?}"))),
        };
        psi.validate()?;
        Ok(psi)
    }
}

impl std::fmt::Display for Psi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psi::Pow { c, lambda } => write!(f, "pow:c={c},lambda={lambda}"),
            Psi::LogPow { c, lambda } => write!(f, "logpow:c={c},lambda={lambda}"),
            Psi::Const { c } => write!(f, "const:c={c}"),
        }
    }
}

/// `ψ_ε^±`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbedPsi {
    pub base: Psi,
    pub eps: f64,
    pub plus: bool,
}

impl PerturbedPsi {
    pub fn eval(&self, t: f64) -> f64 {
        let s = 1.0 + self.eps;
        if self.plus {
            s * self.base.eval(t / s)
        } else {
            (1.0 - self.eps) * self.base.eval(s * t)
        }
    }
}

/// A radius function: plain or perturbed.
pub trait RadiusFn {
    fn radius(&self, t: f64) -> f64;
}

impl RadiusFn for Psi {
    fn radius(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

impl RadiusFn for PerturbedPsi {
    fn radius(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

/// `E_{ψ,T} = {v : 0 < v_{n+2} < T, ‖α₀ − v/v_{n+2}‖ < ψ(v_{n+2})}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxRegion<P = Psi> {
    pub psi: P,
    pub t: f64,
}

impl<P: RadiusFn> ApproxRegion<P> {
    /// `2(v_1 + v_{n+2}) < v_{n+2} ψ(v_{n+2})²`.
    pub fn contains(&self, v: &[f64]) -> bool {
        let h = v[v.len() - 1];
        if !(h > 0.0 && h < self.t) {
            return false;
        }
        let p = self.psi.radius(h);
        2.0 * (v[0] + h) < h * p * p
    }

    /// `‖α₀ − α‖ < ψ(v_{n+2})`, the defining form.
    pub fn contains_by_norm(&self, v: &[f64]) -> bool {
        let k = v.len();
        let h = v[k - 1];
        if !(h > 0.0 && h < self.t) {
            return false;
        }
        let a0 = alpha0(k - 2);
        let d: f64 = v[..k - 1].iter().zip(&a0).map(|(x, a)| (a - x / h).powi(2)).sum::<f64>().sqrt();
        d < self.psi.radius(h)
    }
}

impl ApproxRegion<Psi> {
    /// Exact membership for an integer cone point when `ψ(q)²` is rational.
    pub fn contains_lattice(&self, v: &[i64]) -> bool {
        let h = v[v.len() - 1];
        if !(h > 0 && (h as f64) < self.t) {
            return false;
        }
        match self.psi.sq_exact(h as u64) {
            Some(p2) => BigRational::from_integer(BigInt::from(2 * (v[0] + h))) < p2 * BigInt::from(h),
            None => {
                let vf: Vec<f64> = v.iter().map(|&x| x as f64).collect();
                self.contains(&vf)
            }
        }
    }
}

/// A finite union of caps and cap complements on `S^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapUnion {
    /// `(cap, complement)`.
    pub parts: Vec<(SphericalCap, bool)>,
}

impl CapUnion {
    pub fn contains(&self, alpha: &[f64]) -> bool {
        self.parts.iter().any(|(c, comp)| c.contains(alpha) != *comp)
    }

    /// `σ_n` of a single cap or complement; unions of several parts have no
    /// closed form here.
    pub fn measure(&self) -> Option<f64> {
        match self.parts.as_slice() {
            [(c, false)] => Some(c.measure()),
            [(c, true)] => Some(1.0 - c.measure()),
            _ => None,
        }
    }
}

/// A cone set with indicator `ρ(y)·φ(α)` where `v = y⁻¹(α, 1)`; `ρ` is a
/// union of intervals in `y` bounded away from zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedSector {
    pub rho: Vec<(f64, f64)>,
    pub phi: CapUnion,
}

impl GeneralizedSector {
    pub fn new(rho: Vec<(f64, f64)>, phi: CapUnion) -> Result<Self> {
        if rho.iter().any(|&(a, b)| !(a > 0.0 && b > a)) {
            return Err(Error::InvalidArgument("ρ intervals must satisfy 0 < a < b (bounded set)".into()));
        }
        Ok(Self { rho, phi })
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        let k = v.len();
        let h = v[k - 1];
        if !(h > 0.0) {
            return false;
        }
        let y = 1.0 / h;
        let alpha: Vec<f64> = v[..k - 1].iter().map(|x| x / h).collect();
        self.rho.iter().any(|&(a, b)| y > a && y < b) && self.phi.contains(&alpha)
    }

    /// `ρ̂(n)·σ_n(φ)` with `ρ̂(n) = Σ (a^{−n} − b^{−n})/n`, for disjoint
    /// intervals and a single-part `φ`.
    pub fn measure(&self) -> Option<f64> {
        let n = self.phi.parts.first()?.0.n() as i32;
        let rho_hat: f64 = self.rho.iter().map(|&(a, b)| (a.powi(-n) - b.powi(-n)) / n as f64).sum();
        Some(rho_hat * self.phi.measure()?)
    }
}

/// A region of the standard cone.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Cap(SphericalCap),
    Sector(Sector),
    Approx(ApproxRegion),
    Generalized(GeneralizedSector),
}

impl Region {
    /// Membership of a cone point (caps test its direction only).
    pub fn contains(&self, v: &[f64]) -> bool {
        match self {
            Region::Cap(c) => {
                let h = v[v.len() - 1];
                h > 0.0 && c.contains(&v[..v.len() - 1].iter().map(|x| x / h).collect::<Vec<_>>())
            }
            Region::Sector(s) => s.contains(v),
            Region::Approx(a) => a.contains(v),
            Region::Generalized(g) => g.contains(v),
        }
    }

    pub fn contains_polar(&self, p: &PolarPoint) -> bool {
        self.contains(&from_polar(p))
    }

    /// Parse `cap:<r>@<α>`, `sector:<T>,<r>@<α>` or
    /// `region:psi=<family:params>,T=<T>`.
    pub fn parse(s: &str) -> Result<Self> {
        let num = |x: &str| -> Result<f64> { Ok(parse_rational(x)?.to_f64().unwrap_or(f64::NAN)) };
        if let Some(rest) = s.strip_prefix("cap:") {
            let (r, a) = rest.split_once('@').ok_or_else(|| Error::Parse(format!("expected cap:<r>@<α>, got {s:?}")))?;
            return Ok(Region::Cap(SphericalCap::new(parse_direction(a)?, num(r)?)?));
        }
        if let Some(rest) = s.strip_prefix("sector:") {
            let (tr, a) = rest.split_once('@').ok_or_else(|| Error::Parse(format!("expected sector:<T>,<r>@<α>, got {s:?}")))?;
            let (t, r) = tr.split_once(',').ok_or_else(|| Error::Parse(format!("expected <T>,<r> in {s:?}")))?;
            return Ok(Region::Sector(Sector { t: num(t)?, cap: SphericalCap::new(parse_direction(a)?, num(r)?)? }));
        }
        if let Some(rest) = s.strip_prefix("region:psi=") {
            let (p, t) = rest.rsplit_once(",T=").ok_or_else(|| Error::Parse(format!("expected ,T=<T> in {s:?}")))?;
            return Ok(Region::Approx(ApproxRegion { psi: Psi::parse(p)?, t: num(t)? }));
        }
        Err(Error::Parse(format!("unknown region spec {s:?}")))
    }
}

/// `∫_a^b f` split at `knots` and at powers of two, each piece by
/// double-exponential quadrature, refined until the estimated error is
/// below `rel_tol` of the result.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, knots: &[f64], rel_tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut pts = vec![a, b];
    pts.extend(knots.iter().copied().filter(|&k| k > a && k < b));
    let mut p = 1.0;
    while p < b {
        if p > a {
            pts.push(p);
        }
        p *= 2.0;
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let pieces: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    let rough: f64 = pieces.iter().map(|&(lo, hi)| f(0.5 * (lo + hi)).abs() * (hi - lo)).sum();
    let tol = (rel_tol * rough).max(1e-300);
    pieces.iter().map(|&(lo, hi)| piece(&f, lo, hi, tol * (hi - lo) / (b - a), 0)).sum()
}

fn piece<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let out = quadrature::integrate(f, lo, hi, tol);
    if out.error_estimate <= tol || depth >= 30 {
        return out.integral;
    }
    let mid = 0.5 * (lo + hi);
    piece(f, lo, mid, tol / 2.0, depth + 1) + piece(f, mid, hi, tol / 2.0, depth + 1)
}

/// Where a nonincreasing `ψ` drops below 2 (cap stops being the full sphere).
fn full_sphere_knot<P: RadiusFn>(psi: &P, t_max: f64) -> Option<f64> {
    if psi.radius(0.0) < 2.0 || psi.radius(t_max) >= 2.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi.radius(mid) >= 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// `𝒥_ψ(T) = ∫₀ᵀ t^{n−1} ψ(t)ⁿ dt`.
pub fn j_integral(psi: &Psi, n: usize, t: f64) -> f64 {
    let ni = n as i32;
    integrate(|s| s.powi(ni - 1) * psi.eval(s).powi(ni), 0.0, t, &psi.knots(), 1e-10)
}

/// `m(E_{ψ,T})`: either `∫₀ᵀ σ_n(𝔇_{ψ(t)}) t^{n−1} dt` by quadrature or the
/// leading term `c_cap(n)·𝒥_ψ(T)`.
pub fn region_measure(psi: &Psi, n: usize, t: f64, mode: MeasureMode) -> Result<f64> {
    psi.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("height must be nonnegative, got {t}")));
    }
    Ok(match mode {
        MeasureMode::Leading => c_cap(n) * j_integral(psi, n, t),
        MeasureMode::Exact => region_measure_with(psi, n, t, &psi.knots()),
    })
}

/// Quadrature of `σ_n(𝔇_{ψ(t)}) t^{n−1}` for any nonincreasing radius.
pub fn region_measure_with<P: RadiusFn>(psi: &P, n: usize, t: f64, knots: &[f64]) -> f64 {
    let mut knots = knots.to_vec();
    knots.extend(full_sphere_knot(psi, t));
    let ni = n as i32;
    integrate(
        |s| s.powi(ni - 1) * cap_measure_exact(n, psi.radius(s)).unwrap_or(0.0),
        0.0,
        t,
        &knots,
        1e-10,
    )
}
