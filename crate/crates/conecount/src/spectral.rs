//! Mellin transforms, the factors `P_d(s)` and the second moment
//! `M_{f,f'}(s)` for separable functions `f(e₀ a_y k) = ρ(y) φ(k)` whose
//! spherical part is zonal about a common pole.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{cap_measure_exact, GeneralizedSector};

/// Quadrature nodes per integral.
pub const QUAD_NODES: usize = 512;
/// Default truncation degree.
pub const D_MAX: usize = 64;

/// `ρ̂(s) = ∫₀^∞ ρ(y) y^{−(s+1)} dy = Σ (a^{−s} − b^{−s})/s` for `ρ` the
/// indicator of a disjoint union of intervals `[a, b]`.
pub fn mellin(rho: &[(f64, f64)], s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("Mellin transform of an indicator has a pole at s = 0".into()));
    }
    check_rho(rho)?;
    let pw = |x: f64| (-s * x.ln()).exp();
    Ok(rho.iter().map(|&(a, b)| (pw(a) - pw(b)) / s).sum())
}

fn check_rho(rho: &[(f64, f64)]) -> Result<()> {
    if rho.iter().any(|&(a, b)| !(a > 0.0 && b > a && b.is_finite())) {
        return Err(Error::InvalidArgument("ρ intervals must satisfy 0 < a < b < ∞".into()));
    }
    Ok(())
}

/// `P_d(s) = ∏_{i<d} (n − s + i)/(s + i)`, and `1` for `d = 0`.
pub fn p_d(n: usize, d: usize, s: Complex64) -> Result<Complex64> {
    let mut p = Complex64::new(1.0, 0.0);
    for i in 0..d {
        let den = s + i as f64;
        if den.norm() == 0.0 {
            return Err(Error::InvalidArgument(format!("P_d has a pole at s = −{i}")));
        }
        p *= (n as f64 - s + i as f64) / den;
    }
    Ok(p)
}

/// Zonal profile on `S^n`, as a function of the angle `θ` to the pole.
#[derive(Clone, Copy, Debug)]
pub enum Zonal {
    Full,
    /// Open cap of chordal radius `r`.
    Cap(f64),
    /// Complement of the open cap of chordal radius `r`.
    CapComplement(f64),
    /// A smooth profile `t ↦ φ(t)` with `t = cos θ`.
    Smooth(fn(f64) -> f64),
}

impl Zonal {
    /// Polar angle of the cap boundary.
    fn theta0(r: f64) -> f64 {
        if r >= 2.0 {
            std::f64::consts::PI
        } else {
            (1.0 - r * r / 2.0).clamp(-1.0, 1.0).acos()
        }
    }

    /// Integration range in `θ` and the profile value on it.
    #[allow(clippy::type_complexity)]
    fn pieces(&self) -> (f64, f64, Option<fn(f64) -> f64>) {
        use std::f64::consts::PI;
        match *self {
            Zonal::Full => (0.0, PI, None),
            Zonal::Cap(r) => (0.0, Self::theta0(r), None),
            Zonal::CapComplement(r) => (Self::theta0(r), PI, None),
            Zonal::Smooth(f) => (0.0, PI, Some(f)),
        }
    }
}

/// `f(e₀ a_y k) = ρ(y) φ(k)`.
#[derive(Clone, Debug)]
pub struct SeparableFunction {
    pub n: usize,
    pub rho: Vec<(f64, f64)>,
    pub phi: Zonal,
}

impl SeparableFunction {
    pub fn new(n: usize, rho: Vec<(f64, f64)>, phi: Zonal) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        check_rho(&rho)?;
        if let Zonal::Cap(r) | Zonal::CapComplement(r) = phi {
            if !(r > 0.0) {
                return Err(Error::InvalidArgument(format!("cap radius must be positive, got {r}")));
            }
        }
        Ok(Self { n, rho, phi })
    }

    /// Split a generalized sector whose spherical part is one cap or one
    /// cap complement; the cap center is the pole.
    pub fn from_sector(sector: &GeneralizedSector) -> Result<(Self, Vec<f64>)> {
        match sector.phi.parts.as_slice() {
            [(cap, comp)] => {
                let phi = if *comp { Zonal::CapComplement(cap.radius) } else { Zonal::Cap(cap.radius) };
                Ok((Self::new(cap.n(), sector.rho.clone(), phi)?, cap.center.clone()))
            }
            _ => Err(Error::InvalidArgument("φ is not zonal: only a single cap or cap complement is supported".into())),
        }
    }

    /// `f_λ(v) = f(λ⁻¹v)`, so `ρ_λ(y) = ρ(λy)`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { rho: self.rho.iter().map(|&(a, b)| (a / lambda, b / lambda)).collect(), ..self.clone() }
    }

    /// `m_{𝓥⁺}(f) = ρ̂(n)·σ_n(φ)` for indicator profiles.
    pub fn measure(&self) -> Result<f64> {
        let rho_n = mellin(&self.rho, Complex64::new(self.n as f64, 0.0))?.re;
        let sigma = match self.phi {
            Zonal::Full => 1.0,
            Zonal::Cap(r) => cap_measure_exact(self.n, r)?,
            Zonal::CapComplement(r) => 1.0 - cap_measure_exact(self.n, r)?,
            Zonal::Smooth(_) => return Err(Error::InvalidArgument("measure needs an indicator profile".into())),
        };
        Ok(rho_n * sigma)
    }
}

/// Zonal harmonic of degree `d` on `S^n` at angle `θ`: `cos(dθ)` for
/// `n = 1`, the Gegenbauer polynomial `C_d^{(n−1)/2}(cos θ)` otherwise.
/// Fills `out[0..=d_max]`.
fn zonal_harmonics(n: usize, d_max: usize, theta: f64, out: &mut [f64]) {
    if n == 1 {
        for (d, o) in out.iter_mut().enumerate().take(d_max + 1) {
            *o = (d as f64 * theta).cos();
        }
        return;
    }
    let lam = (n as f64 - 1.0) / 2.0;
    let t = theta.cos();
    out[0] = 1.0;
    if d_max >= 1 {
        out[1] = 2.0 * lam * t;
    }
    for d in 2..=d_max {
        let df = d as f64;
        out[d] = (2.0 * t * (df + lam - 1.0) * out[d - 1] - (df + 2.0 * lam - 2.0) * out[d - 2]) / df;
    }
}

/// Harmonic decomposition of a zonal profile up to degree `D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZonalCoefficients {
    /// `⟨φ, Z_d⟩` with `Z_d` the zonal harmonic, under the probability measure.
    pub inner: Vec<f64>,
    /// `‖Z_d‖²`.
    pub norm_sq: Vec<f64>,
    /// `‖φ‖²`.
    pub total: f64,
}

impl ZonalCoefficients {
    /// `‖φ_d‖² = ⟨φ, Z_d⟩²/‖Z_d‖²`.
    pub fn energy(&self, d: usize) -> f64 {
        self.inner[d] * self.inner[d] / self.norm_sq[d]
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.inner.len()).map(|d| self.energy(d)).collect()
    }

    /// `‖φ‖² − Σ_{d≤D} ‖φ_d‖²`, clamped at zero.
    pub fn remainder(&self) -> f64 {
        (self.total - self.energies().iter().sum::<f64>()).max(0.0)
    }
}

/// `∫ f(θ) sin^{n−1}θ dθ` over `[a, b]`, divided by the same over `[0, π]`.
fn sphere_average<F: Fn(f64) -> f64>(quad: &GaussLegendre, n: usize, a: f64, b: f64, f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let nf = n as f64;
    let z = (0.5 * std::f64::consts::PI.ln() + ln_gamma(nf / 2.0) - ln_gamma((nf + 1.0) / 2.0)).exp();
    quad.integrate(a, b, |th| f(th) * th.sin().powi(n as i32 - 1)) / z
}

/// Gauss–Legendre coefficients of `φ` against the zonal harmonics of
/// degrees `0..=d_max`.
pub fn zonal_coefficients(n: usize, phi: Zonal, d_max: usize) -> ZonalCoefficients {
    let quad = GaussLegendre::new(NonZeroUsize::new(QUAD_NODES).expect("nonzero"));
    let (a, b, smooth) = phi.pieces();
    let val = |th: f64| smooth.map_or(1.0, |f| f(th.cos()));
    let harm = |d: usize, th: f64| {
        let mut z = vec![0.0; d + 1];
        zonal_harmonics(n, d, th, &mut z);
        z[d]
    };
    let (inner, norm_sq): (Vec<f64>, Vec<f64>) = (0..=d_max)
        .into_par_iter()
        .map(|d| {
            let inner = sphere_average(&quad, n, a, b, |th| val(th) * harm(d, th));
            let nsq = sphere_average(&quad, n, 0.0, std::f64::consts::PI, |th| harm(d, th).powi(2));
            (inner, nsq)
        })
        .unzip();
    let total = sphere_average(&quad, n, a, b, |th| val(th).powi(2));
    ZonalCoefficients { inner, norm_sq, total }
}

/// Truncated second moment and a bound on the omitted tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MffResult {
    #[serde(rename = "M")]
    pub m: f64,
    pub tail_bound: f64,
    pub d_max: usize,
}

/// `M_{f,f'}(s) = ρ̂(s) ρ̂'(s) Σ_{d≥0} P_d(s) ⟨φ_d, φ'_d⟩` for real
/// `s ∈ (n/2, n)`, summed to `D`.
///
/// `P_d(s)` is positive and decreasing in `d` on that interval, so by
/// Cauchy–Schwarz the tail is at most `|ρ̂ρ̂'| P_{D+1}(s) √(R R')` with `R`
/// the Parseval remainders.
pub fn m_ff(f: &SeparableFunction, fp: &SeparableFunction, s: f64, d_max: usize) -> Result<MffResult> {
    if f.n != fp.n {
        return Err(Error::Dimension { expected: f.n, got: fp.n });
    }
    let n = f.n;
    let nf = n as f64;
    if !(s > nf / 2.0 && s < nf) {
        return Err(Error::InvalidArgument(format!("need n/2 < s < n, got s = {s}")));
    }
    if d_max < 8 {
        return Err(Error::InvalidArgument(format!("D_max must be at least 8, got {d_max}")));
    }
    let sc = Complex64::new(s, 0.0);
    let rr = mellin(&f.rho, sc)?.re * mellin(&fp.rho, sc)?.re;
    let c = zonal_coefficients(n, f.phi, d_max);
    let cp = zonal_coefficients(n, fp.phi, d_max);
    let mut sum = 0.0;
    for d in 0..=d_max {
        sum += p_d(n, d, sc)?.re * c.inner[d] * cp.inner[d] / c.norm_sq[d];
    }
    let tail = rr.abs() * p_d(n, d_max + 1, sc)?.re * (c.remainder() * cp.remainder()).sqrt();
    Ok(MffResult { m: rr * sum, tail_bound: tail, d_max })
}
