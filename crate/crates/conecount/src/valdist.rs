//! Values of linear maps and of homogeneous forms at cone points.
//!
//! Everything acts on standard coordinates `w = vτ` of the cone of `Q_n`.
//! A linear map is `w ↦ w g L₀ h` with `g ∈ SO⁺_{Q_n}(R)`, `L₀` the
//! projection onto the first `m` coordinates and `h ∈ GL_m(R)`. A form in
//! the homogeneous family is `w ↦ F^{(d)}_{p,q}(w g L₀ h)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::counting::{CountReport, KappaEstimate, QueryEcho};
use crate::enumeration::{enumerate_by_norm, q_max_for_norm, Enumerator, Strategy};
use crate::error::{Error, Result};
use crate::geometry::{gamma_half_ratio, norm, pi_half_pow};
use crate::group::{sample_ball, sample_rotation, sample_sphere, GroupElement};
use crate::quadform::{row_times, QuadraticSpace};
use crate::rng::{derive_seed, rng_from_seed};

/// `c_{n,m} = (n−m+1) Γ((n+3)/2) / ((n+1) π^{m/2} Γ((n−m+3)/2))`.
pub fn c_nm(n: usize, m: usize) -> Result<f64> {
    if m == 0 || m >= n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ m < n, got n = {n}, m = {m}")));
    }
    let (r, e) = gamma_half_ratio(n + 3, n - m + 3);
    Ok(r * (n - m + 1) as f64 / (n + 1) as f64 * pi_half_pow(e - m as i32))
}

/// A finite union of axis-parallel boxes in `R^m`, assumed disjoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxUnion {
    pub boxes: Vec<Vec<(f64, f64)>>,
}

impl BoxUnion {
    pub fn interval(a: f64, b: f64) -> Self {
        Self { boxes: vec![vec![(a, b)]] }
    }

    pub fn dim(&self) -> usize {
        self.boxes.first().map_or(0, |b| b.len())
    }

    /// Closed boxes.
    pub fn contains(&self, w: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.iter().zip(w).all(|(&(lo, hi), &x)| lo <= x && x <= hi))
    }

    pub fn volume(&self) -> f64 {
        self.boxes.iter().map(|b| b.iter().map(|(lo, hi)| (hi - lo).max(0.0)).product::<f64>()).sum()
    }

    /// `s·Ω`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { boxes: self.boxes.iter().map(|b| b.iter().map(|&(lo, hi)| (s * lo, s * hi)).collect()).collect() }
    }

    /// Radius of a centered ball containing the union.
    pub fn radius(&self) -> f64 {
        self.boxes
            .iter()
            .map(|b| b.iter().map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `box:a,b` for an interval, `box:a,bxc,d` for a rectangle, `|`
    /// between boxes; `interval:a,b` is a synonym for one interval. An
    /// empty list (`box:`) is the empty set in dimension one.
    pub fn parse(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("box:")
            .or_else(|| s.strip_prefix("interval:"))
            .ok_or_else(|| Error::Parse(format!("target must start with box: or interval:, got {s:?}")))?;
        if body.trim().is_empty() {
            return Ok(Self { boxes: Vec::new() });
        }
        let mut boxes = Vec::new();
        for part in body.split('|') {
            let mut b = Vec::new();
            for side in part.split('x') {
                let v: Vec<&str> = side.split(',').collect();
                if v.len() != 2 {
                    return Err(Error::Parse(format!("bad interval {side:?}")));
                }
                let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}")));
                let (lo, hi) = (num(v[0])?, num(v[1])?);
                if !(lo <= hi) {
                    return Err(Error::Parse(format!("empty interval {side:?}")));
                }
                b.push((lo, hi));
            }
            boxes.push(b);
        }
        let d = boxes[0].len();
        if boxes.iter().any(|b| b.len() != d) {
            return Err(Error::Parse("boxes of different dimensions".into()));
        }
        Ok(Self { boxes })
    }
}

/// Rows spanning `{x : x·M = 0}`, from the SVD of `M`.
fn left_kernel(mat: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = mat.shape();
    // Left kernel of M = kernel of Mᵀ; pad to square so the SVD returns a
    // full basis.
    let mut sq = DMatrix::zeros(r, r);
    sq.view_mut((0, 0), (r, c)).copy_from(mat);
    let svd = sq.svd(true, false);
    let u = svd.u.expect("requested");
    let s = svd.singular_values;
    let tol = 1e-10 * s.max().max(1.0);
    let cols: Vec<usize> = (0..r).filter(|&i| s[i] <= tol).collect();
    DMatrix::from_fn(cols.len(), r, |i, j| u[(j, cols[i])])
}

fn jn(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| if i != j { 0.0 } else if i + 1 == dim { -1.0 } else { 1.0 })
}

/// `(positive, negative)` eigenvalue counts of `Q_n` restricted to the rows
/// of `basis`.
pub fn restricted_signature(basis: &DMatrix<f64>) -> (usize, usize) {
    let g = basis * jn(basis.ncols()) * basis.transpose();
    let ev = g.symmetric_eigenvalues();
    let tol = 1e-10 * ev.amax().max(1.0);
    (ev.iter().filter(|&&x| x > tol).count(), ev.iter().filter(|&&x| x < -tol).count())
}

/// A rank-`m` linear map on standard cone coordinates.
#[derive(Clone, Debug)]
pub struct LinearMapOnCone {
    pub n: usize,
    pub m: usize,
    /// `(n+2)×m`, acting on row vectors.
    pub matrix: DMatrix<f64>,
    /// `(g, h)` with `matrix = g L₀ h`, when the kernel is indefinite.
    pub classification: Option<(GroupElement, DMatrix<f64>)>,
}

impl LinearMapOnCone {
    /// `g L₀ h`.
    pub fn from_parts(g: GroupElement, h: DMatrix<f64>) -> Result<Self> {
        let n = g.n();
        let m = h.nrows();
        if h.ncols() != m || m == 0 || m >= n {
            return Err(Error::InvalidArgument(format!("h must be m×m with 1 ≤ m < n = {n}")));
        }
        if h.determinant().abs() < 1e-12 {
            return Err(Error::InvalidArgument("h is singular".into()));
        }
        let matrix = g.m.columns(0, m) * &h;
        Ok(Self { n, m, matrix, classification: Some((g, h)) })
    }

    /// `L₀` itself.
    pub fn projection(n: usize, m: usize) -> Result<Self> {
        Self::from_parts(GroupElement::identity(n), DMatrix::identity(m, m))
    }

    /// Any rank-`m` matrix. The classification `(g, h)` is attached when
    /// `Q_n` is indefinite on the kernel; otherwise the map can still be
    /// counted but has no volume constant.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, m) = matrix.shape();
        if r < 4 || m == 0 || m + 2 >= r {
            return Err(Error::InvalidArgument(format!("need an (n+2)×m matrix with 1 ≤ m < n, got {r}×{m}")));
        }
        let n = r - 2;
        let rank = matrix.clone().svd(false, false).singular_values.iter().filter(|&&s| s > 1e-10).count();
        if rank != m {
            return Err(Error::InvalidArgument(format!("map has rank {rank}, expected {m}")));
        }
        let classification = classify(&matrix).ok();
        Ok(Self { n, m, matrix, classification })
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        row_times(w, &self.matrix)
    }

    /// Whether `Q_n` restricted to the kernel has both signs.
    pub fn kernel_indefinite(&self) -> bool {
        let (p, q) = restricted_signature(&left_kernel(&self.matrix));
        p > 0 && q > 0
    }

    fn parts(&self) -> Result<&(GroupElement, DMatrix<f64>)> {
        self.classification
            .as_ref()
            .ok_or_else(|| Error::Definiteness("Q_n is definite on the kernel of L, so V_L is not defined".into()))
    }

    pub fn det_h(&self) -> Result<f64> {
        Ok(self.parts()?.1.determinant())
    }
}

/// Write `M = g L₀ h` with `g ∈ SO⁺_{Q_n}(R)`.
///
/// A `Q_n`-orthonormal basis `b_1..b_m` of `K^⊥` followed by one of the
/// kernel `K` (spacelike vectors, then the timelike one) forms the rows of
/// an isometry `B`; `g = B⁻¹` sends `K` onto `ker L₀`, and `h` has rows
/// `b_i M`.
pub fn classify(matrix: &DMatrix<f64>) -> Result<(GroupElement, DMatrix<f64>)> {
    let (dim, m) = matrix.shape();
    let kernel = left_kernel(matrix);
    if kernel.nrows() != dim - m {
        return Err(Error::InvalidArgument("map does not have full rank".into()));
    }
    let (pos, neg) = restricted_signature(&kernel);
    if !(pos > 0 && neg == 1 && pos + neg == dim - m) {
        return Err(Error::Definiteness(format!(
            "Q_n on the kernel has signature ({pos}, {neg}); need an indefinite nondegenerate restriction"
        )));
    }
    let j = jn(dim);
    let orthonormal = |basis: &DMatrix<f64>| -> Vec<(f64, Vec<f64>)> {
        let gram = basis * &j * basis.transpose();
        let eig = gram.symmetric_eigen();
        let mut out: Vec<(f64, Vec<f64>)> = (0..basis.nrows())
            .map(|i| {
                let lam = eig.eigenvalues[i];
                let row = eig.eigenvectors.column(i).transpose() * basis / lam.abs().sqrt();
                (lam, row.iter().copied().collect())
            })
            .collect();
        out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        out
    };
    // K^⊥ = {x : x J kᵀ = 0 for k ∈ K}.
    let perp = left_kernel(&(&j * kernel.transpose()));
    let b_rows = orthonormal(&perp);
    let k_rows = orthonormal(&kernel);
    let mut rows: Vec<Vec<f64>> = b_rows.into_iter().map(|x| x.1).collect();
    rows.extend(k_rows.into_iter().map(|x| x.1));
    if rows[dim - 1][dim - 1] < 0.0 {
        rows[dim - 1].iter_mut().for_each(|x| *x = -*x);
    }
    let mut b = DMatrix::from_fn(dim, dim, |i, l| rows[i][l]);
    if b.determinant() < 0.0 {
        b.row_mut(0).neg_mut();
    }
    let g = GroupElement { m: b.clone().try_inverse().ok_or(Error::Eigen)? };
    if !g.is_valid(1e-8) {
        return Err(Error::InvalidArgument("classification produced a non-isometry".into()));
    }
    let h = b.rows(0, m) * matrix;
    Ok((g, h))
}

/// A member of the homogeneous family `F^{(d)}_{p,q}(w g L₀ h)`.
#[derive(Clone, Debug)]
pub struct HomogeneousFormOnCone {
    pub n: usize,
    pub m: usize,
    pub d: f64,
    pub p: usize,
    pub q: usize,
    pub g: GroupElement,
    pub h: DMatrix<f64>,
    matrix: DMatrix<f64>,
}

/// `Σ_{j≤p} |w_j|^d − Σ_{j>p} |w_j|^d`.
pub fn f_pq(w: &[f64], p: usize, d: f64) -> f64 {
    w.iter().enumerate().map(|(j, x)| if j < p { x.abs().powf(d) } else { -x.abs().powf(d) }).sum()
}

impl HomogeneousFormOnCone {
    /// Requires `p ≥ q ≥ 1` and `1 < d ≤ m`; the volume constant further
    /// needs `d < m`.
    pub fn new(d: f64, p: usize, q: usize, g: GroupElement, h: DMatrix<f64>) -> Result<Self> {
        let m = p + q;
        let n = g.n();
        if !(p >= q && q >= 1) {
            return Err(Error::InvalidArgument(format!("need p ≥ q ≥ 1, got ({p}, {q})")));
        }
        if m >= n {
            return Err(Error::InvalidArgument(format!("need m < n, got m = {m}, n = {n}")));
        }
        if !(d > 1.0 && d <= m as f64) {
            return Err(Error::InvalidArgument(format!("need 1 < d ≤ m, got d = {d}")));
        }
        if h.shape() != (m, m) || h.determinant().abs() < 1e-12 {
            return Err(Error::InvalidArgument("h must be an invertible m×m matrix".into()));
        }
        let matrix = g.m.columns(0, m) * &h;
        Ok(Self { n, m, d, p, q, g, h, matrix })
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        f_pq(&row_times(w, &self.matrix), self.p, self.d)
    }
}

/// A Monte Carlo or closed-form constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeConstant {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub method: String,
}

/// Default Monte Carlo sample count.
pub const MC_SAMPLES: u64 = 1_000_000;
const MC_BLOCK: u64 = 1 << 15;

/// Mean and standard error of `f` over `samples` draws. Blocks of draws
/// get their own derived seeds and are combined in block order.
pub fn mc_mean<F>(samples: u64, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let blocks = samples.div_ceil(MC_BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(seed, &[b]));
            let k = MC_BLOCK.min(samples - b * MC_BLOCK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..k {
                let x = f(&mut rng);
                s += x;
                s2 += x * x;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = samples as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    (mean, (var / nf).sqrt())
}

/// `V_L` for `g = id`: `2^{−(n−m)/2}/(n−m)`.
pub fn v_l0(n: usize, m: usize) -> f64 {
    let k = (n - m) as f64;
    2f64.powf(-k / 2.0) / k
}

/// `(0, ω, 1)` in `R^{n+2}` with `m` leading zeros.
fn kernel_point(m: usize, omega: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v.extend_from_slice(omega);
    v.push(1.0);
    v
}

/// `V_L = E_ω[‖(0, ω, 1) g⁻¹‖^{−(n−m)}]/(n−m)`, the `r`-integral done in
/// closed form. Exact at `g = id`.
pub fn v_l(l: &LinearMapOnCone, samples: u64, seed: u64) -> Result<VolumeConstant> {
    let (g, _) = l.parts()?;
    let (n, m) = (l.n, l.m);
    if g.m == DMatrix::identity(n + 2, n + 2) {
        return Ok(VolumeConstant { value: v_l0(n, m), std_error: 0.0, samples: 0, method: "closed-form".into() });
    }
    let gi = g.inverse();
    let k = (n - m) as i32;
    let (mean, se) = mc_mean(samples, seed, |rng| {
        let om = sample_sphere(n - m, rng);
        norm(&gi.act(&kernel_point(m, &om))).powi(-k)
    });
    Ok(VolumeConstant { value: mean / k as f64, std_error: se / k as f64, samples, method: "mc-conditional".into() })
}

/// Plain hit-or-miss estimate of `V_L`: `r` uniform on `(0, ‖g‖_op/√2)`
/// weighted by `r^{n−m−1}`, kept when `‖r(0, ω, 1) g⁻¹‖ ≤ 1`.
pub fn v_l_plain(l: &LinearMapOnCone, samples: u64, seed: u64) -> Result<VolumeConstant> {
    let (g, _) = l.parts()?;
    let (n, m) = (l.n, l.m);
    let gi = g.inverse();
    let rb = g.op_norm() / std::f64::consts::SQRT_2;
    let k = (n - m) as i32;
    let (mean, se) = mc_mean(samples, seed, |rng| {
        let om = sample_sphere(n - m, rng);
        let r = rng.random::<f64>() * rb;
        let w: Vec<f64> = gi.act(&kernel_point(m, &om)).iter().map(|x| x * r).collect();
        if norm(&w) <= 1.0 {
            rb * r.powi(k - 1)
        } else {
            0.0
        }
    });
    Ok(VolumeConstant { value: mean, std_error: se, samples, method: "mc-plain".into() })
}

/// `m({v : ‖v‖ ≤ T, vL ∈ Ω}) ≈ c_{n,m} vol(Ω) T^{n−m} V_L / |det h|`.
pub fn predict_linear_measure(l: &LinearMapOnCone, omega: &BoxUnion, t: f64, vl: f64) -> Result<f64> {
    let det = l.det_h()?;
    Ok(c_nm(l.n, l.m)? * omega.volume() * t.powi((l.n - l.m) as i32) * vl / det.abs())
}

/// Total mass of the cone measure on the unit `L^d` sphere of `R^p`,
/// `p·vol(B_d^p)`.
pub fn ld_sphere_mass(p: usize, d: f64) -> f64 {
    let pf = p as f64;
    (pf.ln() + pf * (2f64.ln() + ln_gamma(1.0 + 1.0 / d)) - ln_gamma(1.0 + pf / d)).exp()
}

/// A point of the unit `L^d` sphere of `R^p` drawn from the normalized
/// cone measure: `X/‖X‖_d` with `|X_i|^d ~ Gamma(1/d)` and random signs.
pub fn sample_ld_sphere<R: Rng + ?Sized>(p: usize, d: f64, rng: &mut R) -> Vec<f64> {
    let gam = Gamma::new(1.0 / d, 1.0).expect("valid shape");
    let x: Vec<f64> = (0..p)
        .map(|_| {
            let g: f64 = gam.sample(rng);
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            s * g.powf(1.0 / d)
        })
        .collect();
    let nd = x.iter().map(|v| v.abs().powf(d)).sum::<f64>().powf(1.0 / d);
    x.into_iter().map(|v| v / nd).collect()
}

/// `½ B((m−d)/2, (n−m+1)/2) = ∫₀¹ (1−t²)^{(n−m−1)/2} t^{m−d−1} dt`.
fn t_integral(n: usize, m: usize, d: f64) -> f64 {
    0.5 * ln_beta((m as f64 - d) / 2.0, (n - m + 1) as f64 / 2.0).exp()
}

/// `V_F` with the measure `‖ω̃h⁻¹‖^{d−m}(1−t²)^{(n−m−1)/2} t^{m−d−1}
/// r^{n−d−1} dt dr dσ_{n−m}(ω) dσ_d^{p,q}(ω̃)` on the zero set.
///
/// The `r`-integral is `r_max^{n−d}/(n−d)`. At `g = id`, `r_max = 1/√2`
/// and the `t`-integral is a beta function; for `d = 2, h = id` the whole
/// constant is closed form. Otherwise `t` is drawn from its beta density
/// and the rest is averaged.
pub fn v_f(f: &HomogeneousFormOnCone, samples: u64, seed: u64) -> Result<VolumeConstant> {
    let (n, m, d, p, q) = (f.n, f.m, f.d, f.p, f.q);
    if !(d < m as f64) {
        return Err(Error::InvalidArgument(format!("V_F needs d < m, got d = {d}, m = {m}")));
    }
    let mass = ld_sphere_mass(p, d) * ld_sphere_mass(q, d);
    let hinv = f.h.clone().try_inverse().ok_or(Error::Eigen)?;
    let nd = n as f64 - d;
    let ti = t_integral(n, m, d);
    let at_id = f.g.m == DMatrix::identity(n + 2, n + 2);
    let radial = |rmax: f64| rmax.powf(nd) / nd;
    if at_id && d == 2.0 && f.h == DMatrix::identity(m, m) {
        // ‖ω̃‖ = √2 on the product of unit spheres.
        let value = mass * 2f64.powf((d - m as f64) / 2.0) * ti * radial(std::f64::consts::FRAC_1_SQRT_2);
        return Ok(VolumeConstant { value, std_error: 0.0, samples: 0, method: "closed-form".into() });
    }
    let omega_tilde = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut w = sample_ld_sphere(p, d, rng);
        w.extend(sample_ld_sphere(q, d, rng));
        row_times(&w, &hinv)
    };
    if at_id {
        let (mean, se) = mc_mean(samples, seed, |rng| norm(&omega_tilde(rng)).powf(d - m as f64));
        let c = mass * ti * radial(std::f64::consts::FRAC_1_SQRT_2);
        return Ok(VolumeConstant { value: c * mean, std_error: c * se, samples, method: "mc-angular".into() });
    }
    let gi = f.g.inverse();
    let beta = Beta::new((m as f64 - d) / 2.0, (n - m + 1) as f64 / 2.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (mean, se) = mc_mean(samples, seed, |rng| {
        let wt = omega_tilde(rng);
        let wn = norm(&wt);
        let t = beta.sample(rng).sqrt();
        let om = sample_sphere(n - m, rng);
        let mut v: Vec<f64> = wt.iter().map(|x| t * x / wn).collect();
        v.extend(om.iter().map(|x| x * (1.0 - t * t).sqrt()));
        v.push(1.0);
        let rmax = 1.0 / norm(&gi.act(&v));
        wn.powf(d - m as f64) * radial(rmax)
    });
    let c = mass * ti;
    Ok(VolumeConstant { value: c * mean, std_error: c * se, samples, method: "mc-full".into() })
}

/// `m({v : ‖v‖ ≤ T, F(v) ∈ I}) ≈ c_{n,m}|I|T^{n−d} V_F/(|det h| d)`.
pub fn predict_homog_measure(f: &HomogeneousFormOnCone, interval: &BoxUnion, t: f64, vf: f64) -> Result<f64> {
    Ok(c_nm(f.n, f.m)? * interval.volume() * t.powf(f.n as f64 - f.d) * vf / (f.h.determinant().abs() * f.d))
}

/// `ν = min{d/4, (m−d)/2}`, reported only.
pub fn homog_error_exponent(d: f64, m: usize) -> f64 {
    (d / 4.0).min((m as f64 - d) / 2.0)
}

/// Visit standard coordinates `vτ` of every primitive cone point with
/// `‖v‖_Q ≤ t`, together with `‖v‖_Q`.
pub fn for_each_cone_point<F: FnMut(&[f64], f64)>(space: &QuadraticSpace, t: f64, mut f: F) -> Result<()> {
    match space.ellipsoid() {
        Some(e) => {
            let k = e.n() + 1;
            let tau = space.tau();
            let en = Enumerator::new(e, Strategy::Auto)?.unsorted();
            let mut v = vec![0.0; k + 1];
            en.for_each_layer(1, q_max_for_norm(t), |q, pts| {
                let nv = std::f64::consts::SQRT_2 * q as f64;
                for p in pts.chunks_exact(k) {
                    for (dst, &src) in v.iter_mut().zip(p) {
                        *dst = src as f64;
                    }
                    v[k] = q as f64;
                    f(&row_times(&v, tau), nv);
                }
            })
        }
        None => {
            for cp in enumerate_by_norm(space, t)? {
                let w = space.to_standard(&cp.to_f64())?;
                f(&w, cp.qnorm);
            }
            Ok(())
        }
    }
}

/// Counts of `{v : ‖v‖_Q ≤ T_j, vτ·M_i ∈ Ω}` for several maps and heights
/// in one pass.
pub fn count_linear_batch(space: &QuadraticSpace, maps: &[&LinearMapOnCone], omega: &BoxUnion, ts: &[f64]) -> Result<Vec<Vec<u64>>> {
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    for l in maps {
        if l.n != space.n() {
            return Err(Error::Dimension { expected: space.n(), got: l.n });
        }
        if omega.dim() != l.m && !omega.boxes.is_empty() {
            return Err(Error::Dimension { expected: l.m, got: omega.dim() });
        }
    }
    let mut out = vec![vec![0u64; ts.len()]; maps.len()];
    for_each_cone_point(space, t_max, |w, nv| {
        for (i, l) in maps.iter().enumerate() {
            if omega.contains(&l.apply(w)) {
                for (j, &t) in ts.iter().enumerate() {
                    if nv <= t {
                        out[i][j] += 1;
                    }
                }
            }
        }
    })?;
    Ok(out)
}

/// `#{v ∈ 𝓛_Q : ‖v‖_Q ≤ T, vτ g L₀ h ∈ Ω}` with main term
/// `ω̂ c_{n,m} vol(Ω) T^{n−m} V_L/|det h|`.
pub fn count_linear(
    space: &QuadraticSpace,
    l: &LinearMapOnCone,
    omega: &BoxUnion,
    t: f64,
    kappa: &KappaEstimate,
    vl: &VolumeConstant,
) -> Result<CountReport> {
    let count = count_linear_batch(space, &[l], omega, &[t])?[0][0];
    let main = kappa.omega_hat * predict_linear_measure(l, omega, t, vl.value)?;
    let query = QueryEcho {
        kind: "linear".into(),
        alpha: Vec::new(),
        r: None,
        psi: None,
        t,
        form: space.fingerprint(),
        seed: None,
    };
    Ok(CountReport::new(query, count, main, kappa.source.clone()))
}

/// Counts of `{v : ‖v‖_Q ≤ T_j, F_i(vτ) ∈ I}`.
pub fn count_homog_batch(space: &QuadraticSpace, forms: &[&HomogeneousFormOnCone], interval: &BoxUnion, ts: &[f64]) -> Result<Vec<Vec<u64>>> {
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    let mut out = vec![vec![0u64; ts.len()]; forms.len()];
    for_each_cone_point(space, t_max, |w, nv| {
        for (i, f) in forms.iter().enumerate() {
            if interval.contains(&[f.eval(w)]) {
                for (j, &t) in ts.iter().enumerate() {
                    if nv <= t {
                        out[i][j] += 1;
                    }
                }
            }
        }
    })?;
    Ok(out)
}

/// `#{v ∈ 𝓛_Q : ‖v‖_Q ≤ T, F(vτ) ∈ I}` with main term
/// `ω̂ c_{n,m}|I|T^{n−d}V_F/(|det h| d)`.
pub fn count_homog(
    space: &QuadraticSpace,
    f: &HomogeneousFormOnCone,
    interval: &BoxUnion,
    t: f64,
    kappa: &KappaEstimate,
    vf: &VolumeConstant,
) -> Result<CountReport> {
    let count = count_homog_batch(space, &[f], interval, &[t])?[0][0];
    let main = kappa.omega_hat * predict_homog_measure(f, interval, t, vf.value)?;
    let query = QueryEcho {
        kind: "homog".into(),
        alpha: Vec::new(),
        r: None,
        psi: None,
        t,
        form: space.fingerprint(),
        seed: None,
    };
    Ok(CountReport::new(query, count, main, kappa.source.clone()))
}

/// A random `g`: six Iwasawa factors `u_x a_y k` repeated twice, with
/// `‖x‖ < 1/2` and `|log y| < 0.4`.
pub fn random_g<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupElement {
    let mut g = GroupElement::identity(n);
    for i in 0..6 {
        let f = match i % 3 {
            0 => GroupElement::u(&sample_ball(n, 0.5, rng)),
            1 => GroupElement::a(n, rng.random_range(-0.4f64..0.4).exp()).expect("positive"),
            _ => GroupElement::k(&sample_rotation(n + 1, rng)).expect("rotation"),
        };
        g = g.mul(&f);
    }
    g
}

/// A random `h` with entries uniform on `(−1, 1)` and `|det h| ≥ 0.1`.
pub fn random_h<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let h = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0f64..1.0));
        if h.determinant().abs() >= 0.1 {
            return h;
        }
    }
}

/// Direct Monte Carlo of `m({v : ‖v‖ ≤ T, pred(v)})` under
/// `r^{n−1} dr dσ_n` with `v = r(α, 1)`: `r` has density `∝ r^{n−1}` on
/// `[0, T/√2]` and the total mass is `(T/√2)ⁿ/n`.
pub fn mc_cone_measure<P>(n: usize, t: f64, samples: u64, seed: u64, pred: P) -> (f64, f64)
where
    P: Fn(&[f64]) -> bool + Sync,
{
    let rmax = t / std::f64::consts::SQRT_2;
    let total = rmax.powi(n as i32) / n as f64;
    let (mean, se) = mc_mean(samples, seed, |rng| {
        let r = rmax * rng.random::<f64>().powf(1.0 / n as f64);
        let mut v: Vec<f64> = sample_sphere(n, rng).iter().map(|a| a * r).collect();
        v.push(r);
        pred(&v) as u8 as f64
    });
    (total * mean, total * se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::estimate_kappa;
    use crate::quadform::EllipsoidForm;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use statrs::function::gamma::gamma;
    use crate::geometry::dot;

    fn on_cone(w: &[f64]) -> f64 {
        let k = w.len();
        dot(&w[..k - 1], &w[..k - 1]) - w[k - 1] * w[k - 1]
    }

    #[test]
    fn c_nm_values() {
        assert_relative_eq!(c_nm(3, 1).unwrap(), 2.0 / std::f64::consts::PI, max_relative = 1e-14);
        // 2Γ(5/2)/(3√π Γ(2)) with Γ(5/2) = (3/4)√π
        assert_relative_eq!(c_nm(2, 1).unwrap(), 0.5, max_relative = 1e-14);
        for n in 2..12 {
            for m in 1..n {
                let direct = (n - m + 1) as f64 * gamma((n as f64 + 3.0) / 2.0)
                    / ((n + 1) as f64 * std::f64::consts::PI.powf(m as f64 / 2.0) * gamma((n - m) as f64 / 2.0 + 1.5));
                assert_relative_eq!(c_nm(n, m).unwrap(), direct, max_relative = 1e-12);
            }
        }
        assert!(c_nm(3, 3).is_err());
    }

    #[test]
    fn closed_form_volume_constants() {
        assert_eq!(v_l0(3, 1), 0.25);
        assert_relative_eq!(v_l0(3, 2), std::f64::consts::FRAC_1_SQRT_2);
        let l = LinearMapOnCone::projection(3, 1).unwrap();
        assert_eq!(v_l(&l, 10, 0).unwrap().value, 0.25);
        let plain = v_l_plain(&l, MC_SAMPLES, 3).unwrap();
        assert!((plain.value / 0.25 - 1.0).abs() <= 0.005, "{plain:?}");
    }

    #[test]
    fn general_g_estimators_agree() {
        let mut rng = rng_from_seed(17);
        for _ in 0..3 {
            let g = random_g(3, &mut rng);
            let l = LinearMapOnCone::from_parts(g, random_h(1, &mut rng)).unwrap();
            let a = v_l(&l, 200_000, 1).unwrap();
            let b = v_l_plain(&l, 400_000, 2).unwrap();
            let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!((a.value - b.value).abs() <= 4.0 * se, "{a:?} {b:?}");
        }
    }

    #[test]
    fn classification_recovers_a_factorization() {
        let mut rng = rng_from_seed(23);
        for (n, m) in [(3, 1), (3, 2), (4, 2), (5, 3)] {
            let g = random_g(n, &mut rng);
            let h = random_h(m, &mut rng);
            let l = LinearMapOnCone::from_parts(g.clone(), h.clone()).unwrap();
            let (g2, h2) = classify(&l.matrix).unwrap();
            assert!(g2.is_valid(1e-8));
            let back = g2.m.columns(0, m) * &h2;
            assert!((back - &l.matrix).abs().max() < 1e-8);
            assert_relative_eq!(h2.determinant().abs(), h.determinant().abs(), max_relative = 1e-6);
            // V_L/|det h| does not depend on the factorization chosen.
            let l2 = LinearMapOnCone::from_matrix(l.matrix.clone()).unwrap();
            let a = v_l(&l, 200_000, 5).unwrap().value / h.determinant().abs();
            let b = v_l(&l2, 200_000, 6).unwrap().value / l2.det_h().unwrap().abs();
            assert!((a / b - 1.0).abs() < 0.02, "{a} {b}");
        }
    }

    #[test]
    fn definite_kernel_rejected() {
        // vL = (v_{n−m+3}, …, v_{n+2}): the kernel is spacelike.
        let (n, m) = (3, 1);
        let mut mat = DMatrix::zeros(n + 2, m);
        mat[(n + 1, 0)] = 1.0;
        let l = LinearMapOnCone::from_matrix(mat).unwrap();
        assert!(!l.kernel_indefinite());
        assert!(matches!(v_l(&l, 10, 0), Err(Error::Definiteness(_))));
        assert!(LinearMapOnCone::projection(3, 1).unwrap().kernel_indefinite());
    }

    #[test]
    fn definite_kernel_counts_stay_bounded() {
        let (n, m) = (3, 1);
        let mut mat = DMatrix::zeros(n + 2, m);
        mat[(n + 1, 0)] = 1.0;
        let l = LinearMapOnCone::from_matrix(mat).unwrap();
        let space = QuadraticSpace::standard(n);
        let c = count_linear_batch(&space, &[&l], &BoxUnion::interval(-2.0, 2.0), &[50.0, 200.0]).unwrap();
        assert_eq!(c[0][0], c[0][1]);
        assert!(c[0][0] > 0);
    }

    #[test]
    fn linear_count_examples() {
        let space = QuadraticSpace::standard(3);
        let l = LinearMapOnCone::projection(3, 1).unwrap();
        let big = BoxUnion::interval(-1e9, 1e9);
        let all = count_linear_batch(&space, &[&l], &big, &[30.0]).unwrap()[0][0];
        let mut total = 0;
        for_each_cone_point(&space, 30.0, |_, _| total += 1).unwrap();
        assert_eq!(all, total);
        let empty = BoxUnion { boxes: Vec::new() };
        assert_eq!(count_linear_batch(&space, &[&l], &empty, &[30.0]).unwrap()[0][0], 0);

        // Direct loop over (x, q) with ‖(x, q)‖ ≤ 50 and |x_1| ≤ 5.
        let t = 50.0f64;
        let mut want = 0;
        brute_cone_n3(t, |x| {
            if x[0].abs() <= 5 {
                want += 1;
            }
        });
        let got = count_linear_batch(&space, &[&l], &BoxUnion::interval(-5.0, 5.0), &[t]).unwrap()[0][0];
        assert_eq!(got, want);
    }

    /// Primitive `(x, q) ∈ Z⁴ × Z` with `|x| = q` and `√2 q ≤ t`, by a
    /// plain loop over three coordinates.
    fn brute_cone_n3<F: FnMut(&[i64; 4])>(t: f64, mut f: F) {
        use num_integer::Integer;
        let qmax = (t / 2f64.sqrt()).floor() as i64;
        for q in 1..=qmax {
            for a in -q..=q {
                for b in -q..=q {
                    for c in -q..=q {
                        let rem = q * q - a * a - b * b - c * c;
                        if rem < 0 {
                            continue;
                        }
                        let d = (rem as f64).sqrt().round() as i64;
                        if d * d != rem {
                            continue;
                        }
                        for dd in if d == 0 { vec![0] } else { vec![d, -d] } {
                            if a.gcd(&b).gcd(&c).gcd(&dd).gcd(&q) == 1 {
                                f(&[a, b, c, dd]);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn homog_count_examples() {
        let space = QuadraticSpace::standard(3);
        let f = HomogeneousFormOnCone::new(2.0, 1, 1, GroupElement::identity(3), DMatrix::identity(2, 2)).unwrap();
        let t = 40.0f64;
        let (mut want, mut total) = (0, 0);
        brute_cone_n3(t, |x| {
            total += 1;
            if (x[0] * x[0] - x[1] * x[1]).abs() <= 3 {
                want += 1;
            }
        });
        let got = count_homog_batch(&space, &[&f], &BoxUnion::interval(-3.0, 3.0), &[t]).unwrap()[0][0];
        assert_eq!(got, want);
        let wide = count_homog_batch(&space, &[&f], &BoxUnion::interval(-1e6, 1e6), &[t]).unwrap()[0][0];
        assert_eq!(wide, total);
        let far = count_homog_batch(&space, &[&f], &BoxUnion::interval(1e6, 1e6 + 1.0), &[t]).unwrap()[0][0];
        assert_eq!(far, 0);
    }

    #[test]
    fn linear_prediction_arithmetic() {
        let l = LinearMapOnCone::projection(3, 1).unwrap();
        let om = BoxUnion::interval(-5.0, 5.0);
        let p = predict_linear_measure(&l, &om, 50.0, 0.25).unwrap();
        assert_relative_eq!(p, 2.0 / std::f64::consts::PI * 10.0 * 2500.0 * 0.25, max_relative = 1e-14);
        let p2 = predict_linear_measure(&l, &om, 100.0, 0.25).unwrap();
        assert_relative_eq!(p2 / p, 4.0, max_relative = 1e-14);
        assert_eq!(predict_linear_measure(&l, &BoxUnion::interval(1.0, 1.0), 50.0, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn linear_prediction_matches_direct_measure() {
        let l = LinearMapOnCone::projection(3, 1).unwrap();
        let om = BoxUnion::interval(-2.0, 2.0);
        let t = 100.0;
        let pred = predict_linear_measure(&l, &om, t, 0.25).unwrap();
        let (mc, se) = mc_cone_measure(3, t, MC_SAMPLES, 8, |v| om.contains(&v[..1]));
        assert!((mc - pred).abs() <= 3.0 * se, "mc {mc} ± {se}, predicted {pred}");
    }

    #[test]
    fn ld_sphere_sampler() {
        // p = 1: {±1} with counting measure.
        assert_relative_eq!(ld_sphere_mass(1, 3.0), 2.0, max_relative = 1e-14);
        // d = 2: the Euclidean surface area.
        assert_relative_eq!(ld_sphere_mass(3, 2.0), 4.0 * std::f64::consts::PI, max_relative = 1e-13);
        let mut rng = rng_from_seed(4);
        for _ in 0..100 {
            let w = sample_ld_sphere(3, 1.5, &mut rng);
            let nd: f64 = w.iter().map(|x| x.abs().powf(1.5)).sum();
            assert!((nd - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneity_of_f() {
        let mut rng = rng_from_seed(6);
        for _ in 0..100 {
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let d = rng.random_range(1.1..3.9);
            let lam = rng.random_range(0.1..5.0);
            let scaled: Vec<f64> = w.iter().map(|x| x * lam).collect();
            let a = f_pq(&scaled, 2, d);
            let b = lam.powf(d) * f_pq(&w, 2, d);
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn v_f_routes_agree_at_identity() {
        // d = 2, h = id: closed form against the angular and full averages.
        let g = GroupElement::identity(5);
        let f = HomogeneousFormOnCone::new(2.0, 2, 1, g, DMatrix::identity(3, 3)).unwrap();
        let closed = v_f(&f, 0, 0).unwrap();
        assert_eq!(closed.method, "closed-form");
        let full = {
            // Same form, but force the general path with a tiny rotation in M.
            let mut r = DMatrix::<f64>::identity(5, 5);
            r[(3, 3)] = -1.0;
            r[(4, 4)] = -1.0;
            let g2 = GroupElement::m_elem(&r).unwrap();
            let f2 = HomogeneousFormOnCone::new(2.0, 2, 1, g2, DMatrix::identity(3, 3)).unwrap();
            v_f(&f2, 400_000, 9).unwrap()
        };
        assert!((full.value / closed.value - 1.0).abs() <= 0.005, "{closed:?} {full:?}");
        let mut h = DMatrix::<f64>::identity(3, 3);
        h[(0, 0)] = 1.0 + 1e-13;
        let ang = v_f(&HomogeneousFormOnCone::new(2.0, 2, 1, GroupElement::identity(5), h).unwrap(), 200_000, 10).unwrap();
        assert_eq!(ang.method, "mc-angular");
        assert!((ang.value / closed.value - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn homog_prediction_matches_direct_measure() {
        let mut rng = rng_from_seed(12);
        for (n, p, q, d, t) in [(5usize, 2usize, 1usize, 2.0f64, 400.0), (5, 2, 1, 1.5, 400.0), (6, 2, 2, 2.5, 60.0)] {
            let m = p + q;
            let h = random_h(m, &mut rng);
            let f = HomogeneousFormOnCone::new(d, p, q, GroupElement::identity(n), h).unwrap();
            let vf = v_f(&f, 400_000, 13).unwrap();
            let iv = BoxUnion::interval(-1.0, 2.0);
            let pred = predict_homog_measure(&f, &iv, t, vf.value).unwrap();
            let (mc, se) = mc_cone_measure(n, t, 2_000_000, 14, |v| iv.contains(&[f.eval(v)]));
            let rel = (mc - pred).abs() / pred;
            assert!(rel <= 0.05 && (mc - pred).abs() <= 3.0 * se + 0.03 * pred, "n={n} d={d}: mc {mc} ± {se}, predicted {pred}");
        }
    }

    #[test]
    fn box_parsing() {
        let b = BoxUnion::parse("box:-2,2").unwrap();
        assert_eq!(b.volume(), 4.0);
        assert!(b.contains(&[2.0]) && !b.contains(&[2.1]));
        let b = BoxUnion::parse("box:0,1x0,2|5,6x0,1").unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.volume(), 3.0);
        assert_eq!(BoxUnion::parse("interval:-3,3").unwrap().volume(), 6.0);
        assert!(BoxUnion::parse("box:1,0").is_err());
        assert!(BoxUnion::parse("ball:1").is_err());
        assert_eq!(BoxUnion::parse("box:").unwrap().volume(), 0.0);
    }

    #[test]
    fn value_distribution_near_prediction() {
        let space = QuadraticSpace::standard(3);
        let k = estimate_kappa(&EllipsoidForm::standard(3), 100.0).unwrap();
        let mut rng = rng_from_seed(31);
        let l = LinearMapOnCone::from_parts(random_g(3, &mut rng), random_h(1, &mut rng)).unwrap();
        let vl = v_l(&l, 200_000, 0).unwrap();
        let r = count_linear(&space, &l, &BoxUnion::interval(-2.0, 2.0), 100.0, &k, &vl).unwrap();
        assert!(r.relative_error < 0.15, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn linear_prediction_scales(t in 2.0f64..1e4, s in 1.0f64..10.0) {
            let l = LinearMapOnCone::projection(4, 1).unwrap();
            let om = BoxUnion::interval(-1.0, 1.0);
            let a = predict_linear_measure(&l, &om, t, 0.3).unwrap();
            let b = predict_linear_measure(&l, &om, s * t, 0.3).unwrap();
            prop_assert!((b / a - s.powi(3)).abs() <= 1e-9 * s.powi(3));
        }

        #[test]
        fn homog_prediction_scales(t in 2.0f64..1e4, s in 1.0f64..10.0, d in 1.1f64..2.9) {
            let f = HomogeneousFormOnCone::new(d, 2, 1, GroupElement::identity(5), DMatrix::identity(3, 3)).unwrap();
            let iv = BoxUnion::interval(0.0, 1.0);
            let a = predict_homog_measure(&f, &iv, t, 0.3).unwrap();
            let b = predict_homog_measure(&f, &iv, s * t, 0.3).unwrap();
            prop_assert!((b / a - s.powf(5.0 - d)).abs() <= 1e-9 * s.powf(5.0 - d));
        }

        #[test]
        fn random_g_is_an_isometry(seed in 0u64..1000) {
            let g = random_g(3, &mut rng_from_seed(seed));
            prop_assert!(g.is_valid(1e-9));
            let w = g.act(&crate::geometry::e0(3));
            prop_assert!(on_cone(&w).abs() < 1e-9 * dot(&w, &w));
        }
    }
}
