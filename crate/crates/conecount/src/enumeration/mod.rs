//! Enumeration of primitive integer points on the positive light cone.
//!
//! For ellipsoid forms `Q(x, y) = 𝒬(x) − y²` the cone points are the
//! primitive `(p, q)` with `𝒬(p) = q²`, `q > 0`, and they are produced layer
//! by layer in `q`. Each layer is solved exactly, either by Fincke–Pohst on
//! a scaled integer decomposition of `𝒬` or, for the standard form, by
//! splitting the last two coordinates as a sum of two squares. Layers come
//! out sorted lexicographically in `p`.

pub mod brute;
pub mod fincke_pohst;
pub mod squares;

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadform::{EllipsoidForm, QuadraticSpace};
use fincke_pohst::{Decomposition, SearchInt};
use squares::{SquaresCtx, Spf};

/// A primitive integer point on the positive light cone.
#[derive(Clone, Debug, PartialEq)]
pub struct ConePoint {
    /// Coordinates `(v_1, …, v_{n+2})`.
    pub v: Vec<BigInt>,
    /// `v_{n+2}`; the denominator of `p/q` for ellipsoid forms.
    pub q: BigInt,
    /// `‖v‖_Q`.
    pub qnorm: f64,
}

impl ConePoint {
    /// The cone point `(p, q)` of an ellipsoid form, with `‖(p, q)‖_Q = √2·q`.
    pub fn from_layer(p: &[BigInt], q: &BigInt) -> Self {
        let mut v = p.to_vec();
        v.push(q.clone());
        let qnorm = std::f64::consts::SQRT_2 * q.to_f64().unwrap_or(f64::INFINITY);
        Self { v, q: q.clone(), qnorm }
    }

    pub fn p(&self) -> &[BigInt] {
        &self.v[..self.v.len() - 1]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Layer solver choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Sum-of-squares fast path for the standard form, Fincke–Pohst otherwise.
    #[default]
    Auto,
    FinckePohst,
    /// Only valid for the standard form.
    SumOfSquares,
}

/// Largest `q` the sum-of-squares path handles (`q²` must fit in `u64`
/// with room for sums).
const SQUARES_Q_MAX: u64 = 1 << 30;

/// Layer solver for one ellipsoid form.
#[derive(Clone, Debug)]
pub struct Enumerator {
    form: EllipsoidForm,
    strategy: Strategy,
    decomposition: Decomposition,
    sorted: bool,
}

impl Enumerator {
    pub fn new(form: &EllipsoidForm, strategy: Strategy) -> Result<Self> {
        if strategy == Strategy::SumOfSquares && !form.is_identity() {
            return Err(Error::InvalidArgument("the sum-of-squares path needs the standard form".into()));
        }
        Ok(Self { form: form.clone(), strategy, decomposition: Decomposition::new(form), sorted: true })
    }

    /// Skip the per-layer sort when only counts matter. The unsorted order
    /// is still deterministic.
    pub fn unsorted(mut self) -> Self {
        self.sorted = false;
        self
    }

    pub fn form(&self) -> &EllipsoidForm {
        &self.form
    }

    fn uses_squares(&self, q_max: u64) -> bool {
        match self.strategy {
            Strategy::SumOfSquares => true,
            Strategy::Auto => self.form.is_identity() && q_max <= SQUARES_Q_MAX,
            Strategy::FinckePohst => false,
        }
    }

    /// Whether layers up to `q_max` can be produced as `i64` coordinates.
    pub fn supports_i64(&self, q_max: u64) -> bool {
        if self.uses_squares(q_max) {
            return q_max <= SQUARES_Q_MAX;
        }
        self.decomposition.fits_i128(q_max)
            && brute::box_bounds(&self.form, q_max).iter().all(|&b| b < (1i64 << 62))
    }

    fn spf_for(&self, q_max: u64) -> Option<Arc<Spf>> {
        self.uses_squares(q_max)
            .then(|| Arc::new(Spf::new(squares::sieve_limit(self.form.n() + 1, q_max))))
    }

    /// Primitive solutions of one layer, appended to `out` as flat
    /// `(n+1)`-tuples.
    fn layer_into(&self, q: u64, spf: Option<&Spf>, sq: &mut Option<SquaresCtx<'_>>, out: &mut Vec<i64>) {
        let k = self.form.n() + 1;
        let start = out.len();
        match (spf, sq.as_mut()) {
            (Some(_), Some(ctx)) => ctx.layer(k, q, out),
            _ => {
                let qb = BigInt::from(q);
                self.decomposition.solve::<i128>(&qb, |x| {
                    let g = x.iter().fold(q as i128, |g, c| g.gcd(c));
                    if g == 1 {
                        out.extend(x.iter().map(|&c| c as i64));
                    }
                });
            }
        }
        if self.sorted {
            sort_tuples(&mut out[start..], k);
        }
    }

    /// Exact layer at any height, with arbitrary-precision coordinates.
    pub fn layer(&self, q: &BigInt) -> Vec<Vec<BigInt>> {
        if q.is_zero() || q.is_negative() {
            return Vec::new();
        }
        if let Some(qs) = q.to_u64() {
            if self.supports_i64(qs) {
                let spf = self.spf_for(qs);
                let mut sq = spf.as_deref().map(SquaresCtx::new);
                let mut flat = Vec::new();
                self.layer_into(qs, spf.as_deref(), &mut sq, &mut flat);
                let k = self.form.n() + 1;
                return flat.chunks(k).map(|c| c.iter().map(|&x| BigInt::from(x)).collect()).collect();
            }
        }
        let mut out: Vec<Vec<BigInt>> = Vec::new();
        self.decomposition.solve::<BigInt>(q, |x| {
            let g = x.iter().fold(q.clone(), |g, c| g.gcd(c));
            if g.is_one() {
                out.push(x.iter().map(SearchInt::to_big).collect());
            }
        });
        out.sort();
        out
    }

    /// Split `[lo, hi]` into contiguous ranges of similar expected work.
    fn chunks(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        let n = self.form.n() as i32;
        let weight = |q: u64| (q as f64).powi(n - 1) + 16.0;
        let total: f64 = if hi - lo < 1_000_000 {
            (lo..=hi).map(weight).sum()
        } else {
            (hi - lo + 1) as f64 * weight(hi)
        };
        let target = (total / 256.0).clamp(64.0, 200_000.0);
        let mut out = Vec::new();
        let mut start = lo;
        let mut acc = 0.0;
        for q in lo..=hi {
            acc += weight(q);
            if acc >= target || q == hi {
                out.push((start, q));
                start = q + 1;
                acc = 0.0;
            }
        }
        out
    }

    /// Visit every layer `q ∈ [lo, hi]` in increasing order with its flat
    /// list of primitive `p`. Chunks of layers are solved in parallel on the
    /// current rayon pool and handed to `f` in order, so the visit sequence
    /// does not depend on the thread count.
    pub fn for_each_layer<F: FnMut(u64, &[i64])>(&self, lo: u64, hi: u64, mut f: F) -> Result<()> {
        let lo = lo.max(1);
        if hi < lo {
            return Ok(());
        }
        if !self.supports_i64(hi) {
            return Err(Error::Unsupported(format!("layers up to q = {hi} exceed the machine-integer path")));
        }
        let spf = self.spf_for(hi);
        let chunks = self.chunks(lo, hi);
        let window = 2 * rayon::current_num_threads().max(1);
        for w in chunks.chunks(window) {
            let results: Vec<Vec<(u64, Vec<i64>)>> = w
                .par_iter()
                .map(|&(a, b)| {
                    let mut sq = spf.as_deref().map(SquaresCtx::new);
                    (a..=b)
                        .map(|q| {
                            let mut pts = Vec::new();
                            self.layer_into(q, spf.as_deref(), &mut sq, &mut pts);
                            (q, pts)
                        })
                        .collect()
                })
                .collect();
            for (q, pts) in results.into_iter().flatten() {
                f(q, &pts);
            }
        }
        Ok(())
    }

    /// Number of primitive points in each layer `1..=q_max`.
    pub fn layer_counts(&self, q_max: u64) -> Result<Vec<u64>> {
        let k = self.form.n() + 1;
        let mut counts = Vec::with_capacity(q_max as usize);
        self.for_each_layer(1, q_max, |_, pts| counts.push((pts.len() / k) as u64))?;
        Ok(counts)
    }
}

fn sort_tuples(flat: &mut [i64], k: usize) {
    let cnt = flat.len() / k;
    if cnt < 2 {
        return;
    }
    let mut idx: Vec<usize> = (0..cnt).collect();
    idx.sort_unstable_by(|&a, &b| flat[a * k..a * k + k].cmp(&flat[b * k..b * k + k]));
    let copy = flat.to_vec();
    for (dst, &src) in idx.iter().enumerate() {
        flat[dst * k..dst * k + k].copy_from_slice(&copy[src * k..src * k + k]);
    }
}

/// All primitive `(p, q)` with `1 ≤ q ≤ q_max`, in increasing `q` and
/// lexicographic `p`. Layers are computed lazily.
pub fn enumerate_primitive(form: &EllipsoidForm, q_max: u64) -> impl Iterator<Item = ConePoint> {
    let en = Enumerator::new(form, Strategy::Auto).expect("auto strategy is always valid");
    (1..=q_max).flat_map(move |q| {
        let qb = BigInt::from(q);
        en.layer(&qb).into_iter().map(move |p| ConePoint::from_layer(&p, &qb))
    })
}

/// Largest `q` with `√2·q ≤ t`.
pub fn q_max_for_norm(t: f64) -> u64 {
    if !(t > 0.0) {
        return 0;
    }
    let mut q = (t / std::f64::consts::SQRT_2).floor().max(0.0) as u64;
    while q > 0 && 2.0 * (q as f64) * (q as f64) > t * t {
        q -= 1;
    }
    while 2.0 * ((q + 1) as f64).powi(2) <= t * t {
        q += 1;
    }
    q
}

/// Largest `q` with `q < t`.
pub fn q_max_below(t: f64) -> u64 {
    if !(t > 1.0) {
        return 0;
    }
    (t.ceil() as u64).saturating_sub(1)
}

/// All primitive cone points with `‖v‖_Q ≤ t`.
///
/// Ellipsoid forms use the layer enumeration with `q ≤ t/√2`. Any other
/// form falls back to a box search over `|v_i| ≤ t·‖τ⁻¹‖`, which is
/// complete for that box but only practical for small `t`.
pub fn enumerate_by_norm(space: &QuadraticSpace, t: f64) -> Result<Vec<ConePoint>> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("norm bound must be positive, got {t}")));
    }
    match space.ellipsoid() {
        Some(e) => Ok(enumerate_primitive(e, q_max_for_norm(t)).collect()),
        None => box_search(space, t),
    }
}

fn box_search(space: &QuadraticSpace, t: f64) -> Result<Vec<ConePoint>> {
    let dim = space.dim();
    let op = space.tau_inv().clone().svd(false, false).singular_values.max();
    let b = (t * op).floor() as i64 + 1;
    if (2 * b + 1) as f64 > (5e8f64).powf(1.0 / dim as f64) {
        return Err(Error::Unsupported(format!("box search with half-width {b} in dimension {dim} is too large")));
    }
    let scale = space.j().iter().flatten().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let j: Vec<Vec<i128>> = space
        .j()
        .iter()
        .map(|r| r.iter().map(|x| (x * num_rational::BigRational::from_integer(scale.clone())).to_integer().to_i128().unwrap()).collect())
        .collect();
    let mut out = Vec::new();
    let mut v = vec![-b; dim];
    loop {
        let mut val = 0i128;
        for i in 0..dim {
            for l in 0..dim {
                val += j[i][l] * v[i] as i128 * v[l] as i128;
            }
        }
        if val == 0 && v.iter().any(|&c| c != 0) && v.iter().fold(0i64, |g, c| g.gcd(c)) == 1 {
            let vf: Vec<f64> = v.iter().map(|&c| c as f64).collect();
            let w = space.to_standard(&vf)?;
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if w[dim - 1] > 0.0 && norm <= t {
                let vb: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
                out.push(ConePoint { q: vb[dim - 1].clone(), v: vb, qnorm: norm });
            }
        }
        // odometer
        let mut i = dim;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if v[i] < b {
                v[i] += 1;
                break;
            }
            v[i] = -b;
        }
    }
}

/// `#{primitive (p, q) : 1 ≤ q < t}`.
pub fn count_all(form: &EllipsoidForm, t: f64) -> Result<u64> {
    let en = Enumerator::new(form, Strategy::Auto)?.unsorted();
    Ok(en.layer_counts(q_max_below(t))?.iter().sum())
}
