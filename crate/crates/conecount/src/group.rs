//! Elements of `G = SO⁺_{Q_n}(R)` in Iwasawa coordinates and the identity
//! neighborhoods used for well-roundedness.
//!
//! Matrices act on row vectors. With `e₀ = (−1, 0, …, 0, 1)`:
//! `u_x` fixes `e₀`, `e₀ a_y = y⁻¹ e₀`, `K = diag(SO(n+1), 1)` and
//! `M = diag(1, SO(n), 1)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{alpha0, chordal_to_angle, dot, e0, norm};

/// A matrix in `SO⁺_{Q_n}(R)`, size `(n+2)×(n+2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub m: DMatrix<f64>,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n + 2, n + 2) }
    }

    pub fn n(&self) -> usize {
        self.m.nrows() - 2
    }

    /// `u_x` for `x ∈ Rⁿ`.
    pub fn u(x: &[f64]) -> Self {
        let n = x.len();
        let d = n + 2;
        let s = dot(x, x);
        let mut m = DMatrix::identity(d, d);
        m[(0, 0)] = 1.0 - s / 2.0;
        m[(0, d - 1)] = s / 2.0;
        m[(d - 1, 0)] = -s / 2.0;
        m[(d - 1, d - 1)] = 1.0 + s / 2.0;
        for (i, &xi) in x.iter().enumerate() {
            m[(0, i + 1)] = xi;
            m[(d - 1, i + 1)] = xi;
            m[(i + 1, 0)] = -xi;
            m[(i + 1, d - 1)] = xi;
        }
        Self { m }
    }

    /// `a_y`, `y > 0`.
    pub fn a(n: usize, y: f64) -> Result<Self> {
        if !(y > 0.0) {
            return Err(Error::InvalidArgument(format!("a_y needs y > 0, got {y}")));
        }
        let d = n + 2;
        let mut m = DMatrix::identity(d, d);
        let (c, s) = ((y + 1.0 / y) / 2.0, (y - 1.0 / y) / 2.0);
        m[(0, 0)] = c;
        m[(0, d - 1)] = s;
        m[(d - 1, 0)] = s;
        m[(d - 1, d - 1)] = c;
        Ok(Self { m })
    }

    /// `diag(R, 1)` for `R ∈ SO(n+1)`.
    pub fn k(r: &DMatrix<f64>) -> Result<Self> {
        check_rotation(r)?;
        let k = r.nrows();
        let mut m = DMatrix::identity(k + 1, k + 1);
        m.view_mut((0, 0), (k, k)).copy_from(r);
        Ok(Self { m })
    }

    /// `diag(1, R̃, 1)` for `R̃ ∈ SO(n)`.
    pub fn m_elem(r: &DMatrix<f64>) -> Result<Self> {
        check_rotation(r)?;
        let k = r.nrows();
        let mut m = DMatrix::identity(k + 2, k + 2);
        m.view_mut((1, 1), (k, k)).copy_from(r);
        Ok(Self { m })
    }

    /// `k_α ∈ K` with `e₀ k_α = (α, 1)`.
    ///
    /// This is the rotation of the plane spanned by `α₀` and `α` that takes
    /// `α₀` to `α`, fixing the orthogonal complement. For `α = −α₀` the plane
    /// is not determined and the rotation by π in the first two coordinates
    /// is used.
    pub fn section(alpha: &[f64]) -> Result<Self> {
        if (norm(alpha) - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument("section needs a unit vector".into()));
        }
        let k = alpha.len();
        let u = alpha0(k - 1);
        let c = dot(alpha, &u);
        let mut w: Vec<f64> = alpha.iter().zip(&u).map(|(a, b)| a - c * b).collect();
        let s = norm(&w);
        let mut r = DMatrix::identity(k, k);
        if s < 1e-14 {
            if c < 0.0 {
                r[(0, 0)] = -1.0;
                r[(1, 1)] = -1.0;
            }
        } else {
            w.iter_mut().for_each(|x| *x /= s);
            for i in 0..k {
                for j in 0..k {
                    r[(i, j)] += (c - 1.0) * (u[i] * u[j] + w[i] * w[j]) + s * (u[i] * w[j] - w[i] * u[j]);
                }
            }
        }
        Self::k(&r)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m }
    }

    /// `g⁻¹ = J gᵀ J` with `J = diag(1, …, 1, −1)`.
    pub fn inverse(&self) -> Self {
        let d = self.m.nrows();
        let j = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| if i + 1 == d { -1.0 } else { 1.0 }));
        Self { m: &j * self.m.transpose() * &j }
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.m.clone().svd(false, false).singular_values.max()
    }

    /// `v·g`.
    pub fn act(&self, v: &[f64]) -> Vec<f64> {
        crate::quadform::row_times(v, &self.m)
    }

    /// `max |Q_n(v g) − Q_n(v)| / ‖v‖²` over the coordinate vectors, `e₀`
    /// and a few mixed probes.
    pub fn form_defect(&self) -> f64 {
        let d = self.m.nrows();
        let qn = |v: &[f64]| v[..d - 1].iter().map(|x| x * x).sum::<f64>() - v[d - 1] * v[d - 1];
        let mut probes: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i32 as f64).collect()).collect();
        probes.push(e0(d - 2));
        probes.push((0..d).map(|i| 1.0 + i as f64).collect());
        probes.push((0..d).map(|i| if i % 2 == 0 { 0.5 } else { -1.5 }).collect());
        probes
            .iter()
            .map(|v| (qn(&self.act(v)) - qn(v)).abs() / dot(v, v))
            .fold(0.0, f64::max)
    }

    /// Preserves `Q_n`, has determinant one and maps the positive sheet to
    /// itself, all within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let d = self.m.nrows();
        let scale = self.m.abs().max().max(1.0).powi(d as i32);
        self.form_defect() <= tol * self.m.abs().max().max(1.0).powi(2)
            && (self.m.determinant() - 1.0).abs() <= tol * scale
            && self.act(&e0(d - 2))[d - 1] > 0.0
    }

    /// For `p ∈ P`, the coordinates `(y, x)` with `p = m a_y u_x`. Returns
    /// `None` when `e₀ p` is not a positive multiple of `e₀`.
    pub fn parabolic_may_u(&self) -> Option<(f64, Vec<f64>)> {
        let d = self.m.nrows();
        let w = self.act(&e0(d - 2));
        let scale = w[d - 1].abs().max(1.0);
        if !(w[d - 1] > 0.0) || (w[0] + w[d - 1]).abs() > 1e-9 * scale || w[1..d - 1].iter().any(|x| x.abs() > 1e-9 * scale) {
            return None;
        }
        let y = 1.0 / w[d - 1];
        // f = (1, 0, …, 0, 1): f·m a_y u_x = y(1 − ‖x‖², 2x, 1 + ‖x‖²)
        let mut f = vec![0.0; d];
        f[0] = 1.0;
        f[d - 1] = 1.0;
        let fp = self.act(&f);
        let x = fp[1..d - 1].iter().map(|v| v / (2.0 * y)).collect();
        Some((y, x))
    }
}

fn check_rotation(r: &DMatrix<f64>) -> Result<()> {
    let k = r.nrows();
    if r.ncols() != k {
        return Err(Error::Dimension { expected: k, got: r.ncols() });
    }
    let err = (r.transpose() * r - DMatrix::<f64>::identity(k, k)).abs().max();
    if err > 1e-10 || (r.determinant() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("matrix is not a rotation".into()));
    }
    Ok(())
}

/// A point of `S^n` drawn from `σ_n` (normalized Gaussian vector).
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(rng)).collect();
        let l = norm(&v);
        if l > 1e-12 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

/// A point drawn uniformly from the unit ball of `R^k`.
pub fn sample_ball<R: Rng + ?Sized>(k: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let dir = sample_sphere(k - 1, rng);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / k as f64);
    dir.into_iter().map(|x| x * r).collect()
}

/// Haar-random `SO(k)`: QR of a Gaussian matrix with the signs of `R`'s
/// diagonal moved into `Q`, then one column flipped if needed.
pub fn sample_rotation<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    if k <= 1 {
        return DMatrix::identity(k, k);
    }
    let g = DMatrix::from_fn(k, k, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// A point of the cap `𝔇_ρ(α₀)` (chordal radius `ρ`), with density
/// proportional to `σ_n`. The colatitude is drawn by rejection against
/// `sin^{n−1}θ`.
pub fn sample_cap_around_alpha0<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let th_max = chordal_to_angle(rho.min(2.0));
    let bound = if th_max >= std::f64::consts::FRAC_PI_2 { 1.0 } else { th_max.sin() };
    let theta = loop {
        let t = rng.random::<f64>() * th_max;
        if n == 1 || rng.random::<f64>() * bound.powi(n as i32 - 1) <= t.sin().powi(n as i32 - 1) {
            break t;
        }
    };
    let omega = sample_sphere(n - 1, rng);
    let mut a = vec![-theta.cos()];
    a.extend(omega.iter().map(|w| w * theta.sin()));
    a
}

/// Which identity neighborhood.
#[derive(Clone, Debug, PartialEq)]
pub enum NeighborhoodSpec {
    /// `G_{ε,r}(α)`.
    GEpsR { eps: f64, r: f64, alpha: Vec<f64> },
    /// `P_ε = {p ∈ P : ‖p‖_op < 1 + ε}`.
    PEps { eps: f64 },
    /// `P̃_ε = P′_ε ∩ (P′_ε)⁻¹` with
    /// `P′_ε = {m a_y u_x : ‖a_y‖_op < 1 + ε/4, ‖x‖ < ε/4}`.
    PTildeEps { eps: f64 },
}

/// Rejection budget for [`sample_neighborhood`].
pub const REJECTION_BUDGET: usize = 10_000;

impl NeighborhoodSpec {
    pub fn validate(&self) -> Result<()> {
        let eps = match self {
            NeighborhoodSpec::GEpsR { eps, r, alpha } => {
                if !(*r > 0.0 && *r < 1.0) {
                    return Err(Error::InvalidArgument(format!("r must lie in (0, 1), got {r}")));
                }
                if (norm(alpha) - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidArgument("α must be a unit vector".into()));
                }
                *eps
            }
            NeighborhoodSpec::PEps { eps } | NeighborhoodSpec::PTildeEps { eps } => *eps,
        };
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("ε must lie in (0, 1), got {eps}")));
        }
        Ok(())
    }

    /// Exact membership predicate.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match self {
            NeighborhoodSpec::GEpsR { eps, r, alpha } => in_g_eps_r(g, *eps, *r, alpha),
            NeighborhoodSpec::PEps { eps } => g.parabolic_may_u().is_some() && g.op_norm() < 1.0 + eps,
            NeighborhoodSpec::PTildeEps { eps } => in_p_prime(g, *eps) && in_p_prime(&g.inverse(), *eps),
        }
    }
}

fn in_g_eps_r(g: &GroupElement, eps: f64, r: f64, alpha: &[f64]) -> bool {
    if !(g.op_norm() < 1.0 + eps) {
        return false;
    }
    let mut at = alpha.to_vec();
    at.push(1.0);
    let s2 = std::f64::consts::SQRT_2;
    let dev = |h: &GroupElement| {
        let w = h.act(&at);
        let l = norm(&w);
        w.iter().zip(&at).map(|(a, b)| (a / l - b / s2).powi(2)).sum::<f64>().sqrt()
    };
    dev(g).max(dev(&g.inverse())) < r * eps
}

fn in_p_prime(g: &GroupElement, eps: f64) -> bool {
    match g.parabolic_may_u() {
        Some((y, x)) => y.max(1.0 / y) < 1.0 + eps / 4.0 && norm(&x) < eps / 4.0,
        None => false,
    }
}

/// Draw an element of the neighborhood.
///
/// Candidates come from an Iwasawa box known to sit inside the set (scaled
/// by `box_factor`, normally 1), and are returned only once the exact
/// membership predicate accepts them.
pub fn sample_neighborhood<R: Rng + ?Sized>(spec: &NeighborhoodSpec, n: usize, rng: &mut R) -> Result<GroupElement> {
    sample_neighborhood_scaled(spec, n, 1.0, rng)
}

pub fn sample_neighborhood_scaled<R: Rng + ?Sized>(
    spec: &NeighborhoodSpec,
    n: usize,
    box_factor: f64,
    rng: &mut R,
) -> Result<GroupElement> {
    spec.validate()?;
    for _ in 0..REJECTION_BUDGET {
        let cand = match spec {
            NeighborhoodSpec::GEpsR { eps, r, alpha } => {
                if alpha.len() != n + 1 {
                    return Err(Error::Dimension { expected: n + 1, got: alpha.len() });
                }
                let e = eps / 4.0 * box_factor;
                let x = sample_ball(n, e, rng);
                let y = 1.0 + e * (2.0 * rng.random::<f64>() - 1.0);
                let m = GroupElement::m_elem(&sample_rotation(n, rng))?;
                let ap = sample_cap_around_alpha0(n, r * e, rng);
                let g0 = GroupElement::u(&x).mul(&GroupElement::a(n, y)?).mul(&m).mul(&GroupElement::section(&ap)?);
                let ka = GroupElement::section(alpha)?;
                ka.inverse().mul(&g0).mul(&ka)
            }
            NeighborhoodSpec::PEps { eps } => {
                let e = eps / 4.0 * box_factor;
                let x = sample_ball(n, e, rng);
                let y = 1.0 + e * (2.0 * rng.random::<f64>() - 1.0);
                let m = GroupElement::m_elem(&sample_rotation(n, rng))?;
                GroupElement::u(&x).mul(&GroupElement::a(n, y)?).mul(&m)
            }
            NeighborhoodSpec::PTildeEps { eps } => {
                let e = eps / 8.0 * box_factor;
                let x = sample_ball(n, e, rng);
                let ly = (1.0 + e).ln();
                let y = (ly * (2.0 * rng.random::<f64>() - 1.0)).exp();
                let m = GroupElement::m_elem(&sample_rotation(n, rng))?;
                m.mul(&GroupElement::a(n, y)?).mul(&GroupElement::u(&x))
            }
        };
        if spec.contains(&cand) {
            return Ok(cand);
        }
    }
    Err(Error::RejectionBudget(REJECTION_BUDGET))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn iwasawa_examples() {
        let a2 = GroupElement::a(1, 2.0).unwrap();
        let w = a2.act(&e0(1));
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let u = GroupElement::u(&[0.3, -1.2]);
        let w = u.act(&e0(2));
        assert!(w.iter().zip(e0(2)).all(|(a, b)| (a - b).abs() < 1e-14));
        for y in [0.25, 0.9, 1.0, 3.0] {
            let op = GroupElement::a(3, y).unwrap().op_norm();
            assert!((op - y.max(1.0 / y)).abs() < 1e-12);
        }
        assert!(GroupElement::a(1, 0.0).is_err());
        assert!(GroupElement::k(&DMatrix::from_element(2, 2, 1.0)).is_err());
    }

    #[test]
    fn u_operator_norm_closed_form() {
        for x in [[0.1, 0.0], [0.3, 0.4], [1.0, -2.0]] {
            let s = norm(&x);
            let want = 1.0 + (s * s + s * (s * s + 4.0).sqrt()) / 2.0;
            assert!((GroupElement::u(&x).op_norm() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn section_examples() {
        assert_eq!(GroupElement::section(&alpha0(3)).unwrap(), GroupElement::identity(3));
        let g = GroupElement::section(&[0.0, 1.0, 0.0]).unwrap();
        let w = g.act(&e0(2));
        assert!(w.iter().zip([0.0, 1.0, 0.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-15));
        let flip = GroupElement::section(&[1.0, 0.0, 0.0]).unwrap();
        let w = flip.act(&e0(2));
        assert!(w.iter().zip([1.0, 0.0, 0.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-15));
        let mut rng = rng_from_seed(3);
        for n in 1..6 {
            let a = sample_sphere(n, &mut rng);
            let k = GroupElement::section(&a).unwrap();
            let back = k.mul(&k.inverse()).act(&e0(n));
            assert!(back.iter().zip(e0(n)).all(|(x, y)| (x - y).abs() < 1e-12));
            let w = k.act(&e0(n));
            assert!(w[..=n].iter().zip(&a).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn sphere_sampler_golden_and_moments() {
        let mut rng = rng_from_seed(42);
        let g = sample_sphere(1, &mut rng);
        assert!((norm(&g) - 1.0).abs() < 1e-15);
        // Frozen output of the seeded sampler.
        let golden = [GOLDEN_42[0], GOLDEN_42[1]];
        assert!((g[0] - golden[0]).abs() < 1e-15 && (g[1] - golden[1]).abs() < 1e-15, "{g:?}");

        for n in 1..4 {
            let mut rng = rng_from_seed(100 + n as u64);
            let mut mean = vec![0.0; n + 1];
            let mut sq = vec![0.0; n + 1];
            let k = 100_000;
            for _ in 0..k {
                let a = sample_sphere(n, &mut rng);
                for i in 0..=n {
                    mean[i] += a[i] / k as f64;
                    sq[i] += a[i] * a[i] / k as f64;
                }
            }
            assert!(norm(&mean) <= 0.02);
            for s in sq {
                assert!((s - 1.0 / (n as f64 + 1.0)).abs() <= 0.01);
            }
        }
    }

    const GOLDEN_42: [f64; 2] = [0.3372921533016077, 0.9414000230089039];

    #[test]
    fn rotation_sampler_is_special_orthogonal() {
        let mut rng = rng_from_seed(8);
        for k in 1..6 {
            let r = sample_rotation(k, &mut rng);
            assert!(check_rotation(&r).is_ok());
        }
    }

    #[test]
    fn cap_sampler_stays_in_cap() {
        let mut rng = rng_from_seed(9);
        for n in 1..5 {
            for rho in [0.01, 0.3, 1.5] {
                for _ in 0..500 {
                    let a = sample_cap_around_alpha0(n, rho, &mut rng);
                    assert!((norm(&a) - 1.0).abs() < 1e-12);
                    let d: f64 = a.iter().zip(alpha0(n)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                    assert!(d <= rho + 1e-12);
                }
            }
        }
    }

    #[test]
    fn constructed_elements_preserve_the_form() {
        let mut rng = rng_from_seed(10);
        for n in 1..5 {
            for _ in 0..50 {
                let x = sample_ball(n, 2.0, &mut rng);
                let y = rng.random_range(0.2..5.0);
                let g = GroupElement::u(&x)
                    .mul(&GroupElement::a(n, y).unwrap())
                    .mul(&GroupElement::k(&sample_rotation(n + 1, &mut rng)).unwrap());
                assert!(g.is_valid(1e-9));
                assert!(g.inverse().is_valid(1e-9));
                let id = g.mul(&g.inverse());
                assert!((id.m - DMatrix::<f64>::identity(n + 2, n + 2)).abs().max() < 1e-9);
            }
        }
    }

    #[test]
    fn parabolic_coordinates_round_trip() {
        let mut rng = rng_from_seed(12);
        for n in 1..5 {
            let x = sample_ball(n, 0.7, &mut rng);
            let y = rng.random_range(0.5..2.0);
            let m = GroupElement::m_elem(&sample_rotation(n, &mut rng)).unwrap();
            let p = m.mul(&GroupElement::a(n, y).unwrap()).mul(&GroupElement::u(&x));
            let (y2, x2) = p.parabolic_may_u().unwrap();
            assert!((y - y2).abs() < 1e-12);
            assert!(x.iter().zip(&x2).all(|(a, b)| (a - b).abs() < 1e-12));
            assert!(GroupElement::section(&sample_sphere(n, &mut rng)).unwrap().parabolic_may_u().is_none());
        }
    }

    #[test]
    fn identity_in_every_neighborhood() {
        for n in 1..4 {
            let specs = [
                NeighborhoodSpec::GEpsR { eps: 0.1, r: 0.5, alpha: sample_sphere(n, &mut rng_from_seed(n as u64)) },
                NeighborhoodSpec::PEps { eps: 0.1 },
                NeighborhoodSpec::PTildeEps { eps: 0.1 },
            ];
            for s in &specs {
                assert!(s.contains(&GroupElement::identity(n)));
            }
        }
    }

    #[test]
    fn neighborhood_samples_satisfy_predicates_and_inversion() {
        let mut rng = rng_from_seed(13);
        for n in 1..4 {
            for _ in 0..200 {
                let alpha = sample_sphere(n, &mut rng);
                let eps = rng.random_range(0.01..0.9);
                let r = rng.random_range(0.05..0.95);
                for spec in [
                    NeighborhoodSpec::GEpsR { eps, r, alpha: alpha.clone() },
                    NeighborhoodSpec::PEps { eps },
                    NeighborhoodSpec::PTildeEps { eps },
                ] {
                    let h = sample_neighborhood(&spec, n, &mut rng).unwrap();
                    assert!(h.is_valid(1e-9));
                    assert!(h.op_norm() < 1.0 + eps);
                    assert!(spec.contains(&h.inverse()), "{spec:?}");
                }
            }
        }
    }

    #[test]
    fn product_law() {
        let mut rng = rng_from_seed(14);
        let mut checked = 0;
        for _ in 0..10_000 {
            let n = rng.random_range(1..4);
            let alpha = sample_sphere(n, &mut rng);
            let r = rng.random_range(0.05..0.95);
            let e1 = rng.random_range(0.001..0.33);
            let e2 = rng.random_range(0.001..0.33);
            let s1 = NeighborhoodSpec::GEpsR { eps: e1, r, alpha: alpha.clone() };
            let s2 = NeighborhoodSpec::GEpsR { eps: e2, r, alpha: alpha.clone() };
            let h1 = sample_neighborhood(&s1, n, &mut rng).unwrap();
            let h2 = sample_neighborhood(&s2, n, &mut rng).unwrap();
            let big = NeighborhoodSpec::GEpsR { eps: 3.0 * (e1 + e2), r, alpha };
            assert!(big.contains(&h1.mul(&h2)));
            checked += 1;
        }
        assert_eq!(checked, 10_000);
    }

    #[test]
    fn bad_specs_rejected() {
        let mut rng = rng_from_seed(1);
        assert!(sample_neighborhood(&NeighborhoodSpec::PEps { eps: 1.5 }, 2, &mut rng).is_err());
        let s = NeighborhoodSpec::GEpsR { eps: 0.1, r: 0.5, alpha: vec![1.0, 0.0] };
        assert!(matches!(sample_neighborhood(&s, 2, &mut rng), Err(Error::Dimension { .. })));
        // A box far larger than the set exhausts the budget.
        let s = NeighborhoodSpec::GEpsR { eps: 0.01, r: 0.01, alpha: alpha0(2) };
        assert!(matches!(sample_neighborhood_scaled(&s, 2, 100.0, &mut rng), Err(Error::RejectionBudget(_))));
    }
}
