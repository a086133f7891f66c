//! Exact Fincke–Pohst enumeration of `𝒬(x) = q²`.
//!
//! `A = UᵀΔU` with `U` unit upper triangular is computed once in exact
//! rationals, so `𝒬(x) = Σ_i Δ_i (x_i + Σ_{j>i} U_ij x_j)²`. Clearing
//! denominators with `den = lcm(den U)` and `E = lcm(den Δ)` gives the
//! integer equation `Σ e_i y_i² = E·den²·q²` with `y_i = den·x_i + Σ M_ij x_j`.
//! Coordinates are fixed from the last to the first; each interval comes
//! from integer square roots, so no solution can be lost to rounding.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::quadform::EllipsoidForm;

/// Integer arithmetic used by the search: `i128` on the fast path,
/// [`BigInt`] when magnitudes could overflow.
pub trait SearchInt: Clone + Integer + Signed + Roots {
    fn from_big(b: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl SearchInt for i128 {
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl SearchInt for BigInt {
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// The scaled integer decomposition of `A`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    k: usize,
    /// `den`.
    pub den: BigInt,
    /// `M_ij = den·U_ij` for `j > i` (zero elsewhere).
    pub m: Vec<Vec<BigInt>>,
    /// `e_i = E·Δ_i`.
    pub e: Vec<BigInt>,
    /// `E·den²`, the factor multiplying `q²`.
    pub target_factor: BigInt,
}

impl Decomposition {
    pub fn new(form: &EllipsoidForm) -> Self {
        let a = form.a();
        let k = a.len();
        let zero = BigRational::zero();
        let mut u = vec![vec![zero.clone(); k]; k];
        let mut d = vec![zero.clone(); k];
        for i in 0..k {
            let mut di = a[i][i].clone();
            for l in 0..i {
                di -= &d[l] * &u[l][i] * &u[l][i];
            }
            u[i][i] = BigRational::one();
            for j in i + 1..k {
                let mut s = a[i][j].clone();
                for l in 0..i {
                    s -= &d[l] * &u[l][i] * &u[l][j];
                }
                u[i][j] = s / &di;
            }
            d[i] = di;
        }
        let den = u.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let big_e = d.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let den_r = BigRational::from_integer(den.clone());
        let e_r = BigRational::from_integer(big_e.clone());
        let m = (0..k)
            .map(|i| (0..k).map(|j| if j > i { (&u[i][j] * &den_r).to_integer() } else { BigInt::zero() }).collect())
            .collect();
        let e = d.iter().map(|x| (x * &e_r).to_integer()).collect();
        let target_factor = &big_e * &den * &den;
        Self { k, den, m, e, target_factor }
    }

    /// Number of bits the `i128` search needs for layers up to `q_max`.
    pub fn bits_needed(&self, q_max: u64) -> u64 {
        let r = &self.target_factor * BigInt::from(q_max) * BigInt::from(q_max);
        let mmax = self.m.iter().flatten().map(|x| x.abs()).max().unwrap_or_default();
        let emax = self.e.iter().max().cloned().unwrap_or_default();
        // |c| ≤ k·max|M|·max|x| and max|x| ≤ sqrt(R) roughly; keep a wide margin.
        r.bits() + mmax.bits() + emax.bits() + 8
    }

    pub fn fits_i128(&self, q_max: u64) -> bool {
        self.bits_needed(q_max) < 120
    }

    /// All integer `x` with `𝒬(x) = q²`, in search order (not sorted), as
    /// coordinates of type `T`. Primitivity is not checked here.
    pub fn solve<T: SearchInt>(&self, q: &BigInt, mut emit: impl FnMut(&[T])) {
        let conv = |b: &BigInt| T::from_big(b).expect("magnitude checked by caller");
        let den = conv(&self.den);
        let m: Vec<Vec<T>> = self.m.iter().map(|r| r.iter().map(conv).collect()).collect();
        let e: Vec<T> = self.e.iter().map(conv).collect();
        let r = conv(&(&self.target_factor * q * q));
        let mut x = vec![T::zero(); self.k];
        let ctx = Ctx { den, m, e };
        ctx.level(self.k - 1, r, &mut x, &mut emit);
    }
}

struct Ctx<T> {
    den: T,
    m: Vec<Vec<T>>,
    e: Vec<T>,
}

impl<T: SearchInt> Ctx<T> {
    fn level(&self, i: usize, r: T, x: &mut [T], emit: &mut impl FnMut(&[T])) {
        let k = x.len();
        let mut c = T::zero();
        for j in i + 1..k {
            if !self.m[i][j].is_zero() && !x[j].is_zero() {
                c = c + self.m[i][j].clone() * x[j].clone();
            }
        }
        if i == 0 {
            let (w, rem) = r.div_rem(&self.e[0]);
            if !rem.is_zero() {
                return;
            }
            let s = w.sqrt();
            if s.clone() * s.clone() != w {
                return;
            }
            let neg = -s.clone();
            let ys: &[T] = if s.is_zero() { std::slice::from_ref(&s) } else { &[neg, s.clone()] };
            for y in ys {
                let (x0, rem) = (y.clone() - c.clone()).div_rem(&self.den);
                if rem.is_zero() {
                    x[0] = x0;
                    emit(x);
                }
            }
            return;
        }
        let s = r.div_floor(&self.e[i]).sqrt();
        let lo = ceil_div(-s.clone() - c.clone(), &self.den);
        let hi = (s - c.clone()).div_floor(&self.den);
        let mut xi = lo;
        while xi <= hi {
            let y = self.den.clone() * xi.clone() + c.clone();
            let rest = r.clone() - self.e[i].clone() * y.clone() * y;
            if !rest.is_negative() {
                x[i] = xi.clone();
                self.level(i - 1, rest, x, emit);
            }
            xi = xi + T::one();
        }
        x[i] = T::zero();
    }
}

fn ceil_div<T: SearchInt>(a: T, b: &T) -> T {
    -((-a).div_floor(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::Rat;

    fn r(x: i64, y: i64) -> Rat {
        Rat::new(BigInt::from(x), BigInt::from(y))
    }

    fn solutions<T: SearchInt>(d: &Decomposition, q: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        d.solve::<T>(&BigInt::from(q), |x| out.push(x.iter().map(|v| v.to_big().to_i64().unwrap()).collect()));
        out.sort();
        out
    }

    #[test]
    fn decomposition_reconstructs_form() {
        let e = EllipsoidForm::new(
            2,
            vec![vec![r(2, 1), r(1, 2), r(0, 1)], vec![r(1, 2), r(3, 1), r(1, 3)], vec![r(0, 1), r(1, 3), r(1, 1)]],
        )
        .unwrap();
        let d = Decomposition::new(&e);
        // Σ e_i y_i² = E den² 𝒬(x) for a few points.
        for x in [[1i64, 2, 3], [-4, 0, 7], [5, -5, 1]] {
            let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
            let mut lhs = BigInt::zero();
            for i in 0..3 {
                let mut y = &d.den * &xb[i];
                for j in i + 1..3 {
                    y += &d.m[i][j] * &xb[j];
                }
                lhs += &d.e[i] * &y * &y;
            }
            let q = e.value_int(&xb).unwrap() * Rat::from_integer(d.target_factor.clone());
            assert_eq!(Rat::from_integer(lhs), q);
        }
    }

    #[test]
    fn circle_layers() {
        let d = Decomposition::new(&EllipsoidForm::standard(1));
        assert_eq!(solutions::<i128>(&d, 1), vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert_eq!(solutions::<i128>(&d, 5).len(), 12);
        assert_eq!(solutions::<BigInt>(&d, 5), solutions::<i128>(&d, 5));
    }

    #[test]
    fn non_diagonal_form_matches_exhaustive_search() {
        let e = EllipsoidForm::new(1, vec![vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(3, 1)]]).unwrap();
        let d = Decomposition::new(&e);
        for q in 1..30i64 {
            let mut want = Vec::new();
            for a in -q..=q {
                for b in -q..=q {
                    if 2 * a * a + 2 * a * b + 3 * b * b == q * q {
                        want.push(vec![a, b]);
                    }
                }
            }
            want.sort();
            assert_eq!(solutions::<i128>(&d, q), want, "q={q}");
        }
    }
}
