//! Rational quadratic forms of signature `(n+1, 1)` and positive-definite
//! ellipsoid forms.
//!
//! A [`QuadraticSpace`] keeps its Gram matrix `J` in exact rationals and a
//! floating-point diagonalizing matrix `τ` with `Q(v) = Q_n(vτ)`, where
//! `Q_n(w) = w_1² + … + w_{n+1}² − w_{n+2}²`. Cone membership is always
//! decided on the exact side; `τ` is only used for geometry.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Parse `p/q`, an integer, or a finite decimal such as `-0.125`, exactly.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_digits}{frac}");
        let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rat::new(num, den));
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(p))
}

fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators or denominators: go through the ratio of logs.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn to_f64_matrix(m: &[Vec<Rat>]) -> DMatrix<f64> {
    let k = m.len();
    DMatrix::from_fn(k, k, |i, j| rat_to_f64(&m[i][j]))
}

fn check_square_symmetric(m: &[Vec<Rat>], dim: usize) -> Result<()> {
    if m.len() != dim {
        return Err(Error::Dimension { expected: dim, got: m.len() });
    }
    for row in m {
        if row.len() != dim {
            return Err(Error::Dimension { expected: dim, got: row.len() });
        }
    }
    for i in 0..dim {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return Err(Error::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Leading principal minors by exact Gaussian elimination. Returns the
/// sequence of pivots; the k-th minor is the product of the first k pivots.
/// Stops at the first zero pivot.
fn exact_pivots(m: &[Vec<Rat>]) -> Vec<Rat> {
    let k = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut pivots = Vec::with_capacity(k);
    for c in 0..k {
        let p = a[c][c].clone();
        pivots.push(p.clone());
        if p.is_zero() {
            break;
        }
        for r in c + 1..k {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &p;
            for j in c..k {
                let t = &f * &a[c][j];
                a[r][j] -= t;
            }
        }
    }
    pivots
}

/// Exact determinant with row pivoting.
pub fn exact_det(m: &[Vec<Rat>]) -> Rat {
    let k = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut det = Rat::one();
    for c in 0..k {
        let Some(pr) = (c..k).find(|&r| !a[r][c].is_zero()) else {
            return Rat::zero();
        };
        if pr != c {
            a.swap(pr, c);
            det = -det;
        }
        let p = a[c][c].clone();
        det *= &p;
        for r in c + 1..k {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &p;
            for j in c..k {
                let t = &f * &a[c][j];
                a[r][j] -= t;
            }
        }
    }
    det
}

fn is_diagonal(m: &[Vec<Rat>]) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, x)| i == j || x.is_zero()))
}

/// Eigen-decomposition with the ordering rule: positive eigenvalues in
/// descending order, then the negative ones; ties broken by the position of
/// the eigenvector's dominant coordinate. Each eigenvector is signed so its
/// largest-magnitude entry is positive.
fn sorted_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let k = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::Eigen)?;
    let dominant = |c: usize| -> usize {
        let col = eig.eigenvectors.column(c);
        (0..k).fold(0, |best, i| if col[i].abs() > col[best].abs() + 1e-12 { i } else { best })
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        let neg = (ta < 0.0).cmp(&(tb < 0.0));
        neg.then(tb.partial_cmp(&ta).unwrap_or(std::cmp::Ordering::Equal))
            .then(dominant(a).cmp(&dominant(b)))
    });
    let vals: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
    let mut vecs = DMatrix::zeros(k, k);
    for (dst, &c) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(c);
        let d = dominant(c);
        let s = if col[d] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..k {
            vecs[(i, dst)] = s * col[i];
        }
    }
    Ok((vals, vecs))
}

/// `τ = k·a` for a form of the given Gram matrix, split into its factors.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    /// Orthogonal factor; its columns are eigenvectors of `J`.
    pub k: DMatrix<f64>,
    /// Square roots of the absolute eigenvalues, in column order.
    pub a: Vec<f64>,
    /// The eigenvalues themselves, negative one last.
    pub eigenvalues: Vec<f64>,
}

impl Diagonalization {
    pub fn tau(&self) -> DMatrix<f64> {
        let mut t = self.k.clone();
        for (j, s) in self.a.iter().enumerate() {
            t.column_mut(j).scale_mut(*s);
        }
        t
    }
}

fn count_signs(vals: &[f64]) -> (usize, usize, usize) {
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = scale * 1e-12;
    let pos = vals.iter().filter(|&&v| v > tol).count();
    let neg = vals.iter().filter(|&&v| v < -tol).count();
    (pos, neg, vals.len() - pos - neg)
}

/// Diagonalize a symmetric matrix of signature `(n+1, 1)`.
///
/// Diagonal input is handled exactly: `k` is the permutation moving the
/// negative entry last and keeping the other coordinates in place. If the
/// last row and column vanish off the diagonal, only the leading block goes
/// through the eigensolver. Otherwise the full matrix does.
pub fn diagonalize_factors(j: &[Vec<Rat>]) -> Result<Diagonalization> {
    let dim = j.len();
    check_square_symmetric(j, dim)?;
    if dim < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 coordinates, got {dim}")));
    }
    if exact_det(j).is_zero() {
        let (pos, neg, _) = count_signs(SymmetricEigen::new(to_f64_matrix(j)).eigenvalues.as_slice());
        return Err(Error::Signature { pos, neg, zero: dim - pos - neg });
    }
    let (vals, k) = if is_diagonal(j) {
        let d: Vec<f64> = (0..dim).map(|i| rat_to_f64(&j[i][i])).collect();
        let mut order: Vec<usize> = (0..dim).filter(|&i| j[i][i].is_positive()).collect();
        order.extend((0..dim).filter(|&i| j[i][i].is_negative()));
        let mut k = DMatrix::zeros(dim, dim);
        for (col, &i) in order.iter().enumerate() {
            k[(i, col)] = 1.0;
        }
        (order.iter().map(|&i| d[i]).collect(), k)
    } else if (0..dim - 1).all(|i| j[dim - 1][i].is_zero()) && j[dim - 1][dim - 1].is_negative() {
        let block: Vec<Vec<Rat>> = j[..dim - 1].iter().map(|r| r[..dim - 1].to_vec()).collect();
        let (mut vals, kb) = sorted_eigen(&to_f64_matrix(&block))?;
        let mut k = DMatrix::zeros(dim, dim);
        k.view_mut((0, 0), (dim - 1, dim - 1)).copy_from(&kb);
        k[(dim - 1, dim - 1)] = 1.0;
        vals.push(rat_to_f64(&j[dim - 1][dim - 1]));
        (vals, k)
    } else {
        sorted_eigen(&to_f64_matrix(j))?
    };
    let (pos, neg, zero) = count_signs(&vals);
    if neg != 1 || pos != dim - 1 {
        return Err(Error::Signature { pos, neg, zero });
    }
    let a = vals.iter().map(|t| t.abs().sqrt()).collect();
    Ok(Diagonalization { k, a, eigenvalues: vals })
}

/// `τ` with `Q(v) = Q_n(vτ)`.
pub fn diagonalize(j: &[Vec<Rat>]) -> Result<DMatrix<f64>> {
    Ok(diagonalize_factors(j)?.tau())
}

/// A positive-definite rational form `𝒬` on `R^{n+1}`; the associated
/// cone form is `Q(x, y) = 𝒬(x) − y²`.
#[derive(Clone, Debug)]
pub struct EllipsoidForm {
    n: usize,
    a: Vec<Vec<Rat>>,
    a_int: Vec<Vec<BigInt>>,
    scale: BigInt,
    a_f64: DMatrix<f64>,
    /// `A = τ̃ τ̃ᵀ`, so `𝒬(x) = ‖xτ̃‖²`.
    tau_tilde: DMatrix<f64>,
    tau_tilde_inv: DMatrix<f64>,
    identity: bool,
}

impl EllipsoidForm {
    pub fn new(n: usize, a: Vec<Vec<Rat>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        check_square_symmetric(&a, n + 1)?;
        let pivots = exact_pivots(&a);
        if let Some(bad) = pivots.iter().position(|p| !p.is_positive()) {
            return Err(Error::NotPositiveDefinite(bad + 1));
        }
        let scale = a
            .iter()
            .flatten()
            .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let a_int = a
            .iter()
            .map(|row| row.iter().map(|x| (x * Rat::from_integer(scale.clone())).to_integer()).collect())
            .collect();
        let a_f64 = to_f64_matrix(&a);
        let k = n + 1;
        let identity = (0..k).all(|i| (0..k).all(|j| a[i][j] == if i == j { Rat::one() } else { Rat::zero() }));
        let tau_tilde = if is_diagonal(&a) {
            DMatrix::from_fn(k, k, |i, j| if i == j { a_f64[(i, i)].sqrt() } else { 0.0 })
        } else {
            let (vals, vecs) = sorted_eigen(&a_f64)?;
            let mut t = vecs;
            for (j, v) in vals.iter().enumerate() {
                t.column_mut(j).scale_mut(v.sqrt());
            }
            t
        };
        let tau_tilde_inv = tau_tilde.clone().try_inverse().ok_or(Error::Eigen)?;
        Ok(Self { n, a, a_int, scale, a_f64, tau_tilde, tau_tilde_inv, identity })
    }

    /// `x_1² + … + x_{n+1}²`.
    pub fn standard(n: usize) -> Self {
        let a = (0..=n)
            .map(|i| (0..=n).map(|j| Rat::from_integer(BigInt::from((i == j) as i32))).collect())
            .collect();
        Self::new(n, a).expect("identity is positive definite")
    }

    /// Diagonal form with the given positive rational entries.
    pub fn diagonal(entries: &[Rat]) -> Result<Self> {
        let k = entries.len();
        if k < 2 {
            return Err(Error::InvalidArgument("need at least two entries".into()));
        }
        let a = (0..k)
            .map(|i| (0..k).map(|j| if i == j { entries[i].clone() } else { Rat::zero() }).collect())
            .collect();
        Self::new(k - 1, a)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn a(&self) -> &[Vec<Rat>] {
        &self.a
    }
    /// `scale · A`, an integer matrix.
    pub fn a_int(&self) -> &[Vec<BigInt>] {
        &self.a_int
    }
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }
    pub fn a_f64(&self) -> &DMatrix<f64> {
        &self.a_f64
    }
    pub fn tau_tilde(&self) -> &DMatrix<f64> {
        &self.tau_tilde
    }
    pub fn tau_tilde_inv(&self) -> &DMatrix<f64> {
        &self.tau_tilde_inv
    }
    pub fn is_identity(&self) -> bool {
        self.identity
    }
    pub fn is_diagonal(&self) -> bool {
        is_diagonal(&self.a)
    }

    /// Exact `𝒬(x)` at an integer point.
    pub fn value_int(&self, x: &[BigInt]) -> Result<Rat> {
        if x.len() != self.n + 1 {
            return Err(Error::Dimension { expected: self.n + 1, got: x.len() });
        }
        let mut acc = BigInt::zero();
        for i in 0..x.len() {
            for j in 0..x.len() {
                acc += &self.a_int[i][j] * &x[i] * &x[j];
            }
        }
        Ok(Rat::new(acc, self.scale.clone()))
    }

    /// `𝒬(x)` in floating point, straight from `A`.
    pub fn value_f64(&self, x: &[f64]) -> f64 {
        let k = self.n + 1;
        let mut acc = 0.0;
        for i in 0..k {
            let mut row = 0.0;
            for j in 0..k {
                row += self.a_f64[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// `‖x‖_𝒬 = 𝒬(x)^{1/2}`.
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.value_f64(x).max(0.0).sqrt()
    }

    /// `xτ̃`: maps the `𝒬`-sphere onto the unit sphere.
    pub fn to_sphere(&self, x: &[f64]) -> Vec<f64> {
        row_times(x, &self.tau_tilde)
    }

    /// `ατ̃⁻¹`: maps the unit sphere onto the `𝒬`-sphere.
    pub fn from_sphere(&self, alpha: &[f64]) -> Vec<f64> {
        row_times(alpha, &self.tau_tilde_inv)
    }

    /// Gram matrix `diag-block(A, −1)` of the associated cone form.
    pub fn cone_gram(&self) -> Vec<Vec<Rat>> {
        let k = self.n + 2;
        let mut j = vec![vec![Rat::zero(); k]; k];
        for i in 0..k - 1 {
            for l in 0..k - 1 {
                j[i][l] = self.a[i][l].clone();
            }
        }
        j[k - 1][k - 1] = -Rat::one();
        j
    }
}

/// Row vector times matrix.
pub fn row_times(v: &[f64], m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    debug_assert_eq!(v.len(), r);
    (0..c).map(|j| (0..r).map(|i| v[i] * m[(i, j)]).sum()).collect()
}

/// A rational quadratic form of signature `(n+1, 1)`.
#[derive(Clone, Debug)]
pub struct QuadraticSpace {
    n: usize,
    j: Vec<Vec<Rat>>,
    j_f64: DMatrix<f64>,
    diag: Diagonalization,
    tau: DMatrix<f64>,
    tau_inv: DMatrix<f64>,
    det_j: Rat,
    ellipsoid: Option<EllipsoidForm>,
}

impl QuadraticSpace {
    /// Form with Gram matrix `j`, of size `(n+2)×(n+2)`.
    pub fn new(n: usize, j: Vec<Vec<Rat>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        check_square_symmetric(&j, n + 2)?;
        let diag = diagonalize_factors(&j)?;
        let tau = diag.tau();
        let tau_inv = tau.clone().try_inverse().ok_or(Error::Eigen)?;
        let det_j = exact_det(&j);
        let k = n + 2;
        let ellipsoid = if (0..k - 1).all(|i| j[k - 1][i].is_zero()) && j[k - 1][k - 1] == -Rat::one() {
            let a: Vec<Vec<Rat>> = j[..k - 1].iter().map(|r| r[..k - 1].to_vec()).collect();
            EllipsoidForm::new(n, a).ok()
        } else {
            None
        };
        let j_f64 = to_f64_matrix(&j);
        Ok(Self { n, j, j_f64, diag, tau, tau_inv, det_j, ellipsoid })
    }

    /// The standard form `Q_n`.
    pub fn standard(n: usize) -> Self {
        Self::from_ellipsoid(&EllipsoidForm::standard(n))
    }

    /// `Q(x, y) = 𝒬(x) − y²`.
    pub fn from_ellipsoid(e: &EllipsoidForm) -> Self {
        Self::new(e.n(), e.cone_gram()).expect("ellipsoid cone forms have signature (n+1, 1)")
    }

    pub fn n(&self) -> usize {
        self.n
    }
    /// Ambient dimension `n + 2`.
    pub fn dim(&self) -> usize {
        self.n + 2
    }
    pub fn j(&self) -> &[Vec<Rat>] {
        &self.j
    }
    pub fn j_f64(&self) -> &DMatrix<f64> {
        &self.j_f64
    }
    pub fn tau(&self) -> &DMatrix<f64> {
        &self.tau
    }
    pub fn tau_inv(&self) -> &DMatrix<f64> {
        &self.tau_inv
    }
    pub fn diagonalization(&self) -> &Diagonalization {
        &self.diag
    }
    pub fn det_j(&self) -> &Rat {
        &self.det_j
    }
    /// The ellipsoid form when `J = diag-block(A, −1)` with `A` positive definite.
    pub fn ellipsoid(&self) -> Option<&EllipsoidForm> {
        self.ellipsoid.as_ref()
    }
    pub fn is_standard(&self) -> bool {
        self.ellipsoid.as_ref().is_some_and(|e| e.is_identity())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// Exact `vJvᵀ` at an integer point.
    pub fn evaluate_int(&self, v: &[BigInt]) -> Result<Rat> {
        let r: Vec<Rat> = v.iter().map(|x| Rat::from_integer(x.clone())).collect();
        self.evaluate_rat(&r)
    }

    pub fn evaluate_i64(&self, v: &[i64]) -> Result<Rat> {
        let b: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.evaluate_int(&b)
    }

    /// Exact `vJvᵀ` at a rational point.
    pub fn evaluate_rat(&self, v: &[Rat]) -> Result<Rat> {
        self.check_len(v.len())?;
        let mut acc = Rat::zero();
        for i in 0..v.len() {
            if v[i].is_zero() {
                continue;
            }
            let mut row = Rat::zero();
            for l in 0..v.len() {
                if !self.j[i][l].is_zero() && !v[l].is_zero() {
                    row += &self.j[i][l] * &v[l];
                }
            }
            acc += &v[i] * row;
        }
        Ok(acc)
    }

    /// `vJvᵀ` in floating point.
    pub fn evaluate_f64(&self, v: &[f64]) -> Result<f64> {
        self.check_len(v.len())?;
        let k = v.len();
        let mut acc = 0.0;
        for i in 0..k {
            let mut row = 0.0;
            for l in 0..k {
                row += self.j_f64[(i, l)] * v[l];
            }
            acc += v[i] * row;
        }
        Ok(acc)
    }

    /// `vτ`, the image in standard coordinates.
    pub fn to_standard(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok(row_times(v, &self.tau))
    }

    /// `wτ⁻¹`.
    pub fn from_standard(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w.len())?;
        Ok(row_times(w, &self.tau_inv))
    }

    /// `‖v‖_Q = ‖vτ‖`.
    pub fn q_norm(&self, v: &[f64]) -> Result<f64> {
        Ok(self.to_standard(v)?.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    pub fn q_norm_int(&self, v: &[BigInt]) -> Result<f64> {
        let f: Vec<f64> = v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        self.q_norm(&f)
    }

    /// `τ g τ⁻¹`: carries an element of `SO(Q_n)` to the group of `Q`.
    pub fn conjugate_from_standard(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        &self.tau * g * &self.tau_inv
    }

    /// Canonical text serialization: `n=<n>` then one row of reduced
    /// rationals per line, LF terminated.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        for row in &self.j {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", cells.join(" "));
        }
        s
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text), hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

/// Parse the form file format.
///
/// ```text
/// n=2
/// 1 0 0 0
/// 0 1 0 0
/// 0 0 1 0
/// 0 0 0 -1
/// ```
///
/// A line `ellipsoid` after the header switches to `n+1` rows of `A`.
/// Blank lines and `#` comments are ignored.
pub fn parse_form(text: &str) -> Result<QuadraticSpace> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty form file".into()))?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected header n=<int>, got {header:?}")))?;
    let rest: Vec<&str> = lines.collect();
    let (ellipsoid, rows) = match rest.first() {
        Some(&"ellipsoid") => (true, &rest[1..]),
        _ => (false, &rest[..]),
    };
    let m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|l| l.split_whitespace().map(parse_rational).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    if ellipsoid {
        Ok(QuadraticSpace::from_ellipsoid(&EllipsoidForm::new(n, m)?))
    } else {
        QuadraticSpace::new(n, m)
    }
}

/// `standard:<n>` or a path to a form file.
pub fn load_form(arg: &str) -> Result<QuadraticSpace> {
    if let Some(n) = arg.strip_prefix("standard:") {
        let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad dimension in {arg:?}")))?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        return Ok(QuadraticSpace::standard(n));
    }
    parse_form(&std::fs::read_to_string(arg)?)
}
