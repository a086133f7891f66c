//! Fast path for the standard form `x_1² + … + x_{n+1}² = q²`.
//!
//! All coordinates but the last two are looped over; the remainder
//! `m = q² − Σ x_i²` is written as a sum of two squares through its
//! factorization over the Gaussian integers. For three coordinates the
//! remainder factors as `(q − x)(q + x)`, so a smallest-prime-factor sieve
//! up to `2q` suffices.

use std::collections::HashMap;

/// Smallest-prime-factor table on `0..=limit`.
#[derive(Clone, Debug)]
pub struct Spf {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl Spf {
    pub fn new(limit: usize) -> Self {
        let limit = limit.max(2);
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let ip = i * p as usize;
                if p > si || ip > limit {
                    break;
                }
                spf[ip] = p;
            }
        }
        Self { spf, primes }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Add the factorization of `m` into `out` as `(prime, exponent)`
    /// pairs, merging with entries already present. Falls back to trial
    /// division by the sieved primes when `m` exceeds the table.
    pub fn factor_into(&self, mut m: u64, out: &mut Vec<(u64, u32)>) {
        let push = |p: u64, out: &mut Vec<(u64, u32)>| match out.iter_mut().find(|(q, _)| *q == p) {
            Some(e) => e.1 += 1,
            None => out.push((p, 1)),
        };
        if m > self.limit() {
            for &p in &self.primes {
                let p = p as u64;
                if p * p > m {
                    break;
                }
                while m % p == 0 {
                    m /= p;
                    push(p, out);
                }
                if m <= self.limit() {
                    break;
                }
            }
            if m > self.limit() {
                // Everything below sqrt(m) was tried, or the table was too
                // small to prove m prime.
                assert!(
                    (self.primes.last().copied().unwrap_or(2) as u64).pow(2) >= m,
                    "sieve too small to factor {m}"
                );
                push(m, out);
                return;
            }
        }
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            m /= p;
            push(p, out);
        }
    }
}

/// Gaussian integer `a + bi`.
type Gauss = (i64, i64);

fn gmul(x: Gauss, y: Gauss) -> Gauss {
    (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// `(a, b)` with `a² + b² = p`, `a > b > 0`, for a prime `p ≡ 1 mod 4`
/// (Hermite–Serret: Euclid on `p` and a square root of `−1`).
pub fn prime_two_squares(p: u64) -> Gauss {
    debug_assert_eq!(p % 4, 1);
    let root = (2..p)
        .map(|c| pow_mod(c, (p - 1) / 4, p))
        .find(|&t| (t as u128 * t as u128) % p as u128 == (p - 1) as u128)
        .expect("p ≡ 1 mod 4 has a square root of −1");
    let (mut r0, mut r1) = (p, root);
    while r1 * r1 > p {
        (r0, r1) = (r1, r0 % r1);
    }
    let _ = r0;
    let a = r1;
    let b = ((p - a * a) as f64).sqrt().round() as u64;
    debug_assert_eq!(a * a + b * b, p);
    (a.max(b) as i64, a.min(b) as i64)
}

/// Every ordered pair `(a, b)` with `a² + b² = m`, given the factorization
/// of `m > 0`. Appends to `out` (unsorted).
pub fn two_square_reps(factors: &[(u64, u32)], cache: &mut HashMap<u64, Gauss>, out: &mut Vec<Gauss>) {
    let mut base: Gauss = (1, 0);
    let mut split: Vec<(Gauss, u32)> = Vec::new();
    for &(p, e) in factors {
        match p % 4 {
            2 => {
                for _ in 0..e {
                    base = gmul(base, (1, 1));
                }
            }
            3 => {
                if e % 2 == 1 {
                    return;
                }
                base = (base.0 * (p as i64).pow(e / 2), base.1 * (p as i64).pow(e / 2));
            }
            _ => {
                let pi = *cache.entry(p).or_insert_with(|| prime_two_squares(p));
                split.push((pi, e));
            }
        }
    }
    let mut reps = vec![base];
    for (pi, e) in split {
        let conj = (pi.0, -pi.1);
        let mut next = Vec::with_capacity(reps.len() * (e as usize + 1));
        for &r in &reps {
            // r · π^j · π̄^(e−j), j = 0..=e
            let mut left = r;
            for _ in 0..e {
                left = gmul(left, conj);
            }
            let mut cur = left;
            next.push(cur);
            for _ in 0..e {
                // Replace one π̄ by π: multiply by π/π̄ = π²/p.
                cur = gmul(cur, pi);
                cur = gmul(cur, pi);
                let p = pi.0 * pi.0 + pi.1 * pi.1;
                cur = (cur.0 / p, cur.1 / p);
                next.push(cur);
            }
        }
        reps = next;
    }
    for (a, b) in reps {
        out.extend_from_slice(&[(a, b), (-b, a), (-a, -b), (b, -a)]);
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Per-thread scratch state.
pub struct SquaresCtx<'a> {
    pub spf: &'a Spf,
    cache: HashMap<u64, Gauss>,
    factors: Vec<(u64, u32)>,
    reps: Vec<Gauss>,
    prefix: Vec<i64>,
}

impl<'a> SquaresCtx<'a> {
    pub fn new(spf: &'a Spf) -> Self {
        Self { spf, cache: HashMap::new(), factors: Vec::new(), reps: Vec::new(), prefix: Vec::new() }
    }

    /// Append all primitive solutions of `x_1² + … + x_k² = q²` (not sorted)
    /// as flat `k`-tuples.
    pub fn layer(&mut self, k: usize, q: u64, out: &mut Vec<i64>) {
        assert!(k >= 2);
        self.prefix.clear();
        self.rec(k, q, (q as u128 * q as u128) as u64, q, out);
    }

    fn rec(&mut self, k: usize, q: u64, rem: u64, g: u64, out: &mut Vec<i64>) {
        if self.prefix.len() + 2 == k {
            self.two(rem, q, g, out);
            return;
        }
        let b = (rem as f64).sqrt() as i64 + 1;
        for x in -b..=b {
            let xx = (x * x) as u64;
            if xx > rem {
                continue;
            }
            self.prefix.push(x);
            self.rec(k, q, rem - xx, gcd(g, x.unsigned_abs()), out);
            self.prefix.pop();
        }
    }

    /// Close the last two coordinates: `a² + b² = rem`.
    fn two(&mut self, rem: u64, q: u64, g: u64, out: &mut Vec<i64>) {
        if rem == 0 {
            if g == 1 {
                out.extend_from_slice(&self.prefix);
                out.extend_from_slice(&[0, 0]);
            }
            return;
        }
        self.factors.clear();
        if self.prefix.is_empty() {
            // rem = q²
            self.spf.factor_into(q, &mut self.factors);
            for f in &mut self.factors {
                f.1 *= 2;
            }
        } else if self.prefix.len() == 1 {
            // rem = (q − x)(q + x)
            let x = self.prefix[0];
            self.spf.factor_into((q as i64 - x) as u64, &mut self.factors);
            self.spf.factor_into((q as i64 + x) as u64, &mut self.factors);
        } else {
            self.spf.factor_into(rem, &mut self.factors);
        }
        self.reps.clear();
        two_square_reps(&self.factors, &mut self.cache, &mut self.reps);
        for &(a, b) in &self.reps {
            if gcd(gcd(g, a.unsigned_abs()), b.unsigned_abs()) == 1 {
                out.extend_from_slice(&self.prefix);
                out.extend_from_slice(&[a, b]);
            }
        }
    }
}

/// Sieve size the fast path needs for layers up to `q_max` with `k`
/// coordinates.
pub fn sieve_limit(k: usize, q_max: u64) -> usize {
    match k {
        2 | 3 => (2 * q_max + 2) as usize,
        // Remainders go up to q², factored by trial division past the table;
        // primes up to q cover every composite below q².
        _ => ((q_max as u128 * q_max as u128).min(1 << 22) as usize).max(q_max as usize + 2),
    }
}
