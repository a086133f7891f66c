//! Naive oracle: every integer point of the box `|p_i| ≤ B_i` is tested.
//!
//! `B_i = ⌈q·sqrt((A⁻¹)_ii)⌉ + 1` bounds coordinate `i` on the ellipsoid
//! `𝒬(p) = q²`. The innermost coordinate updates the form value in O(1),
//! so the cost is one multiply-add per box point.

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::quadform::EllipsoidForm;

/// Per-coordinate box half-widths for the layer `q`.
pub fn box_bounds(form: &EllipsoidForm, q: u64) -> Vec<i64> {
    let inv = form.a_f64().clone().try_inverse().expect("positive definite");
    (0..=form.n()).map(|i| (q as f64 * inv[(i, i)].max(0.0).sqrt()).ceil() as i64 + 1).collect()
}

/// Primitive solutions of `𝒬(p) = q²` in lexicographic order.
pub fn brute_force_layer(form: &EllipsoidForm, q: u64) -> Vec<Vec<i64>> {
    let k = form.n() + 1;
    let a: Vec<Vec<i128>> = form
        .a_int()
        .iter()
        .map(|r| r.iter().map(|x| x.to_i128().expect("small Gram matrix")).collect())
        .collect();
    let target = form.scale().to_i128().expect("small scale") * (q as i128) * (q as i128);
    let bounds = box_bounds(form, q);
    let mut out = Vec::new();
    let mut x = vec![0i64; k];
    // lin[j] = Σ_{i fixed} 2 a_ij x_i, for the coordinates still free.
    let mut lin = vec![0i128; k];
    rec(0, 0, &a, &bounds, target, q, &mut x, &mut lin, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn rec(
    i: usize,
    partial: i128,
    a: &[Vec<i128>],
    bounds: &[i64],
    target: i128,
    q: u64,
    x: &mut [i64],
    lin: &mut [i128],
    out: &mut Vec<Vec<i64>>,
) {
    let k = x.len();
    let b = bounds[i];
    if i + 1 == k {
        let (l, aii) = (lin[i], a[i][i]);
        let bb = b as i128;
        let reach = partial.abs() + bb * l.abs() + aii.abs() * bb * bb + target.abs() + 4 * aii.abs() * bb + l.abs();
        if reach < (1i128 << 62) {
            // Same scan in i64, stepping the quadratic by finite differences.
            let (t, l, aii) = (target as i64, l as i64, aii as i64);
            let mut val = partial as i64 - b * l + aii * b * b;
            let mut step = l + aii * (1 - 2 * b);
            for xi in -b..=b {
                if val == t {
                    x[i] = xi;
                    let g = x.iter().fold(q as i64, |g, &c| g.gcd(&c));
                    if g == 1 {
                        out.push(x.to_vec());
                    }
                }
                val += step;
                step += 2 * aii;
            }
            return;
        }
        for xi in -b..=b {
            let v = xi as i128;
            if partial + v * l + aii * v * v == target {
                x[i] = xi;
                let g = x.iter().fold(q as i64, |g, &c| g.gcd(&c));
                if g == 1 {
                    out.push(x.to_vec());
                }
            }
        }
        return;
    }
    for xi in -b..=b {
        let v = xi as i128;
        x[i] = xi;
        let p = partial + v * lin[i] + a[i][i] * v * v;
        for j in i + 1..k {
            lin[j] += 2 * a[i][j] * v;
        }
        rec(i + 1, p, a, bounds, target, q, x, lin, out);
        for j in i + 1..k {
            lin[j] -= 2 * a[i][j] * v;
        }
    }
}
