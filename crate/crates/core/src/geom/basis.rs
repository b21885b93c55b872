//! B-spline basis evaluation: knot-span search, the triangular Cox–de Boor
//! scheme and basis derivatives.

use super::{GeomError, KnotVector};

/// Index `s` with `knots[s] <= u < knots[s + 1]`, restricted to the active
/// spans `p..=n`. At the right end of the domain the last non-empty span is
/// returned so that `u == b` evaluates left-continuously.
pub fn find_span(knots: &KnotVector, degree: usize, u: f64) -> Result<usize, GeomError> {
    let k = knots.as_slice();
    let n = k.len() - degree - 2;
    let (lo, hi) = (k[degree], k[n + 1]);
    if !(u >= lo && u <= hi) {
        return Err(GeomError::Domain { u, lo, hi });
    }
    if u >= hi {
        // last span with positive length
        let mut s = n;
        while s > degree && k[s] >= k[s + 1] {
            s -= 1;
        }
        return Ok(s);
    }
    let (mut low, mut high) = (degree, n + 1);
    let mut mid = (low + high) / 2;
    while u < k[mid] || u >= k[mid + 1] {
        if u < k[mid] {
            high = mid;
        } else {
            low = mid;
        }
        mid = (low + high) / 2;
    }
    Ok(mid)
}

/// The `degree + 1` basis values that can be nonzero in `span`, ordered as
/// `N[span - degree] ..= N[span]`.
pub fn basis_in_span(knots: &KnotVector, span: usize, degree: usize, u: f64) -> Vec<f64> {
    let k = knots.as_slice();
    let mut n = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = u - k[span + 1 - j];
        right[j] = k[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        n[j] = saved;
    }
    n
}

/// Nonzero basis functions at `u` as `(index, value)` pairs.
pub fn basis_functions(
    u: f64,
    degree: usize,
    knots: &KnotVector,
) -> Result<Vec<(usize, f64)>, GeomError> {
    knots.check_degree(degree)?;
    let span = find_span(knots, degree, u)?;
    let values = basis_in_span(knots, span, degree, u);
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(r, v)| (span - degree + r, v))
        .collect())
}

/// Basis values and derivatives up to `order` in `span`; `ders[k][r]` is the
/// k-th derivative of `N[span - degree + r]`.
pub fn basis_derivatives_in_span(
    knots: &KnotVector,
    span: usize,
    degree: usize,
    u: f64,
    order: usize,
) -> Vec<Vec<f64>> {
    let k = knots.as_slice();
    let p = degree;
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = u - k[span + 1 - j];
        right[j] = k[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            // lower triangle holds knot differences
            ndu[j][r] = right[r + 1] + left[j - r];
            let tmp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; order + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for kk in 1..=order.min(p) {
            let mut d = 0.0;
            let rk = r as isize - kk as isize;
            let pk = p - kk;
            if r >= kk {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { kk - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                d += a[s2][kk] * ndu[r][pk];
            }
            ders[kk][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for kk in 1..=order {
        for v in ders[kk].iter_mut() {
            *v *= factor;
        }
        factor *= p.saturating_sub(kk) as f64;
    }
    ders
}
