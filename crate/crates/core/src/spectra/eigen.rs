//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form,
//! then QL iteration with implicit Wilkinson-style shifts.

use crate::error::{Error, Result};

/// Eigenvalues of the symmetric `n x n` row-major matrix `a`, ascending.
///
/// Only the lower triangle is read. Fails if QL needs more than `30 n`
/// iterations in total.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix is not n x n");
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tridiagonal_ql(&mut d, &mut e, 30 * n)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Householder reduction. Returns the diagonal and the subdiagonal, the
/// latter stored in `e[1..]` with `e[0] = 0`.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let idx = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[idx(i, i)];
    }
    e[0] = 0.0;
    (d, e)
}

/// QL with implicit shifts on a symmetric tridiagonal matrix, in place.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], budget: usize) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut spent = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            spent += 1;
            if spent > budget {
                return Err(Error::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn small_closed_forms() {
        assert!(symmetric_eigenvalues(vec![], 0).unwrap().is_empty());
        assert_eq!(symmetric_eigenvalues(vec![4.0], 1).unwrap(), vec![4.0]);
        let w = 3.0;
        let got = symmetric_eigenvalues(vec![0.0, w, w, 0.0], 2).unwrap();
        assert!(close(&got, &[-w, w], 1e-12));

        let jmi = vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let got = symmetric_eigenvalues(jmi, 3).unwrap();
        assert!(close(&got, &[-1.0, -1.0, 2.0], 1e-10));

        // Path-like tridiagonal with 2 on the diagonal: 2 - sqrt 2, 2, 2 + sqrt 2.
        let m = vec![2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let s = 2f64.sqrt();
        let got = symmetric_eigenvalues(m, 3).unwrap();
        assert!(close(&got, &[2.0 - s, 2.0, 2.0 + s], 1e-10));
    }

    #[test]
    fn zero_matrix() {
        let got = symmetric_eigenvalues(vec![0.0; 25], 5).unwrap();
        assert_eq!(got, vec![0.0; 5]);
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let mut m = vec![0.0; 16];
        for (i, v) in [3.0, -1.0, 7.0, 0.5].into_iter().enumerate() {
            m[i * 4 + i] = v;
        }
        assert_eq!(symmetric_eigenvalues(m, 4).unwrap(), vec![-1.0, 0.5, 3.0, 7.0]);
    }
}
