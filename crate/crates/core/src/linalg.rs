//! Fixed-size 6×6 helpers for the Jacobian and the IK step.

/// Row-major 6×6 matrix.
pub type Mat6 = [[f64; 6]; 6];

/// `J Jᵀ + λ² I`.
pub(crate) fn damped_gram(j: &Mat6, lambda: f64) -> Mat6 {
    let mut out = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in r..6 {
            let mut s = 0.0;
            for k in 0..6 {
                s += j[r][k] * j[c][k];
            }
            if r == c {
                s += lambda * lambda;
            }
            out[r][c] = s;
            out[c][r] = s;
        }
    }
    out
}

/// Solves `a · x = b` for symmetric positive-definite `a` by Cholesky.
/// Returns `None` if `a` is not numerically positive definite.
pub(crate) fn solve_spd(a: &Mat6, b: &[f64; 6]) -> Option<[f64; 6]> {
    let mut l = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = crate::math::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; 6];
    for i in 0..6 {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 6];
    for i in (0..6).rev() {
        let mut s = y[i];
        for k in i + 1..6 {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// `Jᵀ · v`.
pub(crate) fn transpose_mul(j: &Mat6, v: &[f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (c, o) in out.iter_mut().enumerate() {
        for (r, vr) in v.iter().enumerate() {
            *o += j[r][c] * vr;
        }
    }
    out
}
