//! Allocation-free kernels for the small `(p+1) × (p+1)` SPD systems of the
//! spectral paths. Matrices are row-major slices of length `d²`.

/// In-place lower Cholesky factor; returns `false` if not positive definite.
/// The strict upper triangle is left untouched.
pub(crate) fn cholesky_in_place(a: &mut [f64], d: usize) -> bool {
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if !(diag > 0.0) {
            return false;
        }
        let l_jj = diag.sqrt();
        a[j * d + j] = l_jj;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / l_jj;
        }
    }
    true
}

/// `log det` from a Cholesky factor.
pub(crate) fn logdet_from_factor(l: &[f64], d: usize) -> f64 {
    2.0 * (0..d).map(|i| l[i * d + i].ln()).sum::<f64>()
}

/// Inverse of `L Lᵀ` written densely (symmetric, row-major) into `out`;
/// `work` needs length `d`.
pub(crate) fn inverse_from_factor(l: &[f64], d: usize, out: &mut [f64], work: &mut [f64]) {
    for c in 0..d {
        // Solve L w = e_c.
        for i in 0..d {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i * d + k] * work[k];
            }
            work[i] = s / l[i * d + i];
        }
        // Solve Lᵀ x = w, writing column c.
        for i in (0..d).rev() {
            let mut s = work[i];
            for k in i + 1..d {
                s -= l[k * d + i] * out[k * d + c];
            }
            out[i * d + c] = s / l[i * d + i];
        }
    }
}

/// Solves `Lᵀ x = z` in place.
pub(crate) fn solve_upper_transpose(l: &[f64], d: usize, z: &mut [f64]) {
    for i in (0..d).rev() {
        let mut s = z[i];
        for k in i + 1..d {
            s -= l[k * d + i] * z[k];
        }
        z[i] = s / l[i * d + i];
    }
}
