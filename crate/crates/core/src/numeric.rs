//! Small scalar routines shared by the solvers: bracketed root finding,
//! golden-section minimization, phase wrapping and n-d FFTs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Brent's method on a bracket `[a, b]` with `f(a)·f(b) ≤ 0`.
///
/// Each iteration costs exactly one evaluation, which matters here because
/// evaluations are determinants or ODE solves. Returns `None` when the
/// bracket does not straddle a sign change.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let (fa, fb) = (f(a), f(b));
    brent_with_values(&mut f, a, fa, b, fb, xtol)
}

/// Same as [`brent`] but reuses already computed end values.
pub fn brent_with_values<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    xtol: f64,
) -> Option<f64> {
    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > xtol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut w = phi % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Maps an FFT bin index to its signed frequency.
pub fn signed_frequency(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// In-place unnormalized FFT along every axis of a row-major cube with
/// `n` points per axis (last axis fastest).
pub fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    assert_eq!(data.len(), n.pow(dim as u32));
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        for base in 0..data.len() {
            // Only start lines at indices whose coordinate on `axis` is 0.
            if (base / stride) % n != 0 {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[base + t * stride];
            }
            fft.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                data[base + t * stride] = *v;
            }
        }
    }
}

/// Row-major multi-index for a flat index in a cube with `n` points per axis.
pub fn unravel(mut flat: usize, n: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; dim];
    for d in (0..dim).rev() {
        idx[d] = flat % n;
        flat /= n;
    }
    idx
}
