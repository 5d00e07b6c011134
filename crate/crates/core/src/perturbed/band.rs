//! Symmetric banded matrices: Givens reduction to tridiagonal form, Sturm
//! bisection, and a banded LU with partial pivoting for inverse iteration.

/// Symmetric matrix with `diags[d][i] = A(i, i + d)`, `d ≤ bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    diags: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn new(n: usize, bandwidth: usize) -> Self {
        let diags = (0..=bandwidth).map(|d| vec![0.0; n.saturating_sub(d)]).collect();
        Self { n, diags }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, d) = if i <= j { (i, j - i) } else { (j, i - j) };
        self.diags.get(d).map_or(0.0, |v| v[i])
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, d) = if i <= j { (i, j - i) } else { (j, i - j) };
        self.diags[d][i] = value;
    }

    pub fn add_diagonal(&mut self, i: usize, value: f64) {
        self.diags[0][i] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diags[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, band) in self.diags.iter().enumerate().skip(1) {
            for (i, a) in band.iter().enumerate() {
                y[i] += a * x[i + d];
                y[i + d] += a * x[i];
            }
        }
        y
    }

    /// Row-sum bound on `‖A‖₂`.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for (d, band) in self.diags.iter().enumerate() {
            for (i, a) in band.iter().enumerate() {
                rows[i] += a.abs();
                if d > 0 {
                    rows[i + d] += a.abs();
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Orthogonally similar tridiagonal matrix `(diagonal, off-diagonal)`,
    /// by Givens rotations with bulge chasing.
    pub fn tridiagonalize(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let b = self.bandwidth();
        if b <= 1 {
            return (self.diags[0].clone(), self.diags.get(1).cloned().unwrap_or_default());
        }
        // Lower storage with room for one bulge: w[i][d] = A(i, i − d).
        let width = b + 2;
        let mut w = vec![0.0; n * width];
        for i in 0..n {
            for d in 0..=b.min(i) {
                w[i * width + d] = self.get(i, i - d);
            }
        }
        let get = |w: &[f64], i: usize, j: usize| -> f64 {
            let (i, j) = if i >= j { (i, j) } else { (j, i) };
            let d = i - j;
            if d < width { w[i * width + d] } else { 0.0 }
        };
        let set = |w: &mut [f64], i: usize, j: usize, v: f64| {
            let (i, j) = if i >= j { (i, j) } else { (j, i) };
            let d = i - j;
            if d < width {
                w[i * width + d] = v;
            }
        };
        // Similarity by the rotation in plane (p, p+1) chosen to zero A(p+1, k0).
        let rotate = |w: &mut [f64], p: usize, k0: usize| -> bool {
            let q = p + 1;
            let (x, y) = (get(w, p, k0), get(w, q, k0));
            if y == 0.0 {
                return false;
            }
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            let lo = p.saturating_sub(width);
            let hi = (q + width).min(n - 1);
            for k in lo..=hi {
                if k == p || k == q {
                    continue;
                }
                let (a, bq) = (get(w, p, k), get(w, q, k));
                if a == 0.0 && bq == 0.0 {
                    continue;
                }
                set(w, p, k, c * a + s * bq);
                set(w, q, k, -s * a + c * bq);
            }
            let (app, apq, aqq) = (get(w, p, p), get(w, p, q), get(w, q, q));
            set(w, p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
            set(w, q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
            set(w, p, q, c * s * (aqq - app) + (c * c - s * s) * apq);
            set(w, q, k0, 0.0);
            true
        };
        for j in 0..n.saturating_sub(2) {
            // Clear column j below the subdiagonal, outermost entry first.
            for d in (2..=b).rev() {
                if j + d >= n {
                    continue;
                }
                let (mut p, mut k0) = (j + d - 1, j);
                if !rotate(&mut w, p, k0) {
                    continue;
                }
                // The rotation leaks into A(p + b + 1, p); chase it down.
                loop {
                    let bulge = p + b + 1;
                    if bulge >= n || get(&w, bulge, p) == 0.0 {
                        break;
                    }
                    k0 = p;
                    p = bulge - 1;
                    rotate(&mut w, p, k0);
                }
            }
        }
        let diag = (0..n).map(|i| w[i * width]).collect();
        let off = (1..n).map(|i| w[i * width + 1]).collect();
        (diag, off)
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(a, b)` below `sigma`.
pub fn sturm_count(a: &[f64], b2: &[f64], sigma: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = a[0] - sigma;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..a.len() {
        q = a[i] - sigma - b2[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of the tridiagonal `(a, b)` in `[lo, hi)` by bisection.
pub fn eigenvalues_in(a: &[f64], b: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let norm = a.iter().map(|v| v.abs()).fold(0.0, f64::max) + 2.0 * b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * norm.max(1.0));
    let b2: Vec<f64> = b.iter().map(|v| v * v).collect();
    let tol = 4.0 * f64::EPSILON * norm.max(1.0);
    let mut out = Vec::new();
    let (clo, chi) = (sturm_count(a, &b2, lo, pivmin), sturm_count(a, &b2, hi, pivmin));
    let mut stack = vec![(lo, hi, clo, chi)];
    while let Some((l, h, cl, ch)) = stack.pop() {
        if ch <= cl {
            continue;
        }
        if h - l <= tol || h - l <= 2.0 * f64::EPSILON * l.abs().max(h.abs()) {
            out.extend(std::iter::repeat_n(0.5 * (l + h), ch - cl));
            continue;
        }
        let m = 0.5 * (l + h);
        let cm = sturm_count(a, &b2, m, pivmin);
        stack.push((m, h, cm, ch));
        stack.push((l, m, cl, cm));
    }
    out.sort_by(f64::total_cmp);
    out
}

/// LU factors of `A − σI` with partial pivoting, for banded `A` with `k`
/// sub- and superdiagonals. U has bandwidth `2k`.
pub struct BandLu {
    n: usize,
    k: usize,
    width: usize,
    /// Row at position `t` covers columns `[t − k, t − k + width)`.
    rows: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn factor(m: &SymBand, sigma: f64) -> Self {
        let n = m.n();
        let k = m.bandwidth();
        let width = 3 * k + 1;
        let mut rows = vec![0.0; n * width];
        for t in 0..n {
            for c in t.saturating_sub(k)..=(t + k).min(n - 1) {
                let v = m.get(t, c) - if c == t { sigma } else { 0.0 };
                rows[t * width + (c + k - t)] = v;
            }
        }
        let tiny = f64::EPSILON * m.norm_bound().max(1.0);
        let mut lu = Self { n, k, width, rows, mult: vec![0.0; n * k], piv: vec![0; n] };
        for i in 0..n {
            let last = (i + k).min(n - 1);
            let mut p = i;
            for t in i + 1..=last {
                if lu.at(t, i).abs() > lu.at(p, i).abs() {
                    p = t;
                }
            }
            lu.piv[i] = p;
            if p != i {
                lu.swap_rows(i, p);
            }
            if lu.at(i, i).abs() < tiny {
                lu.put(i, i, tiny);
            }
            let pivot = lu.at(i, i);
            for t in i + 1..=last {
                let l = lu.at(t, i) / pivot;
                lu.mult[i * k + (t - i - 1)] = l;
                if l == 0.0 {
                    continue;
                }
                lu.put(t, i, 0.0);
                for c in i + 1..=(i + 2 * k).min(n - 1) {
                    let v = lu.at(t, c) - l * lu.at(i, c);
                    lu.put(t, c, v);
                }
            }
        }
        lu
    }

    fn at(&self, t: usize, c: usize) -> f64 {
        if c + self.k < t || c + self.k - t >= self.width {
            return 0.0;
        }
        self.rows[t * self.width + c + self.k - t]
    }

    fn put(&mut self, t: usize, c: usize, v: f64) {
        let off = c + self.k - t;
        self.rows[t * self.width + off] = v;
    }

    /// Exchanges rows at positions `i < p`, re-basing both windows.
    fn swap_rows(&mut self, i: usize, p: usize) {
        let lo = i.saturating_sub(self.k);
        let hi = (i + 2 * self.k).min(self.n - 1);
        let ri: Vec<f64> = (lo..=hi).map(|c| self.at(i, c)).collect();
        let rp: Vec<f64> = (lo..=hi).map(|c| self.at(p, c)).collect();
        self.rows[i * self.width..(i + 1) * self.width].fill(0.0);
        self.rows[p * self.width..(p + 1) * self.width].fill(0.0);
        for (j, c) in (lo..=hi).enumerate() {
            if rp[j] != 0.0 {
                self.put(i, c, rp[j]);
            }
            if ri[j] != 0.0 {
                self.put(p, c, ri[j]);
            }
        }
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        let (n, k) = (self.n, self.k);
        for i in 0..n {
            let p = self.piv[i];
            if p != i {
                rhs.swap(i, p);
            }
            for t in i + 1..=(i + k).min(n - 1) {
                rhs[t] -= self.mult[i * k + (t - i - 1)] * rhs[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for c in i + 1..=(i + 2 * k).min(n - 1) {
                s -= self.at(i, c) * rhs[c];
            }
            rhs[i] = s / self.at(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sample(n: usize, b: usize) -> SymBand {
        let mut m = SymBand::new(n, b);
        for i in 0..n {
            for d in 0..=b {
                if i + d < n {
                    let v = ((i * 7 + d * 13) as f64 * 0.37).sin() + if d == 0 { 2.0 } else { 0.0 };
                    m.set(i, i + d, v);
                }
            }
        }
        m
    }

    fn dense(m: &SymBand) -> DMatrix<f64> {
        DMatrix::from_fn(m.n(), m.n(), |i, j| m.get(i, j))
    }

    #[test]
    fn tridiagonal_form_keeps_spectrum() {
        for b in [2, 3] {
            let m = sample(40, b);
            let mut reference: Vec<f64> = dense(&m).symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            let (a, off) = m.tridiagonalize();
            let got = eigenvalues_in(&a, &off, -100.0, 100.0);
            assert_eq!(got.len(), 40);
            for (x, y) in got.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn band_lu_solves() {
        let m = sample(30, 2);
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).cos()).collect();
        let sigma = 0.7;
        let mut rhs: Vec<f64> = m.mul_vec(&x).iter().zip(&x).map(|(y, x)| y - sigma * x).collect();
        BandLu::factor(&m, sigma).solve(&mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn window_count_matches() {
        let m = sample(50, 2);
        let (a, off) = m.tridiagonalize();
        let all = eigenvalues_in(&a, &off, -100.0, 100.0);
        let part = eigenvalues_in(&a, &off, 0.5, 2.5);
        assert_eq!(part.len(), all.iter().filter(|&&v| (0.5..2.5).contains(&v)).count());
    }
}
