//! General dense complex eigenvalues: Householder reduction to upper
//! Hessenberg form, then single-shift implicit QR with Givens rotations.
//!
//! Only eigenvalues are produced, so every QR sweep touches the active
//! window alone.

use num_complex::Complex64;

use crate::CMatrix;

pub const DEFAULT_MAX_DIM: usize = 4096;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {dim} exceeds the configured cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge: {converged} of {dim} eigenvalues found")]
    NoConvergence { converged: usize, dim: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub max_dim: usize,
    /// QR sweeps allowed before a single eigenvalue must deflate.
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, EigenError> {
    eigenvalues_with(m, EigenOptions::default())
}

pub fn eigenvalues_with(m: &CMatrix, opts: EigenOptions) -> Result<Vec<Complex64>, EigenError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(EigenError::NotSquare { rows, cols });
    }
    if rows > opts.max_dim {
        return Err(EigenError::TooLarge {
            dim: rows,
            cap: opts.max_dim,
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let n = rows;
    let mut a = Dense {
        n,
        data: m.as_slice().to_vec(),
    };
    reduce_to_hessenberg(&mut a);
    hessenberg_qr(&mut a, opts.max_iterations)
}

/// Column-major scratch matrix.
struct Dense {
    n: usize,
    data: Vec<Complex64>,
}

impl Dense {
    #[inline(always)]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + j * self.n]
    }

    #[inline(always)]
    fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i + j * self.n] = z;
    }
}

#[inline(always)]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

fn reduce_to_hessenberg(a: &mut Dense) {
    let n = a.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut w = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let tail_sq: f64 = (k + 2..n).map(|i| a.at(i, k).norm_sqr()).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let x0 = a.at(k + 1, k);
        let xnorm = (x0.norm_sqr() + tail_sq).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let beta = -phase * xnorm;
        v[0] = x0 - beta;
        for (i, vi) in v.iter_mut().enumerate().take(len).skip(1) {
            *vi = a.at(k + 1 + i, k);
        }
        let tau = 2.0 / (v[0].norm_sqr() + tail_sq);

        // P = I - tau v v^H from the left, columns k+1.. (column k is set directly)
        a.set(k + 1, k, beta);
        for i in k + 2..n {
            a.set(i, k, zero);
        }
        for j in k + 1..n {
            let col = &mut a.data[j * n + k + 1..(j + 1) * n];
            let dot: Complex64 = v[..len].iter().zip(col.iter()).map(|(vi, x)| vi.conj() * x).sum();
            let f = dot * tau;
            for (x, vi) in col.iter_mut().zip(&v[..len]) {
                *x -= vi * f;
            }
        }

        // and from the right, all rows
        w.iter_mut().for_each(|x| *x = zero);
        for (i, vi) in v[..len].iter().enumerate() {
            let col = &a.data[(k + 1 + i) * n..(k + 2 + i) * n];
            for (wr, x) in w.iter_mut().zip(col) {
                *wr += x * vi;
            }
        }
        for (i, vi) in v[..len].iter().enumerate() {
            let f = vi.conj() * tau;
            let col = &mut a.data[(k + 1 + i) * n..(k + 2 + i) * n];
            for (x, wr) in col.iter_mut().zip(&w) {
                *x -= wr * f;
            }
        }
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G·(x, y)ᵀ = (r, 0)ᵀ`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let rho = ax.hypot(ay);
    (ax / rho, (x / ax) * y.conj() / rho)
}

#[inline]
fn rotate_rows(a: &mut Dense, k: usize, cols: std::ops::RangeInclusive<usize>, c: f64, s: Complex64) {
    for j in cols {
        let t1 = a.at(k, j);
        let t2 = a.at(k + 1, j);
        a.set(k, j, t1 * c + s * t2);
        a.set(k + 1, j, -s.conj() * t1 + t2 * c);
    }
}

#[inline]
fn rotate_cols(a: &mut Dense, k: usize, rows: std::ops::RangeInclusive<usize>, c: f64, s: Complex64) {
    let n = a.n;
    let (left, right) = a.data.split_at_mut((k + 1) * n);
    let ck = &mut left[k * n..];
    let ck1 = &mut right[..n];
    for i in rows {
        let t1 = ck[i];
        let t2 = ck1[i];
        ck[i] = t1 * c + s.conj() * t2;
        ck1[i] = -s * t1 + t2 * c;
    }
}

fn wilkinson_shift(a: &Dense, hi: usize) -> Complex64 {
    let mut t = a.at(hi, hi);
    let u = a.at(hi - 1, hi).sqrt() * a.at(hi, hi - 1).sqrt();
    let mut s = abs1(u);
    if s != 0.0 {
        let x = 0.5 * (a.at(hi - 1, hi - 1) - t);
        let sx = abs1(x);
        s = s.max(sx);
        let mut y = s * ((x / s) * (x / s) + (u / s) * (u / s)).sqrt();
        if sx > 0.0 {
            let xs = x / sx;
            if xs.re * y.re + xs.im * y.im < 0.0 {
                y = -y;
            }
        }
        t -= u * (u / (x + y));
    }
    t
}

fn hessenberg_qr(a: &mut Dense, max_iterations: usize) -> Result<Vec<Complex64>, EigenError> {
    let n = a.n;
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let ulp = f64::EPSILON;
    let safe_min = f64::MIN_POSITIVE;
    let small = safe_min * (n as f64 / ulp);

    let mut hi = n - 1;
    loop {
        let mut its = 0usize;
        loop {
            // look for a negligible subdiagonal entry
            let mut l = 0;
            for k in (1..=hi).rev() {
                let sub = abs1(a.at(k, k - 1));
                if sub <= small {
                    l = k;
                    break;
                }
                let mut tst = abs1(a.at(k - 1, k - 1)) + abs1(a.at(k, k));
                if tst == 0.0 {
                    if k >= 2 {
                        tst += a.at(k - 1, k - 2).re.abs();
                    }
                    if k < hi {
                        tst += a.at(k + 1, k).re.abs();
                    }
                }
                if sub <= ulp * tst {
                    // Ahues & Tisseur conservative deflation
                    let up = abs1(a.at(k - 1, k));
                    let ab = sub.max(up);
                    let ba = sub.min(up);
                    let diff = abs1(a.at(k - 1, k - 1) - a.at(k, k));
                    let hk = abs1(a.at(k, k));
                    let aa = hk.max(diff);
                    let bb = hk.min(diff);
                    let s = aa + ab;
                    if ba * (ab / s) <= small.max(ulp * (bb * (aa / s))) {
                        l = k;
                        break;
                    }
                }
            }
            if l > 0 {
                a.set(l, l - 1, Complex64::new(0.0, 0.0));
            }
            if l == hi {
                eig[hi] = a.at(hi, hi);
                break;
            }
            if its >= max_iterations {
                return Err(EigenError::NoConvergence {
                    converged: n - 1 - hi,
                    dim: n,
                });
            }
            its += 1;

            let shift = if its == 10 {
                a.at(l, l) + 0.75 * a.at(l + 1, l).re.abs()
            } else if its == 20 {
                a.at(hi, hi) + 0.75 * a.at(hi, hi - 1).re.abs()
            } else {
                wilkinson_shift(a, hi)
            };

            // implicit single-shift sweep over [l, hi]
            let (c, s) = givens(a.at(l, l) - shift, a.at(l + 1, l));
            rotate_rows(a, l, l..=hi, c, s);
            rotate_cols(a, l, l..=(l + 2).min(hi), c, s);
            for k in l + 1..hi {
                let (c, s) = givens(a.at(k, k - 1), a.at(k + 1, k - 1));
                rotate_rows(a, k, (k - 1)..=hi, c, s);
                a.set(k + 1, k - 1, Complex64::new(0.0, 0.0));
                rotate_cols(a, k, l..=(k + 2).min(hi), c, s);
            }
        }
        if hi == 0 {
            break;
        }
        hi -= 1;
    }
    Ok(eig)
}
