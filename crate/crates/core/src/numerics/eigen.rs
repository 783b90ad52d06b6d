use super::Matrix;
use crate::error::{dim_err, size_err, Error, Result};

/// Largest matrix order accepted by [`eigenvalues`].
pub const MAX_EIGEN_ORDER: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn exp(self) -> Self {
        let m = self.re.exp();
        Self { re: m * self.im.cos(), im: m * self.im.sin() }
    }
}

/// All eigenvalues of a square matrix, in no particular order.
///
/// Symmetric input goes through cyclic Jacobi rotations, so its eigenvalues come back exactly
/// real. Everything else is reduced to Hessenberg form and iterated with Francis double-shift
/// QR steps; the iteration budget is `100·n` sweeps.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex>> {
    if !a.is_square() {
        return dim_err(format!("eigenvalues need a square matrix, got {}×{}", a.rows(), a.cols()));
    }
    let n = a.rows();
    if n > MAX_EIGEN_ORDER {
        return size_err(format!("order {n} exceeds {MAX_EIGEN_ORDER}"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if a.is_symmetric(1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return jacobi(a).map(|v| v.into_iter().map(|re| Complex::new(re, 0.0)).collect());
    }
    let mut h = rows_of(a);
    hessenberg(&mut h);
    hqr(&mut h)
}

/// `max |λ|` over the eigenvalues.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    if a.is_diagonal() {
        return Ok(a.diagonal().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(eigenvalues(a)?.iter().fold(0.0, |m, z| m.max(z.abs())))
}

fn rows_of(a: &Matrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

fn jacobi(a: &Matrix) -> Result<Vec<f64>> {
    let n = a.rows();
    let mut m = rows_of(a);
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    let total: f64 = m.iter().flatten().map(|v| v * v).sum();
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off <= 1e-32 * total || off == 0.0 {
            return Ok((0..n).map(|i| m[i][i]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
            }
        }
    }
    let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[i][j] * m[i][j])
        .sum();
    Err(Error::Numerical {
        message: format!("Jacobi iteration did not converge in {max_sweeps} sweeps"),
        residual: off.sqrt(),
    })
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut [Vec<f64>]) {
    let n = h.len();
    let mut ort = vec![0.0; n];
    for m in 1..n.saturating_sub(1) {
        let scale: f64 = (m..n).map(|i| h[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut norm_sq = 0.0;
        for i in (m..n).rev() {
            ort[i] = h[i][m - 1] / scale;
            norm_sq += ort[i] * ort[i];
        }
        let mut g = norm_sq.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        norm_sq -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f = (m..n).rev().map(|i| ort[i] * h[i][j]).sum::<f64>() / norm_sq;
            for i in m..n {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut() {
            let f = (m..n).rev().map(|j| ort[j] * row[j]).sum::<f64>() / norm_sq;
            for j in m..n {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m][m - 1] = scale * g;
    }
}

/// Eigenvalues of an upper Hessenberg matrix by shifted double QR steps.
fn hqr(h: &mut [Vec<f64>]) -> Result<Vec<Complex>> {
    let nn = h.len();
    let eps = f64::EPSILON;
    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[i][j].abs();
        }
    }
    let budget = 100 * nn;
    let mut total_iter = 0usize;
    let mut exshift = 0.0;
    let mut iter = 0;
    let mut n = nn as isize - 1;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut x, mut y, mut w);

    while n >= 0 {
        let nu = n as usize;
        // find a negligible subdiagonal entry
        let mut l = nu;
        while l > 0 {
            s = h[l - 1][l - 1].abs() + h[l][l].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[l][l - 1].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            re[nu] = h[nu][nu] + exshift;
            im[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[nu][nu - 1] * h[nu - 1][nu];
            p = (h[nu - 1][nu - 1] - h[nu][nu]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[nu][nu] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = if z != 0.0 { x - w / z } else { x + z };
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            total_iter += 1;
            if total_iter > budget {
                return Err(Error::Numerical {
                    message: format!("QR iteration exceeded {budget} steps"),
                    residual: h[nu][nu - 1].abs(),
                });
            }
            x = h[nu][nu];
            y = h[nu - 1][nu - 1];
            w = h[nu][nu - 1] * h[nu - 1][nu];
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[i][i] -= x;
                }
                s = h[nu][nu - 1].abs() + h[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[i][i] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // look for two consecutive small subdiagonal entries
            let mut m = nu - 2;
            loop {
                z = h[m][m];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[m + 1][m] + h[m][m + 1];
                q = h[m + 1][m + 1] - z - r - s;
                r = h[m + 2][m + 1];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[m][m - 1].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[m - 1][m - 1].abs() + z.abs() + h[m + 1][m + 1].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[i][i - 2] = 0.0;
                if i > m + 2 {
                    h[i][i - 3] = 0.0;
                }
            }

            // double QR step on rows l..=n, columns m..=n
            let mut k = m;
            while k < nu {
                let notlast = k + 1 != nu;
                if k != m {
                    p = h[k][k - 1];
                    q = h[k + 1][k - 1];
                    r = if notlast { h[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[k][k - 1] = -s * x;
                    } else if l != m {
                        h[k][k - 1] = -h[k][k - 1];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[k][j] + q * h[k + 1][j];
                        if notlast {
                            p += r * h[k + 2][j];
                            h[k + 2][j] -= p * z;
                        }
                        h[k][j] -= p * x;
                        h[k + 1][j] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[i][k] + y * h[i][k + 1];
                        if notlast {
                            p += z * h[i][k + 2];
                            h[i][k + 2] -= p * r;
                        }
                        h[i][k] -= p;
                        h[i][k + 1] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(re.into_iter().zip(im).map(|(re, im)| Complex::new(re, im)).collect())
}
