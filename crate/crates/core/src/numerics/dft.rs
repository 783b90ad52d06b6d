use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{dim_err, size_err, Result};

/// Signals up to this length use the direct `O(T²)` sum; longer ones go through an FFT.
pub const NAIVE_DFT_MAX_LEN: usize = 4096;

/// Non-redundant half of the DFT of a real signal: bins `0..=⌊T/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    /// Length `T` of the signal that produced the spectrum.
    pub signal_len: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexSpectrum {
    pub fn bins(&self) -> usize {
        self.re.len()
    }

    pub fn magnitude(&self, k: usize) -> f64 {
        self.re[k].hypot(self.im[k])
    }
}

/// `X[k] = Σ_t x[t]·e^{-2πi kt/T}` for `k = 0..=⌊T/2⌋`.
pub fn rdft(x: &[f64]) -> Result<ComplexSpectrum> {
    let n = x.len();
    if n < 2 {
        return size_err(format!("rdft needs at least 2 samples, got {n}"));
    }
    let bins = n / 2 + 1;
    let (mut re, mut im) = if n <= NAIVE_DFT_MAX_LEN { naive(x, bins) } else { fft(x, bins) };
    // exact zeros where real input forces them
    im[0] = 0.0;
    if n % 2 == 0 {
        im[bins - 1] = 0.0;
    }
    re.truncate(bins);
    im.truncate(bins);
    Ok(ComplexSpectrum { signal_len: n, re, im })
}

/// Inverse of [`rdft`].
pub fn irdft(spec: &ComplexSpectrum) -> Result<Vec<f64>> {
    let n = spec.signal_len;
    let bins = n / 2 + 1;
    if n < 2 || spec.re.len() != bins || spec.im.len() != bins {
        return dim_err(format!(
            "spectrum with {} bins does not match signal length {n}",
            spec.re.len()
        ));
    }
    if n > NAIVE_DFT_MAX_LEN {
        return ifft(spec);
    }
    let table = twiddles(n);
    let nyquist = if n % 2 == 0 { Some(bins - 1) } else { None };
    let out = (0..n)
        .map(|t| {
            let mut acc = spec.re[0];
            for k in 1..bins {
                let idx = (k * t) % n;
                let (c, s) = table[idx];
                let term = spec.re[k] * c - spec.im[k] * s;
                acc += if Some(k) == nyquist { term } else { 2.0 * term };
            }
            acc / n as f64
        })
        .collect();
    Ok(out)
}

fn twiddles(n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|j| {
        let a = TAU * j as f64 / n as f64;
        (a.cos(), a.sin())
    })
    .collect()
}

fn naive(x: &[f64], bins: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let table = twiddles(n);
    let mut re = vec![0.0; bins];
    let mut im = vec![0.0; bins];
    for k in 0..bins {
        let (mut sr, mut si) = (0.0, 0.0);
        for (t, &v) in x.iter().enumerate() {
            let (c, s) = table[(k * t) % n];
            sr += v * c;
            si -= v * s;
        }
        re[k] = sr;
        im[k] = si;
    }
    (re, im)
}

fn fft(x: &[f64], bins: usize) -> (Vec<f64>, Vec<f64>) {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut buf);
    buf.truncate(bins);
    (buf.iter().map(|z| z.re).collect(), buf.iter().map(|z| z.im).collect())
}

fn ifft(spec: &ComplexSpectrum) -> Result<Vec<f64>> {
    let n = spec.signal_len;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..spec.bins() {
        buf[k] = Complex64::new(spec.re[k], spec.im[k]);
        if k != 0 && n - k != k {
            buf[n - k] = Complex64::new(spec.re[k], -spec.im[k]);
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|z| z.re / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn constant_is_dc_only() {
        let s = rdft(&[2.5; 8]).unwrap();
        assert_eq!(s.bins(), 5);
        assert!((s.re[0] - 20.0).abs() < 1e-12);
        for k in 1..5 {
            assert!(s.re[k].abs() < 1e-12 && s.im[k].abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_lands_in_its_bin() {
        let x: Vec<f64> = (0..16).map(|t| (TAU * 2.0 * t as f64 / 16.0).cos()).collect();
        let s = rdft(&x).unwrap();
        for k in 0..s.bins() {
            let want = if k == 2 { 8.0 } else { 0.0 };
            assert!((s.re[k] - want).abs() < 1e-9 && s.im[k].abs() < 1e-9, "bin {k}");
        }
    }

    #[test]
    fn round_trip_odd_length() {
        let mut rng = Rng::new(5);
        let x: Vec<f64> = (0..33).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let back = irdft(&rdft(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn too_short() {
        assert!(matches!(rdft(&[1.0]), Err(crate::Error::Size(_))));
    }

    #[test]
    fn long_signal_takes_fft_path() {
        let mut rng = Rng::new(8);
        let n = NAIVE_DFT_MAX_LEN + 6;
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let s = rdft(&x).unwrap();
        let (re, im) = naive(&x, n / 2 + 1);
        for k in 0..s.bins() {
            assert!((s.re[k] - re[k]).abs() < 1e-8 && (s.im[k] - im[k]).abs() < 1e-8);
        }
        let back = irdft(&s).unwrap();
        assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}
