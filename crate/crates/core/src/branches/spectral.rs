use crate::error::{size_err, Result};
use crate::numerics::{irdft, rdft, ComplexSpectrum};
use crate::scan::ScanState;
use crate::series::MultivariateSeries;

fn check_len(steps: usize) -> Result<()> {
    if steps < 4 || steps % 2 != 0 {
        return size_err(format!(
            "spectral packing needs an even length of at least 4, got {steps}; pad or trim the series by one step"
        ));
    }
    Ok(())
}

/// Per variable: `[Re X_0 … Re X_{T/2}, Im X_1 … Im X_{T/2−1}]`, exactly `T` entries.
pub fn spectral_transform(x: &MultivariateSeries) -> Result<MultivariateSeries> {
    let steps = x.steps();
    check_len(steps)?;
    let half = steps / 2;
    let mut out = MultivariateSeries::zeros(x.vars(), steps);
    for c in 0..x.vars() {
        let spec = rdft(x.row(c))?;
        let row = out.row_mut(c);
        row[..=half].copy_from_slice(&spec.re);
        row[half + 1..].copy_from_slice(&spec.im[1..half]);
    }
    Ok(out)
}

/// Inverse of [`spectral_transform`].
pub fn inverse_spectral_transform(packed: &MultivariateSeries) -> Result<MultivariateSeries> {
    let steps = packed.steps();
    check_len(steps)?;
    let half = steps / 2;
    let mut out = MultivariateSeries::zeros(packed.vars(), steps);
    for c in 0..packed.vars() {
        let row = packed.row(c);
        let mut im = vec![0.0; half + 1];
        im[1..half].copy_from_slice(&row[half + 1..]);
        let spec = ComplexSpectrum { signal_len: steps, re: row[..=half].to_vec(), im };
        out.row_mut(c).copy_from_slice(&irdft(&spec)?);
    }
    Ok(out)
}

/// Frequency bin held by position `index` of a packed row of length `steps`.
pub fn packed_bin(index: usize, steps: usize) -> usize {
    let half = steps / 2;
    if index <= half {
        index
    } else {
        index - half
    }
}

/// State change per frequency bin of a scan along the packed axis.
///
/// Position `k` contributes `Σ_c ‖h[k] − h[k−1]‖₂` (with `h[−1]` the zero state) to its bin;
/// the real and imaginary slots of a bin are summed.
pub fn spectral_activity(states: &[ScanState]) -> Vec<f64> {
    let steps = states.len();
    let mut bins = vec![0.0; steps / 2 + 1];
    for (k, s) in states.iter().enumerate() {
        let mut total = 0.0;
        for c in 0..s.vars() {
            let diff = |now: &[f64], before: Option<&[f64]>| -> f64 {
                now.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let d = v - before.map_or(0.0, |b| b[i]);
                        d * d
                    })
                    .sum::<f64>()
            };
            let prev = k.checked_sub(1).map(|p| &states[p]);
            let sq = diff(s.h_h_row(c), prev.map(|p| p.h_h_row(c))) + diff(s.h_v_row(c), prev.map(|p| p.h_v_row(c)));
            total += sq.sqrt();
        }
        bins[packed_bin(k, steps)] += total;
    }
    bins
}
