use super::{FeatureSource, ScanSystem, VhLag};
use crate::aggregation::AggregatorKind;
use crate::error::{domain_err, Result};
use crate::numerics::{spectral_radius, Matrix};
use crate::ssm::{ContinuousSystem, DiscreteSystem};

/// System `(Ā_eff, B̄_eff)` with `h[t] = Ā_eff h[t−1] + B̄_eff u[t]` for the given lag.
///
/// With [`VhLag::Previous`] this is the discrete system itself. With [`VhLag::Current`] the
/// substitution of `h_h[t]` into the vertical update gives
/// `Ā_eff = [[Ā_h, 0], [Ā_vh Ā_h, Ā_v]]` and `B̄_eff = [[B̄_h], [Ā_vh B̄_h + B̄_v]]`.
pub fn effective_system(d: &DiscreteSystem, lag: VhLag) -> DiscreteSystem {
    if lag == VhLag::Previous {
        return d.clone();
    }
    let (ah, avh) = (d.a_h_bar(), d.a_vh_bar());
    let mut a = d.a_bar.clone();
    a.set_block(d.d_h, 0, &avh.matmul(&ah).expect("block shapes"));
    let bh = d.b_bar.block(0, d.d_h, 0, d.b_bar.cols());
    let bv = d.b_bar.block(d.d_h, d.state_dim(), 0, d.b_bar.cols());
    let mut b = d.b_bar.clone();
    b.set_block(d.d_h, 0, &avh.matmul(&bh).expect("block shapes").add(&bv).expect("block shapes"));
    DiscreteSystem { a_bar: a, b_bar: b, ..d.clone() }
}

/// Spectral radii of the two closed-loop modes of the ψ feedback.
///
/// Differences between variables evolve under `Ā_eff` alone; the variable mean also feels
/// the pooled feedback `κ B̄ψ_eff W_v S`, with `κ = 1` for mean pooling and `κ = C` for sum.
/// Attention is linearized at uniform weights, i.e. treated like the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRadii {
    pub difference: f64,
    pub mean: f64,
}

impl ModeRadii {
    pub fn is_stable(&self) -> bool {
        self.difference < 1.0 && self.mean < 1.0
    }
}

pub fn mode_radii(
    sys: &ScanSystem,
    kind: AggregatorKind,
    vars: usize,
    lag: VhLag,
    features: FeatureSource,
) -> Result<ModeRadii> {
    let d = &sys.discrete;
    let eff = effective_system(d, lag);
    let n = d.state_dim();
    let d_z = features.width(d.d_h, d.d_v);
    // S picks the state part of z; the input slot is an exogenous term.
    let mut select = Matrix::zeros(d_z, n);
    let picked = match features {
        FeatureSource::HorizontalAndInput => d.d_h,
        FeatureSource::AllStatesAndInput => n,
        FeatureSource::Input => 0,
    };
    for i in 0..picked {
        select.set_block(i, i, &Matrix::identity(1));
    }
    let kappa = match kind {
        AggregatorKind::Sum => vars as f64,
        _ => 1.0,
    };
    let feedback = eff.b_psi().matmul(&sys.w_v.matmul(&select)?)?.scale(kappa);
    Ok(ModeRadii {
        difference: spectral_radius(&eff.a_bar)?,
        mean: spectral_radius(&eff.a_bar.add(&feedback)?)?,
    })
}

/// Halves the ψ couplings of `sys` until the mean mode radius is below `target`.
///
/// When the open-loop radius already exceeds `target`, the goal becomes the midpoint between
/// that radius and 1.
///
/// Returns the rescaled system and the total factor applied.
pub fn shrink_global_coupling(
    sys: &ContinuousSystem,
    delta: f64,
    kind: AggregatorKind,
    vars: usize,
    features: FeatureSource,
    target: f64,
) -> Result<(ContinuousSystem, f64)> {
    let mut out = sys.clone();
    let mut factor = 1.0;
    for _ in 0..64 {
        let radii = mode_radii(&ScanSystem::new(&out, delta)?, kind, vars, VhLag::Current, features)?;
        if radii.difference >= 1.0 {
            return domain_err(format!("difference mode radius {} is not below 1", radii.difference));
        }
        let goal = if radii.difference < target { target } else { 0.5 * (1.0 + radii.difference) };
        if radii.mean < goal {
            return Ok((out, factor));
        }
        out.scale_global_coupling(0.5);
        factor *= 0.5;
    }
    domain_err("could not stabilize the pooled feedback")
}
