use crate::error::{dim_err, Result};
use crate::kv::KvDocument;
use crate::numerics::{eigenvalues, Matrix, Rng};

/// State, pooled-descriptor and pooled-feature widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    pub d_h: usize,
    pub d_v: usize,
    pub d_psi: usize,
    /// Width of the per-variable feature `z` that `W_v` projects.
    pub d_z: usize,
}

impl SystemDims {
    /// `d_h = d_v = d_psi = 8`, with `z = (h_h, x)`.
    pub const DEFAULT: SystemDims = SystemDims { d_h: 8, d_v: 8, d_psi: 8, d_z: 9 };

    pub fn state(&self) -> usize {
        self.d_h + self.d_v
    }
}

impl Default for SystemDims {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Every continuous-time parameter block, shared by all variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSystem {
    pub a_h: Matrix,
    pub a_v: Matrix,
    pub a_vh: Matrix,
    pub a_hpsi: Matrix,
    pub a_vpsi: Matrix,
    pub b_h: Matrix,
    pub b_v: Matrix,
    pub c_h: Matrix,
    pub c_v: Matrix,
    /// Projection applied to each variable's feature before pooling.
    pub w_v: Matrix,
}

const BLOCKS: [&str; 10] = ["A_h", "A_v", "A_vh", "A_hpsi", "A_vpsi", "B_h", "B_v", "C_h", "C_v", "W_v"];

impl ContinuousSystem {
    pub fn dims(&self) -> SystemDims {
        SystemDims {
            d_h: self.a_h.rows(),
            d_v: self.a_v.rows(),
            d_psi: self.w_v.rows(),
            d_z: self.w_v.cols(),
        }
    }

    /// Checks that every block has the shape implied by `A_h`, `A_v` and `W_v`.
    pub fn validate(&self) -> Result<()> {
        let SystemDims { d_h, d_v, d_psi, .. } = self.dims();
        let expect = [
            ("A_h", &self.a_h, (d_h, d_h)),
            ("A_v", &self.a_v, (d_v, d_v)),
            ("A_vh", &self.a_vh, (d_v, d_h)),
            ("A_hpsi", &self.a_hpsi, (d_h, d_psi)),
            ("A_vpsi", &self.a_vpsi, (d_v, d_psi)),
            ("B_h", &self.b_h, (d_h, 1)),
            ("B_v", &self.b_v, (d_v, 1)),
            ("C_h", &self.c_h, (1, d_h)),
            ("C_v", &self.c_v, (1, d_v)),
        ];
        for (name, m, shape) in expect {
            if m.shape() != shape {
                return dim_err(format!("{name} is {:?}, expected {shape:?}", m.shape()));
            }
        }
        Ok(())
    }

    /// Zero system of the given shape.
    pub fn zeros(dims: SystemDims) -> Self {
        let SystemDims { d_h, d_v, d_psi, d_z } = dims;
        Self {
            a_h: Matrix::zeros(d_h, d_h),
            a_v: Matrix::zeros(d_v, d_v),
            a_vh: Matrix::zeros(d_v, d_h),
            a_hpsi: Matrix::zeros(d_h, d_psi),
            a_vpsi: Matrix::zeros(d_v, d_psi),
            b_h: Matrix::zeros(d_h, 1),
            b_v: Matrix::zeros(d_v, 1),
            c_h: Matrix::zeros(1, d_h),
            c_v: Matrix::zeros(1, d_v),
            w_v: Matrix::zeros(d_psi, d_z),
        }
    }

    /// Random system with diagonal `A_h = -diag(e^{a})`, `A_v = -diag(e^{a})`, `a ~ U(-2, 1.5)`.
    ///
    /// Decay rates therefore lie in `[0.135, 4.48]` and both diagonal blocks are Hurwitz.
    /// Couplings are Gaussian with standard deviation 0.3, input maps standard Gaussian,
    /// readouts scaled by `1/√d` and `W_v` by `1/√d_z`.
    pub fn random(dims: SystemDims, rng: &mut Rng) -> Self {
        let SystemDims { d_h, d_v, d_psi, d_z } = dims;
        let mut gauss = |r: usize, c: usize, s: f64| Matrix::from_fn(r, c, |_, _| s * rng.normal());
        let a_vh = gauss(d_v, d_h, 0.3);
        let a_hpsi = gauss(d_h, d_psi, 0.3);
        let a_vpsi = gauss(d_v, d_psi, 0.3);
        let b_h = gauss(d_h, 1, 1.0);
        let b_v = gauss(d_v, 1, 1.0);
        let c_h = gauss(1, d_h, 1.0 / (d_h.max(1) as f64).sqrt());
        let c_v = gauss(1, d_v, 1.0 / (d_v.max(1) as f64).sqrt());
        let w_v = gauss(d_psi, d_z, 1.0 / (d_z.max(1) as f64).sqrt());
        let a_h = Matrix::diag(&(0..d_h).map(|_| -rng.uniform(-2.0, 1.5).exp()).collect::<Vec<_>>());
        let a_v = Matrix::diag(&(0..d_v).map(|_| -rng.uniform(-2.0, 1.5).exp()).collect::<Vec<_>>());
        Self { a_h, a_v, a_vh, a_hpsi, a_vpsi, b_h, b_v, c_h, c_v, w_v }
    }

    /// Diagonal `A = -diag(exp(log_rates))`, Hurwitz for any finite input.
    pub fn hurwitz_diagonal(log_rates: &[f64]) -> Matrix {
        Matrix::diag(&log_rates.iter().map(|a| -a.exp()).collect::<Vec<_>>())
    }

    /// Scales both pooled-field couplings `A_hψ`, `A_vψ`.
    pub fn scale_global_coupling(&mut self, factor: f64) {
        self.a_hpsi = self.a_hpsi.scale(factor);
        self.a_vpsi = self.a_vpsi.scale(factor);
    }

    /// Block state matrix `𝒜 = [[A_h, 0], [A_vh, A_v]]`.
    pub fn state_matrix(&self) -> Matrix {
        let SystemDims { d_h, d_v, .. } = self.dims();
        let mut a = Matrix::zeros(d_h + d_v, d_h + d_v);
        a.set_block(0, 0, &self.a_h);
        a.set_block(d_h, 0, &self.a_vh);
        a.set_block(d_h, d_h, &self.a_v);
        a
    }

    /// Block input matrix `ℬ = [[A_hψ, B_h], [A_vψ, B_v]]`, ψ columns first.
    pub fn input_matrix(&self) -> Matrix {
        let SystemDims { d_h, d_v, d_psi, .. } = self.dims();
        let mut b = Matrix::zeros(d_h + d_v, d_psi + 1);
        b.set_block(0, 0, &self.a_hpsi);
        b.set_block(d_h, 0, &self.a_vpsi);
        b.set_block(0, d_psi, &self.b_h);
        b.set_block(d_h, d_psi, &self.b_v);
        b
    }

    /// `[C_h, C_v]` as one row.
    pub fn readout(&self) -> Vec<f64> {
        let mut r = self.c_h.as_slice().to_vec();
        r.extend_from_slice(self.c_v.as_slice());
        r
    }

    /// Whether every eigenvalue of both diagonal state blocks has negative real part.
    pub fn is_hurwitz(&self) -> Result<bool> {
        for a in [&self.a_h, &self.a_v] {
            if eigenvalues(a)?.iter().any(|z| z.re >= 0.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_kv(&self) -> KvDocument {
        let mut doc = KvDocument::new();
        for (name, m) in BLOCKS.iter().zip(self.blocks()) {
            doc.set_matrix(name, m);
        }
        doc
    }

    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        Self::from_kv_prefixed(doc, "")
    }

    pub(crate) fn from_kv_prefixed(doc: &KvDocument, prefix: &str) -> Result<Self> {
        let get = |name: &str| doc.require_matrix(&format!("{prefix}{name}"));
        let sys = Self {
            a_h: get("A_h")?,
            a_v: get("A_v")?,
            a_vh: get("A_vh")?,
            a_hpsi: get("A_hpsi")?,
            a_vpsi: get("A_vpsi")?,
            b_h: get("B_h")?,
            b_v: get("B_v")?,
            c_h: get("C_h")?,
            c_v: get("C_v")?,
            w_v: get("W_v")?,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub(crate) fn write_kv_prefixed(&self, doc: &mut KvDocument, prefix: &str) {
        for (name, m) in BLOCKS.iter().zip(self.blocks()) {
            doc.set_matrix(&format!("{prefix}{name}"), m);
        }
    }

    fn blocks(&self) -> [&Matrix; 10] {
        [
            &self.a_h, &self.a_v, &self.a_vh, &self.a_hpsi, &self.a_vpsi, &self.b_h, &self.b_v,
            &self.c_h, &self.c_v, &self.w_v,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_valid_and_hurwitz() {
        let sys = ContinuousSystem::random(SystemDims::DEFAULT, &mut Rng::new(1));
        sys.validate().unwrap();
        assert!(sys.is_hurwitz().unwrap());
        assert_eq!(sys.state_matrix().shape(), (16, 16));
        assert_eq!(sys.input_matrix().shape(), (16, 9));
    }

    #[test]
    fn validate_catches_bad_block() {
        let mut sys = ContinuousSystem::zeros(SystemDims::DEFAULT);
        sys.b_h = Matrix::zeros(3, 1);
        assert!(matches!(sys.validate(), Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn kv_round_trip() {
        let sys = ContinuousSystem::random(SystemDims { d_h: 2, d_v: 3, d_psi: 2, d_z: 3 }, &mut Rng::new(4));
        let text = sys.to_kv().to_text();
        let back = ContinuousSystem::from_kv(&KvDocument::parse(&text).unwrap()).unwrap();
        assert_eq!(back, sys);
    }
}
