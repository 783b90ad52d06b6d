use crate::error::{dim_err, Result};
use crate::kv::KvDocument;
use crate::series::MultivariateSeries;

/// Position-wise softmax gate over the long, short and spectral branch values.
///
/// Score `b` at a position is `weights[b] · (h_long, h_short, h_spec) + bias[b]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateParams {
    pub weights: [[f64; 3]; 3],
    pub bias: [f64; 3],
}

impl GateParams {
    pub fn mixing_weights(&self, values: [f64; 3]) -> [f64; 3] {
        let scores: [f64; 3] = std::array::from_fn(|b| {
            self.weights[b].iter().zip(&values).map(|(w, v)| w * v).sum::<f64>() + self.bias[b]
        });
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e = scores.map(|s| (s - max).exp());
        let z = e[0] + e[1] + e[2];
        e.map(|v| v / z)
    }

    pub fn write_kv(&self, doc: &mut KvDocument) {
        for b in 0..3 {
            for j in 0..3 {
                doc.set_f64(&format!("gate.w{b}{j}"), self.weights[b][j]);
            }
            doc.set_f64(&format!("gate.b{b}"), self.bias[b]);
        }
    }

    /// Missing entries default to zero.
    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        let mut g = Self::default();
        for b in 0..3 {
            for j in 0..3 {
                g.weights[b][j] = doc.get_f64(&format!("gate.w{b}{j}"))?.unwrap_or(0.0);
            }
            g.bias[b] = doc.get_f64(&format!("gate.b{b}"))?.unwrap_or(0.0);
        }
        Ok(g)
    }
}

/// `h_long + w_s (h_short − h_long) + w_f (h_spec − h_long)`, the softmax mixture written
/// so that three identical inputs come back unchanged.
pub fn fuse(
    gate: &GateParams,
    h_long: &MultivariateSeries,
    h_short: &MultivariateSeries,
    h_spec: &MultivariateSeries,
) -> Result<MultivariateSeries> {
    let shape = (h_long.vars(), h_long.steps());
    for h in [h_short, h_spec] {
        if (h.vars(), h.steps()) != shape {
            return dim_err(format!("branch shapes {shape:?} and {:?} differ", (h.vars(), h.steps())));
        }
    }
    let data = h_long
        .as_slice()
        .iter()
        .zip(h_short.as_slice())
        .zip(h_spec.as_slice())
        .map(|((&l, &s), &f)| {
            let [_, ws, wf] = gate.mixing_weights([l, s, f]);
            l + ws * (s - l) + wf * (f - l)
        })
        .collect();
    MultivariateSeries::new(shape.0, shape.1, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn random(rng: &mut Rng, scale: f64) -> MultivariateSeries {
        MultivariateSeries::from_fn(3, 7, |_, _| scale * rng.normal())
    }

    fn random_gate(rng: &mut Rng) -> GateParams {
        GateParams {
            weights: std::array::from_fn(|_| std::array::from_fn(|_| rng.normal())),
            bias: std::array::from_fn(|_| rng.normal()),
        }
    }

    #[test]
    fn equal_scores_average() {
        let mut rng = Rng::new(1);
        let (a, b, c) = (random(&mut rng, 1.0), random(&mut rng, 1.0), random(&mut rng, 1.0));
        let out = fuse(&GateParams::default(), &a, &b, &c).unwrap();
        let avg = MultivariateSeries::from_fn(3, 7, |i, t| (a.get(i, t) + b.get(i, t) + c.get(i, t)) / 3.0);
        assert!(out.max_abs_diff(&avg) < 1e-12);
    }

    #[test]
    fn saturated_gate_selects_branch() {
        let mut rng = Rng::new(2);
        let (a, b, c) = (random(&mut rng, 1.0), random(&mut rng, 1.0), random(&mut rng, 1.0));
        for (k, want) in [&a, &b, &c].into_iter().enumerate() {
            let mut g = GateParams::default();
            g.bias[k] = 50.0;
            assert!(fuse(&g, &a, &b, &c).unwrap().max_abs_diff(want) < 1e-9);
        }
    }

    #[test]
    fn weights_form_distribution_and_identity_is_exact() {
        let mut rng = Rng::new(3);
        for _ in 0..50 {
            let g = random_gate(&mut rng);
            let w = g.mixing_weights([rng.normal(), rng.normal() * 10.0, rng.normal()]);
            assert!(w.iter().all(|&v| v >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let h = random(&mut rng, 100.0);
            assert_eq!(fuse(&g, &h, &h, &h).unwrap(), h);
        }
    }

    #[test]
    fn shape_mismatch_and_kv() {
        let a = MultivariateSeries::zeros(2, 3);
        assert!(fuse(&GateParams::default(), &a, &MultivariateSeries::zeros(3, 3), &a).is_err());
        let g = random_gate(&mut Rng::new(4));
        let mut doc = KvDocument::new();
        g.write_kv(&mut doc);
        assert_eq!(GateParams::from_kv(&KvDocument::parse(&doc.to_text()).unwrap()).unwrap(), g);
    }
}
