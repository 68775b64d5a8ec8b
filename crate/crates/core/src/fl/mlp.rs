use rand::{Rng, RngCore};

use super::{FlError, FlatWeights};

/// `Σ n_in·n_out + n_out` over consecutive layer pairs.
pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

#[derive(Clone, Debug, PartialEq)]
struct Layer {
    n_in: usize,
    n_out: usize,
    /// `[out][in]`, row-major.
    w: Vec<f64>,
    b: Vec<f64>,
}

/// Fully connected net, ReLU between layers, softmax + cross-entropy at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    sizes: Vec<usize>,
    layers: Vec<Layer>,
}

impl MlpModel {
    pub fn zeros(sizes: &[usize]) -> Result<Self, FlError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(FlError::Invalid(format!("bad layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|w| Layer { n_in: w[0], n_out: w[1], w: vec![0.0; w[0] * w[1]], b: vec![0.0; w[1]] })
            .collect();
        Ok(Self { sizes: sizes.to_vec(), layers })
    }

    /// Uniform in `±√(1/n_in)` per layer, weights then biases.
    pub fn random<R: RngCore + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self, FlError> {
        let mut m = Self::zeros(sizes)?;
        for l in &mut m.layers {
            let bound = (1.0 / l.n_in as f64).sqrt();
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = rng.gen_range(-bound..=bound);
            }
        }
        Ok(m)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_params(&self) -> usize {
        param_count(&self.sizes)
    }

    pub fn flatten(&self) -> FlatWeights {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    pub fn unflatten(flat: &[f64], sizes: &[usize]) -> Result<Self, FlError> {
        let mut m = Self::zeros(sizes)?;
        m.load(flat)?;
        Ok(m)
    }

    /// Overwrites the parameters in flatten order.
    pub fn load(&mut self, flat: &[f64]) -> Result<(), FlError> {
        if flat.len() != self.num_params() {
            return Err(FlError::LengthMismatch { expected: self.num_params(), actual: flat.len() });
        }
        let mut rest = flat;
        for l in &mut self.layers {
            let (w, r) = rest.split_at(l.w.len());
            let (b, r) = r.split_at(l.b.len());
            l.w.copy_from_slice(w);
            l.b.copy_from_slice(b);
            rest = r;
        }
        Ok(())
    }

    /// Pre-activations of every layer for one input; the last entry is the logits.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let input: &[f64] = if i == 0 { x } else { zs[i - 1].as_slice() };
            let relu = i > 0;
            let z = (0..l.n_out)
                .map(|o| {
                    let row = &l.w[o * l.n_in..(o + 1) * l.n_in];
                    let dot: f64 = if relu {
                        row.iter().zip(input).map(|(w, a)| w * a.max(0.0)).sum()
                    } else {
                        row.iter().zip(input).map(|(w, a)| w * a).sum()
                    };
                    dot + l.b[o]
                })
                .collect();
            zs.push(z);
        }
        zs
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).pop().expect("at least one layer")
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    /// Fraction of rows whose argmax matches the label.
    pub fn accuracy(&self, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        let hits = xs.iter().zip(ys).filter(|(x, &y)| self.predict(x) == y).count();
        hits as f64 / xs.len() as f64
    }

    /// Mean cross-entropy over `idx` and its gradient in flatten order.
    pub fn loss_and_grad(&self, xs: &[Vec<f64>], ys: &[usize], idx: &[usize]) -> (f64, FlatWeights) {
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> =
            self.layers.iter().map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()])).collect();
        let mut loss = 0.0;
        for &s in idx {
            let x = &xs[s];
            let zs = self.forward(x);
            let probs = softmax(zs.last().expect("layers"));
            loss -= probs[ys[s]].max(f64::MIN_POSITIVE).ln();
            // dL/dz at the output
            let mut delta = probs;
            delta[ys[s]] -= 1.0;
            for i in (0..self.layers.len()).rev() {
                let l = &self.layers[i];
                let (gw, gb) = &mut grads[i];
                let input: Vec<f64> =
                    if i == 0 { x.clone() } else { zs[i - 1].iter().map(|v| v.max(0.0)).collect() };
                for o in 0..l.n_out {
                    gb[o] += delta[o];
                    let row = &mut gw[o * l.n_in..(o + 1) * l.n_in];
                    for (g, a) in row.iter_mut().zip(&input) {
                        *g += delta[o] * a;
                    }
                }
                if i > 0 {
                    let prev = &zs[i - 1];
                    delta = (0..l.n_in)
                        .map(|j| {
                            if prev[j] <= 0.0 {
                                return 0.0;
                            }
                            (0..l.n_out).map(|o| l.w[o * l.n_in + j] * delta[o]).sum()
                        })
                        .collect();
                }
            }
        }
        let inv = 1.0 / idx.len().max(1) as f64;
        let mut flat = Vec::with_capacity(self.num_params());
        for (gw, gb) in grads {
            flat.extend(gw.into_iter().map(|g| g * inv));
            flat.extend(gb.into_iter().map(|g| g * inv));
        }
        (loss * inv, flat)
    }

    /// `w ← clamp(w − η·g)`.
    pub(crate) fn step(&mut self, grad: &[f64], lr: f64, clamp: f64) {
        let mut g = grad.iter();
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = (*v - lr * g.next().expect("grad length")).clamp(-clamp, clamp);
            }
        }
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand::Rng as _;
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::fl::ModelId;

    fn fd_check(model: &MlpModel, xs: &[Vec<f64>], ys: &[usize]) {
        let idx: Vec<usize> = (0..xs.len()).collect();
        let (_, grad) = model.loss_and_grad(xs, ys, &idx);
        let flat = model.flatten();
        let h = 1e-6;
        for p in 0..flat.len() {
            let mut plus = flat.clone();
            plus[p] += h;
            let mut minus = flat.clone();
            minus[p] -= h;
            let lp = MlpModel::unflatten(&plus, model.sizes()).unwrap().loss_and_grad(xs, ys, &idx).0;
            let lm = MlpModel::unflatten(&minus, model.sizes()).unwrap().loss_and_grad(xs, ys, &idx).0;
            let fd = (lp - lm) / (2.0 * h);
            let err = (fd - grad[p]).abs() / fd.abs().max(grad[p].abs()).max(1e-3);
            assert!(err <= 1e-4, "param {p}: analytic {} vs fd {fd}", grad[p]);
        }
    }

    #[test]
    fn flatten_round_trip_model1() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m = MlpModel::random(&ModelId::Model1.layer_sizes(), &mut rng).unwrap();
        let flat = m.flatten();
        assert_eq!(flat.len(), 669);
        assert_eq!(MlpModel::unflatten(&flat, m.sizes()).unwrap(), m);
        assert!(matches!(
            MlpModel::unflatten(&flat[1..], m.sizes()),
            Err(FlError::LengthMismatch { expected: 669, actual: 668 })
        ));
    }

    #[test]
    fn golden_flatten_order_model1() {
        // Parameter i carries value i; check the [out][in] layout by position.
        let sizes = ModelId::Model1.layer_sizes();
        let flat: Vec<f64> = (0..669).map(|i| i as f64).collect();
        let m = MlpModel::unflatten(&flat, &sizes).unwrap();
        let l1 = &m.layers[0];
        assert_eq!(l1.w[0], 0.0);
        assert_eq!(l1.w[3 * 45 + 7], (3 * 45 + 7) as f64); // W1[3][7]
        assert_eq!(l1.b[0], 450.0);
        assert_eq!(l1.b[9], 459.0);
        let l2 = &m.layers[1];
        assert_eq!(l2.w[0], 460.0);
        assert_eq!(l2.w[18 * 10 + 9], 649.0); // W2[18][9]
        assert_eq!(l2.b[0], 650.0);
        assert_eq!(l2.b[18], 668.0);
    }

    #[test]
    fn init_within_bounds() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let m = MlpModel::random(&[45, 10, 19], &mut rng).unwrap();
        let b1 = (1.0f64 / 45.0).sqrt();
        assert!(m.layers[0].w.iter().chain(&m.layers[0].b).all(|v| v.abs() <= b1));
        let b2 = (1.0f64 / 10.0).sqrt();
        assert!(m.layers[1].w.iter().chain(&m.layers[1].b).all(|v| v.abs() <= b2));
        assert!(MlpModel::zeros(&[5]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..5 {
            let m = MlpModel::random(&[3, 4, 2], &mut rng).unwrap();
            let xs: Vec<Vec<f64>> =
                (0..5).map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let ys: Vec<usize> = (0..5).map(|_| rng.gen_range(0..2)).collect();
            fd_check(&m, &xs, &ys);
        }
        let m = MlpModel::random(&[4, 5, 3, 3], &mut rng).unwrap();
        let xs: Vec<Vec<f64>> =
            (0..4).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        fd_check(&m, &xs, &[0, 1, 2, 1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn flatten_unflatten_inverse(seed in any::<u64>(), model in 0usize..5) {
            let sizes = ModelId::ALL[model].layer_sizes();
            let m = MlpModel::random(&sizes, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(MlpModel::unflatten(&m.flatten(), &sizes).unwrap(), m);
        }

        #[test]
        fn softmax_is_distribution(z in prop::collection::vec(-50.0f64..50.0, 1..20)) {
            let p = softmax(&z);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|v| *v >= 0.0));
        }
    }
}
