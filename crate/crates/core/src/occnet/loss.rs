//! Scalar losses and their derivatives with respect to network logits.
//!
//! Occupancy losses take logits so saturated predictions stay finite; the
//! probability-space versions are kept for reporting and checks.

/// Logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean binary cross-entropy of probabilities against `{0,1}` labels.
pub fn loss_occ(predictions: &[f64], labels: &[u8]) -> f64 {
    assert_eq!(predictions.len(), labels.len());
    let n = predictions.len() as f64;
    predictions.iter().zip(labels).map(|(&p, &y)| if y == 1 { -p.ln() } else { -(1.0 - p).ln() }).sum::<f64>() / n
}

/// Mean cross-entropy `CE(target, prediction)` between soft probabilities.
pub fn cross_entropy(target: &[f64], prediction: &[f64]) -> f64 {
    let n = target.len() as f64;
    target.iter().zip(prediction).map(|(&t, &q)| -(t * q.ln() + (1.0 - t) * (1.0 - q).ln())).sum::<f64>() / n
}

/// Mean BCE on logits and its gradient `(σ(z) − y)/N`.
pub fn bce_with_logits(logits: &[f64], labels: &[f64]) -> (f64, Vec<f64>) {
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let grad = logits
        .iter()
        .zip(labels)
        .map(|(&z, &y)| {
            loss += softplus(z) - y * z;
            (sigmoid(z) - y) / n
        })
        .collect();
    (loss / n, grad)
}

/// Mean `CE(σ(a), σ(b))` where view `a` provides the soft target and `b` the
/// prediction; gradients flow to both. Per point the loss is
/// `softplus(b) − σ(a)·b`.
pub fn consistency_with_logits(a: &[f64], b: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let n = a.len() as f64;
    let mut loss = 0.0;
    let mut ga = Vec::with_capacity(a.len());
    let mut gb = Vec::with_capacity(a.len());
    for (&za, &zb) in a.iter().zip(b) {
        let (pa, pb) = (sigmoid(za), sigmoid(zb));
        loss += softplus(zb) - pa * zb;
        ga.push(-pa * (1.0 - pa) * zb / n);
        gb.push((pb - pa) / n);
    }
    (loss / n, ga, gb)
}

/// Generator side of the least-squares objective: mean `g(fake)²`.
pub fn lsgan_generator(scores: &[f64]) -> (f64, Vec<f64>) {
    let n = scores.len() as f64;
    let loss = scores.iter().map(|g| g * g).sum::<f64>() / n;
    (loss, scores.iter().map(|g| 2.0 * g / n).collect())
}

/// Discriminator side: regress real slices to 0 and generated slices to 1,
/// `mean g(real)² + mean (g(fake) − 1)²`.
pub fn lsgan_discriminator(real: &[f64], fake: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let (nr, nf) = (real.len() as f64, fake.len() as f64);
    let loss = real.iter().map(|g| g * g).sum::<f64>() / nr + fake.iter().map(|g| (g - 1.0).powi(2)).sum::<f64>() / nf;
    (loss, real.iter().map(|g| 2.0 * g / nr).collect(), fake.iter().map(|g| 2.0 * (g - 1.0) / nf).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_prediction_costs_ln2() {
        let l = loss_occ(&[0.5, 0.5, 0.5], &[0, 1, 1]);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn perfect_prediction_approaches_zero() {
        assert!(loss_occ(&[1.0 - 1e-12, 1e-12], &[1, 0]) < 1e-11);
        let (l, g) = bce_with_logits(&[50.0, -50.0], &[1.0, 0.0]);
        assert!(l < 1e-20 && g.iter().all(|v| v.abs() < 1e-20));
    }

    #[test]
    fn two_point_batch_matches_hand_value() {
        // -(ln 0.9 + ln 0.9) / 2
        let l = loss_occ(&[0.9, 0.1], &[1, 0]);
        assert!((l - 0.105_360_515_657_826_3).abs() < 1e-12);
    }

    #[test]
    fn logit_and_probability_forms_agree() {
        let z = [-3.0, -0.2, 0.0, 1.7, 6.0];
        let y = [0.0, 1.0, 1.0, 0.0, 1.0];
        let p: Vec<f64> = z.iter().map(|&v| sigmoid(v)).collect();
        let labels: Vec<u8> = y.iter().map(|&v| v as u8).collect();
        let (l, _) = bce_with_logits(&z, &y);
        assert!((l - loss_occ(&p, &labels)).abs() < 1e-12);
        let (lc, _, _) = consistency_with_logits(&z, &z.iter().rev().copied().collect::<Vec<_>>());
        let q: Vec<f64> = p.iter().rev().copied().collect();
        assert!((lc - cross_entropy(&p, &q)).abs() < 1e-12);
    }

    #[test]
    fn consistency_two_point_hand_value() {
        // CE(0.8, 0.6) and CE(0.3, 0.1) by hand
        let p = [0.8, 0.3];
        let q = [0.6, 0.1];
        let by_hand = (-(0.8 * 0.6f64.ln() + 0.2 * 0.4f64.ln()) - (0.3 * 0.1f64.ln() + 0.7 * 0.9f64.ln())) / 2.0;
        assert!((cross_entropy(&p, &q) - by_hand).abs() < 1e-12);
        let logit = |v: f64| (v / (1.0 - v)).ln();
        let (l, _, _) = consistency_with_logits(&p.map(logit), &q.map(logit));
        assert!((l - by_hand).abs() < 1e-12);
    }

    #[test]
    fn identical_views_give_entropy_with_symmetric_pair_gradient() {
        let z = [0.4, -1.3];
        let (l, ga, gb) = consistency_with_logits(&z, &z);
        let entropy: f64 = z
            .iter()
            .map(|&v| {
                let p = sigmoid(v);
                -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
            })
            .sum::<f64>()
            / 2.0;
        assert!((l - entropy).abs() < 1e-12);
        // the prediction branch is already at its optimum; only the target
        // branch is pushed towards certainty
        assert!(gb.iter().all(|&g| g == 0.0));
        assert!(ga.iter().zip(&z).all(|(g, v)| g * v < 0.0));
        // forcing both predictions to certainty drives the loss to zero
        let (l0, _, _) = consistency_with_logits(&[40.0, -40.0], &[40.0, -40.0]);
        assert!(l0 < 1e-15);
    }

    #[test]
    fn lsgan_reference_values() {
        let (l, _) = lsgan_generator(&[0.0, 0.0]);
        assert_eq!(l, 0.0);
        let (ld, _, _) = lsgan_discriminator(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(ld, 0.0);
        let (lg, _) = lsgan_generator(&[1.0]);
        assert_eq!(lg, 1.0);
    }
}
