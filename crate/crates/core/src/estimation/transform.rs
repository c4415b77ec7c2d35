//! Smooth bijections from unconstrained coordinates onto the parameter domain.

/// Probabilities are confined to `[EPS, 1 - EPS]` during optimisation.
pub const EPS: f64 = 1e-8;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `(p, dp/dz)` for `p = EPS + (1 - 2 EPS) sigmoid(z)`.
pub fn prob(z: f64) -> (f64, f64) {
    let s = sigmoid(z);
    (
        (EPS + (1.0 - 2.0 * EPS) * s).clamp(EPS, 1.0 - EPS),
        (1.0 - 2.0 * EPS) * s * (1.0 - s),
    )
}

pub fn prob_inv(p: f64) -> f64 {
    let s = ((p - EPS) / (1.0 - 2.0 * EPS)).clamp(1e-12, 1.0 - 1e-12);
    (s / (1.0 - s)).ln()
}

/// Softmax of `z` written into `w`.
pub fn simplex(z: &[f64], w: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (wi, &zi) in w.iter_mut().zip(z) {
        *wi = (zi - m).exp();
        s += *wi;
    }
    w.iter_mut().for_each(|v| *v /= s);
}

/// Log coordinates of a strictly positive simplex point.
pub fn simplex_inv(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&v| v.max(1e-300).ln()).collect()
}

/// Chain rule through softmax: `dz_k = w_k (g_k - <w, g>)`.
pub fn simplex_grad(w: &[f64], g: &[f64], dz: &mut [f64]) {
    let mean: f64 = w.iter().zip(g).map(|(a, b)| a * b).sum();
    for k in 0..w.len() {
        dz[k] = w[k] * (g[k] - mean);
    }
}

/// Pulls a probability into `[0.01, 0.99]` so a warm start has useful gradients.
pub fn shrink_prob(p: f64) -> f64 {
    p.clamp(0.01, 0.99)
}

/// Mixes a simplex point with the uniform vector (1% weight).
pub fn shrink_simplex(w: &[f64]) -> Vec<f64> {
    let u = 1.0 / w.len() as f64;
    w.iter().map(|&v| 0.99 * v + 0.01 * u).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prob_roundtrip_and_range() {
        for p in [0.001, 0.25, 0.5, 0.9, 0.999] {
            assert!((prob(prob_inv(p)).0 - p).abs() < 1e-12);
        }
        assert!(prob(1e4).0 <= 1.0 - EPS && prob(-1e4).0 >= EPS);
    }

    #[test]
    fn simplex_roundtrip() {
        let w = [0.2, 0.5, 0.3];
        let mut out = [0.0; 3];
        simplex(&simplex_inv(&w), &mut out);
        for k in 0..3 {
            assert!((out[k] - w[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn simplex_gradient_matches_differences() {
        let z = [0.3, -1.0, 0.7];
        let g = [1.5, -0.5, 2.0];
        let f = |z: &[f64]| {
            let mut w = [0.0; 3];
            simplex(z, &mut w);
            w.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut w = [0.0; 3];
        simplex(&z, &mut w);
        let mut dz = [0.0; 3];
        simplex_grad(&w, &g, &mut dz);
        for k in 0..3 {
            let mut a = z;
            let mut b = z;
            a[k] += 1e-6;
            b[k] -= 1e-6;
            assert!(((f(&a) - f(&b)) / 2e-6 - dz[k]).abs() < 1e-8);
        }
    }
}
