//! Maximum likelihood for mixture weights with fixed component likelihoods:
//! `max Σ_r n_r ln(Σ_k A_rk w_k)` over the probability simplex.
//!
//! The objective is concave, so an active-set Newton method reaches the
//! optimum including components whose weight is exactly zero.

use nalgebra::{DMatrix, DVector};

const MAX_ITER: usize = 200;
/// Relative KKT slack `g_k ≤ N (1 + KKT_TOL)` for inactive components.
const KKT_TOL: f64 = 1e-10;

pub(crate) struct Mixture<'a> {
    /// Row-major `rows × k`.
    pub design: &'a [f64],
    pub counts: &'a [f64],
    pub k: usize,
}

impl Mixture<'_> {
    fn value(&self, w: &[f64]) -> f64 {
        let mut f = 0.0;
        for (r, &n) in self.counts.iter().enumerate() {
            let p: f64 = self.design[r * self.k..(r + 1) * self.k]
                .iter()
                .zip(w)
                .map(|(a, b)| a * b)
                .sum();
            if !(p > 0.0) {
                return f64::NEG_INFINITY;
            }
            f += n * p.ln();
        }
        f
    }

    /// Value, gradient and Hessian restricted to `support`.
    fn derivatives(&self, w: &[f64], support: &[usize]) -> (f64, Vec<f64>, DMatrix<f64>) {
        let mut f = 0.0;
        let mut g = vec![0.0; self.k];
        let s = support.len();
        let mut h = DMatrix::zeros(s, s);
        for (r, &n) in self.counts.iter().enumerate() {
            let a = &self.design[r * self.k..(r + 1) * self.k];
            let p: f64 = a.iter().zip(w).map(|(x, y)| x * y).sum();
            f += n * p.ln();
            for k in 0..self.k {
                g[k] += n * a[k] / p;
            }
            let c = n / (p * p);
            for (u, &ku) in support.iter().enumerate() {
                if a[ku] == 0.0 {
                    continue;
                }
                for (v, &kv) in support.iter().enumerate() {
                    h[(u, v)] -= c * a[ku] * a[kv];
                }
            }
        }
        (f, g, h)
    }

    /// Polishes a feasible `w` (positive likelihood on every row) to the
    /// constrained optimum. `allowed[k] = false` pins `w_k = 0`.
    pub fn maximize(&self, w0: &[f64], allowed: &[bool]) -> (Vec<f64>, usize) {
        let total: f64 = self.counts.iter().sum();
        let mut w: Vec<f64> = w0
            .iter()
            .zip(allowed)
            .map(|(&v, &a)| if a { v.max(0.0) } else { 0.0 })
            .collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let mut f = self.value(&w);
        if !f.is_finite() {
            return (w0.to_vec(), 0);
        }
        let mut support: Vec<usize> = (0..self.k).filter(|&k| w[k] > 0.0).collect();
        for iter in 1..=MAX_ITER {
            let (_, g, h) = self.derivatives(&w, &support);
            let entering = (0..self.k)
                .filter(|&k| allowed[k] && !support.contains(&k))
                .max_by(|&a, &b| g[a].total_cmp(&g[b]))
                .filter(|&k| g[k] > total * (1.0 + KKT_TOL));
            if let Some(k) = entering {
                support.push(k);
                support.sort_unstable();
                continue;
            }
            let m = support.len();
            let mut kkt = DMatrix::zeros(m + 1, m + 1);
            kkt.view_mut((0, 0), (m, m)).copy_from(&h);
            for u in 0..m {
                kkt[(u, m)] = 1.0;
                kkt[(m, u)] = 1.0;
            }
            let rhs = DVector::from_fn(m + 1, |u, _| if u < m { -g[support[u]] } else { 0.0 });
            let Ok(sol) = kkt.svd(true, true).solve(&rhs, 1e-12) else {
                return (w, iter);
            };
            let mut d: Vec<f64> = (0..m).map(|u| sol[u]).collect();
            if support
                .iter()
                .zip(&d)
                .any(|(&k, &du)| w[k] == 0.0 && du < 0.0)
            {
                // Newton leaves the simplex at once; take the projected gradient.
                let mean = support.iter().map(|&k| g[k]).sum::<f64>() / m as f64;
                d = support.iter().map(|&k| (g[k] - mean) / total).collect();
            }
            let slope: f64 = d.iter().zip(&support).map(|(di, &k)| di * g[k]).sum();
            if !(slope > 1e-14 * total.max(1.0)) {
                return (w, iter);
            }
            let (mut step, mut blocking) = (1.0, None);
            for (u, &k) in support.iter().enumerate() {
                if d[u] < 0.0 && w[k] / -d[u] < step {
                    step = w[k] / -d[u];
                    blocking = Some(k);
                }
            }
            let mut accepted = false;
            for _ in 0..60 {
                let mut trial = w.clone();
                for (u, &k) in support.iter().enumerate() {
                    trial[k] = (w[k] + step * d[u]).max(0.0);
                }
                if let Some(b) = blocking {
                    trial[b] = 0.0;
                }
                let s: f64 = trial.iter().sum();
                trial.iter_mut().for_each(|v| *v /= s);
                let ft = self.value(&trial);
                if ft >= f + 1e-4 * step * slope {
                    accepted = ft > f;
                    w = trial;
                    f = ft;
                    break;
                }
                step *= 0.5;
                blocking = None;
            }
            if !accepted {
                return (w, iter);
            }
            support.retain(|&k| w[k] > 0.0);
        }
        (w, MAX_ITER)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_closed_form() {
        // rows: [1, 0] seen 3 times, [1, 1] seen 1 time -> w = (1, 0) is optimal
        let m = Mixture {
            design: &[1.0, 0.0, 1.0, 1.0],
            counts: &[3.0, 1.0],
            k: 2,
        };
        let (w, _) = m.maximize(&[0.5, 0.5], &[true, true]);
        assert_eq!(w, vec![1.0, 0.0]);
        // rows: [1, 0] x3 and [0, 1] x1 -> w = (3/4, 1/4)
        let m = Mixture {
            design: &[1.0, 0.0, 0.0, 1.0],
            counts: &[3.0, 1.0],
            k: 2,
        };
        let (w, _) = m.maximize(&[0.5, 0.5], &[true, true]);
        assert!((w[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn component_enters_from_zero() {
        let design = [1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0];
        let m = Mixture {
            design: &design,
            counts: &[5.0, 2.0, 4.0],
            k: 3,
        };
        let (w, _) = m.maximize(&[0.5, 0.5, 0.0], &[true, true, true]);
        assert!(w[2] > 0.0);
        let (_, g, _) = m.derivatives(&w, &[]);
        for k in 0..3 {
            if w[k] > 0.0 {
                assert!((g[k] - 11.0).abs() < 1e-8);
            } else {
                assert!(g[k] <= 11.0 + 1e-8);
            }
        }
        let (pinned, _) = m.maximize(&[0.5, 0.5, 0.0], &[true, true, false]);
        assert_eq!(pinned[2], 0.0);
    }
}
