//! Deterministic BFGS ascent with Armijo backtracking.

#[derive(Debug, Clone, Copy)]
pub struct OptimOptions {
    pub max_iter: usize,
    /// Stop once successive objective values differ by less than this.
    pub tol: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximises `f`, which returns the objective and writes its gradient into
/// the second argument. Non-finite objective values count as `-∞`.
pub fn maximize<F>(mut f: F, x0: Vec<f64>, opts: &OptimOptions) -> OptimOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if n == 0 {
        return OptimOutcome {
            x,
            value: fx,
            iterations: 0,
            converged: true,
        };
    }
    if !fx.is_finite() {
        return OptimOutcome {
            x,
            value: fx,
            iterations: 0,
            converged: false,
        };
    }

    // inverse Hessian of -f
    let mut h = vec![0.0; n * n];
    let reset = |h: &mut [f64], scale: f64| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    reset(&mut h, if gmax > 1.0 { 1.0 / gmax } else { 1.0 });
    let mut fresh = true;

    let mut d = vec![0.0; n];
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut hy = vec![0.0; n];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        if g.iter().all(|v| v.abs() < 1e-12) {
            converged = true;
            break;
        }
        for i in 0..n {
            d[i] = (0..n).map(|j| h[i * n + j] * g[j]).sum();
        }
        let mut slope = dot(&g, &d);
        if !(slope > 0.0) {
            reset(&mut h, 1.0 / gmax.max(1.0));
            fresh = true;
            d.copy_from_slice(&g);
            d.iter_mut().for_each(|v| *v /= gmax.max(1.0));
            slope = dot(&g, &d);
        }

        let mut step = 1.0;
        let mut fn_ = f64::NEG_INFINITY;
        let mut accepted = false;
        while step > 1e-20 {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
            }
            fn_ = f(&xn, &mut gn);
            if fn_.is_finite() && fn_ >= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if fresh {
                // no ascent possible along the gradient at machine precision
                converged = true;
                break;
            }
            reset(&mut h, 1.0 / gmax.max(1.0));
            fresh = true;
            continue;
        }

        for i in 0..n {
            s[i] = xn[i] - x[i];
            // gradient of -f changes by -(gn - g)
            y[i] = g[i] - gn[i];
        }
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if fresh {
                let yy = dot(&y, &y);
                reset(&mut h, sy / yy);
            }
            for i in 0..n {
                hy[i] = (0..n).map(|j| h[i * n + j] * y[j]).sum();
            }
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] +=
                        (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
            fresh = false;
        }

        let improvement = fn_ - fx;
        x.copy_from_slice(&xn);
        g.copy_from_slice(&gn);
        fx = fn_;
        if improvement.abs() < opts.tol {
            converged = true;
            break;
        }
    }
    OptimOutcome {
        x,
        value: fx,
        iterations,
        converged,
    }
}
