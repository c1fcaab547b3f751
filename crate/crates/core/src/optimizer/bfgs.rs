//! Quasi-Newton minimisation with finite-difference gradients.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop when the max-norm of the gradient falls below this.
    pub gradient_tolerance: f64,
    /// Stop when an iteration lowers `f` by less than this (absolute).
    pub cost_tolerance: f64,
    /// Relative central-difference step, `h_i = step · max(|x_i|, 1)`.
    pub gradient_step: f64,
    /// Sufficient-decrease and curvature constants of the strong Wolfe test.
    pub c1: f64,
    pub c2: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            gradient_tolerance: 1e-9,
            cost_tolerance: 1e-14,
            gradient_step: 1e-6,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Objective<'a, F> {
    f: &'a F,
    step: f64,
    evaluations: usize,
}

impl<F: Fn(&[f64]) -> f64> Objective<'_, F> {
    fn value(&mut self, x: &DVector<f64>) -> f64 {
        self.evaluations += 1;
        (self.f)(x.as_slice())
    }

    fn gradient(&mut self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        let mut probe = x.clone();
        for i in 0..x.len() {
            let h = self.step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = self.value(&probe);
            probe[i] = x[i] - h;
            let down = self.value(&probe);
            probe[i] = x[i];
            g[i] = (up - down) / (2.0 * h);
        }
        g
    }
}

struct LinePoint {
    alpha: f64,
    f: f64,
    g: DVector<f64>,
}

/// Strong-Wolfe line search (bracketing followed by zoom).
fn line_search<F: Fn(&[f64]) -> f64>(
    obj: &mut Objective<'_, F>,
    x: &DVector<f64>,
    f0: f64,
    g0: &DVector<f64>,
    p: &DVector<f64>,
    opts: &BfgsOptions,
) -> Option<LinePoint> {
    let d0 = g0.dot(p);
    if d0 >= 0.0 {
        return None;
    }
    let eval = |obj: &mut Objective<'_, F>, a: f64| {
        let xa = x + p * a;
        let fa = obj.value(&xa);
        (xa, fa)
    };
    let zoom = |obj: &mut Objective<'_, F>, mut lo: (f64, f64, f64), mut hi: (f64, f64)| -> Option<LinePoint> {
        // lo = (alpha, f, dphi), hi = (alpha, f)
        for _ in 0..40 {
            let (a_lo, f_lo, d_lo) = lo;
            let (a_hi, f_hi) = hi;
            // safeguarded quadratic interpolation from (a_lo, f_lo, d_lo) and (a_hi, f_hi)
            let span = a_hi - a_lo;
            let denom = 2.0 * (f_hi - f_lo - d_lo * span);
            let mut a = if denom.abs() > 0.0 { a_lo - d_lo * span * span / denom } else { f64::NAN };
            let (left, right) = if a_lo < a_hi { (a_lo, a_hi) } else { (a_hi, a_lo) };
            let margin = 0.1 * (right - left);
            if !(a.is_finite() && a > left + margin && a < right - margin) {
                a = 0.5 * (a_lo + a_hi);
            }
            let xa = x + p * a;
            let fa = obj.value(&xa);
            if fa > f0 + opts.c1 * a * d0 || fa >= f_lo {
                hi = (a, fa);
            } else {
                let ga = obj.gradient(&xa);
                let da = ga.dot(p);
                if da.abs() <= -opts.c2 * d0 {
                    return Some(LinePoint { alpha: a, f: fa, g: ga });
                }
                if da * (a_hi - a_lo) >= 0.0 {
                    hi = (a_lo, f_lo);
                }
                lo = (a, fa, da);
            }
            if (hi.0 - lo.0).abs() < 1e-16 * lo.0.abs().max(1.0) {
                break;
            }
        }
        // Accept the best sufficient-decrease point if zoom stalls.
        if lo.0 > 0.0 {
            let xa = x + p * lo.0;
            let g = obj.gradient(&xa);
            return Some(LinePoint { alpha: lo.0, f: lo.1, g });
        }
        None
    };

    let mut prev = (0.0, f0, d0);
    let mut a = 1.0;
    for i in 0..30 {
        let (xa, fa) = eval(obj, a);
        if !fa.is_finite() {
            return zoom(obj, prev, (a, f64::INFINITY));
        }
        if fa > f0 + opts.c1 * a * d0 || (i > 0 && fa >= prev.1) {
            return zoom(obj, prev, (a, fa));
        }
        let ga = obj.gradient(&xa);
        let da = ga.dot(p);
        if da.abs() <= -opts.c2 * d0 {
            return Some(LinePoint { alpha: a, f: fa, g: ga });
        }
        if da >= 0.0 {
            return zoom(obj, (a, fa, da), (prev.0, prev.1));
        }
        prev = (a, fa, da);
        a *= 2.0;
    }
    None
}

/// Minimise `f` from `x0` with BFGS, central-difference gradients and a
/// strong-Wolfe line search.
///
/// `converged` is set when the gradient or the per-iteration decrease falls
/// below its tolerance; hitting `max_iterations` or a failed line search
/// leaves it unset.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult {
    let n = x0.len();
    let mut obj = Objective { f, step: opts.gradient_step, evaluations: 0 };
    let mut x = DVector::from_column_slice(x0);
    let mut fx = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    let mut iterations = 0;
    let mut fresh = true;

    while iterations < opts.max_iterations {
        if g.amax() < opts.gradient_tolerance {
            converged = true;
            break;
        }
        let p = -(&h_inv * &g);
        let step = match line_search(&mut obj, &x, fx, &g, &p, opts) {
            Some(s) => s,
            None if !fresh => {
                h_inv = DMatrix::identity(n, n);
                fresh = true;
                continue;
            }
            None => break,
        };
        iterations += 1;
        let s = &p * step.alpha;
        let y = &step.g - &g;
        let decrease = fx - step.f;
        x += &s;
        fx = step.f;
        g = step.g;

        let sy = s.dot(&y);
        if sy > 1e-300 {
            if fresh {
                // Scale the initial inverse Hessian to the observed curvature.
                h_inv *= sy / y.dot(&y);
            }
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ, expanded.
            h_inv += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
            fresh = false;
        }
        if decrease.abs() < opts.cost_tolerance {
            converged = true;
            break;
        }
    }
    BfgsResult {
        gradient_norm: g.amax(),
        x: x.as_slice().to_vec(),
        f: fx,
        iterations,
        evaluations: obj.evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + 0.5 * x[0] * x[1];
        let r = minimize(&f, &[5.0, 5.0], &BfgsOptions::default());
        // ∇f = 0: 2x + 0.5y = 2, 0.5x + 20y = −40
        let det = 2.0 * 20.0 - 0.25;
        let x_star = (2.0 * 20.0 + 0.5 * 40.0) / det;
        let y_star = (-2.0 * 40.0 - 0.5 * 2.0) / det;
        assert!(r.converged);
        assert!((r.x[0] - x_star).abs() < 1e-6, "{:?}", r.x);
        assert!((r.x[1] - y_star).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(&f, &[-1.2, 1.0], &BfgsOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{r:?}");
        assert!(r.f < 1e-10);
    }

    #[test]
    fn starts_at_minimum() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let r = minimize(&f, &[0.0; 4], &BfgsOptions::default());
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
    }
}
