//! Dormand–Prince 5(4) with FSAL and the standard fourth-order continuous
//! extension for dense output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-13, max_step: f64::INFINITY, max_steps: 50_000_000 }
    }
}

/// One accepted step together with its interpolant.
pub struct DenseStep<const N: usize> {
    pub t_start: f64,
    pub t_end: f64,
    pub y_end: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t_end - self.t_start;
        let s = if h > 0.0 { (t - self.t_start) / h } else { 1.0 };
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for i in 0..N {
            let c = &self.cont;
            y[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
        }
        y
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let hc = h * c;
        for i in 0..N {
            out[i] += hc * k[i];
        }
    }
    out
}

fn rms_scaled<const N: usize>(v: &[f64; N], y0: &[f64; N], y1: &[f64; N], tol: &Tolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
        acc += (v[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Integrate `y' = f(t, y)` from `t0` to `t1`, calling `observer` after every
/// accepted step. Returns the state at `t1`.
pub fn integrate<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: &Tolerances,
    mut observer: O,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]),
    O: FnMut(&DenseStep<N>) -> Result<()>,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    if !(span > 0.0) {
        return Err(Error::IntegratorFailure { t: t0, reason: format!("invalid span [{t0}, {t1}]") });
    }
    let max_step = tol.max_step.min(span);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = [0.0; N];
    rhs(t, &y, &mut k1);

    // initial step from the scaled magnitudes of y and y'
    let d0 = rms_scaled(&y, &y, &y, tol);
    let d1 = rms_scaled(&k1, &y, &y, tol);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h = h.min(max_step).max(1e-12 * span);

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        ([0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N]);
    let mut steps = 0usize;
    let min_step = 1e-14 * span.max(t0.abs().max(t1.abs()));

    while t < t1 {
        if steps >= tol.max_steps {
            return Err(Error::IntegratorFailure { t, reason: format!("step budget of {} exhausted", tol.max_steps) });
        }
        let last = t + h >= t1 - 1e-12 * h.abs().max(min_step);
        if last {
            h = t1 - t;
        }
        let y2 = axpy(&y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &y2, &mut k2);
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &y3, &mut k3);
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &y4, &mut k4);
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &y5, &mut k5);
        let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        rhs(t + h, &y6, &mut k6);
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t1 } else { t + h };
        rhs(t_new, &y_new, &mut k7);

        let mut err_vec = [0.0; N];
        for i in 0..N {
            err_vec[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = rms_scaled(&err_vec, &y, &y_new, tol);
        if !err.is_finite() {
            return Err(Error::IntegratorFailure { t, reason: "non-finite error estimate".into() });
        }
        steps += 1;

        if err <= 1.0 {
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let step = DenseStep { t_start: t, t_end: t_new, y_end: y_new, cont };
            observer(&step)?;
            t = t_new;
            y = y_new;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(max_step);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < min_step {
                return Err(Error::IntegratorFailure { t, reason: format!("step size underflow (h = {h:e})") });
            }
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_with_dense_output() {
        let tol = Tolerances { max_step: 0.5, ..Default::default() };
        let mut worst: f64 = 0.0;
        let y = integrate(
            |_, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = -y[0],
            0.0,
            [1.0],
            5.0,
            &tol,
            |step| {
                for j in 0..=10 {
                    let t = step.t_start + (step.t_end - step.t_start) * j as f64 / 10.0;
                    worst = worst.max((step.eval(t)[0] - (-t).exp()).abs());
                }
                Ok(())
            },
        )
        .unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-10);
        assert!(worst < 1e-9, "dense output error {worst:e}");
    }

    #[test]
    fn harmonic_oscillator_dense_output_is_fifth_order_accurate() {
        let tol = Tolerances { rtol: 1e-8, atol: 1e-10, ..Default::default() };
        let mut worst: f64 = 0.0;
        integrate(
            |_, y: &[f64; 2], dy: &mut [f64; 2]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            [1.0, 0.0],
            20.0,
            &tol,
            |step| {
                let mid = 0.5 * (step.t_start + step.t_end);
                let y = step.eval(mid);
                worst = worst.max((y[0] - mid.cos()).abs()).max((y[1] + mid.sin()).abs());
                Ok(())
            },
        )
        .unwrap();
        assert!(worst < 1e-6, "worst {worst:e}");
    }

    #[test]
    fn rejects_backwards_span() {
        let r = integrate(|_, _: &[f64; 1], _: &mut [f64; 1]| {}, 1.0, [0.0], 0.0, &Tolerances::default(), |_| Ok(()));
        assert!(r.is_err());
    }
}
