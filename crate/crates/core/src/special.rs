//! Bessel functions of the first kind for integer order.
//!
//! Evaluated with Miller's backward recurrence normalised by
//! `J₀ + 2 Σ J₂ₖ = 1`, which is accurate to a few ulp of that normalisation
//! for every order and argument (no cancellation at large `x` as in the
//! power series).

/// `J_0(x), …, J_{n_max}(x)` for `x ≥ 0` or `x < 0`.
pub fn bessel_j_upto(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let reach = (n_max as f64).max(ax);
    // J_m(x) is below 1e-30 of the normalisation for m beyond this point.
    let mut start = (reach + 30.0 + (40.0 * reach).sqrt()) as usize;
    start += start % 2;

    let two_over_x = 2.0 / ax;
    let mut j_next = 0.0; // J_{m+1}
    let mut j_cur = 1e-300; // J_m, arbitrary seed
    let mut norm = 0.0;
    for m in (1..=start).rev() {
        let j_prev = m as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{m-1}
        let idx = m - 1;
        if idx <= n_max {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j_cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_j_upto(order, x)[order];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j_upto(0, x)[0]
}
