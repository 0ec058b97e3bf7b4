//! Phase magnitude read off the per-unit voltage/current ellipse.
//!
//! For `i = sin θ`, `v = sin(θ + φ)` the ellipse meets the `i = 0` axis at
//! `v = ±sin φ`, so `|φ| = asin(|v|)` at the current zero crossings. A
//! straight line means 0°, a circle 90°. The ellipse carries no sign.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Divides a channel by its amplitude.
pub fn per_unitize<T: Scalar>(samples: &[T], amplitude: T) -> Result<Vec<T>> {
    if !(amplitude > T::zero() && amplitude.is_finite()) {
        return Err(Error::LowSignal {
            amplitude: amplitude.as_f64(),
        });
    }
    Ok(samples.iter().map(|&x| x / amplitude).collect())
}

/// Four-point Lagrange interpolation around `idx + t`, `t ∈ [0, 1]`; falls
/// back to linear at the record edges.
fn interp<T: Scalar>(x: &[T], idx: usize, t: T) -> T {
    if idx == 0 || idx + 2 >= x.len() {
        return x[idx] + (x[idx + 1] - x[idx]) * t;
    }
    let (p0, p1, p2, p3) = (x[idx - 1], x[idx], x[idx + 1], x[idx + 2]);
    let one = T::one();
    let two = T::two();
    let six = T::lit(6.0);
    // nodes at -1, 0, 1, 2
    let l0 = -t * (t - one) * (t - two) / six;
    let l1 = (t + one) * (t - one) * (t - two) / two;
    let l2 = -(t + one) * t * (t - two) / two;
    let l3 = (t + one) * t * (t - one) / six;
    p0 * l0 + p1 * l1 + p2 * l2 + p3 * l3
}

/// Phase magnitude in radians from per-unitized steady-state channels.
pub fn lissajous_phase<T: Scalar>(v: &[T], i: &[T]) -> Result<T> {
    if v.len() != i.len() {
        return Err(Error::Contract(format!(
            "channel lengths differ ({} vs {})",
            v.len(),
            i.len()
        )));
    }
    let peak = |x: &[T]| x.iter().fold(T::zero(), |m, &s| m.max(s.abs()));
    let floor = T::lit(1e-6);
    for ch in [v, i] {
        let p = peak(ch);
        if !(p > floor) {
            return Err(Error::LowSignal { amplitude: p.as_f64() });
        }
    }

    let mut sum = T::zero();
    let mut count = 0usize;
    for n in 0..i.len().saturating_sub(1) {
        let (a, b) = (i[n], i[n + 1]);
        // count each crossing once: sign change, or exact zero at n
        let crosses = (a < T::zero() && b >= T::zero()) || (a > T::zero() && b <= T::zero());
        if !crosses {
            continue;
        }
        let mut t = a / (a - b);
        // refine against the cubic through the neighbours
        for _ in 0..3 {
            let h = T::lit(1e-4);
            let f = interp(i, n, t);
            let df = (interp(i, n, t + h) - interp(i, n, t - h)) / (T::two() * h);
            if df == T::zero() {
                break;
            }
            t = (t - f / df).max(T::zero()).min(T::one());
        }
        sum = sum + interp(v, n, t).abs();
        count += 1;
    }
    if count == 0 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: i.len(),
        });
    }
    let intercept = (sum / T::from_usize_lossy(count)).min(T::one());
    Ok(intercept.asin())
}
