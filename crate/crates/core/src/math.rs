//! Small numerical helpers shared across modules.

#[allow(unused_imports)]
use num_traits::Float;

/// Inverse CDF of the standard normal distribution.
///
/// Acklam's rational approximation refined by one Halley step against
/// `erfc`, giving full double precision over (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile requires p in (0,1)");

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * (core::f64::consts::TAU).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Least-squares fit of `y = y0 * exp(-t / tau)`; returns `tau`.
///
/// Returns `None` when fewer than two samples are given, any sample is
/// non-positive, or the fitted slope is not a decay.
pub fn fit_exponential_decay(t: &[f64], y: &[f64]) -> Option<f64> {
    if t.len() != y.len() || t.len() < 2 || y.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let n = t.len() as f64;
    let (mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let li = yi.ln();
        st += ti;
        sl += li;
        stt += ti * ti;
        stl += ti * li;
    }
    let denom = n * stt - st * st;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * stl - st * sl) / denom;
    (slope < 0.0).then(|| -1.0 / slope)
}

/// Location and height of the maximum of a sampled curve, refined by a
/// three-point parabola so peak times resolve below the sample spacing.
pub fn refine_peak(t: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if t.is_empty() || t.len() != y.len() {
        return None;
    }
    let mut i = 0;
    for (j, &v) in y.iter().enumerate() {
        if v > y[i] {
            i = j;
        }
    }
    if i == 0 || i == y.len() - 1 {
        return Some((t[i], y[i]));
    }
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let curv = y0 - 2.0 * y1 + y2;
    if curv == 0.0 {
        return Some((t[i], y[i]));
    }
    let frac = 0.5 * (y0 - y2) / curv;
    let dt = t[i + 1] - t[i];
    Some((t[i] + frac * dt, y1 - 0.25 * (y0 - y2) * frac))
}
