//! Gamma and Beta variates.
//!
//! Gamma draws use the Marsaglia–Tsang squeeze for shape ≥ 1 and the
//! boost `Gamma(a) = Gamma(a+1)·U^{1/a}` below that. Both work in log
//! space so that tiny shapes (posterior parameters near the 1/3 prior)
//! cannot underflow to a 0/0 ratio.

use crate::rng::RngStream;

/// Smallest value returned by [`sample_beta`]; the largest is `1 - BETA_EPS`.
pub const BETA_EPS: f64 = 1.0 / (1u64 << 53) as f64;

/// Natural log of a `Gamma(shape, 1)` draw.
pub fn sample_gamma_ln(rng: &mut RngStream, shape: f64) -> f64 {
    debug_assert!(shape > 0.0 && shape.is_finite());
    if shape < 1.0 {
        let u = rng.uniform_open();
        return sample_gamma_ln(rng, shape + 1.0) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return (d * v).ln();
        }
    }
}

pub fn sample_gamma(rng: &mut RngStream, shape: f64) -> f64 {
    sample_gamma_ln(rng, shape).exp()
}

/// `Beta(a, b)` draw as `X/(X+Y)` with independent Gamma variates,
/// clamped to `[2^-53, 1-2^-53]`.
pub fn sample_beta(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    let lx = sample_gamma_ln(rng, a);
    let ly = sample_gamma_ln(rng, b);
    let x = 1.0 / (1.0 + (ly - lx).exp());
    x.clamp(BETA_EPS, 1.0 - BETA_EPS)
}
