//! Independent reference values for the integration tests.
//!
//! Everything here uses double-exponential (tanh-sinh) quadrature from the
//! `quadrature` crate, so it shares no code with the Gauss-Legendre rules,
//! the E₁ series/continued fraction or the sphere integrator under test.

#![allow(dead_code)]

use std::f64::consts::PI;

/// ∫_a^b f with an absolute error target.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, tol).integral
}

/// E₁(x) = ∫₀^∞ exp(−x·eᵘ) du, cut where the integrand drops below e^{−745}.
/// The error target scales with e^{−x}/(x+1), the size of E₁.
pub fn e1_oracle(x: f64) -> f64 {
    let upper = (745.0 / x).ln().max(1.0);
    let tol = 1e-16 * (-x).exp() / (x + 1.0);
    integrate(|u| (-x * u.exp()).exp(), 0.0, upper, tol)
}

/// ∫₀^∞ e^{−s}/(s + r) ds via s = r(eᵗ − 1), which turns it into
/// ∫₀^∞ exp(−r(eᵗ − 1)) dt with a smooth integrand.
pub fn thermal_oracle(r: f64) -> f64 {
    let upper = (1.0 + 745.0 / r).ln();
    integrate(|t| (-r * t.exp_m1()).exp(), 0.0, upper, 1e-15)
}

/// Direct form of the thermal bound:
/// ∫₀^∞ dN e^{−N/N̄}/N̄ · 1/(N/(Cλ₀²) + j).
pub fn thermal_bound_oracle(n_bar: f64, c: f64, lambda0: f64, j: f64) -> f64 {
    let scale = c * lambda0 * lambda0;
    scale / n_bar * thermal_oracle(scale * j / n_bar)
}

/// κ(d) for x̂ dipoles separated by d (λ₀) along x̂, in phase.
///
/// With u = k̂_x the shell measure is uniform in u, so
/// κ = [(15/4)∫₋₁¹ u²(1 − u²) cos(2πdu) du]².
pub fn kappa_oracle(d: f64) -> f64 {
    let r = 3.75
        * integrate(
            |u| u * u * (1.0 - u * u) * (2.0 * PI * d * u).cos(),
            -1.0,
            1.0,
            1e-15,
        );
    r * r
}

/// ∫dΩ f(θ, φ) by nested tanh-sinh quadrature.
pub fn sphere_oracle<F: Fn(f64, f64) -> f64>(f: F) -> f64 {
    integrate(
        |theta| theta.sin() * integrate(|phi| f(theta, phi), 0.0, 2.0 * PI, 1e-15),
        0.0,
        PI,
        1e-14,
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
