use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_MAX_TERMS: usize = 200;
const CF_MAX_ITER: usize = 1000;

/// Exponential integral E₁(x) = ∫ₓ^∞ e^{−t}/t dt for x > 0.
///
/// Power series for x ≤ 1, continued fraction for x > 1.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok((-x).exp() * e1_scaled_cf(x))
    }
}

/// eˣ·E₁(x), finite for all x > 0 (E₁ alone underflows past x ≈ 700).
pub fn scaled_exp_integral_e1(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(e1_scaled_cf(x))
    }
}

fn check_domain(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("E1 requires finite x > 0, got {x}")))
    }
}

// E₁(x) = −γ − ln x − Σ_{k≥1} (−x)^k / (k·k!)
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..=SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= -x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// Modified Lentz evaluation of eˣE₁(x) = 1/(x+1− 1/(x+3− 4/(x+5− …))).
fn e1_scaled_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=CF_MAX_ITER {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}
