//! Closed-form coefficients for the worked model families, and the models themselves.

use crate::copula::CopulaModel;
use crate::error::{Error, Result};

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Coefficient of the `d`-dimensional Gumbel copula with parameter `delta`,
/// from the even/odd closed forms (`C_S(1/2) = 2^(-|S|^delta)`).
pub fn gumbel_beta_closed_form(d: usize, delta: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::param(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!(
            "gumbel delta = {delta} is outside (0, 1]"
        )));
    }
    let level = |k: usize| 2f64.powf(-(k as f64).powf(delta));
    let dn = d as u64;
    let mut beta = (1.0 - d as f64) / 2.0;
    for k in 1..=d.saturating_sub(2) {
        let kk = k as u64;
        let weight = binomial(dn - 1, kk) + binomial(dn, kk + 1);
        let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        beta += weight * sign * level(k + 1);
    }
    if d.is_multiple_of(2) {
        let sign = if (d - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        beta += 4.0 * level(d) + sign * level(d - 1);
    } else {
        beta -= level(d - 1);
    }
    Ok(beta)
}

/// Coefficient of the product of two Marshall-Olkin factors with parameters
/// `(delta, 1)` and `(alpha, 1)`: `2^(delta+alpha-2) - 2^(alpha-3) - 2^(delta-3)`.
pub fn mo_product_beta_closed_form(delta: f64, alpha: f64) -> Result<f64> {
    for (name, v) in [("delta", delta), ("alpha", alpha)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::param(format!("{name} = {v} is outside [0, 1]")));
        }
    }
    Ok(2f64.powf(delta + alpha - 2.0) - 2f64.powf(alpha - 3.0) - 2f64.powf(delta - 3.0))
}

/// Four-dimensional model `MO(delta, 1) x MO(alpha, 1)` on coordinates (1,2) and (3,4).
pub fn mo_product_model(delta: f64, alpha: f64) -> Result<CopulaModel> {
    CopulaModel::compose(vec![
        CopulaModel::marshall_olkin(delta, 1.0)?,
        CopulaModel::marshall_olkin(alpha, 1.0)?,
    ])
}

/// `U = (U, 1 - U, V, .., V)`: a countermonotone pair next to a comonotone
/// block of dimension `d - 2`. For `d = 2` the comonotone block is empty and
/// the model is the countermonotone pair itself.
pub fn minimum_attaining_model(d: usize) -> Result<CopulaModel> {
    match d {
        0 | 1 => Err(Error::param(format!(
            "dimension must be at least 2, got {d}"
        ))),
        2 => Ok(CopulaModel::CountermonotonePair),
        _ => CopulaModel::compose(vec![
            CopulaModel::CountermonotonePair,
            CopulaModel::comonotone(d - 2)?,
        ]),
    }
}
