//! Medial correlation coefficients computed from an [`OrthantTable`].
//!
//! For disjoint coordinate sets `I` and `J`, with `M(I) = max_{i in I} U_i`
//! and `W(I) = min_{i in I} U_i`,
//!
//! ```text
//! beta(A, B)  = 2 (P(A <= 1/2, B <= 1/2) + P(A > 1/2, B > 1/2)) - 1
//! beta_{I,J}  = (beta(M(I), M(J)) + beta(W(I), W(J))) / 2
//! beta        = (1/d) sum_i beta_{{i}, D\{i}}
//! ```
//!
//! Every probability above is one signed combination of table entries, so the
//! formulas hold for any measure on the orthants, including the empirical
//! measure of a sample whose margins are not exactly split at the median.

use serde::{Deserialize, Serialize};

use crate::copula::ReflectionMask;
use crate::error::{Error, Result};
use crate::estimator::BootstrapIntervals;
use crate::orthant::{orthant_terms, OrthantTable};
use crate::subset::Subset;
use crate::summation::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportSource {
    Exact,
    Empirical,
}

/// `beta_{I,J}` for user-chosen coordinate sets (one-based in JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaIj {
    #[serde(rename = "I")]
    pub i: Vec<usize>,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub value: f64,
}

/// All coefficients for one random vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsReport {
    pub d: usize,
    /// Multivariate medial correlation.
    pub beta: f64,
    /// `beta_{{i}, D\{i}}` for `i = 1..d`.
    pub components: Vec<f64>,
    /// `(2^(d-1) (C(1/2) + C^(1/2)) - 1) / (2^(d-1) - 1)`.
    pub beta_star: f64,
    /// `(2^d C(1/2) - 1) / (2^(d-1) - 1)`.
    pub beta_nelsen: f64,
    /// Mean of the bivariate coefficients over all pairs.
    pub beta_pairwise_avg: f64,
    pub source: ReportSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<BootstrapIntervals>,
    #[serde(default, rename = "beta_IJ", skip_serializing_if = "Option::is_none")]
    pub beta_ij: Option<BetaIj>,
}

impl CoefficientsReport {
    /// Identities every report satisfies; returns a description of each one that fails.
    pub fn invariant_violations(&self) -> Vec<String> {
        const TOL: f64 = 1e-12;
        let mut out = Vec::new();
        if self.components.len() != self.d {
            out.push(format!(
                "{} components for dimension {}",
                self.components.len(),
                self.d
            ));
        }
        let mean = mean(&self.components);
        if (self.beta - mean).abs() > TOL {
            out.push(format!(
                "beta {} differs from component mean {mean}",
                self.beta
            ));
        }
        let lb = beta_lower_bound(self.d);
        if self.beta < lb - TOL || self.beta > 1.0 + TOL {
            out.push(format!("beta {} outside [{lb}, 1]", self.beta));
        }
        if self.d == 3 {
            if (self.beta - self.beta_star).abs() > TOL {
                out.push(format!(
                    "d = 3 but beta {} != beta* {}",
                    self.beta, self.beta_star
                ));
            }
            if (self.beta - self.beta_pairwise_avg).abs() > TOL {
                out.push(format!(
                    "d = 3 but beta {} != pairwise average {}",
                    self.beta, self.beta_pairwise_avg
                ));
            }
        }
        out
    }
}

/// Smallest attainable value of the coefficient in dimension `d`.
///
/// `-1/d` for `d >= 3`; in two dimensions the coefficient is Blomqvist's beta
/// and reaches `-1` at the countermonotone copula.
pub fn beta_lower_bound(d: usize) -> f64 {
    if d <= 2 {
        -1.0
    } else {
        -1.0 / d as f64
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

pub(crate) fn medial_from_agreement(p_agree: f64) -> f64 {
    2.0 * p_agree - 1.0
}

pub(crate) fn component_from_parts(beta_max: f64, beta_min: f64) -> f64 {
    (beta_max + beta_min) / 2.0
}

/// `P(M(I) <= 1/2, M(J) <= 1/2) + P(M(I) > 1/2, M(J) > 1/2)`.
fn agreement_of_maxima(table: &OrthantTable, i: Subset, j: Subset) -> f64 {
    let ij = i.union(j);
    table.signed_sum([(ij, 2), (Subset::EMPTY, 1), (i, -1), (j, -1)])
}

/// `P(W(I) > 1/2, W(J) > 1/2) + P(W(I) <= 1/2, W(J) <= 1/2)`.
fn agreement_of_minima(table: &OrthantTable, i: Subset, j: Subset) -> f64 {
    let ij = i.union(j);
    let terms = orthant_terms(Subset::EMPTY, ij, 2)
        .chain(std::iter::once((Subset::EMPTY, 1)))
        .chain(orthant_terms(Subset::EMPTY, i, -1))
        .chain(orthant_terms(Subset::EMPTY, j, -1));
    table.signed_sum(terms)
}

fn beta_ij_unchecked(table: &OrthantTable, i: Subset, j: Subset) -> f64 {
    let bm = medial_from_agreement(agreement_of_maxima(table, i, j));
    let bw = medial_from_agreement(agreement_of_minima(table, i, j));
    component_from_parts(bm, bw)
}

/// `beta_{I,J}` for nonempty disjoint `I`, `J` (zero-based subsets).
pub fn beta_ij(table: &OrthantTable, i: Subset, j: Subset) -> Result<f64> {
    let d = table.dim();
    i.check_within(d)?;
    j.check_within(d)?;
    if i.is_empty() || j.is_empty() {
        return Err(Error::InvalidSubset("I and J must be nonempty".into()));
    }
    if !i.is_disjoint(j) {
        return Err(Error::InvalidSubset(format!("I = {i} and J = {j} overlap")));
    }
    Ok(beta_ij_unchecked(table, i, j))
}

/// `C(1/2) + C^(1/2)`: probability that all coordinates sit on the same side of their medians.
fn all_agree(table: &OrthantTable, s: Subset) -> f64 {
    table.signed_sum(std::iter::once((s, 1)).chain(orthant_terms(Subset::EMPTY, s, 1)))
}

fn check_report_dim(table: &OrthantTable) -> Result<usize> {
    let d = table.dim();
    if d < 2 {
        return Err(Error::param(format!(
            "coefficients need dimension at least 2, got {d}"
        )));
    }
    Ok(d)
}

/// Every coefficient of the vector whose orthant table is `table`.
pub fn coefficients_from_table(table: &OrthantTable) -> Result<CoefficientsReport> {
    let d = check_report_dim(table)?;
    let full = table.full_set();
    let components: Vec<f64> = (0..d)
        .map(|i| {
            let single = Subset::singleton(i);
            beta_ij_unchecked(table, single, full.difference(single))
        })
        .collect();
    let beta = mean(&components);

    let half_scale = (1u64 << (d - 1)) as f64;
    let denominator = half_scale - 1.0;
    let beta_star = (half_scale * all_agree(table, full) - 1.0) / denominator;
    let beta_nelsen = (2.0 * half_scale * table.value(full) - 1.0) / denominator;

    let mut pairwise = Vec::with_capacity(d * (d - 1) / 2);
    for a in 0..d {
        for b in a + 1..d {
            let p = agreement_of_maxima(table, Subset::singleton(a), Subset::singleton(b));
            pairwise.push(medial_from_agreement(p));
        }
    }

    let n = table.sample_size().map(|n| n as usize);
    Ok(CoefficientsReport {
        d,
        beta,
        components,
        beta_star,
        beta_nelsen,
        beta_pairwise_avg: mean(&pairwise),
        source: if n.is_some() {
            ReportSource::Empirical
        } else {
            ReportSource::Exact
        },
        n,
        labels: None,
        ci: None,
        beta_ij: None,
    })
}

/// `beta(sigma_R X)`.
pub fn beta_of_reflection(table: &OrthantTable, mask: ReflectionMask) -> Result<f64> {
    check_report_dim(table)?;
    Ok(coefficients_from_table(&table.reflect(mask)?)?.beta)
}

/// The coefficient computed through independent algebraic routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRepresentations {
    /// Mean of the `beta_{{i}, D\{i}}` components.
    pub definition: f64,
    /// `2 (C + C^) - (1/d) sum_i (C_{D\{i}} + C^_{D\{i}})`.
    pub marginal: f64,
    /// `C + C^ - (1/d) sum_i (C_{sigma_i} + C^_{sigma_i})`.
    pub reflection: f64,
    /// `P(N = 0) + P(N = d) - (P(N = 1) + P(N = d - 1)) / d`.
    pub exceedance: f64,
    /// `(2^(d-1) - 1) / 2^(d-1) * (beta*(X) - (1/d) sum_i beta*(sigma_i X))`.
    pub via_beta_star: f64,
}

impl BetaRepresentations {
    pub fn max_spread(&self) -> f64 {
        let xs = [
            self.definition,
            self.marginal,
            self.reflection,
            self.exceedance,
            self.via_beta_star,
        ];
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

pub fn beta_representations(table: &OrthantTable) -> Result<BetaRepresentations> {
    let d = check_report_dim(table)?;
    let full = table.full_set();
    let dn = d as f64;
    let agree = all_agree(table, full);

    let marginal_terms: Vec<f64> = (0..d)
        .map(|i| all_agree(table, full.difference(Subset::singleton(i))))
        .collect();
    let marginal = 2.0 * agree - mean(&marginal_terms);

    let reflected_terms: Vec<f64> = (0..d)
        .map(|i| {
            let single = Subset::singleton(i);
            let rest = full.difference(single);
            table.signed_sum(orthant_terms(rest, single, 1).chain(orthant_terms(single, rest, 1)))
        })
        .collect();
    let reflection = agree - mean(&reflected_terms);

    let e = table.exceedance_distribution();
    let exceedance = e.prob(0) + e.prob(d) - (e.prob(1) + e.prob(d - 1)) / dn;

    let half_scale = (1u64 << (d - 1)) as f64;
    let star = |t: &OrthantTable| (half_scale * all_agree(t, full) - 1.0) / (half_scale - 1.0);
    let mut reflected_stars = Vec::with_capacity(d);
    for i in 0..d {
        reflected_stars.push(star(&table.reflect(ReflectionMask::single(i, d)?)?));
    }
    let via_beta_star = (half_scale - 1.0) / half_scale * (star(table) - mean(&reflected_stars));

    Ok(BetaRepresentations {
        definition: coefficients_from_table(table)?.beta,
        marginal,
        reflection,
        exceedance,
        via_beta_star,
    })
}
