//! The orthant table at the median point and everything derived from it.
//!
//! `values[S] = P(U_i <= 1/2 for all i in S)`, i.e. the marginal copula of
//! `U_S` at `(1/2, .., 1/2)`. Survival, mixed and reflected orthant
//! probabilities all follow by inclusion-exclusion:
//!
//! ```text
//! P(U_i <= 1/2, i in L;  U_j > 1/2, j in G) = sum_{T subset of G} (-1)^|T| values[L u T]
//! ```
//!
//! A table carries either real values (exact tables built from a copula) or
//! integer row counts over a sample of size `n` (empirical tables). Every
//! signed combination of entries is evaluated in one pass: with compensated
//! summation for real values, in exact integer arithmetic for counts, so that
//! an empirical probability is always `count / n` with a single rounding.

use rayon::prelude::*;

use crate::copula::{Copula, ReflectionMask};
use crate::error::{Error, Result};
use crate::subset::{check_dim, Subset};
use crate::summation::NeumaierSum;

const TABLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Mass {
    Real(Vec<f64>),
    Counts { n: u64, counts: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthantTable {
    dim: usize,
    mass: Mass,
}

/// Evaluates `C_S(1/2, .., 1/2)` for all `2^d` subsets `S`.
pub fn build_orthant_table<C: Copula + ?Sized>(model: &C) -> Result<OrthantTable> {
    model.validate()?;
    let d = model.dim();
    check_dim(d)?;
    let values: Vec<f64> = (0..1u32 << d)
        .into_par_iter()
        .map(|bits| {
            let u: Vec<f64> = (0..d)
                .map(|i| if bits >> i & 1 == 1 { 0.5 } else { 1.0 })
                .collect();
            model.eval(&u)
        })
        .collect();
    OrthantTable::from_values(d, values)
}

impl OrthantTable {
    /// Exact table from `2^d` values indexed by subset bitmask.
    ///
    /// Rejects tables whose empty-set entry is not 1, whose singleton entries
    /// are not 1/2, or whose implied orthant probabilities leave `[0, 1]`.
    pub fn from_values(dim: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if values.len() != 1 << dim {
            return Err(Error::InvalidTable(format!(
                "expected {} entries for dimension {dim}, got {}",
                1usize << dim,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTable(format!(
                "entry {} is not finite",
                Subset::from_bits(bad as u32)
            )));
        }
        if (values[0] - 1.0).abs() > TABLE_TOLERANCE {
            return Err(Error::InvalidTable(format!(
                "entry for the empty set is {}, not 1",
                values[0]
            )));
        }
        for i in 0..dim {
            let v = values[1 << i];
            if (v - 0.5).abs() > TABLE_TOLERANCE {
                return Err(Error::InvalidTable(format!(
                    "margin {} at the median is {v}, not 1/2",
                    i + 1
                )));
            }
        }
        let table = OrthantTable {
            dim,
            mass: Mass::Real(values),
        };
        table.check_probabilities()?;
        Ok(table)
    }

    /// Empirical table: `counts[S]` rows out of `n` have every coordinate in `S` at or below the median.
    pub fn from_counts(dim: usize, n: u64, counts: Vec<u64>) -> Result<Self> {
        check_dim(dim)?;
        if n == 0 {
            return Err(Error::InvalidTable("empty sample".into()));
        }
        if counts.len() != 1 << dim {
            return Err(Error::InvalidTable(format!(
                "expected {} entries for dimension {dim}, got {}",
                1usize << dim,
                counts.len()
            )));
        }
        if counts[0] != n {
            return Err(Error::InvalidTable(format!(
                "count for the empty set is {}, not n = {n}",
                counts[0]
            )));
        }
        let table = OrthantTable {
            dim,
            mass: Mass::Counts { n, counts },
        };
        table.check_probabilities()?;
        Ok(table)
    }

    fn check_probabilities(&self) -> Result<()> {
        for bits in 0..1u32 << self.dim {
            let v = self.value(Subset::from_bits(bits));
            if !(-TABLE_TOLERANCE..=1.0 + TABLE_TOLERANCE).contains(&v) {
                return Err(Error::InvalidTable(format!(
                    "entry {} = {v} is not a probability",
                    Subset::from_bits(bits)
                )));
            }
        }
        let atoms = self.atom_probabilities();
        if let Some(pos) = atoms.iter().position(|&p| p < -TABLE_TOLERANCE) {
            return Err(Error::InvalidTable(format!(
                "implied probability of exceedance pattern {} is {}",
                Subset::from_bits(pos as u32),
                atoms[pos]
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sample size for empirical tables.
    pub fn sample_size(&self) -> Option<u64> {
        match &self.mass {
            Mass::Real(_) => None,
            Mass::Counts { n, .. } => Some(*n),
        }
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self.mass, Mass::Counts { .. })
    }

    pub fn value(&self, s: Subset) -> f64 {
        let k = s.bits() as usize;
        match &self.mass {
            Mass::Real(v) => v[k],
            Mass::Counts { n, counts } => counts[k] as f64 / *n as f64,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..1u32 << self.dim)
            .map(|b| self.value(Subset::from_bits(b)))
            .collect()
    }

    pub fn full_set(&self) -> Subset {
        Subset::full(self.dim)
    }

    /// `sum_k coef_k * values[S_k]`, rounded once for empirical tables.
    pub(crate) fn signed_sum<I>(&self, terms: I) -> f64
    where
        I: IntoIterator<Item = (Subset, i64)>,
    {
        match &self.mass {
            Mass::Real(v) => {
                let mut acc = NeumaierSum::new();
                for (s, c) in terms {
                    acc.add(c as f64 * v[s.bits() as usize]);
                }
                acc.total()
            }
            Mass::Counts { n, counts } => {
                let total: i128 = terms
                    .into_iter()
                    .map(|(s, c)| c as i128 * counts[s.bits() as usize] as i128)
                    .sum();
                total as f64 / *n as f64
            }
        }
    }

    /// `P(U_i <= 1/2 for i in leq, U_j > 1/2 for j in gt)`.
    pub fn orthant_mask_prob(&self, leq: Subset, gt: Subset) -> Result<f64> {
        leq.check_within(self.dim)?;
        gt.check_within(self.dim)?;
        if !leq.is_disjoint(gt) {
            return Err(Error::InvalidSubset(format!("{leq} and {gt} overlap")));
        }
        Ok(self.signed_sum(orthant_terms(leq, gt, 1)))
    }

    /// Probability of every exceedance pattern, indexed by the set of
    /// coordinates above the median.
    pub fn atom_probabilities(&self) -> Vec<f64> {
        let full = self.full_set().bits() as usize;
        match &self.mass {
            Mass::Real(v) => {
                let f = mobius_by_coordinate(v.clone(), self.dim, |a, b| a - b);
                (0..=full).map(|gt| f[full ^ gt]).collect()
            }
            Mass::Counts { n, counts } => {
                let signed: Vec<i64> = counts.iter().map(|&c| c as i64).collect();
                let f = mobius_by_coordinate(signed, self.dim, |a, b| a - b);
                (0..=full)
                    .map(|gt| f[full ^ gt] as f64 / *n as f64)
                    .collect()
            }
        }
    }

    /// Distribution of the number of coordinates above the median.
    pub fn exceedance_distribution(&self) -> ExceedanceDistribution {
        let d = self.dim;
        let full = self.full_set().bits() as usize;
        let probs = match &self.mass {
            Mass::Real(v) => {
                let f = mobius_by_coordinate(v.clone(), d, |a, b| a - b);
                let mut sums = vec![NeumaierSum::new(); d + 1];
                for leq in 0..=full {
                    sums[d - (leq as u32).count_ones() as usize].add(f[leq]);
                }
                sums.iter().map(NeumaierSum::total).collect()
            }
            Mass::Counts { n, counts } => {
                let signed: Vec<i64> = counts.iter().map(|&c| c as i64).collect();
                let f = mobius_by_coordinate(signed, d, |a, b| a - b);
                let mut sums = vec![0i64; d + 1];
                for leq in 0..=full {
                    sums[d - (leq as u32).count_ones() as usize] += f[leq];
                }
                sums.into_iter().map(|c| c as f64 / *n as f64).collect()
            }
        };
        ExceedanceDistribution { probs }
    }

    /// Table of the reflected vector `sigma_R U`, which replaces `U_i` by `1 - U_i` for `i` in `R`.
    pub fn reflect(&self, mask: ReflectionMask) -> Result<OrthantTable> {
        if mask.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: mask.dim(),
            });
        }
        let r = mask.mask();
        let mass = match &self.mass {
            Mass::Real(v) => {
                Mass::Real(reflect_by_coordinate(v.clone(), self.dim, r, |a, b| a - b))
            }
            Mass::Counts { n, counts } => Mass::Counts {
                n: *n,
                counts: reflect_by_coordinate(counts.clone(), self.dim, r, |a, b| a - b),
            },
        };
        Ok(OrthantTable {
            dim: self.dim,
            mass,
        })
    }
}

/// Inclusion-exclusion expansion of `P(leq <= 1/2, gt > 1/2)` scaled by `sign`.
pub(crate) fn orthant_terms(
    leq: Subset,
    gt: Subset,
    sign: i64,
) -> impl Iterator<Item = (Subset, i64)> {
    gt.subsets().map(move |t| {
        let parity = if t.len() % 2 == 0 { 1 } else { -1 };
        (leq.union(t), sign * parity)
    })
}

/// After the pass over coordinate `k`, entries without bit `k` describe
/// "coordinate `k` above the median" instead of "coordinate `k` unconstrained".
/// Every intermediate entry is itself an orthant probability.
fn mobius_by_coordinate<T: Copy>(mut f: Vec<T>, d: usize, sub: impl Fn(T, T) -> T) -> Vec<T> {
    for k in 0..d {
        let bit = 1usize << k;
        for m in 0..f.len() {
            if m & bit == 0 {
                f[m] = sub(f[m], f[m | bit]);
            }
        }
    }
    f
}

/// For `k` in the mask, "coordinate `k` at or below the median" becomes
/// "coordinate `k` above the median" in every entry containing `k`.
fn reflect_by_coordinate<T: Copy>(
    mut f: Vec<T>,
    d: usize,
    mask: Subset,
    sub: impl Fn(T, T) -> T,
) -> Vec<T> {
    for k in mask.indices().filter(|&k| k < d) {
        let bit = 1usize << k;
        for m in 0..f.len() {
            if m & bit != 0 {
                f[m] = sub(f[m ^ bit], f[m]);
            }
        }
    }
    f
}

/// Law of the exceedance count `N = #{i : U_i > 1/2}`; `probs[k] = P(N = k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceDistribution {
    pub probs: Vec<f64>,
}

impl ExceedanceDistribution {
    pub fn dim(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        crate::summation::compensated_sum(self.probs.iter().copied())
    }
}
