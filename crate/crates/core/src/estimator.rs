//! Empirical coefficients from data through rank pseudo-observations.
//!
//! `U^_{i,j} = (1/(n+1)) #{l : X_{i,l} <= X_{i,j}}`, so tied values share the
//! largest rank of their group. A pseudo-observation counts as "at or below
//! the median" when `U^ <= 1/2`; for odd `n` the middle rank sits exactly on
//! `1/2` and is counted below. Both tests are done on integer ranks
//! (`2 k <= n + 1`), never on rounded floats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    coefficients_from_table, component_from_parts, mean, medial_from_agreement, CoefficientsReport,
};
use crate::error::{Error, Result};
use crate::orthant::OrthantTable;
use crate::subset::{check_dim, Subset};

/// `n` observations of `d` variables, stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DataMatrix {
    pub fn new(labels: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let d = columns.len();
        if d < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 variables, got {d}"
            )));
        }
        if labels.len() != d {
            return Err(Error::InvalidData(format!(
                "{} labels for {d} columns",
                labels.len()
            )));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column `{}` has {} rows, expected {n}",
                    labels[j],
                    col.len()
                )));
            }
            if let Some(r) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "column `{}`, row {}: non-finite value {}",
                    labels[j],
                    r + 1,
                    col[r]
                )));
            }
        }
        Ok(DataMatrix { labels, columns })
    }

    /// Columns labelled `X1 .. Xd`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (1..=columns.len()).map(|k| format!("X{k}")).collect();
        Self::new(labels, columns)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::InvalidData(format!("row {} is ragged", r + 1)));
        }
        let columns = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Self::from_columns(columns)
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Rows picked by index, repetitions allowed.
    pub fn select_rows(&self, rows: &[usize]) -> Result<DataMatrix> {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        DataMatrix::new(self.labels.clone(), columns)
    }

    /// Negates the columns in `cols`.
    pub fn reflected(&self, cols: Subset) -> DataMatrix {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if cols.contains(j) {
                    c.iter().map(|x| -x).collect()
                } else {
                    c.clone()
                }
            })
            .collect();
        DataMatrix {
            labels: self.labels.clone(),
            columns,
        }
    }
}

/// Ranks `k` in `1..=n` per column; the pseudo-observation is `k / (n + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoObservations {
    n: usize,
    ranks: Vec<Vec<u32>>,
}

impl PseudoObservations {
    pub fn from_ranks(n: usize, ranks: Vec<Vec<u32>>) -> Result<Self> {
        for col in &ranks {
            if col.len() != n || col.iter().any(|&k| k == 0 || k as usize > n) {
                return Err(Error::InvalidData(format!(
                    "ranks must be n = {n} values in 1..=n"
                )));
            }
        }
        Ok(PseudoObservations { n, ranks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, col: usize, row: usize) -> u32 {
        self.ranks[col][row]
    }

    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.ranks[col][row] as f64 / (self.n + 1) as f64
    }

    pub fn column_values(&self, col: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.value(col, r)).collect()
    }

    fn rank_at_or_below_median(&self, rank: u32) -> bool {
        2 * rank as u64 <= self.n as u64 + 1
    }

    pub fn at_or_below_median(&self, col: usize, row: usize) -> bool {
        self.rank_at_or_below_median(self.ranks[col][row])
    }

    /// Bitmask of the coordinates of `row` at or below the median.
    fn row_mask(&self, row: usize) -> u32 {
        let mut bits = 0;
        for (j, col) in self.ranks.iter().enumerate() {
            if self.rank_at_or_below_median(col[row]) {
                bits |= 1 << j;
            }
        }
        bits
    }
}

pub fn pseudo_observations(data: &DataMatrix) -> Result<PseudoObservations> {
    let n = data.n_rows();
    let ranks = data
        .columns()
        .par_iter()
        .map(|col| {
            let mut sorted = col.clone();
            sorted.sort_by(f64::total_cmp);
            col.iter()
                .map(|&x| sorted.partition_point(|&y| y <= x) as u32)
                .collect()
        })
        .collect();
    Ok(PseudoObservations { n, ranks })
}

/// Row-wise maximum and minimum of the pseudo-observations outside coordinate `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowExtremes {
    pub excluded: usize,
    pub max_ranks: Vec<u32>,
    pub min_ranks: Vec<u32>,
}

pub fn row_extremes(pseudo: &PseudoObservations, i: usize) -> Result<RowExtremes> {
    let d = pseudo.dim();
    if i >= d || d < 2 {
        return Err(Error::InvalidSubset(format!(
            "coordinate {} out of range for dimension {d}",
            i + 1
        )));
    }
    let others: Vec<&Vec<u32>> = (0..d)
        .filter(|&r| r != i)
        .map(|r| &pseudo.ranks[r])
        .collect();
    let (max_ranks, min_ranks) = (0..pseudo.n)
        .map(|row| {
            others.iter().fold((0, u32::MAX), |(hi, lo), col| {
                (hi.max(col[row]), lo.min(col[row]))
            })
        })
        .unzip();
    Ok(RowExtremes {
        excluded: i,
        max_ranks,
        min_ranks,
    })
}

/// `values[S]` = fraction of rows whose coordinates in `S` are all at or below the median.
pub fn empirical_orthant_table(pseudo: &PseudoObservations) -> Result<OrthantTable> {
    let d = pseudo.dim();
    check_dim(d)?;
    let size = 1usize << d;
    let mut counts = vec![0u64; size];
    for row in 0..pseudo.n {
        counts[pseudo.row_mask(row) as usize] += 1;
    }
    // Superset sums: counts[S] = #{rows whose mask contains S}.
    for k in 0..d {
        let bit = 1usize << k;
        for m in 0..size {
            if m & bit == 0 {
                counts[m] += counts[m | bit];
            }
        }
    }
    OrthantTable::from_counts(d, pseudo.n as u64, counts)
}

/// Components from the indicator sums over rows, then the companion
/// coefficients from the empirical orthant table.
pub fn empirical_coefficients(data: &DataMatrix) -> Result<CoefficientsReport> {
    let pseudo = pseudo_observations(data)?;
    let table = empirical_orthant_table(&pseudo)?;
    let mut report = coefficients_from_table(&table)?;

    let n = pseudo.n();
    let below = |rank: u32| pseudo.rank_at_or_below_median(rank);
    let mut components = Vec::with_capacity(pseudo.dim());
    for i in 0..pseudo.dim() {
        let ext = row_extremes(&pseudo, i)?;
        let own = &pseudo.ranks[i];
        let mut agree_max = 0u64;
        let mut agree_min = 0u64;
        for ((&k, &hi), &lo) in own.iter().zip(&ext.max_ranks).zip(&ext.min_ranks) {
            let u = below(k);
            if u == below(hi) {
                agree_max += 1;
            }
            if u == below(lo) {
                agree_min += 1;
            }
        }
        let beta_max = medial_from_agreement(agree_max as f64 / n as f64);
        let beta_min = medial_from_agreement(agree_min as f64 / n as f64);
        components.push(component_from_parts(beta_max, beta_min));
    }
    report.beta = mean(&components);
    report.components = components;
    report.labels = Some(data.labels().to_vec());
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Percentile bootstrap intervals for the coefficient and its components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapIntervals {
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
    pub beta: Interval,
    pub components: Vec<Interval>,
}

pub const MIN_BOOTSTRAP_REPLICATES: usize = 100;

/// Type-7 quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn percentile_interval(mut xs: Vec<f64>, level: f64) -> Interval {
    xs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Interval {
        lower: quantile_sorted(&xs, tail),
        upper: quantile_sorted(&xs, 1.0 - tail),
    }
}

/// Nonparametric bootstrap over rows; replicate `r` draws from ChaCha8
/// stream `r` of `seed`, so results do not depend on thread scheduling.
pub fn bootstrap_ci(
    data: &DataMatrix,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapIntervals> {
    if replicates < MIN_BOOTSTRAP_REPLICATES {
        return Err(Error::param(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_REPLICATES} replicates, got {replicates}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("level {level} is outside (0, 1)")));
    }
    let n = data.n_rows();
    let d = data.n_cols();
    let draws: Vec<(f64, Vec<f64>)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let report = empirical_coefficients(&data.select_rows(&rows)?)?;
            Ok((report.beta, report.components))
        })
        .collect::<Result<_>>()?;

    let beta = percentile_interval(draws.iter().map(|(b, _)| *b).collect(), level);
    let components = (0..d)
        .map(|i| percentile_interval(draws.iter().map(|(_, c)| c[i]).collect(), level))
        .collect();
    Ok(BootstrapIntervals {
        level,
        replicates,
        seed,
        beta,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_col(a: Vec<f64>, b: Vec<f64>) -> DataMatrix {
        DataMatrix::from_columns(vec![a, b]).unwrap()
    }

    #[test]
    fn ranks_over_n_plus_one() {
        let data = two_col(vec![3.0, 1.0, 2.0, 4.0], vec![1.0, 2.0, 3.0, 4.0]);
        let p = pseudo_observations(&data).unwrap();
        let got = p.column_values(0);
        for (g, e) in got.iter().zip([0.6, 0.2, 0.4, 0.8]) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn ties_take_the_largest_rank() {
        let data = two_col(vec![1.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]);
        let p = pseudo_observations(&data).unwrap();
        assert_eq!(p.column_values(0), vec![0.5, 0.5, 0.75]);
        // 2/4 sits exactly on the median and counts as below it.
        assert!(p.at_or_below_median(0, 0));
        assert!(!p.at_or_below_median(0, 2));
    }

    #[test]
    fn increasing_transforms_keep_ranks() {
        let x = vec![0.3, -1.2, 4.5, 2.2, 0.0, 9.1];
        let y = vec![1.0, 0.5, 0.25, 2.0, 3.0, 0.1];
        let a = pseudo_observations(&two_col(x.clone(), y.clone())).unwrap();
        let b = pseudo_observations(&two_col(
            x.iter().map(|v| v.exp()).collect(),
            y.iter().map(|v| v.powi(3) + 7.0).collect(),
        ))
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn comonotone_and_countermonotone_data() {
        let idx: Vec<f64> = (0..4).map(f64::from).collect();
        let data = DataMatrix::from_columns(vec![
            idx.clone(),
            idx.iter().map(|x| x * 2.0 + 1.0).collect(),
            idx.iter().map(|x| x.exp()).collect(),
        ])
        .unwrap();
        let r = empirical_coefficients(&data).unwrap();
        assert_eq!(r.beta, 1.0);
        assert_eq!(r.n, Some(4));

        let data = two_col(idx.clone(), idx.iter().map(|x| -x).collect());
        assert_eq!(empirical_coefficients(&data).unwrap().beta, -1.0);
    }

    #[test]
    fn empirical_table_examples() {
        let p = PseudoObservations::from_ranks(2, vec![vec![1, 2], vec![1, 2]]).unwrap();
        let t = empirical_orthant_table(&p).unwrap();
        assert_eq!(t.value(Subset::from_bits(0b11)), 0.5);
        assert_eq!(t.value(Subset::EMPTY), 1.0);

        let p =
            PseudoObservations::from_ranks(4, vec![vec![1, 2, 3, 4], vec![1, 2, 3, 4]]).unwrap();
        let t = empirical_orthant_table(&p).unwrap();
        assert_eq!(t.value(Subset::from_bits(0b11)), 0.5);
    }

    #[test]
    fn row_extremes_bracket() {
        let data = DataMatrix::from_columns(vec![
            vec![1.0, 5.0, 3.0, 2.0],
            vec![4.0, 1.0, 2.0, 3.0],
            vec![2.0, 2.5, 9.0, 0.0],
        ])
        .unwrap();
        let p = pseudo_observations(&data).unwrap();
        let e = row_extremes(&p, 0).unwrap();
        assert!(e
            .min_ranks
            .iter()
            .zip(&e.max_ranks)
            .all(|(lo, hi)| lo <= hi));
        assert_eq!(e.max_ranks, vec![4, 3, 4, 3]);
        assert_eq!(e.min_ranks, vec![2, 1, 2, 1]);
        assert!(row_extremes(&p, 3).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(DataMatrix::from_columns(vec![vec![1.0, 2.0]]).is_err());
        assert!(DataMatrix::from_columns(vec![vec![1.0], vec![2.0]]).is_err());
        assert!(DataMatrix::from_columns(vec![vec![1.0, f64::NAN], vec![2.0, 3.0]]).is_err());
        assert!(DataMatrix::from_columns(vec![vec![1.0, 2.0], vec![2.0]]).is_err());
        assert!(PseudoObservations::from_ranks(2, vec![vec![0, 1]]).is_err());
        let data = two_col(vec![1.0, 2.0, 3.0], vec![3.0, 1.0, 2.0]);
        assert!(bootstrap_ci(&data, 99, 0.9, 1).is_err());
        assert!(bootstrap_ci(&data, 100, 1.0, 1).is_err());
        assert!(bootstrap_ci(&data, 100, 0.0, 1).is_err());
    }

    #[test]
    fn bootstrap_on_comonotone_data_is_degenerate() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let data = DataMatrix::from_columns(vec![
            x.clone(),
            x.iter().map(|v| v * v).collect(),
            x.iter().map(|v| v + 100.0).collect(),
        ])
        .unwrap();
        let ci = bootstrap_ci(&data, 120, 0.9, 5).unwrap();
        assert_eq!(
            ci.beta,
            Interval {
                lower: 1.0,
                upper: 1.0
            }
        );
        assert_eq!(ci, bootstrap_ci(&data, 120, 0.9, 5).unwrap());
    }

    #[test]
    fn quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert_eq!(quantile_sorted(&xs, 0.125), 1.5);
    }
}
