//! Seeded Monte Carlo samples with uniform margins.
//!
//! Rows are generated in chunks of [`CHUNK_ROWS`]. Every (leaf block, chunk)
//! pair draws from its own ChaCha8 stream of the seed, so the output does not
//! depend on the number of threads or on scheduling.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{Copula, CopulaModel};
use crate::error::{Error, Result};
use crate::estimator::DataMatrix;
use crate::orthant::OrthantTable;
use crate::subset::check_dim;

pub const CHUNK_ROWS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// `n` rows of a `dim`-variate sample, stored row-major, all entries in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub dim: usize,
    pub n: usize,
    pub rows: Vec<f64>,
    /// Canonical model string.
    pub model: String,
    pub seed: Seed,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows
            .iter()
            .skip(j)
            .step_by(self.dim)
            .copied()
            .collect()
    }

    /// Columns labelled `u1 .. ud`.
    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        let labels = (1..=self.dim).map(|k| format!("u{k}")).collect();
        DataMatrix::new(labels, (0..self.dim).map(|j| self.column(j)).collect())
    }
}

/// Orthant frequencies of the raw sample: `counts[S]` rows have `u_i <= 1/2` for all `i` in `S`.
pub fn orthant_frequencies(batch: &SampleBatch) -> Result<OrthantTable> {
    let d = batch.dim;
    let size = 1usize << d;
    let mut counts = vec![0u64; size];
    for i in 0..batch.n {
        let bits = batch
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &u)| u <= 0.5)
            .fold(0usize, |acc, (j, _)| acc | 1 << j);
        counts[bits] += 1;
    }
    for k in 0..d {
        let bit = 1usize << k;
        for m in 0..size {
            if m & bit == 0 {
                counts[m] += counts[m | bit];
            }
        }
    }
    OrthantTable::from_counts(d, batch.n as u64, counts)
}

/// A non-composite model placed on coordinates of the full vector.
struct Leaf<'a> {
    model: &'a CopulaModel,
    coords: Vec<usize>,
}

fn flatten<'a>(model: &'a CopulaModel, coords: Vec<usize>, out: &mut Vec<Leaf<'a>>) {
    match model {
        CopulaModel::Compose(blocks) => {
            for b in blocks {
                let mapped = b.coords.iter().map(|&c| coords[c]).collect();
                flatten(&b.model, mapped, out);
            }
        }
        _ => out.push(Leaf { model, coords }),
    }
}

const LOWEST: f64 = f64::MIN_POSITIVE * f64::EPSILON;
const HIGHEST: f64 = 1.0 - f64::EPSILON / 2.0;

/// Keeps values inside the open unit interval.
fn interior(u: f64) -> f64 {
    u.clamp(LOWEST, HIGHEST)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(Open01)
}

fn exponential(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(Exp1)
}

/// One-sided stable variable with Laplace transform `exp(-t^a)`, `0 < a < 1`,
/// by the Chambers-Mallows-Stuck (Kanter) representation.
fn positive_stable(a: f64, rng: &mut ChaCha8Rng) -> f64 {
    let theta = PI * uniform(rng);
    let w = exponential(rng);
    let left = (a * theta).sin() / theta.sin().powf(1.0 / a);
    let right = (((1.0 - a) * theta).sin() / w).powf((1.0 - a) / a);
    left * right
}

fn draw_leaf(model: &CopulaModel, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    match *model {
        CopulaModel::Product(_) => out.iter_mut().for_each(|x| *x = uniform(rng)),
        CopulaModel::Comonotone(_) => {
            let u = uniform(rng);
            out.fill(u);
        }
        CopulaModel::CountermonotonePair => {
            let u = uniform(rng);
            out[0] = u;
            out[1] = 1.0 - u;
        }
        CopulaModel::Gumbel { delta, .. } => {
            if delta == 1.0 {
                out.iter_mut().for_each(|x| *x = uniform(rng));
                return;
            }
            let s = positive_stable(delta, rng);
            for x in out.iter_mut() {
                let e = exponential(rng);
                *x = interior((-(e / s).powf(delta)).exp());
            }
        }
        CopulaModel::MarshallOlkin { alpha1, alpha2 } => {
            // Shock model with common rate 1 and individual rates 1/alpha - 1.
            let common = exponential(rng);
            for (x, alpha) in out.iter_mut().zip([alpha1, alpha2]) {
                let own = exponential(rng);
                *x = if alpha == 0.0 {
                    uniform(rng)
                } else {
                    let rate = 1.0 / alpha - 1.0;
                    let t = if rate == 0.0 {
                        common
                    } else {
                        common.min(own / rate)
                    };
                    interior((-(rate + 1.0) * t).exp())
                };
            }
        }
        CopulaModel::Compose(_) => unreachable!("composite models are flattened"),
    }
}

fn stream_id(leaf: usize, chunk: usize) -> u64 {
    (leaf as u64) << 32 | chunk as u64
}

pub fn sample(model: &CopulaModel, n: usize, seed: Seed) -> Result<SampleBatch> {
    model.validate()?;
    let d = model.dim();
    check_dim(d)?;
    if n == 0 {
        return Err(Error::param("sample size must be at least 1"));
    }
    let mut leaves = Vec::new();
    flatten(model, (0..d).collect(), &mut leaves);

    let mut rows = vec![0.0; n * d];
    rows.par_chunks_mut(CHUNK_ROWS * d)
        .enumerate()
        .for_each(|(chunk, block)| {
            let mut buf = Vec::with_capacity(d);
            for (k, leaf) in leaves.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
                rng.set_stream(stream_id(k, chunk));
                buf.resize(leaf.coords.len(), 0.0);
                for row in block.chunks_mut(d) {
                    draw_leaf(leaf.model, &mut rng, &mut buf);
                    for (&c, &u) in leaf.coords.iter().zip(&buf) {
                        row[c] = u;
                    }
                }
            }
        });

    Ok(SampleBatch {
        dim: d,
        n,
        rows,
        model: model.to_string(),
        seed,
    })
}
