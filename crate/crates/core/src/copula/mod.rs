//! Copula models and their point evaluation.

mod axioms;
mod syntax;

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::subset::Subset;

pub use axioms::{axiom_check, AxiomReport, AxiomViolation};

/// Anything that can be evaluated as a `d`-dimensional copula.
///
/// [`CopulaModel`] is the only production implementation; the trait exists so
/// that the orthant machinery and the axiom checker accept test fixtures.
pub trait Copula: Send + Sync {
    fn dim(&self) -> usize;

    /// `C(u)` for a point already known to have `dim()` coordinates in `[0, 1]`.
    fn eval(&self, u: &[f64]) -> f64;

    fn validate(&self) -> Result<()> {
        Ok(())
    }

    fn cdf(&self, u: &[f64]) -> Result<f64> {
        self.validate()?;
        check_point(u, self.dim())?;
        Ok(self.eval(u))
    }

    /// Marginal copula over `subset`, evaluated at `u` (one value per member of
    /// `subset`, in increasing coordinate order).
    fn marginal_cdf(&self, subset: Subset, u: &[f64]) -> Result<f64> {
        self.validate()?;
        let d = self.dim();
        if subset.is_empty() {
            return Err(Error::InvalidSubset("marginal over the empty set".into()));
        }
        subset.check_within(d)?;
        check_point(u, subset.len())?;
        let mut full = vec![1.0; d];
        for (slot, i) in subset.indices().enumerate() {
            full[i] = u[slot];
        }
        Ok(self.eval(&full))
    }
}

pub(crate) fn check_point(u: &[f64], d: usize) -> Result<()> {
    if u.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: u.len(),
        });
    }
    if let Some((index, &value)) = u
        .iter()
        .enumerate()
        .find(|(_, x)| !(0.0..=1.0).contains(*x))
    {
        return Err(Error::CoordinateOutOfRange { index, value });
    }
    Ok(())
}

/// A point of `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::param("a point needs at least one coordinate"));
        }
        check_point(&coords, coords.len())?;
        Ok(Point(coords))
    }

    /// `(1/2, .., 1/2)`.
    pub fn median(d: usize) -> Self {
        Point(vec![0.5; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// The set `R` of coordinates negated by a reflection `sigma_R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReflectionMask {
    mask: Subset,
    dim: usize,
}

impl ReflectionMask {
    pub fn new(mask: Subset, dim: usize) -> Result<Self> {
        mask.check_within(dim)?;
        Ok(ReflectionMask { mask, dim })
    }

    pub fn none(dim: usize) -> Self {
        ReflectionMask {
            mask: Subset::EMPTY,
            dim,
        }
    }

    pub fn all(dim: usize) -> Self {
        ReflectionMask {
            mask: Subset::full(dim),
            dim,
        }
    }

    pub fn single(i: usize, dim: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidSubset(format!(
                "index {} out of range for dimension {dim}",
                i + 1
            )));
        }
        Ok(ReflectionMask {
            mask: Subset::singleton(i),
            dim,
        })
    }

    pub fn mask(&self) -> Subset {
        self.mask
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All `2^d` reflections.
    pub fn all_masks(dim: usize) -> impl Iterator<Item = ReflectionMask> {
        (0..(1u32 << dim)).map(move |bits| ReflectionMask {
            mask: Subset::from_bits(bits),
            dim,
        })
    }
}

/// A model block placed on an explicit list of coordinates of the composite vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub model: CopulaModel,
    /// Zero-based positions in the composite vector, one per block coordinate.
    pub coords: Vec<usize>,
}

/// Declarative copula model.
#[derive(Debug, Clone, PartialEq)]
pub enum CopulaModel {
    /// Independence, `C(u) = u_1 ... u_d`.
    Product(usize),
    /// Upper Frechet bound, `C(u) = min_i u_i`.
    Comonotone(usize),
    /// Lower Frechet bound in two dimensions, `C(u) = max(u_1 + u_2 - 1, 0)`.
    CountermonotonePair,
    /// `C(u) = exp(-(sum_i (-ln u_i)^(1/delta))^delta)`, `0 < delta <= 1`.
    Gumbel { dim: usize, delta: f64 },
    /// Bivariate Marshall-Olkin, `C(u) = min(u_1^(1-alpha1) u_2, u_1 u_2^(1-alpha2))`.
    MarshallOlkin { alpha1: f64, alpha2: f64 },
    /// Product of independent blocks over a partition of the coordinates.
    Compose(Vec<Block>),
}

impl CopulaModel {
    pub fn product(dim: usize) -> Result<Self> {
        let m = CopulaModel::Product(dim);
        m.validate()?;
        Ok(m)
    }

    pub fn comonotone(dim: usize) -> Result<Self> {
        let m = CopulaModel::Comonotone(dim);
        m.validate()?;
        Ok(m)
    }

    pub fn gumbel(dim: usize, delta: f64) -> Result<Self> {
        let m = CopulaModel::Gumbel { dim, delta };
        m.validate()?;
        Ok(m)
    }

    pub fn marshall_olkin(alpha1: f64, alpha2: f64) -> Result<Self> {
        let m = CopulaModel::MarshallOlkin { alpha1, alpha2 };
        m.validate()?;
        Ok(m)
    }

    /// Blocks laid out on consecutive coordinates, in order.
    pub fn compose(models: Vec<CopulaModel>) -> Result<Self> {
        let mut next = 0;
        let blocks = models
            .into_iter()
            .map(|model| {
                let d = model.dim();
                let coords = (next..next + d).collect();
                next += d;
                Block { model, coords }
            })
            .collect();
        let m = CopulaModel::Compose(blocks);
        m.validate()?;
        Ok(m)
    }

    /// Blocks on explicitly listed coordinates.
    pub fn compose_listed(blocks: Vec<Block>) -> Result<Self> {
        let m = CopulaModel::Compose(blocks);
        m.validate()?;
        Ok(m)
    }

    /// The copula of `(U_{perm[0]}, .., U_{perm[d-1]})` when `self` is the copula of `U`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let d = self.dim();
        if perm.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: perm.len(),
            });
        }
        // Original coordinate j lands at the position k where perm[k] == j.
        let mut coords = vec![usize::MAX; d];
        for (k, &j) in perm.iter().enumerate() {
            if j >= d || coords[j] != usize::MAX {
                return Err(Error::param("not a permutation"));
            }
            coords[j] = k;
        }
        CopulaModel::compose_listed(vec![Block {
            model: self.clone(),
            coords,
        }])
    }

    pub fn is_contiguous_compose(blocks: &[Block]) -> bool {
        let mut next = 0;
        for b in blocks {
            if b.coords.iter().enumerate().any(|(k, &c)| c != next + k) {
                return false;
            }
            next += b.coords.len();
        }
        true
    }
}

impl Copula for CopulaModel {
    fn dim(&self) -> usize {
        match self {
            CopulaModel::Product(d) | CopulaModel::Comonotone(d) => *d,
            CopulaModel::CountermonotonePair | CopulaModel::MarshallOlkin { .. } => 2,
            CopulaModel::Gumbel { dim, .. } => *dim,
            CopulaModel::Compose(blocks) => blocks.iter().map(|b| b.coords.len()).sum(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CopulaModel::Product(d) | CopulaModel::Comonotone(d) if *d == 0 => {
                Err(Error::param("dimension must be at least 1"))
            }
            CopulaModel::Gumbel { dim, delta } => {
                if *dim == 0 {
                    Err(Error::param("dimension must be at least 1"))
                } else if !(*delta > 0.0 && *delta <= 1.0) {
                    Err(Error::param(format!(
                        "gumbel delta = {delta} is outside (0, 1]"
                    )))
                } else {
                    Ok(())
                }
            }
            CopulaModel::MarshallOlkin { alpha1, alpha2 } => {
                for (name, a) in [("a1", alpha1), ("a2", alpha2)] {
                    if !(0.0..=1.0).contains(a) {
                        return Err(Error::param(format!(
                            "marshall-olkin {name} = {a} is outside [0, 1]"
                        )));
                    }
                }
                Ok(())
            }
            CopulaModel::Compose(blocks) => {
                if blocks.is_empty() {
                    return Err(Error::param("composition needs at least one block"));
                }
                let total: usize = blocks.iter().map(|b| b.coords.len()).sum();
                let mut seen = vec![false; total];
                for b in blocks {
                    b.model.validate()?;
                    if b.coords.len() != b.model.dim() {
                        return Err(Error::param(format!(
                            "block of dimension {} placed on {} coordinates",
                            b.model.dim(),
                            b.coords.len()
                        )));
                    }
                    for &c in &b.coords {
                        if c >= total || seen[c] {
                            return Err(Error::param(
                                "composition blocks must partition the coordinates",
                            ));
                        }
                        seen[c] = true;
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, u: &[f64]) -> f64 {
        match self {
            CopulaModel::Product(_) => u.iter().product(),
            CopulaModel::Comonotone(_) => u.iter().copied().fold(1.0, f64::min),
            CopulaModel::CountermonotonePair => (u[0] + u[1] - 1.0).max(0.0),
            CopulaModel::Gumbel { delta, .. } => gumbel_cdf(u, *delta),
            CopulaModel::MarshallOlkin { alpha1, alpha2 } => {
                let (u1, u2) = (u[0], u[1]);
                if u1 == 0.0 || u2 == 0.0 {
                    return 0.0;
                }
                let a = u1.powf(1.0 - alpha1) * u2;
                let b = u1 * u2.powf(1.0 - alpha2);
                a.min(b)
            }
            CopulaModel::Compose(blocks) => {
                let mut buf = Vec::new();
                let mut acc = 1.0;
                for b in blocks {
                    buf.clear();
                    buf.extend(b.coords.iter().map(|&c| u[c]));
                    acc *= b.model.eval(&buf);
                    if acc == 0.0 {
                        break;
                    }
                }
                acc
            }
        }
    }
}

fn gumbel_cdf(u: &[f64], delta: f64) -> f64 {
    if u.contains(&0.0) {
        return 0.0;
    }
    let theta = 1.0 / delta;
    let s: f64 = u
        .iter()
        .filter(|&&x| x < 1.0)
        .map(|&x| (-x.ln()).powf(theta))
        .sum();
    if s == 0.0 {
        1.0
    } else {
        (-s.powf(delta)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(steps: usize) -> Vec<f64> {
        (0..=steps).map(|k| k as f64 / steps as f64).collect()
    }

    fn families() -> Vec<CopulaModel> {
        vec![
            CopulaModel::product(3).unwrap(),
            CopulaModel::comonotone(3).unwrap(),
            CopulaModel::CountermonotonePair,
            CopulaModel::gumbel(3, 0.5).unwrap(),
            CopulaModel::gumbel(2, 0.1).unwrap(),
            CopulaModel::marshall_olkin(0.4, 1.0).unwrap(),
            CopulaModel::marshall_olkin(0.3, 0.7).unwrap(),
            CopulaModel::compose(vec![
                CopulaModel::CountermonotonePair,
                CopulaModel::product(2).unwrap(),
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn spot_values() {
        let p3 = CopulaModel::product(3).unwrap();
        assert_eq!(p3.cdf(&[0.5, 0.5, 0.5]).unwrap(), 0.125);
        let m2 = CopulaModel::comonotone(2).unwrap();
        assert_eq!(m2.cdf(&[0.3, 0.7]).unwrap(), 0.3);
        let g = CopulaModel::gumbel(3, 0.5).unwrap();
        let expected = 2f64.powf(-(3f64.sqrt()));
        assert!((g.cdf(&[0.5; 3]).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.301024).abs() < 1e-6);
    }

    #[test]
    fn marshall_olkin_matches_example_factor() {
        // (u1^delta min u2) u1^(1-delta) with alpha1 = delta, alpha2 = 1.
        let delta = 0.35;
        let mo = CopulaModel::marshall_olkin(delta, 1.0).unwrap();
        for &u1 in &grid(10) {
            for &u2 in &grid(10) {
                let direct = u1.powf(delta).min(u2) * u1.powf(1.0 - delta);
                assert!((mo.eval(&[u1, u2]) - direct).abs() < 1e-15, "{u1} {u2}");
            }
        }
    }

    #[test]
    fn grounded_and_uniform_margins() {
        for model in families() {
            let d = model.dim();
            for i in 0..d {
                for &t in &grid(20) {
                    let mut u = vec![0.7; d];
                    u[i] = 0.0;
                    assert_eq!(model.eval(&u), 0.0, "{model:?}");
                    let mut v = vec![1.0; d];
                    v[i] = t;
                    assert!((model.eval(&v) - t).abs() < 1e-12, "{model:?} {i} {t}");
                }
            }
        }
    }

    #[test]
    fn degenerate_parameters_reduce_to_known_copulas() {
        let g1 = CopulaModel::gumbel(3, 1.0).unwrap();
        let p3 = CopulaModel::product(3).unwrap();
        let mo0 = CopulaModel::marshall_olkin(0.0, 0.0).unwrap();
        let mo1 = CopulaModel::marshall_olkin(1.0, 1.0).unwrap();
        let p2 = CopulaModel::product(2).unwrap();
        let m2 = CopulaModel::comonotone(2).unwrap();
        for &a in &grid(8) {
            for &b in &grid(8) {
                for &c in &grid(4) {
                    assert!((g1.eval(&[a, b, c]) - p3.eval(&[a, b, c])).abs() < 1e-12);
                }
                assert_eq!(mo0.eval(&[a, b]), p2.eval(&[a, b]));
                assert_eq!(mo1.eval(&[a, b]), m2.eval(&[a, b]));
            }
        }
    }

    #[test]
    fn monotone_in_each_coordinate() {
        for model in families() {
            let d = model.dim();
            for i in 0..d {
                let mut prev = 0.0;
                for &t in &grid(25) {
                    let mut u = vec![0.6; d];
                    u[i] = t;
                    let v = model.eval(&u);
                    assert!(v + 1e-15 >= prev, "{model:?} coordinate {i} at {t}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn compose_is_product_of_blocks() {
        let a = CopulaModel::gumbel(2, 0.4).unwrap();
        let b = CopulaModel::marshall_olkin(0.2, 0.9).unwrap();
        let c = CopulaModel::compose(vec![a.clone(), b.clone()]).unwrap();
        let u = [0.3, 0.8, 0.45, 0.6];
        assert_eq!(c.eval(&u), a.eval(&u[..2]) * b.eval(&u[2..]));
    }

    #[test]
    fn listed_blocks_follow_their_coordinates() {
        let w = CopulaModel::compose_listed(vec![
            Block {
                model: CopulaModel::CountermonotonePair,
                coords: vec![0, 2],
            },
            Block {
                model: CopulaModel::product(1).unwrap(),
                coords: vec![1],
            },
        ])
        .unwrap();
        let u = [0.7, 0.5, 0.6];
        assert!((w.eval(&u) - 0.3 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginals() {
        let p4 = CopulaModel::product(4).unwrap();
        let s = Subset::from_indices(&[0, 2], 4).unwrap();
        assert_eq!(p4.marginal_cdf(s, &[0.5, 0.5]).unwrap(), 0.25);

        let m5 = CopulaModel::comonotone(5).unwrap();
        let s = Subset::from_indices(&[1, 3], 5).unwrap();
        assert_eq!(m5.marginal_cdf(s, &[0.9, 0.1]).unwrap(), 0.1);

        // Oracle: the two-dimensional Gumbel evaluator.
        let g3 = CopulaModel::gumbel(3, 0.45).unwrap();
        let g2 = CopulaModel::gumbel(2, 0.45).unwrap();
        let s = Subset::from_indices(&[0, 1], 3).unwrap();
        for &a in &grid(12) {
            for &b in &grid(12) {
                let lhs = g3.marginal_cdf(s, &[a, b]).unwrap();
                assert!((lhs - g2.cdf(&[a, b]).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn errors() {
        let g = CopulaModel::Gumbel { dim: 3, delta: 1.5 };
        assert!(matches!(g.cdf(&[0.5; 3]), Err(Error::InvalidParameter(_))));
        assert!(CopulaModel::gumbel(3, 0.0).is_err());
        assert!(CopulaModel::marshall_olkin(1.1, 0.0).is_err());
        let p = CopulaModel::product(2).unwrap();
        assert!(matches!(
            p.cdf(&[0.5]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            p.cdf(&[0.5, 1.5]),
            Err(Error::CoordinateOutOfRange { index: 1, .. })
        ));
        assert!(p.marginal_cdf(Subset::EMPTY, &[]).is_err());
        assert!(p.marginal_cdf(Subset::from_bits(0b100), &[0.5]).is_err());
        assert!(CopulaModel::compose_listed(vec![Block {
            model: CopulaModel::product(2).unwrap(),
            coords: vec![0, 0],
        }])
        .is_err());
        assert!(Point::new(vec![0.2, -0.1]).is_err());
    }

    #[test]
    fn permutation_moves_coordinates() {
        let mo = CopulaModel::marshall_olkin(0.3, 0.8).unwrap();
        let swapped = mo.permuted(&[1, 0]).unwrap();
        let reference = CopulaModel::marshall_olkin(0.8, 0.3).unwrap();
        for &a in &grid(6) {
            for &b in &grid(6) {
                assert!((swapped.eval(&[a, b]) - reference.eval(&[a, b])).abs() < 1e-15);
            }
        }
    }
}
