//! Grid and random-rectangle sanity checks of the copula axioms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Copula;
use crate::summation::NeumaierSum;

const TOLERANCE: f64 = 1e-12;
/// Grid points examined per face before switching to seeded random grid points.
const FACE_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxiomViolation {
    InvalidModel {
        reason: String,
    },
    /// `C(u) != 0` although some coordinate of `u` is 0.
    Groundedness {
        point: Vec<f64>,
        value: f64,
    },
    /// `C(1, .., t, .., 1) != t`.
    Margin {
        coordinate: usize,
        at: f64,
        value: f64,
    },
    /// Negative `C`-volume of the box `[lower, upper]`.
    NegativeVolume {
        lower: Vec<f64>,
        upper: Vec<f64>,
        volume: f64,
    },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AxiomReport {
    pub evaluations: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Looks for violations of groundedness, uniform margins (on a regular grid
/// with `grid_resolution` points per axis) and 2-increasingness (on
/// `rectangles` random boxes drawn from `seed`).
pub fn axiom_check<C: Copula + ?Sized>(
    model: &C,
    grid_resolution: usize,
    rectangles: usize,
    seed: u64,
) -> AxiomReport {
    let mut report = AxiomReport::default();
    if let Err(e) = model.validate() {
        report.violations.push(AxiomViolation::InvalidModel {
            reason: e.to_string(),
        });
        return report;
    }
    let d = model.dim();
    let g = grid_resolution.max(2);
    let ticks: Vec<f64> = (0..g).map(|k| k as f64 / (g - 1) as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Groundedness on every face {u_i = 0}.
    let face_points = (g as f64).powi(d as i32 - 1);
    for i in 0..d {
        let mut check = |u: &[f64]| {
            report.evaluations += 1;
            let v = model.eval(u);
            if v.abs() > TOLERANCE {
                report.violations.push(AxiomViolation::Groundedness {
                    point: u.to_vec(),
                    value: v,
                });
            }
        };
        let mut u = vec![0.0; d];
        if face_points <= FACE_BUDGET as f64 {
            let others: Vec<usize> = (0..d).filter(|&j| j != i).collect();
            let count = g.pow(others.len() as u32);
            for mut code in 0..count {
                for &j in &others {
                    u[j] = ticks[code % g];
                    code /= g;
                }
                u[i] = 0.0;
                check(&u);
            }
        } else {
            for _ in 0..FACE_BUDGET {
                for (j, x) in u.iter_mut().enumerate() {
                    *x = if j == i {
                        0.0
                    } else {
                        ticks[rng.random_range(0..g)]
                    };
                }
                check(&u);
            }
        }
    }

    for i in 0..d {
        for &t in &ticks {
            let mut u = vec![1.0; d];
            u[i] = t;
            report.evaluations += 1;
            let v = model.eval(&u);
            if (v - t).abs() > TOLERANCE {
                report.violations.push(AxiomViolation::Margin {
                    coordinate: i,
                    at: t,
                    value: v,
                });
            }
        }
    }

    let mut vertex = vec![0.0; d];
    for _ in 0..rectangles {
        let mut lower = Vec::with_capacity(d);
        let mut upper = Vec::with_capacity(d);
        for _ in 0..d {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            lower.push(a.min(b));
            upper.push(a.max(b));
        }
        let mut volume = NeumaierSum::new();
        for corner in 0u64..(1u64 << d) {
            let mut lows = 0;
            for j in 0..d {
                if corner >> j & 1 == 1 {
                    vertex[j] = lower[j];
                    lows += 1;
                } else {
                    vertex[j] = upper[j];
                }
            }
            let v = model.eval(&vertex);
            volume.add(if lows % 2 == 0 { v } else { -v });
        }
        report.evaluations += 1 << d;
        let volume = volume.total();
        if volume < -TOLERANCE {
            report.violations.push(AxiomViolation::NegativeVolume {
                lower,
                upper,
                volume,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaModel;

    struct Shifted;

    impl Copula for Shifted {
        fn dim(&self) -> usize {
            2
        }

        fn eval(&self, u: &[f64]) -> f64 {
            u[0] * u[1] - 0.1
        }
    }

    #[test]
    fn valid_models_pass() {
        for model in [
            CopulaModel::product(3).unwrap(),
            CopulaModel::compose(vec![
                CopulaModel::CountermonotonePair,
                CopulaModel::product(2).unwrap(),
            ])
            .unwrap(),
            CopulaModel::gumbel(3, 0.3).unwrap(),
            CopulaModel::marshall_olkin(0.5, 0.2).unwrap(),
        ] {
            let r = axiom_check(&model, 9, 200, 7);
            assert!(r.is_valid(), "{model}: {:?}", r.violations.first());
            assert!(r.evaluations > 0);
        }
    }

    #[test]
    fn shifted_fixture_is_caught() {
        let r = axiom_check(&Shifted, 5, 10, 1);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, AxiomViolation::Groundedness { .. })));
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, AxiomViolation::Margin { .. })));
    }

    #[test]
    fn invalid_parameters_are_reported() {
        let bad = CopulaModel::Gumbel { dim: 2, delta: 2.0 };
        let r = axiom_check(&bad, 4, 4, 0);
        assert!(matches!(
            r.violations.as_slice(),
            [AxiomViolation::InvalidModel { .. }]
        ));
    }
}
