//! Built-in validation suites: closed forms and worked models (`examples`),
//! algebraic identities, Monte Carlo consistency and estimator routes
//! (`properties`). A suite stops at the first failing check.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closed_form::{
    gumbel_beta_closed_form, minimum_attaining_model, mo_product_beta_closed_form, mo_product_model,
};
use crate::coefficients::{
    beta_lower_bound, beta_of_reflection, beta_representations, coefficients_from_table,
    CoefficientsReport,
};
use crate::concordance::{strong_concordance_check, ConcordanceVerdict};
use crate::copula::{Copula, CopulaModel, ReflectionMask};
use crate::data_io::{load_csv, ColumnSelector, CsvSpec};
use crate::error::{Error, Result};
use crate::estimator::{
    empirical_coefficients, empirical_orthant_table, pseudo_observations, DataMatrix,
};
use crate::orthant::{build_orthant_table, OrthantTable};
use crate::sampler::{orthant_frequencies, sample, Seed};
use crate::subset::Subset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Examples,
    Properties,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "examples" => Ok(Suite::Examples),
            "properties" => Ok(Suite::Properties),
            "all" => Ok(Suite::All),
            _ => Err(Error::param(format!(
                "unknown suite `{s}` (examples, properties or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub suite: Suite,
    pub seed: u64,
    /// White-wine CSV (semicolon-separated, UCI layout); checked when present.
    pub wine: Option<PathBuf>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            suite: Suite::All,
            seed: 20240501,
            wine: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutcome {
    pub checks: Vec<Check>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type CheckFn = fn(&ValidationOptions) -> Result<(bool, String)>;

/// Runs the selected suite, reporting each check through `on_check` as it completes.
pub fn run_suite(
    opts: &ValidationOptions,
    mut on_check: impl FnMut(&Check),
) -> Result<SuiteOutcome> {
    let mut plan: Vec<(&'static str, CheckFn)> = Vec::new();
    if matches!(opts.suite, Suite::Examples | Suite::All) {
        plan.extend([
            ("degenerate exact values", degenerate as CheckFn),
            ("marshall-olkin product closed form", mo_product),
            ("gumbel closed forms", gumbel_forms),
            ("concordance counterexample", counterexample),
            ("minimum attainment", minimum_attainment),
        ]);
        if opts.wine.is_some() {
            plan.push(("white wine table", wine));
        }
    }
    if matches!(opts.suite, Suite::Properties | Suite::All) {
        plan.extend([
            ("representation equivalence", representations as CheckFn),
            ("permutation invariance", permutation),
            ("duality and reflection sum", reflection_sum),
            ("transition identity", transition),
            ("three-dimensional collapse", collapse),
            ("monte carlo consistency", monte_carlo),
            ("estimator route equivalence", routes),
        ]);
    }
    let mut outcome = SuiteOutcome::default();
    for (name, f) in plan {
        let start = Instant::now();
        let (passed, detail) = f(opts)?;
        let check = Check {
            name,
            passed,
            detail: format!("{detail} ({:.2} s)", start.elapsed().as_secs_f64()),
        };
        on_check(&check);
        outcome.checks.push(check);
        if !passed {
            break;
        }
    }
    Ok(outcome)
}

fn exact_report(model: &CopulaModel) -> Result<CoefficientsReport> {
    coefficients_from_table(&build_orthant_table(model)?)
}

fn exact_beta(model: &CopulaModel) -> Result<f64> {
    Ok(exact_report(model)?.beta)
}

/// Tracks the largest deviation seen against a tolerance.
struct Worst {
    tol: f64,
    gap: f64,
    at: String,
}

impl Worst {
    fn new(tol: f64) -> Self {
        Worst {
            tol,
            gap: 0.0,
            at: String::new(),
        }
    }

    fn see(&mut self, got: f64, want: f64, at: impl FnOnce() -> String) {
        let gap = (got - want).abs();
        if gap > self.gap || gap.is_nan() {
            self.gap = if gap.is_nan() { f64::INFINITY } else { gap };
            self.at = at();
        }
    }

    fn finish(self) -> (bool, String) {
        let ok = self.gap <= self.tol;
        let detail = if self.at.is_empty() {
            format!("max deviation 0 (tol {:e})", self.tol)
        } else {
            format!(
                "max deviation {:.3e} at {} (tol {:e})",
                self.gap, self.at, self.tol
            )
        };
        (ok, detail)
    }
}

fn degenerate(_: &ValidationOptions) -> Result<(bool, String)> {
    let mut w = Worst::new(1e-12);
    for d in 2..=10 {
        w.see(exact_beta(&CopulaModel::product(d)?)?, 0.0, || {
            format!("product:d={d}")
        });
        w.see(exact_beta(&CopulaModel::comonotone(d)?)?, 1.0, || {
            format!("comonotone:d={d}")
        });
    }
    Ok(w.finish())
}

fn mo_product(_: &ValidationOptions) -> Result<(bool, String)> {
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut w = Worst::new(1e-12);
    let mut monotone = true;
    for (a, &delta) in grid.iter().enumerate() {
        for (b, &alpha) in grid.iter().enumerate() {
            let closed = mo_product_beta_closed_form(delta, alpha)?;
            w.see(
                closed,
                exact_beta(&mo_product_model(delta, alpha)?)?,
                || format!("delta={delta}, alpha={alpha}"),
            );
            if a > 0 && closed < mo_product_beta_closed_form(grid[a - 1], alpha)? {
                monotone = false;
            }
            if b > 0 && closed < mo_product_beta_closed_form(delta, grid[b - 1])? {
                monotone = false;
            }
        }
    }
    let origin = mo_product_beta_closed_form(0.0, 0.0)?;
    let (ok, detail) = w.finish();
    Ok((
        ok && monotone && origin == 0.0,
        format!("{detail}; value at origin {origin}; nondecreasing: {monotone}"),
    ))
}

fn gumbel_forms(_: &ValidationOptions) -> Result<(bool, String)> {
    let mut general = Worst::new(1e-10);
    let mut low = Worst::new(1e-12);
    for d in 2..=6 {
        for delta in [0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let oracle = exact_beta(&CopulaModel::gumbel(d, delta)?)?;
            general.see(gumbel_beta_closed_form(d, delta)?, oracle, || {
                format!("d={d}, delta={delta}")
            });
            let level = |k: f64| 2f64.powf(-k.powf(delta));
            if d == 3 {
                low.see(oracle, 2f64.powf(2.0 - 2f64.powf(delta)) - 1.0, || {
                    format!("d=3, delta={delta}")
                });
            }
            if d == 4 {
                let want = 4.0 * level(4.0) - 8.0 * level(3.0) + 9.0 * level(2.0) - 1.5;
                low.see(oracle, want, || format!("d=4, delta={delta}"));
            }
        }
    }
    let (ok_g, det_g) = general.finish();
    let (ok_l, det_l) = low.finish();
    Ok((ok_g && ok_l, format!("general: {det_g}; d=3,4: {det_l}")))
}

fn counterexample(_: &ValidationOptions) -> Result<(bool, String)> {
    let x: CopulaModel = "compose:[countermonotone | product:d=2]".parse()?;
    let y: CopulaModel = "compose:[countermonotone | comonotone:d=2]".parse()?;
    let bx = exact_beta(&x)?;
    let by = exact_beta(&y)?;
    let report = strong_concordance_check(&x, &y, 11)?;
    let grid = report
        .grid
        .as_ref()
        .is_some_and(|g| g.copula_dominated && g.survival_dominated);
    let ok = (bx + 0.125).abs() <= 1e-12
        && (by + 0.25).abs() <= 1e-12
        && grid
        && !report.reflection_condition_holds
        && report.verdict == ConcordanceVerdict::WeakOnly;
    Ok((
        ok,
        format!(
            "beta(X) = {bx}, beta(Y) = {by}, grid order holds: {grid}, reflection condition holds: {}",
            report.reflection_condition_holds
        ),
    ))
}

fn minimum_attainment(_: &ValidationOptions) -> Result<(bool, String)> {
    let mut w = Worst::new(1e-12);
    for d in 2..=8 {
        w.see(
            exact_beta(&minimum_attaining_model(d)?)?,
            beta_lower_bound(d),
            || format!("d={d}"),
        );
    }
    let (ok, detail) = w.finish();
    Ok((ok, format!("{detail}; bound -1/d for d >= 3, -1 for d = 2")))
}

fn rounded(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn wine(opts: &ValidationOptions) -> Result<(bool, String)> {
    let path = opts
        .wine
        .as_ref()
        .expect("wine path checked by the planner");
    let spec = CsvSpec {
        delimiter: b';',
        has_header: true,
        selected_columns: ["residual sugar", "density", "alcohol"]
            .iter()
            .map(|s| ColumnSelector::Name(s.to_string()))
            .collect(),
    };
    let data = load_csv(path, &spec)?;
    let report = empirical_coefficients(&data)?;
    let got: Vec<String> = report.components.iter().map(|&c| rounded(c)).collect();
    let beta = rounded(report.beta);
    let ok = got == ["0.250", "0.179", "-0.429"] && beta == "0.000";
    Ok((
        ok,
        format!(
            "n = {}, components ({}), beta {beta}; expected (0.250, 0.179, -0.429), 0.000",
            data.n_rows(),
            got.join(", ")
        ),
    ))
}

/// Random 3- and 4-dimensional models mixing Gumbel copulas with composed blocks.
fn random_models(seed: u64, count: usize) -> Result<Vec<CopulaModel>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let d = 3 + k % 2;
        let model = if rng.random_bool(0.3) {
            CopulaModel::gumbel(d, rng.random_range(0.05..1.0))?
        } else {
            let mut blocks = Vec::new();
            let mut left = d;
            while left > 0 {
                let choice = rng.random_range(0..6);
                let block = match (choice, left) {
                    (0, _) | (_, 1) => CopulaModel::product(1)?,
                    (1, _) => CopulaModel::CountermonotonePair,
                    (2, _) => CopulaModel::marshall_olkin(rng.random(), rng.random())?,
                    (3, _) => CopulaModel::gumbel(2, rng.random_range(0.05..1.0))?,
                    (4, _) => CopulaModel::comonotone(rng.random_range(2..=left))?,
                    _ => CopulaModel::gumbel(
                        rng.random_range(2..=left),
                        rng.random_range(0.05..1.0),
                    )?,
                };
                left -= block.dim();
                blocks.push(block);
            }
            let model = CopulaModel::compose(blocks)?;
            let mut perm: Vec<usize> = (0..d).collect();
            for i in (1..d).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            model.permuted(&perm)?
        };
        out.push(model);
    }
    Ok(out)
}

fn representations(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut w = Worst::new(1e-12);
    for model in random_models(opts.seed, 20)? {
        let r = beta_representations(&build_orthant_table(&model)?)?;
        w.see(r.max_spread(), 0.0, || model.to_string());
    }
    Ok(w.finish())
}

fn permutation(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut w = Worst::new(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    for model in random_models(opts.seed.wrapping_add(1), 20)? {
        let d = model.dim();
        let base = exact_beta(&model)?;
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        w.see(exact_beta(&model.permuted(&perm)?)?, base, || {
            format!("{model} under {perm:?}")
        });
    }
    Ok(w.finish())
}

fn reflection_sum(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut dual = Worst::new(1e-12);
    let mut total = Worst::new(1e-11);
    for model in random_models(opts.seed.wrapping_add(2), 20)? {
        let table = build_orthant_table(&model)?;
        let d = table.dim();
        let beta = coefficients_from_table(&table)?.beta;
        dual.see(
            beta_of_reflection(&table, ReflectionMask::all(d))?,
            beta,
            || model.to_string(),
        );
        let mut sum = 0.0;
        for mask in ReflectionMask::all_masks(d) {
            sum += beta_of_reflection(&table, mask)?;
        }
        total.see(sum, 0.0, || model.to_string());
    }
    let (ok_d, det_d) = dual.finish();
    let (ok_s, det_s) = total.finish();
    Ok((
        ok_d && ok_s,
        format!("duality: {det_d}; sum over masks: {det_s}"),
    ))
}

fn transition(_: &ValidationOptions) -> Result<(bool, String)> {
    let mut w = Worst::new(1e-10);
    for d in [2usize, 3] {
        for delta in [0.2, 0.5, 0.8, 1.0] {
            let x = exact_beta(&CopulaModel::gumbel(d, delta)?)?;
            let y_table = build_orthant_table(&CopulaModel::gumbel(d + 1, delta)?)?;
            let y = coefficients_from_table(&y_table)?.beta;
            for i in 0..=d {
                let yi = beta_of_reflection(&y_table, ReflectionMask::single(i, d + 1)?)?;
                w.see(y + yi, d as f64 / (d + 1) as f64 * x, || {
                    format!("d={d}, delta={delta}, i={}", i + 1)
                });
            }
        }
    }
    Ok(w.finish())
}

fn collapse_gap(r: &CoefficientsReport) -> f64 {
    (r.beta - r.beta_star)
        .abs()
        .max((r.beta - r.beta_pairwise_avg).abs())
}

fn collapse(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut exact = Worst::new(1e-12);
    let mut empirical = Worst::new(1e-12);
    for (k, model) in random_models(opts.seed.wrapping_add(3), 20)?
        .into_iter()
        .filter(|m| m.dim() == 3)
        .enumerate()
    {
        exact.see(collapse_gap(&exact_report(&model)?), 0.0, || {
            model.to_string()
        });
        let batch = sample(&model, 200, Seed(opts.seed.wrapping_add(k as u64)))?;
        let r = empirical_coefficients(&batch.to_data_matrix()?)?;
        empirical.see(collapse_gap(&r), 0.0, || format!("sample of {model}"));
    }
    let (ok_x, det_x) = exact.finish();
    let (ok_e, det_e) = empirical.finish();
    Ok((ok_x && ok_e, format!("exact: {det_x}; empirical: {det_e}")))
}

/// Largest gap between sampled and exact orthant values, in standard errors.
fn orthant_z(freq: &OrthantTable, exact: &OrthantTable, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for bits in 0..1u32 << exact.dim() {
        let s = Subset::from_bits(bits);
        let p = exact.value(s);
        let gap = (freq.value(s) - p).abs();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z = if se > 0.0 {
            gap / se
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    worst
}

fn monte_carlo(opts: &ValidationOptions) -> Result<(bool, String)> {
    const N: usize = 200_000;
    let mut beta = Worst::new(0.01);
    for model in [
        CopulaModel::gumbel(3, 0.5)?,
        mo_product_model(0.6, 0.3)?,
        CopulaModel::product(4)?,
    ] {
        let exact = exact_beta(&model)?;
        for k in 0..3 {
            let batch = sample(&model, N, Seed(opts.seed.wrapping_add(k)))?;
            let est = empirical_coefficients(&batch.to_data_matrix()?)?.beta;
            beta.see(est, exact, || format!("{model}, seed offset {k}"));
        }
    }
    let mut worst_z: f64 = 0.0;
    let mut worst_model = String::new();
    for text in [
        "product:d=3",
        "comonotone:d=3",
        "countermonotone",
        "gumbel:d=3,delta=0.5",
        "gumbel:d=4,delta=0.2",
        "mo:a1=0.3,a2=0.7",
        "mo:a1=0,a2=1",
        "mo:a1=1,a2=1",
        "compose:[mo:a1=0.6,a2=1 | mo:a1=0.3,a2=1]",
    ] {
        let model: CopulaModel = text.parse()?;
        let batch = sample(&model, N, Seed(opts.seed))?;
        let z = orthant_z(
            &orthant_frequencies(&batch)?,
            &build_orthant_table(&model)?,
            N,
        );
        if z > worst_z {
            worst_z = z;
            worst_model = text.to_string();
        }
    }
    let (ok, detail) = beta.finish();
    Ok((
        ok && worst_z <= 4.0,
        format!("beta: {detail}; orthant frequencies: worst {worst_z:.2} SE ({worst_model})"),
    ))
}

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<DataMatrix> {
    let shared: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let columns = (0..d)
        .map(|_| {
            let weight: f64 = rng.random_range(-1.0..1.0);
            shared
                .iter()
                .map(|s| weight * s + rng.random::<f64>())
                .collect()
        })
        .collect();
    DataMatrix::from_columns(columns)
}

fn same_numbers(a: &CoefficientsReport, b: &CoefficientsReport) -> bool {
    a.beta.to_bits() == b.beta.to_bits()
        && a.beta_star.to_bits() == b.beta_star.to_bits()
        && a.beta_nelsen.to_bits() == b.beta_nelsen.to_bits()
        && a.beta_pairwise_avg.to_bits() == b.beta_pairwise_avg.to_bits()
        && a.components.len() == b.components.len()
        && a.components
            .iter()
            .zip(&b.components)
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

fn routes(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(4));
    let mut failures = Vec::new();
    let mut worst_sum: f64 = 0.0;
    for k in 0..50 {
        let n = if k % 2 == 0 { 50 } else { 200 };
        let d = 2 + k % 3;
        let data = random_dataset(&mut rng, n, d)?;
        let direct = empirical_coefficients(&data)?;
        let table = empirical_orthant_table(&pseudo_observations(&data)?)?;
        if !same_numbers(&direct, &coefficients_from_table(&table)?) {
            failures.push(format!("dataset {k}: routes differ"));
        }
        let transformed = DataMatrix::from_columns(
            data.columns()
                .iter()
                .map(|c| c.iter().map(|x| (3.0 * x).exp() - 2.0).collect())
                .collect(),
        )?;
        if !same_numbers(&direct, &empirical_coefficients(&transformed)?) {
            failures.push(format!(
                "dataset {k}: monotone transform changes the report"
            ));
        }
        let mut sum = 0.0;
        for bits in 0..1u32 << d {
            let mask = Subset::from_bits(bits);
            let reflected = empirical_coefficients(&data.reflected(mask))?.beta;
            let via_table = beta_of_reflection(&table, ReflectionMask::new(mask, d)?)?;
            if reflected.to_bits() != via_table.to_bits() {
                failures.push(format!("dataset {k}: reflection {mask} differs from table"));
            }
            sum += reflected;
        }
        worst_sum = worst_sum.max(sum.abs());
    }
    let ok = failures.is_empty() && worst_sum <= 1e-12;
    let detail = match failures.first() {
        Some(f) => format!("{} mismatches, first: {f}", failures.len()),
        None => {
            format!("50 datasets identical across routes; largest reflection sum {worst_sum:e}")
        }
    };
    Ok((ok, detail))
}
