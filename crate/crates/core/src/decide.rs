//! Decision procedures: equality of two means and homogeneity classification.
//!
//! Equality is decided through the pair invariants `Φ, Ψ` (or `f''/f'` in the
//! quasi-arithmetic case) on a finite grid, upgraded to a certificate only
//! when an explicit equivalence witness is recovered. Homogeneity is decided
//! by constancy of `xΦ(x)` and `x²Ψ(x)`, whose characteristic roots give
//! the Gini parameters. A finite grid cannot certify constancy on a dense set;
//! every report records the grid it used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chebyshev::{recover_witness, EquivalenceWitness, GeneratorPair, GiniParams};
use crate::error::{Error, Result};
use crate::evaluate::{eval_gini_closed, eval_holder, eval_quasi_arithmetic, Mean};
use crate::expr::Expr;
use crate::family::MeanFamily;
use crate::interval::Interval;
use crate::measure::Measure;
use crate::scalar::{lit, rel_dev, to_f64, Scalar};

pub const DEFAULT_GRID_POINTS: usize = 33;
pub const MIN_GRID_POINTS: usize = 17;
/// Fraction of the interval width left out at each end of the default grid.
pub const GRID_MARGIN: f64 = 0.05;
/// Φ/Ψ (or `f''/f'`) agreement needed to attempt a witness.
pub const INVARIANT_MATCH_TOL: f64 = 1e-9;
/// A counterexample must separate the two sides by more than this.
pub const SEPARATION_TOL: f64 = 1e-7;
/// Constancy tolerance for `xΦ` and `x²Ψ`, relative to `1 + |mean|`.
pub const CONSTANCY_TOL: f64 = 1e-8;
/// Recovered roots must satisfy the characteristic polynomial to this.
pub const ROOT_CONSISTENCY_TOL: f64 = 1e-9;
pub const CROSS_VALIDATION_TOL: f64 = 1e-8;
pub const CROSS_VALIDATION_POINTS: usize = 20;
/// Residual tolerance for `g = a f + b` on the grid.
pub const AFFINE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub enum Verdict<T> {
    Equal,
    NotEqual,
    Homogeneous { params: GiniParams<T> },
    NotHomogeneous,
    Indeterminate,
}

impl<T> Verdict<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Equal => "equal",
            Verdict::NotEqual => "not-equal",
            Verdict::Homogeneous { .. } => "homogeneous",
            Verdict::NotHomogeneous => "not-homogeneous",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// A named numeric check. `threshold` is absent for informational values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check<T> {
    pub name: String,
    pub value: T,
    pub threshold: Option<T>,
    pub passed: bool,
}

impl<T: Scalar> Check<T> {
    /// Passes when `value <= threshold`.
    fn at_most(name: &str, value: T, threshold: f64) -> Self {
        let threshold = lit(threshold);
        Check {
            name: name.into(),
            value,
            threshold: Some(threshold),
            passed: value <= threshold,
        }
    }

    /// Passes when `value > threshold`.
    fn above(name: &str, value: T, threshold: f64) -> Self {
        let threshold = lit(threshold);
        Check {
            name: name.into(),
            value,
            threshold: Some(threshold),
            passed: value > threshold,
        }
    }

    fn info(name: &str, value: T) -> Self {
        Check {
            name: name.into(),
            value,
            threshold: None,
            passed: true,
        }
    }
}

/// A point where the two sides of a tested identity differ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample<T> {
    pub x: Vec<T>,
    /// Dilation factor, for homogeneity counterexamples.
    pub lambda: Option<T>,
    pub lhs: T,
    pub rhs: T,
    pub gap: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct DecisionReport<T> {
    pub verdict: Verdict<T>,
    pub conditions: Vec<Check<T>>,
    pub witness: Option<EquivalenceWitness<T>>,
    /// `(a, b)` with `g = a f + b`, for quasi-arithmetic equality.
    pub affine: Option<[T; 2]>,
    /// Characteristic roots found, even when the verdict is indeterminate.
    pub gini: Option<GiniParams<T>>,
    pub counterexample: Option<Counterexample<T>>,
    pub grid: Vec<T>,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl<T: Scalar> DecisionReport<T> {
    fn new(grid: &[T]) -> Self {
        DecisionReport {
            verdict: Verdict::Indeterminate,
            conditions: Vec::new(),
            witness: None,
            affine: None,
            gini: None,
            counterexample: None,
            grid: grid.to_vec(),
            seed: None,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, c: Check<T>) -> bool {
        let ok = c.passed;
        self.conditions.push(c);
        ok
    }

    fn indeterminate(mut self, note: impl Into<String>) -> Self {
        self.verdict = Verdict::Indeterminate;
        self.notes.push(note.into());
        self
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self.verdict, Verdict::Indeterminate)
    }
}

/// 33 Chebyshev-spaced points on `[lo + 0.05w, hi - 0.05w]`.
pub fn default_grid<T: Scalar>(interval: &Interval<T>) -> Vec<T> {
    interval.chebyshev_grid(DEFAULT_GRID_POINTS, lit(GRID_MARGIN))
}

fn check_grid<T: Scalar>(grid: &[T], intervals: &[&Interval<T>]) -> Result<()> {
    if grid.len() < MIN_GRID_POINTS {
        return Err(Error::Precondition(format!(
            "decision grid needs at least {MIN_GRID_POINTS} points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("decision grid must be strictly increasing".into()));
    }
    for i in intervals {
        for &x in grid {
            i.check("grid point", x)?;
        }
    }
    Ok(())
}

fn singular_to_precondition(e: Error) -> Error {
    match e {
        Error::Singularity { x, wronskian } => {
            Error::Precondition(format!("singular Wronskian on the grid at x = {x} (W = {wronskian})"))
        }
        e => e,
    }
}

/// Runs both nondegeneracy conditions at every grid point; returns whether they hold.
fn nondegeneracy_on<T: Scalar>(
    report: &mut DecisionReport<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    points: &[T],
    need_mt0: bool,
) -> Result<bool> {
    let mut mass = T::zero();
    let mut mt0 = T::infinity();
    for &x in points {
        let r = fam.nondegeneracy(mu, x)?;
        mass = mass.max(r.mt1_mass);
        mt0 = mt0.min(r.mt0_value.abs());
    }
    let ok1 = report.check(Check {
        name: "mt1_vanishing_mass".into(),
        value: mass,
        threshold: Some(T::one()),
        passed: mass < T::one() - lit(crate::family::VANISHING_TOL),
    });
    let ok0 = if need_mt0 {
        report.check(Check::above("mt0_min_triple_moment", mt0, crate::family::VANISHING_TOL))
    } else {
        true
    };
    Ok(ok1 && ok0)
}

/// Deterministic probe points in `grid^d`: coordinates spread by several strides.
fn probe_points<T: Scalar>(grid: &[T], d: usize) -> Vec<Vec<T>> {
    let n = grid.len();
    let mut out = vec![];
    let mut strides = vec![n - 1];
    let mut s = n / 2;
    while s >= 1 {
        strides.push(s);
        s /= 2;
    }
    for &stride in &strides {
        for i in 0..n {
            out.push((0..d).map(|k| grid[(i + k * stride) % n]).collect());
        }
    }
    out
}

/// Decides whether two pairs generate the same mean for `(fam, mu)`.
pub fn decide_equality<T: Scalar>(
    pair_a: &GeneratorPair<T>,
    pair_b: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    grid: &[T],
) -> Result<DecisionReport<T>> {
    pair_a.require("decide_equality", 3)?;
    pair_b.require("decide_equality", 3)?;
    fam.validate(mu)?;
    check_grid(grid, &[pair_a.interval(), pair_b.interval()])?;
    let mut report = DecisionReport::new(grid);

    if !nondegeneracy_on(&mut report, fam, mu, grid, true)? {
        return Ok(report.indeterminate("nondegeneracy fails: the invariants are not determined by the mean"));
    }

    let (mut dev_phi, mut dev_psi) = (T::zero(), T::zero());
    for &x in grid {
        let a = pair_a.invariants(x).map_err(singular_to_precondition)?;
        let b = pair_b.invariants(x).map_err(singular_to_precondition)?;
        dev_phi = dev_phi.max(rel_dev(a.phi, b.phi));
        dev_psi = dev_psi.max(rel_dev(a.psi, b.psi));
    }
    let phi_ok = report.check(Check::at_most("phi_max_deviation", dev_phi, INVARIANT_MATCH_TOL));
    let psi_ok = report.check(Check::at_most("psi_max_deviation", dev_psi, INVARIANT_MATCH_TOL));

    if phi_ok && psi_ok {
        let n = grid.len();
        return Ok(match recover_witness(pair_a, pair_b, grid[0], grid[n - 1], grid)? {
            Some(w) => {
                report.check(Check::info("witness_determinant", w.det()));
                report.witness = Some(w);
                report.verdict = Verdict::Equal;
                report
            }
            None => report.indeterminate("invariants agree on the grid but no verified equivalence witness was found"),
        });
    }

    let ma = Mean::new(pair_a, fam, mu)?;
    let mb = Mean::new(pair_b, fam, mu)?;
    let mut best: Option<Counterexample<T>> = None;
    for x in probe_points(grid, fam.dim()) {
        let (va, vb) = (ma.eval(&x)?, mb.eval(&x)?);
        let gap = (va - vb).abs();
        if best.as_ref().map_or(true, |b| gap > b.gap) {
            best = Some(Counterexample {
                x,
                lambda: None,
                lhs: va,
                rhs: vb,
                gap,
            });
        }
    }
    let best = best.expect("grid is nonempty");
    if !report.check(Check::above("counterexample_gap", best.gap, SEPARATION_TOL)) {
        report
            .notes
            .push("invariants differ but no grid probe separates the means by more than the threshold".into());
    }
    report.counterexample = Some(best);
    report.verdict = Verdict::NotEqual;
    Ok(report)
}

/// Equality of quasi-arithmetic means `f⁻¹⟨f∘m⟩` and `g⁻¹⟨g∘m⟩`.
///
/// Only the first nondegeneracy condition is needed here.
pub fn decide_equality_qa<T: Scalar>(
    f: &Expr<T>,
    g: &Expr<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    grid: &[T],
) -> Result<DecisionReport<T>> {
    fam.validate(mu)?;
    check_grid(grid, &[])?;
    let mut report = DecisionReport::new(grid);
    if !nondegeneracy_on(&mut report, fam, mu, grid, false)? {
        return Ok(report.indeterminate("every centered partial vanishes μ-almost everywhere"));
    }

    let mut dev = T::zero();
    for &x in grid {
        let (jf, jg) = (f.jet(x), g.jet(x));
        for (name, j) in [("f", jf), ("g", jg)] {
            if !(j.d1 != T::zero() && j.d1.is_finite() && j.d2.is_finite() && j.v.is_finite()) {
                return Err(Error::Precondition(format!("{name}' vanishes or is undefined at x = {x}")));
            }
        }
        dev = dev.max(rel_dev(jf.d2 / jf.d1, jg.d2 / jg.d1));
    }

    if report.check(Check::at_most("second_log_derivative_deviation", dev, INVARIANT_MATCH_TOL)) {
        let (x1, x2) = (grid[0], grid[grid.len() - 1]);
        let (f1, f2, g1, g2) = (f.eval(x1), f.eval(x2), g.eval(x1), g.eval(x2));
        let a = (g2 - g1) / (f2 - f1);
        let b = g1 - a * f1;
        let mut resid = T::zero();
        for &x in grid {
            let (jf, jg) = (f.jet(x), g.jet(x));
            let r0 = (jg.v - (a * jf.v + b)).abs() / (jg.v.abs() + (a * jf.v).abs() + b.abs() + T::min_positive_value());
            let r1 = (jg.d1 - a * jf.d1).abs() / (jg.d1.abs() + (a * jf.d1).abs());
            resid = resid.max(r0).max(r1);
        }
        return Ok(if report.check(Check::at_most("affine_residual", resid, AFFINE_RESIDUAL_TOL)) {
            report.affine = Some([a, b]);
            report.verdict = Verdict::Equal;
            report
        } else {
            report.indeterminate("f''/f' and g''/g' agree on the grid but g = af + b could not be verified")
        });
    }

    let mut best: Option<Counterexample<T>> = None;
    for x in probe_points(grid, fam.dim()) {
        let va = eval_quasi_arithmetic(f, fam, mu, &x)?;
        let vb = eval_quasi_arithmetic(g, fam, mu, &x)?;
        let gap = (va - vb).abs();
        if best.as_ref().map_or(true, |b| gap > b.gap) {
            best = Some(Counterexample {
                x,
                lambda: None,
                lhs: va,
                rhs: vb,
                gap,
            });
        }
    }
    let best = best.expect("grid is nonempty");
    report.check(Check::above("counterexample_gap", best.gap, SEPARATION_TOL));
    report.counterexample = Some(best);
    report.verdict = Verdict::NotEqual;
    Ok(report)
}

/// `I/I = (lo/hi, hi/lo)` for `I ⊂ (0, ∞)`.
pub fn ratio_set<T: Scalar>(interval: &Interval<T>) -> Result<Interval<T>> {
    if !(interval.lo() > T::zero()) {
        return Err(Error::Precondition(format!(
            "ratio set needs a positive interval, got ({}, {})",
            interval.lo(),
            interval.hi()
        )));
    }
    Interval::new(interval.lo() / interval.hi(), interval.hi() / interval.lo())
}

/// `I_λ = I ∩ (1/λ)I`, nonempty exactly when `λ ∈ I/I`.
pub fn lambda_section<T: Scalar>(interval: &Interval<T>, lambda: T) -> Result<Interval<T>> {
    let ratios = ratio_set(interval)?;
    if !ratios.contains(lambda) {
        return Err(Error::Domain {
            what: "lambda",
            value: to_f64(lambda),
            lo: to_f64(ratios.lo()),
            hi: to_f64(ratios.hi()),
        });
    }
    let lo = interval.lo().max(interval.lo() / lambda);
    let hi = interval.hi().min(interval.hi() / lambda);
    Interval::new(lo, hi).map_err(|_| Error::Precondition(format!("section I_λ is empty for λ = {lambda}")))
}

/// `(f(λ·), g(λ·))` on `(1/λ)I`.
pub fn dilate_pair<T: Scalar>(pair: &GeneratorPair<T>, lambda: T) -> Result<GeneratorPair<T>> {
    pair.dilate(lambda)
}

/// Direct homogeneity test over a λ × x sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityScan<T> {
    pub lambdas: Vec<T>,
    /// Worst `|M(λx) − λM(x)|` for each λ.
    pub row_max: Vec<T>,
    pub max_abs: T,
    /// `max |M(λx) − λM(x)| / |λM(x)|`.
    pub max_rel: T,
    pub worst: Option<Counterexample<T>>,
}

/// Generator of the `d`-dimensional Kronecker (R_d) sequence.
fn kronecker_alphas(d: usize) -> Vec<f64> {
    // unique positive root of x^(d+1) = x + 1
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|k| g.powi(-(k as i32)).fract()).collect()
}

fn scan_with<T, F>(interval: &Interval<T>, d: usize, n_lambda: usize, n_x: usize, eval: F) -> Result<HomogeneityScan<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T>,
{
    if n_lambda == 0 || n_x == 0 {
        return Err(Error::Precondition("homogeneity scan needs n_lambda, n_x >= 1".into()));
    }
    let ratios = ratio_set(interval)?;
    let (a, b) = (ratios.lo().ln(), ratios.hi().ln());
    let alphas = kronecker_alphas(d);
    let mut scan = HomogeneityScan {
        lambdas: Vec::with_capacity(n_lambda),
        row_max: Vec::with_capacity(n_lambda),
        max_abs: T::zero(),
        max_rel: T::zero(),
        worst: None,
    };
    for k in 0..n_lambda {
        let lambda = if n_lambda % 2 == 1 && k == n_lambda / 2 {
            T::one()
        } else {
            (a + (b - a) * lit::<T>((k + 1) as f64) / lit((n_lambda + 1) as f64)).exp()
        };
        let sec = lambda_section(interval, lambda)?;
        let mut row = T::zero();
        for s in 0..n_x {
            let x: Vec<T> = alphas
                .iter()
                .map(|&al| {
                    let u = (0.5 + (s + 1) as f64 * al).fract();
                    sec.lo() + sec.width() * lit::<T>(0.02 + 0.96 * u)
                })
                .collect();
            let lx: Vec<T> = x.iter().map(|&v| lambda * v).collect();
            let lhs = eval(&lx)?;
            let rhs = lambda * eval(&x)?;
            let gap = (lhs - rhs).abs();
            row = row.max(gap);
            scan.max_rel = scan.max_rel.max(gap / rhs.abs().max(T::min_positive_value()));
            if scan.worst.as_ref().map_or(true, |w| gap > w.gap) {
                scan.worst = Some(Counterexample {
                    x,
                    lambda: Some(lambda),
                    lhs,
                    rhs,
                    gap,
                });
            }
        }
        scan.max_abs = scan.max_abs.max(row);
        scan.lambdas.push(lambda);
        scan.row_max.push(row);
    }
    Ok(scan)
}

/// Samples `λ` log-uniformly inside `I/I` (including `λ = 1` when `n_lambda`
/// is odd) and `x` on a low-discrepancy lattice in `I_λ^d`, and measures
/// `|M(λx) − λM(x)|`.
pub fn homogeneity_scan<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    n_lambda: usize,
    n_x: usize,
) -> Result<HomogeneityScan<T>> {
    let mean = Mean::new(pair, fam, mu)?;
    scan_with(pair.interval(), fam.dim(), n_lambda, n_x, |x| mean.eval(x))
}

const SCAN_LAMBDAS: usize = 9;
const SCAN_POINTS: usize = 16;

fn random_point<T: Scalar>(rng: &mut ChaCha8Rng, lo: T, hi: T, d: usize) -> Vec<T> {
    (0..d).map(|_| lo + (hi - lo) * lit::<T>(rng.gen::<f64>())).collect()
}

/// Classifies a pair as generating a Gini mean or not.
pub fn classify_homogeneous<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    grid: &[T],
    seed: u64,
) -> Result<DecisionReport<T>> {
    pair.require("classify_homogeneous", 3)?;
    fam.validate(mu)?;
    let interval = pair.interval();
    if !(interval.lo() > T::zero()) {
        return Err(Error::Precondition("homogeneity classification needs I ⊂ (0, ∞)".into()));
    }
    if !fam.is_homogeneous() {
        return Err(Error::Precondition("the family must be homogeneous".into()));
    }
    check_grid(grid, &[interval])?;
    let mut report = DecisionReport::new(grid);
    report.seed = Some(seed);

    let x0 = grid[grid.len() / 2];
    if !nondegeneracy_on(&mut report, fam, mu, &[x0], true)? {
        return Ok(report.indeterminate(format!("nondegeneracy fails at x0 = {x0}")));
    }

    let mut alpha = Vec::with_capacity(grid.len());
    let mut beta = Vec::with_capacity(grid.len());
    for &x in grid {
        let inv = pair.invariants(x).map_err(singular_to_precondition)?;
        alpha.push(x * inv.phi);
        beta.push(x * x * inv.psi);
    }
    let (a_mean, a_dev) = mean_and_deviation(&alpha);
    let (b_mean, b_dev) = mean_and_deviation(&beta);
    report.check(Check::info("alpha_mean", a_mean));
    report.check(Check::info("beta_mean", b_mean));
    let a_ok = report.check(Check::at_most("alpha_constancy", a_dev / (T::one() + a_mean.abs()), CONSTANCY_TOL));
    let b_ok = report.check(Check::at_most("beta_constancy", b_dev / (T::one() + b_mean.abs()), CONSTANCY_TOL));

    let mean = Mean::new(pair, fam, mu)?;
    if !(a_ok && b_ok) {
        let scan = scan_with(interval, fam.dim(), SCAN_LAMBDAS, SCAN_POINTS, |x| mean.eval(x))?;
        let worst = scan.worst.expect("scan is nonempty");
        if !report.check(Check::above("counterexample_gap", worst.gap, SEPARATION_TOL)) {
            report.notes.push("xΦ or x²Ψ is not constant, but the λ-scan found no gap above the threshold".into());
        }
        report.counterexample = Some(worst);
        report.verdict = Verdict::NotHomogeneous;
        return Ok(report);
    }

    let params = GiniParams::from_characteristic(a_mean, b_mean);
    report.gini = Some(params);
    report.check(Check::at_most(
        "root_sum_residual",
        (params.sum() - (a_mean + T::one())).abs(),
        ROOT_CONSISTENCY_TOL,
    ));
    report.check(Check::at_most("root_product_residual", (params.product() + b_mean).abs(), ROOT_CONSISTENCY_TOL));

    if let Some((wlo, whi)) = params.closed_form_window() {
        if !(wlo <= interval.lo() && interval.hi() <= whi) {
            return Ok(report.indeterminate(format!(
                "conjugate roots: the closed form needs I ⊂ ({wlo}, {whi})"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let mut worst = T::zero();
    for _ in 0..CROSS_VALIDATION_POINTS {
        let x = random_point(&mut rng, lo, hi, fam.dim());
        let direct = mean.eval(&x)?;
        let closed = eval_gini_closed(&params, fam, mu, &x)?.value;
        worst = worst.max((direct - closed).abs() / closed.abs());
    }
    if report.check(Check::at_most("gini_cross_validation", worst, CROSS_VALIDATION_TOL)) {
        report.verdict = Verdict::Homogeneous { params };
        Ok(report)
    } else {
        Ok(report.indeterminate("characteristic roots found but the closed form disagrees with direct evaluation"))
    }
}

/// Classifies the quasi-arithmetic mean `f⁻¹⟨f∘m⟩` as a Hölder mean or not.
///
/// `xf''/f'` constant `= α` gives `H_p` with `p = α + 1`.
pub fn classify_homogeneous_qa<T: Scalar>(
    f: &Expr<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    grid: &[T],
    seed: u64,
) -> Result<DecisionReport<T>> {
    fam.validate(mu)?;
    check_grid(grid, &[])?;
    if !(grid[0] > T::zero()) {
        return Err(Error::Precondition("homogeneity classification needs a positive grid".into()));
    }
    if !fam.is_homogeneous() {
        return Err(Error::Precondition("the family must be homogeneous".into()));
    }
    let mut report = DecisionReport::new(grid);
    report.seed = Some(seed);
    let x0 = grid[grid.len() / 2];
    if !nondegeneracy_on(&mut report, fam, mu, &[x0], false)? {
        return Ok(report.indeterminate(format!("every centered partial vanishes at x0 = {x0}")));
    }

    let mut alpha = Vec::with_capacity(grid.len());
    for &x in grid {
        let j = f.jet(x);
        if !(j.d1 != T::zero() && j.d1.is_finite() && j.d2.is_finite()) {
            return Err(Error::Precondition(format!("f' vanishes or is undefined at x = {x}")));
        }
        alpha.push(x * j.d2 / j.d1);
    }
    let (a_mean, a_dev) = mean_and_deviation(&alpha);
    report.check(Check::info("alpha_mean", a_mean));
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let span = Interval::new(lo, hi)?;

    if !report.check(Check::at_most("alpha_constancy", a_dev / (T::one() + a_mean.abs()), CONSTANCY_TOL)) {
        let scan = scan_with(&span, fam.dim(), SCAN_LAMBDAS, SCAN_POINTS, |x| eval_quasi_arithmetic(f, fam, mu, x))?;
        let worst = scan.worst.expect("scan is nonempty");
        report.check(Check::above("counterexample_gap", worst.gap, SEPARATION_TOL));
        report.counterexample = Some(worst);
        report.verdict = Verdict::NotHomogeneous;
        return Ok(report);
    }

    let p = a_mean + T::one();
    let params = GiniParams::holder(p);
    report.gini = Some(params);
    report.check(Check::info("holder_exponent", p));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for _ in 0..CROSS_VALIDATION_POINTS {
        let x = random_point(&mut rng, lo, hi, fam.dim());
        let direct = eval_quasi_arithmetic(f, fam, mu, &x)?;
        let closed = eval_holder(p, fam, mu, &x)?;
        worst = worst.max((direct - closed).abs() / closed.abs());
    }
    if report.check(Check::at_most("holder_cross_validation", worst, CROSS_VALIDATION_TOL)) {
        report.verdict = Verdict::Homogeneous { params };
        Ok(report)
    } else {
        Ok(report.indeterminate("Hölder exponent found but the closed form disagrees with direct evaluation"))
    }
}

fn mean_and_deviation<T: Scalar>(v: &[T]) -> (T, T) {
    let mean = v.iter().fold(T::zero(), |a, &x| a + x) / lit(v.len() as f64);
    let dev = v.iter().fold(T::zero(), |a, &x| a.max((x - mean).abs()));
    (mean, dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(lo, hi).unwrap()
    }

    fn setup() -> (MeanFamily<f64>, Measure<f64>) {
        (MeanFamily::two_point(), Measure::two_point(0.3).unwrap())
    }

    #[test]
    fn transformed_pair_is_equal() {
        let (fam, mu) = setup();
        let a = GeneratorPair::new(Expr::pow(2.0), Expr::X, iv(1.0, 2.0));
        let w = EquivalenceWitness::new(2.0, 3.0, 1.0, -1.0).unwrap();
        let b = a.apply_transform(&w);
        let r = decide_equality(&b, &a, &fam, &mu, &default_grid(&iv(1.0, 2.0))).unwrap();
        assert_eq!(r.verdict, Verdict::Equal);
        let got = r.witness.unwrap();
        for (x, y) in [(got.alpha, 2.0), (got.beta, 3.0), (got.gamma, 1.0), (got.delta, -1.0)] {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn different_powers_are_not_equal() {
        let (fam, mu) = setup();
        let a = GeneratorPair::new(Expr::pow(2.0), Expr::X, iv(1.0, 2.0));
        let b = GeneratorPair::new(Expr::pow(3.0), Expr::X, iv(1.0, 2.0));
        let r = decide_equality(&a, &b, &fam, &mu, &default_grid(&iv(1.0, 2.0))).unwrap();
        assert_eq!(r.verdict, Verdict::NotEqual);
        let c = r.counterexample.unwrap();
        assert!(c.gap > SEPARATION_TOL);
        let ma = crate::evaluate::eval_implicit(&a, &fam, &mu, &c.x).unwrap();
        let mb = crate::evaluate::eval_implicit(&b, &fam, &mu, &c.x).unwrap();
        assert!((ma - mb).abs() > SEPARATION_TOL);
    }

    #[test]
    fn symmetric_measure_is_indeterminate() {
        let fam = MeanFamily::two_point();
        let mu = Measure::two_point(0.5).unwrap();
        let a = GeneratorPair::new(Expr::pow(2.0), Expr::X, iv(1.0, 2.0));
        let b = GeneratorPair::new(Expr::pow(3.0), Expr::X, iv(1.0, 2.0));
        let r = decide_equality(&a, &b, &fam, &mu, &default_grid(&iv(1.0, 2.0))).unwrap();
        assert!(r.is_indeterminate());
    }

    #[test]
    fn grid_and_capability_errors() {
        let (fam, mu) = setup();
        let a = GeneratorPair::new(Expr::pow(2.0), Expr::X, iv(1.0, 2.0));
        let short = iv(1.0, 2.0).chebyshev_grid(9, 0.05);
        assert!(matches!(decide_equality(&a, &a, &fam, &mu, &short), Err(Error::Precondition(_))));
        let low = a.clone().with_smoothness(2).unwrap();
        assert!(matches!(
            decide_equality(&low, &a, &fam, &mu, &default_grid(&iv(1.0, 2.0))),
            Err(Error::Capability { .. })
        ));
        // W = 0 at x = 1 for (x² - 2x, 1)
        let sing = GeneratorPair::new(
            Expr::affine(vec![(1.0, Expr::pow(2.0)), (-2.0, Expr::X)], 0.0),
            Expr::constant(1.0),
            iv(0.5, 1.5),
        );
        let grid = iv(0.5, 1.5).interior_grid(17);
        assert!(grid.contains(&1.0));
        assert!(matches!(decide_equality(&sing, &sing, &fam, &mu, &grid), Err(Error::Precondition(_))));
    }

    #[test]
    fn qa_equality_examples() {
        let (fam, mu) = setup();
        let grid = default_grid(&iv(1.0, 2.0));
        let f = Expr::Exp;
        let g = Expr::affine(vec![(3.0, Expr::Exp)], 2.0);
        let r = decide_equality_qa(&f, &g, &fam, &mu, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Equal);
        let [a, b] = r.affine.unwrap();
        assert!((a - 3.0).abs() < 1e-9 && (b - 2.0).abs() < 1e-9);

        let r = decide_equality_qa(&Expr::Log, &Expr::X, &fam, &mu, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::NotEqual);
        assert!(r.counterexample.unwrap().gap > SEPARATION_TOL);

        let r = decide_equality_qa(&Expr::Log, &Expr::X, &fam, &Measure::dirac(0.3).unwrap(), &grid).unwrap();
        assert!(r.is_indeterminate());
    }

    #[test]
    fn classifier_examples() {
        let (fam, mu) = setup();
        let i = iv(1.0, 2.0);
        let r = classify_homogeneous(&GeneratorPair::new(Expr::pow(2.0), Expr::X, i), &fam, &mu, &default_grid(&i), 0)
            .unwrap();
        match r.verdict {
            Verdict::Homogeneous { params } => assert!(params.distance(&GiniParams::real(2.0, 1.0)) < 1e-7),
            v => panic!("unexpected {v:?}"),
        }
        let r = classify_homogeneous(
            &GeneratorPair::new(Expr::X, Expr::constant(1.0), i),
            &fam,
            &mu,
            &default_grid(&i),
            0,
        )
        .unwrap();
        match r.verdict {
            Verdict::Homogeneous { params } => assert!(params.distance(&GiniParams::real(1.0, 0.0)) < 1e-7),
            v => panic!("unexpected {v:?}"),
        }
        let pr = MeanFamily::projection(2).unwrap();
        let cnt = Measure::counting(2).unwrap();
        let exp = GeneratorPair::new(Expr::Exp, Expr::constant(1.0), i);
        // counting measure on two labels is symmetric, so MT0 fails
        let r = classify_homogeneous(&exp, &pr, &cnt, &default_grid(&i), 0).unwrap();
        assert!(r.is_indeterminate());
        let pr3 = MeanFamily::projection(3).unwrap();
        let cnt3 = Measure::counting(3).unwrap();
        let lab = Measure::labels(&[0.3, 0.7]).unwrap();
        for (fam, mu) in [(&pr3, &cnt3), (&pr, &lab)] {
            let r = classify_homogeneous(&exp, fam, mu, &default_grid(&i), 0).unwrap();
            assert_eq!(r.verdict, Verdict::NotHomogeneous);
            let c = r.counterexample.unwrap();
            assert!(c.gap > SEPARATION_TOL && c.lambda.is_some());
        }
    }

    #[test]
    fn conjugate_window_violation_is_indeterminate() {
        // on (0.4, 1.5) the pair is Chebyshev (2 ln 3.75 < π) but the closed-form
        // window (e^{-π/4}, e^{π/4}) ≈ (0.456, 2.19) does not contain I
        let i = iv(0.4, 1.5);
        let pair = GiniParams::conjugate(1.0, 2.0).unwrap().generator_pair(i).unwrap();
        let (fam, mu) = setup();
        let r = classify_homogeneous(&pair, &fam, &mu, &default_grid(&i), 0).unwrap();
        assert!(r.is_indeterminate());
        assert!(matches!(r.gini, Some(GiniParams::Conjugate { .. })));
    }

    #[test]
    fn qa_classifier_examples() {
        let (fam, mu) = setup();
        let grid = default_grid(&iv(1.0, 2.0));
        let r = classify_homogeneous_qa(&Expr::pow(3.0), &fam, &mu, &grid, 0).unwrap();
        assert!(matches!(r.verdict, Verdict::Homogeneous { params } if params.distance(&GiniParams::holder(3.0)) < 1e-7));
        let r = classify_homogeneous_qa(&Expr::Log, &fam, &mu, &grid, 0).unwrap();
        assert!(matches!(r.verdict, Verdict::Homogeneous { params } if params.distance(&GiniParams::holder(0.0)) < 1e-7));
        let r = classify_homogeneous_qa(&Expr::Exp, &fam, &mu, &grid, 0).unwrap();
        assert_eq!(r.verdict, Verdict::NotHomogeneous);
    }

    #[test]
    fn ratio_and_sections() {
        let i = iv(1.0, 2.0);
        let r = ratio_set(&i).unwrap();
        assert_eq!((r.lo(), r.hi()), (0.5, 2.0));
        assert_eq!(lambda_section(&i, 1.0).unwrap(), i);
        let s = lambda_section(&i, 1.5).unwrap();
        assert_eq!((s.lo(), s.hi()), (1.0, 2.0 / 1.5));
        assert!(lambda_section(&i, 2.0).is_err());
        assert!(ratio_set(&iv(-1.0, 2.0)).is_err());
    }

    #[test]
    fn dilation() {
        let p = GeneratorPair::new(Expr::pow(2.5), Expr::pow(0.5), iv(1.0, 2.0));
        let l = 1.7;
        let q = dilate_pair(&p, l).unwrap();
        assert!((q.interval().lo() - 1.0 / l).abs() < 1e-15 && (q.interval().hi() - 2.0 / l).abs() < 1e-15);
        for x in q.interval().interior_grid(7) {
            assert!((q.phi(x).unwrap() - l * p.phi(l * x).unwrap()).abs() < 1e-12);
            assert!((q.psi(x).unwrap() - l * l * p.psi(l * x).unwrap()).abs() < 1e-12);
            assert!((x * q.phi(x).unwrap() - (l * x) * p.phi(l * x).unwrap()).abs() < 1e-12);
        }
        assert_eq!(dilate_pair(&p, 1.0).unwrap().interval(), p.interval());
    }

    #[test]
    fn scans() {
        let (fam, mu) = setup();
        let i = iv(1.0, 2.0);
        let gini = GeneratorPair::new(Expr::pow(2.0), Expr::X, i);
        let s = homogeneity_scan(&gini, &fam, &mu, 9, 12).unwrap();
        assert!(s.max_rel <= 1e-9, "{}", s.max_rel);
        assert_eq!(s.lambdas[4], 1.0);
        assert_eq!(s.row_max[4], 0.0);
        let e = homogeneity_scan(&GeneratorPair::new(Expr::Exp, Expr::constant(1.0), i), &fam, &mu, 9, 12).unwrap();
        assert!(e.max_rel > 1e-4);
    }
}
