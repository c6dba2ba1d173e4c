//! Least-squares fitting: a bounded Levenberg–Marquardt core and the model
//! fits built on it (exponential decays, echo pairs, Ramsey fringes, straight
//! lines, RB decays and leakage-RB curves).
//!
//! Nonlinear fits are seeded by a one-dimensional grid over the decay rate
//! with the linear amplitudes solved exactly at each grid point, so the
//! minimizer starts inside the right basin.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq::{gaussian_interp_frequency, DEFAULT_SIGMA_RATIO};
use crate::trace::TimeTrace;

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
    pub standard_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<Param>,
    /// Covariance of the parameters, in `params` order.
    pub covariance: Vec<Vec<f64>>,
    /// √(Σ r²) over the (weighted) residuals.
    pub residual_norm: f64,
    /// χ² per degree of freedom; with unit weights this is the residual variance.
    pub reduced_chi2: f64,
    pub dof: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Some parameter sits on a bound of its allowed range.
    pub at_bound: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> f64 {
        self.param(name).value
    }

    pub fn error(&self, name: &str) -> f64 {
        self.param(name).standard_error.unwrap_or(f64::NAN)
    }

    pub fn param(&self, name: &str) -> &Param {
        self.params
            .iter()
            .find(|p| p.name == name)
            .unwrap_or_else(|| panic!("fit has no parameter `{name}`"))
    }

    fn index(&self, name: &str) -> usize {
        self.params.iter().position(|p| p.name == name).expect("known parameter")
    }

    pub fn covariance_of(&self, a: &str, b: &str) -> f64 {
        self.covariance[self.index(a)][self.index(b)]
    }
}

/// How parameter uncertainties are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Unit weights; covariance scaled by the residual variance.
    Unweighted,
    /// Residuals already divided by known σ; covariance used as is.
    Absolute,
}

struct Solution {
    p: Vec<f64>,
    r: DVector<f64>,
    j: DMatrix<f64>,
    iterations: usize,
}

/// Minimizes ½‖r(p)‖² with p confined to [lower, upper] by projection.
fn levenberg_marquardt<F>(eval: F, p0: &[f64], lower: &[f64], upper: &[f64]) -> Result<Solution>
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let n = p0.len();
    let clamp = |p: &mut Vec<f64>| {
        for k in 0..n {
            p[k] = p[k].clamp(lower[k], upper[k]);
        }
    };
    let mut p = p0.to_vec();
    clamp(&mut p);
    let (mut r, mut j) = eval(&p);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::NonConvergence { iterations: 0, reason: "non-finite residual at start".into() });
    }
    let mut mu = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let jt = j.transpose();
        let h = &jt * &j;
        let g = &jt * &r;
        let dmax = (0..n).map(|k| h[(k, k)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut a = h.clone();
        for k in 0..n {
            a[(k, k)] += mu * h[(k, k)].max(1e-12 * dmax);
        }
        let step = match a.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => a.svd(true, true).solve(&(-&g), 1e-14).map_err(|e| Error::NonConvergence {
                iterations: iteration,
                reason: e.into(),
            })?,
        };
        let mut trial = p.clone();
        for k in 0..n {
            trial[k] += step[k];
        }
        clamp(&mut trial);
        let small_step = (0..n).all(|k| (trial[k] - p[k]).abs() <= RELATIVE_TOLERANCE * (p[k].abs() + RELATIVE_TOLERANCE));
        let (r_new, j_new) = eval(&trial);
        let cost_new = r_new.norm_squared();
        if cost_new.is_finite() && cost_new <= cost {
            let reduction = cost - cost_new;
            p = trial;
            r = r_new;
            j = j_new;
            cost = cost_new;
            mu = (mu / 3.0).max(1e-15);
            if small_step || reduction <= RELATIVE_TOLERANCE * cost || cost <= f64::MIN_POSITIVE {
                return Ok(Solution { p, r, j, iterations: iteration });
            }
        } else {
            if small_step {
                return Ok(Solution { p, r, j, iterations: iteration });
            }
            mu *= 2.0;
            if mu > 1e20 {
                return Ok(Solution { p, r, j, iterations: iteration });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        reason: "iteration cap reached".into(),
    })
}

fn pseudo_inverse(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    m.clone()
        .pseudo_inverse(1e-14 * m.norm().max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DMatrix::from_element(n, n, f64::NAN))
}

fn finish(
    names: &[&str],
    sol: Solution,
    lower: &[f64],
    upper: &[f64],
    weighting: Weighting,
) -> FitResult {
    let m = sol.r.len();
    let n = sol.p.len();
    let dof = m.saturating_sub(n);
    let chi2 = sol.r.norm_squared();
    let reduced = if dof > 0 { chi2 / dof as f64 } else { 0.0 };
    let mut cov = pseudo_inverse(sol.j.transpose() * &sol.j);
    if weighting == Weighting::Unweighted {
        cov *= reduced;
    }
    let at_bound = (0..n).any(|k| {
        let tol = 1e-12 * (1.0 + sol.p[k].abs());
        (sol.p[k] - lower[k]).abs() <= tol || (upper[k] - sol.p[k]).abs() <= tol
    });
    FitResult {
        params: names
            .iter()
            .enumerate()
            .map(|(k, name)| Param {
                name: (*name).to_string(),
                value: sol.p[k],
                standard_error: Some(cov[(k, k)].max(0.0).sqrt()),
            })
            .collect(),
        covariance: (0..n).map(|a| (0..n).map(|b| cov[(a, b)]).collect()).collect(),
        residual_norm: chi2.sqrt(),
        reduced_chi2: reduced,
        dof,
        converged: true,
        iterations: sol.iterations,
        at_bound,
        warnings: Vec::new(),
    }
}

/// Least-squares coefficients of `y ≈ X c` and the residual sum of squares.
fn linear_lsq(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let c = x.clone().svd(true, true).solve(y, 1e-13).ok()?;
    let rss = (x * &c - y).norm_squared();
    rss.is_finite().then_some((c, rss))
}

/// Scans `grid`, solving the linear coefficients at each value, and returns
/// the best (value, coefficients).
fn grid_seed<B>(grid: impl IntoIterator<Item = f64>, basis: B, y: &DVector<f64>) -> Option<(f64, DVector<f64>)>
where
    B: Fn(f64) -> DMatrix<f64>,
{
    grid.into_iter()
        .filter_map(|g| linear_lsq(&basis(g), y).map(|(c, rss)| (g, c, rss)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map(|(g, c, _)| (g, c))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
}

fn check_not_constant(y: &[f64]) -> Result<()> {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(1e-300)) {
        return Err(Error::Degenerate("constant signal: decay time is unidentifiable".into()));
    }
    Ok(())
}

fn span_warning(fit: &mut FitResult, span: f64, t: f64) {
    if span < 0.5 * t {
        fit.warnings.push(format!("delay span {span:.4} covers less than half the fitted decay time {t:.4}"));
    }
}

/// Fits S = A·exp(−t/T) + B; `T` in the delay unit (µs).
pub fn fit_exp_decay(trace: &TimeTrace) -> Result<FitResult> {
    let t = &trace.delays_us;
    let y = DVector::from_column_slice(&trace.signal);
    if t.len() < 5 {
        return Err(Error::InsufficientData(format!("exponential fit needs ≥ 5 points, got {}", t.len())));
    }
    check_not_constant(&trace.signal)?;
    let span = t[t.len() - 1] - t[0];
    let basis = |tau: f64| DMatrix::from_fn(t.len(), 2, |i, c| if c == 0 { (-t[i] / tau).exp() } else { 1.0 });
    let (tau0, c0) = grid_seed(log_grid(span / 100.0, span * 100.0, 121), basis, &y)
        .ok_or_else(|| Error::Degenerate("no usable starting point".into()))?;
    let eval = |p: &[f64]| {
        let (a, b, tau) = (p[0], p[1], p[2]);
        let mut r = DVector::zeros(t.len());
        let mut j = DMatrix::zeros(t.len(), 3);
        for i in 0..t.len() {
            let e = (-t[i] / tau).exp();
            r[i] = a * e + b - y[i];
            j[(i, 0)] = e;
            j[(i, 1)] = 1.0;
            j[(i, 2)] = a * e * t[i] / (tau * tau);
        }
        (r, j)
    };
    let lower = [f64::NEG_INFINITY, f64::NEG_INFINITY, 1e-9 * span];
    let upper = [f64::INFINITY; 3];
    let sol = levenberg_marquardt(eval, &[c0[0], c0[1], tau0], &lower, &upper)?;
    let mut fit = finish(&["A", "B", "T"], sol, &lower, &upper, Weighting::Unweighted);
    let tau = fit.value("T");
    span_warning(&mut fit, span, tau);
    Ok(fit)
}

/// Joint fit of an echo pair: S± = ±A·exp(−t/T2e) + B with shared A, B, T2e.
pub fn fit_echo_pair(plus: &TimeTrace, minus: &TimeTrace) -> Result<FitResult> {
    if plus.delays_us != minus.delays_us {
        return Err(Error::GridMismatch("echo traces must share one delay grid".into()));
    }
    let t = &plus.delays_us;
    let n = t.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("echo fit needs ≥ 3 delays, got {n}")));
    }
    let diff: Vec<f64> = plus.signal.iter().zip(&minus.signal).map(|(a, b)| a - b).collect();
    check_not_constant(&diff)?;
    let y = DVector::from_iterator(2 * n, plus.signal.iter().chain(&minus.signal).copied());
    let span = t[n - 1] - t[0];
    let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
    let basis = |tau: f64| {
        DMatrix::from_fn(2 * n, 2, |i, c| if c == 0 { sign(i) * (-t[i % n] / tau).exp() } else { 1.0 })
    };
    let (tau0, c0) = grid_seed(log_grid(span / 100.0, span * 100.0, 121), basis, &y)
        .ok_or_else(|| Error::Degenerate("no usable starting point".into()))?;
    let eval = |p: &[f64]| {
        let (a, b, tau) = (p[0], p[1], p[2]);
        let mut r = DVector::zeros(2 * n);
        let mut j = DMatrix::zeros(2 * n, 3);
        for i in 0..2 * n {
            let ti = t[i % n];
            let e = sign(i) * (-ti / tau).exp();
            r[i] = a * e + b - y[i];
            j[(i, 0)] = e;
            j[(i, 1)] = 1.0;
            j[(i, 2)] = a * e * ti / (tau * tau);
        }
        (r, j)
    };
    let lower = [f64::NEG_INFINITY, f64::NEG_INFINITY, 1e-9 * span];
    let upper = [f64::INFINITY; 3];
    let sol = levenberg_marquardt(eval, &[c0[0], c0[1], tau0], &lower, &upper)?;
    let mut fit = finish(&["A", "B", "T2e"], sol, &lower, &upper, Weighting::Unweighted);
    let tau = fit.value("T2e");
    span_warning(&mut fit, span, tau);
    Ok(fit)
}

/// Fits S = A·exp(−t/T)·cos(2πft + φ) + B; `f` in MHz for delays in µs.
pub fn fit_ramsey(trace: &TimeTrace) -> Result<FitResult> {
    fit_ramsey_with_window(trace, DEFAULT_SIGMA_RATIO)
}

/// As [`fit_ramsey`], seeding `f` from a Gaussian window of width σ = ratio·T.
pub fn fit_ramsey_with_window(trace: &TimeTrace, sigma_ratio: f64) -> Result<FitResult> {
    let t = &trace.delays_us;
    let n = t.len();
    check_not_constant(&trace.signal)?;
    let f0 = gaussian_interp_frequency(trace, sigma_ratio)?.f_est_hz * 1e-6;
    let y = DVector::from_column_slice(&trace.signal);
    let span = t[n - 1] - t[0];
    let w = 2.0 * std::f64::consts::PI;
    let basis = |tau: f64| {
        DMatrix::from_fn(n, 3, |i, c| {
            let e = (-t[i] / tau).exp();
            match c {
                0 => e * (w * f0 * t[i]).cos(),
                1 => e * (w * f0 * t[i]).sin(),
                _ => 1.0,
            }
        })
    };
    let (tau0, c0) = grid_seed(log_grid(span / 30.0, span * 100.0, 121), basis, &y)
        .ok_or_else(|| Error::Degenerate("no usable starting point".into()))?;
    let a0 = c0[0].hypot(c0[1]);
    let phi0 = (-c0[1]).atan2(c0[0]);
    let eval = |p: &[f64]| {
        let (a, tau, f, phi, b) = (p[0], p[1], p[2], p[3], p[4]);
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, 5);
        for i in 0..n {
            let e = (-t[i] / tau).exp();
            let arg = w * f * t[i] + phi;
            let (s, c) = arg.sin_cos();
            r[i] = a * e * c + b - y[i];
            j[(i, 0)] = e * c;
            j[(i, 1)] = a * e * c * t[i] / (tau * tau);
            j[(i, 2)] = -a * e * s * w * t[i];
            j[(i, 3)] = -a * e * s;
            j[(i, 4)] = 1.0;
        }
        (r, j)
    };
    let lower = [0.0, 1e-9 * span, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY];
    let upper = [f64::INFINITY; 5];
    let sol = levenberg_marquardt(eval, &[a0, tau0, f0, phi0, c0[2]], &lower, &upper)?;
    let mut fit = finish(&["A", "T", "f", "phi", "B"], sol, &lower, &upper, Weighting::Unweighted);
    let tau = fit.value("T");
    span_warning(&mut fit, span, tau);
    Ok(fit)
}

/// Ordinary (or σ-weighted) least-squares line. Parameters `k` and, unless
/// `through_origin`, `intercept`.
pub fn fit_linear(x: &[f64], y: &[f64], sigma: Option<&[f64]>, through_origin: bool) -> Result<FitResult> {
    if x.len() != y.len() || sigma.is_some_and(|s| s.len() != x.len()) {
        return Err(Error::GridMismatch("x, y and σ must have equal lengths".into()));
    }
    let need = if through_origin { 2 } else { 3 };
    if x.len() < need {
        return Err(Error::InsufficientData(format!("linear fit needs ≥ {need} points, got {}", x.len())));
    }
    if let Some(s) = sigma {
        if s.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter { field: "sigma".into(), reason: "all σ must be > 0".into() });
        }
    }
    let rank_deficient = if through_origin {
        x.iter().all(|v| *v == 0.0)
    } else {
        x.iter().all(|v| *v == x[0])
    };
    if rank_deficient {
        return Err(Error::RankDeficient("x values do not determine a slope".into()));
    }
    let cols = if through_origin { 1 } else { 2 };
    let wt = |i: usize| sigma.map_or(1.0, |s| 1.0 / s[i]);
    let design = DMatrix::from_fn(x.len(), cols, |i, c| if c == 0 { x[i] * wt(i) } else { wt(i) });
    let rhs = DVector::from_fn(y.len(), |i, _| y[i] * wt(i));
    let (coef, _) = linear_lsq(&design, &rhs).ok_or_else(|| Error::RankDeficient("singular design".into()))?;
    let sol = Solution {
        p: coef.iter().copied().collect(),
        r: &design * &coef - &rhs,
        j: design,
        iterations: 0,
    };
    let weighting = if sigma.is_some() { Weighting::Absolute } else { Weighting::Unweighted };
    let names: &[&str] = if through_origin { &["k"] } else { &["k", "intercept"] };
    let unbounded = vec![f64::NEG_INFINITY; cols];
    let upper = vec![f64::INFINITY; cols];
    Ok(finish(names, sol, &unbounded, &upper, weighting))
}

/// Weighted fit of A·α^m + B with α confined to (0, 1].
///
/// With `errors` given (all positive) residuals are weighted by 1/σ and the
/// covariance is absolute; otherwise unit weights with residual scaling.
pub fn fit_rb_curve(lengths: &[f64], survival: &[f64], errors: Option<&[f64]>) -> Result<FitResult> {
    let n = lengths.len();
    if survival.len() != n || errors.is_some_and(|e| e.len() != n) {
        return Err(Error::GridMismatch("lengths, survival and errors must have equal lengths".into()));
    }
    let mut distinct = lengths.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::InsufficientData("RB fit needs ≥ 4 distinct lengths".into()));
    }
    let (weights, weighting) = weights_from(errors, n);
    let m = lengths;
    let y = DVector::from_fn(n, |i, _| survival[i] * weights[i]);
    let basis = |alpha: f64| DMatrix::from_fn(n, 2, |i, c| weights[i] * if c == 0 { alpha.powf(m[i]) } else { 1.0 });
    let grid = (0..200).map(|k| 1.0 - 10f64.powf(-0.05 - 7.0 * k as f64 / 199.0));
    let (alpha0, c0) = grid_seed(grid, basis, &y).ok_or_else(|| Error::Degenerate("no usable starting point".into()))?;
    let eval = |p: &[f64]| {
        let (a, alpha, b) = (p[0], p[1], p[2]);
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, 3);
        for i in 0..n {
            let pw = alpha.powf(m[i]);
            let w = weights[i];
            r[i] = w * (a * pw + b) - y[i];
            j[(i, 0)] = w * pw;
            j[(i, 1)] = w * a * m[i] * if m[i] == 0.0 { 0.0 } else { alpha.powf(m[i] - 1.0) };
            j[(i, 2)] = w;
        }
        (r, j)
    };
    let lower = [f64::NEG_INFINITY, 1e-9, f64::NEG_INFINITY];
    let upper = [f64::INFINITY, 1.0, f64::INFINITY];
    let mut sol = levenberg_marquardt(eval, &[c0[0], alpha0, c0[1]], &lower, &upper)?;
    // A decay that does not beat the constant model is reported as α = 1, A = 0.
    let wsum: f64 = weights.iter().map(|w| w * w).sum();
    let level = (0..n).map(|i| weights[i] * y[i]).sum::<f64>() / wsum;
    let rss_const: f64 = (0..n).map(|i| (y[i] - weights[i] * level).powi(2)).sum();
    let floor = 1e-24 * y.norm_squared();
    if sol.r.norm_squared() + floor >= rss_const * (1.0 - 1e-9) {
        let p = vec![0.0, 1.0, level];
        let (r, j) = eval(&p);
        sol = Solution { p, r, j, iterations: sol.iterations };
    }
    let mut fit = finish(&["A", "alpha", "B"], sol, &lower, &upper, weighting);
    if fit.value("alpha") >= 1.0 - 1e-12 {
        fit.warnings.push("alpha at the upper bound 1: boundary solution, no resolvable decay".into());
    }
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    ThreeParam,
    FourParam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageFit {
    pub mode: LeakageMode,
    /// x(m) = L∞(1 − λ^m), parameters `L_inf`, `lambda`.
    pub leakage: FitResult,
    /// A + B·λ^m + C·p^m (four-parameter) or A + C·p^m (three-parameter).
    pub survival: FitResult,
    /// Leakage and seepage per Clifford.
    pub l1: f64,
    pub l1_err: f64,
    pub l2: f64,
    pub gates_per_clifford: f64,
    pub lpg: f64,
    pub lpg_err: f64,
    pub epc: f64,
    pub epc_err: f64,
    pub epg: f64,
    pub epg_err: f64,
    pub warnings: Vec<String>,
}

fn weights_from(errors: Option<&[f64]>, n: usize) -> (Vec<f64>, Weighting) {
    match errors {
        Some(e) if e.len() == n && e.iter().all(|v| *v > 0.0) => (e.iter().map(|v| 1.0 / v).collect(), Weighting::Absolute),
        _ => (vec![1.0; n], Weighting::Unweighted),
    }
}

fn fit_leakage_curve(m: &[f64], x: &[f64], errors: Option<&[f64]>) -> Result<FitResult> {
    let n = m.len();
    let (w, weighting) = weights_from(errors, n);
    let y = DVector::from_fn(n, |i, _| x[i] * w[i]);
    let basis = |lam: f64| DMatrix::from_fn(n, 1, |i, _| w[i] * (1.0 - lam.powf(m[i])));
    let grid = (0..200).map(|k| 1.0 - 10f64.powf(-0.05 - 7.0 * k as f64 / 199.0));
    let (lam0, c0) = grid_seed(grid, basis, &y).ok_or_else(|| Error::Degenerate("no usable starting point".into()))?;
    let eval = |p: &[f64]| {
        let (l_inf, lam) = (p[0], p[1]);
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, 2);
        for i in 0..n {
            let pw = lam.powf(m[i]);
            r[i] = w[i] * l_inf * (1.0 - pw) - y[i];
            j[(i, 0)] = w[i] * (1.0 - pw);
            j[(i, 1)] = -w[i] * l_inf * m[i] * if m[i] == 0.0 { 0.0 } else { lam.powf(m[i] - 1.0) };
        }
        (r, j)
    };
    let lower = [0.0, 0.0];
    let upper = [1.0, 1.0];
    let sol = levenberg_marquardt(eval, &[c0[0].clamp(0.0, 1.0), lam0], &lower, &upper)?;
    Ok(finish(&["L_inf", "lambda"], sol, &lower, &upper, weighting))
}

fn fit_leakage_survival(m: &[f64], s: &[f64], errors: Option<&[f64]>, lambda: Option<f64>) -> Result<FitResult> {
    let n = m.len();
    let (w, weighting) = weights_from(errors, n);
    let y = DVector::from_fn(n, |i, _| s[i] * w[i]);
    let extra = lambda.is_some() as usize;
    let lam = lambda.unwrap_or(1.0);
    let basis = |p: f64| {
        DMatrix::from_fn(n, 2 + extra, |i, c| {
            w[i] * match (c, extra) {
                (0, _) => 1.0,
                (1, 1) => lam.powf(m[i]),
                _ => p.powf(m[i]),
            }
        })
    };
    let grid = (0..200).map(|k| 1.0 - 10f64.powf(-0.05 - 7.0 * k as f64 / 199.0));
    let (p0, c0) = grid_seed(grid, basis, &y).ok_or_else(|| Error::Degenerate("no usable starting point".into()))?;
    let np = 3 + extra;
    let eval = |p: &[f64]| {
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, np);
        let (a, c, pd) = (p[0], p[np - 2], p[np - 1]);
        for i in 0..n {
            let dp = pd.powf(m[i]);
            let mut v = a + c * dp;
            j[(i, 0)] = w[i];
            if extra == 1 {
                let lp = lam.powf(m[i]);
                v += p[1] * lp;
                j[(i, 1)] = w[i] * lp;
            }
            j[(i, np - 2)] = w[i] * dp;
            j[(i, np - 1)] = w[i] * c * m[i] * if m[i] == 0.0 { 0.0 } else { pd.powf(m[i] - 1.0) };
            r[i] = w[i] * v - y[i];
        }
        (r, j)
    };
    let mut start: Vec<f64> = c0.iter().copied().collect();
    start.push(p0);
    let mut lower = vec![f64::NEG_INFINITY; np];
    let mut upper = vec![f64::INFINITY; np];
    lower[np - 1] = 1e-9;
    upper[np - 1] = 1.0;
    let sol = levenberg_marquardt(eval, &start, &lower, &upper)?;
    let names: &[&str] = if extra == 1 { &["A", "B", "C", "p"] } else { &["A", "C", "p"] };
    Ok(finish(names, sol, &lower, &upper, weighting))
}

/// Leakage-RB analysis. Leakage per Clifford L1 = L∞(1 − λ) and seepage
/// L2 = (1 − L∞)(1 − λ) come from the leaked-population curve; the error per
/// Clifford (1 − p)/2 comes from the computational survival curve, with the
/// leakage decay λ held fixed in four-parameter mode.
pub fn fit_leakage_rb(
    lengths: &[f64],
    leak_means: &[f64],
    leak_errors: Option<&[f64]>,
    survival_means: &[f64],
    survival_errors: Option<&[f64]>,
    mode: LeakageMode,
    gates_per_clifford: f64,
) -> Result<LeakageFit> {
    let n = lengths.len();
    if leak_means.len() != n || survival_means.len() != n {
        return Err(Error::GridMismatch("leakage and survival curves must match the lengths".into()));
    }
    if n < 5 {
        return Err(Error::InsufficientData("leakage RB needs ≥ 5 lengths".into()));
    }
    if let Some(k) = leak_means.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Validation {
            location: format!("leak_means[{k}]"),
            reason: "leaked population must lie in [0, 1]".into(),
        });
    }
    if !(gates_per_clifford > 0.0) {
        return Err(Error::InvalidParameter { field: "gates_per_clifford".into(), reason: "must be > 0".into() });
    }
    let leakage = fit_leakage_curve(lengths, leak_means, leak_errors)?;
    let (l_inf, lam) = (leakage.value("L_inf"), leakage.value("lambda"));
    let l1 = l_inf * (1.0 - lam);
    let l2 = (1.0 - l_inf) * (1.0 - lam);
    // Delta method with gradient (1 − λ, −L∞).
    let g = [1.0 - lam, -l_inf];
    let cov = &leakage.covariance;
    let var_l1 = g[0] * g[0] * cov[0][0] + 2.0 * g[0] * g[1] * cov[0][1] + g[1] * g[1] * cov[1][1];
    let l1_err = var_l1.max(0.0).sqrt();
    let fixed = match mode {
        LeakageMode::FourParam => Some(lam),
        LeakageMode::ThreeParam => None,
    };
    let survival = fit_leakage_survival(lengths, survival_means, survival_errors, fixed)?;
    let p = survival.value("p");
    let epc = 0.5 * (1.0 - p);
    let epc_err = 0.5 * survival.error("p");
    let lpg = l1 / gates_per_clifford;
    let epg = epc / gates_per_clifford;
    let mut warnings = Vec::new();
    if mode == LeakageMode::ThreeParam && epg <= lpg {
        warnings.push(format!(
            "three-parameter model assumes EPG ≫ LPG, but EPG = {epg:.3e} ≤ LPG = {lpg:.3e}"
        ));
    }
    Ok(LeakageFit {
        mode,
        leakage,
        survival,
        l1,
        l1_err,
        l2,
        gates_per_clifford,
        lpg,
        lpg_err: l1_err / gates_per_clifford,
        epc,
        epc_err,
        epg,
        epg_err: epc_err / gates_per_clifford,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{uniform_delays, TraceKind};

    fn decay(kind: TraceKind, a: f64, b: f64, tau: f64, n: usize, step: f64) -> TimeTrace {
        let t = uniform_delays(0.0, step, n);
        let s = t.iter().map(|x| a * (-x / tau).exp() + b).collect();
        TimeTrace::new(kind, t, s).unwrap()
    }

    #[test]
    fn exact_exponential() {
        let fit = fit_exp_decay(&decay(TraceKind::T1, 0.5, 0.5, 100.0, 60, 5.0)).unwrap();
        assert!((fit.value("T") - 100.0).abs() < 1e-9 * 100.0);
        assert!((fit.value("A") - 0.5).abs() < 1e-9);
        assert!(fit.residual_norm < 1e-8);
    }

    #[test]
    fn constant_trace_is_degenerate() {
        let t = uniform_delays(0.0, 1.0, 20);
        let tr = TimeTrace::new(TraceKind::T1, t, vec![0.3; 20]).unwrap();
        assert!(matches!(fit_exp_decay(&tr), Err(Error::Degenerate(_))));
    }

    #[test]
    fn echo_pair_exact_and_swapped() {
        let p = decay(TraceKind::EchoPlus, 0.45, 0.5, 116.0, 50, 6.0);
        let m = decay(TraceKind::EchoMinus, -0.45, 0.5, 116.0, 50, 6.0);
        let fit = fit_echo_pair(&p, &m).unwrap();
        assert!((fit.value("T2e") - 116.0).abs() < 1e-7);
        let swapped = fit_echo_pair(&m, &p).unwrap();
        assert!((swapped.value("A") + fit.value("A")).abs() < 1e-9);
        assert!((swapped.value("T2e") - fit.value("T2e")).abs() < 1e-7);
        let short = decay(TraceKind::EchoMinus, -0.45, 0.5, 116.0, 40, 6.0);
        assert!(matches!(fit_echo_pair(&p, &short), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn ramsey_exact() {
        let t = uniform_delays(0.0, 0.1, 400);
        let s = t
            .iter()
            .map(|x| 0.45 * (-x / 30.0).exp() * (2.0 * std::f64::consts::PI * 0.25 * x + 0.3).cos() + 0.5)
            .collect();
        let fit = fit_ramsey(&TimeTrace::new(TraceKind::Ramsey, t, s).unwrap()).unwrap();
        assert!((fit.value("f") - 0.25).abs() < 1e-9);
        assert!((fit.value("T") - 30.0).abs() < 1e-6);
    }

    #[test]
    fn linear_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        assert!((fit_linear(&x, &y, None, true).unwrap().value("k") - 3.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = fit_linear(&x, &y, None, false).unwrap();
        assert!((f.value("k") - 2.0).abs() < 1e-12 && (f.value("intercept") - 1.0).abs() < 1e-12);
        assert!(matches!(fit_linear(&[2.0; 4], &y, None, false), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn rb_exact_and_boundary() {
        let m: Vec<f64> = (0..20).map(|k| 1.0 + 150.0 * k as f64).collect();
        let s: Vec<f64> = m.iter().map(|x| 0.5 * 0.999f64.powf(*x) + 0.5).collect();
        let f = fit_rb_curve(&m, &s, None).unwrap();
        assert!((f.value("alpha") - 0.999).abs() < 1e-8);
        let flat = vec![0.98; m.len()];
        let f = fit_rb_curve(&m, &flat, None).unwrap();
        assert!(f.at_bound && f.value("alpha") == 1.0);
        assert!(!f.warnings.is_empty());
    }

    #[test]
    fn leakage_exact() {
        let m: Vec<f64> = (0..25).map(|k| 1.0 + 200.0 * k as f64).collect();
        let (l_inf, lam, p): (f64, f64, f64) = (0.06, 0.999, 0.9995);
        let leak: Vec<f64> = m.iter().map(|x| l_inf * (1.0 - lam.powf(*x))).collect();
        let surv: Vec<f64> = m.iter().map(|x| 0.47 + 0.03 * lam.powf(*x) + 0.5 * p.powf(*x)).collect();
        let f = fit_leakage_rb(&m, &leak, None, &surv, None, LeakageMode::FourParam, 2.0).unwrap();
        assert!((f.l1 - l_inf * (1.0 - lam)).abs() < 1e-10);
        assert!((f.epc - 0.5 * (1.0 - p)).abs() < 1e-9);
        assert!((f.epg - f.epc / 2.0).abs() < 1e-15);
    }
}
