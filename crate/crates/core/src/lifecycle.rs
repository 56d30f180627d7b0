//! Growth-curve fitting and technology life-cycle assessment.
//!
//! Cumulative patent counts are fitted with the Gompertz curve
//! `Y(t) = L * exp(-a * exp(-b t))` and the logistic curve
//! `Y(t) = L / (1 + a * exp(-b t))`, both parameterized by an asymptote `L`,
//! a shape `a`, and a rate `b`, with `t` counted in years from the first
//! observation.
//!
//! Fitting is ordinary nonlinear least squares via damped Gauss-Newton
//! (Levenberg-Marquardt with Marquardt diagonal scaling) over the analytic
//! Jacobian. Starting values come from linearizing the model at a provisional
//! asymptote `L0 = 1.05 * max(Y)` — for Gompertz, regressing
//! `ln(ln(L0/Y))` on `t` — with a coarse grid over `b` as fallback, and the
//! optimizer keeps the best of the candidate starts. The asymptote is
//! constrained to stay at or above the largest observed value.
//!
//! A fit that stops improving by less than a relative `1e-10` per step is
//! converged; one that exhausts its iteration budget is returned anyway with
//! `converged == false` so short, noisy series still yield diagnostics.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::TimeSeries;

/// The two supported growth models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthModel {
    Gompertz,
    Logistic,
}

impl GrowthModel {
    pub fn name(&self) -> &'static str {
        match self {
            GrowthModel::Gompertz => "gompertz",
            GrowthModel::Logistic => "logistic",
        }
    }

    /// Model value at `t` (years since the fit origin).
    pub fn predict(&self, l: f64, a: f64, b: f64, t: f64) -> f64 {
        let decay = (-b * t).exp();
        match self {
            GrowthModel::Gompertz => l * (-a * decay).exp(),
            GrowthModel::Logistic => l / (1.0 + a * decay),
        }
    }

    /// `[dY/dL, dY/da, dY/db]` at `t`, the rows of the fitting Jacobian.
    pub fn partials(&self, l: f64, a: f64, b: f64, t: f64) -> [f64; 3] {
        let decay = (-b * t).exp();
        match self {
            GrowthModel::Gompertz => {
                let g = (-a * decay).exp();
                [g, -l * g * decay, l * g * a * t * decay]
            }
            GrowthModel::Logistic => {
                let denom = 1.0 + a * decay;
                let denom2 = denom * denom;
                [1.0 / denom, -l * decay / denom2, l * a * t * decay / denom2]
            }
        }
    }

    /// Gompertz inflection / logistic midpoint: `t* = ln(a) / b`, where the
    /// curve passes `L/e` (Gompertz) or `L/2` (logistic).
    pub fn reference_t(&self, a: f64, b: f64) -> f64 {
        a.ln() / b
    }

    /// First `t` where the curve reaches `fraction * L`, solved analytically.
    pub fn fraction_t(&self, a: f64, b: f64, fraction: f64) -> f64 {
        match self {
            GrowthModel::Gompertz => (a / -fraction.ln()).ln() / b,
            GrowthModel::Logistic => (a * fraction / (1.0 - fraction)).ln() / b,
        }
    }
}

impl std::fmt::Display for GrowthModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("series has {got} points, need at least {needed}")]
    InsufficientData { needed: usize, got: usize },
    #[error("series is degenerate (fewer than 3 distinct values)")]
    DegenerateSeries,
}

/// Goodness-of-fit summary. `mape` is absent when every actual is zero, and
/// `mape_excluded` counts the zero actuals that were left out of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitMetrics {
    pub r_squared: f64,
    pub rmse: f64,
    pub mape: Option<f64>,
    pub mape_excluded: usize,
    pub n_points: usize,
}

/// A fitted growth curve plus its fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub t0_year: i32,
    pub metrics: FitMetrics,
    pub converged: bool,
}

impl GrowthFit {
    /// Prediction at a (possibly fractional) calendar year.
    pub fn predict_year(&self, year: f64) -> f64 {
        self.model.predict(self.l, self.a, self.b, year - self.t0_year as f64)
    }

    /// Calendar year of the Gompertz inflection / logistic midpoint.
    pub fn inflection_year(&self) -> f64 {
        self.t0_year as f64 + self.model.reference_t(self.a, self.b)
    }

    /// Calendar year where the curve first reaches 99% of `L`.
    pub fn saturation_year(&self) -> f64 {
        self.t0_year as f64 + self.model.fraction_t(self.a, self.b, 0.99)
    }
}

/// Life-cycle phase bands over the fraction of the asymptote reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MaturityPhase {
    Emerging,
    Growth,
    Maturity,
    Saturation,
}

impl MaturityPhase {
    pub fn name(&self) -> &'static str {
        match self {
            MaturityPhase::Emerging => "emerging",
            MaturityPhase::Growth => "growth",
            MaturityPhase::Maturity => "maturity",
            MaturityPhase::Saturation => "saturation",
        }
    }
}

impl std::fmt::Display for MaturityPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Phase boundaries as fractions of `L`. The defaults (10/50/90%) are an
/// artifact convention, not a property of the models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseThresholds {
    pub emerging_below: f64,
    pub growth_below: f64,
    pub maturity_below: f64,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        PhaseThresholds { emerging_below: 0.10, growth_below: 0.50, maturity_below: 0.90 }
    }
}

/// Where a technology sits on its life cycle at a given year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaturityAssessment {
    pub phase: MaturityPhase,
    pub fraction_of_l: f64,
    pub inflection_year: f64,
    pub saturation_year: f64,
}

/// Optimizer knobs; the defaults satisfy the fitting contract.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub relative_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iterations: 500, relative_tolerance: 1e-10 }
    }
}

/// Fits the Gompertz curve to a cumulative series.
pub fn fit_gompertz(series: &TimeSeries) -> Result<GrowthFit, FitError> {
    fit_model(GrowthModel::Gompertz, series, &FitOptions::default())
}

/// Fits the logistic curve to a cumulative series.
pub fn fit_logistic(series: &TimeSeries) -> Result<GrowthFit, FitError> {
    fit_model(GrowthModel::Logistic, series, &FitOptions::default())
}

/// Fits both models and returns the better one per [`select_model`].
pub fn fit_auto(series: &TimeSeries) -> Result<GrowthFit, FitError> {
    let gompertz = fit_gompertz(series)?;
    let logistic = fit_logistic(series)?;
    Ok(select_model(vec![gompertz, logistic]).expect("two candidates"))
}

/// Fits `model` by least squares on `(year - first_year, value)` pairs.
pub fn fit_model(
    model: GrowthModel,
    series: &TimeSeries,
    options: &FitOptions,
) -> Result<GrowthFit, FitError> {
    let points = series.points();
    if points.len() < 4 {
        return Err(FitError::InsufficientData { needed: 4, got: points.len() });
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.1).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(FitError::DegenerateSeries);
    }

    let t0_year = points[0].0;
    let ts: Vec<f64> = points.iter().map(|p| (p.0 - t0_year) as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let max_obs = ys.iter().copied().fold(f64::MIN, f64::max);
    let l0 = 1.05 * max_obs;

    let mut seeds: Vec<[f64; 3]> = Vec::new();
    if let Some((a, b)) = seed_linearized(model, &ts, &ys, l0) {
        seeds.push([l0, a, b]);
    }
    seeds.push(seed_grid(model, &ts, &ys, l0));

    let mut best: Option<([f64; 3], f64, bool)> = None;
    for seed in seeds {
        let run = levenberg_marquardt(model, &ts, &ys, seed, max_obs, options);
        if best.as_ref().is_none_or(|(_, sse, _)| run.1 < *sse) {
            best = Some(run);
        }
    }
    let ([l, a, b], _, converged) = best.expect("at least one seed");

    let mut fit = GrowthFit {
        model,
        l,
        a,
        b,
        t0_year,
        metrics: FitMetrics { r_squared: 0.0, rmse: 0.0, mape: None, mape_excluded: 0, n_points: 0 },
        converged,
    };
    fit.metrics = goodness_of_fit(&fit, series);
    Ok(fit)
}

/// Linearized start: regress the model's transform of `Y` on `t`. Points
/// with `Y == 0` or `Y >= L0` cannot be transformed and are skipped; two
/// usable points are required, and the slope must come out positive.
fn seed_linearized(model: GrowthModel, ts: &[f64], ys: &[f64], l0: f64) -> Option<(f64, f64)> {
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for (&t, &y) in ts.iter().zip(ys) {
        if y <= 0.0 || y >= l0 {
            continue;
        }
        let z = match model {
            GrowthModel::Gompertz => (l0 / y).ln().ln(),
            GrowthModel::Logistic => (l0 / y - 1.0).ln(),
        };
        if z.is_finite() {
            xs.push(t);
            zs.push(z);
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_z = zs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxz: f64 = xs.iter().zip(&zs).map(|(x, z)| (x - mean_x) * (z - mean_z)).sum();
    let slope = sxz / sxx;
    let intercept = mean_z - slope * mean_x;
    // z = ln(a) - b t for both transforms.
    let b = -slope;
    let a = intercept.exp();
    (b > 0.0 && a.is_finite() && a > 0.0).then_some((a, b))
}

/// Fallback start: walk a coarse grid over `b`, solve `a` in closed form for
/// each, keep the grid point with the smallest squared error.
fn seed_grid(model: GrowthModel, ts: &[f64], ys: &[f64], l0: f64) -> [f64; 3] {
    let mut best = ([l0, 1.0, 0.3], f64::INFINITY);
    for step in 1..=20 {
        let b = step as f64 * 0.05;
        // With L0 and b fixed, the transformed model is linear in a:
        // w = a * exp(-b t), so a = sum(x w) / sum(x^2).
        let mut num = 0.0;
        let mut den = 0.0;
        for (&t, &y) in ts.iter().zip(ys) {
            if y <= 0.0 {
                continue;
            }
            let w = match model {
                GrowthModel::Gompertz => (l0 / y).ln(),
                GrowthModel::Logistic => l0 / y - 1.0,
            };
            let x = (-b * t).exp();
            num += x * w;
            den += x * x;
        }
        if den == 0.0 {
            continue;
        }
        let a = (num / den).max(1e-9);
        let sse = sum_squared_error(model, ts, ys, [l0, a, b]);
        if sse < best.1 {
            best = ([l0, a, b], sse);
        }
    }
    best.0
}

fn sum_squared_error(model: GrowthModel, ts: &[f64], ys: &[f64], p: [f64; 3]) -> f64 {
    ts.iter()
        .zip(ys)
        .map(|(&t, &y)| {
            let r = y - model.predict(p[0], p[1], p[2], t);
            r * r
        })
        .sum()
}

fn clamp_params(mut p: [f64; 3], l_floor: f64) -> [f64; 3] {
    p[0] = p[0].max(l_floor).max(1e-9);
    p[1] = p[1].max(1e-9);
    p[2] = p[2].max(1e-9);
    p
}

/// Damped Gauss-Newton over the analytic Jacobian. Returns the parameters,
/// their squared error, and whether the relative-decrease tolerance was met
/// within the iteration budget.
fn levenberg_marquardt(
    model: GrowthModel,
    ts: &[f64],
    ys: &[f64],
    seed: [f64; 3],
    l_floor: f64,
    options: &FitOptions,
) -> ([f64; 3], f64, bool) {
    const LAMBDA_MAX: f64 = 1e12;
    let mut p = clamp_params(seed, l_floor);
    let mut sse = sum_squared_error(model, ts, ys, p);
    let mut lambda = 1e-3;

    for _ in 0..options.max_iterations {
        if sse == 0.0 {
            return (p, sse, true);
        }
        // Normal equations J^T J and J^T r for residuals r = y - f.
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&t, &y) in ts.iter().zip(ys) {
            let g = model.partials(p[0], p[1], p[2], t);
            let r = y - model.predict(p[0], p[1], p[2], t);
            for i in 0..3 {
                jtr[i] += g[i] * r;
                for j in 0..3 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }

        let mut improved = false;
        while lambda <= LAMBDA_MAX {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(step) = solve3(damped, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = clamp_params([p[0] + step[0], p[1] + step[1], p[2] + step[2]], l_floor);
            let trial_sse = sum_squared_error(model, ts, ys, trial);
            if trial_sse.is_finite() && trial_sse <= sse {
                let relative_decrease = (sse - trial_sse) / sse;
                p = trial;
                sse = trial_sse;
                lambda = (lambda / 3.0).max(1e-12);
                if relative_decrease < options.relative_tolerance {
                    return (p, sse, true);
                }
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // Damping maxed out without any possible decrease: stationary.
            return (p, sse, true);
        }
    }
    (p, sse, false)
}

/// Gaussian elimination with partial pivoting for the 3x3 normal equations.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = m[col];
        for row in col + 1..3 {
            let factor = m[row][col] / pivot_row[col];
            for k in col..3 {
                m[row][k] -= factor * pivot_row[k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Evaluates `fit` against a series: `r^2` about the observed mean, RMSE,
/// and MAPE over the points with nonzero actuals.
pub fn goodness_of_fit(fit: &GrowthFit, series: &TimeSeries) -> FitMetrics {
    let points = series.points();
    let n = points.len();
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut mape_sum = 0.0;
    let mut mape_n = 0usize;
    for &(year, obs) in points {
        let residual = obs - fit.predict_year(year as f64);
        ss_res += residual * residual;
        ss_tot += (obs - mean) * (obs - mean);
        if obs > 0.0 {
            mape_sum += (residual.abs() / obs) * 100.0;
            mape_n += 1;
        }
    }
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    FitMetrics {
        r_squared,
        rmse: (ss_res / n as f64).sqrt(),
        mape: (mape_n > 0).then(|| mape_sum / mape_n as f64),
        mape_excluded: n - mape_n,
        n_points: n,
    }
}

/// Picks the best candidate: highest `r^2`, then lower RMSE, then lower MAPE
/// (absent MAPE ranks last), then Gompertz before logistic.
pub fn select_model(candidates: Vec<GrowthFit>) -> Option<GrowthFit> {
    fn key(fit: &GrowthFit) -> (f64, f64, f64, u8) {
        (
            -fit.metrics.r_squared,
            fit.metrics.rmse,
            fit.metrics.mape.unwrap_or(f64::INFINITY),
            match fit.model {
                GrowthModel::Gompertz => 0,
                GrowthModel::Logistic => 1,
            },
        )
    }
    candidates.into_iter().reduce(|best, next| {
        let (kb, kn) = (key(&best), key(&next));
        let better = kn.0.total_cmp(&kb.0).then(kn.1.total_cmp(&kb.1)).then(kn.2.total_cmp(&kb.2));
        if better.then(kn.3.cmp(&kb.3)).is_lt() {
            next
        } else {
            best
        }
    })
}

/// Yearly predictions from the fit origin through `t0_year + horizon_years`.
pub fn forecast(fit: &GrowthFit, horizon_years: u32) -> TimeSeries {
    let points = (0..=horizon_years)
        .map(|offset| {
            let year = fit.t0_year + offset as i32;
            (year, fit.predict_year(year as f64))
        })
        .collect();
    TimeSeries::new(points).expect("model predictions are finite, positive, and yearly")
}

/// Classifies the life-cycle phase at `at_year` by the fraction of `L`
/// reached there.
pub fn maturity_phase(
    fit: &GrowthFit,
    at_year: i32,
    thresholds: &PhaseThresholds,
) -> MaturityAssessment {
    let fraction = fit.predict_year(at_year as f64) / fit.l;
    let phase = if fraction < thresholds.emerging_below {
        MaturityPhase::Emerging
    } else if fraction < thresholds.growth_below {
        MaturityPhase::Growth
    } else if fraction < thresholds.maturity_below {
        MaturityPhase::Maturity
    } else {
        MaturityPhase::Saturation
    };
    MaturityAssessment {
        phase,
        fraction_of_l: fraction,
        inflection_year: fit.inflection_year(),
        saturation_year: fit.saturation_year(),
    }
}

/// The JSON document emitted for a fit: parameters, fit quality, and the
/// life-cycle readout. `L` stays capitalized as in the model formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: GrowthModel,
    #[serde(rename = "L")]
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub t0_year: i32,
    pub r2: f64,
    pub rmse: f64,
    pub mape: Option<f64>,
    pub phase: MaturityPhase,
    pub inflection_year: f64,
    pub saturation_year: f64,
    pub converged: bool,
}

impl FitReport {
    pub fn new(fit: &GrowthFit, assessment: &MaturityAssessment) -> Self {
        FitReport {
            model: fit.model,
            l: fit.l,
            a: fit.a,
            b: fit.b,
            t0_year: fit.t0_year,
            r2: fit.metrics.r_squared,
            rmse: fit.metrics.rmse,
            mape: fit.metrics.mape,
            phase: assessment.phase,
            inflection_year: assessment.inflection_year,
            saturation_year: assessment.saturation_year,
            converged: fit.converged,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Forecast CSV `year,predicted_cumulative`.
pub fn forecast_to_csv(series: &TimeSeries) -> String {
    let mut out = String::from("year,predicted_cumulative\n");
    for (year, value) in series.points() {
        out.push_str(&format!("{year},{value}\n"));
    }
    out
}
