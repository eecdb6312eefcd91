//! Refinement-ladder bookkeeping shared by the ε- and t-derivative verifiers.

/// Residuals recorded along a geometric step ladder (ratio 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares log–log slope over the leading decreasing run of at most
    /// [`ORDER_LEVELS`] levels. NaN when fewer than two levels qualify.
    pub observed_order: f64,
    /// Residual of the Richardson-extrapolated estimate.
    pub extrapolated_residual: f64,
    /// False if the residual sequence ever increases; flagged, not an error.
    pub monotone: bool,
}

/// Levels used for the order fit and the extrapolation. Deeper levels are
/// reported but sit in the round-off regime for second differences.
pub const ORDER_LEVELS: usize = 4;

/// Residuals below this are treated as exact zeros when fitting orders.
const FLOOR: f64 = 1e-300;

impl ConvergenceReport {
    /// Build a report from per-level estimates of a flattened quantity whose
    /// error is even in the step, with `residual` mapping an estimate to its
    /// error against the reference.
    pub fn from_estimates(
        steps: &[f64],
        estimates: &[Vec<f64>],
        residual: impl Fn(&[f64]) -> f64,
    ) -> Self {
        let residuals: Vec<f64> = estimates.iter().map(|e| residual(e)).collect();
        let k = estimates.len().min(ORDER_LEVELS);
        let extrapolated_residual = if k == 0 { f64::NAN } else { residual(&richardson(&estimates[..k])) };
        Self::from_residuals(steps, residuals, extrapolated_residual)
    }

    pub fn from_residuals(steps: &[f64], residuals: Vec<f64>, extrapolated_residual: f64) -> Self {
        let monotone = residuals.windows(2).all(|w| w[1] <= w[0]);
        let observed_order = fit_order(steps, &residuals);
        ConvergenceReport { steps: steps.to_vec(), residuals, observed_order, extrapolated_residual, monotone }
    }

    /// `log(r_i / r_{i+1}) / log(h_i / h_{i+1})` for consecutive levels.
    pub fn local_orders(&self) -> Vec<f64> {
        self.steps
            .windows(2)
            .zip(self.residuals.windows(2))
            .map(|(h, r)| (r[0].max(FLOOR) / r[1].max(FLOOR)).ln() / (h[0] / h[1]).ln())
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn fit_order(steps: &[f64], residuals: &[f64]) -> f64 {
    let mut pts = Vec::new();
    for (i, (&h, &r)) in steps.iter().zip(residuals).enumerate().take(ORDER_LEVELS) {
        if r <= FLOOR || (i > 0 && r >= residuals[i - 1]) {
            break;
        }
        pts.push((h.ln(), r.ln()));
    }
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(n, d), p| (n + (p.0 - mx) * (p.1 - my), d + (p.0 - mx) * (p.0 - mx)));
    num / den
}

/// Richardson table for estimates at steps `h, h/2, h/4, …` with error
/// expansion in even powers of `h`.
pub fn richardson(estimates: &[Vec<f64>]) -> Vec<f64> {
    let mut table: Vec<Vec<f64>> = estimates.to_vec();
    let mut factor = 4.0;
    while table.len() > 1 {
        table = table
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(fine, coarse)| (factor * fine - coarse) / (factor - 1.0)).collect())
            .collect();
        factor *= 4.0;
    }
    table.pop().unwrap_or_default()
}

/// Geometric ladder `h0, h0·ratio, …` of `levels` entries.
pub fn ladder(h0: f64, ratio: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|i| h0 * ratio.powi(i as i32)).collect()
}
