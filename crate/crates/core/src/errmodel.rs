//! Round-off propagation in the Laguerre recurrences.
//!
//! Both recurrences share the error equation
//!
//! ```text
//! e_{n+1} − e_n = (n+α)/(n+1) · (e_n − e_{n−1}) − x/(n+1) · e_n + ζ_n,   e_0 = 0,
//! ```
//!
//! and differ only in the size of the local perturbation `ζ_n`. This module
//! estimates `ζ_n`, bounds the energy `E_n = x e_n² + (n+α)(e_n − e_{n−1})²`
//! and `|e_n|`, simulates the equation with random perturbations, and
//! measures the actual error of the double-precision evaluators against the
//! oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{hp_series_errors, HpContext};
use crate::recurrence::{eval_poly, eval_poly_modified, LagParams, LagSeries, RecurrenceKind};
use crate::special::ln_gamma_ratio;

/// IEEE double unit round-off as used in the bounds.
pub const DEFAULT_EPS: f64 = 2.22e-16;

/// Inputs to the round-off bounds; the bound is on `E_{n+1}` / `|e_{n+1}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundInput {
    pub n: usize,
    pub alpha: f64,
    pub x: f64,
    pub eta: f64,
    /// `|e_1|`.
    pub e1: f64,
    /// `max_{1≤s≤n} |ζ_s|`.
    pub zeta_max: f64,
    pub eps: f64,
}

impl ErrorBoundInput {
    /// Zero perturbations and `e_1 = eps`; fill the rest with struct update.
    pub fn new(n: usize, alpha: f64, x: f64, eta: f64) -> Self {
        Self {
            n,
            alpha,
            x,
            eta,
            e1: DEFAULT_EPS,
            zeta_max: 0.0,
            eps: DEFAULT_EPS,
        }
    }

    /// `1 − 2α − x − η`; its sign selects the regime.
    pub fn discriminant(&self) -> f64 {
        1.0 - 2.0 * self.alpha - self.x - self.eta
    }

    /// Checks the hypotheses and returns the regime they select.
    pub fn regime(&self) -> Result<Regime> {
        let bad = |m: String| Err(Error::Domain(m));
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return bad(format!("alpha > -1 violated (alpha = {})", self.alpha));
        }
        if !(self.x >= 0.0) || !self.x.is_finite() {
            return bad(format!("x >= 0 violated (x = {})", self.x));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return bad(format!("eta > 0 violated (eta = {})", self.eta));
        }
        if !(self.e1 >= 0.0 && self.zeta_max >= 0.0) {
            return bad("e1 and zeta_max must be non-negative magnitudes".into());
        }
        let h = 3.0 - self.alpha - self.x - self.eta;
        if !(h > 0.0) {
            return bad(format!("3 - alpha - x - eta > 0 violated (value {h})"));
        }
        let d = self.discriminant();
        if d >= 0.0 {
            return Ok(Regime::Nonexpansive);
        }
        if !(d > -1.5) {
            return bad(format!("1 - 2 alpha - x - eta > -1.5 violated (value {d})"));
        }
        if !(self.alpha >= 0.0) {
            return bad(format!(
                "alpha >= 0 required when 1 - 2 alpha - x - eta < 0 (alpha = {})",
                self.alpha
            ));
        }
        Ok(Regime::Expansive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `1 − 2α − x − η ≥ 0`: the energy never grows by itself.
    Nonexpansive,
    /// `−1.5 < 1 − 2α − x − η < 0`: growth by the factor `β_n`.
    Expansive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundResult {
    pub regime: Regime,
    /// Bound on `E_{n+1}`.
    pub energy_bound: f64,
    /// `sqrt(energy_bound / x)`, the bound on `|e_{n+1}|` implied by it.
    pub abs_bound: f64,
    /// `β_n` (expansive regime only).
    pub beta_n: Option<f64>,
}

/// `β_n = [Γ(n+2+α)/Γ(2+α)] / [Γ(n+3−α−x−η)/Γ(3−α−x−η)]`.
pub fn beta_n(n: usize, alpha: f64, x: f64, eta: f64) -> f64 {
    let nf = n as f64;
    (ln_gamma_ratio(2.0 + alpha, nf) - ln_gamma_ratio(3.0 - alpha - x - eta, nf)).exp()
}

/// `E_1 = (x + 1 + α) e_1²` from the definition with `e_0 = 0`.
pub fn initial_energy(alpha: f64, x: f64, e1: f64) -> f64 {
    (x + 1.0 + alpha) * e1 * e1
}

/// `E_n = x e_n² + (n + α)(e_n − e_{n−1})²` along a trajectory (`E_0 = 0`).
pub fn energy(alpha: f64, x: f64, e: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(e.len());
    if e.is_empty() {
        return out;
    }
    out.push(0.0);
    for n in 1..e.len() {
        let d = e[n] - e[n - 1];
        out.push(x * e[n] * e[n] + (n as f64 + alpha) * d * d);
    }
    out
}

/// Bound on `E_{n+1}` in whichever regime the input selects.
pub fn energy_bound(input: &ErrorBoundInput) -> Result<ErrorBoundResult> {
    let regime = input.regime()?;
    let n = input.n as f64;
    let e1 = initial_energy(input.alpha, input.x, input.e1);
    let z2 = input.zeta_max * input.zeta_max;
    let (bound, beta) = match regime {
        Regime::Nonexpansive => (
            e1 + (n + 1.0) * (n + 2.0) * (2.0 * n + 3.0) / (6.0 * input.eta) * z2,
            None,
        ),
        Regime::Expansive => {
            let b = beta_n(input.n, input.alpha, input.x, input.eta);
            // (n − 3) counts the monotone tail s = 4..n and is empty for n < 4
            let tail = (n - 3.0).max(0.0) * (n + 1.0) * (n + 1.0);
            (b * e1 + (tail + 29.0 * b) / input.eta * z2, Some(b))
        }
    };
    let abs = if input.x > 0.0 {
        (bound / input.x).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(ErrorBoundResult {
        regime,
        energy_bound: bound,
        abs_bound: abs,
        beta_n: beta,
    })
}

/// Closed-form bound on `|e_{n+1}|` in terms of `max{|e_1|, |ζ_s|} / √x`.
///
/// Nonexpansive regime: `(2 + (n+2)^{3/2} / √(3η))`, which is
/// `2 + 2(n+2)^{3/2}/√3` at `η = 1/4`. Expansive regime:
/// `2√β_n + (5.5√β_n + √n (n+1)) / √η`.
pub fn abs_error_bound(input: &ErrorBoundInput) -> Result<f64> {
    let regime = input.regime()?;
    if !(input.x > 0.0) {
        return Err(Error::Domain(format!(
            "x > 0 required for the |e_n| bound (x = {})",
            input.x
        )));
    }
    let n = input.n as f64;
    let m = input.e1.max(input.zeta_max) / input.x.sqrt();
    let c = match regime {
        Regime::Nonexpansive => 2.0 + (n + 2.0).powf(1.5) / (3.0 * input.eta).sqrt(),
        Regime::Expansive => {
            let sb = beta_n(input.n, input.alpha, input.x, input.eta).sqrt();
            2.0 * sb + (5.5 * sb + n.sqrt() * (n + 1.0)) / input.eta.sqrt()
        }
    };
    Ok(c * m)
}

/// Bounds for every index of a trajectory: entry `k ≥ 1` bounds `e_k` using
/// `max_{1≤s<k} |ζ_s|`; entry 0 is exact (`e_0 = 0`).
pub fn bound_series(alpha: f64, x: f64, eta: f64, e1: f64, zeta: &[f64], eps: f64) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(zeta.len() + 1);
    out.push((0.0, 0.0));
    let mut zmax = 0.0_f64;
    for k in 1..=zeta.len() {
        if k >= 2 {
            zmax = zmax.max(zeta[k - 1].abs());
        }
        let input = ErrorBoundInput {
            n: k - 1,
            alpha,
            x,
            eta,
            e1: e1.abs(),
            zeta_max: zmax,
            eps,
        };
        let energy = energy_bound(&input)?.energy_bound;
        out.push((energy, abs_error_bound(&input)?));
    }
    Ok(out)
}

fn delta_at(series: &LagSeries<f64>, n: usize) -> f64 {
    match &series.deltas {
        Some(d) if n >= 1 => d[n - 1],
        _ if n >= 1 => series.values[n] - series.values[n - 1],
        _ => 0.0,
    }
}

/// `ζ_n ≈ (2 + x/(n+1))|L_n| ε + |L_{n−1}| ε` for the standard recurrence.
pub fn zeta_estimate(series: &LagSeries<f64>, n: usize, eps: f64) -> f64 {
    let x = series.x;
    let l = series.values[n].abs();
    let lm1 = if n >= 1 { series.values[n - 1].abs() } else { 0.0 };
    (2.0 + x / (n as f64 + 1.0)) * l * eps + lm1 * eps
}

/// `ζ^δ_n ≈ (|δL_n| + x/(n+1)|L_n|) ε` for the difference recurrence.
pub fn zeta_delta_estimate(series: &LagSeries<f64>, n: usize, eps: f64) -> f64 {
    let x = series.x;
    (delta_at(series, n).abs() + x / (n as f64 + 1.0) * series.values[n].abs()) * eps
}

/// Knobs for [`simulate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Multiplies the `ζ_n` envelope; 0 switches perturbations off.
    pub zeta_scale: f64,
    /// Multiplies the `e_1` envelope `|L_1| ε`.
    pub e1_scale: f64,
    pub eps: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            zeta_scale: 1.0,
            e1_scale: 1.0,
            eps: DEFAULT_EPS,
        }
    }
}

/// An error trajectory `e_0..e_n` with the perturbations that drove it
/// (`zeta[s]` for `s = 1..n−1`; `zeta[0]` is unused and zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub e: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl Trajectory {
    pub fn max_abs(&self) -> f64 {
        self.e.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn step_error(alpha: f64, x: f64, n: usize, e: f64, em1: f64, zeta: f64) -> f64 {
    let nf = n as f64;
    e + (nf + alpha) / (nf + 1.0) * (e - em1) - x / (nf + 1.0) * e + zeta
}

/// Runs the error equation with `ζ_n` uniform on `[−ζ̂_n, ζ̂_n]`, where `ζ̂`
/// is the envelope of the chosen recurrence.
pub fn simulate_with(
    alpha: f64,
    n_max: usize,
    x: f64,
    mode: RecurrenceKind,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let series = eval_poly_modified(LagParams::new(alpha, n_max.max(1))?, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |half: f64| if half > 0.0 { rng.gen_range(-half..=half) } else { 0.0 };
    let mut e = Vec::with_capacity(n_max + 1);
    let mut zeta = vec![0.0; n_max.max(1)];
    e.push(0.0);
    if n_max == 0 {
        return Ok(Trajectory { e, zeta });
    }
    e.push(draw(series.values[1].abs() * cfg.eps * cfg.e1_scale));
    for n in 1..n_max {
        let env = match mode {
            RecurrenceKind::Standard => zeta_estimate(&series, n, cfg.eps),
            RecurrenceKind::Modified => zeta_delta_estimate(&series, n, cfg.eps),
        };
        let z = draw(env * cfg.zeta_scale);
        zeta[n] = z;
        let next = step_error(alpha, x, n, e[n], e[n - 1], z);
        e.push(next);
    }
    Ok(Trajectory { e, zeta })
}

/// [`simulate_with`] at the default envelope; returns `e_0..e_{n_max}`.
pub fn simulate_error_propagation(
    alpha: f64,
    n_max: usize,
    x: f64,
    mode: RecurrenceKind,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    Ok(simulate_with(alpha, n_max, x, mode, rng_seed, &SimConfig::default())?.e)
}

/// Actual errors of the double evaluators at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredError {
    /// `|L_n|` from the oracle (rounded).
    pub reference: f64,
    pub standard: f64,
    pub modified: f64,
}

impl MeasuredError {
    pub fn rel_standard(&self) -> f64 {
        self.standard / self.reference
    }

    pub fn rel_modified(&self) -> f64 {
        self.modified / self.reference
    }
}

/// `|L̃_n(x) − L_n(x)|` for both recurrences, against the oracle.
pub fn measure_actual_error(ctx: &HpContext, alpha: f64, n: usize, x: f64) -> Result<MeasuredError> {
    let p = LagParams::new(alpha, n)?;
    let modi = eval_poly(RecurrenceKind::Modified, p, x)?.last();
    let std_err = last_error(ctx, alpha, n, x, RecurrenceKind::Standard)?;
    let mod_err = last_error(ctx, alpha, n, x, RecurrenceKind::Modified)?;
    Ok(MeasuredError {
        reference: (modi - mod_err).abs(),
        standard: std_err.abs(),
        modified: mod_err.abs(),
    })
}

fn last_error(ctx: &HpContext, alpha: f64, n: usize, x: f64, mode: RecurrenceKind) -> Result<f64> {
    let t = measured_trajectory(ctx, alpha, n, x, mode)?;
    Ok(*t.e.last().expect("non-empty"))
}

/// Signed errors `e_k = L̃_k − L_k` of a double recurrence for `k = 0..=n`,
/// with the effective perturbations `ζ_k` recovered from the error equation.
pub fn measured_trajectory(ctx: &HpContext, alpha: f64, n: usize, x: f64, mode: RecurrenceKind) -> Result<Trajectory> {
    let series = eval_poly(mode, LagParams::new(alpha, n)?, x)?;
    let e = hp_series_errors(ctx, alpha, x, &series.values)?;
    let mut zeta = vec![0.0; n.max(1)];
    for k in 1..n {
        zeta[k] = e[k + 1] - step_error(alpha, x, k, e[k], e[k - 1], 0.0);
    }
    Ok(Trajectory { e, zeta })
}
