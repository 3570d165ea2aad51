//! Generalized Laguerre polynomials `L⁽ᵅ⁾ₙ(x)` and functions
//! `L̂⁽ᵅ⁾ₙ(x) = e^{-x/2} L⁽ᵅ⁾ₙ(x)`.
//!
//! Three families of evaluators live here:
//!
//! * the classical three-term recurrence (`*_standard`),
//! * the difference form that propagates `δLₖ = Lₖ - Lₖ₋₁` (`*_modified`),
//!   which avoids forming the cancelling coefficient `2k + α + 1 - x` for
//!   small `x`,
//! * the adaptively weighted function evaluator ([`eval_fun_stable`]) that
//!   applies `e^{-x/2}` piecewise while the recurrence runs, so neither the
//!   polynomial growth nor the exponential decay ever leaves the
//!   floating-point range.
//!
//! Overflow in the standard paths is not trapped: infinities and NaNs are
//! returned to the caller as-is.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::ln_gamma_ratio;

/// Family exponent and degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagParams<T> {
    pub alpha: T,
    pub n: usize,
}

impl<T: Real> LagParams<T> {
    pub fn new(alpha: T, n: usize) -> Result<Self> {
        let p = Self { alpha, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -T::one()) || !self.alpha.is_finite() {
            return Err(Error::Domain(format!(
                "alpha must be a finite number > -1, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Whether a series holds polynomial values or Laguerre-function values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Polynomial,
    Function,
}

/// Which recurrence produced (or should produce) polynomial values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceKind {
    Standard,
    Modified,
}

/// Values of degrees `0..=n` at a single abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSeries<T> {
    pub params: LagParams<T>,
    pub x: T,
    pub kind: SeriesKind,
    /// `values[k]` is the degree-`k` value.
    pub values: Vec<T>,
    /// `deltas[k - 1] = values[k] - values[k - 1]` as propagated by the
    /// difference recurrence.
    pub deltas: Option<Vec<T>>,
    pub derivs: Option<Vec<T>>,
}

impl<T: Real> LagSeries<T> {
    pub fn degree(&self) -> usize {
        self.params.n
    }

    /// Value at the top degree.
    pub fn last(&self) -> T {
        *self.values.last().expect("series is never empty")
    }

    /// Attaches `∂ₓL` computed from the values (polynomial series only).
    pub fn with_derivatives(mut self) -> Self {
        if self.kind == SeriesKind::Polynomial {
            self.derivs = Some(eval_poly_derivative(&self));
        }
        self
    }
}

/// Thresholds of the adaptive weighting in [`eval_fun_stable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableEvalConfig<T> {
    /// Rescale once `|L| > e^{k1}`.
    pub k1: T,
    /// After rescaling, `|L|` is brought down to about `e^{-k2}`.
    pub k2: T,
}

impl<T: Real> Default for StableEvalConfig<T> {
    fn default() -> Self {
        Self {
            k1: T::lit(32.0),
            k2: T::lit(32.0),
        }
    }
}

impl<T: Real> StableEvalConfig<T> {
    pub fn new(k1: T, k2: T) -> Result<Self> {
        let c = Self { k1, k2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > T::zero()) || !(self.k2 > T::zero()) {
            return Err(Error::Domain("k1 and k2 must be positive".into()));
        }
        if !(self.k1 + self.k2 < T::lit(80.0)) {
            return Err(Error::Domain(format!(
                "k1 + k2 must be < 80 (got {} + {})",
                self.k1, self.k2
            )));
        }
        Ok(())
    }
}

fn check_x<T: Real>(x: T) -> Result<()> {
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite and non-negative, got {x}")));
    }
    Ok(())
}

#[inline]
fn t<T: Real>(k: usize) -> T {
    T::from_usize_lossy(k)
}

/// Classical recurrence started from `(v0, v1)`.
fn three_term<T: Real>(alpha: T, n: usize, x: T, v0: T, v1: T) -> Vec<T> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(v0);
    if n == 0 {
        return v;
    }
    v.push(v1);
    for k in 1..n {
        let a = t::<T>(2 * k + 1) + alpha - x;
        let b = t::<T>(k) + alpha;
        let next = (a * v[k] - b * v[k - 1]) / t::<T>(k + 1);
        v.push(next);
    }
    v
}

/// Difference recurrence started from `(v0, δ1)`; returns `(values, deltas)`.
fn difference_form<T: Real>(alpha: T, n: usize, x: T, v0: T, d1: T) -> (Vec<T>, Vec<T>) {
    let mut v = Vec::with_capacity(n + 1);
    let mut d = Vec::with_capacity(n);
    v.push(v0);
    if n == 0 {
        return (v, d);
    }
    let mut l = v0 + d1;
    let mut dl = d1;
    v.push(l);
    d.push(dl);
    for k in 1..n {
        dl = ((t::<T>(k) + alpha) * dl - x * l) / t::<T>(k + 1);
        l = l + dl;
        v.push(l);
        d.push(dl);
    }
    (v, d)
}

/// `L⁽ᵅ⁾₀..L⁽ᵅ⁾ₙ` by the classical three-term recurrence.
pub fn eval_poly_standard<T: Real>(params: LagParams<T>, x: T) -> Result<LagSeries<T>> {
    params.validate()?;
    check_x(x)?;
    let alpha = params.alpha;
    let values = three_term(alpha, params.n, x, T::one(), T::one() + alpha - x);
    Ok(LagSeries {
        params,
        x,
        kind: SeriesKind::Polynomial,
        values,
        deltas: None,
        derivs: None,
    })
}

/// `L⁽ᵅ⁾₀..L⁽ᵅ⁾ₙ` by the difference recurrence, with the `δL` companions.
pub fn eval_poly_modified<T: Real>(params: LagParams<T>, x: T) -> Result<LagSeries<T>> {
    params.validate()?;
    check_x(x)?;
    let (values, deltas) = difference_form(params.alpha, params.n, x, T::one(), params.alpha - x);
    Ok(LagSeries {
        params,
        x,
        kind: SeriesKind::Polynomial,
        values,
        deltas: Some(deltas),
        derivs: None,
    })
}

/// Dispatches on [`RecurrenceKind`].
pub fn eval_poly<T: Real>(kind: RecurrenceKind, params: LagParams<T>, x: T) -> Result<LagSeries<T>> {
    match kind {
        RecurrenceKind::Standard => eval_poly_standard(params, x),
        RecurrenceKind::Modified => eval_poly_modified(params, x),
    }
}

/// `∂ₓL⁽ᵅ⁾ₖ` for `k = 0..=n` from `∂ₓLₖ₊₁ = ∂ₓLₖ - Lₖ`.
pub fn eval_poly_derivative<T: Real>(series: &LagSeries<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(series.values.len());
    let mut acc = T::zero();
    out.push(acc);
    for &v in &series.values[..series.values.len() - 1] {
        acc = acc - v;
        out.push(acc);
    }
    out
}

/// `L̂⁽ᵅ⁾₀..L̂⁽ᵅ⁾ₙ` by the three-term recurrence started from `e^{-x/2}`.
///
/// The starting weight underflows to zero once `x ≳ 1490`; the zeros are
/// propagated.
pub fn eval_fun_standard<T: Real>(params: LagParams<T>, x: T) -> Result<LagSeries<T>> {
    params.validate()?;
    check_x(x)?;
    let w = (-x / T::lit(2.0)).exp();
    let values = three_term(params.alpha, params.n, x, w, (T::one() + params.alpha - x) * w);
    Ok(LagSeries {
        params,
        x,
        kind: SeriesKind::Function,
        values,
        deltas: None,
        derivs: None,
    })
}

/// `L̂⁽ᵅ⁾₀..L̂⁽ᵅ⁾ₙ` by the difference recurrence started from `e^{-x/2}`.
pub fn eval_fun_modified<T: Real>(params: LagParams<T>, x: T) -> Result<LagSeries<T>> {
    params.validate()?;
    check_x(x)?;
    let w = (-x / T::lit(2.0)).exp();
    let (values, deltas) = difference_form(params.alpha, params.n, x, w, (params.alpha - x) * w);
    Ok(LagSeries {
        params,
        x,
        kind: SeriesKind::Function,
        values,
        deltas: Some(deltas),
        derivs: None,
    })
}

// ln 2 split so that `q * LN2_HI` is exact for |q| < 2^20.
const LN2_HI: f64 = 6.931_471_803_691_238e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;

/// `e^{-x/2} = 2^{-q} e^{-s}` with `|s| <= ln2 / 2`; depends on `x` only.
#[derive(Debug, Clone, Copy)]
struct HalfWeight<T> {
    q: i32,
    factor: T,
}

impl<T: Real> HalfWeight<T> {
    fn new(x: T) -> Self {
        let half = x.to_f64_lossy() * 0.5;
        let q = (half / std::f64::consts::LN_2).round();
        let s = (half - q * LN2_HI) - q * LN2_LO;
        Self {
            q: q as i32,
            factor: T::lit(-s).exp(),
        }
    }

    /// `scaled · 2^{spent} · e^{-x/2}`.
    #[inline]
    fn apply(&self, scaled: T, spent: i32) -> T {
        (scaled * self.factor).scale_pow2(spent - self.q)
    }
}

/// Running state of the adaptively weighted difference recurrence.
///
/// `l` and `dl` hold `2^{-spent}` times the polynomial values; the weight
/// already absorbed is `spent · ln 2`, always at most `x / 2`.
struct Weighted<T> {
    alpha: T,
    x: T,
    l: T,
    dl: T,
    spent: i32,
    threshold: T,
    k2: T,
}

impl<T: Real> Weighted<T> {
    fn new(alpha: T, x: T, cfg: &StableEvalConfig<T>) -> Self {
        Self {
            alpha,
            x,
            l: T::one() + alpha - x,
            dl: alpha - x,
            spent: 0,
            threshold: cfg.k1.exp(),
            k2: cfg.k2,
        }
    }

    /// Advances from degree `k` to `k + 1` and rescales when required.
    fn step(&mut self, k: usize) -> Result<()> {
        self.dl = ((t::<T>(k) + self.alpha) * self.dl - self.x * self.l) / t::<T>(k + 1);
        self.l = self.l + self.dl;
        if k == 1 || self.l.abs() > self.threshold {
            let ln2 = T::LN_2();
            let budget = self.x / T::lit(2.0) - T::from_i32(self.spent).unwrap() * ln2;
            let xc = (self.l.abs().ln() + self.k2).max(T::zero()).min(budget);
            let m = (xc / ln2).floor().to_i32().unwrap_or(0).max(0);
            if m > 0 {
                self.l = self.l.scale_pow2(-m);
                self.dl = self.dl.scale_pow2(-m);
                self.spent += m;
            }
        }
        if !self.l.is_finite() || !self.dl.is_finite() {
            return Err(Error::Internal(format!(
                "non-finite intermediate at degree {} (x = {}); rescale thresholds too large?",
                k + 1,
                self.x
            )));
        }
        Ok(())
    }
}

/// `L̂⁽ᵅ⁾ₙ(x)` without intermediate overflow or underflow.
///
/// Runs the difference recurrence on partially weighted values. At `k = 1`
/// and whenever `|L| > e^{k1}`, a slice `x_c = min(max(ln|L| + k2, 0), x_b)`
/// of the remaining weight budget `x_b` is absorbed into `L` and `δL`; the
/// leftover budget is applied once at the end.
///
/// Each absorbed slice is rounded down to a multiple of `ln 2`, so the
/// rescaling is an exact power-of-two shift and the remaining budget is
/// tracked exactly. The result is therefore independent of `(k1, k2)` up to
/// the final rounding.
pub fn eval_fun_stable<T: Real>(params: LagParams<T>, x: T, cfg: &StableEvalConfig<T>) -> Result<T> {
    params.validate()?;
    check_x(x)?;
    cfg.validate()?;
    let alpha = params.alpha;
    let w = HalfWeight::new(x);
    match params.n {
        0 => return Ok(w.apply(T::one(), 0)),
        1 => return Ok(w.apply(T::one() + alpha - x, 0)),
        _ => {}
    }
    let mut s = Weighted::new(alpha, x, cfg);
    for k in 1..params.n {
        s.step(k)?;
    }
    Ok(w.apply(s.l, s.spent))
}

/// Whole series `L̂⁽ᵅ⁾₀..L̂⁽ᵅ⁾ₙ` (and `δL̂`) from the same weighted recurrence
/// as [`eval_fun_stable`]; entry `n` equals its result bit for bit.
pub fn eval_fun_stable_series<T: Real>(params: LagParams<T>, x: T, cfg: &StableEvalConfig<T>) -> Result<LagSeries<T>> {
    params.validate()?;
    check_x(x)?;
    cfg.validate()?;
    let n = params.n;
    let alpha = params.alpha;
    let w = HalfWeight::new(x);
    let mut values = Vec::with_capacity(n + 1);
    let mut deltas = Vec::with_capacity(n);
    values.push(w.apply(T::one(), 0));
    if n >= 1 {
        values.push(w.apply(T::one() + alpha - x, 0));
        deltas.push(w.apply(alpha - x, 0));
    }
    let mut s = Weighted::new(alpha, x, cfg);
    for k in 1..n {
        s.step(k)?;
        values.push(w.apply(s.l, s.spent));
        deltas.push(w.apply(s.dl, s.spent));
    }
    Ok(LagSeries {
        params,
        x,
        kind: SeriesKind::Function,
        values,
        deltas: Some(deltas),
        derivs: None,
    })
}

/// Line-by-line transcription of the adaptive weighting procedure, with
/// `exp(-x_c)` factors and a floating-point budget.
///
/// Kept for comparison with [`eval_fun_stable`]: accurate to about the same
/// level, but the budget subtraction rounds, so results move by many ulps
/// when `(k1, k2)` change.
pub fn eval_fun_stable_literal<T: Real>(params: LagParams<T>, x: T, cfg: &StableEvalConfig<T>) -> Result<T> {
    params.validate()?;
    check_x(x)?;
    cfg.validate()?;
    let alpha = params.alpha;
    let two = T::lit(2.0);
    match params.n {
        0 => return Ok((-x / two).exp()),
        1 => return Ok((T::one() + alpha - x) * (-x / two).exp()),
        _ => {}
    }
    let threshold = cfg.k1.exp();
    let mut l = T::one() + alpha - x;
    let mut dl = alpha - x;
    let mut xb = x / two;
    for k in 1..params.n {
        dl = ((t::<T>(k) + alpha) * dl - x * l) / t::<T>(k + 1);
        l = l + dl;
        if k == 1 || l.abs() > threshold {
            let xc = (l.abs().ln() + cfg.k2).max(T::zero()).min(xb);
            let f = (-xc).exp();
            dl = dl * f;
            l = l * f;
            xb = xb - xc;
        }
        if !l.is_finite() {
            return Err(Error::Internal(format!(
                "non-finite intermediate at degree {} (x = {x})",
                k + 1
            )));
        }
    }
    Ok(l * (-xb).exp())
}

/// `∂ₓL̂⁽ᵅ⁾ₖ` for `k = 0..=n`, driven by the stable function values.
pub fn eval_fun_derivative<T: Real>(params: LagParams<T>, x: T) -> Result<Vec<T>> {
    let series = eval_fun_stable_series(params, x, &StableEvalConfig::default())?;
    let half = T::lit(0.5);
    let v = &series.values;
    let mut out = Vec::with_capacity(v.len());
    out.push(-half * v[0]);
    if params.n >= 1 {
        out.push(-(params.alpha + T::lit(3.0) - x) * half * v[0]);
    }
    for k in 1..params.n {
        let next = out[k] - half * v[k] - half * v[k + 1];
        out.push(next);
    }
    Ok(out)
}

/// `γ⁽ᵅ⁾ₙ = Γ(n + α + 1) / n!`, formed in log space (exact product for small
/// integer `α`).
pub fn norm_const<T: Real>(params: LagParams<T>) -> Result<T> {
    params.validate()?;
    let a = params.alpha.to_f64_lossy();
    let n = params.n as f64;
    if a.fract() == 0.0 && (0.0..=64.0).contains(&a) {
        let p = (1..=a as u32).fold(1.0_f64, |acc, i| acc * (n + i as f64));
        return Ok(T::lit(p));
    }
    Ok(T::lit(ln_gamma_ratio(n + 1.0, a).exp()))
}
