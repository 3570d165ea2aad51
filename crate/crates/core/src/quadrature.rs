//! Laguerre-Gauss and Laguerre-Gauss-Radau rules.
//!
//! Nodes start from the eigenvalues of the Jacobi matrix and are polished by
//! Newton's method on the difference recurrence. Weights come from the
//! closed forms in terms of `L⁽ᵅ⁾_N` at the nodes, evaluated through the
//! Laguerre functions so that nothing overflows for large `N`.

use crate::eigen::symmetric_tridiagonal_eigenvalues;
use crate::error::{Error, Result};
use crate::recurrence::{eval_fun_stable, LagParams, RecurrenceKind, StableEvalConfig};
use crate::scalar::Real;
use crate::special::{ln_gamma, ln_gamma_ratio};

/// Which rule a [`GaussRule`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Gauss,
    GaussRadau,
}

/// Weights to use in [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightForm {
    /// `Σ f(x_j) ω_j ≈ ∫ f x^α e^{-x}`.
    PolyWeighted,
    /// `Σ f(x_j) ŵ_j ≈ ∫ f x^α`.
    FunctionForm,
}

/// Stopping rule for Newton refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig<T> {
    pub max_iters: usize,
    /// Stop once `|Δx| <= rel_step_tol · x`.
    pub rel_step_tol: T,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 10,
            rel_step_tol: T::lit(4.0) * T::epsilon(),
        }
    }
}

impl<T: Real> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Usage("max_iters must be at least 1".into()));
        }
        // 1e-8 is below single-precision epsilon, so the cap follows the type.
        let cap = T::lit(1e-8).max(T::lit(16.0) * T::epsilon());
        if !(self.rel_step_tol > T::zero() && self.rel_step_tol < cap) {
            return Err(Error::Usage(format!(
                "rel_step_tol must lie in (0, {cap}), got {}",
                self.rel_step_tol
            )));
        }
        Ok(())
    }
}

/// Refined nodes plus the indices where Newton left its bracket and the seed
/// was kept instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement<T> {
    pub nodes: Vec<T>,
    pub fallback: Vec<usize>,
}

/// An `(N+1)`-point rule for the weight `x^α e^{-x}` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule<T> {
    pub alpha: T,
    pub kind: RuleKind,
    /// Ascending.
    pub nodes: Vec<T>,
    /// `ω_j`.
    pub weights: Vec<T>,
    /// `ŵ_j = e^{x_j} ω_j`.
    pub fun_weights: Vec<T>,
    /// Node indices whose Newton refinement was abandoned.
    pub fallback: Vec<usize>,
}

impl<T: Real> GaussRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The rule parameter `N` (one less than the number of points).
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    LagParams::new(alpha, 0).map(|_| ())
}

/// Eigenvalues of the Jacobi matrix of `L⁽ᵅ⁾`, i.e. approximations to the
/// `N + 1` zeros of `L⁽ᵅ⁾_{N+1}`.
pub fn nodes_eigen_seed<T: Real>(alpha: T, n: usize) -> Result<Vec<T>> {
    check_alpha(alpha)?;
    let diag: Vec<T> = (0..=n).map(|j| T::from_usize_lossy(2 * j + 1) + alpha).collect();
    let off: Vec<T> = (1..=n)
        .map(|j| {
            let j = T::from_usize_lossy(j);
            -(j * (j + alpha)).sqrt()
        })
        .collect();
    symmetric_tridiagonal_eigenvalues(&diag, &off)
}

/// Returns `(L_n, δL_n)` up to a common power-of-two factor.
///
/// Rescaling keeps the values inside the exponent range; it is exact, so the
/// ratio is the same as without it.
fn scaled_top<T: Real>(kind: RecurrenceKind, alpha: T, n: usize, x: T) -> (T, T) {
    let half_exp = (T::max_value().to_f64_lossy().log2() * 0.5) as i32;
    let big = T::one().scale_pow2(half_exp);
    let mut l = T::one() + alpha - x;
    let mut dl = alpha - x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    let mut prev = T::one();
    for k in 1..n {
        let kk = T::from_usize_lossy(k);
        let next = match kind {
            RecurrenceKind::Modified => {
                dl = ((kk + alpha) * dl - x * l) / (kk + T::one());
                l + dl
            }
            RecurrenceKind::Standard => {
                let v = ((T::from_usize_lossy(2 * k + 1) + alpha - x) * l - (kk + alpha) * prev) / (kk + T::one());
                dl = v - l;
                v
            }
        };
        prev = l;
        l = next;
        if l.abs() > big {
            l = l.scale_pow2(-half_exp);
            dl = dl.scale_pow2(-half_exp);
            prev = prev.scale_pow2(-half_exp);
        }
    }
    (l, dl)
}

/// Newton step `L_n / ∂ₓL_n` at `x`, using
/// `x ∂ₓL_n = n L_n − (n + α) L_{n−1} = (n + α) δL_n − α L_n`.
fn newton_step<T: Real>(kind: RecurrenceKind, alpha: T, n: usize, x: T) -> T {
    let (l, dl) = scaled_top(kind, alpha, n, x);
    let nn = T::from_usize_lossy(n);
    x * l / ((nn + alpha) * dl - alpha * l)
}

/// Polishes approximate zeros of `L⁽ᵅ⁾_{N+1}` with the difference recurrence.
pub fn refine_newton<T: Real>(alpha: T, n: usize, seeds: &[T], cfg: &NewtonConfig<T>) -> Result<Refinement<T>> {
    refine_newton_with(RecurrenceKind::Modified, alpha, n, seeds, cfg)
}

/// [`refine_newton`] with a choice of recurrence for `L` and `∂ₓL`.
pub fn refine_newton_with<T: Real>(
    kind: RecurrenceKind,
    alpha: T,
    n: usize,
    seeds: &[T],
    cfg: &NewtonConfig<T>,
) -> Result<Refinement<T>> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if seeds.len() != n + 1 {
        return Err(Error::Usage(format!("expected {} seeds, got {}", n + 1, seeds.len())));
    }
    if seeds.windows(2).any(|w| !(w[0] < w[1])) || seeds.first().is_some_and(|&s| !(s > T::zero())) {
        return Err(Error::Usage("seeds must be positive and strictly increasing".into()));
    }
    let half = T::lit(0.5);
    let mut nodes = Vec::with_capacity(seeds.len());
    let mut fallback = Vec::new();
    for (j, &s) in seeds.iter().enumerate() {
        let lo = if j == 0 { T::zero() } else { half * (seeds[j - 1] + s) };
        let hi = seeds.get(j + 1).map_or(T::infinity(), |&r| half * (s + r));
        let mut x = s;
        let mut ok = true;
        for _ in 0..cfg.max_iters {
            let dx = newton_step(kind, alpha, n + 1, x);
            if dx == T::zero() {
                break;
            }
            let next = x - dx;
            if !next.is_finite() || !(next > lo && next < hi) {
                ok = false;
                break;
            }
            x = next;
            if dx.abs() <= cfg.rel_step_tol * x {
                break;
            }
        }
        if ok {
            nodes.push(x);
        } else {
            nodes.push(s);
            fallback.push(j);
        }
    }
    Ok(Refinement { nodes, fallback })
}

/// `ŵ = C·xᵖ/L̂²` and `ω = ŵ e^{-x}` for `p ∈ {-1, 0, 1}`, switching to log
/// space when `e^{-x}` is no longer a normal number.
fn weight_pair<T: Real>(ln_c: f64, c: T, x: T, lhat: T, x_pow: i32) -> (T, T) {
    let num = match x_pow {
        1 => c * x,
        -1 => c / x,
        _ => c,
    };
    let fun_w = num / lhat / lhat;
    let decay = (-x).exp();
    let w = if decay.is_normal() && fun_w.is_normal() {
        fun_w * decay
    } else {
        let ln_x = f64::from(x_pow) * x.to_f64_lossy().ln();
        let lw = ln_c + ln_x - 2.0 * lhat.to_f64_lossy().abs().ln() - x.to_f64_lossy();
        T::lit(lw.exp())
    };
    (w, fun_w)
}

/// `(N+1)`-point Laguerre-Gauss rule.
pub fn gauss_rule<T: Real>(alpha: T, n: usize) -> Result<GaussRule<T>> {
    gauss_rule_with(alpha, n, &NewtonConfig::default())
}

/// [`gauss_rule`] with explicit Newton settings.
pub fn gauss_rule_with<T: Real>(alpha: T, n: usize, cfg: &NewtonConfig<T>) -> Result<GaussRule<T>> {
    check_alpha(alpha)?;
    let seeds = nodes_eigen_seed(alpha, n)?;
    let Refinement { nodes, fallback } = refine_newton(alpha, n, &seeds, cfg)?;
    let a = alpha.to_f64_lossy();
    let nf = n as f64;
    // For α < 0, L⁽ᵅ⁾_N is small near the origin and the recurrence reaches
    // it by cancellation. At a zero of L⁽ᵅ⁾_{N+1} it equals
    // x L⁽ᵅ⁺¹⁾_N / (N+α+1), and that family has no such cancellation.
    let (params, ln_c, x_pow) = if a < 0.0 {
        // Γ(N+α+2) / (N+1)!
        (LagParams::new(alpha + T::one(), n)?, ln_gamma_ratio(nf + 2.0, a), -1)
    } else {
        // Γ(N+α+1) / ((N+α+1)(N+1)!)
        let ln_c = ln_gamma_ratio(nf + 2.0, a - 1.0) - (nf + a + 1.0).ln();
        (LagParams::new(alpha, n)?, ln_c, 1)
    };
    let c = T::lit(ln_c.exp());
    let stable = StableEvalConfig::default();
    let mut weights = Vec::with_capacity(n + 1);
    let mut fun_weights = Vec::with_capacity(n + 1);
    for (j, &x) in nodes.iter().enumerate() {
        let lhat = eval_fun_stable(params, x, &stable)?;
        let (w, fw) = weight_pair(ln_c, c, x, lhat, x_pow);
        if !fw.is_finite() || !(fw > T::zero()) {
            return Err(Error::NonFinite {
                index: j,
                x: x.to_f64_lossy(),
            });
        }
        weights.push(w);
        fun_weights.push(fw);
    }
    Ok(GaussRule {
        alpha,
        kind: RuleKind::Gauss,
        nodes,
        weights,
        fun_weights,
        fallback,
    })
}

/// `(N+1)`-point Laguerre-Gauss-Radau rule with a node at `x = 0`.
pub fn gauss_radau_rule<T: Real>(alpha: T, n: usize) -> Result<GaussRule<T>> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::Domain("Gauss-Radau rule needs N >= 1".into()));
    }
    let interior = gauss_rule(alpha + T::one(), n - 1)?;
    let a = alpha.to_f64_lossy();
    let nf = n as f64;
    // (α+1) Γ(α+1)² N! / Γ(N+α+2)
    let w0 = ((a + 1.0).ln() + 2.0 * ln_gamma(a + 1.0) - ln_gamma_ratio(nf + 1.0, a + 1.0)).exp();
    // Γ(N+α+1) / (N! (N+α+1))
    let ln_c = ln_gamma_ratio(nf + 1.0, a) - (nf + a + 1.0).ln();
    let c = T::lit(ln_c.exp());
    let params = LagParams::new(alpha, n)?;
    let stable = StableEvalConfig::default();

    let mut nodes = vec![T::zero()];
    let mut weights = vec![T::lit(w0)];
    let mut fun_weights = vec![T::lit(w0)];
    for (j, &x) in interior.nodes.iter().enumerate() {
        let lhat = eval_fun_stable(params, x, &stable)?;
        let (w, fw) = weight_pair(ln_c, c, x, lhat, 0);
        if !fw.is_finite() || !(fw > T::zero()) {
            return Err(Error::NonFinite {
                index: j + 1,
                x: x.to_f64_lossy(),
            });
        }
        nodes.push(x);
        weights.push(w);
        fun_weights.push(fw);
    }
    Ok(GaussRule {
        alpha,
        kind: RuleKind::GaussRadau,
        nodes,
        weights,
        fun_weights,
        fallback: interior.fallback.iter().map(|i| i + 1).collect(),
    })
}

/// `ŵ_j = e^{x_j} ω_j`, recomputed from the nodes in log space.
///
/// [`gauss_rule`] already fills [`GaussRule::fun_weights`]; this is the
/// standalone form for rules whose polynomial weights came from elsewhere.
pub fn function_weights<T: Real>(rule: &GaussRule<T>) -> Vec<T> {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .zip(&rule.fun_weights)
        .map(|((&x, &w), &fw)| {
            if w.is_normal() {
                let lw = w.ln() + x;
                lw.exp()
            } else {
                fw
            }
        })
        .collect()
}

/// `Σ f(x_j) ω_j` or `Σ f(x_j) ŵ_j`.
pub fn integrate<T: Real, F: Fn(T) -> T>(rule: &GaussRule<T>, f: F, form: WeightForm) -> Result<T> {
    let w = match form {
        WeightForm::PolyWeighted => &rule.weights,
        WeightForm::FunctionForm => &rule.fun_weights,
    };
    let mut acc = T::zero();
    for (j, (&x, &wj)) in rule.nodes.iter().zip(w).enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                index: j,
                x: x.to_f64_lossy(),
            });
        }
        acc = acc + v * wj;
    }
    Ok(acc)
}

/// The textbook construction: Newton and weights on plain polynomial values
/// with no rescaling.
///
/// Fails with [`Error::NonFinite`] as soon as a polynomial value leaves the
/// floating-point range. Kept to demonstrate where that happens. Tiny
/// weights may underflow to zero and `fun_weights` (formed as `ω e^{x}`) may
/// overflow well before that point; neither is treated as failure.
pub fn gauss_rule_polynomial_path<T: Real>(alpha: T, n: usize) -> Result<GaussRule<T>> {
    check_alpha(alpha)?;
    let seeds = nodes_eigen_seed(alpha, n)?;
    let cfg = NewtonConfig::<T>::default();
    let np1 = T::from_usize_lossy(n + 1);
    let mut nodes = Vec::with_capacity(n + 1);
    for (j, &s) in seeds.iter().enumerate() {
        let mut x = s;
        for _ in 0..cfg.max_iters {
            let (l, lm1) = poly_pair(alpha, n + 1, x);
            if !l.is_finite() || !lm1.is_finite() {
                return Err(Error::NonFinite {
                    index: j,
                    x: x.to_f64_lossy(),
                });
            }
            let dx = x * l / (np1 * l - (np1 + alpha) * lm1);
            x = x - dx;
            if dx.abs() <= cfg.rel_step_tol * x {
                break;
            }
        }
        nodes.push(x);
    }
    let a = alpha.to_f64_lossy();
    let nf = n as f64;
    let c = T::lit((ln_gamma_ratio(nf + 2.0, a - 1.0) - (nf + a + 1.0).ln()).exp());
    let mut weights = Vec::with_capacity(n + 1);
    let mut fun_weights = Vec::with_capacity(n + 1);
    for (j, &x) in nodes.iter().enumerate() {
        let (ln, _) = poly_pair(alpha, n, x);
        let w = c * x / (ln * ln);
        if !ln.is_finite() || !w.is_finite() {
            return Err(Error::NonFinite {
                index: j,
                x: x.to_f64_lossy(),
            });
        }
        let fw = w * x.exp();
        weights.push(w);
        fun_weights.push(fw);
    }
    Ok(GaussRule {
        alpha,
        kind: RuleKind::Gauss,
        nodes,
        weights,
        fun_weights,
        fallback: Vec::new(),
    })
}

/// `(L_n, L_{n-1})` by the unscaled difference recurrence.
fn poly_pair<T: Real>(alpha: T, n: usize, x: T) -> (T, T) {
    if n == 0 {
        return (T::one(), T::zero());
    }
    let mut l = T::one() + alpha - x;
    let mut dl = alpha - x;
    for k in 1..n {
        let kk = T::from_usize_lossy(k);
        dl = ((kk + alpha) * dl - x * l) / (kk + T::one());
        l = l + dl;
    }
    (l, l - dl)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn seeds_small_cases() {
        assert_eq!(nodes_eigen_seed(0.0, 0).unwrap(), vec![1.0]);
        let s = nodes_eigen_seed(0.0, 1).unwrap();
        assert!(rel(s[0], 2.0 - 2f64.sqrt()) < 1e-15);
        assert!(rel(s[1], 2.0 + 2f64.sqrt()) < 1e-15);
    }

    #[test]
    fn newton_keeps_exact_nodes() {
        let seeds = [2.0 - 2f64.sqrt(), 2.0 + 2f64.sqrt()];
        let r = refine_newton(0.0, 1, &seeds, &NewtonConfig::default()).unwrap();
        for (a, b) in r.nodes.iter().zip(&seeds) {
            assert!((a - b).abs() <= b * f64::EPSILON);
        }
        assert!(r.fallback.is_empty());
    }

    #[test]
    fn newton_rejects_bad_input() {
        let cfg = NewtonConfig::default();
        assert!(refine_newton(0.0, 1, &[1.0], &cfg).is_err());
        assert!(refine_newton(0.0, 1, &[2.0, 1.0], &cfg).is_err());
        let bad = NewtonConfig {
            max_iters: 0,
            rel_step_tol: 1e-15,
        };
        assert!(refine_newton(0.0, 1, &[1.0, 2.0], &bad).is_err());
    }

    #[test]
    fn one_point_rule() {
        let r = gauss_rule(0.0, 0).unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert!(rel(r.nodes[0], 1.0) < 1e-15);
        assert!(rel(r.weights[0], 1.0) < 1e-15);
        assert!(rel(r.fun_weights[0], std::f64::consts::E) < 1e-15);
    }

    #[test]
    fn last_weights() {
        // 16-point value from numpy's laggauss
        for (n, want) in [(4, 2.337e-5), (9, 9.912e-13), (15, 4.1615e-22)] {
            let r = gauss_rule(0.0, n).unwrap();
            let got = *r.weights.last().unwrap();
            assert!(rel(got, want) < 5e-4, "N={n}: {got:e}");
        }
        let radau = gauss_radau_rule(0.0, 16).unwrap();
        assert!(rel(*radau.weights.last().unwrap(), 6.770e-23) < 5e-4);
    }

    #[test]
    fn integrate_moments() {
        let r = gauss_rule(0.0, 8).unwrap();
        let one = integrate(&r, |_| 1.0, WeightForm::PolyWeighted).unwrap();
        assert!(rel(one, 1.0) < 1e-14);
        let cube = integrate(&r, |x| x * x * x, WeightForm::PolyWeighted).unwrap();
        assert!(rel(cube, 6.0) < 1e-13);
        let r2 = gauss_rule(2.0, 10).unwrap();
        let g = integrate(&r2, |_| 1.0, WeightForm::PolyWeighted).unwrap();
        assert!(rel(g, 2.0) < 1e-14);
        let err = integrate(&r, |x| 1.0 / (x - r.nodes[3]), WeightForm::PolyWeighted).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 3, .. }));
    }

    #[test]
    fn function_form_integrates_weighted_products() {
        // ∫ e^{-x} x^k dx = k! through ŵ with integrand e^{-x} x^k
        let r = gauss_rule(0.0, 15).unwrap();
        for k in 0..=31 {
            let got = integrate(&r, |x: f64| (-x).exp() * x.powi(k), WeightForm::FunctionForm).unwrap();
            let want = crate::special::gamma(k as f64 + 1.0);
            assert!(rel(got, want) < 1e-12, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn radau_small_cases() {
        let r = gauss_radau_rule(0.0, 1).unwrap();
        assert_eq!(r.nodes[0], 0.0);
        assert!(rel(r.nodes[1], 2.0) < 1e-15);
        assert!(rel(r.weights[0], 0.5) < 1e-15);
        assert!(rel(r.weights[1], 0.5) < 1e-15);
        let r = gauss_radau_rule(1.0, 2).unwrap();
        assert!(rel(r.weights[0], 1.0 / 6.0) < 1e-15);
        assert!(gauss_radau_rule(0.0, 0).is_err());
    }

    #[test]
    fn radau_moments() {
        let n = 64;
        let r = gauss_radau_rule(0.0, n).unwrap();
        for k in 0..=2 * n as i32 {
            let got = integrate(&r, |x: f64| x.powi(k), WeightForm::PolyWeighted).unwrap();
            let want = crate::special::gamma(k as f64 + 1.0);
            assert!(rel(got, want) < 1e-12, "k={k}: {}", rel(got, want));
        }
    }

    #[test]
    fn large_rule_function_weights_finite() {
        let r = gauss_rule(0.0_f64, 999).unwrap();
        assert!(r.fun_weights.iter().all(|w| w.is_finite() && *w > 0.0));
        assert!(r.fallback.is_empty());
        let fw = function_weights(&r);
        for (a, b) in fw.iter().zip(&r.fun_weights) {
            assert!(a.is_finite() && *a > 0.0);
            assert!(rel(*a, *b) < 1e-10);
        }
    }

    #[test]
    fn negative_alpha_weights_sum_to_gamma() {
        for (alpha, n) in [(-0.8530234476927667, 96), (-0.99, 200), (-0.5, 300)] {
            let r = gauss_rule(alpha, n).unwrap();
            let total: f64 = r.weights.iter().sum();
            let want = crate::special::gamma(alpha + 1.0);
            assert!(rel(total, want) <= 1e-13, "alpha {alpha}, N {n}: {}", rel(total, want));
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(gauss_rule(-1.0, 3), Err(Error::Domain(_))));
        assert!(matches!(gauss_radau_rule(-2.0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn single_precision_rule() {
        let r = gauss_rule(0.0f32, 10).unwrap();
        let s: f32 = r.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
    }
}
