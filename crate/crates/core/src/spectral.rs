//! Scaled Laguerre spectral-Galerkin solver for
//!
//! ```text
//! −u″ + γu = f  on (0, ∞),   u(0) = 0,   u(x) → 0 as x → ∞.
//! ```
//!
//! With `y = βx` and `v(y) = u(y/β)` the problem becomes
//! `−v″ + (γ/β²) v = f(y/β)/β²`, which is discretised in
//! `span{ψ_n(y) = e^{−y/2}(L_n(y) − L_{n+1}(y)), n < N}`. In this basis
//! the mass matrix is `2` on the diagonal and `−1` off it and the stiffness
//! matrix is `½` and `¼`, so the system is tridiagonal.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_rule, GaussRule};
use crate::recurrence::{eval_fun_stable_series, LagParams, StableEvalConfig};
use crate::scalar::Real;

/// A real function shared between threads.
pub type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `−u″ + γu = f` with optional exact solution for error studies.
#[derive(Clone)]
pub struct ModelProblem<T> {
    pub gamma: T,
    pub f: RealFn<T>,
    pub u_exact: Option<RealFn<T>>,
    pub du_exact: Option<RealFn<T>>,
}

impl<T: Real> fmt::Debug for ModelProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelProblem")
            .field("gamma", &self.gamma)
            .field("u_exact", &self.u_exact.is_some())
            .field("du_exact", &self.du_exact.is_some())
            .finish()
    }
}

impl<T: Real> ModelProblem<T> {
    pub fn new(gamma: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self {
            gamma,
            f: Arc::new(f),
            u_exact: None,
            du_exact: None,
        })
    }

    pub fn with_exact(
        mut self,
        u: impl Fn(T) -> T + Send + Sync + 'static,
        du: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.u_exact = Some(Arc::new(u));
        self.du_exact = Some(Arc::new(du));
        self
    }

    /// Manufactured problem whose solution is `u`, given `u′` and `u″`.
    pub fn manufactured(
        gamma: T,
        u: impl Fn(T) -> T + Send + Sync + 'static,
        du: impl Fn(T) -> T + Send + Sync + 'static,
        d2u: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        let u: RealFn<T> = Arc::new(u);
        let du: RealFn<T> = Arc::new(du);
        let uf = u.clone();
        let mut p = Self::new(gamma, move |x| -d2u(x) + gamma * uf(x))?;
        p.u_exact = Some(u);
        p.du_exact = Some(du);
        Ok(p)
    }
}

/// Oscillatory factor of [`TestCase::U3`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

/// The benchmark solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestCase {
    /// `sin(kx) e^{−x}`.
    U1 { k: f64 },
    /// `(1 + x)^{−r}`.
    U2 { r: f64 },
    /// `sin(kx)(1 + x)^{−r}` or `cos(kx)(1 + x)^{−r}`.
    U3 { k: f64, r: f64, trig: Trig },
}

/// How a solution with `u(0) ≠ 0` is brought to homogeneous boundary data:
/// the solver works on `u − u(0) e^{−x/ℓ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifting {
    pub length: f64,
}

impl Default for Lifting {
    fn default() -> Self {
        Self { length: 1.0 }
    }
}

impl TestCase {
    /// `(u, u′, u″)` at `x`.
    pub fn eval<T: Real>(&self, x: T) -> (T, T, T) {
        let one = T::one();
        match *self {
            TestCase::U1 { k } => {
                let k = T::lit(k);
                let (s, c) = (k * x).sin_cos();
                let e = (-x).exp();
                (s * e, (k * c - s) * e, ((one - k * k) * s - T::lit(2.0) * k * c) * e)
            }
            TestCase::U2 { r } => {
                let r = T::lit(r);
                let p = (one + x).powf(-r);
                (p, -r * p / (one + x), r * (r + one) * p / ((one + x) * (one + x)))
            }
            TestCase::U3 { k, r, trig } => {
                let k = T::lit(k);
                let r = T::lit(r);
                let (sn, cs) = (k * x).sin_cos();
                let (s, ds) = match trig {
                    Trig::Sin => (sn, k * cs),
                    Trig::Cos => (cs, -k * sn),
                };
                let d2s = -k * k * s;
                let p = (one + x).powf(-r);
                let dp = -r * p / (one + x);
                let d2p = r * (r + one) * p / ((one + x) * (one + x));
                (s * p, ds * p + s * dp, d2s * p + T::lit(2.0) * ds * dp + s * d2p)
            }
        }
    }

    /// The problem for `−u″ + γu = f`, lifted when `u(0) ≠ 0`.
    pub fn problem<T: Real>(&self, gamma: T, lifting: Lifting) -> Result<ModelProblem<T>> {
        if !(lifting.length > 0.0) {
            return Err(Error::Domain(format!(
                "lifting length must be positive, got {}",
                lifting.length
            )));
        }
        let case = *self;
        let u0 = case.eval(T::zero()).0;
        let inv_l = T::lit(1.0 / lifting.length);
        let lift = move |x: T| u0 * (-x * inv_l).exp();
        ModelProblem::manufactured(
            gamma,
            move |x| case.eval(x).0 - lift(x),
            move |x| case.eval(x).1 + inv_l * lift(x),
            move |x| case.eval(x).2 - inv_l * inv_l * lift(x),
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestCase::U1 { .. } => "u1",
            TestCase::U2 { .. } => "u2",
            TestCase::U3 { .. } => "u3",
        }
    }
}

/// `ψ_n(y) = e^{−y/2}(L_n(y) − L_{n+1}(y))`.
pub fn basis_eval<T: Real>(n: usize, y: T) -> Result<T> {
    let s = eval_fun_stable_series(LagParams::new(T::zero(), n + 1)?, y, &StableEvalConfig::default())?;
    Ok(-s.deltas.expect("stable series carries deltas")[n])
}

/// `ψ_n′(y) = ½ e^{−y/2}(L_n(y) + L_{n+1}(y))`.
pub fn basis_deriv<T: Real>(n: usize, y: T) -> Result<T> {
    let s = eval_fun_stable_series(LagParams::new(T::zero(), n + 1)?, y, &StableEvalConfig::default())?;
    Ok(T::lit(0.5) * (s.values[n] + s.values[n + 1]))
}

/// `ψ_0(y)..ψ_{N−1}(y)` and their derivatives in one recurrence pass.
pub fn basis_set<T: Real>(n: usize, y: T) -> Result<(Vec<T>, Vec<T>)> {
    let s = eval_fun_stable_series(LagParams::new(T::zero(), n)?, y, &StableEvalConfig::default())?;
    let d = s.deltas.expect("stable series carries deltas");
    let half = T::lit(0.5);
    let psi = d.iter().map(|&v| -v).collect();
    let dpsi = (0..n).map(|k| half * (s.values[k] + s.values[k + 1])).collect();
    Ok((psi, dpsi))
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s = s + self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s = s + self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A x = b` by `LDLᵀ`, failing on a non-positive pivot.
    pub fn solve_spd(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::Usage(format!("rhs length {} != {n}", b.len())));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let di = if i == 0 {
                self.diag[0]
            } else {
                let li = self.off[i - 1] / d[i - 1];
                l.push(li);
                self.diag[i] - li * self.off[i - 1]
            };
            if !(di > T::zero()) || !di.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: i,
                    pivot: di.to_f64_lossy(),
                });
            }
            d.push(di);
        }
        let mut z = b.to_vec();
        for i in 1..n {
            z[i] = z[i] - l[i - 1] * z[i - 1];
        }
        for i in 0..n {
            z[i] = z[i] / d[i];
        }
        for i in (0..n - 1).rev() {
            z[i] = z[i] - l[i] * z[i + 1];
        }
        Ok(z)
    }
}

/// Mass matrix `(ψ_m, ψ_n)`.
pub fn mass_matrix<T: Real>(n: usize) -> SymTridiagonal<T> {
    SymTridiagonal {
        diag: vec![T::lit(2.0); n],
        off: vec![-T::one(); n.saturating_sub(1)],
    }
}

/// Stiffness matrix `(ψ_m′, ψ_n′)`.
pub fn stiffness_matrix<T: Real>(n: usize) -> SymTridiagonal<T> {
    SymTridiagonal {
        diag: vec![T::lit(0.5); n],
        off: vec![T::lit(0.25); n.saturating_sub(1)],
    }
}

/// `(ψ_m′, ψ_n′) + γ_eff (ψ_m, ψ_n)` for `m, n < N`.
pub fn assemble_system<T: Real>(n: usize, gamma_eff: T) -> Result<SymTridiagonal<T>> {
    if n == 0 {
        return Err(Error::Usage("need at least one basis function".into()));
    }
    if !(gamma_eff > T::zero()) || !gamma_eff.is_finite() {
        return Err(Error::Domain(format!("gamma_eff must be positive, got {gamma_eff}")));
    }
    Ok(SymTridiagonal {
        diag: vec![T::lit(0.5) + T::lit(2.0) * gamma_eff; n],
        off: vec![T::lit(0.25) - gamma_eff; n - 1],
    })
}

/// Gauss rules (α = 0) shared across solves, keyed by the rule parameter.
#[derive(Debug, Default)]
pub struct RuleCache<T> {
    rules: Mutex<HashMap<usize, Arc<GaussRule<T>>>>,
}

impl<T: Real> RuleCache<T> {
    pub fn new() -> Self {
        Self {
            rules: Mutex::new(HashMap::new()),
        }
    }

    /// The `(n+1)`-point rule.
    pub fn get(&self, n: usize) -> Result<Arc<GaussRule<T>>> {
        if let Some(r) = self.rules.lock().expect("rule cache poisoned").get(&n) {
            return Ok(r.clone());
        }
        let rule = Arc::new(gauss_rule(T::zero(), n)?);
        let mut map = self.rules.lock().expect("rule cache poisoned");
        Ok(map.entry(n).or_insert(rule).clone())
    }
}

fn check_dims<T: Real>(n: usize, m: usize, beta: T) -> Result<()> {
    if n == 0 {
        return Err(Error::Usage("N must be at least 1".into()));
    }
    if m < n + 1 {
        return Err(Error::Usage(format!("M must be at least N + 1 (N = {n}, M = {m})")));
    }
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// `b_n = Σ_j f(y_j/β) ψ_n(y_j) ŵ_j / β²` over the `(M+1)`-point rule in `y`.
pub fn project_rhs<T: Real>(problem: &ModelProblem<T>, n: usize, m: usize, beta: T) -> Result<Vec<T>> {
    project_rhs_with(problem, n, m, beta, &RuleCache::new())
}

pub fn project_rhs_with<T: Real>(
    problem: &ModelProblem<T>,
    n: usize,
    m: usize,
    beta: T,
    cache: &RuleCache<T>,
) -> Result<Vec<T>> {
    check_dims(n, m, beta)?;
    let rule = cache.get(m)?;
    let b2 = beta * beta;
    let mut b = vec![T::zero(); n];
    for (j, (&y, &w)) in rule.nodes.iter().zip(&rule.fun_weights).enumerate() {
        let g = (problem.f)(y / beta);
        if !g.is_finite() {
            return Err(Error::NonFinite {
                index: j,
                x: (y / beta).to_f64_lossy(),
            });
        }
        if g == T::zero() {
            continue;
        }
        let (psi, _) = basis_set(n, y)?;
        let gw = g * w / b2;
        for (bk, p) in b.iter_mut().zip(psi) {
            *bk = *bk + gw * p;
        }
    }
    Ok(b)
}

/// Galerkin coefficients with the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution<T> {
    pub n: usize,
    pub m: usize,
    pub beta: T,
    pub gamma: T,
    /// Coefficients of `ψ_k(βx)`.
    pub coeffs: Vec<T>,
}

impl<T: Real> SpectralSolution<T> {
    /// `v_N(y) = Σ c_k ψ_k(y)`.
    pub fn eval_y(&self, y: T) -> Result<T> {
        let (psi, _) = basis_set(self.n, y)?;
        Ok(dot(&self.coeffs, &psi))
    }

    /// `(v_N(y), v_N′(y))`.
    pub fn eval_y_both(&self, y: T) -> Result<(T, T)> {
        let (psi, dpsi) = basis_set(self.n, y)?;
        Ok((dot(&self.coeffs, &psi), dot(&self.coeffs, &dpsi)))
    }

    /// `u_N(x) = v_N(βx)`.
    pub fn eval(&self, x: T) -> Result<T> {
        self.eval_y(self.beta * x)
    }

    /// `u_N′(x) = β v_N′(βx)`.
    pub fn eval_deriv(&self, x: T) -> Result<T> {
        Ok(self.beta * self.eval_y_both(self.beta * x)?.1)
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// Galerkin solve with `M` interpolation points (`M+1` Gauss nodes).
pub fn solve<T: Real>(problem: &ModelProblem<T>, n: usize, m: usize, beta: T) -> Result<SpectralSolution<T>> {
    solve_with(problem, n, m, beta, &RuleCache::new())
}

pub fn solve_with<T: Real>(
    problem: &ModelProblem<T>,
    n: usize,
    m: usize,
    beta: T,
    cache: &RuleCache<T>,
) -> Result<SpectralSolution<T>> {
    let b = project_rhs_with(problem, n, m, beta, cache)?;
    let a = assemble_system(n, problem.gamma / (beta * beta))?;
    let coeffs = a.solve_spd(&b)?;
    if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite { index: i, x: f64::NAN });
    }
    Ok(SpectralSolution {
        n,
        m,
        beta,
        gamma: problem.gamma,
        coeffs,
    })
}

/// Errors of a solution in the original variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub m: usize,
    pub beta: f64,
    /// `‖u − u_N‖`.
    pub l2_error: f64,
    /// `|u − u_N|₁`.
    pub h1_semi_error: f64,
    /// Points of the rule the norms were computed with.
    pub quad_points: usize,
    /// `(l2, h1)` from a rule with twice as many points, present when it
    /// moves either norm by more than 1%.
    pub diagnostic: Option<(f64, f64)>,
}

fn norms_on_rule<T: Real>(
    sol: &SpectralSolution<T>,
    u: &RealFn<T>,
    du: &RealFn<T>,
    rule: &GaussRule<T>,
) -> Result<(f64, f64)> {
    let beta = sol.beta;
    let mut l2 = T::zero();
    let mut h1 = T::zero();
    for (&y, &w) in rule.nodes.iter().zip(&rule.fun_weights) {
        let (v, dv) = sol.eval_y_both(y)?;
        let x = y / beta;
        let ev = u(x) - v;
        let edv = du(x) / beta - dv;
        l2 = l2 + ev * ev * w;
        h1 = h1 + edv * edv * w;
    }
    let b = beta.to_f64_lossy();
    // ‖u − u_N‖ = ‖v − v_N‖/√β and |u − u_N|₁ = √β |v − v_N|₁
    Ok((l2.to_f64_lossy().sqrt() / b.sqrt(), h1.to_f64_lossy().sqrt() * b.sqrt()))
}

/// `‖u − u_N‖` and `|u − u_N|₁` through the `y` variable, on a `(2M+2)`-point
/// rule, with a `4M`-point cross-check.
pub fn error_norms<T: Real>(sol: &SpectralSolution<T>, problem: &ModelProblem<T>) -> Result<ErrorReport> {
    error_norms_with(sol, problem, &RuleCache::new())
}

pub fn error_norms_with<T: Real>(
    sol: &SpectralSolution<T>,
    problem: &ModelProblem<T>,
    cache: &RuleCache<T>,
) -> Result<ErrorReport> {
    let (u, du) = match (&problem.u_exact, &problem.du_exact) {
        (Some(u), Some(du)) => (u, du),
        _ => {
            return Err(Error::Usage(
                "error norms need the exact solution and its derivative".into(),
            ))
        }
    };
    let main = cache.get(2 * sol.m + 1)?;
    let (l2, h1) = norms_on_rule(sol, u, du, &main)?;
    let check = cache.get(4 * sol.m - 1)?;
    let (l2c, h1c) = norms_on_rule(sol, u, du, &check)?;
    let differs = |a: f64, b: f64| (a - b).abs() > 0.01 * a.abs().max(b.abs());
    let diagnostic = (differs(l2, l2c) || differs(h1, h1c)).then_some((l2c, h1c));
    Ok(ErrorReport {
        n: sol.n,
        m: sol.m,
        beta: sol.beta.to_f64_lossy(),
        l2_error: l2,
        h1_semi_error: h1,
        quad_points: main.len(),
        diagnostic,
    })
}

/// `β* = 2|z|` for data behaving like `e^{zx}`, `Re z < 0`.
pub fn optimal_beta_exponential(z_re: f64, z_im: f64) -> Result<f64> {
    if !(z_re < 0.0) {
        return Err(Error::Domain(format!("need Re z < 0 for decay, got {z_re}")));
    }
    Ok(2.0 * z_re.hypot(z_im))
}

/// `‖∂̂_y^m v‖²` for `u = e^{zx}` at scaling `β`:
/// `|z/√β + √β/2|^{2m} (m−1)! / |2 Re z|^m`.
pub fn exponential_seminorm_sq(z_re: f64, z_im: f64, beta: f64, m: u32) -> Result<f64> {
    if !(z_re < 0.0) {
        return Err(Error::Domain(format!("need Re z < 0 for decay, got {z_re}")));
    }
    if m == 0 || !(beta > 0.0) {
        return Err(Error::Domain("need m >= 1 and beta > 0".into()));
    }
    let mod2 = (z_re * z_re + z_im * z_im) / beta + beta / 4.0 + z_re;
    let mf = m as f64;
    Ok((mf * mod2.ln() + crate::special::ln_gamma(mf) - mf * (2.0 * z_re).abs().ln()).exp())
}

/// The minimum of [`exponential_seminorm_sq`] over `β`:
/// `(|z| + Re z)^m (m−1)! / |2 Re z|^m`.
pub fn exponential_seminorm_sq_min(z_re: f64, z_im: f64, m: u32) -> Result<f64> {
    if !(z_re < 0.0) {
        return Err(Error::Domain(format!("need Re z < 0 for decay, got {z_re}")));
    }
    if m == 0 {
        return Err(Error::Domain("need m >= 1".into()));
    }
    let mf = m as f64;
    let base = z_re.hypot(z_im) + z_re;
    Ok(base.powi(m as i32) * crate::special::gamma(mf) / (2.0 * z_re).abs().powi(m as i32))
}

/// One cell of [`beta_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n: usize,
    pub beta: f64,
    pub result: std::result::Result<ErrorReport, String>,
}

/// How `M` follows `N` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MRule {
    /// `M = factor · N`.
    Multiple(usize),
    Fixed(usize),
}

impl MRule {
    pub fn m_for(self, n: usize) -> usize {
        match self {
            MRule::Multiple(k) => k * n,
            MRule::Fixed(m) => m,
        }
    }
}

impl Default for MRule {
    fn default() -> Self {
        MRule::Multiple(2)
    }
}

/// Solves and measures every `(β, N)` cell in parallel; results are ordered
/// with `β` outer and `N` inner. Failed cells carry their error message.
pub fn beta_sweep<T: Real>(
    problem: &ModelProblem<T>,
    n_list: &[usize],
    beta_list: &[f64],
    m_rule: MRule,
) -> Result<Vec<SweepCell>> {
    if n_list.is_empty() || beta_list.is_empty() {
        return Err(Error::Usage("N and beta lists must be non-empty".into()));
    }
    let cache = RuleCache::new();
    let cells: Vec<(f64, usize)> = beta_list
        .iter()
        .flat_map(|&b| n_list.iter().map(move |&n| (b, n)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(beta, n)| {
            let result = solve_with(problem, n, m_rule.m_for(n), T::lit(beta), &cache)
                .and_then(|sol| error_norms_with(&sol, problem, &cache))
                .map_err(|e| e.to_string());
            SweepCell { n, beta, result }
        })
        .collect())
}

/// For each `N`, the `β` with the smallest `L²` error among successful cells.
pub fn argmin_beta(cells: &[SweepCell]) -> Vec<(usize, f64)> {
    let mut ns: Vec<usize> = cells.iter().map(|c| c.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .filter_map(|n| {
            cells
                .iter()
                .filter(|c| c.n == n)
                .filter_map(|c| c.result.as_ref().ok().map(|r| (c.beta, r.l2_error)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(b, _)| (n, b))
        })
        .collect()
}
