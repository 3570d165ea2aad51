//! Extended-precision reference values.
//!
//! Everything here runs on software binary floats ([`astro_float`]) with a
//! working precision of `digits` decimal digits plus guard bits, and an
//! exponent range wide enough that `L⁽ᵅ⁾ₙ` at the largest node of a
//! thousand-point rule is an ordinary number. Values cross the module
//! boundary as decimal strings.
//!
//! [`ReferenceSet`]s for the test grid can be cached on disk as CSV
//! (`alpha,N,kind,index,value_decimal`) with a JSON sidecar recording the
//! precision and Newton tolerance.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::nodes_eigen_seed;

const RM: RoundingMode = RoundingMode::ToEven;
const GUARD_BITS: usize = 24;
const MAX_NEWTON: usize = 60;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "LAGSPEC_ORACLE_CACHE";
const CACHE_VERSION: u32 = 1;

/// Working precision of the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HpContext {
    digits: usize,
}

impl HpContext {
    pub const MIN_DIGITS: usize = 24;
    pub const MAX_DIGITS: usize = 64;

    pub fn new(digits: usize) -> Result<Self> {
        if !(Self::MIN_DIGITS..=Self::MAX_DIGITS).contains(&digits) {
            return Err(Error::Usage(format!(
                "oracle digits must be in {}..={}, got {digits}",
                Self::MIN_DIGITS,
                Self::MAX_DIGITS
            )));
        }
        Ok(Self { digits })
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    /// Mantissa bits used for arithmetic.
    pub fn bits(&self) -> usize {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
    }

    /// Relative Newton step at which node refinement stops.
    pub fn newton_tol(&self) -> String {
        format!("1e-{}", self.digits - 2)
    }

    pub fn parse(&self, s: &str) -> Result<HpScalar> {
        let mut cc = consts()?;
        let v = BigFloat::parse(s.trim(), Radix::Dec, self.bits(), RM, &mut cc);
        if v.is_nan() || v.is_inf() {
            return Err(Error::Usage(format!("not a finite decimal number: {s:?}")));
        }
        Ok(HpScalar(v))
    }

    /// Exact conversion; every double is representable at oracle precision.
    pub fn from_f64(&self, v: f64) -> HpScalar {
        HpScalar(BigFloat::from_f64(v, self.bits()))
    }

    /// `digits` significant figures in scientific notation.
    pub fn format(&self, v: &HpScalar) -> Result<String> {
        format_digits(&v.0, self.digits)
    }
}

impl Default for HpContext {
    fn default() -> Self {
        Self { digits: 24 }
    }
}

/// An extended-precision real.
#[derive(Debug, Clone)]
pub struct HpScalar(BigFloat);

impl HpScalar {
    /// Nearest double.
    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl fmt::Display for HpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut cc = Consts::new().map_err(|_| fmt::Error)?;
        let s = self.0.format(Radix::Dec, RM, &mut cc).map_err(|_| fmt::Error)?;
        f.write_str(&s)
    }
}

fn consts() -> Result<Consts> {
    Consts::new().map_err(|e| Error::Internal(format!("astro-float constants: {e:?}")))
}

/// The exact decimal expansion of a double, suitable for passing into the
/// string API without perturbing the abscissa.
pub fn exact_decimal(v: f64) -> String {
    let s = format!("{v:.767e}");
    let (m, e) = s.split_once('e').expect("scientific format");
    let m = if m.contains('.') {
        m.trim_end_matches('0').trim_end_matches('.')
    } else {
        m
    };
    format!("{m}e{e}")
}

fn to_f64(v: &BigFloat) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    match format_digits(v, 40) {
        Ok(s) => s.parse().unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    }
}

/// Rounds the shortest decimal form to `digits` significant figures,
/// half-to-even on the decimal string.
fn format_digits(v: &BigFloat, digits: usize) -> Result<String> {
    if v.is_nan() || v.is_inf() {
        return Err(Error::Internal("non-finite extended-precision value".into()));
    }
    if v.is_zero() {
        return Ok(format!("0.{}e0", "0".repeat(digits - 1)));
    }
    let mut cc = consts()?;
    let raw = v
        .format(Radix::Dec, RM, &mut cc)
        .map_err(|e| Error::Internal(format!("format: {e:?}")))?;
    let (neg, body) = match raw.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, raw.as_str()),
    };
    let (mant, exp) = body.split_once('e').unwrap_or((body, "0"));
    let mut exp: i64 = exp
        .parse()
        .map_err(|_| Error::Internal(format!("unexpected decimal form {raw:?}")))?;
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let mut ds: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
    exp += int_part.len() as i64 - 1;
    let lead = ds.iter().position(|&d| d != 0).unwrap_or(0);
    ds.drain(..lead);
    exp -= lead as i64;
    if ds.len() > digits {
        let tail = &ds[digits..];
        let first = tail[0];
        let rest_nonzero = tail[1..].iter().any(|&d| d != 0);
        ds.truncate(digits);
        let round_up = first > 5 || (first == 5 && (rest_nonzero || ds[digits - 1] % 2 == 1));
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    exp += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    }
    ds.resize(digits, 0);
    let mut out = String::with_capacity(digits + 8);
    if neg {
        out.push('-');
    }
    out.push((b'0' + ds[0]) as char);
    if digits > 1 {
        out.push('.');
        out.extend(ds[1..].iter().map(|&d| (b'0' + d) as char));
    }
    out.push('e');
    out.push_str(&exp.to_string());
    Ok(out)
}

/// Arithmetic at a fixed precision.
struct Hp {
    p: usize,
    cc: Consts,
}

impl Hp {
    fn new(ctx: &HpContext) -> Result<Self> {
        Ok(Self {
            p: ctx.bits(),
            cc: consts()?,
        })
    }

    fn f(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }

    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    /// Standard recurrence, all degrees `0..=n`.
    fn poly_series(&self, alpha: &BigFloat, n: usize, x: &BigFloat) -> Vec<BigFloat> {
        let one = self.f(1.0);
        let mut out = Vec::with_capacity(n + 1);
        out.push(one.clone());
        if n == 0 {
            return out;
        }
        out.push(self.sub(&self.add(&one, alpha), x));
        for k in 1..n {
            let a = self.sub(&self.add(&self.f((2 * k + 1) as f64), alpha), x);
            let b = self.add(&self.f(k as f64), alpha);
            let t = self.sub(&self.mul(&a, &out[k]), &self.mul(&b, &out[k - 1]));
            out.push(self.div(&t, &self.f((k + 1) as f64)));
        }
        out
    }

    /// `(L_n, L_{n-1})` by the standard recurrence.
    fn poly_top(&self, alpha: &BigFloat, n: usize, x: &BigFloat) -> (BigFloat, BigFloat) {
        let one = self.f(1.0);
        if n == 0 {
            return (one, self.f(0.0));
        }
        let mut prev = one.clone();
        let mut cur = self.sub(&self.add(&one, alpha), x);
        for k in 1..n {
            let a = self.sub(&self.add(&self.f((2 * k + 1) as f64), alpha), x);
            let b = self.add(&self.f(k as f64), alpha);
            let t = self.sub(&self.mul(&a, &cur), &self.mul(&b, &prev));
            prev = cur;
            cur = self.div(&t, &self.f((k + 1) as f64));
        }
        (cur, prev)
    }

    fn half_weight(&mut self, x: &BigFloat) -> BigFloat {
        let h = self.mul(x, &self.f(-0.5));
        self.exp(&h)
    }
}

fn finite(v: BigFloat, what: &str) -> Result<BigFloat> {
    if v.is_nan() || v.is_inf() {
        return Err(Error::Internal(format!("oracle produced a non-finite {what}")));
    }
    Ok(v)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "alpha must be a finite number > -1, got {alpha}"
        )));
    }
    Ok(())
}

/// `L⁽ᵅ⁾ₙ(x)` by the standard recurrence at oracle precision.
pub fn hp_eval_poly(ctx: &HpContext, alpha: f64, n: usize, x: &str) -> Result<String> {
    check_alpha(alpha)?;
    let hp = Hp::new(ctx)?;
    let xv = ctx.parse(x)?.0;
    let (l, _) = hp.poly_top(&hp.f(alpha), n, &xv);
    format_digits(&finite(l, "polynomial value")?, ctx.digits)
}

/// `L⁽ᵅ⁾₀(x)..L⁽ᵅ⁾ₙ(x)` at oracle precision.
pub fn hp_eval_poly_series(ctx: &HpContext, alpha: f64, n: usize, x: &str) -> Result<Vec<String>> {
    check_alpha(alpha)?;
    let hp = Hp::new(ctx)?;
    let xv = ctx.parse(x)?.0;
    hp.poly_series(&hp.f(alpha), n, &xv)
        .iter()
        .map(|v| format_digits(v, ctx.digits))
        .collect()
}

/// `L̂⁽ᵅ⁾ₙ(x) = e^{-x/2} L⁽ᵅ⁾ₙ(x)` at oracle precision.
pub fn hp_eval_fun(ctx: &HpContext, alpha: f64, n: usize, x: &str) -> Result<String> {
    check_alpha(alpha)?;
    let mut hp = Hp::new(ctx)?;
    let xv = ctx.parse(x)?.0;
    let (l, _) = hp.poly_top(&hp.f(alpha), n, &xv);
    let w = hp.half_weight(&xv);
    format_digits(&finite(hp.mul(&l, &w), "function value")?, ctx.digits)
}

/// `approx[k] − L⁽ᵅ⁾ₖ(x)` for `k = 0..approx.len()`, with the subtraction
/// done at oracle precision so the result is the exact rounding error of
/// `approx` (up to the final rounding to double).
pub fn hp_series_errors(ctx: &HpContext, alpha: f64, x: f64, approx: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if approx.is_empty() {
        return Ok(Vec::new());
    }
    let hp = Hp::new(ctx)?;
    let exact = hp.poly_series(&hp.f(alpha), approx.len() - 1, &hp.f(x));
    Ok(exact
        .iter()
        .zip(approx)
        .map(|(e, &a)| to_f64(&hp.sub(&hp.f(a), e)))
        .collect())
}

fn gauss_nodes_hp(ctx: &HpContext, alpha: f64, n: usize) -> Result<Vec<BigFloat>> {
    check_alpha(alpha)?;
    let hp = Hp::new(ctx)?;
    let a = hp.f(alpha);
    let np1 = hp.f((n + 1) as f64);
    let np1a = hp.add(&np1, &a);
    let tol = ctx.parse(&ctx.newton_tol())?.0;
    let seeds = nodes_eigen_seed(alpha, n)?;
    let mut out = Vec::with_capacity(n + 1);
    for (j, &s) in seeds.iter().enumerate() {
        let mut x = hp.f(s);
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let (l, lm1) = hp.poly_top(&a, n + 1, &x);
            // x L' = (n+1) L_{n+1} - (n+1+α) L_n
            let d = hp.sub(&hp.mul(&np1, &l), &hp.mul(&np1a, &lm1));
            let dx = hp.div(&hp.mul(&x, &l), &d);
            if dx.is_nan() || dx.is_inf() {
                break;
            }
            x = hp.sub(&x, &dx);
            if dx.abs().cmp(&hp.mul(&tol, &x)).is_some_and(|c| c <= 0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::OracleNoConvergence { index: j });
        }
        out.push(x);
    }
    Ok(out)
}

/// Zeros of `L⁽ᵅ⁾_{N+1}` refined from double eigen seeds until the relative
/// Newton step drops below `10^{-(digits-2)}`.
pub fn hp_gauss_nodes(ctx: &HpContext, alpha: f64, n: usize) -> Result<Vec<String>> {
    gauss_nodes_hp(ctx, alpha, n)?
        .iter()
        .map(|v| format_digits(v, ctx.digits))
        .collect()
}

/// Nodes and polynomial-form weights of the `(N+1)`-point Gauss rule at
/// oracle precision. Only integer `α ≥ 0`, where the Γ-ratio is a finite
/// product.
pub fn hp_gauss_rule(ctx: &HpContext, alpha: u32, n: usize) -> Result<(Vec<String>, Vec<String>)> {
    let hp = Hp::new(ctx)?;
    let nodes = gauss_nodes_hp(ctx, alpha as f64, n)?;
    let a = hp.f(alpha as f64);
    // Γ(N+α+1)/(N+1)! is (N+2)···(N+α) for α ≥ 1 and 1/(N+1) for α = 0
    let mut c = hp.f(1.0);
    for i in 2..=alpha as usize {
        c = hp.mul(&c, &hp.f((n + i) as f64));
    }
    if alpha == 0 {
        c = hp.div(&c, &hp.f((n + 1) as f64));
    }
    c = hp.div(&c, &hp.f((n + 1) as f64 + alpha as f64));
    let mut weights = Vec::with_capacity(n + 1);
    for x in &nodes {
        let (l, _) = hp.poly_top(&a, n, x);
        let w = hp.div(&hp.mul(&c, x), &hp.mul(&l, &l));
        weights.push(format_digits(&finite(w, "weight")?, ctx.digits)?);
    }
    let nodes = nodes
        .iter()
        .map(|v| format_digits(v, ctx.digits))
        .collect::<Result<_>>()?;
    Ok((nodes, weights))
}

/// What a [`ReferenceSet`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefKind {
    /// Zeros of `L⁽ᵅ⁾_{N+1}`.
    Node,
    /// `L⁽ᵅ⁾_N` at the doubles nearest the nodes.
    Poly,
    /// `L̂⁽ᵅ⁾_N` at the doubles nearest the nodes.
    Fun,
}

impl RefKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RefKind::Node => "node",
            RefKind::Poly => "poly",
            RefKind::Fun => "fun",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "node" => Some(RefKind::Node),
            "poly" => Some(RefKind::Poly),
            "fun" => Some(RefKind::Fun),
            _ => None,
        }
    }
}

/// Reference values for one `(α, N, kind)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub alpha: f64,
    pub n: usize,
    pub kind: RefKind,
    pub digits: usize,
    pub values: Vec<String>,
}

impl ReferenceSet {
    /// Values rounded to double.
    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|s| s.parse().unwrap_or(f64::NAN)).collect()
    }
}

/// Computes a reference set (no cache).
pub fn compute_reference(ctx: &HpContext, alpha: f64, n: usize, kind: RefKind) -> Result<ReferenceSet> {
    let values = match kind {
        RefKind::Node => hp_gauss_nodes(ctx, alpha, n)?,
        RefKind::Poly | RefKind::Fun => {
            let mut hp = Hp::new(ctx)?;
            let a = hp.f(alpha);
            let nodes = gauss_nodes_hp(ctx, alpha, n)?;
            let mut out = Vec::with_capacity(n + 1);
            for node in &nodes {
                let x = hp.f(to_f64(node));
                let (mut l, _) = hp.poly_top(&a, n, &x);
                if kind == RefKind::Fun {
                    let w = hp.half_weight(&x);
                    l = hp.mul(&l, &w);
                }
                out.push(format_digits(&finite(l, "reference value")?, ctx.digits)?);
            }
            out
        }
    };
    Ok(ReferenceSet {
        alpha,
        n,
        kind,
        digits: ctx.digits,
        values,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheMeta {
    version: u32,
    alpha: f64,
    n: usize,
    kind: RefKind,
    digits: usize,
    bits: usize,
    newton_rel_tol: String,
    evaluation_points: String,
}

/// Directory of cached reference sets.
#[derive(Debug, Clone)]
pub struct OracleCache {
    dir: PathBuf,
}

impl OracleCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The directory named by `LAGSPEC_ORACLE_CACHE`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn stem(alpha: f64, n: usize, kind: RefKind, digits: usize) -> String {
        format!("a{alpha}_n{n}_{}_d{digits}", kind.as_str())
    }

    /// Loads a set computed with at least `ctx.digits()` digits, rounding
    /// it to exactly that many.
    pub fn load(&self, ctx: &HpContext, alpha: f64, n: usize, kind: RefKind) -> Result<Option<ReferenceSet>> {
        let stem = Self::stem(alpha, n, kind, ctx.digits);
        let csv_path = self.dir.join(format!("{stem}.csv"));
        let meta_path = self.dir.join(format!("{stem}.meta.json"));
        if !csv_path.exists() || !meta_path.exists() {
            return Ok(None);
        }
        let meta: CacheMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
        if meta.version != CACHE_VERSION || meta.digits != ctx.digits {
            return Ok(None);
        }
        let mut rdr = csv::Reader::from_path(&csv_path)?;
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let bad = || Error::Io(format!("malformed cache row in {}", csv_path.display()));
            let row_alpha: f64 = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let row_n: usize = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let row_kind = rec.get(2).and_then(RefKind::parse).ok_or_else(bad)?;
            let idx: usize = rec.get(3).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let v = rec.get(4).ok_or_else(bad)?;
            if row_alpha != alpha || row_n != n || row_kind != kind || idx != values.len() {
                return Err(bad());
            }
            values.push(v.to_string());
        }
        if values.len() != n + 1 {
            return Ok(None);
        }
        Ok(Some(ReferenceSet {
            alpha,
            n,
            kind,
            digits: ctx.digits,
            values,
        }))
    }

    /// Writes the set and its metadata; files are replaced atomically.
    pub fn store(&self, ctx: &HpContext, set: &ReferenceSet) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let stem = Self::stem(set.alpha, set.n, set.kind, set.digits);
        let tag = format!("{}.{:?}", std::process::id(), std::thread::current().id());
        let tag: String = tag.chars().filter(|c| c.is_ascii_alphanumeric()).collect();

        let tmp = self.dir.join(format!(".{stem}.{tag}.csv"));
        {
            let mut w = csv::Writer::from_path(&tmp)?;
            w.write_record(["alpha", "N", "kind", "index", "value_decimal"])?;
            for (i, v) in set.values.iter().enumerate() {
                w.write_record([
                    set.alpha.to_string(),
                    set.n.to_string(),
                    set.kind.as_str().to_string(),
                    i.to_string(),
                    v.clone(),
                ])?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, self.dir.join(format!("{stem}.csv")))?;

        let meta = CacheMeta {
            version: CACHE_VERSION,
            alpha: set.alpha,
            n: set.n,
            kind: set.kind,
            digits: set.digits,
            bits: ctx.bits(),
            newton_rel_tol: ctx.newton_tol(),
            evaluation_points: "nearest double to each node".into(),
        };
        let tmp = self.dir.join(format!(".{stem}.{tag}.meta.json"));
        fs::write(&tmp, serde_json::to_string_pretty(&meta)?)?;
        fs::rename(&tmp, self.dir.join(format!("{stem}.meta.json")))?;
        Ok(())
    }
}

/// Cached lookup: loads from `cache` when present, otherwise computes and
/// stores.
pub fn reference_set(
    ctx: &HpContext,
    alpha: f64,
    n: usize,
    kind: RefKind,
    cache: Option<&OracleCache>,
) -> Result<ReferenceSet> {
    if let Some(c) = cache {
        if let Some(set) = c.load(ctx, alpha, n, kind)? {
            return Ok(set);
        }
    }
    let set = compute_reference(ctx, alpha, n, kind)?;
    if let Some(c) = cache {
        c.store(ctx, &set)?;
    }
    Ok(set)
}
