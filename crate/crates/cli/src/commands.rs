use anyhow::Result;
use serde_json::json;

use lagspec::errmodel::{
    beta_n, bound_series, measured_trajectory, simulate_with, ErrorBoundInput, Regime, SimConfig, DEFAULT_EPS,
};
use lagspec::oracle::{reference_set, HpContext, OracleCache, RefKind};
use lagspec::quadrature::{gauss_radau_rule, gauss_rule};
use lagspec::recurrence::{
    eval_fun_stable, eval_fun_stable_series, eval_poly_modified, eval_poly_standard, LagParams, RecurrenceKind,
    StableEvalConfig,
};
use lagspec::spectral::{argmin_beta, beta_sweep, error_norms, solve, Lifting, MRule, ModelProblem, TestCase, Trig};
use lagspec::Error;

use crate::output::{emit, json_bytes, Cell, Format, Table};
use crate::{
    CaseArg, CaseArgs, Command, CompareArgs, ErrlabArgs, EvalArgs, ModeArg, QuadArgs, RuleArg, SolveArgs, SweepArgs,
    Target, TrigArg,
};

/// 2 for bad input, 3 for numerical failure.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Domain(_) | Error::Usage(_)) => 2,
        _ => 3,
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Quad(a) => quad(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Errlab(a) => errlab(a),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Usage(msg.into()).into()
}

fn quad(a: QuadArgs) -> Result<()> {
    let rule = match a.kind {
        RuleArg::Gauss => gauss_rule(a.alpha, a.n)?,
        RuleArg::Radau => gauss_radau_rule(a.alpha, a.n)?,
    };
    if !rule.fallback.is_empty() {
        eprintln!("lagspec: Newton refinement skipped at nodes {:?}", rule.fallback);
    }
    let mut t = Table::new(&["index", "node", "weight", "fun_weight"]);
    for j in 0..rule.len() {
        t.push(vec![
            j.into(),
            rule.nodes[j].into(),
            rule.weights[j].into(),
            rule.fun_weights[j].into(),
        ]);
    }
    emit(&t.render(a.output.format)?, a.output.out.as_deref())
}

fn eval(a: EvalArgs) -> Result<()> {
    let p = LagParams::new(a.alpha, a.n)?;
    let std = eval_poly_standard(p, a.x)?;
    let modi = eval_poly_modified(p, a.x)?;
    let fun = eval_fun_stable_series(p, a.x, &StableEvalConfig::default())?;
    let mut t = Table::new(&["k", "poly_standard", "poly_modified", "fun_stable"]);
    for k in 0..=a.n {
        t.push(vec![
            k.into(),
            std.values[k].into(),
            modi.values[k].into(),
            fun.values[k].into(),
        ]);
    }
    emit(&t.render(a.output.format)?, a.output.out.as_deref())
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn compare(a: CompareArgs) -> Result<()> {
    let ctx = HpContext::new(a.digits)?;
    let cache = OracleCache::from_env();
    let kind = match a.target {
        Target::Poly => RefKind::Poly,
        Target::Fun => RefKind::Fun,
    };
    let nodes = reference_set(&ctx, a.alpha, a.n, RefKind::Node, cache.as_ref())?.as_f64();
    let refs = reference_set(&ctx, a.alpha, a.n, kind, cache.as_ref())?.as_f64();
    let p = LagParams::new(a.alpha, a.n)?;
    let cfg = StableEvalConfig::default();
    let mut t = Table::new(&[
        "index",
        "node",
        "rel_err_standard",
        "rel_err_modified",
        "rel_err_stable",
    ]);
    for (j, (&x, &r)) in nodes.iter().zip(&refs).enumerate() {
        let s = eval_poly_standard(p, x)?.last();
        let m = eval_poly_modified(p, x)?.last();
        let f = eval_fun_stable(p, x, &cfg)?;
        // functions are the polynomials times e^{-x/2}, formed naively for
        // the two recurrences; the stable path never forms the product
        let w = (-0.5 * x).exp();
        let (s, m, f) = match a.target {
            Target::Poly => (s, m, f / w),
            Target::Fun => (s * w, m * w, f),
        };
        t.push(vec![
            j.into(),
            x.into(),
            rel(s, r).into(),
            rel(m, r).into(),
            rel(f, r).into(),
        ]);
    }
    emit(&t.render(a.output.format)?, a.output.out.as_deref())
}

fn problem(c: &CaseArgs) -> Result<ModelProblem<f64>> {
    let case = match c.case {
        CaseArg::U1 => TestCase::U1 { k: c.k.unwrap_or(2.0) },
        CaseArg::U2 => TestCase::U2 { r: c.r.unwrap_or(2.5) },
        CaseArg::U3 => TestCase::U3 {
            k: c.k.unwrap_or(2.0),
            r: c.r.unwrap_or(3.5),
            trig: match c.trig {
                TrigArg::Sin => Trig::Sin,
                TrigArg::Cos => Trig::Cos,
            },
        },
    };
    Ok(case.problem(c.gamma, Lifting { length: c.lifting })?)
}

const NORM_HEADER: [&str; 5] = ["N", "beta", "l2_error", "h1_error", "error"];

fn solve_cmd(a: SolveArgs) -> Result<()> {
    let p = problem(&a.case)?;
    let m = a.m.unwrap_or(2 * a.n);
    let sol = solve(&p, a.n, m, a.beta)?;
    let r = error_norms(&sol, &p)?;
    if let Some((l2, h1)) = r.diagnostic {
        eprintln!("lagspec: norms move by more than 1% on a finer rule (l2 {l2:e}, h1 {h1:e})");
    }
    let mut t = Table::new(&NORM_HEADER);
    t.push(vec![
        a.n.into(),
        a.beta.into(),
        r.l2_error.into(),
        r.h1_semi_error.into(),
        Cell::Empty,
    ]);
    emit(&t.render(a.output.format)?, a.output.out.as_deref())
}

fn sweep(a: SweepArgs) -> Result<()> {
    if a.n_list.is_empty() || a.beta_list.is_empty() {
        return Err(usage("--n-list and --beta-list must be non-empty"));
    }
    let p = problem(&a.case)?;
    let rule = a.m.map_or(MRule::default(), MRule::Fixed);
    let cells = beta_sweep(&p, &a.n_list, &a.beta_list, rule)?;
    let mut t = Table::new(&NORM_HEADER);
    for c in &cells {
        let row = match &c.result {
            Ok(r) => vec![
                c.n.into(),
                c.beta.into(),
                r.l2_error.into(),
                r.h1_semi_error.into(),
                Cell::Empty,
            ],
            Err(e) => vec![
                c.n.into(),
                c.beta.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Text(e.clone()),
            ],
        };
        t.push(row);
    }
    let argmin: Vec<_> = argmin_beta(&cells)
        .into_iter()
        .map(|(n, beta)| json!({"N": n, "beta": beta}))
        .collect();
    match a.output.format {
        Format::Csv => {
            emit(&t.to_csv()?, a.output.out.as_deref())?;
            let summary = json_bytes(&json!({ "argmin": argmin }))?;
            match &a.summary {
                Some(path) => emit(&summary, Some(path))?,
                None => eprint!("{}", String::from_utf8_lossy(&summary)),
            }
        }
        Format::Json => {
            let doc = json!({ "cells": t.to_json(), "argmin": argmin });
            emit(&json_bytes(&doc)?, a.output.out.as_deref())?;
        }
    }
    Ok(())
}

fn errlab(a: ErrlabArgs) -> Result<()> {
    if a.n < 2 {
        return Err(usage("errlab needs --n >= 2"));
    }
    if !(a.zeta_scale >= 0.0 && a.e1_scale >= 0.0) {
        return Err(usage("--zeta-scale and --e1-scale must be non-negative"));
    }
    // checks the hypotheses of the bound before any work
    let expansive = ErrorBoundInput::new(a.n, a.alpha, a.x, a.eta).regime()? == Regime::Expansive;
    if !(a.x > 0.0) {
        return Err(usage("errlab needs x > 0"));
    }
    let ctx = HpContext::new(a.digits)?;
    let mode = match a.mode {
        ModeArg::Standard => RecurrenceKind::Standard,
        ModeArg::Modified => RecurrenceKind::Modified,
    };
    let cfg = SimConfig {
        zeta_scale: a.zeta_scale,
        e1_scale: a.e1_scale,
        ..SimConfig::default()
    };
    let sim = simulate_with(a.alpha, a.n, a.x, mode, a.seed, &cfg)?;
    let meas = measured_trajectory(&ctx, a.alpha, a.n, a.x, mode)?;
    // one bound that covers both sources
    let zeta: Vec<f64> = sim
        .zeta
        .iter()
        .zip(&meas.zeta)
        .map(|(s, m)| s.abs().max(m.abs()))
        .collect();
    let e1 = sim.e[1].abs().max(meas.e[1].abs());
    let bounds = bound_series(a.alpha, a.x, a.eta, e1, &zeta, DEFAULT_EPS)?;
    let mut t = Table::new(&["n", "measured_err", "simulated_err", "theory_bound", "beta_n"]);
    for (k, &(_, bound)) in bounds.iter().enumerate() {
        // the growth factor only enters the expansive bound
        let b = match (expansive, k) {
            (false, _) => Cell::Empty,
            (true, 0) => Cell::Float(1.0),
            (true, _) => Cell::Float(beta_n(k - 1, a.alpha, a.x, a.eta)),
        };
        t.push(vec![
            k.into(),
            meas.e[k].abs().into(),
            sim.e[k].abs().into(),
            bound.into(),
            b,
        ]);
    }
    emit(&t.render(a.output.format)?, a.output.out.as_deref())
}
