mod common;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use lagspec::oracle::{hp_gauss_nodes, hp_gauss_rule, HpContext, RefKind};
use lagspec::quadrature::{
    gauss_radau_rule, gauss_rule, integrate, nodes_eigen_seed, refine_newton_with, NewtonConfig, WeightForm,
};
use lagspec::recurrence::RecurrenceKind;

use common::{max_rel_err, reference, rel_err};

#[test]
fn extended_precision_rule_integrates_x20() {
    let ctx = HpContext::default();
    let (nodes, weights) = hp_gauss_rule(&ctx, 0, 16).unwrap();
    let p = 160;
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().unwrap();
    let parse = |s: &str, cc: &mut Consts| BigFloat::parse(s, Radix::Dec, p, rm, cc);
    let mut sum = BigFloat::from_f64(0.0, p);
    for (x, w) in nodes.iter().zip(&weights) {
        let x = parse(x, &mut cc);
        let w = parse(w, &mut cc);
        let mut xp = BigFloat::from_f64(1.0, p);
        for _ in 0..20 {
            xp = xp.mul(&x, p, rm);
        }
        sum = sum.add(&w.mul(&xp, p, rm), p, rm);
    }
    let fact = parse("2432902008176640000", &mut cc);
    let rel = sum.sub(&fact, p, rm).div(&fact, p, rm).abs();
    let tol = parse("1e-20", &mut cc);
    assert!(rel.cmp(&tol).unwrap() <= 0, "relative error {rel}");
}

#[test]
fn two_point_nodes() {
    let nodes = hp_gauss_nodes(&HpContext::default(), 0.0, 1).unwrap();
    let s2 = 2f64.sqrt();
    assert!(rel_err(nodes[0].parse().unwrap(), 2.0 - s2) < 1e-15);
    assert!(nodes[1].starts_with("3.4142135623730950488016"));
}

#[test]
fn double_rule_matches_extended_rule() {
    for n in [4usize, 15, 40] {
        let (hn, hw) = hp_gauss_rule(&HpContext::default(), 1, n).unwrap();
        let hn: Vec<f64> = hn.iter().map(|s| s.parse().unwrap()).collect();
        let hw: Vec<f64> = hw.iter().map(|s| s.parse().unwrap()).collect();
        let r = gauss_rule(1.0, n).unwrap();
        assert!(max_rel_err(&r.nodes, &hn) <= 4e-16, "nodes at N = {n}");
        assert!(max_rel_err(&r.weights, &hw) <= 1e-13, "weights at N = {n}");
    }
}

#[test]
fn newton_on_smallest_nodes_beats_standard_recurrence() {
    let refs = reference(0.0, 256, RefKind::Node);
    let seeds = nodes_eigen_seed(0.0, 256).unwrap();
    let cfg = NewtonConfig::default();
    let modi = refine_newton_with(RecurrenceKind::Modified, 0.0, 256, &seeds, &cfg).unwrap();
    let stdr = refine_newton_with(RecurrenceKind::Standard, 0.0, 256, &seeds, &cfg).unwrap();
    let m = max_rel_err(&modi.nodes[..8], &refs[..8]);
    let s = max_rel_err(&stdr.nodes[..8], &refs[..8]);
    assert!(s / m >= 100.0, "standard {s:e}, modified {m:e}");
    // seeds near the origin carry several wrong trailing digits
    assert!(max_rel_err(&seeds[..8], &refs[..8]) > 1e-14);
}

#[test]
fn exactness_against_moments() {
    let r = gauss_rule(0.0, 8).unwrap();
    assert!(rel_err(integrate(&r, |x| x * x * x, WeightForm::PolyWeighted).unwrap(), 6.0) <= 1e-13);
    let r = gauss_rule(2.0, 10).unwrap();
    assert!(rel_err(integrate(&r, |_| 1.0, WeightForm::PolyWeighted).unwrap(), 2.0) <= 1e-14);
    let r = gauss_radau_rule(0.0, 64).unwrap();
    let mut ln_fact = 0.0_f64;
    for k in 0..=128 {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        // x^k e^{−x}/k! in function form, so every moment is 1
        let f = |x: f64| match (x == 0.0, k) {
            (true, 0) => 1.0,
            (true, _) => 0.0,
            _ => (k as f64 * x.ln() - x - ln_fact).exp(),
        };
        let got = integrate(&r, f, WeightForm::FunctionForm).unwrap();
        assert!(rel_err(got, 1.0) <= 1e-12, "x^{k}: {got}");
    }
}

#[test]
fn largest_and_smallest_node_asymptotics() {
    for n in [64usize, 128, 256, 512, 1024] {
        let r = gauss_rule(0.5, n).unwrap();
        let top = r.nodes[n];
        assert!((top - (4.0 * n as f64 + 2.0 * 0.5 + 6.0)).abs() / (n as f64).cbrt() <= 10.0);
        for (j, &x) in r.nodes.iter().enumerate().take_while(|(_, &x)| x < 1.0) {
            let v = x.sqrt() * 2.0 * (n as f64 + 1.0).sqrt() / ((j as f64 + 1.0) * std::f64::consts::PI);
            assert!((0.5..=2.0).contains(&v), "N = {n}, j = {j}: {v}");
        }
    }
}

#[test]
fn f32_rules_are_usable() {
    let r = gauss_rule(0.0_f32, 20).unwrap();
    let total: f32 = r.weights.iter().sum();
    assert!((total - 1.0).abs() < 1e-5);
    let d = gauss_rule(0.0_f64, 20).unwrap();
    for (a, b) in r.nodes.iter().zip(&d.nodes) {
        assert!(rel_err(*a as f64, *b) < 1e-5);
    }
}
