use std::sync::Arc;

use lagspec::spectral::{
    argmin_beta, assemble_system, beta_sweep, error_norms, optimal_beta_exponential, project_rhs, solve, ErrorReport,
    Lifting, MRule, ModelProblem, SpectralSolution, TestCase, Trig,
};
use lagspec::Error;

/// `ψ_2(y) = e^{−y/2} p(y)` with `p = L_2 − L_3 = y − y² + y³/6`, and its
/// first two derivatives.
fn psi2(y: f64) -> (f64, f64, f64) {
    let e = (-0.5 * y).exp();
    let p = y - y * y + y * y * y / 6.0;
    let dp = 1.0 - 2.0 * y + 0.5 * y * y;
    let d2p = y - 2.0;
    (e * p, e * (dp - 0.5 * p), e * (d2p - dp + 0.25 * p))
}

fn u1(n: usize, beta: f64) -> ErrorReport {
    let p = TestCase::U1 { k: 2.0 }.problem(2.0, Lifting::default()).unwrap();
    let sol = solve(&p, n, 2 * n, beta).unwrap();
    error_norms(&sol, &p).unwrap()
}

#[test]
fn u1_converges_at_optimal_beta() {
    let beta = optimal_beta_exponential(-1.0, 2.0).unwrap();
    assert!((beta - 2.0 * 5f64.sqrt()).abs() < 1e-15);
    let r = u1(128, beta);
    assert!(r.l2_error < 1e-10, "{:e}", r.l2_error);
}

#[test]
fn error_drops_tenfold_per_doubling() {
    let beta = 2.0 * 5f64.sqrt();
    let e: Vec<f64> = [32, 64, 128].iter().map(|&n| u1(n, beta).l2_error).collect();
    // past about 1e-13 the error is round-off and stops falling
    for w in e.windows(2).filter(|w| w[0] > 1e-13) {
        assert!(w[0] / w[1] >= 10.0, "{e:?}");
    }
    assert!(e[2] <= 1e-13, "{e:?}");
}

#[test]
fn first_basis_function_projects_onto_first_column() {
    // u = ψ_0(βx) = βx e^{−βx/2}
    let (beta, gamma) = (2.0_f64, 3.0_f64);
    let p = ModelProblem::manufactured(
        gamma,
        move |x| beta * x * (-0.5 * beta * x).exp(),
        move |x| beta * (1.0 - 0.5 * beta * x) * (-0.5 * beta * x).exp(),
        move |x| beta * beta * (0.25 * beta * x - 1.0) * (-0.5 * beta * x).exp(),
    )
    .unwrap();
    let n = 6;
    let b: Vec<f64> = project_rhs(&p, n, 12, beta).unwrap();
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let col = assemble_system(n, gamma / (beta * beta)).unwrap().mul_vec(&e0);
    for (x, y) in b.iter().zip(&col) {
        assert!((x - y).abs() <= 1e-11, "{b:?} vs {col:?}");
    }
}

#[test]
fn second_basis_function_is_recovered() {
    let beta = 1.5_f64;
    let p = ModelProblem::manufactured(
        2.0,
        move |x| psi2(beta * x).0,
        move |x| beta * psi2(beta * x).1,
        move |x| beta * beta * psi2(beta * x).2,
    )
    .unwrap();
    let sol = solve(&p, 8, 16, beta).unwrap();
    for (k, c) in sol.coeffs.iter().enumerate() {
        let want = if k == 2 { 1.0 } else { 0.0 };
        assert!((c - want).abs() <= 1e-10, "coefficient {k}: {c}");
    }
}

#[test]
fn zero_data_and_determinism() {
    let p = ModelProblem::new(1.0, |_| 0.0).unwrap();
    assert!(project_rhs(&p, 10, 20, 1.0).unwrap().iter().all(|&v| v == 0.0));

    let p = TestCase::U1 { k: 2.0 }.problem(2.0, Lifting::default()).unwrap();
    let a: Vec<f64> = project_rhs(&p, 8, 16, 1.0).unwrap();
    let b: Vec<f64> = project_rhs(&p, 8, 16, 1.0).unwrap();
    assert!(a.iter().all(|v| v.is_finite()));
    assert_eq!(
        a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn self_comparison_is_exact() {
    let p = TestCase::U1 { k: 2.0 }.problem(2.0, Lifting::default()).unwrap();
    let sol = Arc::new(solve(&p, 24, 48, 4.0).unwrap());
    let (s1, s2) = (sol.clone(), sol.clone());
    let q = ModelProblem::new(2.0, |_| 0.0)
        .unwrap()
        .with_exact(move |x| s1.eval(x).unwrap(), move |x| s2.eval_deriv(x).unwrap());
    let r = error_norms(&sol, &q).unwrap();
    assert!(r.l2_error <= 1e-13 && r.h1_semi_error <= 1e-13, "{r:?}");
}

#[test]
fn norms_transfer_with_beta() {
    // the same v and v_N seen through two scalings
    let w = |y: f64| (y * (-y).exp(), (1.0 - y) * (-y).exp());
    let coeffs = vec![0.3, -0.1, 0.05, 0.02];
    let report = |beta: f64| {
        let sol = SpectralSolution {
            n: 4,
            m: 8,
            beta,
            gamma: 1.0,
            coeffs: coeffs.clone(),
        };
        let p = ModelProblem::new(1.0, |_| 0.0)
            .unwrap()
            .with_exact(move |x| w(beta * x).0, move |x| beta * w(beta * x).1);
        error_norms(&sol, &p).unwrap()
    };
    let (a, b) = (report(1.0), report(4.0));
    assert!((a.l2_error / b.l2_error - 2.0).abs() < 1e-12);
    assert!((b.h1_semi_error / a.h1_semi_error - 2.0).abs() < 1e-12);
}

#[test]
fn single_cell_sweep_matches_direct_solve() {
    let p = TestCase::U1 { k: 2.0 }.problem(2.0, Lifting::default()).unwrap();
    let cells = beta_sweep(&p, &[40], &[3.0], MRule::default()).unwrap();
    assert_eq!(cells.len(), 1);
    let direct = error_norms(&solve(&p, 40, 80, 3.0).unwrap(), &p).unwrap();
    assert_eq!(cells[0].result.as_ref().unwrap(), &direct);
}

#[test]
fn u3_best_beta_does_not_move_with_n() {
    let p = TestCase::U3 {
        k: 2.0,
        r: 3.5,
        trig: Trig::Sin,
    }
    .problem(2.0, Lifting::default())
    .unwrap();
    let betas = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let cells = beta_sweep(&p, &[64, 128, 256], &betas, MRule::default()).unwrap();
    let best: Vec<usize> = argmin_beta(&cells)
        .iter()
        .map(|&(_, b)| betas.iter().position(|&v| v == b).unwrap())
        .collect();
    let (lo, hi) = (best.iter().min().unwrap(), best.iter().max().unwrap());
    assert!(hi - lo <= 1, "argmin indices {best:?}");
}

#[test]
fn norms_need_exact_solution() {
    let p = ModelProblem::new(1.0, |x: f64| (-x).exp()).unwrap();
    let sol = solve(&p, 8, 16, 1.0).unwrap();
    assert!(matches!(error_norms(&sol, &p), Err(Error::Usage(_))));
}

#[test]
fn rejects_bad_parameters() {
    let p = ModelProblem::new(1.0, |_| 1.0).unwrap();
    assert!(solve(&p, 8, 8, 1.0).is_err());
    assert!(solve(&p, 8, 16, -1.0).is_err());
    assert!(ModelProblem::new(0.0, |_: f64| 1.0).is_err());
    assert!(optimal_beta_exponential(0.5, 1.0).is_err());
    assert!((optimal_beta_exponential(-3.0, 4.0).unwrap() - 10.0).abs() < 1e-15);
}
