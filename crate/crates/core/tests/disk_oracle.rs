mod common;

use magbound_core::disk::{fiber_mu1, FiberProblem};

#[test]
fn fiber_solver_matches_shooting_oracle() {
    let samples = [(0.5, 0, 1.0), (0.9, 0, 1.0), (1.0, 1, 1.0), (0.5, -1, 1.5), (2.0, 2, 1.0)];
    for (b, m, r) in samples {
        let oracle = common::shooting_fiber_mu1(b, m, r, 1_000_000);
        let got = fiber_mu1(&FiberProblem::new(b, m, r)).unwrap().mu;
        let rel = (got - oracle).abs() / oracle;
        println!("b = {b}, m = {m}, R = {r}: fiber {got:.15e}, shooting {oracle:.15e}, rel {rel:.2e}");
        assert!(rel < 1e-8, "b = {b}, m = {m}, R = {r}: {got} vs {oracle} ({rel:.2e})");
    }
}
