mod common;

use hetspd::genmat::{generate_inputs, generate_rhs};
use hetspd::{factorize, generate_spd, solve_cg, BlockVector, KernelParams, SolverConfig};

#[test]
fn default_kernel_keeps_cg_iterations_bounded() {
    for (n, b) in [(256, 32), (1024, 64), (4096, 128)] {
        let a = generate_spd(n, b, &KernelParams::default(), 42).unwrap();
        let rhs = BlockVector::from_slice(&generate_rhs(n, 42), b).unwrap();
        let cfg = SolverConfig { block_size: b, eps: 1e-6, max_iters: 500, fraction: 0.5, ..Default::default() };
        let out = solve_cg(&a, &rhs, &cfg).unwrap();
        assert!(out.stats.converged, "n={n}: no convergence in 500 iterations");
        assert!(out.stats.true_residual <= 2.0 * cfg.eps * out.stats.r0_norm, "n={n}");
    }
}

#[test]
fn generated_matrix_matches_the_kernel_formula() {
    let (n, dim) = (70, 3);
    let params = KernelParams { signal_variance: 2.0, length_scale: Some(1.5), noise: 0.1, dim };
    let a = generate_spd(n, 16, &params, 11).unwrap();
    let x = generate_inputs(n, dim, 11);
    for p in 0..n {
        for q in 0..n {
            let d2: f64 = (0..dim).map(|k| (x[p * dim + k] - x[q * dim + k]).powi(2)).sum();
            let want = 2.0 * (-d2 / (2.0 * 1.5 * 1.5)).exp() + if p == q { 0.1 } else { 0.0 };
            let got = a.element(p, q).unwrap();
            assert!((got - want).abs() <= 1e-15 * want.abs().max(1.0), "({p},{q}): {got} vs {want}");
        }
    }
}

#[test]
fn generation_is_independent_of_block_size() {
    let p = KernelParams::default();
    let a = generate_spd(150, 16, &p, 3).unwrap();
    let b = generate_spd(150, 64, &p, 3).unwrap();
    assert_eq!(common::bits(&common::lower_of(&a)), common::bits(&common::lower_of(&b)));
}

#[test]
fn generated_matrices_factor_without_pivot_failure() {
    for seed in [1, 42, 1000] {
        let a = generate_spd(256, 32, &KernelParams::default(), seed).unwrap();
        factorize(&a, &SolverConfig { block_size: 32, ..Default::default() }).unwrap();
    }
}
