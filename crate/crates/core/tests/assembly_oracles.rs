#![allow(clippy::needless_range_loop)]

mod common;

use nalgebra::Vector2;
use phdisc_core::linalg::max_abs;
use phdisc_core::{build_mesh, build_uniform_mesh, compose_chain, sparsity_report, Domain};
use rand::Rng;

#[test]
fn explicit_model_matches_element_coupling() {
    let mut rng = common::rng(21);
    for n in 1..=4 {
        for sigma in [0.0, 0.8] {
            let mesh = build_uniform_mesh(Domain::new(0.0, 2.0).unwrap(), n).unwrap();
            let model = compose_chain(&mesh, &[sigma]).unwrap();
            for _ in 0..20 {
                let g = common::random_vector(&mut rng, 4 * n);
                let u = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let (xdot, y) = model.evaluate(&g, &u);
                let (bx, by) = common::brute_force(&model, &g, &u);
                let (ix, iy) = model.evaluate_implicit(&g, &u).unwrap();
                assert!((&xdot - bx).amax() < 1e-10, "n={n}");
                assert!((y - by).amax() < 1e-10);
                assert!((&xdot - ix).amax() < 1e-10);
                assert!((y - iy).amax() < 1e-10);
            }
        }
    }
}

#[test]
fn two_element_internal_power_cancels() {
    let mut rng = common::rng(22);
    let mesh = build_uniform_mesh(Domain::new(0.0, 1.0).unwrap(), 2).unwrap();
    let model = compose_chain(&mesh, &[0.0]).unwrap();
    let a = model.a.to_dense();
    assert!(max_abs(&(&a + a.transpose())) < 1e-12);
    for _ in 0..50 {
        let g = common::random_vector(&mut rng, 8);
        let u = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let w = model.solve_interconnection(&g, &u).unwrap();
        let ports = model.port_values(&w);
        let storage: f64 = ports.iter().map(|p| p.e_s.dot(&p.f_s)).sum();
        let external = ports[0].e_e[0] * ports[0].f_e[0] + ports[1].e_e[1] * ports[1].f_e[1];
        assert!((storage + external).abs() < 1e-10);
        let internal = ports[0].e_e[1] * ports[0].f_e[1] + ports[1].e_e[0] * ports[1].f_e[0];
        assert!(internal.abs() < 1e-10);
    }
}

#[test]
fn global_power_balance() {
    let mut rng = common::rng(23);
    let model = common::line_model(12);
    assert!(model.conservative_residual() < 1e-10);
    for _ in 0..50 {
        let g = common::random_vector(&mut rng, 48);
        let u = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (xdot, y) = model.evaluate(&g, &u);
        assert!((g.dot(&xdot) - y.dot(&u)).abs() < 1e-10);
    }
}

#[test]
fn nonuniform_meshes_are_conservative() {
    let domain = Domain::new(-1.0, 4.0).unwrap();
    for bps in [vec![-1.0, -0.9, 0.5, 0.55, 2.0, 4.0], vec![-1.0, 1.0, 1.001, 3.9, 4.0]] {
        let mesh = build_mesh(domain, bps).unwrap();
        let model = compose_chain(&mesh, &[0.0]).unwrap();
        assert!(model.conservative_residual() <= 1e-10);
    }
}

#[test]
fn dissipative_aggregate_is_passive() {
    let mut rng = common::rng(24);
    for n in [1, 3, 8] {
        let sigma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let mesh = build_uniform_mesh(Domain::new(0.0, 5.0).unwrap(), n).unwrap();
        let model = compose_chain(&mesh, &sigma).unwrap();
        assert!(model.min_dissipation_eigenvalue() >= -1e-8);
    }
}

#[test]
fn twenty_element_line() {
    let model = common::line_model(20);
    assert_eq!(model.state_dim(), 80);
    let r = sparsity_report(&model, 1e-12);
    assert!(r.a.zero_fraction() >= 0.70);
    assert_eq!(r.reference_zero_fraction, 0.7375);
    assert!(model.interconnection().condition() < 1e12);
}

#[test]
fn kernel_sparsity_bound_holds() {
    for n in 2..=10 {
        let r = sparsity_report(&common::line_model(n), 1e-12);
        assert!(r.kernel.zero_fraction() >= r.kernel_bound, "n={n}");
    }
}
