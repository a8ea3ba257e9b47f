use mhd_rv::bench::{self, BenchmarkConfig, Problem};
use mhd_rv::fe_space::FESpace;
use mhd_rv::mesh::{Domain, Mesh};
use mhd_rv::physics::{euler_flux, primitives, wave_speeds, ConservedState};
use proptest::prelude::*;

fn state() -> impl Strategy<Value = (f64, [f64; 2], f64, [f64; 2])> {
    (
        0.01f64..10.0,
        (-5.0f64..5.0, -5.0f64..5.0),
        0.01f64..10.0,
        (-3.0f64..3.0, -3.0f64..3.0),
    )
        .prop_map(|(rho, (ux, uy), p, (bx, by))| (rho, [ux, uy], p, [bx, by]))
}

proptest! {
    #[test]
    fn primitive_round_trip((rho, u, p, b) in state(), gamma in 1.1f64..3.0) {
        let s = ConservedState::from_primitives(rho, u, p, b, gamma);
        let w = primitives(&s, gamma).unwrap();
        prop_assert!((w.rho - rho).abs() <= 1e-14 * rho);
        prop_assert!((w.u[0] - u[0]).abs() <= 1e-12 * (1.0 + u[0].abs()));
        prop_assert!((w.u[1] - u[1]).abs() <= 1e-12 * (1.0 + u[1].abs()));
        prop_assert!((w.p - p).abs() <= 1e-9 * (1.0 + s.energy));
        prop_assert!((w.t - w.p / w.rho).abs() <= 1e-14 * w.t.abs().max(1e-300));
    }

    #[test]
    fn wave_speeds_are_ordered((rho, u, p, b) in state(), angle in 0.0f64..std::f64::consts::TAU) {
        let gamma = 5.0 / 3.0;
        let e = [angle.cos(), angle.sin()];
        let s = ConservedState::from_primitives(rho, u, p, b, gamma);
        let w = wave_speeds(&s, gamma, e).unwrap();
        prop_assert!(w.lambda.windows(2).all(|x| x[0] <= x[1] + 1e-12));
        prop_assert!(w.cs <= w.b.abs() + 1e-12 && w.b.abs() <= w.cf + 1e-12);
        let va2 = (b[0] * b[0] + b[1] * b[1]) / rho;
        prop_assert!((w.cf * w.cf + w.cs * w.cs - (w.a2 + va2)).abs() <= 1e-9 * (w.a2 + va2));
    }

    #[test]
    fn mass_flux_is_momentum((rho, u, p, b) in state()) {
        let s = ConservedState::from_primitives(rho, u, p, b, 1.4);
        let f = euler_flux(&s, 1.4).unwrap();
        prop_assert!((f[0][0] - s.m[0]).abs() <= 1e-15 * s.m[0].abs().max(1.0));
        prop_assert!((f[0][1] - s.m[1]).abs() <= 1e-15 * s.m[1].abs().max(1.0));
    }

    #[test]
    fn polynomials_of_the_element_degree_are_reproduced(k in 1usize..=3, n in 1usize..5, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let mesh = Mesh::structured(Domain::rectangle([0.0, 0.0], [1.0, 1.0]), &[n, n], 2).unwrap();
        let space = FESpace::new(mesh, k).unwrap();
        let f = |p: [f64; 2]| (1.0 + p[0] - 2.0 * p[1]).powi(k as i32);
        let coeffs = space.interpolate(f);
        let v = space.eval_at_point(&coeffs, [x, y]).unwrap();
        prop_assert!((v - f([x, y])).abs() <= 1e-11);
    }
}

#[test]
fn cell_measures_sum_to_the_domain() {
    for (k, n) in [(1, 3), (2, 4), (3, 5)] {
        let mesh = Mesh::structured(Domain::rectangle([-1.0, 0.0], [2.0, 0.5]), &[n, n + 1], 2).unwrap();
        let space = FESpace::new(mesh, k).unwrap();
        let area: f64 = (0..space.num_cells())
            .flat_map(|c| (0..space.quad().nq()).map(move |q| (c, q)))
            .map(|(c, q)| space.jxw(c, q))
            .sum();
        assert!((area - 1.5).abs() < 1e-13, "{area}");
        assert_eq!(space.num_cells(), 2 * n * (n + 1));
    }
}

#[test]
fn short_periodic_runs_conserve_mass() {
    for (problem, k, cells) in [(Problem::SmoothWave, 2, 8), (Problem::OrszagTang, 1, 12)] {
        let mut c = BenchmarkConfig::new(problem);
        c.degree = k;
        c.cells = vec![cells];
        c.final_time = 0.05;
        let o = bench::run_benchmark(&c).unwrap();
        assert!(o.completed());
        assert!((o.final_mass - o.initial_mass).abs() <= 1e-12 * o.initial_mass, "{problem}: {} -> {}", o.initial_mass, o.final_mass);
        assert!(o.max_viscosity_ratio <= 1.0 + 1e-12);
    }
}

#[test]
fn one_dimensional_run_keeps_far_field_states() {
    let mut c = BenchmarkConfig::new(Problem::BrioWu);
    c.cells = vec![200];
    c.final_time = 0.05;
    let o = bench::run_benchmark(&c).unwrap();
    assert!(o.completed());
    let rho = o.state.comp(0);
    assert!((rho[0] - 1.0).abs() < 1e-12);
    assert!((rho[rho.len() - 1] - 0.125).abs() < 1e-12);
    assert!(o.min_rho() > 0.0 && o.min_p() > 0.0);
}
