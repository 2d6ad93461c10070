use std::f64::consts::E;
use std::sync::Arc;

use proptest::prelude::*;

use strip_control::control::{
    cost_constants, empirical_observability_constant, h_conditions_check, hum_control, ControlModel, HumOptions,
    TimeQuadrature,
};
use strip_control::geometry::{estimate_thickness, SetDescription};
use strip_control::heat::{dissipation_check, kernel_strip, HeatState, KernelParams};
use strip_control::spectral::{analyze, synthesize, BandLimitedField};
use strip_control::strip_model::{build_domain, lattice_below_energy, Boundary, DomainConfig, FrequencyLattice, StripDomain};

fn domain(boundary: Boundary) -> StripDomain<f64> {
    build_domain(&DomainConfig {
        dim: 2,
        scale: 0.5,
        boundary,
        half_width: 4.0,
        transverse_cutoff: 16,
        longitudinal_cutoff: 64,
        step: 0.125,
    })
    .unwrap()
}

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Dirichlet), Just(Boundary::Neumann)]
}

fn lattice(d: &StripDomain<f64>, energy: f64) -> Arc<FrequencyLattice<f64>> {
    Arc::new(lattice_below_energy(d, energy).unwrap())
}

fn coefficients(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthesis_round_trips(bc in boundary(), seed in coefficients(40)) {
        let d = domain(bc);
        let lat = lattice(&d, 12.0);
        let c: Vec<f64> = (0..lat.len()).map(|i| seed[i % seed.len()]).collect();
        let f = BandLimitedField::on_lattice(&d, lat.clone(), c.clone()).unwrap();
        let g = synthesize(&f, &d).unwrap();
        let back = analyze(&g, &d, lat).unwrap();
        for (a, b) in back.coefficients().iter().zip(&c) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_is_a_contracting_semigroup(seed in coefficients(40), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let d = domain(Boundary::Dirichlet);
        let lat = lattice(&d, 20.0);
        let c: Vec<f64> = (0..lat.len()).map(|i| seed[i % seed.len()]).collect();
        let u = HeatState::new(lat, c).unwrap();
        let two = u.evolve(s).unwrap().evolve(t).unwrap();
        let one = u.evolve(s + t).unwrap();
        for (a, b) in two.coefficients().iter().zip(one.coefficients()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        prop_assert!(one.norm() <= u.norm() * (1.0 + 1e-14));
    }

    #[test]
    fn dissipation_bound_holds(seed in coefficients(40), e in 0.0f64..30.0, t in 1e-3f64..10.0) {
        let d = domain(Boundary::Dirichlet);
        let lat = lattice(&d, 30.0);
        let c: Vec<f64> = (0..lat.len()).map(|i| seed[i % seed.len()]).collect();
        let g = HeatState::new(lat, c).unwrap();
        let r = dissipation_check(&g, e, t).unwrap();
        prop_assert!(r.holds);
        prop_assert!(r.lhs <= r.rhs * (1.0 + 1e-12));
    }

    #[test]
    fn cost_constants_follow_closed_form(
        gamma in 1e-3f64..1.0,
        a0 in 0.1f64..10.0,
        a1 in 0.1f64..10.0,
        k in E..20.0,
        t in 0.01f64..10.0,
    ) {
        let r = cost_constants(gamma, &[a0, a1], k, t).unwrap();
        prop_assert!(r.c1 >= 3.0 * E);
        let expected = 4.0 * k * (a0 + a1 + 2.0) * ((2.0 * k).powi(2) / gamma).ln();
        prop_assert!((r.c1 - expected).abs() <= 1e-12 * expected);
        prop_assert!((r.c2 - 144.0 * r.c1 * r.c1).abs() <= 1e-12 * r.c2);
        let h = h_conditions_check(r.c1, r.tau0).unwrap();
        prop_assert!(h.ok);
    }

    #[test]
    fn stripes_have_exact_density(width in 0.25f64..1.75, offset in -1.0f64..1.0) {
        let d = domain(Boundary::Dirichlet);
        let s = SetDescription::stripes(&d, width, 2.0, offset);
        let cert = estimate_thickness(&s, &[d.width(), 2.0], &d, 0.125).unwrap();
        prop_assert!((cert.gamma_est - width / 2.0).abs() < 1e-12);
    }

    #[test]
    fn strip_kernel_is_symmetric_and_positive(
        bc in boundary(),
        t in 0.05f64..2.0,
        x in (0.01f64..3.13, -3.0f64..3.0),
        y in (0.01f64..3.13, -3.0f64..3.0),
    ) {
        let d = domain(bc);
        let p = KernelParams::default();
        let kxy = kernel_strip(t, &[x.0, x.1], &[y.0, y.1], &d, &p).unwrap();
        let kyx = kernel_strip(t, &[y.0, y.1], &[x.0, x.1], &d, &p).unwrap();
        prop_assert!(kxy > 0.0);
        prop_assert!((kxy - kyx).abs() <= 1e-12 * kxy.max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hum_cost_is_dominated_by_observability(
        seed in coefficients(30),
        width in 0.75f64..1.5,
        t in 0.3f64..2.0,
    ) {
        let d = domain(Boundary::Dirichlet);
        let lat = lattice(&d, 15.0);
        let set = SetDescription::stripes(&d, width, 2.0, 0.0);
        let model = ControlModel::new(&d, lat.clone(), &set).unwrap();
        let c: Vec<f64> = (0..lat.len()).map(|i| seed[i % seed.len()] + 1e-3).collect();
        let u0 = HeatState::new(lat, c).unwrap();
        let r = hum_control(&model, &u0, t, &HumOptions::default()).unwrap();
        prop_assert!(r.relative_residual <= 1e-6);
        let obs = empirical_observability_constant(&model, t, TimeQuadrature::Exact).unwrap();
        prop_assert!(r.cost <= obs.sqrt() * u0.norm() * (1.0 + 1e-4));
    }
}
