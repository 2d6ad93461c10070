use std::sync::Arc;

use strip_control::control::{cost_constants, hum_control, HumOptions};
use strip_control::geometry::estimate_thickness;
use strip_control::spectral::empirical_spectral_constant;
use strip_control::strip_model::lattice_below_energy;
use strip_control::{build_domain, ControlModel, DomainConfig, HeatState, SetDescription};

fn config<T: strip_control::Scalar>() -> DomainConfig<T> {
    DomainConfig {
        dim: 2,
        scale: T::lit(0.5),
        boundary: strip_control::Boundary::Dirichlet,
        half_width: T::lit(4.0),
        transverse_cutoff: 16,
        longitudinal_cutoff: 64,
        step: T::lit(0.125),
    }
}

#[test]
fn single_precision_tracks_double() {
    let d64 = build_domain(&config::<f64>()).unwrap();
    let d32 = build_domain(&config::<f32>()).unwrap();
    let s64 = SetDescription::stripes(&d64, 1.0, 2.0, 0.0);
    let s32 = SetDescription::stripes(&d32, 1.0f32, 2.0, 0.0);

    let g64 = estimate_thickness(&s64, &[d64.width(), 2.0], &d64, 0.125).unwrap().gamma_est;
    let g32 = estimate_thickness(&s32, &[d32.width(), 2.0], &d32, 0.125).unwrap().gamma_est;
    assert_eq!(g64, 0.5);
    assert!((g32 - 0.5).abs() < 1e-6);

    let c64 = empirical_spectral_constant(&d64, &s64, 10.0).unwrap().constant;
    let c32 = empirical_spectral_constant(&d32, &s32, 10.0f32).unwrap().constant;
    assert!(((c32 as f64) - c64).abs() < 1e-3 * c64);

    let r64 = cost_constants(0.5, &[1.0, 1.0], std::f64::consts::E, 1.0).unwrap();
    let r32 = cost_constants(0.5f32, &[1.0, 1.0], std::f32::consts::E, 1.0).unwrap();
    assert!(((r32.c1 as f64) - r64.c1).abs() < 1e-4 * r64.c1);

    let l64 = Arc::new(lattice_below_energy(&d64, 10.0).unwrap());
    let l32 = Arc::new(lattice_below_energy(&d32, 10.0f32).unwrap());
    assert_eq!(l64.len(), l32.len());
    let c: Vec<f64> = (0..l64.len()).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let u64_ = HeatState::new(l64.clone(), c.clone()).unwrap();
    let u32_ = HeatState::new(l32.clone(), c.iter().map(|&v| v as f32).collect()).unwrap();
    let m64 = ControlModel::new(&d64, l64, &s64).unwrap();
    let m32 = ControlModel::new(&d32, l32, &s32).unwrap();
    let opts = HumOptions { tol: 1e-5, ..HumOptions::default() };
    let h64 = hum_control(&m64, &u64_, 1.0, &opts).unwrap();
    let h32 = hum_control(&m32, &u32_, 1.0f32, &opts).unwrap();
    assert!(((h32.cost as f64) - h64.cost).abs() < 1e-2 * h64.cost, "{} vs {}", h32.cost, h64.cost);
}
