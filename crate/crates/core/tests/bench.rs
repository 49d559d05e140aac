use mce::bench::{
    case_brinkman, case_darcy, case_elasticity, case_stokes, relative_spread, robustness_sweep,
    run_convergence, run_locking_study, solve_cooks, solve_coupling, CookElement, Scenario,
};
use proptest::prelude::*;

const LEVELS: [usize; 4] = [4, 8, 16, 32];
const CI_NODES: usize = 40;
/// Compatible element tip displacement at nu = 0.49999 on the n = 16 mesh,
/// frozen from the first run.
const FROZEN_TIP: f64 = 1.488064416625279;

#[test]
fn stokes_rates() {
    let record = run_convergence(&case_stokes(), &LEVELS).unwrap();
    let s = record.slopes;
    println!("stokes slopes {s:?}");
    assert!((0.85..=1.15).contains(&s.h1_velocity), "{s:?}");
    assert!((1.8..=2.2).contains(&s.l2_velocity), "{s:?}");
    for row in &record.rows {
        assert!(
            row.divergence_defect < 1e-9,
            "n={} defect {}",
            row.n,
            row.divergence_defect
        );
        assert!(row.relative_residual < 1e-9);
    }
}

#[test]
fn darcy_velocity_rate() {
    let record = run_convergence(&case_darcy(), &LEVELS).unwrap();
    let s = record.slopes;
    println!("darcy slopes {s:?}");
    assert!(s.l2_velocity >= 0.85, "{s:?}");
    for row in &record.rows {
        assert!(
            row.divergence_defect < 1e-9,
            "n={} defect {}",
            row.n,
            row.divergence_defect
        );
    }
}

#[test]
fn darcy_projected_pressure_rate() {
    let record = run_convergence(&case_darcy(), &LEVELS).unwrap();
    let p0p = record.slopes.projected_pressure.unwrap();
    println!("darcy projected pressure slope {p0p}");
    assert!((1.8..=2.2).contains(&p0p), "slope {p0p}");
}

#[test]
fn energy_error_is_robust_in_lambda() {
    let sweep = robustness_sweep(case_elasticity, &[1.0, 1e3, 1e6], 16).unwrap();
    let spread = relative_spread(sweep.iter().map(|(_, e)| e.energy));
    println!("lambda energy spread {spread}");
    assert!(spread < 0.1, "{sweep:?}");
}

#[test]
fn velocity_error_is_robust_in_mu() {
    let sweep = robustness_sweep(|mu| case_brinkman(mu, 1.0), &[0.0, 1e-6, 1e-3], 16).unwrap();
    let spread = relative_spread(sweep.iter().map(|(_, e)| e.l2_velocity));
    println!("mu velocity spread {spread}");
    assert!(spread < 0.1, "{sweep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn manufactured_cases_are_consistent(seed in any::<u64>(), mu in 0.0f64..2.0, sigma in 0.0f64..2.0, lambda in 0.0f64..1e6) {
        for case in [case_stokes(), case_darcy(), case_brinkman(mu, sigma), case_elasticity(lambda)] {
            let r = case.consistency_residual(100, seed);
            prop_assert!(r < 1e-8, "{} residual {r}", case.name);
        }
    }
}

#[test]
fn cook_locking_study() {
    let rows = run_locking_study(&[0.4999, 0.49999], &[16]).unwrap();
    let (a, b) = (rows[0], rows[1]);
    let change = (a.compatible_tip - b.compatible_tip).abs() / b.compatible_tip.abs();
    println!(
        "compatible change {change}, affine ratio {}",
        b.affine_tip / b.compatible_tip
    );
    assert!(change < 0.02);
    assert!(b.affine_tip < 0.5 * b.compatible_tip);
    assert!((b.compatible_tip - FROZEN_TIP).abs() < 1e-8 * FROZEN_TIP);
}

#[test]
fn cook_elements_agree_when_compressible() {
    // the plain affine element is still 9% stiffer on the n = 16 mesh
    let compatible = solve_cooks(0.3, 32, CookElement::Compatible).unwrap();
    let affine = solve_cooks(0.3, 32, CookElement::PlainAffine).unwrap();
    let gap = (compatible.tip - affine.tip).abs() / compatible.tip;
    println!("tips {} {} gap {gap}", compatible.tip, affine.tip);
    assert!(gap < 0.05);
    assert!(compatible.relative_residual < 1e-9 && affine.relative_residual < 1e-9);
}

#[test]
fn normal_coupling_conserves_mass() {
    let r = solve_coupling(Scenario::Normal, 1.0, CI_NODES).unwrap();
    assert!(r.divergence_defect < 1e-9, "{}", r.divergence_defect);
    assert!(r.net_outflow.abs() < 1e-9, "{}", r.net_outflow);
    assert!(r.total_flux > 0.0);
}

#[test]
fn tangential_coupling_oscillates_for_small_viscosity() {
    let small = solve_coupling(Scenario::Tangential, 1e-2, CI_NODES).unwrap();
    let large = solve_coupling(Scenario::Tangential, 10.0, CI_NODES).unwrap();
    println!(
        "oscillations {} {}",
        small.interface_oscillations(),
        large.interface_oscillations()
    );
    assert!(small.interface_oscillations() >= 2);
    assert!(large.interface_oscillations() < 2);
}
