//! Darcy flow with tangential Nitsche conditions: velocity and projected
//! pressure rates, and the error as the viscosity goes to zero.

use mce::bench::{case_brinkman, case_darcy, relative_spread, robustness_sweep, run_convergence};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let record = run_convergence(&case_darcy(), &[4, 8, 16, 32])?;
    for r in &record.rows {
        println!(
            "n={:<3} L2(u) {:.4e}  |pi0 p - p_h| {:.4e}  div defect {:.1e}",
            r.n,
            r.errors.l2_velocity,
            r.errors.projected_pressure.unwrap_or(0.0),
            r.divergence_defect
        );
    }
    let s = record.slopes;
    println!(
        "slopes: L2(u) {:.3}, projected pressure {:.3}",
        s.l2_velocity,
        s.projected_pressure.unwrap_or(f64::NAN)
    );

    let sweep = robustness_sweep(|mu| case_brinkman(mu, 1.0), &[0.0, 1e-6, 1e-3, 1.0], 16)?;
    for (mu, e) in &sweep {
        println!(
            "mu={mu:<6e} L2(u) {:.4e}  energy {:.4e}",
            e.l2_velocity, e.energy
        );
    }
    println!(
        "L2 velocity spread for mu <= 1e-3: {:.2}%",
        100.0 * relative_spread(sweep[..3].iter().map(|(_, e)| e.l2_velocity))
    );
    Ok(())
}
