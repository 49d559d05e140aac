//! The Stokes case with boundary data imposed strongly, with tangential
//! Nitsche terms and fully by Nitsche's method, for several penalties.

use mce::bench::{case_stokes, error_norms, solve_case};
use mce::space::ConstraintMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for mode in [
        ConstraintMode::FullDirichlet,
        ConstraintMode::NormalOnly,
        ConstraintMode::Unconstrained,
    ] {
        for gamma in [5.0, 10.0, 100.0] {
            let case = case_stokes().with_mode(mode).with_gamma(gamma);
            let solved = solve_case(&case, 16)?;
            let e = error_norms(&solved.space, &solved.solution, &case);
            println!(
                "{:<14} gamma={gamma:<5} L2(u) {:.4e}  H1(u) {:.4e}  L2(p) {:.4e}  residual {:.1e}",
                format!("{mode:?}"),
                e.l2_velocity,
                e.h1_velocity,
                e.l2_pressure.unwrap_or(0.0),
                solved.report.relative_residual
            );
        }
    }
    Ok(())
}
