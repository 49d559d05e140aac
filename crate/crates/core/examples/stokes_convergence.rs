//! Convergence of the Stokes manufactured solution on uniform refinements.

use mce::bench::{case_stokes, run_convergence};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let record = run_convergence(&case_stokes(), &[4, 8, 16, 32])?;
    println!(
        "{:>4} {:>11} {:>11} {:>11} {:>11} {:>9}",
        "n", "h", "L2(u)", "H1(u)", "L2(p)", "div"
    );
    for r in &record.rows {
        let e = &r.errors;
        println!(
            "{:>4} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>9.1e}",
            r.n,
            r.h,
            e.l2_velocity,
            e.h1_velocity,
            e.l2_pressure.unwrap_or(0.0),
            r.divergence_defect
        );
    }
    let s = record.slopes;
    println!(
        "slopes over the last three levels: L2(u) {:.3}, H1(u) {:.3}, L2(p) {:.3}",
        s.l2_velocity,
        s.h1_velocity,
        s.l2_pressure.unwrap_or(f64::NAN)
    );
    println!("\n{}", record.to_csv());
    Ok(())
}
