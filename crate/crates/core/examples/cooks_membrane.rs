//! Cook's membrane near the incompressible limit: the compatible element
//! against plain affine elements on the same mesh.

use mce::bench::cook::COOK_YOUNG;
use mce::bench::{plane_strain_lame, run_locking_study};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nus = [0.3, 0.49, 0.4999, 0.49999];
    for &nu in &nus {
        let lame = plane_strain_lame(COOK_YOUNG, nu)?;
        println!("nu={nu}: mu={:.4}, lambda={:.4e}", lame.mu, lame.lambda);
    }
    println!(
        "{:>8} {:>4} {:>12} {:>12}",
        "nu", "n", "compatible", "affine"
    );
    for r in run_locking_study(&nus, &[8, 16])? {
        println!(
            "{:>8} {:>4} {:>12.6} {:>12.6}",
            r.nu, r.n, r.compatible_tip, r.affine_tip
        );
    }
    Ok(())
}
