//! Coupled Stokes-Brinkman flows on (0,2)^2: mass balance of the normal
//! scenario and interface oscillations of the tangential one. Pass an output
//! directory to write the fields as VTK.

use std::path::PathBuf;

use mce::bench::{run_brinkman_coupling, Scenario};
use mce::io::write_vtk;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    for (scenario, mus) in [
        (Scenario::Normal, [1.0, 1e-2, 1e-3, 1e-6]),
        (Scenario::Tangential, [10.0, 1.0, 1e-1, 1e-2]),
    ] {
        for r in run_brinkman_coupling(scenario, &mus, 40)? {
            println!(
                "{:<10} mu={:<6e} div defect {:.1e}  net outflow {:.1e}  oscillations near x=1: {}",
                scenario.name(),
                r.mu,
                r.divergence_defect,
                r.net_outflow,
                r.interface_oscillations()
            );
            if let Some(dir) = &out {
                let name = format!("{}_mu{:e}", scenario.name(), r.mu);
                write_vtk(
                    &r.space,
                    &r.solution,
                    &dir.join(format!("{name}.vtk")),
                    &name,
                )?;
            }
        }
    }
    Ok(())
}
