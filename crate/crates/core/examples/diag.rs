//! Scratch diagnostics for the 1D relaxation (not part of the deliverable API).

use nematune_core::cell::CellStack;
use nematune_core::energy::ModelParams;
use nematune_core::material::builtin_material;
use nematune_core::poisson::{effective_permittivity_1d, mean_permittivity_1d};
use nematune_core::relax::{midplane_tilt, relax_1d, SolverOptions};
use std::time::Instant;

fn main() {
    let p = ModelParams::new(builtin_material("RDP-84909").unwrap()).unwrap();
    let stack = CellStack {
        grid_nz: 65,
        ..CellStack::default()
    };
    let opts = SolverOptions::default();
    for v in [0.0, 0.3, 0.5, 1.0, 2.0, 3.0] {
        let t0 = Instant::now();
        match relax_1d(&stack, &p, v, &opts, None) {
            Ok((state, report)) => {
                println!(
                    "V={v:4.2}  steps={:7} acc={:7} rej={:7} incmax={:.1e} res={:.2e} tilt={:.4} eps_ser={:.3} eps_vol={:.3} E={:+.6e}  [{:?}]",
                    report.steps,
                    report.accepted,
                    report.rejected,
                    report.max_energy_increase,
                    report.residual,
                    midplane_tilt(&state),
                    effective_permittivity_1d(&state, &stack, &p),
                    mean_permittivity_1d(&state, &p),
                    state.energy,
                    t0.elapsed()
                );
            }
            Err(e) => println!("V={v:4.2}  FAILED: {e}  [{:?}]", t0.elapsed()),
        }
    }
    // Tilt profile at 0.5 V for cross-checking against the director oracle.
    let (state, _) = relax_1d(&stack, &p, 0.5, &opts, None).unwrap();
    let tilts: Vec<String> = state
        .q
        .iter()
        .map(|q| {
            let (n, _) = q.director_order();
            format!("{:.9}", n.z.abs().min(1.0).asin())
        })
        .collect();
    println!("PROFILE05 {}", tilts.join(","));
}

#[allow(dead_code)]
fn dump_profile() {}
