//! Discrete energy-balance audit of both models.
//!
//! Each model dissipates its total energy at the rate `mu ||v_x||^2`; the
//! run accumulates that dissipation with a trapezoid rule over every step
//! and reports the residual `E(t) + D(t) - E(0)`, which stays at the time
//! discretization error.
//!
//! ```bash
//! cargo run --release -p elasto-relent --example energy_audit
//! ```

use elasto_relent::config::{Experiment, ExperimentConfig};
use elasto_relent::experiments::run_energy_audit;

fn main() -> elasto_relent::Result<()> {
    let cfg = ExperimentConfig {
        experiment: Experiment::EnergyAudit,
        output_dir: "out/energy_audit".into(),
        ..Default::default()
    };
    let audit = run_energy_audit(&cfg)?;

    for (name, ledger) in [("local", &audit.local), ("nonlocal", &audit.nonlocal)] {
        println!(
            "{name:>8}: E(0) = {:.6}, E(T) = {:.6}, dissipated = {:.6}, max |residual| = {:.3e}",
            ledger.initial_energy(),
            ledger.energy.last().unwrap(),
            ledger.dissipation_cum.last().unwrap(),
            ledger.max_abs_residual()
        );
    }
    print!("{}", audit.summary().render_checks());

    audit.write(&cfg.output_dir)?;
    println!("wrote ledger_local.csv, ledger_nonlocal.csv, summary.json to {:?}", cfg.output_dir);
    Ok(())
}
