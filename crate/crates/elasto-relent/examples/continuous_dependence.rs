//! Continuous dependence of the non-local model on its initial data.
//!
//! Perturbs the displacement data by `delta * sin(6 pi x)` across three
//! decades of delta and measures `sup_t (||du|| + ||dv||) / delta`. The
//! response is linear in the perturbation, so the ratios collapse onto one
//! constant.
//!
//! ```bash
//! cargo run --release -p elasto-relent --example continuous_dependence
//! ```

use elasto_relent::config::{Experiment, ExperimentConfig};
use elasto_relent::experiments::run_continuous_dependence;

fn main() -> elasto_relent::Result<()> {
    let cfg = ExperimentConfig {
        experiment: Experiment::ContinuousDependence,
        output_dir: "out/continuous_dependence".into(),
        ..Default::default()
    };
    println!(
        "eps = {}, perturbing {} with mode {}",
        cfg.eps, cfg.perturbation.component, cfg.perturbation.mode
    );

    let dep = run_continuous_dependence(&cfg)?;
    for row in &dep.rows {
        println!("delta = {:>8.1e}: response ratio = {:.6}", row.delta, row.ratio);
    }
    println!("ratio spread = {:.4}", dep.ratio_spread);
    print!("{}", dep.summary().render_checks());

    dep.write(&cfg.output_dir)?;
    println!("wrote continuous_dependence.csv, summary.json to {:?}", cfg.output_dir);
    Ok(())
}
