//! Kernel construction and the operator's Fourier symbol.
//!
//! Builds the scaled bump for a given capillarity, certifies its moments,
//! and tabulates the symbol `m_k = (Phi(eps k) - 1)/eps^2` of the non-local
//! operator, which approaches `-gamma (2 pi k)^2` as eps shrinks.
//!
//! ```bash
//! cargo run --release -p elasto-relent --example kernel_and_multipliers
//! ```

use std::f64::consts::PI;

use elasto_relent::mollifier::{bump_second_moment, Mollifier};

fn main() -> elasto_relent::Result<()> {
    let gamma = 0.005;
    println!(
        "unit bump second moment = {:.9}; admissible gamma range (0, {:.6}]",
        bump_second_moment(),
        bump_second_moment() / 2.0
    );

    let phi = Mollifier::new(gamma)?;
    println!(
        "gamma = {gamma}: support half-width b = {:.6}, mass = {:.12}, second moment = {:.12}",
        phi.scale_b(),
        phi.mass(),
        phi.second_moment()
    );

    let n = 256;
    let eps = 0.05;
    let mult = phi.multiplier_table(eps, n)?;
    println!("\nsymbol table at eps = {eps}, n = {n} (first wavenumbers):");
    println!("{:>4}  {:>14}  {:>14}", "k", "m_k", "-gamma(2pik)^2");
    for k in [1i64, 2, 4, 8, 16, 32] {
        println!(
            "{k:>4}  {:>14.6e}  {:>14.6e}",
            mult.value(k),
            -gamma * (2.0 * PI * k as f64).powi(2)
        );
    }

    std::fs::create_dir_all("out/kernel").expect("create output dir");
    mult.write_csv("out/kernel/multipliers.csv")?;
    println!("\nwrote out/kernel/multipliers.csv");
    Ok(())
}
