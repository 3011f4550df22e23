//! Minimum ghost-touch field across a frequency band for the laptop sensor,
//! with the dips that a scan would reveal.

use iemi_sim::config::ExperimentConfig;
use iemi_sim::susceptibility::{local_minima, sweep_min_field};

fn main() -> iemi_sim::Result<()> {
    let cfg = ExperimentConfig::default();
    let sensor = cfg.sensor_params()?;
    let points = sweep_min_field(&sensor, &cfg.electrode()?, &cfg.sweep_config())?;
    let capped = points.iter().filter(|p| p.capped).count();
    println!("{} frequencies, {capped} never fire below the cap", points.len());
    let best = points.iter().min_by(|a, b| a.min_e_field.total_cmp(&b.min_e_field)).unwrap();
    println!("easiest: {:.0} kHz at {:.0} V/m", best.frequency_hz / 1e3, best.min_e_field);
    let dips: Vec<f64> = local_minima(&points).iter().map(|f| f / 1e3).collect();
    println!("dips (kHz): {dips:?}");
    Ok(())
}
