//! End-to-end attack trials: ideal conditions, a source that is too weak,
//! and a realistic setup firing through tabletops of growing thickness.

use iemi_sim::attacker::campaign::CampaignConfig;
use iemi_sim::attacker::{device_profile, execute_campaign};
use iemi_sim::field::Tabletop;

fn line(name: &str, cfg: &CampaignConfig) -> iemi_sim::Result<()> {
    let s = execute_campaign(cfg)?.summary;
    let qd = |v: Option<f64>| v.map_or("-".to_string(), |q| format!("{q:.1}"));
    println!(
        "{name:<18} field {:>6.0} V/m  success {:>5.1} %  QD x {} px, y {} px",
        s.screen_field,
        100.0 * s.success_rate,
        qd(s.qd_x_px),
        qd(s.qd_y_px)
    );
    Ok(())
}

fn main() -> iemi_sim::Result<()> {
    let profile = device_profile("iphone_11_pro")?;
    let perfect = CampaignConfig { trials: 20, ..CampaignConfig::perfect(profile.clone()) };
    line("perfect", &perfect)?;
    let weak = CampaignConfig { source_field: 0.6 * perfect.critical_field()?, ..perfect.clone() };
    line("below critical", &weak)?;
    for mm in [10.0, 15.0, 20.0] {
        let cfg = CampaignConfig {
            trials: 40,
            ..CampaignConfig::through_table(profile.clone(), Tabletop::new("acrylic", mm * 1e-3), 3000.0)
        };
        line(&format!("acrylic {mm} mm"), &cfg)?;
    }
    Ok(())
}
