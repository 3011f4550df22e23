//! Attack planning and closed-loop execution against the simulated panel.

pub mod array;
pub mod campaign;
pub mod detector;
pub mod gesture;
pub mod profiles;
pub mod stats;

pub use array::{select_antenna, AntennaArray, AntennaMode};
pub use campaign::{execute_campaign, CampaignConfig, CampaignSummary, InjectionReport, LocalizationMode, PanelSpec, TrialRecord};
pub use detector::{detect_injection, measure_dwell, simulate_episode, Detection, Episode, MonitorStream};
pub use gesture::{plan_gesture, AttackPlan, AttackStep, GestureKind, GestureSpec, ScreenBounds};
pub use profiles::{device_profile, device_profiles, DeviceProfile};
pub use stats::{quantile_inclusive, quartile_deviation};
