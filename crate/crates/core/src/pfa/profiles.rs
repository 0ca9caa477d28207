//! Generic residential load profile shapes.
//!
//! Five daily consumption archetypes used both as k-means centroids and to
//! synthesise cohorts. Shapes are 48 half-hour weights normalised to unit
//! daily energy (1 kWh/day), built from Gaussian bumps on a circular day.

use serde::{Deserialize, Serialize};

use crate::series::SLOTS_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileKind {
    DoublePeak,
    EveningPeak,
    HighDayEvening,
    DayFocus,
    NightFocus,
}

pub const ALL_PROFILES: [ProfileKind; 5] = [
    ProfileKind::DoublePeak,
    ProfileKind::EveningPeak,
    ProfileKind::HighDayEvening,
    ProfileKind::DayFocus,
    ProfileKind::NightFocus,
];

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::DoublePeak => "Double Peak",
            ProfileKind::EveningPeak => "Evening peak",
            ProfileKind::HighDayEvening => "High Day and Evening Peak",
            ProfileKind::DayFocus => "Day focus",
            ProfileKind::NightFocus => "Night focus",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ALL_PROFILES.iter().copied().find(|p| p.name().eq_ignore_ascii_case(name))
    }
}

/// Gaussian bump centred on `center` (slots), wrapping around midnight.
fn bump(slot: usize, center: f64, sigma: f64, height: f64) -> f64 {
    let mut d = (slot as f64 - center).abs();
    if d > SLOTS_PER_DAY as f64 / 2.0 {
        d = SLOTS_PER_DAY as f64 - d;
    }
    height * (-0.5 * (d / sigma).powi(2)).exp()
}

/// The 48-slot shape of a profile, normalised to unit daily energy
/// (values sum to 2.0 since each slot is half an hour).
pub fn shape(kind: ProfileKind) -> [f64; SLOTS_PER_DAY] {
    let mut v = [0.0; SLOTS_PER_DAY];
    for (s, out) in v.iter_mut().enumerate() {
        let base = 0.15;
        *out = base
            + match kind {
                ProfileKind::DoublePeak => {
                    bump(s, 15.0, 2.5, 1.0) + bump(s, 38.0, 3.0, 1.2)
                }
                ProfileKind::EveningPeak => bump(s, 38.0, 3.0, 1.6),
                ProfileKind::HighDayEvening => {
                    bump(s, 26.0, 4.0, 0.9) + bump(s, 39.0, 3.0, 1.4)
                }
                ProfileKind::DayFocus => bump(s, 26.0, 6.0, 1.2),
                ProfileKind::NightFocus => {
                    bump(s, 46.0, 3.0, 1.3) + bump(s, 2.0, 3.0, 0.8)
                }
            };
    }
    normalize_unit_energy(&mut v);
    v
}

/// Scales a 48-slot profile so its daily energy is 1 kWh.
pub fn normalize_unit_energy(profile: &mut [f64; SLOTS_PER_DAY]) {
    let energy: f64 = profile.iter().sum::<f64>() * 0.5;
    if energy > 0.0 {
        for v in profile.iter_mut() {
            *v /= energy;
        }
    }
}
