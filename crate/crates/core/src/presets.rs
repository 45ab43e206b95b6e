//! Bundled rate profiles with the design SNRs they were constructed for.

use crate::pac::RateProfile;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub len: usize,
    pub dimension: usize,
    pub design_snr_db: f64,
    pub hex: &'static str,
}

impl Preset {
    pub fn profile(&self) -> RateProfile {
        RateProfile::from_hex(self.hex, self.len).expect("bundled profile is valid")
    }
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        name: "pac256-128",
        len: 256,
        dimension: 128,
        design_snr_db: 4.0,
        hex: "0000000400808745000A1737175FBBEF011A177F957F7AFF1EFFD6BFE77A79D7",
    },
    Preset {
        name: "pac64-32",
        len: 64,
        dimension: 32,
        design_snr_db: 5.0,
        hex: "000A467F9CCE937F",
    },
    Preset {
        name: "pac128-105",
        len: 128,
        dimension: 105,
        design_snr_db: 7.0,
        hex: "173F37BF97FF7FEF177D7FFF7FFFFFFF",
    },
    Preset {
        name: "pac64-51",
        len: 64,
        dimension: 51,
        design_snr_db: 7.0,
        hex: "D5DF7BEFD7DFBF77",
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}
