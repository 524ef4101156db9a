//! Unit conversions and the Black Rock City design constants.
//!
//! Every imperial quantity in the toolkit goes through this table.

pub const MPH_TO_MS: f64 = 0.44704;
pub const LBF_TO_N: f64 = 4.4482216152605;
pub const FT_TO_MM: f64 = 304.8;
pub const INCH_TO_MM: f64 = 25.4;

pub const DESIGN_GUST_MPH: f64 = 75.0;
pub const ANCHOR_TENSION_LBF: f64 = 3000.0;
pub const ANCHOR_SPACING_FT: f64 = 3.0;
pub const ANCHOR_LENGTH_IN: f64 = 22.0;
pub const CLIMB_STATIC_LBF: f64 = 250.0;
pub const CLIMB_DYNAMIC_LBF: f64 = 400.0;
pub const BASE_MIN_FOS: f64 = 5.0;
pub const SKELETON_MIN_FOS: f64 = 3.0;

pub const SEA_LEVEL_AIR_DENSITY: f64 = 1.225;
pub const DEFAULT_DRAG_COEFFICIENT: f64 = 1.2;
pub const STANDARD_GRAVITY: f64 = 9.80665;

pub fn mph_to_ms(mph: f64) -> f64 {
    mph * MPH_TO_MS
}

pub fn lbf_to_n(lbf: f64) -> f64 {
    lbf * LBF_TO_N
}

pub fn ft_to_mm(ft: f64) -> f64 {
    ft * FT_TO_MM
}

pub fn design_gust_ms() -> f64 {
    mph_to_ms(DESIGN_GUST_MPH)
}

pub fn anchor_capacity_n() -> f64 {
    lbf_to_n(ANCHOR_TENSION_LBF)
}

pub fn anchor_min_spacing_mm() -> f64 {
    ft_to_mm(ANCHOR_SPACING_FT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_values() {
        assert!((design_gust_ms() - 33.528).abs() < 1e-12);
        assert!((anchor_min_spacing_mm() - 914.4).abs() < 1e-12);
        assert!((anchor_capacity_n() - 13344.66).abs() < 0.01);
        assert!((lbf_to_n(CLIMB_DYNAMIC_LBF) - 1779.3).abs() < 0.05);
        assert!((lbf_to_n(CLIMB_STATIC_LBF) - 1112.06).abs() < 0.01);
    }
}
