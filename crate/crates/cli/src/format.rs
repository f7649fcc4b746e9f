//! Numeric text formatting shared by every writer: all floats are printed
//! with 17 significant digits so equal runs produce byte-equal artifacts
//! and every value round-trips through parsing exactly.

pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}
