//! Canonical text formatting for floating-point artifacts.
//!
//! Every float written to disk goes through [`fmt_f64`]: 17 significant
//! decimal digits, which round-trips any f64 exactly. Golden-file tests and
//! the byte-identical rerun guarantee depend on this being the only float
//! formatter used for artifacts.

/// Format with 17 significant digits (`d.dddddddddddddddde±x`).
pub fn fmt_f64(x: f64) -> String {
    // Normalize -0.0 so equal values format identically.
    let x = x + 0.0;
    format!("{:.16e}", x)
}

/// Parse a float previously written by [`fmt_f64`] (or any decimal literal).
pub fn parse_f64(text: &str) -> Option<f64> {
    let value: f64 = text.trim().parse().ok()?;
    value.is_finite().then_some(value)
}
