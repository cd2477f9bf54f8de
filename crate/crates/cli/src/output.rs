//! Stable numeric formatting for emitted JSON and CSV.

use serde::Serialize;

/// Rounds to 12 significant digits. Non-finite values pass through, and
/// serde_json writes them as `null`.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest representation of [`sig12`]`(x)`; empty for non-finite values.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{}", sig12(x))
    } else {
        String::new()
    }
}

pub fn csv_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, csv_float)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}
