//! Number formatting shared by every CSV writer.

/// 17 significant digits in scientific notation; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty field for a missing value, otherwise [`fmt_f64`].
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
