//! Number formatting shared by the CSV writers.

/// Formats `value` with `digits` significant digits in fixed-point notation.
///
/// Output depends only on the value, so repeated runs are byte-identical.
pub fn significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        // normalises -0.0 as well
        return if value.is_nan() {
            "NaN".to_string()
        } else if value.is_infinite() {
            if value > 0.0 { "inf" } else { "-inf" }.to_string()
        } else {
            "0".to_string()
        };
    }
    let digits = digits.max(1);
    // the exponent after rounding to `digits` places decides the decimals
    let scientific = format!("{value:.prec$e}", prec = digits - 1);
    let exponent: i32 = scientific
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Six significant digits, the report default.
pub fn sig6(value: f64) -> String {
    significant(value, 6)
}
