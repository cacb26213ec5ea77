//! Number formatting for CSV and console output.

/// Shortest decimal text that parses back to exactly `v`. Plain notation
/// in the usual range, exponent notation outside it.
pub fn round_trip(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// `v` to 15 significant digits, positional unless the magnitude is
/// extreme.
pub fn significant15(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return format!("{:.14}", 0.0);
    }
    let a = v.abs();
    if !(1e-5..1e15).contains(&a) {
        return format!("{v:.14e}");
    }
    let mut exp = a.log10().floor() as i32;
    let mut text = format!("{:.*}", (14 - exp).max(0) as usize, v);
    // rounding can carry into a new leading digit
    if digits(&text) > 15 {
        exp += 1;
        text = format!("{:.*}", (14 - exp).max(0) as usize, v);
    }
    text
}

fn digits(s: &str) -> usize {
    let body = s.trim_start_matches('-').replace('.', "");
    body.trim_start_matches('0').len()
}
