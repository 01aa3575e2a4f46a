//! Text formatting of floating-point values for CSV and trajectory dumps.
//!
//! All numeric columns are printed with [`g17`]: 17 significant digits in
//! C's `%.17g` style. 17 digits round-trip any `f64` exactly, so emitted
//! files can be diffed byte-for-byte and re-parsed without loss.

/// Formats `value` like C's `printf("%.17g", value)`.
///
/// Fixed notation for decimal exponents in `[-4, 17)`, scientific
/// otherwise; trailing zeros and a dangling decimal point are trimmed.
pub fn g17(value: f64) -> String {
    if value.is_nan() {
        return "nan".to_string();
    }
    if value.is_infinite() {
        return if value < 0.0 { "-inf" } else { "inf" }.to_string();
    }
    if value == 0.0 {
        return if value.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    // 16 fractional digits = 17 significant digits; the exponent of the
    // rounded form decides which notation %g picks.
    let sci = format!("{:.16e}", value);
    let e_pos = sci.find('e').expect("scientific form has an exponent");
    let exp: i32 = sci[e_pos + 1..].parse().expect("exponent parses");
    if (-4..17).contains(&exp) {
        let prec = (16 - exp).max(0) as usize;
        trim_fraction(&format!("{value:.prec$}"))
    } else {
        let mantissa = trim_fraction(&sci[..e_pos]);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", mantissa, sign, exp.abs())
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
