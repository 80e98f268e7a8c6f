//! SPICE-style numbers: scientific notation plus engineering suffixes.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("empty number")]
    Empty,
    #[error("`{0}` is not a number")]
    Invalid(String),
}

/// Parses a number such as `1k`, `3.3p`, `2MEG`, `1e-3`, `10uF` or `0.44V`.
///
/// Suffixes are case-insensitive (`meg` = 1e6, `m` = 1e-3). Letters after the
/// suffix are ignored as unit names, as in SPICE.
pub fn parse_number(text: &str) -> Result<f64, NumberError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(NumberError::Empty);
    }
    let bytes = s.as_bytes();
    let mut end = 0;
    if matches!(bytes.first(), Some(b'+') | Some(b'-')) {
        end = 1;
    }
    let digits_start = end;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    if end < bytes.len() && bytes[end] == b'.' {
        end += 1;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
    }
    let mantissa = &s[digits_start..end];
    if mantissa.is_empty() || mantissa == "." {
        return Err(NumberError::Invalid(text.to_string()));
    }
    // exponent only when followed by digits, so `1e` or `1meg` stay suffixes
    if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
        let mut k = end + 1;
        if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
            k += 1;
        }
        let exp_digits = k;
        while k < bytes.len() && bytes[k].is_ascii_digit() {
            k += 1;
        }
        if k > exp_digits {
            end = k;
        }
    }
    let base: f64 = s[..end]
        .parse()
        .map_err(|_| NumberError::Invalid(text.to_string()))?;
    let rest = &s[end..];
    if !rest.chars().all(|c| c.is_alphabetic()) {
        return Err(NumberError::Invalid(text.to_string()));
    }
    let lower = rest.to_lowercase();
    let scale = if lower.starts_with("meg") {
        1e6
    } else {
        match lower.chars().next() {
            None => 1.0,
            Some('t') => 1e12,
            Some('g') => 1e9,
            Some('k') => 1e3,
            Some('m') => 1e-3,
            Some('u') | Some('µ') => 1e-6,
            Some('n') => 1e-9,
            Some('p') => 1e-12,
            Some('f') => 1e-15,
            Some(_) => 1.0,
        }
    };
    let value = base * scale;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(NumberError::Invalid(text.to_string()))
    }
}

/// Formats a value with an engineering suffix and `digits` significant digits,
/// e.g. `1.1199e4` -> `11.2k`. Used for human-readable netlists.
pub fn format_engineering(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    const SUFFIXES: [(f64, &str); 9] = [
        (1e12, "t"),
        (1e9, "g"),
        (1e6, "meg"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "u"),
        (1e-9, "n"),
        (1e-12, "p"),
    ];
    let mag = value.abs();
    let (scale, suffix) = SUFFIXES
        .iter()
        .copied()
        .find(|(scale, _)| mag >= *scale * 0.999_999_5)
        .unwrap_or((1e-15, "f"));
    let scaled = value / scale;
    let int_digits = (scaled.abs().log10().floor() as i64 + 1).max(1) as usize;
    let decimals = digits.saturating_sub(int_digits);
    let mut text = format!("{scaled:.decimals$}");
    if text.contains('.') {
        text = text.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    format!("{text}{suffix}")
}

/// Formats a number with nine significant digits, the serialisation used by
/// every CSV/JSON writer in the crate.
pub fn sig9(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{value:.8e}")
}

/// Rounds to nine significant digits (the value a reader of [`sig9`] gets back).
pub fn round9(value: f64) -> f64 {
    if value.is_finite() {
        sig9(value).parse().unwrap_or(value)
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
    }

    #[test]
    fn suffixes() {
        assert!(close(parse_number("1k").unwrap(), 1e3));
        assert!(close(parse_number("3.3p").unwrap(), 3.3e-12));
        assert!(close(parse_number("3.3pF").unwrap(), 3.3e-12));
        assert!(close(parse_number("2MEG").unwrap(), 2e6));
        assert!(close(parse_number("2meg").unwrap(), 2e6));
        assert!(close(parse_number("5M").unwrap(), 5e-3));
        assert!(close(parse_number("100u").unwrap(), 1e-4));
        assert!(close(parse_number("1f").unwrap(), 1e-15));
        assert!(close(parse_number("1F").unwrap(), 1e-15));
        assert!(close(parse_number("450MEG").unwrap(), 4.5e8));
        assert!(close(parse_number("1g").unwrap(), 1e9));
        assert!(close(parse_number("-0.46").unwrap(), -0.46));
        assert!(close(parse_number(".5").unwrap(), 0.5));
        assert!(close(parse_number("1e-3").unwrap(), 1e-3));
        assert!(close(parse_number("1.5E+2k").unwrap(), 1.5e5));
        assert!(close(parse_number("10ohm").unwrap(), 10.0));
        assert!(close(parse_number("0.44V").unwrap(), 0.44));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_number("").is_err());
        assert!(parse_number("abc").is_err());
        assert!(parse_number("1.2.3").is_err());
        assert!(parse_number("1k5").is_err());
        assert!(parse_number("-").is_err());
    }

    #[test]
    fn engineering_format() {
        assert_eq!(format_engineering(11198.9, 4), "11.2k");
        assert_eq!(format_engineering(3.3e-12, 4), "3.3p");
        assert_eq!(format_engineering(2e6, 3), "2meg");
        assert_eq!(format_engineering(1000.0, 4), "1k");
        assert_eq!(format_engineering(-0.46, 4), "-460m");
        assert!(close(
            parse_number(&format_engineering(1.287498e-6, 7)).unwrap(),
            1.287498e-6
        ));
    }

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(33.6e-6), "3.36000000e-5");
        assert_eq!(round9(1.0 / 3.0), 0.333333333);
    }
}
