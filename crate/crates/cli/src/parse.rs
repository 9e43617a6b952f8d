//! Value parsers for command-line numbers.

use qdistill::C64;

/// A real in [0, 1] given as a decimal, a fraction `p/q`, or one of the
/// named thresholds `c1` = (33−12√6)/25 and `c2` = (24√2−33)/7.
pub fn parse_x(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "c1" => (33.0 - 12.0 * 6f64.sqrt()) / 25.0,
        "c2" => (24.0 * 2f64.sqrt() - 33.0) / 7.0,
        _ => parse_real(t)?,
    };
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("{t} is outside [0, 1]"));
    }
    Ok(v)
}

/// A finite real, allowing `p/q`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = match t.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in '{t}'"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in '{t}'"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in '{t}'"));
            }
            p / q
        }
        None => t.parse().map_err(|_| format!("'{t}' is not a number"))?,
    };
    if !v.is_finite() {
        return Err(format!("'{t}' is not finite"));
    }
    Ok(v)
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v <= 0.0 {
        return Err(format!("{s} must be positive"));
    }
    Ok(v)
}

/// Complex numbers such as `0`, `1.5`, `2i`, `-i`, `1+1i`, `-1-0.5i`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(C64::new(parse_real(&t)?, 0.0));
    };
    // split at the last sign that is not an exponent sign or leading
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other).map_err(|_| format!("'{s}' is not a complex number"))?,
    };
    let re = parse_real(re).map_err(|_| format!("'{s}' is not a complex number"))?;
    Ok(C64::new(re, im))
}

/// Comma-separated complex list.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>, String> {
    s.split(',').map(parse_complex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_constants() {
        assert_eq!(parse_x("c1").unwrap(), (33.0 - 12.0 * 6f64.sqrt()) / 25.0);
        assert_eq!(parse_x("3/11").unwrap(), 3.0 / 11.0);
        assert_eq!(parse_x("1/7").unwrap(), 1.0 / 7.0);
        assert!((parse_x("c2").unwrap() - 0.134446).abs() < 1e-6);
        assert!(parse_x("1.5").is_err());
        assert!(parse_x("1/0").is_err());
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0").unwrap(), C64::new(0.0, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), C64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1+1i").unwrap(), C64::new(1.0, 1.0));
        assert_eq!(parse_complex("-1-i").unwrap(), C64::new(-1.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), C64::new(1e-3, 20.0));
        assert!(parse_complex("abc").is_err());
        assert_eq!(parse_complex_list("0,1+1i").unwrap().len(), 2);
    }
}
