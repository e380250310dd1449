//! Rate strings such as `30M`, `140k` or `4.3e8`.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rate '{0}': expected a number of bit/s with optional k, M or G suffix")]
pub struct RateParseError(pub String);

/// Parse a bit rate in bits per second. Suffixes are decimal (`k` = 1e3,
/// `M` = 1e6, `G` = 1e9), optionally followed by `bps`.
pub fn parse_rate(text: &str) -> Result<f64, RateParseError> {
    let err = || RateParseError(text.to_string());
    let s = text.trim();
    let s = s.strip_suffix("bps").unwrap_or(s);
    let (num, mult) = match s.chars().last() {
        Some('k') | Some('K') => (&s[..s.len() - 1], 1e3),
        Some('M') => (&s[..s.len() - 1], 1e6),
        Some('G') | Some('g') => (&s[..s.len() - 1], 1e9),
        _ => (s, 1.0),
    };
    let v: f64 = num.trim().parse().map_err(|_| err())?;
    let v = v * mult;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(err())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse_rate("30M").unwrap(), 30e6);
        assert_eq!(parse_rate("140k").unwrap(), 140e3);
        assert_eq!(parse_rate("1.5G").unwrap(), 1.5e9);
        assert_eq!(parse_rate("53.5Mbps").unwrap(), 53.5e6);
        assert_eq!(parse_rate("1000").unwrap(), 1000.0);
        assert!(parse_rate("fast").is_err());
        assert!(parse_rate("-5M").is_err());
        assert!(parse_rate("").is_err());
    }
}
