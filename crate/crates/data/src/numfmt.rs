//! The single number format used in rendered text: six significant digits,
//! fixed notation for decimal exponents -3..=5 and scientific otherwise.
//!
//! ```text
//! 1.714        -> 1.71400
//! 0.0452       -> 0.0452000
//! 3.3953e-4    -> 3.39531e-4
//! 2.07e11      -> 2.07000e11
//! ```

pub fn fmt6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.00000".into();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("exponent in scientific format");
    if (-3..=5).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        sci
    }
}

/// Inverse of [`fmt6`] (also accepts any plain Rust float literal).
pub fn parse_num(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => None,
        _ => s.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(fmt6(1.714), "1.71400");
        assert_eq!(fmt6(0.0452), "0.0452000");
        assert_eq!(fmt6(3.3953e-4), "3.39530e-4");
        assert_eq!(fmt6(2.07e11), "2.07000e11");
        assert_eq!(fmt6(-250.0), "-250.000");
        assert_eq!(fmt6(123456.4), "123456");
        assert_eq!(fmt6(1234567.0), "1.23457e6");
        assert_eq!(fmt6(0.0), "0.00000");
        assert_eq!(fmt6(-0.0), "0.00000");
        assert_eq!(fmt6(f64::INFINITY), "inf");
    }

    #[test]
    fn carries_move_to_the_next_decade() {
        assert_eq!(fmt6(9.999996), "10.0000");
        assert_eq!(fmt6(999999.7), "1.00000e6");
        assert_eq!(fmt6(0.0009999996), "0.00100000");
        assert_eq!(fmt6(0.000999999), "9.99999e-4");
    }

    fn sig_digits(s: &str) -> usize {
        let mantissa = s.split('e').next().unwrap();
        let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        digits.trim_start_matches('0').len()
    }

    proptest::proptest! {
        #[test]
        fn six_significant_digits_and_close(m in 1.0f64..10.0, e in -15i32..15, neg in proptest::bool::ANY) {
            let v = if neg { -m } else { m } * 10f64.powi(e);
            let s = fmt6(v);
            proptest::prop_assert_eq!(sig_digits(&s), 6, "{}", s);
            let back = parse_num(&s).unwrap();
            proptest::prop_assert!(((back - v) / v).abs() <= 5.0000001e-6, "{} -> {}", v, s);
            // Formatting is idempotent on its own output.
            proptest::prop_assert_eq!(fmt6(back), s);
        }
    }
}
