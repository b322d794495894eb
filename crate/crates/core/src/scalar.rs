use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Exact rational number used for all symbolic work.
pub type Rational = num_rational::BigRational;

/// Floating-point scalar used at runtime: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 converts to scalar")
    }

    /// Rounds an exact rational to the nearest representable value.
    fn from_rational(value: &Rational) -> Self {
        Self::of(value.to_f64().unwrap_or(f64::NAN))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Parses a decimal literal (optionally signed, with optional exponent) into an
/// exact rational. `0.04` becomes `1/25`, `1e-8` becomes `1/100000000`.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    use num_bigint::BigInt;
    use num_traits::Pow;

    let (neg, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * Pow::pow(&ten, scale as u32))
    } else {
        Rational::new(numer, Pow::pow(&ten, (-scale) as u32))
    };
    if neg {
        value = -value;
    }
    Some(value)
}
