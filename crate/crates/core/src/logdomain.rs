//! Nonnegative reals carried in the natural-log domain.
//!
//! Bound formulas multiply factorial powers like `K!^(2P)` and binomials of
//! arguments like `q^(2m)`, which overflow `f64` long before the final bound
//! does. Every such quantity is therefore carried as its natural logarithm
//! and only converted to a linear value at the reporting boundary, with
//! explicit overflow-to-infinity semantics.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A nonnegative real `exp(ln)`. `ln = -inf` encodes zero, `ln = +inf`
/// encodes infinity.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogReal {
    ln: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { ln: f64::NEG_INFINITY };
    pub const ONE: LogReal = LogReal { ln: 0.0 };
    pub const INFINITY: LogReal = LogReal { ln: f64::INFINITY };

    /// Wraps a linear value. Negative inputs are a caller bug.
    pub fn from_value(v: f64) -> LogReal {
        assert!(v >= 0.0, "LogReal::from_value on negative {v}");
        LogReal { ln: v.ln() }
    }

    pub fn from_ln(ln: f64) -> LogReal {
        assert!(!ln.is_nan(), "LogReal::from_ln(NaN)");
        LogReal { ln }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    /// Linear value; overflows to `+inf` and underflows to `0.0`.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    /// True when the linear value is not faithfully representable in `f64`
    /// (overflow to infinity or underflow to zero) while the log is finite.
    pub fn log_domain_only(self) -> bool {
        self.ln.is_finite() && (self.value() == 0.0 || self.value().is_infinite())
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    pub fn is_infinite(self) -> bool {
        self.ln == f64::INFINITY
    }

    pub fn mul(self, rhs: LogReal) -> LogReal {
        if self.is_zero() || rhs.is_zero() {
            // 0 * inf is a modeling bug in this crate's formulas.
            assert!(!(self.is_infinite() || rhs.is_infinite()), "LogReal 0*inf");
            return LogReal::ZERO;
        }
        LogReal { ln: self.ln + rhs.ln }
    }

    pub fn div(self, rhs: LogReal) -> LogReal {
        assert!(!rhs.is_zero(), "LogReal division by zero");
        if self.is_zero() {
            return LogReal::ZERO;
        }
        LogReal { ln: self.ln - rhs.ln }
    }

    pub fn powi(self, e: i64) -> LogReal {
        if e == 0 {
            return LogReal::ONE;
        }
        if self.is_zero() {
            return if e > 0 { LogReal::ZERO } else { LogReal::INFINITY };
        }
        LogReal { ln: self.ln * e as f64 }
    }

    pub fn sqrt(self) -> LogReal {
        LogReal { ln: 0.5 * self.ln }
    }

    /// `self + rhs` via log-sum-exp.
    pub fn add(self, rhs: LogReal) -> LogReal {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.ln >= rhs.ln { (self.ln, rhs.ln) } else { (rhs.ln, self.ln) };
        if hi.is_infinite() {
            return LogReal::INFINITY;
        }
        LogReal { ln: hi + (lo - hi).exp().ln_1p() }
    }

    /// `max(self - rhs, 0)` via log-diff-exp; the clamp is deliberate since
    /// callers subtract quantities that are nonnegative by theorem.
    pub fn sub_clamped(self, rhs: LogReal) -> LogReal {
        if rhs.is_zero() {
            return self;
        }
        if self.ln <= rhs.ln {
            return LogReal::ZERO;
        }
        LogReal { ln: self.ln + (-(rhs.ln - self.ln).exp()).ln_1p() }
    }

    /// Sum of a slice in a fixed left-to-right order.
    pub fn sum(terms: &[LogReal]) -> LogReal {
        terms.iter().fold(LogReal::ZERO, |acc, &t| acc.add(t))
    }
}

/// ln(n!) by direct summation; the crate only ever needs n ≤ a few
/// thousand, where this is accurate to f64 rounding.
pub fn ln_factorial(n: u64) -> f64 {
    let mut acc = 0.0f64;
    for j in 2..=n {
        acc += (j as f64).ln();
    }
    acc
}

/// ln C(x + k - 1, k) for a (possibly astronomically large) real `x` given
/// as `ln x`: sum of `ln(x + j - 1)` for j = 1..=k minus `ln k!`.
pub fn ln_binom_shifted(ln_x: f64, k: u64) -> f64 {
    let mut acc = 0.0f64;
    for j in 1..=k {
        // ln(x + j - 1) = ln_x + ln1p((j-1) e^{-ln_x}); underflow of the
        // correction is the right answer for huge x.
        acc += ln_x + ((j - 1) as f64 * (-ln_x).exp()).ln_1p();
    }
    acc - ln_factorial(k)
}

/// Serialized form: linear value when representable, log always, plus a flag
/// telling the reader which field is authoritative.
#[derive(Serialize, Deserialize)]
struct LogRealRepr {
    value: JsonF64,
    ln: JsonF64,
    log_domain: bool,
}

/// f64 that serializes infinities as strings so JSON stays lossless.
struct JsonF64(f64);

impl Serialize for JsonF64 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for JsonF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(JsonF64(v)),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(JsonF64(f64::INFINITY)),
                "-inf" => Ok(JsonF64(f64::NEG_INFINITY)),
                other => Err(D::Error::custom(format!("bad f64 literal {other:?}"))),
            },
        }
    }
}

impl Serialize for LogReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LogRealRepr {
            value: JsonF64(self.value()),
            ln: JsonF64(self.ln),
            log_domain: self.log_domain_only(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = LogRealRepr::deserialize(d)?;
        Ok(LogReal::from_ln(repr.ln.0))
    }
}
