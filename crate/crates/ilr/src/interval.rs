//! Closed real intervals and partially-known binary labels.
//!
//! An [`Interval`] is a pair `[lo, hi]` with `lo <= hi`, both finite. A
//! degenerate interval (`lo == hi`) stands in for an ordinary precise number,
//! so code that consumes intervals handles precise data with no special case.
//!
//! [`UncertainLabel`] is a binary outcome that may be unknown: either we saw
//! the class, or we only know it is one of `{0, 1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` of finite reals, `lo <= hi`.
///
/// Serialized as a two-element array `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Build an interval, rejecting non-finite endpoints and `lo > hi`.
    ///
    /// Inverted bounds are an error, not silently swapped: in censored data
    /// an inverted pair means the file is corrupt, and swapping would hide it.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite {
                what: format!("interval bounds [{lo}, {hi}]"),
            });
        }
        if lo > hi {
            return Err(Error::InvertedBounds { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[v, v]`.
    ///
    /// Panics on non-finite input; use [`Interval::new`] for untrusted data.
    pub fn point(v: f64) -> Self {
        assert!(v.is_finite(), "Interval::point requires a finite value");
        Interval { lo: v, hi: v }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// True when the interval is a single point.
    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        // Average without overflow risk for the magnitudes we deal in.
        self.lo + 0.5 * (self.hi - self.lo)
    }

    /// Is `v` inside `[lo, hi]` (endpoints included)?
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Does this interval contain all of `other`?
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Smallest interval covering both operands.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(pair: [f64; 2]) -> Result<Self> {
        Interval::new(pair[0], pair[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> [f64; 2] {
        [iv.lo, iv.hi]
    }
}

/// A binary class label that may be missing.
///
/// Serialized as `0`, `1`, or the string `"?"`. On input the string
/// `"[0,1]"` is also accepted as a synonym for unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UncertainLabel {
    Known(bool),
    Unknown,
}

impl UncertainLabel {
    pub fn is_known(&self) -> bool {
        matches!(self, UncertainLabel::Known(_))
    }

    /// The label as 0.0/1.0 if known.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            UncertainLabel::Known(true) => Some(1.0),
            UncertainLabel::Known(false) => Some(0.0),
            UncertainLabel::Unknown => None,
        }
    }
}

impl From<bool> for UncertainLabel {
    fn from(b: bool) -> Self {
        UncertainLabel::Known(b)
    }
}

impl Serialize for UncertainLabel {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UncertainLabel::Known(false) => ser.serialize_u8(0),
            UncertainLabel::Known(true) => ser.serialize_u8(1),
            UncertainLabel::Unknown => ser.serialize_str("?"),
        }
    }
}

impl<'de> Deserialize<'de> for UncertainLabel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;

        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
            Pair([f64; 2]),
        }

        match Raw::deserialize(de)? {
            Raw::Num(0.0) => Ok(UncertainLabel::Known(false)),
            Raw::Num(1.0) => Ok(UncertainLabel::Known(true)),
            Raw::Num(v) => Err(D::Error::custom(format!("label must be 0, 1, or \"?\", got {v}"))),
            Raw::Text(s) => parse_label_text(&s).map_err(D::Error::custom),
            Raw::Pair([0.0, 1.0]) => Ok(UncertainLabel::Unknown),
            Raw::Pair(p) => Err(D::Error::custom(format!(
                "label interval must be [0, 1], got [{}, {}]",
                p[0], p[1]
            ))),
        }
    }
}

/// Parse a label written as text: `0`, `1`, `?`, or `[0,1]`.
pub(crate) fn parse_label_text(s: &str) -> std::result::Result<UncertainLabel, String> {
    match s.trim() {
        "0" => Ok(UncertainLabel::Known(false)),
        "1" => Ok(UncertainLabel::Known(true)),
        "?" => Ok(UncertainLabel::Unknown),
        other => {
            // Accept "[0,1]" with arbitrary interior spacing.
            let squeezed: String = other.chars().filter(|c| !c.is_whitespace()).collect();
            if squeezed == "[0,1]" {
                Ok(UncertainLabel::Unknown)
            } else {
                Err(format!("label must be 0, 1, or \"?\", got \"{other}\""))
            }
        }
    }
}

/// Range of the linear score `beta[0] + sum_j beta[j+1] * x_j` as each
/// feature ranges over its interval.
///
/// Each term is monotone in its own variable, so the extremes sit at
/// endpoints picked by the sign of the coefficient. `beta` carries the
/// intercept first, so it must be one longer than `x`.
pub fn linear_score_bounds(beta: &[f64], x: &[Interval]) -> Result<Interval> {
    if beta.len() != x.len() + 1 {
        return Err(Error::DimensionMismatch {
            expected: x.len() + 1,
            got: beta.len(),
        });
    }
    let mut lo = beta[0];
    let mut hi = beta[0];
    for (b, xi) in beta[1..].iter().zip(x) {
        if *b >= 0.0 {
            lo += b * xi.lo;
            hi += b * xi.hi;
        } else {
            lo += b * xi.hi;
            hi += b * xi.lo;
        }
    }
    Interval::new(lo, hi)
}
