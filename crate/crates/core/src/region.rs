//! The integer region partition of the clock domain.
//!
//! For a bound `N ≥ 1` the half line `[0, ∞)` splits into the points
//! `[n,n]` for `n ≤ N`, the open unit intervals `(n,n+1)` for `n < N` and
//! the tail `(N,∞)`. Guard membership, floors and integer timeouts are all
//! constant on each region, which is what makes the untimed abstractions
//! finite.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::time::{floor_u64, int, is_integer, ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// `[n,n]`
    Point(u64),
    /// `(n,n+1)`
    Open(u64),
    /// `(N,∞)` where `N` is the abstraction bound.
    Tail(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("region bound must be at least 1, got {0}")]
    BoundTooSmall(u64),
    #[error("malformed region `{0}`")]
    Malformed(String),
}

impl Region {
    pub fn contains(&self, t: &Rational) -> bool {
        match *self {
            Region::Point(n) => *t == int(n),
            Region::Open(n) => *t > int(n) && *t < int(n + 1),
            Region::Tail(n) => *t > int(n),
        }
    }

    /// The canonical clock value standing in for the whole region:
    /// `n` for points, `n + 1/2` for open intervals and `N + 1` for the tail.
    pub fn representative(&self) -> Rational {
        match *self {
            Region::Point(n) => int(n),
            Region::Open(n) => int(n) + ratio(1, 2),
            Region::Tail(n) => int(n + 1),
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Region::Point(_))
    }

    /// Position in the ascending order of `interval_set(N)`.
    pub fn rank(&self) -> u64 {
        match *self {
            Region::Point(n) => 2 * n,
            Region::Open(n) => 2 * n + 1,
            Region::Tail(n) => 2 * n + 1,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Region::Point(n) => write!(f, "[{n},{n}]"),
            Region::Open(n) => write!(f, "({n},{})", n + 1),
            Region::Tail(n) => write!(f, "({n},inf)"),
        }
    }
}

impl std::str::FromStr for Region {
    type Err = RegionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RegionError::Malformed(s.to_string());
        let t = s.trim();
        let (open, rest) = match t.chars().next() {
            Some(c @ ('[' | '(')) => (c, &t[1..]),
            _ => return Err(bad()),
        };
        let (close, body) = match rest.chars().last() {
            Some(c @ (']' | ')')) => (c, &rest[..rest.len() - 1]),
            _ => return Err(bad()),
        };
        let (lo, hi) = body.split_once(',').ok_or_else(bad)?;
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim();
        match (open, close) {
            ('[', ']') if hi.parse::<u64>().ok() == Some(lo) => Ok(Region::Point(lo)),
            ('(', ')') if hi == "inf" => Ok(Region::Tail(lo)),
            ('(', ')') if hi.parse::<u64>().ok() == Some(lo + 1) => Ok(Region::Open(lo)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `ℐ_N` in ascending order: `[0,0], (0,1), [1,1], …, [N,N], (N,∞)`.
pub fn interval_set(bound: u64) -> Result<Vec<Region>, RegionError> {
    if bound < 1 {
        return Err(RegionError::BoundTooSmall(bound));
    }
    let mut out = Vec::with_capacity(2 * bound as usize + 2);
    for n in 0..bound {
        out.push(Region::Point(n));
        out.push(Region::Open(n));
    }
    out.push(Region::Point(bound));
    out.push(Region::Tail(bound));
    Ok(out)
}

/// The unique region of `ℐ_N` containing `t`.
pub fn classify(t: &Rational, bound: u64) -> Region {
    if *t > int(bound) {
        return Region::Tail(bound);
    }
    let n = floor_u64(t);
    if is_integer(t) {
        Region::Point(n)
    } else {
        Region::Open(n)
    }
}
