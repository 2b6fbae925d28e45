//! Truncation sets: finite unions of disjoint open intervals.
//!
//! The text form is a comma-separated list of open intervals,
//! e.g. `(-inf,-2),(2,inf)`. [`TruncationSet`]'s `Display` output parses
//! back to the same set.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `T = (a_1, b_1) ∪ … ∪ (a_k, b_k)` with `a_1 < b_1 < a_2 < … < b_k`.
///
/// Only `a_1` may be `-inf` and only `b_k` may be `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSet {
    intervals: Vec<(f64, f64)>,
}

impl TruncationSet {
    /// Builds the canonical form: sorted, with overlapping or touching
    /// intervals merged into maximal open intervals.
    pub fn new(raw: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut raw: Vec<(f64, f64)> = raw.into_iter().collect();
        if raw.is_empty() {
            return Err(Error::validation("trunc", "at least one interval is required"));
        }
        for &(a, b) in &raw {
            if a.is_nan() || b.is_nan() {
                return Err(Error::validation("trunc", "interval endpoint is NaN"));
            }
            if !(a < b) {
                return Err(Error::validation(
                    "trunc",
                    format!("interval ({a},{b}) is empty: need a < b"),
                ));
            }
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match intervals.last_mut() {
                // Sharing an endpoint differs from the merged set only on a
                // null set, so touching intervals merge as well.
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => intervals.push((a, b)),
            }
        }
        Ok(TruncationSet { intervals })
    }

    /// The whole real line, `(-inf, inf)`.
    pub fn real_line() -> Self {
        TruncationSet {
            intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    /// `(-a, a)`
    pub fn symmetric_bounded(a: f64) -> Result<Self> {
        Self::new([(-a, a)])
    }

    /// `(-inf, -a) ∪ (a, inf)`
    pub fn symmetric_gap(a: f64) -> Result<Self> {
        Self::new([(f64::NEG_INFINITY, -a), (a, f64::INFINITY)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Number of intervals `k`.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `inf T = a_1`
    pub fn lower(&self) -> f64 {
        self.intervals[0].0
    }

    /// `sup T = b_k`
    pub fn upper(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].1
    }

    /// Whether `v` lies strictly inside one of the intervals.
    pub fn contains(&self, v: f64) -> bool {
        // First interval whose upper end exceeds v.
        let idx = self.intervals.partition_point(|&(_, b)| b <= v);
        self.intervals.get(idx).is_some_and(|&(a, _)| a < v)
    }

    pub fn bounded_above(&self) -> bool {
        self.upper() < f64::INFINITY
    }

    pub fn bounded_below(&self) -> bool {
        self.lower() > f64::NEG_INFINITY
    }

    /// The mirror image `-T`.
    pub fn reflect(&self) -> Self {
        TruncationSet {
            intervals: self.intervals.iter().rev().map(|&(a, b)| (-b, -a)).collect(),
        }
    }

    /// The affine image `{shift + scale·t : t ∈ T}` for `scale > 0`.
    pub fn affine(&self, shift: f64, scale: f64) -> Self {
        debug_assert!(scale > 0.0);
        TruncationSet {
            intervals: self
                .intervals
                .iter()
                .map(|&(a, b)| (shift + scale * a, shift + scale * b))
                .collect(),
        }
    }
}

impl fmt::Display for TruncationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({a:?},{b:?})")?;
        }
        Ok(())
    }
}

fn parse_endpoint(tok: &str) -> Result<f64> {
    let t = tok.trim();
    let v = match t {
        "inf" | "+inf" | "Inf" | "+Inf" | "infinity" | "+infinity" => f64::INFINITY,
        "-inf" | "-Inf" | "-infinity" => f64::NEG_INFINITY,
        _ => {
            // Reject spellings like "NaN" that f64::from_str would accept.
            if !t
                .bytes()
                .all(|c| c.is_ascii_digit() || matches!(c, b'+' | b'-' | b'.' | b'e' | b'E'))
                || t.is_empty()
            {
                return Err(Error::validation("trunc", format!("bad endpoint {t:?}")));
            }
            t.parse::<f64>()
                .map_err(|_| Error::validation("trunc", format!("bad endpoint {t:?}")))?
        }
    };
    Ok(v)
}

impl FromStr for TruncationSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut raw = Vec::new();
        let mut rest = s.trim();
        loop {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::validation("trunc", "expected '(' to open an interval"))?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::validation("trunc", "missing ')'"))?;
            let (inner, after) = body.split_at(close);
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::validation("trunc", "interval needs two endpoints"))?;
            raw.push((parse_endpoint(a)?, parse_endpoint(b)?));
            rest = after[1..].trim_start();
            if rest.is_empty() {
                break;
            }
            rest = rest
                .strip_prefix(',')
                .ok_or_else(|| Error::validation("trunc", "expected ',' between intervals"))?
                .trim_start();
        }
        TruncationSet::new(raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn construction_examples() {
        let t = TruncationSet::new([(-1.0, 1.0)]).unwrap();
        assert_eq!(t.intervals(), &[(-1.0, 1.0)]);
        assert_eq!(t.len(), 1);

        let t = TruncationSet::new([(-INF, -2.0), (2.0, INF)]).unwrap();
        assert_eq!(t.len(), 2);

        let t = TruncationSet::new([(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(t.intervals(), &[(0.0, 2.0)]);

        let t = TruncationSet::new([(3.0, 4.0), (-1.0, 0.5), (0.0, 2.0)]).unwrap();
        assert_eq!(t.intervals(), &[(-1.0, 2.0), (3.0, 4.0)]);
    }

    #[test]
    fn construction_errors() {
        assert!(TruncationSet::new(Vec::<(f64, f64)>::new()).is_err());
        assert!(TruncationSet::new([(1.0, 1.0)]).is_err());
        assert!(TruncationSet::new([(2.0, 1.0)]).is_err());
        assert!(TruncationSet::new([(f64::NAN, 1.0)]).is_err());
        assert!(TruncationSet::new([(INF, INF)]).is_err());
    }

    #[test]
    fn membership() {
        let t = TruncationSet::new([(-1.0, 1.0)]).unwrap();
        assert!(t.contains(0.0));
        assert!(!t.contains(1.0));
        assert!(!t.contains(-1.0));
        let gap = TruncationSet::symmetric_gap(2.0).unwrap();
        assert!(gap.contains(-3.0));
        assert!(!gap.contains(0.0));
        assert!(!gap.contains(2.0));
        assert!(gap.contains(1e300));
    }

    #[test]
    fn boundedness() {
        let t = TruncationSet::new([(-1.0, 1.0)]).unwrap();
        assert!(t.bounded_above() && t.bounded_below());
        let gap = TruncationSet::symmetric_gap(2.0).unwrap();
        assert!(!gap.bounded_above() && !gap.bounded_below());
        let half = TruncationSet::new([(0.0, INF)]).unwrap();
        assert!(!half.bounded_above() && half.bounded_below());
    }

    #[test]
    fn text_form() {
        let t: TruncationSet = "(-inf,-2),(2,inf)".parse().unwrap();
        assert_eq!(t, TruncationSet::symmetric_gap(2.0).unwrap());
        assert_eq!(t.to_string(), "(-inf,-2.0),(2.0,inf)");
        let t: TruncationSet = " ( -1 , 1 ) ".parse().unwrap();
        assert_eq!(t.intervals(), &[(-1.0, 1.0)]);
        for bad in ["", "(2,1)", "(1,2", "1,2", "(1,2)(3,4)", "(1,2),", "(nan,1)", "(1;2)", "(,)"] {
            assert!(bad.parse::<TruncationSet>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn reflect_and_affine() {
        let t = TruncationSet::new([(-INF, -2.0), (1.0, 3.0)]).unwrap();
        assert_eq!(t.reflect().intervals(), &[(-3.0, -1.0), (2.0, INF)]);
        assert_eq!(t.affine(1.0, 2.0).intervals(), &[(-INF, -3.0), (3.0, 7.0)]);
    }

    fn raw_intervals() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-50.0f64..50.0, 0.001f64..20.0), 1..8)
            .prop_map(|v| v.into_iter().map(|(a, w)| (a, a + w)).collect())
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(raw in raw_intervals()) {
            let t = TruncationSet::new(raw).unwrap();
            let again = TruncationSet::new(t.intervals().to_vec()).unwrap();
            prop_assert_eq!(&t, &again);
            for w in t.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
        }

        #[test]
        fn contains_matches_naive_scan(raw in raw_intervals(), probes in prop::collection::vec(-80.0f64..80.0, 50)) {
            let t = TruncationSet::new(raw.clone()).unwrap();
            for v in probes {
                let naive = raw.iter().any(|&(a, b)| a < v && v < b);
                // Merging touching intervals only adds shared endpoints.
                let shared = raw.iter().any(|&(a, b)| a == v || b == v);
                if !shared {
                    prop_assert_eq!(t.contains(v), naive);
                }
            }
        }

        #[test]
        fn text_round_trip(raw in raw_intervals()) {
            let t = TruncationSet::new(raw).unwrap();
            let back: TruncationSet = t.to_string().parse().unwrap();
            prop_assert_eq!(t, back);
        }
    }
}
