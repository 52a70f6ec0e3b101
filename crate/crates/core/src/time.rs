//! Hybrid time and hybrid time domains.
//!
//! A compact hybrid time domain is stored as its list of intervals
//! `[t_j, t_{j+1}] x {j}` for `j = 0..=J`. Endpoints are compared with an
//! absolute tolerance of [`TIME_TOL`] seconds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance, in seconds, used when matching interval endpoints.
pub const TIME_TOL: f64 = 1e-9;

/// A point `(t, j)` of hybrid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridTime {
    pub t: f64,
    pub j: usize,
}

impl HybridTime {
    pub fn new(t: f64, j: usize) -> Self {
        Self { t, j }
    }
}

/// One interval `[t_start, t_end] x {j}` of a hybrid time domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub j: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl Interval {
    pub fn new(j: usize, t_start: f64, t_end: f64) -> Self {
        Self { j, t_start, t_end }
    }

    pub fn has_interior(&self) -> bool {
        self.t_end - self.t_start > TIME_TOL
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start - TIME_TOL && t <= self.t_end + TIME_TOL
    }
}

/// Returns true iff `intervals` describes a (compact) hybrid time domain:
/// jump indices run `0, 1, 2, ...`, the first interval starts at `t = 0`,
/// every interval is ordered, and consecutive intervals share endpoints.
pub fn is_hybrid_time_domain(intervals: &[Interval]) -> bool {
    validate_intervals(intervals).is_ok()
}

fn validate_intervals(intervals: &[Interval]) -> Result<()> {
    for (k, iv) in intervals.iter().enumerate() {
        if iv.j != k {
            return Err(Error::InvalidDomain(format!(
                "interval {k} has jump index {}",
                iv.j
            )));
        }
        if !iv.t_start.is_finite() || !iv.t_end.is_finite() {
            return Err(Error::InvalidDomain(format!("interval {k} is unbounded")));
        }
        if iv.t_start > iv.t_end + TIME_TOL {
            return Err(Error::InvalidDomain(format!(
                "interval {k} ends before it starts"
            )));
        }
        if k == 0 && iv.t_start.abs() > TIME_TOL {
            return Err(Error::InvalidDomain("domain must start at t = 0".into()));
        }
        if k > 0 && (intervals[k - 1].t_end - iv.t_start).abs() > TIME_TOL {
            return Err(Error::InvalidDomain(format!(
                "interval {} ends at {} but interval {k} starts at {}",
                k - 1,
                intervals[k - 1].t_end,
                iv.t_start
            )));
        }
    }
    Ok(())
}

/// A compact hybrid time domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct HybridTimeDomain {
    intervals: Vec<Interval>,
}

impl TryFrom<Vec<Interval>> for HybridTimeDomain {
    type Error = Error;

    fn try_from(intervals: Vec<Interval>) -> Result<Self> {
        Self::new(intervals)
    }
}

impl From<HybridTimeDomain> for Vec<Interval> {
    fn from(d: HybridTimeDomain) -> Self {
        d.intervals
    }
}

impl HybridTimeDomain {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        validate_intervals(&intervals)?;
        Ok(Self { intervals })
    }

    /// Builds a domain from `(j, t_start, t_end)` triples.
    pub fn from_triples(triples: &[(usize, f64, f64)]) -> Result<Self> {
        Self::new(
            triples
                .iter()
                .map(|&(j, a, b)| Interval::new(j, a, b))
                .collect(),
        )
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `(T, J) = max dom`, attained at the right endpoint of the last interval.
    pub fn max_point(&self) -> Result<HybridTime> {
        let last = self.intervals.last().ok_or(Error::EmptyDomain)?;
        Ok(HybridTime::new(last.t_end, last.j))
    }

    pub fn contains(&self, p: HybridTime) -> bool {
        self.intervals.get(p.j).is_some_and(|iv| iv.contains(p.t))
    }

    /// Purely continuous: nontrivial and no jumps.
    pub fn is_purely_continuous(&self) -> bool {
        self.intervals.len() == 1 && self.intervals[0].has_interior()
    }

    /// Purely discrete: nontrivial and no flow.
    pub fn is_purely_discrete(&self) -> bool {
        self.intervals.len() > 1 && self.intervals.iter().all(|iv| !iv.has_interior())
    }

    pub fn is_trivial(&self) -> bool {
        self.intervals.len() <= 1 && self.intervals.iter().all(|iv| !iv.has_interior())
    }

    /// Interval-wise equality up to [`TIME_TOL`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.intervals.len() == other.intervals.len()
            && self.intervals.iter().zip(&other.intervals).all(|(a, b)| {
                (a.t_start - b.t_start).abs() <= TIME_TOL && (a.t_end - b.t_end).abs() <= TIME_TOL
            })
    }

    /// `dom self ∪ (other + {(T, J)})` where `(T, J) = max dom self`.
    pub fn concatenate(&self, other: &Self) -> Result<Self> {
        let end = self.max_point().map_err(|_| Error::NonCompact)?;
        let mut out = self.intervals.clone();
        for iv in &other.intervals {
            let shifted = Interval::new(iv.j + end.j, iv.t_start + end.t, iv.t_end + end.t);
            if iv.j == 0 {
                let last = out.last_mut().expect("nonempty");
                last.t_end = last.t_end.max(shifted.t_end);
            } else {
                out.push(shifted);
            }
        }
        Self::new(out)
    }

    /// `{(T, J)} - dom self` (Minkowski difference), reflecting and
    /// re-sorting the interval list.
    pub fn reflect(&self) -> Result<Self> {
        let end = self.max_point()?;
        let mut out: Vec<Interval> = self
            .intervals
            .iter()
            .map(|iv| Interval::new(end.j - iv.j, end.t - iv.t_end, end.t - iv.t_start))
            .collect();
        out.sort_by_key(|iv| iv.j);
        if let Some(first) = out.first_mut() {
            first.t_start = 0.0;
        }
        Self::new(out)
    }
}
