//! Signals on hybrid time domains and the operations the planner builds
//! plans with: concatenation, truncation/translation, reversal, and
//! `(tau, eps)`-closeness.
//!
//! A signal is stored as one sample grid per interval of its domain. Each
//! grid includes both interval endpoints, so a jump at `t_j` is represented
//! by the last sample of interval `j` and the first sample of interval
//! `j + 1`, both stored at the same `t`. Values between samples are linearly
//! interpolated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{HybridTime, HybridTimeDomain, Interval, TIME_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub value: Vec<f64>,
}

impl Sample {
    pub fn new(t: f64, value: Vec<f64>) -> Self {
        Self { t, value }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridSignal {
    dim: usize,
    segments: Vec<Vec<Sample>>,
}

/// State trajectory on a hybrid time domain.
pub type HybridArc = HybridSignal;
/// Input signal on a hybrid time domain.
pub type HybridInput = HybridSignal;

impl HybridSignal {
    /// Builds a signal from per-interval sample grids. Segment `j` is the grid
    /// on interval `j`; its first sample must coincide with the last sample
    /// time of segment `j - 1`.
    pub fn new(dim: usize, segments: Vec<Vec<Sample>>) -> Result<Self> {
        for (j, seg) in segments.iter().enumerate() {
            if seg.is_empty() {
                return Err(Error::InvalidDomain(format!("interval {j} has no samples")));
            }
            for s in seg {
                if s.value.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: s.value.len(),
                    });
                }
                if !s.t.is_finite() {
                    return Err(Error::InvalidDomain(format!("non-finite time in interval {j}")));
                }
            }
            if seg.windows(2).any(|w| w[1].t <= w[0].t) {
                return Err(Error::InvalidDomain(format!(
                    "sample times in interval {j} are not strictly increasing"
                )));
            }
        }
        let signal = Self { dim, segments };
        HybridTimeDomain::new(signal.intervals())?;
        Ok(signal)
    }

    /// A single flow interval.
    pub fn from_flow(dim: usize, samples: Vec<Sample>) -> Result<Self> {
        Self::new(dim, vec![samples])
    }

    /// The trivial signal with domain `{(0, 0)}`.
    pub fn point(value: Vec<f64>) -> Self {
        Self {
            dim: value.len(),
            segments: vec![vec![Sample::new(0.0, value)]],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[Vec<Sample>] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    fn intervals(&self) -> Vec<Interval> {
        self.segments
            .iter()
            .enumerate()
            .map(|(j, seg)| Interval::new(j, seg[0].t, seg[seg.len() - 1].t))
            .collect()
    }

    pub fn domain(&self) -> HybridTimeDomain {
        HybridTimeDomain::new(self.intervals()).expect("signal invariants guarantee a valid domain")
    }

    pub fn max_point(&self) -> Result<HybridTime> {
        let last = self.segments.last().ok_or(Error::EmptyDomain)?;
        Ok(HybridTime::new(last[last.len() - 1].t, self.segments.len() - 1))
    }

    pub fn first_value(&self) -> Option<&[f64]> {
        self.segments.first().map(|s| s[0].value.as_slice())
    }

    pub fn last_value(&self) -> Option<&[f64]> {
        self.segments
            .last()
            .map(|s| s[s.len() - 1].value.as_slice())
    }

    /// Iterates over all stored samples as `(j, sample)`, in hybrid time order.
    pub fn iter_samples(&self) -> impl Iterator<Item = (usize, &Sample)> {
        self.segments
            .iter()
            .enumerate()
            .flat_map(|(j, seg)| seg.iter().map(move |s| (j, s)))
    }

    pub fn sample_count(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }

    /// Value at `(t, j)`, linearly interpolated between samples. `None` if the
    /// point is outside the domain.
    pub fn value_at(&self, p: HybridTime) -> Option<Vec<f64>> {
        let seg = self.segments.get(p.j)?;
        interpolate(seg, p.t)
    }
}

fn lerp(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
}

fn interpolate(seg: &[Sample], t: f64) -> Option<Vec<f64>> {
    let first = &seg[0];
    let last = &seg[seg.len() - 1];
    if t < first.t - TIME_TOL || t > last.t + TIME_TOL {
        return None;
    }
    if t <= first.t {
        return Some(first.value.clone());
    }
    if t >= last.t {
        return Some(last.value.clone());
    }
    let k = seg.partition_point(|s| s.t <= t);
    let (a, b) = (&seg[k - 1], &seg[k]);
    if t == a.t {
        return Some(a.value.clone());
    }
    Some(lerp(&a.value, &b.value, (t - a.t) / (b.t - a.t)))
}

/// Concatenation `first | second`: the domain of `second` is shifted by
/// `(T, J) = max dom first`; `second` takes over at `(T, J)` itself.
pub fn concatenate(first: &HybridSignal, second: &HybridSignal) -> Result<HybridSignal> {
    let end = first.max_point().map_err(|_| Error::NonCompact)?;
    if second.is_empty() {
        return Ok(first.clone());
    }
    if first.dim != second.dim {
        return Err(Error::DimensionMismatch {
            expected: first.dim,
            got: second.dim,
        });
    }
    let shift = |s: &Sample| Sample::new(s.t + end.t, s.value.clone());
    let mut segments = first.segments.clone();
    let joined = segments.last_mut().expect("first is nonempty");
    joined.pop();
    joined.extend(second.segments[0].iter().map(shift));
    for seg in &second.segments[1..] {
        segments.push(seg.iter().map(shift).collect());
    }
    HybridSignal::new(first.dim, segments)
}

/// Index of the sample at time `t` (within [`TIME_TOL`]) in a segment.
fn sample_index(seg: &[Sample], t: f64) -> Option<usize> {
    let k = seg.partition_point(|s| s.t < t - TIME_TOL);
    (k < seg.len() && (seg[k].t - t).abs() <= TIME_TOL).then_some(k)
}

/// Samples of `seg` restricted to `[lo, hi]`, with interpolated samples
/// inserted at the bounds when they fall between stored samples.
fn clip_segment(seg: &[Sample], lo: f64, hi: f64) -> Vec<Sample> {
    let mut out = Vec::new();
    let lo = lo.max(seg[0].t);
    let hi = hi.min(seg[seg.len() - 1].t);
    match sample_index(seg, lo) {
        Some(k) => out.push(seg[k].clone()),
        None => out.push(Sample::new(lo, interpolate(seg, lo).expect("lo inside segment"))),
    }
    let start_t = out[0].t;
    let hi_index = sample_index(seg, hi);
    let hi_t = hi_index.map_or(hi, |k| seg[k].t);
    out.extend(
        seg.iter()
            .filter(|s| s.t > start_t && s.t < hi_t)
            .cloned(),
    );
    if hi_t > start_t {
        match hi_index {
            Some(k) => out.push(seg[k].clone()),
            None => out.push(Sample::new(hi, interpolate(seg, hi).expect("hi inside segment"))),
        }
    }
    out
}

/// Truncation of `signal` between `from` and `to`, translated so that `from`
/// becomes `(0, 0)`.
pub fn truncate_translate(
    signal: &HybridSignal,
    from: HybridTime,
    to: HybridTime,
) -> Result<HybridSignal> {
    let domain = signal.domain();
    if !domain.contains(from) || !domain.contains(to) || from.j > to.j || from.t > to.t + TIME_TOL {
        return Err(Error::TruncationOutOfDomain);
    }
    let mut segments: Vec<Vec<Sample>> = (from.j..=to.j)
        .map(|j| clip_segment(&signal.segments[j], from.t, to.t))
        .collect();
    let origin = segments[0][0].t;
    for seg in &mut segments {
        for s in seg.iter_mut() {
            s.t -= origin;
        }
    }
    segments[0][0].t = 0.0;
    HybridSignal::new(signal.dim, segments)
}

fn reflect_arc(signal: &HybridSignal) -> Result<HybridSignal> {
    let end = signal.max_point()?;
    let segments = signal
        .segments
        .iter()
        .rev()
        .map(|seg| {
            seg.iter()
                .rev()
                .map(|s| Sample::new(end.t - s.t, s.value.clone()))
                .collect()
        })
        .collect();
    HybridSignal::new(signal.dim, segments)
}

/// Reflected input grid. Interior samples take the reflected value; the end
/// of an interval followed by a jump takes the jump input of the original;
/// remaining boundary points, whose value is free, take the continuous
/// extension from the neighbouring sample of the same interval.
fn reflect_input(input: &HybridSignal) -> Result<HybridSignal> {
    let end = input.max_point()?;
    let last_j = end.j;
    let mut segments = Vec::with_capacity(input.segments.len());
    for jr in 0..=last_j {
        let orig_j = last_j - jr;
        let orig = &input.segments[orig_j];
        let n = orig.len();
        let mut seg = Vec::with_capacity(n);
        for p in 0..n {
            let q = n - 1 - p;
            let t = end.t - orig[q].t;
            let value = if p == n - 1 && jr < last_j {
                let prev = &input.segments[orig_j - 1];
                prev[prev.len() - 1].value.clone()
            } else if (p == 0 || p == n - 1) && n >= 2 {
                let neighbor = if p == 0 { q - 1 } else { q + 1 };
                orig[neighbor].value.clone()
            } else {
                orig[q].value.clone()
            };
            seg.push(Sample::new(t, value));
        }
        segments.push(seg);
    }
    HybridSignal::new(input.dim, segments)
}

/// Checks the two conditions of `(tau, eps)`-closeness on the union of both
/// sample grids (plus midpoints), using linear interpolation between samples.
pub fn are_close(a: &HybridArc, b: &HybridArc, tau: f64, eps: f64) -> bool {
    one_sided_close(a, b, tau, eps) && one_sided_close(b, a, tau, eps)
}

fn one_sided_close(a: &HybridArc, b: &HybridArc, tau: f64, eps: f64) -> bool {
    for (j, seg) in a.segments.iter().enumerate() {
        // `tau - j` may round just below a boundary time that equals it.
        let limit = tau - j as f64 + TIME_TOL;
        if seg[0].t > limit {
            break;
        }
        let Some(other) = b.segments.get(j) else {
            return false;
        };
        let mut times: Vec<f64> = seg.iter().map(|s| s.t).collect();
        times.extend(seg.windows(2).map(|w| 0.5 * (w[0].t + w[1].t)));
        let (lo, hi) = (seg[0].t, seg[seg.len() - 1].t);
        let (first, last) = (
            other.partition_point(|s| s.t <= lo),
            other.partition_point(|s| s.t < hi),
        );
        times.extend(other[first..last.max(first)].iter().map(|s| s.t));
        if limit > lo && limit < hi {
            times.push(limit);
        }
        for t in times.into_iter().filter(|&t| t <= limit) {
            let va = interpolate(seg, t).expect("time inside segment");
            if !window_reaches(other, &va, t, eps) {
                return false;
            }
        }
    }
    true
}

/// Whether the piecewise-linear curve `seg`, restricted to times strictly
/// within `eps` of `t`, comes strictly closer than `eps` to `v`. Pieces are
/// tried outward from `t`, where a match is most likely.
fn window_reaches(seg: &[Sample], v: &[f64], t: f64, eps: f64) -> bool {
    let half = eps * (1.0 - 1e-12);
    let lo = (t - half).max(seg[0].t);
    let hi = (t + half).min(seg[seg.len() - 1].t);
    if lo > hi {
        return false;
    }
    if seg.len() == 1 {
        return dist(v, &seg[0].value) < eps;
    }
    let lo_value = interpolate(seg, lo).expect("inside");
    let hi_value = interpolate(seg, hi).expect("inside");
    let first = seg.partition_point(|s| s.t <= lo);
    let last = seg.partition_point(|s| s.t < hi).max(first);
    // Window points: the interpolated bound at `lo`, the stored samples
    // strictly inside, and the interpolated bound at `hi`.
    let inner = last - first;
    let count = 1 + inner + usize::from(hi > lo);
    let point = |k: usize| -> &[f64] {
        if k == 0 {
            &lo_value
        } else if k <= inner {
            &seg[first + k - 1].value
        } else {
            &hi_value
        }
    };
    if count == 1 {
        return dist(v, point(0)) < eps;
    }
    let pieces = count - 1;
    let center = (seg.partition_point(|s| s.t <= t).saturating_sub(first)).min(pieces - 1);
    let near = |k: usize| point_segment_distance(v, point(k), point(k + 1)) < eps;
    (0..pieces).any(|d| {
        (center + d < pieces && near(center + d)) || (d > 0 && d <= center && near(center - d))
    })
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    if len2 == 0.0 {
        return dist(p, a);
    }
    let w = p
        .iter()
        .zip(a)
        .zip(&ab)
        .map(|((pi, ai), d)| (pi - ai) * d)
        .sum::<f64>()
        / len2;
    let w = w.clamp(0.0, 1.0);
    dist(p, &lerp(a, b, w))
}

/// A hybrid arc and a hybrid input sharing one domain and one sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    arc: HybridArc,
    input: HybridInput,
}

impl SolutionPair {
    pub fn new(arc: HybridArc, input: HybridInput) -> Result<Self> {
        let same_grid = arc.segments.len() == input.segments.len()
            && arc.segments.iter().zip(&input.segments).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x.t - y.t).abs() <= TIME_TOL)
            });
        if !same_grid {
            return Err(Error::DomainMismatch);
        }
        Ok(Self { arc, input })
    }

    /// The trivial pair on `{(0, 0)}`.
    pub fn point(x: Vec<f64>, u: Vec<f64>) -> Self {
        Self {
            arc: HybridSignal::point(x),
            input: HybridSignal::point(u),
        }
    }

    pub fn arc(&self) -> &HybridArc {
        &self.arc
    }

    pub fn input(&self) -> &HybridInput {
        &self.input
    }

    pub fn into_parts(self) -> (HybridArc, HybridInput) {
        (self.arc, self.input)
    }

    pub fn state_dim(&self) -> usize {
        self.arc.dim
    }

    pub fn input_dim(&self) -> usize {
        self.input.dim
    }

    pub fn domain(&self) -> HybridTimeDomain {
        self.arc.domain()
    }

    pub fn max_point(&self) -> Result<HybridTime> {
        self.arc.max_point()
    }

    pub fn initial_state(&self) -> &[f64] {
        self.arc.first_value().expect("pairs are nonempty")
    }

    pub fn final_state(&self) -> &[f64] {
        self.arc.last_value().expect("pairs are nonempty")
    }

    pub fn initial_input(&self) -> &[f64] {
        self.input.first_value().expect("pairs are nonempty")
    }

    pub fn jump_count(&self) -> usize {
        self.arc.segments.len().saturating_sub(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.domain().is_trivial()
    }

    pub fn is_purely_continuous(&self) -> bool {
        self.domain().is_purely_continuous()
    }

    pub fn is_purely_discrete(&self) -> bool {
        self.domain().is_purely_discrete()
    }

    /// Iterates over `(hybrid time, state, input)` at every stored sample.
    pub fn iter_samples(&self) -> impl Iterator<Item = (HybridTime, &[f64], &[f64])> {
        self.arc
            .iter_samples()
            .zip(self.input.iter_samples())
            .map(|((j, x), (_, u))| (HybridTime::new(x.t, j), x.value.as_slice(), u.value.as_slice()))
    }

    pub fn concatenate(&self, other: &SolutionPair) -> Result<SolutionPair> {
        SolutionPair::new(
            concatenate(&self.arc, &other.arc)?,
            concatenate(&self.input, &other.input)?,
        )
    }

    pub fn truncate_translate(&self, from: HybridTime, to: HybridTime) -> Result<SolutionPair> {
        SolutionPair::new(
            truncate_translate(&self.arc, from, to)?,
            truncate_translate(&self.input, from, to)?,
        )
    }

    pub fn reverse(&self) -> Result<SolutionPair> {
        reverse(self)
    }
}

/// Reversal of a compact solution pair: `dom' = {(T, J)} - dom` and
/// `phi'(t, j) = phi(T - t, J - j)`. Jump inputs are carried over with the
/// shifted index; free boundary input values use the continuous extension.
pub fn reverse(pair: &SolutionPair) -> Result<SolutionPair> {
    SolutionPair::new(reflect_arc(&pair.arc)?, reflect_input(&pair.input)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(dim_values: &[(f64, f64)]) -> HybridSignal {
        HybridSignal::from_flow(
            1,
            dim_values
                .iter()
                .map(|&(t, v)| Sample::new(t, vec![v]))
                .collect(),
        )
        .unwrap()
    }

    fn linear(n: usize, len: f64, offset: f64) -> HybridSignal {
        flow(
            &(0..=n)
                .map(|k| {
                    let t = len * k as f64 / n as f64;
                    (t, t + offset)
                })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn rejects_unordered_samples() {
        let r = HybridSignal::from_flow(1, vec![Sample::new(0.0, vec![0.0]), Sample::new(0.0, vec![1.0])]);
        assert!(r.is_err());
    }

    #[test]
    fn concatenating_a_point_replaces_the_endpoint() {
        let first = flow(&[(0.0, 1.0), (0.5, 2.0), (1.0, 3.0)]);
        let second = HybridSignal::point(vec![9.0]);
        let c = concatenate(&first, &second).unwrap();
        assert_eq!(c.domain().intervals(), first.domain().intervals());
        assert_eq!(c.value_at(HybridTime::new(0.5, 0)).unwrap(), vec![2.0]);
        assert_eq!(c.value_at(HybridTime::new(1.0, 0)).unwrap(), vec![9.0]);
    }

    #[test]
    fn concatenating_a_jump_adds_an_interval() {
        let first = flow(&[(0.0, 1.0), (1.0, 3.0)]);
        let jump = HybridSignal::new(
            1,
            vec![vec![Sample::new(0.0, vec![3.0])], vec![Sample::new(0.0, vec![-3.0])]],
        )
        .unwrap();
        let c = concatenate(&first, &jump).unwrap();
        assert_eq!(
            c.domain().intervals(),
            &[Interval::new(0, 0.0, 1.0), Interval::new(1, 1.0, 1.0)]
        );
        assert_eq!(c.value_at(HybridTime::new(1.0, 1)).unwrap(), vec![-3.0]);
    }

    #[test]
    fn concatenate_onto_empty_fails() {
        let empty = HybridSignal::new(1, vec![]).unwrap();
        assert_eq!(
            concatenate(&empty, &HybridSignal::point(vec![0.0])),
            Err(Error::NonCompact)
        );
    }

    #[test]
    fn truncation_examples() {
        let s = linear(4, 2.0, 0.0);
        let full = truncate_translate(&s, HybridTime::new(0.0, 0), HybridTime::new(2.0, 0)).unwrap();
        assert_eq!(full, s);

        let part = truncate_translate(&s, HybridTime::new(0.5, 0), HybridTime::new(1.5, 0)).unwrap();
        assert_eq!(part.domain().intervals(), &[Interval::new(0, 0.0, 1.0)]);
        for &t in &[0.0, 0.25, 0.7, 1.0] {
            let got = part.value_at(HybridTime::new(t, 0)).unwrap()[0];
            let want = s.value_at(HybridTime::new(t + 0.5, 0)).unwrap()[0];
            assert!((got - want).abs() < 1e-12);
        }

        let two = HybridSignal::new(
            1,
            vec![
                vec![Sample::new(0.0, vec![0.0]), Sample::new(2.0, vec![2.0])],
                vec![Sample::new(2.0, vec![-2.0]), Sample::new(3.0, vec![-1.0])],
            ],
        )
        .unwrap();
        let jump = truncate_translate(&two, HybridTime::new(2.0, 0), HybridTime::new(2.0, 1)).unwrap();
        assert_eq!(
            jump.domain().intervals(),
            &[Interval::new(0, 0.0, 0.0), Interval::new(1, 0.0, 0.0)]
        );
        assert_eq!(jump.value_at(HybridTime::new(0.0, 1)).unwrap(), vec![-2.0]);

        assert_eq!(
            truncate_translate(&s, HybridTime::new(0.0, 0), HybridTime::new(3.0, 0)),
            Err(Error::TruncationOutOfDomain)
        );
        assert_eq!(
            truncate_translate(&s, HybridTime::new(0.0, 1), HybridTime::new(1.0, 1)),
            Err(Error::TruncationOutOfDomain)
        );
    }

    #[test]
    fn reversal_examples() {
        let arc = flow(&[(0.0, 2.0), (0.5, 2.0), (1.0, 2.0)]);
        let input = flow(&[(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]);
        let pair = SolutionPair::new(arc.clone(), input.clone()).unwrap();
        let r = reverse(&pair).unwrap();
        assert_eq!(r.arc(), &arc);
        assert_eq!(r.input(), &input);

        let jump_arc = HybridSignal::new(
            1,
            vec![vec![Sample::new(0.0, vec![5.0])], vec![Sample::new(0.0, vec![7.0])]],
        )
        .unwrap();
        let jump_input = HybridSignal::new(
            1,
            vec![vec![Sample::new(0.0, vec![0.3])], vec![Sample::new(0.0, vec![0.0])]],
        )
        .unwrap();
        let r = reverse(&SolutionPair::new(jump_arc, jump_input).unwrap()).unwrap();
        assert_eq!(r.arc().value_at(HybridTime::new(0.0, 0)).unwrap(), vec![7.0]);
        assert_eq!(r.arc().value_at(HybridTime::new(0.0, 1)).unwrap(), vec![5.0]);
        assert_eq!(r.input().value_at(HybridTime::new(0.0, 0)).unwrap(), vec![0.3]);
    }

    #[test]
    fn closeness_examples() {
        let a = linear(20, 1.0, 0.0);
        let b = linear(20, 1.0, 0.05);
        assert!(are_close(&a, &a, 1.0, 1e-6));
        assert!(are_close(&a, &b, 1.0, 0.1));
        assert!(!are_close(&a, &b, 1.0, 0.04));

        let jumped = HybridSignal::new(
            1,
            vec![
                a.segments()[0].clone(),
                vec![Sample::new(1.0, vec![1.0])],
            ],
        )
        .unwrap();
        assert!(!are_close(&a, &jumped, 2.0, 0.5));
    }

    #[test]
    fn closeness_sees_a_final_jump_despite_rounding() {
        // (T + 2) - 2 rounds below T for this T.
        let t = 2.241124169934951;
        let flow = vec![Sample::new(0.0, vec![0.0]), Sample::new(1.0, vec![0.0])];
        let tail = vec![Sample::new(1.0, vec![0.0]), Sample::new(t, vec![0.0])];
        let two = HybridSignal::new(1, vec![flow.clone(), tail.clone(), vec![Sample::new(t, vec![0.0])]])
            .unwrap();
        let one = HybridSignal::new(1, vec![flow, tail]).unwrap();
        assert!(!are_close(&two, &one, t + 2.0, 0.5));
    }
}
