use std::sync::Arc;

use super::{Run, ShiftPoint, ShiftSpace, SymbolSource, SymbolicError};

/// The window `start..=end` of `point` to be copied verbatim.
#[derive(Clone, Debug)]
pub struct Segment {
    pub point: ShiftPoint,
    pub start: i64,
    pub end: i64,
}

impl Segment {
    pub fn new(point: ShiftPoint, start: i64, end: i64) -> Self {
        Self { point, start, end }
    }
}

#[derive(Debug)]
struct Part {
    lo: i64,
    hi: i64,
    point: ShiftPoint,
}

/// Concatenation of parts covering all of Z.
#[derive(Debug)]
struct SplicedSource {
    parts: Vec<Part>,
}

impl SymbolSource for SplicedSource {
    fn run_at(&self, j: i64) -> Run {
        let idx = self.parts.partition_point(|p| p.hi <= j);
        let part = &self.parts[idx.min(self.parts.len() - 1)];
        let mut run = part.point.run_at(j);
        run.lo = run.lo.max(part.lo);
        run.hi = run.hi.min(part.hi);
        run
    }
}

/// Shadow the given orbit windows by a single point.
///
/// The result agrees with `segments[j].point` on `start_j..=end_j`,
/// follows the first point to the left of the first window and the last
/// point to the right of the last window, and fills every gap with the
/// lexicographically least legal bridge.
pub fn splice(segments: &[Segment], space: &ShiftSpace) -> Result<ShiftPoint, SymbolicError> {
    if segments.is_empty() {
        return Err(SymbolicError::EmptySplice);
    }
    for (k, s) in segments.iter().enumerate() {
        if s.start > s.end {
            return Err(SymbolicError::BadWindow(k));
        }
    }
    let n = space.spec_gap();
    for (k, pair) in segments.windows(2).enumerate() {
        let gap = pair[1].start - pair[0].end;
        if gap < n as i64 {
            return Err(SymbolicError::GapTooSmall {
                index: k,
                gap,
                required: n,
            });
        }
    }
    let last = segments.len() - 1;
    let mut parts = Vec::with_capacity(2 * segments.len());
    for (k, seg) in segments.iter().enumerate() {
        let lo = if k == 0 { i64::MIN } else { seg.start };
        let hi = if k == last { i64::MAX } else { seg.end + 1 };
        parts.push(Part {
            lo,
            hi,
            point: seg.point.clone(),
        });
        if k < last {
            let next = &segments[k + 1];
            let len = (next.start - seg.end - 1) as usize;
            if len > 0 {
                let from = seg.point.symbol(seg.end);
                let to = next.point.symbol(next.start);
                let bridge = space.bridge(from, to, len).ok_or(SymbolicError::GapTooSmall {
                    index: k,
                    gap: next.start - seg.end,
                    required: n,
                })?;
                parts.push(Part {
                    lo: seg.end + 1,
                    hi: next.start,
                    point: ShiftPoint::periodic_from(&bridge, seg.end + 1),
                });
            }
        }
    }
    Ok(ShiftPoint::from_source(Arc::new(SplicedSource { parts })))
}
