use std::sync::Arc;

use super::schedule::{block_run, bridge_word};
use super::{BlockSchedule, IrregularError};
use crate::symbolic::{Cylinder, Run, ShiftPoint, ShiftSpace, Symbol, SymbolSource, SymbolicError};

/// Where the planned levels end; the tail keeps alternating with
/// `H_{k+1} = 2 n_2^(k)` and `L_{k+1} = 2 n_1^(k+1)`.
#[derive(Clone, Copy, Debug)]
struct Tail {
    next: i64,
    last: Symbol,
    n2: u64,
}

#[derive(Debug)]
struct ScheduleSource {
    base: ShiftPoint,
    prefix_end: i64,
    space: ShiftSpace,
    gap: usize,
    high: Arc<[Symbol]>,
    low: Arc<[Symbol]>,
    /// Bridges and blocks after the prefix, contiguous and ascending.
    runs: Vec<Run>,
    tail: Tail,
}

impl ScheduleSource {
    fn bridge_run(&self, from: Symbol, to: Symbol, start: i64) -> Option<Run> {
        let w = bridge_word(&self.space, from, to, self.gap);
        (!w.is_empty()).then(|| Run {
            lo: start,
            hi: start + w.len() as i64,
            word: w.symbols().into(),
            anchor: start,
        })
    }

    fn tail_run(&self, j: i64) -> Run {
        let Tail { mut next, mut last, mut n2 } = self.tail;
        loop {
            let mut n1 = 0u64;
            for (word, high) in [(&self.high, true), (&self.low, false)] {
                if let Some(r) = self.bridge_run(last, word[0], next) {
                    if j < r.hi {
                        return r;
                    }
                }
                let start = next.saturating_add(self.gap as i64 - 1);
                let len = if high { n2.saturating_mul(2) } else { n1.saturating_mul(2) };
                let block = block_run(word, start, len);
                if j < block.hi || block.hi == i64::MAX {
                    return block;
                }
                next = block.hi;
                n1 = next as u64;
                last = word[((len - 1) % word.len() as u64) as usize];
            }
            n2 = next as u64;
        }
    }
}

impl SymbolSource for ScheduleSource {
    fn run_at(&self, j: i64) -> Run {
        if j <= self.prefix_end {
            let r = self.base.run_at(j);
            return Run {
                hi: r.hi.min(self.prefix_end + 1),
                ..r
            };
        }
        if j < self.tail.next {
            let k = self.runs.partition_point(|r| r.lo <= j) - 1;
            return self.runs[k].clone();
        }
        self.tail_run(j)
    }
}

fn invalid(msg: String) -> IrregularError {
    IrregularError::InvalidSchedule(msg)
}

fn check_layout(schedule: &BlockSchedule, space: &ShiftSpace, cylinder: &Cylinder) -> Result<(), IrregularError> {
    let required = space.spec_gap();
    if schedule.gap < required {
        return Err(SymbolicError::GapTooSmall {
            index: 0,
            gap: schedule.gap as i64,
            required,
        }
        .into());
    }
    if schedule.prefix_end < cylinder.hi() {
        return Err(invalid(format!(
            "prefix ends at {} inside the window ending at {}",
            schedule.prefix_end,
            cylinder.hi()
        )));
    }
    let gap = schedule.gap as i64;
    let mut end = schedule.prefix_end;
    let mut prev = (0u64, 0u64);
    for (k, lv) in schedule.levels.iter().enumerate() {
        let level = k + 1;
        if lv.high_start != end + gap {
            return Err(invalid(format!("level {level}: high block must start at {}", end + gap)));
        }
        if lv.high_len <= prev.0 || lv.low_len <= prev.1 {
            return Err(invalid(format!("level {level}: block lengths must increase")));
        }
        let n1 = lv.high_start as u64 + lv.high_len;
        if lv.n1 != n1 {
            return Err(invalid(format!("level {level}: n1 = {} but the high block ends at {n1}", lv.n1)));
        }
        if lv.low_start != n1 as i64 - 1 + gap {
            return Err(invalid(format!("level {level}: low block must start at {}", n1 as i64 - 1 + gap)));
        }
        let n2 = lv.low_start as u64 + lv.low_len;
        if lv.n2 != n2 {
            return Err(invalid(format!("level {level}: n2 = {} but the low block ends at {n2}", lv.n2)));
        }
        end = n2 as i64 - 1;
        prev = (lv.high_len, lv.low_len);
    }
    Ok(())
}

/// The point laid out by `schedule`: the cylinder base on coordinates up to
/// `prefix_end`, the planned blocks, then an unbounded doubling tail. With
/// no levels the point is the periodic extension of the window.
pub fn build_point(schedule: &BlockSchedule, space: &ShiftSpace) -> Result<ShiftPoint, IrregularError> {
    space.check_cyclic_word(&schedule.high)?;
    space.check_cyclic_word(&schedule.low)?;
    let cylinder = Cylinder::from_window(space, &schedule.window, schedule.window_lo)?;
    check_layout(schedule, space, &cylinder)?;
    let base = cylinder.base().clone();
    if schedule.levels.is_empty() {
        return Ok(base);
    }
    let mut source = ScheduleSource {
        prefix_end: schedule.prefix_end,
        space: space.clone(),
        gap: schedule.gap,
        high: schedule.high.symbols().into(),
        low: schedule.low.symbols().into(),
        runs: Vec::new(),
        tail: Tail {
            next: schedule.prefix_end + 1,
            last: base.symbol(schedule.prefix_end),
            n2: 0,
        },
        base,
    };
    let mut runs = Vec::new();
    let mut next = source.tail.next;
    let mut last = source.tail.last;
    for lv in &schedule.levels {
        for (word, start, len) in [(&source.high, lv.high_start, lv.high_len), (&source.low, lv.low_start, lv.low_len)] {
            runs.extend(source.bridge_run(last, word[0], next));
            let block = block_run(word, start, len);
            next = block.hi;
            last = word[((len - 1) % word.len() as u64) as usize];
            runs.push(block);
        }
    }
    source.runs = runs;
    source.tail = Tail {
        next,
        last,
        n2: schedule.levels.last().map_or(0, |l| l.n2),
    };
    Ok(ShiftPoint::from_source(Arc::new(source)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::MatrixCocycle;
    use crate::irregular::{plan_schedule, IrregularTarget, PlanOptions};
    use crate::linalg::Matrix;
    use crate::symbolic::Word;

    fn diag_example() -> MatrixCocycle {
        MatrixCocycle::new(vec![
            Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
            Matrix::identity(2, 2),
        ])
        .unwrap()
    }

    fn plan(space: &ShiftSpace, a: &MatrixCocycle, window: &str, high: &str, low: &str, tau: f64, k: usize) -> BlockSchedule {
        let cyl = Cylinder::centered(space, &window.parse().unwrap()).unwrap();
        let t = IrregularTarget::new(a, space, high.parse().unwrap(), low.parse().unwrap(), tau, &cyl, 1).unwrap();
        plan_schedule(a, space, &t, k, tau / 4.0, &PlanOptions::default()).unwrap()
    }

    #[test]
    fn empty_schedule_is_the_periodic_extension() {
        let space = ShiftSpace::full_shift(2);
        let s = plan(&space, &diag_example(), "011", "0", "1", 0.05, 0);
        let y = build_point(&s, &space).unwrap();
        let cyl = Cylinder::centered(&space, &"011".parse().unwrap()).unwrap();
        assert_eq!(y.window(-20, 20), cyl.base().window(-20, 20));
    }

    #[test]
    fn high_block_coordinates() {
        let a = MatrixCocycle::new(vec![
            Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
            Matrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.8]),
            Matrix::identity(2, 2),
        ])
        .unwrap();
        let space3 = ShiftSpace::full_shift(3);
        let s = plan(&space3, &a, "2", "01", "2", 0.05, 1);
        let y = build_point(&s, &space3).unwrap();
        let lv = &s.levels[0];
        assert_eq!(lv.high_start, space3.spec_gap() as i64);
        for k in 0..lv.high_len as i64 {
            assert_eq!(y.symbol(lv.high_start + k), [0, 1][(k % 2) as usize]);
        }
        for k in 0..lv.low_len as i64 {
            assert_eq!(y.symbol(lv.low_start + k), 2);
        }
        assert_eq!(y.symbol(0), 2);
    }

    #[test]
    fn golden_mean_transitions_are_legal() {
        let space = ShiftSpace::golden_mean();
        let a = MatrixCocycle::new(vec![
            Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
            Matrix::identity(2, 2),
        ])
        .unwrap();
        // "0" alone is the fixed point; "01" mixes in the identity
        let s = plan(&space, &a, "010", "0", "01", 0.03, 3);
        assert_eq!(s.gap, 2);
        let y = build_point(&s, &space).unwrap();
        assert!(space.check_point_window(&y, -100, 10_000));
        let far = s.levels.last().unwrap().n2 as i64;
        assert!(space.check_point_window(&y, far - 1000, far + 50_000));
        assert_eq!(y.window(-1, 1), "010".parse::<Word>().unwrap());
    }

    #[test]
    fn tail_keeps_doubling() {
        let space = ShiftSpace::full_shift(2);
        let s = plan(&space, &diag_example(), "0", "0", "1", 0.05, 1);
        let y = build_point(&s, &space).unwrap();
        let n2 = s.levels[0].n2 as i64;
        // next high block: starts right after n2 (N = 1), length 2 n2
        assert_eq!(y.run_at(n2).lo, n2);
        assert_eq!(y.run_at(n2).hi, n2 + 2 * n2);
        assert_eq!(y.symbol(3 * n2 - 1), 0);
        // then a low block of twice the elapsed time
        assert_eq!(y.run_at(3 * n2).hi, 3 * n2 + 6 * n2);
        assert_eq!(y.symbol(3 * n2), 1);
        assert_eq!(y.symbol(i64::MAX / 4), y.run_at(i64::MAX / 4).symbol(i64::MAX / 4));
    }

    #[test]
    fn tampered_schedule_is_refused() {
        let space = ShiftSpace::full_shift(2);
        let mut s = plan(&space, &diag_example(), "0", "0", "1", 0.05, 2);
        s.levels[1].n1 += 1;
        assert!(matches!(build_point(&s, &space), Err(IrregularError::InvalidSchedule(_))));
    }
}
