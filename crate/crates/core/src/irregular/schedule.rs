use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{IrregularError, IrregularTarget, CERTIFICATION_SLACK};
use crate::cocycle::MatrixCocycle;
use crate::linalg::ScaledMatrix;
use crate::symbolic::{Run, ShiftSpace, Symbol, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    High,
    Low,
}

/// The single-level sufficient inequalities
/// `e^{H(a-2ε)} / (√2 l) > C^N e^{(H+N)(a-τ)}` and
/// `l² e^l e^{L(b+ε)} C^{H+2N} < e^{(b+τ)(L+H+2N)}`, evaluated at
/// `H = H_k`, `L = L_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub pesin_level: f64,
    pub bound: f64,
    pub high_holds: bool,
    pub low_holds: bool,
    /// Smallest real `H` satisfying the first inequality.
    pub high_min: f64,
    /// Smallest real `L` satisfying the second one for this `H`.
    pub low_min: f64,
}

impl ClosedForm {
    #[allow(clippy::too_many_arguments)]
    fn evaluate(l: f64, c: f64, n: usize, a: f64, b: f64, tau: f64, eps: f64, h: u64, len: u64) -> Self {
        let (n, h, len) = (n as f64, h as f64, len as f64);
        let lc = c.ln();
        let high_lhs = h * (a - 2.0 * eps) - (2f64.sqrt() * l).ln();
        let high_rhs = n * lc + (h + n) * (a - tau);
        let low_lhs = 2.0 * l.ln() + l + len * (b + eps) + (h + 2.0 * n) * lc;
        let low_rhs = (b + tau) * (len + h + 2.0 * n);
        Self {
            pesin_level: l,
            bound: c,
            high_holds: high_lhs > high_rhs,
            low_holds: low_lhs < low_rhs,
            high_min: (n * lc + n * (a - tau) + (2f64.sqrt() * l).ln()) / (tau - 2.0 * eps),
            low_min: (2.0 * l.ln() + l + (h + 2.0 * n) * (lc - b - tau)) / (tau - eps),
        }
    }
}

/// One high block followed by one low block.
///
/// Blocks occupy the half-open coordinate ranges `[start, start + len)`;
/// `n1` and `n2` are the ends of the high and low block, so `A(y, n1)`
/// covers everything up to and including the high block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleLevel {
    pub high_start: i64,
    pub high_len: u64,
    pub low_start: i64,
    pub low_len: u64,
    pub n1: u64,
    pub n2: u64,
    /// Running averages seen by the planner at `n1` and `n2`.
    pub planned_high: f64,
    pub planned_low: f64,
    pub closed_form: Option<ClosedForm>,
}

/// Layout of a constructed point: the cylinder window (closed up
/// periodically) on coordinates `<= prefix_end`, then for every level a
/// bridge, a high block, a bridge, a low block. Consecutive segments are
/// `gap` apart, i.e. separated by `gap - 1` bridging symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub window: Word,
    pub window_lo: i64,
    pub prefix_end: i64,
    pub gap: usize,
    pub high: Word,
    pub low: Word,
    pub levels: Vec<ScheduleLevel>,
}

impl BlockSchedule {
    pub fn certified_times(&self) -> Vec<u64> {
        self.levels.iter().flat_map(|l| [l.n1, l.n2]).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanOptions {
    /// Distance kept from each threshold; defaults to `τ/10`.
    pub margin: Option<f64>,
    /// Certified times must exceed this (`n` in `O_n`).
    pub min_time: u64,
    /// Longest block the search may try.
    pub max_block: u64,
    pub growth: f64,
    /// Pesin level `l` for logging the closed-form inequalities.
    pub pesin_level: Option<f64>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            margin: None,
            min_time: 0,
            max_block: 1 << 50,
            growth: 1.25,
            pesin_level: None,
        }
    }
}

pub(crate) fn block_run(word: &Arc<[Symbol]>, start: i64, len: u64) -> Run {
    Run {
        lo: start,
        hi: start.saturating_add(len.min(i64::MAX as u64) as i64),
        word: word.clone(),
        anchor: start,
    }
}

pub(crate) fn bridge_word(space: &ShiftSpace, from: Symbol, to: Symbol, gap: usize) -> Word {
    space
        .bridge(from, to, gap - 1)
        .expect("bridges of length at least N - 1 exist in a primitive shift")
}

/// Least length in the explored range passing `test`: grow geometrically
/// from `min`, then bisect back towards the last failure. The running
/// average need not be monotone, so the result is a passing length, not
/// necessarily the least one overall.
fn search(
    min: u64,
    cap: u64,
    growth: f64,
    test: impl Fn(u64) -> (bool, f64),
) -> Result<u64, f64> {
    let mut failed = None;
    let mut len = min.max(1);
    loop {
        let (pass, value) = test(len);
        if pass {
            break;
        }
        if len >= cap {
            return Err(value);
        }
        failed = Some(len);
        len = ((len as f64 * growth).ceil() as u64).max(len + 1).min(cap);
    }
    if let Some(mut lo) = failed {
        let mut hi = len;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if test(mid).0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        len = hi;
    }
    Ok(len)
}

/// Adaptive block schedule for `levels` levels.
///
/// `a` is the cocycle the target's exponents refer to. Each high block is
/// the shortest found whose end sees a running average above
/// `a - τ + margin`; each low block likewise below `b + τ - margin`.
pub fn plan_schedule(
    a: &MatrixCocycle,
    space: &ShiftSpace,
    target: &IrregularTarget,
    levels: usize,
    epsilon: f64,
    options: &PlanOptions,
) -> Result<BlockSchedule, IrregularError> {
    let tau = target.tau;
    if !(target.a - 2.0 * tau > target.b + 2.0 * tau) {
        return Err(IrregularError::NoGap {
            high: target.a - 2.0 * tau,
            low: target.b + 2.0 * tau,
        });
    }
    if !(epsilon > 0.0 && epsilon < tau / 2.0) {
        return Err(IrregularError::InvalidEpsilon { epsilon, tau });
    }
    space.check_cyclic_word(&target.high)?;
    space.check_cyclic_word(&target.low)?;
    a.check_alphabet(target.high.symbols())?;
    a.check_alphabet(target.low.symbols())?;
    let cylinder = target.cylinder(space)?;
    let base = cylinder.base();
    let prefix_end = cylinder.hi().max(0);
    let gap = space.spec_gap();
    let margin = options.margin.unwrap_or(tau / 10.0).max(2.0 * CERTIFICATION_SLACK);
    let high: Arc<[Symbol]> = target.high.symbols().into();
    let low: Arc<[Symbol]> = target.low.symbols().into();

    let mut acc = a.scaled_product(base, (prefix_end + 1) as u64);
    let mut t = prefix_end + 1;
    let mut last = base.symbol(prefix_end);
    let mut prev = (0u64, 0u64);
    let mut planned = Vec::with_capacity(levels);

    // Appends a bridge and a block of the found length; returns the block
    // start and the running average at its end.
    let place = |acc: &mut ScaledMatrix,
                     t: &mut i64,
                     last: &mut Symbol,
                     word: &Arc<[Symbol]>,
                     kind: BlockKind,
                     min: u64,
                     level: usize|
     -> Result<(i64, u64, f64), IrregularError> {
        for &s in bridge_word(space, *last, word[0], gap).symbols() {
            acc.left_mul(a.generator(s));
        }
        let start = *t + gap as i64 - 1;
        let threshold = match kind {
            BlockKind::High => target.high_threshold() + margin,
            BlockKind::Low => target.low_threshold() - margin,
        };
        let average = |len: u64| {
            let mut p = acc.clone();
            p.left_mul_scaled(&a.run_product(&block_run(word, 0, len)));
            p.log_norm() / (start as u64 + len) as f64
        };
        let test = |len: u64| {
            let v = average(len);
            let pass = match kind {
                BlockKind::High => v > threshold,
                BlockKind::Low => v < threshold,
            };
            (pass, v)
        };
        let len = search(min, options.max_block, options.growth, test).map_err(|average| {
            IrregularError::BudgetExceeded {
                level,
                kind,
                cap: options.max_block,
                average,
                threshold,
            }
        })?;
        let value = average(len);
        acc.left_mul_scaled(&a.run_product(&block_run(word, 0, len)));
        *t = start + len as i64;
        *last = word[(len as usize - 1) % word.len()];
        Ok((start, len, value))
    };

    for level in 1..=levels {
        let start_guess = (t + gap as i64 - 1) as u64;
        let min_high = (prev.0 + 1).max((options.min_time + 1).saturating_sub(start_guess));
        let (high_start, high_len, planned_high) =
            place(&mut acc, &mut t, &mut last, &high, BlockKind::High, min_high, level)?;
        let n1 = t as u64;
        let (low_start, low_len, planned_low) =
            place(&mut acc, &mut t, &mut last, &low, BlockKind::Low, prev.1 + 1, level)?;
        let n2 = t as u64;
        prev = (high_len, low_len);
        let closed_form = options.pesin_level.map(|l| {
            ClosedForm::evaluate(l, a.bound(), gap, target.a, target.b, tau, epsilon, high_len, low_len)
        });
        planned.push(ScheduleLevel {
            high_start,
            high_len,
            low_start,
            low_len,
            n1,
            n2,
            planned_high,
            planned_low,
            closed_form,
        });
    }
    Ok(BlockSchedule {
        window: target.window.clone(),
        window_lo: target.window_lo,
        prefix_end,
        gap,
        high: target.high.clone(),
        low: target.low.clone(),
        levels: planned,
    })
}
