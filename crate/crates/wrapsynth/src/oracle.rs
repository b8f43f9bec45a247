//! Brute-force ground truth at small widths: every input is run through a
//! separate interpreter that tracks ideal integer results directly.

use crate::affine::AffineSpace;
use crate::eval::apply_tf;
use crate::ext::ExtInt;
use crate::isa::{Block, Interp, LslModes, Mode, ModeVector, Opcode, Operand, NUM_REGS};
use crate::octdom::Octagon;
use crate::template::{Pattern, TemplateSet};
use crate::tf::TransferFunction;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

/// Largest number of runs the enumerators will perform.
pub const RUN_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{0} runs exceed the enumeration budget")]
    Budget(u64),
    #[error("transfer function and block disagree: {0}")]
    Mismatch(String),
}

fn lo_hi(w: u32, interp: Interp) -> (i128, i128) {
    match interp {
        Interp::Signed => (-(1i128 << (w - 1)), (1i128 << (w - 1)) - 1),
        Interp::Unsigned => (0, (1i128 << w) - 1),
    }
}

/// Reduces an ideal integer into the representable range.
fn wrap(v: i128, w: u32, interp: Interp) -> i128 {
    let m = 1i128 << w;
    let (lo, _) = lo_hi(w, interp);
    (v - lo).rem_euclid(m) + lo
}

fn as_unsigned(v: i128, w: u32) -> i128 {
    v.rem_euclid(1i128 << w)
}

fn as_signed(v: i128, w: u32) -> i128 {
    wrap(v, w, Interp::Signed)
}

/// One run: interpreted values of the tracked registers before and after.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub input: Vec<i128>,
    pub carry: bool,
    pub output: Vec<i128>,
    pub modes: ModeVector,
}

/// Executes `block` on the tracked-register values `input` (in block order
/// of [`Block::tracked`]); other registers start at zero.
pub fn run(block: &Block, input: &[i128], carry: bool) -> Run {
    let w = block.width;
    let interp = block.interp;
    let tracked = block.tracked();
    // Register contents as interpreted integers.
    let mut r = [0i128; NUM_REGS as usize];
    for (&reg, &v) in tracked.iter().zip(input) {
        r[reg as usize] = wrap(v, w, interp);
    }
    let mut c = carry;
    let mut modes = Vec::new();
    let (lo, hi) = lo_hi(w, interp);
    let read = |v: i128, signed: bool| if signed { as_signed(v, w) } else { as_unsigned(v, w) };
    for (idx, ins) in block.instrs.iter().enumerate() {
        let a = r[ins.dst as usize];
        let b = match ins.src {
            Some(Operand::Reg(s)) => r[s as usize],
            Some(Operand::Imm(v)) => wrap(v as i128, w, interp),
            None => 0,
        };
        let (ua, ub) = (as_unsigned(a, w), as_unsigned(b, w));
        let (sa, sb) = (as_signed(a, w), as_signed(b, w));
        let signed = interp == Interp::Signed;
        let ci = c as i128;
        // (ideal result for the mode, new value, new carry)
        let (ideal, value, carry_out): (Option<i128>, i128, Option<bool>) = match ins.op {
            Opcode::Add => {
                let s = if signed { sa + sb } else { ua + ub };
                (Some(s), s, Some(ua + ub >= 1i128 << w))
            }
            Opcode::Sbc => {
                let s = if signed { sa - sb - ci } else { ua - ub - ci };
                (Some(s), s, Some(ua - ub - ci < 0))
            }
            Opcode::Neg => {
                let s = -read(a, signed);
                (Some(s), s, Some(ua != 0))
            }
            Opcode::Inc => {
                let s = read(a, signed) + 1;
                (Some(s), s, None)
            }
            Opcode::Mul => {
                let s = if signed { sa * sb } else { ua * ub };
                (Some(s), s, None)
            }
            Opcode::Lsl => {
                let top = ua >> (w - 1) == 1;
                let ideal = if signed && block.lsl_modes == LslModes::Signed { Some(2 * sa) } else { None };
                (ideal, 2 * ua, Some(top))
            }
            Opcode::Mov => (None, b, None),
            Opcode::Eor => (None, ua ^ ub, None),
            Opcode::And => (None, ua & ub, None),
        };
        r[ins.dst as usize] = wrap(value, w, interp);
        if let Some(k) = carry_out {
            c = k;
        }
        let alphabet = block.modality(idx);
        if alphabet.len() > 1 {
            let m = match ideal {
                Some(v) if v > hi => Mode::O,
                Some(v) if v < lo => Mode::U,
                Some(v) if alphabet.contains(&Mode::P) => {
                    if v >= 0 {
                        Mode::P
                    } else {
                        Mode::N
                    }
                }
                Some(_) => Mode::E,
                // Carry-style shifts: the bit shifted out decides.
                None if ua >> (w - 1) == 1 => Mode::O,
                None => Mode::E,
            };
            modes.push((idx, m));
        }
    }
    Run {
        input: input.to_vec(),
        carry,
        output: tracked.iter().map(|&reg| r[reg as usize]).collect(),
        modes: ModeVector(modes),
    }
}

/// All runs of a block: every tracked input combination, and both carries
/// when the block reads the carry before writing it.
#[derive(Debug, Clone)]
pub struct Table {
    pub width: u32,
    pub interp: Interp,
    pub n: usize,
    pub runs: Vec<Run>,
}

impl Table {
    pub fn enumerate(block: &Block) -> Result<Table, OracleError> {
        let n = block.tracked().len();
        let (lo, hi) = lo_hi(block.width, block.interp);
        let size = (hi - lo + 1) as u64;
        let carries: &[bool] = if block.carry_is_free() { &[false, true] } else { &[false] };
        let total = size.checked_pow(n as u32).and_then(|t| t.checked_mul(carries.len() as u64)).unwrap_or(u64::MAX);
        if total > RUN_BUDGET {
            return Err(OracleError::Budget(total));
        }
        let mut runs = Vec::with_capacity(total as usize);
        let mut x = vec![lo; n];
        loop {
            for &c in carries {
                runs.push(run(block, &x, c));
            }
            // Odometer, last register fastest.
            let mut k = n;
            loop {
                if k == 0 {
                    return Ok(Table { width: block.width, interp: block.interp, n, runs });
                }
                k -= 1;
                if x[k] < hi {
                    x[k] += 1;
                    break;
                }
                x[k] = lo;
            }
        }
    }

    pub fn in_mode<'a>(&'a self, mv: &'a ModeVector) -> impl Iterator<Item = &'a Run> + 'a {
        self.runs.iter().filter(move |r| &r.modes == mv)
    }
}

pub fn brute_modes(block: &Block) -> Result<BTreeSet<ModeVector>, OracleError> {
    Ok(Table::enumerate(block)?.runs.into_iter().map(|r| r.modes).collect())
}

fn dot(p: &Pattern, x: &[i128]) -> i128 {
    p.0.iter().zip(x).map(|(&c, &v)| c as i128 * v).sum()
}

/// Largest `p·x` over inputs reaching `mv`, per pattern; `−∞` if none does.
pub fn guard_bounds(table: &Table, mv: &ModeVector, patterns: &[Pattern]) -> Vec<ExtInt> {
    let mut best: Vec<Option<i128>> = vec![None; patterns.len()];
    for r in table.in_mode(mv) {
        for (b, p) in best.iter_mut().zip(patterns) {
            let v = dot(p, &r.input);
            *b = Some(b.map_or(v, |c: i128| c.max(v)));
        }
    }
    best.into_iter().map(|b| b.map_or(ExtInt::NegInf, ExtInt::from)).collect()
}

pub fn brute_guard_bounds(block: &Block, mv: &ModeVector, templates: &TemplateSet) -> Result<Vec<ExtInt>, OracleError> {
    Ok(guard_bounds(&Table::enumerate(block)?, mv, &templates.patterns))
}

/// Affine hull of `(outputs, inputs, monomials)` over runs in the mode;
/// monomials are index lists into the tracked registers.
pub fn hull(table: &Table, mv: &ModeVector, monomials: &[Vec<usize>]) -> AffineSpace {
    let dim = 2 * table.n + monomials.len();
    let mut s = AffineSpace::empty(dim);
    for r in table.in_mode(mv) {
        let point: Vec<BigInt> = r
            .output
            .iter()
            .chain(&r.input)
            .copied()
            .chain(monomials.iter().map(|m| m.iter().map(|&k| r.input[k]).product::<i128>()))
            .map(BigInt::from)
            .collect();
        if !s.contains(&point) {
            s = s.join(&AffineSpace::from_point(&point)).expect("same dimension");
        }
    }
    s
}

pub fn brute_hull(block: &Block, mv: &ModeVector, monomials: &[Vec<usize>]) -> Result<AffineSpace, OracleError> {
    Ok(hull(&Table::enumerate(block)?, mv, monomials))
}

/// Finite constraints of a closed octagon as small-integer rows.
fn rows_of(o: &Octagon) -> Vec<(Vec<i128>, i128)> {
    o.constraints()
        .into_iter()
        .filter_map(|c| {
            let b: i128 = c.bound.finite()?.try_into().ok()?;
            Some((c.pattern.0.iter().map(|&x| x as i128).collect(), b))
        })
        .collect()
}

fn inside(rows: &[(Vec<i128>, i128)], x: &[i128]) -> bool {
    rows.iter().all(|(c, b)| c.iter().zip(x).map(|(a, v)| a * v).sum::<i128>() <= *b)
}

/// A random non-empty closed octagon: the octagonal hull of a few random
/// points, with some bounds dropped and others loosened.
pub fn random_octagon(rng: &mut ChaCha8Rng, n: usize, width: u32, interp: Interp) -> Octagon {
    let (lo, hi) = lo_hi(width, interp);
    let t = TemplateSet::octagon(n);
    let k = rng.gen_range(1..=3);
    let pts: Vec<Vec<i128>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(lo..=hi)).collect()).collect();
    let mut o = Octagon::top(n);
    for p in &t.patterns {
        if rng.gen_bool(0.3) {
            continue;
        }
        let max = pts.iter().map(|x| dot(p, x)).max().expect("at least one point");
        let slack = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..=(hi - lo) / 4) };
        o.add(p, &ExtInt::from(max + slack));
    }
    o.close()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub input_octagon: String,
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuardMismatch {
    pub modes: String,
    pub pattern: String,
    pub synthesized: String,
    pub oracle: String,
}

/// Output-bound tightness for one template over all samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Gap {
    pub pattern: String,
    pub exact: u64,
    pub finite: u64,
    pub max: String,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub block: String,
    pub width: u32,
    pub seed: u64,
    pub samples: usize,
    /// Feasible modes with no pair in the transfer function.
    pub missing_modes: Vec<String>,
    /// Pairs whose mode no input reaches.
    pub extra_modes: Vec<String>,
    pub guard_mismatches: Vec<GuardMismatch>,
    pub violations: usize,
    pub counterexamples: Vec<Counterexample>,
    pub gaps: Vec<Gap>,
}

impl Report {
    /// No unsound output and every guard bound optimal.
    pub fn is_clean(&self) -> bool {
        self.missing_modes.is_empty() && self.guard_mismatches.is_empty() && self.violations == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "block {} width {} seed {} samples {}", self.block, self.width, self.seed, self.samples)?;
        writeln!(f, "missing modes: {}", self.missing_modes.len())?;
        for m in &self.missing_modes {
            writeln!(f, "  {m}")?;
        }
        writeln!(f, "unreachable pairs: {}", self.extra_modes.len())?;
        writeln!(f, "guard mismatches: {}", self.guard_mismatches.len())?;
        for g in &self.guard_mismatches {
            writeln!(f, "  {} {} <= {} (oracle {})", g.modes, g.pattern, g.synthesized, g.oracle)?;
        }
        writeln!(f, "soundness violations: {}", self.violations)?;
        for c in &self.counterexamples {
            writeln!(f, "  in {} : ({}) -> ({}) not in {}", c.input_octagon, c.input.join(", "), c.output.join(", "), c.result)?;
        }
        for g in &self.gaps {
            writeln!(f, "gap {}: exact {}/{} max {} mean {:.3}", g.pattern, g.exact, g.finite, g.max, g.mean)?;
        }
        write!(f, "{}", if self.is_clean() { "clean" } else { "UNSOUND" })
    }
}

/// Checks `tf` against brute force on `block` at the TF's width.
pub fn check_tf(tf: &TransferFunction, block: &Block, samples: usize, seed: u64) -> Result<Report, OracleError> {
    if block.width != tf.width || block.interp != tf.interpretation || block.tracked() != tf.registers {
        return Err(OracleError::Mismatch(format!(
            "block {}-bit {} over {:?}, transfer function {}-bit {} over {:?}",
            block.width, block.interp, block.tracked(), tf.width, tf.interpretation, tf.registers
        )));
    }
    let table = Table::enumerate(block)?;
    let n = table.n;
    let names = tf.reg_names();

    let feasible: BTreeSet<ModeVector> = table.runs.iter().map(|r| r.modes.clone()).collect();
    let present: BTreeSet<ModeVector> = tf.pairs.iter().map(|p| p.modes.clone()).collect();
    let missing_modes = feasible.difference(&present).map(|m| m.letters()).collect();
    let extra_modes = present.difference(&feasible).map(|m| m.letters()).collect();

    let mut guard_mismatches = Vec::new();
    for pair in &tf.pairs {
        let pats: Vec<Pattern> = pair.guard.iter().map(|g| g.pattern.clone()).collect();
        for (g, want) in pair.guard.iter().zip(guard_bounds(&table, &pair.modes, &pats)) {
            if g.bound != want {
                guard_mismatches.push(GuardMismatch {
                    modes: pair.modes.letters(),
                    pattern: g.pattern.display_with(&names),
                    synthesized: g.bound.to_string(),
                    oracle: want.to_string(),
                });
            }
        }
    }

    let out_t = TemplateSet::octagon(n);
    let mut exact = vec![0u64; out_t.len()];
    let mut finite = vec![0u64; out_t.len()];
    let mut sum = vec![0f64; out_t.len()];
    let mut worst = vec![0i128; out_t.len()];
    let mut violations = 0;
    let mut counterexamples = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let input = random_octagon(&mut rng, n, tf.width, tf.interpretation);
        let result = apply_tf(tf, &input);
        let in_rows = rows_of(&input);
        let out_rows = rows_of(&result);
        let mut best: Vec<Option<i128>> = vec![None; out_t.len()];
        for r in table.runs.iter().filter(|r| inside(&in_rows, &r.input)) {
            if result.is_bottom() || !inside(&out_rows, &r.output) {
                violations += 1;
                if counterexamples.len() < 5 {
                    counterexamples.push(Counterexample {
                        input_octagon: input.display_with(&names),
                        input: r.input.iter().map(i128::to_string).collect(),
                        output: r.output.iter().map(i128::to_string).collect(),
                        result: result.display_with(&names),
                    });
                }
            }
            for (b, p) in best.iter_mut().zip(&out_t.patterns) {
                let v = dot(p, &r.output);
                *b = Some(b.map_or(v, |c: i128| c.max(v)));
            }
        }
        for (j, p) in out_t.patterns.iter().enumerate() {
            if let (Some(b), ExtInt::Fin(got)) = (best[j], result.bound_of(p)) {
                let got: i128 = (&got).try_into().expect("small width");
                let gap = got - b;
                finite[j] += 1;
                exact[j] += (gap == 0) as u64;
                sum[j] += gap as f64;
                worst[j] = worst[j].max(gap);
            }
        }
    }
    let gaps = out_t
        .patterns
        .iter()
        .enumerate()
        .map(|(j, p)| Gap {
            pattern: p.display_with(&tf.output_names()),
            exact: exact[j],
            finite: finite[j],
            max: worst[j].to_string(),
            mean: if finite[j] == 0 { 0.0 } else { sum[j] / finite[j] as f64 },
        })
        .collect();

    Ok(Report {
        block: tf.block.clone(),
        width: tf.width,
        seed,
        samples,
        missing_modes,
        extra_modes,
        guard_mismatches,
        violations,
        counterexamples,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_both_ways() {
        assert_eq!(wrap(8, 4, Interp::Signed), -8);
        assert_eq!(wrap(-9, 4, Interp::Signed), 7);
        assert_eq!(wrap(16, 4, Interp::Unsigned), 0);
        assert_eq!(wrap(-1, 4, Interp::Unsigned), 15);
    }
}
