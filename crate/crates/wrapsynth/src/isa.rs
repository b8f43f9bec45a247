//! The mini instruction set: syntax, concrete wrap-around semantics, carry
//! behaviour and the mode alphabet of each instruction.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Register index, `R0`..`R7`.
pub type Reg = u8;
pub const NUM_REGS: u8 = 8;

pub const MIN_WIDTH: u32 = 4;
pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Opcode {
    Add,
    Sbc,
    Mov,
    Eor,
    And,
    Lsl,
    Neg,
    Inc,
    Mul,
}

impl Opcode {
    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Add => "ADD",
            Opcode::Sbc => "SBC",
            Opcode::Mov => "MOV",
            Opcode::Eor => "EOR",
            Opcode::And => "AND",
            Opcode::Lsl => "LSL",
            Opcode::Neg => "NEG",
            Opcode::Inc => "INC",
            Opcode::Mul => "MUL",
        }
    }

    /// Case-insensitive; `XOR` is accepted for `EOR`.
    pub fn parse(s: &str) -> Option<Opcode> {
        Some(match s.to_ascii_uppercase().as_str() {
            "ADD" => Opcode::Add,
            "SBC" => Opcode::Sbc,
            "MOV" => Opcode::Mov,
            "EOR" | "XOR" => Opcode::Eor,
            "AND" => Opcode::And,
            "LSL" => Opcode::Lsl,
            "NEG" => Opcode::Neg,
            "INC" => Opcode::Inc,
            "MUL" => Opcode::Mul,
            _ => return None,
        })
    }

    pub fn takes_source(self) -> bool {
        !matches!(self, Opcode::Lsl | Opcode::Neg | Opcode::Inc)
    }

    pub fn writes_carry(self) -> bool {
        matches!(self, Opcode::Add | Opcode::Sbc | Opcode::Lsl | Opcode::Neg)
    }

    pub fn reads_carry(self) -> bool {
        self == Opcode::Sbc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    Reg(Reg),
    /// Raw bits; truncated to the block width when used.
    Imm(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub op: Opcode,
    pub dst: Reg,
    pub src: Option<Operand>,
    /// 1-based source position, kept for diagnostics.
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} R{}", self.op.mnemonic(), self.dst)?;
        match self.src {
            Some(Operand::Reg(r)) => write!(f, " R{}", r),
            Some(Operand::Imm(v)) => write!(f, " {}", v),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    #[default]
    Signed,
    Unsigned,
}

impl fmt::Display for Interp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interp::Signed => "signed",
            Interp::Unsigned => "unsigned",
        })
    }
}

/// How `LSL` is split into modes.
///
/// `Carry` follows the flag: overflow exactly when the shifted-out bit is
/// set, otherwise exact. `Signed` classifies the doubled signed value like
/// any other arithmetic instruction, which gives `LSL` an exact
/// non-negative mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LslModes {
    #[default]
    Carry,
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Ideal result above the representable range.
    O,
    /// Ideal result below the representable range.
    U,
    /// Exact and non-negative.
    P,
    /// Exact and negative.
    N,
    /// Exact, not split by sign.
    E,
}

impl Mode {
    pub const ORDER: [Mode; 5] = [Mode::O, Mode::U, Mode::P, Mode::N, Mode::E];

    pub fn letter(self) -> char {
        match self {
            Mode::O => 'O',
            Mode::U => 'U',
            Mode::P => 'P',
            Mode::N => 'N',
            Mode::E => 'E',
        }
    }

    pub fn from_letter(c: char) -> Option<Mode> {
        Mode::ORDER.into_iter().find(|m| m.letter() == c.to_ascii_uppercase())
    }
}

const SIGNED_FULL: &[Mode] = &[Mode::O, Mode::U, Mode::P, Mode::N];
const SIGNED_INC: &[Mode] = &[Mode::O, Mode::P, Mode::N];
const OVER_EXACT: &[Mode] = &[Mode::O, Mode::E];
const UNDER_EXACT: &[Mode] = &[Mode::U, Mode::E];
const EXACT: &[Mode] = &[Mode::E];

/// The mode alphabet of an opcode. Uni-modal opcodes return `[E]`.
pub fn modality(op: Opcode, interp: Interp, lsl: LslModes) -> &'static [Mode] {
    match (interp, op) {
        (_, Opcode::Mov | Opcode::Eor | Opcode::And) => EXACT,
        (Interp::Signed, Opcode::Add | Opcode::Sbc | Opcode::Neg | Opcode::Mul) => SIGNED_FULL,
        (Interp::Signed, Opcode::Inc) => SIGNED_INC,
        (Interp::Signed, Opcode::Lsl) => match lsl {
            LslModes::Carry => OVER_EXACT,
            LslModes::Signed => SIGNED_FULL,
        },
        (Interp::Unsigned, Opcode::Add | Opcode::Mul | Opcode::Inc | Opcode::Lsl) => OVER_EXACT,
        (Interp::Unsigned, Opcode::Sbc | Opcode::Neg) => UNDER_EXACT,
    }
}

/// A `w`-bit vector with its two readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVecValue {
    pub width: u32,
    pub bits: u64,
}

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl BitVecValue {
    pub fn new(width: u32, bits: u64) -> BitVecValue {
        BitVecValue { width, bits: bits & mask(width) }
    }

    /// Wraps `v` modulo `2^width`.
    pub fn from_int(width: u32, v: i128) -> BitVecValue {
        BitVecValue::new(width, v as u64)
    }

    pub fn bit(self, i: u32) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn unsigned(self) -> i128 {
        self.bits as i128
    }

    pub fn signed(self) -> i128 {
        let u = self.bits as i128;
        if self.bit(self.width - 1) {
            u - (1i128 << self.width)
        } else {
            u
        }
    }

    pub fn value(self, interp: Interp) -> i128 {
        match interp {
            Interp::Signed => self.signed(),
            Interp::Unsigned => self.unsigned(),
        }
    }
}

/// Representable range `[lo, hi]` of a width under an interpretation.
pub fn range(width: u32, interp: Interp) -> (i128, i128) {
    match interp {
        Interp::Signed => (-(1i128 << (width - 1)), (1i128 << (width - 1)) - 1),
        Interp::Unsigned => (0, (1i128 << width) - 1),
    }
}

/// Register file plus carry. An unconstrained carry is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub width: u32,
    pub regs: [u64; NUM_REGS as usize],
    pub carry: Option<bool>,
}

impl MachineState {
    pub fn new(width: u32) -> MachineState {
        MachineState { width, regs: [0; NUM_REGS as usize], carry: None }
    }

    pub fn get(&self, r: Reg) -> BitVecValue {
        BitVecValue::new(self.width, self.regs[r as usize])
    }

    pub fn set(&mut self, r: Reg, v: i128) {
        self.regs[r as usize] = BitVecValue::from_int(self.width, v).bits;
    }
}

/// One mode per multi-modal instruction, keyed by instruction index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ModeVector(pub Vec<(usize, Mode)>);

impl ModeVector {
    pub fn letters(&self) -> String {
        self.0.iter().map(|&(_, m)| m.letter()).collect()
    }

    pub fn mode_of(&self, instr: usize) -> Option<Mode> {
        self.0.iter().find(|&&(i, _)| i == instr).map(|&(_, m)| m)
    }

    /// Reads a letter string against the block's multi-modal instructions.
    pub fn parse(block: &Block, letters: &str) -> Option<ModeVector> {
        let idx = block.multimodal();
        let chars: Vec<char> = letters.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.len() != idx.len() {
            return None;
        }
        let mut v = Vec::new();
        for (&i, &c) in idx.iter().zip(&chars) {
            let m = Mode::from_letter(c)?;
            if !block.modality(i).contains(&m) {
                return None;
            }
            v.push((i, m));
        }
        Some(ModeVector(v))
    }
}

impl fmt::Display for ModeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("(empty)")
        } else {
            f.write_str(&self.letters())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub instrs: Vec<Instruction>,
    pub width: u32,
    pub interp: Interp,
    pub lsl_modes: LslModes,
    /// Registers tracked in addition to the live-in set (`.regs` directive).
    pub extra_regs: Vec<Reg>,
}

impl Block {
    pub fn new(instrs: Vec<Instruction>) -> Block {
        Block {
            name: String::new(),
            instrs,
            width: 32,
            interp: Interp::Signed,
            lsl_modes: LslModes::Carry,
            extra_regs: Vec::new(),
        }
    }

    pub fn with_width(mut self, width: u32) -> Block {
        self.width = width;
        self
    }

    pub fn with_interp(mut self, interp: Interp) -> Block {
        self.interp = interp;
        self
    }

    pub fn with_lsl_modes(mut self, lsl: LslModes) -> Block {
        self.lsl_modes = lsl;
        self
    }

    pub fn with_name(mut self, name: &str) -> Block {
        self.name = name.to_string();
        self
    }

    fn source_reg(i: &Instruction) -> Option<Reg> {
        match i.src {
            Some(Operand::Reg(r)) => Some(r),
            _ => None,
        }
    }

    /// Registers read before their first write, ascending.
    pub fn live_in(&self) -> Vec<Reg> {
        let mut written = [false; NUM_REGS as usize];
        let mut live = [false; NUM_REGS as usize];
        for i in &self.instrs {
            let reads_dst = i.op != Opcode::Mov;
            if reads_dst && !written[i.dst as usize] {
                live[i.dst as usize] = true;
            }
            if let Some(r) = Self::source_reg(i) {
                if !written[r as usize] {
                    live[r as usize] = true;
                }
            }
            written[i.dst as usize] = true;
        }
        (0..NUM_REGS).filter(|&r| live[r as usize]).collect()
    }

    /// Registers whose input and output values the analysis describes: the
    /// live-in set plus any declared extras, ascending.
    pub fn tracked(&self) -> Vec<Reg> {
        let mut regs = self.live_in();
        regs.extend(self.extra_regs.iter().copied());
        regs.sort_unstable();
        regs.dedup();
        regs
    }

    /// Every register the block mentions, ascending.
    pub fn registers(&self) -> Vec<Reg> {
        let mut regs: Vec<Reg> = self
            .instrs
            .iter()
            .flat_map(|i| std::iter::once(i.dst).chain(Self::source_reg(i)))
            .chain(self.extra_regs.iter().copied())
            .collect();
        regs.sort_unstable();
        regs.dedup();
        regs
    }

    /// True when some instruction reads the carry before any instruction
    /// writes it.
    pub fn carry_is_free(&self) -> bool {
        for i in &self.instrs {
            if i.op.reads_carry() {
                return true;
            }
            if i.op.writes_carry() {
                return false;
            }
        }
        false
    }

    pub fn modality(&self, idx: usize) -> &'static [Mode] {
        modality(self.instrs[idx].op, self.interp, self.lsl_modes)
    }

    /// Indices of instructions with more than one mode.
    pub fn multimodal(&self) -> Vec<usize> {
        (0..self.instrs.len()).filter(|&i| self.modality(i).len() > 1).collect()
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.instrs.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn parse_reg(tok: &str) -> Option<Result<Reg, String>> {
    let rest = tok.strip_prefix('R').or_else(|| tok.strip_prefix('r'))?;
    let n: u32 = rest.parse().ok()?;
    if n < NUM_REGS as u32 {
        Some(Ok(n as Reg))
    } else {
        Some(Err(format!("register {tok} outside R0..R{}", NUM_REGS - 1)))
    }
}

fn parse_literal(tok: &str) -> Option<u64> {
    let (neg, body) = match tok.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, tok),
    };
    let v = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()?
    } else {
        body.parse::<u64>().ok()?
    };
    Some(if neg { v.wrapping_neg() } else { v })
}

/// Parses assembly text. One instruction per line or `;`-separated, `#`
/// starts a comment. Directive lines `.width N`, `.signed`, `.unsigned`,
/// `.lsl carry|signed` and `.regs R.. R..` set block attributes.
pub fn parse_block(text: &str) -> Result<Block, ParseError> {
    let mut block = Block::new(Vec::new());
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for stmt in line.split(';') {
            let col0 = offset + 1;
            offset += stmt.len() + 1;
            let toks: Vec<(usize, &str)> = tokens(stmt)
                .into_iter()
                .map(|(c, t)| (col0 + c, t))
                .collect();
            if toks.is_empty() {
                continue;
            }
            let err = |col: usize, msg: String| ParseError { line: ln + 1, col, msg };
            let (col, head) = toks[0];
            if let Some(dir) = head.strip_prefix('.') {
                directive(&mut block, dir, &toks[1..]).map_err(|(c, m)| err(c, m))?;
                continue;
            }
            let op = Opcode::parse(head).ok_or_else(|| err(col, format!("unknown opcode {head:?}")))?;
            let (dcol, dtok) = *toks
                .get(1)
                .ok_or_else(|| err(col + head.len(), "missing destination register".into()))?;
            let dst = match parse_reg(dtok) {
                Some(Ok(r)) => r,
                Some(Err(m)) => return Err(err(dcol, m)),
                None => return Err(err(dcol, format!("expected register, found {dtok:?}"))),
            };
            let src = match (op.takes_source(), toks.get(2)) {
                (false, None) => None,
                (false, Some(&(c, t))) => return Err(err(c, format!("{} takes no source operand, found {t:?}", op.mnemonic()))),
                (true, None) => return Err(err(dcol + dtok.len(), format!("{} needs a source operand", op.mnemonic()))),
                (true, Some(&(c, t))) => Some(match parse_reg(t) {
                    Some(Ok(r)) => Operand::Reg(r),
                    Some(Err(m)) => return Err(err(c, m)),
                    None => Operand::Imm(parse_literal(t).ok_or_else(|| err(c, format!("expected register or literal, found {t:?}")))?),
                }),
            };
            if let Some(&(c, t)) = toks.get(3) {
                return Err(err(c, format!("unexpected token {t:?}")));
            }
            block.instrs.push(Instruction { op, dst, src, line: ln + 1, col });
        }
    }
    Ok(block)
}

/// Whitespace/comma separated tokens with their 0-based columns.
fn tokens(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        let sep = ch.is_whitespace() || ch == ',';
        match (sep, start) {
            (true, Some(b)) => {
                out.push((b, &s[b..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b, &s[b..]));
    }
    out
}

fn directive(block: &mut Block, name: &str, args: &[(usize, &str)]) -> Result<(), (usize, String)> {
    match name.to_ascii_lowercase().as_str() {
        "signed" => block.interp = Interp::Signed,
        "unsigned" => block.interp = Interp::Unsigned,
        "width" => {
            let &(c, t) = args.first().ok_or((0, ".width needs a value".to_string()))?;
            let w: u32 = t.parse().map_err(|_| (c, format!("bad width {t:?}")))?;
            if !(MIN_WIDTH..=MAX_WIDTH).contains(&w) {
                return Err((c, format!("width {w} outside [{MIN_WIDTH}, {MAX_WIDTH}]")));
            }
            block.width = w;
        }
        "lsl" => {
            let &(c, t) = args.first().ok_or((0, ".lsl needs carry or signed".to_string()))?;
            block.lsl_modes = match t.to_ascii_lowercase().as_str() {
                "carry" => LslModes::Carry,
                "signed" => LslModes::Signed,
                _ => return Err((c, format!("bad shift mode set {t:?}"))),
            };
        }
        "regs" => {
            for &(c, t) in args {
                match parse_reg(t) {
                    Some(Ok(r)) => block.extra_regs.push(r),
                    Some(Err(m)) => return Err((c, m)),
                    None => return Err((c, format!("expected register, found {t:?}"))),
                }
            }
        }
        other => return Err((0, format!("unknown directive .{other}"))),
    }
    Ok(())
}

/// Outcome of one instruction on concrete values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepResult {
    pub value: u64,
    pub carry: Option<bool>,
    pub mode: Mode,
}

fn classify(ideal: i128, width: u32, interp: Interp, alphabet: &[Mode]) -> Mode {
    let (lo, hi) = range(width, interp);
    if ideal > hi {
        Mode::O
    } else if ideal < lo {
        Mode::U
    } else if alphabet.contains(&Mode::P) {
        if ideal >= 0 {
            Mode::P
        } else {
            Mode::N
        }
    } else {
        Mode::E
    }
}

/// Executes one instruction. `a` is the destination's old value, `b` the
/// source value (zero when absent).
pub fn step(op: Opcode, a: u64, b: u64, carry: bool, width: u32, interp: Interp, lsl: LslModes) -> StepResult {
    let m = mask(width);
    let va = BitVecValue::new(width, a);
    let vb = BitVecValue::new(width, b);
    let c = carry as i128;
    let alphabet = modality(op, interp, lsl);
    let ideal = |s: i128, u: i128| match interp {
        Interp::Signed => s,
        Interp::Unsigned => u,
    };
    let (value, carry_out, ideal_value) = match op {
        Opcode::Add => {
            let u = va.unsigned() + vb.unsigned();
            (a.wrapping_add(b) & m, Some(u > m as i128), Some(ideal(va.signed() + vb.signed(), u)))
        }
        Opcode::Sbc => {
            let u = va.unsigned() - vb.unsigned() - c;
            (a.wrapping_sub(b).wrapping_sub(carry as u64) & m, Some(u < 0), Some(ideal(va.signed() - vb.signed() - c, u)))
        }
        Opcode::Mov => (b & m, None, None),
        Opcode::Eor => ((a ^ b) & m, None, None),
        Opcode::And => (a & b & m, None, None),
        Opcode::Lsl => {
            let out = a.wrapping_shl(1) & m;
            let c_out = va.bit(width - 1);
            let mode_value = match (interp, lsl) {
                (Interp::Signed, LslModes::Signed) => 2 * va.signed(),
                _ => 2 * va.unsigned(),
            };
            let mode = match (interp, lsl) {
                (Interp::Signed, LslModes::Signed) => classify(mode_value, width, interp, alphabet),
                _ if c_out => Mode::O,
                _ => Mode::E,
            };
            return StepResult { value: out, carry: Some(c_out), mode };
        }
        Opcode::Neg => (a.wrapping_neg() & m, Some(a & m != 0), Some(ideal(-va.signed(), -va.unsigned()))),
        Opcode::Inc => (a.wrapping_add(1) & m, None, Some(ideal(va.signed() + 1, va.unsigned() + 1))),
        Opcode::Mul => {
            let value = a.wrapping_mul(b) & m;
            let mode = match interp {
                Interp::Signed => classify(va.signed() * vb.signed(), width, interp, alphabet),
                Interp::Unsigned => {
                    let u = (va.bits as u128) * (vb.bits as u128);
                    if u > m as u128 {
                        Mode::O
                    } else {
                        Mode::E
                    }
                }
            };
            return StepResult { value, carry: None, mode };
        }
    };
    let mode = match ideal_value {
        Some(v) => classify(v, width, interp, alphabet),
        None => Mode::E,
    };
    StepResult { value, carry: carry_out, mode }
}

/// Runs the whole block. An unconstrained carry reads as clear; callers that
/// need both cases enumerate them (see [`Block::carry_is_free`]).
pub fn execute_concrete(block: &Block, input: &MachineState) -> (MachineState, ModeVector) {
    let w = block.width;
    let mut st = *input;
    st.width = w;
    let mut carry = input.carry;
    let mut modes = Vec::new();
    for (idx, i) in block.instrs.iter().enumerate() {
        let a = st.regs[i.dst as usize];
        let b = match i.src {
            Some(Operand::Reg(r)) => st.regs[r as usize],
            Some(Operand::Imm(v)) => v & mask(w),
            None => 0,
        };
        let r = step(i.op, a, b, carry.unwrap_or(false), w, block.interp, block.lsl_modes);
        st.regs[i.dst as usize] = r.value;
        if r.carry.is_some() {
            carry = r.carry;
        }
        if block.modality(idx).len() > 1 {
            modes.push((idx, r.mode));
        }
    }
    st.carry = carry;
    (st, ModeVector(modes))
}
