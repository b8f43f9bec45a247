use super::{Builder, EncodeError, VarMap};
use crate::isa::{Block, Interp, LslModes, Mode, ModeVector, Opcode, Operand, Reg, MAX_WIDTH, MIN_WIDTH};
use crate::sat::Lit;

/// Circuit handles for one instruction.
#[derive(Debug, Clone)]
pub struct InstrEncoding {
    pub op: Opcode,
    /// Destination value before the instruction.
    pub a: Vec<Lit>,
    /// Source value (empty for unary opcodes).
    pub b: Vec<Lit>,
    pub out: Vec<Lit>,
    /// One literal per mode of the alphabet, equivalent to the run taking
    /// that mode. Empty for uni-modal instructions.
    pub modes: Vec<(Mode, Lit)>,
}

/// A block in SSA form: inputs `rN`, intermediate versions `rN#k`, outputs
/// `rN'`, and the carry chain `c#k`.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    pub builder: Builder,
    pub vars: VarMap,
    pub instrs: Vec<InstrEncoding>,
    pub width: u32,
    pub interp: Interp,
    pub regs: Vec<Reg>,
}

impl BlockEncoding {
    pub fn input(&self, r: Reg) -> &[Lit] {
        self.vars.lits(&input_name(r)).expect("register not encoded")
    }

    pub fn output(&self, r: Reg) -> &[Lit] {
        self.vars.lits(&output_name(r)).expect("register not encoded")
    }

    pub fn mode_lit(&self, instr: usize, mode: Mode) -> Option<Lit> {
        self.instrs.get(instr)?.modes.iter().find(|&&(m, _)| m == mode).map(|&(_, l)| l)
    }

    /// Assumption literals restricting runs to `mv`.
    pub fn mode_assumptions(&self, mv: &ModeVector) -> Vec<Lit> {
        mv.0.iter().map(|&(i, m)| self.mode_lit(i, m).expect("mode outside alphabet")).collect()
    }

    /// Adds a unit clause forcing instruction `instr` into `mode`.
    pub fn encode_mode(&mut self, instr: usize, mode: Mode) -> Result<(), EncodeError> {
        let l = self.mode_lit(instr, mode).ok_or(EncodeError::Mode { instr, mode: mode.letter() })?;
        self.builder.clause(&[l]);
        Ok(())
    }
}

pub fn input_name(r: Reg) -> String {
    format!("r{r}")
}

pub fn output_name(r: Reg) -> String {
    format!("r{r}'")
}

/// Classifies a `(w+1)`-bit signed ideal result against the `w`-bit signed
/// range: in range iff the top two bits agree.
fn signed_modes(b: &mut Builder, top: Lit, below: Lit, alphabet: &[Mode]) -> Vec<(Mode, Lit)> {
    alphabet
        .iter()
        .map(|&m| {
            let l = match m {
                Mode::O => b.and(!top, below),
                Mode::U => b.and(top, !below),
                Mode::P => b.and(!top, !below),
                Mode::N => b.and(top, below),
                Mode::E => b.equiv(top, below),
            };
            (m, l)
        })
        .collect()
}

fn two_way(bad: Lit, alphabet: &[Mode]) -> Vec<(Mode, Lit)> {
    alphabet.iter().map(|&m| (m, if m == Mode::E { !bad } else { bad })).collect()
}

pub fn encode_block(block: &Block) -> Result<BlockEncoding, EncodeError> {
    let w = block.width;
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&w) {
        return Err(EncodeError::Width(w));
    }
    let wu = w as usize;
    let signed = block.interp == Interp::Signed;
    let mut b = Builder::new();
    let mut vars = VarMap::default();
    let regs = block.registers();

    let mut cur: Vec<Option<Vec<Lit>>> = vec![None; 8];
    for &r in &regs {
        let v = b.fresh_vec(wu);
        vars.insert(&input_name(r), v.clone(), signed);
        cur[r as usize] = Some(v);
    }
    let mut last_write = vec![None; 8];
    for (i, ins) in block.instrs.iter().enumerate() {
        last_write[ins.dst as usize] = Some(i);
    }

    let mut carry = b.fresh();
    vars.insert("c#0", vec![carry], false);
    let mut carry_version = 0;
    let mut version = [0usize; 8];
    let mut instrs = Vec::with_capacity(block.instrs.len());

    for (idx, ins) in block.instrs.iter().enumerate() {
        let a = cur[ins.dst as usize].clone().expect("register encoded");
        let src: Vec<Lit> = match ins.src {
            Some(Operand::Reg(r)) => cur[r as usize].clone().expect("register encoded"),
            Some(Operand::Imm(v)) => b.const_vec(v as i128, wu),
            None => Vec::new(),
        };
        let alphabet = block.modality(idx);
        let multi = alphabet.len() > 1;
        let top_a = a[wu - 1];
        let (out, new_carry, modes): (Vec<Lit>, Option<Lit>, Vec<(Mode, Lit)>) = match ins.op {
            Opcode::Mov => (src.clone(), None, Vec::new()),
            Opcode::Eor => (a.iter().zip(&src).map(|(&x, &y)| b.xor(x, y)).collect(), None, Vec::new()),
            Opcode::And => (a.iter().zip(&src).map(|(&x, &y)| b.and(x, y)).collect(), None, Vec::new()),
            Opcode::Add => {
                let f = b.constant(false);
                let (s, co) = b.add(&a, &src, f);
                let modes = if signed {
                    // Sign-bit conditions on operands and result.
                    let (sa, sb, so) = (top_a, src[wu - 1], s[wu - 1]);
                    alphabet
                        .iter()
                        .map(|&m| {
                            let l = match m {
                                Mode::O => {
                                    let t = b.and(!sa, !sb);
                                    b.and(t, so)
                                }
                                Mode::U => {
                                    let t = b.and(sa, sb);
                                    b.and(t, !so)
                                }
                                Mode::P => {
                                    let both = b.and(sa, sb);
                                    b.and(!both, !so)
                                }
                                Mode::N => {
                                    let either = b.or(sa, sb);
                                    b.and(either, so)
                                }
                                Mode::E => unreachable!(),
                            };
                            (m, l)
                        })
                        .collect()
                } else {
                    two_way(co, alphabet)
                };
                (s, Some(co), modes)
            }
            Opcode::Sbc => {
                // a - b - c = a + !b + !c
                let nb = b.not_vec(&src);
                let (s, co) = b.add(&a, &nb, !carry);
                let modes = if signed {
                    let t = b.xor(top_a, !src[wu - 1]);
                    let top = b.xor(t, co);
                    signed_modes(&mut b, top, s[wu - 1], alphabet)
                } else {
                    two_way(!co, alphabet)
                };
                (s, Some(!co), modes)
            }
            Opcode::Neg => {
                let ext = b.sext(&a, wu + 1);
                let n = b.neg(&ext);
                let nonzero = b.or_all(&a);
                let modes = if signed {
                    signed_modes(&mut b, n[wu], n[wu - 1], alphabet)
                } else {
                    two_way(nonzero, alphabet)
                };
                (n[..wu].to_vec(), Some(nonzero), modes)
            }
            Opcode::Inc => {
                let one = b.const_vec(1, wu);
                let f = b.constant(false);
                let (s, co) = b.add(&a, &one, f);
                let modes = if signed {
                    // top of the (w+1)-bit ideal: sign(a) xor carry-out
                    let top = b.xor(top_a, co);
                    signed_modes(&mut b, top, s[wu - 1], alphabet)
                } else {
                    two_way(co, alphabet)
                };
                (s, None, modes)
            }
            Opcode::Lsl => {
                let mut s = vec![b.constant(false)];
                s.extend_from_slice(&a[..wu - 1]);
                let modes = if signed && block.lsl_modes == LslModes::Signed {
                    signed_modes(&mut b, top_a, a[wu - 2], alphabet)
                } else {
                    two_way(top_a, alphabet)
                };
                (s, Some(top_a), modes)
            }
            Opcode::Mul => {
                // Exact product in 2w bits (2w+1 for unsigned, so the top bit
                // stays a sign).
                let pw = if signed { 2 * wu } else { 2 * wu + 1 };
                let (xa, xb) = if signed { (b.sext(&a, pw), b.sext(&src, pw)) } else { (b.zext(&a, pw), b.zext(&src, pw)) };
                let p = b.mul(&xa, &xb);
                let modes = if signed {
                    let top = p[pw - 1];
                    let same: Vec<Lit> = p[wu - 1..pw - 1].iter().map(|&x| b.equiv(x, top)).collect();
                    let inrange = b.and_all(&same);
                    alphabet
                        .iter()
                        .map(|&m| {
                            let l = match m {
                                Mode::O => b.and(!top, !inrange),
                                Mode::U => b.and(top, !inrange),
                                Mode::P => b.and(!top, inrange),
                                Mode::N => b.and(top, inrange),
                                Mode::E => inrange,
                            };
                            (m, l)
                        })
                        .collect()
                } else {
                    let over = b.or_all(&p[wu..pw]);
                    two_way(over, alphabet)
                };
                (p[..wu].to_vec(), None, modes)
            }
        };
        let modes = if multi { modes } else { Vec::new() };

        // Name the new SSA version; the last write of a register is its output.
        let r = ins.dst as usize;
        version[r] += 1;
        let name = if last_write[r] == Some(idx) { output_name(ins.dst) } else { format!("r{}#{}", r, version[r]) };
        // Give every name its own literals so named vectors never alias.
        let out = own_literals(&mut b, &out);
        vars.insert(&name, out.clone(), signed);
        cur[r] = Some(out.clone());
        if let Some(c) = new_carry {
            carry_version += 1;
            let c = own_literals(&mut b, &[c])[0];
            vars.insert(&format!("c#{carry_version}"), vec![c], false);
            carry = c;
        }
        instrs.push(InstrEncoding { op: ins.op, a, b: src, out, modes });
    }

    for &r in &regs {
        if last_write[r as usize].is_none() {
            let inp = cur[r as usize].clone().expect("register encoded");
            let copy = own_literals(&mut b, &inp);
            vars.insert(&output_name(r), copy, signed);
        }
    }

    Ok(BlockEncoding { builder: b, vars, instrs, width: w, interp: block.interp, regs })
}

/// Fresh literals equivalent to `lits`. Constants and literals already owned
/// by a name are copied so the variable map stays disjoint.
fn own_literals(b: &mut Builder, lits: &[Lit]) -> Vec<Lit> {
    lits.iter()
        .map(|&l| {
            let x = b.fresh();
            b.clause(&[!x, l]);
            b.clause(&[x, !l]);
            x
        })
        .collect()
}
