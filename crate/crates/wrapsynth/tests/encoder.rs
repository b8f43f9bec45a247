use wrapsynth::corpus;
use wrapsynth::encoder::{
    encode_block, encode_linear, encode_monomial, encode_row_violation, encode_strict_violation, fix_assumptions,
    read_signed, LinearExpr, Row,
};
use wrapsynth::isa::{execute_concrete, parse_block, Interp, MachineState, Mode};
use wrapsynth::sat::Session;

/// Every input of every corpus block at w=4: the encoding, with inputs pinned,
/// produces the interpreter's outputs and exactly the interpreter's modes.
#[test]
fn block_encoding_matches_interpreter_at_w4() {
    for block in corpus::all() {
        let block = block.with_width(4);
        let enc = encode_block(&block).unwrap();
        let mut s = Session::new(&enc.builder.cnf);
        let regs = enc.regs.clone();
        let carries: &[bool] = if block.carry_is_free() { &[false, true] } else { &[false] };
        let n = regs.len() as u32;
        for code in 0u32..1 << (4 * n) {
            for &c in carries {
                let mut st = MachineState::new(4);
                let mut assume = Vec::new();
                for (k, &r) in regs.iter().enumerate() {
                    let v = (code >> (4 * k) & 15) as i128;
                    st.set(r, v);
                    assume.extend(fix_assumptions(enc.input(r), v));
                }
                st.carry = Some(c);
                let c0 = enc.vars.lits("c#0").unwrap()[0];
                assume.push(if c { c0 } else { !c0 });
                assert!(s.solve(&assume).unwrap(), "{}: inputs unsat", block.name);
                let (out, modes) = execute_concrete(&block, &st);
                for &r in &regs {
                    let got = enc.output(r).iter().enumerate().filter(|&(_, &l)| s.value(l)).fold(0u64, |v, (i, _)| v | 1 << i);
                    assert_eq!(got, out.regs[r as usize], "{} r{r} at input {code:#x}", block.name);
                }
                for (i, ie) in enc.instrs.iter().enumerate() {
                    for &(m, l) in &ie.modes {
                        assert_eq!(s.value(l), modes.mode_of(i) == Some(m), "{} instr {i} mode {:?}", block.name, m);
                    }
                }
            }
        }
    }
}

#[test]
fn add_overflow_mode_sets_result_sign() {
    for interp in [Interp::Signed] {
        let block = parse_block("ADD R0 R1").unwrap().with_width(6).with_interp(interp);
        for a in 0..64u64 {
            for b in 0..64u64 {
                let mut st = MachineState::new(6);
                st.regs[0] = a;
                st.regs[1] = b;
                let (out, modes) = execute_concrete(&block, &st);
                let sign = out.regs[0] >> 5 & 1 == 1;
                match modes.mode_of(0).unwrap() {
                    Mode::O | Mode::N => assert!(sign),
                    Mode::U | Mode::P => assert!(!sign),
                    Mode::E => unreachable!(),
                }
            }
        }
    }
}

#[test]
fn linear_sums_are_exact_at_w4() {
    let block = parse_block(".regs R0\nMOV R2 R1").unwrap().with_width(4);
    for interp in [Interp::Signed, Interp::Unsigned] {
        let block = block.clone().with_interp(interp);
        let exprs = [
            LinearExpr::new().term(1, "r0").term(-1, "r1"),
            LinearExpr::new().term(1, "r0"),
            LinearExpr::new().term(-1, "r0"),
            LinearExpr::new().term(2, "r0").term(-2, "r1").term(1, "r2").plus(5),
            LinearExpr::new().term(-1, "r0").term(-2, "r1").plus(-3),
        ];
        for e in &exprs {
            let mut enc = encode_block(&block).unwrap();
            let sum = encode_linear(&mut enc.builder, &mut enc.vars, e).unwrap();
            let mut s = Session::new(&enc.builder.cnf);
            for code in 0u32..1 << 12 {
                let vals: Vec<i128> = (0..3).map(|k| (code >> (4 * k) & 15) as i128).collect();
                let mut assume = Vec::new();
                let mut want = e.constant;
                for (k, &v) in vals.iter().enumerate() {
                    let r = k as u8;
                    assume.extend(fix_assumptions(enc.input(r), v));
                    let x = if interp == Interp::Signed && v >= 8 { v - 16 } else { v };
                    want += e.terms.iter().filter(|(_, n)| *n == format!("r{r}")).map(|(c, _)| c * x).sum::<i128>();
                }
                assert!(s.solve(&assume).unwrap());
                assert_eq!(sum.value(|l| s.value(l)), want, "{e} {interp:?} at {vals:?}");
            }
        }
    }
}

#[test]
fn sum_widths_for_unary_and_binary_patterns() {
    let block = parse_block("ADD R0 R1").unwrap();
    let mut enc = encode_block(&block).unwrap();
    let unary = encode_linear(&mut enc.builder, &mut enc.vars, &LinearExpr::new().term(1, "r0")).unwrap();
    let binary = encode_linear(&mut enc.builder, &mut enc.vars, &LinearExpr::new().term(1, "r0").term(1, "r1")).unwrap();
    assert_eq!(unary.width(), 33);
    assert_eq!(binary.width(), 34);
}

#[test]
fn monomial_is_exact_at_w4() {
    let block = parse_block("MUL R0 R2").unwrap().with_width(4);
    let mut enc = encode_block(&block).unwrap();
    let name = encode_monomial(&mut enc.builder, &mut enc.vars, &["r0", "r2"]).unwrap();
    let p = enc.vars.lits(&name).unwrap().to_vec();
    let mut s = Session::new(&enc.builder.cnf);
    for a in -8i128..8 {
        for b in -8i128..8 {
            let mut assume = fix_assumptions(enc.input(0), a);
            assume.extend(fix_assumptions(enc.input(2), b));
            assert!(s.solve(&assume).unwrap());
            assert_eq!(read_signed(&p, |l| s.value(l)), a * b);
        }
    }
}

#[test]
fn row_violation_literals() {
    let block = parse_block("MOV R0 R1").unwrap().with_width(4);
    let mut enc = encode_block(&block).unwrap();
    let none = encode_row_violation(&mut enc.builder, &mut enc.vars, &[]).unwrap();
    assert_eq!(enc.builder.const_of(none), Some(false));
    let row = Row { terms: vec![(1, "r1'".into()), (-1, "r1".into())], constant: 0 };
    let viol = encode_row_violation(&mut enc.builder, &mut enc.vars, &[row]).unwrap();
    let strict = Row { terms: vec![(1, "r0'".into()), (-1, "r1".into())], constant: -1 };
    let gt = encode_strict_violation(&mut enc.builder, &mut enc.vars, &strict).unwrap();
    let mut s = Session::new(&enc.builder.cnf);
    // r1' = r1 always holds for MOV R0 R1.
    assert!(!s.solve(&[viol]).unwrap());
    // r0' - r1 = 0 > -1 holds in every model.
    assert!(!s.solve(&[!gt]).unwrap());
    assert!(s.solve(&[gt]).unwrap());
}
