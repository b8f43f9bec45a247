use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wrapsynth::corpus;
use wrapsynth::ext::ExtInt;
use wrapsynth::isa::{execute_concrete, BitVecValue, Interp, MachineState};
use wrapsynth::oracle::{check_tf, random_octagon, run, Table};
use wrapsynth::synth::{synthesize, Strategy, SynthConfig};
use wrapsynth::template::TemplateSet;

/// The oracle's own interpreter agrees with the instruction semantics on
/// every input of every block at w=4.
#[test]
fn interpreter_agrees_with_execute_concrete() {
    for block in corpus::all() {
        let block = block.with_width(4);
        let table = Table::enumerate(&block).unwrap();
        let regs = block.tracked();
        for r in &table.runs {
            let mut st = MachineState::new(4);
            for (&reg, &v) in regs.iter().zip(&r.input) {
                st.set(reg, v);
            }
            st.carry = Some(r.carry);
            let (out, modes) = execute_concrete(&block, &st);
            let got: Vec<i128> = regs.iter().map(|&reg| BitVecValue::new(4, out.regs[reg as usize]).value(block.interp)).collect();
            assert_eq!(got, r.output, "{} on {:?}", block.name, r.input);
            assert_eq!(modes, r.modes, "{} on {:?}", block.name, r.input);
        }
    }
}

#[test]
fn enumeration_covers_the_input_space() {
    let block = corpus::block("isign").unwrap().with_width(4);
    let table = Table::enumerate(&block).unwrap();
    // Two tracked registers, carry written before it is read.
    assert_eq!(table.runs.len(), 256);
    assert_eq!(table.runs.first().unwrap().input, vec![-8, -8]);
    assert_eq!(table.runs.last().unwrap().input, vec![7, 7]);
}

#[test]
fn budget_is_enforced() {
    let block = corpus::block("mul_add").unwrap().with_width(12);
    assert!(Table::enumerate(&block).is_err());
}

#[test]
fn unsigned_run_of_inc_wraps_to_zero() {
    let block = corpus::block("inc").unwrap().with_width(4);
    assert_eq!(block.interp, Interp::Unsigned);
    let r = run(&block, &[15], false);
    assert_eq!(r.output, vec![0]);
    assert_eq!(r.modes.letters(), "O");
}

#[test]
fn tampered_function_is_reported() {
    let block = corpus::block("add_lsl").unwrap().with_width(5);
    let cfg = SynthConfig { strategy: Strategy::Relational, parallel: false, ..SynthConfig::default() };
    let tf = synthesize(&block, &cfg).unwrap().tf;
    let clean = check_tf(&tf, &block, 200, 3).unwrap();
    assert!(clean.is_clean(), "{clean}");

    // Pull every upper bound on r0' below its true value.
    let mut bad = tf.clone();
    for p in &mut bad.pairs {
        for row in p.update.iter_mut().filter(|r| r.target == 0) {
            for c in &mut row.candidates {
                c.constant -= 3;
            }
        }
    }
    let r = check_tf(&bad, &block, 200, 3).unwrap();
    assert!(r.violations > 0);
    assert!(!r.counterexamples.is_empty() && r.counterexamples.len() <= 5);

    // A loose guard is sound but not optimal.
    let mut loose = tf.clone();
    loose.pairs[0].guard[0].bound = loose.pairs[0].guard[0].bound.clone() + ExtInt::from(1);
    let r = check_tf(&loose, &block, 10, 3).unwrap();
    assert_eq!(r.guard_mismatches.len(), 1);
    assert_eq!(r.violations, 0);

    let mut short = tf;
    short.pairs.pop();
    assert_eq!(check_tf(&short, &block, 10, 3).unwrap().missing_modes.len(), 1);
}

#[test]
fn mismatched_width_is_rejected() {
    let block = corpus::block("swap").unwrap().with_width(4);
    let tf = synthesize(&block, &SynthConfig { strategy: Strategy::Const, ..SynthConfig::default() }).unwrap().tf;
    assert!(check_tf(&tf, &block.with_width(5), 1, 1).is_err());
}

#[test]
fn report_json_has_the_counts() {
    let block = corpus::block("swap").unwrap().with_width(4);
    let tf = synthesize(&block, &SynthConfig::default()).unwrap().tf;
    let r = check_tf(&tf, &block, 50, 9).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["samples"], 50);
    assert_eq!(v["gaps"].as_array().unwrap().len(), 8);
}

proptest! {
    #[test]
    fn random_octagons_are_closed_and_inhabited(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = random_octagon(&mut rng, n, 5, Interp::Signed);
        prop_assert!(!o.is_bottom());
        prop_assert!(o.is_closed());
        // Every finite bound is attained inside the signed range or above it.
        for p in &TemplateSet::octagon(n).patterns {
            if let ExtInt::Fin(b) = o.bound_of(p) {
                let lo = -16 * p.0.iter().map(|c| c.abs()).sum::<i64>();
                prop_assert!(b >= lo.into());
            }
        }
    }
}
