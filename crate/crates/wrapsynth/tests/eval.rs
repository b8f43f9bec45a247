use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use wrapsynth::corpus;
use wrapsynth::eval::{apply_pair, apply_tf, eval_rows, input_constants};
use wrapsynth::ext::ExtInt;
use wrapsynth::isa::{LslModes, ModeVector};
use wrapsynth::octdom::Octagon;
use wrapsynth::oracle::{random_octagon, Table};
use wrapsynth::synth::{synthesize, Strategy, SynthConfig};
use wrapsynth::tf::TransferFunction;

fn big(v: &[i128]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn fin(v: &[i64]) -> Vec<ExtInt> {
    v.iter().map(|&x| ExtInt::from(x as i128)).collect()
}

fn add_lsl_w4() -> &'static (TransferFunction, Table) {
    static CELL: OnceLock<(TransferFunction, Table)> = OnceLock::new();
    CELL.get_or_init(|| {
        let block = corpus::block("add_lsl").unwrap().with_width(4);
        let tf = synthesize(&block, &SynthConfig::default()).unwrap().tf;
        (tf, Table::enumerate(&block).unwrap())
    })
}

#[test]
fn every_point_maps_to_a_state_holding_its_run() {
    for name in ["add_lsl", "isign", "roundup", "swap"] {
        let block = corpus::block(name).unwrap().with_width(4);
        let tf = synthesize(&block, &SynthConfig::default()).unwrap().tf;
        for r in Table::enumerate(&block).unwrap().runs {
            let out = apply_tf(&tf, &Octagon::from_point(&big(&r.input)));
            assert!(out.contains(&big(&r.output)), "{name}: {:?} -> {:?} not in {out:?}", r.input, r.output);
        }
    }
}

#[test]
fn bottom_maps_to_bottom_and_top_covers_everything() {
    let (tf, table) = add_lsl_w4();
    assert!(apply_tf(tf, &Octagon::bottom(2)).is_bottom());
    let top = apply_tf(tf, &Octagon::top(2));
    for r in &table.runs {
        assert!(top.contains(&big(&r.output)));
    }
}

#[test]
fn pair_outside_its_guard_does_not_apply() {
    let (tf, _) = add_lsl_w4();
    // r0 = r1 = 7 overflows the addition, so a non-wrapping pair is skipped.
    let x = Octagon::from_point(&big(&[7, 7]));
    let applied = tf.pairs.iter().filter(|p| apply_pair(tf, p, &x).is_some()).count();
    assert_eq!(applied, 1);
}

#[test]
#[should_panic(expected = "tracked registers")]
fn wrong_dimension_panics() {
    let (tf, _) = add_lsl_w4();
    apply_tf(tf, &Octagon::top(3));
}

/// The (P,P) pair of ADD;LSL with signed shift modes: the exact row for
/// r0+r1 beats the medium lifting on d = (4,1,0,0,4,0,1,4).
#[test]
fn exact_row_is_tighter_than_medium() {
    let block = corpus::block("add_lsl").unwrap().with_width(8).with_lsl_modes(LslModes::Signed);
    let only = Some(vec!["PP".to_string()]);
    let exact = SynthConfig { strategy: Strategy::Exact, only_modes: only.clone(), ..SynthConfig::default() };
    let medium = SynthConfig { strategy: Strategy::Medium, only_modes: only, ..SynthConfig::default() };
    let d = fin(&[4, 1, 0, 0, 4, 0, 1, 4]);
    let e = synthesize(&block, &exact).unwrap().tf;
    let m = synthesize(&block, &medium).unwrap().tf;
    assert_eq!(eval_rows(&e, &e.pairs[0], &d, &[])[4], ExtInt::from(9));
    assert_eq!(eval_rows(&m, &m.pairs[0], &d, &[])[4], ExtInt::from(11));
}

#[test]
fn nonlinear_row_uses_corner_products() {
    let block = corpus::block("mul_add").unwrap().with_width(6);
    let cfg = SynthConfig {
        strategy: Strategy::Medium,
        monomials: vec![vec![0, 2]],
        only_modes: Some(vec!["PP".into()]),
        ..SynthConfig::default()
    };
    let tf = synthesize(&block, &cfg).unwrap().tf;
    let pair = &tf.pairs[0];
    assert_eq!(pair.modes, ModeVector::parse(&block, "PP").unwrap());
    // Cube [-2,3]^3: r0*r2 ranges over [-6, 9].
    let cube = Octagon::from_box(&vec![(BigInt::from(-2), BigInt::from(3)); 3]);
    let d = input_constants(&tf, &cube);
    let rows = eval_rows(&tf, pair, &d, &[(BigInt::from(-6), BigInt::from(9))]);
    assert_eq!(rows[0], ExtInt::from(12));
    assert_eq!(rows[3], ExtInt::from(8));
}

#[test]
fn missing_row_is_unbounded() {
    let (tf, _) = add_lsl_w4();
    let mut tf = tf.clone();
    tf.pairs[0].update.retain(|r| r.target != 0);
    let rows = eval_rows(&tf, &tf.pairs[0], &fin(&[0; 8]), &[]);
    assert_eq!(rows[0], ExtInt::PosInf);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_holds_every_run_from_the_input(seed in any::<u64>()) {
        let (tf, table) = add_lsl_w4();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = random_octagon(&mut rng, 2, 4, tf.interpretation);
        let out = apply_tf(tf, &input);
        for r in table.runs.iter().filter(|r| input.contains(&big(&r.input))) {
            prop_assert!(out.contains(&big(&r.output)));
        }
    }

    #[test]
    fn output_is_closed_and_in_range(seed in any::<u64>()) {
        let (tf, _) = add_lsl_w4();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = apply_tf(tf, &random_octagon(&mut rng, 2, 4, tf.interpretation));
        prop_assert!(out.is_bottom() || out.is_closed());
        if !out.is_bottom() {
            for k in 0..2 {
                let (lo, hi) = out.interval(k);
                prop_assert!(lo >= ExtInt::from(-8) && hi <= ExtInt::from(7));
            }
        }
    }
}
