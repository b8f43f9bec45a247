use proptest::prelude::*;
use std::collections::BTreeSet;
use wrapsynth::affine::AffineSpace;
use wrapsynth::corpus;
use wrapsynth::encoder::encode_block;
use wrapsynth::ext::ExtInt;
use wrapsynth::isa::{parse_block, ModeVector};
use wrapsynth::oracle::{brute_guard_bounds, brute_hull, brute_modes, Table};
use wrapsynth::sat::Session;
use wrapsynth::synth::{affine_relation, feasible_modes, feasible_modes_flat, synthesize, Strategy, SynthConfig};
use wrapsynth::template::TemplateSet;
use wrapsynth::tf::{Domain, TransferFunction};

fn same_space(a: &AffineSpace, b: &AffineSpace) -> bool {
    a.rank() == b.rank() && a.join(b).unwrap().rank() == a.rank()
}

fn quick() -> SynthConfig {
    SynthConfig { strategy: Strategy::Const, parallel: false, ..SynthConfig::default() }
}

#[test]
fn modes_match_brute_force_at_w5() {
    for block in corpus::all() {
        let block = block.with_width(5);
        let enc = encode_block(&block).unwrap();
        let mut s = Session::new(&enc.builder.cnf);
        let got: BTreeSet<ModeVector> = feasible_modes(&enc, &mut s, 4096).unwrap().into_iter().collect();
        let mut s = Session::new(&enc.builder.cnf);
        let flat: BTreeSet<ModeVector> = feasible_modes_flat(&enc, &mut s).unwrap().into_iter().collect();
        let want = brute_modes(&block).unwrap();
        assert_eq!(got, want, "{}", block.name);
        assert_eq!(flat, want, "{} (flat)", block.name);
    }
}

#[test]
fn mode_cap_is_a_resource_limit() {
    let block = corpus::block("isign").unwrap().with_width(6);
    let cfg = SynthConfig { mode_cap: 3, ..quick() };
    let e = synthesize(&block, &cfg).unwrap_err();
    assert!(e.is_resource_limit(), "{e}");
}

#[test]
fn octagon_guards_are_optimal_at_w6() {
    for name in ["inc", "swap", "add_lsl", "roundup", "isign"] {
        let block = corpus::block(name).unwrap().with_width(6);
        let s = synthesize(&block, &quick()).unwrap();
        let table = Table::enumerate(&block).unwrap();
        let t = TemplateSet::octagon(table.n);
        for pair in &s.tf.pairs {
            let want = wrapsynth::oracle::guard_bounds(&table, &pair.modes, &t.patterns);
            let got: Vec<ExtInt> = pair.guard.iter().map(|g| g.bound.clone()).collect();
            assert_eq!(got, want, "{name} {}", pair.modes.letters());
        }
    }
}

#[test]
fn interval_guards_are_optimal_at_w5() {
    let block = corpus::block("isign").unwrap().with_width(5);
    let cfg = SynthConfig { domain: Domain::Interval, ..quick() };
    let s = synthesize(&block, &cfg).unwrap();
    for pair in &s.tf.pairs {
        let want = brute_guard_bounds(&block, &pair.modes, &TemplateSet::interval(2)).unwrap();
        let got: Vec<ExtInt> = pair.guard.iter().map(|g| g.bound.clone()).collect();
        assert_eq!(got, want, "{}", pair.modes.letters());
    }
}

#[test]
fn inc_guard_takes_32_calls_per_bound() {
    let block = corpus::block("inc").unwrap();
    let cfg = SynthConfig { domain: Domain::Interval, ..quick() };
    let s = synthesize(&block, &cfg).unwrap();
    assert_eq!(s.stats.pairs.len(), 2);
    for p in &s.stats.pairs {
        assert_eq!(p.guard_calls, 64, "{}", p.modes);
    }
    assert_eq!(s.stats.guard_calls(), 128);
}

#[test]
fn one_octagon_guard_takes_268_calls() {
    let block = corpus::block("swap").unwrap();
    let s = synthesize(&block, &quick()).unwrap();
    assert_eq!(s.stats.pairs.len(), 1);
    assert_eq!(s.stats.pairs[0].guard_calls, 268);
}

#[test]
fn affine_relation_matches_brute_hull_at_w5() {
    for name in ["add_lsl", "isign", "roundup", "swap", "mul_add"] {
        let block = corpus::block(name).unwrap().with_width(5);
        let mut cfg = quick();
        let mut monos = Vec::new();
        if name == "mul_add" {
            cfg.monomials = vec![vec![0, 2]];
            monos = vec![vec![0, 2]];
        }
        for mv in brute_modes(&block).unwrap() {
            let got = affine_relation(&block, &cfg, &mv).unwrap();
            let want = brute_hull(&block, &mv, &monos).unwrap();
            assert!(same_space(&got, &want), "{name} {}: {got:?} vs {want:?}", mv.letters());
        }
    }
}

#[test]
fn mul_add_relation_is_the_polynomial() {
    let block = corpus::block("mul_add").unwrap().with_width(6);
    let cfg = SynthConfig { monomials: vec![vec![0, 2]], ..quick() };
    let mv = ModeVector::parse(&block, "PP").unwrap();
    let s = affine_relation(&block, &cfg, &mv).unwrap();
    // Columns: r0' r1' r2' r0 r1 r2 s.
    let b = |v: &[i64]| v.iter().map(|&x| x.into()).collect::<Vec<num_bigint::BigInt>>();
    assert!(s.contains(&b(&[3 * 2 + 5, 5, 2, 3, 5, 2, 6])));
    assert!(!s.contains(&b(&[3 * 2 + 6, 5, 2, 3, 5, 2, 6])));
    assert_eq!(s.rank(), Some(4));
}

#[test]
fn monomial_over_untracked_register_is_rejected() {
    let block = corpus::block("add_lsl").unwrap().with_width(4);
    let cfg = SynthConfig { monomials: vec![vec![0, 7]], ..quick() };
    assert!(synthesize(&block, &cfg).is_err());
}

#[test]
fn synthesis_is_deterministic_across_thread_settings() {
    let block = corpus::block("roundup").unwrap().with_width(8);
    let serial = synthesize(&block, &SynthConfig { parallel: false, ..SynthConfig::default() }).unwrap();
    let parallel = synthesize(&block, &SynthConfig { parallel: true, ..SynthConfig::default() }).unwrap();
    assert_eq!(serial.tf.to_json(), parallel.tf.to_json());
}

fn small_tfs() -> Vec<TransferFunction> {
    let mut out = Vec::new();
    for (name, domain, strategy) in [
        ("isign", Domain::Interval, Strategy::Ladder),
        ("roundup", Domain::Octagon, Strategy::Ladder),
        ("add_lsl", Domain::Octagon, Strategy::Medium),
    ] {
        let block = corpus::block(name).unwrap().with_width(5);
        let cfg = SynthConfig { domain, strategy, parallel: false, ..SynthConfig::default() };
        out.push(synthesize(&block, &cfg).unwrap().tf);
    }
    let block = corpus::block("mul_add").unwrap().with_width(4);
    let cfg = SynthConfig { monomials: vec![vec![0, 2]], strategy: Strategy::Medium, parallel: false, ..SynthConfig::default() };
    out.push(synthesize(&block, &cfg).unwrap().tf);
    out
}

#[test]
fn text_and_json_round_trip() {
    for tf in small_tfs() {
        assert_eq!(TransferFunction::from_text(&tf.to_text()).unwrap(), tf, "{}", tf.block);
        assert_eq!(TransferFunction::from_json(&tf.to_json()).unwrap(), tf, "{}", tf.block);
        assert_eq!(tf.block().unwrap().tracked(), tf.registers);
    }
}

#[test]
fn malformed_text_reports_a_line() {
    let tf = &small_tfs()[0];
    let text = tf.to_text().replacen("update d'1 <=", "update d'1 <<", 1);
    let e = TransferFunction::from_text(&text).unwrap_err();
    assert!(e.line > 0, "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random constant shifts in a parsed function survive both encodings.
    #[test]
    fn edited_functions_round_trip(shift in -1_000_000i64..1_000_000, pick in 0usize..64) {
        let src = "ADD R0 R1; LSL R0";
        let block = parse_block(src).unwrap().with_width(4);
        let cfg = SynthConfig { strategy: Strategy::Relational, parallel: false, ..SynthConfig::default() };
        let mut tf = synthesize(&block, &cfg).unwrap().tf;
        let np = tf.pairs.len();
        let pair = &mut tf.pairs[pick % np];
        let nr = pair.update.len();
        prop_assume!(nr > 0);
        let row = &mut pair.update[pick % nr];
        row.candidates[0].constant += shift;
        prop_assert_eq!(TransferFunction::from_text(&tf.to_text()).unwrap(), tf.clone());
        prop_assert_eq!(TransferFunction::from_json(&tf.to_json()).unwrap(), tf);
    }
}
