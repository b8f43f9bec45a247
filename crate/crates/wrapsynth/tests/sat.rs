mod common;

use common::{brute_sat, random_formula};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wrapsynth::sat::dimacs::{export_dimacs, parse_dimacs};
use wrapsynth::sat::{Cnf, Lit, Session, Solver};

fn satisfies(s: &Solver, clauses: &[Vec<Lit>]) -> bool {
    clauses.iter().all(|c| c.iter().any(|&l| s.model_value(l)))
}

#[test]
fn cdcl_agrees_with_truth_tables_on_10000_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut disagreements = 0;
    let (mut sat, mut unsat) = (0, 0);
    for _ in 0..10_000 {
        let (n, clauses) = random_formula(&mut rng);
        let mut s = Solver::new();
        s.ensure_vars(n);
        for c in &clauses {
            s.add_clause(c);
        }
        let got = s.solve(&[]).unwrap();
        let want = brute_sat(n, &clauses);
        if got != want || (got && !satisfies(&s, &clauses)) {
            disagreements += 1;
        }
        if want {
            sat += 1;
        } else {
            unsat += 1;
        }
    }
    assert_eq!(disagreements, 0);
    assert!(sat > 1000 && unsat > 1000, "sat {sat}, unsat {unsat}");
}

#[test]
fn assumptions_agree_with_truth_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let (n, clauses) = random_formula(&mut rng);
        let mut s = Solver::new();
        s.ensure_vars(n);
        for c in &clauses {
            s.add_clause(c);
        }
        // Several queries on one solver so learnt clauses carry over.
        for _ in 0..4 {
            let k = rng.gen_range(0..=n.min(4));
            let assume: Vec<Lit> = (0..k).map(|_| Lit::new(rng.gen_range(0..n), rng.gen())).collect();
            let mut with_units = clauses.clone();
            with_units.extend(assume.iter().map(|&l| vec![l]));
            let want = brute_sat(n, &with_units);
            let got = s.solve(&assume).unwrap();
            assert_eq!(got, want);
            if got {
                assert!(satisfies(&s, &with_units));
            }
        }
    }
}

#[test]
fn trivial_cases() {
    let mut s = Solver::new();
    let x = Lit::pos(s.new_var());
    s.add_clause(&[x]);
    s.add_clause(&[!x]);
    assert!(!s.solve(&[]).unwrap());

    let mut s = Solver::new();
    let x = Lit::pos(s.new_var());
    let y = Lit::pos(s.new_var());
    s.add_clause(&[x, y]);
    assert!(s.solve(&[!x]).unwrap());
    assert!(s.model_value(y));
}

#[test]
fn incremental_clauses_between_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..500 {
        let (n, clauses) = random_formula(&mut rng);
        let mut s = Solver::new();
        s.ensure_vars(n);
        for (i, c) in clauses.iter().enumerate() {
            s.add_clause(c);
            if i % 5 == 4 {
                assert_eq!(s.solve(&[]).unwrap(), brute_sat(n, &clauses[..=i]));
            }
        }
    }
}

#[test]
fn conflict_budget_is_reported_apart_from_unsat() {
    // Pigeonhole 8 into 7 needs many conflicts.
    let (p, h) = (8u32, 7u32);
    let mut s = Solver::new();
    let var = |i: u32, j: u32| Lit::pos(i * h + j);
    s.ensure_vars(p * h);
    for i in 0..p {
        let c: Vec<Lit> = (0..h).map(|j| var(i, j)).collect();
        s.add_clause(&c);
    }
    for j in 0..h {
        for a in 0..p {
            for b in a + 1..p {
                s.add_clause(&[!var(a, j), !var(b, j)]);
            }
        }
    }
    s.set_conflict_budget(Some(10));
    assert!(s.solve(&[]).is_err());
    s.set_conflict_budget(None);
    assert!(!s.solve(&[]).unwrap());
}

#[test]
fn dimacs_export_format() {
    assert_eq!(export_dimacs(&Cnf::new()), "p cnf 0 0\n");
    let mut cnf = Cnf::new();
    let x = cnf.new_var();
    cnf.add_clause(&[x]);
    assert_eq!(export_dimacs(&cnf), "p cnf 1 1\n1 0\n");
}

#[test]
fn dimacs_parse_errors() {
    assert!(parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
    assert!(parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
    assert!(parse_dimacs("1 2 0\n").is_err());
    let cnf = parse_dimacs("c comment\np cnf 3 2\n1 -2\n 3 0\n-1 0\n").unwrap();
    assert_eq!(cnf.clauses.len(), 2);
    assert_eq!(cnf.clauses[0].len(), 3);
}

proptest! {
    #[test]
    fn dimacs_round_trip(n in 1u32..12, raw in prop::collection::vec(prop::collection::vec((0u32..12, any::<bool>()), 1..5), 0..30)) {
        let mut cnf = Cnf::new();
        cnf.num_vars = n;
        for c in raw {
            let lits: Vec<Lit> = c.into_iter().map(|(v, neg)| Lit::new(v % n, neg)).collect();
            cnf.add_clause(&lits);
        }
        let text = export_dimacs(&cnf);
        prop_assert_eq!(parse_dimacs(&text).unwrap(), cnf);
    }

    #[test]
    fn assumptions_are_rescinded(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, clauses) = random_formula(&mut rng);
        let mut cnf = Cnf::new();
        cnf.num_vars = n;
        for c in &clauses {
            cnf.add_clause(c);
        }
        let mut s = Session::new(&cnf);
        let assume: Vec<Lit> = (0..3).map(|_| Lit::new(rng.gen_range(0..n), rng.gen())).collect();
        let _ = s.solve(&assume).unwrap();
        prop_assert_eq!(s.solve(&[]).unwrap(), brute_sat(n, &clauses));
        prop_assert_eq!(s.calls(), 2);
    }
}
