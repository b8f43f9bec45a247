use num_bigint::BigInt;
use proptest::prelude::*;
use wrapsynth::ext::ExtInt;
use wrapsynth::octdom::{Octagon, TemplateConstraint};
use wrapsynth::template::{Pattern, TemplateSet};

fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

fn boxed(bounds: &[(i64, i64)]) -> Octagon {
    Octagon::from_box(&bounds.iter().map(|&(l, h)| (b(l), b(h))).collect::<Vec<_>>())
}

#[test]
fn meet_tightens_through_sum() {
    let o = boxed(&[(0, 4), (0, 1)]);
    let m = o.meet(&[TemplateConstraint::new(Pattern(vec![1, 1]), 4i128)]);
    assert_eq!(m.bound_of(&Pattern(vec![1, 1])), ExtInt::fin(4));
    assert_eq!(m.bound_of(&Pattern(vec![1, -1])), ExtInt::fin(4));
    assert_eq!(o.meet(&[]), o);
}

#[test]
fn contradiction_is_bottom() {
    let o = Octagon::top(1).meet(&[
        TemplateConstraint::new(Pattern(vec![1]), 1i128),
        TemplateConstraint::new(Pattern(vec![-1]), -2i128),
    ]);
    assert!(o.is_bottom());
    assert_eq!(o.bound_of(&Pattern(vec![1])), ExtInt::NegInf);
}

#[test]
fn parity_tightening() {
    // x + y <= 1 and x - y <= 0 and y - x <= 0 force x = y, so 2x <= 1, x <= 0.
    let o = Octagon::top(2).meet(&[
        TemplateConstraint::new(Pattern(vec![1, 1]), 1i128),
        TemplateConstraint::new(Pattern(vec![1, -1]), 0i128),
        TemplateConstraint::new(Pattern(vec![-1, 1]), 0i128),
    ]);
    assert_eq!(o.bound_of(&Pattern(vec![1, 0])), ExtInt::fin(0));
}

#[test]
fn join_of_two_points() {
    let j = Octagon::from_point(&[b(0)]).join(&Octagon::from_point(&[b(4)]));
    assert_eq!(j.interval(0), (ExtInt::fin(0), ExtInt::fin(4)));
    let bot = Octagon::bottom(1);
    assert_eq!(j.join(&bot), j);
}

const R: i64 = 5;

fn points(o: &Octagon, n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = (2 * R + 1).pow(n as u32);
    for code in 0..total {
        let p: Vec<i64> = (0..n).map(|k| (code / (2 * R + 1).pow(k as u32)) % (2 * R + 1) - R).collect();
        if o.contains(&p.iter().map(|&v| b(v)).collect::<Vec<_>>()) {
            out.push(p);
        }
    }
    out
}

fn constraints(n: usize) -> impl Strategy<Value = Vec<(usize, i64)>> {
    let k = TemplateSet::octagon(n).len();
    prop::collection::vec((0..k, -6i64..7), 0..6)
}

fn build(n: usize, cs: &[(usize, i64)]) -> Octagon {
    let t = TemplateSet::octagon(n);
    let mut o = boxed(&vec![(-R + 1, R - 1); n]);
    let extra: Vec<TemplateConstraint> =
        cs.iter().map(|&(i, c)| TemplateConstraint::new(t.patterns[i].clone(), c as i128)).collect();
    o = o.meet(&extra);
    o
}

fn max_over(ps: &[Vec<i64>], p: &Pattern) -> ExtInt {
    ps.iter()
        .map(|x| p.0.iter().zip(x).map(|(&c, &v)| c * v).sum::<i64>())
        .max()
        .map_or(ExtInt::NegInf, |v| ExtInt::fin(v))
}

proptest! {
    #[test]
    fn closure_bounds_are_exact(n in 2usize..4, cs in constraints(3)) {
        let cs: Vec<(usize, i64)> = cs.into_iter().filter(|&(i, _)| i < TemplateSet::octagon(n).len()).collect();
        let o = build(n, &cs);
        // Points of the unclosed constraint set, enumerated directly.
        let raw = {
            let t = TemplateSet::octagon(n);
            let mut u = boxed(&vec![(-R + 1, R - 1); n]);
            for &(i, c) in &cs {
                u.add(&t.patterns[i], &ExtInt::fin(c));
            }
            points(&u, n)
        };
        prop_assert_eq!(o.is_bottom(), raw.is_empty());
        for p in TemplateSet::octagon(n).patterns {
            prop_assert_eq!(o.bound_of(&p), max_over(&raw, &p));
        }
        prop_assert_eq!(o.clone().close(), o);
    }

    #[test]
    fn join_is_least_upper_bound(a in constraints(2), c in constraints(2)) {
        let (x, y) = (build(2, &a), build(2, &c));
        let j = x.join(&y);
        let (px, py) = (points(&x, 2), points(&y, 2));
        for p in px.iter().chain(&py) {
            prop_assert!(j.contains(&p.iter().map(|&v| b(v)).collect::<Vec<_>>()));
        }
        prop_assert!(x.leq(&j) && y.leq(&j));
        for p in TemplateSet::octagon(2).patterns {
            prop_assert_eq!(j.bound_of(&p), x.bound_of(&p).max(y.bound_of(&p)));
        }
    }

    #[test]
    fn meet_is_monotone(a in constraints(2), c in constraints(2), d in constraints(2)) {
        let (x, y) = (build(2, &a), build(2, &c));
        let lo = x.meet(&y.constraints());
        let t = TemplateSet::octagon(2);
        let extra: Vec<TemplateConstraint> =
            d.iter().map(|&(i, k)| TemplateConstraint::new(t.patterns[i].clone(), k as i128)).collect();
        prop_assert!(lo.meet(&extra).leq(&x.meet(&extra)));
    }
}
