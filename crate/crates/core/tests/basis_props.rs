use std::collections::BTreeSet;

use hardylab::basis::{
    basis_order_search, fractional_density, gap_report, gcd_bezout, gen_sequence, read_bitmap_dump, represent_lemma3,
    residue_coverage, sumset_fold, sumset_tower, write_bitmap_dump, FloorFlag, SequenceWindow, DEFAULT_BITSET_BUDGET,
};
use hardylab::FunctionExpr;
use proptest::prelude::*;

fn f(t: &str) -> FunctionExpr {
    FunctionExpr::parse(t).unwrap()
}

fn isqrt(v: u128) -> u128 {
    let mut r = (v as f64).sqrt() as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Set-addition oracle: B_1 = A, B_t = {b + a}.
fn naive_sumset(values: &[u64], s: u32, limit: u64) -> BTreeSet<u64> {
    let a: BTreeSet<u64> = values.iter().copied().filter(|&v| v <= limit).collect();
    let mut cur = a.clone();
    for _ in 1..s {
        let mut next = BTreeSet::new();
        for &b in &cur {
            for &x in &a {
                if b + x <= limit {
                    next.insert(b + x);
                }
            }
        }
        cur = next;
    }
    cur
}

fn naive_max_gap(set: &BTreeSet<u64>, lo: u64, hi: u64) -> u64 {
    let v: Vec<u64> = set.range(lo..=hi).copied().collect();
    v.windows(2).map(|w| w[1] - w[0] - 1).max().unwrap_or(0)
}

#[test]
fn three_halves_floors_match_integer_sqrt() {
    let seq = gen_sequence(&f("pow(x, 1.5)"), 1, 20_000).unwrap();
    for (i, &v) in seq.values.iter().enumerate() {
        let n = 1 + i as u128;
        assert_eq!(v as u128, isqrt(n * n * n), "n = {n}");
    }
    assert_eq!(seq.ambiguous_count(), 0);
    assert!(seq.is_non_decreasing());
}

#[test]
fn perfect_squares_of_sqrt_are_exact() {
    // x^{3/2} is an integer at perfect squares; the floor must not drop below it
    let seq = gen_sequence(&f("pow(x, 1.5)"), 1, 10_000).unwrap();
    for m in 1..=100u64 {
        let i = (m * m - 1) as usize;
        assert_eq!(seq.values[i] as u64, m * m * m);
        assert_ne!(seq.flags[i], FloorFlag::Ambiguous);
    }
}

#[test]
fn sumset_matches_set_addition_on_prefixes() {
    let fs = ["pow(x, 2)", "pow(x, 1.5)", "add(pow(x, 2), log(x))", "pow(x, 1.2)", "pow(x, 2.5)"];
    for (i, text) in fs.iter().enumerate() {
        for (j, len) in [20u64, 45, 80, 200].into_iter().enumerate() {
            let seq = gen_sequence(&f(text), 1 + (i * j) as u64, len).unwrap();
            let vals: Vec<u64> = seq.distinct_values().into_iter().map(|v| v as u64).collect();
            for s in 1..=5 {
                let got: Vec<u64> = sumset_fold(&seq, s, 2000, DEFAULT_BITSET_BUDGET).unwrap().iter_ones().collect();
                let want: Vec<u64> = naive_sumset(&vals, s, 2000).into_iter().collect();
                assert_eq!(got, want, "{text}, len {len}, s {s}");
            }
        }
    }
}

#[test]
fn squares_five_cover_from_34() {
    let seq = gen_sequence(&f("pow(x, 2)"), 1, 400).unwrap();
    let b = sumset_fold(&seq, 5, 100_000, DEFAULT_BITSET_BUDGET).unwrap();
    let r = gap_report(&b, 34, 100_000).unwrap();
    assert_eq!(r.max_gap, 0);
    assert!(!b.contains(33));
    let vals: Vec<u64> = (1..=44).map(|i| i * i).collect();
    let naive = naive_sumset(&vals, 5, 2000);
    assert!((34..=2000).all(|m| naive.contains(&m)));
    assert!(!naive.contains(&33));
}

#[test]
fn order_search_three_halves() {
    let seq = gen_sequence(&f("pow(x, 1.5)"), 1, 10_001).unwrap();
    let (search, tower) = basis_order_search(&seq, 8, 1000, 100_000, DEFAULT_BITSET_BUDGET).unwrap();
    let s = search.order.expect("an order below 9");
    assert!(s <= 8);
    assert_eq!(search.levels.len(), 8);
    assert_eq!(tower.top().s, 8);
    let lvl = &search.levels[s as usize - 1];
    assert_eq!(lvl.max_gaps, [Some(0); 3]);
}

#[test]
fn bitmap_dump_roundtrip() {
    let seq = gen_sequence(&f("pow(x, 1.5)"), 1, 300).unwrap();
    let b = sumset_fold(&seq, 3, 5000, DEFAULT_BITSET_BUDGET).unwrap();
    let mut buf = Vec::new();
    write_bitmap_dump(&b, &mut buf).unwrap();
    assert_eq!(read_bitmap_dump(buf.as_slice()).unwrap(), b);
}

fn check_lemma3(text: &str, s: u32) {
    let limit = 12_000;
    let seq = gen_sequence(&f(text), 1, 2000).unwrap();
    let members: BTreeSet<u64> = seq.distinct_values().into_iter().map(|v| v as u64).collect();
    let tower = sumset_tower(&seq, s, limit, DEFAULT_BITSET_BUDGET).unwrap();
    let m = tower.top().min_element().unwrap();
    let g = gap_report(tower.top(), m, limit).unwrap().max_gap;
    let cert = gcd_bezout(&seq).unwrap().with_gaps(s, g, m);
    assert_eq!(cert.bezout_sum(), 1);
    for n in 10_000..10_100u64 {
        let rep = represent_lemma3(n, s, &cert, &tower).unwrap();
        assert_eq!(rep.parts.iter().sum::<u64>(), n);
        assert!(rep.parts.iter().all(|p| members.contains(p)), "{text}: part outside the sequence");
        assert!(rep.parts.len() as u64 <= cert.order_bound);
        assert!(rep.h <= cert.g);
    }
}

#[test]
fn lemma3_squares() {
    check_lemma3("pow(x, 2)", 2);
    check_lemma3("pow(x, 2)", 3);
}

#[test]
fn lemma3_three_halves() {
    check_lemma3("pow(x, 1.5)", 2);
    check_lemma3("pow(x, 1.5)", 4);
}

#[test]
fn residues_and_density() {
    let segal = f("add(mul(pi, pow(x, 3)), div(pow(x, sqrt(2)), log(log(x)))); shift=2");
    for q in 1..=20 {
        assert_eq!(residue_coverage(&segal, q, 20_000).unwrap().len() as u64, q);
    }
    // [2x] only hits even residues
    assert_eq!(residue_coverage(&f("mul(2, x)"), 4, 1000).unwrap(), vec![0, 2]);
    let d = fractional_density(&segal, 5, 200_000, 10).unwrap();
    assert_eq!(d.histogram.iter().sum::<u64>() + d.ambiguous, 200_000);
    assert!(d.max_deviation < 0.05, "{}", d.max_deviation);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sumset_and_gaps_vs_oracle(
        raw in prop::collection::btree_set(0u64..700, 1..25),
        s in 1u32..=4,
        lo in 0u64..500,
    ) {
        let vals: Vec<u64> = raw.into_iter().collect();
        let seq = SequenceWindow::from_values(1, vals.iter().map(|&v| v as i64).collect(), "set");
        let limit = 2000;
        let bm = sumset_fold(&seq, s, limit, DEFAULT_BITSET_BUDGET).unwrap();
        let naive = naive_sumset(&vals, s, limit);
        prop_assert_eq!(bm.iter_ones().collect::<Vec<_>>(), naive.iter().copied().collect::<Vec<_>>());
        match gap_report(&bm, lo, limit) {
            Ok(r) => prop_assert_eq!(r.max_gap, naive_max_gap(&naive, lo, limit)),
            Err(_) => prop_assert!(naive.range(lo..=limit).next().is_none()),
        }
    }

    #[test]
    fn translation_shifts_the_sumset(
        raw in prop::collection::btree_set(0u64..300, 1..15),
        s in 1u32..=4,
        c in 0u64..40,
    ) {
        let vals: Vec<i64> = raw.iter().map(|&v| v as i64).collect();
        let moved: Vec<i64> = vals.iter().map(|v| v + c as i64).collect();
        let limit = 1500;
        let a = sumset_fold(&SequenceWindow::from_values(1, vals, "a"), s, limit, DEFAULT_BITSET_BUDGET).unwrap();
        let b = sumset_fold(&SequenceWindow::from_values(1, moved, "b"), s, limit, DEFAULT_BITSET_BUDGET).unwrap();
        let shift = s as u64 * c;
        for m in a.iter_ones().filter(|&m| m + shift <= limit) {
            prop_assert!(b.contains(m + shift));
        }
        for m in b.iter_ones() {
            prop_assert!(m >= shift && a.contains(m - shift));
        }
    }

    #[test]
    fn bezout_certificate_is_exact(raw in prop::collection::btree_set(0i64..100_000, 2..40)) {
        let vals: Vec<i64> = raw.into_iter().collect();
        let seq = SequenceWindow::from_values(1, vals.clone(), "set");
        let a1 = vals[0];
        let g = vals.iter().fold(0i64, |g, &v| num_gcd(g, v - a1));
        match gcd_bezout(&seq) {
            Ok(c) => {
                prop_assert_eq!(g, 1);
                prop_assert_eq!(c.bezout_sum(), 1);
                prop_assert!(c.prefix.iter().all(|v| vals.contains(v)));
            }
            Err(_) => prop_assert!(g != 1),
        }
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        num_gcd(b, a % b)
    }
}
