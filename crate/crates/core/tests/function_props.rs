use hardylab::function::special::{lgamma, li};
use hardylab::function::{monotone_probe, FunctionClass, MAX_JET_ORDER};
use hardylab::{classify, polynomial_part, DoubleDouble, EvalError, FunctionExpr, Precision};
use proptest::prelude::*;

fn f(t: &str) -> FunctionExpr {
    FunctionExpr::parse(t).unwrap()
}

const SEGAL: &str = "add(mul(pi, pow(x, 3)), div(pow(x, sqrt(2)), log(log(x)))); shift=2";

/// Functions used for the finite-difference cross-check.
fn jet_corpus() -> Vec<FunctionExpr> {
    [
        "pow(x, 2)",
        "pow(x, 1.5)",
        "add(pow(x, 2), log(x))",
        SEGAL,
        "pow(li(x), 2); shift=1",
        "pow(lgamma(x), sqrt(2)); shift=2",
    ]
    .iter()
    .map(|t| f(t))
    .collect()
}

/// Log-spaced probes on [10, 10^6].
fn probes(count: usize) -> Vec<f64> {
    (0..count).map(|i| 10f64.powf(1.0 + 5.0 * i as f64 / (count - 1) as f64)).collect()
}

#[test]
fn jets_match_central_differences() {
    for g in jet_corpus() {
        for x in probes(20) {
            let jet = g.eval_jet(x, 4).unwrap();
            assert!((jet.value() - g.eval_f64(x).unwrap()).abs() <= 1e-13 * jet.value().abs().max(1.0));
            let h = 1e-4 * x;
            let lo = g.eval_jet(x - h, 3).unwrap();
            let hi = g.eval_jet(x + h, 3).unwrap();
            for j in 1..=4 {
                let fd = (hi.d(j - 1) - lo.d(j - 1)) / (2.0 * h);
                let err = (jet.d(j) - fd).abs() / jet.d(j).abs().max(1.0);
                assert!(err <= 1e-6, "{g} at x = {x}, j = {j}: jet {} vs fd {fd}", jet.d(j));
            }
        }
    }
}

#[test]
fn direct_formula_for_segal_function() {
    let g = f(SEGAL);
    let x: f64 = 100.0;
    let t = x + 2.0;
    let want = std::f64::consts::PI * t.powi(3) + t.powf(2f64.sqrt()) / t.ln().ln();
    let got = g.eval_f64(x).unwrap();
    assert!((got - want).abs() <= 1e-12 * want);
    let dd = g.eval(x, Precision::Extended).unwrap();
    assert!((dd - want).abs() <= 1e-12 * want);
}

#[test]
fn li_two_matches_quadrature_oracle() {
    // li 2 = γ + ln ln 2 + Σ (ln 2)^k / (k·k!)
    let u = 2f64.ln();
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..40 {
        term *= u / k as f64;
        sum += term / k as f64;
    }
    let series = 0.577_215_664_901_532_9 + u.ln() + sum;
    assert!((li(2.0) - series).abs() < 1e-14);
    // li 10 - li 2 by a fine Simpson rule on 1/log t
    let n = 200_000;
    let h = 8.0 / n as f64;
    let mut s = 1.0 / 2f64.ln() + 1.0 / 10f64.ln();
    for i in 1..n {
        let t = 2.0 + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } / t.ln();
    }
    assert!((li(10.0) - li(2.0) - s * h / 3.0).abs() < 1e-10);
}

#[test]
fn lgamma_matches_factorials() {
    let mut fact = 1.0f64;
    for n in 1..30u32 {
        fact *= n as f64;
        // Γ(n + 1) = n!
        assert!((lgamma(n as f64 + 1.0) - fact.ln()).abs() <= 1e-13 * fact.ln().max(1.0));
    }
}

#[test]
fn simple_values_and_errors() {
    assert_eq!(f("pow(x, 2)").eval_f64(3.0).unwrap(), 9.0);
    let j = f("pow(x, 2)").eval_jet(3.0, 2).unwrap();
    assert_eq!(j.derivatives, vec![9.0, 6.0, 2.0]);
    let j = f("pow(x, 1.5)").eval_jet(4.0, 1).unwrap();
    assert_eq!(j.derivatives, vec![8.0, 3.0]);
    assert!(matches!(f("x").eval_jet(2.0, MAX_JET_ORDER + 1), Err(EvalError::OrderTooHigh { .. })));
    assert!(matches!(f("x").eval_f64(0.5), Err(EvalError::BelowOne(_))));
    // log log x needs a shift; without one it is rejected at construction
    assert!(FunctionExpr::parse("div(x, log(log(x))); shift=0").is_err());
    // smallest domain-valid shift: log log 2 < 0 but finite
    assert_eq!(f("div(x, log(log(x)))").shift(), 1.0);
}

#[test]
fn paper_examples_classify() {
    let p = classify(&f("pow(x, 2)"), None).unwrap();
    assert_eq!((p.class, p.d_f), (FunctionClass::I, 2));
    assert_eq!(p.poly_part, vec![0.0, 1.0]);

    let p = classify(&f(SEGAL), None).unwrap();
    assert_eq!((p.class, p.d_f), (FunctionClass::III, 3));
    assert!((p.c_f - 2f64.sqrt()).abs() < 0.1);
    assert!(!p.subpolynomial_remainder);

    let p = classify(&f("div(pow(x, 2), log(x)); shift=1"), None).unwrap();
    assert_eq!(p.class, FunctionClass::II);
    assert!((p.degree() - 2.0).abs() < 0.1);
    assert!(p.poly_part.is_empty());
}

#[test]
fn polynomial_parts() {
    let g = f("add(pow(x, 2), log(x))");
    let p = classify(&g, None).unwrap();
    assert_eq!(polynomial_part(&g, &p).unwrap(), vec![0.0, 1.0]);

    let g = f("add(add(mul(2, pow(x, 3)), mul(5, x)), li(add(x, 1))); shift=0");
    let p = classify(&g, None).unwrap();
    assert_eq!(p.class, FunctionClass::III);
    let alpha = polynomial_part(&g, &p).unwrap();
    for (a, b) in alpha.iter().zip([5.0, 0.0, 2.0]) {
        assert!((a - b).abs() < 1e-9, "{alpha:?}");
    }

    // (x + 1)² through an opaque form: exp(2 log(x + 1)) forces the numeric fit
    let g = f("exp(mul(2, log(add(x, 1))))");
    let p = classify(&g, None).unwrap();
    let alpha = polynomial_part(&g, &p).unwrap();
    assert!((alpha[0] - 2.0).abs() < 1e-5 && (alpha[1] - 1.0).abs() < 1e-9, "{alpha:?}");
}

#[test]
fn classify_is_idempotent_on_reconstruction() {
    for t in ["pow(x, 2)", SEGAL, "add(pow(x, 2), log(x))", "pow(x, 1.5)", "mul(sqrt(2), x)"] {
        let p = classify(&f(t), None).unwrap();
        let q = classify(&p.reconstruct().unwrap(), None).unwrap();
        assert_eq!((p.class, p.d_f), (q.class, q.d_f), "{t}");
        if p.class != FunctionClass::I && !p.subpolynomial_remainder {
            assert!((p.c_f - q.c_f).abs() < 0.1, "{t}");
        }
    }
}

#[test]
fn class_three_remainder_growth() {
    let g = f(SEGAL);
    let p = classify(&g, None).unwrap();
    let poly = |x: f64| p.poly_part.iter().enumerate().map(|(j, a)| a * x.powi(j as i32 + 1)).sum::<f64>();
    for x in [1e4, 1e5] {
        let r1 = (DoubleDouble::from_f64(g.eval_f64(x).unwrap()) - DoubleDouble::from_f64(poly(x))).to_f64();
        let r2 =
            (DoubleDouble::from_f64(g.eval_f64(2.0 * x).unwrap()) - DoubleDouble::from_f64(poly(2.0 * x))).to_f64();
        let c = (r2 / r1).log2();
        assert!((c - p.c_f).abs() <= 0.1, "exponent {c} vs {}", p.c_f);
    }
}

#[test]
fn monotone_probe_on_increasing_functions() {
    for g in jet_corpus() {
        assert!(monotone_probe(&g, 10.0, 200).unwrap());
        let xs = probes(200);
        let vals: Vec<f64> = xs.iter().map(|&x| g.eval_f64(x).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }
}

proptest! {
    #[test]
    fn double_and_extended_agree(c in 0.1f64..10.0, p in 1.0f64..3.0, x in 1.0f64..1e6) {
        let g = FunctionExpr::parse(&format!("add(mul({c}, pow(x, {p})), log(x))")).unwrap();
        let a = g.eval_f64(x).unwrap();
        let b = g.eval_dd(DoubleDouble::from_f64(x)).unwrap().to_f64();
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn polynomial_jets_are_exact(coeffs in proptest::collection::vec(-5i32..5, 1..5), x in 1u32..1000) {
        let terms: Vec<String> = coeffs.iter().enumerate().map(|(j, c)| format!("mul({c}, pow(x, {}))", j + 1)).collect();
        let text = terms.iter().skip(1).fold(terms[0].clone(), |acc, t| format!("add({acc}, {t})"));
        let g = FunctionExpr::parse(&text).unwrap();
        let xf = x as f64;
        let jet = g.eval_jet(xf, 2).unwrap();
        let d1: f64 = coeffs.iter().enumerate().map(|(j, &c)| c as f64 * (j + 1) as f64 * xf.powi(j as i32)).sum();
        prop_assert!((jet.d(1) - d1).abs() <= 1e-9 * d1.abs().max(1.0));
    }

    #[test]
    fn taylor_step_matches_evaluation(x in 100.0f64..1e5, t in -0.5f64..0.5) {
        let g = f("add(pow(x, 2), log(x))");
        let jet = g.eval_jet(x, 6).unwrap();
        let direct = g.eval_f64(x + t).unwrap();
        prop_assert!((jet.taylor(t) - direct).abs() <= 1e-12 * direct);
    }
}
