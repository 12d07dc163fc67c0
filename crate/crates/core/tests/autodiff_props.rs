mod common;

use common::{fd_gradient, fd_hessian, random_expression, rel_err};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistprod::{Expression, Jet2};

const VARS: [&str; 3] = ["a", "b", "c"];

fn expression(seed: u64, depth: u32) -> Expression {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = random_expression(&mut rng, &VARS, depth);
    Expression::parse(&src, &VARS).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9..0.9f64, 3)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x7457),
        ..ProptestConfig::default()
    })]

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), x in point()) {
        let e = expression(seed, 4);
        let jet = e.eval_jet2(&x).unwrap();
        let fd = fd_gradient(|p| e.eval(p).unwrap(), &x, 1e-5);
        for i in 0..3 {
            prop_assert!(rel_err(jet.grad()[i], fd[i]) <= 1e-6, "{e}: d{i} {} vs {}", jet.grad()[i], fd[i]);
        }
    }

    #[test]
    fn hessian_matches_second_differences(seed in any::<u64>(), x in point()) {
        let e = expression(seed, 4);
        let jet = e.eval_jet2(&x).unwrap();
        let fd = fd_hessian(|p| e.eval(p).unwrap(), &x, 1e-4);
        for k in 0..9 {
            prop_assert!(rel_err(jet.hess()[k], fd[k]) <= 1e-4, "{e}: H[{k}] {} vs {}", jet.hess()[k], fd[k]);
        }
    }

    #[test]
    fn hessian_is_exactly_symmetric(seed in any::<u64>(), x in point()) {
        let jet = expression(seed, 5).eval_jet2(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(jet.hess_at(i, j).to_bits(), jet.hess_at(j, i).to_bits());
            }
        }
    }

    #[test]
    fn jet_value_is_plain_evaluation(seed in any::<u64>(), x in point()) {
        let e = expression(seed, 5);
        let (j, v) = (e.eval_jet2(&x).unwrap().value(), e.eval(&x).unwrap());
        // jets go through compose/powf, so allow a few ulps
        prop_assert!(rel_err(j, v) <= 1e-14, "{e}: {j} vs {v}");
    }

    #[test]
    fn printed_expression_parses_back(seed in any::<u64>()) {
        let e = expression(seed, 5);
        let again = Expression::parse(&e.to_string(), &VARS).unwrap();
        prop_assert_eq!(&e, &again, "{}", e);
    }

    #[test]
    fn jets_are_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64, x in point()) {
        let (f, g) = (expression(s1, 3), expression(s2, 3));
        let combo = Expression::parse(&format!("({a}) * ({f}) + ({b}) * ({g})"), &VARS).unwrap();
        let lhs = combo.eval_jet2(&x).unwrap();
        let rhs: Jet2 = f.eval_jet2(&x).unwrap().scale(a) + g.eval_jet2(&x).unwrap().scale(b);
        prop_assert!(rel_err(lhs.value(), rhs.value()) < 1e-12);
        for (u, v) in lhs.grad().iter().zip(rhs.grad()) {
            prop_assert!(rel_err(*u, *v) < 1e-12);
        }
        for (u, v) in lhs.hess().iter().zip(rhs.hess()) {
            prop_assert!(rel_err(*u, *v) < 1e-12);
        }
    }

    #[test]
    fn product_rule_holds_on_jets(s1 in any::<u64>(), s2 in any::<u64>(), x in point()) {
        let (f, g) = (expression(s1, 3), expression(s2, 3));
        let (jf, jg) = (f.eval_jet2(&x).unwrap(), g.eval_jet2(&x).unwrap());
        let fg = jf.clone() * jg.clone();
        for i in 0..3 {
            let expect = jf.grad()[i] * jg.value() + jf.value() * jg.grad()[i];
            prop_assert!(rel_err(fg.grad()[i], expect) < 1e-12);
        }
    }
}

#[test]
fn domain_errors_surface_instead_of_nan() {
    let e = Expression::parse("ln(a) + sqrt(b)", &VARS).unwrap();
    assert!(e.eval_jet2(&[-1.0, 1.0, 0.0]).is_err());
    assert!(e.eval_jet2(&[1.0, -1.0, 0.0]).is_err());
    assert!(e.eval_jet2(&[1.0, 1.0, 0.0]).is_ok());
}
