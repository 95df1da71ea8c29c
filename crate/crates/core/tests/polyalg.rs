use hypoheat::polyalg::{
    parse_polynomial, q, qi, DilationWeights, Homogeneity, Rational, WeightedPolynomial,
};
use proptest::prelude::*;

const N: usize = 3;

fn poly() -> impl Strategy<Value = WeightedPolynomial> {
    prop::collection::vec((prop::collection::vec(0u32..=3, N), -5i64..=5, 1i64..=4), 0..5)
        .prop_map(|terms| {
            terms.into_iter().fold(WeightedPolynomial::zero(N), |acc, (e, n, d)| {
                &acc + &WeightedPolynomial::monomial(e, q(n, d))
            })
        })
}

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=7).prop_map(|(n, d)| q(n, d))
}

fn weights() -> DilationWeights {
    DilationWeights::new(vec![qi(1), qi(2), qi(3)]).unwrap()
}

fn homogeneous_part(p: &WeightedPolynomial, d: i64) -> WeightedPolynomial {
    let w = weights();
    p.terms()
        .filter(|(e, _)| w.monomial_degree(e) == qi(d))
        .fold(WeightedPolynomial::zero(N), |acc, (e, c)| {
            &acc + &WeightedPolynomial::monomial(e.clone(), c.clone())
        })
}

fn monomials_of_degree(d: i64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for a in 0..=d {
        for b in 0..=d / 2 {
            let rest = d - a - 2 * b;
            if rest >= 0 && rest % 3 == 0 {
                out.push(vec![a as u32, b as u32, (rest / 3) as u32]);
            }
        }
    }
    out
}

/// A nonzero polynomial homogeneous of some degree in `0..6`.
fn homogeneous() -> impl Strategy<Value = (i64, WeightedPolynomial)> {
    (0i64..6).prop_flat_map(|d| {
        let monos = monomials_of_degree(d);
        let k = monos.len();
        (Just(d), Just(monos), prop::collection::vec(-3i64..=3, k), 0..k)
    })
    .prop_map(|(d, monos, coefs, lead)| {
        let mut p = WeightedPolynomial::monomial(monos[lead].clone(), qi(7));
        for (m, c) in monos.into_iter().zip(coefs) {
            p = &p + &WeightedPolynomial::monomial(m, qi(c));
        }
        (d, p)
    })
}

proptest! {
    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn degree_of_product_adds((da, a) in homogeneous(), (db, b) in homogeneous()) {
        let w = weights();
        prop_assert_eq!(
            (&a * &b).weighted_degree(&w).unwrap(),
            Homogeneity::Homogeneous(qi(da + db))
        );
    }

    #[test]
    fn homogeneous_scaling_is_exact(
        p in poly(), d in 0i64..7, lambda in rational(), x in prop::collection::vec(rational(), N)
    ) {
        let p = homogeneous_part(&p, d);
        let w = weights();
        let scaled: Vec<Rational> = x
            .iter()
            .zip(w.sigma())
            .map(|(xi, s)| xi * num_traits::pow(lambda.clone(), s.to_integer().try_into().unwrap()))
            .collect();
        let lhs = p.eval_rational(&scaled).unwrap();
        let rhs = p.eval_rational(&x).unwrap() * num_traits::pow(lambda.clone(), d as usize);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonical_text_roundtrips(p in poly()) {
        let text = p.to_canonical_string(Some(&weights()));
        prop_assert_eq!(parse_polynomial(&text, N).unwrap(), p.clone());
        prop_assert_eq!(parse_polynomial(&p.to_string(), N).unwrap(), p);
    }

    #[test]
    fn compose_matches_evaluation(p in poly(), s in prop::collection::vec(poly(), N), x in prop::collection::vec(rational(), N)) {
        let composed = p.compose(&s).unwrap();
        let inner: Vec<Rational> = s.iter().map(|si| si.eval_rational(&x).unwrap()).collect();
        prop_assert_eq!(composed.eval_rational(&x).unwrap(), p.eval_rational(&inner).unwrap());
    }
}
