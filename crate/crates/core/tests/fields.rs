use hypoheat::fields::{
    check_h1, hormander_rank_at_zero, lie_closure, lie_closure_with_cap, PolyVectorField,
};
use hypoheat::io::{engel, grushin, FieldSystem};
use hypoheat::polyalg::{qi, DilationWeights, Rational, WeightedPolynomial};
use hypoheat::Error;
use proptest::prelude::*;

fn field(weights: &[&str], comps: &[&str]) -> PolyVectorField {
    FieldSystem::from_strings(weights, &[comps]).unwrap().fields.remove(0)
}

#[test]
fn bracket_examples() {
    let w = ["1", "2"];
    let d1 = field(&w, &["1", "0"]);
    let d2 = field(&w, &["0", "1"]);
    let x1d2 = field(&w, &["0", "x1"]);
    assert_eq!(d1.bracket(&x1d2).unwrap(), d2);
    assert!(d1.bracket(&d2).unwrap().is_zero());
    assert!(x1d2.bracket(&d2).unwrap().is_zero());
}

#[test]
fn h1_examples() {
    let g = grushin();
    assert!(check_h1(&g.fields, &g.weights).unwrap().ok);

    let flat = FieldSystem::from_strings(&["1", "1"], &[&["1", "0"], &["0", "x1"]]).unwrap();
    let r = check_h1(&flat.fields, &flat.weights).unwrap();
    assert!(!r.ok);
    assert_eq!(r.violations.len(), 1);
    assert_eq!((r.violations[0].field, r.violations[0].component), (1, 1));

    let dup = FieldSystem::from_strings(&["1", "2"], &[&["1", "0"], &["1", "0"]]).unwrap();
    let r = check_h1(&dup.fields, &dup.weights).unwrap();
    assert!(!r.ok);
    assert_eq!(r.dependent, vec![1]);
}

#[test]
fn rank_examples() {
    let g = grushin();
    let r = hormander_rank_at_zero(&g.fields).unwrap();
    assert!(r.passes);
    assert_eq!(r.rank, 2);
    assert_eq!(r.witness_labels(), vec!["X1", "[X1,X2]"]);

    let single = FieldSystem::from_strings(&["1", "1"], &[&["1", "0"]]).unwrap();
    let r = hormander_rank_at_zero(&single.fields).unwrap();
    assert_eq!(r.rank, 1);
    assert!(!r.passes);

    let e = engel();
    let r = hormander_rank_at_zero(&e.fields).unwrap();
    assert!(r.passes);
    assert_eq!(r.rank, 3);
    assert_eq!(r.witness_labels(), vec!["X1", "[X1,X2]", "[X1,[X1,X2]]"]);
}

#[test]
fn closure_examples() {
    let g = grushin();
    let b = lie_closure(&g.fields).unwrap();
    assert_eq!(b.dim(), 3);
    assert_eq!(b.degrees(), &[1, 1, 2]);
    assert_eq!(b.element(2), &field(&["1", "2"], &["0", "1"]));
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let expect = match (i, j, k) {
                    (0, 1, 2) => qi(1),
                    (1, 0, 2) => qi(-1),
                    _ => qi(0),
                };
                assert_eq!(b.c(i, j, k), &expect, "c_{i}{j}^{k}");
            }
        }
    }
    assert!(b.check_structure().all());

    let ab = FieldSystem::from_strings(&["1", "1"], &[&["1", "0"], &["0", "1"]]).unwrap();
    let b = lie_closure(&ab.fields).unwrap();
    assert_eq!(b.dim(), 2);
    assert!(b.is_abelian());

    let b = lie_closure(&engel().fields).unwrap();
    assert_eq!(b.dim(), 4);
    assert_eq!(b.degrees(), &[1, 1, 2, 3]);
    assert_eq!(b.step(), 3);
    assert!(b.check_structure().all());
}

#[test]
fn closure_cap_is_enforced() {
    let e = engel();
    match lie_closure_with_cap(&e.fields, 3) {
        Err(Error::ClosureCap { cap: 3 }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn closure_dimension_at_least_n() {
    for sys in [grushin(), engel()] {
        let b = lie_closure(&sys.fields).unwrap();
        assert!(b.dim() >= sys.n());
    }
}

fn small_poly(n: usize, max_exp: u32) -> impl Strategy<Value = WeightedPolynomial> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_exp, n), -4i64..=4),
        0..4,
    )
    .prop_map(move |terms| {
        terms.into_iter().fold(WeightedPolynomial::zero(n), |acc, (e, c)| {
            &acc + &WeightedPolynomial::monomial(e, qi(c))
        })
    })
}

/// Keeps only the monomials of `p` whose weighted degree equals `d`.
fn project(p: &WeightedPolynomial, w: &DilationWeights, d: &Rational) -> WeightedPolynomial {
    let n = p.num_vars();
    p.terms()
        .filter(|(e, _)| &w.monomial_degree(e) == d)
        .fold(WeightedPolynomial::zero(n), |acc, (e, c)| {
            &acc + &WeightedPolynomial::monomial(e.clone(), c.clone())
        })
}

fn homogeneous_field(w: DilationWeights, deg: i64) -> impl Strategy<Value = PolyVectorField> {
    let n = w.len();
    prop::collection::vec(small_poly(n, 3), n).prop_map(move |comps| {
        let comps = comps
            .iter()
            .enumerate()
            .map(|(i, c)| project(c, &w, &(w.get(i) - qi(deg))))
            .collect();
        PolyVectorField::new(comps, w.clone()).unwrap()
    })
}

fn w123() -> DilationWeights {
    DilationWeights::new(vec![qi(1), qi(2), qi(3)]).unwrap()
}

proptest! {
    #[test]
    fn bracket_adds_degrees(
        x in homogeneous_field(w123(), 1),
        y in homogeneous_field(w123(), 2),
    ) {
        let b = x.bracket(&y).unwrap();
        prop_assert!(b.is_homogeneous_of_degree(&qi(3)).unwrap());
    }

    #[test]
    fn bracket_is_antisymmetric(
        x in homogeneous_field(w123(), 1),
        y in homogeneous_field(w123(), 1),
    ) {
        let a = x.bracket(&y).unwrap();
        let b = y.bracket(&x).unwrap();
        prop_assert!(a.add(&b).unwrap().is_zero());
    }

    #[test]
    fn rank_invariant_under_recombination(a in 1i64..5, b in -3i64..4, c in -3i64..4, d in 1i64..5) {
        prop_assume!(a * d - b * c != 0);
        let e = engel();
        let (x1, x2) = (&e.fields[0], &e.fields[1]);
        let y1 = x1.scale(&qi(a)).add(&x2.scale(&qi(b))).unwrap();
        let y2 = x1.scale(&qi(c)).add(&x2.scale(&qi(d))).unwrap();
        let base = hormander_rank_at_zero(&e.fields).unwrap().rank;
        prop_assert_eq!(hormander_rank_at_zero(&[y1, y2]).unwrap().rank, base);
    }
}
