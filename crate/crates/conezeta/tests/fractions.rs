use conezeta::cones::Cone;
use conezeta::exactlin::{ints, rat, rat2, RatVec};
use conezeta::fractions::*;
use proptest::prelude::*;

fn closed(dim: usize, gens: &[Vec<i64>]) -> Cone {
    let g: Vec<Vec<_>> = gens.iter().map(|v| ints(v)).collect();
    Cone::new(dim, false, &g).expect("valid cone")
}

fn form(coeffs: &[i64]) -> LinearForm {
    LinearForm::normalize(&ints(coeffs)).expect("nonzero form").0
}

/// build a sum from (numerator, denominator, poles) triples
fn frac(terms: &[(i64, i64, &[(&[i64], u32)])]) -> FracSum {
    let mut out = FracSum::zero();
    for &(num, den, poles) in terms {
        let mut p = Poles::new();
        for &(coeffs, mult) in poles {
            *p.entry(form(coeffs)).or_insert(0) += mult;
        }
        out.add_term(rat2(num, den), p);
    }
    out
}

#[test]
fn phi_of_smooth_quadrant() {
    let f = phi(&closed(2, &[vec![1, 0], vec![0, 1]])).unwrap();
    assert_eq!(f, frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1)])]));
}

#[test]
fn phi_of_diagonal_ray_carries_its_weight() {
    let f = phi(&closed(2, &[vec![1, 1]])).unwrap();
    assert_eq!(f, frac(&[(2, 1, &[(&[1, 1], 1)])]));
}

#[test]
fn phi_vanishes_on_line_cones() {
    let f = phi(&closed(2, &[vec![1, 0], vec![-1, 0]])).unwrap();
    assert!(f.is_zero());
    let half = phi(&closed(2, &[vec![1, 0], vec![-1, 0], vec![0, 1]])).unwrap();
    assert!(half.is_zero());
}

#[test]
fn phi_of_zero_cone_is_one() {
    let f = phi(&closed(2, &[])).unwrap();
    assert_eq!(f, FracSum::constant(rat(1)));
}

#[test]
fn phi_rejects_open_cones() {
    let g = [ints(&[1, 0])];
    let c = Cone::new(2, true, &g).unwrap();
    assert!(phi(&c).is_err());
}

#[test]
fn purity_detection() {
    let pure = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1)])]);
    assert!(pure.terms().next().unwrap().is_pure());
    let dep = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1), (&[1, 1], 1)])]);
    assert!(!dep.terms().next().unwrap().is_pure());
    let multi = frac(&[(1, 1, &[(&[1, 1], 2), (&[0, 1], 1)])]);
    assert!(multi.terms().next().unwrap().is_pure());
}

#[test]
fn decompose_pure_triangle() {
    let f = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1), (&[1, 1], 1)])]);
    let d = decompose_pure(&f).unwrap();
    assert_eq!(
        d,
        frac(&[
            (1, 1, &[(&[1, 0], 1), (&[1, 1], 2)]),
            (1, 1, &[(&[0, 1], 1), (&[1, 1], 2)]),
        ])
    );
    assert_eq!(evaluate(&d, &RatVec::from_ints(&ints(&[1, 1]))).unwrap(), rat2(1, 2));
}

#[test]
fn decompose_pure_with_multiplicity() {
    let f = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 2), (&[1, 1], 1)])]);
    let d = decompose_pure(&f).unwrap();
    assert_eq!(
        d,
        frac(&[
            (1, 1, &[(&[1, 0], 1), (&[1, 1], 3)]),
            (1, 1, &[(&[0, 1], 1), (&[1, 1], 3)]),
            (1, 1, &[(&[0, 1], 2), (&[1, 1], 2)]),
        ])
    );
    for t in d.terms() {
        assert!(t.is_pure());
    }
}

#[test]
fn decompose_pure_leaves_pure_sums_alone() {
    // no circuits among the forms of the sum, so nothing to rewrite
    let f = frac(&[
        (3, 2, &[(&[1, 0], 2), (&[0, 1], 1)]),
        (-1, 1, &[(&[1, 0], 1)]),
    ]);
    assert_eq!(decompose_pure(&f).unwrap(), f);
}

#[test]
fn positive_decomposition_triangle() {
    let t = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1), (&[1, 1], 1)])])
        .terms()
        .next()
        .unwrap();
    let d = decompose_pure_positive(&t).unwrap();
    assert_eq!(
        d,
        frac(&[
            (1, 1, &[(&[1, 0], 1), (&[1, 1], 2)]),
            (1, 1, &[(&[0, 1], 1), (&[1, 1], 2)]),
        ])
    );
}

#[test]
fn positive_decomposition_keeps_pure_terms() {
    let t = frac(&[(5, 3, &[(&[1, 1], 2), (&[0, 1], 1)])])
        .terms()
        .next()
        .unwrap();
    assert_eq!(decompose_pure_positive(&t).unwrap(), FracSum::from_term(t));
}

#[test]
fn positive_decomposition_dense_triangle() {
    let t = frac(&[(1, 1, &[(&[1, 1], 1), (&[2, 1], 1), (&[1, 2], 1)])])
        .terms()
        .next()
        .unwrap();
    let d = decompose_pure_positive(&t).unwrap();
    assert_eq!(evaluate(&d, &RatVec::from_ints(&ints(&[1, 1]))).unwrap(), rat2(1, 18));
    for term in d.terms() {
        assert!(term.is_pure());
        assert!(term.coeff > rat(0), "coefficient {:?} not positive", term.coeff);
        for f in term.poles.keys() {
            assert!(f.coeffs().iter().all(|c| c >= &num::BigInt::from(0)));
        }
    }
}

#[test]
fn positive_decomposition_rejects_mixed_sign_forms() {
    let t = frac(&[(1, 1, &[(&[1, -1], 1)])]).terms().next().unwrap();
    assert!(decompose_pure_positive(&t).is_err());
}

#[test]
fn derive_examples() {
    let f = frac(&[(1, 1, &[(&[1, 0], 1)])]);
    assert_eq!(derive(&f, 0).unwrap(), frac(&[(1, 1, &[(&[1, 0], 2)])]));

    let f = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1)])]);
    assert_eq!(
        derive(&f, 0).unwrap(),
        frac(&[(1, 1, &[(&[1, 0], 2), (&[0, 1], 1)])])
    );

    let f = frac(&[(1, 1, &[(&[1, 1], 1), (&[0, 1], 1)])]);
    assert_eq!(
        derive(&f, 1).unwrap(),
        frac(&[
            (1, 1, &[(&[1, 1], 2), (&[0, 1], 1)]),
            (1, 1, &[(&[1, 1], 1), (&[0, 1], 2)]),
        ])
    );
    assert!(derive(&f, 5).is_err());
}

#[test]
fn derive_matches_finite_differences() {
    let f = frac(&[(1, 1, &[(&[1, 1], 1), (&[0, 1], 1)])]);
    let d = derive(&f, 1).unwrap();
    let at = |s: &FracSum, x1: f64, x2: f64| -> f64 {
        s.terms()
            .map(|t| {
                let mut v = t.coeff.numer().to_string().parse::<f64>().unwrap()
                    / t.coeff.denom().to_string().parse::<f64>().unwrap();
                for (form, &mult) in &t.poles {
                    let c = form.coeffs();
                    let fx = c[0].to_string().parse::<f64>().unwrap() * x1
                        + c[1].to_string().parse::<f64>().unwrap() * x2;
                    v /= fx.powi(mult as i32);
                }
                v
            })
            .sum()
    };
    let h = 1e-4;
    let fd = -(at(&f, 1.0, 2.0 + h) - at(&f, 1.0, 2.0 - h)) / (2.0 * h);
    let exact = at(&d, 1.0, 2.0);
    assert!((fd - exact).abs() / exact.abs() < 1e-6);
}

#[test]
fn dual_derivation_builds_multiplicities() {
    // (1/2!) * second dual derivative of 1/z1 gives 1/z1^3
    let f = frac(&[(1, 1, &[(&[1, 0], 1)])]);
    let d = derive_dual(&f, &[form(&[1, 0]), form(&[0, 1])], 0, 2).unwrap();
    assert_eq!(d.scale(&rat2(1, 2)), frac(&[(1, 1, &[(&[1, 0], 3)])]));

    // regenerate 1/((z1+z2)^2 z2) from 1/((z1+z2) z2)
    let base = frac(&[(1, 1, &[(&[1, 1], 1), (&[0, 1], 1)])]);
    let forms = [form(&[1, 1]), form(&[0, 1])];
    let d = derive_dual(&base, &forms, 0, 1).unwrap();
    let want = frac(&[(1, 1, &[(&[1, 1], 2), (&[0, 1], 1)])]);
    assert!(equals(&d, &want).unwrap());

    // order zero is the identity
    assert_eq!(derive_dual(&base, &forms, 1, 0).unwrap(), base);

    // dependent families are rejected
    assert!(derive_dual(&base, &[form(&[1, 1]), form(&[2, 2])], 0, 1).is_err());
}

#[test]
fn homogeneous_component_split() {
    let f = frac(&[
        (1, 1, &[(&[1, 0], 1)]),
        (1, 1, &[(&[1, 0], 1), (&[0, 1], 1)]),
    ]);
    let comps = homogeneous_components(&f);
    assert_eq!(comps.len(), 2);
    assert_eq!(comps[&1], frac(&[(1, 1, &[(&[1, 0], 1)])]));
    assert_eq!(comps[&2], frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1)])]));

    let homog = frac(&[(1, 1, &[(&[1, 0], 2)]), (2, 1, &[(&[0, 1], 2)])]);
    assert_eq!(homogeneous_components(&homog).len(), 1);
}

#[test]
fn equality_of_fraction_relations() {
    let lhs = frac(&[
        (1, 1, &[(&[1, 0], 1), (&[1, 1], 1)]),
        (1, 1, &[(&[0, 1], 1), (&[1, 1], 1)]),
    ]);
    let rhs = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1)])]);
    assert!(equals(&lhs, &rhs).unwrap());
    let off = rhs.add(&frac(&[(1, 1, &[(&[1, 0], 2)])]));
    assert!(!equals(&lhs, &off).unwrap());
}

#[test]
fn phi_is_additive_over_the_diagonal_split() {
    let parent = phi(&closed(2, &[vec![1, 0], vec![0, 1]])).unwrap();
    let a = phi(&closed(2, &[vec![1, 0], vec![1, 1]])).unwrap();
    let b = phi(&closed(2, &[vec![0, 1], vec![1, 1]])).unwrap();
    assert!(equals(&parent, &a.add(&b)).unwrap());
}

#[test]
fn evaluate_examples() {
    let f = frac(&[(1, 1, &[(&[1, 0], 1), (&[0, 1], 1)])]);
    assert_eq!(evaluate(&f, &RatVec::from_ints(&ints(&[1, 2]))).unwrap(), rat2(1, 2));
    let rel = frac(&[
        (1, 1, &[(&[1, 0], 1), (&[1, 1], 1)]),
        (1, 1, &[(&[0, 1], 1), (&[1, 1], 1)]),
    ]);
    assert_eq!(evaluate(&rel, &RatVec::from_ints(&ints(&[1, 1]))).unwrap(), rat(1));
    assert!(evaluate(&f, &RatVec::from_ints(&ints(&[0, 1]))).is_err());
}

#[test]
fn json_round_trip() {
    let f = frac(&[
        (-3, 4, &[(&[1, 0], 2), (&[1, 1], 1)]),
        (2, 1, &[(&[0, 1], 1)]),
    ]);
    let s = serde_json::to_string(&f).unwrap();
    let back: FracSum = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f);
    // forms are normalized on the way in
    let scaled: FracSum =
        serde_json::from_str(r#"[{"coeff":"1","poles":[{"form":[2,0],"mult":1}]}]"#).unwrap();
    assert_eq!(scaled, frac(&[(1, 2, &[(&[1, 0], 1)])]));
}

fn simplicial_cone() -> impl Strategy<Value = Cone> {
    (1usize..=3, proptest::collection::vec(proptest::collection::vec(0i64..5, 3), 1..=3)).prop_filter_map(
        "simplicial with nonzero independent generators",
        |(k, gens)| {
            let gens: Vec<Vec<i64>> = gens.into_iter().take(k).collect();
            if gens.iter().any(|g| g.iter().all(|&x| x == 0)) {
                return None;
            }
            let c = Cone::new(3, false, &gens.iter().map(|g| ints(g)).collect::<Vec<_>>()).ok()?;
            if c.generators().len() == gens.len() && c.is_simplicial() {
                Some(c)
            } else {
                None
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn phi_is_additive_under_smooth_subdivision(c in simplicial_cone()) {
        let sub = c.full_smooth_subdivision().unwrap();
        let mut total = FracSum::zero();
        for p in &sub.pieces {
            total = total.add(&phi(p).unwrap());
        }
        prop_assert!(equals(&phi(&c).unwrap(), &total).unwrap());
    }

    #[test]
    fn decompositions_preserve_values(c in simplicial_cone(), d in simplicial_cone()) {
        let f = phi(&c).unwrap().add(&phi(&d).unwrap());
        let dec = decompose_pure(&f).unwrap();
        for t in dec.terms() {
            prop_assert!(t.is_pure());
        }
        let x = RatVec::from_ints(&ints(&[7, 11, 13]));
        prop_assert_eq!(evaluate(&f, &x).unwrap(), evaluate(&dec, &x).unwrap());
    }
}
