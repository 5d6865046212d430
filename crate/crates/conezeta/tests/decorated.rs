use conezeta::cones::{Cone, Subdivision, SubdivisionKind};
use conezeta::decorated::{algebraic_subdivide, conical_derive, conical_derive_dual, phi_dm, reconstruct_from_duals, DecoratedClosedCone, DecoratedSum};
use conezeta::exactlin::{ints, rat, rat2};
use conezeta::fractions::{derive, equals, phi};
use proptest::prelude::*;

fn dec(items: &[(Vec<i64>, u32)]) -> DecoratedClosedCone {
    let dim = items[0].0.len();
    DecoratedClosedCone::from_i64(dim, items).expect("valid decorated cone")
}

fn sum(terms: &[(i64, &DecoratedClosedCone)]) -> DecoratedSum {
    let mut out = DecoratedSum::zero();
    for &(c, d) in terms {
        out.add_term(rat(c), d.clone());
    }
    out
}

fn closed(dim: usize, gens: &[Vec<i64>]) -> Cone {
    let g: Vec<Vec<_>> = gens.iter().map(|v| ints(v)).collect();
    Cone::new(dim, false, &g).expect("valid cone")
}

fn split(parent: &Cone, pieces: &[Cone]) -> Subdivision {
    Subdivision {
        parent: parent.clone(),
        pieces: pieces.to_vec(),
        kind: SubdivisionKind::Closed,
    }
}

#[test]
fn construction_normalizes_and_validates() {
    let a = dec(&[(vec![0, 1], 1), (vec![1, 0], 2)]);
    let b = dec(&[(vec![1, 0], 2), (vec![0, 1], 1)]);
    assert_eq!(a, b);
    assert_eq!(a.weight(), 3);
    // zero exponents are rejected
    assert!(DecoratedClosedCone::from_i64(2, &[(vec![1, 0], 0)]).is_err());
    // index-2 cone is not smooth
    assert!(DecoratedClosedCone::from_i64(2, &[(vec![1, 0], 1), (vec![1, 2], 1)]).is_err());
    assert_eq!(DecoratedClosedCone::empty(2).weight(), 0);
}

#[test]
fn derive_in_coordinate_direction() {
    let d = dec(&[(vec![1, 0], 1), (vec![0, 1], 1)]);
    let got = conical_derive(&DecoratedSum::from_cone(d), 0).unwrap();
    assert_eq!(got, sum(&[(1, &dec(&[(vec![1, 0], 2), (vec![0, 1], 1)]))]));

    // derivation of a subdivision sum stays a single object
    let s = sum(&[
        (1, &dec(&[(vec![1, 0], 1), (vec![1, 1], 1)])),
        (1, &dec(&[(vec![0, 1], 1), (vec![1, 1], 1)])),
    ]);
    let got = conical_derive(&s, 0).unwrap();
    assert_eq!(
        got,
        sum(&[
            (1, &dec(&[(vec![1, 0], 2), (vec![1, 1], 1)])),
            (1, &dec(&[(vec![1, 0], 1), (vec![1, 1], 2)])),
            (1, &dec(&[(vec![0, 1], 1), (vec![1, 1], 2)])),
        ])
    );

    // pairing zero kills the term
    let ray = dec(&[(vec![1, 0], 1)]);
    assert!(conical_derive(&DecoratedSum::from_cone(ray), 1)
        .unwrap()
        .is_zero());
}

#[test]
fn dual_derivation_examples() {
    let d = dec(&[(vec![1, 1], 1), (vec![0, 1], 1)]);
    let basis = [ints(&[1, 1]), ints(&[0, 1])];
    let got = conical_derive_dual(&DecoratedSum::from_cone(d.clone()), &basis, 0, 1).unwrap();
    assert_eq!(got, sum(&[(1, &dec(&[(vec![1, 1], 2), (vec![0, 1], 1)]))]));

    // order zero is the identity
    let id = conical_derive_dual(&DecoratedSum::from_cone(d.clone()), &basis, 1, 0).unwrap();
    assert_eq!(id, DecoratedSum::from_cone(d));

    // (1/2!) delta^2 of a single ray doubles up the exponent twice
    let ray = dec(&[(vec![1, 0], 1)]);
    let got = conical_derive_dual(
        &DecoratedSum::from_cone(ray),
        &[ints(&[1, 0])],
        0,
        2,
    )
    .unwrap()
    .scale(&rat2(1, 2));
    assert_eq!(got, sum(&[(1, &dec(&[(vec![1, 0], 3)]))]));

    // dependent generator families are rejected
    let bad = [ints(&[1, 1]), ints(&[2, 2])];
    let s = DecoratedSum::from_cone(dec(&[(vec![1, 0], 1)]));
    assert!(conical_derive_dual(&s, &bad, 0, 1).is_err());
}

#[test]
fn algebraic_subdivision_of_weighted_quadrant() {
    let d = dec(&[(vec![1, 0], 2), (vec![0, 1], 1)]);
    let geo = split(
        &d.underlying_cone(),
        &[
            closed(2, &[vec![1, 0], vec![1, 1]]),
            closed(2, &[vec![0, 1], vec![1, 1]]),
        ],
    );
    let got = algebraic_subdivide(&d, &geo).unwrap();
    assert_eq!(
        got,
        sum(&[
            (1, &dec(&[(vec![1, 0], 2), (vec![1, 1], 1)])),
            (1, &dec(&[(vec![1, 0], 1), (vec![1, 1], 2)])),
            (1, &dec(&[(vec![0, 1], 1), (vec![1, 1], 2)])),
        ])
    );
}

#[test]
fn algebraic_subdivision_with_unit_exponents_is_the_plain_sum() {
    let d = dec(&[(vec![1, 0], 1), (vec![0, 1], 1)]);
    let pieces = [
        closed(2, &[vec![1, 0], vec![1, 1]]),
        closed(2, &[vec![0, 1], vec![1, 1]]),
    ];
    let geo = split(&d.underlying_cone(), &pieces);
    let got = algebraic_subdivide(&d, &geo).unwrap();
    assert_eq!(
        got,
        sum(&[
            (1, &dec(&[(vec![1, 0], 1), (vec![1, 1], 1)])),
            (1, &dec(&[(vec![0, 1], 1), (vec![1, 1], 1)])),
        ])
    );
}

#[test]
fn algebraic_subdivision_of_chain_cone() {
    let d = dec(&[(vec![1, 1], 2), (vec![0, 1], 2)]);
    let geo = split(
        &d.underlying_cone(),
        &[
            closed(2, &[vec![1, 1], vec![1, 2]]),
            closed(2, &[vec![0, 1], vec![1, 2]]),
        ],
    );
    let got = algebraic_subdivide(&d, &geo).unwrap();
    assert_eq!(
        got,
        sum(&[
            (1, &dec(&[(vec![1, 1], 2), (vec![1, 2], 2)])),
            (2, &dec(&[(vec![1, 1], 1), (vec![1, 2], 3)])),
            (1, &dec(&[(vec![0, 1], 2), (vec![1, 2], 2)])),
            (2, &dec(&[(vec![0, 1], 1), (vec![1, 2], 3)])),
        ])
    );
}

#[test]
fn algebraic_subdivision_rejects_mismatched_parents() {
    let d = dec(&[(vec![1, 0], 2), (vec![0, 1], 1)]);
    let other = closed(2, &[vec![1, 0], vec![1, 1]]);
    let geo = split(&other, &[other.clone()]);
    assert!(algebraic_subdivide(&d, &geo).is_err());
}

#[test]
fn fraction_image_examples() {
    let f = phi_dm(&DecoratedSum::from_cone(dec(&[
        (vec![1, 0], 2),
        (vec![0, 1], 1),
    ])))
    .unwrap();
    let expect = derive(&phi(&closed(2, &[vec![1, 0], vec![0, 1]])).unwrap(), 0).unwrap();
    assert_eq!(f, expect);

    // exponent 1 matches phi of the ray, weight 2 included
    let f = phi_dm(&DecoratedSum::from_cone(dec(&[(vec![1, 1], 1)]))).unwrap();
    assert_eq!(f, phi(&closed(2, &[vec![1, 1]])).unwrap());
}

#[test]
fn subdivision_images_agree_as_fractions() {
    let d = dec(&[(vec![1, 0], 2), (vec![0, 1], 1)]);
    let geo = split(
        &d.underlying_cone(),
        &[
            closed(2, &[vec![1, 0], vec![1, 1]]),
            closed(2, &[vec![0, 1], vec![1, 1]]),
        ],
    );
    let s = algebraic_subdivide(&d, &geo).unwrap();
    let lhs = phi_dm(&DecoratedSum::from_cone(d)).unwrap();
    let rhs = phi_dm(&s).unwrap();
    assert!(equals(&lhs, &rhs).unwrap());
}

#[test]
fn weak_leibniz_on_factored_cones() {
    let v1 = dec(&[(vec![1, 0], 1), (vec![0, 1], 1)]);
    let v2 = dec(&[(vec![1, 0], 2), (vec![0, 1], 1)]);
    let product = DecoratedSum::from_cone(v1.multiply(&v2).unwrap());
    for i in 0..2 {
        let lhs = conical_derive(&product, i).unwrap();
        let rhs = conical_derive(&DecoratedSum::from_cone(v1.clone()), i)
            .unwrap()
            .multiply_cone(&v2)
            .unwrap()
            .add(
                &conical_derive(&DecoratedSum::from_cone(v2.clone()), i)
                    .unwrap()
                    .multiply_cone(&v1)
                    .unwrap(),
            );
        assert_eq!(lhs, rhs);
    }
    // products that break smoothness are rejected
    let skew = dec(&[(vec![1, 2], 1)]);
    assert!(v1.multiply(&skew).is_err());
}

#[test]
fn reconstruction_from_duals() {
    for items in [
        vec![(vec![1, 0], 2), (vec![0, 1], 3)],
        vec![(vec![1, 1], 3), (vec![0, 1], 2)],
        vec![(vec![1, 0, 0], 2), (vec![1, 1, 0], 2), (vec![1, 1, 1], 2)],
    ] {
        let d = dec(&items);
        let got = reconstruct_from_duals(&d).unwrap();
        assert_eq!(got, DecoratedSum::from_cone(d));
    }
}

#[test]
fn json_round_trip() {
    let d = dec(&[(vec![1, 1], 2), (vec![0, 1], 1)]);
    let s = serde_json::to_string(&d).unwrap();
    let back: DecoratedClosedCone = serde_json::from_str(&s).unwrap();
    assert_eq!(back, d);
    assert!(serde_json::from_str::<DecoratedClosedCone>(
        r#"{"generators":[[1,0]],"exponents":[0]}"#
    )
    .is_err());
}

fn decorated_cone() -> impl Strategy<Value = DecoratedClosedCone> {
    (
        proptest::collection::vec((0usize..3, 0usize..3, -1i64..2), 0..4),
        proptest::collection::vec(1u32..4, 3),
        1usize..=3,
    )
        .prop_map(|(ops, exps, k)| {
            // shear a smooth basis out of the identity, keep the first k rows
            let mut b = vec![vec![0i64; 3]; 3];
            for (i, row) in b.iter_mut().enumerate() {
                row[i] = 1;
            }
            for (i, j, c) in ops {
                if i != j {
                    for t in 0..3 {
                        b[i][t] += c * b[j][t];
                    }
                }
            }
            let items: Vec<(Vec<i64>, u32)> = b
                .into_iter()
                .zip(exps)
                .take(k)
                .collect();
            dec(&items)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn derivations_commute_with_the_fraction_map(d in decorated_cone(), i in 0usize..3) {
        let s = DecoratedSum::from_cone(d);
        let lhs = phi_dm(&conical_derive(&s, i).unwrap()).unwrap();
        let rhs = derive(&phi_dm(&s).unwrap(), i).unwrap();
        prop_assert!(equals(&lhs, &rhs).unwrap());
    }

    #[test]
    fn reconstruction_is_exact(d in decorated_cone()) {
        prop_assert_eq!(reconstruct_from_duals(&d).unwrap(), DecoratedSum::from_cone(d));
    }
}
