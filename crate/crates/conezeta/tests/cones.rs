use conezeta::cones::*;
use conezeta::exactlin::{ints, rat, rat2, RatVec};
use proptest::prelude::*;

fn closed(dim: usize, gens: &[Vec<i64>]) -> Cone {
    Cone::closed(dim, gens).expect("valid cone")
}

fn open(dim: usize, gens: &[Vec<i64>]) -> Cone {
    Cone::open_cone(dim, gens).expect("valid cone")
}

fn v(xs: &[i64]) -> RatVec {
    RatVec(xs.iter().map(|&x| rat(x)).collect())
}

#[test]
fn construction_normalizes() {
    let c = closed(2, &[vec![2, 0], vec![0, 3], vec![2, 0]]);
    assert_eq!(c.generators(), &[ints(&[0, 1]), ints(&[1, 0])]);
    assert!(Cone::closed(2, &[vec![0, 0]]).is_err());
    assert!(Cone::closed(2, &[vec![1, 2, 3]]).is_err());
    let z = Cone::zero(2, false);
    assert!(z.is_zero_cone());
    assert_eq!(z.dimension(), 0);
}

#[test]
fn dimension_examples() {
    assert_eq!(closed(2, &[vec![1, 0], vec![0, 1]]).dimension(), 2);
    assert_eq!(closed(2, &[vec![1, 1]]).dimension(), 1);
}

#[test]
fn smoothness_examples() {
    assert!(closed(2, &[vec![1, 0], vec![1, 1]]).is_smooth().is_some());
    assert!(closed(2, &[vec![1, 0], vec![1, 2]]).is_smooth().is_none());
    assert!(closed(2, &[vec![1, 1]]).is_smooth().is_some());
    // redundant generator: minimal set is still a basis
    let c = closed(2, &[vec![1, 0], vec![0, 1], vec![1, 1]]);
    assert_eq!(c.minimal_generators().len(), 2);
    assert!(c.is_smooth().is_some());
}

#[test]
fn containment_examples() {
    let quad = closed(2, &[vec![1, 0], vec![0, 1]]);
    assert!(quad.contains_point(&v(&[0, 0])).unwrap());
    assert!(quad.contains_point(&v(&[3, 2])).unwrap());
    assert!(!quad.contains_point(&v(&[-1, 0])).unwrap());

    let oq = open(2, &[vec![1, 0], vec![0, 1]]);
    assert!(!oq.contains_point(&v(&[1, 0])).unwrap());
    assert!(oq.contains_point(&v(&[1, 1])).unwrap());

    let chen = open(2, &[vec![1, 0], vec![1, 1]]);
    assert!(chen.contains_point(&v(&[3, 2])).unwrap());
    assert!(!chen.contains_point(&v(&[2, 2])).unwrap());
    // a ray's relative interior
    let ray = open(2, &[vec![1, 1]]);
    assert!(ray.contains_point(&v(&[2, 2])).unwrap());
    assert!(!ray.contains_point(&v(&[0, 0])).unwrap());
    // the zero cone contains only the origin
    assert!(Cone::zero(2, false).contains_point(&v(&[0, 0])).unwrap());
    assert!(!Cone::zero(2, false).contains_point(&v(&[1, 0])).unwrap());
    // rational points
    assert!(quad
        .contains_point(&RatVec(vec![rat2(1, 2), rat2(1, 3)]))
        .unwrap());
}

#[test]
fn line_detection() {
    let line = closed(2, &[vec![1, 0], vec![-1, 0]]);
    let (l, cp) = line.contains_line().unwrap().expect("has a line");
    assert_eq!(l.len(), 1);
    assert!(cp.is_zero_cone());

    assert!(closed(2, &[vec![1, 0], vec![0, 1]])
        .contains_line()
        .unwrap()
        .is_none());

    let half = closed(2, &[vec![1, 0], vec![-1, 0], vec![0, 1]]);
    let (l, cp) = half.contains_line().unwrap().expect("has a line");
    assert_eq!(l.len(), 1);
    assert_eq!(cp.generators(), &[ints(&[0, 1])]);
}

#[test]
fn quadrant_chain_split_is_a_valid_subdivision() {
    // the quadrant is already simplicial, so simplicialize leaves it alone
    let quad = closed(2, &[vec![1, 0], vec![0, 1]]);
    let sub = quad.simplicialize().unwrap();
    assert_eq!(sub.pieces, vec![quad.clone()]);
    // but the split along the diagonal is also a valid subdivision of it
    let chain = Subdivision {
        parent: quad.clone(),
        pieces: vec![
            closed(2, &[vec![0, 1], vec![1, 1]]),
            closed(2, &[vec![1, 0], vec![1, 1]]),
        ],
        kind: SubdivisionKind::Closed,
    };
    assert!(verify_subdivision(&chain, 12).unwrap());
}

#[test]
fn simplicialize_simplicial_is_identity() {
    let c = closed(2, &[vec![1, 0], vec![1, 2]]);
    let sub = c.simplicialize().unwrap();
    assert_eq!(sub.pieces, vec![c]);
}

#[test]
fn simplicialize_redundant_generator() {
    let c = closed(2, &[vec![1, 0], vec![0, 1], vec![1, 1]]);
    let sub = c.simplicialize().unwrap();
    assert!(sub.pieces.iter().all(|p| p.is_simplicial()));
    assert!(verify_subdivision(&sub, 10).unwrap());
}

#[test]
fn simplicialize_nonsimplicial_3d() {
    // square cone over 4 rays
    let c = closed(
        3,
        &[vec![1, 0, 1], vec![0, 1, 1], vec![-1, 0, 1], vec![0, -1, 1]],
    );
    let sub = c.simplicialize().unwrap();
    assert!(sub.pieces.len() >= 2);
    for p in &sub.pieces {
        assert!(p.is_simplicial());
        assert_eq!(p.dimension(), 3);
    }
    assert!(verify_subdivision(&sub, 6).unwrap());
}

#[test]
fn smooth_subdivide_examples() {
    let c = closed(2, &[vec![1, 0], vec![1, 2]]);
    let sub = c.smooth_subdivide().unwrap();
    let mut pieces = sub.pieces.clone();
    pieces.sort();
    assert_eq!(
        pieces,
        vec![
            closed(2, &[vec![1, 0], vec![1, 1]]),
            closed(2, &[vec![1, 1], vec![1, 2]]),
        ]
    );
    assert!(verify_subdivision(&sub, 12).unwrap());

    let smooth = closed(2, &[vec![1, 0], vec![1, 1]]);
    assert_eq!(smooth.smooth_subdivide().unwrap().pieces, vec![smooth]);

    let c = closed(2, &[vec![0, 1], vec![2, 1]]);
    let mut pieces = c.smooth_subdivide().unwrap().pieces;
    pieces.sort();
    assert_eq!(
        pieces,
        vec![
            closed(2, &[vec![0, 1], vec![1, 1]]),
            closed(2, &[vec![1, 1], vec![2, 1]]),
        ]
    );
}

#[test]
fn smooth_subdivide_rejects_nonsimplicial() {
    let c = closed(
        3,
        &[vec![1, 0, 1], vec![0, 1, 1], vec![-1, 0, 1], vec![0, -1, 1]],
    );
    assert!(c.smooth_subdivide().is_err());
    assert!(c.full_smooth_subdivision().is_ok());
}

#[test]
fn smooth_pieces_are_smooth() {
    let cones = [
        closed(2, &[vec![1, 0], vec![3, 5]]),
        closed(3, &[vec![1, 0, 0], vec![1, 2, 0], vec![1, 1, 3]]),
        closed(2, &[vec![2, 1], vec![1, 3]]),
    ];
    for c in &cones {
        let sub = c.full_smooth_subdivision().unwrap();
        for p in &sub.pieces {
            assert!(p.is_smooth().is_some(), "piece {:?} not smooth", p);
            assert_eq!(p.dimension(), c.dimension());
        }
        assert!(verify_subdivision(&sub, 8).unwrap());
    }
}

#[test]
fn star_subdivide_examples() {
    let c = closed(2, &[vec![1, 0], vec![1, 1]]);
    let pieces = c.star_subdivide(&ints(&[2, 1])).unwrap();
    let mut pieces = pieces;
    pieces.sort();
    assert_eq!(
        pieces,
        vec![
            closed(2, &[vec![1, 0], vec![2, 1]]),
            closed(2, &[vec![1, 1], vec![2, 1]]),
        ]
    );
    // outside point rejected
    assert!(c.star_subdivide(&ints(&[-1, 0])).is_err());
}

#[test]
fn open_subdivision_examples() {
    let oq = open(2, &[vec![1, 0], vec![0, 1]]);
    let closed_sub = Subdivision {
        parent: oq.closure(),
        pieces: vec![
            closed(2, &[vec![0, 1], vec![1, 1]]),
            closed(2, &[vec![1, 0], vec![1, 1]]),
        ],
        kind: SubdivisionKind::Closed,
    };
    let sub = open_subdivision(&oq, &closed_sub).unwrap();
    let mut pieces = sub.pieces.clone();
    pieces.sort();
    assert_eq!(
        pieces,
        vec![
            open(2, &[vec![0, 1], vec![1, 1]]),
            open(2, &[vec![1, 0], vec![1, 1]]),
            open(2, &[vec![1, 1]]),
        ]
    );
    assert!(verify_subdivision(&sub, 15).unwrap());

    // trivial subdivision gives the cone back
    let trivial = Subdivision {
        parent: oq.closure(),
        pieces: vec![oq.closure()],
        kind: SubdivisionKind::Closed,
    };
    let sub = open_subdivision(&oq, &trivial).unwrap();
    assert_eq!(sub.pieces, vec![oq.clone()]);

    // chain cone split at an interior ray
    let chen = open(2, &[vec![1, 0], vec![1, 1]]);
    let star = Subdivision {
        parent: chen.closure(),
        pieces: chen.closure().star_subdivide(&ints(&[2, 1])).unwrap(),
        kind: SubdivisionKind::Closed,
    };
    let sub = open_subdivision(&chen, &star).unwrap();
    let mut pieces = sub.pieces.clone();
    pieces.sort();
    assert_eq!(
        pieces,
        vec![
            open(2, &[vec![1, 0], vec![2, 1]]),
            open(2, &[vec![1, 1], vec![2, 1]]),
            open(2, &[vec![2, 1]]),
        ]
    );
    assert!(verify_subdivision(&sub, 15).unwrap());
}

#[test]
fn verify_subdivision_catches_missing_pieces() {
    let oq = open(2, &[vec![1, 0], vec![0, 1]]);
    let closed_sub = oq.closure().simplicialize().unwrap();
    let mut sub = open_subdivision(&oq, &closed_sub).unwrap();
    sub.pieces.pop();
    assert!(!verify_subdivision(&sub, 10).unwrap());
}

#[test]
fn common_refinement_examples() {
    let a = closed(2, &[vec![1, 0], vec![0, 1]]);
    let b = closed(2, &[vec![1, 0], vec![1, 1]]);
    let refs = common_refinement(&[a.clone(), b.clone()]).unwrap();
    let mut first = refs[0].pieces.clone();
    first.sort();
    assert_eq!(
        first,
        vec![
            closed(2, &[vec![0, 1], vec![1, 1]]),
            closed(2, &[vec![1, 0], vec![1, 1]]),
        ]
    );
    assert_eq!(refs[1].pieces, vec![b.clone()]);

    // face-compatible chain cones stay unchanged
    let c = closed(2, &[vec![0, 1], vec![1, 1]]);
    let refs = common_refinement(&[b.clone(), c.clone()]).unwrap();
    assert_eq!(refs[0].pieces, vec![b]);
    assert_eq!(refs[1].pieces, vec![c]);

    // mismatched spans rejected
    assert!(common_refinement(&[a, closed(2, &[vec![1, 0]])]).is_err());
}

#[test]
fn face_cones_of_quadrant() {
    let quad = closed(2, &[vec![1, 0], vec![0, 1]]);
    let faces = quad.face_cones().unwrap();
    // nonzero faces only: the full cone and the two rays
    assert_eq!(faces.len(), 3);
}

#[test]
fn parallelepiped_points_of_index_two_cone() {
    let c = closed(2, &[vec![1, 0], vec![1, 2]]);
    let pts = parallelepiped_points(&c).unwrap();
    assert!(pts.contains(&ints(&[1, 1])), "points: {:?}", pts);
}

#[test]
fn split_by_hyperplane_example() {
    let quad = closed(2, &[vec![1, 0], vec![0, 1]]);
    let (pos, neg) = split_by_hyperplane(&quad, &ints(&[1, -1])).unwrap();
    let mut sides = vec![pos, neg];
    sides.sort();
    assert_eq!(
        sides,
        vec![
            closed(2, &[vec![0, 1], vec![1, 1]]),
            closed(2, &[vec![1, 0], vec![1, 1]]),
        ]
    );
}

#[test]
fn line_cone_subdivision_covers() {
    // upper half plane: contains the x1 axis as a line
    let c = closed(2, &[vec![1, 0], vec![-1, 0], vec![0, 1]]);
    let sub = c.simplicialize().unwrap();
    assert!(verify_subdivision(&sub, 6).unwrap());
    for p in &sub.pieces {
        assert!(p.is_simplicial());
    }
}

#[test]
fn json_round_trip() {
    let c = open(2, &[vec![1, 0], vec![1, 1]]);
    let s = serde_json::to_string(&c).unwrap();
    assert_eq!(
        s,
        r#"{"ambient_dim":2,"open":true,"generators":[[1,0],[1,1]]}"#
    );
    let back: Cone = serde_json::from_str(&s).unwrap();
    assert_eq!(back, c);
    assert!(serde_json::from_str::<Cone>(r#"{"ambient_dim":2,"open":false,"generators":[[0,0]]}"#).is_err());
}

fn random_cone() -> impl Strategy<Value = Cone> {
    (2usize..4, 2usize..5).prop_flat_map(|(dim, n)| {
        proptest::collection::vec(proptest::collection::vec(0i64..4, dim), n).prop_filter_map(
            "needs a nonzero generator set",
            move |gens| {
                let nz: Vec<Vec<i64>> = gens
                    .into_iter()
                    .filter(|g| g.iter().any(|&x| x != 0))
                    .collect();
                if nz.is_empty() {
                    None
                } else {
                    Cone::closed(dim, &nz).ok()
                }
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn simplicialize_is_a_cover(c in random_cone()) {
        let sub = c.simplicialize().unwrap();
        for p in &sub.pieces {
            prop_assert!(p.is_simplicial());
            prop_assert_eq!(p.dimension(), c.dimension());
        }
        prop_assert!(verify_subdivision(&sub, 5).unwrap());
    }
}
