//! The cube complexes against free resolutions on seeded presentations.

use fi_lab::exactlin::PrimeField;
use fi_lab::koszul::{derived_delta_dim, fi_homology_dim};
use fi_lab::oracles::random_presentation;
use fi_lab::resolution::free_resolution;

const TOP: usize = 6;

fn shapes() -> Vec<(Vec<usize>, Vec<usize>, u64)> {
    vec![
        (vec![0], vec![2], 1),
        (vec![1], vec![2], 2),
        (vec![0, 1], vec![2, 3], 3),
        (vec![1], vec![3], 4),
        (vec![0, 1], vec![1], 5),
        (vec![2], vec![3], 6),
    ]
}

#[test]
fn fi_homology_agrees() {
    for p in [101, 10007] {
        let field = PrimeField::new(p).unwrap();
        for (gens, rels, seed) in shapes() {
            let v = random_presentation(field, &gens, &rels, 0.6, seed, TOP).unwrap().module;
            let r = free_resolution(&v, 3).unwrap();
            for i in 0..=2 {
                for a in 0..=TOP {
                    assert_eq!(
                        r.homology_dim(i, a),
                        fi_homology_dim(&v, i, a).unwrap(),
                        "p={p} gens={gens:?} rels={rels:?} i={i} a={a}"
                    );
                }
            }
        }
    }
}

#[test]
fn derived_delta_agrees() {
    let field = PrimeField::default();
    for (gens, rels, seed) in shapes().into_iter().take(4) {
        let v = random_presentation(field, &gens, &rels, 0.6, seed, TOP).unwrap().module;
        let r = free_resolution(&v, 3).unwrap();
        for i in 1..=2 {
            for a in 1..=3 {
                let top = TOP - a;
                let via_res = r.derived_delta_dims(i, a, top).unwrap();
                let via_cube: Vec<usize> = (0..=top).map(|n| derived_delta_dim(&v, i, a, n).unwrap()).collect();
                assert_eq!(via_res, via_cube, "gens={gens:?} rels={rels:?} i={i} a={a}");
            }
        }
    }
}
