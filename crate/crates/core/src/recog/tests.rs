use super::*;
use crate::verify::{closure_enumerate, fingerprint, verify_result, DEFAULT_CAP};

fn bb(flavor: Flavor, p: u32, k: usize, seed: u64) -> BlackBox {
    BlackBox::new(flavor, p, k, seed).unwrap()
}

fn check(r: &ConstructionResult) {
    let v = verify_result(r, DEFAULT_CAP).unwrap();
    assert!(
        v.is_verified(),
        "{} {}^{} -> {}: {v:?}",
        r.flavor,
        r.p,
        r.k,
        r.target
    );
}

#[test]
fn sym4_over_pgl2() {
    for (p, k) in [(3, 2), (13, 1), (5, 2), (3, 3), (7, 2), (11, 1)] {
        for seed in 0..3 {
            let mut b = bb(Flavor::Pgl2, p, k, seed);
            let r = Recognizer::new(&mut b).construct_sym4(p, k).unwrap();
            assert_eq!(r.target, Target::Sym4);
            assert_eq!(r.generators.len(), 2);
            check(&r);
        }
    }
}

#[test]
fn psl2_dichotomy() {
    for (p, k, want) in [
        (5, 1, Target::Alt4),
        (11, 1, Target::Alt4),
        (3, 3, Target::Alt4),
        (7, 1, Target::Sym4),
        (17, 1, Target::Sym4),
        (3, 2, Target::Sym4),
    ] {
        for seed in 0..3 {
            let mut b = bb(Flavor::Psl2, p, k, seed);
            let r = Recognizer::new(&mut b).construct_sym4(p, k).unwrap();
            assert_eq!(r.target, want, "PSL2({p}^{k})");
            check(&r);
        }
    }
}

#[test]
fn sl2_normalizers() {
    for (p, k, want) in [
        (5, 1, Target::Sl2Normalizer24),
        (7, 1, Target::Normalizer48),
        (3, 2, Target::Normalizer48),
        (3, 1, Target::Sl2Normalizer24),
    ] {
        for seed in 0..3 {
            let mut b = bb(Flavor::Sl2, p, k, seed);
            let r = Recognizer::new(&mut b)
                .construct_sl2_normalizer(p, k)
                .unwrap();
            assert_eq!(r.target, want);
            check(&r);
            let g = b.group();
            let v = closure_enumerate(g, &[r.tuple.i.clone(), r.tuple.j.clone()], 100).unwrap();
            let fp = fingerprint(g, &v).unwrap();
            assert_eq!(fp.histogram, [(1, 1), (2, 1), (4, 6)].into_iter().collect());
        }
    }
}

#[test]
fn unsupported_flavors() {
    let mut b = bb(Flavor::Sl2, 5, 1, 0);
    assert_eq!(
        Recognizer::new(&mut b).construct_sym4(5, 1).unwrap_err(),
        RecogError::UnsupportedFlavor(Flavor::Sl2)
    );
    let mut b = bb(Flavor::Pgl2, 5, 1, 0);
    assert_eq!(
        Recognizer::new(&mut b)
            .construct_sl2_normalizer(5, 1)
            .unwrap_err(),
        RecogError::UnsupportedFlavor(Flavor::Pgl2)
    );
    let mut b = bb(Flavor::Pgl2, 3, 4, 0);
    assert_eq!(
        Recognizer::new(&mut b)
            .construct_subfield(3, 4, 3)
            .unwrap_err(),
        RecogError::InvalidSubfieldDegree { a: 3, k: 4 }
    );
}

#[test]
fn subfield_subgroups() {
    let cases = [
        (Flavor::Pgl2, 7, 2, 1, 336u64),
        (Flavor::Pgl2, 3, 4, 2, 720),
        (Flavor::Pgl2, 3, 4, 1, 24),
        (Flavor::Pgl2, 5, 2, 1, 24),
        (Flavor::Psl2, 11, 2, 1, 660),
        (Flavor::Psl2, 7, 2, 1, 24),
        (Flavor::Psl2, 5, 2, 1, 24),
        (Flavor::Sl2, 3, 2, 1, 24),
        (Flavor::Sl2, 5, 2, 1, 24),
        (Flavor::Sl2, 7, 2, 1, 48),
        (Flavor::Sl2, 11, 2, 1, 1320),
    ];
    for (flavor, p, k, a, order) in cases {
        for seed in 0..2 {
            let mut b = bb(flavor, p, k, seed);
            let r = Recognizer::new(&mut b).construct_subfield(p, k, a).unwrap();
            assert_eq!(
                r.target.order(),
                BigUint::from(order),
                "{flavor} {p}^{k} a={a}"
            );
            check(&r);
        }
    }
}

#[test]
fn witness_relations_hold() {
    for (flavor, p, k) in [
        (Flavor::Pgl2, 3, 2),
        (Flavor::Psl2, 13, 1),
        (Flavor::Sl2, 7, 1),
    ] {
        let mut b = bb(flavor, p, k, 11);
        let r = if flavor == Flavor::Sl2 {
            Recognizer::new(&mut b).construct_sl2_normalizer(p, k)
        } else {
            Recognizer::new(&mut b).construct_sym4(p, k)
        }
        .unwrap();
        let g = b.group();
        let (i, j, w) = (&r.tuple.i, &r.tuple.j, &r.witness);
        let k_ = g.mul(i, j);
        assert!(g.eq(&k_, &r.tuple.k));
        assert!(g.eq_mod_center(&g.mul(&w.n1, &w.n1), &w.h1));
        assert!(g.eq_mod_center(&g.mul(&w.n2, &w.n2), &w.h2));
        let conj = |a: &Mat2, x: &Mat2| g.mul(&g.inv(x).unwrap(), &g.mul(a, x));
        assert!(g.eq(&g.mul(i, &conj(j, &w.g)), &w.h1));
        let y = g.mul(&w.g, &g.inv(&w.n1).unwrap());
        assert!(g.eq(&g.mul(j, &conj(&k_, &y)), &w.h2));
        assert!(g.eq(&g.mul(&y, &g.inv(&w.n2).unwrap()), &w.x));
        let x = &w.x;
        assert!(g.is_central(&g.mul(x, &g.mul(x, x))));
        assert!(!g.is_central(x));
        assert!(g.eq_mod_center(&conj(&k_, x), j));
        assert!(g.eq_mod_center(&conj(j, x), i));
        assert!(g.eq_mod_center(&conj(i, x), &k_));
    }
}

#[test]
fn order3_generates_alt4_with_i() {
    for (p, k) in [(3, 2), (7, 1), (13, 1)] {
        let mut b = bb(Flavor::Pgl2, p, k, 5);
        let r = Recognizer::new(&mut b).construct_sym4(p, k).unwrap();
        let g = b.group();
        let n = closure_enumerate(g, &[r.tuple.i.clone(), r.tuple.x.clone()], 1000)
            .unwrap()
            .len();
        assert_eq!(n, 12);
    }
}

#[test]
fn right_type_examples() {
    let q = |p: u32, k: u32| num_traits::Pow::pow(BigUint::from(p), k);
    let mut b = bb(Flavor::Pgl2, 3, 2, 1);
    let inv = Recognizer::new(&mut b)
        .right_type_involution(&q(3, 2))
        .unwrap();
    assert_eq!(
        (inv.tag, inv.torus_order.clone()),
        (TypeTag::Plus, BigUint::from(8u32))
    );
    let mut b = bb(Flavor::Pgl2, 11, 1, 1);
    let inv = Recognizer::new(&mut b)
        .right_type_involution(&q(11, 1))
        .unwrap();
    assert_eq!(
        (inv.tag, inv.torus_order.clone()),
        (TypeTag::Minus, BigUint::from(12u32))
    );
    let mut b = bb(Flavor::Psl2, 13, 1, 1);
    let inv = Recognizer::new(&mut b)
        .right_type_involution(&q(13, 1))
        .unwrap();
    assert_eq!(
        (inv.tag, inv.torus_order.clone()),
        (TypeTag::Unique, BigUint::from(6u32))
    );
}

#[test]
fn field_size_examples() {
    for (p, k) in [(3, 2), (5, 1), (3, 3), (7, 2)] {
        let mut b = bb(Flavor::Pgl2, p, k, 4);
        let m = default_sample_budget(p, 8);
        assert_eq!(Recognizer::new(&mut b).find_field_size(p, 8, m), Ok(k));
    }
    let mut b = bb(Flavor::Pgl2, 3, 3, 4);
    assert_eq!(
        Recognizer::new(&mut b).find_field_size(3, 2, 1000),
        Err(RecogError::ExceedsKMax(2))
    );
    assert!(matches!(
        Recognizer::new(&mut b).find_field_size(3, 2, 1),
        Err(RecogError::SampleBudgetTooSmall { .. })
    ));
}

#[test]
fn same_seed_same_result() {
    let run = |seed| {
        let mut b = bb(Flavor::Pgl2, 5, 2, seed);
        Recognizer::new(&mut b).construct_sym4(5, 2).unwrap()
    };
    assert_eq!(run(9), run(9));
    assert_ne!(run(9).generators, run(10).generators);
}

#[test]
fn result_json_round_trip() {
    let mut b = bb(Flavor::Psl2, 7, 2, 2);
    let r = Recognizer::new(&mut b).construct_subfield(7, 2, 1).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["target"], "Sym4");
    assert!(v["torus_order"].is_string());
    let back: ConstructionResult = serde_json::from_str(&s).unwrap();
    assert_eq!(back, r);
}

#[test]
fn dihedral_trick_over_all_involution_pairs() {
    for (p, k) in [(5, 1), (3, 2)] {
        let mut b = bb(Flavor::Pgl2, p, k, 0);
        let g = b.group().clone();
        let gens = b.generators().to_vec();
        let elems = closure_enumerate(&g, &gens, DEFAULT_CAP).unwrap();
        let invs: Vec<_> = elems
            .iter()
            .filter(|x| !g.is_identity(x) && g.is_identity(&g.mul(x, x)))
            .cloned()
            .collect();
        let mut pairs = 0;
        for u in &invs {
            for v in &invs {
                let h = b.mul(u, v);
                if let Some(n) = b.odd_order_sqrt(&h) {
                    let un = b.conj(u, &n);
                    assert!(b.eq(&un, v));
                    pairs += 1;
                }
            }
        }
        assert!(pairs > invs.len());
    }
}
