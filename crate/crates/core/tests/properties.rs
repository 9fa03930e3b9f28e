use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tricover::elm::oracle::blowup_oracle_check;
use tricover::elm::{apply_inverse, ElmState};
use tricover::picard::{h0_line_bundle, EquivalenceLedger, FormalDivisor, H0};
use tricover::ruled::{arithmetic_genus, canonical_class, intersect, RuledSurfaceModel, SurfaceClass};
use tricover::suites::{random_state, random_valid_step};

const SYMS: [&str; 4] = ["p", "q", "r", "s"];

fn divisor() -> impl Strategy<Value = FormalDivisor> {
    prop::collection::vec(-3i64..=3, 4).prop_map(|cs| FormalDivisor::from_terms(SYMS.iter().copied().zip(cs)))
}

fn ledger() -> impl Strategy<Value = EquivalenceLedger> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, 4), 0..3).prop_map(|rels| {
        let mut l = EquivalenceLedger::new();
        for s in SYMS {
            l.declare(s, 1).unwrap();
        }
        for cs in rels {
            // keep each relation of degree 0
            let t: i64 = cs[..3].iter().sum();
            let mut r = FormalDivisor::from_terms(SYMS[..3].iter().copied().zip(cs[..3].iter().copied()));
            r.add_term("s", -t);
            l.add_relation(r).unwrap();
        }
        l
    })
}

fn model() -> impl Strategy<Value = RuledSurfaceModel> {
    (0i64..=4, -4i64..=6, 0i64..=10).prop_map(|(g_y, e, k)| {
        let b = e.abs() + 2 * k;
        RuledSurfaceModel::raw(g_y, b, (b + e) / 2).unwrap()
    })
}

fn class() -> impl Strategy<Value = SurfaceClass> {
    (-3i64..=5, -10i64..=10).prop_map(|(a, z)| SurfaceClass::new(a, z))
}

fn add(c1: &SurfaceClass, c2: &SurfaceClass) -> SurfaceClass {
    SurfaceClass::new(c1.sigma + c2.sigma, c1.fib_deg + c2.fib_deg)
}

fn h0(g: i64, d: i64) -> i64 {
    match h0_line_bundle(g, d, true) {
        H0::Exact { value } => value,
        r => panic!("expected an exact value for g = {g}, d = {d}: {r:?}"),
    }
}

proptest! {
    #[test]
    fn equivalence_is_an_equivalence(l in ledger(), a in divisor(), b in divisor(), c in divisor()) {
        prop_assert!(l.equivalent(&a, &a).unwrap());
        prop_assert_eq!(l.equivalent(&a, &b).unwrap(), l.equivalent(&b, &a).unwrap());
        if l.equivalent(&a, &b).unwrap() && l.equivalent(&b, &c).unwrap() {
            prop_assert!(l.equivalent(&a, &c).unwrap());
        }
        if l.equivalent(&a, &b).unwrap() {
            prop_assert_eq!(l.degree(&a).unwrap(), l.degree(&b).unwrap());
            prop_assert!(l.equivalent(&(&a + &c), &(&b + &c)).unwrap());
        }
    }

    #[test]
    fn relations_are_equivalent_to_zero(l in ledger(), a in divisor()) {
        for r in l.relations() {
            prop_assert!(l.equivalent(&(&a + r), &a).unwrap());
        }
    }

    #[test]
    fn intersection_is_bilinear(m in model(), x in class(), y in class(), z in class(), k in -3i64..=3) {
        prop_assert_eq!(intersect(&add(&x, &y), &z, &m), intersect(&x, &z, &m) + intersect(&y, &z, &m));
        prop_assert_eq!(intersect(&x, &y, &m), intersect(&y, &x, &m));
        let kx = SurfaceClass::new(k * x.sigma, k * x.fib_deg);
        prop_assert_eq!(intersect(&kx, &y, &m), k * intersect(&x, &y, &m));
    }

    #[test]
    fn genus_is_integral_and_adjunction_holds(m in model(), x in class()) {
        let k = canonical_class(&m);
        let s = intersect(&x, &x, &m) + intersect(&x, &k, &m);
        prop_assert_eq!(s.rem_euclid(2), 0);
        if x.sigma >= 0 {
            prop_assert_eq!(arithmetic_genus(&x, &m).unwrap(), 1 + s / 2);
        } else {
            prop_assert!(arithmetic_genus(&x, &m).is_err());
        }
        prop_assert_eq!(intersect(&k, &k, &m), 8 * (1 - m.g_y));
    }

    #[test]
    fn riemann_roch(g in 0i64..=8, d in -5i64..=30) {
        if d < 0 || d > 2 * g - 2 {
            prop_assert_eq!(h0(g, d) - h0(g, 2 * g - 2 - d), d - g + 1);
        }
        let (lo, hi) = h0_line_bundle(g, d, false).bounds();
        prop_assert!(0 <= lo && lo <= hi && lo > d - g);
    }

    #[test]
    fn elm_round_trips_and_matches_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st: ElmState = random_state(&mut rng);
        if let Some((next, step)) = random_valid_step(&mut rng, &st, "x") {
            prop_assert!(blowup_oracle_check(&st, &step).agrees());
            prop_assert_eq!(apply_inverse(&next).unwrap(), st.clone());
            prop_assert_eq!(next.trisection_genus().unwrap(), st.trisection_genus().unwrap());
            prop_assert_eq!((next.surface.e - st.surface.e).abs(), 1);
        }
    }
}
