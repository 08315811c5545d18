mod common;

use common::{quick, random_arc};
use hyuntil::dsl::Dsl;
use hyuntil::monitor::{check_strong_until, check_weak_until, PropositionPair, Verdict};
use hyuntil::scenarios::by_id;
use hyuntil::sim::simulate;
use hyuntil::time::HybridTime;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(n: usize, a: f64, b: f64, c: f64) -> PropositionPair {
    let (lo, hi) = (a.min(b), a.max(b));
    if n == 1 {
        let d = Dsl::new(&["x"]);
        PropositionPair::new(
            d.set(&format!("x >= {lo} & x <= {hi}")).unwrap(),
            d.set(&format!("x >= {c}")).unwrap(),
        )
        .unwrap()
    } else {
        let d = Dsl::new(&["x1", "x2"]);
        PropositionPair::new(
            d.set(&format!("x1 + x2 >= {lo} & x1 - x2 <= {hi}")).unwrap(),
            d.set(&format!("x1^2 + x2^2 >= {}", c.abs() + 1.0)).unwrap(),
        )
        .unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn strong_implies_weak_and_prefixes_agree(
        seed in any::<u64>(),
        n in 1usize..=2,
        a in -1.5f64..1.5,
        b in -1.5f64..1.5,
        c in -1.0f64..2.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arc = random_arc(&mut rng, n);
        let pq = pair(n, a, b, c);
        let t0 = HybridTime::new(0.0, 0);
        let s = check_strong_until(&arc, &pq, t0).unwrap().verdict;
        let w = check_weak_until(&arc, &pq, t0).unwrap().verdict;
        if s == Verdict::Satisfied {
            prop_assert_eq!(w, Verdict::Satisfied);
        }
        if w == Verdict::Violated {
            prop_assert_eq!(s, Verdict::Violated);
        }
        for k in 1..=arc.num_samples() {
            let p = arc.prefix(k);
            for (check, full) in [(check_strong_until as fn(_, _, _) -> _, s), (check_weak_until, w)] {
                let v = check(&p, &pq, t0).unwrap().verdict;
                if v != Verdict::Unknown {
                    prop_assert_eq!(v, full, "prefix {} of {}", k, arc.num_samples());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn set_algebra_matches_boolean_logic(
        a in -2.0f64..2.0, b in -2.0f64..2.0, r in 0.1f64..2.0,
        x in -3.0f64..3.0, y in -3.0f64..3.0,
    ) {
        let d = Dsl::new(&["x", "y"]);
        let s = d.set(&format!("x <= {a} & y > {b}")).unwrap();
        let t = d.set(&format!("x^2 + y^2 < {r}")).unwrap();
        let p = [x, y];
        let (ins, int) = (s.contains(&p), t.contains(&p));
        prop_assert_eq!(s.union(&t).unwrap().contains(&p), ins || int);
        prop_assert_eq!(s.intersection(&t).unwrap().contains(&p), ins && int);
        prop_assert_eq!(s.difference(&t).unwrap().contains(&p), ins && !int);
        let near_edge = (x - a).abs() < 1e-8 || (y - b).abs() < 1e-8 || (x * x + y * y - r).abs() < 1e-8;
        if !near_edge {
            prop_assert_eq!(s.complement().unwrap().contains(&p), !ins);
        }
        prop_assert!(!ins || s.closure().contains(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn simulation_is_deterministic(h0 in 0.0f64..3.0, v0 in -2.0f64..2.0) {
        let s = by_id("bouncing-ball").unwrap();
        let b = quick().budget.with_horizon(5.0, 50);
        let x0 = [h0, v0];
        let a = simulate(&s.system, &x0, &b, quick().policy).unwrap();
        let c = simulate(&s.system, &x0, &b, quick().policy).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn ball_energy_never_grows(h0 in 0.0f64..3.0, v0 in -2.0f64..2.0) {
        let s = by_id("bouncing-ball").unwrap();
        let x0 = [h0, v0];
        let e = |x: &[f64]| 2.0 * x[0] + x[1] * x[1];
        let arcs = simulate(&s.system, &x0, &quick().budget.with_horizon(6.0, 60), quick().policy).unwrap();
        for arc in &arcs {
            for p in arc.points() {
                prop_assert!(e(p.x) <= e(&x0) + 1e-8, "{:?}", p.x);
            }
        }
    }
}
