use misoifc_core::environment::{collective_reward, rate_pair, ChannelRealization, EnvConfig, RatePair};
use misoifc_core::features::{build_observation, pae_map};
use misoifc_core::numerics::{inner, normalize, null_project, unit_phasor, Complex64, ComplexVec};
use misoifc_core::precoders::{dominates, mrt, pareto_indices, slnr, slnr_value, sweep_rate_region, zf};
use proptest::prelude::*;

fn cvec(n: usize) -> impl Strategy<Value = ComplexVec> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n).prop_map(|p| ComplexVec::from_pairs(&p))
}

fn channel() -> impl Strategy<Value = ChannelRealization> {
    (cvec(3), cvec(3), cvec(3), cvec(3))
        .prop_filter("non-degenerate", |(a, b, c, d)| {
            [a, b, c, d].iter().all(|v| v.norm() > 1e-3)
        })
        .prop_map(|(h1, g1, h2, g2)| ChannelRealization::new(h1, g1, h2, g2).unwrap())
}

fn close(a: &ComplexVec, b: &ComplexVec, tol: f64) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol)
}

proptest! {
    #[test]
    fn normalize_is_phase_covariant(v in cvec(4), phi in -3.2f64..3.2, mag in 0.1f64..10.0) {
        prop_assume!(v.norm() > 1e-6);
        let c = unit_phasor(phi) * mag;
        let lhs = normalize(&v.scale(c)).unwrap();
        let rhs = normalize(&v).unwrap().scale(unit_phasor(phi));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn inner_is_bilinear(a in cvec(3), b in cvec(3), c in cvec(3), s in (-2.0f64..2.0, -2.0f64..2.0)) {
        let s = Complex64::new(s.0, s.1);
        let lhs = inner(&a, &b.add_scaled(s, &c).unwrap()).unwrap();
        let rhs = inner(&a, &b).unwrap() + s * inner(&a, &c).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn null_projection_is_orthogonal(h in cvec(3), g in cvec(3)) {
        prop_assume!(g.norm() > 1e-3);
        let r = null_project(&h, &g).unwrap();
        prop_assert!(inner(&g, &r).unwrap().norm() <= 1e-12 * (1.0 + h.norm() * g.norm()));
    }

    #[test]
    fn pae_properties(v in cvec(3), phi in -3.2f64..3.2) {
        prop_assume!(v[0].norm() > 1e-9);
        let p = pae_map(&v);
        prop_assert_eq!(p[0].im, 0.0);
        prop_assert!(p[0].re >= 0.0);
        for (a, b) in v.iter().zip(p.iter()) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-12 * (1.0 + a.norm()));
        }
        prop_assert!(close(&pae_map(&p), &p, 1e-12));
        prop_assert!(close(&pae_map(&v.scale(unit_phasor(phi))), &p, 1e-12 * (1.0 + v.norm())));
    }

    #[test]
    fn observation_round_trips(h in cvec(3), g in cvec(3)) {
        let obs = build_observation(&h, &g, false).unwrap();
        prop_assert_eq!(obs.values().len(), 12);
        let (h2, g2) = obs.unflatten();
        prop_assert_eq!(h2, h);
        prop_assert_eq!(g2, g);
    }

    #[test]
    fn slnr_dominates_other_precoders_in_its_objective(h in cvec(3), g in cvec(3), sigma in 0.01f64..2.0) {
        prop_assume!(h.norm() > 1e-3 && g.norm() > 1e-3);
        let best = slnr_value(&h, &g, &slnr(&h, &g, sigma).unwrap(), sigma).unwrap();
        for w in [mrt(&h).unwrap(), zf(&h, &g).unwrap()] {
            prop_assume!(w.norm() > 0.5);
            prop_assert!(slnr_value(&h, &g, &w, sigma).unwrap() <= best * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rates_are_invariant_to_precoder_phase(ch in channel(), p1 in -3.2f64..3.2, p2 in -3.2f64..3.2) {
        let env = EnvConfig::new(3, 0.1).unwrap();
        let (w1, w2) = (mrt(&ch.h1).unwrap(), zf(&ch.h2, &ch.g2).unwrap());
        let a = rate_pair(&ch, &w1, &w2, &env).unwrap();
        let b = rate_pair(&ch, &w1.scale(unit_phasor(p1)), &w2.scale(unit_phasor(p2)), &env).unwrap();
        prop_assert!((a.r1 - b.r1).abs() < 1e-12 && (a.r2 - b.r2).abs() < 1e-12);
    }

    #[test]
    fn collective_reward_lies_between_rates(r1 in 0.0f64..10.0, r2 in 0.0f64..10.0, alpha in 0.0f64..=1.0) {
        let r = collective_reward(&RatePair::new(r1, r2), alpha).unwrap();
        prop_assert!(r >= r1.min(r2) - 1e-12 && r <= r1.max(r2) + 1e-12);
    }

    #[test]
    fn pareto_indices_match_brute_force(pts in prop::collection::vec((0u8..12, 0u8..12), 1..60)) {
        let rates: Vec<RatePair> = pts.iter().map(|&(a, b)| RatePair::new(a as f64, b as f64)).collect();
        let fast = pareto_indices(&rates);
        for (i, p) in rates.iter().enumerate() {
            let undominated = !rates.iter().any(|q| dominates(q, p));
            let listed = fast.iter().any(|&k| rates[k] == *p);
            prop_assert_eq!(undominated, listed, "point {} {:?}", i, p);
        }
        for w in fast.windows(2) {
            prop_assert!(rates[w[0]].r1 <= rates[w[1]].r1);
        }
    }
}

#[test]
fn sweep_frontier_matches_brute_force() {
    let env = EnvConfig::new(3, 0.1).unwrap();
    let mut rng = misoifc_core::numerics::RngStream::new(8, 1);
    for _ in 0..5 {
        let ch = misoifc_core::environment::sample_channel(&mut rng, &env);
        let points = sweep_rate_region(&ch, &env, 21).unwrap();
        let rates: Vec<RatePair> = points.iter().map(|p| p.rates).collect();
        let frontier = pareto_indices(&rates);
        let brute: Vec<usize> = (0..rates.len())
            .filter(|&i| !rates.iter().any(|q| dominates(q, &rates[i])))
            .collect();
        for i in &brute {
            assert!(frontier.iter().any(|&k| rates[k] == rates[*i]));
        }
        assert!(frontier.len() <= brute.len());
    }
}
