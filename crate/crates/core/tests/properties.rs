mod common;

use common::*;
use contractlab::bandit::{contract_environment, design::Projection, design::max_leverage, g_optimal_design};
use contractlab::dist::{discretize, grid_types, TypeDistribution};
use contractlab::hardness::{ell_value, reduce, SetCoverInput};
use contractlab::model::{
    agent_utility, best_response, eps_best_responses, principal_utility, robustify, Contract, DiscreteTypeInstance,
};
use contractlab::numerics::{rng_new, Rational, RationalLp, Relation, Scalar};
use contractlab::ptas::PtasConfig;
use contractlab::solver::{
    best_in_set, candidate_contract_set, contract_for_tuple, solve_discrete_optimal, solve_discrete_optimal_logged,
};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn random_contract<R: Rng>(rng: &mut R, m: usize) -> Contract<Rational> {
    Contract((0..m).map(|_| q(rng.gen_range(0..=24), 24)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn best_response_is_pure(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let p = random_contract(&mut rng, m);
        let theta = q(rng.gen_range(0..=30), 30);
        prop_assert_eq!(best_response(&inst, &p, &theta), best_response(&inst.clone(), &p.clone(), &theta.clone()));
    }

    #[test]
    fn eps_sets_grow_with_eps(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let p = random_contract(&mut rng, m);
        let theta = q(rng.gen_range(0..=30), 30);
        let (a, b) = (rng.gen_range(0..=10), rng.gen_range(0..=10));
        let (lo, hi) = (q(a.min(b), 20), q(a.max(b), 20));
        let small = eps_best_responses(&inst, &p, &theta, &lo).unwrap();
        let large = eps_best_responses(&inst, &p, &theta, &hi).unwrap();
        prop_assert!(small.iter().all(|x| large.contains(x)));
    }

    #[test]
    fn linearization(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let p = random_contract(&mut rng, m);
        let theta = q(rng.gen_range(0..=30), 30);
        let eps = q(rng.gen_range(0..=6), 20);
        let alpha = q(rng.gen_range(1..=10), 10);
        let near = eps_best_responses(&inst, &p, &theta, &eps).unwrap();
        let robust = robustify(&inst, &p, &alpha, false).unwrap();
        let got = best_response(&inst, &robust, &theta).principal_utility;
        for a in near {
            let floor = principal_utility(&inst, &p, a).unwrap() - (&eps / &alpha + &alpha);
            prop_assert!(got >= floor);
        }
    }

    #[test]
    fn nearby_types_are_approximately_ic(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let p = random_contract(&mut rng, m);
        let other = q(rng.gen_range(0..=30), 30);
        let diam = q(rng.gen_range(0..=6), 30);
        let lo = if other < diam { Rational::zero() } else { &other - &diam };
        let hi = if &other + &diam > Rational::one() { Rational::one() } else { &other + &diam };
        let theta = &lo + (&hi - &lo) * q(rng.gen_range(0..=8), 8);
        let ic = best_response(&inst, &p, &other).ic_set;
        let near = eps_best_responses(&inst, &p, &theta, &diam).unwrap();
        prop_assert!(ic.iter().all(|a| near.contains(a)));
    }

    #[test]
    fn ic_types_form_intervals(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let p = random_contract(&mut rng, m);
        let sets: Vec<Vec<usize>> = (0..=200).map(|i| best_response(&inst, &p, &q(i, 200)).ic_set).collect();
        for a in 0..n {
            let hits: Vec<usize> = (0..sets.len()).filter(|&i| sets[i].contains(&a)).collect();
            if let (Some(first), Some(last)) = (hits.first(), hits.last()) {
                prop_assert_eq!(hits.len(), last - first + 1, "action {} is IC on a broken set", a);
            }
        }
    }

    #[test]
    fn discretized_weights_sum_to_one(seed in any::<u64>(), k in 1i64..60) {
        let mut rng = rng_new(seed);
        let dist = random_piecewise(&mut rng);
        let grid = discretize(&dist, &q(1, k)).unwrap();
        let total = grid.weights().iter().fold(Rational::zero(), |s, w| s + w);
        prop_assert!(total.is_one());
        prop_assert_eq!(grid.len(), k as usize);
    }

    #[test]
    fn interval_mass_is_monotone(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let dist = random_piecewise(&mut rng);
        let mut xs: Vec<i64> = (0..3).map(|_| rng.gen_range(0..=48)).collect();
        xs.sort_unstable();
        let (a, b, c) = (q(xs[0], 48), q(xs[1], 48), q(xs[2], 48));
        prop_assert!(dist.interval_mass(&a, &b, false).unwrap() <= dist.interval_mass(&a, &c, false).unwrap());
        prop_assert!(dist.interval_mass(&b, &c, false).unwrap() <= dist.interval_mass(&a, &c, false).unwrap());
    }

    #[test]
    fn lp_points_satisfy_constraints_exactly(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let vars = rng.gen_range(1..=4);
        let mut lp = RationalLp::new((0..vars).map(|_| q(rng.gen_range(-5..=5), 3)).collect());
        for _ in 0..rng.gen_range(1..=6) {
            let coeffs = (0..vars).map(|_| q(rng.gen_range(-4..=4), 2)).collect();
            let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
            lp.constrain(coeffs, rel, q(rng.gen_range(-3..=6), 2));
        }
        for v in 0..vars {
            lp.set_upper(v, q(rng.gen_range(1..=5), 1));
        }
        let res = lp.solve().unwrap();
        if res.is_optimal() {
            prop_assert!(lp.is_feasible(&res.point));
        }
    }

    #[test]
    fn tuple_contracts_are_exactly_ic(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m, k) = (rng.gen_range(1..=4), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let (types, weights) = random_types(&mut rng, k);
        let dti = DiscreteTypeInstance::new(types.clone(), weights).unwrap();
        let tuple: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let bounded = rng.gen_bool(0.5);
        let res = contract_for_tuple(&inst, &dti, &tuple, bounded).unwrap();
        if res.is_optimal() {
            let p = Contract(res.point.clone());
            for (theta, &a) in types.iter().zip(&tuple) {
                let mine = agent_utility(&inst, &p, a, theta).unwrap();
                for b in 0..n {
                    prop_assert!(mine >= agent_utility(&inst, &p, b, theta).unwrap());
                }
            }
        }
    }

    #[test]
    fn rechecked_value_never_below_lp(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m, k) = (rng.gen_range(1..=4), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let (types, weights) = random_types(&mut rng, k);
        let dti = DiscreteTypeInstance::new(types, weights).unwrap();
        let rep = solve_discrete_optimal_logged(&inst, &dti, rng.gen_bool(0.5), true).unwrap();
        prop_assert!(rep.value >= rep.lp_value);
        prop_assert_eq!(rep.per_tuple.map(|l| l.len()), Some(rep.tuples_solved));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn candidate_argmax_ignores_scale(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m, k) = (rng.gen_range(1..=3), rng.gen_range(1..=2), rng.gen_range(1..=3));
        let inst = random_instance(&mut rng, n, m);
        let (types, weights) = random_types(&mut rng, k);
        let set = candidate_contract_set(&inst, &types, true).unwrap();
        let dti = DiscreteTypeInstance::new(types.clone(), weights.clone()).unwrap();
        let (i, v) = best_in_set(&inst, &dti, &set).unwrap();
        // Scaling every weight by c scales every value by c; compare unnormalized sums directly.
        let c = q(rng.gen_range(2..=9), 1);
        let scaled: Vec<Rational> = set
            .iter()
            .map(|p| {
                types.iter().zip(&weights).fold(Rational::zero(), |s, (t, w)| {
                    s + &c * w * best_response(&inst, p, t).principal_utility
                })
            })
            .collect();
        let j = (0..scaled.len()).fold(0, |b, x| if scaled[x] > scaled[b] { x } else { b });
        prop_assert_eq!(i, j);
        prop_assert_eq!(&scaled[j], &(&c * &v));
        // The candidate optimum matches the bounded solver.
        prop_assert_eq!(v, solve_discrete_optimal(&inst, &dti, true).unwrap().value);
    }

    #[test]
    fn robust_contract_tracks_grid_representative(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
        let inst = random_instance(&mut rng, n, m);
        let delta = q(1, rng.gen_range(2..=6));
        let alpha = q(rng.gen_range(1..=4), 4);
        let cfg = PtasConfig::from_eps(q(1, 1)).unwrap().with_delta(delta.clone()).with_alpha(alpha.clone());
        let p_grid = random_contract(&mut rng, m);
        let robust = robustify(&inst, &p_grid, &alpha, cfg.bounded).unwrap();
        let slack = &delta / &alpha + &alpha;
        let reps = grid_types(&delta).unwrap();
        for (i, rep) in reps.iter().enumerate() {
            let lo = &delta * q(i as i64, 1);
            let hi = if &lo + &delta > Rational::one() { Rational::one() } else { &lo + &delta };
            let target = best_response(&inst, &p_grid, rep).principal_utility;
            for s in 0..10 {
                let theta = &lo + (&hi - &lo) * q(s, 9);
                let got = best_response(&inst, &robust, &theta).principal_utility;
                prop_assert!(got + &slack >= target);
            }
        }
    }

    #[test]
    fn design_meets_leverage_bound(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let d = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=25);
        let arms: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let tol = 0.01;
        let design = g_optimal_design(&arms, tol).unwrap();
        prop_assert!((design.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(design.max_leverage <= (1.0 + tol) * design.rank as f64 + 1e-9);
        // With ⌈Tρ⌉ pulls the leverage scaled by T stays within the same bound.
        let t = 1000.0;
        let counts: Vec<f64> = design.weights.iter().map(|w| (w * t).ceil()).collect();
        let z = Projection::new(&arms).coords;
        prop_assert!(max_leverage(&z, &counts) <= (1.0 + tol) * design.rank as f64 / t + 1e-9);
    }

    #[test]
    fn grid_misspecification_within_bound(seed in any::<u64>()) {
        let mut rng = rng_new(seed);
        let (n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
        let inst = random_instance(&mut rng, n, m);
        let dist = random_piecewise(&mut rng);
        let eps = q(1, rng.gen_range(2..=12));
        let env = contract_environment(&inst, &dist, &eps).unwrap();
        prop_assert!(env.misspecification() <= env.misspecification_bound + 1e-12);
    }
}

#[test]
fn cover_gap_on_tiny_systems() {
    for (n, sets) in [(2, "1,2"), (2, "1;2"), (2, "1;1,2")] {
        let sc = SetCoverInput::parse(n, sets).unwrap();
        let ri = reduce(&sc);
        let k_min = sc.min_cover_size().unwrap();
        let opt = solve_discrete_optimal(&ri.inst, &ri.dti, false).unwrap().value;
        assert!(opt >= ell_value(n, sc.m(), k_min).unwrap(), "{sets}");
        let below_smaller = k_min == 0 || opt < ell_value(n, sc.m(), k_min - 1).unwrap();
        println!("sets {sets}: k_min {k_min}, OPT {opt}, certifies no smaller cover: {below_smaller}");
    }
}

#[test]
fn pure_single_action_environment() {
    let inst = contractlab::model::Instance::new(vec![vec![q(1, 3), q(2, 3)]], vec![q(1, 2), q(1, 1)], vec![q(0, 1)], None).unwrap();
    let env = contract_environment(&inst, &TypeDistribution::uniform(), &q(1, 4)).unwrap();
    for (p, mean) in env.contracts.iter().zip(&env.means) {
        let expect = principal_utility(&inst, p, 0).unwrap().as_f64();
        assert!((mean - expect).abs() < 1e-12);
    }
}
