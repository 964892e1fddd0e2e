//! Degenerate cases with answers known by inspection.

use num_traits::Zero;
use rand::Rng;

use crate::bandit::{g_optimal_design, pac_best_arm, ArmSet, SyntheticLinear};
use crate::dist::{discretize, TypeDistribution};
use crate::hardness::{cover_contract, reduce, SetCoverInput};
use crate::model::{
    agent_utility, best_response, eps_best_responses, expected_principal_utility, principal_utility, robustify,
    Contract, DiscreteTypeInstance, Instance,
};
use crate::numerics::linalg::solve_linear_system;
use crate::numerics::{ratio, rng_new, rng_split, Rational, RationalLp, Relation};
use crate::ptas::PtasConfig;
use crate::solver::{candidate_contract_set, solve_discrete_optimal};

pub struct SelftestCase {
    pub name: &'static str,
    pub check: fn() -> bool,
}

fn q(a: i64, b: i64) -> Rational {
    ratio(a, b)
}

fn two_action() -> Instance<Rational> {
    super::two_action_instance()
}

fn free_action() -> Instance<Rational> {
    Instance::new(vec![vec![q(1, 4), q(3, 4)]], vec![q(1, 2), q(1, 1)], vec![q(0, 1)], None).unwrap()
}

/// A nonnegative rational contract mixing coarse payments with multiples of `mu`.
pub(crate) fn random_contract<R: Rng + ?Sized>(rng: &mut R, len: usize, mu: &Rational) -> Contract<Rational> {
    Contract(
        (0..len)
            .map(|_| match rng.gen_range(0..4) {
                0 => Rational::zero(),
                1 => q(rng.gen_range(0..=12), 12),
                2 => mu * q(rng.gen_range(0..=40), 10),
                _ => q(rng.gen_range(0..=60), 60) + mu * q(rng.gen_range(0..=8), 1),
            })
            .collect(),
    )
}

pub const CASES: &[SelftestCase] = &[
    SelftestCase {
        name: "null contract on a zero-cost action gives the agent zero",
        check: || agent_utility(&free_action(), &Contract::null(2), 0, &q(1, 3)).unwrap().is_zero(),
    },
    SelftestCase {
        name: "paying the full reward leaves the principal nothing",
        check: || {
            let inst = two_action();
            let p = Contract(inst.rewards().to_vec());
            (0..2).all(|a| principal_utility(&inst, &p, a).unwrap().is_zero())
        },
    },
    SelftestCase {
        name: "null contract: principal earns the expected reward",
        check: || principal_utility(&free_action(), &Contract::null(2), 0).unwrap() == q(7, 8),
    },
    SelftestCase {
        name: "with eps = 0 the null contract selects the zero-cost actions",
        check: || eps_best_responses(&two_action(), &Contract::null(2), &q(1, 2), &q(0, 1)).unwrap() == vec![0],
    },
    SelftestCase {
        name: "a single action is always the best response",
        check: || best_response(&free_action(), &Contract(vec![q(1, 2), q(0, 1)]), &q(1, 1)).action == 0,
    },
    SelftestCase {
        name: "robustify with alpha 0 and 1",
        check: || {
            let inst = two_action();
            let p = Contract(vec![q(1, 5), q(1, 2)]);
            robustify(&inst, &p, &q(0, 1), false).unwrap() == p
                && robustify(&inst, &p, &q(1, 1), false).unwrap().0 == inst.rewards()
        },
    },
    SelftestCase {
        name: "one type: expectation is the utility at that type",
        check: || {
            let inst = two_action();
            let dti = DiscreteTypeInstance::new(vec![q(1, 4)], vec![q(1, 1)]).unwrap();
            let p = Contract(vec![q(0, 1), q(1, 2)]);
            expected_principal_utility(&inst, &dti, &p) == q(1, 2)
        },
    },
    SelftestCase {
        name: "uniform mass of (1/4, 3/4] is 1/2",
        check: || TypeDistribution::<Rational>::uniform().interval_mass(&q(1, 4), &q(3, 4), false).unwrap() == q(1, 2),
    },
    SelftestCase {
        name: "discretizing the uniform law at width 1/2",
        check: || {
            let d = discretize(&TypeDistribution::uniform(), &q(1, 2)).unwrap();
            d.types() == [q(1, 4), q(3, 4)] && d.weights() == [q(1, 2), q(1, 2)]
        },
    },
    SelftestCase {
        name: "a one-point distribution always samples that point",
        check: || {
            let d = TypeDistribution::discrete(vec![0.3], vec![1.0]).unwrap();
            let mut rng = rng_new(1);
            (0..100).all(|_| d.sample(&mut rng) == 0.3)
        },
    },
    SelftestCase {
        name: "LP: max x subject to x <= 3/7",
        check: || {
            let mut lp = RationalLp::new(vec![q(1, 1)]);
            lp.constrain(vec![q(1, 1)], Relation::Le, q(3, 7));
            lp.solve().map(|r| r.value == q(3, 7)).unwrap_or(false)
        },
    },
    SelftestCase {
        name: "diagonal linear system",
        check: || {
            let x = solve_linear_system(&vec![vec![2.0, 0.0], vec![0.0, 4.0]], &[1.0, 1.0]).unwrap();
            x == vec![0.5, 0.25]
        },
    },
    SelftestCase {
        name: "seeded streams repeat and split streams differ",
        check: || {
            let draw = |mut r: crate::numerics::StreamRng| (0..100).map(|_| r.gen::<u64>()).collect::<Vec<_>>();
            let root = rng_new(9);
            draw(rng_new(9)) == draw(rng_new(9)) && draw(rng_split(&root, 0)) != draw(rng_split(&root, 1))
        },
    },
    SelftestCase {
        name: "a single zero-cost action needs no payment",
        check: || {
            let dti = DiscreteTypeInstance::new(vec![q(1, 2)], vec![q(1, 1)]).unwrap();
            let rep = solve_discrete_optimal(&free_action(), &dti, false).unwrap();
            rep.best_contract == Contract::null(2) && rep.value == q(7, 8)
        },
    },
    SelftestCase {
        name: "one action, two outcomes: candidates are the box corners",
        check: || candidate_contract_set(&free_action(), &[q(1, 2)], true).map(|s| s.len() == 4).unwrap_or(false),
    },
    SelftestCase {
        name: "a grid of width 1 has a single type and bound 4 sqrt(delta)",
        check: || {
            let cfg = PtasConfig::from_eps(q(1, 2)).unwrap().with_delta(q(1, 4)).with_alpha(q(1, 2));
            cfg.error_bound() == q(2, 1) && crate::dist::grid_size(&q(1, 1)).unwrap() == 1
        },
    },
    SelftestCase {
        name: "reduction with n = 2 and one set has 6 actions, 3 outcomes, 3 types",
        check: || {
            let ri = reduce(&SetCoverInput::parse(2, "1,2").unwrap());
            ri.inst.n_actions() == 6 && ri.inst.n_outcomes() == 3 && ri.dti.len() == 3
        },
    },
    SelftestCase {
        name: "the empty cover maps to the null contract",
        check: || {
            let ri = reduce(&SetCoverInput::parse(2, "1,2").unwrap());
            cover_contract(&ri, &[]).unwrap() == Contract::null(3)
        },
    },
    SelftestCase {
        name: "design on the standard basis is uniform",
        check: || {
            let arms: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| f64::from(u8::from(i == j))).collect()).collect();
            let d = g_optimal_design(&arms, 0.01).unwrap();
            d.weights.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-12) && (d.max_leverage - 3.0).abs() < 1e-9
        },
    },
    SelftestCase {
        name: "a single arm gets weight 1 and is returned after block 1",
        check: || {
            let arms = ArmSet::new(vec![vec![0.5, 0.0]]).unwrap();
            let env = SyntheticLinear::new(arms.clone(), vec![0.4, 0.0], 0.1).unwrap();
            let r = pac_best_arm(&env, &arms, 0.2, 0.1, 0.0, &mut rng_new(0)).unwrap();
            g_optimal_design(arms.arms(), 0.01).unwrap().weights == vec![1.0] && r.arm == 0 && r.blocks >= 1
                && r.state.blocks.len() == 1
        },
    },
    SelftestCase {
        name: "the full-reward arm has mean zero",
        check: || {
            let inst = two_action();
            let p = Contract(inst.rewards().to_vec());
            crate::dist::expected_utility(&inst, &TypeDistribution::uniform(), &p).is_zero()
        },
    },
];

/// Runs every case; a panicking case counts as a failure.
pub fn run_selftest() -> Vec<(String, bool)> {
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let out = CASES
        .iter()
        .map(|c| {
            let ok = std::panic::catch_unwind(c.check).unwrap_or(false);
            (c.name.to_string(), ok)
        })
        .collect();
    std::panic::set_hook(hook);
    out
}
