//! Set-Cover instances encoded as single-dimensional contract design.
//!
//! Each element `i` becomes a type `θ_i = i/n`; each pair `(i, S)` with `i ∈ S`
//! becomes an action `a_{i,S}` that pays off only through the outcome `ω_S`, and
//! a slightly cheaper twin `ā_{i,S}` that never produces reward. An extra zero
//! type makes every paid set cost the principal a little, so the best contract
//! reveals the size of the smallest cover. All arithmetic is exact.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{best_response, expected_principal_utility, Contract, DiscreteTypeInstance, Instance};
use crate::numerics::{Rational, Scalar};

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn int(n: usize) -> Rational {
    Rational::from_usize(n)
}

fn pow(x: usize, e: u32) -> Rational {
    Rational::from_integer(num_bigint::BigInt::from(x).pow(e))
}

fn s(x: &Rational) -> String {
    x.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverInput {
    n: usize,
    /// Sorted, deduplicated elements in `1..=n`.
    sets: Vec<Vec<usize>>,
}

impl SetCoverInput {
    pub fn new(n: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::usage(format!("universe size {n}; at least 2 elements are required")));
        }
        if sets.is_empty() {
            return Err(Error::usage("at least one set is required"));
        }
        let mut clean = Vec::with_capacity(sets.len());
        for (j, mut set) in sets.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(Error::invalid(format!("sets[{j}]"), "empty set"));
            }
            if let Some(&e) = set.iter().find(|&&e| e == 0 || e > n) {
                return Err(Error::invalid(format!("sets[{j}]"), format!("element {e} outside 1..={n}")));
            }
            clean.push(set);
        }
        Ok(SetCoverInput { n, sets: clean })
    }

    /// Parses `"1,2;2;1,3;3"`: sets separated by `;`, elements by `,`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let sets = text
            .split(';')
            .enumerate()
            .map(|(j, part)| {
                part.split(',')
                    .map(|e| {
                        e.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::invalid(format!("sets[{j}]"), format!("`{}` is not an element", e.trim())))
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, sets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn is_cover(&self, cover: &[usize]) -> bool {
        (1..=self.n).all(|e| cover.iter().any(|&j| j < self.m() && self.sets[j].contains(&e)))
    }

    /// Size of the smallest cover by exhaustive search, `None` if the sets miss an element.
    pub fn min_cover_size(&self) -> Option<usize> {
        let m = self.m();
        assert!(m < 32, "exhaustive cover search limited to 31 sets");
        (0u32..1 << m)
            .filter(|mask| {
                let chosen: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
                self.is_cover(&chosen)
            })
            .map(|mask| mask.count_ones() as usize)
            .min()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionParams {
    pub rho: Rational,
    pub eta: Rational,
    pub eps: Rational,
    pub mu: Rational,
}

impl ReductionParams {
    /// `ρ = n⁻⁶`, `η = n⁻²`, `ε = n⁻⁸m⁻¹`, `μ = n⁻⁹m⁻¹`.
    pub fn new(n: usize, m: usize) -> Self {
        let one = Rational::one();
        ReductionParams {
            rho: &one / pow(n, 6),
            eta: &one / pow(n, 2),
            eps: &one / (pow(n, 8) * int(m)),
            mu: &one / (pow(n, 9) * int(m)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    /// `a_{i,S}` with element `i` (1-based) and set index `S` (0-based).
    Regular { i: usize, set: usize },
    /// The twin `ā_{i,S}`.
    Shadow { i: usize, set: usize },
    Star,
    Null,
}

#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub cover_input: SetCoverInput,
    pub params: ReductionParams,
    pub inst: Instance<Rational>,
    /// `θ_0 = 0` first, then `θ_i = i/n`.
    pub dti: DiscreteTypeInstance<Rational>,
    pub actions: Vec<ActionKind>,
}

impl ReducedInstance {
    pub fn n(&self) -> usize {
        self.cover_input.n
    }

    pub fn m(&self) -> usize {
        self.cover_input.m()
    }

    pub fn star_outcome(&self) -> usize {
        self.m()
    }

    pub fn bar_outcome(&self) -> usize {
        self.m() + 1
    }

    pub fn star_action(&self) -> usize {
        self.actions.len() - 2
    }

    pub fn null_action(&self) -> usize {
        self.actions.len() - 1
    }

    pub fn regular_action(&self, i: usize, set: usize) -> Option<usize> {
        self.actions.iter().position(|k| *k == ActionKind::Regular { i, set })
    }

    pub fn label(&self, a: usize) -> String {
        self.inst.label(a)
    }
}

/// Builds the contract-design instance for `sc`.
pub fn reduce(sc: &SetCoverInput) -> ReducedInstance {
    let (n, m) = (sc.n, sc.m());
    let params = ReductionParams::new(n, m);
    let ReductionParams { rho, eta, eps, mu } = params.clone();
    let one = Rational::one();
    let (star, bar) = (m, m + 1);
    let n_outcomes = m + 2;

    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut costs: Vec<Rational> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut actions: Vec<ActionKind> = Vec::new();
    for (j, set) in sc.sets.iter().enumerate() {
        for &i in set {
            let mut row = vec![Rational::zero(); n_outcomes];
            row[j] = &mu / int(2 * i);
            row[star] = &mu / int(i);
            row[bar] = &one - &mu * q(3, 2) / int(i);
            rows.push(row);
            costs.push(&mu / int(4 * i * i));
            labels.push(format!("a[{i},S{}]", j + 1));
            actions.push(ActionKind::Regular { i, set: j });
        }
    }
    for (j, set) in sc.sets.iter().enumerate() {
        for &i in set {
            let mut row = vec![Rational::zero(); n_outcomes];
            let x = &mu / int(2 * i) * (&one - &eta / int(2));
            row[bar] = &one - &x;
            row[j] = x;
            rows.push(row);
            costs.push(&mu / int(4 * i * i) * (&one - &eta));
            labels.push(format!("abar[{i},S{}]", j + 1));
            actions.push(ActionKind::Shadow { i, set: j });
        }
    }
    let mut row = vec![eps.clone(); n_outcomes];
    row[star] = &one - int(m) * &eps;
    row[bar] = Rational::zero();
    rows.push(row);
    costs.push(one.clone());
    labels.push("a_star".into());
    actions.push(ActionKind::Star);
    let mut row = vec![Rational::zero(); n_outcomes];
    row[bar] = one.clone();
    rows.push(row);
    costs.push(Rational::zero());
    labels.push("a0".into());
    actions.push(ActionKind::Null);

    let mut rewards = vec![Rational::zero(); n_outcomes];
    rewards[star] = &one / int(n);
    let inst = Instance::new(rows, rewards, costs, Some(labels)).expect("construction is a valid instance");

    let mut types = vec![Rational::zero()];
    let mut weights = vec![rho.clone()];
    for i in 1..=n {
        types.push(int(i) / int(n));
        weights.push((&one - &rho) / int(n));
    }
    let dti = DiscreteTypeInstance::new(types, weights).expect("weights sum to one");
    ReducedInstance { cover_input: sc.clone(), params, inst, dti, actions }
}

/// Pays `1/n` on `ω_S` for each `S` in `cover` (0-based set indices).
pub fn cover_contract(ri: &ReducedInstance, cover: &[usize]) -> Result<Contract<Rational>> {
    if let Some(&j) = cover.iter().find(|&&j| j >= ri.m()) {
        return Err(Error::usage(format!("set index {} out of range (m = {})", j + 1, ri.m())));
    }
    let mut p = vec![Rational::zero(); ri.m() + 2];
    for &j in cover {
        p[j] = q(1, ri.n() as i64);
    }
    Ok(Contract(p))
}

/// `ℓ = (1−ρ)/(2n²) μ Σ_i 1/i + (ρ/n)(1 − mε − εk)`.
pub fn ell_value(n: usize, m: usize, k: usize) -> Result<Rational> {
    if k > m {
        return Err(Error::usage(format!("cover size {k} exceeds the number of sets {m}")));
    }
    if n < 2 {
        return Err(Error::usage("universe size must be at least 2"));
    }
    let ReductionParams { rho, eps, mu, .. } = ReductionParams::new(n, m);
    let one = Rational::one();
    let harmonic = (1..=n).fold(Rational::zero(), |acc, i| acc + &one / int(i));
    Ok((&one - &rho) / (int(2) * int(n * n)) * &mu * harmonic
        + &rho / int(n) * (&one - int(m) * &eps - &eps * int(k)))
}

/// `1/(n¹⁵ m)`, the drop in `ℓ` per extra set in the cover.
pub fn gap(n: usize, m: usize) -> Rational {
    Rational::one() / (pow(n, 15) * int(m))
}

#[derive(Debug, Clone, Serialize)]
pub struct IfTypeCheck {
    pub element: usize,
    pub theta: String,
    pub action: String,
    pub principal_utility: String,
    pub cover_action_is_ic: bool,
    pub utility_matches_cover_action: bool,
    /// Largest agent utility over all regular actions, which must be at most `μ/(4in)`.
    pub max_regular_agent_utility: String,
    pub regular_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IfReport {
    pub cover: Vec<usize>,
    pub types: Vec<IfTypeCheck>,
    pub theta0_action: String,
    pub theta0_plays_star: bool,
    /// Payment of `a★` to type 0, which must exceed `μ/n`.
    pub star_payment: String,
    pub star_payment_exceeds_mu_over_n: bool,
    pub total: String,
    pub ell: String,
    pub exact_match: bool,
    pub passed: bool,
}

pub fn verify_if_direction(ri: &ReducedInstance, cover: &[usize]) -> Result<IfReport> {
    let mut cover: Vec<usize> = cover.to_vec();
    cover.sort_unstable();
    cover.dedup();
    if !ri.cover_input.is_cover(&cover) {
        return Err(Error::usage(format!(
            "sets {:?} do not cover 1..={}",
            cover.iter().map(|j| j + 1).collect::<Vec<_>>(),
            ri.n()
        )));
    }
    let p = cover_contract(ri, &cover)?;
    let n = ri.n();
    let mu = &ri.params.mu;
    let mut types = Vec::with_capacity(n);
    for i in 1..=n {
        let theta = &ri.dti.types()[i];
        let br = best_response(&ri.inst, &p, theta);
        let cover_actions: Vec<usize> = cover.iter().filter_map(|&j| ri.regular_action(i, j)).collect();
        let ic = cover_actions.iter().any(|a| br.ic_set.contains(a));
        let cover_value = cover_actions
            .first()
            .map(|&a| ri.inst.principal_utility_raw(&p, a))
            .unwrap_or_else(Rational::zero);
        let max_regular = ri
            .actions
            .iter()
            .enumerate()
            .filter(|(_, k)| matches!(k, ActionKind::Regular { .. }))
            .map(|(a, _)| ri.inst.agent_utility_raw(&p, a, theta))
            .fold(None::<Rational>, |m, u| Some(m.map_or(u.clone(), |m| Rational::max_of(m, u))))
            .expect("every set has an element");
        let bound = mu / int(4 * i * n);
        types.push(IfTypeCheck {
            element: i,
            theta: s(theta),
            action: ri.label(br.action),
            principal_utility: s(&br.principal_utility),
            cover_action_is_ic: ic,
            utility_matches_cover_action: br.principal_utility == cover_value,
            regular_bound_holds: max_regular <= bound,
            max_regular_agent_utility: s(&max_regular),
        });
    }
    let br0 = best_response(&ri.inst, &p, &ri.dti.types()[0]);
    let star_payment = ri.inst.expected_payment(&p, ri.star_action());
    let star_ok = star_payment > mu / int(n);
    let total = expected_principal_utility(&ri.inst, &ri.dti, &p);
    let ell = ell_value(n, ri.m(), cover.len())?;
    let exact = total == ell;
    let theta0_star = br0.action == ri.star_action();
    let passed = exact
        && theta0_star
        && star_ok
        && types
            .iter()
            .all(|t| t.cover_action_is_ic && t.utility_matches_cover_action && t.regular_bound_holds);
    Ok(IfReport {
        cover: cover.iter().map(|j| j + 1).collect(),
        types,
        theta0_action: ri.label(br0.action),
        theta0_plays_star: theta0_star,
        star_payment: s(&star_payment),
        star_payment_exceeds_mu_over_n: star_ok,
        total: s(&total),
        ell: s(&ell),
        exact_match: exact,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TypeClass {
    /// Plays its own regular action `a_{i,S}`.
    E1,
    /// Plays another element's regular action `a_{j,S}`, `j ≠ i`.
    E2,
    E3,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Classification {
    pub e1: Vec<usize>,
    pub e2: Vec<usize>,
    pub e3: Vec<usize>,
}

fn class_of(ri: &ReducedInstance, i: usize, action: usize) -> TypeClass {
    match ri.actions[action] {
        ActionKind::Regular { i: j, .. } if j == i => TypeClass::E1,
        ActionKind::Regular { .. } => TypeClass::E2,
        _ => TypeClass::E3,
    }
}

/// Partitions the elements by the kind of action their type plays under `p`.
pub fn classify_types(ri: &ReducedInstance, p: &Contract<Rational>) -> Result<Classification> {
    ri.inst.check_contract(p)?;
    let mut out = Classification::default();
    for i in 1..=ri.n() {
        let br = best_response(&ri.inst, p, &ri.dti.types()[i]);
        match class_of(ri, i, br.action) {
            TypeClass::E1 => out.e1.push(i),
            TypeClass::E2 => out.e2.push(i),
            TypeClass::E3 => out.e3.push(i),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct OnlyIfTypeCheck {
    pub element: usize,
    pub class: TypeClass,
    pub action: String,
    pub utility: String,
    pub bound: String,
    pub holds: bool,
    /// For `E2`: the bound with the played `j` kept explicit,
    /// `μ(1/(jn) − i/(2j²n) + 2p★/(jη))`.
    pub exact_j_bound: Option<String>,
    pub exact_j_holds: Option<bool>,
    /// For `E2`: whether the sharper `μ(1/(2in) − 1/(2n⁴) + 2p★/η)` also holds.
    pub sharper_holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theta0Check {
    pub action: String,
    pub plays_star: bool,
    pub utility: String,
    pub formula: String,
    /// Equality with the formula, checked only when `a★` is played.
    pub formula_matches: Option<bool>,
    pub utility_at_most_formula: bool,
}

/// Inequalities that hold only for large enough `n`, evaluated at the given `n`.
#[derive(Debug, Clone, Serialize)]
pub struct SizeConditions {
    /// `2/n⁷ − 1/(2n⁶) + 4/n¹²`; negative only from `n = 5` on.
    pub pstar_coefficient_bound: String,
    pub pstar_coefficient_negative: bool,
    /// `1/(16 n¹⁴ m) ≥ 1/(n¹⁵ m)`, needed to move a type out of `E2`.
    pub move_step_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OnlyIfReport {
    pub classes: Classification,
    pub types: Vec<OnlyIfTypeCheck>,
    pub theta0: Theta0Check,
    /// 1-based indices of sets with `p_{ω_S} ≥ 1/n − (4/η)p★`.
    pub s_bar: Vec<usize>,
    pub aggregate_utility: String,
    pub aggregate_bound: String,
    pub aggregate_holds: bool,
    /// Coefficient of `p_ω̄` in `U^A(a_{i,S}) − U^A(ā_{i,S})`, per element. Nonpositive,
    /// so a positive `p_ω̄` only tightens the IC constraints used above.
    pub bar_coefficients: Vec<String>,
    pub size_conditions: SizeConditions,
    pub violations: usize,
}

pub fn verify_onlyif_bounds(ri: &ReducedInstance, p: &Contract<Rational>) -> Result<OnlyIfReport> {
    ri.inst.check_contract(p)?;
    let (n, m) = (ri.n(), ri.m());
    let ReductionParams { rho, eta, eps, mu } = ri.params.clone();
    let one = Rational::one();
    let nn = int(n);
    let pstar = p.0[ri.star_outcome()].clone();
    let mut violations = 0usize;
    let mut classes = Classification::default();
    let mut types = Vec::with_capacity(n);
    let mut e_sum = Rational::zero();
    for i in 1..=n {
        let br = best_response(&ri.inst, p, &ri.dti.types()[i]);
        let class = class_of(ri, i, br.action);
        let ii = int(i);
        let (bound, exact_j_bound, sharper) = match class {
            TypeClass::E1 => {
                classes.e1.push(i);
                e_sum += &one / (int(2) * &ii * &nn);
                let b = &mu / (int(2) * &ii * &nn) + &pstar * &mu / &ii * (int(2) / &eta - &one);
                (b, None, None)
            }
            TypeClass::E2 => {
                classes.e2.push(i);
                e_sum += &one / (int(2) * &ii * &nn) - &one / (int(8) * pow(n, 4));
                let j = match ri.actions[br.action] {
                    ActionKind::Regular { i: j, .. } => int(j),
                    _ => unreachable!(),
                };
                let slack = int(2) / &eta * &pstar;
                let stated = &mu * (&one / (int(2) * &ii * &nn) - &one / (int(8) * pow(n, 4)) + &slack);
                let exact = &mu * (&one / (&j * &nn) - &ii / (int(2) * &j * &j * &nn) + &slack / &j);
                let sharp = &mu * (&one / (int(2) * &ii * &nn) - &one / (int(2) * pow(n, 4)) + &slack);
                (stated, Some(exact), Some(sharp))
            }
            TypeClass::E3 => {
                classes.e3.push(i);
                (Rational::zero(), None, None)
            }
        };
        let holds = br.principal_utility <= bound;
        if !holds {
            violations += 1;
        }
        let exact_j_holds = exact_j_bound.as_ref().map(|b| br.principal_utility <= *b);
        if exact_j_holds == Some(false) {
            violations += 1;
        }
        types.push(OnlyIfTypeCheck {
            element: i,
            class,
            action: ri.label(br.action),
            utility: s(&br.principal_utility),
            bound: s(&bound),
            holds,
            exact_j_bound: exact_j_bound.as_ref().map(s),
            exact_j_holds,
            sharper_holds: sharper.map(|b| br.principal_utility <= b),
        });
    }

    let sum_ps = (0..m).fold(Rational::zero(), |acc, j| acc + &p.0[j]);
    let formula = -(&eps * &sum_ps) + (&one - int(m) * &eps) * (&one / &nn - &pstar);
    let br0 = best_response(&ri.inst, p, &ri.dti.types()[0]);
    let plays_star = br0.action == ri.star_action();
    let formula_matches = plays_star.then(|| br0.principal_utility == formula);
    let at_most = br0.principal_utility <= formula;
    if formula_matches == Some(false) || !at_most {
        violations += 1;
    }
    let theta0 = Theta0Check {
        action: ri.label(br0.action),
        plays_star,
        utility: s(&br0.principal_utility),
        formula: s(&formula),
        formula_matches,
        utility_at_most_formula: at_most,
    };

    let threshold = &one / &nn - int(4) / &eta * &pstar;
    let s_bar: Vec<usize> = (0..m).filter(|&j| p.0[j] >= threshold).map(|j| j + 1).collect();
    let aggregate_bound = (&one - &rho) / &nn * &mu * e_sum + &rho / &nn * (&one - int(m) * &eps)
        - &eps * &rho / &nn * int(s_bar.len());
    let aggregate = expected_principal_utility(&ri.inst, &ri.dti, p);
    let aggregate_holds = aggregate <= aggregate_bound;
    if !aggregate_holds {
        violations += 1;
    }

    let bar_coefficients = (1..=n)
        .map(|i| s(&(-(&mu / int(2 * i)) * (int(2) + &eta / int(2)))))
        .collect();
    let coef = int(2) / pow(n, 7) - &one / (int(2) * pow(n, 6)) + int(4) / pow(n, 12);
    let size_conditions = SizeConditions {
        pstar_coefficient_negative: coef < Rational::zero(),
        pstar_coefficient_bound: s(&coef),
        move_step_holds: &one / (int(16) * pow(n, 14) * int(m)) >= gap(n, m),
    };

    Ok(OnlyIfReport {
        classes,
        types,
        theta0,
        s_bar,
        aggregate_utility: s(&aggregate),
        aggregate_bound: s(&aggregate_bound),
        aggregate_holds,
        bar_coefficients,
        size_conditions,
        violations,
    })
}

/// The four-set example system on three elements: `{1,2}, {2}, {1,3}, {3}`.
pub fn example_system() -> SetCoverInput {
    SetCoverInput::parse(3, "1,2;2;1,3;3").expect("valid literal")
}
