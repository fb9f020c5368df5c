//! CNF encoding of feature models and a small exhaustive solver.
//!
//! Feature models in this crate stay small (tens of features), so instead of
//! pulling in an industrial CDCL solver the module implements plain DPLL:
//! unit propagation to a fixpoint, then branch on the lowest-indexed
//! unassigned variable. That choice is deliberate:
//!
//! * branching false-first on the lowest variable visits satisfying
//!   assignments in lexicographic order of the canonical feature list, which
//!   gives [`enumerate_products`] a stable, documented output order;
//! * branching on a caller-supplied polarity per variable turns the same
//!   search into "find a valid product closest to this candidate", which is
//!   what the generators use to repair random configurations.
//!
//! Variables are feature indices; a satisfying assignment of [`to_cnf`] is
//! exactly a valid product of the model.

use crate::feature_model::{CtcKind, FeatureModel, FeatureSet, GroupKind, Relation};
use thiserror::Error;

/// Hard ceiling on how many products enumeration will materialize or count.
pub const DEFAULT_PRODUCT_CAP: usize = 2_000_000;

/// A literal: a feature-model variable with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn positive(var: usize) -> Lit {
        Lit(var as i32 + 1)
    }

    pub fn negative(var: usize) -> Lit {
        Lit(-(var as i32 + 1))
    }

    pub fn var(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// The literal's value in DIMACS convention: 1-based, sign is polarity.
    pub fn dimacs(self) -> i32 {
        self.0
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

/// An assumed literal passed to satisfiability queries.
pub type Assumption = Lit;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("empty clause")]
    EmptyClause,
    #[error("literal references variable {var} but the formula has {num_vars} variables")]
    VariableOutOfRange { var: usize, num_vars: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("product enumeration exceeded the cap of {cap}")]
    CapExceeded { cap: usize },
}

/// A propositional formula in conjunctive normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize) -> Self {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), CnfError> {
        if lits.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        for &lit in lits {
            if lit.var() >= self.num_vars {
                return Err(CnfError::VariableOutOfRange {
                    var: lit.var(),
                    num_vars: self.num_vars,
                });
            }
        }
        let mut clause = lits.to_vec();
        clause.sort_by_key(|l| l.dimacs());
        clause.dedup();
        self.clauses.push(clause);
        Ok(())
    }

    /// Standard DIMACS CNF rendering, suitable for external solvers.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Encodes a feature model as CNF over its feature indices.
///
/// Clauses, in order: the root is selected; every selected feature implies
/// its parent; mandatory children follow their parents; every group demands
/// a member when its parent is selected, with pairwise exclusions for xor
/// groups; and one clause per cross-tree constraint.
pub fn to_cnf(model: &FeatureModel) -> CnfFormula {
    let n = model.num_features();
    let mut cnf = CnfFormula::new(n);
    let mut add = |lits: &[Lit]| {
        cnf.add_clause(lits)
            .expect("model invariants keep encoded clauses well-formed")
    };
    add(&[Lit::positive(0)]);
    for i in 1..n {
        let parent = model
            .relation(i)
            .parent()
            .expect("non-root features have parents");
        add(&[Lit::negative(i), Lit::positive(parent)]);
        if let Relation::Mandatory { parent } = model.relation(i) {
            add(&[Lit::negative(parent), Lit::positive(i)]);
        }
    }
    for group in model.groups() {
        let mut at_least_one = vec![Lit::negative(group.parent)];
        at_least_one.extend(group.members.iter().map(|&m| Lit::positive(m)));
        add(&at_least_one);
        if group.kind == GroupKind::Xor {
            for (k, &a) in group.members.iter().enumerate() {
                for &b in &group.members[k + 1..] {
                    add(&[Lit::negative(a), Lit::negative(b)]);
                }
            }
        }
    }
    for ctc in model.constraints() {
        match ctc.kind {
            CtcKind::Requires => add(&[Lit::negative(ctc.source), Lit::positive(ctc.target)]),
            CtcKind::Excludes => add(&[Lit::negative(ctc.source), Lit::negative(ctc.target)]),
        }
    }
    cnf
}

const UNASSIGNED: i8 = -1;

struct Solver<'a> {
    cnf: &'a CnfFormula,
    assign: Vec<i8>,
    trail: Vec<usize>,
}

impl<'a> Solver<'a> {
    fn new(cnf: &'a CnfFormula) -> Self {
        Solver {
            cnf,
            assign: vec![UNASSIGNED; cnf.num_vars],
            trail: Vec::with_capacity(cnf.num_vars),
        }
    }

    fn value(&self, lit: Lit) -> Option<bool> {
        match self.assign[lit.var()] {
            UNASSIGNED => None,
            v => Some((v == 1) == lit.is_positive()),
        }
    }

    fn push(&mut self, var: usize, value: bool) {
        debug_assert_eq!(self.assign[var], UNASSIGNED);
        self.assign[var] = value as i8;
        self.trail.push(var);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            self.assign[var] = UNASSIGNED;
        }
    }

    /// Unit-propagates to a fixpoint; false means a clause went empty.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            'clauses: for clause in &self.cnf.clauses {
                let mut unit = None;
                let mut unassigned = 0;
                for &lit in clause {
                    match self.value(lit) {
                        Some(true) => continue 'clauses,
                        Some(false) => {}
                        None => {
                            unassigned += 1;
                            if unassigned > 1 {
                                continue 'clauses;
                            }
                            unit = Some(lit);
                        }
                    }
                }
                match unit {
                    None => return false,
                    Some(lit) => {
                        self.assign[lit.var()] = lit.is_positive() as i8;
                        self.trail.push(lit.var());
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn lowest_unassigned(&self) -> Option<usize> {
        self.assign.iter().position(|&v| v == UNASSIGNED)
    }

    /// Depth-first search over assignments. `prefer[v]` is the polarity tried
    /// first for `v`. The callback returns false to stop the whole search;
    /// `search` mirrors that in its return value.
    fn search<F>(&mut self, prefer: &[bool], emit: &mut F) -> bool
    where
        F: FnMut(&[i8]) -> bool,
    {
        let mark = self.trail.len();
        if !self.propagate() {
            self.undo_to(mark);
            return true;
        }
        let cont = match self.lowest_unassigned() {
            None => emit(&self.assign),
            Some(var) => {
                let first = prefer[var];
                let decision_mark = self.trail.len();
                let mut cont = true;
                for value in [first, !first] {
                    self.push(var, value);
                    cont = self.search(prefer, emit);
                    self.undo_to(decision_mark);
                    if !cont {
                        break;
                    }
                }
                cont
            }
        };
        self.undo_to(mark);
        cont
    }
}

/// Runs the search under assumptions. Returns false if the callback stopped
/// it, true if the space was exhausted. Contradictory assumptions simply
/// yield no solutions.
fn run<F>(cnf: &CnfFormula, assumptions: &[Assumption], prefer: &[bool], emit: &mut F) -> bool
where
    F: FnMut(&[i8]) -> bool,
{
    assert_eq!(prefer.len(), cnf.num_vars, "one preference per variable");
    let mut solver = Solver::new(cnf);
    for &lit in assumptions {
        assert!(
            lit.var() < cnf.num_vars,
            "assumption variable {} out of range",
            lit.var()
        );
        match solver.value(lit) {
            Some(false) => return true,
            Some(true) => {}
            None => solver.push(lit.var(), lit.is_positive()),
        }
    }
    solver.search(prefer, emit)
}

/// Is the formula satisfiable with every assumption literal forced?
pub fn is_satisfiable(cnf: &CnfFormula, assumptions: &[Assumption]) -> bool {
    let prefer = vec![false; cnf.num_vars];
    let mut found = false;
    run(cnf, assumptions, &prefer, &mut |_| {
        found = true;
        false
    });
    found
}

/// First solution found when branching toward `prefer`, or `None` if
/// unsatisfiable. With an all-false preference this is the lexicographically
/// least solution; in general it is a solution biased toward the preferred
/// polarities, which makes it a cheap "repair this candidate" primitive.
pub fn solve_with_preference(
    cnf: &CnfFormula,
    assumptions: &[Assumption],
    prefer: &[bool],
) -> Option<Vec<bool>> {
    let mut solution = None;
    run(cnf, assumptions, prefer, &mut |assign| {
        solution = Some(assign.iter().map(|&v| v == 1).collect());
        false
    });
    solution
}

/// All valid products of the model, in lexicographic order of the canonical
/// feature list (unselected before selected, feature 0 most significant).
pub fn enumerate_products(model: &FeatureModel) -> Result<Vec<FeatureSet>, SolveError> {
    enumerate_products_capped(model, DEFAULT_PRODUCT_CAP)
}

pub fn enumerate_products_capped(
    model: &FeatureModel,
    cap: usize,
) -> Result<Vec<FeatureSet>, SolveError> {
    let cnf = to_cnf(model);
    let prefer = vec![false; cnf.num_vars];
    let mut products = Vec::new();
    let mut exceeded = false;
    run(&cnf, &[], &prefer, &mut |assign| {
        if products.len() >= cap {
            exceeded = true;
            return false;
        }
        let values: Vec<bool> = assign.iter().map(|&v| v == 1).collect();
        products.push(FeatureSet::from_bools(&values));
        true
    });
    if exceeded {
        return Err(SolveError::CapExceeded { cap });
    }
    Ok(products)
}

/// Number of valid products, without materializing them.
pub fn count_products(model: &FeatureModel) -> Result<u64, SolveError> {
    count_products_capped(model, DEFAULT_PRODUCT_CAP)
}

pub fn count_products_capped(model: &FeatureModel, cap: usize) -> Result<u64, SolveError> {
    let cnf = to_cnf(model);
    let prefer = vec![false; cnf.num_vars];
    let mut count = 0u64;
    let mut exceeded = false;
    run(&cnf, &[], &prefer, &mut |_| {
        count += 1;
        if count > cap as u64 {
            exceeded = true;
            return false;
        }
        true
    });
    if exceeded {
        return Err(SolveError::CapExceeded { cap });
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::feature_model::FeatureModel;

    fn gpl() -> FeatureModel {
        FeatureModel::parse(corpus::GPL_FM).unwrap()
    }

    fn lit_by_name(model: &FeatureModel, name: &str, positive: bool) -> Lit {
        let var = model.features().index_of(name).unwrap();
        if positive {
            Lit::positive(var)
        } else {
            Lit::negative(var)
        }
    }

    fn optional_children(k: usize) -> FeatureModel {
        let mut text = String::from("model chain\nroot R\n");
        for i in 0..k {
            text.push_str(&format!("optional C{i} R\n"));
        }
        FeatureModel::parse(&text).unwrap()
    }

    #[test]
    fn literal_encoding_round_trips() {
        let lit = Lit::positive(7);
        assert_eq!(lit.var(), 7);
        assert!(lit.is_positive());
        assert_eq!(lit.dimacs(), 8);
        let neg = !lit;
        assert_eq!(neg.var(), 7);
        assert!(!neg.is_positive());
        assert_eq!(neg.dimacs(), -8);
        assert_eq!(!neg, lit);
    }

    #[test]
    fn add_clause_rejects_bad_input() {
        let mut cnf = CnfFormula::new(2);
        assert_eq!(cnf.add_clause(&[]).unwrap_err(), CnfError::EmptyClause);
        assert_eq!(
            cnf.add_clause(&[Lit::positive(2)]).unwrap_err(),
            CnfError::VariableOutOfRange { var: 2, num_vars: 2 }
        );
        cnf.add_clause(&[Lit::positive(0), Lit::positive(0)]).unwrap();
        assert_eq!(cnf.num_clauses(), 1);
    }

    #[test]
    fn root_only_model_encodes_to_a_unit_clause() {
        let model = FeatureModel::parse("model tiny\nroot R\n").unwrap();
        let cnf = to_cnf(&model);
        assert_eq!(cnf.num_vars(), 1);
        assert_eq!(cnf.num_clauses(), 1);
        assert_eq!(cnf.to_dimacs(), "p cnf 1 1\n1 0\n");
        let products = enumerate_products(&model).unwrap();
        assert_eq!(products.len(), 1);
        assert!(products[0].is_selected(0));
    }

    #[test]
    fn gpl_clause_inventory() {
        let cnf = to_cnf(&gpl());
        assert_eq!(cnf.num_vars(), 18);
        // 1 root + 17 child-implies-parent + 4 mandatory + (1+1)+(1+1) xor
        // + 1 or + 13 cross-tree constraints.
        assert_eq!(cnf.num_clauses(), 40);
        assert!(cnf.to_dimacs().starts_with("p cnf 18 40\n"));
    }

    #[test]
    fn gpl_has_exactly_73_products() {
        let model = gpl();
        assert_eq!(count_products(&model), Ok(73));
        let products = enumerate_products(&model).unwrap();
        assert_eq!(products.len(), 73);
        for fs in &products {
            assert_eq!(model.validate_feature_set(fs), Ok(true));
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_deterministic() {
        let model = gpl();
        let products = enumerate_products(&model).unwrap();
        let keys: Vec<Vec<bool>> = products
            .iter()
            .map(|fs| (0..18).map(|i| fs.is_selected(i)).collect())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        sorted.dedup();
        assert_eq!(sorted.len(), 73);
        assert_eq!(enumerate_products(&model).unwrap(), products);

        let names = |fs: &FeatureSet| -> Vec<&str> {
            fs.selected().map(|i| model.features().name(i)).collect()
        };
        assert_eq!(
            names(&products[0]),
            ["GPL", "Driver", "Benchmark", "GraphType", "Undirected", "Search", "BFS", "Algorithms", "CC"]
        );
        assert_eq!(
            names(&products[72]),
            [
                "GPL",
                "Driver",
                "Benchmark",
                "GraphType",
                "Directed",
                "Weight",
                "Search",
                "DFS",
                "Algorithms",
                "Num",
                "SCC",
                "Cycle",
                "Shortest"
            ]
        );
    }

    #[test]
    fn satisfiability_under_assumptions() {
        let model = gpl();
        let cnf = to_cnf(&model);
        assert!(is_satisfiable(&cnf, &[]));
        assert!(is_satisfiable(
            &cnf,
            &[
                lit_by_name(&model, "Kruskal", true),
                lit_by_name(&model, "DFS", true)
            ]
        ));
        assert!(!is_satisfiable(
            &cnf,
            &[
                lit_by_name(&model, "Directed", false),
                lit_by_name(&model, "Undirected", false)
            ]
        ));
        assert!(!is_satisfiable(
            &cnf,
            &[
                lit_by_name(&model, "Prim", true),
                lit_by_name(&model, "Kruskal", true)
            ]
        ));
        // Contradictory assumptions are unsatisfiable, not an error.
        assert!(!is_satisfiable(
            &cnf,
            &[
                lit_by_name(&model, "Weight", true),
                lit_by_name(&model, "Weight", false)
            ]
        ));
    }

    #[test]
    fn assumption_monotonicity_on_gpl() {
        let model = gpl();
        let cnf = to_cnf(&model);
        for i in 0..model.num_features() {
            // No dead features: every single selection is satisfiable.
            assert!(is_satisfiable(&cnf, &[Lit::positive(i)]));
            for j in 0..model.num_features() {
                let pair = [Lit::positive(i), Lit::positive(j)];
                if is_satisfiable(&cnf, &pair) {
                    assert!(is_satisfiable(&cnf, &pair[..1]));
                }
            }
        }
    }

    #[test]
    fn preference_steers_the_first_solution() {
        let model = gpl();
        let cnf = to_cnf(&model);
        let low = solve_with_preference(&cnf, &[], &vec![false; 18]).unwrap();
        let high = solve_with_preference(&cnf, &[], &vec![true; 18]).unwrap();
        let products = enumerate_products(&model).unwrap();
        let as_bools = |fs: &FeatureSet| -> Vec<bool> { (0..18).map(|i| fs.is_selected(i)).collect() };
        assert_eq!(low, as_bools(&products[0]));
        assert_eq!(high, as_bools(&products[72]));
        // An unsatisfiable query yields None.
        assert_eq!(
            solve_with_preference(
                &cnf,
                &[
                    lit_by_name(&model, "Directed", true),
                    lit_by_name(&model, "Undirected", true)
                ],
                &vec![false; 18]
            ),
            None
        );
    }

    #[test]
    fn independent_optional_features_multiply() {
        for k in [0usize, 1, 5, 10] {
            let model = optional_children(k);
            assert_eq!(count_products(&model), Ok(1 << k));
        }
    }

    #[test]
    fn caps_are_enforced() {
        let model = optional_children(4); // 16 products
        assert_eq!(
            enumerate_products_capped(&model, 10).unwrap_err(),
            SolveError::CapExceeded { cap: 10 }
        );
        assert_eq!(
            count_products_capped(&model, 10).unwrap_err(),
            SolveError::CapExceeded { cap: 10 }
        );
        assert_eq!(enumerate_products_capped(&model, 16).unwrap().len(), 16);
        assert_eq!(count_products_capped(&model, 16), Ok(16));
    }

    #[test]
    fn solver_agrees_with_exhaustive_validation() {
        let text = "model m\nroot R\nxor R A B\noptional C R\nor C D E\nrequires D A\nexcludes E B\n";
        let model = FeatureModel::parse(text).unwrap();
        let n = model.num_features();
        let mut expected = Vec::new();
        for bits in 0..(1u32 << n) {
            let values: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let fs = FeatureSet::from_bools(&values);
            if model.validate_feature_set(&fs).unwrap() {
                expected.push(fs);
            }
        }
        let mut got = enumerate_products(&model).unwrap();
        let key = |fs: &FeatureSet| fs.selected().collect::<Vec<_>>();
        got.sort_by_key(key);
        expected.sort_by_key(key);
        assert_eq!(got, expected);
    }
}
