//! Exact two-phase simplex over rationals.
//!
//! Pivoting follows Bland's least-index rule in both phases, so the method
//! terminates on degenerate problems. The tableau is dense; the latent
//! systems here have at most 17 rows and (after merging identical columns)
//! 64 structural columns.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::latent::{ConstraintSystem, LatentDistribution, LinearFunctional};
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("linear program over the latent simplex came out unbounded; the constraint system is malformed")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `optimize cost . x` subject to `rows x = rhs`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    pub cost: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: Option<Rational>,
    pub x: Option<Vec<Rational>>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        LpSolution { status, value: None, x: None }
    }
}

impl StandardForm {
    pub fn new(rows: Vec<Vec<Rational>>, rhs: Vec<Rational>, cost: Vec<Rational>) -> Result<Self, LpError> {
        let n = cost.len();
        if rows.len() != rhs.len() {
            return Err(LpError::Dimension(format!("{} rows but {} right-hand sides", rows.len(), rhs.len())));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(LpError::Dimension(format!("row {i} has {} columns, expected {n}", r.len())));
        }
        Ok(StandardForm { rows, rhs, cost })
    }

    pub fn variables(&self) -> usize {
        self.cost.len()
    }

    pub fn solve(&self, sense: Sense) -> LpSolution {
        let cost: Vec<Rational> = match sense {
            Sense::Minimize => self.cost.clone(),
            Sense::Maximize => self.cost.iter().map(|c| -c).collect(),
        };
        let mut solution = Tableau::new(self).minimize(&cost);
        if sense == Sense::Maximize {
            solution.value = solution.value.map(|v| -v);
        }
        solution
    }

    /// Checks `rows x = rhs` and `x >= 0` exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.variables()
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| {
                let lhs: Rational = row.iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, v)| a * v).sum();
                lhs == *b
            })
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.cost.iter().zip(x).filter(|(c, _)| !c.is_zero()).map(|(c, v)| c * v).sum()
    }
}

struct Tableau {
    /// `m` constraint rows, each `n + m` coefficients followed by the rhs.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    structural: usize,
    active: Vec<bool>,
}

impl Tableau {
    fn new(problem: &StandardForm) -> Self {
        let m = problem.rows.len();
        let n = problem.variables();
        let mut rows = Vec::with_capacity(m);
        for (i, (row, b)) in problem.rows.iter().zip(&problem.rhs).enumerate() {
            let flip = b.is_negative();
            let mut t: Vec<Rational> = row.iter().map(|a| if flip { -a } else { a.clone() }).collect();
            t.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            t.push(if flip { -b } else { b.clone() });
            rows.push(t);
        }
        Tableau { rows, basis: (n..n + m).collect(), structural: n, active: vec![true; m] }
    }

    fn width(&self) -> usize {
        self.rows.first().map_or(self.structural, |r| r.len() - 1)
    }

    fn rhs(&self, r: usize) -> &Rational {
        self.rows[r].last().expect("tableau row has an rhs")
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [Rational]) {
        let inv = self.rows[r][c].recip();
        let support: Vec<usize> = (0..self.rows[r].len()).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &support {
            self.rows[r][j] *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for i in 0..self.rows.len() {
            if i == r || !self.active[i] || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
        }
        if !reduced[c].is_zero() {
            let factor = reduced[c].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                reduced[j] -= delta;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs (with the negated objective in the last slot) for the
    /// given cost vector over all tableau columns.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let w = self.width();
        let mut d: Vec<Rational> = (0..=w).map(|j| cost.get(j).cloned().unwrap_or_else(Rational::zero)).collect();
        for (i, row) in self.rows.iter().enumerate() {
            if !self.active[i] {
                continue;
            }
            let cb = cost.get(self.basis[i]).cloned().unwrap_or_else(Rational::zero);
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    d[j] -= &cb * a;
                }
            }
        }
        d
    }

    /// Bland's rule: entering column is the least index with negative reduced
    /// cost; leaving row minimizes the ratio, ties broken by least basic index.
    fn run(&mut self, reduced: &mut [Rational], allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| reduced[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if !self.active[i] || !self.rows[i][c].is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / &self.rows[i][c];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c, reduced),
                None => return false,
            }
        }
    }

    fn minimize(mut self, cost: &[Rational]) -> LpSolution {
        let n = self.structural;
        let m = self.rows.len();

        // Phase one: minimize the sum of artificials.
        let phase_one: Vec<Rational> =
            (0..n + m).map(|j| if j >= n { Rational::one() } else { Rational::zero() }).collect();
        let mut reduced = self.reduced_costs(&phase_one);
        self.run(&mut reduced, n + m);
        let infeasibility = -reduced.last().expect("objective slot").clone();
        if infeasibility.is_positive() {
            return LpSolution::without_point(LpStatus::Infeasible);
        }

        // Drive remaining artificials out of the basis; rows where that is
        // impossible are linearly dependent and get dropped.
        for r in 0..m {
            if self.basis[r] < n {
                continue;
            }
            match (0..n).find(|&j| !self.rows[r][j].is_zero()) {
                Some(c) => self.pivot(r, c, &mut reduced),
                None => self.active[r] = false,
            }
        }

        let mut reduced = self.reduced_costs(cost);
        if !self.run(&mut reduced, n) {
            return LpSolution::without_point(LpStatus::Unbounded);
        }
        let mut x = vec![Rational::zero(); n];
        for (r, &b) in self.basis.iter().enumerate() {
            if self.active[r] && b < n {
                x[b] = self.rhs(r).clone();
            }
        }
        let value = -reduced.last().expect("objective slot").clone();
        LpSolution { status: LpStatus::Optimal, value: Some(value), x: Some(x) }
    }
}

/// Result of optimizing a functional over a latent system.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub value: Option<Rational>,
    pub witness: Option<LatentDistribution>,
}

/// Optimizes `objective` over latent laws on the admissible cells of
/// `system` that reproduce `targets` (normalization first, then the cells).
///
/// Columns that touch exactly the same rows are merged, keeping only the one
/// with the best objective coefficient; this does not change the optimum.
pub fn solve(
    sense: Sense,
    objective: &LinearFunctional,
    system: &ConstraintSystem,
    targets: &[Rational],
) -> Result<LpOutcome, LpError> {
    if objective.kind != system.kind {
        return Err(LpError::Dimension("objective and constraints live on different systems".into()));
    }
    if targets.len() != system.rows.len() {
        return Err(LpError::Dimension(format!(
            "{} targets for {} constraint rows",
            targets.len(),
            system.rows.len()
        )));
    }

    let mut merged: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for &col in &system.columns {
        let key = system.column_rows(col);
        let c = objective.coefficient(col);
        merged
            .entry(key)
            .and_modify(|best| {
                let b = objective.coefficient(*best);
                let better = match sense {
                    Sense::Minimize => c < b,
                    Sense::Maximize => c > b,
                };
                if better {
                    *best = col;
                }
            })
            .or_insert(col);
    }
    let chosen: Vec<(Vec<usize>, usize)> = merged.into_iter().collect();

    let m = system.rows.len();
    let mut rows = vec![vec![Rational::zero(); chosen.len()]; m];
    for (j, (touch, _)) in chosen.iter().enumerate() {
        for &r in touch {
            rows[r][j] = Rational::one();
        }
    }
    let cost: Vec<Rational> =
        chosen.iter().map(|(_, col)| Rational::from_integer(objective.coefficient(*col).into())).collect();
    let problem = StandardForm::new(rows, targets.to_vec(), cost)?;
    let sol = problem.solve(sense);
    match sol.status {
        LpStatus::Unbounded => Err(LpError::Unbounded),
        LpStatus::Infeasible => Ok(LpOutcome { status: LpStatus::Infeasible, value: None, witness: None }),
        LpStatus::Optimal => {
            let x = sol.x.expect("optimal solution has a point");
            let mut q = vec![Rational::zero(); system.kind.cell_count()];
            for ((_, col), v) in chosen.iter().zip(x) {
                q[*col] = v;
            }
            let witness = LatentDistribution::new(system.kind, q, system.assumptions)
                .map_err(|e| LpError::Dimension(format!("witness is not a latent law: {e}")))?;
            Ok(LpOutcome { status: LpStatus::Optimal, value: sol.value, witness: Some(witness) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latent::objective_coefficients;
    use crate::observed::{ObservedCell, ObservedDistribution};
    use crate::param::{Arm, AssumptionSet, CausalParameter};
    use crate::{int, ratio};

    fn rvec(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|x| int(*x)).collect()
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let p = StandardForm::new(vec![rvec(&[1, 1, 1, 0]), rvec(&[1, 3, 0, 1])], rvec(&[4, 6]), rvec(&[3, 2, 0, 0]))
            .unwrap();
        let s = p.solve(Sense::Maximize);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value, Some(int(12)));
        let x = s.x.unwrap();
        assert!(p.is_feasible_point(&x));
        assert_eq!(p.objective_at(&x), int(12));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let p = StandardForm::new(vec![rvec(&[1, 1])], rvec(&[-1]), rvec(&[1, 1])).unwrap();
        assert_eq!(p.solve(Sense::Minimize).status, LpStatus::Infeasible);
        let p = StandardForm::new(vec![rvec(&[1, -1])], rvec(&[1]), rvec(&[-1, 0])).unwrap();
        assert_eq!(p.solve(Sense::Minimize).status, LpStatus::Unbounded);
    }

    #[test]
    fn handles_redundant_rows() {
        let p = StandardForm::new(
            vec![rvec(&[1, 1, 0]), rvec(&[2, 2, 0]), rvec(&[0, 0, 1])],
            rvec(&[1, 2, 3]),
            rvec(&[1, 2, 0]),
        )
        .unwrap();
        let s = p.solve(Sense::Minimize);
        assert_eq!(s.value, Some(int(1)));
        assert!(p.is_feasible_point(&s.x.unwrap()));
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(StandardForm::new(vec![rvec(&[1, 1])], rvec(&[1, 2]), rvec(&[1, 1])).is_err());
        assert!(StandardForm::new(vec![rvec(&[1])], rvec(&[1]), rvec(&[1, 1])).is_err());
        let sys = ConstraintSystem::population(AssumptionSet::NONE);
        let f = objective_coefficients(CausalParameter::Ate).unwrap();
        assert!(matches!(solve(Sense::Minimize, &f, &sys, &[int(1)]), Err(LpError::Dimension(_))));
    }

    #[test]
    fn degenerate_data_acme_lower_is_zero() {
        let data = ObservedDistribution::from_fn(|c| {
            if c == ObservedCell::new(1, 1, 1, 1) || c == ObservedCell::new(0, 0, 0, 0) {
                int(1)
            } else {
                int(0)
            }
        })
        .unwrap();
        let sys = ConstraintSystem::population(AssumptionSet::NONE);
        let f = objective_coefficients(CausalParameter::Acme(Arm::One)).unwrap();
        let out = solve(Sense::Minimize, &f, &sys, &sys.population_targets(&data)).unwrap();
        assert_eq!(out.value, Some(int(0)));
        let w = out.witness.unwrap();
        assert_eq!(w.implied_observed(), data);
        assert_eq!(f.value(&w), int(0));
    }

    #[test]
    fn witness_reproduces_value_on_uniform() {
        let data = crate::observed::uniform_observed();
        let sys = ConstraintSystem::population("a4".parse().unwrap());
        for p in CausalParameter::POPULATION {
            let f = objective_coefficients(p).unwrap();
            let lo = solve(Sense::Minimize, &f, &sys, &sys.population_targets(&data)).unwrap();
            let hi = solve(Sense::Maximize, &f, &sys, &sys.population_targets(&data)).unwrap();
            let (lo_w, hi_w) = (lo.witness.unwrap(), hi.witness.unwrap());
            assert_eq!(f.value(&lo_w), lo.value.clone().unwrap());
            assert_eq!(f.value(&hi_w), hi.value.clone().unwrap());
            assert_eq!(lo_w.implied_observed(), data);
            assert!(lo.value.unwrap() <= ratio(0, 1));
        }
    }
}
