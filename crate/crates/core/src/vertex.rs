//! Symbolic bounds by vertex enumeration of the dual polyhedron.
//!
//! For a lower bound, `min c.q` over `{A q = b, q >= 0}` equals
//! `max b.w` over `P = {w : A^T w <= c}` whenever the primal is feasible, and
//! the maximum is attained at a vertex of `P`. Every vertex `w` therefore
//! contributes the entry `w_0 + sum_r w_r p_r` to the max, with `w_0`
//! attached to the normalization row. Upper bounds negate the objective.
//!
//! `A` has dependent rows (one identity per arm), so `P` contains a line.
//! Fixing the dual coordinates of the dependent rows to zero leaves a pointed
//! polyhedron whose vertices are enumerated with the double description
//! method on the homogenized cone `{(w, t) : A^T w - c t <= 0, t >= 0}`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::latent::{functional_for, ConstraintSystem, LatentDistribution, RowLabel, SystemKind};
use crate::lp::{LpError, LpStatus, Sense, StandardForm};
use crate::observed::{CellLabel, ObservedData};
use crate::par::Execution;
use crate::param::{AssumptionSet, CausalParameter, Direction};
use crate::symbolic::{SymbolicBound, SymbolicExpr};
use crate::{int, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VertexError {
    #[error("integer overflow while combining rays")]
    Overflow,
    #[error("vertex has a non-integer coordinate {0}")]
    NonInteger(String),
    #[error("enumeration cancelled")]
    Cancelled,
    #[error("{0} inequalities exceed the supported 127")]
    TooManyInequalities(usize),
    #[error("cone is not pointed")]
    NotPointed,
    #[error("polyhedron is empty")]
    Empty,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Which inequality the double description inserts next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InsertionOrder {
    /// The one violated by the most current rays.
    #[default]
    MaxCutoff,
    /// The one violated by the fewest current rays.
    MinCutoff,
    /// Index order.
    Lexicographic,
}

impl std::str::FromStr for InsertionOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "max-cutoff" | "maxcutoff" => Ok(InsertionOrder::MaxCutoff),
            "min-cutoff" | "mincutoff" => Ok(InsertionOrder::MinCutoff),
            "lex" | "lexicographic" => Ok(InsertionOrder::Lexicographic),
            other => Err(format!("unknown insertion order `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VertexOptions {
    pub order: InsertionOrder,
    /// Drop inequalities implied by the others before enumerating.
    pub prune_redundant: bool,
    pub execution: Execution,
    pub cancel: Option<Arc<AtomicBool>>,
    /// Also run the envelope pass. One LP per entry, so this dominates the
    /// cost when there are many vertices.
    pub envelope: bool,
}

impl VertexOptions {
    pub fn new() -> Self {
        VertexOptions { prune_redundant: true, ..Default::default() }
    }
}

/// Half-space `a . w <= c`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Inequality {
    pub a: Vec<i64>,
    pub c: i64,
}

/// `{w : a_i . w <= c_i for all i}` in `dimension` coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    pub dimension: usize,
    pub inequalities: Vec<Inequality>,
}

impl Polyhedron {
    pub fn new(dimension: usize, inequalities: Vec<Inequality>) -> Self {
        assert!(inequalities.iter().all(|q| q.a.len() == dimension), "inequality width must match the dimension");
        Polyhedron { dimension, inequalities }
    }

    pub fn contains(&self, w: &[i64]) -> bool {
        self.inequalities.iter().all(|q| dot(&q.a, w) <= i128::from(q.c))
    }
}

/// Dual of one bound problem: coordinates are the latent system's rows,
/// inequalities its admissible cells (in the same order as `cells`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSystem {
    pub parameter: CausalParameter,
    pub assumptions: AssumptionSet,
    pub direction: Direction,
    pub kind: SystemKind,
    pub rows: Vec<RowLabel>,
    pub cells: Vec<usize>,
    pub polyhedron: Polyhedron,
}

/// Builds `{w : A^T w <= c}` for one parameter, assumption set and direction;
/// upper bounds use `-c`.
pub fn build_dual(parameter: CausalParameter, assumptions: AssumptionSet, direction: Direction) -> DualSystem {
    let system = ConstraintSystem::for_parameter(parameter, assumptions);
    let mut objective = functional_for(parameter);
    if direction == Direction::Upper {
        objective = -&objective;
    }
    let dimension = system.rows.len();
    let inequalities = system
        .columns
        .iter()
        .map(|&col| {
            let mut a = vec![0i64; dimension];
            for r in system.column_rows(col) {
                a[r] = 1;
            }
            Inequality { a, c: i64::from(objective.coefficient(col)) }
        })
        .collect();
    DualSystem {
        parameter,
        assumptions,
        direction,
        kind: system.kind,
        rows: system.rows.iter().map(|r| r.label).collect(),
        cells: system.columns.clone(),
        polyhedron: Polyhedron::new(dimension, inequalities),
    }
}

/// Keeps one inequality per distinct left-hand side, the one with the
/// smallest right-hand side.
pub fn merge_dominated(inequalities: &[Inequality]) -> Vec<Inequality> {
    let mut merged: BTreeMap<&[i64], i64> = BTreeMap::new();
    for q in inequalities {
        merged.entry(&q.a).and_modify(|c| *c = (*c).min(q.c)).or_insert(q.c);
    }
    merged.into_iter().map(|(a, c)| Inequality { a: a.to_vec(), c }).collect()
}

/// Greedy basis of the coordinate columns, in index order.
fn coordinate_basis(inequalities: &[Inequality], dimension: usize) -> Vec<usize> {
    let columns: Vec<Vec<i64>> = (0..dimension).map(|k| inequalities.iter().map(|q| q.a[k]).collect()).collect();
    let order: Vec<usize> = (0..dimension).collect();
    independent_subset(&columns, &order, usize::MAX)
}

/// Removes inequalities implied by the remaining ones. `a_i . w <= c_i` is
/// implied iff some `lambda >= 0` has `sum lambda_j a_j = a_i` and
/// `sum lambda_j c_j <= c_i`.
pub fn prune_redundant(inequalities: &[Inequality]) -> Result<Vec<Inequality>, VertexError> {
    let mut kept: Vec<Inequality> = inequalities.to_vec();
    let mut i = 0;
    while i < kept.len() {
        let others: Vec<&Inequality> = kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| q).collect();
        if others.is_empty() {
            break;
        }
        let dim = kept[i].a.len();
        let rows: Vec<Vec<Rational>> = (0..dim).map(|r| others.iter().map(|q| int(q.a[r])).collect()).collect();
        let rhs: Vec<Rational> = kept[i].a.iter().map(|v| int(*v)).collect();
        let cost: Vec<Rational> = others.iter().map(|q| int(q.c)).collect();
        let sol = StandardForm::new(rows, rhs, cost)?.solve(Sense::Minimize);
        let implied = match sol.status {
            LpStatus::Optimal => sol.value.is_some_and(|v| v <= int(kept[i].c)),
            LpStatus::Unbounded => true,
            LpStatus::Infeasible => false,
        };
        if implied {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Ray {
    v: Vec<i64>,
    zero: u128,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    pub inequalities: usize,
    pub after_pruning: usize,
    pub peak_rays: usize,
    pub final_rays: usize,
    pub vertices: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Integer vertices in the polyhedron's coordinates.
    pub vertices: Vec<Vec<i64>>,
    /// Extreme directions of the recession cone.
    pub directions: Vec<Vec<i64>>,
    /// Coordinates fixed to zero to remove the lineality space.
    pub fixed: Vec<usize>,
    pub stats: EnumerationStats,
}

fn dot(h: &[i64], v: &[i64]) -> i128 {
    h.iter().zip(v).map(|(a, b)| i128::from(*a) * i128::from(*b)).sum()
}

fn normalize(v: Vec<i128>) -> Result<Vec<i64>, VertexError> {
    let g = v.iter().fold(0i128, |g, x| g.gcd(x));
    let g = if g == 0 { 1 } else { g };
    v.into_iter().map(|x| i64::try_from(x / g).map_err(|_| VertexError::Overflow)).collect()
}

fn combine(h: &[i64], pos: &Ray, neg: &Ray) -> Result<Vec<i64>, VertexError> {
    let alpha = dot(h, &pos.v);
    let beta = -dot(h, &neg.v);
    let mut out = Vec::with_capacity(pos.v.len());
    for (p, n) in pos.v.iter().zip(&neg.v) {
        let x = alpha
            .checked_mul(i128::from(*n))
            .and_then(|a| beta.checked_mul(i128::from(*p)).and_then(|b| a.checked_add(b)))
            .ok_or(VertexError::Overflow)?;
        out.push(x);
    }
    normalize(out)
}

/// Extreme rays of the simplicial cone `{x : B x <= 0}` for invertible `B`:
/// the columns of `-B^{-1}`, scaled to coprime integers.
fn simplicial_rays(basis: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, VertexError> {
    let d = basis.len();
    let mut m: Vec<Vec<Rational>> = basis
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Rational> = row.iter().map(|x| int(*x)).collect();
            r.extend((0..d).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..d {
        let p = (col..d).find(|&r| !m[r][col].is_zero()).ok_or(VertexError::NotPointed)?;
        m.swap(col, p);
        let inv = m[col][col].recip();
        for x in &mut m[col] {
            *x *= &inv;
        }
        for r in 0..d {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
    }
    let mut rays = Vec::with_capacity(d);
    for k in 0..d {
        let column: Vec<Rational> = (0..d).map(|r| -m[r][d + k].clone()).collect();
        let lcm = column.iter().fold(num_bigint::BigInt::one(), |l, x| l.lcm(x.denom()));
        let scaled: Vec<i128> = column
            .iter()
            .map(|x| (x * Rational::from_integer(lcm.clone())).to_integer().to_i128().ok_or(VertexError::Overflow))
            .collect::<Result<_, _>>()?;
        rays.push(normalize(scaled)?);
    }
    Ok(rays)
}

/// Greedily picks vectors, in `order`, that are linearly independent of the
/// ones already picked; stops after `limit`.
fn independent_subset(vectors: &[Vec<i64>], order: &[usize], limit: usize) -> Vec<usize> {
    let mut reduced: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut chosen = Vec::new();
    for &i in order {
        let mut v: Vec<Rational> = vectors[i].iter().map(|x| int(*x)).collect();
        for (p, b) in &reduced {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            let inv = v[p].recip();
            for x in &mut v {
                *x *= &inv;
            }
            reduced.push((p, v));
            chosen.push(i);
            if chosen.len() == limit {
                break;
            }
        }
    }
    chosen
}

/// Extreme rays of the pointed cone `{x : h_i . x <= 0}` by double
/// description. Returns the rays and the peak intermediate count.
fn double_description(
    rows: &[Vec<i64>],
    options: &VertexOptions,
) -> Result<(Vec<Vec<i64>>, usize), VertexError> {
    if rows.len() > 127 {
        return Err(VertexError::TooManyInequalities(rows.len()));
    }
    let d = rows[0].len();
    // The last row is `-t <= 0`; start from it so the initial cone is in the
    // half-space t >= 0.
    let mut preference: Vec<usize> = vec![rows.len() - 1];
    preference.extend(0..rows.len() - 1);
    let basis = independent_subset(rows, &preference, d);
    if basis.len() < d {
        return Err(VertexError::NotPointed);
    }
    let basis_rows: Vec<Vec<i64>> = basis.iter().map(|&i| rows[i].clone()).collect();
    let initial = simplicial_rays(&basis_rows)?;

    let all_initial: u128 = basis.iter().fold(0, |m, &i| m | (1u128 << i));
    let mut rays: Vec<Ray> = initial
        .into_iter()
        .enumerate()
        .map(|(k, v)| Ray { v, zero: all_initial & !(1u128 << basis[k]) })
        .collect();
    let mut remaining: Vec<usize> = (0..rows.len()).filter(|i| !basis.contains(i)).collect();
    let mut peak = rays.len();

    while !remaining.is_empty() {
        if options.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(VertexError::Cancelled);
        }
        let pick = match options.order {
            InsertionOrder::Lexicographic => 0,
            InsertionOrder::MaxCutoff | InsertionOrder::MinCutoff => {
                let cut = |i: usize| rays.iter().filter(|r| dot(&rows[i], &r.v) > 0).count();
                let scored = remaining.iter().enumerate().map(|(k, &i)| (cut(i), k));
                let best = if options.order == InsertionOrder::MaxCutoff {
                    scored.max_by_key(|(c, k)| (*c, std::cmp::Reverse(*k)))
                } else {
                    scored.min_by_key(|(c, k)| (*c, *k))
                };
                best.map_or(0, |(_, k)| k)
            }
        };
        let row_index = remaining.remove(pick);
        let h = &rows[row_index];
        let bit = 1u128 << row_index;

        let values: Vec<i128> = rays.iter().map(|r| dot(h, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i] > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i] < 0).collect();
        if pos.is_empty() {
            for (r, v) in rays.iter_mut().zip(&values) {
                if *v == 0 {
                    r.zero |= bit;
                }
            }
            continue;
        }

        let current = &rays;
        let adjacent = |p: usize, n: usize| -> bool {
            let common = current[p].zero & current[n].zero;
            if (common.count_ones() as usize) + 2 < d {
                return false;
            }
            !current.iter().enumerate().any(|(k, r)| k != p && k != n && common & !r.zero == 0)
        };
        let produced: Vec<Result<Vec<Ray>, VertexError>> = options.execution.map(&pos, |&p| {
            let mut out = Vec::new();
            for &n in &neg {
                if adjacent(p, n) {
                    let v = combine(h, &current[p], &current[n])?;
                    out.push(Ray { v, zero: (current[p].zero & current[n].zero) | bit });
                }
            }
            Ok(out)
        });

        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for (r, v) in rays.iter().zip(&values) {
            if *v < 0 {
                next.push(r.clone());
            } else if *v == 0 {
                next.push(Ray { v: r.v.clone(), zero: r.zero | bit });
            }
        }
        for batch in produced {
            next.extend(batch?);
        }
        rays = next;
        peak = peak.max(rays.len());
    }
    Ok((rays.into_iter().map(|r| r.v).collect(), peak))
}

/// Enumerates the vertices (and extreme directions) of a polyhedron.
///
/// If the polyhedron contains a line, the coordinates outside a greedy
/// column basis are fixed to zero first; the result is then one point per
/// minimal face, which is all a linear objective bounded on the polyhedron
/// can see.
pub fn enumerate_vertices(poly: &Polyhedron, options: &VertexOptions) -> Result<Enumeration, VertexError> {
    let mut stats = EnumerationStats { inequalities: poly.inequalities.len(), ..Default::default() };
    let kept = coordinate_basis(&poly.inequalities, poly.dimension);
    let projected: Vec<Inequality> = poly
        .inequalities
        .iter()
        .map(|q| Inequality { a: kept.iter().map(|&k| q.a[k]).collect(), c: q.c })
        .collect();
    let mut inequalities = merge_dominated(&projected);
    if options.prune_redundant {
        inequalities = prune_redundant(&inequalities)?;
    }
    stats.after_pruning = inequalities.len();

    let d = kept.len();
    let mut rows: Vec<Vec<i64>> = inequalities
        .iter()
        .map(|q| {
            let mut h = q.a.clone();
            h.push(-q.c);
            h
        })
        .collect();
    let mut t_row = vec![0i64; d + 1];
    t_row[d] = -1;
    rows.push(t_row);

    let (rays, peak) = double_description(&rows, options)?;
    stats.peak_rays = peak;
    stats.final_rays = rays.len();

    let lift = |w: &[i64]| -> Vec<i64> {
        let mut full = vec![0i64; poly.dimension];
        for (&k, x) in kept.iter().zip(w) {
            full[k] = *x;
        }
        full
    };
    let mut vertices = BTreeSet::new();
    let mut directions = BTreeSet::new();
    for ray in rays {
        let t = ray[d];
        if t == 0 {
            directions.insert(lift(&ray[..d]));
            continue;
        }
        let mut w = Vec::with_capacity(d);
        for x in &ray[..d] {
            if x % t != 0 {
                return Err(VertexError::NonInteger(format!("{x}/{t}")));
            }
            w.push(x / t);
        }
        vertices.insert(lift(&w));
    }
    if vertices.is_empty() {
        return Err(VertexError::Empty);
    }
    stats.vertices = vertices.len();
    let fixed = (0..poly.dimension).filter(|k| !kept.contains(k)).collect();
    Ok(Enumeration { vertices: vertices.into_iter().collect(), directions: directions.into_iter().collect(), fixed, stats })
}

/// Turns dual vertices into the entries of the symbolic bound. Duplicates
/// (after canonicalization) collapse.
pub fn vertices_to_symbolic(dual: &DualSystem, enumeration: &Enumeration) -> SymbolicBound {
    let mut entries = BTreeSet::new();
    for w in &enumeration.vertices {
        let mut constant = 0;
        let mut terms = Vec::new();
        for (label, coef) in dual.rows.iter().zip(w) {
            match label {
                RowLabel::Normalization => constant += coef,
                RowLabel::Cell(cell) => terms.push((*cell, *coef)),
            }
        }
        let expr = SymbolicExpr::from_terms(constant, terms);
        entries.insert(if dual.direction == Direction::Upper { expr.negate() } else { expr });
    }
    SymbolicBound::new(dual.direction, entries.into_iter().collect())
}

/// Value of an expression at the data implied by one latent cell.
fn value_at_cell(expr: &SymbolicExpr, kind: SystemKind, cell: usize) -> Rational {
    let point = LatentDistribution::point_mass(kind, cell);
    let value = match kind {
        SystemKind::Population => expr.evaluate(&ObservedData::Population(&point.implied_observed())),
        SystemKind::Complier => expr.evaluate(&ObservedData::Local(&point.implied_local(Rational::one()))),
    };
    value.expect("expression family matches the system")
}

/// Drops entries that never strictly win over the data compatible with the
/// assumptions. Entries are visited in order and tested against the
/// survivors so far.
pub fn envelope(bound: &SymbolicBound, kind: SystemKind, assumptions: AssumptionSet) -> Result<SymbolicBound, VertexError> {
    let system = match kind {
        SystemKind::Population => ConstraintSystem::population(assumptions),
        SystemKind::Complier => ConstraintSystem::complier(assumptions),
    };
    let mut images: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for &col in &system.columns {
        images.entry(system.column_rows(col)).or_insert(col);
    }
    let cells: Vec<usize> = images.into_values().collect();
    let values: Vec<Vec<Rational>> =
        bound.entries.iter().map(|e| cells.iter().map(|&c| value_at_cell(e, kind, c)).collect()).collect();

    let mut alive: Vec<bool> = vec![true; bound.entries.len()];
    for e in 0..bound.entries.len() {
        let rivals: Vec<usize> = (0..bound.entries.len()).filter(|&f| f != e && alive[f]).collect();
        if rivals.is_empty() {
            continue;
        }
        let n = cells.len();
        let width = n + 2 + rivals.len();
        let mut rows = Vec::with_capacity(1 + rivals.len());
        let mut norm = vec![Rational::zero(); width];
        for x in norm.iter_mut().take(n) {
            *x = Rational::one();
        }
        rows.push(norm);
        for (k, &f) in rivals.iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            for j in 0..n {
                let gap = &values[e][j] - &values[f][j];
                row[j] = if bound.direction == Direction::Lower { gap } else { -gap };
            }
            row[n] = -Rational::one();
            row[n + 1] = Rational::one();
            row[n + 2 + k] = -Rational::one();
            rows.push(row);
        }
        let mut rhs = vec![Rational::zero(); rows.len()];
        rhs[0] = Rational::one();
        let mut cost = vec![Rational::zero(); width];
        cost[n] = Rational::one();
        cost[n + 1] = -Rational::one();
        let sol = StandardForm::new(rows, rhs, cost)?.solve(Sense::Maximize);
        let never_wins = match sol.status {
            LpStatus::Optimal => !sol.value.expect("optimal value").is_positive(),
            LpStatus::Infeasible => true,
            LpStatus::Unbounded => return Err(VertexError::Lp(LpError::Unbounded)),
        };
        if never_wins {
            alive[e] = false;
        }
    }
    let entries = bound.entries.iter().zip(&alive).filter(|(_, a)| **a).map(|(e, _)| e.clone()).collect();
    Ok(SymbolicBound::new(bound.direction, entries))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub parameter: CausalParameter,
    pub assumptions: AssumptionSet,
    /// One entry per dual vertex.
    pub full: SymbolicBound,
    /// `full` with entries that never bind removed, when requested.
    pub envelope: Option<SymbolicBound>,
    pub stats: EnumerationStats,
}

/// Derives the symbolic bound for one parameter, assumption set and
/// direction.
pub fn derive(
    parameter: CausalParameter,
    assumptions: AssumptionSet,
    direction: Direction,
    options: &VertexOptions,
) -> Result<Derivation, VertexError> {
    let dual = build_dual(parameter, assumptions, direction);
    let enumeration = enumerate_vertices(&dual.polyhedron, options)?;
    let full = vertices_to_symbolic(&dual, &enumeration);
    let envelope = if options.envelope { Some(envelope(&full, dual.kind, assumptions)?) } else { None };
    Ok(Derivation { parameter, assumptions, full, envelope, stats: enumeration.stats })
}

/// Latent cell at which `entry` lies strictly on the wrong side of the
/// parameter, if any. Entries and parameters are linear in the latent law,
/// so checking point masses on admissible cells is enough: `None` means the
/// entry is a valid bound under `assumptions`.
pub fn invalidity_witness(
    entry: &SymbolicExpr,
    parameter: CausalParameter,
    assumptions: AssumptionSet,
    direction: Direction,
) -> Option<usize> {
    let kind = if parameter.is_local() { SystemKind::Complier } else { SystemKind::Population };
    let truth = functional_for(parameter);
    crate::latent::admissible_indices(kind, assumptions).into_iter().find(|&cell| {
        let value = value_at_cell(entry, kind, cell);
        let theta = int(i64::from(truth.coefficient(cell)));
        match direction {
            Direction::Lower => value > theta,
            Direction::Upper => value < theta,
        }
    })
}

/// Cells whose dual coordinates were fixed to zero.
pub fn dropped_rows(dual: &DualSystem, enumeration: &Enumeration) -> Vec<CellLabel> {
    enumeration
        .fixed
        .iter()
        .filter_map(|&k| match dual.rows[k] {
            RowLabel::Cell(c) => Some(c),
            RowLabel::Normalization => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve;
    use crate::observed::{LocalCell, ObservedCell};
    use crate::param::Arm;
    use crate::sim::SplitMix64;

    fn a(s: &str) -> AssumptionSet {
        s.parse().unwrap()
    }

    #[test]
    fn dual_shapes() {
        let dual = build_dual(CausalParameter::Lacme(Arm::One), a("a4"), Direction::Lower);
        assert_eq!((dual.polyhedron.dimension, dual.polyhedron.inequalities.len()), (9, 64));
        let dual = build_dual(CausalParameter::Acme(Arm::One), a("a4"), Direction::Lower);
        assert_eq!((dual.polyhedron.dimension, dual.polyhedron.inequalities.len()), (17, 192));
        let dual = build_dual(CausalParameter::Acme(Arm::One), a("a4,a5"), Direction::Lower);
        assert_eq!((dual.polyhedron.dimension, dual.polyhedron.inequalities.len()), (17, 144));
        assert!(dual.polyhedron.inequalities.iter().all(|q| q.a.iter().filter(|x| **x == 1).count() == 3));
    }

    #[test]
    fn dropped_rows_are_the_pivots() {
        let dual = build_dual(CausalParameter::Acme(Arm::One), AssumptionSet::NONE, Direction::Lower);
        let e = enumerate_vertices(&dual.polyhedron, &VertexOptions::new()).unwrap();
        assert_eq!(
            dropped_rows(&dual, &e),
            vec![CellLabel::Observed(ObservedCell::new(1, 1, 1, 0)), CellLabel::Observed(ObservedCell::new(1, 1, 1, 1))]
        );
        let dual = build_dual(CausalParameter::Lacme(Arm::Zero), a("a4"), Direction::Upper);
        let e = enumerate_vertices(&dual.polyhedron, &VertexOptions::new()).unwrap();
        assert_eq!(
            dropped_rows(&dual, &e),
            vec![CellLabel::Local(LocalCell::new(1, 1, 0)), CellLabel::Local(LocalCell::new(1, 1, 1))]
        );
        assert!(e.vertices.iter().all(|w| dual.polyhedron.contains(w)));
    }

    #[test]
    fn insertion_orders_agree() {
        let dual = build_dual(CausalParameter::Lacme(Arm::One), a("a4"), Direction::Lower);
        let mut seen = Vec::new();
        for order in [InsertionOrder::MaxCutoff, InsertionOrder::MinCutoff, InsertionOrder::Lexicographic] {
            for prune in [true, false] {
                let opts = VertexOptions { order, prune_redundant: prune, ..VertexOptions::new() };
                seen.push(enumerate_vertices(&dual.polyhedron, &opts).unwrap().vertices);
            }
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn local_bounds_match_lp() {
        let mut rng = SplitMix64::new(7);
        for s in ["a4", "a4,a5", "a4,a6,a7"] {
            let s = a(s);
            for dir in [Direction::Lower, Direction::Upper] {
                let opts = VertexOptions { envelope: true, ..VertexOptions::new() };
                let d = derive(CausalParameter::Lacme(Arm::One), s, dir, &opts).unwrap();
                let env = d.envelope.as_ref().unwrap();
                let sys = ConstraintSystem::complier(s);
                let f = functional_for(CausalParameter::Lacme(Arm::One));
                for _ in 0..10 {
                    let q = crate::sim::sample_latent(&mut rng, SystemKind::Complier, s);
                    let data = q.implied_local(Rational::one());
                    let sense = if dir == Direction::Lower { Sense::Minimize } else { Sense::Maximize };
                    let lp = solve(sense, &f, &sys, &sys.complier_targets(&data)).unwrap().value.unwrap();
                    let src = ObservedData::Local(&data);
                    assert_eq!(d.full.evaluate(&src).unwrap().0, lp);
                    assert_eq!(env.evaluate(&src).unwrap().0, lp);
                }
            }
        }
    }

    #[test]
    fn cancellation_is_honoured() {
        let dual = build_dual(CausalParameter::Lacme(Arm::One), a("a4"), Direction::Lower);
        let flag = Arc::new(AtomicBool::new(true));
        let opts = VertexOptions { cancel: Some(flag), prune_redundant: false, ..VertexOptions::new() };
        assert_eq!(enumerate_vertices(&dual.polyhedron, &opts), Err(VertexError::Cancelled));
    }

    #[test]
    fn prune_keeps_the_polyhedron() {
        let ineq = vec![
            Inequality { a: vec![1, 0], c: 1 },
            Inequality { a: vec![0, 1], c: 1 },
            Inequality { a: vec![1, 1], c: 3 },
            Inequality { a: vec![-1, 0], c: 0 },
        ];
        let kept = prune_redundant(&ineq).unwrap();
        assert_eq!(kept.len(), 3);
        assert!(!kept.contains(&Inequality { a: vec![1, 1], c: 3 }));
    }

    #[test]
    fn toy_polyhedra() {
        let segment = Polyhedron::new(1, vec![Inequality { a: vec![1], c: 1 }, Inequality { a: vec![-1], c: 0 }]);
        let e = enumerate_vertices(&segment, &VertexOptions::new()).unwrap();
        assert_eq!(e.vertices, vec![vec![0], vec![1]]);

        let square = Polyhedron::new(
            2,
            vec![
                Inequality { a: vec![1, 0], c: 1 },
                Inequality { a: vec![-1, 0], c: 1 },
                Inequality { a: vec![0, 1], c: 1 },
                Inequality { a: vec![0, -1], c: 1 },
            ],
        );
        let e = enumerate_vertices(&square, &VertexOptions::new()).unwrap();
        assert_eq!(e.vertices, vec![vec![-1, -1], vec![-1, 1], vec![1, -1], vec![1, 1]]);
        assert!(e.directions.is_empty() && e.fixed.is_empty());

        let empty = Polyhedron::new(1, vec![Inequality { a: vec![1], c: -1 }, Inequality { a: vec![-1], c: 0 }]);
        assert_eq!(enumerate_vertices(&empty, &VertexOptions::new()), Err(VertexError::Empty));
    }

    #[test]
    fn origin_vertex_renders_as_zero() {
        let dual = build_dual(CausalParameter::Acme(Arm::One), a("a4,a5,a6,a7"), Direction::Lower);
        let e = Enumeration { vertices: vec![vec![0; 17]], directions: vec![], fixed: vec![], stats: Default::default() };
        assert_eq!(vertices_to_symbolic(&dual, &e).to_string(), "max{0}");
    }
}
