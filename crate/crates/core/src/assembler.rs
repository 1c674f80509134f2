//! Rank-constrained assembly of `X` from row candidates and per-column decoding.
//!
//! Every row of `X` must come from the sparse Diophantine solution set `F`.
//! One copy of `F` is kept per row. Columns are decoded left to right with the
//! sphere decoder, each coordinate restricted to the values still present at
//! that position in its row's copy; the chosen column then prunes every copy to
//! the vectors that agree with it. The search is depth-first over the candidate
//! lists of all columns, so once the last column is fixed every copy holds exactly
//! one vector and `X` is read off and rank-checked.
//!
//! The search is exhaustive inside the current radius and keeps the cheapest
//! rank-`N` matrix seen, which makes the result optimal once a final sweep at the
//! radius of the incumbent objective has run.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dioph::{l0_norm, solve_diophantine_sparse, Alphabet};
use crate::error::{CilsError, Result};
use crate::intlin::{int_rank, IntMatrix};
use crate::spheredec::{
    residual_sq, CandidateSets, RealMatrix, RealVector, SphereCandidate, SphereDecoder,
};

/// Problem data for `min ‖Y − GX‖²` with the alphabet, `A·Xᵀ = 0`, row sparsity and rank constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    /// `M×L`
    pub y: RealMatrix,
    /// `M×N`
    pub g: RealMatrix,
    /// `P×L`
    pub a: IntMatrix,
    pub alphabet: Alphabet,
    /// Maximum nonzeros per row of `X`.
    pub k: usize,
    /// Required rank of `X`, equal to its number of rows.
    pub rank: usize,
    /// Initial search radius.
    pub d0: Option<f64>,
}

impl ProblemInstance {
    pub fn new(
        y: RealMatrix,
        g: RealMatrix,
        a: IntMatrix,
        alphabet: Alphabet,
        k: usize,
        rank: usize,
        d0: Option<f64>,
    ) -> Result<Self> {
        let inst = ProblemInstance {
            y,
            g,
            a,
            alphabet,
            k,
            rank,
            d0,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, l) = self.y.shape();
        let dim = |msg: String| Err(CilsError::DimensionMismatch(msg));
        if m == 0 || l == 0 {
            return dim(format!("Y must be nonempty, got {m}x{l}"));
        }
        if self.g.nrows() != m {
            return dim(format!("G has {} rows, Y has {m}", self.g.nrows()));
        }
        if self.g.ncols() != self.rank {
            return dim(format!(
                "G has {} columns, target rank N is {}",
                self.g.ncols(),
                self.rank
            ));
        }
        if self.a.cols() != l {
            return dim(format!("A has {} columns, Y has {l}", self.a.cols()));
        }
        if self.k > l {
            return dim(format!("K = {} exceeds L = {l}", self.k));
        }
        if self.rank == 0 || self.rank > l {
            return dim(format!("target rank N = {} must be in 1..={l}", self.rank));
        }
        if !self.y.iter().chain(self.g.iter()).all(|v| v.is_finite()) {
            return Err(CilsError::InvalidArgument("Y and G must be finite".into()));
        }
        if let Some(d) = self.d0 {
            if !(d.is_finite() && d > 0.0) {
                return Err(CilsError::InvalidArgument(format!(
                    "initial radius must be positive, got {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.y.nrows()
    }

    pub fn l(&self) -> usize {
        self.y.ncols()
    }

    pub fn n(&self) -> usize {
        self.rank
    }
}

/// Per-row copies of the candidate set, each pruned independently.
///
/// The vectors themselves are shared; a copy is a list of indices into them, so
/// pruning produces a new bundle and leaves the old one intact for backtracking.
#[derive(Debug, Clone)]
pub struct RowTreeBundle {
    vectors: Arc<Vec<Vec<i64>>>,
    members: Vec<Vec<u32>>,
}

impl RowTreeBundle {
    /// `copies` copies of the full candidate set.
    pub fn new(vectors: Vec<Vec<i64>>, copies: usize) -> Self {
        let all: Vec<u32> = (0..vectors.len() as u32).collect();
        RowTreeBundle {
            vectors: Arc::new(vectors),
            members: vec![all; copies],
        }
    }

    pub fn rows(&self) -> usize {
        self.members.len()
    }

    pub fn tree_len(&self, i: usize) -> usize {
        self.members[i].len()
    }

    /// Surviving vectors of copy `i`.
    pub fn tree(&self, i: usize) -> impl Iterator<Item = &[i64]> + '_ {
        self.members[i]
            .iter()
            .map(move |&m| self.vectors[m as usize].as_slice())
    }

    pub fn is_singleton(&self, i: usize) -> bool {
        self.members[i].len() == 1
    }

    /// One vector per copy, if every copy is a singleton.
    pub fn assembled(&self) -> Option<Vec<Vec<i64>>> {
        self.members
            .iter()
            .map(|m| match m.as_slice() {
                [only] => Some(self.vectors[*only as usize].clone()),
                _ => None,
            })
            .collect()
    }
}

/// Per-row sets of values still available at column `j`.
pub fn derive_column_sets(bundle: &RowTreeBundle, j: usize) -> Result<CandidateSets> {
    let mut sets = Vec::with_capacity(bundle.rows());
    for i in 0..bundle.rows() {
        let mut vals: Vec<i64> = bundle.tree(i).map(|v| v[j]).collect();
        if vals.is_empty() {
            return Err(CilsError::EmptyTree { row: i });
        }
        vals.sort_unstable();
        vals.dedup();
        sets.push(Alphabet::new(vals)?);
    }
    CandidateSets::new(sets)
}

/// Keeps, in each copy with more than one vector, the vectors whose entry `j`
/// equals `x_c[i]`. Singleton copies are left alone.
pub fn prune_with_column(bundle: &RowTreeBundle, j: usize, x_c: &[i64]) -> RowTreeBundle {
    assert_eq!(
        x_c.len(),
        bundle.rows(),
        "column length must equal the number of rows"
    );
    let members = bundle
        .members
        .iter()
        .zip(x_c)
        .map(|(m, &want)| {
            if m.len() <= 1 {
                m.clone()
            } else {
                m.iter()
                    .copied()
                    .filter(|&idx| bundle.vectors[idx as usize][j] == want)
                    .collect()
            }
        })
        .collect();
    RowTreeBundle {
        vectors: Arc::clone(&bundle.vectors),
        members,
    }
}

/// `‖Y − GX‖²` over all entries.
pub fn objective(y: &RealMatrix, g: &RealMatrix, x: &IntMatrix) -> Result<f64> {
    let rows = x.to_i64_rows()?;
    objective_rows(y, g, &rows)
}

/// [`objective`] with `X` given as rows of machine integers.
pub fn objective_rows(y: &RealMatrix, g: &RealMatrix, rows: &[Vec<i64>]) -> Result<f64> {
    if g.nrows() != y.nrows()
        || g.ncols() != rows.len()
        || rows.iter().any(|r| r.len() != y.ncols())
    {
        return Err(CilsError::DimensionMismatch(format!(
            "Y {}x{}, G {}x{}, X with {} rows do not line up",
            y.nrows(),
            y.ncols(),
            g.nrows(),
            g.ncols(),
            rows.len()
        )));
    }
    let mut total = 0.0;
    let mut col = vec![0i64; rows.len()];
    for j in 0..y.ncols() {
        for (c, r) in col.iter_mut().zip(rows) {
            *c = r[j];
        }
        total += residual_sq(&y.column(j).clone_owned(), g, &col);
    }
    Ok(total)
}

/// Checks every constraint of the problem on `x`; returns the first violation.
pub fn verify_solution(inst: &ProblemInstance, x: &IntMatrix) -> std::result::Result<(), String> {
    if x.rows() != inst.rank || x.cols() != inst.l() {
        return Err(format!(
            "X is {}x{}, expected {}x{}",
            x.rows(),
            x.cols(),
            inst.rank,
            inst.l()
        ));
    }
    let rows = x.to_i64_rows().map_err(|e| e.to_string())?;
    for (i, r) in rows.iter().enumerate() {
        if let Some(v) = r.iter().find(|&&v| !inst.alphabet.contains(v)) {
            return Err(format!("row {i} has entry {v} outside the alphabet"));
        }
        if l0_norm(r) > inst.k {
            return Err(format!(
                "row {i} has {} nonzeros, K = {}",
                l0_norm(r),
                inst.k
            ));
        }
    }
    let ax = inst.a.mul(&x.transpose()).map_err(|e| e.to_string())?;
    if !ax.is_zero() {
        return Err("A·Xᵀ ≠ 0".into());
    }
    let rank = int_rank(x);
    if rank != inst.rank {
        return Err(format!("rank(X) = {rank}, expected {}", inst.rank));
    }
    Ok(())
}

/// Greedy pick of `n` linearly independent vectors, in the given order.
pub fn independent_subset(vectors: &[Vec<i64>], n: usize) -> Option<Vec<Vec<i64>>> {
    let mut picked: Vec<Vec<i64>> = Vec::with_capacity(n);
    for v in vectors {
        if picked.len() == n {
            break;
        }
        if v.iter().all(|&x| x == 0) {
            continue;
        }
        picked.push(v.clone());
        let m = IntMatrix::from_rows(&picked).ok()?;
        if int_rank(&m) < picked.len() {
            picked.pop();
        }
    }
    (picked.len() == n).then_some(picked)
}

/// Any `n` independent members of `F`, stacked; no decoding involved.
pub fn assemble_trivial(
    a: &IntMatrix,
    alphabet: &Alphabet,
    k: usize,
    n: usize,
) -> Result<IntMatrix> {
    let (tree, _) = solve_diophantine_sparse(a, alphabet, k)?;
    let f = tree.leaves();
    match independent_subset(&f, n) {
        Some(rows) => IntMatrix::from_rows(&rows),
        None => Err(CilsError::Infeasible {
            achievable: stack_rank(&f),
            required: n,
        }),
    }
}

fn stack_rank(vectors: &[Vec<i64>]) -> usize {
    IntMatrix::from_rows(vectors).map_or(0, |m| int_rank(&m))
}

/// Counters of one [`solve`] run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Nodes created while enumerating the row candidates.
    pub dioph_nodes: u64,
    /// Number of row candidates.
    pub f_size: u64,
    pub sphere_calls: u64,
    pub radius_expansions: u64,
    /// Times the search moved on to the next candidate of an earlier column.
    pub backtracks: u64,
    /// Radius of the last sweep.
    pub final_radius: f64,
    pub wall_time: f64,
}

/// One decoded column on the path that produced the returned `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStep {
    pub column: usize,
    /// Candidate sets the decoder was given for this column.
    pub sets: Vec<Vec<i64>>,
    pub x_c: Vec<i64>,
    pub dist2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// `N×L`
    pub x: IntMatrix,
    pub objective: f64,
    pub stats: SolveStats,
    pub trace: Vec<ColumnStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Overrides the instance's initial radius.
    pub radius: Option<f64>,
    /// Increment applied when a radius yields no rank-`N` matrix.
    pub radius_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            radius: None,
            radius_step: 1.0,
        }
    }
}

/// Relative tolerance used when comparing objectives.
const OBJ_TOL: f64 = 1e-9;

fn obj_tol(v: f64) -> f64 {
    OBJ_TOL * v.abs().max(1.0)
}

struct Incumbent {
    rows: Vec<Vec<i64>>,
    objective: f64,
    trace: Vec<ColumnStep>,
}

struct Dfs<'a> {
    inst: &'a ProblemInstance,
    decoder: &'a SphereDecoder,
    columns: Vec<RealVector>,
    radius2: f64,
    best: Option<Incumbent>,
    path: Vec<ColumnStep>,
    stats: &'a mut SolveStats,
}

impl Dfs<'_> {
    fn bound(&self) -> f64 {
        match &self.best {
            Some(b) => b.objective + obj_tol(b.objective),
            None => f64::INFINITY,
        }
    }

    /// Singleton copies already fix rows; if those rows are dependent no
    /// completion can reach full rank.
    fn singletons_dependent(bundle: &RowTreeBundle) -> bool {
        let fixed: Vec<Vec<i64>> = (0..bundle.rows())
            .filter(|&i| bundle.is_singleton(i))
            .map(|i| bundle.tree(i).next().unwrap().to_vec())
            .collect();
        if fixed.is_empty() {
            return false;
        }
        if fixed.iter().any(|r| r.iter().all(|&v| v == 0)) {
            return true;
        }
        stack_rank(&fixed) < fixed.len()
    }

    fn visit(&mut self, j: usize, bundle: &RowTreeBundle, acc: f64) -> Result<()> {
        let l = self.inst.l();
        if j == l {
            let rows = bundle
                .assembled()
                .expect("every copy is a singleton after the last column");
            self.offer(rows)?;
            return Ok(());
        }
        let sets = match derive_column_sets(bundle, j) {
            Ok(s) => s,
            Err(CilsError::EmptyTree { .. }) => return Ok(()),
            Err(e) => return Err(e),
        };
        let limit = self.radius2.min(self.bound() - acc);
        if limit < 0.0 {
            return Ok(());
        }
        self.stats.sphere_calls += 1;
        let cands: Vec<SphereCandidate> =
            self.decoder.decode(&self.columns[j], limit.sqrt(), &sets)?;
        let set_lists: Vec<Vec<i64>> = sets.iter().map(|s| s.values().to_vec()).collect();
        for (idx, cand) in cands.into_iter().enumerate() {
            if acc + cand.dist2 > self.bound() {
                break;
            }
            if idx > 0 {
                self.stats.backtracks += 1;
            }
            let next = prune_with_column(bundle, j, &cand.x);
            let consistent = (0..next.rows()).all(|i| next.tree(i).any(|v| v[j] == cand.x[i]));
            if !consistent {
                continue;
            }
            let singletons_before = (0..bundle.rows())
                .filter(|&i| bundle.is_singleton(i))
                .count();
            let singletons_after = (0..next.rows()).filter(|&i| next.is_singleton(i)).count();
            if singletons_after > singletons_before && Self::singletons_dependent(&next) {
                continue;
            }
            self.path.push(ColumnStep {
                column: j,
                sets: set_lists.clone(),
                x_c: cand.x.clone(),
                dist2: cand.dist2,
            });
            self.visit(j + 1, &next, acc + cand.dist2)?;
            self.path.pop();
        }
        Ok(())
    }

    fn offer(&mut self, rows: Vec<Vec<i64>>) -> Result<()> {
        let x = IntMatrix::from_rows(&rows)?;
        if int_rank(&x) != self.inst.rank {
            return Ok(());
        }
        let obj = objective_rows(&self.inst.y, &self.inst.g, &rows)?;
        let better = match &self.best {
            None => true,
            Some(b) => {
                let tol = obj_tol(b.objective);
                obj < b.objective - tol || (obj <= b.objective + tol && rows < b.rows)
            }
        };
        if better {
            self.best = Some(Incumbent {
                rows,
                objective: obj,
                trace: self.path.clone(),
            });
        }
        Ok(())
    }
}

/// Solves the full problem with default options.
pub fn solve(inst: &ProblemInstance) -> Result<SolveResult> {
    solve_with(inst, &SolveOptions::default())
}

pub fn solve_with(inst: &ProblemInstance, opts: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    inst.validate()?;
    let n = inst.rank;

    let (tree, dstats) = solve_diophantine_sparse(&inst.a, &inst.alphabet, inst.k)?;
    let f = tree.leaves();
    let mut stats = SolveStats {
        dioph_nodes: dstats.nodes_visited,
        f_size: dstats.leaves,
        ..SolveStats::default()
    };
    let Some(fallback) = independent_subset(&f, n) else {
        return Err(CilsError::Infeasible {
            achievable: stack_rank(&f),
            required: n,
        });
    };

    let decoder = SphereDecoder::new(&inst.g)?;
    let columns: Vec<RealVector> = (0..inst.l())
        .map(|j| inst.y.column(j).clone_owned())
        .collect();
    let bundle = RowTreeBundle::new(f, n);

    // Any feasible X has every column residual below its total objective, so
    // this radius always contains a rank-N assembly.
    let cap = {
        let obj = objective_rows(&inst.y, &inst.g, &fallback)?;
        obj.sqrt() * (1.0 + 1e-9) + 1e-9
    };
    let mut radius = match opts.radius.or(inst.d0) {
        Some(d) => d,
        None => decoder.babai_radius(&columns[0], &derive_column_sets(&bundle, 0)?)?,
    };
    if opts.radius_step.is_nan() || opts.radius_step <= 0.0 {
        return Err(CilsError::InvalidArgument(
            "radius step must be positive".into(),
        ));
    }

    let best = loop {
        let mut dfs = Dfs {
            inst,
            decoder: &decoder,
            columns: columns.clone(),
            radius2: radius * radius,
            best: None,
            path: Vec::new(),
            stats: &mut stats,
        };
        dfs.visit(0, &bundle, 0.0)?;
        if let Some(found) = dfs.best {
            // a cheaper X could still have one column outside the radius
            if found.objective > radius * radius {
                let sweep = found.objective.sqrt() * (1.0 + 1e-9) + 1e-12;
                let mut confirm = Dfs {
                    inst,
                    decoder: &decoder,
                    columns: columns.clone(),
                    radius2: sweep * sweep,
                    best: Some(found),
                    path: Vec::new(),
                    stats: &mut stats,
                };
                confirm.visit(0, &bundle, 0.0)?;
                radius = sweep;
                break confirm.best.expect("incumbent is kept");
            }
            break found;
        }
        if radius >= cap {
            // unreachable in exact arithmetic; the fallback is feasible
            return Err(CilsError::Infeasible {
                achievable: n,
                required: n,
            });
        }
        stats.radius_expansions += 1;
        radius = (radius + opts.radius_step).min(cap);
    };

    stats.final_radius = radius;
    stats.wall_time = started.elapsed().as_secs_f64();
    Ok(SolveResult {
        x: IntMatrix::from_rows(&best.rows)?,
        objective: best.objective,
        stats,
        trace: best.trace,
    })
}

/// How [`solve_ils_eq`] picks from the candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IlsMode {
    /// Member of `F` nearest to the unconstrained sphere-decoder point.
    PaperHeuristic,
    /// Member of `F` with the smallest residual.
    #[default]
    Exact,
}

/// `min ‖y − Gx‖²` over `x ∈ S^L`, `A·x = 0`, `‖x‖₀ ≤ K`.
pub fn solve_ils_eq(
    y: &RealVector,
    g: &RealMatrix,
    a: &IntMatrix,
    alphabet: &Alphabet,
    k: usize,
    mode: IlsMode,
) -> Result<Vec<i64>> {
    if g.ncols() != a.cols() || g.nrows() != y.len() {
        return Err(CilsError::DimensionMismatch(format!(
            "y has {} entries, G is {}x{}, A has {} columns",
            y.len(),
            g.nrows(),
            g.ncols(),
            a.cols()
        )));
    }
    let (tree, _) = solve_diophantine_sparse(a, alphabet, k)?;
    let f = tree.leaves();
    if f.is_empty() {
        return Err(CilsError::Infeasible {
            achievable: 0,
            required: 1,
        });
    }
    match mode {
        IlsMode::Exact => Ok(argmin_by(&f, |x| residual_sq(y, g, x))),
        IlsMode::PaperHeuristic => {
            let decoder = SphereDecoder::new(g)?;
            let sets = CandidateSets::uniform(alphabet, g.ncols())?;
            let radius = decoder.babai_radius(y, &sets)?;
            let hat = decoder
                .decode(y, radius, &sets)?
                .into_iter()
                .next()
                .map(|c| c.x)
                .expect("the rounded point lies inside its own radius");
            Ok(argmin_by(&f, |x| {
                x.iter()
                    .zip(&hat)
                    .map(|(&a, &b)| ((a - b) * (a - b)) as f64)
                    .sum()
            }))
        }
    }
}

/// First minimizer in `vectors` (which are sorted, so ties go lexicographic).
fn argmin_by(vectors: &[Vec<i64>], mut key: impl FnMut(&[i64]) -> f64) -> Vec<i64> {
    let mut best = &vectors[0];
    let mut best_val = key(best);
    for v in &vectors[1..] {
        let val = key(v);
        if val < best_val {
            best = v;
            best_val = val;
        }
    }
    best.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;

    fn example_bundle() -> RowTreeBundle {
        let ex = example1();
        let (tree, _) = solve_diophantine_sparse(&ex.instance.a, &ex.instance.alphabet, 4).unwrap();
        RowTreeBundle::new(tree.leaves(), 3)
    }

    fn sets_as_vecs(s: &CandidateSets) -> Vec<Vec<i64>> {
        s.iter().map(|a| a.values().to_vec()).collect()
    }

    #[test]
    fn pruning_trace_of_example() {
        let b0 = example_bundle();
        assert_eq!(
            sets_as_vecs(&derive_column_sets(&b0, 0).unwrap()),
            vec![vec![-1, 0, 1]; 3]
        );

        let b1 = prune_with_column(&b0, 0, &[1, 0, 0]);
        assert_eq!(b1.tree_len(0), 1);
        assert_eq!(b1.tree(0).next().unwrap(), &[1, 1, -1, -1, 0, 0, 0]);
        assert_eq!(b1.tree_len(1), 5);
        assert_eq!(b1.tree_len(2), 5);
        assert!(b1.tree(1).all(|v| v[0] == 0));
        assert_eq!(
            sets_as_vecs(&derive_column_sets(&b1, 1).unwrap()),
            vec![vec![1], vec![-1, 0, 1], vec![-1, 0, 1]]
        );

        let b2 = prune_with_column(&b1, 1, &[1, -1, 1]);
        assert_eq!(
            sets_as_vecs(&derive_column_sets(&b2, 2).unwrap()),
            vec![vec![-1], vec![-1, 0], vec![0, 1]]
        );

        let b3 = prune_with_column(&b2, 2, &[-1, -1, 0]);
        let rows = b3.assembled().unwrap();
        assert_eq!(IntMatrix::from_rows(&rows).unwrap(), example1().x_a);
    }

    #[test]
    fn singleton_guard() {
        let b = RowTreeBundle::new(vec![vec![1, 0], vec![0, 1]], 2);
        let b1 = prune_with_column(&b, 0, &[1, 0]);
        assert!(b1.is_singleton(0) && b1.is_singleton(1));
        let b2 = prune_with_column(&b1, 1, &[1, 0]);
        assert_eq!(b2.assembled(), b1.assembled());
    }

    #[test]
    fn empty_copy_is_reported() {
        let b = RowTreeBundle::new(vec![vec![1, 0], vec![0, 1]], 1);
        let b1 = prune_with_column(&b, 0, &[5]);
        assert!(matches!(
            derive_column_sets(&b1, 1),
            Err(CilsError::EmptyTree { row: 0 })
        ));
    }

    #[test]
    fn solves_example() {
        let ex = example1();
        let res = solve(&ex.instance).unwrap();
        assert_eq!(res.x, ex.x_a);
        assert!(res.objective < 1e-20);
        assert!(verify_solution(&ex.instance, &res.x).is_ok());
        let chosen: Vec<Vec<i64>> = res.trace.iter().take(3).map(|s| s.x_c.clone()).collect();
        assert_eq!(chosen, vec![vec![1, 0, 0], vec![1, -1, 1], vec![-1, -1, 0]]);
        assert_eq!(res.stats.f_size, 7);
        assert_eq!(res.stats.radius_expansions, 0);
    }

    #[test]
    fn objective_decomposes_by_column() {
        let ex = example1();
        let rows = ex.x_a.to_i64_rows().unwrap();
        let y = &ex.instance.y + RealMatrix::from_fn(4, 7, |i, j| 0.01 * (i as f64 - j as f64));
        let total = objective(&y, &ex.instance.g, &ex.x_a).unwrap();
        let x_f = RealMatrix::from_fn(3, 7, |i, j| rows[i][j] as f64);
        let frob = (&y - &ex.instance.g * x_f).norm_squared();
        assert!((total - frob).abs() <= 1e-9 * frob.max(1e-300));
        assert!(objective(&ex.instance.y, &ex.instance.g, &ex.x_a).unwrap() < 1e-20);
    }

    #[test]
    fn objective_dimension_mismatch() {
        let ex = example1();
        let x = IntMatrix::zeros(2, 7).unwrap();
        assert!(objective(&ex.instance.y, &ex.instance.g, &x).is_err());
    }

    #[test]
    fn infeasible_identity_constraint() {
        let ex = example1();
        let a = IntMatrix::identity(7).unwrap();
        let inst = ProblemInstance { a, ..ex.instance };
        match solve(&inst) {
            Err(CilsError::Infeasible {
                achievable,
                required,
            }) => {
                assert_eq!(achievable, 0);
                assert_eq!(required, 3);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn instance_validation() {
        let ex = example1();
        let mut bad = ex.instance.clone();
        bad.k = 8;
        assert!(matches!(
            bad.validate(),
            Err(CilsError::DimensionMismatch(_))
        ));
        let mut bad = ex.instance.clone();
        bad.rank = 2;
        assert!(bad.validate().is_err());
        let mut bad = ex.instance.clone();
        bad.d0 = Some(-1.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn radius_escalates_from_tiny_start() {
        let ex = example1();
        let mut inst = ex.instance.clone();
        inst.y[(0, 0)] += 0.3;
        inst.d0 = Some(1e-3);
        let res = solve(&inst).unwrap();
        assert!(res.stats.radius_expansions >= 1);
        assert_eq!(res.x, ex.x_a);
    }

    #[test]
    fn ils_modes_on_exact_point() {
        use rand::{Rng, SeedableRng};
        use rand_distr::StandardNormal;
        let ex = example1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = RealMatrix::from_fn(9, 7, |_, _| rng.sample::<f64, _>(StandardNormal).abs());
        let x0 = [0i64, 1, 0, 1, 0, -1, -1];
        let y = &g * RealVector::from_iterator(7, x0.iter().map(|&v| v as f64));
        for mode in [IlsMode::Exact, IlsMode::PaperHeuristic] {
            let got = solve_ils_eq(&y, &g, &ex.instance.a, &ex.instance.alphabet, 4, mode).unwrap();
            assert_eq!(got, x0.to_vec(), "{mode:?}");
        }
        let a = IntMatrix::identity(7).unwrap();
        let s = Alphabet::new(vec![1, 2]).unwrap();
        assert!(matches!(
            solve_ils_eq(&y, &g, &a, &s, 4, IlsMode::Exact),
            Err(CilsError::Infeasible { .. })
        ));
    }

    #[test]
    fn trivial_assembly_has_full_rank() {
        let ex = example1();
        let x = assemble_trivial(&ex.instance.a, &ex.instance.alphabet, 4, 3).unwrap();
        assert_eq!(int_rank(&x), 3);
        assert!(ex.instance.a.mul(&x.transpose()).unwrap().is_zero());
        assert!(assemble_trivial(&ex.instance.a, &ex.instance.alphabet, 4, 4).is_err());
    }
}
