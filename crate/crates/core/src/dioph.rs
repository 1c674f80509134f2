//! Sparse solutions of homogeneous linear Diophantine systems over a finite alphabet.
//!
//! The system `A·x = 0` is first brought to Hermite normal form. Equations are then
//! processed from the last nonzero row upwards: columns right of the row's pivot
//! that are not yet assigned are expanded over the whole alphabet, and the pivot
//! value is back-substituted. Partial assignments live in a rooted tree that grows
//! one column per level, starting from the last column, so a node at depth `d`
//! holds the value of column `L - d`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CilsError, Result};
use crate::intlin::{hermite_normal_form, IntMatrix};

/// Finite set of allowed integer values, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Alphabet(Vec<i64>);

impl Alphabet {
    /// Accepts values in any order; rejects empty input and duplicates.
    pub fn new(mut values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CilsError::InvalidArgument(
                "alphabet must be nonempty".into(),
            ));
        }
        values.sort_unstable();
        if let Some(w) = values.windows(2).find(|w| w[0] == w[1]) {
            return Err(CilsError::InvalidArgument(format!(
                "alphabet contains duplicate value {}",
                w[0]
            )));
        }
        Ok(Alphabet(values))
    }

    /// The contiguous alphabet `{lo, lo + 1, ..., hi}`.
    pub fn range(lo: i64, hi: i64) -> Result<Self> {
        Self::new((lo..=hi).collect())
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> i64 {
        self.0[0]
    }

    pub fn max(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    pub fn contains(&self, v: i64) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Members inside the closed interval `[lo, hi]`.
    pub fn within(&self, lo: i64, hi: i64) -> &[i64] {
        if lo > hi {
            return &[];
        }
        let start = self.0.partition_point(|&v| v < lo);
        let end = self.0.partition_point(|&v| v <= hi);
        &self.0[start..end.max(start)]
    }

    /// `S = -S`
    pub fn is_symmetric(&self) -> bool {
        self.0.iter().all(|&v| self.contains(-v))
    }
}

impl TryFrom<Vec<i64>> for Alphabet {
    type Error = CilsError;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<i64> {
    fn from(a: Alphabet) -> Self {
        a.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    value: i64,
    parent: u32,
    nnz: u32,
}

const ROOT: u32 = 0;

/// Rooted tree of partial assignments `(x_{L-d+1}, ..., x_L)`.
///
/// Only nodes on the current frontier (depth `depth`) count as leaves; branches
/// that were cut off at an earlier level are dropped by [`SolutionTree::compact`].
#[derive(Debug, Clone)]
pub struct SolutionTree {
    len: usize,
    depth: usize,
    nodes: Vec<Node>,
    frontier: Vec<u32>,
    created: u64,
}

impl SolutionTree {
    /// Root-only tree for vectors of length `len`.
    pub fn new(len: usize) -> Self {
        SolutionTree {
            len,
            depth: 0,
            nodes: vec![Node {
                value: 0,
                parent: ROOT,
                nnz: 0,
            }],
            frontier: vec![ROOT],
            created: 0,
        }
    }

    /// Full vector length `L`.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of assigned trailing columns.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// First assigned column, or `len` when nothing is assigned yet.
    pub fn first_assigned(&self) -> usize {
        self.len - self.depth
    }

    pub fn is_complete(&self) -> bool {
        self.depth == self.len
    }

    /// A tree with nothing assigned, or with every branch pruned, has no leaves.
    pub fn is_empty(&self) -> bool {
        self.depth == 0 || self.frontier.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        if self.depth == 0 {
            0
        } else {
            self.frontier.len()
        }
    }

    /// Every node created so far, including the ones rejected on creation.
    pub fn nodes_created(&self) -> u64 {
        self.created
    }

    /// Assigned suffix of a frontier node in natural column order.
    fn suffix(&self, mut id: u32) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.depth);
        while id != ROOT {
            let n = self.nodes[id as usize];
            out.push(n.value);
            id = n.parent;
        }
        out
    }

    /// Leaf vectors (assigned columns only) in lexicographic order.
    pub fn leaves(&self) -> Vec<Vec<i64>> {
        if self.depth == 0 {
            return Vec::new();
        }
        let mut out: Vec<Vec<i64>> = self.frontier.iter().map(|&id| self.suffix(id)).collect();
        out.sort();
        out
    }

    fn push(&mut self, parent: u32, value: i64) -> u32 {
        let nnz = self.nodes[parent as usize].nnz + u32::from(value != 0);
        self.nodes.push(Node { value, parent, nnz });
        (self.nodes.len() - 1) as u32
    }

    /// Assigns the next column to the left over all of `alphabet`, keeping
    /// children with at most `k` nonzeros.
    pub fn expand_free(&mut self, alphabet: &Alphabet, k: usize) {
        assert!(self.depth < self.len, "tree already covers every column");
        let mut next = Vec::with_capacity(self.frontier.len() * alphabet.len());
        let frontier = std::mem::take(&mut self.frontier);
        for parent in frontier {
            let nnz = self.nodes[parent as usize].nnz as usize;
            for &v in alphabet.values() {
                self.created += 1;
                if nnz + usize::from(v != 0) <= k {
                    next.push(self.push(parent, v));
                }
            }
        }
        self.frontier = next;
        self.depth += 1;
    }

    /// Assigns column `pivot` (the next column to the left) from equation `h`.
    fn extend_pivot(
        &mut self,
        h: &[i128],
        pivot: usize,
        alphabet: &Alphabet,
        k: usize,
    ) -> Result<()> {
        debug_assert_eq!(pivot + 1, self.first_assigned());
        let hp = h[pivot];
        let mut next = Vec::with_capacity(self.frontier.len());
        let frontier = std::mem::take(&mut self.frontier);
        for parent in frontier {
            self.created += 1;
            let rest = self.dot_suffix(parent, h)?;
            if rest % hp != 0 {
                continue;
            }
            let Some(v) = (-(rest / hp)).to_i64() else {
                continue;
            };
            let nnz = self.nodes[parent as usize].nnz as usize;
            if alphabet.contains(v) && nnz + usize::from(v != 0) <= k {
                next.push(self.push(parent, v));
            }
        }
        self.frontier = next;
        self.depth += 1;
        Ok(())
    }

    /// Keeps leaves satisfying `h·x = 0`; all of `h`'s support must be assigned.
    fn retain_consistent(&mut self, h: &[i128]) -> Result<()> {
        let frontier = std::mem::take(&mut self.frontier);
        let mut kept = Vec::with_capacity(frontier.len());
        for id in frontier {
            if self.dot_suffix(id, h)? == 0 {
                kept.push(id);
            }
        }
        self.frontier = kept;
        Ok(())
    }

    /// `Σ h[c]·x[c]` over the assigned columns on the path from frontier node `id`.
    fn dot_suffix(&self, mut id: u32, h: &[i128]) -> Result<i128> {
        // the path from a frontier node runs left-to-right through the columns
        let mut col = self.first_assigned();
        let mut acc: i128 = 0;
        while id != ROOT {
            let n = self.nodes[id as usize];
            if n.value != 0 && h[col] != 0 {
                let term = h[col]
                    .checked_mul(i128::from(n.value))
                    .ok_or(CilsError::Overflow("pivot back-substitution"))?;
                acc = acc
                    .checked_add(term)
                    .ok_or(CilsError::Overflow("pivot back-substitution"))?;
            }
            col += 1;
            id = n.parent;
        }
        Ok(acc)
    }

    /// Drops nodes that are not ancestors of a frontier node.
    pub fn compact(&mut self) {
        let mut keep = vec![false; self.nodes.len()];
        keep[ROOT as usize] = true;
        for &leaf in &self.frontier {
            let mut id = leaf;
            while !keep[id as usize] {
                keep[id as usize] = true;
                id = self.nodes[id as usize].parent;
            }
        }
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(keep.iter().filter(|&&k| k).count());
        // parents always precede children in the arena
        for (old, node) in self.nodes.iter().enumerate() {
            if !keep[old] {
                continue;
            }
            remap[old] = nodes.len() as u32;
            let parent = if old == ROOT as usize {
                ROOT
            } else {
                remap[node.parent as usize]
            };
            nodes.push(Node { parent, ..*node });
        }
        self.frontier = self.frontier.iter().map(|&id| remap[id as usize]).collect();
        self.nodes = nodes;
    }

    /// Nodes currently stored, root excluded.
    pub fn stored_nodes(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Enumeration effort of one Diophantine solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiophStats {
    /// Nodes created while building the tree, rejected ones included.
    pub nodes_visited: u64,
    /// Size of the solution set.
    pub leaves: u64,
}

fn to_i128_row(h: &[BigInt]) -> Result<Vec<i128>> {
    h.iter()
        .map(|v| {
            v.to_i128()
                .ok_or(CilsError::Overflow("equation coefficients"))
        })
        .collect()
}

/// Applies one equation `h·x = 0` with leading coefficient at `pivot_col`.
///
/// Unassigned columns right of the pivot are expanded over the alphabet first.
/// If the pivot column is already assigned the equation only filters leaves.
pub fn solve_single_equation(
    h: &[BigInt],
    mut tree: SolutionTree,
    pivot_col: usize,
    alphabet: &Alphabet,
    k: usize,
) -> Result<SolutionTree> {
    if h.len() != tree.len() {
        return Err(CilsError::DimensionMismatch(format!(
            "equation has {} coefficients, tree covers {} columns",
            h.len(),
            tree.len()
        )));
    }
    if pivot_col >= h.len() || h[pivot_col].is_zero() {
        return Err(CilsError::InvalidArgument(format!(
            "column {pivot_col} is not a pivot of the equation"
        )));
    }
    if h[..pivot_col].iter().any(|v| !v.is_zero()) {
        return Err(CilsError::InvalidArgument(format!(
            "equation has nonzero coefficients left of pivot column {pivot_col}"
        )));
    }
    let h = to_i128_row(h)?;
    if pivot_col >= tree.first_assigned() {
        tree.retain_consistent(&h)?;
    } else {
        while tree.first_assigned() > pivot_col + 1 {
            tree.expand_free(alphabet, k);
        }
        tree.extend_pivot(&h, pivot_col, alphabet, k)?;
    }
    tree.compact();
    Ok(tree)
}

/// Leaves of the tree in lexicographic order.
pub fn tree_leaves(tree: &SolutionTree) -> Vec<Vec<i64>> {
    tree.leaves()
}

/// All `x ∈ S^L` with `A·x = 0` and at most `k` nonzeros.
pub fn solve_diophantine_sparse(
    a: &IntMatrix,
    alphabet: &Alphabet,
    k: usize,
) -> Result<(SolutionTree, DiophStats)> {
    let hnf = hermite_normal_form(a);
    let order: Vec<usize> = (0..hnf.h.rows()).rev().collect();
    solve_with_equation_order(&hnf.h, &order, alphabet, k)
}

/// Runs the tree construction over the rows of `h` in the given order.
///
/// `h` must define the same solution set as the original system (any row-echelon
/// form of it, or the system itself as long as each row is applied with its own
/// leading column as pivot). Zero rows are skipped.
pub fn solve_with_equation_order(
    h: &IntMatrix,
    order: &[usize],
    alphabet: &Alphabet,
    k: usize,
) -> Result<(SolutionTree, DiophStats)> {
    let len = h.cols();
    if k > len {
        return Err(CilsError::InvalidArgument(format!(
            "sparsity bound K = {k} exceeds vector length L = {len}"
        )));
    }
    let mut tree = SolutionTree::new(len);
    for &i in order {
        let row = h.row(i);
        let Some(pivot) = row.iter().position(|v| !v.is_zero()) else {
            continue;
        };
        tree = solve_single_equation(row, tree, pivot, alphabet, k)?;
        if tree.frontier.is_empty() {
            break;
        }
    }
    if !tree.frontier.is_empty() {
        while !tree.is_complete() {
            tree.expand_free(alphabet, k);
        }
        tree.compact();
    } else {
        // nothing survives; report a finished, empty tree
        tree.depth = tree.len;
    }
    let stats = DiophStats {
        nodes_visited: tree.nodes_created(),
        leaves: tree.leaf_count() as u64,
    };
    Ok((tree, stats))
}

/// Nonzero count of a vector.
pub fn l0_norm(x: &[i64]) -> usize {
    x.iter().filter(|&&v| v != 0).count()
}

/// Set form of the leaves, for order-insensitive comparisons.
pub fn leaf_set(tree: &SolutionTree) -> HashSet<Vec<i64>> {
    tree.leaves().into_iter().collect()
}
