//! Exhaustive reference solvers.
//!
//! Nothing here calls into the modules these certify: candidate sets come from
//! plain enumeration, residuals are accumulated by hand and ranks use Gaussian
//! elimination over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::assembler::{ProblemInstance, SolveResult, SolveStats};
use crate::dioph::Alphabet;
use crate::error::{CilsError, Result};
use crate::intlin::IntMatrix;
use crate::spheredec::{CandidateSets, RealMatrix, RealVector, SphereCandidate};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Environment variable that overrides [`OracleBudget::default`].
pub const BUDGET_ENV: &str = "CILS_ORACLE_BUDGET";

/// Cap on the number of points an oracle may examine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_enumeration: u64,
}

impl OracleBudget {
    pub fn new(max_enumeration: u64) -> Result<Self> {
        if max_enumeration == 0 {
            return Err(CilsError::InvalidArgument(
                "oracle budget must be positive".into(),
            ));
        }
        Ok(OracleBudget { max_enumeration })
    }

    /// Reads `CILS_ORACLE_BUDGET`, falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => {
                let n: u64 = v.trim().parse().map_err(|_| {
                    CilsError::InvalidArgument(format!(
                        "{BUDGET_ENV}={v:?} is not a positive integer"
                    ))
                })?;
                Self::new(n)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    fn admit(&self, needed: u128) -> Result<()> {
        if needed > u128::from(self.max_enumeration) {
            Err(CilsError::BudgetExceeded {
                needed,
                budget: self.max_enumeration,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_enumeration: DEFAULT_BUDGET,
        }
    }
}

fn pow_saturating(base: usize, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// Calls `visit` on every tuple of indices into lists of the given sizes,
/// last position fastest.
fn for_each_tuple(sizes: &[usize], mut visit: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        visit(&idx);
        let mut p = sizes.len();
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < sizes[p] {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Every `x ∈ S^L` with `A·x = 0` and at most `k` nonzeros, lexicographic.
pub fn oracle_f(
    a: &IntMatrix,
    alphabet: &Alphabet,
    k: usize,
    budget: OracleBudget,
) -> Result<Vec<Vec<i64>>> {
    let l = a.cols();
    budget.admit(pow_saturating(alphabet.len(), l))?;
    let rows: Vec<Vec<BigInt>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    let small: Option<Vec<Vec<i128>>> = rows
        .iter()
        .map(|r| r.iter().map(ToPrimitive::to_i128).collect())
        .collect();
    let vals = alphabet.values();
    let mut out = Vec::new();
    for_each_tuple(&vec![vals.len(); l], |idx| {
        let x: Vec<i64> = idx.iter().map(|&i| vals[i]).collect();
        if x.iter().filter(|&&v| v != 0).count() > k {
            return;
        }
        let ok = match &small {
            Some(rows) => rows.iter().all(|r| {
                let mut s: i128 = 0;
                for (c, &v) in r.iter().zip(&x) {
                    s += c * i128::from(v);
                }
                s == 0
            }),
            None => rows.iter().all(|r| {
                let mut s = BigInt::zero();
                for (c, &v) in r.iter().zip(&x) {
                    s += c * v;
                }
                s.is_zero()
            }),
        };
        if ok {
            out.push(x);
        }
    });
    // odometer order with ascending alphabet is already lexicographic
    Ok(out)
}

fn naive_residual(y: &RealVector, g: &RealMatrix, x: &[i64]) -> f64 {
    let mut total = 0.0;
    for i in 0..y.len() {
        let mut r = y[i];
        for k in 0..x.len() {
            r -= g[(i, k)] * x[k] as f64;
        }
        total += r * r;
    }
    total
}

/// Every point of the set product within radius `d`, by distance then lexicographic.
pub fn oracle_sphere(
    y: &RealVector,
    g: &RealMatrix,
    d: f64,
    sets: &CandidateSets,
    budget: OracleBudget,
) -> Result<Vec<SphereCandidate>> {
    if sets.len() != g.ncols() || y.len() != g.nrows() {
        return Err(CilsError::DimensionMismatch("oracle_sphere inputs".into()));
    }
    budget.admit(sets.product_size())?;
    let lists: Vec<&[i64]> = sets.iter().map(Alphabet::values).collect();
    let sizes: Vec<usize> = lists.iter().map(|l| l.len()).collect();
    let limit = d * d * (1.0 + crate::spheredec::RADIUS_SLACK);
    let mut out = Vec::new();
    for_each_tuple(&sizes, |idx| {
        let x: Vec<i64> = idx.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
        let dist2 = naive_residual(y, g, &x);
        if dist2 <= limit {
            out.push(SphereCandidate { x, dist2 });
        }
    });
    out.sort_by(|a, b| {
        a.dist2
            .partial_cmp(&b.dist2)
            .unwrap()
            .then_with(|| a.x.cmp(&b.x))
    });
    Ok(out)
}

/// Rank over the rationals by plain Gaussian elimination.
pub fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect()
        })
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == rank || row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &pivot[c];
            for (v, pv) in row[c..].iter_mut().zip(&pivot[c..]) {
                *v -= &f * pv;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Tries every ordered `N`-tuple of feasible rows and keeps the cheapest one of
/// full rank; ties go to the lexicographically smallest `vec(X)`.
pub fn oracle_solve(inst: &ProblemInstance, budget: OracleBudget) -> Result<SolveResult> {
    inst.validate()?;
    let f = oracle_f(&inst.a, &inst.alphabet, inst.k, budget)?;
    let n = inst.rank;
    budget.admit(pow_saturating(f.len(), n))?;
    if f.is_empty() || rational_rank(&f) < n {
        return Err(CilsError::Infeasible {
            achievable: if f.is_empty() { 0 } else { rational_rank(&f) },
            required: n,
        });
    }

    let (m, l) = (inst.y.nrows(), inst.y.ncols());
    let mut best: Option<(f64, Vec<Vec<i64>>)> = None;
    for_each_tuple(&vec![f.len(); n], |idx| {
        let rows: Vec<Vec<i64>> = idx.iter().map(|&i| f[i].clone()).collect();
        let mut obj = 0.0;
        for j in 0..l {
            for i in 0..m {
                let mut r = inst.y[(i, j)];
                for (k, row) in rows.iter().enumerate() {
                    r -= inst.g[(i, k)] * row[j] as f64;
                }
                obj += r * r;
            }
        }
        let improves = match &best {
            None => true,
            Some((b, brows)) => {
                let tol = 1e-9 * b.abs().max(1.0);
                obj < b - tol || (obj <= b + tol && &rows < brows)
            }
        };
        if improves && rational_rank(&rows) == n {
            best = Some((obj, rows));
        }
    });
    let (objective, rows) = best.expect("feasible rows exist");
    Ok(SolveResult {
        x: IntMatrix::from_rows(&rows)?,
        objective,
        stats: SolveStats {
            f_size: f.len() as u64,
            ..SolveStats::default()
        },
        trace: Vec::new(),
    })
}
