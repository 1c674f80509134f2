//! Seeded random instances and batch benchmarks.
//!
//! An instance plants an `N×L` matrix `X` with sparse rows over the alphabet, then
//! draws `A` from integer combinations of a basis of `{a : X·a = 0}` so that every
//! planted row satisfies `A·x = 0`. `G` has half-normal entries and `Y = G·X + E`
//! with Gaussian noise `E`.

use std::path::Path;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::assembler::{solve, verify_solution, ProblemInstance};
use crate::dioph::Alphabet;
use crate::error::{CilsError, Result};
use crate::intlin::{hermite_normal_form, int_rank, IntMatrix};
use crate::spheredec::RealMatrix;

/// Attempts at planting a full-rank `X` before giving up.
pub const MAX_ATTEMPTS: usize = 200;

/// Range of the random coefficients combining null-space basis vectors into rows of `A`.
const COMBINATION_RANGE: i64 = 2;

fn default_p() -> usize {
    7
}
fn default_k() -> usize {
    4
}
fn default_sigma() -> f64 {
    0.2
}
fn default_trials() -> usize {
    5
}

/// Parameters of one benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Rows of `X`, which is also the target rank.
    pub n_rows: usize,
    /// Columns of `X`.
    pub l: usize,
    /// Rows of `Y` and `G`.
    pub m: usize,
    /// Rows of `A`.
    #[serde(default = "default_p")]
    pub p: usize,
    pub alphabet: Alphabet,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl GenSpec {
    /// Defaults for `P`, `K`, `σ` and the trial count.
    pub fn new(n_rows: usize, l: usize, m: usize, alphabet: Alphabet, seed: u64) -> Self {
        GenSpec {
            n_rows,
            l,
            m,
            p: default_p(),
            alphabet,
            k: default_k(),
            sigma: default_sigma(),
            seed,
            trials: default_trials(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CilsError::InvalidArgument(msg));
        if self.n_rows == 0 || self.l == 0 || self.p == 0 {
            return bad(format!(
                "N = {}, L = {}, P = {} must be positive",
                self.n_rows, self.l, self.p
            ));
        }
        if self.k > self.l {
            return bad(format!("K = {} exceeds L = {}", self.k, self.l));
        }
        if self.n_rows > self.l {
            return bad(format!("rank N = {} exceeds L = {}", self.n_rows, self.l));
        }
        if self.m < self.n_rows {
            return bad(format!(
                "M = {} is below N = {}; G cannot have full column rank",
                self.m, self.n_rows
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad(format!("sigma must be nonnegative, got {}", self.sigma));
        }
        Ok(())
    }

    /// Same parameters with the seed of trial `t`; trial 0 keeps the master seed.
    pub fn trial(&self, t: usize) -> GenSpec {
        GenSpec {
            seed: self
                .seed
                .wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            trials: 1,
            ..self.clone()
        }
    }

    /// `"NxL"`
    pub fn size_label(&self) -> String {
        format!("{}x{}", self.n_rows, self.l)
    }
}

fn plant_rows(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<i64>>> {
    let nonzero: Vec<i64> = spec
        .alphabet
        .values()
        .iter()
        .copied()
        .filter(|&v| v != 0)
        .collect();
    if nonzero.is_empty() || spec.k == 0 {
        return Err(CilsError::Generation {
            attempts: 0,
            reason: "alphabet and sparsity bound admit only the zero row".into(),
        });
    }
    if !spec.alphabet.contains(0) && spec.k < spec.l {
        return Err(CilsError::Generation {
            attempts: 0,
            reason: "sparse rows need 0 in the alphabet".into(),
        });
    }
    let rows = (0..spec.n_rows)
        .map(|_| {
            let support = if spec.alphabet.contains(0) {
                rng.random_range(1..=spec.k)
            } else {
                spec.l
            };
            let mut row = vec![0i64; spec.l];
            for c in sample(rng, spec.l, support) {
                row[c] = nonzero[rng.random_range(0..nonzero.len())];
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Rows spanning `{a : X·a = 0}` over the integers.
fn null_space_basis(x: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let hnf = hermite_normal_form(&x.transpose());
    let rank = hnf.rank();
    let u = hnf.u.to_i64_rows()?;
    Ok(u.into_iter().skip(rank).collect())
}

/// Draws one instance and its planted solution from `spec.seed`.
pub fn generate_instance(spec: &GenSpec) -> Result<(ProblemInstance, IntMatrix)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        let rows = plant_rows(spec, &mut rng)?;
        let x = IntMatrix::from_rows(&rows)?;
        if int_rank(&x) < spec.n_rows {
            continue;
        }
        let basis = null_space_basis(&x)?;
        let mut a_rows = vec![vec![0i64; spec.l]; spec.p];
        for row in &mut a_rows {
            for b in &basis {
                let c = rng.random_range(-COMBINATION_RANGE..=COMBINATION_RANGE);
                for (v, &bv) in row.iter_mut().zip(b) {
                    *v = v
                        .checked_add(
                            c.checked_mul(bv)
                                .ok_or(CilsError::Overflow("constraint generation"))?,
                        )
                        .ok_or(CilsError::Overflow("constraint generation"))?;
                }
            }
        }
        let a = IntMatrix::from_rows(&a_rows)?;
        if int_rank(&a) < basis.len().min(spec.p) {
            continue;
        }

        let g = RealMatrix::from_fn(spec.m, spec.n_rows, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v.abs()
        });
        let x_real = RealMatrix::from_fn(spec.n_rows, spec.l, |i, j| rows[i][j] as f64);
        let mut y = &g * x_real;
        if spec.sigma > 0.0 {
            let noise = Normal::new(0.0, spec.sigma).expect("sigma validated");
            for v in y.iter_mut() {
                *v += noise.sample(&mut rng);
            }
        }
        let inst = ProblemInstance::new(y, g, a, spec.alphabet.clone(), spec.k, spec.n_rows, None)?;
        return Ok((inst, x));
    }
    Err(CilsError::Generation {
        attempts: MAX_ATTEMPTS,
        reason: format!(
            "no full-rank planted matrix for N = {}, L = {}, K = {}, S = {:?}",
            spec.n_rows,
            spec.l,
            spec.k,
            spec.alphabet.values()
        ),
    })
}

/// Averages over the trials of one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub spec: GenSpec,
    /// `N·L`, the number of unknowns.
    pub n: usize,
    pub avg_time: f64,
    /// Mean node count of the row-candidate enumeration.
    pub avg_nodes: f64,
    /// Trials whose solution equals the planted `X`.
    pub recovery_count: usize,
    /// Trials whose solution passed every feasibility check.
    pub verified: usize,
}

pub const CSV_HEADER: [&str; 7] = [
    "size",
    "rank",
    "n",
    "avg_time_s",
    "avg_nodes",
    "recovered",
    "trials",
];

/// Runs every trial of one spec.
pub fn bench_spec(spec: &GenSpec) -> Result<BenchRecord> {
    spec.validate()?;
    let mut time = 0.0;
    let mut nodes = 0.0;
    let mut recovered = 0;
    let mut verified = 0;
    for t in 0..spec.trials {
        let (inst, planted) = generate_instance(&spec.trial(t))?;
        let started = Instant::now();
        let res = solve(&inst)?;
        time += started.elapsed().as_secs_f64();
        nodes += res.stats.dioph_nodes as f64;
        if verify_solution(&inst, &res.x).is_ok() {
            verified += 1;
        }
        if res.x == planted {
            recovered += 1;
        }
    }
    let trials = spec.trials as f64;
    Ok(BenchRecord {
        spec: spec.clone(),
        n: spec.n_rows * spec.l,
        avg_time: time / trials,
        avg_nodes: nodes / trials,
        recovery_count: recovered,
        verified,
    })
}

pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(&[
            r.spec.size_label(),
            r.spec.n_rows.to_string(),
            r.n.to_string(),
            format!("{:.6}", r.avg_time),
            r.avg_nodes.to_string(),
            r.recovery_count.to_string(),
            r.spec.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Benchmarks every spec and writes one CSV row per spec to `out`.
pub fn run_bench(specs: &[GenSpec], out: &Path) -> Result<Vec<BenchRecord>> {
    let records = specs.iter().map(bench_spec).collect::<Result<Vec<_>>>()?;
    let file = std::fs::File::create(out)?;
    write_csv(&records, std::io::BufWriter::new(file))?;
    Ok(records)
}
