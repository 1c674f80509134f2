//! Fincke-Pohst enumeration with a separate finite alphabet per coordinate.
//!
//! With `G = [Q1 Q2]·[R; 0]` the residual splits as
//! `‖y − Gx‖² = ‖Q2ᵀy‖² + ‖Q1ᵀy − Rx‖²`, and the triangular part is searched
//! depth-first from the last coordinate. At each level the admissible interval
//! for `x_i` comes from the remaining radius budget; only alphabet members inside
//! it are visited, so alphabets with gaps are handled directly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dioph::Alphabet;
use crate::error::{CilsError, Result};

pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;

/// Relative slack on `d²` for boundary points.
pub const RADIUS_SLACK: f64 = 1e-9;

/// Added to the radius returned by [`babai_radius`].
pub const BABAI_EPS: f64 = 1e-9;

/// One alphabet per coordinate of the decoded vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSets(Vec<Alphabet>);

impl CandidateSets {
    pub fn new(sets: Vec<Alphabet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(CilsError::InvalidArgument(
                "candidate sets need at least one coordinate".into(),
            ));
        }
        Ok(CandidateSets(sets))
    }

    /// The same alphabet for each of `n` coordinates.
    pub fn uniform(alphabet: &Alphabet, n: usize) -> Result<Self> {
        Self::new(vec![alphabet.clone(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Alphabet {
        &self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Alphabet> {
        self.0.iter()
    }

    /// Size of the Cartesian product, saturating.
    pub fn product_size(&self) -> u128 {
        self.0
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }

    /// Every set is a subset of `alphabet`.
    pub fn is_subset_of(&self, alphabet: &Alphabet) -> bool {
        self.0
            .iter()
            .all(|s| s.values().iter().all(|&v| alphabet.contains(v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereCandidate {
    pub x: Vec<i64>,
    /// `‖y − Gx‖²`
    pub dist2: f64,
}

/// Full QR factorization with a positive diagonal in `R`.
#[derive(Debug, Clone)]
pub struct QrFactors {
    /// `M×N`, spans the column space of `G`.
    pub q1: RealMatrix,
    /// `M×(M−N)`, orthogonal complement.
    pub q2: RealMatrix,
    /// `N×N` upper triangular.
    pub r: RealMatrix,
}

fn check_finite(m: &RealMatrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CilsError::InvalidArgument(format!(
            "{what} has non-finite entries"
        )))
    }
}

/// Householder QR of `G` (`M ≥ N`), with signs flipped so that `diag(R) > 0`.
pub fn qr_positive(g: &RealMatrix) -> Result<QrFactors> {
    let (m, n) = g.shape();
    if n == 0 || m == 0 {
        return Err(CilsError::InvalidArgument("G must be nonempty".into()));
    }
    if n > m {
        return Err(CilsError::DimensionMismatch(format!(
            "G is {m}x{n}; full column rank needs at least as many rows as columns"
        )));
    }
    check_finite(g, "G")?;

    let mut r = g.clone();
    let mut q = DMatrix::<f64>::identity(m, m);
    for k in 0..n {
        let norm = r.view((k, k), (m - k, 1)).norm();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v = r.view((k, k), (m - k, 1)).clone_owned();
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v /= vnorm;
        // R[k.., k..] -= 2 v (vᵀ R[k.., k..])
        let mut block = r.view_mut((k, k), (m - k, n - k));
        let w = v.transpose() * &block;
        block -= 2.0 * &v * w;
        // Q[:, k..] -= 2 (Q[:, k..] v) vᵀ
        let mut qb = q.view_mut((0, k), (m, m - k));
        let qv = &qb * &v;
        qb -= 2.0 * qv * v.transpose();
    }

    let scale = (0..n)
        .map(|j| g.column(j).norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
        if r[(i, i)] <= 1e-12 * scale {
            return Err(CilsError::RankDeficient {
                index: i,
                value: r[(i, i)],
            });
        }
    }
    // exact zeros below the diagonal
    for j in 0..n {
        for i in j + 1..m {
            r[(i, j)] = 0.0;
        }
    }
    Ok(QrFactors {
        q1: q.columns(0, n).clone_owned(),
        q2: q.columns(n, m - n).clone_owned(),
        r: r.rows(0, n).clone_owned(),
    })
}

/// `‖y − Gx‖²` evaluated entry by entry.
pub fn residual_sq(y: &RealVector, g: &RealMatrix, x: &[i64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..g.nrows() {
        let mut s = y[i];
        for (k, &xk) in x.iter().enumerate() {
            s -= g[(i, k)] * xk as f64;
        }
        acc += s * s;
    }
    acc
}

/// Orders by `dist2`, then lexicographically by `x`.
pub fn sort_candidates(c: &mut [SphereCandidate]) {
    c.sort_by(|a, b| a.dist2.total_cmp(&b.dist2).then_with(|| a.x.cmp(&b.x)));
}

/// A decoder bound to one `G`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct SphereDecoder {
    g: RealMatrix,
    qr: QrFactors,
}

impl SphereDecoder {
    pub fn new(g: &RealMatrix) -> Result<Self> {
        Ok(SphereDecoder {
            g: g.clone(),
            qr: qr_positive(g)?,
        })
    }

    pub fn g(&self) -> &RealMatrix {
        &self.g
    }

    pub fn qr(&self) -> &QrFactors {
        &self.qr
    }

    fn check(&self, y: &RealVector, sets: &CandidateSets) -> Result<()> {
        if y.len() != self.g.nrows() {
            return Err(CilsError::DimensionMismatch(format!(
                "y has {} entries, G has {} rows",
                y.len(),
                self.g.nrows()
            )));
        }
        if sets.len() != self.g.ncols() {
            return Err(CilsError::DimensionMismatch(format!(
                "{} candidate sets for {} columns of G",
                sets.len(),
                self.g.ncols()
            )));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(CilsError::InvalidArgument(
                "y has non-finite entries".into(),
            ));
        }
        Ok(())
    }

    /// All `x` in the set product with `‖y − Gx‖² ≤ d²`, ascending by distance.
    pub fn decode(
        &self,
        y: &RealVector,
        d: f64,
        sets: &CandidateSets,
    ) -> Result<Vec<SphereCandidate>> {
        self.check(y, sets)?;
        if !(d.is_finite() && d >= 0.0) {
            return Err(CilsError::InvalidArgument(format!(
                "radius must be finite and nonnegative, got {d}"
            )));
        }
        let n = self.g.ncols();
        let z = self.qr.q1.transpose() * y;
        let outside = (self.qr.q2.transpose() * y).norm_squared();
        let d2 = d * d;
        // the tree search runs on a slightly wider ball; the final test is exact
        let budget = d2 * (1.0 + 2.0 * RADIUS_SLACK) + 1e-300;
        let accept = d2 * (1.0 + RADIUS_SLACK);

        let mut out = Vec::new();
        if outside <= budget {
            let mut search = Search {
                r: &self.qr.r,
                z: &z,
                sets,
                budget,
                x: vec![0; n],
                found: Vec::new(),
            };
            search.level(n - 1, outside);
            for x in search.found {
                let dist2 = residual_sq(y, &self.g, &x);
                if dist2 <= accept {
                    out.push(SphereCandidate { x, dist2 });
                }
            }
        }
        sort_candidates(&mut out);
        Ok(out)
    }

    /// Rounds the unconstrained least-squares solution into the candidate sets and
    /// returns its distance plus [`BABAI_EPS`].
    pub fn babai_point(&self, y: &RealVector, sets: &CandidateSets) -> Result<Vec<i64>> {
        self.check(y, sets)?;
        let n = self.g.ncols();
        let z = self.qr.q1.transpose() * y;
        let r = &self.qr.r;
        let mut xs = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= r[(i, j)] * xs[j];
            }
            xs[i] = s / r[(i, i)];
        }
        Ok(xs
            .iter()
            .zip(sets.iter())
            .map(|(&v, set)| nearest_member(set, v))
            .collect())
    }

    pub fn babai_radius(&self, y: &RealVector, sets: &CandidateSets) -> Result<f64> {
        let x = self.babai_point(y, sets)?;
        Ok(residual_sq(y, &self.g, &x).sqrt() + BABAI_EPS)
    }
}

/// Closest alphabet member to `v`; the smaller one on ties.
fn nearest_member(set: &Alphabet, v: f64) -> i64 {
    let vals = set.values();
    let idx = vals.partition_point(|&s| (s as f64) < v);
    let mut best = vals[idx.min(vals.len() - 1)];
    if idx > 0 {
        let below = vals[idx - 1];
        if (v - below as f64).abs() <= (best as f64 - v).abs() {
            best = below;
        }
    }
    best
}

struct Search<'a> {
    r: &'a RealMatrix,
    z: &'a RealVector,
    sets: &'a CandidateSets,
    budget: f64,
    x: Vec<i64>,
    found: Vec<Vec<i64>>,
}

impl Search<'_> {
    fn level(&mut self, i: usize, partial: f64) {
        let rii = self.r[(i, i)];
        let mut center = self.z[i];
        for j in i + 1..self.x.len() {
            center -= self.r[(i, j)] * self.x[j] as f64;
        }
        let rem = self.budget - partial;
        if rem < 0.0 {
            return;
        }
        let s = rem.sqrt();
        let set = self.sets.get(i);
        let lo = ((center - s) / rii - 1e-9).ceil().max(set.min() as f64);
        let hi = ((center + s) / rii + 1e-9).floor().min(set.max() as f64);
        if lo > hi {
            return;
        }
        for &v in set.within(lo as i64, hi as i64) {
            let t = center - rii * v as f64;
            let p = partial + t * t;
            if p > self.budget {
                continue;
            }
            self.x[i] = v;
            if i == 0 {
                self.found.push(self.x.clone());
            } else {
                self.level(i - 1, p);
            }
        }
    }
}

/// One-shot decode; see [`SphereDecoder::decode`].
pub fn sphere_decode(
    y: &RealVector,
    g: &RealMatrix,
    d: f64,
    sets: &CandidateSets,
) -> Result<Vec<SphereCandidate>> {
    SphereDecoder::new(g)?.decode(y, d, sets)
}

/// Radius guaranteed to contain at least the rounded least-squares point.
pub fn babai_radius(y: &RealVector, g: &RealMatrix, sets: &CandidateSets) -> Result<f64> {
    SphereDecoder::new(g)?.babai_radius(y, sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn s3() -> Alphabet {
        Alphabet::range(-1, 1).unwrap()
    }

    fn brute(y: &RealVector, g: &RealMatrix, d: f64, sets: &CandidateSets) -> Vec<SphereCandidate> {
        let n = sets.len();
        let mut idx = vec![0usize; n];
        let mut out = Vec::new();
        loop {
            let x: Vec<i64> = (0..n).map(|i| sets.get(i).values()[idx[i]]).collect();
            let dist2 = residual_sq(y, g, &x);
            if dist2 <= d * d * (1.0 + RADIUS_SLACK) {
                out.push(SphereCandidate { x, dist2 });
            }
            let mut k = 0;
            loop {
                if k == n {
                    sort_candidates(&mut out);
                    return out;
                }
                idx[k] += 1;
                if idx[k] < sets.get(k).len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn identity_qr() {
        let g = RealMatrix::identity(3, 3);
        let f = qr_positive(&g).unwrap();
        assert!((f.q1 - RealMatrix::identity(3, 3)).norm() < 1e-14);
        assert!((f.r - RealMatrix::identity(3, 3)).norm() < 1e-14);
        assert_eq!(f.q2.ncols(), 0);
    }

    #[test]
    fn example_qr_reconstructs() {
        let g = example1().instance.g;
        let f = qr_positive(&g).unwrap();
        assert!((&g - &f.q1 * &f.r).norm() <= 1e-10 * g.norm());
        assert_eq!(f.q2.shape(), (4, 1));
        assert!((f.q1.transpose() * &f.q2).norm() < 1e-12);
    }

    #[test]
    fn random_qr_is_orthonormal_with_positive_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = RealMatrix::from_fn(6, 4, |_, _| rng.sample(StandardNormal));
            let f = qr_positive(&g).unwrap();
            for i in 0..4 {
                assert!(f.r[(i, i)] > 0.0);
            }
            let q = nalgebra::DMatrix::from_fn(6, 6, |i, j| {
                if j < 4 {
                    f.q1[(i, j)]
                } else {
                    f.q2[(i, j - 4)]
                }
            });
            assert!((q.transpose() * &q - RealMatrix::identity(6, 6)).norm() < 1e-10);
            assert!((&g - &f.q1 * &f.r).norm() < 1e-10 * g.norm());
        }
    }

    #[test]
    fn rank_deficient_is_an_error() {
        let g = RealMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(
            qr_positive(&g),
            Err(CilsError::RankDeficient { .. })
        ));
        let wide = RealMatrix::zeros(2, 3);
        assert!(qr_positive(&wide).is_err());
    }

    #[test]
    fn example_first_column() {
        let ex = example1();
        let y = ex.instance.y.column(0).clone_owned();
        let sets = CandidateSets::uniform(&s3(), 3).unwrap();
        let out = sphere_decode(&y, &ex.instance.g, 0.5, &sets).unwrap();
        assert_eq!(out[0].x, vec![1, 0, 0]);
        assert_eq!(out, brute(&y, &ex.instance.g, 0.5, &sets));
    }

    #[test]
    fn example_second_column_with_restricted_sets() {
        let ex = example1();
        let y = ex.instance.y.column(1).clone_owned();
        let sets = CandidateSets::new(vec![Alphabet::new(vec![1]).unwrap(), s3(), s3()]).unwrap();
        let out = sphere_decode(&y, &ex.instance.g, 0.5, &sets).unwrap();
        assert_eq!(out[0].x, vec![1, -1, 1]);
        assert_eq!(out, brute(&y, &ex.instance.g, 0.5, &sets));
    }

    #[test]
    fn zero_residual_query() {
        let g = example1().instance.g;
        let x0 = [1i64, -1, 0];
        let y = &g * RealVector::from_iterator(3, x0.iter().map(|&v| v as f64));
        let sets = CandidateSets::uniform(&s3(), 3).unwrap();
        let out = sphere_decode(&y, &g, 1e-6, &sets).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].x, x0.to_vec());
        assert!(out[0].dist2 < 1e-20);
        // singleton sets force the point
        let forced = CandidateSets::new(
            x0.iter()
                .map(|&v| Alphabet::new(vec![v]).unwrap())
                .collect(),
        )
        .unwrap();
        let r = babai_radius(&y, &g, &forced).unwrap();
        assert!((r - (residual_sq(&y, &g, &x0).sqrt() + BABAI_EPS)).abs() < 1e-15);
        assert!(r < 1e-6);
    }

    #[test]
    fn zero_radius_off_lattice_is_empty() {
        let g = example1().instance.g;
        let y = RealVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        let sets = CandidateSets::uniform(&s3(), 3).unwrap();
        assert!(sphere_decode(&y, &g, 0.0, &sets).unwrap().is_empty());
    }

    #[test]
    fn babai_radius_is_never_empty() {
        let ex = example1();
        let sets = CandidateSets::uniform(&s3(), 3).unwrap();
        for j in 0..7 {
            let y = ex.instance.y.column(j).clone_owned();
            let r = babai_radius(&y, &ex.instance.g, &sets).unwrap();
            let out = sphere_decode(&y, &ex.instance.g, r, &sets).unwrap();
            assert!(!out.is_empty());
            assert!(out[0].dist2.sqrt() <= r);
        }
    }

    #[test]
    fn gapped_alphabet() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = RealMatrix::from_fn(5, 3, |_, _| rng.sample(StandardNormal));
        let y = RealVector::from_fn(5, |_, _| 3.0 * rng.sample::<f64, _>(StandardNormal));
        let sets = CandidateSets::new(vec![
            Alphabet::new(vec![-4, 0, 3]).unwrap(),
            Alphabet::new(vec![-1, 2]).unwrap(),
            Alphabet::new(vec![-3, -2, 5]).unwrap(),
        ])
        .unwrap();
        for d in [0.5, 2.0, 5.0, 20.0] {
            assert_eq!(
                sphere_decode(&y, &g, d, &sets).unwrap(),
                brute(&y, &g, d, &sets)
            );
        }
    }

    #[test]
    fn bad_inputs() {
        let g = example1().instance.g;
        let sets = CandidateSets::uniform(&s3(), 3).unwrap();
        let y3 = RealVector::zeros(3);
        assert!(matches!(
            sphere_decode(&y3, &g, 1.0, &sets),
            Err(CilsError::DimensionMismatch(_))
        ));
        let y = RealVector::zeros(4);
        assert!(sphere_decode(&y, &g, -1.0, &sets).is_err());
        assert!(sphere_decode(&y, &g, f64::NAN, &sets).is_err());
        let sets2 = CandidateSets::uniform(&s3(), 2).unwrap();
        assert!(sphere_decode(&y, &g, 1.0, &sets2).is_err());
    }

    #[test]
    fn nearest_member_rounding() {
        let s = Alphabet::new(vec![-3, 0, 4]).unwrap();
        assert_eq!(nearest_member(&s, -10.0), -3);
        assert_eq!(nearest_member(&s, -1.4), 0);
        assert_eq!(nearest_member(&s, -1.5), -3);
        assert_eq!(nearest_member(&s, 2.1), 4);
        assert_eq!(nearest_member(&s, 99.0), 4);
    }
}
