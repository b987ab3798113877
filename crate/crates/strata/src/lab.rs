//! Four-and-higher-mode experiments: graph tensors, pair-based pencil ranks,
//! the four-cycle max-flow identity, the T_{p,q} separation numbers, and a
//! two-point evaluation semiring with its dominance gap.
//!
//! For a pair of modes (a, b), the multilinear pencil of a d-mode tensor is
//! the n_a x n_b matrix over F(z) whose entries are multilinear forms in one
//! variable group per remaining mode; its generic rank extends the 3-mode
//! commutative rank and is computed the same way (symbolic minors for small
//! matrices, random evaluation over a large extension otherwise).

use crate::edge::{
    acr, combinations, minimize_form, sym_det, CommutativeRank, CrMethod, EdgeError, MPoly,
    CR_TRIALS, EXACT_PENCIL_SIZE, EXACT_PENCIL_VARS,
};
use crate::field::{Field, FieldError, Scalar};
use crate::linalg::Mat;
use crate::real::Real;
use crate::tensor::{Tensor, TensorError, MAX_DENSE_ENTRIES};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;

/// Tolerance for the closed-form cross-check of the flattened T_{p,q}
/// functional, and for declaring two of its values separated.
pub const TPQ_TOL_NUM: i64 = 1;
pub const TPQ_TOL_DEN: u64 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabError(pub String);

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for LabError {}

impl From<TensorError> for LabError {
    fn from(e: TensorError) -> LabError {
        LabError(e.0)
    }
}

impl From<EdgeError> for LabError {
    fn from(e: EdgeError) -> LabError {
        LabError(e.0)
    }
}

impl From<FieldError> for LabError {
    fn from(e: FieldError) -> LabError {
        LabError(e.0)
    }
}

/// Undirected graph on vertices 1..=d with positive integer edge weights;
/// every absent edge counts as weight 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    d: usize,
    weights: BTreeMap<(usize, usize), usize>,
}

impl WeightedGraph {
    pub fn new(d: usize) -> WeightedGraph {
        WeightedGraph { d, weights: BTreeMap::new() }
    }

    /// Four vertices with the cycle edges (1,3), (2,3), (2,4), (1,4).
    pub fn four_cycle(n13: usize, n23: usize, n24: usize, n14: usize) -> WeightedGraph {
        let mut g = WeightedGraph::new(4);
        g.set_weight(1, 3, n13).unwrap();
        g.set_weight(2, 3, n23).unwrap();
        g.set_weight(2, 4, n24).unwrap();
        g.set_weight(1, 4, n14).unwrap();
        g
    }

    pub fn vertices(&self) -> usize {
        self.d
    }

    pub fn set_weight(&mut self, i: usize, j: usize, w: usize) -> Result<(), LabError> {
        if i == j || !(1..=self.d).contains(&i) || !(1..=self.d).contains(&j) {
            return Err(LabError(format!("({i}, {j}) is not an edge on {} vertices", self.d)));
        }
        if w == 0 {
            return Err(LabError("edge weights must be positive".into()));
        }
        self.weights.insert((i.min(j), i.max(j)), w);
        Ok(())
    }

    pub fn weight(&self, i: usize, j: usize) -> usize {
        *self.weights.get(&(i.min(j), i.max(j))).unwrap_or(&1)
    }
}

/// Diagonal tensor of size n supported on modes i, j (1-based) of a d-mode
/// space, all other modes one-dimensional.
pub fn diagonal_on_pair(
    f: &Field,
    d: usize,
    i: usize,
    j: usize,
    n: usize,
) -> Result<Tensor, LabError> {
    if i == j || !(1..=d).contains(&i) || !(1..=d).contains(&j) || n == 0 {
        return Err(LabError(format!("no size-{n} diagonal on modes ({i}, {j}) of {d}")));
    }
    let mut dims = vec![1usize; d];
    dims[i - 1] = n;
    dims[j - 1] = n;
    let mut t = Tensor::zeros(f, dims)?;
    for s in 0..n {
        let mut idx = vec![0usize; d];
        idx[i - 1] = s;
        idx[j - 1] = s;
        t.set(&idx, f.one());
    }
    Ok(t)
}

/// Tensor product of pair diagonals over all edges, in lexicographic edge
/// order: mode k gets dimension prod_j w(k, j), and the support consists of
/// one entry per choice of an index on every edge.
pub fn graph_tensor(f: &Field, g: &WeightedGraph) -> Result<Tensor, LabError> {
    let d = g.vertices();
    if d < 3 {
        return Err(LabError(format!("graph tensors need at least 3 vertices, got {d}")));
    }
    let mut volume: u128 = 1;
    for k in 1..=d {
        let mut dim: u128 = 1;
        for j in 1..=d {
            if j != k {
                dim = dim.saturating_mul(g.weight(k, j) as u128);
            }
        }
        volume = volume.saturating_mul(dim);
    }
    if volume > MAX_DENSE_ENTRIES as u128 {
        return Err(LabError("graph tensor exceeds the dense size cap".into()));
    }
    let mut acc = Tensor::zeros(f, vec![1; d])?;
    acc.set(&vec![0; d], f.one());
    for i in 1..=d {
        for j in i + 1..=d {
            let factor = diagonal_on_pair(f, d, i, j, g.weight(i, j))?;
            acc = acc.tensor_product(&factor)?;
        }
    }
    Ok(acc)
}

/// Generic rank of the multilinear pencil of `t` with respect to the mode
/// pair (a, b), 1-based. Exact symbolic minors when the matrix is at most
/// 4 x 4 with a small variable count, Monte Carlo otherwise.
pub fn multilinear_cr(
    t: &Tensor,
    a: usize,
    b: usize,
    seed: u64,
) -> Result<CommutativeRank, LabError> {
    let d = t.order();
    if d < 3 {
        return Err(LabError(format!("multilinear pencils need 3 or more modes, got {d}")));
    }
    if a == b || !(1..=d).contains(&a) || !(1..=d).contains(&b) {
        return Err(LabError(format!("({a}, {b}) is not a mode pair of a {d}-mode tensor")));
    }
    let dims = t.dims();
    let (na, nb) = (dims[a - 1], dims[b - 1]);
    if t.is_zero() {
        return Ok(CommutativeRank { value: 0, method: CrMethod::ExactMinors });
    }
    let others: Vec<usize> = (0..d).filter(|&k| k != a - 1 && k != b - 1).collect();
    let vars: usize = others.iter().map(|&k| dims[k]).sum();
    let f = t.field();

    if na <= EXACT_PENCIL_SIZE && nb <= EXACT_PENCIL_SIZE && vars <= EXACT_PENCIL_VARS {
        let mut offsets = Vec::with_capacity(others.len());
        let mut off = 0usize;
        for &k in &others {
            offsets.push(off);
            off += dims[k];
        }
        let mut mat: Vec<Vec<MPoly>> =
            (0..na).map(|_| (0..nb).map(|_| MPoly::zero()).collect()).collect();
        for idx in t.support() {
            let mut exp = vec![0u32; vars];
            for (o, &k) in others.iter().enumerate() {
                exp[offsets[o] + idx[k]] = 1;
            }
            mat[idx[a - 1]][idx[b - 1]].add_term(f, exp, t.get(&idx).clone());
        }
        for r in (1..=na.min(nb)).rev() {
            for rows in combinations(na, r) {
                for cols in combinations(nb, r) {
                    let minor: Vec<Vec<MPoly>> = rows
                        .iter()
                        .map(|&i| cols.iter().map(|&j| mat[i][j].clone()).collect())
                        .collect();
                    if !sym_det(f, &minor, vars).is_zero() {
                        return Ok(CommutativeRank { value: r, method: CrMethod::ExactMinors });
                    }
                }
            }
        }
        return Ok(CommutativeRank { value: 0, method: CrMethod::ExactMinors });
    }

    let need = 4u64
        .saturating_mul(((na + nb) as u64).saturating_mul((na + nb) as u64))
        .saturating_mul(vars as u64)
        .max(4);
    let big = f.extend_for_genericity(need);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6c_6372);
    let mut best = 0usize;
    for _ in 0..CR_TRIALS {
        let vals: Vec<Vec<Scalar>> = others
            .iter()
            .map(|&k| (0..dims[k]).map(|_| big.rand_elem(&mut rng)).collect())
            .collect();
        let mut m = Mat::zeros(&big, na, nb);
        for idx in t.support() {
            let mut c = big.embed(f, t.get(&idx));
            for (o, &k) in others.iter().enumerate() {
                c = big.mul(&c, &vals[o][idx[k]]);
            }
            let cur = big.add(m.get(idx[a - 1], idx[b - 1]), &c);
            m.set(idx[a - 1], idx[b - 1], cur);
        }
        best = best.max(m.rank());
    }
    Ok(CommutativeRank {
        value: best,
        method: CrMethod::MonteCarlo { trials: CR_TRIALS, field: big.spec() },
    })
}

/// The 4-mode separating family: size-p diagonals on the pairs (1,3) and
/// (2,4), size-q diagonals on (1,4) and (2,3), summed.
pub fn tpq_tensor(f: &Field, p: usize, q: usize) -> Result<Tensor, LabError> {
    let s1 = diagonal_on_pair(f, 4, 1, 3, p)?;
    let s2 = diagonal_on_pair(f, 4, 1, 4, q)?;
    let s3 = diagonal_on_pair(f, 4, 2, 4, p)?;
    let s4 = diagonal_on_pair(f, 4, 2, 3, q)?;
    Ok(s1.direct_sum(&s2)?.direct_sum(&s3)?.direct_sum(&s4)?)
}

/// Regroups the last two modes of a 4-mode tensor into one, lexicographically
/// (the same packing the tensor product uses).
pub fn merge_last_modes(t: &Tensor) -> Result<Tensor, LabError> {
    let dims = t.dims();
    if dims.len() != 4 {
        return Err(LabError(format!("mode merging expects 4 modes, got {}", dims.len())));
    }
    let (d1, d2, d3, d4) = (dims[0], dims[1], dims[2], dims[3]);
    let mut out = Tensor::zeros(t.field(), vec![d1, d2, d3 * d4])?;
    for idx in t.support() {
        out.set(&[idx[0], idx[1], idx[2] * d4 + idx[3]], t.get(&idx).clone());
    }
    Ok(out)
}

/// The two functional values that separate on the T_{p,q} family.
#[derive(Clone, Debug)]
pub struct TpqNumbers {
    /// min over rho of 2(p^rho + q^(1-rho)), by convex search.
    pub acr12: Real,
    /// Asymptotic commutative rank of the (V1, V2, V3 x V4) flattening,
    /// computed by the filtration pipeline; equals 2(sqrt p + sqrt q).
    pub acr34: Real,
    /// Whether acr12 falls short of acr34 by more than the pinned tolerance;
    /// happens exactly when p != q.
    pub separated: bool,
}

pub fn tpq_numbers(p: usize, q: usize, seed: u64) -> Result<TpqNumbers, LabError> {
    if p == 0 || q == 0 {
        return Err(LabError("the separating family needs positive sizes".into()));
    }
    let (acr12, _rho) = minimize_form(&[(p, 1), (p, 1), (1, q), (1, q)]);

    // The family is combinatorial (0/1 entries, diagonal blocks), so the
    // pipeline value does not depend on the field; any prime works.
    let f = Field::prime(1009)?;
    let flat = merge_last_modes(&tpq_tensor(&f, p, q)?)?;
    let pipeline = acr(&flat, seed)?;
    let two = Real::from_u64(2);
    let closed = &two * &(&Real::from_u64(p as u64).sqrt() + &Real::from_u64(q as u64).sqrt());
    let tol = Real::from_ratio(TPQ_TOL_NUM, TPQ_TOL_DEN);
    if pipeline.value > &closed + &tol || pipeline.value < &closed - &tol {
        return Err(LabError(format!(
            "flattened pipeline value {} disagrees with the closed form {}",
            pipeline.value.to_f64(),
            closed.to_f64()
        )));
    }
    let separated = &pipeline.value - &acr12 > tol;
    Ok(TpqNumbers { acr12, acr34: pipeline.value, separated })
}

/// Polynomial in two variables with nonnegative integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NNPoly2 {
    coeffs: BTreeMap<(u32, u32), BigUint>,
}

impl NNPoly2 {
    pub fn zero() -> NNPoly2 {
        NNPoly2 { coeffs: BTreeMap::new() }
    }

    pub fn one() -> NNPoly2 {
        NNPoly2::monomial(0, 0, BigUint::one())
    }

    /// c * a^i * b^j; the zero coefficient gives the zero polynomial.
    pub fn monomial(i: u32, j: u32, c: BigUint) -> NNPoly2 {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert((i, j), c);
        }
        NNPoly2 { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigUint {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn add(&self, rhs: &NNPoly2) -> NNPoly2 {
        let mut out = self.clone();
        for (&e, c) in &rhs.coeffs {
            let cur = out.coeffs.entry(e).or_insert_with(BigUint::zero);
            *cur += c;
        }
        out
    }

    pub fn mul(&self, rhs: &NNPoly2) -> NNPoly2 {
        let mut out = NNPoly2::zero();
        for (&(i1, j1), c1) in &self.coeffs {
            for (&(i2, j2), c2) in &rhs.coeffs {
                let cur = out.coeffs.entry((i1 + i2, j1 + j2)).or_insert_with(BigUint::zero);
                *cur += c1 * c2;
            }
        }
        out
    }

    pub fn eval(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let mut acc = BigUint::zero();
        for (&(i, j), c) in &self.coeffs {
            acc += c * a.pow(i) * b.pow(j);
        }
        acc
    }

    /// (a + b)^n by repeated multiplication.
    pub fn binomial_power(n: u32) -> NNPoly2 {
        let base = NNPoly2::monomial(1, 0, BigUint::one()).add(&NNPoly2::monomial(
            0,
            1,
            BigUint::one(),
        ));
        let mut out = NNPoly2::one();
        for _ in 0..n {
            out = out.mul(&base);
        }
        out
    }
}

/// Largest integer below the polynomial in the two-point evaluation order:
/// the smaller of p(1, 2) and p(2, 1).
pub fn two_point_subrank(p: &NNPoly2) -> BigUint {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    p.eval(&one, &two).min(p.eval(&two, &one))
}

/// How far the best single binomial term falls short of the full power.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub n: usize,
    /// Subrank of (a+b)^n; equals 3^n.
    pub power_value: BigUint,
    pub best_k: usize,
    /// max over k of binom(n, k) times the subrank of a^k b^(n-k).
    pub best_term: BigUint,
    /// best_term^2 <= 2^(3n), the exact form of the 2^(3n/2) ceiling.
    pub within_exponential_bound: bool,
    /// Strict shortfall best_term < power_value.
    pub strict_gap: bool,
}

pub fn monomial_dominance_gap(n: usize) -> Result<GapReport, LabError> {
    if n == 0 || n > 64 {
        return Err(LabError(format!("exponent {n} is outside 1..=64")));
    }
    let poly = NNPoly2::binomial_power(n as u32);
    let power_value = two_point_subrank(&poly);
    let mut best_k = 0usize;
    let mut best_term = BigUint::zero();
    for k in 0..=n {
        let c = poly.coeff(k as u32, (n - k) as u32);
        let mono = NNPoly2::monomial(k as u32, (n - k) as u32, BigUint::one());
        let term = c * two_point_subrank(&mono);
        if term > best_term {
            best_term = term;
            best_k = k;
        }
    }
    let within_exponential_bound = &best_term * &best_term <= BigUint::one() << (3 * n);
    let strict_gap = best_term < power_value;
    Ok(GapReport { n, power_value, best_k, best_term, within_exponential_bound, strict_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge::commutative_rank;
    use rand::Rng;

    #[test]
    fn unit_and_single_edge_graph_tensors() {
        let f = Field::prime(7).unwrap();
        let unit = graph_tensor(&f, &WeightedGraph::four_cycle(1, 1, 1, 1)).unwrap();
        assert_eq!(unit.dims(), &[1, 1, 1, 1]);
        assert_eq!(unit.support().len(), 1);

        let single = graph_tensor(&f, &WeightedGraph::four_cycle(2, 1, 1, 1)).unwrap();
        assert_eq!(single.dims(), &[2, 1, 2, 1]);
        let expected = diagonal_on_pair(&f, 4, 1, 3, 2).unwrap();
        assert_eq!(single, expected);
    }

    #[test]
    fn four_cycle_matches_the_displayed_support() {
        let f = Field::prime(5).unwrap();
        let (n13, n23, n24, n14) = (2usize, 3usize, 4usize, 5usize);
        let t = graph_tensor(&f, &WeightedGraph::four_cycle(n13, n23, n24, n14)).unwrap();
        assert_eq!(t.dims(), &[n13 * n14, n23 * n24, n13 * n23, n14 * n24]);
        assert_eq!(t.support().len(), 120);
        let mut expected =
            Tensor::zeros(&f, vec![n13 * n14, n23 * n24, n13 * n23, n14 * n24]).unwrap();
        for i13 in 0..n13 {
            for i23 in 0..n23 {
                for i24 in 0..n24 {
                    for i14 in 0..n14 {
                        expected.set(
                            &[
                                i13 * n14 + i14,
                                i23 * n24 + i24,
                                i13 * n23 + i23,
                                i14 * n24 + i24,
                            ],
                            f.one(),
                        );
                    }
                }
            }
        }
        assert_eq!(t, expected);
    }

    #[test]
    fn triangle_graph_tensors_work() {
        let f = Field::prime(3).unwrap();
        let mut g = WeightedGraph::new(3);
        g.set_weight(1, 2, 2).unwrap();
        g.set_weight(1, 3, 3).unwrap();
        let t = graph_tensor(&f, &g).unwrap();
        assert_eq!(t.dims(), &[6, 2, 3]);
        let mut expected = Tensor::zeros(&f, vec![6, 2, 3]).unwrap();
        for i12 in 0..2 {
            for i13 in 0..3 {
                expected.set(&[i12 * 3 + i13, i12, i13], f.one());
            }
        }
        assert_eq!(t, expected);

        let too_small = WeightedGraph::new(2);
        assert!(graph_tensor(&f, &too_small).is_err());
    }

    #[test]
    fn graph_tensor_rejects_oversize() {
        let f = Field::prime(2).unwrap();
        let g = WeightedGraph::four_cycle(64, 64, 64, 64);
        assert!(graph_tensor(&f, &g).is_err());
    }

    #[test]
    fn embedded_diagonals_have_pair_rank() {
        let f = Field::prime(7).unwrap();
        let d3 = diagonal_on_pair(&f, 4, 1, 2, 3).unwrap();
        let got = multilinear_cr(&d3, 1, 2, 1).unwrap();
        assert_eq!(got.value, 3);
        assert_eq!(got.method, CrMethod::ExactMinors);

        let d5 = diagonal_on_pair(&f, 4, 1, 2, 5).unwrap();
        let got = multilinear_cr(&d5, 1, 2, 1).unwrap();
        assert_eq!(got.value, 5);
        assert!(matches!(got.method, CrMethod::MonteCarlo { trials: 3, .. }));

        // The same diagonal seen along its own pair has full rank, but along
        // the pair (1, 2) it collapses to a single generic column.
        let d13 = diagonal_on_pair(&f, 4, 1, 3, 2).unwrap();
        assert_eq!(multilinear_cr(&d13, 1, 3, 1).unwrap().value, 2);
        assert_eq!(multilinear_cr(&d13, 1, 2, 1).unwrap().value, 1);
    }

    #[test]
    fn quantum_max_flow_on_small_cycles() {
        let f = Field::prime(1009).unwrap();
        let cases = [
            (2usize, 3usize, 1usize, 2usize),
            (3, 2, 2, 3),
            (1, 3, 2, 2),
            (2, 3, 5, 4),
        ];
        for (n13, n23, n24, n14) in cases {
            let t = graph_tensor(&f, &WeightedGraph::four_cycle(n13, n23, n24, n14)).unwrap();
            let got = multilinear_cr(&t, 1, 2, 9).unwrap();
            let want = n13.min(n23) * n14.min(n24);
            assert_eq!(got.value, want, "cycle ({n13}, {n23}, {n24}, {n14})");
        }
    }

    #[test]
    fn three_mode_pencils_match_the_commutative_rank() {
        let f = Field::prime(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for seed in 0..5u64 {
            let t = Tensor::rand(&f, vec![3, 3, 3], &mut rng).unwrap();
            let here = multilinear_cr(&t, 1, 2, seed).unwrap();
            let reference = commutative_rank(&t, 3, seed).unwrap();
            assert_eq!(here.value, reference.value);
            assert_eq!(here.method, CrMethod::ExactMinors);
        }
    }

    #[test]
    fn multilinear_cr_is_additive_on_direct_sums() {
        let f = Field::prime(7).unwrap();
        let s = diagonal_on_pair(&f, 4, 1, 2, 2).unwrap();
        let t = diagonal_on_pair(&f, 4, 1, 3, 2).unwrap();
        let sum = s.direct_sum(&t).unwrap();
        let got = multilinear_cr(&sum, 1, 2, 3).unwrap();
        let parts = multilinear_cr(&s, 1, 2, 3).unwrap().value
            + multilinear_cr(&t, 1, 2, 3).unwrap().value;
        assert_eq!(got.value, parts);
        assert_eq!(got.value, 3);

        let u = diagonal_on_pair(&f, 4, 1, 2, 3).unwrap();
        let sum2 = s.direct_sum(&u).unwrap();
        assert_eq!(multilinear_cr(&sum2, 1, 2, 3).unwrap().value, 5);
    }

    #[test]
    fn multilinear_cr_is_supermultiplicative() {
        let f = Field::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..5u64 {
            let s = Tensor::rand(&f, vec![2, 2, 2, 2], &mut rng).unwrap();
            let t = Tensor::rand(&f, vec![2, 2, 2, 2], &mut rng).unwrap();
            let prod = s.tensor_product(&t).unwrap();
            let cs = multilinear_cr(&s, 1, 2, trial).unwrap().value;
            let ct = multilinear_cr(&t, 1, 2, trial).unwrap().value;
            let cp = multilinear_cr(&prod, 1, 2, trial).unwrap().value;
            assert!(cp >= cs * ct, "trial {trial}: {cp} < {cs} * {ct}");
        }
    }

    #[test]
    fn tpq_symmetric_pairs_collapse() {
        for p in [2usize, 4] {
            let got = tpq_numbers(p, p, 5).unwrap();
            let want = 4.0 * (p as f64).sqrt();
            assert!((got.acr12.to_f64() - want).abs() < 1e-12);
            assert!((got.acr34.to_f64() - want).abs() < 1e-12);
            assert!(!got.separated);
        }
    }

    #[test]
    fn tpq_four_nine_separates() {
        let got = tpq_numbers(4, 9, 5).unwrap();
        assert!((got.acr34.to_f64() - 10.0).abs() < 1e-9);
        assert!(got.acr12.to_f64() < 10.0 - 1e-6);
        assert!(got.separated);

        let mut oracle = f64::INFINITY;
        for i in 0..=100_000 {
            let rho = i as f64 / 100_000.0;
            oracle = oracle.min(2.0 * (4f64.powf(rho) + 9f64.powf(1.0 - rho)));
        }
        assert!((got.acr12.to_f64() - oracle).abs() < 1e-6);
    }

    #[test]
    fn tpq_separation_tracks_inequality() {
        for p in 1..=5usize {
            for q in 1..=5usize {
                let got = tpq_numbers(p, q, 2).unwrap();
                assert_eq!(got.separated, p != q, "({p}, {q})");
            }
        }
    }

    #[test]
    fn two_point_subrank_examples() {
        let a_plus_b = NNPoly2::monomial(1, 0, BigUint::one())
            .add(&NNPoly2::monomial(0, 1, BigUint::one()));
        assert_eq!(two_point_subrank(&a_plus_b), BigUint::from(3u32));
        assert_eq!(two_point_subrank(&NNPoly2::one()), BigUint::one());
        let a2b = NNPoly2::monomial(2, 1, BigUint::one());
        assert_eq!(two_point_subrank(&a2b), BigUint::from(2u32));
        assert_eq!(two_point_subrank(&NNPoly2::zero()), BigUint::zero());
    }

    #[test]
    fn two_point_subrank_is_superadditive_and_supermultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rand_poly = |rng: &mut ChaCha8Rng| {
            let mut p = NNPoly2::zero();
            for _ in 0..4 {
                let i = rng.gen_range(0..4u32);
                let j = rng.gen_range(0..4u32);
                let c = BigUint::from(rng.gen_range(0..5u32));
                p = p.add(&NNPoly2::monomial(i, j, c));
            }
            p
        };
        for _ in 0..25 {
            let s = rand_poly(&mut rng);
            let t = rand_poly(&mut rng);
            let qs = two_point_subrank(&s);
            let qt = two_point_subrank(&t);
            assert!(two_point_subrank(&s.add(&t)) >= &qs + &qt);
            assert!(two_point_subrank(&s.mul(&t)) >= &qs * &qt);
        }
    }

    #[test]
    fn binomial_powers_and_the_dominance_gap() {
        let cube = NNPoly2::binomial_power(3);
        for (k, want) in [(0u32, 1u32), (1, 3), (2, 3), (3, 1)] {
            assert_eq!(cube.coeff(k, 3 - k), BigUint::from(want));
        }

        let got = monomial_dominance_gap(10).unwrap();
        assert_eq!(got.power_value, BigUint::from(59049u32));
        assert_eq!(got.best_term, BigUint::from(8064u32));
        assert_eq!(got.best_k, 5);
        assert!(got.within_exponential_bound);
        assert!(got.strict_gap);

        for n in 1..=12 {
            let r = monomial_dominance_gap(n).unwrap();
            assert!(r.within_exponential_bound, "n = {n}");
            assert!(r.strict_gap, "n = {n}");
        }
        assert!(monomial_dominance_gap(0).is_err());
        assert!(monomial_dominance_gap(65).is_err());
    }
}
