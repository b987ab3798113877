//! Edge support functionals and rank invariants of 3-mode tensors.
//!
//! The central quantity is the weighted functional attached to an edge of
//! the weight simplex: pick the mode kappa that gets weight zero, form the
//! pencil of maps indexed by that mode, and evaluate
//!
//!   zeta(T) = sum_u n_u^rho m_u^(1-rho)
//!
//! over the dimension data (n_u, m_u) of the Harder-Narasimhan filtration of
//! the concise reduction. Minimizing over rho yields the asymptotic
//! commutative rank. Everything here reports exact block data next to the
//! high-precision value so results can be re-derived independently.
//!
//! Modes are named 1, 2, 3 throughout this module, matching the reports it
//! produces; the underlying tensor API is 0-based.

use crate::field::{Field, FieldSpec, Scalar};
use crate::linalg::Mat;
use crate::quiver::{QuiverError, Rep};
use crate::real::Real;
use crate::tensor::{verify_restriction, RestrictionTriple, Tensor, TensorError};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeError(pub String);

impl fmt::Display for EdgeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for EdgeError {}

impl From<QuiverError> for EdgeError {
    fn from(e: QuiverError) -> EdgeError {
        EdgeError(e.0)
    }
}

impl From<TensorError> for EdgeError {
    fn from(e: TensorError) -> EdgeError {
        EdgeError(e.0)
    }
}

/// Width of the final bracket in the rho minimization.
pub const ACR_RHO_TOL_NUM: i64 = 1;
pub const ACR_RHO_TOL_DEN: u64 = 1_000_000_000_000;

/// Zero-weight mode kappa (1-based) plus the weight rho put on the lower of
/// the two remaining modes; the other gets 1 - rho.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeParam {
    mode: usize,
    rho: BigRational,
}

impl EdgeParam {
    pub fn new(mode: usize, rho: BigRational) -> Result<EdgeParam, EdgeError> {
        if !(1..=3).contains(&mode) {
            return Err(EdgeError(format!("mode {mode} is not one of 1, 2, 3")));
        }
        if rho.is_negative() || rho > BigRational::one() {
            return Err(EdgeError(format!("weight {rho} is outside [0, 1]")));
        }
        Ok(EdgeParam { mode, rho })
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn rho(&self) -> &BigRational {
        &self.rho
    }
}

/// A functional value carrying its own derivation: the HN dimension data of
/// the concise reduction, from which `value` is re-computable.
#[derive(Clone, Debug)]
pub struct FunctionalValue {
    pub value: Real,
    /// Blocks (n_u, m_u); value = sum of n_u^rho m_u^(1-rho).
    pub exact_form: Vec<(usize, usize)>,
    pub param: EdgeParam,
}

/// HN dimension data of the concise reduction of the pencil along `mode`.
pub fn edge_form(t: &Tensor, mode: usize, seed: u64) -> Result<Vec<(usize, usize)>, EdgeError> {
    if t.order() != 3 {
        return Err(EdgeError("edge functionals need 3-mode tensors".into()));
    }
    if t.is_zero() {
        return Err(EdgeError("edge functional of the zero tensor".into()));
    }
    if !(1..=3).contains(&mode) {
        return Err(EdgeError(format!("mode {mode} is not one of 1, 2, 3")));
    }
    let rep = Rep::from_tensor_mode(t, mode - 1);
    let reduced = rep.concise_reduce();
    let hn = reduced.rep.hn_filtration(seed)?;
    Ok(hn.dim_data())
}

/// Evaluates sum of n^rho m^(1-rho) over the blocks.
pub fn evaluate_form(form: &[(usize, usize)], rho: &Real) -> Real {
    let co = &Real::one() - rho;
    let mut acc = Real::zero();
    for &(n, m) in form {
        let nw = Real::from_u64(n as u64).pow(rho);
        let mw = Real::from_u64(m as u64).pow(&co);
        acc = &acc + &(&nw * &mw);
    }
    acc
}

pub fn zeta_edge(t: &Tensor, param: &EdgeParam, seed: u64) -> Result<FunctionalValue, EdgeError> {
    let exact_form = edge_form(t, param.mode, seed)?;
    let value = evaluate_form(&exact_form, &Real::from_big_ratio(&param.rho));
    Ok(FunctionalValue { value, exact_form, param: param.clone() })
}

/// Result of minimizing the edge functional over rho.
#[derive(Clone, Debug)]
pub struct AcrValue {
    pub value: Real,
    pub argmin_rho: Real,
    pub exact_form: Vec<(usize, usize)>,
}

/// Asymptotic commutative rank: the minimum over rho in [0,1] of the edge
/// functional of the pencil along mode 3.
pub fn acr(t: &Tensor, seed: u64) -> Result<AcrValue, EdgeError> {
    let form = edge_form(t, 3, seed)?;
    let (value, argmin_rho) = minimize_form(&form);
    Ok(AcrValue { value, argmin_rho, exact_form: form })
}

/// Minimizes f(rho) = sum n_u^rho m_u^(1-rho) over [0, 1]. f is convex, and
/// strictly so except in the single-block balanced case, because HN slopes
/// n_u/m_u are pairwise distinct.
pub fn minimize_form(form: &[(usize, usize)]) -> (Real, Real) {
    if let [(n, m)] = form {
        // Monotone single term: the smaller dimension at the endpoint that
        // selects it; constant when the block is square.
        let (rho, value) = match n.cmp(m) {
            std::cmp::Ordering::Less => (Real::one(), *n),
            std::cmp::Ordering::Greater => (Real::zero(), *m),
            std::cmp::Ordering::Equal => (Real::from_ratio(1, 2), *n),
        };
        return (Real::from_u64(value as u64), rho);
    }
    // A form invariant under swapping (n, m) -> (m, n) gives f(rho) =
    // f(1 - rho); with convexity the minimum sits exactly at 1/2.
    let mut sorted: Vec<(usize, usize)> = form.to_vec();
    let mut swapped: Vec<(usize, usize)> = form.iter().map(|&(n, m)| (m, n)).collect();
    sorted.sort();
    swapped.sort();
    if sorted == swapped {
        let half = Real::from_ratio(1, 2);
        return (evaluate_form(form, &half), half);
    }
    // Golden-section search; exact real comparisons keep the bracketing
    // sound all the way down to the pinned tolerance.
    let inv_phi = &(&Real::from_u64(5).sqrt() - &Real::one()) / &Real::from_u64(2);
    let tol = Real::from_ratio(ACR_RHO_TOL_NUM, ACR_RHO_TOL_DEN);
    let mut a = Real::zero();
    let mut b = Real::one();
    let mut x1 = &b - &(&inv_phi * &(&b - &a));
    let mut x2 = &a + &(&inv_phi * &(&b - &a));
    let mut f1 = evaluate_form(form, &x1);
    let mut f2 = evaluate_form(form, &x2);
    while &(&b - &a) > &tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1.clone();
            f2 = f1.clone();
            x1 = &b - &(&inv_phi * &(&b - &a));
            f1 = evaluate_form(form, &x1);
        } else {
            a = x1;
            x1 = x2.clone();
            f1 = f2.clone();
            x2 = &a + &(&inv_phi * &(&b - &a));
            f2 = evaluate_form(form, &x2);
        }
    }
    let mid = &(&a + &b) / &Real::from_u64(2);
    (evaluate_form(form, &mid), mid)
}

/// Rank of the flattening that separates `mode` (1-based) from the rest.
pub fn gauge_point(t: &Tensor, mode: usize) -> usize {
    assert!((1..=t.order()).contains(&mode), "mode out of range");
    t.flattening(mode - 1).rank()
}

/// How a commutative rank value was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrMethod {
    /// Symbolic minor expansion; the value is exact.
    ExactMinors,
    /// Max rank over random evaluations; a lower bound with high probability
    /// of being exact.
    MonteCarlo { trials: usize, field: FieldSpec },
}

#[derive(Clone, Debug)]
pub struct CommutativeRank {
    pub value: usize,
    pub method: CrMethod,
}

/// Entry cap for the symbolic path: a full determinant of linear forms in k
/// variables can reach k^size monomials.
pub(crate) const EXACT_PENCIL_SIZE: usize = 4;
pub(crate) const EXACT_PENCIL_VARS: usize = 32;
pub(crate) const CR_TRIALS: usize = 3;

/// Generic rank of the pencil of slices along `mode` (1-based): exact via
/// symbolic minors for matrices up to 4x4, Monte Carlo over a large
/// extension otherwise.
pub fn commutative_rank(t: &Tensor, mode: usize, seed: u64) -> Result<CommutativeRank, EdgeError> {
    if t.order() != 3 {
        return Err(EdgeError("commutative rank needs a 3-mode tensor".into()));
    }
    if !(1..=3).contains(&mode) {
        return Err(EdgeError(format!("mode {mode} is not one of 1, 2, 3")));
    }
    let slices = t.slices(mode - 1);
    let k = slices.len();
    let (n, m) = if k == 0 { (0, 0) } else { (slices[0].rows(), slices[0].cols()) };
    if n.min(m).min(k) == 0 || t.is_zero() {
        return Ok(CommutativeRank { value: 0, method: CrMethod::ExactMinors });
    }
    if n <= EXACT_PENCIL_SIZE && m <= EXACT_PENCIL_SIZE && k <= EXACT_PENCIL_VARS {
        let value = pencil_rank_exact(t.field(), &slices);
        return Ok(CommutativeRank { value, method: CrMethod::ExactMinors });
    }
    let f = t.field();
    let need = 4 * ((n + m) as u64).pow(2) * k as u64;
    let big = f.extend_for_genericity(need);
    let emb: Vec<Mat> = slices
        .iter()
        .map(|a| Mat::from_fn(&big, n, m, |i, j| big.embed(f, a.get(i, j))))
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6372616e6b);
    let mut best = 0;
    for _ in 0..CR_TRIALS {
        let mut acc = Mat::zeros(&big, n, m);
        for a in &emb {
            let z = big.rand_elem(&mut rng);
            let scaled = Mat::from_fn(&big, n, m, |i, j| big.mul(&z, a.get(i, j)));
            acc = acc.add(&scaled);
        }
        best = best.max(acc.rank());
    }
    Ok(CommutativeRank {
        value: best,
        method: CrMethod::MonteCarlo { trials: CR_TRIALS, field: big.spec() },
    })
}

/// Sparse multivariate polynomial with monomials ordered by exponent vector;
/// just enough arithmetic for small symbolic determinants.
#[derive(Clone)]
pub(crate) struct MPoly {
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl MPoly {
    pub(crate) fn zero() -> MPoly {
        MPoly { terms: BTreeMap::new() }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn add_term(&mut self, f: &Field, exp: Vec<u32>, c: Scalar) {
        if f.is_zero(&c) {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = f.add(e.get(), &c);
                if f.is_zero(&s) {
                    e.remove();
                } else {
                    e.insert(s);
                }
            }
        }
    }

    pub(crate) fn mul(&self, f: &Field, rhs: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exp = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(f, exp, f.mul(ca, cb));
            }
        }
        out
    }
}

/// Largest r with a nonzero r x r minor of sum_l x_l A_l, by symbolic
/// expansion. Slices must be nonempty and nonzero overall.
fn pencil_rank_exact(f: &Field, slices: &[Mat]) -> usize {
    let k = slices.len();
    let (n, m) = (slices[0].rows(), slices[0].cols());
    let entry = |i: usize, j: usize| -> MPoly {
        let mut p = MPoly::zero();
        for (l, a) in slices.iter().enumerate() {
            let mut exp = vec![0u32; k];
            exp[l] = 1;
            p.add_term(f, exp, a.get(i, j).clone());
        }
        p
    };
    for r in (1..=n.min(m)).rev() {
        for rows in combinations(n, r) {
            for cols in combinations(m, r) {
                let minor: Vec<Vec<MPoly>> = rows
                    .iter()
                    .map(|&i| cols.iter().map(|&j| entry(i, j)).collect())
                    .collect();
                if !sym_det(f, &minor, k).is_zero() {
                    return r;
                }
            }
        }
    }
    0
}

/// Determinant of a matrix of polynomials in `nvars` variables, by signed
/// permutation expansion; fine for size <= 4.
pub(crate) fn sym_det(f: &Field, m: &[Vec<MPoly>], nvars: usize) -> MPoly {
    let r = m.len();
    let mut det = MPoly::zero();
    let mut idx: Vec<usize> = (0..r).collect();
    permute_all(&mut idx, &mut |perm, odd| {
        let mut prod = MPoly::zero();
        prod.add_term(f, vec![0; nvars], f.one());
        for (i, &j) in perm.iter().enumerate() {
            prod = prod.mul(f, &m[i][j]);
            if prod.is_zero() {
                break;
            }
        }
        for (exp, c) in prod.terms {
            let signed = if odd { f.neg(&c) } else { c };
            det.add_term(f, exp, signed);
        }
    });
    det
}

/// Visits every permutation with its parity, generating by swaps.
fn permute_all(idx: &mut Vec<usize>, visit: &mut impl FnMut(&[usize], bool)) {
    fn rec(idx: &mut Vec<usize>, k: usize, odd: &mut bool, visit: &mut impl FnMut(&[usize], bool)) {
        if k == idx.len() {
            visit(idx, *odd);
            return;
        }
        for i in k..idx.len() {
            idx.swap(k, i);
            let flipped = i != k;
            if flipped {
                *odd = !*odd;
            }
            rec(idx, k + 1, odd, visit);
            if flipped {
                *odd = !*odd;
            }
            idx.swap(k, i);
        }
    }
    let mut odd = false;
    rec(idx, 0, &mut odd, visit);
}

pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(n: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, r, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, r, 0, &mut cur, &mut out);
    out
}

/// Non-commutative rank of the pencil attached to a representation:
/// min over subspaces of n - dim X + dim V(X), from the weighted deficiency
/// at weights (1, 1).
pub fn ncrk(rep: &Rep, seed: u64) -> Result<usize, EdgeError> {
    let d = rep.weighted_deficiency(1, 1, seed)?;
    Ok(rep.dim_u() - d.value as usize)
}

#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub cr: usize,
    pub ncr: usize,
    pub holds: bool,
    pub method: CrMethod,
}

/// Checks CR <= NCR <= 2 CR on the mode-3 pencil.
pub fn cr_ncr_sandwich(t: &Tensor, seed: u64) -> Result<SandwichReport, EdgeError> {
    let cr = commutative_rank(t, 3, seed)?;
    let rep = Rep::from_tensor_mode(t, 2);
    let ncr = ncrk(&rep, seed)?;
    let holds = cr.value <= ncr && ncr <= 2 * cr.value;
    Ok(SandwichReport { cr: cr.value, ncr, holds, method: cr.method })
}

/// A claimed restriction from the N-th power of a tensor onto a matrix
/// multiplication tensor with dimensions (E, H, L).
#[derive(Clone, Debug)]
pub struct Extraction {
    pub power: usize,
    pub e: usize,
    pub h: usize,
    pub l: usize,
    pub triple: RestrictionTriple,
}

/// Certified lower bound (E^rho H L^(1-rho))^(1/N) on the edge functional at
/// (rho, 1-rho, 0). The restriction is re-verified exactly first; a bound is
/// never emitted from an unverified extraction.
pub fn value_lower_bound(
    t: &Tensor,
    rho: &BigRational,
    ext: &Extraction,
) -> Result<Real, EdgeError> {
    if ext.power == 0 {
        return Err(EdgeError("power must be at least 1".into()));
    }
    if rho.is_negative() || rho > &BigRational::one() {
        return Err(EdgeError(format!("weight {rho} is outside [0, 1]")));
    }
    let mut tp = t.clone();
    for _ in 1..ext.power {
        tp = tp.tensor_product(t)?;
    }
    let target = Tensor::matrix_mult(t.field(), ext.e, ext.h, ext.l)?;
    if !verify_restriction(&tp, &target, &ext.triple)? {
        return Err(EdgeError(
            "restriction does not carry the power onto the target; bound rejected".into(),
        ));
    }
    let rho_r = Real::from_big_ratio(rho);
    let co = &Real::one() - &rho_r;
    let ew = Real::from_u64(ext.e as u64).pow(&rho_r);
    let lw = Real::from_u64(ext.l as u64).pow(&co);
    let base = &(&ew * &Real::from_u64(ext.h as u64)) * &lw;
    Ok(base.pow(&Real::from_ratio(1, ext.power as u64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn zeta_of_matrix_multiplication_tensors() {
        let f = Field::prime(7).unwrap();
        for (e, h, l) in [(2, 2, 2), (3, 1, 2), (1, 3, 1), (2, 3, 1)] {
            let t = Tensor::matrix_mult(&f, e, h, l).unwrap();
            for (num, den) in [(0, 1), (1, 2), (1, 3), (1, 1)] {
                let param = EdgeParam::new(3, ratio(num, den)).unwrap();
                let got = zeta_edge(&t, &param, 11).unwrap();
                assert_eq!(got.exact_form, vec![(e * h, h * l)]);
                let rho = num as f64 / den as f64;
                let want = (e as f64).powf(rho) * h as f64 * (l as f64).powf(1.0 - rho);
                assert!(
                    (got.value.to_f64() - want).abs() < 1e-12,
                    "{e}x{h}x{l} at rho {num}/{den}"
                );
            }
        }
    }

    #[test]
    fn zeta_of_diagonal_is_dimension_for_every_weight() {
        let f = Field::prime(3).unwrap();
        let t = Tensor::diagonal(&f, 4, 3);
        for mode in 1..=3 {
            for (num, den) in [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)] {
                let param = EdgeParam::new(mode, ratio(num, den)).unwrap();
                let got = zeta_edge(&t, &param, 5).unwrap();
                assert!((got.value.to_f64() - 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zeta_of_two_block_sums() {
        let f = Field::prime(5).unwrap();
        for (p, q) in [(2, 3), (3, 2), (2, 2)] {
            let a = Tensor::matrix_mult(&f, p, 1, 1).unwrap();
            let b = Tensor::matrix_mult(&f, 1, 1, q).unwrap();
            let t = a.direct_sum(&b).unwrap();
            let param = EdgeParam::new(3, ratio(1, 2)).unwrap();
            let got = zeta_edge(&t, &param, 3).unwrap();
            assert_eq!(got.exact_form, vec![(p, 1), (1, q)]);
            let want = (p as f64).sqrt() + (q as f64).sqrt();
            assert!((got.value.to_f64() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn acr_shortcuts_and_search() {
        let f = Field::prime(5).unwrap();
        // Single square block: value q, minimizer pinned to 1/2.
        let t = Tensor::matrix_mult(&f, 1, 3, 1).unwrap();
        let got = acr(&t, 1).unwrap();
        assert!((got.value.to_f64() - 3.0).abs() < 1e-12);
        assert!((got.argmin_rho.to_f64() - 0.5).abs() < 1e-15);

        // Single rectangular blocks: the smaller side, at the endpoint.
        let t = Tensor::matrix_mult(&f, 2, 1, 3).unwrap();
        let got = acr(&t, 1).unwrap();
        assert!((got.value.to_f64() - 2.0).abs() < 1e-12);
        assert!((got.argmin_rho.to_f64() - 1.0).abs() < 1e-15);
        let t = Tensor::matrix_mult(&f, 3, 1, 2).unwrap();
        let got = acr(&t, 1).unwrap();
        assert!((got.value.to_f64() - 2.0).abs() < 1e-12);
        assert!(got.argmin_rho.to_f64().abs() < 1e-15);

        // Symmetric two-block form: exactly 2 sqrt(p) at rho = 1/2.
        let p = 4;
        let a = Tensor::matrix_mult(&f, p, 1, 1).unwrap();
        let b = Tensor::matrix_mult(&f, 1, 1, p).unwrap();
        let got = acr(&a.direct_sum(&b).unwrap(), 1).unwrap();
        assert!((got.value.to_f64() - 4.0).abs() < 1e-12);
        assert!((got.argmin_rho.to_f64() - 0.5).abs() < 1e-15);

        // Asymmetric: golden section against a dense scan oracle.
        let a = Tensor::matrix_mult(&f, 2, 1, 1).unwrap();
        let b = Tensor::matrix_mult(&f, 1, 1, 3).unwrap();
        let got = acr(&a.direct_sum(&b).unwrap(), 1).unwrap();
        let oracle = (0..=1_000_000)
            .map(|i| {
                let r = i as f64 / 1e6;
                2f64.powf(r) + 3f64.powf(1.0 - r)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((got.value.to_f64() - oracle).abs() < 1e-9);
    }

    #[test]
    fn form_evaluation_is_convex_in_rho() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let blocks = rng.gen_range(1..=4);
            let form: Vec<(usize, usize)> = (0..blocks)
                .map(|_| (rng.gen_range(1..=6), rng.gen_range(1..=6)))
                .collect();
            let a = ratio(rng.gen_range(0..=4), 4);
            let b = ratio(rng.gen_range(0..=4), 4);
            let mid = (&a + &b) / BigRational::from(BigInt::from(2));
            let fa = evaluate_form(&form, &Real::from_big_ratio(&a));
            let fb = evaluate_form(&form, &Real::from_big_ratio(&b));
            let fm = evaluate_form(&form, &Real::from_big_ratio(&mid));
            let avg = &(&fa + &fb) / &Real::from_u64(2);
            assert!(fm.to_f64() <= avg.to_f64() + 1e-12);
        }
    }

    #[test]
    fn gauge_points_and_endpoint_identities() {
        let f = Field::prime(5).unwrap();
        let t = Tensor::diagonal(&f, 3, 3);
        for mode in 1..=3 {
            assert_eq!(gauge_point(&t, mode), 3);
        }
        let t = Tensor::matrix_mult(&f, 2, 3, 2).unwrap();
        assert_eq!(gauge_point(&t, 1), 6);
        assert_eq!(gauge_point(&t, 2), 6);
        assert_eq!(gauge_point(&t, 3), 4);

        // rho = 1 counts source dimensions of the concise reduction, which
        // is the mode-1 gauge point; rho = 0 the mode-2 gauge point.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let t = Tensor::rand(&f, vec![3, 3, 2], &mut rng).unwrap();
            if t.is_zero() {
                continue;
            }
            let one = zeta_edge(&t, &EdgeParam::new(3, ratio(1, 1)).unwrap(), 9).unwrap();
            assert!((one.value.to_f64() - gauge_point(&t, 1) as f64).abs() < 1e-9);
            let zero = zeta_edge(&t, &EdgeParam::new(3, ratio(0, 1)).unwrap(), 9).unwrap();
            assert!((zero.value.to_f64() - gauge_point(&t, 2) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn commutative_rank_small_cases() {
        let f = Field::prime(7).unwrap();
        // Identity pencil: full rank, exact path.
        let t = Tensor::matrix_mult(&f, 1, 3, 1).unwrap();
        let got = commutative_rank(&t, 3, 1).unwrap();
        assert_eq!(got.value, 3);
        assert_eq!(got.method, CrMethod::ExactMinors);

        // Same tensor at q = 5 goes through the random path.
        let t = Tensor::matrix_mult(&f, 1, 5, 1).unwrap();
        let got = commutative_rank(&t, 3, 1).unwrap();
        assert_eq!(got.value, 5);
        assert!(matches!(got.method, CrMethod::MonteCarlo { trials: 3, .. }));

        // A pencil of generic rows has rank 1.
        let t = Tensor::matrix_mult(&f, 3, 1, 1).unwrap();
        let got = commutative_rank(&t, 3, 1).unwrap();
        assert_eq!(got.value, 1);
        assert_eq!(got.method, CrMethod::ExactMinors);

        // Skew 2x2 example: x [[0,1],[0,0]] + y [[0,0],[1,0]] has
        // determinant -xy, so the rank is 2 despite every slice being rank 1.
        let mut t = Tensor::zeros(&f, vec![2, 2, 2]).unwrap();
        t.set(&[0, 1, 0], f.one());
        t.set(&[1, 0, 1], f.one());
        let got = commutative_rank(&t, 3, 1).unwrap();
        assert_eq!(got.value, 2);
    }

    #[test]
    fn commutative_rank_is_supermultiplicative() {
        let f = Field::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..5 {
            let a = Tensor::rand(&f, vec![2, 2, 2], &mut rng).unwrap();
            let b = Tensor::rand(&f, vec![2, 2, 2], &mut rng).unwrap();
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let ra = commutative_rank(&a, 3, trial).unwrap().value;
            let rb = commutative_rank(&b, 3, trial).unwrap().value;
            let rab = commutative_rank(&a.tensor_product(&b).unwrap(), 3, trial).unwrap().value;
            assert!(rab >= ra * rb, "product rank {rab} below {ra}*{rb}");
        }
    }

    #[test]
    fn ncr_values_and_sandwich() {
        let f = Field::prime(101).unwrap();
        let t = Tensor::matrix_mult(&f, 1, 4, 1).unwrap();
        let rep = Rep::from_tensor_mode(&t, 2);
        assert_eq!(ncrk(&rep, 7).unwrap(), 4);

        let t = Tensor::matrix_mult(&f, 3, 1, 1).unwrap();
        let rep = Rep::from_tensor_mode(&t, 2);
        assert_eq!(ncrk(&rep, 7).unwrap(), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for trial in 0..15 {
            let t = Tensor::rand(&f, vec![3, 3, 3], &mut rng).unwrap();
            if t.is_zero() {
                continue;
            }
            let rep = cr_ncr_sandwich(&t, trial).unwrap();
            assert!(rep.holds, "sandwich failed: cr={} ncr={}", rep.cr, rep.ncr);
        }
    }

    #[test]
    fn lower_bounds_require_verified_extractions() {
        let f = Field::prime(5).unwrap();
        let t = Tensor::matrix_mult(&f, 2, 3, 2).unwrap();
        let id = |n: usize| Mat::identity(&f, n);
        let ext = Extraction {
            power: 1,
            e: 2,
            h: 3,
            l: 2,
            triple: RestrictionTriple { maps: vec![id(6), id(6), id(4)] },
        };
        let rho = ratio(1, 3);
        let bound = value_lower_bound(&t, &rho, &ext).unwrap();
        let param = EdgeParam::new(3, rho.clone()).unwrap();
        let zeta = zeta_edge(&t, &param, 1).unwrap();
        assert!((bound.to_f64() - zeta.value.to_f64()).abs() < 1e-12);

        // Claiming a larger target with the same maps must be rejected.
        let bad = Extraction {
            power: 1,
            e: 2,
            h: 3,
            l: 2,
            triple: RestrictionTriple { maps: vec![id(6), id(6), Mat::zeros(&f, 4, 4)] },
        };
        assert!(value_lower_bound(&t, &rho, &bad).is_err());
    }

    #[test]
    fn restriction_monotonicity_on_a_constructed_pair() {
        // The 2x2x2 diagonal is a restriction of the 3x3x3 diagonal via
        // coordinate projections; the functional must not increase.
        let f = Field::prime(5).unwrap();
        let s = Tensor::diagonal(&f, 3, 3);
        let t = Tensor::diagonal(&f, 2, 3);
        let proj = {
            let mut m = Mat::zeros(&f, 3, 2);
            m.set(0, 0, f.one());
            m.set(1, 1, f.one());
            m
        };
        let triple = RestrictionTriple { maps: vec![proj.clone(), proj.clone(), proj] };
        assert!(verify_restriction(&s, &t, &triple).unwrap());
        let param = EdgeParam::new(3, ratio(2, 5)).unwrap();
        let zs = zeta_edge(&s, &param, 1).unwrap();
        let zt = zeta_edge(&t, &param, 1).unwrap();
        assert!(zt.value <= zs.value);
    }
}
