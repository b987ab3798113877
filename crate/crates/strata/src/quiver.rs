//! Representations of the k-arrow Kronecker quiver and their
//! Harder-Narasimhan stratification.
//!
//! A representation is a tuple of k matrices A_1, ..., A_k of shape n x m,
//! read as linear maps U = F^n -> V = F^m acting on row vectors. For a
//! subspace X of U, V(X) denotes the span of the images X * A_i. The slope of
//! a nonzero X is dim X / dim V(X) (infinite when V(X) = 0). A representation
//! is semistable when no nonzero X has slope exceeding n / m.
//!
//! The computational core is `weighted_deficiency`: the exact maximum of
//! q dim X - p dim V(X), certified (not Monte Carlo) by a second Wong
//! sequence on a (q, p) blow-up over a large enough extension field. A run
//! either produces a witness together with a matching rank identity that
//! proves optimality, or visibly escapes the image of the sampled map, in
//! which case it is retried and, if needed, the blow-up is enlarged. Wrong
//! answers are never returned silently.

use crate::field::{Field, Scalar};
use crate::linalg::{Mat, Subspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverError(pub String);

impl fmt::Display for QuiverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "quiver error: {}", self.0)
    }
}

impl std::error::Error for QuiverError {}

/// Deterministic stream splitting: one master seed, independent draws per
/// (domain, index) pair.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, PartialEq, Eq)]
pub struct Rep {
    field: Field,
    n: usize,
    m: usize,
    maps: Vec<Mat>,
}

impl fmt::Debug for Rep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Rep({} maps {}x{} over {:?})",
            self.maps.len(),
            self.n,
            self.m,
            self.field
        )
    }
}

/// Slope of a subrepresentation: dim U / dim V(U), with V(U) = 0 giving the
/// infinite slope. Finite slopes are kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slope {
    Infinite,
    Finite { num: u64, den: u64 },
}

impl Slope {
    pub fn finite(num: u64, den: u64) -> Slope {
        assert!(den > 0);
        if num == 0 {
            return Slope::Finite { num: 0, den: 1 };
        }
        let g = gcd(num, den);
        Slope::Finite { num: num / g, den: den / g }
    }

    pub fn of_dims(n: u64, m: u64) -> Slope {
        if m == 0 {
            Slope::Infinite
        } else {
            Slope::finite(n, m)
        }
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Slope::Infinite, Slope::Infinite) => Ordering::Equal,
            (Slope::Infinite, _) => Ordering::Greater,
            (_, Slope::Infinite) => Ordering::Less,
            (
                Slope::Finite { num: a, den: b },
                Slope::Finite { num: c, den: d },
            ) => (*a as u128 * *d as u128).cmp(&(*c as u128 * *b as u128)),
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Infinite => write!(f, "inf"),
            Slope::Finite { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

/// One step of a filtration: the pair of accumulated subspaces (U_i, V_i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnStep {
    pub u: Subspace,
    pub v: Subspace,
}

/// The Harder-Narasimhan filtration: an increasing chain of subrepresentation
/// pairs ending at the full spaces, whose successive subquotients are
/// semistable with strictly decreasing slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnFiltration {
    pub steps: Vec<HnStep>,
}

impl HnFiltration {
    /// Per-step dimension increments (n_u, m_u).
    pub fn dim_data(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.steps.len());
        let (mut pu, mut pv) = (0usize, 0usize);
        for s in &self.steps {
            out.push((s.u.dim() - pu, s.v.dim() - pv));
            pu = s.u.dim();
            pv = s.v.dim();
        }
        out
    }

    pub fn slopes(&self) -> Vec<Slope> {
        self.dim_data()
            .iter()
            .map(|&(n, m)| Slope::of_dims(n as u64, m as u64))
            .collect()
    }

    /// No infinite-slope or zero-slope part.
    pub fn is_concise(&self) -> bool {
        self.dim_data().iter().all(|&(n, m)| n > 0 && m > 0)
    }

    /// Re-derive every defining property against `rep`. Expensive; meant for
    /// tests and verification commands.
    pub fn verify(&self, rep: &Rep, seed: u64) -> Result<(), QuiverError> {
        let err = |msg: String| Err(QuiverError(msg));
        if self.steps.is_empty() {
            if rep.n == 0 && rep.m == 0 {
                return Ok(());
            }
            return err("empty filtration for a nonzero representation".into());
        }
        let last = self.steps.last().unwrap();
        if !(last.u.is_full() && last.v.is_full()) {
            return err("filtration does not end at the full spaces".into());
        }
        let mut prev: Option<&HnStep> = None;
        for s in &self.steps {
            if let Some(p) = prev {
                if !s.u.contains(&p.u) || !s.v.contains(&p.v) {
                    return err("filtration is not an increasing chain".into());
                }
                if s.u.dim() == p.u.dim() && s.v.dim() == p.v.dim() {
                    return err("filtration repeats a step".into());
                }
            }
            if !s.v.contains(&rep.image_of(&s.u)) {
                return err("step does not define a subrepresentation".into());
            }
            prev = Some(s);
        }
        if self.dim_data().iter().any(|&d| d == (0, 0)) {
            return err("filtration contains an empty step".into());
        }
        let slopes = self.slopes();
        for w in slopes.windows(2) {
            if w[0] <= w[1] {
                return err(format!("slopes not strictly decreasing: {} then {}", w[0], w[1]));
            }
        }
        // Each subquotient must be semistable.
        for i in 0..self.steps.len() {
            let sq = rep.subquotient(
                i.checked_sub(1).map(|j| &self.steps[j]),
                &self.steps[i],
            );
            match sq.is_semistable(mix_seed(seed, 0xfe11 + i as u64))? {
                Stability::Semistable => {}
                Stability::Unstable { .. } => {
                    return err(format!("subquotient {i} is not semistable"));
                }
            }
        }
        Ok(())
    }
}

/// Outcome of a semistability test. An unstable representation carries the
/// minimal subspace of excessive slope together with the positive deficiency
/// max (m' dim X - n' dim V(X)) at the reduced weights (m', n').
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stability {
    Semistable,
    Unstable { witness: Subspace, deficiency: u64 },
}

/// Certified value and minimal witness of q dim X - p dim V(X).
#[derive(Debug, Clone)]
pub struct Deficiency {
    pub value: i64,
    pub witness: Subspace,
    /// Blow-up multiplier that produced the certificate (1 = no escalation).
    pub blowup: u64,
    /// Sampling attempts consumed across all blow-up sizes.
    pub trials: u32,
}

impl Rep {
    pub fn new(field: &Field, n: usize, m: usize, maps: Vec<Mat>) -> Rep {
        for a in &maps {
            assert_eq!(a.rows(), n);
            assert_eq!(a.cols(), m);
            assert_eq!(a.field(), field);
        }
        Rep { field: field.clone(), n, m, maps }
    }

    /// The pencil attached to one mode of an order-3 tensor: the chosen mode
    /// indexes the maps, the remaining modes (in ascending order) give the
    /// source and target.
    pub fn from_tensor_mode(t: &crate::tensor::Tensor, mode: usize) -> Rep {
        assert_eq!(t.order(), 3);
        let arranged = t.mode_to_last(mode);
        let dims = arranged.dims().to_vec();
        let maps = arranged.slices(2);
        Rep::new(t.field(), dims[0], dims[1], maps)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim_u(&self) -> usize {
        self.n
    }

    pub fn dim_v(&self) -> usize {
        self.m
    }

    pub fn maps(&self) -> &[Mat] {
        &self.maps
    }

    pub fn num_maps(&self) -> usize {
        self.maps.len()
    }

    /// V(X): the span of the images of X under every map.
    pub fn image_of(&self, x: &Subspace) -> Subspace {
        assert_eq!(x.ambient_dim(), self.n);
        let mut acc = Subspace::zero(&self.field, self.m);
        for a in &self.maps {
            acc = acc.sum(&x.image(a));
        }
        acc
    }

    /// Common kernel: {u : u A_i = 0 for all i}.
    pub fn common_kernel(&self) -> Subspace {
        if self.maps.is_empty() {
            return Subspace::full(&self.field, self.n);
        }
        let mut stacked = self.maps[0].clone();
        for a in &self.maps[1..] {
            stacked = stacked.hstack(a);
        }
        stacked.left_kernel()
    }

    pub fn total_image(&self) -> Subspace {
        self.image_of(&Subspace::full(&self.field, self.n))
    }

    pub fn transpose_rep(&self) -> Rep {
        Rep::new(
            &self.field,
            self.m,
            self.n,
            self.maps.iter().map(|a| a.transpose()).collect(),
        )
    }

    pub fn direct_sum(&self, other: &Rep) -> Rep {
        assert_eq!(self.field, other.field);
        assert_eq!(self.maps.len(), other.maps.len());
        let maps = self
            .maps
            .iter()
            .zip(&other.maps)
            .map(|(a, b)| {
                let mut m = Mat::zeros(&self.field, self.n + other.n, self.m + other.m);
                for i in 0..self.n {
                    for j in 0..self.m {
                        m.set(i, j, a.get(i, j).clone());
                    }
                }
                for i in 0..other.n {
                    for j in 0..other.m {
                        m.set(self.n + i, self.m + j, b.get(i, j).clone());
                    }
                }
                m
            })
            .collect();
        Rep::new(&self.field, self.n + other.n, self.m + other.m, maps)
    }

    /// Tensor product: all pairwise Kronecker products A_i (x) B_j, with
    /// composite indices packed left factor major.
    pub fn tensor_prod(&self, other: &Rep) -> Rep {
        assert_eq!(self.field, other.field);
        let f = &self.field;
        let (n2, m2) = (other.n, other.m);
        let mut maps = Vec::with_capacity(self.maps.len() * other.maps.len());
        for a in &self.maps {
            for b in &other.maps {
                let mut k = Mat::zeros(f, self.n * n2, self.m * m2);
                for i1 in 0..self.n {
                    for j1 in 0..self.m {
                        let av = a.get(i1, j1);
                        if f.is_zero(av) {
                            continue;
                        }
                        for i2 in 0..n2 {
                            for j2 in 0..m2 {
                                let bv = b.get(i2, j2);
                                if f.is_zero(bv) {
                                    continue;
                                }
                                k.set(i1 * n2 + i2, j1 * m2 + j2, f.mul(av, bv));
                            }
                        }
                    }
                }
                maps.push(k);
            }
        }
        Rep::new(f, self.n * n2, self.m * m2, maps)
    }

    /// Reinterpret the representation over an extension field, embedding
    /// every entry.
    pub fn base_change(&self, big: &Field) -> Rep {
        let maps = self
            .maps
            .iter()
            .map(|a| {
                Mat::from_fn(big, a.rows(), a.cols(), |i, j| big.embed(&self.field, a.get(i, j)))
            })
            .collect();
        Rep::new(big, self.n, self.m, maps)
    }

    /// The induced representation on (F^n / U, F^m / V); requires
    /// image(U) inside V. Coordinates come from the canonical completions.
    pub fn quotient_by(&self, u: &Subspace, v: &Subspace) -> Rep {
        assert!(v.contains(&self.image_of(u)), "not a subrepresentation");
        let cu = u.completion_rows();
        let pv = quotient_projection(v);
        let maps = self.maps.iter().map(|a| cu.mul(a).mul(&pv)).collect();
        Rep::new(&self.field, self.n - u.dim(), self.m - v.dim(), maps)
    }

    /// Restrict to a subrepresentation (U, V) with image(U) inside V,
    /// expressed in the canonical bases of U and V.
    pub fn restrict_to(&self, u: &Subspace, v: &Subspace) -> Rep {
        assert!(v.contains(&self.image_of(u)), "not a subrepresentation");
        let maps = self
            .maps
            .iter()
            .map(|a| {
                let rows = u.basis().mul(a);
                let coord_rows: Vec<Vec<Scalar>> = (0..rows.rows())
                    .map(|i| v.coords(rows.row(i)))
                    .collect();
                Mat::from_rows(&self.field, v.dim(), coord_rows)
            })
            .collect();
        Rep::new(&self.field, u.dim(), v.dim(), maps)
    }

    /// Subquotient between two filtration steps (`lo` may be None for the
    /// bottom): restrict to hi, then quotient by the image of lo.
    pub fn subquotient(&self, lo: Option<&HnStep>, hi: &HnStep) -> Rep {
        let restricted = self.restrict_to(&hi.u, &hi.v);
        match lo {
            None => restricted,
            Some(lo) => {
                // Express lo's spaces in hi's coordinates.
                let f = &self.field;
                let lo_u_rows: Vec<Vec<Scalar>> = (0..lo.u.dim())
                    .map(|i| hi.u.coords(lo.u.basis().row(i)))
                    .collect();
                let lo_v_rows: Vec<Vec<Scalar>> = (0..lo.v.dim())
                    .map(|i| hi.v.coords(lo.v.basis().row(i)))
                    .collect();
                let lo_u = Subspace::from_rows(Mat::from_rows(f, hi.u.dim(), lo_u_rows));
                let lo_v = Subspace::from_rows(Mat::from_rows(f, hi.v.dim(), lo_v_rows));
                restricted.quotient_by(&lo_u, &lo_v)
            }
        }
    }

    /// Certified maximum of q dim X - p dim V(X) over subspaces X of F^n,
    /// with the unique minimal witness attaining it.
    pub fn weighted_deficiency(&self, q: u64, p: u64, seed: u64) -> Result<Deficiency, QuiverError> {
        assert!(q >= 1 && p >= 1, "weights must be positive");
        deficiency_min(self, q, p, seed)
    }

    /// Like `weighted_deficiency` but returning the unique maximal witness,
    /// obtained from the minimal witness of the transposed representation
    /// under the order-reversing duality X <-> ann V(X).
    pub fn weighted_deficiency_max(
        &self,
        q: u64,
        p: u64,
        seed: u64,
    ) -> Result<Deficiency, QuiverError> {
        assert!(q >= 1 && p >= 1, "weights must be positive");
        let dual = deficiency_min(&self.transpose_rep(), p, q, mix_seed(seed, 0xd0a1))?;
        // U_max = ann of the span of Y_min A_i^T = left kernel of
        // [A_1 Y^T | ... | A_k Y^T].
        let u_max = if dual.witness.dim() == 0 {
            Subspace::full(&self.field, self.n)
        } else {
            let yt = dual.witness.basis().transpose();
            let mut stacked: Option<Mat> = None;
            for a in &self.maps {
                let block = a.mul(&yt);
                stacked = Some(match stacked {
                    None => block,
                    Some(s) => s.hstack(&block),
                });
            }
            match stacked {
                None => Subspace::full(&self.field, self.n),
                Some(s) => s.left_kernel(),
            }
        };
        let value = q as i64 * u_max.dim() as i64
            - p as i64 * self.image_of(&u_max).dim() as i64;
        // Duality identity: dual value = primal value + p m - q n.
        let expected = dual.value - (p as i64 * self.m as i64) + (q as i64 * self.n as i64);
        if value != expected {
            return Err(QuiverError(format!(
                "duality mismatch: witness value {value}, transposed certificate implies {expected}"
            )));
        }
        Ok(Deficiency { value, witness: u_max, blowup: dual.blowup, trials: dual.trials })
    }

    /// Semistability test with reduced weights (m', n') = (m, n)/gcd.
    pub fn is_semistable(&self, seed: u64) -> Result<Stability, QuiverError> {
        if self.n == 0 || self.m == 0 {
            return Ok(Stability::Semistable);
        }
        let g = gcd(self.n as u64, self.m as u64);
        let (q, p) = (self.m as u64 / g, self.n as u64 / g);
        let d = self.weighted_deficiency(q, p, seed)?;
        if d.value > 0 {
            Ok(Stability::Unstable { witness: d.witness, deficiency: d.value as u64 })
        } else {
            Ok(Stability::Semistable)
        }
    }

    /// The first Harder-Narasimhan step: the maximal subspace U1 of maximal
    /// slope, its span of images V1, and the slope itself. Requires n >= 1.
    pub fn max_destabilizer(
        &self,
        seed: u64,
    ) -> Result<(Subspace, Subspace, Slope), QuiverError> {
        assert!(self.n >= 1, "needs a nonzero source space");
        let kernel = self.common_kernel();
        if kernel.dim() > 0 {
            let v1 = Subspace::zero(&self.field, self.m);
            return Ok((kernel, v1, Slope::Infinite));
        }
        // All candidate slopes a/b with 1 <= a <= n, 1 <= b <= m, reduced,
        // descending. The true maximum is among them, and the predicate
        // "some nonzero subspace has slope >= a/b" is monotone along the
        // list, so a binary search settles it.
        let mut cands: Vec<(u64, u64)> = Vec::new();
        for a in 1..=self.n as u64 {
            for b in 1..=self.m as u64 {
                if gcd(a, b) == 1 {
                    cands.push((a, b));
                }
            }
        }
        cands.sort_by(|x, y| (y.0 * x.1).cmp(&(x.0 * y.1)));
        let mut results: Vec<Option<Deficiency>> = vec![None; cands.len()];
        let probe = |idx: usize, results: &mut Vec<Option<Deficiency>>| -> Result<bool, QuiverError> {
            if results[idx].is_none() {
                let (a, b) = cands[idx];
                let d = self.weighted_deficiency_max(b, a, mix_seed(seed, 0xabcd + idx as u64))?;
                results[idx] = Some(d);
            }
            Ok(results[idx].as_ref().unwrap().witness.dim() > 0)
        };
        let (mut lo, mut hi) = (0usize, cands.len() - 1);
        let mut found = None;
        while lo <= hi {
            let mid = (lo + hi) / 2;
            if probe(mid, &mut results)? {
                found = Some(mid);
                if mid == 0 {
                    break;
                }
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
        }
        let idx = found.ok_or_else(|| {
            QuiverError("no destabilizing slope found; representation is corrupt".into())
        })?;
        let cert = results[idx].take().unwrap();
        let (a, b) = cands[idx];
        if cert.value != 0 {
            return Err(QuiverError(format!(
                "slope search settled at {a}/{b} but deficiency is {}; candidates were skipped",
                cert.value
            )));
        }
        let v1 = self.image_of(&cert.witness);
        Ok((cert.witness, v1, Slope::finite(a, b)))
    }

    /// The Harder-Narasimhan filtration, computed by repeatedly splitting off
    /// the maximal destabilizer of the current quotient and lifting back.
    pub fn hn_filtration(&self, seed: u64) -> Result<HnFiltration, QuiverError> {
        if self.n == 0 && self.m == 0 {
            return Ok(HnFiltration { steps: Vec::new() });
        }
        let mut steps: Vec<HnStep> = Vec::new();
        let mut u_floor = Subspace::zero(&self.field, self.n);
        // Rows of lift_u are original-space representatives of the current
        // quotient's source coordinates; the quotient itself is rebuilt from
        // the original representation at every round.
        let mut lift_u = Mat::identity(&self.field, self.n);
        let mut cur = self.clone();
        let mut depth = 0u64;
        while cur.n > 0 {
            depth += 1;
            let (w, _, _) = cur.max_destabilizer(mix_seed(seed, 0x57e9 + depth))?;
            let u_next = u_floor.sum(&Subspace::from_rows(w.basis().mul(&lift_u)));
            let v_next = self.image_of(&u_next);
            steps.push(HnStep { u: u_next.clone(), v: v_next.clone() });
            if u_next.is_full() {
                break;
            }
            let cu = u_next.completion_rows();
            let pv = quotient_projection(&v_next);
            let maps = self.maps.iter().map(|a| cu.mul(a).mul(&pv)).collect();
            cur = Rep::new(&self.field, self.n - u_next.dim(), self.m - v_next.dim(), maps);
            lift_u = cu;
            u_floor = u_next;
        }
        // Terminal zero-slope step when the total image misses part of V.
        match steps.last() {
            Some(last) if last.u.is_full() && last.v.is_full() => {}
            _ => steps.push(HnStep {
                u: Subspace::full(&self.field, self.n),
                v: Subspace::full(&self.field, self.m),
            }),
        }
        Ok(HnFiltration { steps })
    }

    /// Strip the slope-infinity and slope-0 parts: quotient U by the common
    /// kernel and cut V down to the span of all images. The result has no
    /// infinite or zero slope in its filtration; its dimension data is the
    /// original's with the trimmed blocks (dim K, 0) and (0, m - dim I)
    /// removed. A rep whose maps are all zero reduces to the empty rep.
    pub fn concise_reduce(&self) -> ConciseReduction {
        let kernel = self.common_kernel();
        let image = self.total_image();
        let trimmed_infinite = (kernel.dim(), 0);
        let trimmed_zero = (0, self.m - image.dim());
        let cu = kernel.completion_rows();
        let maps = self
            .maps
            .iter()
            .map(|a| {
                let moved = cu.mul(a);
                let rows = (0..moved.rows()).map(|r| image.coords(moved.row(r))).collect();
                Mat::from_rows(&self.field, image.dim(), rows)
            })
            .collect();
        let rep = Rep::new(&self.field, self.n - kernel.dim(), image.dim(), maps);
        ConciseReduction { rep, trimmed_infinite, trimmed_zero }
    }
}

/// Output of [`Rep::concise_reduce`]: the reduced representation plus the
/// dimension pairs removed at the infinite-slope and zero-slope ends.
#[derive(Clone, Debug)]
pub struct ConciseReduction {
    pub rep: Rep,
    pub trimmed_infinite: (usize, usize),
    pub trimmed_zero: (usize, usize),
}

impl ConciseReduction {
    /// True when nothing survived the reduction (every map was zero).
    pub fn is_empty(&self) -> bool {
        self.rep.dim_u() == 0 && self.rep.dim_v() == 0
    }
}

/// Projection matrix to quotient coordinates: v maps to the coordinates of
/// its class with respect to the canonical completion of `v_sub`.
fn quotient_projection(v_sub: &Subspace) -> Mat {
    let m = v_sub.ambient_dim();
    let comp = v_sub.completion_rows();
    let full = if v_sub.dim() == 0 {
        comp.clone()
    } else {
        v_sub.basis().vstack(&comp)
    };
    let inv = full.inverse().expect("basis plus completion is invertible");
    // Row vector v has coordinates v * inv = (x, y); keep the y block.
    inv.submatrix(0..m, v_sub.dim()..m)
}

// ----- certified weighted deficiency -----

/// Assemble one random element of the (Q, P) blow-up: the block matrix whose
/// (t, s) block (t < Q, s < P) is an independent random combination of the
/// lifted maps. Index layout: row (t, i) = t n + i, column (s, j) = s m + j.
fn sample_blowup_element(
    lifted: &[Mat],
    big: &Field,
    n: usize,
    m: usize,
    q_slots: usize,
    p_slots: usize,
    rng: &mut ChaCha8Rng,
) -> Mat {
    let mut ap = Mat::zeros(big, n * q_slots, m * p_slots);
    for t in 0..q_slots {
        for s in 0..p_slots {
            for a in lifted {
                let c = big.rand_elem(rng);
                if big.is_zero(&c) {
                    continue;
                }
                for i in 0..n {
                    for j in 0..m {
                        let v = a.get(i, j);
                        if big.is_zero(v) {
                            continue;
                        }
                        let add = big.mul(&c, v);
                        let cur = big.add(ap.get(t * n + i, s * m + j), &add);
                        ap.set(t * n + i, s * m + j, cur);
                    }
                }
            }
        }
    }
    ap
}

fn deficiency_min(rep: &Rep, q: u64, p: u64, seed: u64) -> Result<Deficiency, QuiverError> {
    let f = &rep.field;
    let (n, m, k) = (rep.n, rep.m, rep.maps.len());
    if n == 0 {
        return Ok(Deficiency {
            value: 0,
            witness: Subspace::zero(f, 0),
            blowup: 1,
            trials: 0,
        });
    }
    if k == 0 || rep.maps.iter().all(|a| a.is_zero()) {
        // V(X) = 0 throughout, so the value q dim X is strictly increasing
        // and the full space is the unique (hence minimal) optimum.
        return Ok(Deficiency {
            value: q as i64 * n as i64,
            witness: Subspace::full(f, n),
            blowup: 1,
            trials: 0,
        });
    }
    let mut trials_used = 0u32;
    let d_cap = (n as u64 * q).max(2) + 1;
    for d in 1..=d_cap {
        let qs = (q * d) as usize;
        let ps = (p * d) as usize;
        let (big_n, big_m) = (n * qs, m * ps);
        // Schwartz-Zippel margin evaluated on the blow-up being randomized.
        let threshold = 4u64
            .saturating_mul((big_n + big_m) as u64)
            .saturating_mul((big_n + big_m) as u64)
            .saturating_mul(k as u64);
        let big = f.extend_for_genericity(threshold.max(4));
        let lifted: Vec<Mat> = rep
            .maps
            .iter()
            .map(|a| Mat::from_fn(&big, n, m, |i, j| big.embed(f, a.get(i, j))))
            .collect();
        for trial in 0..3u32 {
            trials_used += 1;
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(seed, d.wrapping_mul(31) + trial as u64));
            let ap = sample_blowup_element(&lifted, &big, n, m, qs, ps, &mut rng);
            match wong_run(rep, &lifted, &big, &ap, qs, ps) {
                WongOutcome::Certified { value_blowup, witness_big } => {
                    // Descend the witness to the base field. The minimal
                    // witness is canonical, hence fixed by every base-field
                    // automorphism of the extension, so its reduced basis
                    // has base-field entries.
                    let mut rows = Vec::with_capacity(witness_big.dim());
                    let mut ok = true;
                    for i in 0..witness_big.dim() {
                        let mut row = Vec::with_capacity(n);
                        for x in witness_big.basis().row(i) {
                            match big.retract(f, x) {
                                Some(v) => row.push(v),
                                None => {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                        if !ok {
                            break;
                        }
                        rows.push(row);
                    }
                    if !ok {
                        // A witness with entries outside the base field can
                        // only come from an unlucky sample; retry.
                        continue;
                    }
                    let witness = Subspace::from_rows(Mat::from_rows(f, n, rows));
                    let value_f = q as i64 * witness.dim() as i64
                        - p as i64 * rep.image_of(&witness).dim() as i64;
                    if value_f * d as i64 != value_blowup {
                        return Err(QuiverError(format!(
                            "blow-up certificate value {value_blowup} does not match \
                             base witness value {value_f} at multiplier {d}"
                        )));
                    }
                    return Ok(Deficiency {
                        value: value_f,
                        witness,
                        blowup: d,
                        trials: trials_used,
                    });
                }
                WongOutcome::Escaped => {}
            }
        }
    }
    Err(QuiverError(format!(
        "deficiency search exhausted blow-up multipliers up to {d_cap} for a \
         {n}x{m} representation with {k} maps"
    )))
}

enum WongOutcome {
    /// The second Wong sequence stabilized inside the image of the sampled
    /// element, certifying value = dim X - dim W(X) = N - rank as the exact
    /// maximum, with X the unique minimal witness (projected to F^n).
    Certified { value_blowup: i64, witness_big: Subspace },
    /// The sequence left the image: the sampled element does not have
    /// maximal rank in this blow-up; resample or escalate.
    Escaped,
}

fn wong_run(
    rep: &Rep,
    lifted: &[Mat],
    big: &Field,
    ap: &Mat,
    q_slots: usize,
    p_slots: usize,
) -> WongOutcome {
    let (n, m) = (rep.n, rep.m);
    let big_n = n * q_slots;
    let row_space = Subspace::from_rows(ap.clone());
    let rank = row_space.dim();
    // T_j = Z_j tensor F^{p_slots}, tracked through Z_j in F^m.
    let mut z = Subspace::zero(big, m);
    loop {
        // X = preimage of Z (x) F^P under ap: rows u with every column block
        // of u * ap lying in Z.
        let x = preimage_of_block_space(ap, &z, m, p_slots, big, big_n);
        // Project X's basis to F^n components.
        let u_proj = project_slots(&x, n, q_slots, big);
        // Next image: V(U) over the big field.
        let mut z_next = Subspace::zero(big, m);
        for a in lifted {
            z_next = z_next.sum(&u_proj.image(a));
        }
        let z_next = z_next.sum(&z);
        if z_next == z {
            // Stabilized. Escape check: Z (x) F^P inside the row space?
            let mut inside = true;
            'outer: for bi in 0..z.dim() {
                for s in 0..p_slots {
                    let mut vec = vec![big.zero(); m * p_slots];
                    for (j, val) in z.basis().row(bi).iter().enumerate() {
                        vec[s * m + j] = val.clone();
                    }
                    if !row_space.contains_vec(&vec) {
                        inside = false;
                        break 'outer;
                    }
                }
            }
            if !inside {
                return WongOutcome::Escaped;
            }
            let value = big_n as i64 - rank as i64;
            // Cross-check the certificate identity dim X - P dim V(U_X) = N - rank;
            // at stabilization V(U_X) equals the carried Z.
            let direct = x.dim() as i64 - (p_slots * z.dim()) as i64;
            if direct != value {
                // The identity is a theorem when stabilization happened
                // inside the image; a mismatch means the sample was bad in a
                // way we cannot certify. Treat as escape.
                return WongOutcome::Escaped;
            }
            return WongOutcome::Certified { value_blowup: value, witness_big: u_proj };
        }
        z = z_next;
    }
}

/// {u : u * ap has every length-m column block inside z}.
fn preimage_of_block_space(
    ap: &Mat,
    z: &Subspace,
    m: usize,
    p_slots: usize,
    big: &Field,
    big_n: usize,
) -> Subspace {
    if z.dim() == m {
        return Subspace::full(big, big_n);
    }
    let ann_t = z.annihilator().basis().transpose(); // m x (m - z)
    let mut check: Option<Mat> = None;
    for s in 0..p_slots {
        let block = ap.submatrix(0..big_n, s * m..(s + 1) * m).mul(&ann_t);
        check = Some(match check {
            None => block,
            Some(c) => c.hstack(&block),
        });
    }
    check.unwrap().left_kernel()
}

/// Span of the length-n slot components of a subspace of F^{n q_slots}.
fn project_slots(x: &Subspace, n: usize, q_slots: usize, big: &Field) -> Subspace {
    let mut rows = Vec::with_capacity(x.dim() * q_slots);
    for i in 0..x.dim() {
        let row = x.basis().row(i);
        for t in 0..q_slots {
            rows.push(row[t * n..(t + 1) * n].to_vec());
        }
    }
    Subspace::from_rows(Mat::from_rows(big, n, rows))
}

// ----- dim-data arithmetic -----

/// Predicted filtration dimension data of a tensor product of two
/// representations given by their (concise) dimension data: blocks multiply
/// pairwise, merge at equal slopes, and sort by decreasing slope.
pub fn hn_tensor_product(
    a: &[(usize, usize)],
    b: &[(usize, usize)],
) -> Vec<(usize, usize)> {
    assert!(
        a.iter().chain(b).all(|&(n, m)| n > 0 && m > 0),
        "tensor product prediction needs concise dimension data"
    );
    let mut blocks: Vec<(Slope, usize, usize)> = Vec::new();
    for &(n1, m1) in a {
        for &(n2, m2) in b {
            let s = Slope::finite((n1 * n2) as u64, (m1 * m2) as u64);
            blocks.push((s, n1 * n2, m1 * m2));
        }
    }
    blocks.sort_by(|x, y| y.0.cmp(&x.0));
    let mut out: Vec<(Slope, usize, usize)> = Vec::new();
    for (s, n, m) in blocks {
        match out.last_mut() {
            Some((ls, ln, lm)) if *ls == s => {
                *ln += n;
                *lm += m;
            }
            _ => out.push((s, n, m)),
        }
    }
    out.into_iter().map(|(_, n, m)| (n, m)).collect()
}

// ----- exhaustive reference implementations (small cases) -----

/// Every subspace of F^n for a small finite field, enumerated through all
/// reduced row echelon bases.
pub fn all_subspaces(field: &Field, n: usize) -> Vec<Subspace> {
    let elems = field
        .enumerate_elements(16)
        .expect("exhaustive enumeration needs a small finite field");
    let mut out = vec![Subspace::zero(field, n)];
    // Enumerate RREF matrices by rank and pivot columns.
    for rank in 1..=n {
        let pivot_sets = combinations(n, rank);
        for pivots in pivot_sets {
            // In reduced row echelon form the free cells are exactly those
            // right of the row's pivot and outside every pivot column.
            let mut free_cells = Vec::new();
            for (i, &pc) in pivots.iter().enumerate() {
                for c in pc + 1..n {
                    if !pivots.contains(&c) {
                        free_cells.push((i, c));
                    }
                }
            }
            let total = elems.len().pow(free_cells.len() as u32);
            for mut code in 0..total {
                let mut mat = Mat::zeros(field, rank, n);
                for (i, &pc) in pivots.iter().enumerate() {
                    mat.set(i, pc, field.one());
                }
                for &(i, c) in &free_cells {
                    let val = elems[code % elems.len()].clone();
                    code /= elems.len();
                    mat.set(i, c, val);
                }
                out.push(Subspace::from_rows(mat));
            }
        }
    }
    out.sort_by_key(|s| s.dim());
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Largest field order and side length the exhaustive oracle accepts; beyond
/// this the subspace lattice is too big to enumerate in test time.
pub const BRUTE_FORCE_MAX_FIELD: u64 = 5;
pub const BRUTE_FORCE_MAX_DIM: usize = 4;

/// Reference filtration by exhaustive subspace enumeration; only feasible for
/// tiny dimensions over tiny fields. Ground truth for tests.
pub fn brute_force_hn(rep: &Rep) -> Result<HnFiltration, QuiverError> {
    let f = rep.field();
    let order_ok = f
        .size()
        .is_some_and(|q| q <= num_bigint::BigUint::from(BRUTE_FORCE_MAX_FIELD));
    if !order_ok || rep.dim_u() > BRUTE_FORCE_MAX_DIM || rep.dim_v() > BRUTE_FORCE_MAX_DIM {
        return Err(QuiverError(format!(
            "exhaustive filtration limited to field order <= {BRUTE_FORCE_MAX_FIELD} and dims <= {BRUTE_FORCE_MAX_DIM}, got {:?} dims {}x{}",
            f.spec(),
            rep.dim_u(),
            rep.dim_v()
        )));
    }
    let mut steps: Vec<HnStep> = Vec::new();
    let mut u_floor = Subspace::zero(f, rep.dim_u());
    loop {
        let remaining_u = rep.dim_u() - u_floor.dim();
        if remaining_u == 0 {
            break;
        }
        // Quotient by (u_floor, image(u_floor)) and find all subspaces of
        // maximal slope in the quotient.
        let v_floor = rep.image_of(&u_floor);
        let quot = rep.quotient_by(&u_floor, &v_floor);
        let mut best: Option<(Slope, Subspace)> = None;
        for s in all_subspaces(f, quot.dim_u()) {
            if s.dim() == 0 {
                continue;
            }
            let slope = Slope::of_dims(s.dim() as u64, quot.image_of(&s).dim() as u64);
            match &mut best {
                None => best = Some((slope, s)),
                Some((bs, bset)) => match slope.cmp(bs) {
                    Ordering::Greater => best = Some((slope, s)),
                    Ordering::Equal => *bset = bset.sum(&s),
                    Ordering::Less => {}
                },
            }
        }
        let (_, w) = best.expect("nonzero quotient has nonzero subspaces");
        // Lift back: rows of w in quotient coordinates times the completion.
        let cu = u_floor.completion_rows();
        let lifted = Subspace::from_rows(w.basis().mul(&cu));
        let u_next = u_floor.sum(&lifted);
        let v_next = rep.image_of(&u_next);
        steps.push(HnStep { u: u_next.clone(), v: v_next });
        u_floor = u_next;
    }
    match steps.last() {
        Some(last) if last.u.is_full() && last.v.is_full() => {}
        _ if rep.dim_u() == 0 && rep.dim_v() == 0 => {}
        _ => steps.push(HnStep {
            u: Subspace::full(f, rep.dim_u()),
            v: Subspace::full(f, rep.dim_v()),
        }),
    }
    Ok(HnFiltration { steps })
}
