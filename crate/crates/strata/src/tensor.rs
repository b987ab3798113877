//! Dense tensors of arbitrary order over an exact field.
//!
//! Layout: entries are stored row-major with the last mode fastest, and all
//! composite indices built by tensor products or mode grouping are row-major
//! in the same sense (left factor major). Dense storage is capped at 2^24
//! entries; constructors that would exceed the cap fail rather than allocate.
//!
//! Serialized form (JSON): `{"field": ..., "dims": [...], "entries":
//! [[i1, ..., id, "value"], ...]}` with 1-based indices and zero entries
//! omitted. Field headers: `{"kind":"gf","p":P}`, `{"kind":"gf_ext","p":P,
//! "e":E}`, `{"kind":"rational"}`.

use crate::field::{Field, FieldError, FieldSpec, Scalar};
use crate::linalg::Mat;
use rand::Rng;
use serde_json::{json, Value};
use std::fmt;

pub const MAX_DENSE_ENTRIES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorError(pub String);

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tensor error: {}", self.0)
    }
}

impl std::error::Error for TensorError {}

impl From<FieldError> for TensorError {
    fn from(e: FieldError) -> Self {
        TensorError(e.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Tensor {
    field: Field,
    dims: Vec<usize>,
    data: Vec<Scalar>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Tensor{:?} over {:?} ({} nonzeros)",
            self.dims,
            self.field,
            self.support().len()
        )
    }
}

fn checked_volume(dims: &[usize]) -> Result<usize, TensorError> {
    let mut total = 1usize;
    for &d in dims {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= MAX_DENSE_ENTRIES)
            .ok_or_else(|| {
                TensorError(format!(
                    "dense tensor with dims {dims:?} exceeds the {MAX_DENSE_ENTRIES} entry cap"
                ))
            })?;
    }
    Ok(total)
}

impl Tensor {
    pub fn zeros(field: &Field, dims: Vec<usize>) -> Result<Tensor, TensorError> {
        let total = checked_volume(&dims)?;
        Ok(Tensor { field: field.clone(), dims, data: vec![field.zero(); total] })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let strides = self.strides();
        idx.iter().zip(&strides).map(|(i, s)| i * s).sum()
    }

    pub fn get(&self, idx: &[usize]) -> &Scalar {
        &self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Scalar) {
        let fi = self.flat_index(idx);
        self.data[fi] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    /// Reinterpret over an extension field, embedding every entry.
    pub fn base_change(&self, big: &Field) -> Tensor {
        let data = self.data.iter().map(|x| big.embed(&self.field, x)).collect();
        Tensor { field: big.clone(), dims: self.dims.clone(), data }
    }

    /// All multi-indices with nonzero entries, in lexicographic order.
    pub fn support(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dims.len()];
        if self.data.is_empty() {
            return out;
        }
        for flat in 0..self.data.len() {
            if !self.field.is_zero(&self.data[flat]) {
                out.push(idx.clone());
            }
            // Increment idx (last mode fastest) to mirror flat order.
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }

    pub fn rand<R: Rng + ?Sized>(
        field: &Field,
        dims: Vec<usize>,
        rng: &mut R,
    ) -> Result<Tensor, TensorError> {
        let total = checked_volume(&dims)?;
        let data = (0..total).map(|_| field.rand_elem(rng)).collect();
        Ok(Tensor { field: field.clone(), dims, data })
    }

    /// The diagonal (unit) tensor of order `order` and side n: entries 1 at
    /// (i, i, ..., i).
    pub fn diagonal(field: &Field, n: usize, order: usize) -> Tensor {
        let mut t = Tensor::zeros(field, vec![n; order]).expect("diagonal within cap");
        for i in 0..n {
            t.set(&vec![i; order], field.one());
        }
        t
    }

    /// The matrix multiplication tensor <E, H, L>: sum over (i, j, k) of
    /// e_{ij} (x) e_{jk} (x) e_{ki}, with pair indices packed row-major.
    pub fn matrix_mult(field: &Field, e: usize, h: usize, l: usize) -> Result<Tensor, TensorError> {
        let mut t = Tensor::zeros(field, vec![e * h, h * l, l * e])?;
        for i in 0..e {
            for j in 0..h {
                for k in 0..l {
                    t.set(&[i * h + j, j * l + k, k * e + i], field.one());
                }
            }
        }
        Ok(t)
    }

    pub fn direct_sum(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        assert_eq!(self.order(), other.order(), "direct sum needs equal orders");
        assert_eq!(self.field, other.field);
        let dims: Vec<usize> = self
            .dims
            .iter()
            .zip(&other.dims)
            .map(|(a, b)| a + b)
            .collect();
        let mut out = Tensor::zeros(&self.field, dims)?;
        for idx in self.support() {
            out.set(&idx, self.get(&idx).clone());
        }
        for idx in other.support() {
            let shifted: Vec<usize> = idx
                .iter()
                .zip(&self.dims)
                .map(|(i, off)| i + off)
                .collect();
            out.set(&shifted, other.get(&idx).clone());
        }
        Ok(out)
    }

    /// Kronecker product per mode; composite index (a, b) packs as
    /// a * other_dim + b (left factor major).
    pub fn tensor_product(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        assert_eq!(self.order(), other.order(), "product needs equal orders");
        assert_eq!(self.field, other.field);
        let dims: Vec<usize> = self
            .dims
            .iter()
            .zip(&other.dims)
            .map(|(a, b)| a * b)
            .collect();
        let mut out = Tensor::zeros(&self.field, dims)?;
        for ia in self.support() {
            let va = self.get(&ia);
            for ib in other.support() {
                let idx: Vec<usize> = ia
                    .iter()
                    .zip(&ib)
                    .zip(&other.dims)
                    .map(|((a, b), d)| a * d + b)
                    .collect();
                out.set(&idx, self.field.mul(va, other.get(&ib)));
            }
        }
        Ok(out)
    }

    /// Reorder modes: new mode k is old mode perm[k].
    pub fn permute_modes(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.order());
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut out = Tensor::zeros(&self.field, dims).expect("permutation preserves volume");
        for idx in self.support() {
            let new_idx: Vec<usize> = perm.iter().map(|&p| idx[p]).collect();
            out.set(&new_idx, self.get(&idx).clone());
        }
        out
    }

    /// Apply one linear map per mode: S[j] = sum_i T[i] * prod_k A_k[i_k, j_k].
    /// A_k has shape dims[k] x new_dims[k]. With invertible maps this is a
    /// basis change; in general it realizes a restriction of T.
    pub fn apply_maps(&self, maps: &[Mat]) -> Result<Tensor, TensorError> {
        assert_eq!(maps.len(), self.order());
        for (k, m) in maps.iter().enumerate() {
            assert_eq!(m.rows(), self.dims[k], "map {k} has wrong source dimension");
        }
        let new_dims: Vec<usize> = maps.iter().map(|m| m.cols()).collect();
        let mut out = Tensor::zeros(&self.field, new_dims.clone())?;
        let f = &self.field;
        // Expand one support point at a time; fine for the sparse tensors
        // used throughout, and exact regardless.
        let mut target = vec![0usize; self.order()];
        for idx in self.support() {
            let v = self.get(&idx);
            // Iterate the product of target indices where every factor entry
            // is nonzero.
            let factors: Vec<Vec<(usize, Scalar)>> = idx
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    (0..new_dims[k])
                        .filter_map(|j| {
                            let a = maps[k].get(i, j);
                            (!f.is_zero(a)).then(|| (j, a.clone()))
                        })
                        .collect()
                })
                .collect();
            if factors.iter().any(|v| v.is_empty()) {
                continue;
            }
            let total: usize = factors.iter().map(|v| v.len()).product();
            for combo in 0..total {
                let mut c = combo;
                let mut coeff = v.clone();
                for k in (0..self.order()).rev() {
                    let (j, ref a) = factors[k][c % factors[k].len()];
                    c /= factors[k].len();
                    target[k] = j;
                    coeff = f.mul(&coeff, a);
                }
                let cur = f.add(out.get(&target), &coeff);
                out.set(&target, cur);
            }
        }
        Ok(out)
    }

    /// Merge consecutive groups of modes into single modes. `groups` must
    /// partition 0..order into contiguous increasing runs; each new mode's
    /// index is row-major over its group.
    pub fn group_modes(&self, groups: &[Vec<usize>]) -> Tensor {
        let mut seen = Vec::new();
        for g in groups {
            for &m in g {
                seen.push(m);
            }
        }
        assert_eq!(seen, (0..self.order()).collect::<Vec<_>>(), "groups must partition the modes in order");
        let new_dims: Vec<usize> = groups
            .iter()
            .map(|g| g.iter().map(|&m| self.dims[m]).product())
            .collect();
        let mut out = Tensor::zeros(&self.field, new_dims).expect("grouping preserves volume");
        for idx in self.support() {
            let new_idx: Vec<usize> = groups
                .iter()
                .map(|g| {
                    let mut acc = 0usize;
                    for &m in g {
                        acc = acc * self.dims[m] + idx[m];
                    }
                    acc
                })
                .collect();
            out.set(&new_idx, self.get(&idx).clone());
        }
        out
    }

    /// Mode-k flattening: a matrix whose rows are indexed by mode k and whose
    /// columns run row-major over the remaining modes in ascending order.
    pub fn flattening(&self, mode: usize) -> Mat {
        assert!(mode < self.order());
        let rows = self.dims[mode];
        let cols: usize = self
            .dims
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != mode)
            .map(|(_, &d)| d)
            .product();
        let mut m = Mat::zeros(&self.field, rows, cols);
        for idx in self.support() {
            let mut col = 0usize;
            for (k, &i) in idx.iter().enumerate() {
                if k == mode {
                    continue;
                }
                col = col * self.dims[k] + i;
            }
            m.set(idx[mode], col, self.get(&idx).clone());
        }
        m
    }

    /// Order-3 only: the slices along `mode` as matrices over the remaining
    /// two modes in ascending order.
    pub fn slices(&self, mode: usize) -> Vec<Mat> {
        assert_eq!(self.order(), 3, "slices are defined for order-3 tensors");
        assert!(mode < 3);
        let (r, c) = match mode {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut out = vec![Mat::zeros(&self.field, self.dims[r], self.dims[c]); self.dims[mode]];
        for idx in self.support() {
            out[idx[mode]].set(idx[r], idx[c], self.get(&idx).clone());
        }
        out
    }

    /// Move `mode` to the last slot, keeping the other modes in ascending
    /// order. This is the pinned convention for forming the pencil of maps
    /// attached to a distinguished mode.
    pub fn mode_to_last(&self, mode: usize) -> Tensor {
        assert!(mode < self.order());
        let mut perm: Vec<usize> = (0..self.order()).filter(|&k| k != mode).collect();
        perm.push(mode);
        self.permute_modes(&perm)
    }

    // ----- JSON interchange -----

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .support()
            .iter()
            .map(|idx| {
                let mut row: Vec<Value> = idx.iter().map(|&i| json!(i + 1)).collect();
                row.push(json!(self.field.encode(self.get(idx))));
                Value::Array(row)
            })
            .collect();
        json!({
            "field": field_spec_to_json(&self.field.spec()),
            "dims": self.dims,
            "entries": entries,
        })
    }

    pub fn from_json(v: &Value) -> Result<Tensor, TensorError> {
        let obj = v
            .as_object()
            .ok_or_else(|| TensorError("tensor JSON must be an object".into()))?;
        let field_spec = json_to_field_spec(
            obj.get("field")
                .ok_or_else(|| TensorError("missing \"field\"".into()))?,
        )?;
        let field = Field::new(&field_spec)?;
        let dims: Vec<usize> = obj
            .get("dims")
            .and_then(|d| d.as_array())
            .ok_or_else(|| TensorError("missing \"dims\" array".into()))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|n| n as usize)
                    .ok_or_else(|| TensorError("dims must be nonnegative integers".into()))
            })
            .collect::<Result<_, _>>()?;
        let mut t = Tensor::zeros(&field, dims.clone())?;
        let entries = obj
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| TensorError("missing \"entries\" array".into()))?;
        for entry in entries {
            let row = entry
                .as_array()
                .ok_or_else(|| TensorError("entry must be an array".into()))?;
            if row.len() != dims.len() + 1 {
                return Err(TensorError(format!(
                    "entry {entry} must list {} indices and a value",
                    dims.len()
                )));
            }
            let mut idx = Vec::with_capacity(dims.len());
            for (k, x) in row[..dims.len()].iter().enumerate() {
                let i = x
                    .as_u64()
                    .ok_or_else(|| TensorError(format!("index {x} is not an integer")))?;
                if i < 1 || i as usize > dims[k] {
                    return Err(TensorError(format!(
                        "index {i} out of range 1..={} in mode {}",
                        dims[k],
                        k + 1
                    )));
                }
                idx.push(i as usize - 1);
            }
            let val_str = row[dims.len()]
                .as_str()
                .ok_or_else(|| TensorError("entry value must be a string".into()))?;
            let val = field.parse(val_str)?;
            t.set(&idx, val);
        }
        Ok(t)
    }
}

/// One linear map per mode realizing a restriction between tensors: S is a
/// restriction of T exactly when applying the maps to T yields S.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionTriple {
    pub maps: Vec<Mat>,
}

impl RestrictionTriple {
    pub fn to_json(&self, field: &Field) -> Value {
        let mats: Vec<Value> = self
            .maps
            .iter()
            .map(|m| {
                let rows: Vec<Value> = (0..m.rows())
                    .map(|r| {
                        Value::Array(
                            (0..m.cols()).map(|c| json!(field.encode(m.get(r, c)))).collect(),
                        )
                    })
                    .collect();
                Value::Array(rows)
            })
            .collect();
        json!({ "maps": mats })
    }
}

/// Exact entrywise check that the triple carries `t` onto `s`.
pub fn verify_restriction(
    t: &Tensor,
    s: &Tensor,
    triple: &RestrictionTriple,
) -> Result<bool, TensorError> {
    if triple.maps.len() != t.order() {
        return Err(TensorError(format!(
            "{} maps for an order-{} tensor",
            triple.maps.len(),
            t.order()
        )));
    }
    Ok(&t.apply_maps(&triple.maps)? == s)
}

pub fn field_spec_to_json(spec: &FieldSpec) -> Value {
    match spec {
        FieldSpec::Prime { p } => json!({"kind": "gf", "p": p}),
        FieldSpec::Ext { p, e } => json!({"kind": "gf_ext", "p": p, "e": e}),
        FieldSpec::Rational => json!({"kind": "rational"}),
    }
}

pub fn json_to_field_spec(v: &Value) -> Result<FieldSpec, TensorError> {
    let obj = v
        .as_object()
        .ok_or_else(|| TensorError("field must be an object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| TensorError("field needs a \"kind\"".into()))?;
    match kind {
        "gf" => {
            let p = obj
                .get("p")
                .and_then(|p| p.as_u64())
                .ok_or_else(|| TensorError("gf field needs integer \"p\"".into()))?;
            Ok(FieldSpec::Prime { p })
        }
        "gf_ext" => {
            let p = obj
                .get("p")
                .and_then(|p| p.as_u64())
                .ok_or_else(|| TensorError("gf_ext field needs integer \"p\"".into()))?;
            let e = obj
                .get("e")
                .and_then(|e| e.as_u64())
                .ok_or_else(|| TensorError("gf_ext field needs integer \"e\"".into()))?;
            Ok(FieldSpec::Ext { p, e: e as u32 })
        }
        "rational" => Ok(FieldSpec::Rational),
        other => Err(TensorError(format!("unknown field kind {other:?}"))),
    }
}

/// Parse a command line field override such as "gf:5", "gf:2^4", "rational".
pub fn parse_field_arg(s: &str) -> Result<FieldSpec, TensorError> {
    if s == "rational" {
        return Ok(FieldSpec::Rational);
    }
    if let Some(body) = s.strip_prefix("gf:") {
        if let Some((p, e)) = body.split_once('^') {
            let p = p
                .parse()
                .map_err(|_| TensorError(format!("bad field argument {s:?}")))?;
            let e = e
                .parse()
                .map_err(|_| TensorError(format!("bad field argument {s:?}")))?;
            return Ok(FieldSpec::Ext { p, e });
        }
        let p = body
            .parse()
            .map_err(|_| TensorError(format!("bad field argument {s:?}")))?;
        return Ok(FieldSpec::Prime { p });
    }
    Err(TensorError(format!(
        "bad field argument {s:?}; expected gf:P, gf:P^E, or rational"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_and_matrix_mult_have_expected_support() {
        let f = Field::prime(5).unwrap();
        let d = Tensor::diagonal(&f, 3, 3);
        assert_eq!(
            d.support(),
            vec![vec![0, 0, 0], vec![1, 1, 1], vec![2, 2, 2]]
        );
        let mm = Tensor::matrix_mult(&f, 2, 2, 2).unwrap();
        assert_eq!(mm.dims(), &[4, 4, 4]);
        assert_eq!(mm.support().len(), 8);
        // <1,1,1> is the single-entry tensor.
        let triv = Tensor::matrix_mult(&f, 1, 1, 1).unwrap();
        assert_eq!(triv.support(), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn mm_slices_multiply_like_matrices() {
        // The mode-3 pencil of <2,2,2> consists of the maps X -> X*C as C
        // runs over the slice index; slice (k2, i2... ) sanity: each slice
        // has rank 2 and the span of slices has dimension 4.
        let f = Field::prime(7).unwrap();
        let mm = Tensor::matrix_mult(&f, 2, 2, 2).unwrap();
        let slices = mm.slices(2);
        assert_eq!(slices.len(), 4);
        for s in &slices {
            assert_eq!(s.rank(), 2);
        }
        let stacked = slices
            .iter()
            .map(|s| {
                let mut row = Vec::new();
                for i in 0..s.rows() {
                    row.extend(s.row(i).to_vec());
                }
                row
            })
            .collect::<Vec<_>>();
        let m = Mat::from_rows(&f, 16, stacked);
        assert_eq!(m.rank(), 4);
    }

    #[test]
    fn sum_and_product_compose_supports() {
        let f = Field::prime(3).unwrap();
        let a = Tensor::diagonal(&f, 2, 3);
        let b = Tensor::diagonal(&f, 3, 3);
        let s = a.direct_sum(&b).unwrap();
        assert_eq!(s.dims(), &[5, 5, 5]);
        assert_eq!(s.support().len(), 5);
        let p = a.tensor_product(&b).unwrap();
        assert_eq!(p.dims(), &[6, 6, 6]);
        // diagonal(2) x diagonal(3) = diagonal(6) up to index identification.
        assert_eq!(p.support().len(), 6);
        for idx in p.support() {
            assert!(idx[0] == idx[1] && idx[1] == idx[2]);
        }
    }

    #[test]
    fn permute_and_group_are_consistent() {
        let f = Field::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = Tensor::rand(&f, vec![2, 3, 4], &mut rng).unwrap();
        let p = t.permute_modes(&[2, 0, 1]);
        assert_eq!(p.dims(), &[4, 2, 3]);
        for idx in t.support() {
            assert_eq!(p.get(&[idx[2], idx[0], idx[1]]), t.get(&idx));
        }
        let back = p.permute_modes(&[1, 2, 0]);
        assert_eq!(back, t);

        let t4 = Tensor::rand(&f, vec![2, 2, 3, 2], &mut rng).unwrap();
        let g = t4.group_modes(&[vec![0], vec![1], vec![2, 3]]);
        assert_eq!(g.dims(), &[2, 2, 6]);
        for idx in t4.support() {
            assert_eq!(g.get(&[idx[0], idx[1], idx[2] * 2 + idx[3]]), t4.get(&idx));
        }
    }

    #[test]
    fn apply_maps_matches_direct_computation() {
        let f = Field::prime(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = Tensor::rand(&f, vec![3, 2, 2], &mut rng).unwrap();
        let a = Mat::rand(&f, 3, 2, &mut rng);
        let b = Mat::rand(&f, 2, 3, &mut rng);
        let c = Mat::rand(&f, 2, 2, &mut rng);
        let s = t.apply_maps(&[a.clone(), b.clone(), c.clone()]).unwrap();
        assert_eq!(s.dims(), &[2, 3, 2]);
        for j0 in 0..2 {
            for j1 in 0..3 {
                for j2 in 0..2 {
                    let mut acc = f.zero();
                    for i0 in 0..3 {
                        for i1 in 0..2 {
                            for i2 in 0..2 {
                                let mut term = t.get(&[i0, i1, i2]).clone();
                                term = f.mul(&term, a.get(i0, j0));
                                term = f.mul(&term, b.get(i1, j1));
                                term = f.mul(&term, c.get(i2, j2));
                                acc = f.add(&acc, &term);
                            }
                        }
                    }
                    assert_eq!(&acc, s.get(&[j0, j1, j2]));
                }
            }
        }
        // Identity maps are a no-op; invertible maps compose.
        let id = vec![
            Mat::identity(&f, 3),
            Mat::identity(&f, 2),
            Mat::identity(&f, 2),
        ];
        assert_eq!(t.apply_maps(&id).unwrap(), t);
    }

    #[test]
    fn flattening_rank_detects_conciseness() {
        let f = Field::prime(5).unwrap();
        let d = Tensor::diagonal(&f, 3, 3);
        for mode in 0..3 {
            assert_eq!(d.flattening(mode).rank(), 3);
        }
        // A tensor with a dead direction in mode 1.
        let mut t = Tensor::zeros(&f, vec![3, 2, 2]).unwrap();
        t.set(&[0, 0, 0], f.one());
        t.set(&[1, 1, 1], f.one());
        assert_eq!(t.flattening(0).rank(), 2);
    }

    #[test]
    fn json_round_trip_preserves_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [
            FieldSpec::Prime { p: 101 },
            FieldSpec::Ext { p: 2, e: 4 },
            FieldSpec::Rational,
        ] {
            let f = Field::new(&spec).unwrap();
            let t = Tensor::rand(&f, vec![2, 3, 2], &mut rng).unwrap();
            let v = t.to_json();
            let back = Tensor::from_json(&v).unwrap();
            assert_eq!(t, back);
        }
    }

    #[test]
    fn json_rejects_bad_input() {
        let bad_index = json!({
            "field": {"kind": "gf", "p": 5},
            "dims": [2, 2, 2],
            "entries": [[3, 1, 1, "1"]],
        });
        assert!(Tensor::from_json(&bad_index).is_err());
        let bad_field = json!({
            "field": {"kind": "gf", "p": 6},
            "dims": [2, 2, 2],
            "entries": [],
        });
        assert!(Tensor::from_json(&bad_field).is_err());
        let bad_value = json!({
            "field": {"kind": "gf", "p": 5},
            "dims": [1, 1, 1],
            "entries": [[1, 1, 1, "x"]],
        });
        assert!(Tensor::from_json(&bad_value).is_err());
        let zero_indexed = json!({
            "field": {"kind": "gf", "p": 5},
            "dims": [2, 2, 2],
            "entries": [[0, 1, 1, "1"]],
        });
        assert!(Tensor::from_json(&zero_indexed).is_err());
    }

    #[test]
    fn field_arg_parsing() {
        assert_eq!(parse_field_arg("gf:7").unwrap(), FieldSpec::Prime { p: 7 });
        assert_eq!(
            parse_field_arg("gf:2^4").unwrap(),
            FieldSpec::Ext { p: 2, e: 4 }
        );
        assert_eq!(parse_field_arg("rational").unwrap(), FieldSpec::Rational);
        assert!(parse_field_arg("gl:7").is_err());
    }
}
