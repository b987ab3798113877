//! Exact dense linear algebra over a `Field`.
//!
//! Row-vector convention throughout the crate: a linear map F^n -> F^m is an
//! n x m matrix A acting by u |-> u * A, and a subspace of F^n is the row
//! space of its basis matrix. Subspace bases are kept in reduced row echelon
//! form at all times, which makes equality of subspaces structural equality
//! and makes every derived object canonical. RREF pivoting always selects the
//! first row with a nonzero entry in the current column.

use crate::field::{Field, Scalar};
use rand::Rng;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over {:?} [", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.field.encode(self.get(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Mat {
        Mat {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_fn(
        field: &Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { field: field.clone(), rows, cols, data }
    }

    pub fn from_rows(field: &Field, cols: usize, rows: Vec<Vec<Scalar>>) -> Mat {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols);
            data.extend(row);
        }
        Mat { field: field.clone(), rows: r, cols, data }
    }

    pub fn rand<R: Rng + ?Sized>(field: &Field, rows: usize, cols: usize, rng: &mut R) -> Mat {
        Mat::from_fn(field, rows, cols, |_, _| field.rand_elem(rng))
    }

    /// Random invertible n x n matrix by rejection sampling.
    pub fn rand_invertible<R: Rng + ?Sized>(field: &Field, n: usize, rng: &mut R) -> Mat {
        loop {
            let m = Mat::rand(field, n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<Scalar> {
        self.row(i).to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let f = &self.field;
        let mut out = Mat::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if f.is_zero(b) {
                        continue;
                    }
                    let t = f.mul(a, b);
                    let cur = f.add(out.get(i, j), &t);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| {
            self.field.add(self.get(i, j), rhs.get(i, j))
        })
    }

    pub fn scale(&self, c: &Scalar) -> Mat {
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| {
            self.field.mul(self.get(i, j), c)
        })
    }

    /// Stack side by side: [self | rhs].
    pub fn hstack(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows);
        Mat::from_fn(&self.field, self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                rhs.get(i, j - self.cols).clone()
            }
        })
    }

    /// Stack on top of each other: [self; rhs].
    pub fn vstack(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.cols);
        let mut data = self.data.clone();
        data.extend(rhs.data.iter().cloned());
        Mat { field: self.field.clone(), rows: self.rows + rhs.rows, cols: self.cols, data }
    }

    pub fn submatrix(&self, row_range: std::ops::Range<usize>, col_range: std::ops::Range<usize>) -> Mat {
        Mat::from_fn(
            &self.field,
            row_range.len(),
            col_range.len(),
            |i, j| self.get(row_range.start + i, col_range.start + j).clone(),
        )
    }

    /// In-place reduced row echelon form; returns pivot column indices.
    /// Pivot selection: the first remaining row with a nonzero entry.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let found = (pivot_row..self.rows).find(|&r| !f.is_zero(self.get(r, col)));
            let Some(r) = found else { continue };
            self.swap_rows(pivot_row, r);
            // Normalize the pivot row.
            let inv = f.inv(self.get(pivot_row, col));
            for j in col..self.cols {
                let v = f.mul(self.get(pivot_row, j), &inv);
                self.set(pivot_row, j, v);
            }
            // Clear the column everywhere else.
            for r2 in 0..self.rows {
                if r2 == pivot_row || f.is_zero(self.get(r2, col)) {
                    continue;
                }
                let factor = self.get(r2, col).clone();
                for j in col..self.cols {
                    let sub = f.mul(&factor, self.get(pivot_row, j));
                    let v = f.sub(self.get(r2, j), &sub);
                    self.set(r2, j, v);
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// {u in F^rows : u * self = 0} as a canonical subspace of F^rows.
    pub fn left_kernel(&self) -> Subspace {
        // Row-reduce [self^T] tracking the transform: kernel of the column
        // space. Equivalent: right kernel of self^T.
        self.transpose().right_kernel()
    }

    /// {v in F^cols : self * v^T = 0}, i.e. vectors annihilated on the right.
    pub fn right_kernel(&self) -> Subspace {
        let f = &self.field;
        let (r, pivots) = self.rref();
        let rank = pivots.len();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![f.zero(); self.cols];
            v[fc] = f.one();
            for (pi, &pc) in pivots.iter().enumerate().take(rank) {
                v[pc] = f.neg(r.get(pi, fc));
            }
            basis.push(v);
        }
        // Free-column kernel vectors are already an RREF basis after sorting
        // by free column; canonicalize anyway for uniformity.
        Subspace::from_rows(Mat::from_rows(f, self.cols, basis))
    }

    /// Inverse of a square matrix, if invertible.
    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = self.hstack(&Mat::identity(&self.field, n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(r.submatrix(0..n, n..2 * n))
    }

    /// Solve X * A = B for X, where A = self. Returns None if any row of B
    /// lies outside the row space of A. X has shape B.rows x A.rows.
    pub fn solve_left(&self, b: &Mat) -> Option<Mat> {
        assert_eq!(self.cols, b.cols);
        // x * A = b  <=>  A^T x^T = b^T: reduce [A^T | b^T].
        let at = self.transpose();
        let bt = b.transpose();
        let aug = at.hstack(&bt);
        let (r, pivots) = aug.rref();
        // Solvable iff no pivot falls in the augmented block.
        if pivots.iter().any(|&c| c >= self.rows) {
            return None;
        }
        let f = &self.field;
        let mut x = Mat::zeros(f, b.rows, self.rows);
        for (pi, &pc) in pivots.iter().enumerate() {
            for k in 0..b.rows {
                x.set(k, pc, r.get(pi, self.rows + k).clone());
            }
        }
        Some(x)
    }
}

/// A subspace of F^n, stored as a full-row-rank RREF basis matrix. Structural
/// equality coincides with equality of subspaces.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    basis: Mat,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} of F^{}) {:?}",
            self.dim(),
            self.ambient_dim(),
            self.basis
        )
    }
}

impl Subspace {
    pub fn zero(field: &Field, ambient: usize) -> Subspace {
        Subspace { basis: Mat::zeros(field, 0, ambient) }
    }

    pub fn full(field: &Field, ambient: usize) -> Subspace {
        Subspace { basis: Mat::identity(field, ambient) }
    }

    /// Row space of an arbitrary matrix, canonicalized.
    pub fn from_rows(m: Mat) -> Subspace {
        let cols = m.cols();
        let (r, pivots) = m.rref();
        let rank = pivots.len();
        Subspace { basis: r.submatrix(0..rank, 0..cols) }
    }

    pub fn field(&self) -> &Field {
        self.basis.field()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// The canonical RREF basis matrix (dim x ambient).
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn contains_vec(&self, v: &[Scalar]) -> bool {
        let f = self.field();
        let mut v = v.to_vec();
        // Reduce v against the RREF basis.
        let pivots = self.pivot_cols();
        for (bi, &pc) in pivots.iter().enumerate() {
            if f.is_zero(&v[pc]) {
                continue;
            }
            let c = v[pc].clone();
            for j in 0..v.len() {
                let sub = f.mul(&c, self.basis.get(bi, j));
                v[j] = f.sub(&v[j], &sub);
            }
        }
        v.iter().all(|x| f.is_zero(x))
    }

    fn pivot_cols(&self) -> Vec<usize> {
        let f = self.field();
        (0..self.dim())
            .map(|i| (0..self.ambient_dim()).find(|&j| !f.is_zero(self.basis.get(i, j))).unwrap())
            .collect()
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        (0..other.dim()).all(|i| self.contains_vec(other.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::from_rows(self.basis.vstack(&other.basis))
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        // (a, c) with a*BU + c*BW = 0 give intersection vectors a*BU.
        let stacked = self.basis.vstack(&other.basis);
        let ker = stacked.left_kernel();
        let du = self.dim();
        let f = self.field();
        let proj = Mat::from_fn(f, ker.dim(), du, |i, j| ker.basis.get(i, j).clone());
        Subspace::from_rows(proj.mul(&self.basis))
    }

    /// Image {u * A : u in self} as a subspace of F^{A.cols}.
    pub fn image(&self, a: &Mat) -> Subspace {
        assert_eq!(self.ambient_dim(), a.rows());
        Subspace::from_rows(self.basis.mul(a))
    }

    /// Preimage {u : u * A in self} as a subspace of F^{A.rows}.
    pub fn preimage(&self, a: &Mat) -> Subspace {
        assert_eq!(self.ambient_dim(), a.cols());
        // u*A in W  <=>  u * (A * N^T) = 0 for N a basis of ann(W).
        let ann = self.annihilator();
        if ann.dim() == 0 {
            return Subspace::full(self.field(), a.rows());
        }
        a.mul(&ann.basis.transpose()).left_kernel()
    }

    /// {v : u . v = 0 for all u in self} under the standard bilinear pairing.
    pub fn annihilator(&self) -> Subspace {
        self.basis.right_kernel()
    }

    /// Rows extending this subspace's basis to a basis of F^n: the standard
    /// unit vectors at the non-pivot coordinates, in ascending order.
    pub fn completion_rows(&self) -> Mat {
        let f = self.field();
        let n = self.ambient_dim();
        let pivots = self.pivot_cols();
        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let rows: Vec<Vec<Scalar>> = (0..n)
            .filter(|&j| !is_pivot[j])
            .map(|j| {
                let mut v = vec![f.zero(); n];
                v[j] = f.one();
                v
            })
            .collect();
        Mat::from_rows(f, n, rows)
    }

    /// Coordinates of v with respect to the RREF basis; requires membership.
    pub fn coords(&self, v: &[Scalar]) -> Vec<Scalar> {
        debug_assert!(self.contains_vec(v));
        let pivots = self.pivot_cols();
        pivots.iter().map(|&c| v[c].clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fields() -> Vec<Field> {
        vec![
            Field::prime(2).unwrap(),
            Field::prime(5).unwrap(),
            Field::new(&FieldSpec::Ext { p: 2, e: 2 }).unwrap(),
            Field::rational(),
        ]
    }

    #[test]
    fn rref_is_canonical_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for f in fields() {
            for _ in 0..20 {
                let m = Mat::rand(&f, 4, 6, &mut rng);
                let (r1, p1) = m.rref();
                let (r2, p2) = r1.rref();
                assert_eq!(r1, r2);
                assert_eq!(p1, p2);
                // Row space is preserved.
                assert_eq!(Subspace::from_rows(m.clone()), Subspace::from_rows(r1));
            }
        }
    }

    #[test]
    fn kernel_dimensions_satisfy_rank_nullity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in fields() {
            for _ in 0..20 {
                let m = Mat::rand(&f, 5, 3, &mut rng);
                let rank = m.rank();
                assert_eq!(m.left_kernel().dim(), 5 - rank);
                assert_eq!(m.right_kernel().dim(), 3 - rank);
                // Kernel vectors actually annihilate.
                let k = m.left_kernel();
                assert!(k.basis().mul(&m).is_zero());
            }
        }
    }

    #[test]
    fn subspace_lattice_satisfies_dimension_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in fields() {
            for _ in 0..25 {
                let a = Subspace::from_rows(Mat::rand(&f, 3, 6, &mut rng));
                let b = Subspace::from_rows(Mat::rand(&f, 2, 6, &mut rng));
                let s = a.sum(&b);
                let i = a.intersect(&b);
                assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
                assert!(s.contains(&a) && s.contains(&b));
                assert!(a.contains(&i) && b.contains(&i));
            }
        }
    }

    #[test]
    fn image_preimage_adjunction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for f in fields() {
            for _ in 0..20 {
                let a = Mat::rand(&f, 4, 3, &mut rng);
                let w = Subspace::from_rows(Mat::rand(&f, 2, 3, &mut rng));
                let pre = w.preimage(&a);
                // Image of the preimage lands inside w.
                assert!(w.contains(&pre.image(&a)));
                // Preimage is the largest such subspace: adding any vector
                // outside it must escape w.
                let u = Subspace::from_rows(Mat::rand(&f, 2, 4, &mut rng));
                if pre.contains(&u) {
                    assert!(w.contains(&u.image(&a)));
                }
            }
        }
    }

    #[test]
    fn completion_extends_to_full_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in fields() {
            for _ in 0..20 {
                let s = Subspace::from_rows(Mat::rand(&f, 2, 5, &mut rng));
                let comp = s.completion_rows();
                let full = s.basis().vstack(&comp);
                assert_eq!(full.rank(), 5);
            }
        }
    }

    #[test]
    fn solve_and_inverse_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for f in fields() {
            for _ in 0..10 {
                let a = Mat::rand_invertible(&f, 4, &mut rng);
                let inv = a.inverse().unwrap();
                assert_eq!(a.mul(&inv), Mat::identity(&f, 4));
                assert_eq!(inv.mul(&a), Mat::identity(&f, 4));
                let b = Mat::rand(&f, 2, 4, &mut rng);
                let x = a.solve_left(&b).unwrap();
                assert_eq!(x.mul(&a), b);
            }
        }
        // Unsolvable system returns None.
        let f = Field::prime(5).unwrap();
        let a = Mat::zeros(&f, 3, 2);
        let mut b = Mat::zeros(&f, 1, 2);
        b.set(0, 0, f.one());
        assert!(a.solve_left(&b).is_none());
    }

    #[test]
    fn annihilator_is_an_involution_on_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = Field::prime(7).unwrap();
        for _ in 0..20 {
            let s = Subspace::from_rows(Mat::rand(&f, 3, 6, &mut rng));
            let ann = s.annihilator();
            assert_eq!(ann.dim(), 6 - s.dim());
            assert_eq!(ann.annihilator(), s);
        }
    }
}
