use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::{StateVec, C64};
use crate::error::{Error, Result};

/// Compressed sparse row storage. Column indices within a row are sorted and
/// unique; explicit zeros are dropped on construction.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl Csr {
    fn empty(rows: usize, cols: usize) -> Self {
        Csr { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), data: Vec::new() }
    }

    fn from_triplets(rows: usize, cols: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of: Vec<usize> = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        // drop exact zeros (after summing duplicates)
        let mut k = 0;
        for i in 0..data.len() {
            if data[i] != C64::new(0.0, 0.0) {
                data[k] = data[i];
                indices[k] = indices[i];
                row_of[k] = row_of[i];
                k += 1;
            }
        }
        data.truncate(k);
        indices.truncate(k);
        row_of.truncate(k);
        for &r in &row_of {
            indptr[r + 1] += 1;
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Csr { rows, cols, indptr, indices, data }
    }

    fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    trip.push((r, c, v));
                }
            }
        }
        Csr::from_triplets(m.nrows(), m.ncols(), trip)
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.data[span].iter().copied())
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    fn nnz(&self) -> usize {
        self.data.len()
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.data[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn matmul(&self, rhs: &Csr) -> Csr {
        let mut trip = Vec::new();
        let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0); rhs.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; rhs.cols];
        for r in 0..self.rows {
            for (k, v) in self.row(r) {
                for (c, w) in rhs.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += v * w;
                }
            }
            for &c in &touched {
                trip.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                mark[c] = false;
            }
            touched.clear();
        }
        Csr::from_triplets(self.rows, rhs.cols, trip)
    }

    fn mul_dense(&self, rhs: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.rows, rhs.ncols());
        for (r, k, v) in self.triplets() {
            for c in 0..rhs.ncols() {
                out[(r, c)] += v * rhs[(k, c)];
            }
        }
        out
    }

    fn dense_mul(lhs: &DMatrix<C64>, rhs: &Csr) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(lhs.nrows(), rhs.cols);
        for (k, c, v) in rhs.triplets() {
            for r in 0..lhs.nrows() {
                out[(r, c)] += lhs[(r, k)] * v;
            }
        }
        out
    }

    fn adjoint(&self) -> Csr {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Csr::from_triplets(self.cols, self.rows, trip)
    }

    fn kron(a: &Csr, b: &Csr) -> Csr {
        let mut trip = Vec::with_capacity(a.nnz() * b.nnz());
        for (ra, ca, va) in a.triplets() {
            for (rb, cb, vb) in b.triplets() {
                trip.push((ra * b.rows + rb, ca * b.cols + cb, va * vb));
            }
        }
        Csr::from_triplets(a.rows * b.rows, a.cols * b.cols, trip)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Sparse(Csr),
    Dense(DMatrix<C64>),
}

/// A linear map `V^{⊗n_in} → V^{⊗n_out}` stored as a `2^n_out × 2^n_in`
/// complex matrix.
///
/// Structurally built operators (Hamiltonian, supercharges, elementary
/// matrices) are held sparse; products or sums involving a dense operand
/// come out dense. Both representations sit behind the same API and
/// compare equal entrywise.
#[derive(Clone, PartialEq)]
pub struct LinOp {
    n_in: usize,
    n_out: usize,
    repr: Repr,
}

impl fmt::Debug for LinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinOp")
            .field("n_in", &self.n_in)
            .field("n_out", &self.n_out)
            .field("sparse", &self.is_sparse())
            .finish()
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl LinOp {
    pub fn identity(n: usize) -> Self {
        let dim = 1usize << n;
        let trip = (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        LinOp { n_in: n, n_out: n, repr: Repr::Sparse(Csr::from_triplets(dim, dim, trip)) }
    }

    pub fn zeros(n_out: usize, n_in: usize) -> Self {
        LinOp { n_in, n_out, repr: Repr::Sparse(Csr::empty(1 << n_out, 1 << n_in)) }
    }

    /// Builds a sparse operator from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        n_out: usize,
        n_in: usize,
        trip: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let (rows, cols) = (1usize << n_out, 1usize << n_in);
        let trip: Vec<_> = trip.into_iter().collect();
        if let Some(&(r, c, _)) = trip.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(Error::Shape(format!("entry ({r}, {c}) outside {rows}x{cols}")));
        }
        Ok(LinOp { n_in, n_out, repr: Repr::Sparse(Csr::from_triplets(rows, cols, trip)) })
    }

    pub fn from_dense(n_out: usize, n_in: usize, m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != 1 << n_out || m.ncols() != 1 << n_in {
            return Err(Error::Shape(format!(
                "{}x{} matrix cannot map {n_in} sites to {n_out} sites",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(LinOp { n_in, n_out, repr: Repr::Dense(m) })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn rows(&self) -> usize {
        1 << self.n_out
    }

    pub fn cols(&self) -> usize {
        1 << self.n_in
    }

    pub fn is_square(&self) -> bool {
        self.n_in == self.n_out
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match &self.repr {
            Repr::Sparse(s) => s.get(r, c),
            Repr::Dense(m) => m[(r, c)],
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Sparse(s) => s.to_dense(),
            Repr::Dense(m) => m.clone(),
        }
    }

    pub fn densify(self) -> Self {
        match self.repr {
            Repr::Sparse(s) => LinOp { n_in: self.n_in, n_out: self.n_out, repr: Repr::Dense(s.to_dense()) },
            Repr::Dense(_) => self,
        }
    }

    pub fn sparsify(self) -> Self {
        match self.repr {
            Repr::Dense(m) => LinOp { n_in: self.n_in, n_out: self.n_out, repr: Repr::Sparse(Csr::from_dense(&m)) },
            Repr::Sparse(_) => self,
        }
    }

    /// Nonzero entries in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        match &self.repr {
            Repr::Sparse(s) => s.triplets().collect(),
            Repr::Dense(m) => {
                let mut out = Vec::new();
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        if m[(r, c)] != zero() {
                            out.push((r, c, m[(r, c)]));
                        }
                    }
                }
                out
            }
        }
    }

    /// Largest entry modulus; the norm used for every reported residual.
    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            Repr::Sparse(s) => s.data.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Repr::Dense(m) => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// `self ∘ rhs`, defined only when `self.n_in == rhs.n_out`.
    pub fn compose(&self, rhs: &LinOp) -> Result<LinOp> {
        if self.n_in != rhs.n_out {
            return Err(Error::Shape(format!(
                "cannot compose ({} <- {}) after ({} <- {})",
                self.n_out, self.n_in, rhs.n_out, rhs.n_in
            )));
        }
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(a.matmul(b)),
            (Repr::Sparse(a), Repr::Dense(b)) => Repr::Dense(a.mul_dense(b)),
            (Repr::Dense(a), Repr::Sparse(b)) => Repr::Dense(Csr::dense_mul(a, b)),
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a * b),
        };
        Ok(LinOp { n_in: rhs.n_in, n_out: self.n_out, repr })
    }

    fn check_same_shape(&self, other: &LinOp) -> Result<()> {
        if self.n_in != other.n_in || self.n_out != other.n_out {
            return Err(Error::Shape(format!(
                "({} <- {}) vs ({} <- {})",
                self.n_out, self.n_in, other.n_out, other.n_in
            )));
        }
        Ok(())
    }

    /// `Σ coeff_k · op_k`. Sparse if every operand is sparse.
    pub fn lin_comb(terms: &[(C64, &LinOp)]) -> Result<LinOp> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?
            .1;
        for (_, op) in terms {
            first.check_same_shape(op)?;
        }
        let (n_in, n_out) = (first.n_in, first.n_out);
        if terms.iter().all(|(_, op)| op.is_sparse()) {
            let mut trip = Vec::new();
            for (k, op) in terms {
                if let Repr::Sparse(s) = &op.repr {
                    trip.extend(s.triplets().map(|(r, c, v)| (r, c, k * v)));
                }
            }
            return LinOp::from_triplets(n_out, n_in, trip);
        }
        let mut acc = DMatrix::zeros(1 << n_out, 1 << n_in);
        for (k, op) in terms {
            match &op.repr {
                Repr::Sparse(s) => {
                    for (r, c, v) in s.triplets() {
                        acc[(r, c)] += k * v;
                    }
                }
                Repr::Dense(m) => acc.zip_apply(m, |a, b| *a += k * b),
            }
        }
        Ok(LinOp { n_in, n_out, repr: Repr::Dense(acc) })
    }

    pub fn try_add(&self, other: &LinOp) -> Result<LinOp> {
        LinOp::lin_comb(&[(C64::new(1.0, 0.0), self), (C64::new(1.0, 0.0), other)])
    }

    pub fn try_sub(&self, other: &LinOp) -> Result<LinOp> {
        LinOp::lin_comb(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    pub fn scale(&self, k: C64) -> LinOp {
        let repr = match &self.repr {
            Repr::Sparse(s) => {
                let mut s = s.clone();
                s.data.iter_mut().for_each(|v| *v *= k);
                if k == zero() {
                    s = Csr::empty(s.rows, s.cols);
                }
                Repr::Sparse(s)
            }
            Repr::Dense(m) => Repr::Dense(m * k),
        };
        LinOp { n_in: self.n_in, n_out: self.n_out, repr }
    }

    pub fn adjoint(&self) -> LinOp {
        let repr = match &self.repr {
            Repr::Sparse(s) => Repr::Sparse(s.adjoint()),
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
        };
        LinOp { n_in: self.n_out, n_out: self.n_in, repr }
    }

    pub fn apply(&self, v: &StateVec) -> Result<StateVec> {
        if v.n_sites() != self.n_in {
            return Err(Error::Shape(format!(
                "operator on {} sites applied to {}-site state",
                self.n_in,
                v.n_sites()
            )));
        }
        let x = v.amplitudes();
        let amps = match &self.repr {
            Repr::Sparse(s) => {
                let mut y = nalgebra::DVector::zeros(s.rows);
                for r in 0..s.rows {
                    y[r] = s.row(r).map(|(c, a)| a * x[c]).sum();
                }
                y
            }
            Repr::Dense(m) => m * x,
        };
        Ok(StateVec::from_amplitudes(self.n_out, amps).expect("shape preserved"))
    }

    /// Max-abs entry of `self - other`.
    pub fn max_abs_diff(&self, other: &LinOp) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => {
                a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }
            _ => self.try_sub(other)?.max_abs(),
        })
    }

    /// Max-abs entry of `self - self^†`.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Shape("Hermiticity needs a square operator".into()));
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_real(&self) -> bool {
        match &self.repr {
            Repr::Sparse(s) => s.data.iter().all(|v| v.im == 0.0),
            Repr::Dense(m) => m.iter().all(|v| v.im == 0.0),
        }
    }
}

/// Kronecker product `a ⊗ b`. `a` occupies the high-order (left, larger
/// numbered) sites and `b` the low-order ones.
pub fn kron(a: &LinOp, b: &LinOp) -> LinOp {
    let n_in = a.n_in + b.n_in;
    let n_out = a.n_out + b.n_out;
    let repr = match (&a.repr, &b.repr) {
        (Repr::Sparse(x), Repr::Sparse(y)) => Repr::Sparse(Csr::kron(x, y)),
        _ => {
            let (br, bc) = (b.rows(), b.cols());
            let mut out = DMatrix::zeros(a.rows() * br, a.cols() * bc);
            let b_entries = b.nonzeros();
            for (ra, ca, va) in a.nonzeros() {
                match &b.repr {
                    Repr::Dense(bm) => {
                        let mut block = out.view_mut((ra * br, ca * bc), (br, bc));
                        block.zip_apply(bm, |o, x| *o = va * x);
                    }
                    Repr::Sparse(_) => {
                        for &(rb, cb, vb) in &b_entries {
                            out[(ra * br + rb, ca * bc + cb)] = va * vb;
                        }
                    }
                }
            }
            Repr::Dense(out)
        }
    };
    LinOp { n_in, n_out, repr }
}

/// Embeds a two-site operator on sites `(i, i+1)` of an `n`-site chain.
///
/// Site `i+1` is the high-order factor of `op`. A merging operator
/// (`op.n_out == 1`) leaves the merged site at position `i`, with the other
/// sites keeping their relative order.
pub fn embed_pair(op: &LinOp, i: usize, n: usize) -> Result<LinOp> {
    if op.n_in != 2 || !(1..=2).contains(&op.n_out) {
        return Err(Error::Shape(format!(
            "embed_pair needs a two-site input and one- or two-site output, got ({} <- {})",
            op.n_out, op.n_in
        )));
    }
    if n < 2 || i == 0 || i > n - 1 {
        return Err(Error::SiteRange { index: i, max: n.saturating_sub(1) });
    }
    let high = LinOp::identity(n - i - 1);
    let low = LinOp::identity(i - 1);
    Ok(kron(&kron(&high, op), &low))
}

/// `‖ab − ba‖` in the max-abs norm.
pub fn comm_norm(a: &LinOp, b: &LinOp) -> Result<f64> {
    if !a.is_square() || !b.is_square() || a.n_in != b.n_in {
        return Err(Error::Shape("commutator needs square operators on equal sites".into()));
    }
    a.compose(b)?.max_abs_diff(&b.compose(a)?)
}

impl Add for &LinOp {
    type Output = LinOp;
    fn add(self, rhs: &LinOp) -> LinOp {
        self.try_add(rhs).expect("LinOp addition shape mismatch")
    }
}

impl Sub for &LinOp {
    type Output = LinOp;
    fn sub(self, rhs: &LinOp) -> LinOp {
        self.try_sub(rhs).expect("LinOp subtraction shape mismatch")
    }
}

impl Mul for &LinOp {
    type Output = LinOp;
    fn mul(self, rhs: &LinOp) -> LinOp {
        self.compose(rhs).expect("LinOp composition shape mismatch")
    }
}

impl Mul<C64> for &LinOp {
    type Output = LinOp;
    fn mul(self, k: C64) -> LinOp {
        self.scale(k)
    }
}

impl Neg for &LinOp {
    type Output = LinOp;
    fn neg(self) -> LinOp {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::elem::{e_merge, e_trans};
    use crate::linalg::Spin::{Down, Up};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_kron() {
        let i2 = kron(&LinOp::identity(1), &LinOp::identity(1));
        assert_eq!(i2.max_abs_diff(&LinOp::identity(2)).unwrap(), 0.0);
    }

    #[test]
    fn lowering_on_high_site() {
        // E^+_- ⊗ I on |++> gives |-+>, i.e. the high bit flips
        let op = kron(&e_trans(Up, Down), &LinOp::identity(1));
        let out = op.apply(&StateVec::basis(2, 0b00).unwrap()).unwrap();
        assert_eq!(out.max_abs_diff(&StateVec::basis(2, 0b10).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn kron_merge_high_pair_enumerated() {
        // q ⊗ I acts with q on sites (3,2); only inputs with sites 3,2 up survive
        let q = e_merge(Up, Up, Down);
        let op = kron(&q, &LinOp::identity(1));
        for bits in 0..8usize {
            let out = op.apply(&StateVec::basis(3, bits).unwrap()).unwrap();
            let site1 = bits & 1;
            let expected = if bits >> 1 == 0 {
                StateVec::basis(2, 0b10 | site1).unwrap()
            } else {
                StateVec::zeros(2)
            };
            assert_eq!(out.max_abs_diff(&expected).unwrap(), 0.0, "input {bits:03b}");
        }
        // |++->  (site 1 down)  ->  |-->
        let out = op.apply(&StateVec::basis(3, 0b001).unwrap()).unwrap();
        assert_eq!(out.max_abs_diff(&StateVec::basis(2, 0b11).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn embed_pair_identity_and_range() {
        let i2 = LinOp::identity(2);
        for n in 2..5 {
            for i in 1..n {
                let e = embed_pair(&i2, i, n).unwrap();
                assert_eq!(e.max_abs_diff(&LinOp::identity(n)).unwrap(), 0.0);
            }
        }
        assert!(matches!(embed_pair(&i2, 0, 3), Err(Error::SiteRange { .. })));
        assert!(matches!(embed_pair(&i2, 3, 3), Err(Error::SiteRange { .. })));
        let q = e_merge(Up, Up, Down);
        assert_eq!(embed_pair(&q, 1, 2).unwrap(), q);
    }

    #[test]
    fn embed_merge_middle_pair_enumerated() {
        // q on sites (2,3) of a 3-site chain: bits 1 and 2 merge into new bit 1,
        // bit 0 (site 1) is untouched
        let q = e_merge(Up, Up, Down);
        let op = embed_pair(&q, 2, 3).unwrap();
        assert_eq!((op.n_in(), op.n_out()), (3, 2));
        for bits in 0..8usize {
            let out = op.apply(&StateVec::basis(3, bits).unwrap()).unwrap();
            let expected = if bits & 0b110 == 0 {
                StateVec::basis(2, 0b10 | (bits & 1)).unwrap()
            } else {
                StateVec::zeros(2)
            };
            assert_eq!(out.max_abs_diff(&expected).unwrap(), 0.0, "input {bits:03b}");
        }
    }

    #[test]
    fn compose_rejects_mismatch() {
        let q = e_merge(Up, Up, Down);
        assert!(q.compose(&q).is_err());
        assert!(q.compose(&LinOp::identity(2)).is_ok());
    }

    #[test]
    fn sparse_dense_agree() {
        let q = e_merge(Up, Up, Down);
        let a = embed_pair(&q, 1, 3).unwrap();
        let b = embed_pair(&q, 2, 3).unwrap();
        let sum_sparse = &a - &b;
        let sum_dense = &a.clone().densify() - &b;
        assert!(sum_sparse.is_sparse() && !sum_dense.is_sparse());
        assert_eq!(sum_sparse.max_abs_diff(&sum_dense).unwrap(), 0.0);
        let prod = &a.adjoint() * &a;
        let prod_dense = &a.adjoint().densify() * &a.clone().densify();
        assert!(prod.max_abs_diff(&prod_dense).unwrap() < 1e-12);
        assert_eq!(a.clone().densify().sparsify(), a);
    }

    #[test]
    fn commutators() {
        let sz = LinOp::from_triplets(1, 1, [(0, 0, c(1.0)), (1, 1, c(-1.0))]).unwrap();
        let z1 = kron(&LinOp::identity(1), &sz);
        let z2 = kron(&sz, &LinOp::identity(1));
        assert_eq!(comm_norm(&z1, &z2).unwrap(), 0.0);
        let x = kron(&e_trans(Up, Down), &LinOp::identity(1));
        assert_eq!(comm_norm(&LinOp::identity(2), &x).unwrap(), 0.0);
        assert!(comm_norm(&z2, &x).unwrap() > 1.0);
        assert!(comm_norm(&z1, &LinOp::identity(3)).is_err());
    }
}
