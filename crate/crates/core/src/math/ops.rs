//! Matrix products and elementwise kernels.
//!
//! Every reduction sums left to right in index order so results are
//! reproducible bit for bit.

use crate::error::{dim_err, Result};
use crate::math::Tensor;
use crate::scalar::Scalar;

fn matrix_dims<T: Scalar>(t: &Tensor<T>, name: &str) -> Result<(usize, usize)> {
    match t.shape() {
        [r, c] => Ok((*r, *c)),
        s => dim_err(format!("{name} must be a matrix, got shape {s:?}")),
    }
}

/// `a · b` for `a: m×k`, `b: k×n`.
pub fn matmul<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (m, k) = matrix_dims(a, "lhs")?;
    let (k2, n) = matrix_dims(b, "rhs")?;
    if k != k2 {
        return dim_err(format!("matmul inner dimensions {k} and {k2} differ"));
    }
    let (av, bv) = (a.as_slice(), b.as_slice());
    let mut out = vec![T::zero(); m * n];
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = av[i * k + p];
            let brow = &bv[p * n..(p + 1) * n];
            for (o, &bpj) in orow.iter_mut().zip(brow) {
                *o += aip * bpj;
            }
        }
    }
    Tensor::new(vec![m, n], out)
}

/// `a · bᵀ` for `a: m×k`, `b: n×k`. Used with row-major weights `out×in`.
pub fn matmul_bt<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (m, k) = matrix_dims(a, "lhs")?;
    let (n, k2) = matrix_dims(b, "rhs")?;
    if k != k2 {
        return dim_err(format!("matmul_bt inner dimensions {k} and {k2} differ"));
    }
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        let arow = a.row(i);
        for j in 0..n {
            out.push(dot(arow, b.row(j)));
        }
    }
    Tensor::new(vec![m, n], out)
}

/// `aᵀ · b` for `a: m×k`, `b: m×n`, giving `k×n`.
pub fn matmul_at<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (m, k) = matrix_dims(a, "lhs")?;
    let (m2, n) = matrix_dims(b, "rhs")?;
    if m != m2 {
        return dim_err(format!("matmul_at outer dimensions {m} and {m2} differ"));
    }
    let mut out = vec![T::zero(); k * n];
    for r in 0..m {
        let arow = a.row(r);
        let brow = b.row(r);
        for (p, &ap) in arow.iter().enumerate() {
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += ap * bv;
            }
        }
    }
    Tensor::new(vec![k, n], out)
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn tanh_elem<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(T::tanh)
}

/// Inverse hyperbolic tangent after clamping into `[-1 + eps, 1 - eps]`.
pub fn arctanh_elem<T: Scalar>(x: &Tensor<T>, eps: T) -> Tensor<T> {
    x.map(|v| arctanh_clamped(v, eps))
}

#[inline]
pub fn arctanh_clamped<T: Scalar>(v: T, eps: T) -> T {
    let lim = T::one() - eps;
    v.max(-lim).min(lim).atanh()
}

/// Numerically stable softmax of a single logit vector, written into `out`.
pub fn softmax_into<T: Scalar>(logits: &[T], out: &mut [T]) {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let mut out = logits.clone();
    softmax_into(logits.as_slice(), out.as_mut_slice());
    out
}

/// Softmax applied to every row of an `m×C` matrix.
pub fn softmax_rows<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let mut out = logits.clone();
    let c = logits.cols();
    if c == 0 {
        return out;
    }
    for (src, dst) in logits.as_slice().chunks(c).zip(out.as_mut_slice().chunks_mut(c)) {
        softmax_into(src, dst);
    }
    out
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
