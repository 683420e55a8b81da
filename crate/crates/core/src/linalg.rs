//! Fixed-size 3x3 helpers. Everything in this crate is three-dimensional, so
//! plain arrays are enough.

use std::ops::{Add, Mul};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

pub type Mat3<T> = [[T; 3]; 3];
pub type CMat3<T> = [[Complex<T>; 3]; 3];
pub type CVec3<T> = [Complex<T>; 3];

pub fn identity<T: Zero + One + Copy>() -> Mat3<T> {
    let mut m = [[T::zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn diag<T: Zero + Copy>(d: [T; 3]) -> Mat3<T> {
    let mut m = [[T::zero(); 3]; 3];
    for i in 0..3 {
        m[i][i] = d[i];
    }
    m
}

pub fn matmul<T>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T>
where
    T: Copy + Zero + Add<Output = T> + Mul<Output = T>,
{
    let mut c = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = T::zero();
            for k in 0..3 {
                s = s + a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub fn matvec<T>(a: &Mat3<T>, v: &[T; 3]) -> [T; 3]
where
    T: Copy + Zero + Add<Output = T> + Mul<Output = T>,
{
    let mut r = [T::zero(); 3];
    for i in 0..3 {
        r[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    r
}

pub fn transpose<T: Copy>(a: &Mat3<T>) -> Mat3<T> {
    let mut t = *a;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn complexify<T: Real>(a: &Mat3<T>) -> CMat3<T> {
    a.map(|row| row.map(|x| Complex::new(x, T::zero())))
}

pub fn adjoint<T: Real>(a: &CMat3<T>) -> CMat3<T> {
    transpose(a).map(|row| row.map(|z| z.conj()))
}

/// Largest entry of |U^dagger U - I|.
pub fn unitarity_defect<T: Real>(u: &CMat3<T>) -> T {
    let g = matmul(&adjoint(u), u);
    let mut worst = T::zero();
    for (i, row) in g.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((*z - Complex::new(target, T::zero())).norm());
        }
    }
    worst
}

/// Largest entry of |Q^T Q - I| for a real matrix.
pub fn orthogonality_defect<T: Real>(q: &Mat3<T>) -> T {
    let g = matmul(&transpose(q), q);
    let mut worst = T::zero();
    for (i, row) in g.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((*x - target).abs());
        }
    }
    worst
}

pub fn max_abs_diff<T: Real>(a: &CMat3<T>, b: &CMat3<T>) -> T {
    let mut worst = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

/// Entrywise |U_nm|^2.
pub fn moduli_squared<T: Real>(u: &CMat3<T>) -> Mat3<T> {
    u.map(|row| row.map(|z| z.norm_sqr()))
}

pub fn max_abs<T: Real>(a: &Mat3<T>) -> T {
    a.iter().flat_map(|r| r.iter()).fold(T::zero(), |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_with_identity() {
        let a = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]];
        assert_eq!(matmul(&a, &identity()), a);
        assert_eq!(transpose(&transpose(&a)), a);
        assert_eq!(matvec(&a, &[1.0, 0.0, 0.0]), [1.0, 4.0, 7.0]);
    }

    #[test]
    fn permutation_is_unitary() {
        let p: Mat3<f64> = [[0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
        assert_eq!(orthogonality_defect(&p), 0.0);
        assert_eq!(unitarity_defect(&complexify(&p)), 0.0);
    }
}
