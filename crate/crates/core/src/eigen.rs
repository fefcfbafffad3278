//! Closed-form spectral decomposition of symmetric 3×3 matrices.
//!
//! Eigenvalues come from the trigonometric solution of the characteristic
//! cubic. The eigenvector of the best-isolated eigenvalue is taken from the
//! cross products of rows of `A - λI`; the remaining pair is resolved as a
//! 2×2 problem in its orthogonal complement, which keeps the frame orthonormal
//! even when two eigenvalues collide.

use crate::linalg::{Mat3, Vec3, Vector};
use crate::scalar::Real;

/// Gap below which two eigenvalues are reported as a single multiple root.
pub const TIE_GAP: f64 = 1e-7;

/// Eigenvalues sorted descending with matching orthonormal eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetricEigen<T> {
    pub values: [T; 3],
    /// `vectors[i]` is the unit eigenvector of `values[i]`; the triple is right-handed.
    pub vectors: [Vec3<T>; 3],
}

impl<T: Real> SymmetricEigen<T> {
    /// Groups eigenvalues closer than `gap` into clusters, returning
    /// `(mean value, multiplicity)` from largest to smallest.
    pub fn clusters(&self, gap: T) -> Vec<(T, usize)> {
        let mut out: Vec<(T, usize)> = Vec::with_capacity(3);
        let mut start = 0;
        for i in 1..=3 {
            if i == 3 || self.values[i - 1] - self.values[i] >= gap {
                let n = i - start;
                let mean = self.values[start..i].iter().copied().sum::<T>() / T::from_count(n);
                out.push((mean, n));
                start = i;
            }
        }
        out
    }

    /// Multiplicities under the default tie gap, e.g. `[1, 2]`.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters(T::lit(TIE_GAP)).into_iter().map(|(_, m)| m).collect()
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> T {
        (self.values[0] - self.values[1]).min(self.values[1] - self.values[2])
    }
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues<T: Real>(a: &Mat3<T>) -> [T; 3] {
    let m = &a.0;
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == T::zero() {
        let mut v = [m[0][0], m[1][1], m[2][2]];
        v.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return v;
    }
    let q = a.trace() / T::lit(3.0);
    let d0 = m[0][0] - q;
    let d1 = m[1][1] - q;
    let d2 = m[2][2] - q;
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + T::lit(2.0) * p1;
    let p = (p2 / T::lit(6.0)).sqrt();
    if p == T::zero() {
        return [q; 3];
    }
    let b = a.sub(&Mat3::identity().scale(q)).scale(p.recip());
    let r = (b.det() / T::lit(2.0)).max(-T::one()).min(T::one());
    let phi = r.acos() / T::lit(3.0);
    let two = T::lit(2.0);
    let e0 = q + two * p * phi.cos();
    let e2 = q + two * p * (phi + two * T::PI() / T::lit(3.0)).cos();
    let e1 = T::lit(3.0) * q - e0 - e2;
    let mut v = [e0, e1, e2];
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    v
}

/// Full closed-form decomposition of a symmetric matrix.
pub fn symmetric_eigen<T: Real>(a: &Mat3<T>) -> SymmetricEigen<T> {
    let values = symmetric_eigenvalues(a);
    let scale = a.max_abs().max(T::min_positive_value());
    let top_gap = values[0] - values[1];
    let bottom_gap = values[1] - values[2];
    if top_gap.max(bottom_gap) <= T::epsilon() * scale * T::lit(8.0) {
        return SymmetricEigen { values, vectors: [Vec3::basis(0), Vec3::basis(1), Vec3::basis(2)] };
    }

    // Isolated eigenvector first, then the pair in its complement.
    let iso = if top_gap >= bottom_gap { 0 } else { 2 };
    let v_iso = null_vector(a, values[iso]);
    let (u, w) = complement_basis(&v_iso);
    let au = a.mul_vec(&u);
    let aw = a.mul_vec(&w);
    let (uu, uw, ww) = (u.dot(&au), u.dot(&aw), w.dot(&aw));
    // Rotation diagonalizing [[uu, uw], [uw, ww]].
    let theta = (T::lit(2.0) * uw).atan2(uu - ww) / T::lit(2.0);
    let (s, c) = theta.sin_cos();
    let big = u * c + w * s;
    let small = w * c - u * s;
    let (big, small) =
        if big.dot(&a.mul_vec(&big)) >= small.dot(&a.mul_vec(&small)) { (big, small) } else { (small, big) };
    let mut pairs = [v_iso, big, small].map(|v| (v.dot(&a.mul_vec(&v)), v));
    // Rayleigh quotients recover full precision near a double root, where
    // the trigonometric values are only accurate to about √ε.
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let values = pairs.map(|(l, _)| l);
    let mut vectors = pairs.map(|(_, v)| v);
    if vectors[0].cross(&vectors[1]).dot(&vectors[2]) < T::zero() {
        vectors[2] = -vectors[2];
    }
    SymmetricEigen { values, vectors }
}

fn null_vector<T: Real>(a: &Mat3<T>, lambda: T) -> Vec3<T> {
    let shifted = a.sub(&Mat3::identity().scale(lambda));
    let rows = [shifted.row(0), shifted.row(1), shifted.row(2)];
    let candidates = [rows[0].cross(&rows[1]), rows[0].cross(&rows[2]), rows[1].cross(&rows[2])];
    let best =
        candidates.iter().max_by(|x, y| x.norm_squared().partial_cmp(&y.norm_squared()).unwrap()).copied().unwrap();
    best.normalized().unwrap_or_else(|| Vec3::basis(0))
}

/// Orthonormal pair completing `v` (unit) to a right-handed basis.
pub fn complement_basis<T: Real>(v: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let axis = (0..3).min_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).unwrap()).unwrap();
    let u = (Vector::basis(axis) - *v * v[axis]).normalized().unwrap();
    let w = v.cross(&u);
    (u, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic Jacobi iteration, used only as an independent oracle.
    fn jacobi(a: &Mat3<f64>) -> [f64; 3] {
        let mut m = *a;
        for _ in 0..100 {
            let mut off = 0.0;
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                off += m[(p, q)].abs();
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (2.0 * m[(p, q)]).atan2(m[(q, q)] - m[(p, p)]);
                let (s, c) = theta.sin_cos();
                let mut r = Mat3::identity();
                r[(p, p)] = c;
                r[(q, q)] = c;
                r[(p, q)] = s;
                r[(q, p)] = -s;
                m = r.transpose().matmul(&m).matmul(&r);
            }
            if off < 1e-300 {
                break;
            }
        }
        let mut v = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
        v.sort_by(|x, y| y.partial_cmp(x).unwrap());
        v
    }

    fn check_decomposition(a: &Mat3<f64>, tol: f64) {
        let e = symmetric_eigen(a);
        for i in 0..3 {
            let r = a.mul_vec(&e.vectors[i]) - e.vectors[i] * e.values[i];
            assert!(r.norm() < tol, "residual {} for {:?}", r.norm(), a);
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((e.vectors[i].dot(&e.vectors[j]) - expect).abs() < 1e-12);
            }
        }
        let det = Mat3::from_cols(e.vectors).det();
        assert!((det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_jacobi_on_generic_matrix() {
        let a = Mat3([[2.0, -0.3, 0.7], [-0.3, 0.5, 1.1], [0.7, 1.1, -1.4]]);
        let closed = symmetric_eigenvalues(&a);
        let oracle = jacobi(&a);
        for i in 0..3 {
            assert!((closed[i] - oracle[i]).abs() < 1e-12);
        }
        check_decomposition(&a, 1e-12);
    }

    #[test]
    fn umbilic_has_triple_root() {
        let c: f64 = 0.37;
        let e = symmetric_eigen(&Mat3::diag(c, c, c));
        assert_eq!(e.values, [c, c, c]);
        let clusters = e.clusters(1e-7);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].1, 3);
        assert!((clusters[0].0 - c).abs() < 1e-15);
    }

    #[test]
    fn double_root_is_clustered_and_frame_stays_orthonormal() {
        // rotate diag(4/3, 0, 0)
        let (s, c) = 0.4f64.sin_cos();
        let r = Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]);
        let a = r.matmul(&Mat3::diag(0.0, 4.0 / 3.0, 0.0)).matmul(&r.transpose());
        let e = symmetric_eigen(&a);
        assert!((e.values[0] - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(e.multiplicities(), vec![1, 2]);
        check_decomposition(&a, 1e-12);
    }

    #[test]
    fn diagonal_input_is_sorted_descending() {
        let e = symmetric_eigen(&Mat3::<f64>::diag(-1.0, 3.0, 0.5));
        assert_eq!(e.values, [3.0, 0.5, -1.0]);
        assert!((e.vectors[0].dot(&Vec3::basis(1)).abs() - 1.0).abs() < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn random_symmetric_matrices(
            d in proptest::array::uniform3(-5.0f64..5.0),
            o in proptest::array::uniform3(-5.0f64..5.0),
        ) {
            let a = Mat3([[d[0], o[0], o[1]], [o[0], d[1], o[2]], [o[1], o[2], d[2]]]);
            let closed = symmetric_eigenvalues(&a);
            let oracle = jacobi(&a);
            for i in 0..3 {
                proptest::prop_assert!((closed[i] - oracle[i]).abs() < 1e-9);
            }
            check_decomposition(&a, 1e-8);
        }
    }
}
