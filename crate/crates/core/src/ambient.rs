//! Geometry of the unit sphere and of the Riemannian product `S²×S² ⊂ R⁶`.
//!
//! Tangent vectors at `(p, q)` are pairs `(v1, v2)` with `v1 ⊥ p` and
//! `v2 ⊥ q`. The complex structures act factorwise by cross products,
//! `J1 = (J, J)` and `J2 = (J, -J)` with `J_p v = p × v`, and the product
//! structure is `P(v1, v2) = (v1, -v2)`.

use crate::eigen::complement_basis;
use crate::error::{GeomError, Result};
use crate::linalg::{Mat3, Vec3, Vec6, Vector};
use crate::rng::SplitMix64;
use crate::scalar::{sinc, Real};

/// Tangency tolerance for [`ProductTangent::new`].
pub const TANGENCY_TOL: f64 = 1e-10;

/// Unit vector in `R³`. Normalized on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint<T>(Vec3<T>);

impl<T: Real> SpherePoint<T> {
    pub fn new(coords: Vec3<T>) -> Result<Self> {
        coords
            .normalized()
            .map(Self)
            .ok_or_else(|| GeomError::Parameter("sphere point must be a nonzero finite vector".into()))
    }

    pub fn coords(&self) -> Vec3<T> {
        self.0
    }

    /// `p ∧ v`, the rotation by a right angle in `T_p S²`.
    pub fn j(&self, v: &Vec3<T>) -> Vec3<T> {
        self.0.cross(v)
    }

    /// Removes the radial component of `v`.
    pub fn project(&self, v: &Vec3<T>) -> Vec3<T> {
        *v - self.0 * self.0.dot(v)
    }

    pub fn random(rng: &mut SplitMix64) -> Self {
        loop {
            let v = Vec3::new(T::lit(rng.normal()), T::lit(rng.normal()), T::lit(rng.normal()));
            if let Ok(p) = Self::new(v) {
                return p;
            }
        }
    }

    pub fn random_tangent(&self, rng: &mut SplitMix64) -> Vec3<T> {
        let v = Vec3::new(T::lit(rng.normal()), T::lit(rng.normal()), T::lit(rng.normal()));
        self.project(&v)
    }
}

/// Point `(p, q)` of `S²×S²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductPoint<T> {
    pub p: SpherePoint<T>,
    pub q: SpherePoint<T>,
}

impl<T: Real> ProductPoint<T> {
    pub fn new(p: SpherePoint<T>, q: SpherePoint<T>) -> Self {
        Self { p, q }
    }

    /// Normalizes both halves of an ambient 6-vector.
    pub fn from_vec6(v: &Vec6<T>) -> Result<Self> {
        Ok(Self::new(SpherePoint::new(v.first())?, SpherePoint::new(v.second())?))
    }

    pub fn to_vec6(&self) -> Vec6<T> {
        Vec6::from_halves(self.p.coords(), self.q.coords())
    }

    pub fn random(rng: &mut SplitMix64) -> Self {
        Self::new(SpherePoint::random(rng), SpherePoint::random(rng))
    }

    /// Orthogonal projection of an ambient vector onto `T(S²×S²)`.
    pub fn project(&self, v: &Vec6<T>) -> Vec6<T> {
        Vec6::from_halves(self.p.project(&v.first()), self.q.project(&v.second()))
    }

    /// Ambient distance in `R⁶`; used to compare base points.
    pub fn distance(&self, other: &Self) -> T {
        (self.to_vec6() - other.to_vec6()).norm()
    }

    /// Orthonormal basis `(t1,0), (t2,0), (0,s1), (0,s2)` of the tangent space,
    /// positively oriented.
    pub fn tangent_basis(&self) -> [Vec6<T>; 4] {
        let (t1, t2) = complement_basis(&self.p.coords());
        let (s1, s2) = complement_basis(&self.q.coords());
        let z = Vec3::zeros();
        [Vec6::from_halves(t1, z), Vec6::from_halves(t2, z), Vec6::from_halves(z, s1), Vec6::from_halves(z, s2)]
    }

    /// Exponential map of the product metric.
    pub fn exp(&self, v: &Vec6<T>) -> Self {
        Self::new(sphere_exp_unchecked(&self.p, &v.first()), sphere_exp_unchecked(&self.q, &v.second()))
    }
}

/// Tangent vector `(v1, v2)` at a [`ProductPoint`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductTangent<T> {
    pub base: ProductPoint<T>,
    pub v1: Vec3<T>,
    pub v2: Vec3<T>,
}

impl<T: Real> ProductTangent<T> {
    /// Checks `⟨p, v1⟩ = ⟨q, v2⟩ = 0` within [`TANGENCY_TOL`] (relative to `|v|`).
    pub fn new(base: ProductPoint<T>, v1: Vec3<T>, v2: Vec3<T>) -> Result<Self> {
        let scale = T::one().max(v1.norm()).max(v2.norm());
        let inner = base.p.coords().dot(&v1).abs().max(base.q.coords().dot(&v2).abs());
        if inner > T::lit(TANGENCY_TOL) * scale {
            return Err(GeomError::NotTangent { inner: inner.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { base, v1, v2 })
    }

    pub fn from_vec6(base: ProductPoint<T>, v: &Vec6<T>) -> Result<Self> {
        Self::new(base, v.first(), v.second())
    }

    /// Projects an arbitrary ambient vector onto the tangent space.
    pub fn projected(base: ProductPoint<T>, v: &Vec6<T>) -> Self {
        let w = base.project(v);
        Self { base, v1: w.first(), v2: w.second() }
    }

    pub fn to_vec6(&self) -> Vec6<T> {
        Vec6::from_halves(self.v1, self.v2)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.v1.dot(&other.v1) + self.v2.dot(&other.v2)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { base: self.base, v1: self.v1 * s, v2: self.v2 * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { base: self.base, v1: self.v1 + other.v1, v2: self.v2 + other.v2 }
    }

    pub fn random(base: ProductPoint<T>, rng: &mut SplitMix64) -> Self {
        Self { base, v1: base.p.random_tangent(rng), v2: base.q.random_tangent(rng) }
    }
}

/// Great-circle exponential `cos|v| p + sin|v| v/|v|`.
pub fn sphere_exp<T: Real>(p: &SpherePoint<T>, v: &Vec3<T>) -> Result<SpherePoint<T>> {
    let inner = p.coords().dot(v);
    if inner.abs() > T::lit(TANGENCY_TOL) * T::one().max(v.norm()) {
        return Err(GeomError::NotTangent { inner: inner.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(sphere_exp_unchecked(p, v))
}

pub(crate) fn sphere_exp_unchecked<T: Real>(p: &SpherePoint<T>, v: &Vec3<T>) -> SpherePoint<T> {
    let n = v.norm();
    if n < T::lit(1e-15) {
        return *p;
    }
    let x = p.coords() * n.cos() + *v * sinc(n);
    SpherePoint(x.normalized().unwrap_or(p.coords()))
}

/// `P(v1, v2) = (v1, -v2)`.
pub fn apply_p<T: Real>(t: &ProductTangent<T>) -> ProductTangent<T> {
    ProductTangent { base: t.base, v1: t.v1, v2: -t.v2 }
}

/// `J1(v1, v2) = (p∧v1, q∧v2)`.
pub fn apply_j1<T: Real>(t: &ProductTangent<T>) -> ProductTangent<T> {
    ProductTangent { base: t.base, v1: t.base.p.j(&t.v1), v2: t.base.q.j(&t.v2) }
}

/// `J2(v1, v2) = (p∧v1, -q∧v2)`.
pub fn apply_j2<T: Real>(t: &ProductTangent<T>) -> ProductTangent<T> {
    ProductTangent { base: t.base, v1: t.base.p.j(&t.v1), v2: -t.base.q.j(&t.v2) }
}

/// Product structure on raw ambient 6-vectors.
pub fn p_vec6<T: Real>(v: &Vec6<T>) -> Vec6<T> {
    Vec6::from_halves(v.first(), -v.second())
}

/// `J1` on a raw 6-vector tangent at `pt`.
pub fn j1_vec6<T: Real>(pt: &ProductPoint<T>, v: &Vec6<T>) -> Vec6<T> {
    Vec6::from_halves(pt.p.j(&v.first()), pt.q.j(&v.second()))
}

/// `J2` on a raw 6-vector tangent at `pt`.
pub fn j2_vec6<T: Real>(pt: &ProductPoint<T>, v: &Vec6<T>) -> Vec6<T> {
    Vec6::from_halves(pt.p.j(&v.first()), -pt.q.j(&v.second()))
}

/// Curvature tensor on raw 6-vectors (no base-point check).
pub fn curvature_vec6<T: Real>(v: &Vec6<T>, w: &Vec6<T>, x: &Vec6<T>, y: &Vec6<T>) -> T {
    let (pv, pw) = (p_vec6(v), p_vec6(w));
    (v.dot(y) * w.dot(x) - v.dot(x) * w.dot(y) + pv.dot(y) * pw.dot(x) - pv.dot(x) * pw.dot(y)) / T::lit(2.0)
}

/// `R̄(v,w,x,y) = ½{⟨v,y⟩⟨w,x⟩ − ⟨v,x⟩⟨w,y⟩ + ⟨Pv,y⟩⟨Pw,x⟩ − ⟨Pv,x⟩⟨Pw,y⟩}`.
pub fn curvature_r<T: Real>(
    v: &ProductTangent<T>,
    w: &ProductTangent<T>,
    x: &ProductTangent<T>,
    y: &ProductTangent<T>,
) -> Result<T> {
    let tol = T::lit(1e-12);
    for other in [w, x, y] {
        let d = v.base.distance(&other.base);
        if d > tol {
            return Err(GeomError::BaseMismatch { distance: d.to_f64().unwrap_or(f64::NAN) });
        }
    }
    Ok(curvature_vec6(&v.to_vec6(), &w.to_vec6(), &x.to_vec6(), &y.to_vec6()))
}

/// Sectional curvature of the ambient plane spanned by orthonormal `v, w`.
pub fn ambient_sectional<T: Real>(v: &ProductTangent<T>, w: &ProductTangent<T>) -> Result<T> {
    curvature_r(v, w, w, v)
}

/// `F(p, q) = ⟨p, q⟩`.
pub fn iso_f<T: Real>(pt: &ProductPoint<T>) -> T {
    pt.p.coords().dot(&pt.q.coords())
}

/// `G(p, q) = ⟨p, a⟩`.
pub fn iso_g<T: Real>(pt: &ProductPoint<T>, a: &SpherePoint<T>) -> T {
    pt.p.coords().dot(&a.coords())
}

/// Squared gradient norm and Laplacian of an ambient function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradLaplacian<T> {
    pub grad_sq: T,
    pub laplacian: T,
}

/// `|∇f|²` and `Δf` at `pt` by geodesic central differences along an
/// orthonormal tangent frame, with one Richardson level.
pub fn grad_laplacian<T: Real>(f: impl Fn(&ProductPoint<T>) -> T, pt: &ProductPoint<T>, h: T) -> GradLaplacian<T> {
    let f0 = f(pt);
    let two = T::lit(2.0);
    let mut grad_sq = T::zero();
    let mut laplacian = T::zero();
    for dir in pt.tangent_basis() {
        let diffs = |step: T| {
            let fp = f(&pt.exp(&dir.scale(step)));
            let fm = f(&pt.exp(&dir.scale(-step)));
            ((fp - fm) / (two * step), (fp - two * f0 + fm) / (step * step))
        };
        let (d1_h, d2_h) = diffs(h);
        let (d1_half, d2_half) = diffs(h / two);
        let four = T::lit(4.0);
        let d1 = (four * d1_half - d1_h) / T::lit(3.0);
        let d2 = (four * d2_half - d2_h) / T::lit(3.0);
        grad_sq = grad_sq + d1 * d1;
        laplacian = laplacian + d2;
    }
    GradLaplacian { grad_sq, laplacian }
}

/// Default geodesic step for [`grad_laplacian`].
pub const ISO_STEP: f64 = 1e-4;

/// Element `(A, B)` or `(A, B)∘swap` of the isometry group of `S²×S²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientIsometry<T> {
    a: Mat3<T>,
    b: Mat3<T>,
    swap: bool,
}

impl<T: Real> AmbientIsometry<T> {
    pub fn new(a: Mat3<T>, b: Mat3<T>, swap: bool) -> Result<Self> {
        let tol = T::lit(1e-12);
        for m in [&a, &b] {
            let defect = m.transpose().matmul(m).sub(&Mat3::identity()).max_abs();
            if defect > tol {
                return Err(GeomError::Parameter(format!("isometry block is not orthogonal (defect {defect:e})")));
            }
        }
        Ok(Self { a, b, swap })
    }

    pub fn identity() -> Self {
        Self { a: Mat3::identity(), b: Mat3::identity(), swap: false }
    }

    /// `(p, q) ↦ (q, p)`.
    pub fn factor_swap() -> Self {
        Self { swap: true, ..Self::identity() }
    }

    pub fn blocks(&self) -> (&Mat3<T>, &Mat3<T>, bool) {
        (&self.a, &self.b, self.swap)
    }

    /// Random element: Haar-distributed blocks in `O(3)` and a fair swap coin.
    pub fn random(rng: &mut SplitMix64) -> Self {
        let a = random_orthogonal(rng);
        let b = random_orthogonal(rng);
        let swap = rng.coin();
        Self { a, b, swap }
    }

    /// `(Ap, Bq)`, or `(Aq, Bp)` when swapping.
    pub fn apply(&self, pt: &ProductPoint<T>) -> ProductPoint<T> {
        let (p, q) = (pt.p.coords(), pt.q.coords());
        let (first, second) = if self.swap { (q, p) } else { (p, q) };
        ProductPoint::new(SpherePoint(self.a.mul_vec(&first)), SpherePoint(self.b.mul_vec(&second)))
    }

    /// Differential acting on an ambient 6-vector.
    pub fn push_vec6(&self, v: &Vec6<T>) -> Vec6<T> {
        let (first, second) = if self.swap { (v.second(), v.first()) } else { (v.first(), v.second()) };
        Vec6::from_halves(self.a.mul_vec(&first), self.b.mul_vec(&second))
    }

    /// `+1` when the isometry preserves the orientation of `S²×S²`.
    pub fn orientation_sign(&self) -> T {
        let s = self.a.det() * self.b.det();
        if s > T::zero() {
            T::one()
        } else {
            -T::one()
        }
    }

    /// `+1` if `dF∘P = P∘dF`, `-1` if the factors are exchanged.
    pub fn product_sign(&self) -> T {
        if self.swap {
            -T::one()
        } else {
            T::one()
        }
    }
}

/// Apply an isometry to a point.
pub fn apply_isometry<T: Real>(iso: &AmbientIsometry<T>, pt: &ProductPoint<T>) -> ProductPoint<T> {
    iso.apply(pt)
}

fn random_orthogonal<T: Real>(rng: &mut SplitMix64) -> Mat3<T> {
    // Gram-Schmidt on a Gaussian matrix gives Haar measure on O(3).
    let g = |rng: &mut SplitMix64| -> Vec3<T> {
        Vector([T::lit(rng.normal()), T::lit(rng.normal()), T::lit(rng.normal())])
    };
    loop {
        let c0 = g(rng);
        let c1 = g(rng);
        let c2 = g(rng);
        let Some(e0) = c0.normalized() else { continue };
        let Some(e1) = (c1 - e0 * e0.dot(&c1)).normalized() else { continue };
        let Some(e2) = (c2 - e0 * e0.dot(&c2) - e1 * e1.dot(&c2)).normalized() else { continue };
        return Mat3::from_cols([e0, e1, e2]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn sp(x: f64, y: f64, z: f64) -> SpherePoint<f64> {
        SpherePoint::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn exp_of_zero_fixes_point() {
        let p = sp(0.3, -0.4, 0.8);
        assert_eq!(sphere_exp(&p, &Vec3::zeros()).unwrap(), p);
    }

    #[test]
    fn quarter_great_circle() {
        let p = sp(0.0, 0.0, 1.0);
        let q = sphere_exp(&p, &Vec3::new(FRAC_PI_2, 0.0, 0.0)).unwrap();
        assert!((q.coords() - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_stays_on_sphere() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..100 {
            let p = SpherePoint::<f64>::random(&mut rng);
            let v = p.random_tangent(&mut rng).scale(rng.uniform(0.0, 7.0));
            let q = sphere_exp(&p, &v).unwrap();
            assert!((q.coords().norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_rejects_non_tangent() {
        let p = sp(0.0, 0.0, 1.0);
        let err = sphere_exp(&p, &Vec3::new(0.0, 0.0, 0.1)).unwrap_err();
        assert!(matches!(err, GeomError::NotTangent { .. }));
    }

    #[test]
    fn structures_on_random_tangents() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..100 {
            let base = ProductPoint::<f64>::random(&mut rng);
            let t = ProductTangent::random(base, &mut rng);
            let s = ProductTangent::random(base, &mut rng);
            assert_eq!(apply_p(&apply_p(&t)), t);
            let pj = apply_j1(&apply_j2(&t)).scale(-1.0);
            let jp = apply_j2(&apply_j1(&t)).scale(-1.0);
            let p = apply_p(&t);
            assert!((pj.to_vec6() - p.to_vec6()).norm() < 1e-12);
            assert!((jp.to_vec6() - p.to_vec6()).norm() < 1e-12);
            assert!((apply_p(&t).dot(&apply_p(&s)) - t.dot(&s)).abs() < 1e-12);
            assert!((apply_j1(&t).norm() - t.norm()).abs() < 1e-12);
            let jj = apply_j1(&apply_j1(&t));
            assert!((jj.to_vec6() + t.to_vec6()).norm() < 1e-12);
        }
    }

    #[test]
    fn curvature_symmetries() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let base = ProductPoint::<f64>::random(&mut rng);
            let [v, w, x, y] = [0; 4].map(|_| ProductTangent::random(base, &mut rng));
            let r = |a, b, c, d| curvature_r(a, b, c, d).unwrap();
            let rvwxy = r(&v, &w, &x, &y);
            assert!((rvwxy + r(&w, &v, &x, &y)).abs() < 1e-12);
            assert!((rvwxy + r(&v, &w, &y, &x)).abs() < 1e-12);
            assert!((rvwxy - r(&x, &y, &v, &w)).abs() < 1e-12);
            let bianchi = rvwxy + r(&w, &x, &v, &y) + r(&x, &v, &w, &y);
            assert!(bianchi.abs() < 1e-12);
        }
    }

    #[test]
    fn sectional_curvatures_of_special_planes() {
        let mut rng = SplitMix64::new(8);
        for _ in 0..50 {
            let base = ProductPoint::<f64>::random(&mut rng);
            let [t1, t2, s1, s2] = base.tangent_basis();
            let tan = |v: Vec6<f64>| ProductTangent::from_vec6(base, &v).unwrap();
            // mixed plane: one vector per factor
            let mixed = ambient_sectional(&tan(t1), &tan(s2)).unwrap();
            assert!(mixed.abs() < 1e-12);
            // plane inside one factor
            assert!((ambient_sectional(&tan(t1), &tan(t2)).unwrap() - 1.0).abs() < 1e-12);
            assert!((ambient_sectional(&tan(s1), &tan(s2)).unwrap() - 1.0).abs() < 1e-12);
            // scalar curvature
            let frame = base.tangent_basis().map(tan);
            let mut scal = 0.0;
            for a in &frame {
                for b in &frame {
                    scal += curvature_r(a, b, b, a).unwrap();
                }
            }
            assert!((scal - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_rejects_mixed_bases() {
        let mut rng = SplitMix64::new(9);
        let b1 = ProductPoint::<f64>::random(&mut rng);
        let b2 = ProductPoint::<f64>::random(&mut rng);
        let v = ProductTangent::random(b1, &mut rng);
        let w = ProductTangent::random(b2, &mut rng);
        assert!(matches!(curvature_r(&v, &w, &v, &w), Err(GeomError::BaseMismatch { .. })));
    }

    #[test]
    fn isoparametric_values() {
        let p = sp(0.1, 0.7, -0.2);
        let minus = SpherePoint::new(-p.coords()).unwrap();
        assert!((iso_f(&ProductPoint::new(p, p)) - 1.0).abs() < 1e-15);
        assert!((iso_f(&ProductPoint::new(p, minus)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn isoparametric_identities() {
        let mut rng = SplitMix64::new(21);
        let a = sp(0.0, 0.0, 1.0);
        for _ in 0..100 {
            let pt = ProductPoint::<f64>::random(&mut rng);
            let f = iso_f(&pt);
            let gl = grad_laplacian(iso_f, &pt, ISO_STEP);
            assert!((gl.grad_sq - 2.0 * (1.0 - f * f)).abs() < 1e-4);
            assert!((gl.laplacian + 4.0 * f).abs() < 1e-4);
            let g = iso_g(&pt, &a);
            let gl = grad_laplacian(|x| iso_g(x, &a), &pt, ISO_STEP);
            assert!((gl.grad_sq - (1.0 - g * g)).abs() < 1e-4);
            assert!((gl.laplacian + 2.0 * g).abs() < 1e-4);
        }
    }

    #[test]
    fn identity_and_random_isometries() {
        let mut rng = SplitMix64::new(4);
        for _ in 0..20 {
            let pt = ProductPoint::<f64>::random(&mut rng);
            assert_eq!(apply_isometry(&AmbientIsometry::identity(), &pt), pt);
            let iso = AmbientIsometry::random(&mut rng);
            let other = ProductPoint::<f64>::random(&mut rng);
            // preserves the product metric on chords
            let d0 = pt.distance(&other);
            let d1 = iso.apply(&pt).distance(&iso.apply(&other));
            assert!((d0 - d1).abs() < 1e-12);
        }
    }

    #[test]
    fn non_orthogonal_blocks_rejected() {
        let m = Mat3::diag(1.0, 2.0, 1.0);
        assert!(AmbientIsometry::new(m, Mat3::identity(), false).is_err());
    }
}
