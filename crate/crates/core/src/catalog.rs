//! Example hypersurfaces with closed-form curvature.
//!
//! Every chart is oriented so that the normal used by [`crate::shape`]
//! coincides with the normal written next to the family below.

use crate::ambient::{ProductPoint, SpherePoint};
use crate::error::{GeomError, Result};
use crate::jets::{Chart, Coords};
use crate::linalg::{Vec3, Vec6};
use crate::scalar::Real;

/// Latitude cap of the sphere charts, in degrees.
pub const POLAR_CAP_DEG: f64 = 80.0;
/// `|⟨p,a⟩|` above which `M_{a,b}` is not evaluated.
pub const MAB_GUARD: f64 = 0.95;
/// `|⟨p,a⟩⟨q,b⟩|` below which `M̂_{a,b}` is not evaluated.
pub const MHAT_GUARD: f64 = 0.05;

/// Parameters of a catalog family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyKind<T> {
    /// `S¹(r)×S²`, the level sets of `⟨p, a⟩` with `a = e₃`.
    S1rxS2 { r: T },
    /// `M_t = {⟨p, q⟩ = t}`.
    Mt { t: T },
    /// `M_{a,b} = {⟨p,a⟩ + ⟨q,b⟩ = 0}` with `a = e₃`, `b = -e₃`.
    Mab,
    /// `M̂_{a,b} = {⟨p,a⟩² + ⟨q,b⟩² = 1}` with `a = b = e₃`.
    MhatAb,
}

impl<T: Real> FamilyKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::S1rxS2 { .. } => "s1rxs2",
            Self::Mt { .. } => "mt",
            Self::Mab => "mab",
            Self::MhatAb => "mhat",
        }
    }

    /// The points `a`, `b` of the defining equation.
    pub fn anchors(&self) -> (Vec3<T>, Vec3<T>) {
        let e3 = Vec3::basis(2);
        match self {
            Self::Mab => (e3, -e3),
            _ => (e3, e3),
        }
    }

    /// Whether the principal curvatures are constant and pairwise distinct.
    pub fn has_constant_distinct_spectrum(&self) -> bool {
        matches!(self, Self::Mt { .. })
    }
}

/// A family together with its chart.
#[derive(Clone, Debug)]
pub struct FamilySpec<T> {
    pub kind: FamilyKind<T>,
    pub chart: Chart<T>,
}

impl<T: Real> FamilySpec<T> {
    pub fn new(kind: FamilyKind<T>) -> Result<Self> {
        let chart = match kind {
            FamilyKind::S1rxS2 { r } => chart_s1r_x_s2(r)?,
            FamilyKind::Mt { t } => chart_mt(t)?,
            FamilyKind::Mab => chart_mab(),
            FamilyKind::MhatAb => chart_mhat_ab(),
        };
        Ok(Self { kind, chart })
    }

    pub fn oracle(&self, pt: &ProductPoint<T>) -> OracleValues<T> {
        oracle(&self.kind, pt)
    }

    pub fn defining_residual(&self, pt: &ProductPoint<T>) -> T {
        defining_residual(&self.kind, pt)
    }

    pub fn reference_normal(&self, pt: &ProductPoint<T>) -> Vec6<T> {
        reference_normal(&self.kind, pt)
    }
}

fn cap<T: Real>() -> T {
    T::lit(POLAR_CAP_DEG.to_radians())
}

fn full_turn<T: Real>() -> (T, T) {
    (-T::PI(), T::PI())
}

/// Latitude-longitude point `(cos v cos u, cos v sin u, sin v)`.
fn lat_long<T: Real>(u: T, v: T) -> Vec3<T> {
    Vec3::new(v.cos() * u.cos(), v.cos() * u.sin(), v.sin())
}

fn check_cap<T: Real>(v: T) -> Result<()> {
    if v.abs() > cap::<T>() {
        return Err(GeomError::SingularLocus(format!(
            "latitude {:.6} rad lies in the excluded polar cap",
            v.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// `(u,v,w) ↦ ((r cos u, r sin u, √(1-r²)), (cos v cos w, cos v sin w, sin v))`.
///
/// Oriented by the normal `(a - ⟨p,a⟩p, 0)/|·|`, which points toward `a`.
pub fn chart_s1r_x_s2<T: Real>(r: T) -> Result<Chart<T>> {
    if !(r > T::zero() && r <= T::one()) {
        return Err(GeomError::Parameter("r must lie in (0,1]".into()));
    }
    let z = (T::one() - r * r).max(T::zero()).sqrt();
    let c = cap::<T>();
    let chart = Chart::new(format!("S1({r})xS2"), [full_turn(), (-c, c), full_turn()], move |u: &Coords<T>| {
        check_cap(u[1])?;
        let p = SpherePoint::new(Vec3::new(r * u[0].cos(), r * u[0].sin(), z))?;
        let q = SpherePoint::new(lat_long(u[2], u[1]))?;
        Ok(ProductPoint::new(p, q))
    });
    Ok(chart.reversed())
}

/// `p = (cos v cos u, cos v sin u, sin v)`, `q = tp + √(1-t²)(cos w f₁ + sin w f₂)`
/// with `f₁ = ∂_u p / cos v`, `f₂ = ∂_v p`.
///
/// Oriented by `N = (q - tp, p - tq)/√(2(1-t²))`.
pub fn chart_mt<T: Real>(t: T) -> Result<Chart<T>> {
    if !(t > -T::one() && t < T::one()) {
        return Err(GeomError::Parameter("t must lie in (−1,1)".into()));
    }
    let s = (T::one() - t * t).sqrt();
    let c = cap::<T>();
    Ok(Chart::new(format!("M_{t}"), [full_turn(), (-c, c), full_turn()], move |x: &Coords<T>| {
        let (u, v, w) = (x[0], x[1], x[2]);
        check_cap(v)?;
        let p = lat_long(u, v);
        let f1 = Vec3::new(-u.sin(), u.cos(), T::zero());
        let f2 = Vec3::new(-v.sin() * u.cos(), -v.sin() * u.sin(), v.cos());
        let q = p * t + (f1 * w.cos() + f2 * w.sin()) * s;
        Ok(ProductPoint::new(SpherePoint::new(p)?, SpherePoint::new(q)?))
    }))
}

fn mab_bound<T: Real>() -> T {
    // |sin(t/√2)| ≤ guard
    T::lit(MAB_GUARD).asin() * T::SQRT_2()
}

fn mhat_bound<T: Real>() -> T {
    // |cos(√2 t)| / 2 ≥ guard
    (T::lit(2.0 * MHAT_GUARD)).acos() / T::SQRT_2()
}

/// `Φ(t,r,s) = cos(t/√2)((cos r, sin r, 0), (cos s, sin s, 0)) + sin(t/√2)(a, -b)`.
///
/// Oriented by `N = (a - ⟨p,a⟩p, b - ⟨q,b⟩q)/√(2(1-⟨p,a⟩²))`.
pub fn chart_mab<T: Real>() -> Chart<T> {
    let bound = mab_bound::<T>();
    let margin = T::lit(1e-6);
    Chart::new("M_ab", [(-bound + margin, bound - margin), full_turn(), full_turn()], move |x: &Coords<T>| {
        let tau = x[0] / T::SQRT_2();
        let (st, ct) = tau.sin_cos();
        if st.abs() > T::lit(MAB_GUARD) {
            return Err(GeomError::SingularLocus(format!(
                "|<p,a>| = {:.6} exceeds the guard band near the singular points",
                st.abs().to_f64().unwrap_or(f64::NAN)
            )));
        }
        let p = Vec3::new(ct * x[1].cos(), ct * x[1].sin(), st);
        let q = Vec3::new(ct * x[2].cos(), ct * x[2].sin(), st);
        Ok(ProductPoint::new(SpherePoint::new(p)?, SpherePoint::new(q)?))
    })
}

/// `φ = ((cos τ - sin τ)/√2)(cos r, sin r, 0) + (0, 0, (cos τ + sin τ)/√2)`,
/// `ψ = ((cos τ + sin τ)/√2)(cos s, sin s, 0) + (0, 0, (cos τ - sin τ)/√2)`, `τ = t/√2`.
///
/// Oriented by `N = (x(a - xp), y(b - yq))/(√2|xy|)`, `x = ⟨p,a⟩`, `y = ⟨q,b⟩`.
pub fn chart_mhat_ab<T: Real>() -> Chart<T> {
    let bound = mhat_bound::<T>();
    let margin = T::lit(1e-6);
    Chart::new("Mhat_ab", [(-bound + margin, bound - margin), full_turn(), full_turn()], move |x: &Coords<T>| {
        let tau = x[0] / T::SQRT_2();
        let (st, ct) = tau.sin_cos();
        let plus = (ct + st) / T::SQRT_2();
        let minus = (ct - st) / T::SQRT_2();
        if (plus * minus).abs() < T::lit(MHAT_GUARD) {
            return Err(GeomError::SingularLocus(format!(
                "|<p,a><q,b>| = {:.6} is inside the guard band of the singular curves",
                (plus * minus).abs().to_f64().unwrap_or(f64::NAN)
            )));
        }
        let p = Vec3::new(minus * x[1].cos(), minus * x[1].sin(), plus);
        let q = Vec3::new(plus * x[2].cos(), plus * x[2].sin(), minus);
        Ok(ProductPoint::new(SpherePoint::new(p)?, SpherePoint::new(q)?))
    })
    .reversed()
}

/// Closed-form values for comparison with the numerical pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValues<T> {
    /// Descending.
    pub lambdas: [T; 3],
    pub h: T,
    pub rho: T,
    pub k: T,
    pub c: T,
}

impl<T: Real> OracleValues<T> {
    fn from_lambdas(mut lambdas: [T; 3], c: T) -> Self {
        lambdas.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let h = (lambdas[0] + lambdas[1] + lambdas[2]) / T::lit(3.0);
        let sq: T = lambdas.iter().map(|&l| l * l).sum();
        let rho = T::lit(2.0) + T::lit(9.0) * h * h - sq;
        Self { lambdas, h, rho, k: lambdas[0] * lambdas[1] * lambdas[2], c }
    }

    /// `max_i |λ_i³ - 3Hλ_i² + ((ρ-2)/2)λ_i - K|`.
    pub fn char_poly_residual(&self) -> T {
        self.lambdas.iter().fold(T::zero(), |m, &l| {
            let r = l * l * l - T::lit(3.0) * self.h * l * l + (self.rho - T::lit(2.0)) / T::lit(2.0) * l - self.k;
            m.max(r.abs())
        })
    }
}

/// Expected curvature data of `kind` at `pt`.
pub fn oracle<T: Real>(kind: &FamilyKind<T>, pt: &ProductPoint<T>) -> OracleValues<T> {
    let zero = T::zero();
    let (a, b) = kind.anchors();
    let x = pt.p.coords().dot(&a);
    let y = pt.q.coords().dot(&b);
    match *kind {
        FamilyKind::S1rxS2 { r } => {
            let l = (T::one() - r * r).max(zero).sqrt() / r;
            OracleValues::from_lambdas([l, zero, zero], T::one())
        }
        FamilyKind::Mt { t } => {
            let half = T::FRAC_1_SQRT_2();
            let l2 = half * ((T::one() + t) / (T::one() - t)).sqrt();
            let l3 = -half * ((T::one() - t) / (T::one() + t)).sqrt();
            let mut o = OracleValues::from_lambdas([l2, zero, l3], zero);
            // ρ = 1 exactly; avoids cancellation in 2 + 9H² - |σ|²
            o.rho = T::one();
            o
        }
        FamilyKind::Mab => {
            let l = x / (T::lit(2.0) * (T::one() - x * x)).sqrt();
            let mut o = OracleValues::from_lambdas([l, zero, -l], zero);
            o.rho = (T::lit(2.0) - T::lit(3.0) * x * x) / (T::one() - x * x);
            o.h = zero;
            o
        }
        FamilyKind::MhatAb => {
            let d = T::SQRT_2() * (x * y).abs();
            let mut o = OracleValues::from_lambdas([x * x / d, y * y / d, zero], zero);
            o.h = T::one() / (T::lit(3.0) * d);
            o.rho = T::lit(3.0);
            o
        }
    }
}

/// Defect of the equation cutting out `kind`.
pub fn defining_residual<T: Real>(kind: &FamilyKind<T>, pt: &ProductPoint<T>) -> T {
    let (a, b) = kind.anchors();
    let (p, q) = (pt.p.coords(), pt.q.coords());
    let (x, y) = (p.dot(&a), q.dot(&b));
    match *kind {
        FamilyKind::S1rxS2 { r } => (x - (T::one() - r * r).max(T::zero()).sqrt()).abs(),
        FamilyKind::Mt { t } => (p.dot(&q) - t).abs(),
        FamilyKind::Mab => (x + y).abs(),
        FamilyKind::MhatAb => (x * x + y * y - T::one()).abs(),
    }
}

/// The closed-form unit normal each chart is oriented by.
pub fn reference_normal<T: Real>(kind: &FamilyKind<T>, pt: &ProductPoint<T>) -> Vec6<T> {
    let (a, b) = kind.anchors();
    let (p, q) = (pt.p.coords(), pt.q.coords());
    let (x, y) = (p.dot(&a), q.dot(&b));
    let z = Vec3::zeros();
    let n = match *kind {
        FamilyKind::S1rxS2 { .. } => Vec6::from_halves(a - p * x, z),
        FamilyKind::Mt { t } => Vec6::from_halves(q - p * t, p - q * t),
        FamilyKind::Mab => Vec6::from_halves(a - p * x, b - q * y),
        FamilyKind::MhatAb => Vec6::from_halves((a - p * x) * x, (b - q * y) * y),
    };
    n.normalized().unwrap_or(n)
}

/// Shape operator of `M_t` in closed form:
/// `A(v₁,v₂) = (t(v₁,v₂) - (v₂,v₁) + ⟨p,v₂⟩(p,-q)) / √(2(1-t²))`.
pub fn mt_shape_operator<T: Real>(t: T, pt: &ProductPoint<T>, v: &Vec6<T>) -> Vec6<T> {
    let (p, q) = (pt.p.coords(), pt.q.coords());
    let (v1, v2) = (v.first(), v.second());
    let k = (T::lit(2.0) * (T::one() - t * t)).sqrt().recip();
    (*v * t - Vec6::from_halves(v2, v1) + Vec6::from_halves(p, -q) * p.dot(&v2)) * k
}

/// A map whose differential has rank two everywhere.
pub fn degenerate_chart<T: Real>() -> Chart<T> {
    Chart::new("degenerate", [full_turn(), (-T::one(), T::one()), (-T::one(), T::one())], |x: &Coords<T>| {
        let p = SpherePoint::new(lat_long(x[0], x[1] / T::lit(2.0)))?;
        let q = SpherePoint::new(lat_long(x[1], T::zero()))?;
        Ok(ProductPoint::new(p, q))
    })
}

/// The totally geodesic `S¹×S²`, where every tangent direction is principal.
pub fn umbilic_chart<T: Real>() -> Chart<T> {
    chart_s1r_x_s2(T::one()).expect("r = 1 is admissible")
}
