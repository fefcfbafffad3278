//! Parallel hypersurfaces `Φ_s = (exp_p(sN₁), exp_q(sN₂))`, the frame
//! transition matrix `Q(s)`, `det Q` with its Taylor expansion, and focal
//! radii.
//!
//! With `N = (N₁, N₂)` one has `|N₁| = C⁺ = √(1+C)/√2` and
//! `|N₂| = C⁻ = √(1-C)/√2`, so each factor moves along a great circle with
//! speed `C^±`. The matrix `Q` expresses `(Φ_s)_* E_i` in the transported
//! frame; it is exact wherever `∇C` vanishes, which holds on every catalog
//! family.

use crate::ambient::{j1_vec6, j2_vec6, ProductPoint, SpherePoint};
use crate::error::{GeomError, Result};
use crate::jets::{jet1, Chart, Coords, JetSteps};
use crate::linalg::{det_lu, Mat3, Vec3, Vec6, Vector};
use crate::scalar::{sin_over, Real};
use crate::shape::{oriented_normal, ShapeData};

/// `|1 - C²|` below which the frame built from `X` is undefined.
pub const E_FRAME_TOL: f64 = 1e-8;
/// Lower end of the focal search bracket.
pub const FOCAL_S_MIN: f64 = 1e-4;
pub const FOCAL_BISECTIONS: usize = 60;
const FOCAL_SCAN_STEPS: usize = 4096;

/// Upper end of the focal search bracket, `√2 π`.
pub fn focal_s_max<T: Real>() -> T {
    T::SQRT_2() * T::PI()
}

/// `(C⁺, C⁻) = (√(1+C)/√2, √(1-C)/√2)`, clamped for `|C|` marginally above 1.
pub fn c_factors<T: Real>(c: T) -> (T, T) {
    let half = T::lit(0.5);
    let plus = ((T::one() + c) * half).max(T::zero()).sqrt();
    let minus = ((T::one() - c) * half).max(T::zero()).sqrt();
    (plus, minus)
}

/// Unit normal of `chart` at `u` from a 1-jet, honouring the chart orientation.
pub fn chart_normal<T: Real>(chart: &Chart<T>, u: &Coords<T>, h: T) -> Result<(ProductPoint<T>, Vec6<T>)> {
    let jet = jet1(chart, u, h)?;
    let d1 = jet.d1.map(|d| jet.pos.project(&d));
    let n = oriented_normal(&jet.pos, &d1).ok_or(GeomError::SingularChart { singular_value: 0.0 })?;
    Ok((jet.pos, n * chart.orientation()))
}

/// Point and normal after flowing `(pt, n)` for time `s`.
pub fn flow_point<T: Real>(pt: &ProductPoint<T>, n: &Vec6<T>, s: T) -> Result<(ProductPoint<T>, Vec6<T>)> {
    let (n1, n2) = (n.first(), n.second());
    let (p, q) = (pt.p.coords(), pt.q.coords());
    let step = |x: Vec3<T>, v: Vec3<T>| {
        let w = v.norm();
        let (sn, cs) = (w * s).sin_cos();
        let pos = x * cs + v * sin_over(w, s);
        // d/ds of pos, the factor of the flowed normal
        let vel = v * cs - x * (w * sn);
        (pos, vel)
    };
    let (ps, n1s) = step(p, n1);
    let (qs, n2s) = step(q, n2);
    let out = ProductPoint::new(SpherePoint::new(ps)?, SpherePoint::new(qs)?);
    Ok((out, Vec6::from_halves(n1s, n2s)))
}

/// The parallel hypersurface at distance `s` as a chart over the base domain.
#[derive(Clone, Debug)]
pub struct ParallelChart<T> {
    pub base: Chart<T>,
    pub s: T,
    pub chart: Chart<T>,
}

/// Builds `Φ_s`. Normals of the base come from 1-jets with the default first
/// step, so the domain shrinks by that stencil's reach.
pub fn parallel_chart<T: Real>(base: &Chart<T>, s: T) -> Result<ParallelChart<T>> {
    if !s.is_finite() {
        return Err(GeomError::NonFinite);
    }
    let h = T::first_step();
    // slack so that `(lo + reach) - lo` still clears the interior check
    let reach = JetSteps::uniform(h).reach() * T::lit(1.001);
    let domain = base.domain().map(|(lo, hi)| (lo + reach, hi - reach));
    let inner = base.clone();
    let chart = Chart::new(format!("{}+flow({s})", base.label()), domain, move |u: &Coords<T>| {
        let (pt, n) = chart_normal(&inner, u, h)?;
        flow_point(&pt, &n, s).map(|(x, _)| x)
    })
    .with_orientation(base.orientation());
    Ok(ParallelChart { base: base.clone(), s, chart })
}

/// Orthonormal tangent frame `E₁ = X/|X|`, `E₂ ∝ J₁N + J₂N`, `E₃ ∝ J₁N - J₂N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EFrame<T> {
    pub vectors: [Vec6<T>; 3],
    /// Set when `C² = 1` and the frame was completed by an arbitrary
    /// orthonormal pair in the complement of `J₁N`.
    pub limit: bool,
}

impl<T: Real> EFrame<T> {
    /// `σ(E_i, E_j)`.
    pub fn sigma(&self, sd: &ShapeData<T>) -> Mat3<T> {
        let comps = self.vectors.map(|v| sd.components(&v));
        let mut m = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = sd.second_form(&comps[i], &comps[j]);
            }
        }
        m
    }
}

/// The frame of unit vectors along `X`, `J₁N + J₂N` and `J₁N - J₂N`.
pub fn e_frame<T: Real>(sd: &ShapeData<T>) -> Result<EFrame<T>> {
    let x_norm = sd.x.norm();
    if (T::one() - sd.c * sd.c).abs() < T::lit(E_FRAME_TOL) || x_norm == T::zero() {
        return Err(GeomError::EFrameUndefined { x_norm: x_norm.to_f64().unwrap_or(f64::NAN) });
    }
    let (j1, j2) = sd.j_normals();
    let two = T::lit(2.0);
    let e1 = sd.x * x_norm.recip();
    let e2 = (j1 + j2) * (two * (T::one() + sd.c)).sqrt().recip();
    let e3 = (j1 - j2) * (two * (T::one() - sd.c)).sqrt().recip();
    Ok(EFrame { vectors: [e1, e2, e3], limit: false })
}

/// [`e_frame`], falling back at `C = ±1` to `J₁N` in the slot of the
/// surviving combination and an orthonormal basis of its complement.
pub fn e_frame_or_limit<T: Real>(sd: &ShapeData<T>) -> EFrame<T> {
    if let Ok(f) = e_frame(sd) {
        return f;
    }
    let j1 = j1_vec6(&sd.point, &sd.normal);
    let j1 = j1.normalized().unwrap_or(sd.frame[0]);
    let mut rest: Vec<Vec6<T>> = Vec::with_capacity(2);
    for e in sd.frame {
        let mut v = e - j1 * j1.dot(&e);
        for r in &rest {
            v = v - *r * r.dot(&v);
        }
        if let Some(u) = v.normalized() {
            if v.norm() > T::lit(1e-3) && rest.len() < 2 {
                rest.push(u);
            }
        }
    }
    let vectors = if sd.c > T::zero() { [rest[0], j1, rest[1]] } else { [rest[0], rest[1], j1] };
    EFrame { vectors, limit: true }
}

/// Minors `H_ij = σ_iiσ_jj - σ_ij²` for `(12, 13, 23)`.
pub fn minors<T: Real>(s: &Mat3<T>) -> [T; 3] {
    let h = |i: usize, j: usize| s[(i, i)] * s[(j, j)] - s[(i, j)] * s[(i, j)];
    [h(0, 1), h(0, 2), h(1, 2)]
}

/// Frame-transition matrix of the flow and its determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QData<T> {
    pub s: T,
    pub q: Mat3<T>,
    /// Determinant of `q`.
    pub det_q: T,
    /// Closed-form determinant.
    pub det_q_closed: T,
    pub ddet_q_ds: T,
    pub taylor: [T; 7],
    /// `(H₁₂, H₁₃, H₂₃)`.
    pub h_ij: [T; 3],
    /// `σ` in the E-frame.
    pub sigma_e: Mat3<T>,
    pub c: T,
    pub c_plus: T,
    pub c_minus: T,
    pub limit_frame: bool,
}

impl<T: Real> QData<T> {
    /// Mean curvature of `Φ_s` predicted by `3H = -(det Q)'/det Q`.
    pub fn predicted_h(&self) -> T {
        -self.ddet_q_ds / (T::lit(3.0) * self.det_q_closed)
    }
}

/// Everything `det Q` depends on, extracted once per point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowCoefficients<T> {
    pub sigma_e: Mat3<T>,
    pub c: T,
    pub c_plus: T,
    pub c_minus: T,
    pub rho: T,
    pub limit_frame: bool,
}

impl<T: Real> FlowCoefficients<T> {
    pub fn from_shape(sd: &ShapeData<T>) -> Self {
        let frame = e_frame_or_limit(sd);
        let (c_plus, c_minus) = c_factors(sd.c);
        Self { sigma_e: frame.sigma(sd), c: sd.c, c_plus, c_minus, rho: sd.rho, limit_frame: frame.limit }
    }

    /// `Q(s)` with rows indexed by `e_i` and columns by the transported frame.
    pub fn q(&self, s: T) -> Mat3<T> {
        let sg = &self.sigma_e;
        let (cp, cm) = (self.c_plus, self.c_minus);
        let delta = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
        let mut q = Mat3::zeros();
        for i in 0..3 {
            q[(i, 0)] = delta(0, i) - s * sg[(0, i)];
            q[(i, 1)] = delta(1, i) * (cp * s).cos() - sg[(1, i)] * sin_over(cp, s);
            q[(i, 2)] = delta(2, i) * (cm * s).cos() - sg[(2, i)] * sin_over(cm, s);
        }
        q
    }

    /// Closed-form `det Q(s)` and its `s`-derivative.
    pub fn det_q(&self, s: T) -> (T, T) {
        let sg = &self.sigma_e;
        let [h12, h13, h23] = minors(sg);
        let k = sg.det();
        let (cp, cm) = (self.c_plus, self.c_minus);
        let (ap, am) = ((cp * s).cos(), (cm * s).cos());
        let (bp, bm) = (sin_over(cp, s), sin_over(cm, s));
        // d/ds: a' = -C²b, b' = a
        let (dap, dam) = (-cp * cp * bp, -cm * cm * bm);
        let one = T::one();

        let f1 = one - s * sg[(0, 0)];
        let f2 = h23 - s * k;
        let f3 = -sg[(1, 1)] + s * h12;
        let f4 = -sg[(2, 2)] + s * h13;
        let value = f1 * ap * am + f2 * bp * bm + f3 * bp * am + f4 * ap * bm;
        let deriv = -sg[(0, 0)] * ap * am + f1 * (dap * am + ap * dam) - k * bp * bm
            + f2 * (ap * bm + bp * am)
            + h12 * bp * am
            + f3 * (ap * am + bp * dam)
            + h13 * ap * bm
            + f4 * (dap * bm + ap * am);
        (value, deriv)
    }

    pub fn taylor(&self) -> [T; 7] {
        taylor_detq(&self.sigma_e, self.c, self.rho)
    }

    /// `J₁N`-column factor `cos(C⁺s) - σ(J₁N,J₁N) sin(C⁺s)/C⁺`, given `σ(J₁N,J₁N)`.
    pub fn j1n_factor(&self, sigma_j1n: T, s: T) -> T {
        (self.c_plus * s).cos() - sigma_j1n * sin_over(self.c_plus, s)
    }
}

/// Taylor coefficients `c₀..c₆` of `det Q` at `s = 0`.
///
/// `sigma_e` is the second fundamental form in the E-frame and `rho` the
/// scalar curvature.
pub fn taylor_detq<T: Real>(sigma_e: &Mat3<T>, c: T, rho: T) -> [T; 7] {
    let l = T::lit;
    let sg = sigma_e;
    let [h12, h13, _] = minors(sg);
    let h3 = sg.trace();
    let k = sg.det();
    let c2 = c * c;
    let (s22, s33) = (sg[(1, 1)], sg[(2, 2)]);
    [
        T::one(),
        -h3,
        (rho - l(3.0)) / l(2.0),
        (l(3.0) * h3 - l(6.0) * k - (T::one() + c) * s22 - (T::one() - c) * s33) / l(6.0),
        (l(2.0) * (l(3.0) - rho) - c2 - l(4.0) * ((T::one() - c) * h12 + (T::one() + c) * h13)) / l(24.0),
        (-l(5.0) * (l(2.0) - c2) * h3
            + l(20.0) * k
            + l(2.0) * (l(3.0) + c - l(2.0) * c2) * s22
            + l(2.0) * (l(3.0) - c - l(2.0) * c2) * s33)
            / l(120.0),
        (l(4.0) * (rho - l(3.0))
            + (l(5.0) - rho) * c2
            + l(4.0) * ((T::one() - c) * (l(4.0) + c) * h12 + (T::one() + c) * (l(4.0) - c) * h13))
            / l(720.0),
    ]
}

/// `Q(s)` and `det Q` at a point of the base.
pub fn q_matrix<T: Real>(sd: &ShapeData<T>, s: T) -> QData<T> {
    let co = FlowCoefficients::from_shape(sd);
    q_from(&co, s)
}

pub fn q_from<T: Real>(co: &FlowCoefficients<T>, s: T) -> QData<T> {
    let q = co.q(s);
    let (det_q_closed, ddet_q_ds) = co.det_q(s);
    QData {
        s,
        q,
        det_q: q.det(),
        det_q_closed,
        ddet_q_ds,
        taylor: co.taylor(),
        h_ij: minors(&co.sigma_e),
        sigma_e: co.sigma_e,
        c: co.c,
        c_plus: co.c_plus,
        c_minus: co.c_minus,
        limit_frame: co.limit_frame,
    }
}

/// Derivatives of orders 0..=4 at `0`, from central differences with one
/// Richardson level.
pub fn fd_derivatives<T: Real>(f: impl Fn(T) -> T, h: T) -> [T; 5] {
    let at = |h: T| {
        let (m2, m1, z, p1, p2) = (f(-h - h), f(-h), f(T::zero()), f(h), f(h + h));
        let two = T::lit(2.0);
        [
            z,
            (p1 - m1) / (two * h),
            (p1 - two * z + m1) / (h * h),
            (p2 - two * p1 + two * m1 - m2) / (two * h * h * h),
            (p2 - T::lit(4.0) * p1 + T::lit(6.0) * z - T::lit(4.0) * m1 + m2) / (h * h * h * h),
        ]
    };
    let (fine, coarse) = (at(h / T::lit(2.0)), at(h));
    let mut out = [T::zero(); 5];
    for n in 0..5 {
        out[n] = (T::lit(4.0) * fine[n] - coarse[n]) / T::lit(3.0);
    }
    out
}

/// Taylor coefficients `c₀..c₄` of the assembled `det Q(s)` by finite differences.
pub fn taylor_fd<T: Real>(co: &FlowCoefficients<T>, h: T) -> [T; 5] {
    let d = fd_derivatives(|s| co.q(s).det(), h);
    let mut fact = T::one();
    let mut out = [T::zero(); 5];
    for n in 0..5 {
        if n > 1 {
            fact = fact * T::from_count(n);
        }
        out[n] = d[n] / fact;
    }
    out
}

/// Outcome of the focal search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Focal<T> {
    At(T),
    /// `det Q` keeps its sign on the whole bracket.
    None,
}

impl<T: Real> Focal<T> {
    pub fn value(&self) -> Option<T> {
        match *self {
            Self::At(s) => Some(s),
            Self::None => None,
        }
    }
}

/// First zero of `f` on `(FOCAL_S_MIN, √2π]` by a sign scan and bisection.
pub fn first_root<T: Real>(f: impl Fn(T) -> T) -> Focal<T> {
    let lo0 = T::lit(FOCAL_S_MIN);
    let hi0 = focal_s_max::<T>();
    let n = T::from_count(FOCAL_SCAN_STEPS);
    let mut prev_s = lo0;
    let mut prev_f = f(lo0);
    for k in 1..=FOCAL_SCAN_STEPS {
        let s = lo0 + (hi0 - lo0) * T::from_count(k) / n;
        let fs = f(s);
        if fs == T::zero() {
            return Focal::At(s);
        }
        if (fs < T::zero()) != (prev_f < T::zero()) {
            let (mut a, mut b, fa) = (prev_s, s, prev_f);
            for _ in 0..FOCAL_BISECTIONS {
                let m = (a + b) / T::lit(2.0);
                if (f(m) < T::zero()) == (fa < T::zero()) {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Focal::At((a + b) / T::lit(2.0));
        }
        prev_s = s;
        prev_f = fs;
    }
    Focal::None
}

/// Focal radii at a base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FocalRadius<T> {
    /// First zero of `det Q`.
    pub det_q: Focal<T>,
    /// First zero of the `J₁N`-column factor.
    pub j1n: Focal<T>,
}

pub fn focal_radius<T: Real>(sd: &ShapeData<T>) -> FocalRadius<T> {
    let co = FlowCoefficients::from_shape(sd);
    let j1 = j1_vec6(&sd.point, &sd.normal);
    let cj = sd.components(&j1);
    let sigma_j1n = sd.second_form(&cj, &cj) / cj.norm_squared();
    FocalRadius { det_q: first_root(|s| co.det_q(s).0), j1n: first_root(|s| co.j1n_factor(sigma_j1n, s)) }
}

/// Oriented volume ratio `Φ_s^* dV / dV` at `u`, from 1-jets of the base and
/// of the parallel chart. An independent route to `det Q`.
pub fn jacobian_ratio<T: Real>(base: &Chart<T>, u: &Coords<T>, s: T) -> Result<T> {
    let h = T::second_step();
    let par = parallel_chart(base, s)?;
    let vol = |chart: &Chart<T>, n: Option<Vec6<T>>| -> Result<(T, Vec6<T>, ProductPoint<T>)> {
        let jet = jet1(chart, u, h)?;
        let d1 = jet.d1.map(|d| jet.pos.project(&d));
        let n = match n {
            Some(n) => n,
            None => {
                oriented_normal(&jet.pos, &d1).ok_or(GeomError::SingularChart { singular_value: 0.0 })?
                    * chart.orientation()
            }
        };
        let z = Vec3::zeros();
        let rows = [
            Vec6::from_halves(jet.pos.p.coords(), z).0,
            Vec6::from_halves(z, jet.pos.q.coords()).0,
            d1[0].0,
            d1[1].0,
            d1[2].0,
            n.0,
        ];
        Ok((det_lu(rows), n, jet.pos))
    };
    let (v0, n0, p0) = vol(base, None)?;
    let (_, ns) = flow_point(&p0, &n0, s)?;
    let (vs, _, _) = vol(&par.chart, Some(ns))?;
    Ok(vs / v0)
}

/// `J₂N` at the point, for callers assembling frames by hand.
pub fn j2_normal<T: Real>(sd: &ShapeData<T>) -> Vec6<T> {
    j2_vec6(&sd.point, &sd.normal)
}

/// `(⟨E_i, E_j⟩)` defect of a frame.
pub fn frame_orthonormality<T: Real>(f: &EFrame<T>) -> T {
    let mut worst = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { T::one() } else { T::zero() };
            worst = worst.max((f.vectors[i].dot(&f.vectors[j]) - expect).abs());
        }
    }
    worst
}

/// Components of `v` in an E-frame.
pub fn e_components<T: Real>(f: &EFrame<T>, v: &Vec6<T>) -> Vec3<T> {
    Vector(f.vectors.map(|e| e.dot(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(sigma: Mat3<f64>, c: f64) -> FlowCoefficients<f64> {
        let (c_plus, c_minus) = c_factors(c);
        let h = sigma.trace() / 3.0;
        let sq: f64 = sigma.0.iter().flatten().map(|x| x * x).sum();
        FlowCoefficients { sigma_e: sigma, c, c_plus, c_minus, rho: 2.0 + 9.0 * h * h - sq, limit_frame: false }
    }

    #[test]
    fn closed_form_matches_determinant() {
        let s = Mat3([[0.3, -0.2, 0.5], [-0.2, 1.1, 0.05], [0.5, 0.05, -0.7]]);
        for c in [-0.9, -0.2, 0.0, 0.4, 1.0] {
            let co = coeffs(s, c);
            for t in [0.0, 0.1, 0.7, 2.3] {
                let (v, _) = co.det_q(t);
                assert!((v - co.q(t).det()).abs() < 1e-13, "c={c} s={t}");
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let s = Mat3([[0.3, -0.2, 0.5], [-0.2, 1.1, 0.05], [0.5, 0.05, -0.7]]);
        let co = coeffs(s, 0.35);
        for t in [0.0, 0.4, 1.3] {
            let h = 1e-5;
            let fd = (co.det_q(t + h).0 - co.det_q(t - h).0) / (2.0 * h);
            assert!((fd - co.det_q(t).1).abs() < 1e-8);
        }
    }

    #[test]
    fn totally_geodesic_taylor_is_cosine() {
        // σ = 0, C = 1: det Q = cos s
        let co = coeffs(Mat3::zeros(), 1.0);
        let c = co.taylor();
        let expect = [1.0, 0.0, -0.5, 0.0, 1.0 / 24.0, 0.0, -1.0 / 720.0];
        for n in 0..7 {
            assert!((c[n] - expect[n]).abs() < 1e-15, "c{n}");
        }
    }

    #[test]
    fn q_is_identity_at_zero() {
        let s = Mat3([[0.3, -0.2, 0.5], [-0.2, 1.1, 0.05], [0.5, 0.05, -0.7]]);
        let co = coeffs(s, -0.3);
        assert_eq!(co.q(0.0), Mat3::identity());
        assert_eq!(co.det_q(0.0).0, 1.0);
    }

    #[test]
    fn root_of_cosine() {
        let r = first_root(|s: f64| s.cos());
        assert!((r.value().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(first_root(|_s: f64| 1.0), Focal::None);
    }
}
