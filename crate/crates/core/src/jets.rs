//! Charts of hypersurfaces and their numerical 2-jets.
//!
//! Differentiation happens in ambient coordinates: a chart is treated as a
//! map `R³ → R⁶` and every partial derivative is a central difference with
//! one Richardson level. The error estimate compares the extrapolated values
//! obtained from step pairs `(h/2, h)` and `(h, 2h)`, so it scales like `h⁴`.

use std::fmt;
use std::sync::Arc;

use crate::ambient::{AmbientIsometry, ProductPoint};
use crate::error::{GeomError, Result};
use crate::linalg::{Vec6, Vector};
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Chart coordinates `(u1, u2, u3)`.
pub type Coords<T> = [T; 3];

type ChartFn<T> = dyn Fn(&Coords<T>) -> Result<ProductPoint<T>> + Send + Sync;

/// Local parametrization of a hypersurface of `S²×S²` on a closed box.
///
/// `orientation` selects which unit normal the shape computations use:
/// `+1` is the normal completing the Gram-Schmidt frame of the partials to a
/// positively oriented basis, `-1` its opposite.
#[derive(Clone)]
pub struct Chart<T> {
    eval: Arc<ChartFn<T>>,
    domain: [(T, T); 3],
    label: String,
    orientation: T,
}

impl<T: fmt::Debug> fmt::Debug for Chart<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl<T: Real> Chart<T> {
    pub fn new<F>(label: impl Into<String>, domain: [(T, T); 3], eval: F) -> Self
    where
        F: Fn(&Coords<T>) -> Result<ProductPoint<T>> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(eval), domain, label: label.into(), orientation: T::one() }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &[(T, T); 3] {
        &self.domain
    }

    pub fn orientation(&self) -> T {
        self.orientation
    }

    /// Same parametrization with the opposite unit normal.
    pub fn reversed(mut self) -> Self {
        self.orientation = -self.orientation;
        self
    }

    pub fn with_orientation(mut self, sign: T) -> Self {
        self.orientation = if sign < T::zero() { -T::one() } else { T::one() };
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Evaluates the chart, rejecting non-finite output.
    pub fn eval(&self, u: &Coords<T>) -> Result<ProductPoint<T>> {
        let pt = (self.eval)(u)?;
        if !pt.to_vec6().is_finite() {
            return Err(GeomError::NonFinite);
        }
        Ok(pt)
    }

    /// `F ∘ chart`, oriented so that the unit normal is `dF(N)`.
    pub fn transformed(&self, iso: AmbientIsometry<T>) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |u| inner(u).map(|pt| iso.apply(&pt))),
            domain: self.domain,
            label: format!("{}∘isometry", self.label),
            orientation: self.orientation * iso.orientation_sign(),
        }
    }

    /// Fails unless `u` is at least `margin` away from every face of the box.
    pub fn check_interior(&self, u: &Coords<T>, margin: T) -> Result<()> {
        for (coord, (&x, &(lo, hi))) in u.iter().zip(self.domain.iter()).enumerate() {
            if !(x - lo >= margin && hi - x >= margin) {
                return Err(GeomError::OutsideDomain {
                    coord,
                    value: x.to_f64().unwrap_or(f64::NAN),
                    margin: margin.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Uniform sample from the box shrunk by `inset` on every side.
    pub fn sample(&self, rng: &mut SplitMix64, inset: T) -> Coords<T> {
        let mut u = [T::zero(); 3];
        for (x, &(lo, hi)) in u.iter_mut().zip(self.domain.iter()) {
            let (a, b) = ((lo + inset).to_f64().unwrap(), (hi - inset).to_f64().unwrap());
            *x = T::lit(rng.uniform(a, b));
        }
        u
    }

    /// Centre of the domain box.
    pub fn center(&self) -> Coords<T> {
        self.domain.map(|(lo, hi)| (lo + hi) / T::lit(2.0))
    }
}

/// Step sizes for first and second derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetSteps<T> {
    pub first: T,
    pub second: T,
}

impl<T: Real> Default for JetSteps<T> {
    fn default() -> Self {
        Self { first: T::first_step(), second: T::second_step() }
    }
}

impl<T: Real> JetSteps<T> {
    pub fn uniform(h: T) -> Self {
        Self { first: h, second: h }
    }

    /// Furthest stencil offset from the centre.
    pub fn reach(&self) -> T {
        T::lit(2.0) * self.first.max(self.second)
    }
}

/// Storage index of the unordered pair `(i, j)` among the six second partials.
pub const fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Partial derivatives of a vector-valued function of three variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Partials<T> {
    pub value: Vec<T>,
    pub first: [Vec<T>; 3],
    /// Indexed by [`sym_index`]; empty when only first derivatives were requested.
    pub second: [Vec<T>; 6],
    /// Richardson disagreement of the first derivatives.
    pub err_first: T,
    /// Richardson disagreement of the second derivatives.
    pub err_second: T,
}

impl<T: Real> Partials<T> {
    pub fn d2(&self, i: usize, j: usize) -> &[T] {
        &self.second[sym_index(i, j)]
    }
}

fn shifted<T: Real>(u: &Coords<T>, moves: &[(usize, T)]) -> Coords<T> {
    let mut v = *u;
    for &(i, d) in moves {
        v[i] = v[i] + d;
    }
    v
}

fn combine<T: Real>(terms: &[(T, &[T])], scale: T) -> Vec<T> {
    let n = terms[0].1.len();
    (0..n).map(|k| terms.iter().fold(T::zero(), |acc, &(c, v)| acc + c * v[k]) * scale).collect()
}

/// `(4 fine - coarse) / 3` and the disagreement with the next coarser pair.
fn richardson<T: Real>(levels: [Vec<T>; 3]) -> (Vec<T>, T) {
    let [fine, mid, coarse] = levels;
    let third = T::lit(3.0).recip();
    let four = T::lit(4.0);
    let r1 = combine(&[(four, &fine), (-T::one(), &mid)], third);
    let r2 = combine(&[(four, &mid), (-T::one(), &coarse)], third);
    let err = r1.iter().zip(r2.iter()).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())) / T::lit(15.0);
    (r1, err)
}

/// Richardson-extrapolated central differences of `f` at `u`.
///
/// The stencil reaches `2h` from `u`; callers must guarantee `f` is defined there.
pub fn partials<T, F>(f: F, u: &Coords<T>, steps: JetSteps<T>, with_second: bool) -> Result<Partials<T>>
where
    T: Real,
    F: Fn(&Coords<T>) -> Result<Vec<T>>,
{
    let eval = |x: &Coords<T>| -> Result<Vec<T>> {
        let v = f(x)?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        Ok(v)
    };
    let value = eval(u)?;
    let two = T::lit(2.0);
    let half = two.recip();
    let scales = [half, T::one(), two];

    let mut first: [Vec<T>; 3] = Default::default();
    let mut err_first = T::zero();
    for (i, slot) in first.iter_mut().enumerate() {
        let mut levels: [Vec<T>; 3] = Default::default();
        for (lvl, &s) in levels.iter_mut().zip(scales.iter()) {
            let h = steps.first * s;
            let fp = eval(&shifted(u, &[(i, h)]))?;
            let fm = eval(&shifted(u, &[(i, -h)]))?;
            *lvl = combine(&[(T::one(), &fp), (-T::one(), &fm)], (two * h).recip());
        }
        let (r, e) = richardson(levels);
        *slot = r;
        err_first = err_first.max(e);
    }

    let mut second: [Vec<T>; 6] = Default::default();
    let mut err_second = T::zero();
    if with_second {
        for i in 0..3 {
            for j in i..3 {
                let mut levels: [Vec<T>; 3] = Default::default();
                for (lvl, &s) in levels.iter_mut().zip(scales.iter()) {
                    let h = steps.second * s;
                    *lvl = if i == j {
                        let fp = eval(&shifted(u, &[(i, h)]))?;
                        let fm = eval(&shifted(u, &[(i, -h)]))?;
                        combine(&[(T::one(), &fp), (-two, &value), (T::one(), &fm)], (h * h).recip())
                    } else {
                        let fpp = eval(&shifted(u, &[(i, h), (j, h)]))?;
                        let fpm = eval(&shifted(u, &[(i, h), (j, -h)]))?;
                        let fmp = eval(&shifted(u, &[(i, -h), (j, h)]))?;
                        let fmm = eval(&shifted(u, &[(i, -h), (j, -h)]))?;
                        combine(
                            &[(T::one(), &fpp), (-T::one(), &fpm), (-T::one(), &fmp), (T::one(), &fmm)],
                            (T::lit(4.0) * h * h).recip(),
                        )
                    };
                }
                let (r, e) = richardson(levels);
                second[sym_index(i, j)] = r;
                err_second = err_second.max(e);
            }
        }
    }
    Ok(Partials { value, first, second, err_first, err_second })
}

/// Position, first and second partials of a chart in ambient `R⁶`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<T> {
    pub pos: ProductPoint<T>,
    pub d1: [Vec6<T>; 3],
    /// Indexed by [`sym_index`].
    pub d2: [Vec6<T>; 6],
    pub h_used: JetSteps<T>,
    pub err_est: T,
}

impl<T: Real> Jet2<T> {
    pub fn d2(&self, i: usize, j: usize) -> Vec6<T> {
        self.d2[sym_index(i, j)]
    }
}

/// Position and first partials only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1<T> {
    pub pos: ProductPoint<T>,
    pub d1: [Vec6<T>; 3],
    pub err_est: T,
}

fn to_vec6<T: Real>(v: &[T]) -> Vec6<T> {
    let mut out = Vec6::zeros();
    out.0.copy_from_slice(&v[..6]);
    out
}

fn chart_map<T: Real>(chart: &Chart<T>) -> impl Fn(&Coords<T>) -> Result<Vec<T>> + '_ {
    move |x| chart.eval(x).map(|pt| pt.to_vec6().0.to_vec())
}

/// Numerical 2-jet of a raw ambient map (no sphere normalization or domain
/// checks). `pos` is the normalized image of `u`.
pub fn jet2_raw<T, F>(f: F, u: &Coords<T>, steps: JetSteps<T>) -> Result<Jet2<T>>
where
    T: Real,
    F: Fn(&Coords<T>) -> Result<Vec6<T>>,
{
    let d = partials(|x| f(x).map(|v| v.0.to_vec()), u, steps, true)?;
    Ok(Jet2 {
        pos: ProductPoint::from_vec6(&to_vec6(&d.value))?,
        d1: d.first.each_ref().map(|v| to_vec6(v)),
        d2: d.second.each_ref().map(|v| to_vec6(v)),
        h_used: steps,
        err_est: d.err_first.max(d.err_second),
    })
}

/// 2-jet of a chart at an interior point.
pub fn jet2<T: Real>(chart: &Chart<T>, u: &Coords<T>, steps: JetSteps<T>) -> Result<Jet2<T>> {
    chart.check_interior(u, steps.reach())?;
    let d = partials(chart_map(chart), u, steps, true)?;
    Ok(Jet2 {
        pos: chart.eval(u)?,
        d1: d.first.each_ref().map(|v| to_vec6(v)),
        d2: d.second.each_ref().map(|v| to_vec6(v)),
        h_used: steps,
        err_est: d.err_first.max(d.err_second),
    })
}

/// 1-jet of a chart at an interior point.
pub fn jet1<T: Real>(chart: &Chart<T>, u: &Coords<T>, h: T) -> Result<Jet1<T>> {
    let steps = JetSteps::uniform(h);
    chart.check_interior(u, steps.reach())?;
    let d = partials(chart_map(chart), u, steps, false)?;
    Ok(Jet1 { pos: chart.eval(u)?, d1: d.first.each_ref().map(|v| to_vec6(v)), err_est: d.err_first })
}

/// Largest factorwise radial component `⟨p, ∂ᵢp⟩`, `⟨q, ∂ᵢq⟩` of the partials.
pub fn tangency_defect<T: Real>(pos: &ProductPoint<T>, d1: &[Vec6<T>; 3]) -> T {
    let (p, q) = (pos.p.coords(), pos.q.coords());
    d1.iter().fold(T::zero(), |m, d| m.max(p.dot(&d.first()).abs()).max(q.dot(&d.second()).abs()))
}

/// Converts three ambient partials to an array of [`Vector`]s for callers
/// working with slices.
pub fn flatten<T: Real, const N: usize>(vs: &[Vector<T, N>]) -> Vec<T> {
    vs.iter().flat_map(|v| v.0).collect()
}
