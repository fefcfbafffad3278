//! Per-point extrinsic geometry of a chart and residuals of the structure
//! identities satisfied by every hypersurface of `S²×S²`.
//!
//! Conventions: `σ(V, W) = ⟨∇̄_V W, N⟩`, `AV = -(∇̄_V N)ᵀ`, `H = tr A / 3`,
//! `K = det A`, `C = ⟨PN, N⟩`, `X = PN - CN`. `(∇σ)(V, W, Z)` differentiates
//! in the direction of its first slot.

use crate::ambient::{curvature_vec6, j1_vec6, j2_vec6, p_vec6, ProductPoint, ProductTangent};
use crate::eigen::{symmetric_eigen, symmetric_eigenvalues, SymmetricEigen};
use crate::error::{GeomError, Result};
use crate::jets::{jet2, partials, sym_index, Chart, Coords, Jet2, JetSteps, Partials};
use crate::linalg::{det_lu, Mat3, Vec3, Vec6, Vector};
use crate::scalar::Real;

/// Smallest admissible singular value of the chart differential.
pub const MIN_SINGULAR_VALUE: f64 = 1e-6;
/// Minimum eigenvalue gap for the principal-frame computations.
pub const MIN_SPECTRAL_GAP: f64 = 1e-4;

/// Rank-3 tensor on the tangent space, `t[a][b][c]`.
pub type Tensor3<T> = [[[T; 3]; 3]; 3];

/// Knobs of [`shape_at_with`].
#[derive(Clone, Copy, Debug)]
pub struct ShapeOptions<T> {
    pub steps: JetSteps<T>,
    /// Mixes the chart partials before Gram-Schmidt; must have positive determinant.
    pub seed_rotation: Option<Mat3<T>>,
}

impl<T: Real> Default for ShapeOptions<T> {
    fn default() -> Self {
        Self { steps: JetSteps::default(), seed_rotation: None }
    }
}

/// Extrinsic data of a hypersurface at one point.
#[derive(Clone, Debug)]
pub struct ShapeData<T> {
    pub point: ProductPoint<T>,
    /// Orthonormal tangent frame; `{e1, e2, e3, N}` is positively oriented.
    pub frame: [Vec6<T>; 3],
    pub normal: Vec6<T>,
    /// Second fundamental form in `frame`.
    pub sigma: Mat3<T>,
    /// Spectrum of `sigma`; eigenvectors are `frame` components.
    pub eigen: SymmetricEigen<T>,
    pub lambdas: [T; 3],
    pub h: T,
    /// Scalar curvature, traced from the Gauss equation.
    pub rho: T,
    pub k: T,
    pub c: T,
    pub x: Vec6<T>,
    /// `b_a = ⟨X, e_a⟩`.
    pub b: Vec3<T>,
    /// `P_ab = ⟨P e_a, e_b⟩`.
    pub p: Mat3<T>,
    /// `Λ_i = b_i² - C P_ii` in the principal frame.
    pub big_lambda: Vec3<T>,
    /// `e_a = Σ_i coord_frame[a][i] ∂_i`.
    pub coord_frame: Mat3<T>,
    pub metric: Mat3<T>,
    pub metric_inv: Mat3<T>,
    /// `∇_{∂i} ∂j = Σ_k christoffel[k][i][j] ∂_k`.
    pub christoffel: Tensor3<T>,
    /// Second fundamental form in chart coordinates, `⟨∂_i∂_j Φ, N⟩`.
    pub sigma_coord: Mat3<T>,
    pub min_singular_value: T,
    pub jet: Jet2<T>,
}

impl<T: Real> ShapeData<T> {
    pub fn tangent(&self, v: &Vec6<T>) -> ProductTangent<T> {
        ProductTangent::projected(self.point, v)
    }

    /// Frame components of an ambient tangent vector.
    pub fn components(&self, v: &Vec6<T>) -> Vec3<T> {
        Vector(self.frame.each_ref().map(|e| e.dot(v)))
    }

    /// Ambient vector with the given frame components.
    pub fn ambient(&self, comps: &Vec3<T>) -> Vec6<T> {
        (0..3).fold(Vec6::zeros(), |acc, a| acc + self.frame[a] * comps[a])
    }

    /// Chart-coordinate components of a tangent vector given in the frame.
    pub fn coords_of(&self, comps: &Vec3<T>) -> Vec3<T> {
        self.coord_frame.transpose().mul_vec(comps)
    }

    /// `Σ_i v^i ∂_i f` for frame components `comps` and coordinate gradient `grad`.
    pub fn directional(&self, comps: &Vec3<T>, grad: &Vec3<T>) -> T {
        self.coords_of(comps).dot(grad)
    }

    pub fn sigma_norm_sq(&self) -> T {
        self.sigma.0.iter().flatten().map(|&s| s * s).sum()
    }

    /// `σ(v, w)` for frame components.
    pub fn second_form(&self, v: &Vec3<T>, w: &Vec3<T>) -> T {
        v.dot(&self.sigma.mul_vec(w))
    }

    /// Principal direction `i` as an ambient vector.
    pub fn principal(&self, i: usize) -> Vec6<T> {
        self.ambient(&self.eigen.vectors[i])
    }

    /// `J1 N` and `J2 N`.
    pub fn j_normals(&self) -> (Vec6<T>, Vec6<T>) {
        (j1_vec6(&self.point, &self.normal), j2_vec6(&self.point, &self.normal))
    }

    /// Orthonormality and orientation defect of `{e1, e2, e3, N}`,
    /// returned as `(max |⟨u_i, u_j⟩ - δ_ij|, oriented determinant)`.
    pub fn frame_defect(&self) -> (T, T) {
        let vs = [self.frame[0], self.frame[1], self.frame[2], self.normal];
        let mut defect = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { T::one() } else { T::zero() };
                defect = defect.max((vs[i].dot(&vs[j]) - expect).abs());
            }
        }
        (defect, oriented_det(&self.point, &vs))
    }

    /// `C² + |X|²`.
    pub fn c_x_identity(&self) -> T {
        self.c * self.c + self.x.norm_squared()
    }

    /// `|ρ - (2 + 9H² - |σ|²)|`.
    pub fn gauss_scalar_residual(&self) -> T {
        (self.rho - (T::lit(2.0) + T::lit(9.0) * self.h * self.h - self.sigma_norm_sq())).abs()
    }

    /// The 4×4 matrix of `P` in `{e1, e2, e3, N}`.
    pub fn p_matrix4(&self) -> [[T; 4]; 4] {
        let mut m = [[T::zero(); 4]; 4];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] = self.p[(a, b)];
            }
            m[a][3] = self.b[a];
            m[3][a] = self.b[a];
        }
        m[3][3] = self.c;
        m
    }

    /// Largest of: asymmetry, `|PPᵀ - I|`, `|tr P|` for the 4×4 matrix of `P`.
    pub fn p_matrix_defect(&self) -> T {
        let m = self.p_matrix4();
        let mut defect = T::zero();
        let mut trace = T::zero();
        for i in 0..4 {
            trace = trace + m[i][i];
            for j in 0..4 {
                defect = defect.max((m[i][j] - m[j][i]).abs());
                let prod: T = (0..4).map(|k| m[i][k] * m[j][k]).sum();
                let expect = if i == j { T::one() } else { T::zero() };
                defect = defect.max((prod - expect).abs());
            }
        }
        defect.max(trace.abs())
    }

    /// Largest residual of the quadratic relations between `C`, `b` and `P_ij`
    /// implied by `P` being a symmetric orthogonal trace-free matrix.
    pub fn p_relations_residual(&self) -> T {
        let (c, b, p) = (self.c, &self.b, &self.p);
        let mut worst = T::zero();
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
            let r1 = c * p[(i, i)] - b[i] * b[i] - p[(j, j)] * p[(k, k)] + p[(j, k)] * p[(j, k)];
            let r2 = c * p[(i, j)] - b[i] * b[j] - p[(i, k)] * p[(j, k)] + p[(i, j)] * p[(k, k)];
            let r3 = b[i] * p[(i, j)] - b[j] * p[(i, i)] + b[k] * p[(k, j)] - b[j] * p[(k, k)];
            worst = worst.max(r1.abs()).max(r2.abs()).max(r3.abs());
        }
        worst
    }

    /// `tr(Pᵀ A)` and `tr(Pᵀ A²)`.
    pub fn p_traces(&self) -> (T, T) {
        let s2 = self.sigma.matmul(&self.sigma);
        let mut t1 = T::zero();
        let mut t2 = T::zero();
        for a in 0..3 {
            for b in 0..3 {
                t1 = t1 + self.p[(a, b)] * self.sigma[(a, b)];
                t2 = t2 + self.p[(a, b)] * s2[(a, b)];
            }
        }
        (t1, t2)
    }
}

fn oriented_det<T: Real>(pt: &ProductPoint<T>, vs: &[Vec6<T>; 4]) -> T {
    let z = Vec3::zeros();
    let rows = [
        Vec6::from_halves(pt.p.coords(), z).0,
        Vec6::from_halves(z, pt.q.coords()).0,
        vs[0].0,
        vs[1].0,
        vs[2].0,
        vs[3].0,
    ];
    det_lu(rows)
}

/// Unit normal completing `partials` to a positively oriented basis.
pub fn oriented_normal<T: Real>(pt: &ProductPoint<T>, partials: &[Vec6<T>; 3]) -> Option<Vec6<T>> {
    let z = Vec3::zeros();
    let mut w = Vec6::zeros();
    for k in 0..6 {
        let rows = [
            Vec6::from_halves(pt.p.coords(), z).0,
            Vec6::from_halves(z, pt.q.coords()).0,
            partials[0].0,
            partials[1].0,
            partials[2].0,
            Vec6::basis(k).0,
        ];
        w[k] = det_lu(rows);
    }
    let w = pt.project(&w);
    let w = partials.iter().fold(w, |acc, d| {
        let n2 = d.norm_squared();
        acc - *d * (acc.dot(d) / n2)
    });
    w.normalized()
}

fn gram_schmidt<T: Real>(vs: &[Vec6<T>; 3]) -> Option<[Vec6<T>; 3]> {
    let e0 = vs[0].normalized()?;
    let e1 = (vs[1] - e0 * e0.dot(&vs[1])).normalized()?;
    let mut e2 = vs[2] - e0 * e0.dot(&vs[2]) - e1 * e1.dot(&vs[2]);
    e2 = e2 - e0 * e0.dot(&e2) - e1 * e1.dot(&e2);
    Some([e0, e1, e2.normalized()?])
}

/// [`shape_at_with`] under default options.
pub fn shape_at<T: Real>(chart: &Chart<T>, u: &Coords<T>) -> Result<ShapeData<T>> {
    shape_at_with(chart, u, &ShapeOptions::default())
}

/// Frame, normal, second fundamental form and derived invariants at `u`.
pub fn shape_at_with<T: Real>(chart: &Chart<T>, u: &Coords<T>, opts: &ShapeOptions<T>) -> Result<ShapeData<T>> {
    let jet = jet2(chart, u, opts.steps)?;
    shape_from_jet(&jet, chart.orientation(), opts.seed_rotation.as_ref())
}

/// Shape data from a precomputed jet.
pub fn shape_from_jet<T: Real>(jet: &Jet2<T>, orientation: T, seed_rotation: Option<&Mat3<T>>) -> Result<ShapeData<T>> {
    let pt = jet.pos;
    // Partials projected onto T(S²×S²) to remove differencing drift.
    let d1 = jet.d1.map(|d| pt.project(&d));

    let mut metric = Mat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            metric[(i, j)] = d1[i].dot(&d1[j]);
        }
    }
    let min_sv = symmetric_eigenvalues(&metric)[2].max(T::zero()).sqrt();
    let singular = || GeomError::SingularChart { singular_value: min_sv.to_f64().unwrap_or(f64::NAN) };
    if !(min_sv > T::lit(MIN_SINGULAR_VALUE)) {
        return Err(singular());
    }
    let metric_inv = metric.inverse().ok_or_else(singular)?;

    let seeds = match seed_rotation {
        Some(r) => [0, 1, 2].map(|a| (0..3).fold(Vec6::zeros(), |acc, i| acc + d1[i] * r[(a, i)])),
        None => d1,
    };
    let mut frame = gram_schmidt(&seeds).ok_or_else(singular)?;
    let mut normal = oriented_normal(&pt, &d1).ok_or_else(singular)?;
    if let Some(r) = seed_rotation {
        if r.det() < T::zero() {
            return Err(GeomError::Parameter("seed rotation must preserve orientation".into()));
        }
    }
    if orientation < T::zero() {
        // keep {e1, e2, e3, N} positively oriented
        frame[2] = -frame[2];
        normal = -normal;
    }

    let mut coord_frame = Mat3::zeros();
    for a in 0..3 {
        for i in 0..3 {
            coord_frame[(a, i)] = (0..3).map(|j| metric_inv[(i, j)] * frame[a].dot(&d1[j])).sum();
        }
    }

    let mut sigma_coord = Mat3::zeros();
    let mut christoffel = [[[T::zero(); 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let dij = jet.d2(i, j);
            sigma_coord[(i, j)] = dij.dot(&normal);
            let proj: [T; 3] = [0, 1, 2].map(|l| dij.dot(&d1[l]));
            for (k, gk) in christoffel.iter_mut().enumerate() {
                gk[i][j] = (0..3).map(|l| metric_inv[(k, l)] * proj[l]).sum();
            }
        }
    }
    let sigma = {
        let t = &coord_frame;
        let mut s = t.matmul(&sigma_coord).matmul(&t.transpose());
        for a in 0..3 {
            for b in a + 1..3 {
                let avg = (s[(a, b)] + s[(b, a)]) / T::lit(2.0);
                s[(a, b)] = avg;
                s[(b, a)] = avg;
            }
        }
        s
    };

    let eigen = symmetric_eigen(&sigma);
    let h = sigma.trace() / T::lit(3.0);
    let k = sigma.det();

    let mut rho = T::zero();
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                rho = rho + curvature_vec6(&frame[a], &frame[b], &frame[b], &frame[a]) + sigma[(a, a)] * sigma[(b, b)]
                    - sigma[(a, b)] * sigma[(a, b)];
            }
        }
    }

    let pn = p_vec6(&normal);
    let c = pn.dot(&normal);
    let x = pn - normal * c;
    let b = Vector(frame.each_ref().map(|e| x.dot(e)));
    let mut p = Mat3::zeros();
    for a in 0..3 {
        let pe = p_vec6(&frame[a]);
        for bb in 0..3 {
            p[(a, bb)] = pe.dot(&frame[bb]);
        }
    }
    let big_lambda = {
        let amb = |v: &Vec3<T>| (0..3).fold(Vec6::zeros(), |acc, a| acc + frame[a] * v[a]);
        Vector(eigen.vectors.each_ref().map(|v| {
            let e = amb(v);
            let bi = x.dot(&e);
            bi * bi - c * p_vec6(&e).dot(&e)
        }))
    };

    Ok(ShapeData {
        point: pt,
        frame,
        normal,
        sigma,
        eigen,
        lambdas: eigen.values,
        h,
        rho,
        k,
        c,
        x,
        b,
        p,
        big_lambda,
        coord_frame,
        metric,
        metric_inv,
        christoffel,
        sigma_coord,
        min_singular_value: min_sv,
        jet: *jet,
    })
}

fn check_in_tangent<T: Real>(sd: &ShapeData<T>, v: &Vec6<T>) -> Result<()> {
    let off = sd.point.project(v) - *v;
    let normal_part = v.dot(&sd.normal);
    let defect = off.norm().max(normal_part.abs());
    if defect > T::lit(1e-8) * T::one().max(v.norm()) {
        return Err(GeomError::NotTangent { inner: defect.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

/// Sectional curvature of `span{v, w}` by the Gauss equation
/// `K = R̄(v,w,w,v) + σ(v,v)σ(w,w) - σ(v,w)²`.
pub fn gauss_sectional<T: Real>(sd: &ShapeData<T>, v: &Vec6<T>, w: &Vec6<T>) -> Result<T> {
    check_in_tangent(sd, v)?;
    check_in_tangent(sd, w)?;
    let defect = (v.norm_squared() - T::one()).abs().max((w.norm_squared() - T::one()).abs()).max(v.dot(w).abs());
    if defect > T::lit(1e-8) {
        return Err(GeomError::NotOrthonormal { defect: defect.to_f64().unwrap_or(f64::NAN) });
    }
    let (cv, cw) = (sd.components(v), sd.components(w));
    Ok(curvature_vec6(v, w, w, v) + sd.second_form(&cv, &cv) * sd.second_form(&cw, &cw)
        - sd.second_form(&cv, &cw).powi(2))
}

/// Ricci curvature `Ric(v, v)` of the induced metric.
pub fn ricci<T: Real>(sd: &ShapeData<T>, v: &Vec6<T>) -> Result<T> {
    check_in_tangent(sd, v)?;
    let cv = sd.components(v);
    let mut total = T::zero();
    for a in 0..3 {
        let ea = sd.frame[a];
        let ca = Vec3::basis(a);
        total = total + curvature_vec6(v, &ea, &ea, v) + sd.second_form(&cv, &cv) * sd.sigma[(a, a)]
            - sd.second_form(&cv, &ca).powi(2);
    }
    Ok(total)
}

/// `max_i |λ_i³ - 3Hλ_i² + ((ρ-2)/2)λ_i - K|`.
pub fn char_poly_residual<T: Real>(sd: &ShapeData<T>) -> T {
    let half = T::lit(0.5);
    sd.lambdas.iter().fold(T::zero(), |m, &l| {
        let r = l * l * l - T::lit(3.0) * sd.h * l * l + (sd.rho - T::lit(2.0)) * half * l - sd.k;
        m.max(r.abs())
    })
}

/// First (and optionally second) coordinate derivatives of per-point shape
/// quantities around `u`, by Richardson differences with step `outer`.
pub fn shape_partials<T, F>(
    chart: &Chart<T>,
    u: &Coords<T>,
    opts: &ShapeOptions<T>,
    outer: T,
    with_second: bool,
    f: F,
) -> Result<Partials<T>>
where
    T: Real,
    F: Fn(&ShapeData<T>) -> Result<Vec<T>>,
{
    let outer_steps = JetSteps::uniform(outer);
    chart.check_interior(u, outer_steps.reach() + opts.steps.reach())?;
    partials(|x| shape_at_with(chart, x, opts).and_then(|sd| f(&sd)), u, outer_steps, with_second)
}

/// Covariant derivatives at a point, assembled from a shape stencil.
#[derive(Clone, Debug)]
pub struct LocalDerivatives<T> {
    pub center: ShapeData<T>,
    /// Coordinate gradient of `C` and `H`.
    pub d_c: Vec3<T>,
    pub d_h: Vec3<T>,
    /// Hessian of `C` in the frame; `None` without second derivatives.
    pub hess_c: Option<Mat3<T>>,
    /// `(∇σ)(e_a, e_b, e_c)`.
    pub nabla_sigma: Tensor3<T>,
    /// `⟨∇_{e_a} X, e_b⟩`.
    pub nabla_x: Mat3<T>,
}

const SIGMA_SLOT: usize = 2;
const X_SLOT: usize = 8;

impl<T: Real> LocalDerivatives<T> {
    pub fn at(chart: &Chart<T>, u: &Coords<T>, opts: &ShapeOptions<T>, outer: T, with_second: bool) -> Result<Self> {
        let center = shape_at_with(chart, u, opts)?;
        let d = shape_partials(chart, u, opts, outer, with_second, |sd| {
            let mut v = Vec::with_capacity(14);
            v.push(sd.c);
            v.push(sd.h);
            for i in 0..3 {
                for j in i..3 {
                    v.push(sd.sigma_coord[(i, j)]);
                }
            }
            v.extend_from_slice(&sd.x.0);
            Ok(v)
        })?;
        let grad = |slot: usize| Vector([0, 1, 2].map(|i| d.first[i][slot]));
        let d_c = grad(0);
        let d_h = grad(1);
        let t = center.coord_frame;
        let gamma = &center.christoffel;

        let hess_c = with_second.then(|| {
            let mut hc = Mat3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    let corr: T = (0..3).map(|k| gamma[k][i][j] * d_c[k]).sum();
                    hc[(i, j)] = d.d2(i, j)[0] - corr;
                }
            }
            t.matmul(&hc).matmul(&t.transpose())
        });

        // (∇σ)_{kij} = ∂_k σ_ij - Γ^l_ki σ_lj - Γ^l_kj σ_il in coordinates
        let s = &center.sigma_coord;
        let mut nabla_coord = [[[T::zero(); 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let ds = d.first[k][SIGMA_SLOT + sym_index(i, j)];
                    let corr: T = (0..3).map(|l| gamma[l][k][i] * s[(l, j)] + gamma[l][k][j] * s[(i, l)]).sum();
                    nabla_coord[k][i][j] = ds - corr;
                }
            }
        }
        let nabla_sigma = transform_tensor(&nabla_coord, &t);

        let dx: [Vec6<T>; 3] = [0, 1, 2].map(|i| {
            let mut v = Vec6::zeros();
            v.0.copy_from_slice(&d.first[i][X_SLOT..X_SLOT + 6]);
            v
        });
        let mut nabla_x = Mat3::zeros();
        for a in 0..3 {
            let dir = (0..3).fold(Vec6::zeros(), |acc, i| acc + dx[i] * t[(a, i)]);
            for b in 0..3 {
                nabla_x[(a, b)] = dir.dot(&center.frame[b]);
            }
        }
        Ok(Self { center, d_c, d_h, hess_c, nabla_sigma, nabla_x })
    }

    /// Frame gradient of `C`.
    pub fn grad_c(&self) -> Vec3<T> {
        self.center.coord_frame.mul_vec(&self.d_c)
    }

    /// Frame gradient of `H`.
    pub fn grad_h(&self) -> Vec3<T> {
        self.center.coord_frame.mul_vec(&self.d_h)
    }

    /// `(∇σ)(v, w, x)` for frame components.
    pub fn nabla_sigma_at(&self, v: &Vec3<T>, w: &Vec3<T>, x: &Vec3<T>) -> T {
        contract(&self.nabla_sigma, v, w, x)
    }
}

fn contract<T: Real>(t: &Tensor3<T>, v: &Vec3<T>, w: &Vec3<T>, x: &Vec3<T>) -> T {
    let mut s = T::zero();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                s = s + t[a][b][c] * v[a] * w[b] * x[c];
            }
        }
    }
    s
}

/// `out[a][b][c] = Σ m[a][i] m[b][j] m[c][k] t[i][j][k]`.
fn transform_tensor<T: Real>(t: &Tensor3<T>, m: &Mat3<T>) -> Tensor3<T> {
    let mut out = [[[T::zero(); 3]; 3]; 3];
    for (a, oa) in out.iter_mut().enumerate() {
        for (b, ob) in oa.iter_mut().enumerate() {
            for (c, oc) in ob.iter_mut().enumerate() {
                *oc = contract(t, &m.row(a), &m.row(b), &m.row(c));
            }
        }
    }
    out
}

/// Residuals of the gradient, Hessian, Laplacian and divergence identities
/// for `C` and `X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CIdentityResiduals<T> {
    /// `|∇C + 2AX|`.
    pub gradient: T,
    /// Frobenius norm of `∇²C(V,W) + 2∇σ(V,X,W) + 2C⟨AV,AW⟩ - 2⟨PAV,AW⟩`.
    pub hessian: T,
    /// `|ΔC + 6⟨X,∇H⟩ + 2C|σ|² - 2 tr(PᵀA²)|`.
    pub laplacian: T,
    /// `|div X - 3CH + tr(PᵀA)|`.
    pub divergence: T,
    /// Frobenius norm of `∇_V X - (CAV - PᵀAV)`.
    pub covariant_x: T,
}

impl<T: Real> CIdentityResiduals<T> {
    pub fn max(&self) -> T {
        self.gradient.max(self.hessian).max(self.laplacian).max(self.divergence)
    }
}

/// Outer step for differentiating shape data at `sd`: the default, shrunk
/// where the principal curvatures exceed 2 so that the stencil stays short
/// against the length scale `1/|λ|` on which the shape varies.
pub fn local_stencil_step<T: Real>(sd: &ShapeData<T>) -> T {
    let lmax = sd.lambdas.iter().fold(T::zero(), |m, l| m.max(l.abs()));
    T::stencil_step() / (lmax / T::lit(2.0)).max(T::one())
}

/// [`LocalDerivatives::at`] with default options and [`local_stencil_step`].
pub fn local_derivatives<T: Real>(chart: &Chart<T>, u: &Coords<T>, with_second: bool) -> Result<LocalDerivatives<T>> {
    let outer = local_stencil_step(&shape_at(chart, u)?);
    LocalDerivatives::at(chart, u, &ShapeOptions::default(), outer, with_second)
}

/// Residuals of the `C`/`X` identities at `u`, with default steps.
pub fn c_identity_residuals<T: Real>(chart: &Chart<T>, u: &Coords<T>) -> Result<CIdentityResiduals<T>> {
    Ok(c_identities_from(&local_derivatives(chart, u, true)?))
}

pub fn c_identities_from<T: Real>(ld: &LocalDerivatives<T>) -> CIdentityResiduals<T> {
    let sd = &ld.center;
    let two = T::lit(2.0);
    let ax = sd.sigma.mul_vec(&sd.b);
    let gradient = (ld.grad_c() + ax * two).norm();

    let s2 = sd.sigma.matmul(&sd.sigma);
    let sps = sd.sigma.matmul(&sd.p).matmul(&sd.sigma);
    let hess = ld.hess_c.unwrap_or_default();
    let mut hres = Mat3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let nab: T = (0..3).map(|c| ld.nabla_sigma[a][c][b] * sd.b[c]).sum();
            hres[(a, b)] = hess[(a, b)] + two * nab + two * sd.c * s2[(a, b)] - two * sps[(a, b)];
        }
    }
    let (tr_pa, tr_pa2) = sd.p_traces();
    let x_dot_grad_h = sd.b.dot(&ld.grad_h());
    let laplacian = (hess.trace() + T::lit(6.0) * x_dot_grad_h + two * sd.c * sd.sigma_norm_sq() - two * tr_pa2).abs();
    let divergence = (ld.nabla_x.trace() - T::lit(3.0) * sd.c * sd.h + tr_pa).abs();
    let expected_nx = sd.sigma.scale(sd.c).sub(&sd.sigma.matmul(&sd.p));
    let covariant_x = ld.nabla_x.sub(&expected_nx).norm();
    CIdentityResiduals { gradient, hessian: hres.norm(), laplacian, divergence, covariant_x }
}

/// Codazzi defect `|(∇σ)(v,w,x) - (∇σ)(w,v,x) - ½(⟨X,v⟩⟨Pw,x⟩ - ⟨X,w⟩⟨Pv,x⟩)|`
/// for ambient tangent vectors at `chart(u)`.
pub fn codazzi_residual<T: Real>(chart: &Chart<T>, u: &Coords<T>, v: &Vec6<T>, w: &Vec6<T>, x: &Vec6<T>) -> Result<T> {
    codazzi_from(&local_derivatives(chart, u, false)?, v, w, x)
}

pub fn codazzi_from<T: Real>(ld: &LocalDerivatives<T>, v: &Vec6<T>, w: &Vec6<T>, x: &Vec6<T>) -> Result<T> {
    let sd = &ld.center;
    for t in [v, w, x] {
        check_in_tangent(sd, t)?;
    }
    let (cv, cw, cx) = (sd.components(v), sd.components(w), sd.components(x));
    let lhs = ld.nabla_sigma_at(&cv, &cw, &cx) - ld.nabla_sigma_at(&cw, &cv, &cx);
    let rhs = (sd.x.dot(v) * p_vec6(w).dot(x) - sd.x.dot(w) * p_vec6(v).dot(x)) / T::lit(2.0);
    Ok((lhs - rhs).abs())
}

/// Connection coefficients and the linear system for `Λ` in the principal frame.
#[derive(Clone, Debug)]
pub struct FrameDerivatives<T> {
    /// `gamma[i][j][k] = ⟨∇_{E_i} E_j, E_k⟩`.
    pub gamma: Tensor3<T>,
    /// `(∇σ)(E_i, E_j, E_k)` from the coordinate covariant derivative.
    pub nabla_sigma: Tensor3<T>,
    /// `(D_12, D_13, D_23)`.
    pub d: Vec3<T>,
    pub b_matrix: Mat3<T>,
    pub b0: Vec3<T>,
    /// `E_i(λ_j)`, which vanishes for constant principal curvatures.
    pub d_lambda: Mat3<T>,
}

impl<T: Real> FrameDerivatives<T> {
    /// `max |Γ_ij^k + Γ_ik^j|`.
    pub fn gamma_antisymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    worst = worst.max((self.gamma[i][j][k] + self.gamma[i][k][j]).abs());
                }
            }
        }
        worst
    }
}

/// Result of [`lambda_system`].
#[derive(Clone, Debug)]
pub struct LambdaSystem<T> {
    pub shape: ShapeData<T>,
    pub lambda: Vec3<T>,
    pub derivs: FrameDerivatives<T>,
    /// `BΛ - B₀ - D`.
    pub residual_vec: Vec3<T>,
    pub residual: T,
}

impl<T: Real> LambdaSystem<T> {
    pub fn lambdas(&self) -> [T; 3] {
        self.shape.lambdas
    }

    /// `-6(λ1-λ2)(λ1-λ3)(λ2-λ3)`.
    pub fn det_b_closed(&self) -> T {
        det_b_closed(&self.shape.lambdas)
    }

    /// Largest defect of `∇σ_ijk + (λ_k - λ_j)Γ_ij^k = 0`.
    pub fn nabla_sigma_gamma_residual(&self) -> T {
        let l = &self.shape.lambdas;
        let g = &self.derivs.gamma;
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let r = self.derivs.nabla_sigma[i][j][k] + (l[k] - l[j]) * g[i][j][k];
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// Largest defect of `Γ_ii^j = (b_i P_ij - b_j P_ii) / (2(λ_i - λ_j))`.
    pub fn gamma_ii_residual(&self) -> T {
        let l = &self.shape.lambdas;
        let (b, p) = self.principal_b_p();
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let expect = (b[i] * p[(i, j)] - b[j] * p[(i, i)]) / (T::lit(2.0) * (l[i] - l[j]));
                    worst = worst.max((self.derivs.gamma[i][i][j] - expect).abs());
                }
            }
        }
        worst
    }

    /// `b_i = ⟨X, E_i⟩` and `P_ij = ⟨PE_i, E_j⟩` in the principal frame.
    pub fn principal_b_p(&self) -> (Vec3<T>, Mat3<T>) {
        let sd = &self.shape;
        let es = [0, 1, 2].map(|i| sd.principal(i));
        let b = Vector(es.each_ref().map(|e| sd.x.dot(e)));
        let mut p = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                p[(i, j)] = p_vec6(&es[i]).dot(&es[j]);
            }
        }
        (b, p)
    }
}

pub fn det_b_closed<T: Real>(l: &[T; 3]) -> T {
    -T::lit(6.0) * (l[0] - l[1]) * (l[0] - l[2]) * (l[1] - l[2])
}

/// Coefficient matrix and constant vector of the `Λ` system.
pub fn b_system<T: Real>(l: &[T; 3]) -> (Mat3<T>, Vec3<T>) {
    let two = T::lit(2.0);
    let b = Mat3([
        [l[1], -l[0], two * (l[0] - l[1])],
        [l[2], two * (l[0] - l[2]), -l[0]],
        [two * (l[1] - l[2]), l[2], -l[1]],
    ]);
    let b0 = Vector([
        (l[0] - l[1]) * (T::one() + two * l[0] * l[1]),
        (l[0] - l[2]) * (T::one() + two * l[0] * l[2]),
        (l[1] - l[2]) * (T::one() + two * l[1] * l[2]),
    ]);
    (b, b0)
}

/// `D_ij` for the pairs `(1,2), (1,3), (2,3)` from the principal-frame connection.
pub fn d_vector<T: Real>(l: &[T; 3], g: &Tensor3<T>) -> Vec3<T> {
    let four = T::lit(4.0);
    let dij = |i: usize, j: usize| {
        let k = 3 - i - j;
        four * (l[i] - l[j]) * (g[i][i][j].powi(2) + g[j][j][i].powi(2)) + four * (l[k] - l[j]) * g[i][j][k].powi(2)
            - four * (l[k] - l[i]) * g[j][i][k].powi(2)
    };
    Vector([dij(0, 1), dij(0, 2), dij(1, 2)])
}

/// Principal-frame connection and `BΛ = B₀ + D` residual at `u`.
///
/// Requires three distinct principal curvatures. Eigenvectors at stencil
/// points are sign-aligned with those at `u`.
pub fn lambda_system<T: Real>(chart: &Chart<T>, u: &Coords<T>) -> Result<LambdaSystem<T>> {
    let opts = ShapeOptions::default();
    let outer = T::stencil_step();
    let ld = LocalDerivatives::at(chart, u, &opts, outer, false)?;
    let sd = ld.center.clone();
    let gap = sd.eigen.min_gap();
    if !(gap > T::lit(MIN_SPECTRAL_GAP)) {
        return Err(GeomError::DegenerateSpectrum { gap: gap.to_f64().unwrap_or(f64::NAN) });
    }
    let center_frame = [0, 1, 2].map(|i| sd.principal(i));
    let d = shape_partials(chart, u, &opts, outer, false, |s| {
        if !(s.eigen.min_gap() > T::lit(MIN_SPECTRAL_GAP)) {
            return Err(GeomError::DegenerateSpectrum { gap: s.eigen.min_gap().to_f64().unwrap_or(f64::NAN) });
        }
        let mut v = Vec::with_capacity(21);
        for (i, reference) in center_frame.iter().enumerate() {
            let mut e = s.principal(i);
            let align = e.dot(reference);
            if align.abs() < T::lit(0.5) {
                return Err(GeomError::FrameContinuity { alignment: align.to_f64().unwrap_or(f64::NAN) });
            }
            if align < T::zero() {
                e = -e;
            }
            v.extend_from_slice(&e.0);
        }
        v.extend_from_slice(&s.lambdas);
        Ok(v)
    })?;

    let coords_of = |i: usize| sd.coords_of(&sd.eigen.vectors[i]);
    let d_e = |j: usize, l: usize| {
        let mut v = Vec6::zeros();
        v.0.copy_from_slice(&d.first[l][6 * j..6 * j + 6]);
        v
    };
    let mut gamma = [[[T::zero(); 3]; 3]; 3];
    let mut d_lambda = Mat3::zeros();
    for i in 0..3 {
        let ci = coords_of(i);
        for j in 0..3 {
            let deriv = (0..3).fold(Vec6::zeros(), |acc, l| acc + d_e(j, l) * ci[l]);
            for k in 0..3 {
                gamma[i][j][k] = deriv.dot(&center_frame[k]);
            }
            d_lambda[(i, j)] = (0..3).map(|l| ci[l] * d.first[l][18 + j]).sum();
        }
    }

    let mut rot = Mat3::zeros();
    for i in 0..3 {
        for a in 0..3 {
            rot[(i, a)] = sd.eigen.vectors[i][a];
        }
    }
    let nabla_sigma = transform_tensor(&ld.nabla_sigma, &rot);

    let (b_matrix, b0) = b_system(&sd.lambdas);
    let dv = d_vector(&sd.lambdas, &gamma);
    let residual_vec = b_matrix.mul_vec(&sd.big_lambda) - b0 - dv;
    Ok(LambdaSystem {
        lambda: sd.big_lambda,
        residual: residual_vec.norm(),
        residual_vec,
        derivs: FrameDerivatives { gamma, nabla_sigma, d: dv, b_matrix, b0, d_lambda },
        shape: sd,
    })
}
