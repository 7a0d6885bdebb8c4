//! Finite-dimensional topological degree on axis-aligned boxes.
//!
//! The maps of interest are F(lambda, u) = u - lambda A^{-1} f(u) on n
//! interior grid points, the discrete counterpart of the fixed-point form
//! of the elliptic problem. The degree of F over a box counts zeros with
//! the orientation sign of det DF; it is computed by exhaustive multistart
//! Newton with deflation, so the count is empirical: a missed zero makes
//! the sum wrong, which the result records as an explicit caveat rather
//! than a certificate.

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::problem::ProblemSpec;
use crate::solvers::grid::FdOperator;
use crate::solvers::operator_for;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// A parameterized map on n coordinates with analytic Jacobian.
/// F(0, u) = u must hold for the homotopy baseline to read "identity".
pub trait DiscreteMap: Sync {
    fn dimension(&self) -> usize;
    fn eval(&self, lambda: f64, u: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, lambda: f64, u: &DVector<f64>) -> DMatrix<f64>;
}

/// The identity in every section: F(lambda, u) = u.
pub struct IdentityMap {
    pub n: usize,
}

impl DiscreteMap for IdentityMap {
    fn dimension(&self) -> usize {
        self.n
    }
    fn eval(&self, _lambda: f64, u: &DVector<f64>) -> DVector<f64> {
        u.clone()
    }
    fn jacobian(&self, _lambda: f64, u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(u.len(), u.len())
    }
}

/// F(lambda, u) = u - lambda A^{-1} f(u) with A the finite-difference
/// Dirichlet operator of the problem's domain and f acting componentwise.
pub struct EllipticFdMap {
    nonlinearity: Nonlinearity,
    op: FdOperator,
}

impl EllipticFdMap {
    pub fn new(problem: &ProblemSpec, n: usize) -> Result<Self> {
        let op = operator_for(problem, n)?;
        Ok(EllipticFdMap {
            nonlinearity: problem.nonlinearity.clone(),
            op,
        })
    }

    pub fn operator(&self) -> &FdOperator {
        &self.op
    }
}

impl DiscreteMap for EllipticFdMap {
    fn dimension(&self) -> usize {
        self.op.nodes.len()
    }

    fn eval(&self, lambda: f64, u: &DVector<f64>) -> DVector<f64> {
        let fu: Vec<f64> = u.iter().map(|&x| self.nonlinearity.eval(x)).collect();
        let w = self.op.tri.solve(&fu);
        DVector::from_iterator(u.len(), u.iter().zip(w).map(|(&x, wi)| x - lambda * wi))
    }

    fn jacobian(&self, lambda: f64, u: &DVector<f64>) -> DMatrix<f64> {
        let n = u.len();
        let mut jac = DMatrix::identity(n, n);
        for j in 0..n {
            // Column j of A^{-1} diag(f'(u)): solve A z = f'(u_j) e_j.
            let mut rhs = vec![0.0; n];
            rhs[j] = self.nonlinearity.deriv(u[j]);
            let z = self.op.tri.solve(&rhs);
            for i in 0..n {
                jac[(i, j)] -= lambda * z[i];
            }
        }
        jac
    }
}

/// A map given by closures, for synthetic degree fixtures.
pub struct CustomMap<F, J>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64> + Sync,
    J: Fn(f64, &DVector<f64>) -> DMatrix<f64> + Sync,
{
    pub n: usize,
    pub f: F,
    pub jac: J,
}

impl<F, J> DiscreteMap for CustomMap<F, J>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64> + Sync,
    J: Fn(f64, &DVector<f64>) -> DMatrix<f64> + Sync,
{
    fn dimension(&self) -> usize {
        self.n
    }
    fn eval(&self, lambda: f64, u: &DVector<f64>) -> DVector<f64> {
        (self.f)(lambda, u)
    }
    fn jacobian(&self, lambda: f64, u: &DVector<f64>) -> DMatrix<f64> {
        (self.jac)(lambda, u)
    }
}

/// Block-diagonal product of two maps on the product of their boxes.
pub struct ProductMap<'a> {
    pub a: &'a dyn DiscreteMap,
    pub b: &'a dyn DiscreteMap,
}

impl DiscreteMap for ProductMap<'_> {
    fn dimension(&self) -> usize {
        self.a.dimension() + self.b.dimension()
    }

    fn eval(&self, lambda: f64, u: &DVector<f64>) -> DVector<f64> {
        let na = self.a.dimension();
        let ua = DVector::from_iterator(na, u.iter().take(na).copied());
        let ub = DVector::from_iterator(u.len() - na, u.iter().skip(na).copied());
        let fa = self.a.eval(lambda, &ua);
        let fb = self.b.eval(lambda, &ub);
        DVector::from_iterator(u.len(), fa.iter().chain(fb.iter()).copied())
    }

    fn jacobian(&self, lambda: f64, u: &DVector<f64>) -> DMatrix<f64> {
        let na = self.a.dimension();
        let nb = self.b.dimension();
        let ua = DVector::from_iterator(na, u.iter().take(na).copied());
        let ub = DVector::from_iterator(nb, u.iter().skip(na).copied());
        let ja = self.a.jacobian(lambda, &ua);
        let jb = self.b.jacobian(lambda, &ub);
        let mut jac = DMatrix::zeros(na + nb, na + nb);
        jac.view_mut((0, 0), (na, na)).copy_from(&ja);
        jac.view_mut((na, na), (nb, nb)).copy_from(&jb);
        jac
    }
}

/// An axis-aligned box, the region a degree is computed over.
#[derive(Debug, Clone, Serialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidParameter(
                "box bounds need matching nonzero lengths".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter(
                "box needs lo < hi in every coordinate".into(),
            ));
        }
        Ok(BoxRegion { lo, hi })
    }

    /// The cube [-r, r]^n.
    pub fn cube(n: usize, r: f64) -> Result<Self> {
        BoxRegion::new(vec![-r; n], vec![r; n])
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, u: &DVector<f64>) -> bool {
        u.iter()
            .enumerate()
            .all(|(i, &x)| self.lo[i] < x && x < self.hi[i])
    }

    /// Cartesian product with another box.
    pub fn product(&self, other: &BoxRegion) -> BoxRegion {
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&other.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&other.hi);
        BoxRegion { lo, hi }
    }
}

/// Degree computation settings.
#[derive(Debug, Clone)]
pub struct DegreeConfig {
    pub starts: usize,
    pub seed: u64,
    pub boundary_tol: f64,
    pub det_tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for DegreeConfig {
    fn default() -> Self {
        DegreeConfig {
            starts: crate::defaults::DEGREE_STARTS,
            seed: crate::defaults::DEFAULT_SEED,
            boundary_tol: 1e-8,
            det_tol: 1e-10,
            newton_tol: 1e-11,
            max_newton: 80,
        }
    }
}

/// Degree over a box, with the evidence behind the integer.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeResult {
    pub degree: i64,
    pub zeros: Vec<Vec<f64>>,
    #[serde(rename = "signs")]
    pub jacobian_signs: Vec<i8>,
    pub boundary_clear: bool,
    pub boundary_min_norm: f64,
    pub warnings: Vec<String>,
}

/// Sample the box boundary: a regular per-face grid of about a thousand
/// points per face in low dimension, ten thousand random points above.
fn boundary_samples(region: &BoxRegion, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = region.dimension();
    let mut pts = Vec::new();
    if n == 1 {
        pts.push(DVector::from_vec(vec![region.lo[0]]));
        pts.push(DVector::from_vec(vec![region.hi[0]]));
        return pts;
    }
    if n <= 3 {
        let side = if n == 2 { 1000 } else { 32 };
        for face_dim in 0..n {
            for &val in &[region.lo[face_dim], region.hi[face_dim]] {
                let mut idx = vec![0usize; n - 1];
                loop {
                    let mut u = DVector::zeros(n);
                    u[face_dim] = val;
                    let mut k = 0;
                    for d in 0..n {
                        if d == face_dim {
                            continue;
                        }
                        let t = idx[k] as f64 / (side - 1) as f64;
                        u[d] = region.lo[d] + t * (region.hi[d] - region.lo[d]);
                        k += 1;
                    }
                    pts.push(u);
                    // Odometer increment over the face grid.
                    let mut carry = 0;
                    loop {
                        idx[carry] += 1;
                        if idx[carry] < side {
                            break;
                        }
                        idx[carry] = 0;
                        carry += 1;
                        if carry == n - 1 {
                            break;
                        }
                    }
                    if carry == n - 1 && idx.iter().all(|&v| v == 0) {
                        break;
                    }
                }
            }
        }
        return pts;
    }
    for _ in 0..10_000 {
        let face = rng.gen_range(0..2 * n);
        let (face_dim, at_hi) = (face / 2, face % 2 == 1);
        let mut u = DVector::zeros(n);
        for d in 0..n {
            u[d] = if d == face_dim {
                if at_hi {
                    region.hi[d]
                } else {
                    region.lo[d]
                }
            } else {
                region.lo[d] + rng.gen::<f64>() * (region.hi[d] - region.lo[d])
            };
        }
        pts.push(u);
    }
    pts
}

/// Latin-hypercube starting points: each coordinate stratified into
/// `count` bins with independently shuffled bin orders.
fn latin_hypercube(region: &BoxRegion, count: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = region.dimension();
    let mut perms: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut p: Vec<usize> = (0..count).collect();
        for i in (1..count).rev() {
            let j = rng.gen_range(0..=i);
            p.swap(i, j);
        }
        perms.push(p);
    }
    (0..count)
        .map(|k| {
            let mut u = DVector::zeros(n);
            for d in 0..n {
                let t = (perms[d][k] as f64 + rng.gen::<f64>()) / count as f64;
                u[d] = region.lo[d] + t * (region.hi[d] - region.lo[d]);
            }
            u
        })
        .collect()
}

/// Deflation multiplier and its gradient: m(u) = prod_j (1 + 1/|u-z_j|^2).
fn deflation(u: &DVector<f64>, zeros: &[DVector<f64>]) -> (f64, DVector<f64>) {
    let n = u.len();
    let mut m = 1.0;
    let mut grad = DVector::zeros(n);
    for z in zeros {
        let diff = u - z;
        let d2 = diff.norm_squared().max(1e-30);
        let mj = 1.0 + 1.0 / d2;
        m *= mj;
        // grad log m_j = -2 (u - z) / (d2^2 m_j)
        grad += diff * (-2.0 / (d2 * d2 * mj));
    }
    (m, &grad * m)
}

/// One damped Newton run on the deflated residual from a given start.
/// Returns a polished zero inside the region, or None.
fn newton_run(
    map: &dyn DiscreteMap,
    lambda: f64,
    region: &BoxRegion,
    zeros: &[DVector<f64>],
    start: &DVector<f64>,
    cfg: &DegreeConfig,
) -> Option<DVector<f64>> {
    let mut u = start.clone();
    let mut g_norm = {
        let (m, _) = deflation(&u, zeros);
        (map.eval(lambda, &u) * m).norm()
    };
    for _ in 0..cfg.max_newton {
        let f = map.eval(lambda, &u);
        if f.norm() < cfg.newton_tol {
            break;
        }
        let (m, grad_m) = deflation(&u, zeros);
        let g = &f * m;
        let dg = map.jacobian(lambda, &u) * m + &f * grad_m.transpose();
        let step = dg.lu().solve(&(-&g))?;
        if !step.iter().all(|x| x.is_finite()) {
            return None;
        }
        // Backtracking damping on the deflated residual.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &u + &step * t;
            let (mt, _) = deflation(&trial, zeros);
            let gn = (map.eval(lambda, &trial) * mt).norm();
            if gn.is_finite() && gn < g_norm {
                u = trial;
                g_norm = gn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    // Undeflated polish.
    for _ in 0..6 {
        let f = map.eval(lambda, &u);
        let step = map.jacobian(lambda, &u).lu().solve(&(-&f))?;
        u += step;
    }
    let f = map.eval(lambda, &u);
    if f.norm() < cfg.newton_tol && region.contains(&u) && u.iter().all(|x| x.is_finite()) {
        Some(u)
    } else {
        None
    }
}

fn is_duplicate(z: &DVector<f64>, known: &[DVector<f64>]) -> bool {
    known
        .iter()
        .any(|k| (z - k).amax() < 1e-7 * (1.0 + k.amax()))
}

/// Compute the degree of F(lambda, .) over the region: verify the
/// boundary carries no zero (sampled boundary norms must clear
/// `boundary_tol`, and no located zero may sit within `boundary_tol` of a
/// box wall), enumerate interior zeros by deflated multistart Newton, and
/// sum the Jacobian determinant signs. The zero list is empirical; a
/// warning accompanies any regularity doubt.
pub fn brouwer_degree(
    map: &dyn DiscreteMap,
    lambda: f64,
    region: &BoxRegion,
    cfg: &DegreeConfig,
) -> Result<DegreeResult> {
    if map.dimension() != region.dimension() {
        return Err(Error::InvalidParameter(format!(
            "map dimension {} does not match box dimension {}",
            map.dimension(),
            region.dimension()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let boundary = boundary_samples(region, &mut rng);
    let boundary_min_norm = boundary
        .par_iter()
        .map(|u| map.eval(lambda, u).norm())
        .reduce(|| f64::INFINITY, f64::min);
    if boundary_min_norm <= cfg.boundary_tol {
        return Err(Error::BoundaryTooClose {
            min_norm: boundary_min_norm,
            tol: cfg.boundary_tol,
        });
    }

    // Multistart in deterministic batches: each batch runs in parallel
    // against the zeros known so far; results merge in start order.
    let starts = latin_hypercube(region, cfg.starts, &mut rng);
    let mut zeros: Vec<DVector<f64>> = Vec::new();
    for batch in starts.chunks(25) {
        let found: Vec<Option<DVector<f64>>> = batch
            .par_iter()
            .map(|s| newton_run(map, lambda, region, &zeros, s, cfg))
            .collect();
        for z in found.into_iter().flatten() {
            if !is_duplicate(&z, &zeros) {
                zeros.push(z);
            }
        }
    }
    zeros.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then_with(|| {
                for (x, y) in a.iter().zip(b.iter()) {
                    let c = x.total_cmp(y);
                    if c != std::cmp::Ordering::Equal {
                        return c;
                    }
                }
                std::cmp::Ordering::Equal
            })
    });

    // A zero hugging a wall leaves the boundary condition in doubt no
    // matter what the sampled norms said: the sample grid cannot be dense
    // enough to notice it. Report the clearance as the violated norm.
    for z in &zeros {
        let clearance = z
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - region.lo[i]).min(region.hi[i] - x))
            .fold(f64::INFINITY, f64::min);
        if clearance <= cfg.boundary_tol {
            return Err(Error::BoundaryTooClose {
                min_norm: clearance,
                tol: cfg.boundary_tol,
            });
        }
    }

    let mut warnings = Vec::new();
    let mut signs = Vec::with_capacity(zeros.len());
    let mut degree = 0i64;
    for (k, z) in zeros.iter().enumerate() {
        let det = map.jacobian(lambda, z).lu().determinant();
        if det.abs() < cfg.det_tol {
            warnings.push(format!(
                "zero {k} has |det DF| = {:.3e} below {:.1e}: regularity doubtful",
                det.abs(),
                cfg.det_tol
            ));
        }
        let s: i8 = if det >= 0.0 { 1 } else { -1 };
        signs.push(s);
        degree += s as i64;
    }
    warnings.push(
        "zero enumeration is empirical: the sign sum equals the degree only if no zero was missed"
            .into(),
    );
    Ok(DegreeResult {
        degree,
        zeros: zeros.iter().map(|z| z.iter().copied().collect()).collect(),
        jacobian_signs: signs,
        boundary_clear: true,
        boundary_min_norm,
        warnings,
    })
}

/// Degrees along a parameter list over a fixed box.
#[derive(Debug, Clone, Serialize)]
pub struct HomotopySweep {
    pub results: Vec<(f64, DegreeResult)>,
    /// Whether every computed degree agrees with the first.
    pub constant: bool,
    /// Parameter interval across which a zero reached or crossed the
    /// boundary, when the sweep had to stop early. A boundary violation at
    /// one value pins it directly; a change of degree between adjacent
    /// values pins it by homotopy invariance, since the degree can only
    /// change when a zero meets the boundary in between.
    pub crossing: Option<(f64, f64)>,
}

/// Sweep the parameter and recompute the degree at each value. A boundary
/// violation or a degree change ends the sweep with the offending interval
/// recorded; the degrees collected up to that point are returned either
/// way, so every kept result shares the initial degree.
pub fn homotopy_sweep(
    map: &dyn DiscreteMap,
    lambdas: &[f64],
    region: &BoxRegion,
    cfg: &DegreeConfig,
) -> Result<HomotopySweep> {
    let mut results: Vec<(f64, DegreeResult)> = Vec::new();
    let mut crossing = None;
    for (i, &l) in lambdas.iter().enumerate() {
        let prev = if i > 0 { lambdas[i - 1] } else { l };
        match brouwer_degree(map, l, region, cfg) {
            Ok(r) => {
                if results.last().is_some_and(|(_, p)| p.degree != r.degree) {
                    crossing = Some((prev, l));
                    break;
                }
                results.push((l, r));
            }
            Err(Error::BoundaryTooClose { .. }) => {
                crossing = Some((prev, l));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let constant = results
        .windows(2)
        .all(|w| w[0].1.degree == w[1].1.degree);
    Ok(HomotopySweep {
        results,
        constant,
        crossing,
    })
}

/// Degree of the block product versus the product of factor degrees.
/// Returns (product degree, degree of a, degree of b) and insists on the
/// multiplicative identity.
pub fn product_check(
    map_a: &dyn DiscreteMap,
    box_a: &BoxRegion,
    map_b: &dyn DiscreteMap,
    box_b: &BoxRegion,
    lambda: f64,
    cfg: &DegreeConfig,
) -> Result<(i64, i64, i64)> {
    let da = brouwer_degree(map_a, lambda, box_a, cfg)?.degree;
    let db = brouwer_degree(map_b, lambda, box_b, cfg)?.degree;
    let product = ProductMap { a: map_a, b: map_b };
    let big = box_a.product(box_b);
    let dp = brouwer_degree(&product, lambda, &big, cfg)?.degree;
    if dp != da * db {
        return Err(Error::InvalidParameter(format!(
            "product degree {dp} disagrees with factors {da} * {db}"
        )));
    }
    Ok((dp, da, db))
}

/// Decompose `region` minus `sub` into axis-aligned slabs.
pub fn complement_slabs(region: &BoxRegion, sub: &BoxRegion) -> Result<Vec<BoxRegion>> {
    let n = region.dimension();
    if sub.dimension() != n {
        return Err(Error::InvalidParameter(
            "sub-box dimension mismatch".into(),
        ));
    }
    for d in 0..n {
        if sub.lo[d] < region.lo[d] || sub.hi[d] > region.hi[d] {
            return Err(Error::InvalidParameter(
                "sub-box must lie inside the region".into(),
            ));
        }
    }
    let mut slabs = Vec::new();
    let mut core = region.clone();
    for d in 0..n {
        if sub.lo[d] > core.lo[d] {
            let mut s = core.clone();
            s.hi[d] = sub.lo[d];
            slabs.push(s);
            core.lo[d] = sub.lo[d];
        }
        if sub.hi[d] < core.hi[d] {
            let mut s = core.clone();
            s.lo[d] = sub.hi[d];
            slabs.push(s);
            core.hi[d] = sub.hi[d];
        }
    }
    Ok(slabs)
}

/// Excision test: the degree over the region must equal the slab-sum over
/// the region minus a zero-free sub-box. Returns (whole, slab sum).
/// Finding a zero of the map inside the sub-box is a precondition error.
pub fn excision_check(
    map: &dyn DiscreteMap,
    lambda: f64,
    region: &BoxRegion,
    sub: &BoxRegion,
    cfg: &DegreeConfig,
) -> Result<(i64, i64)> {
    let whole = brouwer_degree(map, lambda, region, cfg)?;
    let inside = brouwer_degree(map, lambda, sub, cfg)?;
    if !inside.zeros.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "excision sub-box contains {} zero(s)",
            inside.zeros.len()
        )));
    }
    let mut sum = 0i64;
    for slab in complement_slabs(region, sub)? {
        sum += brouwer_degree(map, lambda, &slab, cfg)?.degree;
    }
    Ok((whole.degree, sum))
}
