//! Dense eigensolution of the block operator and post-processing of its
//! spectrum.
//!
//! Pipeline: [`eig_dense`] on `M`, residual certification against `M`
//! itself ([`certify`]), comparison with the analytic continuous band
//! ([`continuous_band`]), bucketing into discrete / continuous / spurious
//! modes by eigenvector localization ([`separate_discrete`]) and a stability
//! verdict from the discrete modes ([`classify`]). [`analyze`] runs all of it.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::analytic::{ModelSpec, StationarySolution};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linearization::{build_operators, LinearizedOperator};
use crate::scalar::{lit, to_f64, Real};

/// Tolerances and thresholds used when reading a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenConfig {
    /// Absolute distance to the analytic band below which a mode may be continuous.
    pub band_tol: f64,
    /// Half-width of the central core, as a fraction of `L`; mass outside it is tail mass.
    pub core_fraction: f64,
    /// Tail mass above which an eigenvector counts as delocalized.
    pub tail_threshold: f64,
    /// Width of the edge strips, as a fraction of `L`; mass in them is boundary mass.
    pub boundary_fraction: f64,
    /// Boundary mass above which a mode is a wrap-around artifact.
    pub boundary_threshold: f64,
    /// Bound on `||Mu - eta u||_2 / ||M||_2` for a retained pair.
    pub certify_tol: f64,
    /// Growth above `instability_rel * spectral radius` is an instability.
    pub instability_rel: f64,
    /// `|eta|` below `zero_rel * spectral radius` is a zero mode.
    pub zero_rel: f64,
    /// Tolerance for the `eta <-> -eta` partner, relative to the spectral radius.
    pub pairing_rel: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            band_tol: 1e-2,
            core_fraction: 0.2,
            tail_threshold: 0.5,
            boundary_fraction: 0.05,
            boundary_threshold: 0.8,
            certify_tol: 1e-8,
            instability_rel: 1e-6,
            zero_rel: 1e-4,
            pairing_rel: 1e-6,
        }
    }
}

/// An eigenvalue with its unit-norm eigenvector.
pub type EigenVector<T> = (Complex<T>, Array1<Complex<T>>);

/// Eigenvalues and unit-norm eigenvectors of a square complex matrix.
pub fn eig_dense<T: Real>(matrix: &Array2<Complex<T>>) -> Result<Vec<EigenVector<T>>> {
    let (rows, cols) = matrix.dim();
    if rows != cols {
        return Err(Error::LengthMismatch {
            expected: rows,
            got: cols,
        });
    }
    if matrix
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    if rows == 0 {
        return Ok(Vec::new());
    }
    let (values, vectors) = T::eig_kernel(matrix)?;
    Ok(values
        .into_iter()
        .zip(vectors.columns())
        .map(|(eta, col)| {
            let norm = vector_norm(col);
            let v = if norm > T::zero() {
                col.mapv(|z| z / norm)
            } else {
                col.to_owned()
            };
            (eta, v)
        })
        .collect())
}

fn vector_norm<T: Real>(v: ArrayView1<Complex<T>>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `|sum(eta) - trace(A)| / max(|trace(A)|, ||A||_F)`.
///
/// The Frobenius floor keeps the measure meaningful for traceless matrices
/// such as the block operator.
pub fn trace_defect<T: Real>(matrix: &Array2<Complex<T>>, eigenvalues: &[Complex<T>]) -> T {
    let trace = matrix
        .diag()
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, &z| a + z);
    let sum = eigenvalues
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, &z| a + z);
    let frob = matrix
        .iter()
        .fold(T::zero(), |a, z| a + z.norm_sqr())
        .sqrt();
    (sum - trace).norm() / trace.norm().max(frob).max(T::min_positive_value())
}

/// Power-iteration estimate of `||A||_2` (a lower bound that tightens with
/// `iterations`).
pub fn norm2_estimate<T: Real>(matrix: &Array2<Complex<T>>, iterations: usize) -> T {
    let n = matrix.ncols();
    if n == 0 {
        return T::zero();
    }
    // deterministic start with energy in every column direction
    let mut v = Array1::from_shape_fn(n, |j| {
        Complex::new(T::one(), lit::<T>(0.5 + (j % 7) as f64 / 7.0))
    });
    let mut sigma = T::zero();
    for _ in 0..iterations.max(1) {
        let norm = vector_norm(v.view());
        if norm == T::zero() {
            break;
        }
        v.mapv_inplace(|z| z / norm);
        let av = matrix.dot(&v);
        sigma = vector_norm(av.view());
        v = matrix.t().mapv(|z| z.conj()).dot(&av);
    }
    sigma
}

/// One certified eigenpair of the block operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T: Real> {
    pub eta: Complex<T>,
    /// Unit 2-norm vector `(v, w)` of length `2N`.
    pub vector: Array1<Complex<T>>,
    /// `||M u - eta u||_2 / ||M||_2`.
    pub residual: T,
    /// Fraction of `|v|^2 + |w|^2` in the edge strips.
    pub boundary_mass: T,
    /// Fraction of `|v|^2 + |w|^2` outside the central core.
    pub tail_mass: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    pub pairs: Vec<EigenPair<T>>,
    /// Estimate of `||M||_2` used to normalize residuals.
    pub norm2: T,
    /// Largest `|eta|` among retained pairs.
    pub spectral_radius: T,
    /// Pairs dropped by certification.
    pub rejected: usize,
    /// Largest residual among retained pairs.
    pub max_residual: T,
    /// [`trace_defect`] of the raw eigenvalues.
    pub trace_defect: T,
}

impl<T: Real> Spectrum<T> {
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        self.pairs.iter().map(|p| p.eta).collect()
    }
}

/// Edge-strip and tail mass fractions of a stacked `(v, w)` vector.
pub fn localization<T: Real>(
    vector: ArrayView1<Complex<T>>,
    grid: &Grid<T>,
    config: &EigenConfig,
) -> (T, T) {
    let n = grid.len();
    let l = grid.half_width();
    let edge = l * (T::one() - lit::<T>(config.boundary_fraction));
    let core = l * lit::<T>(config.core_fraction);
    let (mut total, mut boundary, mut tail) = (T::zero(), T::zero(), T::zero());
    for (j, &x) in grid.points().iter().enumerate() {
        let weight =
            (0..vector.len() / n).fold(T::zero(), |acc, b| acc + vector[b * n + j].norm_sqr());
        total = total + weight;
        if x.abs() >= edge {
            boundary = boundary + weight;
        }
        if x.abs() >= core {
            tail = tail + weight;
        }
    }
    if total == T::zero() {
        return (T::zero(), T::zero());
    }
    (boundary / total, tail / total)
}

/// Solves `M u = eta u` densely and keeps the pairs that pass the residual
/// bound when re-checked against `M`.
pub fn certify<T: Real>(
    op: &LinearizedOperator<T>,
    grid: &Grid<T>,
    config: &EigenConfig,
) -> Result<Spectrum<T>> {
    let block = op.block();
    if !block.nrows().is_multiple_of(grid.len()) {
        return Err(Error::LengthMismatch {
            expected: 2 * grid.len(),
            got: block.nrows(),
        });
    }
    let raw = eig_dense(block)?;
    let eigenvalues: Vec<Complex<T>> = raw.iter().map(|(eta, _)| *eta).collect();
    let trace = trace_defect(block, &eigenvalues);
    let norm2 = norm2_estimate(block, 60);

    let mut vectors = Array2::zeros((block.nrows(), raw.len()));
    for (k, (_, v)) in raw.iter().enumerate() {
        vectors.column_mut(k).assign(v);
    }
    let image = block.dot(&vectors);

    let limit: T = lit(config.certify_tol);
    let mut pairs = Vec::with_capacity(raw.len());
    let mut rejected = 0;
    for (k, (eta, vector)) in raw.into_iter().enumerate() {
        let r = image
            .column(k)
            .iter()
            .zip(vector.iter())
            .fold(T::zero(), |acc, (mu, u)| acc + (*mu - eta * *u).norm_sqr())
            .sqrt();
        let residual = r / norm2.max(T::min_positive_value());
        if !(residual <= limit) {
            rejected += 1;
            continue;
        }
        let (boundary_mass, tail_mass) = localization(vector.view(), grid, config);
        pairs.push(EigenPair {
            eta,
            vector,
            residual,
            boundary_mass,
            tail_mass,
        });
    }
    let spectral_radius = pairs.iter().fold(T::zero(), |m, p| m.max(p.eta.norm()));
    let max_residual = pairs.iter().fold(T::zero(), |m, p| m.max(p.residual));
    Ok(Spectrum {
        pairs,
        norm2,
        spectral_radius,
        rejected,
        max_residual,
        trace_defect: trace,
    })
}

/// Analytic continuous spectrum `{eta : Re eta = +-2b, |Im eta| >= lambda}`.
///
/// Far from the core `L0, L1 -> d_xx - lambda +- 2ib`; Fourier modes
/// `e^{ikx}` then give `eta = +-[-i(k^2 + lambda) -+ 2b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BandLocus<T: Real> {
    /// `|2b|`.
    pub real_offset: T,
    /// `lambda`: the band covers `|Im eta| >= lambda`.
    pub edge: T,
}

impl<T: Real> BandLocus<T> {
    /// Distance from `eta` to the nearest of the four half-lines.
    pub fn distance(&self, eta: Complex<T>) -> T {
        let dx = (eta.re.abs() - self.real_offset).abs();
        let dy = (self.edge - eta.im.abs()).max(T::zero());
        dx.hypot(dy)
    }

    /// The four band edges `+-2b +- i lambda` (`k = 0`).
    pub fn edges(&self) -> [Complex<T>; 4] {
        let (r, e) = (self.real_offset, self.edge);
        [
            Complex::new(r, e),
            Complex::new(r, -e),
            Complex::new(-r, e),
            Complex::new(-r, -e),
        ]
    }

    /// Band point `eta(k)` on the `(+2b, +i)` branch; other branches follow by sign flips.
    pub fn point(&self, k: T) -> Complex<T> {
        Complex::new(self.real_offset, k * k + self.edge)
    }
}

pub fn continuous_band<T: Real>(spec: &ModelSpec<T>, sol: &StationarySolution<T>) -> BandLocus<T> {
    BandLocus {
        real_offset: (lit::<T>(2.0) * spec.b).abs(),
        edge: sol.lambda,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeClass {
    Discrete,
    Continuous,
    Spurious,
}

impl ModeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeClass::Discrete => "discrete",
            ModeClass::Continuous => "continuous",
            ModeClass::Spurious => "spurious",
        }
    }
}

impl std::fmt::Display for ModeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Class of every pair in a [`Spectrum`], by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub classes: Vec<ModeClass>,
}

impl Separation {
    pub fn indices(&self, class: ModeClass) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&i| self.classes[i] == class)
            .collect()
    }

    pub fn count(&self, class: ModeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn eigenvalues<T: Real>(
        &self,
        spectrum: &Spectrum<T>,
        class: ModeClass,
    ) -> Vec<Complex<T>> {
        self.indices(class)
            .into_iter()
            .map(|i| spectrum.pairs[i].eta)
            .collect()
    }
}

/// Assigns one class to a single pair.
///
/// * spurious: boundary mass above `boundary_threshold`, or delocalized
///   while farther than `band_tol` from the band (periodic wrap of `tanh`);
/// * continuous: delocalized and within `band_tol` of the band;
/// * discrete: localized.
pub fn classify_mode<T: Real>(
    eta: Complex<T>,
    boundary_mass: T,
    tail_mass: T,
    band: &BandLocus<T>,
    config: &EigenConfig,
) -> ModeClass {
    if boundary_mass > lit(config.boundary_threshold) {
        return ModeClass::Spurious;
    }
    if tail_mass > lit(config.tail_threshold) {
        if band.distance(eta) < lit(config.band_tol) {
            ModeClass::Continuous
        } else {
            ModeClass::Spurious
        }
    } else {
        ModeClass::Discrete
    }
}

pub fn separate_discrete<T: Real>(
    spectrum: &Spectrum<T>,
    band: &BandLocus<T>,
    config: &EigenConfig,
) -> Separation {
    let classes = spectrum
        .pairs
        .iter()
        .map(|p| classify_mode(p.eta, p.boundary_mass, p.tail_mass, band, config))
        .collect();
    Separation { classes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Unstable,
    OscillatoryInternal,
    NeutrallyStable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Unstable => "unstable",
            Verdict::OscillatoryInternal => "oscillatory-internal",
            Verdict::NeutrallyStable => "neutrally-stable",
        })
    }
}

/// Largest distances from each nonzero discrete `eta` to its expected partners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PairingReport<T: Real> {
    /// `max_eta min_eta' |eta' + eta|`.
    pub negation_defect: T,
    /// `max_eta min_eta' |eta' - conj(eta)|`.
    pub conjugate_defect: T,
    /// `max_eta min_eta' |eta' + conj(eta)|`.
    pub negated_conjugate_defect: T,
    /// Tolerance applied to `negation_defect`.
    pub tolerance: T,
    /// Number of modes checked (`|eta| >= tol_zero`).
    pub checked: usize,
}

impl<T: Real> PairingReport<T> {
    pub fn negation_holds(&self) -> bool {
        self.negation_defect <= self.tolerance
    }

    pub fn quadruples_hold(&self) -> bool {
        self.negation_holds()
            && self.conjugate_defect <= self.tolerance
            && self.negated_conjugate_defect <= self.tolerance
    }
}

fn nearest<T: Real>(target: Complex<T>, set: &[Complex<T>]) -> T {
    set.iter()
        .fold(T::infinity(), |m, z| m.min((*z - target).norm()))
}

pub fn pairing_report<T: Real>(
    modes: &[Complex<T>],
    tol_zero: T,
    tolerance: T,
) -> PairingReport<T> {
    let mut report = PairingReport {
        negation_defect: T::zero(),
        conjugate_defect: T::zero(),
        negated_conjugate_defect: T::zero(),
        tolerance,
        checked: 0,
    };
    for &eta in modes.iter().filter(|z| z.norm() >= tol_zero) {
        report.checked += 1;
        report.negation_defect = report.negation_defect.max(nearest(-eta, modes));
        report.conjugate_defect = report.conjugate_defect.max(nearest(eta.conj(), modes));
        report.negated_conjugate_defect = report
            .negated_conjugate_defect
            .max(nearest(-eta.conj(), modes));
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StabilityReport<T: Real> {
    pub verdict: Verdict,
    /// Largest `Re eta` over discrete modes (zero when there are none).
    pub max_growth: T,
    pub zero_modes: usize,
    pub discrete: Vec<Complex<T>>,
    pub continuous_band: Option<BandLocus<T>>,
    pub scale: T,
    pub tol_instability: T,
    pub tol_zero: T,
    pub pairing: PairingReport<T>,
}

/// Stability verdict from the discrete modes; `scale` is the spectral radius.
pub fn classify<T: Real>(
    discrete: &[Complex<T>],
    scale: T,
    config: &EigenConfig,
) -> StabilityReport<T> {
    let tol_instability = lit::<T>(config.instability_rel) * scale;
    let tol_zero = lit::<T>(config.zero_rel) * scale;
    let max_growth = discrete
        .iter()
        .map(|z| z.re)
        .fold(T::neg_infinity(), T::max);
    let max_growth = if discrete.is_empty() {
        T::zero()
    } else {
        max_growth
    };
    let zero_modes = discrete.iter().filter(|z| z.norm() < tol_zero).count();
    let pairing = pairing_report(discrete, tol_zero, lit::<T>(config.pairing_rel) * scale);
    let internal = discrete.iter().any(|&z| {
        z.norm() >= tol_zero
            && z.re.abs() <= tol_instability
            && nearest(z.conj(), discrete) <= tol_instability.max(pairing.tolerance)
    });
    let verdict = if max_growth > tol_instability {
        Verdict::Unstable
    } else if internal {
        Verdict::OscillatoryInternal
    } else {
        Verdict::NeutrallyStable
    };
    StabilityReport {
        verdict,
        max_growth,
        zero_modes,
        discrete: discrete.to_vec(),
        continuous_band: None,
        scale,
        tol_instability,
        tol_zero,
        pairing,
    }
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone)]
pub struct Analysis<T: Real> {
    pub spectrum: Spectrum<T>,
    pub band: BandLocus<T>,
    pub separation: Separation,
    pub report: StabilityReport<T>,
}

impl<T: Real> Analysis<T> {
    pub fn class_of(&self, index: usize) -> ModeClass {
        self.separation.classes[index]
    }

    /// Discrete pairs, in spectrum order.
    pub fn discrete_pairs(&self) -> Vec<&EigenPair<T>> {
        self.separation
            .indices(ModeClass::Discrete)
            .into_iter()
            .map(|i| &self.spectrum.pairs[i])
            .collect()
    }
}

/// Runs an already-built operator through certification, separation and
/// classification.
pub fn analyze_operator<T: Real>(
    op: &LinearizedOperator<T>,
    band: BandLocus<T>,
    grid: &Grid<T>,
    config: &EigenConfig,
) -> Result<Analysis<T>> {
    let spectrum = certify(op, grid, config)?;
    let separation = separate_discrete(&spectrum, &band, config);
    let discrete = separation.eigenvalues(&spectrum, ModeClass::Discrete);
    let mut report = classify(&discrete, spectrum.spectral_radius, config);
    report.continuous_band = Some(band);
    Ok(Analysis {
        spectrum,
        band,
        separation,
        report,
    })
}

/// Operators, certified spectrum, separation and verdict for one solution.
pub fn analyze<T: Real>(
    spec: &ModelSpec<T>,
    sol: &StationarySolution<T>,
    grid: &Grid<T>,
    config: &EigenConfig,
) -> Result<Analysis<T>> {
    let op = build_operators(spec, sol, grid)?;
    analyze_operator(&op, continuous_band(spec, sol), grid, config)
}

/// Greedy bijective matching of two eigenvalue lists by ascending distance.
///
/// Returns `(index in a, index in b, distance)` for `min(len a, len b)` pairs.
pub fn match_spectra<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<(usize, usize, T)> {
    let mut candidates: Vec<(T, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            candidates.push(((*x - *y).norm(), i, j));
        }
    }
    candidates.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    for (d, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j, d));
        }
    }
    out
}

/// Second-order finite-difference operators with homogeneous Dirichlet ends,
/// on the same points as `grid`. Cross-check for the Fourier collocation.
pub fn finite_difference_operators<T: Real>(
    spec: &ModelSpec<T>,
    sol: &StationarySolution<T>,
    grid: &Grid<T>,
) -> Result<LinearizedOperator<T>> {
    let phi = crate::analytic::evaluate_solution(sol, grid)?;
    let fourier = crate::linearization::operators_for_field(spec, sol.lambda, &phi, grid)?;
    let n = grid.len();
    let h = grid.spacing();
    let inv = T::one() / (h * h);
    let d2 = crate::grid::fourier_diff_matrix(grid, crate::grid::Order::Second);
    let swap = |l: &Array2<Complex<T>>| {
        let mut out = Array2::zeros((n, n));
        for j in 0..n {
            // local coefficient = diagonal minus the collocation diagonal
            let local = l[(j, j)] - d2[(j, j)];
            out[(j, j)] = local - Complex::new(inv + inv, T::zero());
            if j > 0 {
                out[(j, j - 1)] = Complex::new(inv, T::zero());
            }
            if j + 1 < n {
                out[(j, j + 1)] = Complex::new(inv, T::zero());
            }
        }
        out
    };
    LinearizedOperator::from_parts(swap(fourier.l0()), swap(fourier.l1()))
}

/// Convenience: `to_f64` of a complex value's parts.
pub fn complex_to_f64<T: Real>(z: Complex<T>) -> (f64, f64) {
    (to_f64(z.re), to_f64(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{solve_constraints, Family, Knowns};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    #[test]
    fn identity_eigenvalues() {
        let a = Array2::<C>::eye(4);
        let pairs = eig_dense(&a).unwrap();
        assert_eq!(pairs.len(), 4);
        for (eta, v) in pairs {
            assert!((eta - C::new(1.0, 0.0)).norm() < 1e-15);
            assert!((vector_norm(v.view()) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_generator() {
        let a = ndarray::array![
            [C::new(0.0, 0.0), C::new(1.0, 0.0)],
            [C::new(-1.0, 0.0), C::new(0.0, 0.0)]
        ];
        let mut eta: Vec<C> = eig_dense(&a).unwrap().into_iter().map(|p| p.0).collect();
        eta.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((eta[0] - C::new(0.0, -1.0)).norm() < 1e-14);
        assert!((eta[1] - C::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn random_matrix_trace_identity_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = Array2::from_shape_fn((50, 50), |_| {
            C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let pairs = eig_dense(&a).unwrap();
        let eta: Vec<C> = pairs.iter().map(|p| p.0).collect();
        assert!(trace_defect(&a, &eta) < 1e-10);
        let norm = norm2_estimate(&a, 200);
        for (e, v) in &pairs {
            let r = (a.dot(v) - v.mapv(|z| z * e))
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-8 * norm);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let a = Array2::<C>::zeros((2, 3));
        assert!(matches!(eig_dense(&a), Err(Error::LengthMismatch { .. })));
        let mut b = Array2::<C>::eye(2);
        b[(0, 1)] = C::new(f64::NAN, 0.0);
        assert!(eig_dense(&b).is_err());
    }

    #[test]
    fn norm_estimate_on_diagonal() {
        let mut a = Array2::<C>::zeros((3, 3));
        a[(0, 0)] = C::new(1.0, 0.0);
        a[(1, 1)] = C::new(0.0, -5.0);
        a[(2, 2)] = C::new(2.0, 0.0);
        assert!((norm2_estimate(&a, 100) - 5.0).abs() < 1e-10);
    }

    #[test]
    fn band_locus_geometry() {
        let band = BandLocus::<f64> {
            real_offset: 0.6,
            edge: 0.91,
        };
        for e in band.edges() {
            assert_eq!(band.distance(e), 0.0);
        }
        assert!(band.distance(C::new(-0.6, -5.0)) == 0.0);
        assert!((band.distance(C::new(0.6, 0.0)) - 0.91).abs() < 1e-15);
        assert!((band.distance(C::new(0.0, 3.0)) - 0.6).abs() < 1e-15);
        assert_eq!(band.point(0.0), C::new(0.6, 0.91));
        let flat = BandLocus {
            real_offset: 0.0,
            edge: 1.0,
        };
        assert_eq!(flat.distance(C::new(0.0, -2.0)), 0.0);
    }

    #[test]
    fn band_from_constraints() {
        let (spec, sol) = solve_constraints(
            Family::ClassI,
            &Knowns::class_i_normalized(0.01, 0.3, -4.0, -4.0, 3.0),
        )
        .unwrap();
        let band: BandLocus<f64> = continuous_band(&spec, &sol);
        assert!((band.real_offset - 0.6).abs() < 1e-15);
        assert!((band.edge - 0.91).abs() < 1e-15);
    }

    fn grid() -> Grid<f64> {
        Grid::new(64, 10.0).unwrap()
    }

    fn stacked(g: &Grid<f64>, f: impl Fn(f64) -> C) -> Array1<C> {
        let n = g.len();
        let mut u = Array1::zeros(2 * n);
        for (j, &x) in g.points().iter().enumerate() {
            u[n + j] = f(x);
        }
        u
    }

    #[test]
    fn localization_of_synthetic_vectors() {
        let g = grid();
        let config = EigenConfig::default();
        let band = BandLocus {
            real_offset: 0.0,
            edge: 1.0,
        };

        let sech = stacked(&g, |x| C::new(1.0 / x.cosh(), 0.0));
        let (b, t) = localization(sech.view(), &g, &config);
        assert!(b < 1e-6 && t < 0.1);
        assert_eq!(
            classify_mode(C::new(0.0, 0.0), b, t, &band, &config),
            ModeClass::Discrete
        );

        let wave = stacked(&g, |x| C::new(0.0, 2.0 * x).exp());
        let (b, t) = localization(wave.view(), &g, &config);
        assert!((t - 0.8).abs() < 0.05, "{t}");
        assert_eq!(
            classify_mode(C::new(0.0, 5.0), b, t, &band, &config),
            ModeClass::Continuous
        );
        assert_eq!(
            classify_mode(C::new(0.3, 5.0), b, t, &band, &config),
            ModeClass::Spurious
        );

        let g = Grid::new(512, 16.0).unwrap();
        let n = g.len();
        let mut edge = Array1::<C>::zeros(2 * n);
        for j in [0, 1, n - 2, n - 1] {
            edge[j] = C::new(1.0, 0.0);
        }
        let (b, t) = localization(edge.view(), &g, &config);
        assert_eq!(b, 1.0);
        assert_eq!(
            classify_mode(C::new(0.0, 5.0), b, t, &band, &config),
            ModeClass::Spurious
        );
    }

    #[test]
    fn classify_examples() {
        let config = EigenConfig::default();
        let r = classify(
            &[C::new(0.0, 0.0), C::new(0.2, 0.0), C::new(-0.2, 0.0)],
            10.0,
            &config,
        );
        assert_eq!(r.verdict, Verdict::Unstable);
        assert_eq!(r.max_growth, 0.2);
        assert!(r.pairing.negation_holds());

        let r = classify(
            &[C::new(0.0, 0.0), C::new(0.0, 0.5), C::new(0.0, -0.5)],
            10.0,
            &config,
        );
        assert_eq!(r.verdict, Verdict::OscillatoryInternal);
        assert_eq!(r.zero_modes, 1);
        assert!(r.pairing.quadruples_hold());

        let r = classify(&[C::new(0.0, 0.0)], 10.0, &config);
        assert_eq!(r.verdict, Verdict::NeutrallyStable);
        assert_eq!(r.zero_modes, 1);

        let r = classify(&[C::new(0.3, 0.1), C::new(-0.3, -0.1)], 10.0, &config);
        assert!(r.pairing.negation_holds());
        assert!(!r.pairing.quadruples_hold());
        assert!((r.pairing.conjugate_defect - 0.2).abs() < 1e-15);
    }

    #[test]
    fn matching_is_bijective() {
        let a = [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.1, 0.0)];
        let b = [C::new(1.05, 0.0), C::new(0.01, 0.0), C::new(0.9, 0.0)];
        let m = match_spectra(&a, &b);
        assert_eq!(m.len(), 3);
        let mut seen_b: Vec<usize> = m.iter().map(|p| p.1).collect();
        seen_b.sort();
        assert_eq!(seen_b, vec![0, 1, 2]);
        assert!(m.iter().any(|&(i, j, _)| i == 0 && j == 1));
    }

    #[test]
    fn small_soliton_spectrum_is_certified() {
        let g = Grid::new(96, 12.0).unwrap();
        let k = Knowns {
            a: Some(1.0),
            b: Some(0.0),
            kappa: Some(3.0),
            v1: Some(0.0),
            g2: Some(0.0),
            phi0: Some(1.0),
            g1: None,
        };
        let (spec, sol) = solve_constraints(Family::ClassI, &k).unwrap();
        let config = EigenConfig::default();
        let analysis = analyze(&spec, &sol, &g, &config).unwrap();
        let spectrum = &analysis.spectrum;
        assert_eq!(spectrum.pairs.len() + spectrum.rejected, 2 * g.len());
        assert!(spectrum.max_residual <= 1e-8);
        assert!(spectrum.trace_defect < 1e-10);
        assert!(analysis.report.zero_modes >= 1);
        assert_eq!(analysis.separation.classes.len(), spectrum.pairs.len());
    }
}
