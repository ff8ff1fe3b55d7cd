//! Discretized linearization around a stationary solution.
//!
//! Perturbing `Psi = (phi + v + conj-partner) e^{i lambda z}` and keeping first
//! order terms gives the block problem
//!
//! ```text
//! i [[0, L0], [L1, 0]] u = eta u
//! L0 = d_xx - lambda + V + iW + g1 |phi|^2 + g2 |phi|^{2 kappa}
//! L1 = d_xx - lambda + V + iW + 3 g1 |phi|^2 + g2 (1 + 2 kappa) |phi|^{2 kappa}
//! ```
//!
//! with `Re eta > 0` signalling growth. Both operators depend on the
//! solution only through its modulus.

use ndarray::{s, Array2};
use num_complex::Complex;

use crate::analytic::{
    evaluate_solution, sample_potential, stationary_residual, ModelSpec, StationarySolution,
};
use crate::error::{Error, Result};
use crate::grid::{differentiate_in_place, fourier_diff_matrix, ComplexField, Grid, Order};
use crate::scalar::{lit, modulus_pow, to_f64, Real};

/// Stationary residual above which [`build_operators`] refuses to linearize.
///
/// Raised to `10 eps k_max^2 max|phi|` when the working precision cannot
/// resolve it (single precision).
pub const CONSISTENCY_LIMIT: f64 = 1e-6;

/// Relative finite-difference step of [`direct_frechet_operator`].
pub const FRECHET_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedOperator<T: Real> {
    l0: Array2<Complex<T>>,
    l1: Array2<Complex<T>>,
    block: Array2<Complex<T>>,
}

impl<T: Real> LinearizedOperator<T> {
    /// Assembles `M = i [[0, L0], [L1, 0]]` from the two `N x N` operators.
    pub fn from_parts(l0: Array2<Complex<T>>, l1: Array2<Complex<T>>) -> Result<Self> {
        let n = l0.nrows();
        if l0.dim() != (n, n) || l1.dim() != (n, n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: l1.nrows().max(l0.ncols()),
            });
        }
        let i = Complex::new(T::zero(), T::one());
        let mut block = Array2::zeros((2 * n, 2 * n));
        block.slice_mut(s![..n, n..]).assign(&l0.mapv(|z| i * z));
        block.slice_mut(s![n.., ..n]).assign(&l1.mapv(|z| i * z));
        Ok(Self { l0, l1, block })
    }

    pub fn l0(&self) -> &Array2<Complex<T>> {
        &self.l0
    }

    pub fn l1(&self) -> &Array2<Complex<T>> {
        &self.l1
    }

    /// The `2N x 2N` matrix `M`.
    pub fn block(&self) -> &Array2<Complex<T>> {
        &self.block
    }

    pub fn into_block(self) -> Array2<Complex<T>> {
        self.block
    }

    /// Number of grid points `N`.
    pub fn grid_len(&self) -> usize {
        self.l0.nrows()
    }

    /// Maximum absolute row sum of `M`.
    pub fn norm_inf(&self) -> T {
        max_row_sum(&self.block)
    }

    pub fn apply(&self, u: &[Complex<T>]) -> Vec<Complex<T>> {
        self.block.dot(&ndarray::ArrayView1::from(u)).to_vec()
    }

    /// `|| M (0, phi)^T ||_inf`, zero in exact arithmetic for a stationary `phi`.
    ///
    /// Fields that do not decay or are not periodic on the grid pick up a
    /// wrap-around error near `x = +-L`, so the interior value is reported too.
    pub fn zero_mode_defect(&self, phi: &ComplexField<T>, grid: &Grid<T>) -> ZeroModeDefect<T> {
        let n = self.grid_len();
        let mut u = vec![Complex::new(T::zero(), T::zero()); 2 * n];
        u[n..].copy_from_slice(phi.values());
        let image = self.apply(&u);
        let sup = |keep: &dyn Fn(usize) -> bool| {
            image
                .iter()
                .enumerate()
                .filter(|(j, _)| keep(j % n))
                .fold(T::zero(), |m, (_, z)| m.max(z.norm()))
        };
        ZeroModeDefect {
            full: sup(&|_| true),
            interior: sup(&|j| grid.is_interior(j)),
            norm_inf: self.norm_inf(),
        }
    }
}

/// Sup norms of `M (0, phi)^T` and the scale they are judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroModeDefect<T: Real> {
    pub full: T,
    pub interior: T,
    /// `||M||_inf`.
    pub norm_inf: T,
}

impl<T: Real> ZeroModeDefect<T> {
    pub fn relative_full(&self) -> T {
        self.full / self.norm_inf
    }

    pub fn relative_interior(&self) -> T {
        self.interior / self.norm_inf
    }
}

pub(crate) fn max_row_sum<T: Real>(a: &Array2<Complex<T>>) -> T {
    a.rows()
        .into_iter()
        .map(|row| row.iter().fold(T::zero(), |acc, z| acc + z.norm()))
        .fold(T::zero(), T::max)
}

/// Local (diagonal) coefficients of `L0` and `L1` for a given field.
fn local_coefficients<T: Real>(
    spec: &ModelSpec<T>,
    lambda: T,
    field: &ComplexField<T>,
    grid: &Grid<T>,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let pot = sample_potential(spec, grid);
    let two_kappa = lit::<T>(2.0) * spec.kappa;
    let three: T = lit(3.0);
    field
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let m = z.norm();
            let cubic = spec.g1 * m * m;
            let power = spec.g2 * modulus_pow(m, two_kappa);
            let base = pot.v[j] - lambda;
            (
                Complex::new(base + cubic + power, pot.w[j]),
                Complex::new(
                    base + three * cubic + (T::one() + two_kappa) * power,
                    pot.w[j],
                ),
            )
        })
        .unzip()
}

/// Builds `L0`, `L1` and `M` around an arbitrary field without checking that
/// it is stationary.
pub fn operators_for_field<T: Real>(
    spec: &ModelSpec<T>,
    lambda: T,
    field: &ComplexField<T>,
    grid: &Grid<T>,
) -> Result<LinearizedOperator<T>> {
    if field.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: field.len(),
        });
    }
    let d2 = fourier_diff_matrix(grid, Order::Second);
    let (c0, c1) = local_coefficients(spec, lambda, field, grid);
    let mut l0 = d2.clone();
    let mut l1 = d2;
    for j in 0..grid.len() {
        l0[(j, j)] = l0[(j, j)] + c0[j];
        l1[(j, j)] = l1[(j, j)] + c1[j];
    }
    LinearizedOperator::from_parts(l0, l1)
}

/// Linearization around the closed-form solution `sol` of `spec`.
pub fn build_operators<T: Real>(
    spec: &ModelSpec<T>,
    sol: &StationarySolution<T>,
    grid: &Grid<T>,
) -> Result<LinearizedOperator<T>> {
    spec.validate()?;
    let phi = evaluate_solution(sol, grid)?;
    let residual = stationary_residual(&phi, spec, sol.lambda, grid)?.sup_norm;
    let k = grid.max_wavenumber();
    let limit =
        lit::<T>(CONSISTENCY_LIMIT).max(lit::<T>(10.0) * T::epsilon() * k * k * phi.sup_norm());
    if !(residual <= limit) {
        return Err(Error::InconsistentParameters {
            residual: to_f64(residual),
            limit: to_f64(limit),
        });
    }
    operators_for_field(spec, sol.lambda, &phi, grid)
}

/// Independent linearization of the evolution `Psi_z = G(Psi)` around
/// `phi e^{i lambda z}`, in stacked coordinates `(Re u, Im u)`.
///
/// `G(u) = i [u_xx + (V + iW - lambda) u + g1 |u|^2 u + g2 |u|^{2 kappa} u]`.
/// The pointwise nonlinearity is differentiated by central differences with
/// step `1e-6 max|phi|`; the Laplacian columns come from transforming unit
/// vectors. Nothing here uses the closed forms of `L0` and `L1`, so the
/// eigenvalues of the returned (real-valued) matrix are an oracle for the
/// spectrum of `M`, including any `phi^2`-type coupling that the modulus-only
/// operators leave out.
pub fn direct_frechet_operator<T: Real>(
    spec: &ModelSpec<T>,
    sol: &StationarySolution<T>,
    grid: &Grid<T>,
) -> Result<Array2<Complex<T>>> {
    spec.validate()?;
    let phi = evaluate_solution(sol, grid)?;
    let n = grid.len();
    let pot = sample_potential(spec, grid);
    let delta = lit::<T>(FRECHET_STEP) * phi.sup_norm();
    let two_kappa = lit::<T>(2.0) * spec.kappa;
    let nonlinear =
        |u: Complex<T>| u * (spec.g1 * u.norm_sqr() + spec.g2 * modulus_pow(u.norm(), two_kappa));

    // Laplacian column by column
    let mut lap = Array2::<T>::zeros((n, n));
    let mut unit = vec![Complex::new(T::zero(), T::zero()); n];
    for l in 0..n {
        unit.iter_mut()
            .for_each(|z| *z = Complex::new(T::zero(), T::zero()));
        unit[l] = Complex::new(T::one(), T::zero());
        differentiate_in_place(&mut unit, grid, Order::Second);
        for (j, z) in unit.iter().enumerate() {
            lap[(j, l)] = z.re;
        }
    }

    // H = u_xx + (V - lambda + iW) u + N(u); G = iH, so Re G = -Im H, Im G = Re H.
    let mut jac = Array2::<T>::zeros((2 * n, 2 * n));
    for j in 0..n {
        for l in 0..n {
            jac[(j, n + l)] = -lap[(j, l)];
            jac[(n + j, l)] = lap[(j, l)];
        }
        let shift = pot.v[j] - sol.lambda;
        let w = pot.w[j];
        jac[(j, j)] = jac[(j, j)] - w;
        jac[(j, n + j)] = jac[(j, n + j)] - shift;
        jac[(n + j, j)] = jac[(n + j, j)] + shift;
        jac[(n + j, n + j)] = jac[(n + j, n + j)] - w;

        let two_delta = delta + delta;
        let by_re = (nonlinear(phi[j] + Complex::new(delta, T::zero()))
            - nonlinear(phi[j] - Complex::new(delta, T::zero())))
            / two_delta;
        let by_im = (nonlinear(phi[j] + Complex::new(T::zero(), delta))
            - nonlinear(phi[j] - Complex::new(T::zero(), delta)))
            / two_delta;
        jac[(j, j)] = jac[(j, j)] - by_re.im;
        jac[(j, n + j)] = jac[(j, n + j)] - by_im.im;
        jac[(n + j, j)] = jac[(n + j, j)] + by_re.re;
        jac[(n + j, n + j)] = jac[(n + j, n + j)] + by_im.re;
    }
    Ok(jac.mapv(|x| Complex::new(x, T::zero())))
}
