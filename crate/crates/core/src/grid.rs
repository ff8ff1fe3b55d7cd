//! Uniform periodic grid and Fourier spectral differentiation.
//!
//! Points are `x_j = -L + 2Lj/N` for `j = 0..N`, `N` even. Wavenumbers are
//! stored in transform order, `m = 0, 1, ..., N/2 - 1, -N/2, ..., -1`, with
//! `k_m = pi m / L`. The first derivative zeroes the Nyquist mode (its sign is
//! not recoverable from samples); the second derivative keeps `-k_{N/2}^2`.
//! Both the matrix and the transform route follow that convention, so they
//! agree to round-off.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Fraction of the domain (centred on `x = 0`) where tapered derivatives are exact.
pub const INTERIOR_FRACTION: f64 = 0.8;

/// Derivative order supported by the collocation operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

#[derive(Clone)]
pub struct Grid<T: Real> {
    n: usize,
    half_width: T,
    points: Vec<T>,
    wavenumbers: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }
}

impl<T: Real> Grid<T> {
    pub fn new(n: usize, half_width: T) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "N must be even and >= 4, got {n}"
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        let nt: T = lit(n as f64);
        let h = (half_width + half_width) / nt;
        let points = (0..n).map(|j| -half_width + h * lit(j as f64)).collect();
        let unit = T::PI() / half_width;
        let wavenumbers = (0..n)
            .map(|m| {
                let signed = if m < n / 2 {
                    m as f64
                } else {
                    m as f64 - n as f64
                };
                unit * lit(signed)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            half_width,
            points,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn spacing(&self) -> T {
        (self.half_width + self.half_width) / lit(self.n as f64)
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// Wavenumbers in transform order (see module docs).
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    /// Largest representable wavenumber `pi N / (2L)`.
    pub fn max_wavenumber(&self) -> T {
        T::PI() * lit(self.n as f64 / 2.0) / self.half_width
    }

    /// Index of the grid point at `-x_j` (the point `-L` maps onto itself).
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Whether `x_j` lies in the central [`INTERIOR_FRACTION`] of the domain.
    pub fn is_interior(&self, j: usize) -> bool {
        self.points[j].abs() <= self.half_width * lit(INTERIOR_FRACTION)
    }

    /// Smooth window equal to one on the interior and zero at `x = -L`.
    ///
    /// Transition is the `C^inf` step `e^{-2/t} / (e^{-2/t} + e^{-2/(1-t)})`
    /// over `|x| in [0.8 L, L]`.
    pub fn taper(&self) -> Vec<T> {
        let start = self.half_width * lit(INTERIOR_FRACTION);
        let width = self.half_width - start;
        let two: T = lit(2.0);
        self.points
            .iter()
            .map(|&x| {
                let t = (x.abs() - start) / width;
                if t <= T::zero() {
                    T::one()
                } else if t >= T::one() {
                    T::zero()
                } else {
                    let rise = (-two / t).exp();
                    let fall = (-two / (T::one() - t)).exp();
                    T::one() - rise / (rise + fall)
                }
            })
            .collect()
    }

    /// Trapezoidal (exact for periodic band-limited data) integral of samples.
    pub fn integrate(&self, values: &[T]) -> T {
        values.iter().fold(T::zero(), |acc, &v| acc + v) * self.spacing()
    }

    pub(crate) fn fft_forward(&self, data: &mut [Complex<T>]) {
        self.forward.process(data);
    }

    pub(crate) fn fft_inverse(&self, data: &mut [Complex<T>]) {
        self.inverse.process(data);
        let scale = T::one() / lit(self.n as f64);
        data.iter_mut().for_each(|z| *z = *z * scale);
    }

    fn multiplier(&self, m: usize, order: Order) -> Complex<T> {
        let k = self.wavenumbers[m];
        match order {
            Order::First if m == self.n / 2 => Complex::new(T::zero(), T::zero()),
            Order::First => Complex::new(T::zero(), k),
            Order::Second => Complex::new(-k * k, T::zero()),
        }
    }
}

/// Complex samples aligned with [`Grid::points`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T: Real> {
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: &Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        Self {
            values: grid.points().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn modulus(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `(integral |f|^2 dx)^{1/2}`.
    pub fn l2_norm(&self, grid: &Grid<T>) -> T {
        let sq: Vec<T> = self.values.iter().map(|z| z.norm_sqr()).collect();
        grid.integrate(&sq).sqrt()
    }

    /// Total power `integral |f|^2 dx`.
    pub fn power(&self, grid: &Grid<T>) -> T {
        let sq: Vec<T> = self.values.iter().map(|z| z.norm_sqr()).collect();
        grid.integrate(&sq)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            values: self.values.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Sup norm of the difference over the points selected by `keep`.
    pub fn sup_diff_where(&self, other: &Self, keep: impl Fn(usize) -> bool) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .filter(|(j, _)| keep(*j))
            .fold(T::zero(), |m, (_, (a, b))| m.max((*a - *b).norm()))
    }
}

impl<T: Real> Index<usize> for ComplexField<T> {
    type Output = Complex<T>;

    fn index(&self, j: usize) -> &Complex<T> {
        &self.values[j]
    }
}

/// Dense Fourier differentiation matrix built from the closed-form
/// cotangent / cosecant-squared entries (independent of the FFT route).
pub fn fourier_diff_matrix<T: Real>(grid: &Grid<T>, order: Order) -> Array2<Complex<T>> {
    let n = grid.len();
    let h_angle = T::TAU() / lit(n as f64);
    let scale = T::PI() / grid.half_width();
    let half: T = lit(0.5);
    let diag = match order {
        Order::First => T::zero(),
        Order::Second => {
            let pi2 = T::PI() * T::PI();
            (-pi2 / (lit::<T>(3.0) * h_angle * h_angle) - lit(1.0 / 6.0)) * scale * scale
        }
    };
    // entries depend only on (j - l) mod n
    let column: Vec<T> = (0..n)
        .map(|d| {
            if d == 0 {
                return diag;
            }
            let sign = if d % 2 == 0 { T::one() } else { -T::one() };
            let arg = lit::<T>(d as f64) * h_angle * half;
            match order {
                Order::First => half * sign * (arg.cos() / arg.sin()) * scale,
                Order::Second => {
                    let s = arg.sin();
                    -half * sign / (s * s) * scale * scale
                }
            }
        })
        .collect();
    Array2::from_shape_fn((n, n), |(j, l)| {
        Complex::new(column[(j + n - l) % n], T::zero())
    })
}

/// Transform-based spectral derivative.
pub fn spectral_derivative<T: Real>(
    field: &ComplexField<T>,
    grid: &Grid<T>,
    order: Order,
) -> ComplexField<T> {
    let mut data = field.values.clone();
    differentiate_in_place(&mut data, grid, order);
    ComplexField { values: data }
}

pub(crate) fn differentiate_in_place<T: Real>(
    data: &mut [Complex<T>],
    grid: &Grid<T>,
    order: Order,
) {
    grid.fft_forward(data);
    for (m, z) in data.iter_mut().enumerate() {
        *z = *z * grid.multiplier(m, order);
    }
    grid.fft_inverse(data);
}

/// Spectral derivative of the tapered field.
///
/// Exact (to spectral accuracy) on the interior points, where the taper is
/// identically one; meaningless in the outer 20%. Used for residual and flux
/// checks of fields that are not periodic on the grid (the `e^{i mu x}` phase,
/// slowly decaying `sech^{1/kappa}` tails).
pub fn interior_derivative<T: Real>(
    field: &ComplexField<T>,
    grid: &Grid<T>,
    order: Order,
) -> ComplexField<T> {
    let taper = grid.taper();
    let mut data: Vec<Complex<T>> = field
        .values
        .iter()
        .zip(&taper)
        .map(|(&z, &w)| z * w)
        .collect();
    differentiate_in_place(&mut data, grid, order);
    ComplexField { values: data }
}
