//! Direct evolution of `i Psi_z + Psi_xx + (V + iW) Psi + g1 |Psi|^2 Psi
//! + g2 |Psi|^{2 kappa} Psi = 0` by Strang splitting.
//!
//! The gain/loss term makes the local sub-step non-unitary, so total power
//! is recorded as a diagnostic only; it is conserved only when `W = 0`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{sample_potential, ModelSpec};
use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};
use crate::scalar::{lit, modulus_pow, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub z_end: f64,
    pub dz: f64,
    /// Record a sample every this many steps (the final step is always recorded).
    pub sample_every: usize,
    /// Peak amplitude, relative to the initial peak, treated as blow-up.
    pub blowup_factor: f64,
    /// Bound on the sup-norm change of the final field when `dz` is halved.
    pub gate_tol: f64,
    /// Run the step-halving gate before accepting a run.
    pub gate: bool,
    /// Distance over which the gate compares runs; `None` means `z_end`.
    /// Unstable configurations amplify step errors like any perturbation, so
    /// their gate is taken before the growth leaves the noise floor.
    pub gate_z: Option<f64>,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            z_end: 5.0,
            dz: 5e-4,
            sample_every: 100,
            blowup_factor: 1e3,
            gate_tol: 1e-6,
            gate: true,
            gate_z: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Diagnostics<T: Real> {
    /// `max |Psi|`.
    pub peak: T,
    /// `integral |Psi|^2 dx`.
    pub power: T,
    /// `max | |Psi| - |Psi(z = 0)| |`.
    pub deviation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRecord<T: Real> {
    pub z_samples: Vec<T>,
    pub snapshots: Vec<ComplexField<T>>,
    pub diagnostics: Vec<Diagnostics<T>>,
    /// Sup-norm change of the final field under `dz -> dz/2`, when the gate ran.
    pub gate_defect: Option<T>,
}

impl<T: Real> PropagationRecord<T> {
    pub fn final_field(&self) -> &ComplexField<T> {
        &self.snapshots[self.snapshots.len() - 1]
    }
}

/// Adds deterministic complex noise `amplitude (u + i v)`, `u, v ~ U(-1, 1)`.
pub fn perturb<T: Real>(field: &ComplexField<T>, amplitude: T, seed: u64) -> ComplexField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = field.clone();
    for z in out.values_mut() {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        *z = *z + Complex::new(lit::<T>(u), lit::<T>(v)) * amplitude;
    }
    out
}

struct Stepper<'a, T: Real> {
    grid: &'a Grid<T>,
    spec: &'a ModelSpec<T>,
    v: Vec<T>,
    w: Vec<T>,
    half_kick: Vec<Complex<T>>,
    dz: T,
}

impl<'a, T: Real> Stepper<'a, T> {
    fn new(grid: &'a Grid<T>, spec: &'a ModelSpec<T>, dz: T, potential_shift: T) -> Self {
        let pot = sample_potential(spec, grid);
        let half = dz * lit(0.5);
        // Psi_hat_z = -i k^2 Psi_hat
        let half_kick = grid
            .wavenumbers()
            .iter()
            .map(|&k| Complex::from_polar(T::one(), -k * k * half))
            .collect();
        let v = pot.v.into_iter().map(|v| v + potential_shift).collect();
        Self {
            grid,
            spec,
            v,
            w: pot.w,
            half_kick,
            dz,
        }
    }

    fn diffract(&self, psi: &mut [Complex<T>]) {
        self.grid.fft_forward(psi);
        for (z, m) in psi.iter_mut().zip(&self.half_kick) {
            *z = *z * m;
        }
        self.grid.fft_inverse(psi);
    }

    /// Exact solution of `Psi_z = i (V + iW + g1|Psi|^2 + g2|Psi|^{2 kappa}) Psi`
    /// over one step: `|Psi|` decays as `e^{-W z}` and the nonlinear phase is
    /// integrated along that decay.
    fn local(&self, psi: &mut [Complex<T>]) {
        let two: T = lit(2.0);
        let two_kappa = two * self.spec.kappa;
        for (j, z) in psi.iter_mut().enumerate() {
            let m = z.norm();
            let w = self.w[j];
            let phase = self.v[j] * self.dz
                + self.spec.g1 * m * m * decay_integral(two * w, self.dz)
                + self.spec.g2 * modulus_pow(m, two_kappa) * decay_integral(two_kappa * w, self.dz);
            *z = *z * Complex::from_polar((-w * self.dz).exp(), phase);
        }
    }

    fn step(&self, psi: &mut [Complex<T>]) {
        self.diffract(psi);
        self.local(psi);
        self.diffract(psi);
    }
}

/// `integral_0^dz e^{-c s} ds`, accurate as `c -> 0`.
fn decay_integral<T: Real>(c: T, dz: T) -> T {
    let x = c * dz;
    if x.abs() < lit(1e-8) {
        dz * (T::one() - x * lit(0.5))
    } else {
        -(-x).exp_m1() / c
    }
}

fn step_count<T: Real>(z_end: T, dz: T) -> Result<usize> {
    if !(dz > T::zero()) || !(z_end >= T::zero()) || !dz.is_finite() || !z_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "propagation needs dz > 0 and z_end >= 0, got dz = {dz}, z_end = {z_end}"
        )));
    }
    let steps = (z_end / dz).round();
    let steps = to_f64(steps);
    if (to_f64(z_end) - steps * to_f64(dz)).abs() > 1e-9 * to_f64(z_end).max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "z_end = {z_end} is not a whole number of steps dz = {dz}"
        )));
    }
    Ok(steps as usize)
}

#[allow(clippy::too_many_arguments)]
fn evolve<T: Real>(
    initial: &ComplexField<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    z_end: T,
    dz: T,
    sample_every: usize,
    blowup_factor: T,
    potential_shift: T,
) -> Result<PropagationRecord<T>> {
    if initial.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: initial.len(),
        });
    }
    let steps = step_count(z_end, dz)?;
    let stepper = Stepper::new(grid, spec, dz, potential_shift);
    let reference = initial.modulus();
    let initial_peak = initial.sup_norm();
    let limit = blowup_factor * initial_peak;
    let every = sample_every.max(1);

    let mut psi = initial.clone();
    let diagnose = |f: &ComplexField<T>| Diagnostics {
        peak: f.sup_norm(),
        power: f.power(grid),
        deviation: f
            .values()
            .iter()
            .zip(&reference)
            .fold(T::zero(), |m, (z, r)| m.max((z.norm() - *r).abs())),
    };
    let mut record = PropagationRecord {
        z_samples: vec![T::zero()],
        snapshots: vec![psi.clone()],
        diagnostics: vec![diagnose(&psi)],
        gate_defect: None,
    };
    for s in 1..=steps {
        stepper.step(psi.values_mut());
        let z = dz * lit(s as f64);
        let peak = psi.sup_norm();
        if !(peak <= limit) {
            return Err(Error::StepUnstable {
                z: to_f64(z),
                peak: to_f64(peak),
                limit: to_f64(limit),
            });
        }
        if s % every == 0 || s == steps {
            record.z_samples.push(z);
            record.snapshots.push(psi.clone());
            record.diagnostics.push(diagnose(&psi));
        }
    }
    Ok(record)
}

/// Second-order split-step evolution of `initial` to `z_end`.
///
/// With `config.gate`, the same run is repeated with `dz/2` and the final
/// fields must agree to `gate_tol` in sup norm.
pub fn split_step<T: Real>(
    initial: &ComplexField<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    config: &PropagationConfig,
) -> Result<PropagationRecord<T>> {
    split_step_shifted(initial, spec, grid, config, T::zero())
}

/// [`split_step`] with a constant added to `V`.
pub fn split_step_shifted<T: Real>(
    initial: &ComplexField<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    config: &PropagationConfig,
    potential_shift: T,
) -> Result<PropagationRecord<T>> {
    let z_end: T = lit(config.z_end);
    let dz: T = lit(config.dz);
    let blowup: T = lit(config.blowup_factor);
    let mut record = evolve(
        initial,
        spec,
        grid,
        z_end,
        dz,
        config.sample_every,
        blowup,
        potential_shift,
    )?;
    if config.gate {
        let horizon: T = lit(config.gate_z.unwrap_or(config.z_end).min(config.z_end));
        let half = dz * lit(0.5);
        let coarse = if horizon == z_end {
            None
        } else {
            Some(evolve(
                initial,
                spec,
                grid,
                horizon,
                dz,
                usize::MAX,
                blowup,
                potential_shift,
            )?)
        };
        let coarse_final = coarse
            .as_ref()
            .map_or(record.final_field(), |r| r.final_field());
        let fine = evolve(
            initial,
            spec,
            grid,
            horizon,
            half,
            usize::MAX,
            blowup,
            potential_shift,
        )?;
        let defect = coarse_final.sup_diff_where(fine.final_field(), |_| true);
        if !(defect < lit(config.gate_tol)) {
            return Err(Error::NonConvergedStep {
                dz: config.dz,
                defect: to_f64(defect),
                limit: config.gate_tol,
            });
        }
        record.gate_defect = Some(defect);
    }
    Ok(record)
}

/// `|| |Psi| - |phi| ||_2` for every snapshot.
pub fn modulus_deviation<T: Real>(
    record: &PropagationRecord<T>,
    reference: &ComplexField<T>,
    grid: &Grid<T>,
) -> Vec<T> {
    let r = reference.modulus();
    record
        .snapshots
        .iter()
        .map(|f| {
            let sq: Vec<T> = f
                .values()
                .iter()
                .zip(&r)
                .map(|(z, m)| {
                    let d = z.norm() - *m;
                    d * d
                })
                .collect();
            grid.integrate(&sq).sqrt()
        })
        .collect()
}

/// Least-squares slope of `ln deviation` against `z` over the samples where
/// the deviation lies between `10 max(initial, resolution)` and `ceiling`.
pub fn growth_from_series<T: Real>(
    z: &[T],
    deviation: &[T],
    resolution: T,
    ceiling: T,
) -> Result<T> {
    let Some(&d0) = deviation.first() else {
        return Err(Error::NoGrowthWindow);
    };
    let floor = d0.max(resolution) * lit(10.0);
    let start = deviation
        .iter()
        .position(|&d| d >= floor)
        .ok_or(Error::NoGrowthWindow)?;
    let stop = deviation[start..]
        .iter()
        .position(|&d| d > ceiling)
        .map_or(deviation.len(), |k| start + k);
    let window: Vec<(T, T)> = (start..stop).map(|k| (z[k], deviation[k].ln())).collect();
    if window.len() < 2 {
        return Err(Error::NoGrowthWindow);
    }
    let n: T = lit(window.len() as f64);
    let (sx, sy) = window
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = window
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(x, y)| {
            (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
        });
    if sxx == T::zero() {
        return Err(Error::NoGrowthWindow);
    }
    Ok(sxy / sxx)
}

/// Relative size below which a deviation is not resolved by the integrator.
pub const DEVIATION_RESOLUTION: f64 = 1e-6;

/// Exponential growth rate of `|| |Psi| - |phi| ||_2` in the linear regime,
/// where the deviation is between 10 times its initial value and
/// `0.1 max|phi|`.
///
/// Deviations below `DEVIATION_RESOLUTION ||phi||_2` count as zero, so an
/// unperturbed stationary run has no growth window.
pub fn measure_growth<T: Real>(
    record: &PropagationRecord<T>,
    reference: &ComplexField<T>,
    grid: &Grid<T>,
) -> Result<T> {
    let deviation = modulus_deviation(record, reference, grid);
    let resolution = reference.l2_norm(grid) * lit(DEVIATION_RESOLUTION);
    growth_from_series(
        &record.z_samples,
        &deviation,
        resolution,
        reference.sup_norm() * lit(0.1),
    )
}

/// [`measure_growth`] with the stable case mapped to zero.
pub fn growth_rate_or_zero<T: Real>(
    record: &PropagationRecord<T>,
    reference: &ComplexField<T>,
    grid: &Grid<T>,
) -> Result<T> {
    match measure_growth(record, reference, grid) {
        Err(Error::NoGrowthWindow) => Ok(T::zero()),
        other => other,
    }
}
