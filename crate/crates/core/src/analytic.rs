//! Model parameters, the two closed-form soliton families and their checks.
//!
//! The stationary equation is
//! `phi'' + (V + iW) phi + g1 |phi|^2 phi + g2 |phi|^{2 kappa} phi = lambda phi`
//! with `W = 2b tanh x` and a real part that depends on the family:
//!
//! | family   | `V(x)`                                        | `phi(x)`                              |
//! |----------|-----------------------------------------------|---------------------------------------|
//! | Class I  | `-a(a+1) sech^2 x - V1 sech^{2 kappa} x`      | `Phi0 sech x e^{i mu x}`              |
//! | Class II | `-a(a+1) sech^2 x - V1 sech^{2/kappa} x`      | `Phi0 sech^{1/kappa} x e^{i mu x}`    |

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interior_derivative, ComplexField, Grid, Order};
use crate::scalar::{lit, ln_sech, modulus_pow, rel_diff, sech_pow, to_f64, Real};

/// Boundary modulus above which a field is considered contaminated by wrap-around.
pub const BOUNDARY_MODULUS_LIMIT: f64 = 1e-10;

/// Relative tolerance for accepting over-specified constraint sets.
pub const CONSTRAINT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "class-i")]
    ClassI,
    #[serde(rename = "class-ii")]
    ClassII,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::ClassI => "class-i",
            Family::ClassII => "class-ii",
        })
    }
}

/// Physical parameters of the competing-nonlinearity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModelSpec<T: Real> {
    /// Rosen-Morse depth parameter.
    pub a: T,
    /// Gain/loss strength.
    pub b: T,
    /// Strength of the extra `sech` power well.
    pub v1: T,
    /// Exponent of the competing nonlinearity.
    pub kappa: T,
    /// Cubic strength.
    pub g1: T,
    /// Power-law strength.
    pub g2: T,
    pub family: Family,
}

impl<T: Real> ModelSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.v1, self.kappa, self.g1, self.g2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "model parameters must be finite".into(),
            ));
        }
        if self.kappa == T::zero() {
            return Err(Error::KappaZero);
        }
        Ok(())
    }

    /// Power of `sech` in the extra well: `2 kappa` (Class I) or `2/kappa` (Class II).
    pub fn well_exponent(&self) -> T {
        let two: T = lit(2.0);
        match self.family {
            Family::ClassI => two * self.kappa,
            Family::ClassII => two / self.kappa,
        }
    }

    /// `V(x)`.
    pub fn real_potential(&self, x: T) -> T {
        let s2 = sech_pow(x, lit(2.0));
        -self.a * (self.a + T::one()) * s2 - self.v1 * sech_pow(x, self.well_exponent())
    }

    /// `W(x) = 2b tanh x`.
    pub fn gain_loss(&self, x: T) -> T {
        lit::<T>(2.0) * self.b * x.tanh()
    }

    /// Local nonlinear coefficient `g1 |u|^2 + g2 |u|^{2 kappa}` from the modulus.
    pub fn nonlinear_coefficient(&self, modulus: T) -> T {
        self.g1 * modulus * modulus + self.g2 * modulus_pow(modulus, lit::<T>(2.0) * self.kappa)
    }
}

/// Amplitude, phase slope and propagation constant of a closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StationarySolution<T: Real> {
    pub phi0: T,
    pub mu: T,
    pub lambda: T,
    pub family: Family,
    /// Power of `sech` in the profile: 1 (Class I) or `1/kappa` (Class II).
    pub sech_power: T,
}

impl<T: Real> StationarySolution<T> {
    /// Closed-form transverse power flow `mu Phi0^2 sech^{2p} x`.
    ///
    /// Equals `b Phi0^2 sech^2 x` for Class I and `b kappa Phi0^2 sech^{2/kappa} x`
    /// for Class II.
    pub fn closed_form_power_flow(&self, grid: &Grid<T>) -> Vec<T> {
        let two: T = lit(2.0);
        grid.points()
            .iter()
            .map(|&x| self.mu * self.phi0 * self.phi0 * sech_pow(x, two * self.sech_power))
            .collect()
    }
}

/// Samples of `V` and `W` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential<T: Real> {
    pub v: Vec<T>,
    pub w: Vec<T>,
}

pub fn sample_potential<T: Real>(spec: &ModelSpec<T>, grid: &Grid<T>) -> Potential<T> {
    let v = grid
        .points()
        .iter()
        .map(|&x| spec.real_potential(x))
        .collect();
    let w = grid.points().iter().map(|&x| spec.gain_loss(x)).collect();
    Potential { v, w }
}

/// Partial parameter set handed to [`solve_constraints`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct Knowns<T: Real> {
    pub a: Option<T>,
    pub b: Option<T>,
    pub kappa: Option<T>,
    pub v1: Option<T>,
    pub g1: Option<T>,
    pub g2: Option<T>,
    pub phi0: Option<T>,
}

impl<T: Real> Knowns<T> {
    /// Class I sweep normalization: `Phi0 = 1` with `a, b, V1, g2, kappa` given.
    pub fn class_i_normalized(a: T, b: T, v1: T, g2: T, kappa: T) -> Self {
        Self {
            a: Some(a),
            b: Some(b),
            kappa: Some(kappa),
            v1: Some(v1),
            g2: Some(g2),
            phi0: Some(T::one()),
            g1: None,
        }
    }

    /// Class II canonical mode: `a, b, g1, g2, kappa` given.
    pub fn class_ii_couplings(a: T, b: T, g1: T, g2: T, kappa: T) -> Self {
        Self {
            a: Some(a),
            b: Some(b),
            kappa: Some(kappa),
            g1: Some(g1),
            g2: Some(g2),
            v1: None,
            phi0: None,
        }
    }
}

fn required<T: Real>(value: Option<T>, name: &str) -> Result<T> {
    match value {
        Some(v) if v.is_finite() => Ok(v),
        Some(_) => Err(Error::InvalidParameter(format!("{name} must be finite"))),
        None => Err(Error::UnderDetermined(format!("{name} is required"))),
    }
}

fn positive<T: Real>(value: T, relation: &'static str) -> Result<T> {
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InfeasibleAmplitude {
            relation,
            value: to_f64(value),
        })
    }
}

fn check<T: Real>(lhs: T, rhs: T, relation: &'static str) -> Result<()> {
    let tol = lit::<T>(CONSTRAINT_RTOL).max(lit::<T>(64.0) * T::epsilon());
    let defect = rel_diff(lhs, rhs);
    if defect <= tol {
        Ok(())
    } else {
        Err(Error::OverDetermined {
            relation,
            defect: to_f64(defect),
        })
    }
}

/// Resolves one product relation `coef * Phi0^power = rhs` shared by both
/// families (Class I: `V1 = g2 Phi0^{2 kappa}`; Class II: `V1 = g1 Phi0^2`).
///
/// Returns `(coef, rhs)`, filling in whichever is missing.
fn close_product<T: Real>(
    coef: Option<T>,
    rhs: Option<T>,
    amplitude_power: T,
    relation: &'static str,
    coef_name: &str,
    rhs_name: &str,
) -> Result<(T, T)> {
    match (coef, rhs) {
        (Some(c), Some(r)) => {
            check(c * amplitude_power, r, relation)?;
            Ok((c, r))
        }
        (Some(c), None) => Ok((c, c * amplitude_power)),
        (None, Some(r)) => Ok((r / amplitude_power, r)),
        (None, None) => Err(Error::UnderDetermined(format!(
            "one of {coef_name} / {rhs_name} is required to close {relation}"
        ))),
    }
}

/// Completes a parameter set so that it admits the closed-form solution of
/// the requested family.
///
/// Class I relations: `Phi0^{2 kappa} = V1/g2`, `Phi0^2 = (a^2+a+2)/g1`,
/// `mu = b`, `lambda = 1 - mu^2`. Class II relations: `Phi0^2 = V1/g1`,
/// `Phi0^{2 kappa} = (a(a+1) + 1/kappa + 1/kappa^2)/g2`, `mu = b kappa`,
/// `lambda = 1/kappa^2 - mu^2`.
///
/// `Phi0` is fixed first (given directly, or from whichever even-power
/// relation is fully known) and taken as the positive root. Remaining
/// unknowns follow from the product form of each relation; knowns beyond
/// what is needed are accepted only if consistent to [`CONSTRAINT_RTOL`].
pub fn solve_constraints<T: Real>(
    family: Family,
    knowns: &Knowns<T>,
) -> Result<(ModelSpec<T>, StationarySolution<T>)> {
    let a = required(knowns.a, "a")?;
    let b = required(knowns.b, "b")?;
    let kappa = required(knowns.kappa, "kappa")?;
    if kappa == T::zero() {
        return Err(Error::KappaZero);
    }
    let two: T = lit(2.0);
    let two_kappa = two * kappa;

    let (v1, g1, g2, phi0, mu, lambda, sech_power) = match family {
        Family::ClassI => {
            let cubic_rhs = a * a + a + two;
            let phi0 = if let Some(p) = knowns.phi0 {
                positive(p, "Phi0 > 0")?
            } else if let Some(g1) = knowns.g1 {
                positive(cubic_rhs / g1, "Phi0^2 = (a^2+a+2)/g1")?.sqrt()
            } else if let (Some(v1), Some(g2)) = (knowns.v1, knowns.g2) {
                let ratio = positive(v1 / g2, "Phi0^{2 kappa} = V1/g2")?;
                ratio.powf(T::one() / two_kappa)
            } else {
                return Err(Error::UnderDetermined(
                    "Class I needs phi0, g1, or both v1 and g2 to fix the amplitude".into(),
                ));
            };
            let p2 = phi0 * phi0;
            let g1 = match knowns.g1 {
                Some(g1) => {
                    check(g1 * p2, cubic_rhs, "Phi0^2 = (a^2+a+2)/g1")?;
                    g1
                }
                None => cubic_rhs / p2,
            };
            let (g2, v1) = close_product(
                knowns.g2,
                knowns.v1,
                phi0.powf(two_kappa),
                "Phi0^{2 kappa} = V1/g2",
                "g2",
                "v1",
            )?;
            if g2 != T::zero() {
                positive(v1 / g2, "Phi0^{2 kappa} = V1/g2")?;
            }
            let mu = b;
            (v1, g1, g2, phi0, mu, T::one() - mu * mu, T::one())
        }
        Family::ClassII => {
            let inv = T::one() / kappa;
            let power_rhs = a * (a + T::one()) + inv + inv * inv;
            let phi0 = if let Some(p) = knowns.phi0 {
                positive(p, "Phi0 > 0")?
            } else if let Some(g2) = knowns.g2 {
                let ratio = positive(
                    power_rhs / g2,
                    "Phi0^{2 kappa} = (a(a+1) + 1/kappa + 1/kappa^2)/g2",
                )?;
                ratio.powf(T::one() / two_kappa)
            } else if let (Some(v1), Some(g1)) = (knowns.v1, knowns.g1) {
                positive(v1 / g1, "Phi0^2 = V1/g1")?.sqrt()
            } else {
                return Err(Error::UnderDetermined(
                    "Class II needs phi0, g2, or both v1 and g1 to fix the amplitude".into(),
                ));
            };
            let g2 = match knowns.g2 {
                Some(g2) => {
                    check(
                        g2 * phi0.powf(two_kappa),
                        power_rhs,
                        "Phi0^{2 kappa} = (a(a+1) + 1/kappa + 1/kappa^2)/g2",
                    )?;
                    g2
                }
                None => power_rhs / phi0.powf(two_kappa),
            };
            let (g1, v1) = close_product(
                knowns.g1,
                knowns.v1,
                phi0 * phi0,
                "Phi0^2 = V1/g1",
                "g1",
                "v1",
            )?;
            if g1 != T::zero() {
                positive(v1 / g1, "Phi0^2 = V1/g1")?;
            }
            let mu = b * kappa;
            (v1, g1, g2, phi0, mu, inv * inv - mu * mu, inv)
        }
    };

    let spec = ModelSpec {
        a,
        b,
        v1,
        kappa,
        g1,
        g2,
        family,
    };
    spec.validate()?;
    let sol = StationarySolution {
        phi0,
        mu,
        lambda,
        family,
        sech_power,
    };
    Ok((spec, sol))
}

/// Samples `Phi0 sech^p(x) e^{i mu x}` on the grid.
pub fn evaluate_solution<T: Real>(
    sol: &StationarySolution<T>,
    grid: &Grid<T>,
) -> Result<ComplexField<T>> {
    if !(sol.sech_power > T::zero()) {
        return Err(Error::NonLocalizable {
            kappa: to_f64(T::one() / sol.sech_power),
        });
    }
    Ok(ComplexField::from_fn(grid, |x| {
        let amplitude = sol.phi0 * (sol.sech_power * ln_sech(x)).exp();
        Complex::from_polar(amplitude, sol.mu * x)
    }))
}

/// Interior sup norm of the stationary-equation defect plus a wrap-around
/// diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryResidual<T: Real> {
    /// `max |LHS - RHS|` over the interior points.
    pub sup_norm: T,
    /// `max(|field(-L)|, |field(x_{N-1})|)`.
    pub boundary_modulus: T,
}

impl<T: Real> StationaryResidual<T> {
    /// Advisory: the field has not decayed at the edges, so periodic
    /// differentiation sees a jump there.
    pub fn grid_too_coarse(&self) -> bool {
        self.boundary_modulus > lit(BOUNDARY_MODULUS_LIMIT)
    }
}

/// Pointwise defect of the stationary equation.
pub fn stationary_defect<T: Real>(
    field: &ComplexField<T>,
    spec: &ModelSpec<T>,
    lambda: T,
    grid: &Grid<T>,
) -> Result<ComplexField<T>> {
    if field.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: field.len(),
        });
    }
    let pot = sample_potential(spec, grid);
    let dxx = interior_derivative(field, grid, Order::Second);
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(j, &phi)| {
            let local = Complex::new(
                pot.v[j] + spec.nonlinear_coefficient(phi.norm()) - lambda,
                pot.w[j],
            );
            dxx[j] + local * phi
        })
        .collect();
    ComplexField::new(grid, values)
}

/// Sup norm of the stationary-equation defect over the interior points.
pub fn stationary_residual<T: Real>(
    field: &ComplexField<T>,
    spec: &ModelSpec<T>,
    lambda: T,
    grid: &Grid<T>,
) -> Result<StationaryResidual<T>> {
    let defect = stationary_defect(field, spec, lambda, grid)?;
    let sup_norm = defect
        .values()
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.is_interior(*j))
        .fold(T::zero(), |m, (_, z)| m.max(z.norm()));
    let boundary_modulus = field[0].norm().max(field[grid.len() - 1].norm());
    Ok(StationaryResidual {
        sup_norm,
        boundary_modulus,
    })
}

/// Transverse power flow `S = (i/2)(phi phi_x^* - phi^* phi_x) = Im(phi^* phi_x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowProfile<T: Real> {
    /// Values on every grid point; only interior points are accurate for
    /// fields that are not periodic on the grid.
    pub values: Vec<T>,
}

impl<T: Real> PowerFlowProfile<T> {
    /// Sup-norm distance to `reference` over the interior points.
    pub fn interior_error(&self, reference: &[T], grid: &Grid<T>) -> T {
        self.values
            .iter()
            .zip(reference)
            .enumerate()
            .filter(|(j, _)| grid.is_interior(*j))
            .fold(T::zero(), |m, (_, (a, b))| m.max((*a - *b).abs()))
    }
}

pub fn power_flow<T: Real>(field: &ComplexField<T>, grid: &Grid<T>) -> PowerFlowProfile<T> {
    let dx = interior_derivative(field, grid, Order::First);
    let values = field
        .values()
        .iter()
        .zip(dx.values())
        .map(|(phi, d)| (phi.conj() * d).im)
        .collect();
    PowerFlowProfile { values }
}
