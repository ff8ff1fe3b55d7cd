//! Parameter scans, eigenvalue tracking and detection of pair collisions.
//!
//! Every parameter value is analyzed independently (in parallel); tracking and
//! detection then run serially over the ordered results.

use ndarray::Array1;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{solve_constraints, Family, Knowns, ModelSpec, StationarySolution};
use crate::eigen::{analyze, EigenConfig, StabilityReport};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    A,
    B,
    Kappa,
    V1,
    G1,
    G2,
    Phi0,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::A => "a",
            SweepParameter::B => "b",
            SweepParameter::Kappa => "kappa",
            SweepParameter::V1 => "v1",
            SweepParameter::G1 => "g1",
            SweepParameter::G2 => "g2",
            SweepParameter::Phi0 => "phi0",
        }
    }

    /// Copy of `knowns` with this parameter set to `value`.
    pub fn apply<T: Real>(&self, knowns: &Knowns<T>, value: T) -> Knowns<T> {
        let mut k = *knowns;
        let slot = match self {
            SweepParameter::A => &mut k.a,
            SweepParameter::B => &mut k.b,
            SweepParameter::Kappa => &mut k.kappa,
            SweepParameter::V1 => &mut k.v1,
            SweepParameter::G1 => &mut k.g1,
            SweepParameter::G2 => &mut k.g2,
            SweepParameter::Phi0 => &mut k.phi0,
        };
        *slot = Some(value);
        k
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// `|eta|` below which a pair has collided at the origin.
    pub collision_tol: f64,
    /// Steps after the collision in which the emerging pair may appear.
    pub lookahead: usize,
    /// Largest eigenvalue displacement accepted as the same mode between steps.
    pub max_jump: f64,
    /// Distances closer than this are ties, settled by eigenvector overlap.
    pub tie_tol: f64,
    /// Re-run each detected bracket at finer parameter resolution.
    pub refine: bool,
    /// Resolution multiplier for refinement.
    pub refine_factor: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            collision_tol: 5e-3,
            lookahead: 2,
            max_jump: 0.5,
            tie_tol: 1e-9,
            refine: false,
            refine_factor: 4,
        }
    }
}

/// `steps` evenly spaced values from `start` to `end` inclusive.
pub fn linspace<T: Real>(start: T, end: T, steps: usize) -> Vec<T> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let last: T = lit((steps - 1) as f64);
            (0..steps)
                .map(|i| start + (end - start) * lit::<T>(i as f64) / last)
                .collect()
        }
    }
}

/// A discrete mode at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode<T: Real> {
    pub eta: Complex<T>,
    /// Unit eigenvector, used to settle matching ties.
    pub vector: Option<Array1<Complex<T>>>,
}

impl<T: Real> Mode<T> {
    pub fn bare(eta: Complex<T>) -> Self {
        Self { eta, vector: None }
    }
}

#[derive(Debug, Clone)]
pub struct PointData<T: Real> {
    pub spec: ModelSpec<T>,
    pub solution: StationarySolution<T>,
    pub report: StabilityReport<T>,
    pub modes: Vec<Mode<T>>,
}

#[derive(Debug, Clone)]
pub struct SweepPoint<T: Real> {
    pub value: T,
    pub outcome: Result<PointData<T>>,
}

/// Path of one discrete mode: `(point index, eta)` with increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Trajectory<T: Real> {
    pub path: Vec<(usize, Complex<T>)>,
}

impl<T: Real> Trajectory<T> {
    pub fn at(&self, step: usize) -> Option<Complex<T>> {
        self.path.iter().find(|(s, _)| *s == step).map(|(_, z)| *z)
    }

    pub fn first_step(&self) -> usize {
        self.path[0].0
    }

    pub fn last_step(&self) -> usize {
        self.path[self.path.len() - 1].0
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult<T: Real> {
    pub family: Family,
    pub parameter: SweepParameter,
    pub values: Vec<T>,
    pub points: Vec<SweepPoint<T>>,
    pub trajectories: Vec<Trajectory<T>>,
}

impl<T: Real> SweepResult<T> {
    pub fn reports(&self) -> Vec<Option<&StabilityReport<T>>> {
        self.points
            .iter()
            .map(|p| p.outcome.as_ref().ok().map(|d| &d.report))
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }

    fn mode_sets(&self) -> Vec<Option<Vec<Mode<T>>>> {
        self.points
            .iter()
            .map(|p| p.outcome.as_ref().ok().map(|d| d.modes.clone()))
            .collect()
    }
}

/// Full pipeline for one parameter value.
pub fn analyze_point<T: Real>(
    family: Family,
    knowns: &Knowns<T>,
    grid: &Grid<T>,
    config: &EigenConfig,
) -> Result<PointData<T>> {
    let (spec, solution) = solve_constraints(family, knowns)?;
    let analysis = analyze(&spec, &solution, grid, config)?;
    let modes = analysis
        .discrete_pairs()
        .into_iter()
        .map(|p| Mode {
            eta: p.eta,
            vector: Some(p.vector.clone()),
        })
        .collect();
    Ok(PointData {
        spec,
        solution,
        report: analysis.report,
        modes,
    })
}

/// Runs the pipeline at each of `values` of `parameter`, then links discrete
/// modes into trajectories. Failures are recorded per point.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep<T: Real>(
    family: Family,
    base: &Knowns<T>,
    parameter: SweepParameter,
    values: &[T],
    grid: &Grid<T>,
    eigen: &EigenConfig,
    config: &SweepConfig,
) -> SweepResult<T> {
    let points: Vec<SweepPoint<T>> = values
        .par_iter()
        .map(|&value| SweepPoint {
            value,
            outcome: analyze_point(family, &parameter.apply(base, value), grid, eigen),
        })
        .collect();
    let mut result = SweepResult {
        family,
        parameter,
        values: values.to_vec(),
        points,
        trajectories: Vec::new(),
    };
    result.trajectories = track(&result.mode_sets(), config);
    result
}

fn overlap<T: Real>(a: &Mode<T>, b: &Mode<T>) -> T {
    match (&a.vector, &b.vector) {
        (Some(u), Some(v)) if u.len() == v.len() => u
            .iter()
            .zip(v.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
                acc + x.conj() * y
            })
            .norm(),
        _ => T::zero(),
    }
}

/// One-to-one assignment between consecutive mode sets: nearest first, ties
/// (distances within `tie_tol`) resolved by largest overlap, jumps beyond
/// `max_jump` left unmatched.
pub fn match_modes<T: Real>(
    prev: &[Mode<T>],
    next: &[Mode<T>],
    config: &SweepConfig,
) -> Vec<(usize, usize)> {
    let max_jump: T = lit(config.max_jump);
    let tie: T = lit(config.tie_tol);
    let mut candidates: Vec<(T, T, usize, usize)> = Vec::new();
    for (i, a) in prev.iter().enumerate() {
        for (j, b) in next.iter().enumerate() {
            let d = (a.eta - b.eta).norm();
            if d <= max_jump {
                candidates.push((d, overlap(a, b), i, j));
            }
        }
    }
    candidates.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut used_prev = vec![false; prev.len()];
    let mut used_next = vec![false; next.len()];
    let mut out = Vec::new();
    let mut k = 0;
    while k < candidates.len() {
        let (d, _, i, j) = candidates[k];
        if used_prev[i] || used_next[j] {
            k += 1;
            continue;
        }
        // best overlap among free candidates tied with the current distance
        let mut best = (candidates[k].1, i, j);
        for c in candidates[k + 1..].iter().take_while(|c| c.0 - d <= tie) {
            if !used_prev[c.2] && !used_next[c.3] && c.1 > best.0 {
                best = (c.1, c.2, c.3);
            }
        }
        used_prev[best.1] = true;
        used_next[best.2] = true;
        out.push((best.1, best.2));
        if best.1 == i && best.2 == j {
            k += 1;
        }
    }
    out.sort();
    out
}

/// Links modes of consecutive successful points into trajectories. A failed
/// point ends every open trajectory.
pub fn track<T: Real>(steps: &[Option<Vec<Mode<T>>>], config: &SweepConfig) -> Vec<Trajectory<T>> {
    let mut done: Vec<Trajectory<T>> = Vec::new();
    // (trajectory, index of its mode in the previous step)
    let mut open: Vec<(Trajectory<T>, usize)> = Vec::new();
    let mut prev: Option<&Vec<Mode<T>>> = None;
    for (s, step) in steps.iter().enumerate() {
        let Some(modes) = step else {
            done.extend(open.drain(..).map(|(t, _)| t));
            prev = None;
            continue;
        };
        let links = match prev {
            Some(p) => match_modes(p, modes, config),
            None => Vec::new(),
        };
        let mut next_open: Vec<(Trajectory<T>, usize)> = Vec::new();
        let mut continued = vec![false; modes.len()];
        for (mut traj, last) in open.drain(..) {
            if let Some(&(_, j)) = links.iter().find(|(i, _)| *i == last) {
                traj.path.push((s, modes[j].eta));
                continued[j] = true;
                next_open.push((traj, j));
            } else {
                done.push(traj);
            }
        }
        for (j, m) in modes.iter().enumerate() {
            if !continued[j] {
                next_open.push((
                    Trajectory {
                        path: vec![(s, m.eta)],
                    },
                    j,
                ));
            }
        }
        open = next_open;
        prev = Some(modes);
    }
    done.extend(open.into_iter().map(|(t, _)| t));
    done.sort_by_key(|t| t.first_step());
    done
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionKind {
    /// A real pair collides at the origin and an imaginary pair emerges.
    RealToImaginary,
    /// An imaginary pair collides at the origin and a real pair emerges.
    ImaginaryToReal,
}

/// A pair collision at the origin bracketed between two parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BifurcationEvent<T: Real> {
    pub kind: TransitionKind,
    /// Last parameter value (in sweep order) before the collision.
    pub param_low: T,
    /// First parameter value (in sweep order) with the emerging pair.
    pub param_high: T,
    pub colliding_pair_before: [Complex<T>; 2],
    pub emerging_pair_after: [Complex<T>; 2],
}

#[derive(Clone, Copy, PartialEq)]
enum State {
    /// On the positive real half-axis (after rotation).
    Positive,
    /// On the positive imaginary half-axis (after rotation).
    Upper,
    Zero,
    Other,
}

fn state<T: Real>(z: Complex<T>, tol: T) -> State {
    if z.norm() < tol {
        State::Zero
    } else if z.im.abs() < tol && z.re > tol {
        State::Positive
    } else if z.re.abs() < tol && z.im > tol {
        State::Upper
    } else {
        State::Other
    }
}

/// Detection on eigenvalues multiplied by `rotation`, so that one routine
/// handles both transition directions.
fn detect_rotated<T: Real>(
    values: &[T],
    trajectories: &[Trajectory<T>],
    rotation: Complex<T>,
    kind: TransitionKind,
    config: &SweepConfig,
) -> Vec<BifurcationEvent<T>> {
    let tol: T = lit(config.collision_tol);
    let unrotate = rotation.inv();
    let rotated: Vec<Vec<(usize, Complex<T>)>> = trajectories
        .iter()
        .map(|t| t.path.iter().map(|&(s, z)| (s, z * rotation)).collect())
        .collect();
    let mut used = vec![false; rotated.len()];
    let mut events = Vec::new();
    for path in &rotated {
        // collision: |eta| falls monotonically along a positive run into the zero disc
        let Some(c) = (1..path.len()).find(|&k| {
            state(path[k].1, tol) == State::Zero && state(path[k - 1].1, tol) == State::Positive
        }) else {
            continue;
        };
        let mut run_start = c - 1;
        while run_start > 0
            && state(path[run_start - 1].1, tol) == State::Positive
            && path[run_start - 1].0 + 1 == path[run_start].0
        {
            run_start -= 1;
        }
        let monotone = (run_start..c).all(|k| path[k + 1].1.norm() <= path[k].1.norm());
        if !monotone || path[c].0 != path[c - 1].0 + 1 {
            continue;
        }
        let before_step = path[c - 1].0;
        let collision_step = path[c].0;
        let before = path[c - 1].1;

        // emerging pair: newly on the positive imaginary axis within the lookahead, growing
        let mut found: Option<(usize, usize, Complex<T>)> = None;
        for e in collision_step..=collision_step + config.lookahead {
            for (q, other) in rotated.iter().enumerate() {
                if used[q] || found.is_some() {
                    continue;
                }
                let Some(pos) = other.iter().position(|&(s, _)| s == e) else {
                    continue;
                };
                let z = other[pos].1;
                if state(z, tol) != State::Upper {
                    continue;
                }
                let was_upper = other[..pos]
                    .iter()
                    .any(|&(s, w)| s <= before_step && state(w, tol) == State::Upper);
                let growing = match other.get(pos + 1) {
                    Some(&(s, w)) if s == e + 1 => w.im >= z.im,
                    _ => true,
                };
                if !was_upper && growing {
                    found = Some((q, e, z));
                }
            }
            if found.is_some() {
                break;
            }
        }
        if let Some((q, e, z)) = found {
            used[q] = true;
            let b = before * unrotate;
            let a = z * unrotate;
            events.push(BifurcationEvent {
                kind,
                param_low: values[before_step],
                param_high: values[e],
                colliding_pair_before: [b, -b],
                emerging_pair_after: [a, -a],
            });
        }
    }
    events
}

/// Transitions in `trajectories` (indices into `values`) under the rule:
/// a tracked pair on one axis shrinks monotonically into the disc
/// `|eta| < collision_tol`, and within `lookahead` steps a pair appears on
/// the other axis with growing modulus.
pub fn detect_events<T: Real>(
    values: &[T],
    trajectories: &[Trajectory<T>],
    config: &SweepConfig,
) -> Vec<BifurcationEvent<T>> {
    let one = Complex::new(T::one(), T::zero());
    let minus_i = Complex::new(T::zero(), -T::one());
    let mut events = detect_rotated(
        values,
        trajectories,
        one,
        TransitionKind::RealToImaginary,
        config,
    );
    events.extend(detect_rotated(
        values,
        trajectories,
        minus_i,
        TransitionKind::ImaginaryToReal,
        config,
    ));
    events.sort_by(|a, b| {
        let key = |e: &BifurcationEvent<T>| values.iter().position(|&v| v == e.param_low);
        key(a).cmp(&key(b))
    });
    events
}

pub fn detect_bifurcation<T: Real>(
    sweep: &SweepResult<T>,
    config: &SweepConfig,
) -> Vec<BifurcationEvent<T>> {
    detect_events(&sweep.values, &sweep.trajectories, config)
}

/// Re-runs the bracket of `event` with `refine_factor` times the original
/// resolution and returns the sharpened event, if the transition is found again.
#[allow(clippy::too_many_arguments)]
pub fn refine_event<T: Real>(
    family: Family,
    base: &Knowns<T>,
    parameter: SweepParameter,
    event: &BifurcationEvent<T>,
    original_steps_in_bracket: usize,
    grid: &Grid<T>,
    eigen: &EigenConfig,
    config: &SweepConfig,
) -> Result<Option<BifurcationEvent<T>>> {
    if config.refine_factor == 0 {
        return Err(Error::InvalidParameter(
            "refine_factor must be positive".into(),
        ));
    }
    let intervals = original_steps_in_bracket.max(1) * config.refine_factor;
    let values = linspace(event.param_low, event.param_high, intervals + 1);
    let sweep = run_sweep(family, base, parameter, &values, grid, eigen, config);
    Ok(detect_bifurcation(&sweep, config)
        .into_iter()
        .find(|e| e.kind == event.kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn config() -> SweepConfig {
        SweepConfig::default()
    }

    fn synthetic(ts: &[f64], f: impl Fn(f64) -> Vec<C>) -> Vec<Option<Vec<Mode<f64>>>> {
        ts.iter()
            .map(|&t| Some(f(t).into_iter().map(Mode::bare).collect()))
            .collect()
    }

    fn collision(t: f64) -> Vec<C> {
        let mut v = vec![C::new(0.0, 0.0)];
        if t < 0.05 {
            v.push(C::new(0.05 - t, 0.0));
            v.push(C::new(t - 0.05, 0.0));
        } else {
            v.push(C::new(0.0, t - 0.05));
            v.push(C::new(0.0, 0.05 - t));
        }
        v
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.03_f64, 0.09, 13);
        assert_eq!(v.len(), 13);
        assert_eq!(v[0], 0.03);
        assert!((v[12] - 0.09).abs() < 1e-15);
        assert!((v[1] - 0.035).abs() < 1e-15);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }

    #[test]
    fn parameter_apply() {
        let k = Knowns::class_i_normalized(0.1, 0.2, -4.0, -4.0, 3.0);
        assert_eq!(SweepParameter::A.apply(&k, 0.5).a, Some(0.5));
        assert_eq!(SweepParameter::G1.apply(&k, 2.0).g1, Some(2.0));
        assert_eq!(SweepParameter::B.apply(&k, 0.7).kappa, Some(3.0));
    }

    #[test]
    fn matching_prefers_nearest_and_is_bijective() {
        let prev = [Mode::bare(C::new(1.0, 0.0)), Mode::bare(C::new(-1.0, 0.0))];
        let next = [Mode::bare(C::new(-0.9, 0.0)), Mode::bare(C::new(0.9, 0.0))];
        assert_eq!(match_modes(&prev, &next, &config()), vec![(0, 1), (1, 0)]);
        let far = [Mode::bare(C::new(5.0, 0.0))];
        assert!(match_modes(&prev, &far, &config()).is_empty());
    }

    #[test]
    fn ties_are_broken_by_overlap() {
        let u = |a: f64, b: f64| Some(ndarray::array![C::new(a, 0.0), C::new(b, 0.0)]);
        let prev = [Mode {
            eta: C::new(0.0, 0.0),
            vector: u(1.0, 0.0),
        }];
        let next = [
            Mode {
                eta: C::new(0.1, 0.0),
                vector: u(0.0, 1.0),
            },
            Mode {
                eta: C::new(-0.1, 0.0),
                vector: u(1.0, 0.0),
            },
        ];
        assert_eq!(match_modes(&prev, &next, &config()), vec![(0, 1)]);
    }

    #[test]
    fn single_step_has_no_long_trajectories() {
        let steps = synthetic(&[0.0], collision);
        let t = track(&steps, &config());
        assert!(t.iter().all(|t| t.path.len() == 1));
    }

    #[test]
    fn constant_spectrum_has_no_events() {
        let ts = linspace(0.0, 0.1, 11);
        let steps = synthetic(&ts, |_| {
            vec![C::new(0.0, 0.0), C::new(0.3, 0.0), C::new(-0.3, 0.0)]
        });
        let t = track(&steps, &config());
        assert_eq!(t.len(), 3);
        assert!(t.iter().all(|t| t.path.len() == 11));
        assert!(detect_events(&ts, &t, &config()).is_empty());
    }

    #[test]
    fn constructed_collision_gives_one_event() {
        let ts = linspace(0.0, 0.1, 21);
        let steps = synthetic(&ts, collision);
        let t = track(&steps, &config());
        let events = detect_events(&ts, &t, &config());
        assert_eq!(events.len(), 1, "{events:?}");
        let e = events[0];
        assert_eq!(e.kind, TransitionKind::RealToImaginary);
        assert!(e.param_low <= 0.05 && e.param_high >= 0.05, "{e:?}");
        assert!(e.param_high - e.param_low <= 0.02 + 1e-12);
        assert!(e.colliding_pair_before[0].im.abs() < 1e-12);
        assert!(e.emerging_pair_after[0].re.abs() < 1e-12);
        assert_eq!(e.colliding_pair_before[1], -e.colliding_pair_before[0]);
    }

    #[test]
    fn reversed_sweep_swaps_bracket() {
        let ts = linspace(0.0, 0.1, 21);
        let forward = detect_events(
            &ts,
            &track(&synthetic(&ts, collision), &config()),
            &config(),
        );
        let back_ts: Vec<f64> = ts.iter().rev().copied().collect();
        let backward = detect_events(
            &back_ts,
            &track(&synthetic(&back_ts, collision), &config()),
            &config(),
        );
        assert_eq!(forward.len(), 1);
        assert_eq!(backward.len(), 1);
        assert_eq!(backward[0].kind, TransitionKind::ImaginaryToReal);
        assert_eq!(backward[0].param_low, forward[0].param_high);
        assert_eq!(backward[0].param_high, forward[0].param_low);
    }

    #[test]
    fn missing_mode_at_collision_is_tolerated_by_lookahead() {
        let ts = linspace(0.0, 0.1, 21);
        let steps = synthetic(&ts, |t| {
            let mut v = collision(t);
            // discretization loses the emerging pair right after the collision
            if (t - 0.055).abs() < 1e-9 {
                v.truncate(1);
            }
            v
        });
        let events = detect_events(&ts, &track(&steps, &config()), &config());
        assert_eq!(events.len(), 1, "{events:?}");
        assert!(events[0].param_high >= 0.06 - 1e-12);
    }

    #[test]
    fn failed_point_breaks_trajectories() {
        let mut steps = synthetic(&[0.0_f64, 0.1, 0.2], |_| vec![C::new(0.3, 0.0)]);
        steps[1] = None;
        let t = track(&steps, &config());
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn sweep_records_failures_and_lambda() {
        let g = Grid::new(128, 12.0).unwrap();
        let base = Knowns {
            a: Some(1.0),
            b: Some(0.0),
            kappa: Some(3.0),
            v1: Some(0.0),
            g2: Some(0.0),
            phi0: Some(1.0),
            g1: None,
        };
        // kappa = 0 at the middle point is infeasible
        let sweep = run_sweep(
            Family::ClassI,
            &base,
            SweepParameter::Kappa,
            &[3.0, 0.0, 2.0],
            &g,
            &EigenConfig::default(),
            &config(),
        );
        assert_eq!(sweep.points.len(), 3);
        assert_eq!(sweep.failures(), 1);
        assert_eq!(
            sweep.points[1].outcome.as_ref().unwrap_err(),
            &Error::KappaZero
        );

        let sweep = run_sweep(
            Family::ClassI,
            &base,
            SweepParameter::B,
            &[0.0_f64, 0.1, 0.2],
            &Grid::new(128, 12.0).unwrap(),
            &EigenConfig::default(),
            &config(),
        );
        for p in &sweep.points {
            let d = p.outcome.as_ref().unwrap();
            assert!((d.solution.lambda - (1.0 - p.value * p.value)).abs() < 1e-15);
        }
    }
}
