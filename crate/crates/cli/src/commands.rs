use num_complex::Complex64;
use ptsol::eigen::{Analysis, ModeClass};
use ptsol::propagation::{growth_rate_or_zero, modulus_deviation, perturb};
use ptsol::sweep::{linspace, refine_event, BifurcationEvent};
use ptsol::{
    analyze, continuous_band, evaluate_solution, power_flow, run_sweep, solve_constraints,
    split_step, stationary_residual, BandLocus, Family, Grid64, Knowns, ModelSpec64,
    StabilityReport, StationarySolution64, SweepParameter,
};
use serde::Serialize;

use crate::config::{ModelSection, RunConfig};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::plot;

fn grid(config: &RunConfig) -> Result<Grid64, CliError> {
    Ok(Grid64::new(config.grid.n, config.grid.half_width)?)
}

fn resolve(model: &ModelSection) -> Result<(ModelSpec64, StationarySolution64), CliError> {
    Ok(solve_constraints(model.family, &model.knowns())?)
}

#[derive(Serialize)]
struct ValidateReport {
    model: ModelSpec64,
    solution: StationarySolution64,
    grid_n: usize,
    grid_half_width: f64,
    residual: f64,
    boundary_modulus: f64,
    grid_too_coarse: bool,
    power_flow_error: f64,
}

pub fn validate(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (spec, sol) = resolve(&config.model)?;
    let grid = grid(config)?;
    let phi = evaluate_solution(&sol, &grid)?;
    let residual = stationary_residual(&phi, &spec, sol.lambda, &grid)?;
    let flow = power_flow(&phi, &grid).interior_error(&sol.closed_form_power_flow(&grid), &grid);
    println!("family     {}", spec.family);
    println!("Phi0       {}", sol.phi0);
    println!("a, b       {}, {}", spec.a, spec.b);
    println!("kappa      {}", spec.kappa);
    println!("V1         {}", spec.v1);
    println!("g1, g2     {}, {}", spec.g1, spec.g2);
    println!("mu         {}", sol.mu);
    println!("lambda     {}", sol.lambda);
    println!("residual   {:e}", residual.sup_norm);
    println!(
        "edge |phi| {:e}{}",
        residual.boundary_modulus,
        if residual.grid_too_coarse() {
            " (grid too short for this tail)"
        } else {
            ""
        }
    );
    out.report(
        "validate.toml",
        &ValidateReport {
            model: spec,
            solution: sol,
            grid_n: grid.len(),
            grid_half_width: grid.half_width(),
            residual: residual.sup_norm,
            boundary_modulus: residual.boundary_modulus,
            grid_too_coarse: residual.grid_too_coarse(),
            power_flow_error: flow,
        },
    )
}

#[derive(Serialize)]
struct SpectrumRow {
    re_eta: f64,
    im_eta: f64,
    residual: f64,
    class: &'static str,
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    model: ModelSpec64,
    solution: StationarySolution64,
    grid_n: usize,
    grid_half_width: f64,
    eigenpairs: usize,
    rejected: usize,
    discrete_count: usize,
    continuous_count: usize,
    spurious_count: usize,
    norm2: f64,
    spectral_radius: f64,
    max_residual: f64,
    trace_defect: f64,
    stability: &'a StabilityReport<f64>,
}

fn points(values: &[Complex64]) -> Vec<(f64, f64)> {
    values.iter().map(|z| (z.re, z.im)).collect()
}

/// Certified spectrum, classification and portrait for one configuration.
pub fn spectrum(
    config: &RunConfig,
    model: &ModelSection,
    title: &str,
    out: &mut OutputDir,
) -> Result<Analysis<f64>, CliError> {
    let (spec, sol) = resolve(model)?;
    let grid = grid(config)?;
    let analysis = analyze(&spec, &sol, &grid, &config.eigen)?;
    let s = &analysis.spectrum;
    out.csv(
        "spectrum.csv",
        s.pairs.iter().enumerate().map(|(i, p)| SpectrumRow {
            re_eta: p.eta.re,
            im_eta: p.eta.im,
            residual: p.residual,
            class: analysis.class_of(i).as_str(),
        }),
    )?;
    let sep = &analysis.separation;
    out.report(
        "report.toml",
        &SpectrumReport {
            model: spec,
            solution: sol,
            grid_n: grid.len(),
            grid_half_width: grid.half_width(),
            eigenpairs: s.pairs.len(),
            rejected: s.rejected,
            discrete_count: sep.count(ModeClass::Discrete),
            continuous_count: sep.count(ModeClass::Continuous),
            spurious_count: sep.count(ModeClass::Spurious),
            norm2: s.norm2,
            spectral_radius: s.spectral_radius,
            max_residual: s.max_residual,
            trace_defect: s.trace_defect,
            stability: &analysis.report,
        },
    )?;
    let classes = [
        ModeClass::Discrete,
        ModeClass::Continuous,
        ModeClass::Spurious,
    ];
    let groups: Vec<(&str, Vec<(f64, f64)>)> = classes
        .iter()
        .map(|&c| (c.as_str(), points(&sep.eigenvalues(s, c))))
        .collect();
    let band = analysis.band;
    out.plot("eta_plane.svg", |path| {
        plot::eta_plane(path, title, &groups, Some(&band))
    })?;

    let r = &analysis.report;
    println!(
        "{title}: {} | max Re eta {:.6e} | {} discrete, {} zero modes | {} certified ({} rejected), max residual {:.1e}",
        r.verdict,
        r.max_growth,
        r.discrete.len(),
        r.zero_modes,
        s.pairs.len(),
        s.rejected,
        s.max_residual
    );
    for eta in r.discrete.iter().filter(|z| z.norm() >= r.tol_zero) {
        println!("  eta = {:+.6} {:+.6}i", eta.re, eta.im);
    }
    Ok(analysis)
}

#[derive(Serialize)]
struct PointRow {
    value: f64,
    verdict: String,
    max_growth: Option<f64>,
    zero_modes: Option<usize>,
    discrete: Option<usize>,
    error: String,
}

#[derive(Serialize)]
struct ModeRow {
    value: f64,
    re_eta: f64,
    im_eta: f64,
}

#[derive(Serialize)]
struct TrajectoryRow {
    trajectory: usize,
    value: f64,
    re_eta: f64,
    im_eta: f64,
}

#[derive(Serialize)]
struct SweepReport {
    parameter: SweepParameter,
    values: Vec<f64>,
    failures: usize,
    trajectories: usize,
    events: Vec<BifurcationEvent<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    refined: Vec<BifurcationEvent<f64>>,
}

/// Sweep of `parameter` over `values` around `base`, with event detection.
pub fn sweep_over(
    config: &RunConfig,
    family: Family,
    base: &Knowns<f64>,
    parameter: SweepParameter,
    values: &[f64],
    out: &mut OutputDir,
) -> Result<Vec<BifurcationEvent<f64>>, CliError> {
    let grid = grid(config)?;
    let tracking = &config.sweep.tracking;
    let result = run_sweep(
        family,
        base,
        parameter,
        values,
        &grid,
        &config.eigen,
        tracking,
    );
    let events = ptsol::detect_bifurcation(&result, tracking);

    let mut refined = Vec::new();
    if tracking.refine {
        for e in &events {
            let lo = values.iter().position(|&v| v == e.param_low).unwrap_or(0);
            let hi = values
                .iter()
                .position(|&v| v == e.param_high)
                .unwrap_or(lo + 1);
            let steps = hi.abs_diff(lo);
            if let Some(r) = refine_event(
                family,
                base,
                parameter,
                e,
                steps,
                &grid,
                &config.eigen,
                tracking,
            )? {
                refined.push(r);
            }
        }
    }

    out.csv(
        "points.csv",
        result.points.iter().map(|p| match &p.outcome {
            Ok(d) => PointRow {
                value: p.value,
                verdict: d.report.verdict.to_string(),
                max_growth: Some(d.report.max_growth),
                zero_modes: Some(d.report.zero_modes),
                discrete: Some(d.report.discrete.len()),
                error: String::new(),
            },
            Err(e) => PointRow {
                value: p.value,
                verdict: "failed".into(),
                max_growth: None,
                zero_modes: None,
                discrete: None,
                error: e.to_string(),
            },
        }),
    )?;
    let modes: Vec<ModeRow> = result
        .points
        .iter()
        .filter_map(|p| p.outcome.as_ref().ok().map(|d| (p.value, d)))
        .flat_map(|(value, d)| {
            d.report.discrete.iter().map(move |z| ModeRow {
                value,
                re_eta: z.re,
                im_eta: z.im,
            })
        })
        .collect();
    out.csv("modes.csv", modes.iter())?;
    out.csv(
        "trajectories.csv",
        result.trajectories.iter().enumerate().flat_map(|(k, t)| {
            t.path.iter().map(move |&(step, z)| TrajectoryRow {
                trajectory: k,
                value: values[step],
                re_eta: z.re,
                im_eta: z.im,
            })
        }),
    )?;
    out.report(
        "events.toml",
        &SweepReport {
            parameter,
            values: values.to_vec(),
            failures: result.failures(),
            trajectories: result.trajectories.len(),
            events: events.clone(),
            refined: refined.clone(),
        },
    )?;
    let name = parameter.name();
    let re: Vec<(f64, f64)> = modes.iter().map(|m| (m.value, m.re_eta)).collect();
    let im: Vec<(f64, f64)> = modes.iter().map(|m| (m.value, m.im_eta)).collect();
    out.plot("sweep.svg", |path| {
        plot::scatter(
            path,
            &format!("discrete modes vs {name}"),
            name,
            "eta",
            &[("Re eta", re), ("Im eta", im)],
        )
    })?;

    println!(
        "sweep {name} over {} values: {} failed, {} trajectories, {} events",
        values.len(),
        result.failures(),
        result.trajectories.len(),
        events.len()
    );
    for e in refined
        .iter()
        .chain(events.iter().filter(|_| refined.is_empty()))
    {
        println!(
            "  {:?} between {name} = {} and {}",
            e.kind, e.param_low, e.param_high
        );
    }
    Ok(events)
}

pub fn sweep(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = &config.sweep;
    if s.steps == 0 {
        return Err(CliError::Config("sweep.steps must be positive".into()));
    }
    let values = linspace(s.start, s.end, s.steps);
    sweep_over(
        config,
        config.model.family,
        &config.model.knowns(),
        s.parameter,
        &values,
        out,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct PropagationRow {
    z: f64,
    peak: f64,
    power: f64,
    deviation_sup: f64,
    deviation_l2: f64,
}

#[derive(Serialize)]
struct PropagationReport {
    noise: f64,
    seed: u64,
    z_end: f64,
    dz: f64,
    gate_defect: Option<f64>,
    growth_rate: f64,
}

pub fn propagate(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (spec, sol) = resolve(&config.model)?;
    let grid = grid(config)?;
    let phi = evaluate_solution(&sol, &grid)?;
    let p = &config.propagate;
    let start = perturb(&phi, p.noise, config.seed);
    let record = split_step(&start, &spec, &grid, &p.integrator)?;
    let deviation = modulus_deviation(&record, &phi, &grid);
    let growth = growth_rate_or_zero(&record, &phi, &grid)?;
    let rows: Vec<PropagationRow> = record
        .z_samples
        .iter()
        .zip(&record.diagnostics)
        .zip(&deviation)
        .map(|((&z, d), &l2)| PropagationRow {
            z,
            peak: d.peak,
            power: d.power,
            deviation_sup: d.deviation,
            deviation_l2: l2,
        })
        .collect();
    out.csv("propagation.csv", rows.iter())?;
    out.report(
        "report.toml",
        &PropagationReport {
            noise: p.noise,
            seed: config.seed,
            z_end: p.integrator.z_end,
            dz: p.integrator.dz,
            gate_defect: record.gate_defect,
            growth_rate: growth,
        },
    )?;
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.z, r.deviation_l2)).collect();
    out.plot("deviation.svg", |path| {
        plot::series(
            path,
            "|| |Psi| - |phi| ||_2",
            "z",
            "deviation",
            &[("deviation", series)],
            true,
        )
    })?;
    println!(
        "propagated to z = {} with dz = {}: growth rate {growth:.6e}, gate defect {}",
        p.integrator.z_end,
        p.integrator.dz,
        record
            .gate_defect
            .map_or("not run".into(), |d| format!("{d:.1e}"))
    );
    Ok(())
}

#[derive(Serialize)]
struct BandRow {
    branch: usize,
    k: f64,
    re_eta: f64,
    im_eta: f64,
}

#[derive(Serialize)]
struct BandReport {
    locus: BandLocus<f64>,
    edges: Vec<[f64; 2]>,
}

pub fn band(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (spec, sol) = resolve(&config.model)?;
    let grid = grid(config)?;
    let locus = continuous_band(&spec, &sol);
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let ks = linspace(0.0, grid.max_wavenumber(), 201);
    let rows: Vec<BandRow> = signs
        .iter()
        .enumerate()
        .flat_map(|(branch, &(sx, sy))| {
            ks.iter().map(move |&k| {
                let z = locus.point(k);
                BandRow {
                    branch,
                    k,
                    re_eta: sx * z.re,
                    im_eta: sy * z.im,
                }
            })
        })
        .collect();
    out.csv("band.csv", rows.iter())?;
    let edges = locus.edges().iter().map(|z| [z.re, z.im]).collect();
    out.report("band.toml", &BandReport { locus, edges })?;
    let lines: Vec<(&str, Vec<(f64, f64)>)> = (0..4)
        .map(|b| {
            (
                "branch",
                rows.iter()
                    .filter(|r| r.branch == b)
                    .map(|r| (r.re_eta, r.im_eta))
                    .collect(),
            )
        })
        .collect();
    out.plot("band.svg", |path| {
        plot::series(path, "continuous band", "Re eta", "Im eta", &lines, false)
    })?;
    println!(
        "band: Re eta = +-{}, |Im eta| >= {} (edges +-{} +-{}i)",
        locus.real_offset, locus.edge, locus.real_offset, locus.edge
    );
    Ok(())
}

pub fn figure(name: &str, config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    use ptsol::presets;
    let single = |p: presets::Preset, out: &mut OutputDir| {
        out.nested(p.name, |out| {
            spectrum(config, &ModelSection::from_preset(&p), p.name, out).map(|_| ())
        })
    };
    match name {
        "fig1" => single(presets::fig1(), out),
        "fig3" => single(presets::fig3(), out),
        "fig4" => {
            single(presets::fig4_class_i(), out)?;
            single(presets::fig4_class_ii(), out)
        }
        "fig2" => out.nested("fig2", |out| {
            let base = presets::fig2_base();
            sweep_over(
                config,
                base.family,
                &base.knowns,
                SweepParameter::A,
                &presets::fig2_scan(),
                out,
            )?;
            for a in presets::FIG2_POINTS {
                let model = ModelSection {
                    a: Some(a),
                    ..ModelSection::from_preset(&base)
                };
                let label = format!("a-{a}");
                out.nested(&label, |out| {
                    spectrum(config, &model, &format!("fig2 a = {a}"), out)
                })?;
            }
            Ok(())
        }),
        other => Err(CliError::Config(format!(
            "unknown figure `{other}` (expected fig1, fig2, fig3 or fig4)"
        ))),
    }
}
