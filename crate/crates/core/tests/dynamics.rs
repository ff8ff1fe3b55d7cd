use ptsol::presets;
use ptsol::propagation::{growth_rate_or_zero, perturb};
use ptsol::sweep::linspace;
use ptsol::*;

#[test]
fn propagation_growth_matches_spectrum() {
    let grid = Grid::new(256, 16.0).unwrap();
    let p = presets::fig4_class_i();
    let (spec, sol) = solve_constraints(p.family, &p.knowns).unwrap();
    let spectral = analyze(&spec, &sol, &grid, &EigenConfig::default())
        .unwrap()
        .report
        .max_growth;

    let phi = evaluate_solution(&sol, &grid).unwrap();
    let config = PropagationConfig {
        z_end: 1.5,
        dz: 1e-4,
        sample_every: 100,
        gate_z: Some(0.5),
        ..PropagationConfig::default()
    };
    let record = split_step(&perturb(&phi, 1e-4, 7), &spec, &grid, &config).unwrap();
    let measured = measure_growth(&record, &phi, &grid).unwrap();
    assert!(
        (measured - spectral).abs() <= 0.25 * spectral,
        "{measured} vs {spectral}"
    );
}

#[test]
fn oscillatory_preset_does_not_grow() {
    let grid = Grid::new(256, 16.0).unwrap();
    let p = presets::fig3();
    let (spec, sol) = solve_constraints(p.family, &p.knowns).unwrap();
    let phi = evaluate_solution(&sol, &grid).unwrap();
    let config = PropagationConfig {
        z_end: 2.0,
        dz: 1e-3,
        sample_every: 50,
        ..Default::default()
    };
    let record = split_step(&perturb(&phi, 1e-6, 3), &spec, &grid, &config).unwrap();
    assert_eq!(growth_rate_or_zero(&record, &phi, &grid).unwrap(), 0.0);
}

#[test]
fn near_integrable_scan_is_quiet() {
    let grid = Grid::new(128, 12.0).unwrap();
    let base = presets::fig2_base();
    let values = linspace(0.03, 0.09, 4);
    let sweep = run_sweep(
        base.family,
        &base.knowns,
        SweepParameter::A,
        &values,
        &grid,
        &EigenConfig::default(),
        &SweepConfig::default(),
    );
    assert_eq!(sweep.failures(), 0);
    for r in sweep.reports() {
        assert_eq!(r.unwrap().verdict, Verdict::NeutrallyStable);
    }
    assert!(detect_bifurcation(&sweep, &SweepConfig::default()).is_empty());
}
