use num_complex::Complex64;
use ptsol::eigen::{eig_dense, match_spectra};
use ptsol::presets;
use ptsol::*;

fn eigenvalues(m: &ndarray::Array2<Complex64>) -> Vec<Complex64> {
    eig_dense(m)
        .unwrap()
        .into_iter()
        .map(|(eta, _)| eta)
        .collect()
}

fn cubic_limit() -> (ModelSpec64, StationarySolution64) {
    let knowns = Knowns {
        a: Some(1.0),
        b: Some(0.0),
        kappa: Some(3.0),
        v1: Some(0.0),
        g2: Some(0.0),
        phi0: Some(1.0),
        g1: None,
    };
    solve_constraints(Family::ClassI, &knowns).unwrap()
}

#[test]
fn real_limit_block_matches_frechet_oracle() {
    let grid = Grid::new(128, 12.0).unwrap();
    let (spec, sol) = cubic_limit();
    let block = eigenvalues(build_operators(&spec, &sol, &grid).unwrap().block());
    let oracle = eigenvalues(&direct_frechet_operator(&spec, &sol, &grid).unwrap());
    let matched = match_spectra(&block, &oracle);
    assert_eq!(matched.len(), block.len());
    let worst = matched.iter().map(|m| m.2).fold(0.0, f64::max);
    assert!(worst < 1e-4, "worst {worst:e}");
    let radius = block.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(oracle.iter().any(|z| z.norm() <= 1e-4 * radius));
}

#[test]
fn phase_carrying_background_departs_from_oracle() {
    let grid = Grid::new(256, 16.0).unwrap();
    let p = presets::fig1();
    let (spec, sol) = solve_constraints(p.family, &p.knowns).unwrap();
    let internal = |values: Vec<Complex64>| {
        values
            .into_iter()
            .filter(|z| z.im > 0.5 && z.im < 0.999 && z.re.abs() < 1e-3)
            .min_by(|a, b| a.im.total_cmp(&b.im))
            .unwrap()
    };
    let block = internal(eigenvalues(
        build_operators(&spec, &sol, &grid).unwrap().block(),
    ));
    let oracle = internal(eigenvalues(
        &direct_frechet_operator(&spec, &sol, &grid).unwrap(),
    ));
    assert!((block.im - 0.946506).abs() < 1e-4, "{block}");
    assert!((oracle.im - 0.995990).abs() < 1e-4, "{oracle}");
}

#[test]
fn band_locus_geometry() {
    let p = presets::fig1();
    let (spec, sol) = solve_constraints(p.family, &p.knowns).unwrap();
    let band = continuous_band(&spec, &sol);
    assert!((band.real_offset - 0.6).abs() < 1e-15);
    assert!((band.edge - 0.91).abs() < 1e-15);
    for k in [0.0, 0.5, 3.0] {
        let z = band.point(k);
        for w in [z, -z, z.conj(), -z.conj()] {
            assert!(band.distance(w) < 1e-14);
        }
    }
    assert!((band.distance(Complex64::new(0.0, 0.0)) - 0.6_f64.hypot(0.91)).abs() < 1e-14);
}

#[test]
fn unstable_preset_pairs_into_quadruples() {
    let grid = Grid::new(256, 16.0).unwrap();
    let p = presets::fig4_class_i();
    let (spec, sol) = solve_constraints(p.family, &p.knowns).unwrap();
    let a = analyze(&spec, &sol, &grid, &EigenConfig::default()).unwrap();
    let r = &a.report;
    assert_eq!(r.verdict, Verdict::Unstable);
    assert!(r.pairing.checked >= 4);
    assert!(r.pairing.negation_holds());
    assert!(r.pairing.quadruples_hold());
    assert!(a.spectrum.max_residual <= 1e-8);
    assert!(a.spectrum.trace_defect <= 1e-10);
}

#[test]
fn discrete_modes_are_grid_robust() {
    let p = presets::fig4_class_i();
    let (spec, sol) = solve_constraints(p.family, &p.knowns).unwrap();
    let discrete = |n, l| {
        let grid = Grid::new(n, l).unwrap();
        analyze(&spec, &sol, &grid, &EigenConfig::default())
            .unwrap()
            .report
            .discrete
    };
    let coarse = discrete(512, 16.0);
    let fine = discrete(768, 20.0);
    assert_eq!(coarse.len(), fine.len());
    for (i, j, d) in match_spectra(&coarse, &fine) {
        assert!(d < 1e-4, "{} -> {}: {d:e}", coarse[i], fine[j]);
    }
}

#[test]
fn single_precision_pipeline_tracks_double() {
    let p = presets::fig4_class_i();
    let k = p.knowns;
    let narrow = |x: Option<f64>| x.map(|v| v as f32);
    let knowns32 = Knowns {
        a: narrow(k.a),
        b: narrow(k.b),
        kappa: narrow(k.kappa),
        v1: narrow(k.v1),
        g1: narrow(k.g1),
        g2: narrow(k.g2),
        phi0: narrow(k.phi0),
    };
    let config = EigenConfig {
        certify_tol: 1e-4,
        ..EigenConfig::default()
    };

    let (spec32, sol32) = solve_constraints(p.family, &knowns32).unwrap();
    let grid32 = Grid32::new(128, 12.0).unwrap();
    let single = analyze(&spec32, &sol32, &grid32, &config).unwrap();

    let (spec, sol) = solve_constraints(p.family, &k).unwrap();
    let grid = Grid64::new(128, 12.0).unwrap();
    let double = analyze(&spec, &sol, &grid, &config).unwrap();

    assert_eq!(single.report.verdict, Verdict::Unstable);
    let rel = (single.report.max_growth as f64 - double.report.max_growth).abs()
        / double.report.max_growth;
    assert!(rel < 1e-3, "relative gap {rel:e}");
}
