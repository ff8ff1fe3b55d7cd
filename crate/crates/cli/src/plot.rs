//! Static SVG portraits.

use std::path::Path;

use plotters::prelude::*;
use ptsol::BandLocus;

use crate::error::CliError;

type Points = Vec<(f64, f64)>;

fn failed(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = x;
    for (px, py) in points.filter(|(a, b)| a.is_finite() && b.is_finite()) {
        x = (x.0.min(px), x.1.max(px));
        y = (y.0.min(py), y.1.max(py));
    }
    let pad = |(lo, hi): (f64, f64)| {
        if !lo.is_finite() {
            return (-1.0, 1.0);
        }
        let span = (hi - lo).max(1e-3 * (lo.abs() + hi.abs())).max(1e-12);
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    (pad(x), pad(y))
}

const CLASS_COLORS: [RGBColor; 3] = [
    RGBColor(200, 30, 30),
    RGBColor(30, 90, 200),
    RGBColor(150, 150, 150),
];

/// Eigenvalues in the eta-plane, one series per class (the first is
/// highlighted), with the band half-lines drawn over the visible window.
///
/// The window is `|Re|, |Im| <= 2.5 max(|first class|, band edge, 0.5)`;
/// points outside it are counted in the legend but not drawn.
pub fn eta_plane(
    path: &Path,
    title: &str,
    classes: &[(&str, Points)],
    band: Option<&BandLocus<f64>>,
) -> Result<(), CliError> {
    let focus: f64 = classes.first().map_or(0.0, |(_, p)| {
        p.iter().fold(0.0, |m: f64, &(x, y)| m.max(x.hypot(y)))
    });
    let edge = band.map_or(0.0, |b| b.real_offset.hypot(b.edge));
    let r = 2.5 * focus.max(edge).max(0.5);
    let root = SVGBackend::new(path, (720, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| failed(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(-r..r, -r..r)
        .map_err(|e| failed(path, e))?;
    chart
        .configure_mesh()
        .x_desc("Re eta")
        .y_desc("Im eta")
        .draw()
        .map_err(|e| failed(path, e))?;

    if let Some(b) = band {
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            if r <= b.edge {
                continue;
            }
            let line = vec![
                (sx * b.real_offset, sy * b.edge),
                (sx * b.real_offset, sy * r),
            ];
            let series = chart
                .draw_series(LineSeries::new(line, BLACK.mix(0.6).stroke_width(2)))
                .map_err(|e| failed(path, e))?;
            if (sx, sy) == (1.0, 1.0) {
                series
                    .label("band")
                    .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], BLACK.mix(0.6)));
            }
        }
    }
    for (k, (name, points)) in classes.iter().enumerate() {
        let color = CLASS_COLORS[k % CLASS_COLORS.len()];
        let size = if k == 0 { 4 } else { 2 };
        let shown: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|(x, y)| x.abs() <= r && y.abs() <= r)
            .collect();
        chart
            .draw_series(shown.iter().map(|&p| Circle::new(p, size, color.filled())))
            .map_err(|e| failed(path, e))?
            .label(format!("{name} ({} of {})", shown.len(), points.len()))
            .legend(move |(x, y)| Circle::new((x + 8, y), 4, color.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| failed(path, e))?;
    root.present().map_err(|e| failed(path, e))
}

/// Line plot of one or more series; `log_y` plots `log10 y`.
pub fn series(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    lines: &[(&str, Points)],
    log_y: bool,
) -> Result<(), CliError> {
    let transform = |(x, y): (f64, f64)| {
        if log_y {
            (x, y.max(1e-300).log10())
        } else {
            (x, y)
        }
    };
    let lines: Vec<(&str, Points)> = lines
        .iter()
        .map(|(n, p)| (*n, p.iter().copied().map(transform).collect()))
        .collect();
    let ((x0, x1), (y0, y1)) = bounds(lines.iter().flat_map(|(_, p)| p.iter().copied()));
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| failed(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| failed(path, e))?;
    let y_desc = if log_y {
        format!("log10 {y_label}")
    } else {
        y_label.to_string()
    };
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_desc)
        .draw()
        .map_err(|e| failed(path, e))?;
    for (k, (name, points)) in lines.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))
            .map_err(|e| failed(path, e))?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| failed(path, e))?;
    root.present().map_err(|e| failed(path, e))
}

/// Scatter of `(parameter, value)` samples, one series per label.
pub fn scatter(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    groups: &[(&str, Points)],
) -> Result<(), CliError> {
    let ((x0, x1), (y0, y1)) = bounds(groups.iter().flat_map(|(_, p)| p.iter().copied()));
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| failed(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| failed(path, e))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(|e| failed(path, e))?;
    for (k, (name, points)) in groups.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(points.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(|e| failed(path, e))?
            .label(*name)
            .legend(move |(x, y)| Circle::new((x + 8, y), 4, color.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| failed(path, e))?;
    root.present().map_err(|e| failed(path, e))
}
