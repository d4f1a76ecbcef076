//! SVG line plots regenerated from the CSV outputs.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::run::RunError;

/// A CSV file as named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, RunError> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| RunError::data(path, e))?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| RunError::data(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| RunError::data(path, e))?;
            for (column, field) in columns.iter_mut().zip(record.iter()) {
                let value = field
                    .parse::<f64>()
                    .map_err(|_| RunError::data(path, format!("row {}: not a number: {field:?}", i + 1)))?;
                column.push(value);
            }
        }
        Ok(Self { header, columns })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

struct Series<'a> {
    label: &'a str,
    values: &'a [f64],
    color: RGBColor,
}

fn axis_label(axis: &str) -> &str {
    match axis {
        "tau" => "tau [s]",
        "theta" => "theta [rad]",
        other => other,
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1e-300) * 0.05 };
    Some((lo - pad, hi + pad))
}

fn line_plot(path: &Path, title: &str, x_name: &str, x: &[f64], y_label: &str, series: &[Series]) -> Result<(), RunError> {
    let draw = |e: &dyn std::fmt::Display| RunError::data(path, e.to_string());
    let (y_lo, y_hi) = bounds(series.iter().flat_map(|s| s.values.iter().copied()))
        .ok_or_else(|| RunError::data(path, "no finite values to plot"))?;
    let (x_lo, x_hi) = (x[0], x[x.len() - 1]);
    let root = SVGBackend::new(path, (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw(&e))?;
    let log_x = x_name == "tau" && x_lo > 0.0;
    let mut builder = ChartBuilder::on(&root);
    builder
        .caption(title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(48)
        .y_label_area_size(96);

    macro_rules! finish {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart
                .configure_mesh()
                .x_desc(axis_label(x_name))
                .y_desc(y_label)
                .x_label_formatter(&|v| format!("{v:.1e}"))
                .y_label_formatter(&|v| format!("{v:.2e}"))
                .draw()
                .map_err(|e| draw(&e))?;
            for s in series {
                let color = s.color;
                chart
                    .draw_series(LineSeries::new(
                        x.iter().copied().zip(s.values.iter().copied()).filter(|p| p.1.is_finite()),
                        color.stroke_width(2),
                    ))
                    .map_err(|e| draw(&e))?
                    .label(s.label)
                    .legend(move |(px, py)| PathElement::new(vec![(px, py), (px + 20, py)], color));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(|e| draw(&e))?;
        }};
    }

    if log_x {
        finish!(builder
            .build_cartesian_2d((x_lo..x_hi).log_scale(), y_lo..y_hi)
            .map_err(|e| draw(&e))?);
    } else {
        finish!(builder
            .build_cartesian_2d(x_lo..x_hi, y_lo..y_hi)
            .map_err(|e| draw(&e))?);
    }
    root.present().map_err(|e| draw(&e))?;
    Ok(())
}

fn required<'a>(table: &'a Table, path: &Path, name: &str) -> Result<&'a [f64], RunError> {
    table
        .column(name)
        .ok_or_else(|| RunError::data(path, format!("missing column {name}")))
}

/// Writes the sweep plots next to `csv`. A single-row table yields no plots.
pub fn plot_results(csv: &Path, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let table = Table::read(csv)?;
    if table.rows() < 2 {
        return Ok(Vec::new());
    }
    let x_name = table.header[0].as_str();
    let x = &table.columns[0];
    let mut written = Vec::new();

    let p = required(&table, csv, "P")?;
    let mut series = vec![Series {
        label: "P analytic",
        values: p,
        color: BLUE,
    }];
    if let (Some(freq), Some(lo), Some(hi)) = (
        table.column("freq_mc"),
        table.column("wilson_lo"),
        table.column("wilson_hi"),
    ) {
        series.push(Series {
            label: "P Monte Carlo",
            values: freq,
            color: RED,
        });
        series.push(Series {
            label: "Wilson 99% low",
            values: lo,
            color: RGBColor(240, 160, 160),
        });
        series.push(Series {
            label: "Wilson 99% high",
            values: hi,
            color: RGBColor(240, 160, 160),
        });
    }
    let path = dir.join("probability.svg");
    line_plot(&path, "Free-lunch probability", x_name, x, "P(W < dF)", &series)?;
    written.push(path);

    let path = dir.join("irreversible_work.svg");
    line_plot(
        &path,
        "Irreversible work per phonon",
        x_name,
        x,
        "W_irr / n [J]",
        &[Series {
            label: "W_irr / n",
            values: required(&table, csv, "W_irr_per_n")?,
            color: BLUE,
        }],
    )?;
    written.push(path);

    let path = dir.join("variance.svg");
    line_plot(
        &path,
        "Work variance budget",
        x_name,
        x,
        "variance [J^2]",
        &[
            Series {
                label: "total",
                values: required(&table, csv, "sigma2_total")?,
                color: BLACK,
            },
            Series {
                label: "thermal",
                values: required(&table, csv, "sigma2_thermal")?,
                color: RED,
            },
            Series {
                label: "quantum stationary",
                values: required(&table, csv, "sigma2_quantum_stationary")?,
                color: BLUE,
            },
            Series {
                label: "quantum non-stationary",
                values: required(&table, csv, "sigma2_quantum_nonstationary")?,
                color: GREEN,
            },
        ],
    )?;
    written.push(path);
    Ok(written)
}

/// Bar chart of a Monte Carlo work histogram.
pub fn plot_histogram(csv: &Path, dir: &Path) -> Result<PathBuf, RunError> {
    let table = Table::read(csv)?;
    let path = dir.join("histogram.svg");
    let draw = |e: &dyn std::fmt::Display| RunError::data(&path, e.to_string());
    let start = required(&table, csv, "bin_start")?;
    let end = required(&table, csv, "bin_end")?;
    let count = required(&table, csv, "count")?;
    if start.is_empty() {
        return Err(RunError::data(csv, "histogram has no bins"));
    }
    let top = count.iter().copied().fold(0.0, f64::max).max(1.0) * 1.05;
    let root = SVGBackend::new(&path, (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Monte Carlo work histogram", ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(48)
        .y_label_area_size(72)
        .build_cartesian_2d(start[0]..end[end.len() - 1], 0.0..top)
        .map_err(|e| draw(&e))?;
    chart
        .configure_mesh()
        .x_desc("W [J]")
        .y_desc("count")
        .x_label_formatter(&|v| format!("{v:.2e}"))
        .draw()
        .map_err(|e| draw(&e))?;
    chart
        .draw_series(
            start
                .iter()
                .zip(end)
                .zip(count)
                .map(|((&a, &b), &c)| Rectangle::new([(a, 0.0), (b, c)], BLUE.mix(0.6).filled())),
        )
        .map_err(|e| draw(&e))?;
    root.present().map_err(|e| draw(&e))?;
    drop(chart);
    drop(root);
    Ok(path)
}
