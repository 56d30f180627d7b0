//! Standalone SVG rendering of an S-curve fit.
//!
//! The chart shows the observed cumulative series as points, the fitted
//! curve sampled yearly from the fit origin through the saturation year (or
//! only over the observed span when the curve saturates inside it), and a
//! dashed marker at the inflection year. Output is plain SVG 1.1 written
//! with fixed two-decimal coordinates, so identical inputs give identical
//! bytes.

use std::io::{self, Write};

use crate::corpus::TimeSeries;
use crate::lifecycle::GrowthFit;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;

struct Scale {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Scale {
    fn x(&self, year: f64) -> f64 {
        let span = (self.x1 - self.x0).max(1.0);
        MARGIN_LEFT + (year - self.x0) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, value: f64) -> f64 {
        let span = self.y1.max(1e-12);
        HEIGHT - MARGIN_BOTTOM - value / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.abs().max(1e-12).log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    step * mag
}

/// Writes the chart for `series` and `fit` to `out`. Byte-deterministic for
/// identical inputs; errors are exactly the sink's write failures.
pub fn render_scurve_svg(
    series: &TimeSeries,
    fit: &GrowthFit,
    out: &mut dyn Write,
) -> io::Result<()> {
    let first_year = series.first_year().unwrap_or(fit.t0_year).min(fit.t0_year);
    let last_obs_year = series.last_year().unwrap_or(fit.t0_year);
    let saturation = fit.saturation_year();
    let curve_end = if saturation.is_finite() && saturation.ceil() as i32 > last_obs_year {
        saturation.ceil() as i32
    } else {
        last_obs_year
    };
    let max_obs = series.max_value().unwrap_or(0.0);
    let scale = Scale {
        x0: first_year as f64,
        x1: curve_end.max(first_year + 1) as f64,
        y1: fit.l.max(max_obs) * 1.05,
    };

    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    )?;
    writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<text x="{:.2}" y="24" font-size="16" text-anchor="middle">Cumulative patents: observed vs fitted {}</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        fit.model
    )?;

    // Gridlines and ticks.
    let x_step = nice_step((scale.x1 - scale.x0) / 6.0).max(1.0);
    let y_step = nice_step(scale.y1 / 5.0);
    let mut year = (scale.x0 / x_step).ceil() * x_step;
    while year <= scale.x1 {
        let x = scale.x(year);
        writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_TOP,
            HEIGHT - MARGIN_BOTTOM
        )?;
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_BOTTOM + 18.0,
            year as i64
        )?;
        year += x_step;
    }
    let mut value = 0.0;
    while value <= scale.y1 {
        let y = scale.y(value);
        writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT
        )?;
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            value as i64
        )?;
        value += y_step;
    }

    // Axes.
    writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
        MARGIN_LEFT,
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    )?;
    writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        HEIGHT - MARGIN_BOTTOM
    )?;
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">year</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 12.0
    )?;
    writeln!(
        out,
        r#"<text x="18" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">cumulative patents</text>"#,
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0
    )?;

    // Fitted curve sampled yearly.
    let mut path = String::new();
    for (i, year) in (first_year..=curve_end).enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        path.push_str(&format!(
            "{cmd}{:.2} {:.2} ",
            scale.x(year as f64),
            scale.y(fit.predict_year(year as f64))
        ));
    }
    writeln!(
        out,
        r##"<path d="{}" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
        path.trim_end()
    )?;

    // Inflection marker.
    let inflection = fit.inflection_year();
    if inflection.is_finite() && inflection >= scale.x0 && inflection <= scale.x1 {
        let x = scale.x(inflection);
        writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#7f8c8d" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            MARGIN_TOP,
            HEIGHT - MARGIN_BOTTOM
        )?;
        writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#7f8c8d">inflection {inflection:.1}</text>"##,
            x + 6.0,
            MARGIN_TOP + 14.0
        )?;
    }

    // Observed points on top of the curve.
    for (year, value) in series.points() {
        writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#2c3e50"/>"##,
            scale.x(*year as f64),
            scale.y(*value)
        )?;
    }

    // Legend.
    let legend_x = MARGIN_LEFT + 16.0;
    writeln!(
        out,
        r##"<circle cx="{legend_x:.2}" cy="{:.2}" r="3.5" fill="#2c3e50"/>"##,
        MARGIN_TOP + 16.0
    )?;
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">observed</text>"#,
        legend_x + 10.0,
        MARGIN_TOP + 20.0
    )?;
    writeln!(
        out,
        r##"<line x1="{legend_x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="2"/>"##,
        MARGIN_TOP + 34.0,
        legend_x + 24.0,
        MARGIN_TOP + 34.0
    )?;
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">fitted {}</text>"#,
        legend_x + 30.0,
        MARGIN_TOP + 38.0,
        fit.model
    )?;

    writeln!(out, "</svg>")?;
    Ok(())
}
