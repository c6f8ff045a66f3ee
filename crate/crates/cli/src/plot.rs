//! Minimal SVG line charts from the CSV artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use crate::commands::{finalize, Context};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_sig, Run};

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Column for the horizontal axis
    #[arg(long)]
    x: Option<String>,
    /// Column for the vertical axis
    #[arg(long)]
    y: Option<String>,
    /// Column whose values split the data into separate lines
    #[arg(long)]
    group: Option<String>,
    /// Logarithmic horizontal axis
    #[arg(long)]
    log_x: bool,
    /// SVG file name inside the output directory
    #[arg(long)]
    output: Option<String>,
}

type Series = BTreeMap<String, Vec<(f64, f64)>>;

fn load(path: &PathBuf, x: &str, y: &str, group: Option<&str>) -> CliResult<Series> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{} has no column {name:?}", path.display())))
    };
    let (cx, cy) = (col(x)?, col(y)?);
    let cg = group.map(col).transpose()?;
    let mut series = Series::new();
    for record in reader.records() {
        let record = record?;
        let (Ok(vx), Ok(vy)) = (record[cx].parse::<f64>(), record[cy].parse::<f64>()) else {
            continue;
        };
        let key = cg.map_or_else(String::new, |g| record[g].to_string());
        series.entry(key).or_default().push((vx, vy));
    }
    for points in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(series)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

pub fn render_svg(
    series: &Series,
    x_label: &str,
    y_label: &str,
    group: &str,
    log_x: bool,
) -> String {
    let (w, h, margin) = (640.0, 420.0, 60.0);
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let all: Vec<(f64, f64)> = series
        .values()
        .flatten()
        .map(|&(x, y)| (tx(x), y))
        .collect();
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| {
        all.iter().map(pick).filter(|v| v.is_finite()).fold(init, f)
    };
    let (mut x0, mut x1) = (
        fold(f64::min, f64::INFINITY, |p| p.0),
        fold(f64::max, f64::NEG_INFINITY, |p| p.0),
    );
    let (mut y0, mut y1) = (
        fold(f64::min, f64::INFINITY, |p| p.1),
        fold(f64::max, f64::NEG_INFINITY, |p| p.1),
    );
    if !(x1 > x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| margin + (tx(x) - x0) / (x1 - x0) * (w - 2.0 * margin);
    let py = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = margin,
        b = h - margin,
        r = w - margin
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let yv = y0 + f * (y1 - y0);
        let xv = x0 + f * (x1 - x0);
        let xlabel = if log_x { 10f64.powf(xv) } else { xv };
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            margin - 6.0,
            py(yv) + 4.0,
            fmt_short(yv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            margin + f * (w - 2.0 * margin),
            h - margin + 18.0,
            fmt_short(xlabel)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .filter(|p| p.1.is_finite() && tx(p.0).is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        if !name.is_empty() {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{colour}">{group}={name}</text>"#,
                w - margin + 6.0,
                margin + 16.0 * i as f64
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn fmt_short(v: f64) -> String {
    let s = fmt_sig(v);
    match s.parse::<f64>() {
        Ok(x) if x.abs() >= 1e-3 || x == 0.0 => {
            let short = format!("{x:.3}");
            short
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        }
        _ => format!("{v:.2e}"),
    }
}

pub fn run(ctx: Context, args: PlotArgs) -> CliResult<()> {
    let (settings, mut r) = ctx.settings()?;
    let input = r
        .optional("input", args.input.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("plot needs --input".into()))?;
    let x = r.value("x", args.x, "m".to_string())?;
    let y = r.value("y", args.y, "R".to_string())?;
    let group = r.optional("group", args.group)?;
    let log_x = args.log_x || r.value("log-x", None, false)?;
    let input = PathBuf::from(input);
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot")
        .to_string();
    let output = r.value("output", args.output, format!("{stem}.svg"))?;
    let series = load(&input, &x, &y, group.as_deref())?;
    let mut run = Run::new("plot", &settings.output_dir, r.into_map())?;
    let outcome = (|| {
        if series.is_empty() {
            return Err(CliError::Usage(format!(
                "no numeric rows in {}",
                input.display()
            )));
        }
        let svg = render_svg(&series, &x, &y, group.as_deref().unwrap_or(""), log_x);
        run.write_text(&output, &svg)?;
        Ok(())
    })();
    finalize(run, outcome)
}
