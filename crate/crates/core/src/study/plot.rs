use std::fmt::Write as _;

use super::{fmt_f64, theoretical_rate, StudyResult};

/// A gnuplot script drawing error against `s` on log-log axes, one curve
/// per result, each with a dashed reference line of the predicted slope.
///
/// `csv_files[i]` is the data file written for `results[i]`. Reference
/// lines pass through the first point of their curve.
pub fn plot_script(results: &[StudyResult], csv_files: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set logscale xy 2");
    let _ = writeln!(out, "set format y '%.0e'");
    let _ = writeln!(out, "set xlabel 's'");
    let _ = writeln!(out, "set ylabel 'dimension truncation error'");
    let _ = writeln!(out, "set key bottom left");
    let _ = writeln!(out, "set terminal pngcairo size 800,600");
    let _ = writeln!(out, "set output 'truncation.png'");

    let mut curves = Vec::new();
    for (i, (res, file)) in results.iter().zip(csv_files).enumerate() {
        let theta = res.config.field.theta;
        let Some(first) = res.entries.iter().find(|e| e.error > 0.0) else {
            continue;
        };
        let rate = theoretical_rate(theta).unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "ref{i}(x) = {} * (x / {}) ** ({})",
            fmt_f64(first.error),
            first.s,
            fmt_f64(rate)
        );
        curves.push(format!(
            "'{file}' using 1:($2 > 0 ? $2 : 1/0) with linespoints lt {} title 'theta = {theta}'",
            i + 1
        ));
        curves.push(format!(
            "ref{i}(x) with lines lt {} dt 2 title 'slope {rate}'",
            i + 1
        ));
    }
    if curves.is_empty() {
        let _ = writeln!(out, "# nothing to plot");
    } else {
        let _ = writeln!(out, "plot {}", curves.join(", \\\n     "));
    }
    out
}
