//! CSV and gnuplot text for estimator results. Floats use Rust's shortest
//! round-trip formatting so identical numbers give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use super::{ConvergenceRow, ExpectedValueSeries, RefinementRow, TruncationStudy};
use crate::error::{Error, Result};
use crate::tfrac::SolutionTrajectory;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `n,t,mean,std,lo3sig,hi3sig`
pub fn series_csv(s: &ExpectedValueSeries) -> String {
    let mut out = String::from("n,t,mean,std,lo3sig,hi3sig\n");
    for (n, ((t, m), sd)) in s.times.iter().zip(&s.mean).zip(&s.std).enumerate() {
        writeln!(out, "{n},{t},{m},{sd},{},{}", m - 3.0 * sd, m + 3.0 * sd).unwrap();
    }
    out
}

/// `N,value_T,err_T,rate_T,err_L2J,rate_L2J`; the reference is the last row with empty errors.
pub fn table_csv(rows: &[ConvergenceRow], reference: &ExpectedValueSeries) -> String {
    let mut out = String::from("N,value_T,err_T,rate_T,err_L2J,rate_L2J\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.n_points, r.value_t, r.err_t, opt(r.rate_t), r.err_l2j, opt(r.rate_l2j)).unwrap();
    }
    writeln!(out, "{},{},,,,", reference.n_points, reference.final_value()).unwrap();
    out
}

/// `z,err_T`
pub fn truncation_csv(study: &TruncationStudy) -> String {
    let mut out = String::from("z,err_T\n");
    for r in &study.rows {
        writeln!(out, "{},{}", r.z, r.err_t).unwrap();
    }
    out
}

/// `n_div,steps,h,err_L2J,ratio`
pub fn refinement_csv(rows: &[RefinementRow]) -> String {
    let mut out = String::from("n_div,steps,h,err_L2J,ratio\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.n_div, r.steps, r.h, r.err_l2j, opt(r.ratio)).unwrap();
    }
    out
}

/// `n,t,value`
pub fn trajectory_csv(t: &SolutionTrajectory) -> String {
    let mut out = String::from("n,t,value\n");
    for (n, (t, v)) in t.times.iter().zip(&t.functional).enumerate() {
        writeln!(out, "{n},{t},{v}").unwrap();
    }
    out
}

/// Plots E(t) with the ±3σ band from a series CSV.
pub fn gnuplot_script(series_file: &str, output_png: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set ylabel 'E(t)'\n\
         set terminal pngcairo size 800,600\n\
         set output '{output_png}'\n\
         plot '{series_file}' using 2:3 with lines lw 2 title 'E', \\\n\
         \x20    '' using 2:5 with lines dt 2 title 'E - 3 sigma', \\\n\
         \x20    '' using 2:6 with lines dt 2 title 'E + 3 sigma'\n"
    )
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_columns() {
        let s = ExpectedValueSeries { times: vec![0.0, 1.0], mean: vec![1.0, 0.5], std: vec![0.0, 0.1], n_points: 4, z: 2, h: 0.1, steps: 1 };
        let csv = series_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,t,mean,std,lo3sig,hi3sig");
        assert_eq!(lines[1], "0,0,1,0,1,1");
        let f: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[4] - 0.2).abs() < 1e-15 && (f[5] - 0.8).abs() < 1e-15);
        let t = table_csv(&[], &s);
        assert_eq!(t, "N,value_T,err_T,rate_T,err_L2J,rate_L2J\n4,0.5,,,,\n");
    }
}
