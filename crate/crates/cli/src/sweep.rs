use s2s2::catalog::{FamilyKind, FamilySpec};
use s2s2::flow::focal_radius;
use s2s2::shape::shape_at;
use serde::Serialize;

use crate::args::{FamilyName, Format};
use crate::error::{CliError, CliResult};
use crate::output::{field, to_csv, to_json};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub lambda: [f64; 3],
    pub h: f64,
    pub rho: f64,
    pub k: f64,
    pub c: f64,
    /// `None` when `det Q` has no zero on the search bracket.
    pub focal_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub schema: u32,
    pub command: &'static str,
    pub family: &'static str,
    pub param: &'static str,
    pub rows: Vec<SweepRow>,
}

/// Default parameter range of a sweepable family.
pub fn default_range(name: FamilyName) -> CliResult<(f64, f64)> {
    match name {
        FamilyName::Mt => Ok((-0.9, 0.9)),
        FamilyName::S1rxs2 => Ok((0.1, 1.0)),
        other => Err(CliError::Usage(format!(
            "{} has no parameter to sweep; use mt or s1rxs2",
            crate::family::name_str(other)
        ))),
    }
}

/// Values `from + (to - from)·k/(steps - 1)`, or just `from` when `steps = 1`.
pub fn grid(from: f64, to: f64, steps: usize) -> CliResult<Vec<f64>> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|k| from + (to - from) * k as f64 / (steps - 1) as f64).collect())
}

pub fn cmd_sweep(name: FamilyName, params: &[f64]) -> CliResult<SweepTable> {
    default_range(name)?;
    let rows = params
        .iter()
        .map(|&x| {
            let kind = if name == FamilyName::Mt { FamilyKind::Mt { t: x } } else { FamilyKind::S1rxS2 { r: x } };
            let spec = FamilySpec::new(kind)?;
            let sd = shape_at(&spec.chart, &spec.chart.center())?;
            Ok(SweepRow {
                param: x,
                lambda: sd.lambdas,
                h: sd.h,
                rho: sd.rho,
                k: sd.k,
                c: sd.c,
                focal_radius: focal_radius(&sd).det_q.value(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SweepTable {
        schema: 1,
        command: "sweep",
        family: crate::family::name_str(name),
        param: if name == FamilyName::Mt { "t" } else { "r" },
        rows,
    })
}

const HEADER: [&str; 9] = ["param", "lambda1", "lambda2", "lambda3", "H", "rho", "K", "C", "focal_radius"];

pub fn render(table: &SweepTable, format: Format) -> CliResult<String> {
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![field(r.param)];
            v.extend(r.lambda.iter().map(|&l| field(l)));
            v.extend([field(r.h), field(r.rho), field(r.k), field(r.c)]);
            v.push(r.focal_radius.map(field).unwrap_or_default());
            v
        })
        .collect();
    match format {
        Format::Json => to_json(table),
        Format::Csv => to_csv(&HEADER, &rows),
        Format::Text => {
            let mut s = format!("sweep {} over {}\n", table.family, table.param);
            s.push_str(&HEADER.map(|h| format!("{h:>14}")).join(""));
            s.push('\n');
            for r in &table.rows {
                let mut line = format!("{:>14.6}", r.param);
                for x in r.lambda.iter().chain([&r.h, &r.rho, &r.k, &r.c]) {
                    line.push_str(&format!("{x:>14.6e}"));
                }
                line.push_str(&match r.focal_radius {
                    Some(f) => format!("{f:>14.8}"),
                    None => format!("{:>14}", "none"),
                });
                s.push_str(&line);
                s.push('\n');
            }
            Ok(s)
        }
    }
}
