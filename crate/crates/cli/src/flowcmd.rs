use rayon::prelude::*;
use s2s2::catalog::FamilySpec;
use s2s2::flow::{focal_radius, parallel_chart, q_matrix};
use s2s2::shape::shape_at;
use s2s2::{Coords, SplitMix64};
use serde::Serialize;

use crate::args::Format;
use crate::error::{CliError, CliResult};
use crate::family::FamilyId;
use crate::output::{field, to_csv, to_json};

const SAMPLE_INSET: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowRow {
    pub s: f64,
    /// Mean over the sample points of `H` measured on `Φ_s`.
    pub h_flow: f64,
    /// Mean closed-form `det Q(s)`.
    pub det_q: f64,
    /// Mean `C` measured on `Φ_s`.
    pub c: f64,
    /// Spatial standard deviation of `H` on `Φ_s`.
    pub h_std: f64,
    /// Points where the parallel hypersurface could not be evaluated.
    pub failures: usize,
    /// Set on the first row at or beyond the smallest focal radius of the sample.
    pub focal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTable {
    pub schema: u32,
    pub command: &'static str,
    pub family: FamilyId,
    pub seed: u64,
    pub n_points: usize,
    /// Smallest first zero of `det Q` over the sample points.
    pub focal_radius: Option<f64>,
    pub rows: Vec<FlowRow>,
}

pub fn offsets(s_max: f64, s_steps: usize) -> CliResult<Vec<f64>> {
    if !(s_max >= 0.0 && s_max.is_finite()) {
        return Err(CliError::Usage("--s-max must be a finite non-negative number".into()));
    }
    if s_max == 0.0 {
        return Ok(vec![0.0]);
    }
    crate::sweep::grid(0.0, s_max, s_steps)
}

fn stats(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

pub fn cmd_flow(spec: &FamilySpec<f64>, family: FamilyId, ss: &[f64], n: usize, seed: u64) -> CliResult<FlowTable> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let points: Vec<Coords<f64>> = (0..n).map(|_| spec.chart.sample(&mut rng, SAMPLE_INSET)).collect();
    let bases = points.iter().map(|u| shape_at(&spec.chart, u)).collect::<Result<Vec<_>, _>>()?;
    let focal = bases
        .iter()
        .filter_map(|sd| focal_radius(sd).det_q.value())
        .fold(None, |m: Option<f64>, f| Some(m.map_or(f, |m| m.min(f))));

    let mut flagged = false;
    let mut rows = Vec::with_capacity(ss.len());
    for &s in ss {
        let par = parallel_chart(&spec.chart, s)?;
        let measured: Vec<Option<(f64, f64)>> =
            points.par_iter().map(|u| shape_at(&par.chart, u).ok().map(|sd| (sd.h, sd.c))).collect();
        let hs: Vec<f64> = measured.iter().flatten().map(|m| m.0).collect();
        let cs: Vec<f64> = measured.iter().flatten().map(|m| m.1).collect();
        let dets: Vec<f64> = bases.iter().map(|sd| q_matrix(sd, s).det_q_closed).collect();
        let (h_flow, h_std) = stats(&hs);
        let focal_row = !flagged && focal.is_some_and(|f| s >= f);
        flagged |= focal_row;
        rows.push(FlowRow {
            s,
            h_flow,
            det_q: stats(&dets).0,
            c: stats(&cs).0,
            h_std,
            failures: measured.iter().filter(|m| m.is_none()).count(),
            focal: focal_row,
        });
    }
    Ok(FlowTable { schema: 1, command: "flow", family, seed, n_points: n, focal_radius: focal, rows })
}

const HEADER: [&str; 7] = ["s", "H_flow", "detQ", "C", "H_std", "failures", "focal"];

pub fn render(table: &FlowTable, format: Format) -> CliResult<String> {
    match format {
        Format::Json => to_json(table),
        Format::Csv => {
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| {
                    vec![
                        field(r.s),
                        field(r.h_flow),
                        field(r.det_q),
                        field(r.c),
                        field(r.h_std),
                        r.failures.to_string(),
                        (r.focal as u8).to_string(),
                    ]
                })
                .collect();
            to_csv(&HEADER, &rows)
        }
        Format::Text => {
            let mut s = format!("flow {}: {} points, seed {}\n", table.family.label(), table.n_points, table.seed);
            match table.focal_radius {
                Some(f) => s.push_str(&format!("focal radius {f:.10}\n")),
                None => s.push_str("no focal point in (1e-4, √2π]\n"),
            }
            s.push_str(&HEADER.map(|h| format!("{h:>14}")).join(""));
            s.push('\n');
            for r in &table.rows {
                s.push_str(&format!(
                    "{:>14.6}{:>14.6e}{:>14.6e}{:>14.6e}{:>14.3e}{:>14}{:>14}\n",
                    r.s,
                    r.h_flow,
                    r.det_q,
                    r.c,
                    r.h_std,
                    r.failures,
                    if r.focal { "focal" } else { "" }
                ));
            }
            Ok(s)
        }
    }
}
