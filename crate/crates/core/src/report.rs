//! Structured text reports: one `key = value` per line plus named tables.
//!
//! ```text
//! report stitch
//! tiles_generated = 4
//! discard_fraction = 0
//!
//! [table tiles]
//! row col height width
//! 0 0 64 64
//! [end]
//! ```

use std::fmt::{self, Display, Write as _};
use std::path::Path;

use crate::analysis::consistency::ConsistencyReport;
use crate::analysis::redundancy::RedundancyRow;
use crate::analysis::stationarity::{SampleMoments, StationarityReport};
use crate::error::{Error, Result};
use crate::geometry::GeometrySummary;
use crate::tiling::{StitchReport, TilingMode, TilingPlan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub kind: String,
    pub fields: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(kind: &str) -> Report {
        Report {
            kind: kind.into(),
            ..Report::default()
        }
    }

    pub fn field(&mut self, key: &str, value: impl Display) -> &mut Report {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<String>>) -> &mut Report {
        self.tables.push(Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Appends every field and table of `other` with keys prefixed by `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: &Report) -> &mut Report {
        for (k, v) in &other.fields {
            self.fields.push((format!("{prefix}.{k}"), v.clone()));
        }
        for t in &other.tables {
            self.tables.push(Table {
                name: format!("{prefix}.{}", t.name),
                ..t.clone()
            });
        }
        self
    }

    pub fn parse(text: &str) -> Result<Report> {
        let bad = |line: usize, msg: &str| Error::Spec(format!("report line {}: {msg}", line + 1));
        let mut lines = text.lines().enumerate();
        let kind = match lines.next() {
            Some((_, l)) => l
                .strip_prefix("report ")
                .ok_or_else(|| bad(0, "expected `report <kind>`"))?
                .to_string(),
            None => return Err(bad(0, "empty report")),
        };
        let mut report = Report::new(&kind);
        while let Some((n, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix("[table ").and_then(|l| l.strip_suffix(']')) {
                let (_, header) = lines.next().ok_or_else(|| bad(n, "table without header"))?;
                let mut rows = Vec::new();
                loop {
                    let (m, row) = lines.next().ok_or_else(|| bad(n, "unterminated table"))?;
                    if row == "[end]" {
                        break;
                    }
                    let cells: Vec<String> = row.split_whitespace().map(String::from).collect();
                    if cells.len() != header.split_whitespace().count() {
                        return Err(bad(m, "row width differs from header"));
                    }
                    rows.push(cells);
                }
                report.tables.push(Table {
                    name: name.into(),
                    columns: header.split_whitespace().map(String::from).collect(),
                    rows,
                });
            } else {
                let (k, v) = line.split_once(" = ").ok_or_else(|| bad(n, "expected `key = value`"))?;
                report.fields.push((k.into(), v.into()));
            }
        }
        Ok(report)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "report {}", self.kind)?;
        for (k, v) in &self.fields {
            writeln!(f, "{k} = {v}")?;
        }
        for t in &self.tables {
            let mut s = String::new();
            writeln!(s, "\n[table {}]", t.name)?;
            writeln!(s, "{}", t.columns.join(" "))?;
            for r in &t.rows {
                writeln!(s, "{}", r.join(" "))?;
            }
            writeln!(s, "[end]")?;
            f.write_str(&s)?;
        }
        Ok(())
    }
}

fn cells<const N: usize>(values: [&dyn Display; N]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn pair(p: (usize, usize)) -> String {
    format!("{}x{}", p.0, p.1)
}

pub fn geometry_report(name: &str, g: &GeometrySummary) -> Report {
    let mut r = Report::new("geometry");
    r.field("network", name)
        .field("upsample_count", g.upsample_count)
        .field("model_patch", pair(g.model_patch))
        .field("pixel_footprint", pair(g.pixel_footprint))
        .field("receptive_margin", pair(g.receptive_margin))
        .field("latent_per_model_patch", pair(g.latent_per_model_patch))
        .field("stationarity_period", pair(g.stationarity_period))
        .field("min_training_patch", pair(g.min_training_patch))
        .field("dependence_range", pair(g.dependence_range))
        .field("min_input", g.min_input)
        .field("min_output", g.min_output);
    r
}

pub fn stitch_report(plan: &TilingPlan, s: &StitchReport) -> Report {
    let mut r = Report::new("stitch");
    r.field(
        "mode",
        match plan.mode {
            TilingMode::Consistent => "consistent",
            TilingMode::InconsistentCrop => "inconsistent_crop",
        },
    )
    .field("target", plan.target_image_rect)
    .field("grid", format!("{}x{}", plan.grid_size.0, plan.grid_size.1))
    .field("tiles_generated", s.tiles_generated)
    .field("pixels_emitted", s.pixels_emitted)
    .field("pixels_discarded", s.pixels_discarded)
    .field("discard_fraction", s.discard_fraction);
    if let Some(f) = s.interior_discard_fraction {
        r.field("interior_discard_fraction", f);
    }
    r.field("seams_checked", s.seams_checked)
        .field("seam_max_abs_diff", s.seam_max_abs_diff);
    let rows = plan
        .tiles
        .iter()
        .map(|t| {
            cells([
                &t.grid.0,
                &t.grid.1,
                &t.image_rect,
                &t.latent_rect,
                &t.generated_rect,
                &t.interior,
            ])
        })
        .collect();
    r.table("tiles", &["band", "column", "image", "latent", "generated", "interior"], rows);
    r
}

pub fn redundancy_report(rows: &[RedundancyRow]) -> Report {
    let mut r = Report::new("redundancy");
    r.field("formula", "4/N - 4/N^2, N = floor(S / 2^K)");
    let rows = rows
        .iter()
        .map(|x| cells([&x.budget, &x.blocks, &x.latent_side, &x.fraction]))
        .collect();
    r.table("fractions", &["budget", "blocks", "latent_side", "fraction"], rows);
    r
}

fn moment_tables(r: &mut Report, name: &str, m: &SampleMoments) {
    let px = m
        .pixels
        .iter()
        .map(|p| cells([&p.row, &p.col, &p.phase.row_phase, &p.phase.col_phase, &p.channel, &p.mean, &p.variance]))
        .collect();
    r.table(
        &format!("{name}_pixels"),
        &["row", "col", "phase_row", "phase_col", "channel", "mean", "variance"],
        px,
    );
    let lags = m
        .lags
        .iter()
        .map(|l| cells([&l.from.0, &l.from.1, &l.to.0, &l.to.1, &l.channel, &l.covariance]))
        .collect();
    r.table(
        &format!("{name}_lags"),
        &["from_row", "from_col", "to_row", "to_col", "channel", "covariance"],
        lags,
    );
}

pub fn stationarity_report(network: &str, s: &StationarityReport) -> Report {
    let mut r = Report::new("stationarity");
    r.field("network", network)
        .field("period_tested", pair(s.period_tested))
        .field("num_samples", s.num_samples)
        .field("seed", s.seed)
        .field("probe", s.probe.rect)
        .field("shifted_probe", s.shifted.rect)
        .field("max_z_score_period_shift", s.max_z_score_period_shift)
        .field("worst_statistic", &s.worst_statistic);
    if let (Some(d), Some(z)) = (s.detect_shift, s.max_z_score_detect) {
        r.field("detect_shift", format!("{},{}", d.0, d.1))
            .field("max_z_score_detect", z)
            .field("detection_triggered", z > crate::analysis::stationarity::Z_THRESHOLD);
    }
    r.field("verdict", s.verdict.name());
    moment_tables(&mut r, "probe", &s.probe);
    moment_tables(&mut r, "shifted", &s.shifted);
    r
}

pub fn consistency_report(network: &str, c: &ConsistencyReport) -> Report {
    let mut r = Report::new("consistency");
    r.field("network", network)
        .field("trials", c.trials.len())
        .field("failures", c.failure_count())
        .field("verdict", if c.passed() { "pass" } else { "fail" });
    let rows = c
        .trials
        .iter()
        .map(|t| {
            let layer = t
                .offending_layer
                .as_ref()
                .map_or("-".to_string(), |(k, d)| format!("{k}:{}", d.replace(' ', "")));
            cells([&t.trial, &t.seed, &t.latent, &t.sub_latent, &t.max_abs_diff, &layer])
        })
        .collect();
    r.table(
        "trials",
        &["trial", "seed", "latent", "sub_latent", "max_abs_diff", "offending_layer"],
        rows,
    );
    r
}
