//! File formats: surface, profile, Hawking and flow CSVs, threshold tables,
//! conformal factor JSON and foliation records.
//!
//! Every writer goes through [`write_atomic`], so a reader never sees a
//! half-written file.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::{minkowski_from_totals, FlowState};
use crate::profile::{HawkingTrace, IsoProfile};
use crate::sphere::{ConformalFactor, ConformalFactorFile, FlowTrace};
use crate::surfaces::{polar_nodes, RadialSurface};
use crate::tube::StabilityThreshold;

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("line {line}: {field:?} is not a number")))
}

/// Splits off the first line and returns it with a CSV reader over the rest.
fn header_and_body(text: &str) -> (&str, csv::Reader<&[u8]>) {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    (first.trim_end_matches('\r'), csv::Reader::from_reader(rest.as_bytes()))
}

fn numeric_rows(reader: &mut csv::Reader<&[u8]>, min_cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() < min_cols {
            return Err(Error::invalid(format!("data row {} has {} columns, need {min_cols}", k + 1, rec.len())));
        }
        out.push(rec.iter().map(|f| parse_f64(f, k + 3)).collect::<Result<_>>()?);
    }
    Ok(out)
}

pub fn surface_csv(surface: &RadialSurface) -> Result<Vec<u8>> {
    let mut out = format!("# band_limit={},n={}\n", surface.band_limit(), surface.len()).into_bytes();
    let rows = (0..surface.len()).map(|i| vec![surface.theta_grid()[i].to_string(), surface.radius()[i].to_string()]);
    out.extend(csv_bytes(&["theta", "radius"], rows)?);
    Ok(out)
}

pub fn write_surface_csv(path: &Path, surface: &RadialSurface) -> Result<()> {
    write_atomic(path, &surface_csv(surface)?)
}

/// Parses a surface CSV; the θ column must match the Gauss–Legendre polar nodes.
pub fn parse_surface_csv(text: &str) -> Result<RadialSurface> {
    let (first, mut body) = header_and_body(text);
    let meta = first
        .strip_prefix('#')
        .ok_or_else(|| Error::invalid("surface CSV must start with '# band_limit=..,n=..'"))?;
    let mut band_limit = None;
    let mut n = None;
    for kv in meta.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::invalid(format!("bad header entry {kv:?}")))?;
        let v: usize = v.trim().parse().map_err(|_| Error::invalid(format!("bad header value {v:?}")))?;
        match k.trim() {
            "band_limit" => band_limit = Some(v),
            "n" => n = Some(v),
            other => return Err(Error::invalid(format!("unknown header key {other:?}"))),
        }
    }
    let (band_limit, n) = band_limit
        .zip(n)
        .ok_or_else(|| Error::invalid("surface CSV header needs band_limit and n"))?;
    let rows = numeric_rows(&mut body, 2)?;
    if rows.len() != n {
        return Err(Error::invalid(format!("header declares {n} nodes, file has {}", rows.len())));
    }
    for (i, (row, t)) in rows.iter().zip(polar_nodes(n)).enumerate() {
        if (row[0] - t).abs() > 1e-12 {
            return Err(Error::invalid(format!("θ at row {i} is {}, expected node {t}", row[0])));
        }
    }
    let radius: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    RadialSurface::build(&radius, band_limit)
}

pub fn read_surface_csv(path: &Path) -> Result<RadialSurface> {
    parse_surface_csv(&fs::read_to_string(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct ProfileHeader {
    chi_boundary: i64,
    core_volume: f64,
}

/// JSON header line, then `V,I,dI_plus,dI_minus` rows.
pub fn profile_csv(profile: &IsoProfile) -> Result<Vec<u8>> {
    let header = ProfileHeader { chi_boundary: profile.chi_boundary(), core_volume: profile.core_volume() };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    let rows = (0..profile.len()).map(|k| {
        vec![
            profile.volumes()[k].to_string(),
            profile.areas()[k].to_string(),
            profile.d_plus()[k].to_string(),
            profile.d_minus()[k].to_string(),
        ]
    });
    out.extend(csv_bytes(&["V", "I", "dI_plus", "dI_minus"], rows)?);
    Ok(out)
}

pub fn write_profile_csv(path: &Path, profile: &IsoProfile) -> Result<()> {
    write_atomic(path, &profile_csv(profile)?)
}

/// Parses a profile CSV. With only `V,I` columns the one-sided derivatives
/// come from three-point differences.
pub fn parse_profile_csv(text: &str) -> Result<IsoProfile> {
    let (first, mut body) = header_and_body(text);
    let header: ProfileHeader = serde_json::from_str(first)?;
    let rows = numeric_rows(&mut body, 2)?;
    let v = rows.iter().map(|r| r[0]).collect();
    let i = rows.iter().map(|r| r[1]).collect();
    if rows.iter().all(|r| r.len() >= 4) {
        let dp = rows.iter().map(|r| r[2]).collect();
        let dm = rows.iter().map(|r| r[3]).collect();
        IsoProfile::with_derivatives(v, i, dp, dm, header.chi_boundary, header.core_volume)
    } else {
        IsoProfile::from_samples(v, i, header.chi_boundary, header.core_volume)
    }
}

pub fn read_profile_csv(path: &Path) -> Result<IsoProfile> {
    parse_profile_csv(&fs::read_to_string(path)?)
}

pub fn hawking_csv(trace: &HawkingTrace) -> Result<Vec<u8>> {
    let rows = (0..trace.v.len())
        .map(|k| vec![trace.v[k].to_string(), trace.m_h[k].to_string(), trace.m_h_minus[k].to_string()]);
    csv_bytes(&["V", "m_H", "m_H_minus"], rows)
}

pub fn flow_trace_csv(trace: &FlowTrace) -> Result<Vec<u8>> {
    let rows = trace.records.iter().map(|r| {
        vec![r.t.to_string(), r.w_rel.to_string(), r.max_curv_dev.to_string(), r.area.to_string(), r.dw_dt.to_string()]
    });
    csv_bytes(&["t", "W_rel", "max_curv_dev", "area", "dW_dt"], rows)
}

pub fn threshold_csv(rows: &[StabilityThreshold]) -> Result<Vec<u8>> {
    let rows = rows
        .iter()
        .map(|t| vec![t.lambda.to_string(), t.bc.to_string(), t.a_max.to_string(), t.r_min.to_string()]);
    csv_bytes(&["lambda", "bc", "a_max", "R_min"], rows)
}

pub fn parse_threshold_csv(text: &str) -> Result<Vec<StabilityThreshold>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::invalid(format!("threshold row {} needs 4 columns", k + 1)));
        }
        out.push(StabilityThreshold {
            lambda: parse_f64(&rec[0], k + 2)?,
            bc: rec[1].parse()?,
            a_max: parse_f64(&rec[2], k + 2)?,
            r_min: parse_f64(&rec[3], k + 2)?,
        });
    }
    Ok(out)
}

pub fn write_conformal_json(path: &Path, omega: &ConformalFactor) -> Result<()> {
    write_atomic(path, &serde_json::to_vec_pretty(&omega.to_file())?)
}

pub fn read_conformal_json(reader: impl Read) -> Result<ConformalFactor> {
    let file: ConformalFactorFile = serde_json::from_reader(BufReader::new(reader))?;
    ConformalFactor::from_file(&file)
}

/// W-volume along a foliation, with deviations from the first leaf and the
/// Minkowski slack of each leaf.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationRecord {
    pub surface_id: String,
    pub r_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub deviations: Vec<f64>,
    pub slacks: Vec<f64>,
}

impl FoliationRecord {
    pub fn from_states(surface_id: impl Into<String>, states: &[FlowState]) -> Self {
        let values: Vec<f64> = states.iter().map(|s| s.w_volume()).collect();
        let base = values.first().copied().unwrap_or(0.0);
        Self {
            surface_id: surface_id.into(),
            r_grid: states.iter().map(|s| s.r).collect(),
            deviations: values.iter().map(|v| v - base).collect(),
            slacks: states.iter().map(|s| minkowski_from_totals(&s.totals).slack_log).collect(),
            values,
        }
    }
}

/// Appends one JSON record per line.
pub fn append_foliation_record(path: &Path, record: &FoliationRecord) -> Result<()> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    f.write_all(&line)?;
    Ok(())
}

pub fn read_foliation_records(path: &Path) -> Result<Vec<FoliationRecord>> {
    let f = fs::File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
