//! File formats: point sets (plain text or minimal PDB), Monte Carlo
//! trajectories, counted-cube result CSVs, reference-grid CSVs, and
//! trajectory-atlas CSVs.  All writers emit rows in deterministic map
//! order with floats at 17 significant digits.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use cayvol_core::atlas::{AcrDescriptor, PseudoAtlas};
use cayvol_core::geom::{Point, PointSet, Pose, Vec3};
use cayvol_core::grid::CubeKey;
use cayvol_core::measure::BaselineGrid;
use cayvol_core::sampler::AcrSampleResult;

use crate::format::sig17;
use crate::{CliError, Result};

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Domain(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))
}

/// Van der Waals-style default radii for the minimal PDB reader, by
/// element symbol.
const ELEMENT_RADII: &[(&str, f64)] = &[
    ("H", 1.2),
    ("C", 1.7),
    ("N", 1.55),
    ("O", 1.52),
    ("F", 1.47),
    ("P", 1.8),
    ("S", 1.8),
    ("CL", 1.75),
    ("BR", 1.85),
    ("I", 1.98),
    ("FE", 2.0),
    ("ZN", 1.39),
    ("MG", 1.73),
    ("NA", 2.27),
    ("K", 2.75),
    ("CA", 2.31),
];

fn element_radius(symbol: &str) -> Option<f64> {
    let upper = symbol.to_ascii_uppercase();
    ELEMENT_RADII.iter().find(|(s, _)| *s == upper).map(|&(_, r)| r)
}

/// Read a point set, dispatching on the `.pdb` extension; everything else
/// is the plain `id x y z radius` format with `#` comments.
pub fn read_point_set(path: &Path) -> Result<PointSet> {
    let text = read_to_string(path)?;
    let points = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pdb")) {
        parse_pdb(&text, path)?
    } else {
        parse_point_text(&text, path)?
    };
    PointSet::new(points)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_point_text(text: &str, path: &Path) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = (|| {
            if fields.len() != 5 {
                return None;
            }
            let id = fields[0].parse::<u32>().ok()?;
            let mut v = [0.0f64; 4];
            for (k, f) in fields[1..].iter().enumerate() {
                v[k] = f.parse().ok()?;
            }
            Some(Point::new(id, v[0], v[1], v[2], v[3]))
        })();
        match parsed {
            Some(p) => points.push(p),
            None => errors.push(format!(
                "{}:{}: expected `id x y z radius`, got `{line}`",
                path.display(),
                i + 1
            )),
        }
    }
    if errors.is_empty() {
        Ok(points)
    } else {
        Err(CliError::Config(errors.join("\n")))
    }
}

/// Minimal PDB reader: ATOM records only, fixed columns, radii assigned
/// from the element table.  The element comes from columns 77–78, falling
/// back to the first letter of the atom name.
fn parse_pdb(text: &str, path: &Path) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if !line.starts_with("ATOM") {
            continue;
        }
        let field = |lo: usize, hi: usize| line.get(lo..hi.min(line.len())).unwrap_or("").trim();
        let parsed = (|| {
            let id = field(6, 11).parse::<u32>().ok()?;
            let x = field(30, 38).parse::<f64>().ok()?;
            let y = field(38, 46).parse::<f64>().ok()?;
            let z = field(46, 54).parse::<f64>().ok()?;
            let mut element = field(76, 78).to_string();
            if element.is_empty() {
                element = field(12, 16)
                    .chars()
                    .find(|c| c.is_ascii_alphabetic())
                    .map(String::from)?;
            }
            let radius = element_radius(&element)?;
            Some(Point::new(id, x, y, z, radius))
        })();
        match parsed {
            Some(p) => points.push(p),
            None => errors.push(format!(
                "{}:{}: unparsable ATOM record or unknown element",
                path.display(),
                i + 1
            )),
        }
    }
    if errors.is_empty() {
        Ok(points)
    } else {
        Err(CliError::Config(errors.join("\n")))
    }
}

/// Trajectory file: whitespace-separated lines of six numbers, the first
/// three translations and the last three rotations (radians); `#` comments
/// and blank lines are skipped.
pub fn read_trajectory(path: &Path) -> Result<Vec<Pose>> {
    let text = read_to_string(path)?;
    let mut poses = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: Option<Vec<f64>> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().ok())
            .collect();
        match values {
            Some(v) if v.len() == 6 => {
                poses.push(Pose::new(Vec3::new(v[0], v[1], v[2]), [v[3], v[4], v[5]]));
            }
            _ => errors.push(format!(
                "{}:{}: expected six numbers, got `{line}`",
                path.display(),
                i + 1
            )),
        }
    }
    if errors.is_empty() {
        Ok(poses)
    } else {
        Err(CliError::Config(errors.join("\n")))
    }
}

/// Filesystem-safe name for a region descriptor: pair list with `_`
/// between pairs, or `ambient`.
pub fn descriptor_stem(acr: &AcrDescriptor) -> String {
    if acr.is_empty() {
        "ambient".to_string()
    } else {
        acr.to_string().replace(',', "_")
    }
}

/// Inverse of [`descriptor_stem`].
pub fn descriptor_from_stem(stem: &str) -> Option<AcrDescriptor> {
    if stem == "ambient" {
        return Some(AcrDescriptor::new(&[]));
    }
    stem.replace('_', ",").parse().ok()
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

/// Split a CSV row whose first field is a quoted descriptor.
fn split_descriptor_row(line: &str) -> Option<(String, Vec<&str>)> {
    let rest = line.strip_prefix('"')?;
    let end = rest.find('"')?;
    let acr = rest[..end].to_string();
    let tail = rest[end + 1..].strip_prefix(',')?;
    Some((acr, tail.split(',').collect()))
}

pub const RESULT_HEADER: &str = "flip,i1,i2,i3,i4,i5,i6,tx,ty,tz,rx,ry,rz";

/// One row per counted cube: the finding flip, the cube key, and the
/// stored representative pose.
pub fn result_csv(result: &AcrSampleResult) -> String {
    let mut s = String::from(RESULT_HEADER);
    s.push('\n');
    for (key, config) in &result.counted {
        s.push_str(&format!("{}", config.flip));
        for i in key.0 {
            s.push_str(&format!(",{i}"));
        }
        for c in config.pose.coords() {
            s.push(',');
            s.push_str(&sig17(c));
        }
        s.push('\n');
    }
    s
}

pub fn read_result_csv(path: &Path) -> Result<Vec<(u32, CubeKey, Pose)>> {
    let text = read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != RESULT_HEADER {
                return Err(CliError::Config(format!(
                    "{}: unexpected header `{line}`",
                    path.display()
                )));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            if fields.len() != 13 {
                return None;
            }
            let flip = fields[0].parse::<u32>().ok()?;
            let mut key = [0i64; 6];
            for k in 0..6 {
                key[k] = fields[1 + k].parse().ok()?;
            }
            let mut c = [0.0f64; 6];
            for k in 0..6 {
                c[k] = fields[7 + k].parse().ok()?;
            }
            Some((flip, CubeKey(key), Pose::from_coords(&c)))
        })();
        match parsed {
            Some(row) => rows.push(row),
            None => {
                return Err(CliError::Config(format!(
                    "{}:{}: bad result row `{line}`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

pub const BASELINE_HEADER: &str = "acr,i1,i2,i3,i4,i5,i6";

pub fn baseline_csv(grid: &BaselineGrid) -> String {
    let mut s = String::from(BASELINE_HEADER);
    s.push('\n');
    for (acr, keys) in &grid.per_acr {
        let name = quote(&acr.to_string());
        for key in keys {
            s.push_str(&name);
            for i in key.0 {
                s.push_str(&format!(",{i}"));
            }
            s.push('\n');
        }
    }
    s
}

pub fn read_baseline_csv(path: &Path) -> Result<BTreeMap<AcrDescriptor, BTreeSet<CubeKey>>> {
    let text = read_to_string(path)?;
    let mut out: BTreeMap<AcrDescriptor, BTreeSet<CubeKey>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let parsed = (|| {
            let (acr_text, fields) = split_descriptor_row(line)?;
            if fields.len() != 6 {
                return None;
            }
            let acr: AcrDescriptor = acr_text.parse().ok()?;
            let mut key = [0i64; 6];
            for k in 0..6 {
                key[k] = fields[k].parse().ok()?;
            }
            Some((acr, CubeKey(key)))
        })();
        match parsed {
            Some((acr, key)) => {
                out.entry(acr).or_default().insert(key);
            }
            None => {
                return Err(CliError::Config(format!(
                    "{}:{}: bad reference row `{line}`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

pub const ATLAS_HEADER: &str = "acr,samples,cubes";

pub fn atlas_csv(atlas: &PseudoAtlas) -> String {
    let mut s = String::from(ATLAS_HEADER);
    s.push('\n');
    for (acr, samples, cubes) in atlas.iter() {
        s.push_str(&format!("{},{samples},{cubes}\n", quote(&acr.to_string())));
    }
    s
}

pub fn read_atlas_csv(path: &Path) -> Result<BTreeMap<AcrDescriptor, (u64, u64)>> {
    let text = read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let parsed = (|| {
            let (acr_text, fields) = split_descriptor_row(line)?;
            if fields.len() != 2 {
                return None;
            }
            let acr: AcrDescriptor = acr_text.parse().ok()?;
            let samples = fields[0].parse::<u64>().ok()?;
            let cubes = fields[1].parse::<u64>().ok()?;
            Some((acr, (samples, cubes)))
        })();
        match parsed {
            Some((acr, counts)) => {
                out.insert(acr, counts);
            }
            None => {
                return Err(CliError::Config(format!(
                    "{}:{}: bad atlas row `{line}`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}
