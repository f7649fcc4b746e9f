//! Command pipelines: each subcommand maps to one `run_*` function that
//! reads inputs, computes, and writes its artifact set under the output
//! directory.  Every successful run also writes `manifest_<command>.json`
//! with input digests, the effective settings text, and wall time; on
//! failure all files written so far are removed.
//!
//! Timing never leaks into result artifacts — wall-clock values live only
//! in the manifests, `timing.csv`, and the derived `reports/efficiency.csv`,
//! so everything else is byte-identical across repeat runs.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use cayvol_core::atlas::{
    basin_from_bottom, estimate_boltzmann, partition_mc_sample, AcrDescriptor, McVariant,
    PseudoAtlas,
};
use cayvol_core::constraint::{AssemblySystem, ConstraintSystem, PairRule};
use cayvol_core::decomp::DecompositionVariant;
use cayvol_core::geom::Pose;
use cayvol_core::grid::{cube_of, CubeKey};
use cayvol_core::measure::{
    baseline_enumerate, coverage_report, efficiency_row, gamma, level_volumes, shape_distribution,
    volume_report, weighted_basin_volume, BaselineGrid, MeasureError, ShapeMeasure, UnionCounting,
};
use cayvol_core::sampler::{
    sample_acr, AcrSampleResult, Parallelism, SampleCounters, SampleError, SampleSettings,
};

use crate::config::RunConfig;
use crate::format::sig17;
use crate::io::{
    self, atlas_csv, baseline_csv, descriptor_from_stem, descriptor_stem, read_baseline_csv,
    read_point_set, read_result_csv, read_trajectory, result_csv,
};
use crate::manifest::{digest_file, manifest_json};
use crate::{CliError, Result};

/// Output-directory handle that remembers every file it wrote so a failed
/// run can take its partial outputs away again.
struct Workspace {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Workspace {
    fn new(root: &Path) -> Self {
        Workspace { root: root.to_path_buf(), written: Vec::new() }
    }

    fn write(&mut self, rel: impl AsRef<Path>, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.root.join(rel);
        io::write_bytes(&path, bytes.as_ref())?;
        self.written.push(path);
        Ok(())
    }

    fn cleanup(&self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }
}

/// What a pipeline hands back for the manifest: headline counters and the
/// digests of every input file it consumed.
struct Outcome {
    counters: serde_json::Value,
    inputs: BTreeMap<String, String>,
}

/// Run one subcommand against a parsed configuration.  Artifacts land under
/// `cfg.out_dir`; the manifest is written last so its presence marks a
/// completed run.
pub fn execute(command: &str, cfg: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let mut ws = Workspace::new(&cfg.out_dir);
    let outcome = match command {
        "sample-acr" => run_sample_acr(cfg, &mut ws),
        "sample-basin" => run_sample_basin(cfg, &mut ws),
        "baseline" => run_baseline(cfg, &mut ws),
        "mc-ingest" => run_mc_ingest(cfg, &mut ws),
        "measure" => run_measure(cfg, &mut ws),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    };
    match outcome {
        Ok(Outcome { counters, inputs }) => {
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let manifest = manifest_json(command, &cfg.serialize(), &inputs, wall_ms, counters);
            if let Err(e) = ws.write(format!("manifest_{command}.json"), manifest) {
                ws.cleanup();
                return Err(e);
            }
            Ok(())
        }
        Err(e) => {
            ws.cleanup();
            Err(e)
        }
    }
}

/// Build the assembly system from the configured point-set files, recording
/// their digests, and check the constraint rules against every cross pair.
fn load_system(cfg: &RunConfig) -> Result<(AssemblySystem, BTreeMap<String, String>)> {
    let path_a = cfg
        .point_set_a
        .as_ref()
        .ok_or_else(|| CliError::Config("no point set A; set [PointSetA] file".into()))?;
    let path_b = cfg
        .point_set_b
        .as_ref()
        .ok_or_else(|| CliError::Config("no point set B; set [PointSetB] file".into()))?;
    let set_a = read_point_set(path_a)?;
    let set_b = read_point_set(path_b)?;
    let mut inputs = BTreeMap::new();
    inputs.insert(path_a.display().to_string(), digest_file(path_a)?);
    inputs.insert(path_b.display().to_string(), digest_file(path_b)?);

    let mut constraints = ConstraintSystem::new(
        PairRule::new(cfg.active_lower.0, cfg.active_lower.1),
        PairRule::new(cfg.active_upper.0, cfg.active_upper.1),
    );
    if let Some((lo, hi)) = cfg.restraint_radians() {
        constraints = constraints.with_axis_restraint(lo, hi);
    }
    let sys = AssemblySystem::new(set_a, set_b, constraints);
    for (a, b) in sys.pairs() {
        let rs = sys
            .radii_sum(a, b)
            .map_err(|e| CliError::Config(e.to_string()))?;
        sys.constraints
            .validate(rs)
            .map_err(|e| CliError::Config(format!("pair ({a}, {b}): {e}")))?;
    }
    for &(a, b) in &cfg.contacts {
        sys.radii_sum(a, b)
            .map_err(|e| CliError::Config(format!("contact ({a}, {b}): {e}")))?;
    }
    Ok((sys, inputs))
}

fn sample_settings(cfg: &RunConfig) -> SampleSettings {
    let mut settings =
        SampleSettings::new(cfg.variant(), cfg.grid(), cfg.resolved_cayley_step());
    settings.order = cfg.order;
    settings.parallelism = parallelism(cfg);
    settings
}

fn parallelism(cfg: &RunConfig) -> Parallelism {
    if cfg.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    }
}

fn variant_name(v: DecompositionVariant) -> &'static str {
    match v {
        DecompositionVariant::Simplicial => "simplicial",
        DecompositionVariant::Basis => "basis",
        DecompositionVariant::Thick => "thick",
        DecompositionVariant::FaceCenter => "face-center",
        DecompositionVariant::Hybrid => "hybrid",
    }
}

fn map_sample_error(e: SampleError) -> CliError {
    match e {
        SampleError::ThickNeedsSinglePair(_) => CliError::Config(e.to_string()),
        other => CliError::Domain(other.to_string()),
    }
}

/// Region-run summary.  `wallTime` is always null here: timing belongs to
/// the manifest and `timing.csv` so summaries stay reproducible.
fn summary_json(result: &AcrSampleResult, note: Option<&str>) -> String {
    let c = &result.counters;
    let mut v = json!({
        "acr": result.acr.to_string(),
        "variant": variant_name(result.variant),
        "countedCubes": result.counted.len(),
        "empty": result.empty,
        "wallTime": null,
        "baseCandidates": c.base_candidates,
        "baseRealizable": c.base_realizable,
        "seedCubes": c.seed_cubes,
        "processed": c.cubes_processed,
        "solves": c.solves,
        "intersectionsFound": c.intersections_found,
        "intersectionsDiscarded": c.intersections_discarded,
        "peakFrontier": c.peak_frontier,
        "promotions": c.promotions,
    });
    if let Some(note) = note {
        v["note"] = json!(note);
    }
    let mut s = serde_json::to_string_pretty(&v).expect("summary serializes");
    s.push('\n');
    s
}

/// A result for a region with nothing to do (the ambient region): no base
/// space, no cubes, but still a complete artifact pair.
fn stub_result(acr: AcrDescriptor, variant: DecompositionVariant) -> AcrSampleResult {
    AcrSampleResult {
        acr,
        variant,
        counted: BTreeMap::new(),
        per_flip_visited: BTreeMap::new(),
        counters: SampleCounters::default(),
        empty: true,
    }
}

const TIMING_HEADER: &str = "label,wallMs,counted,peakFrontier";

fn timing_row(label: &str, wall_ms: f64, counted: usize, peak: u64) -> String {
    format!("{label},{},{counted},{peak}\n", sig17(wall_ms))
}

fn run_sample_acr(cfg: &RunConfig, ws: &mut Workspace) -> Result<Outcome> {
    let (sys, inputs) = load_system(cfg)?;
    let started = Instant::now();
    let (result, note) = if cfg.contacts.is_empty() {
        (
            stub_result(AcrDescriptor::new(&[]), cfg.variant()),
            Some("ambient region has no active pairs; nothing to sample"),
        )
    } else {
        let acr = AcrDescriptor::new(&cfg.contacts);
        let settings = sample_settings(cfg);
        (sample_acr(&sys, &acr, &settings).map_err(map_sample_error)?, None)
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let stem = descriptor_stem(&result.acr);
    ws.write(format!("result_{stem}.csv"), result_csv(&result))?;
    ws.write(format!("summary_{stem}.json"), summary_json(&result, note))?;
    ws.write(
        "timing.csv",
        format!(
            "{TIMING_HEADER}\n{}",
            timing_row(&stem, wall_ms, result.counted.len(), result.counters.peak_frontier)
        ),
    )?;
    Ok(Outcome {
        counters: json!({
            "countedCubes": result.counted.len(),
            "empty": result.empty,
            "sampler": serde_json::to_value(&result.counters).expect("counters serialize"),
        }),
        inputs,
    })
}

fn run_sample_basin(cfg: &RunConfig, ws: &mut Workspace) -> Result<Outcome> {
    let (sys, inputs) = load_system(cfg)?;
    let bottom = AcrDescriptor::new(&cfg.contacts);
    let basin = basin_from_bottom(&bottom).map_err(|e| CliError::Config(e.to_string()))?;
    let settings = sample_settings(cfg);
    let dir = PathBuf::from(format!("basin_{}", descriptor_stem(&bottom)));

    let mut counts: BTreeMap<AcrDescriptor, u64> = BTreeMap::new();
    let mut levels_rows = String::from("acr,level,cubes\n");
    let mut timing = String::from(TIMING_HEADER);
    timing.push('\n');
    let mut sampled_members = 0u64;
    let mut total_counted = 0u64;
    for member in basin.members() {
        let started = Instant::now();
        let (result, note) = if member.is_empty() {
            (
                stub_result(member.clone(), cfg.variant()),
                Some("ambient region has no active pairs; nothing to sample"),
            )
        } else {
            sampled_members += 1;
            (sample_acr(&sys, member, &settings).map_err(map_sample_error)?, None)
        };
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;
        let stem = descriptor_stem(member);
        ws.write(dir.join(format!("result_{stem}.csv")), result_csv(&result))?;
        ws.write(dir.join(format!("summary_{stem}.json")), summary_json(&result, note))?;
        levels_rows.push_str(&format!(
            "\"{member}\",{},{}\n",
            member.energy_level(),
            result.counted.len()
        ));
        timing.push_str(&timing_row(
            &stem,
            wall_ms,
            result.counted.len(),
            result.counters.peak_frontier,
        ));
        total_counted += result.counted.len() as u64;
        counts.insert(member.clone(), result.counted.len() as u64);
    }
    ws.write(dir.join("levels.csv"), levels_rows)?;
    ws.write(dir.join("timing.csv"), timing)?;

    let per_level = level_volumes(&counts);
    let weighted = weighted_basin_volume(&per_level, cfg.boltzmann);
    let volume = json!({
        "bottom": bottom.to_string(),
        "factor": cfg.boltzmann,
        "perLevel": per_level.to_vec(),
        "weighted": weighted,
        "members": basin.members().len(),
        "sampledMembers": sampled_members,
        "relativeToSum": 1.0,
        "relativeToUnion": 1.0,
        "wallTime": null,
    });
    let mut volume_text = serde_json::to_string_pretty(&volume).expect("volume serializes");
    volume_text.push('\n');
    ws.write(dir.join("volume.json"), volume_text)?;

    Ok(Outcome {
        counters: json!({
            "members": basin.members().len(),
            "sampledMembers": sampled_members,
            "countedCubes": total_counted,
            "weightedVolume": weighted,
        }),
        inputs,
    })
}

fn run_baseline(cfg: &RunConfig, ws: &mut Workspace) -> Result<Outcome> {
    let (sys, inputs) = load_system(cfg)?;
    let grid = cfg.baseline_grid();
    let scan = baseline_enumerate(&sys, None, &grid, cfg.baseline_cap, parallelism(cfg)).map_err(
        |e| match e {
            MeasureError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Domain(other.to_string()),
        },
    )?;
    ws.write("baseline.csv", baseline_csv(&scan))?;
    let per_acr: BTreeMap<String, u64> = scan
        .per_acr
        .iter()
        .map(|(acr, keys)| (acr.to_string(), keys.len() as u64))
        .collect();
    let summary = json!({
        "scanned": scan.scanned,
        "feasible": scan.feasible,
        "descriptors": scan.per_acr.len(),
        "perAcr": per_acr,
        "wallTime": null,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    ws.write("baseline_summary.json", text)?;
    Ok(Outcome {
        counters: json!({
            "scanned": scan.scanned,
            "feasible": scan.feasible,
            "descriptors": scan.per_acr.len(),
        }),
        inputs,
    })
}

fn run_mc_ingest(cfg: &RunConfig, ws: &mut Workspace) -> Result<Outcome> {
    let (sys, mut inputs) = load_system(cfg)?;
    let path = cfg
        .trajectory
        .as_ref()
        .ok_or_else(|| CliError::Config("no trajectory file; set [MC] file or --trajectory".into()))?;
    let poses = read_trajectory(path)?;
    inputs.insert(path.display().to_string(), digest_file(path)?);
    let grid = cfg.grid();

    let mut per_variant = serde_json::Map::new();
    let mut counters = serde_json::Map::new();
    for variant in [McVariant::Mc1, McVariant::Mc2, McVariant::Mc3] {
        let mut atlas = PseudoAtlas::new();
        let mut rejected = 0u64;
        for pose in &poses {
            match partition_mc_sample(&sys, pose, variant) {
                // Both Euler tuples of the rotation land in the tally, so
                // cube occupancy matches grid-based sampling conventions.
                Ok(d) => atlas.add_sample_cubes(
                    d,
                    [cube_of(&grid, pose), cube_of(&grid, &pose.euler_dual())],
                ),
                Err(_) => rejected += 1,
            }
        }
        let name = variant.label().to_ascii_lowercase();
        ws.write(format!("atlas_{name}.csv"), atlas_csv(&atlas))?;
        per_variant.insert(
            variant.label().to_string(),
            json!({
                "samples": atlas.total_samples(),
                "rejected": rejected,
                "descriptors": atlas.descriptor_count(),
                "boltzmann": estimate_boltzmann(&atlas).ok(),
            }),
        );
        counters.insert(
            variant.label().to_string(),
            json!({ "samples": atlas.total_samples(), "rejected": rejected }),
        );
    }
    let summary = json!({
        "lines": poses.len(),
        "perVariant": per_variant,
        "wallTime": null,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    ws.write("atlas_summary.json", text)?;
    Ok(Outcome {
        counters: json!({ "lines": poses.len(), "perVariant": counters }),
        inputs,
    })
}

/// One basin's artifacts as read back from disk.
struct BasinArtifacts {
    bottom: AcrDescriptor,
    counts: BTreeMap<AcrDescriptor, u64>,
    cubes: BTreeMap<AcrDescriptor, BTreeSet<CubeKey>>,
    poses: Vec<Pose>,
    timing: Vec<(String, f64, u64, u64)>,
}

fn read_basin_dir(dir: &Path) -> Result<BasinArtifacts> {
    let stem = dir
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_prefix("basin_"))
        .ok_or_else(|| CliError::Domain(format!("not a basin directory: {}", dir.display())))?;
    let bottom = descriptor_from_stem(stem).ok_or_else(|| {
        CliError::Domain(format!("cannot read a region name from `{stem}`"))
    })?;
    let mut counts = BTreeMap::new();
    let mut cubes: BTreeMap<AcrDescriptor, BTreeSet<CubeKey>> = BTreeMap::new();
    let mut poses = Vec::new();
    let mut result_files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("result_") && n.ends_with(".csv"))
        })
        .collect();
    result_files.sort();
    for path in &result_files {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let member_stem = &name["result_".len()..name.len() - ".csv".len()];
        let member = descriptor_from_stem(member_stem).ok_or_else(|| {
            CliError::Domain(format!("cannot read a region name from `{member_stem}`"))
        })?;
        let rows = read_result_csv(path)?;
        counts.insert(member.clone(), rows.len() as u64);
        let entry = cubes.entry(member).or_default();
        for (_, key, pose) in rows {
            entry.insert(key);
            poses.push(pose);
        }
    }
    if counts.is_empty() {
        return Err(CliError::Config(format!(
            "no result files under {}; run `cayvol sample-basin` first",
            dir.display()
        )));
    }
    let timing = read_timing_csv(&dir.join("timing.csv"))?;
    Ok(BasinArtifacts { bottom, counts, cubes, poses, timing })
}

fn read_timing_csv(path: &Path) -> Result<Vec<(String, f64, u64, u64)>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            if fields.len() != 4 {
                return None;
            }
            Some((
                fields[0].to_string(),
                fields[1].parse::<f64>().ok()?,
                fields[2].parse::<u64>().ok()?,
                fields[3].parse::<u64>().ok()?,
            ))
        })();
        match parsed {
            Some(row) => rows.push(row),
            None => {
                return Err(CliError::Config(format!(
                    "{}:{}: bad timing row `{line}`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

fn measure_name(m: ShapeMeasure) -> &'static str {
    match m {
        ShapeMeasure::Weighted => "weighted",
        ShapeMeasure::VsUnion => "vsUnion",
        ShapeMeasure::VsAcrAverage => "vsAcrAverage",
        ShapeMeasure::VsBasinAverage => "vsBasinAverage",
    }
}

fn opt17(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_default()
}

fn run_measure(cfg: &RunConfig, ws: &mut Workspace) -> Result<Outcome> {
    let out = cfg.out_dir.clone();
    let baseline_path = out.join("baseline.csv");
    if !baseline_path.exists() {
        return Err(CliError::Config(format!(
            "no {}; run `cayvol baseline` first",
            baseline_path.display()
        )));
    }
    let mut inputs = BTreeMap::new();
    inputs.insert(baseline_path.display().to_string(), digest_file(&baseline_path)?);
    let per_acr = read_baseline_csv(&baseline_path)?;
    let feasible: u64 = per_acr.values().map(|s| s.len() as u64).sum();
    let baseline = BaselineGrid {
        grid: cfg.baseline_grid(),
        per_acr,
        scanned: feasible,
        feasible,
    };

    let mut basin_dirs: Vec<PathBuf> = fs::read_dir(&out)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", out.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("basin_"))
        })
        .collect();
    basin_dirs.sort();
    if basin_dirs.is_empty() {
        return Err(CliError::Config(format!(
            "no basin_* directories under {}; run `cayvol sample-basin` first",
            out.display()
        )));
    }
    let basins: Vec<BasinArtifacts> =
        basin_dirs.iter().map(|d| read_basin_dir(d)).collect::<Result<_>>()?;

    // Weighted volumes and shares across all basins.
    let pairs: Vec<(AcrDescriptor, BTreeMap<AcrDescriptor, u64>)> =
        basins.iter().map(|b| (b.bottom.clone(), b.counts.clone())).collect();
    let report = volume_report(&pairs, cfg.boltzmann)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let mut volumes = String::from(
        "basin,level1,level2,level3,level4,level5,weighted,relativeToSum,relativeToUnion\n",
    );
    for b in &report.basins {
        volumes.push_str(&format!("\"{}\"", b.bottom));
        for v in b.per_level {
            volumes.push_str(&format!(",{}", sig17(v)));
        }
        volumes.push_str(&format!(
            ",{},{},{}\n",
            sig17(b.weighted),
            sig17(b.relative_to_sum),
            sig17(b.relative_to_union)
        ));
    }
    ws.write("reports/volumes.csv", volumes)?;

    // Per-level shape distributions, every measure, both raw and weighted
    // fractions; undefined levels leave their fields empty.
    let all_counts: Vec<BTreeMap<AcrDescriptor, u64>> =
        basins.iter().map(|b| b.counts.clone()).collect();
    let mut shape = String::from("basin,measure,level,value,fraction\n");
    for b in &basins {
        for measure in [
            ShapeMeasure::Weighted,
            ShapeMeasure::VsUnion,
            ShapeMeasure::VsAcrAverage,
            ShapeMeasure::VsBasinAverage,
        ] {
            let rep = shape_distribution(
                &b.counts,
                &all_counts,
                cfg.boltzmann,
                measure,
                UnionCounting::Disjoint,
            );
            for k in 1..=5usize {
                shape.push_str(&format!(
                    "\"{}\",{},{k},{},{}\n",
                    b.bottom,
                    measure_name(measure),
                    opt17(rep.values[k - 1]),
                    opt17(rep.fractions[k - 1]),
                ));
            }
        }
    }
    ws.write("reports/shape.csv", shape)?;

    // Coverage of the reference grid by the stored sample poses.
    let poses: Vec<Pose> = basins.iter().flat_map(|b| b.poses.iter().copied()).collect();
    if baseline.feasible == 0 {
        return Err(CliError::Domain(
            "the reference scan found no feasible points; coverage is undefined".into(),
        ));
    }
    if poses.is_empty() {
        return Err(CliError::Domain(
            "the basins hold no sampled configurations; coverage is undefined".into(),
        ));
    }
    let g = gamma(baseline.feasible, poses.len() as u64);
    let cov = coverage_report(&baseline.all_points(), &poses, &baseline.grid, g);
    ws.write(
        "reports/coverage.csv",
        format!(
            "gamma,baselinePoints,sampleCount,missed,missedRatio\n{},{},{},{},{}\n",
            sig17(cov.gamma),
            cov.baseline_points,
            cov.sample_count,
            cov.missed,
            sig17(cov.missed_ratio)
        ),
    )?;
    let mut hist = String::from("nu,cubes,fraction\n");
    for (&nu, &cubes) in &cov.histogram {
        hist.push_str(&format!("{nu},{cubes},{}\n", sig17(cov.fractions[&nu])));
    }
    ws.write("reports/coverage_histogram.csv", hist)?;

    // Region-by-region agreement between counted cubes and the reference
    // scan projected onto the sampling grid.
    let projected = baseline.project(&cfg.grid());
    let mut sampled: BTreeMap<AcrDescriptor, BTreeSet<CubeKey>> = BTreeMap::new();
    for b in &basins {
        for (member, keys) in &b.cubes {
            sampled.entry(member.clone()).or_default().extend(keys.iter().copied());
        }
    }
    let descriptors: BTreeSet<AcrDescriptor> = sampled
        .keys()
        .chain(projected.keys())
        .cloned()
        .collect();
    let mut oracle = String::from("acr,sampledCubes,referenceCubes,ratio,jaccard\n");
    for acr in &descriptors {
        let empty = BTreeSet::new();
        let s = sampled.get(acr).unwrap_or(&empty);
        let r = projected.get(acr).unwrap_or(&empty);
        let inter = s.intersection(r).count();
        let union = s.union(r).count();
        let ratio = if r.is_empty() {
            String::new()
        } else {
            sig17(s.len() as f64 / r.len() as f64)
        };
        let jaccard = if union == 0 {
            String::new()
        } else {
            sig17(inter as f64 / union as f64)
        };
        oracle.push_str(&format!(
            "\"{acr}\",{},{},{ratio},{jaccard}\n",
            s.len(),
            r.len()
        ));
    }
    ws.write("reports/oracle.csv", oracle)?;

    // Sampling efficiency from the recorded per-member timings.  This file
    // carries wall-clock numbers, so it sits outside the reproducible set
    // alongside timing.csv and the manifests.
    let mut efficiency =
        String::from("label,counted,wallMs,ratePerMs,peakFrontier,frontierToCounted,flagged\n");
    for b in &basins {
        for (label, wall_ms, counted, peak) in &b.timing {
            let row = efficiency_row(label, *counted, *wall_ms, *peak);
            efficiency.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.label,
                row.counted,
                sig17(row.wall_ms),
                sig17(row.rate_per_ms),
                row.peak_frontier,
                sig17(row.frontier_to_counted),
                row.flagged
            ));
        }
    }
    ws.write("reports/efficiency.csv", efficiency)?;

    // Occupancy falloff estimates from an earlier trajectory ingest, when
    // one ran into the same output directory.
    let atlas_summary = out.join("atlas_summary.json");
    let estimated = if atlas_summary.exists() {
        inputs.insert(atlas_summary.display().to_string(), digest_file(&atlas_summary)?);
        let text = fs::read_to_string(&atlas_summary)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", atlas_summary.display())))?;
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", atlas_summary.display())))?;
        let mut m = serde_json::Map::new();
        if let Some(pv) = v.get("perVariant").and_then(|p| p.as_object()) {
            for (name, entry) in pv {
                m.insert(name.clone(), entry.get("boltzmann").cloned().unwrap_or(json!(null)));
            }
        }
        json!(m)
    } else {
        json!(null)
    };

    let summary = json!({
        "gamma": g,
        "missedRatio": cov.missed_ratio,
        "baselinePoints": cov.baseline_points,
        "sampleCount": cov.sample_count,
        "basins": basins.len(),
        "sumVolume": report.sum_volume,
        "unionVolume": report.union_volume,
        "boltzmann": { "configured": cfg.boltzmann, "estimatedFromTrajectory": estimated },
        "wallTime": null,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    ws.write("measure_summary.json", text)?;

    Ok(Outcome {
        counters: json!({
            "basins": basins.len(),
            "gamma": g,
            "missedRatio": cov.missed_ratio,
            "sumVolume": report.sum_volume,
            "unionVolume": report.union_volume,
        }),
        inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::RESULT_HEADER;
    use std::path::Path;

    fn write(path: &Path, text: &str) {
        io::write_bytes(path, text.as_bytes()).unwrap();
    }

    /// Two well-separated points per side, radius 1: pair wells at distance
    /// 2·λ — small enough to sample fast, real enough to count cubes.
    fn point_files(dir: &Path) -> (PathBuf, PathBuf) {
        let a = dir.join("a.txt");
        let b = dir.join("b.txt");
        write(&a, "1 0 0 0 1.0\n2 2.0 0 0 1.0\n3 1.0 1.8 0 1.0\n");
        write(&b, "1 0 0 0 1.0\n2 2.1 0 0 1.0\n3 1.0 1.7 0 1.0\n");
        (a, b)
    }

    fn base_config(dir: &Path) -> RunConfig {
        let (a, b) = point_files(dir);
        let mut cfg = RunConfig::default();
        cfg.point_set_a = Some(a);
        cfg.point_set_b = Some(b);
        cfg.out_dir = dir.join("out");
        cfg.cartesian_steps = ([2.0; 3], [4; 3]);
        cfg.baseline_steps = ([2.0; 3], [4; 3]);
        cfg
    }

    #[test]
    fn sample_acr_writes_result_summary_timing_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = base_config(tmp.path());
        cfg.contacts = vec![(1, 1), (2, 2)];
        execute("sample-acr", &cfg).unwrap();
        let out = cfg.out_dir;
        for name in [
            "result_1-1_2-2.csv",
            "summary_1-1_2-2.json",
            "timing.csv",
            "manifest_sample-acr.json",
        ] {
            assert!(out.join(name).exists(), "missing {name}");
        }
        let text = fs::read_to_string(out.join("result_1-1_2-2.csv")).unwrap();
        assert!(text.starts_with(RESULT_HEADER));
        assert!(text.lines().count() > 1, "expected counted cubes");
    }

    #[test]
    fn ambient_sample_is_a_complete_empty_artifact() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = base_config(tmp.path());
        execute("sample-acr", &cfg).unwrap();
        let summary: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(cfg.out_dir.join("summary_ambient.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["countedCubes"], 0);
        assert_eq!(summary["empty"], true);
        assert!(summary["note"].as_str().unwrap().contains("ambient"));
        assert!(summary["wallTime"].is_null());
    }

    #[test]
    fn missing_point_sets_fail_with_config_error() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.out_dir = tmp.path().join("out");
        let err = execute("sample-acr", &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        // A failed run leaves no partial artifacts behind.
        assert!(!cfg.out_dir.join("timing.csv").exists());
    }

    #[test]
    fn baseline_budget_overflow_exits_with_budget_code() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = base_config(tmp.path());
        cfg.baseline_cap = 10;
        let err = execute("baseline", &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(!cfg.out_dir.join("baseline.csv").exists());
    }

    #[test]
    fn measure_without_baseline_names_the_prerequisite() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = base_config(tmp.path());
        let err = execute("measure", &cfg).unwrap_err();
        assert!(err.to_string().contains("cayvol baseline"), "{err}");
    }

    #[test]
    fn mc_ingest_tallies_all_three_variants() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = base_config(tmp.path());
        let traj = tmp.path().join("traj.txt");
        // First pose sits just outside set A (nearest pair (2,1)); second
        // is far out in free space; third collides (rejected).
        write(
            &traj,
            "4.2 0 0 0 0 0\n9.0 9.0 9.0 0 0 0\n0.1 0 0 0 0 0\n",
        );
        cfg.trajectory = Some(traj);
        execute("mc-ingest", &cfg).unwrap();
        let out = cfg.out_dir;
        for name in ["atlas_mc1.csv", "atlas_mc2.csv", "atlas_mc3.csv", "atlas_summary.json"] {
            assert!(out.join(name).exists(), "missing {name}");
        }
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("atlas_summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["lines"], 3);
        for variant in ["MC1", "MC2", "MC3"] {
            assert_eq!(summary["perVariant"][variant]["rejected"], 1, "{variant}");
            assert_eq!(summary["perVariant"][variant]["samples"], 2, "{variant}");
        }
    }
}
