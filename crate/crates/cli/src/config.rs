//! Settings-file parsing.  The file is INI-style and the section/key names
//! follow the familiar settings conventions (`[PointSetA] file`,
//! `[Sampling] cartesianIntersectionMode`, `initial_Contact_XX`, …), so
//! existing worked settings translate directly.  Unknown keys warn rather
//! than fail; malformed ones are collected with their line numbers and
//! reported together.

use std::path::PathBuf;

use cayvol_core::decomp::DecompositionVariant;
use cayvol_core::frontier::WorklistOrder;
use cayvol_core::grid::GridSpec;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub point_set_a: Option<PathBuf>,
    pub point_set_b: Option<PathBuf>,
    /// (λ, δ) pairs in the bound formula d = λ(r_a + r_b) + δ.
    pub active_lower: (f64, f64),
    pub active_upper: (f64, f64),
    pub collision: (f64, f64),
    /// Allowed principal-axis angle interval, in degrees (the only angular
    /// quantity in degrees anywhere; everything else is radians).
    pub angular_restraint: Option<(f64, f64)>,
    /// Active pairs, in `initial_Contact_XX` index order.
    pub contacts: Vec<(u32, u32)>,
    /// Declared region dimension (6 − |contacts|), checked when present.
    pub declared_dimension: Option<i64>,
    /// Decomposition selector 0–4.
    pub mode: u8,
    /// Three translational step lengths plus three rotational step counts
    /// per full turn.
    pub cartesian_steps: ([f64; 3], [i64; 3]),
    pub baseline_steps: ([f64; 3], [i64; 3]),
    /// Base-space spacing; `None` derives min translational step / 4.
    pub cayley_step: Option<f64>,
    pub origin_offset: [f64; 6],
    pub out_dir: PathBuf,
    pub baseline_cap: u64,
    pub boltzmann: f64,
    pub trajectory: Option<PathBuf>,
    pub order: WorklistOrder,
    pub sequential: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            point_set_a: None,
            point_set_b: None,
            active_lower: (0.75, 0.0),
            active_upper: (1.0, 0.9),
            collision: (0.75, 0.0),
            angular_restraint: None,
            contacts: Vec::new(),
            declared_dimension: None,
            mode: 4,
            // 2 Å translations with 18 rotation cells per turn (π/9 steps);
            // the reference grid halves both (1 Å, π/18).
            cartesian_steps: ([2.0; 3], [18; 3]),
            baseline_steps: ([1.0; 3], [36; 3]),
            cayley_step: None,
            origin_offset: [0.0; 6],
            out_dir: PathBuf::from("out"),
            baseline_cap: 50_000_000,
            boltzmann: 1.068,
            trajectory: None,
            order: WorklistOrder::Fifo,
            sequential: false,
        }
    }
}

impl RunConfig {
    pub fn variant(&self) -> DecompositionVariant {
        match self.mode {
            0 => DecompositionVariant::Simplicial,
            1 => DecompositionVariant::Basis,
            2 => DecompositionVariant::Thick,
            3 => DecompositionVariant::FaceCenter,
            _ => DecompositionVariant::Hybrid,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.cartesian_steps.0, self.cartesian_steps.1, self.origin_offset)
            .expect("steps validated at parse time")
    }

    pub fn baseline_grid(&self) -> GridSpec {
        GridSpec::new(self.baseline_steps.0, self.baseline_steps.1, self.origin_offset)
            .expect("steps validated at parse time")
    }

    pub fn resolved_cayley_step(&self) -> f64 {
        self.cayley_step.unwrap_or_else(|| {
            0.25 * self.cartesian_steps.0.iter().copied().fold(f64::INFINITY, f64::min)
        })
    }

    /// Angular restraint converted to radians for the constraint system.
    pub fn restraint_radians(&self) -> Option<(f64, f64)> {
        self.angular_restraint.map(|(lo, hi)| (lo.to_radians(), hi.to_radians()))
    }

    /// Canonical settings text: parsing it back yields an equal config.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.point_set_a {
            s.push_str(&format!("[PointSetA]\nfile = {}\n\n", p.display()));
        }
        if let Some(p) = &self.point_set_b {
            s.push_str(&format!("[PointSetB]\nfile = {}\n\n", p.display()));
        }
        s.push_str("[Constraint]\n");
        s.push_str(&format!("activeLower = {} {}\n", self.active_lower.0, self.active_lower.1));
        s.push_str(&format!("activeUpper = {} {}\n", self.active_upper.0, self.active_upper.1));
        s.push_str(&format!("collision = {} {}\n", self.collision.0, self.collision.1));
        if let Some((lo, hi)) = self.angular_restraint {
            s.push_str(&format!("angularRestraint = {lo} {hi}\n"));
        }
        if let Some(d) = self.declared_dimension {
            s.push_str(&format!(
                "\n[RootNodeCreation]\ndimension_of_initialContactGraphs = {d}\n"
            ));
        }
        s.push_str("\n[Sampling]\n");
        for (i, (a, b)) in self.contacts.iter().enumerate() {
            s.push_str(&format!("initial_Contact_{} = {a} {b}\n", i + 1));
        }
        s.push_str(&format!("cartesianIntersectionMode = {}\n", self.mode));
        let (t, r) = &self.cartesian_steps;
        s.push_str(&format!(
            "cartesianSteps = {} {} {} {} {} {}\n",
            t[0], t[1], t[2], r[0], r[1], r[2]
        ));
        if let Some(c) = self.cayley_step {
            s.push_str(&format!("cayleyStep = {c}\n"));
        }
        s.push_str(&format!("boltzmannFactor = {}\n", self.boltzmann));
        s.push_str(&format!("workOrder = {}\n", order_name(self.order)));
        if self.sequential {
            s.push_str("sequential = true\n");
        }
        let (t, r) = &self.baseline_steps;
        s.push_str(&format!(
            "\n[Baseline]\ncartesianSteps = {} {} {} {} {} {}\nbudgetCap = {}\n",
            t[0], t[1], t[2], r[0], r[1], r[2], self.baseline_cap
        ));
        let o = &self.origin_offset;
        s.push_str(&format!(
            "\n[Grid]\noriginOffset = {} {} {} {} {} {}\n",
            o[0], o[1], o[2], o[3], o[4], o[5]
        ));
        s.push_str(&format!("\n[Output]\ndirectory = {}\n", self.out_dir.display()));
        if let Some(p) = &self.trajectory {
            s.push_str(&format!("\n[MC]\nfile = {}\n", p.display()));
        }
        s
    }
}

fn order_name(order: WorklistOrder) -> &'static str {
    match order {
        WorklistOrder::Fifo => "fifo",
        WorklistOrder::Lifo => "lifo",
        WorklistOrder::MostProcessedNeighbors => "mostProcessed",
    }
}

pub fn order_from_name(name: &str) -> Option<WorklistOrder> {
    match name.to_ascii_lowercase().as_str() {
        "fifo" => Some(WorklistOrder::Fifo),
        "lifo" => Some(WorklistOrder::Lifo),
        "mostprocessed" | "most-processed" | "mostprocessedneighbors" => {
            Some(WorklistOrder::MostProcessedNeighbors)
        }
        _ => None,
    }
}

#[derive(Debug)]
pub struct Parsed {
    pub config: RunConfig,
    /// Unknown sections/keys, reported but not fatal.
    pub warnings: Vec<String>,
}

struct Collector {
    errors: Vec<String>,
}

impl Collector {
    fn err(&mut self, line: usize, msg: impl Into<String>) {
        self.errors.push(format!("line {line}: {}", msg.into()));
    }
}

/// Parse settings text; all malformed lines and failed validations are
/// reported together, each with its line number.
pub fn parse_config(text: &str) -> Result<Parsed, CliError> {
    let mut cfg = RunConfig::default();
    let mut warnings = Vec::new();
    let mut col = Collector { errors: Vec::new() };
    let mut section = String::new();
    // (index, pair, line) from initial_Contact_XX keys.
    let mut contacts: Vec<(u32, (u32, u32), usize)> = Vec::new();
    let mut collision_seen = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_ascii_lowercase();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            col.err(line_no, format!("expected `key = value`, got `{line}`"));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        let lower_key = key.to_ascii_lowercase();
        match (section.as_str(), lower_key.as_str()) {
            ("pointseta", "file") => cfg.point_set_a = Some(PathBuf::from(value)),
            ("pointsetb", "file") => cfg.point_set_b = Some(PathBuf::from(value)),
            ("constraint", "activelower") => {
                if let Some(p) = parse_pair_f64(value, line_no, key, &mut col) {
                    cfg.active_lower = p;
                }
            }
            ("constraint", "activeupper") => {
                if let Some(p) = parse_pair_f64(value, line_no, key, &mut col) {
                    cfg.active_upper = p;
                }
            }
            ("constraint", "collision") => {
                if let Some(p) = parse_pair_f64(value, line_no, key, &mut col) {
                    cfg.collision = p;
                    collision_seen = true;
                }
            }
            ("constraint", "angularrestraint") => {
                if let Some(p) = parse_pair_f64(value, line_no, key, &mut col) {
                    cfg.angular_restraint = Some(p);
                }
            }
            ("rootnodecreation", "dimension_of_initialcontactgraphs") => {
                match value.parse::<i64>() {
                    Ok(d) => cfg.declared_dimension = Some(d),
                    Err(_) => col.err(line_no, format!("`{key}` wants an integer, got `{value}`")),
                }
            }
            ("sampling", k) if k.starts_with("initial_contact_") => {
                let idx = k["initial_contact_".len()..].parse::<u32>();
                let pair = parse_contact(value);
                match (idx, pair) {
                    (Ok(idx), Some(pair)) => contacts.push((idx, pair, line_no)),
                    (Err(_), _) => col.err(line_no, format!("bad contact index in `{key}`")),
                    (_, None) => col.err(
                        line_no,
                        format!("`{key}` wants two point ids, got `{value}`"),
                    ),
                }
            }
            ("sampling", "cartesianintersectionmode") => match value.parse::<u8>() {
                Ok(m) if m <= 4 => cfg.mode = m,
                _ => col.err(line_no, format!("mode must be an integer 0–4, got `{value}`")),
            },
            ("sampling", "cartesiansteps") => {
                if let Some(s) = parse_steps(value, line_no, key, &mut col) {
                    cfg.cartesian_steps = s;
                }
            }
            ("sampling", "cayleystep") => match value.parse::<f64>() {
                Ok(c) if c > 0.0 => cfg.cayley_step = Some(c),
                _ => col.err(line_no, format!("`{key}` wants a positive number, got `{value}`")),
            },
            ("sampling", "boltzmannfactor") => match value.parse::<f64>() {
                Ok(b) if b > 0.0 => cfg.boltzmann = b,
                _ => col.err(line_no, format!("`{key}` wants a positive number, got `{value}`")),
            },
            ("sampling", "workorder") => match order_from_name(value) {
                Some(o) => cfg.order = o,
                None => col.err(
                    line_no,
                    format!("`{key}` wants fifo | lifo | mostProcessed, got `{value}`"),
                ),
            },
            ("sampling", "sequential") => match value.parse::<bool>() {
                Ok(b) => cfg.sequential = b,
                Err(_) => col.err(line_no, format!("`{key}` wants true/false, got `{value}`")),
            },
            ("baseline", "cartesiansteps") => {
                if let Some(s) = parse_steps(value, line_no, key, &mut col) {
                    cfg.baseline_steps = s;
                }
            }
            ("baseline", "budgetcap") => match value.parse::<u64>() {
                Ok(c) if c > 0 => cfg.baseline_cap = c,
                _ => col.err(line_no, format!("`{key}` wants a positive integer, got `{value}`")),
            },
            ("grid", "originoffset") => match parse_f64s(value, 6) {
                Some(v) => cfg.origin_offset = [v[0], v[1], v[2], v[3], v[4], v[5]],
                None => col.err(line_no, format!("`{key}` wants six numbers, got `{value}`")),
            },
            ("output", "directory") => cfg.out_dir = PathBuf::from(value),
            ("mc", "file") => cfg.trajectory = Some(PathBuf::from(value)),
            _ => warnings.push(format!(
                "line {line_no}: ignoring unknown key `{key}` in section `[{section}]`"
            )),
        }
    }

    contacts.sort_by_key(|&(idx, _, _)| idx);
    for w in contacts.windows(2) {
        if w[0].0 == w[1].0 {
            col.err(w[1].2, format!("duplicate contact index {}", w[1].0));
        }
    }
    cfg.contacts = contacts.iter().map(|&(_, p, _)| p).collect();

    if !collision_seen {
        cfg.collision = cfg.active_lower;
    }
    validate(&cfg, collision_seen, &mut col);

    if col.errors.is_empty() {
        Ok(Parsed { config: cfg, warnings })
    } else {
        Err(CliError::Config(col.errors.join("\n")))
    }
}

fn validate(cfg: &RunConfig, collision_seen: bool, col: &mut Collector) {
    let mut err = |msg: String| col.errors.push(msg);
    if collision_seen && cfg.collision != cfg.active_lower {
        err(format!(
            "collision rule ({} {}) must equal activeLower ({} {})",
            cfg.collision.0, cfg.collision.1, cfg.active_lower.0, cfg.active_lower.1
        ));
    }
    if let Some((lo, hi)) = cfg.angular_restraint {
        if lo > hi {
            err(format!("angularRestraint interval is empty: {lo} > {hi}"));
        }
    }
    if cfg.mode == 2 && cfg.contacts.len() != 1 {
        err(format!(
            "cartesianIntersectionMode 2 needs exactly one contact, got {}",
            cfg.contacts.len()
        ));
    }
    if let Some(d) = cfg.declared_dimension {
        let actual = 6 - cfg.contacts.len() as i64;
        if d != actual {
            err(format!(
                "declared dimension {d} disagrees with {} contacts (expected {actual})",
                cfg.contacts.len()
            ));
        }
    }
    for (steps, what) in [(&cfg.cartesian_steps, "Sampling"), (&cfg.baseline_steps, "Baseline")] {
        if steps.0.iter().any(|&s| s <= 0.0) || steps.1.iter().any(|&n| n < 1) {
            err(format!(
                "{what} cartesianSteps need positive lengths and step counts ≥ 1"
            ));
        }
    }
}

fn parse_f64s(value: &str, n: usize) -> Option<Vec<f64>> {
    let parts: Vec<f64> = value
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .ok()?;
    (parts.len() == n).then_some(parts)
}

fn parse_pair_f64(
    value: &str,
    line: usize,
    key: &str,
    col: &mut Collector,
) -> Option<(f64, f64)> {
    match parse_f64s(value, 2) {
        Some(v) => Some((v[0], v[1])),
        None => {
            col.err(line, format!("`{key}` wants two numbers, got `{value}`"));
            None
        }
    }
}

fn parse_contact(value: &str) -> Option<(u32, u32)> {
    let cleaned: String = value
        .chars()
        .map(|c| if c == ',' || c == '(' || c == ')' { ' ' } else { c })
        .collect();
    let parts: Vec<u32> = cleaned
        .split_whitespace()
        .map(|t| t.parse::<u32>())
        .collect::<Result<_, _>>()
        .ok()?;
    (parts.len() == 2).then(|| (parts[0], parts[1]))
}

fn parse_steps(
    value: &str,
    line: usize,
    key: &str,
    col: &mut Collector,
) -> Option<([f64; 3], [i64; 3])> {
    let tokens: Vec<&str> = value.split_whitespace().collect();
    let parsed = (|| {
        if tokens.len() != 6 {
            return None;
        }
        let mut t = [0.0f64; 3];
        let mut r = [0i64; 3];
        for i in 0..3 {
            t[i] = tokens[i].parse().ok()?;
            r[i] = tokens[i + 3].parse().ok()?;
        }
        Some((t, r))
    })();
    if parsed.is_none() {
        col.err(
            line,
            format!("`{key}` wants three lengths then three step counts, got `{value}`"),
        );
    }
    parsed
}
