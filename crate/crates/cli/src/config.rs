//! Flat `key = value` run configuration.
//!
//! One pair per line; `#` starts a comment; blank lines are ignored.
//! Parsing is strict: unknown keys, duplicate keys, malformed values, and
//! keys that do not apply to the selected variant, problem, schedule, or
//! polar backend are all errors, each reported with the line it came from.
//! `--set key=value` overrides are applied after the file and may replace
//! file values.
//!
//! `emit` writes the configuration back out in a canonical key order,
//! containing exactly the keys that apply; `parse(emit(c))` reproduces
//! `c`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use polarmix::backbone::{build_backbone, BackboneKind};
use polarmix::engine::{InitIterate, MsgnBackend, Schedule, Variant};
use polarmix::matrix::Matrix;
use polarmix::problems::{
    build_hetero_quadratic, build_matrix_logistic, build_transverse_quadratic, Problem,
};
use polarmix::topology::{build_mixing, Graph, GraphKind, MixingScheme};

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    HeteroQuadratic,
    MatrixLogistic,
    TransverseQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Horizon,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Exact,
    NewtonSchulz,
}

/// Parsed run configuration. Field names are descriptive; the config keys
/// for the iterate shape, horizon, and logistic weights are the short
/// symbols `m`, `n`, `K`, `a`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub variant: Variant,
    pub problem: ProblemKind,
    pub topology: GraphKind,
    pub n_nodes: usize,
    pub mixing_scheme: MixingSchemeKind,
    pub rho: f64,
    pub backbone: BackboneKind,
    pub backend: BackendKind,
    pub ns_iters: usize,
    pub schedule: ScheduleKind,
    pub alpha0: f64,
    pub b0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: u64,
    pub seeds: Vec<u64>,
    pub problem_seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub spread: f64,
    pub sigma: f64,
    pub logistic_a: f64,
    pub logistic_b: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingSchemeKind {
    Lazy,
    Metropolis,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            variant: Variant::SudaMuon,
            problem: ProblemKind::HeteroQuadratic,
            topology: GraphKind::Ring,
            n_nodes: 10,
            mixing_scheme: MixingSchemeKind::Lazy,
            rho: 0.25,
            backbone: BackboneKind::ExactDiffusion,
            backend: BackendKind::Exact,
            ns_iters: 5,
            schedule: ScheduleKind::Horizon,
            alpha0: 1.0,
            b0: 1.0,
            alpha: 0.05,
            beta: 0.0,
            iterations: 256,
            seeds: vec![0],
            problem_seed: 0,
            rows: 4,
            cols: 3,
            spread: 1.0,
            sigma: 1.0,
            logistic_a: 2.0,
            logistic_b: 1.0,
            x0: 0.0,
        }
    }
}

/// Everything a run needs, built and validated from one `Config`.
pub struct Built {
    pub problem: Problem<f64>,
    pub mixing: Option<polarmix::Mixing>,
    pub backbone: Option<polarmix::Backbone>,
    pub schedule: Schedule<f64>,
    pub backend: MsgnBackend,
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    parse_with_overrides(text, &[])
}

pub fn parse_with_overrides(text: &str, sets: &[String]) -> Result<Config, CliError> {
    // (location, key, value), file entries first, overrides after.
    let mut entries: Vec<(String, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let loc = format!("line {}", idx + 1);
        let Some((k, v)) = line.split_once('=') else {
            return Err(usage(format!("{loc}: expected `key = value`, got `{line}`")));
        };
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(usage(format!("{loc}: expected `key = value`, got `{line}`")));
        }
        if let Some((prev, _, _)) = entries.iter().find(|(_, pk, _)| *pk == key) {
            return Err(usage(format!(
                "{loc}: duplicate key `{key}` (first at {prev})"
            )));
        }
        entries.push((loc, key, value));
    }
    for s in sets {
        let Some((k, v)) = s.split_once('=') else {
            return Err(usage(format!("--set {s}: expected `key=value`")));
        };
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(usage(format!("--set {s}: expected `key=value`")));
        }
        // Overrides replace file values (and earlier overrides).
        entries.retain(|(_, pk, _)| *pk != key);
        entries.push(("--set".to_string(), key, value));
    }
    build_config(&entries)
}

fn build_config(entries: &[(String, String, String)]) -> Result<Config, CliError> {
    let mut cfg = Config::default();
    let mut explicit: BTreeSet<String> = BTreeSet::new();
    for (loc, key, value) in entries {
        explicit.insert(key.clone());
        match key.as_str() {
            "variant" => cfg.variant = parse_variant(loc, value)?,
            "problem" => cfg.problem = parse_problem(loc, value)?,
            "topology" => cfg.topology = parse_topology(loc, value)?,
            "n_nodes" => cfg.n_nodes = parse_num(loc, key, value)?,
            "mixing_scheme" => cfg.mixing_scheme = parse_scheme(loc, value)?,
            "rho" => cfg.rho = parse_num(loc, key, value)?,
            "backbone" => cfg.backbone = parse_backbone(loc, value)?,
            "msgn_backend" => cfg.backend = parse_backend(loc, value)?,
            "ns_iters" => cfg.ns_iters = parse_num(loc, key, value)?,
            "schedule" => cfg.schedule = parse_schedule(loc, value)?,
            "alpha0" => cfg.alpha0 = parse_num(loc, key, value)?,
            "b0" => cfg.b0 = parse_num(loc, key, value)?,
            "alpha" => cfg.alpha = parse_num(loc, key, value)?,
            "beta" => cfg.beta = parse_num(loc, key, value)?,
            "K" => cfg.iterations = parse_num(loc, key, value)?,
            "seeds" => cfg.seeds = parse_seeds(loc, value)?,
            "problem_seed" => cfg.problem_seed = parse_num(loc, key, value)?,
            "m" => cfg.rows = parse_num(loc, key, value)?,
            "n" => cfg.cols = parse_num(loc, key, value)?,
            "spread" => cfg.spread = parse_num(loc, key, value)?,
            "sigma" => cfg.sigma = parse_num(loc, key, value)?,
            "a" => cfg.logistic_a = parse_num(loc, key, value)?,
            "b" => cfg.logistic_b = parse_num(loc, key, value)?,
            "x0" => cfg.x0 = parse_num(loc, key, value)?,
            _ => return Err(usage(format!("{loc}: unknown key `{key}`"))),
        }
    }

    if cfg.problem == ProblemKind::MatrixLogistic {
        if !explicit.contains("n_nodes") {
            cfg.n_nodes = 2;
        }
        if !explicit.contains("topology") {
            cfg.topology = GraphKind::Line;
        }
    }
    if cfg.problem == ProblemKind::TransverseQuadratic {
        cfg.rows = 2;
        cfg.cols = 1;
    }

    validate(&cfg, &explicit)?;
    Ok(cfg)
}

fn validate(cfg: &Config, explicit: &BTreeSet<String>) -> Result<(), CliError> {
    let reject = |key: &str, why: &str| -> Result<(), CliError> {
        if explicit.contains(key) {
            Err(usage(format!("key `{key}` {why}")))
        } else {
            Ok(())
        }
    };

    if cfg.variant.is_flat() {
        for key in ["topology", "mixing_scheme", "rho", "backbone"] {
            reject(key, "does not apply to a flat variant")?;
        }
    } else if cfg.variant == Variant::DeMuon {
        reject("backbone", "does not apply to the gossip variant")?;
    }

    match cfg.problem {
        ProblemKind::HeteroQuadratic => {
            for key in ["a", "b"] {
                reject(key, "applies only to matrix-logistic")?;
            }
        }
        ProblemKind::MatrixLogistic => {
            for key in ["spread", "sigma", "problem_seed"] {
                reject(key, "does not apply to matrix-logistic")?;
            }
            if cfg.n_nodes != 2 {
                return Err(usage(format!(
                    "matrix-logistic runs on exactly 2 nodes, got n_nodes = {}",
                    cfg.n_nodes
                )));
            }
        }
        ProblemKind::TransverseQuadratic => {
            for key in ["m", "n", "spread", "problem_seed", "a", "b"] {
                reject(key, "does not apply to transverse-quadratic")?;
            }
        }
    }

    match cfg.schedule {
        ScheduleKind::Horizon => {
            for key in ["alpha", "beta"] {
                reject(key, "applies only to the constant schedule")?;
            }
        }
        ScheduleKind::Constant => {
            for key in ["alpha0", "b0"] {
                reject(key, "applies only to the horizon schedule")?;
            }
        }
    }

    if cfg.backend == BackendKind::Exact {
        reject("ns_iters", "applies only to the newton-schulz backend")?;
    }

    if cfg.iterations == 0 {
        return Err(usage("K must be at least 1"));
    }
    if cfg.n_nodes == 0 {
        return Err(usage("n_nodes must be at least 1"));
    }
    Ok(())
}

impl Config {
    /// Canonical emission: exactly the keys that apply, in a fixed order.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variant = {}", variant_name(self.variant));
        let _ = writeln!(s, "problem = {}", problem_name(self.problem));
        let _ = writeln!(s, "n_nodes = {}", self.n_nodes);
        let _ = writeln!(s, "K = {}", self.iterations);
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "seeds = {}", seeds.join(","));
        let _ = writeln!(s, "x0 = {}", self.x0);
        let _ = writeln!(s, "msgn_backend = {}", backend_name(self.backend));
        if self.backend == BackendKind::NewtonSchulz {
            let _ = writeln!(s, "ns_iters = {}", self.ns_iters);
        }
        let _ = writeln!(s, "schedule = {}", schedule_name(self.schedule));
        match self.schedule {
            ScheduleKind::Horizon => {
                let _ = writeln!(s, "alpha0 = {}", self.alpha0);
                let _ = writeln!(s, "b0 = {}", self.b0);
            }
            ScheduleKind::Constant => {
                let _ = writeln!(s, "alpha = {}", self.alpha);
                let _ = writeln!(s, "beta = {}", self.beta);
            }
        }
        if !self.variant.is_flat() {
            let _ = writeln!(s, "topology = {}", topology_name(self.topology));
            let _ = writeln!(s, "mixing_scheme = {}", scheme_name(self.mixing_scheme));
            if self.mixing_scheme == MixingSchemeKind::Lazy {
                let _ = writeln!(s, "rho = {}", self.rho);
            }
            if self.variant.uses_backbone() {
                let _ = writeln!(s, "backbone = {}", backbone_name(self.backbone));
            }
        }
        match self.problem {
            ProblemKind::HeteroQuadratic => {
                let _ = writeln!(s, "problem_seed = {}", self.problem_seed);
                let _ = writeln!(s, "m = {}", self.rows);
                let _ = writeln!(s, "n = {}", self.cols);
                let _ = writeln!(s, "spread = {}", self.spread);
                let _ = writeln!(s, "sigma = {}", self.sigma);
            }
            ProblemKind::MatrixLogistic => {
                let _ = writeln!(s, "m = {}", self.rows);
                let _ = writeln!(s, "n = {}", self.cols);
                let _ = writeln!(s, "a = {}", self.logistic_a);
                let _ = writeln!(s, "b = {}", self.logistic_b);
            }
            ProblemKind::TransverseQuadratic => {
                let _ = writeln!(s, "sigma = {}", self.sigma);
            }
        }
        s
    }

    pub fn build(&self) -> Result<Built, CliError> {
        let problem = match self.problem {
            ProblemKind::HeteroQuadratic => build_hetero_quadratic(
                self.problem_seed,
                self.n_nodes,
                self.rows,
                self.cols,
                self.spread,
                self.sigma,
            )?,
            ProblemKind::MatrixLogistic => {
                // Rank-one direction from normalized all-ones vectors; the
                // shape keys control its dimensions.
                let u = unit_ones(self.rows);
                let v = unit_ones(self.cols);
                build_matrix_logistic(self.logistic_a, self.logistic_b, &u, &v)?
            }
            ProblemKind::TransverseQuadratic => {
                build_transverse_quadratic(self.n_nodes, self.sigma)?
            }
        };

        let scheme = match self.mixing_scheme {
            MixingSchemeKind::Lazy => MixingScheme::Lazy { rho: self.rho },
            MixingSchemeKind::Metropolis => MixingScheme::Metropolis,
        };
        let (mixing, backbone) = if self.variant.uses_backbone() {
            let graph = Graph::standard(self.topology, self.n_nodes)?;
            let w = build_mixing(&graph, scheme)?;
            let bk = build_backbone(self.backbone, &w)?;
            (Some(w), Some(bk))
        } else if self.variant == Variant::DeMuon {
            let graph = Graph::standard(self.topology, self.n_nodes)?;
            (Some(build_mixing(&graph, scheme)?), None)
        } else {
            (None, None)
        };

        let schedule = match self.schedule {
            ScheduleKind::Horizon => Schedule::horizon(self.alpha0, self.b0, self.iterations)?,
            ScheduleKind::Constant => Schedule::constant(self.alpha, self.beta)?,
        };
        let backend = match self.backend {
            BackendKind::Exact => MsgnBackend::Exact,
            BackendKind::NewtonSchulz => MsgnBackend::NewtonSchulz { iters: self.ns_iters },
        };

        Ok(Built {
            problem,
            mixing,
            backbone,
            schedule,
            backend,
        })
    }

    pub fn init(&self, problem: &Problem<f64>) -> InitIterate<f64> {
        let (rows, cols) = problem.shape();
        InitIterate::Consensus(Matrix::from_fn(rows, cols, |_, _| self.x0))
    }
}

fn unit_ones(n: usize) -> Vec<f64> {
    let e = 1.0 / (n as f64).sqrt();
    vec![e; n]
}

fn parse_num<T: std::str::FromStr>(loc: &str, key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse::<T>()
        .map_err(|_| usage(format!("{loc}: key `{key}`: invalid value `{value}`")))
}

fn parse_seeds(loc: &str, value: &str) -> Result<Vec<u64>, CliError> {
    let mut seeds = Vec::new();
    for part in value.split(',') {
        let seed: u64 = part
            .trim()
            .parse()
            .map_err(|_| usage(format!("{loc}: key `seeds`: invalid seed `{}`", part.trim())))?;
        if seeds.contains(&seed) {
            return Err(usage(format!("{loc}: key `seeds`: duplicate seed {seed}")));
        }
        seeds.push(seed);
    }
    Ok(seeds)
}

macro_rules! name_table {
    ($parse:ident, $name:ident, $ty:ty, $what:literal, $(($s:literal, $v:path)),+ $(,)?) => {
        pub fn $parse(loc: &str, value: &str) -> Result<$ty, CliError> {
            match value {
                $($s => Ok($v),)+
                _ => Err(usage(format!(
                    concat!("{}: unknown ", $what, " `{}` (expected one of: {})"),
                    loc,
                    value,
                    [$($s),+].join(", ")
                ))),
            }
        }
        pub fn $name(v: $ty) -> &'static str {
            match v {
                $($v => $s,)+
                #[allow(unreachable_patterns)]
                _ => unreachable!(),
            }
        }
    };
}

name_table!(
    parse_variant,
    variant_name,
    Variant,
    "variant",
    ("suda-muon", Variant::SudaMuon),
    ("no-tracking", Variant::NoTracking),
    ("de-muon", Variant::DeMuon),
    ("dsgd-muon", Variant::DsgdMuon),
    ("centralized-muon", Variant::CentralizedMuon),
);

name_table!(
    parse_problem,
    problem_name,
    ProblemKind,
    "problem",
    ("hetero-quadratic", ProblemKind::HeteroQuadratic),
    ("matrix-logistic", ProblemKind::MatrixLogistic),
    ("transverse-quadratic", ProblemKind::TransverseQuadratic),
);

name_table!(
    parse_topology,
    topology_name,
    GraphKind,
    "topology",
    ("ring", GraphKind::Ring),
    ("line", GraphKind::Line),
    ("star", GraphKind::Star),
    ("complete", GraphKind::Complete),
);

name_table!(
    parse_scheme,
    scheme_name,
    MixingSchemeKind,
    "mixing scheme",
    ("lazy", MixingSchemeKind::Lazy),
    ("metropolis", MixingSchemeKind::Metropolis),
);

name_table!(
    parse_backbone,
    backbone_name,
    BackboneKind,
    "backbone",
    ("exact-diffusion", BackboneKind::ExactDiffusion),
    ("extra", BackboneKind::Extra),
    ("atc-tracking", BackboneKind::AtcTracking),
);

name_table!(
    parse_backend,
    backend_name,
    BackendKind,
    "polar backend",
    ("exact", BackendKind::Exact),
    ("newton-schulz", BackendKind::NewtonSchulz),
);

name_table!(
    parse_schedule,
    schedule_name,
    ScheduleKind,
    "schedule",
    ("horizon", ScheduleKind::Horizon),
    ("constant", ScheduleKind::Constant),
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, Config::default());
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let cfg = parse("# a comment\n\nrho = 0.5 # inline\n").unwrap();
        assert_eq!(cfg.rho, 0.5);
    }

    #[test]
    fn unknown_key_is_rejected_with_its_line() {
        let err = parse("rho = 0.5\nwat = 1\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("wat"), "{err}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = parse("rho = 0.5\nrho = 0.4\n").unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn malformed_line_and_value_are_rejected() {
        assert!(parse("just words\n").is_err());
        let err = parse("rho = fast\n").unwrap_err().to_string();
        assert!(err.contains("rho"), "{err}");
    }

    #[test]
    fn overrides_replace_file_values() {
        let cfg = parse_with_overrides("rho = 0.5\n", &["rho=0.125".to_string()]).unwrap();
        assert_eq!(cfg.rho, 0.125);
    }

    #[test]
    fn flat_variant_rejects_communication_keys() {
        let err = parse("variant = dsgd-muon\nbackbone = extra\n").unwrap_err().to_string();
        assert!(err.contains("flat"), "{err}");
        assert!(parse("variant = dsgd-muon\nn_nodes = 6\n").is_ok());
    }

    #[test]
    fn gossip_variant_rejects_backbone() {
        assert!(parse("variant = de-muon\nbackbone = extra\n").is_err());
        assert!(parse("variant = de-muon\n").is_ok());
    }

    #[test]
    fn logistic_defaults_to_two_nodes_on_a_line() {
        let cfg = parse("problem = matrix-logistic\n").unwrap();
        assert_eq!(cfg.n_nodes, 2);
        assert_eq!(cfg.topology, GraphKind::Line);
        assert!(parse("problem = matrix-logistic\nn_nodes = 4\n").is_err());
        assert!(parse("problem = matrix-logistic\nsigma = 1\n").is_err());
    }

    #[test]
    fn transverse_pins_its_shape() {
        let cfg = parse("problem = transverse-quadratic\n").unwrap();
        assert_eq!((cfg.rows, cfg.cols), (2, 1));
        assert!(parse("problem = transverse-quadratic\nm = 3\n").is_err());
    }

    #[test]
    fn schedule_kinds_reject_the_other_kinds_keys() {
        assert!(parse("schedule = horizon\nalpha = 0.1\n").is_err());
        assert!(parse("schedule = constant\nalpha0 = 0.1\n").is_err());
        assert!(parse("schedule = constant\nalpha = 0.1\nbeta = 0.5\n").is_ok());
    }

    #[test]
    fn ns_iters_needs_the_ns_backend() {
        assert!(parse("ns_iters = 3\n").is_err());
        let cfg = parse("msgn_backend = newton-schulz\nns_iters = 3\n").unwrap();
        assert_eq!(cfg.ns_iters, 3);
    }

    #[test]
    fn seeds_parse_as_a_list_without_duplicates() {
        let cfg = parse("seeds = 3, 1, 2\n").unwrap();
        assert_eq!(cfg.seeds, vec![3, 1, 2]);
        assert!(parse("seeds = 1,1\n").is_err());
        assert!(parse("seeds = 1,x\n").is_err());
    }

    #[test]
    fn emission_round_trips() {
        let cases = [
            "".to_string(),
            "variant = de-muon\ntopology = star\nn_nodes = 5\n".to_string(),
            "variant = dsgd-muon\nproblem = transverse-quadratic\nsigma = 2.5\n".to_string(),
            "problem = matrix-logistic\na = 3\n".to_string(),
            "schedule = constant\nalpha = 0.01\nbeta = 0.25\nseeds = 4,5\n".to_string(),
            "msgn_backend = newton-schulz\nns_iters = 7\nmixing_scheme = metropolis\n".to_string(),
        ];
        for text in cases {
            let cfg = parse(&text).unwrap();
            let emitted = cfg.emit();
            let back = parse(&emitted).unwrap();
            assert_eq!(cfg, back, "round trip failed for:\n{text}\nemitted:\n{emitted}");
            assert_eq!(emitted, back.emit());
        }
    }

    #[test]
    fn build_wires_the_right_structure() {
        let cfg = parse("").unwrap();
        let built = cfg.build().unwrap();
        assert!(built.mixing.is_some() && built.backbone.is_some());

        let cfg = parse("variant = de-muon\n").unwrap();
        let built = cfg.build().unwrap();
        assert!(built.mixing.is_some() && built.backbone.is_none());

        let cfg = parse("variant = centralized-muon\n").unwrap();
        let built = cfg.build().unwrap();
        assert!(built.mixing.is_none() && built.backbone.is_none());
    }

    #[test]
    fn build_surfaces_graph_errors() {
        // A two-node ring does not exist.
        let cfg = parse("n_nodes = 2\n").unwrap();
        assert!(cfg.build().is_err());
    }
}
