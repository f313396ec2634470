//! `key = value` campaign files.
//!
//! ```text
//! # von Karman spectrum
//! alpha = 1.6667
//! L0_m = inf
//! method = su
//! n_components = 500
//! N = 64
//! separations = 1..32
//! ```

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use phasescreen::dft::{ShConfig, VarianceMode};
use phasescreen::partition::RingPartition;
use phasescreen::sparse::{DiskAmplitude, SparseConfig, SparseMethod};
use phasescreen::stats::SeparationAxis;
use phasescreen::{GridSpec, Method, SpectrumParams};

use crate::error::CliError;

const KEYS: &[&str] = &[
    "alpha",
    "r_C_m",
    "L0_m",
    "l0_m",
    "method",
    "n_sh",
    "variance_mode",
    "frehlich_dft",
    "n_components",
    "k_min",
    "k_max",
    "k_star",
    "disk_amplitude",
    "N",
    "N_y",
    "L_m",
    "n_samples",
    "seed",
    "separations",
    "axis",
    "reference",
    "bench_methods",
    "bench_sizes",
    "warmup",
    "spectrum_cost",
    "parallel",
];

const METHODS: &[&str] = &["dft", "dft-sh", "pwd", "pwd-sh", "ss", "su", "hybrid"];

/// What `validate` compares the estimate against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// The continuous-spectrum structure function.
    Target,
    /// The exact structure function of the DFT series being sampled.
    DftAnalytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchMatrix {
    pub methods: Vec<String>,
    pub sizes: Vec<usize>,
    pub warmup: u64,
    pub spectrum_cost: u32,
    pub parallel: bool,
}

/// Fully resolved campaign: every key has a value, defaults included.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub params: SpectrumParams,
    pub method_id: String,
    pub method: Method,
    pub grid: GridSpec,
    pub n_samples: u64,
    pub seed: u64,
    pub offsets: Vec<usize>,
    pub axis: SeparationAxis,
    pub reference: Reference,
    pub bench: BenchMatrix,
    raw: RawOptions,
}

/// Method options as given, reused to build each method of a bench matrix.
#[derive(Debug, Clone, PartialEq)]
struct RawOptions {
    n_sh: Option<u32>,
    variance_mode: VarianceMode,
    frehlich_dft: bool,
    n_components: usize,
    k_min: Option<f64>,
    k_max: Option<f64>,
    k_star: Option<f64>,
    disk_amplitude: DiskAmplitude,
}

pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| CliError::Usage(format!("line {}: expected `key = value`", no + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!("line {}: unknown key `{key}`", no + 1)));
        }
        if value.is_empty() {
            return Err(CliError::Usage(format!("line {}: `{key}` has no value", no + 1)));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Usage(format!("line {}: `{key}` given twice", no + 1)));
        }
    }
    Ok(map)
}

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: Display,
{
    map.get(key).map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("`{key} = {v}`: {e}")))).transpose()
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    match map.get(key).map(String::as_str) {
        Some("inf") => Ok(Some(f64::INFINITY)),
        _ => get(map, key),
    }
}

fn get_bool(map: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>, CliError> {
    map.get(key)
        .map(|v| match v.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(CliError::Usage(format!("`{key} = {v}`: expected true or false"))),
        })
        .transpose()
}

/// `1..32`, `1,2,4,8` or a mix such as `1..8, 16, 32`; ranges are inclusive.
pub fn parse_offsets(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = |item: &str| CliError::Usage(format!("separations: cannot parse `{item}`"));
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim) {
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad(item))?;
            let b: usize = b.trim().parse().map_err(|_| bad(item))?;
            if b < a {
                return Err(bad(item));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    Ok(out)
}

fn list(spec: &str) -> Vec<String> {
    spec.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

impl RawOptions {
    fn method(&self, id: &str, params: &SpectrumParams) -> Result<Method, CliError> {
        let n_sh = |default: u32| self.n_sh.unwrap_or(default);
        let sh_cfg =
            |n| ShConfig { n_sh: n, variance_mode: self.variance_mode, apply_frehlich_to_dft: self.frehlich_dft };
        let sparse = |method| -> Result<Method, CliError> {
            if self.n_components < 2 {
                return Err(CliError::Usage("n_components must be at least 2".into()));
            }
            let k_min = self.k_min.unwrap_or(params.kappa0());
            if k_min == 0.0 {
                return Err(CliError::Usage("k_min is required when L0_m = inf".into()));
            }
            let k_max = self.k_max.unwrap_or(2.0 * params.kappa_m());
            let partition = RingPartition::log_uniform(k_min, k_max, self.n_components - 1, true)?;
            Ok(Method::Sparse(SparseConfig { partition, method, disk_amplitude: self.disk_amplitude }))
        };
        match id {
            "dft" => Ok(Method::Dft(sh_cfg(0))),
            "dft-sh" if n_sh(3) == 0 => Err(CliError::Usage("dft-sh needs n_sh >= 1".into())),
            "dft-sh" => Ok(Method::Dft(sh_cfg(n_sh(3)))),
            "pwd" => Ok(Method::Pwd { n_sh: 0 }),
            "pwd-sh" if n_sh(3) == 0 => Err(CliError::Usage("pwd-sh needs n_sh >= 1".into())),
            "pwd-sh" => Ok(Method::Pwd { n_sh: n_sh(3) }),
            "ss" => sparse(SparseMethod::Ss),
            "su" => sparse(SparseMethod::Su),
            "hybrid" => {
                let k_star = self.k_star.ok_or_else(|| CliError::Usage("hybrid needs k_star".into()))?;
                sparse(SparseMethod::Hybrid { k_star })
            }
            other => Err(CliError::Usage(format!("unknown method `{other}` (one of {})", METHODS.join(", ")))),
        }
    }
}

/// Rejects keys that none of `methods` understands.
fn check_applicable(map: &BTreeMap<String, String>, methods: &[String]) -> Result<(), CliError> {
    let any = |pred: fn(&str) -> bool| methods.iter().any(|m| pred(m));
    let sparse = |m: &str| matches!(m, "ss" | "su" | "hybrid");
    let fft = |m: &str| matches!(m, "dft" | "dft-sh" | "pwd" | "pwd-sh");
    let dft = |m: &str| matches!(m, "dft" | "dft-sh");
    let rules: [(&str, bool); 9] = [
        ("n_sh", any(fft)),
        ("variance_mode", any(dft)),
        ("frehlich_dft", any(dft)),
        ("n_components", any(sparse)),
        ("k_min", any(sparse)),
        ("k_max", any(sparse)),
        ("disk_amplitude", any(|m| matches!(m, "ss" | "hybrid"))),
        ("k_star", any(|m| m == "hybrid")),
        ("reference", true),
    ];
    for (key, ok) in rules {
        if map.contains_key(key) && !ok {
            return Err(CliError::Usage(format!("`{key}` does not apply to method {}", methods.join(", "))));
        }
    }
    Ok(())
}

impl CampaignConfig {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let reference_params = SpectrumParams::reference();
        let params = SpectrumParams {
            alpha: get_f64(map, "alpha")?.unwrap_or(reference_params.alpha),
            coherence_radius: get_f64(map, "r_C_m")?.unwrap_or(reference_params.coherence_radius),
            outer_scale: get_f64(map, "L0_m")?.unwrap_or(reference_params.outer_scale),
            inner_scale: get_f64(map, "l0_m")?.unwrap_or(reference_params.inner_scale),
        };
        let listed = map.get("bench_methods").map(|s| list(s));
        let method_id = match (map.get("method"), &listed) {
            (Some(m), _) => m.clone(),
            (None, Some(l)) if !l.is_empty() => l[0].clone(),
            _ => "dft".into(),
        };
        let bench_methods = listed.unwrap_or_else(|| vec![method_id.clone()]);
        if bench_methods.is_empty() {
            return Err(CliError::Usage("bench_methods is empty".into()));
        }
        let mut all_methods = bench_methods.clone();
        all_methods.push(method_id.clone());
        check_applicable(map, &all_methods)?;

        let raw = RawOptions {
            n_sh: get(map, "n_sh")?,
            variance_mode: match map.get("variance_mode").map(String::as_str) {
                None | Some("rectangle") => VarianceMode::Rectangle,
                Some("frehlich") => VarianceMode::Frehlich,
                Some(v) => return Err(CliError::Usage(format!("variance_mode `{v}`: expected rectangle or frehlich"))),
            },
            frehlich_dft: get_bool(map, "frehlich_dft")?.unwrap_or(false),
            n_components: get(map, "n_components")?.unwrap_or(500),
            k_min: get_f64(map, "k_min")?,
            k_max: get_f64(map, "k_max")?,
            k_star: get_f64(map, "k_star")?,
            disk_amplitude: match map.get("disk_amplitude").map(String::as_str) {
                None | Some("compound") => DiskAmplitude::Compound,
                Some("ring-variance") => DiskAmplitude::RingVariance,
                Some(v) => {
                    return Err(CliError::Usage(format!("disk_amplitude `{v}`: expected compound or ring-variance")))
                }
            },
        };
        if matches!(method_id.as_str(), "dft" | "pwd") && raw.n_sh.is_some_and(|n| n > 0) {
            return Err(CliError::Usage(format!("method {method_id} takes no subharmonics; use {method_id}-sh")));
        }
        let method = raw.method(&method_id, &params)?;
        for m in &bench_methods {
            raw.method(m, &params)?;
        }

        let n: usize = get(map, "N")?.unwrap_or(64);
        let ny: usize = get(map, "N_y")?.unwrap_or(n);
        let grid = GridSpec::new(n, ny, get_f64(map, "L_m")?.unwrap_or(1.0))?;
        let axis = match map.get("axis").map(String::as_str) {
            None | Some("x") => SeparationAxis::X,
            Some("diagonal") => SeparationAxis::Diagonal,
            Some(v) => return Err(CliError::Usage(format!("axis `{v}`: expected x or diagonal"))),
        };
        let offsets = match map.get("separations") {
            Some(s) => parse_offsets(s)?,
            None => (1..=(n.min(ny) / 2).max(1)).collect(),
        };
        let reference = match map.get("reference").map(String::as_str) {
            None | Some("target") => Reference::Target,
            Some("dft-analytic") if matches!(method, Method::Dft(_)) => Reference::DftAnalytic,
            Some("dft-analytic") => {
                return Err(CliError::Usage("reference = dft-analytic needs method dft or dft-sh".into()))
            }
            Some(v) => return Err(CliError::Usage(format!("reference `{v}`: expected target or dft-analytic"))),
        };
        let bench = BenchMatrix {
            methods: bench_methods,
            sizes: match map.get("bench_sizes") {
                Some(s) => list(s)
                    .iter()
                    .map(|v| v.parse().map_err(|_| CliError::Usage(format!("bench_sizes: cannot parse `{v}`"))))
                    .collect::<Result<_, _>>()?,
                None => vec![n],
            },
            warmup: get(map, "warmup")?.unwrap_or(phasescreen::bench::DEFAULT_WARMUP),
            spectrum_cost: get(map, "spectrum_cost")?.unwrap_or(1),
            parallel: get_bool(map, "parallel")?.unwrap_or(false),
        };
        if bench.spectrum_cost == 0 {
            return Err(CliError::Usage("spectrum_cost must be at least 1".into()));
        }
        Ok(CampaignConfig {
            params,
            method_id,
            method,
            grid,
            n_samples: get(map, "n_samples")?.unwrap_or(100),
            seed: get(map, "seed")?.unwrap_or(0),
            offsets,
            axis,
            reference,
            bench,
            raw,
        })
    }

    /// The method `id` with this campaign's options.
    pub fn method_named(&self, id: &str) -> Result<Method, CliError> {
        self.raw.method(id, &self.params)
    }

    /// Every setting in effect, defaults included, in file syntax.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let join = |v: &[String]| v.join(", ");
        let p = &self.params;
        let mut e = vec![
            ("alpha", p.alpha.to_string()),
            ("r_C_m", p.coherence_radius.to_string()),
            ("L0_m", if p.outer_scale.is_infinite() { "inf".into() } else { p.outer_scale.to_string() }),
            ("l0_m", p.inner_scale.to_string()),
            ("method", self.method_id.clone()),
        ];
        match &self.method {
            Method::Dft(c) => {
                e.push(("n_sh", c.n_sh.to_string()));
                let mode = match c.variance_mode {
                    VarianceMode::Rectangle => "rectangle",
                    VarianceMode::Frehlich => "frehlich",
                };
                e.push(("variance_mode", mode.into()));
                e.push(("frehlich_dft", c.apply_frehlich_to_dft.to_string()));
            }
            Method::Pwd { n_sh } => e.push(("n_sh", n_sh.to_string())),
            Method::Sparse(c) => {
                e.push(("n_components", c.n_components().to_string()));
                e.push(("k_min", c.partition.k_min().to_string()));
                e.push(("k_max", c.partition.k_max().to_string()));
                if let SparseMethod::Hybrid { k_star } = c.method {
                    e.push(("k_star", k_star.to_string()));
                }
                let disk = match c.disk_amplitude {
                    DiskAmplitude::Compound => "compound",
                    DiskAmplitude::RingVariance => "ring-variance",
                };
                e.push(("disk_amplitude", disk.into()));
            }
        }
        let offsets: Vec<String> = self.offsets.iter().map(usize::to_string).collect();
        e.extend([
            ("N", self.grid.nx.to_string()),
            ("N_y", self.grid.ny.to_string()),
            ("L_m", self.grid.side.to_string()),
            ("n_samples", self.n_samples.to_string()),
            ("seed", self.seed.to_string()),
            ("separations", offsets.join(",")),
            ("axis", if self.axis == SeparationAxis::Diagonal { "diagonal" } else { "x" }.into()),
            ("reference", if self.reference == Reference::DftAnalytic { "dft-analytic" } else { "target" }.into()),
            ("bench_methods", join(&self.bench.methods)),
            ("bench_sizes", self.bench.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")),
            ("warmup", self.bench.warmup.to_string()),
            ("spectrum_cost", self.bench.spectrum_cost.to_string()),
            ("parallel", self.bench.parallel.to_string()),
        ]);
        e
    }

    /// The settings as `# key = value` lines.
    pub fn echo(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }
}
