//! Run configuration: a flat INI file with `[domain]`, `[grid]` and `[run]`
//! sections. Every error carries the line and column it refers to.

use std::collections::BTreeMap;
use std::path::PathBuf;

use hardy_core::distfield::DeltaSource;
use hardy_core::domains::Domain;
use hardy_core::grid::Geometry;
use ini::Ini;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    Grid,
    Analytic,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainSpec {
    pub kind: String,
    /// Raw parameter values, kept for reports.
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub resolution: usize,
    pub geometry: Geometry,
    #[serde(serialize_with = "ser_source")]
    pub source: DeltaSource,
    pub angle_tol: f64,
    /// Index of the heatmap plane along the remaining axes of 3D grids.
    pub slice: Option<usize>,
}

fn ser_source<S: serde::Serializer>(s: &DeltaSource, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(match s {
        DeltaSource::Eikonal => "eikonal",
        DeltaSource::Analytic => "analytic",
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub grid: GridSpec,
    pub p: f64,
    pub q: Option<f64>,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub trials: usize,
    pub mode: LambdaMode,
    pub convexity_resolution: usize,
    pub convexity_tol: f64,
    pub export: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    built: Option<Domain>,
}

const DOMAIN_KEYS: &[&str] = &[
    "kind", "dim", "radius", "minor", "major", "inner", "outer", "sides", "height", "neck", "thickness", "expr",
    "bbox_min", "bbox_max", "feature",
];
const GRID_KEYS: &[&str] = &["resolution", "geometry", "source", "angle_tol", "slice"];
const RUN_KEYS: &[&str] = &[
    "p", "q", "seed", "max_iter", "tol", "trials", "mode", "convexity_resolution", "convexity_tol", "export", "out",
];

/// Line and column of `key`'s value in `section` (1-based), or of the
/// section header when the key is absent.
fn locate(src: &str, section: &str, key: Option<&str>) -> (usize, usize) {
    let mut current = String::new();
    let mut header = (1, 1);
    for (i, line) in src.lines().enumerate() {
        let t = line.trim_start();
        let indent = line.len() - t.len();
        if let Some(rest) = t.strip_prefix('[') {
            current = rest.split(']').next().unwrap_or("").trim().to_string();
            if current == section {
                header = (i + 1, indent + 1);
            }
            continue;
        }
        if current != section {
            continue;
        }
        if let (Some(k), Some(eq)) = (key, t.find(['=', ':'])) {
            if t[..eq].trim() == k {
                let after = &t[eq + 1..];
                let pad = after.len() - after.trim_start().len();
                return (i + 1, indent + eq + 2 + pad);
            }
        }
    }
    header
}

struct Section<'a> {
    src: &'a str,
    name: &'static str,
    map: BTreeMap<String, String>,
}

impl Section<'_> {
    fn err(&self, key: Option<&str>, msg: impl Into<String>) -> CliError {
        let (line, column) = locate(self.src, self.name, key);
        CliError::Config {
            line,
            column,
            message: msg.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(Some(key), format!("invalid value {v:?} for `{key}`"))),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.parse(key)?
            .ok_or_else(|| self.err(None, format!("missing `{key}` in [{}]", self.name)))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self
            .raw(key)
            .ok_or_else(|| self.err(None, format!("missing `{key}` in [{}]", self.name)))?;
        v.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| self.err(Some(key), format!("`{key}` must be a comma-separated list of numbers")))
    }
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self, CliError> {
        // the ini parser reports an unclosed header where it gives up, not where it starts
        for (i, line) in src.lines().enumerate() {
            let t = line.trim_start();
            if t.starts_with('[') && !t.contains(']') {
                return Err(CliError::Config {
                    line: i + 1,
                    column: line.len() - t.len() + 1,
                    message: "section header is missing `]`".into(),
                });
            }
        }
        let ini =Ini::load_from_str_noescape(src).map_err(|e| CliError::Config {
            line: e.line,
            column: e.col,
            message: e.msg.to_string(),
        })?;
        let mut sections: BTreeMap<&'static str, BTreeMap<String, String>> = BTreeMap::new();
        for (name, props) in ini.iter() {
            let name = name.unwrap_or("");
            let (key, allowed): (&'static str, &[&str]) = match name {
                "domain" => ("domain", DOMAIN_KEYS),
                "grid" => ("grid", GRID_KEYS),
                "run" => ("run", RUN_KEYS),
                "" if props.is_empty() => continue,
                other => {
                    let (line, column) = locate(src, other, None);
                    let (line, column) = if other.is_empty() { (1, 1) } else { (line, column) };
                    return Err(CliError::Config {
                        line,
                        column,
                        message: format!("unknown section [{other}]"),
                    });
                }
            };
            let map = sections.entry(key).or_default();
            for (k, v) in props.iter() {
                if !allowed.contains(&k) {
                    let (line, mut column) = locate(src, key, Some(k));
                    column = column.saturating_sub(k.len() + 3).max(1);
                    return Err(CliError::Config {
                        line,
                        column,
                        message: format!("unknown key `{k}` in [{key}]"),
                    });
                }
                map.insert(k.to_string(), v.trim().to_string());
            }
        }
        let sec = |name: &'static str| Section {
            src,
            name,
            map: sections.get(name).cloned().unwrap_or_default(),
        };
        let (d, g, r) = (sec("domain"), sec("grid"), sec("run"));

        let kind: String = d.require("kind")?;
        let mut params = d.map.clone();
        params.remove("kind");
        let built = build_domain(&d, &kind)?;

        let geometry = match g.raw("geometry").unwrap_or("cartesian") {
            "cartesian" => Geometry::Cartesian,
            "axisymmetric" => Geometry::Axisymmetric,
            other => return Err(g.err(Some("geometry"), format!("unknown geometry {other:?}"))),
        };
        let source = match g.raw("source").unwrap_or("analytic") {
            "analytic" => DeltaSource::Analytic,
            "eikonal" => DeltaSource::Eikonal,
            other => return Err(g.err(Some("source"), format!("unknown distance source {other:?}"))),
        };
        let grid = GridSpec {
            resolution: g.get("resolution", 128)?,
            geometry,
            source,
            angle_tol: g.get("angle_tol", 0.5)?,
            slice: g.parse("slice")?,
        };
        let mode = match r.raw("mode").unwrap_or("grid") {
            "grid" => LambdaMode::Grid,
            "analytic" => LambdaMode::Analytic,
            other => return Err(r.err(Some("mode"), format!("unknown mode {other:?}"))),
        };
        let p: f64 = r.get("p", 2.0)?;
        if !(p > 1.0) {
            return Err(r.err(Some("p"), format!("p must exceed 1, got {p}")));
        }
        Ok(Self {
            domain: DomainSpec { kind, params },
            grid,
            p,
            q: r.parse("q")?,
            seed: r.get("seed", 0)?,
            max_iter: r.get("max_iter", 500)?,
            tol: r.get("tol", 1e-8)?,
            trials: r.get("trials", 20)?,
            mode,
            convexity_resolution: r.get("convexity_resolution", 256)?,
            convexity_tol: r.get("convexity_tol", 1e-2)?,
            export: r.get("export", true)?,
            out: r.raw("out").map(PathBuf::from),
            built: Some(built),
        })
    }

    pub fn domain(&self) -> &Domain {
        self.built.as_ref().expect("domain built during parsing")
    }
}

fn build_domain(d: &Section, kind: &str) -> Result<Domain, CliError> {
    let core = |r: hardy_core::Result<Domain>| r.map_err(|e| d.err(Some("kind"), e.to_string()));
    match kind {
        "ball" => core(Domain::ball(d.get("dim", 2)?, d.require("radius")?)),
        "torus" => core(Domain::torus(d.require("minor")?, d.require("major")?)),
        "annulus" => core(Domain::annulus(d.get("dim", 2)?, d.require("inner")?, d.require("outer")?)),
        "cuboid" => core(Domain::cuboid(d.list("sides")?)),
        "paraboloid_cap" => core(Domain::paraboloid_cap(d.get("dim", 2)?, d.require("height")?)),
        "catenoid_slab" => core(Domain::catenoid_slab(d.require("neck")?, d.require("thickness")?)),
        "ellipsoid_shell" => core(Domain::ellipsoid_shell(d.list("outer")?, d.list("inner")?)),
        "implicit" => {
            let expr: String = d.require("expr")?;
            Domain::implicit(&expr, d.list("bbox_min")?, d.list("bbox_max")?, d.parse("feature")?).map_err(|e| {
                match e {
                    hardy_core::Error::Expr { column, message } => {
                        let (line, col) = locate(d.src, "domain", Some("expr"));
                        CliError::Config {
                            line,
                            column: col + column.saturating_sub(1),
                            message: format!("expression: {message}"),
                        }
                    }
                    e => d.err(Some("expr"), e.to_string()),
                }
            })
        }
        other => Err(d.err(Some("kind"), format!("unknown domain kind {other:?}"))),
    }
}
