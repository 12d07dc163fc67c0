//! Scene files: TOML documents naming charts, metrics, fields, products,
//! maps, a product-immersion scenario and an optional bare immersion.
//!
//! See `docs/scene-format.md` for the format.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use twistprod::geometry::Interval;
use twistprod::{
    ChartDomain, DoublyTwistedImmersionScenario, DoublyTwistedProduct, Expression, ImmersionSetup, MetricField,
    ProductKind, ScalarField, SmoothMap,
};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{section}: unknown {kind} `{name}`")]
    Unresolved {
        section: String,
        kind: &'static str,
        name: String,
    },
    #[error("{section}: {source}")]
    Core {
        section: String,
        source: twistprod::Error,
    },
    #[error("{section}: {message}")]
    Invalid { section: String, message: String },
}

type Result<T> = std::result::Result<T, SceneError>;

fn core<T>(section: &str, r: twistprod::Result<T>) -> Result<T> {
    r.map_err(|source| SceneError::Core {
        section: section.to_string(),
        source,
    })
}

fn invalid<T>(section: &str, message: impl Into<String>) -> Result<T> {
    Err(SceneError::Invalid {
        section: section.to_string(),
        message: message.into(),
    })
}

// ---- raw TOML shape -------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    #[serde(default)]
    scene: RawHeader,
    #[serde(default)]
    charts: BTreeMap<String, RawChart>,
    #[serde(default)]
    metrics: BTreeMap<String, RawMetric>,
    #[serde(default)]
    fields: BTreeMap<String, RawField>,
    #[serde(default)]
    products: BTreeMap<String, RawProduct>,
    #[serde(default)]
    maps: BTreeMap<String, RawMap>,
    scenario: Option<RawScenario>,
    immersion: Option<RawImmersion>,
    #[serde(default)]
    run: RunSettings,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeader {
    name: Option<String>,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    coords: Vec<String>,
    bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    chart: String,
    diagonal: Option<Vec<String>>,
    rows: Option<Vec<Vec<String>>>,
    #[serde(default)]
    euclidean: bool,
    spd_tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    chart: String,
    expr: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProduct {
    factors: [String; 2],
    sigma1: String,
    sigma2: String,
    kind: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    source: String,
    target: String,
    components: Option<Vec<String>>,
    #[serde(default)]
    identity: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    target: String,
    source: Option<String>,
    source_factors: Option<[String; 2]>,
    maps: [String; 2],
    kind: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImmersion {
    source: String,
    target: String,
    map: Option<String>,
    maps: Option<[String; 2]>,
    split: Option<[usize; 2]>,
    target_split: Option<[usize; 2]>,
}

/// Defaults a scene may set for `verify`; command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub suites: Option<Vec<String>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    /// Product checked by the connection suites.
    pub product: Option<String>,
}

// ---- resolved scene -------------------------------------------------------

/// A product metric together with its declared or inferred kind.
#[derive(Debug, Clone)]
pub struct NamedProduct {
    pub name: String,
    pub product: DoublyTwistedProduct,
    pub declared: Option<ProductKind>,
}

/// A fully resolved scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    pub path: PathBuf,
    pub description: String,
    pub charts: BTreeMap<String, ChartDomain>,
    pub metrics: BTreeMap<String, MetricField>,
    pub fields: BTreeMap<String, ScalarField>,
    pub products: BTreeMap<String, NamedProduct>,
    pub maps: BTreeMap<String, SmoothMap>,
    pub scenario: Option<DoublyTwistedImmersionScenario>,
    pub immersion: Option<ImmersionSetup>,
    pub run: RunSettings,
}

impl Scene {
    /// Product used by `prop1`: `[run].product`, then the scenario target,
    /// then the only declared product.
    pub fn primary_product(&self) -> Option<&DoublyTwistedProduct> {
        if let Some(name) = &self.run.product {
            return self.products.get(name).map(|p| &p.product);
        }
        if let Some(s) = &self.scenario {
            return Some(s.target());
        }
        if self.products.len() == 1 {
            return self.products.values().next().map(|p| &p.product);
        }
        None
    }

    /// Every metric of the scene, including assembled product metrics, in
    /// name order.
    pub fn all_metrics(&self) -> Vec<(String, &MetricField)> {
        let mut out: Vec<(String, &MetricField)> = self.metrics.iter().map(|(n, m)| (n.clone(), m)).collect();
        for (n, p) in &self.products {
            out.push((n.clone(), p.product.assembled()));
        }
        out
    }

    /// The immersion for the Moore suite: `[immersion]`, else the direct
    /// product immersion of the scenario.
    pub fn moore_setup(&self) -> Option<&ImmersionSetup> {
        self.immersion
            .as_ref()
            .or_else(|| self.scenario.as_ref().map(|s| s.direct_setup()))
    }
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scene(&text, path)
}

/// Parses scene text; `path` names the scene in messages and supplies the
/// default scene name.
pub fn parse_scene(text: &str, path: &Path) -> Result<Scene> {
    let raw: RawScene = toml::from_str(text).map_err(|source| SceneError::Toml {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into());
    Resolver::default().resolve(raw, stem, path.to_path_buf())
}

fn parse_kind(section: &str, kind: &Option<String>) -> Result<Option<ProductKind>> {
    match kind {
        None => Ok(None),
        Some(k) => match ProductKind::from_name(k) {
            Some(k) => Ok(Some(k)),
            None => invalid(
                section,
                format!(
                    "unknown product kind `{k}` (expected one of {})",
                    ProductKind::ALL.map(|k| k.name()).join(", ")
                ),
            ),
        },
    }
}

#[derive(Default)]
struct Resolver {
    charts: BTreeMap<String, ChartDomain>,
    metrics: BTreeMap<String, MetricField>,
    metric_charts: BTreeMap<String, String>,
    fields: BTreeMap<String, ScalarField>,
    products: BTreeMap<String, NamedProduct>,
    maps: BTreeMap<String, (SmoothMap, String, String)>,
}

impl Resolver {
    fn chart(&self, section: &str, name: &str) -> Result<&ChartDomain> {
        self.charts.get(name).ok_or_else(|| SceneError::Unresolved {
            section: section.into(),
            kind: "chart",
            name: name.into(),
        })
    }

    fn metric(&self, section: &str, name: &str) -> Result<&MetricField> {
        self.metrics.get(name).ok_or_else(|| SceneError::Unresolved {
            section: section.into(),
            kind: "metric",
            name: name.into(),
        })
    }

    fn map(&self, section: &str, name: &str) -> Result<&(SmoothMap, String, String)> {
        self.maps.get(name).ok_or_else(|| SceneError::Unresolved {
            section: section.into(),
            kind: "map",
            name: name.into(),
        })
    }

    /// An expression over `chart`; `$name` refers to a declared field,
    /// which must live on the same coordinates.
    fn expression(&self, section: &str, src: &str, chart: &ChartDomain) -> Result<Expression> {
        if let Some(name) = src.trim().strip_prefix('$') {
            let f = self.fields.get(name).ok_or_else(|| SceneError::Unresolved {
                section: section.into(),
                kind: "field",
                name: name.into(),
            })?;
            let remapped = f.expr().remap(chart.coords());
            return remapped.map_err(|e| SceneError::Core {
                section: section.into(),
                source: e.into(),
            });
        }
        core(section, chart.parse(src))
    }

    fn resolve(mut self, raw: RawScene, stem: String, path: PathBuf) -> Result<Scene> {
        for (name, c) in &raw.charts {
            let section = format!("charts.{name}");
            let bounds = c.bounds.iter().map(|&[lo, hi]| Interval { lo, hi }).collect();
            let chart = core(&section, ChartDomain::new(c.coords.clone(), bounds))?;
            self.charts.insert(name.clone(), chart);
        }
        for (name, m) in &raw.metrics {
            let section = format!("metrics.{name}");
            let chart = self.chart(&section, &m.chart)?.clone();
            let given = [m.diagonal.is_some(), m.rows.is_some(), m.euclidean]
                .iter()
                .filter(|b| **b)
                .count();
            if given != 1 {
                return invalid(&section, "give exactly one of `diagonal`, `rows`, `euclidean = true`");
            }
            let metric = if let Some(d) = &m.diagonal {
                let exprs = d
                    .iter()
                    .map(|s| self.expression(&section, s, &chart))
                    .collect::<Result<Vec<_>>>()?;
                core(&section, MetricField::diagonal(chart, &exprs))?
            } else if let Some(rows) = &m.rows {
                let exprs = rows
                    .iter()
                    .map(|r| r.iter().map(|s| self.expression(&section, s, &chart)).collect())
                    .collect::<Result<Vec<Vec<_>>>>()?;
                core(&section, MetricField::new(chart, &exprs))?
            } else {
                MetricField::euclidean(chart)
            };
            let metric = match m.spd_tolerance {
                Some(t) => metric.with_spd_tolerance(t),
                None => metric,
            };
            self.metrics.insert(name.clone(), metric);
            self.metric_charts.insert(name.clone(), m.chart.clone());
        }
        for (name, f) in &raw.fields {
            let section = format!("fields.{name}");
            let chart = self.chart(&section, &f.chart)?.clone();
            let field = core(&section, ScalarField::parse(chart, &f.expr))?;
            self.fields.insert(name.clone(), field);
        }
        for (name, p) in &raw.products {
            let section = format!("products.{name}");
            let g1 = self.metric(&section, &p.factors[0])?.clone();
            let g2 = self.metric(&section, &p.factors[1])?.clone();
            let chart = core(&section, ChartDomain::product(g1.chart(), g2.chart()))?;
            let s1 = self.expression(&format!("{section}.sigma1"), &p.sigma1, &chart)?;
            let s2 = self.expression(&format!("{section}.sigma2"), &p.sigma2, &chart)?;
            let product = core(&section, DoublyTwistedProduct::new(g1, g2, &s1, &s2))?;
            let declared = parse_kind(&section, &p.kind)?;
            if let Some(k) = declared {
                core(&section, product.satisfies(k))?;
            }
            self.products.insert(
                name.clone(),
                NamedProduct {
                    name: name.clone(),
                    product,
                    declared,
                },
            );
        }
        for (name, m) in &raw.maps {
            let section = format!("maps.{name}");
            let source = self.chart(&section, &m.source)?.clone();
            let target = self.chart(&section, &m.target)?.clone();
            let map = match (&m.components, m.identity) {
                (Some(c), false) => {
                    let refs: Vec<&str> = c.iter().map(String::as_str).collect();
                    core(&section, SmoothMap::parse(source, target, &refs))?
                }
                (None, true) => core(&section, SmoothMap::identity(source, target))?,
                _ => return invalid(&section, "give exactly one of `components`, `identity = true`"),
            };
            self.maps.insert(name.clone(), (map, m.source.clone(), m.target.clone()));
        }
        let scenario = match &raw.scenario {
            Some(s) => Some(self.scenario(s)?),
            None => None,
        };
        let immersion = match &raw.immersion {
            Some(i) => Some(self.immersion(i)?),
            None => None,
        };
        if let Some(suites) = &raw.run.suites {
            for s in suites {
                if crate::run::Suite::from_name(s).is_none() {
                    return invalid("run", format!("unknown suite `{s}`"));
                }
            }
        }
        if let Some(p) = &raw.run.product {
            if !self.products.contains_key(p) {
                return Err(SceneError::Unresolved {
                    section: "run".into(),
                    kind: "product",
                    name: p.clone(),
                });
            }
        }
        Ok(Scene {
            name: raw.scene.name.unwrap_or(stem),
            path,
            description: raw.scene.description,
            charts: self.charts,
            metrics: self.metrics,
            fields: self.fields,
            products: self.products,
            maps: self.maps.into_iter().map(|(k, (m, _, _))| (k, m)).collect(),
            scenario,
            immersion,
            run: raw.run,
        })
    }

    /// Checks that a factor map runs between the charts of two metrics.
    fn check_map_charts(&self, section: &str, map: &str, source_metric: &MetricField, target_metric: &MetricField) -> Result<()> {
        let (m, _, _) = self.map(section, map)?;
        if m.source() != source_metric.chart() {
            return invalid(section, format!("map `{map}` does not start on the source factor chart"));
        }
        if m.target() != target_metric.chart() {
            return invalid(section, format!("map `{map}` does not land on the target factor chart"));
        }
        Ok(())
    }

    fn product(&self, section: &str, name: &str) -> Result<&NamedProduct> {
        self.products.get(name).ok_or_else(|| SceneError::Unresolved {
            section: section.into(),
            kind: "product",
            name: name.into(),
        })
    }

    fn scenario(&self, s: &RawScenario) -> Result<DoublyTwistedImmersionScenario> {
        let section = "scenario";
        let target = self.product(section, &s.target)?.product.clone();
        let phi1 = self.map(section, &s.maps[0])?.0.clone();
        let phi2 = self.map(section, &s.maps[1])?.0.clone();
        let scenario = match (&s.source, &s.source_factors) {
            (Some(src), None) => {
                let source = self.product(section, src)?.product.clone();
                self.check_map_charts(section, &s.maps[0], source.g1(), target.g1())?;
                self.check_map_charts(section, &s.maps[1], source.g2(), target.g2())?;
                core(section, DoublyTwistedImmersionScenario::new(source, target, phi1, phi2))?
            }
            (None, Some([f1, f2])) => {
                let g1 = self.metric(section, f1)?.clone();
                let g2 = self.metric(section, f2)?.clone();
                self.check_map_charts(section, &s.maps[0], &g1, target.g1())?;
                self.check_map_charts(section, &s.maps[1], &g2, target.g2())?;
                core(section, DoublyTwistedImmersionScenario::from_target(g1, g2, target, phi1, phi2))?
            }
            _ => return invalid(section, "give exactly one of `source`, `source_factors`"),
        };
        if let Some(k) = parse_kind(section, &s.kind)? {
            core("scenario.source", scenario.source().satisfies(k))?;
            core("scenario.target", scenario.target().satisfies(k))?;
        }
        Ok(scenario)
    }

    /// A metric by name, or the assembled metric of a product with its
    /// split.
    fn metric_or_product(&self, section: &str, name: &str) -> Result<(MetricField, Option<(usize, usize)>)> {
        if let Some(m) = self.metrics.get(name) {
            return Ok((m.clone(), None));
        }
        if let Some(p) = self.products.get(name) {
            return Ok((p.product.assembled().clone(), Some((p.product.n1(), p.product.n2()))));
        }
        Err(SceneError::Unresolved {
            section: section.into(),
            kind: "metric or product",
            name: name.into(),
        })
    }

    fn immersion(&self, i: &RawImmersion) -> Result<ImmersionSetup> {
        let section = "immersion";
        let (source, source_split) = self.metric_or_product(section, &i.source)?;
        let (target, target_split) = self.metric_or_product(section, &i.target)?;
        let (map, factor_split) = match (&i.map, &i.maps) {
            (Some(m), None) => (self.map(section, m)?.0.clone(), None),
            (None, Some([a, b])) => {
                let (ma, mb) = (&self.map(section, a)?.0, &self.map(section, b)?.0);
                let split = (ma.source().dim(), mb.source().dim());
                let tsplit = (ma.target().dim(), mb.target().dim());
                (core(section, SmoothMap::product(ma, mb))?, Some((split, tsplit)))
            }
            _ => return invalid(section, "give exactly one of `map`, `maps`"),
        };
        let split = i
            .split
            .map(|[a, b]| (a, b))
            .or(source_split)
            .or(factor_split.map(|(s, _)| s));
        let Some(split) = split else {
            return invalid(section, "`split` is required when the source is a plain metric and `map` is used");
        };
        let mut setup = core(section, ImmersionSetup::new(source, target, map, split))?;
        let tsplit = i
            .target_split
            .map(|[a, b]| (a, b))
            .or(target_split)
            .or(factor_split.map(|(_, t)| t));
        if let Some((m1, m2)) = tsplit {
            setup = core(section, setup.with_target_split(m1, m2))?;
        }
        Ok(setup)
    }
}
