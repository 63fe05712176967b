//! Scene configuration: a TOML file describing the groupoid, run sizes,
//! tolerance overrides and the expressions used by the suites.

use lie_bisections::algebroid::AlgebroidSection;
use lie_bisections::expr::Expr;
use lie_bisections::flow::TimeDependentSection;
use lie_bisections::groupoid::gauge::Transition;
use lie_bisections::groupoid::{
    GaugeGroupoid, GroupBundle, GroupOverPoint, Groupoid, GroupoidDescriptor, PairGroupoid, PrincipalBundle,
};
use lie_bisections::manifolds::{BaseManifold, Cover, MatrixGroup};
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub groupoid: GroupoidSpec,
    #[serde(default)]
    pub run: RunSpec,
    /// Overrides keyed by `suite` or `suite.check`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub sections: SectionSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub diffeo: DiffeoSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupoidSpec {
    Pair {
        #[serde(default = "default_base")]
        base: String,
    },
    Group {
        group: String,
    },
    Gauge {
        group: String,
        #[serde(default)]
        cover: CoverSpec,
        #[serde(default)]
        transitions: Vec<TransitionSpec>,
    },
    GroupBundle {
        group: String,
        #[serde(default)]
        cover: CoverSpec,
        #[serde(default)]
        transitions: Vec<TransitionSpec>,
    },
}

fn default_base() -> String {
    "circle".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    #[serde(default = "two")]
    pub arcs: usize,
    /// Overlap fraction for covers with more than two arcs.
    #[serde(default)]
    pub overlap: Option<f64>,
}

fn two() -> usize {
    2
}

impl Default for CoverSpec {
    fn default() -> Self {
        CoverSpec { arcs: 2, overlap: None }
    }
}

/// `k_{to,from}(x) = exp(Σ ξ_k(x) E_k)`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub to: usize,
    pub from: usize,
    pub algebra: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_h")]
    pub bracket_step: f64,
}

fn one_u64() -> u64 {
    1
}
fn default_grid() -> usize {
    64
}
fn default_steps() -> usize {
    100
}
fn default_samples() -> usize {
    200
}
fn default_h() -> f64 {
    1e-3
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            seed: one_u64(),
            grid: default_grid(),
            steps: default_steps(),
            samples: default_samples(),
            bracket_step: default_h(),
        }
    }
}

/// Sections `X`, `Y` as expression lists; random sections are drawn when absent.
///
/// - pair groupoid: one component per base coordinate,
/// - group: coefficients in the Lie algebra basis (constants),
/// - gauge groupoid: the anchor followed by the algebra coefficients,
/// - group bundle: the algebra coefficients.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub x: Option<Vec<String>>,
    pub y: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    /// `η(t, x) = Σ c_k(t)·X_k(x)`; random when absent.
    #[serde(default)]
    pub eta: Vec<TermSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default = "unit_coefficient")]
    pub coefficient: String,
    pub section: Vec<String>,
}

fn unit_coefficient() -> String {
    "1".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffeoSpec {
    #[serde(default = "default_map")]
    pub map: String,
}

fn default_map() -> String {
    "x + 0.2*sin(x)".into()
}

impl Default for DiffeoSpec {
    fn default() -> Self {
        DiffeoSpec { map: default_map() }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<lie_bisections::Error> for ConfigError {
    fn from(e: lie_bisections::Error) -> Self {
        ConfigError(e.to_string())
    }
}

type CResult<T> = std::result::Result<T, ConfigError>;

pub fn parse(text: &str) -> CResult<SceneConfig> {
    let cfg: SceneConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    for (k, v) in &cfg.tolerances {
        if !(v.is_finite() && *v > 0.0) {
            return Err(ConfigError(format!("tolerance `{k}` must be positive, got {v}")));
        }
    }
    let r = &cfg.run;
    if r.grid == 0 || r.steps == 0 || r.samples == 0 {
        return Err(ConfigError("grid, steps and samples must be positive".into()));
    }
    if !(r.bracket_step.is_finite() && r.bracket_step > 0.0) {
        return Err(ConfigError("bracket_step must be positive".into()));
    }
    Ok(cfg)
}

fn group(name: &str) -> CResult<MatrixGroup> {
    match name.to_ascii_lowercase().as_str() {
        "so3" => Ok(MatrixGroup::SO3),
        "heisenberg3" | "heisenberg" => Ok(MatrixGroup::Heisenberg3),
        _ => Err(ConfigError(format!("unknown group `{name}` (expected SO3 or Heisenberg3)"))),
    }
}

fn bundle(group_name: &str, cover: &CoverSpec, transitions: &[TransitionSpec]) -> CResult<PrincipalBundle> {
    let grp = group(group_name)?;
    let cover = match (cover.arcs, cover.overlap) {
        (0, _) => return Err(ConfigError("a cover needs at least one arc".into())),
        (1, _) => Cover::single(),
        (2, None) => Cover::two_arcs(),
        (n, o) => Cover::uniform(n, o.unwrap_or(0.3))?,
    };
    let ts = transitions
        .iter()
        .map(|t| {
            let algebra = t.algebra.iter().map(|s| Expr::parse(s, &["x"])).collect::<lie_bisections::Result<Vec<_>>>()?;
            Ok(Transition { to: t.to, from: t.from, algebra })
        })
        .collect::<CResult<Vec<_>>>()?;
    Ok(PrincipalBundle::new(grp, cover, ts)?)
}

impl GroupoidSpec {
    pub fn build(&self) -> CResult<GroupoidDescriptor> {
        Ok(match self {
            GroupoidSpec::Pair { base } => {
                let b = match base.as_str() {
                    "circle" => BaseManifold::CIRCLE,
                    "torus2" => BaseManifold::Torus(2),
                    "point" => BaseManifold::Point,
                    _ => return Err(ConfigError(format!("unknown base `{base}` (expected circle, torus2 or point)"))),
                };
                PairGroupoid::new(b).into()
            }
            GroupoidSpec::Group { group: g } => GroupOverPoint::new(group(g)?).into(),
            GroupoidSpec::Gauge { group, cover, transitions } => GaugeGroupoid::new(bundle(group, cover, transitions)?).into(),
            GroupoidSpec::GroupBundle { group, cover, transitions } => {
                GroupBundle::new(bundle(group, cover, transitions)?).into()
            }
        })
    }
}

/// Parse a section given as expressions, following the conventions of [`SectionSpec`].
pub fn section(gpd: &GroupoidDescriptor, exprs: &[String]) -> CResult<AlgebroidSection> {
    let refs: Vec<&str> = exprs.iter().map(|s| s.as_str()).collect();
    Ok(match gpd {
        GroupoidDescriptor::Pair(_) => AlgebroidSection::pair(gpd, &refs)?,
        GroupoidDescriptor::Group(g) => {
            let grp = g.group();
            if refs.len() != grp.algebra_dim() {
                return Err(ConfigError(format!("{} needs {} algebra coefficients", gpd.name(), grp.algebra_dim())));
            }
            let c = refs
                .iter()
                .map(|s| {
                    let e = Expr::parse(s, &[])?;
                    Ok(e.eval::<f64>(&[]))
                })
                .collect::<lie_bisections::Result<Vec<f64>>>()?;
            AlgebroidSection::constant(gpd, &grp.hat(&c))?
        }
        GroupoidDescriptor::Gauge(_) => {
            let (anchor, xi) = refs.split_first().ok_or_else(|| ConfigError("gauge sections need an anchor".into()))?;
            AlgebroidSection::gauge_uniform(gpd, anchor, xi)?
        }
        GroupoidDescriptor::GroupBundle(_) => AlgebroidSection::gauge_uniform(gpd, "0", &refs)?,
    })
}

pub fn eta(gpd: &GroupoidDescriptor, spec: &FlowSpec) -> CResult<Option<TimeDependentSection>> {
    if spec.eta.is_empty() {
        return Ok(None);
    }
    let terms = spec.eta.iter().map(|t| Ok((t.coefficient.as_str(), section(gpd, &t.section)?))).collect::<CResult<Vec<_>>>()?;
    Ok(Some(TimeDependentSection::combination(&terms)?))
}

/// Parse every expression of the scene against `gpd` so that typos surface as
/// configuration errors rather than mid-run.
pub fn validate(cfg: &SceneConfig, gpd: &GroupoidDescriptor) -> CResult<()> {
    for s in [&cfg.sections.x, &cfg.sections.y].into_iter().flatten() {
        section(gpd, s)?;
    }
    eta(gpd, &cfg.flow)?;
    Expr::parse(&cfg.diffeo.map, &["x"])?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scene() {
        let cfg = parse(
            r#"
            [groupoid]
            kind = "gauge"
            group = "SO3"
            transitions = [{ to = 1, from = 0, algebra = ["0", "0", "x"] }]
            [sections]
            x = ["sin(x)", "cos(x)", "0", "1"]
            "#,
        )
        .unwrap();
        let g = cfg.groupoid.build().unwrap();
        assert_eq!(g.name(), "Gauge(SO3, 2 arcs)");
        section(&g, cfg.sections.x.as_ref().unwrap()).unwrap();
        assert_eq!(cfg.run.grid, 64);
    }

    #[test]
    fn rejections() {
        assert!(parse("[groupoid]\nkind = \"pair\"\n[tolerances]\nlalg = -1.0").is_err());
        assert!(parse("[groupoid]\nkind = \"torus\"").is_err());
        let cfg = parse("[groupoid]\nkind = \"group\"\ngroup = \"SU2\"").unwrap();
        assert!(cfg.groupoid.build().is_err());
        let cfg = parse("[groupoid]\nkind = \"group\"\ngroup = \"SO3\"").unwrap();
        let g = cfg.groupoid.build().unwrap();
        assert!(section(&g, &["x".into(), "0".into(), "0".into()]).is_err());
        let cfg = parse("[groupoid]\nkind = \"pair\"\n[flow]\neta = [{ section = [\"sin(y)\"] }]").unwrap();
        assert!(validate(&cfg, &cfg.groupoid.build().unwrap()).is_err());
    }
}
