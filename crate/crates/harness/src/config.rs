//! Experiment configuration: TOML text with dotted section paths.
//!
//! Every key is validated at parse time and errors name the offending field
//! (`model.sigma`, `grid.prices`, ...). Defaults are filled in and recorded,
//! so a minimal file and its fully spelled-out equivalent hash identically.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mints_core::cutting_plane::{Ellipsoid, Polygon2D, QuadraticObjective};
use mints_core::lipschitz::{ConeObjective, LipschitzSpec, DEFAULT_MAX_ATTEMPTS};
use mints_core::mab::{ArmLipschitz, BanditEnv, MabModel};
use mints_core::model::Belief;
use mints_core::pricing::{Hypothesis, PriceGrid, ValuationModel};
use mints_core::Mat64;
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Value;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("`{0}`: unknown key")]
    UnknownKey(String),
    #[error("`{0}`: required key is missing")]
    Missing(String),
    #[error("`{path}`: expected {expected}")]
    Type { path: String, expected: &'static str },
    #[error("`{path}`: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    /// Dotted path of the offending field, when there is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            Self::UnknownKey(p) | Self::Missing(p) => Some(p),
            Self::Type { path, .. } | Self::Invalid { path, .. } => Some(path),
            Self::Io { .. } | Self::Syntax(_) => None,
        }
    }

    fn invalid(path: &str, message: impl fmt::Display) -> Self {
        Self::Invalid {
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Mab,
    MabLipschitz,
    Pricing,
    LipschitzContinuum,
    Cog,
    Ellipsoid,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Mab,
        Family::MabLipschitz,
        Family::Pricing,
        Family::LipschitzContinuum,
        Family::Cog,
        Family::Ellipsoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Mab => "mab",
            Family::MabLipschitz => "mab_lipschitz",
            Family::Pricing => "pricing",
            Family::LipschitzContinuum => "lipschitz_continuum",
            Family::Cog => "cog",
            Family::Ellipsoid => "ellipsoid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family {s:?}"))
    }
}

/// Decision rule for the finite-armed families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Mints,
    /// Gaussian Thompson sampling with conjugate `N(0, 1)` priors.
    Ts,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Mints => "mints",
            Policy::Ts => "ts",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Params {
    Mab {
        env: BanditEnv<f64>,
        model: MabModel<f64>,
        prior: Belief<usize, f64>,
        policy: Policy,
    },
    Pricing {
        grid: PriceGrid<f64>,
        valuation: ValuationModel<f64>,
        prior: Belief<usize, f64>,
        hypothesis: Hypothesis,
    },
    Continuum {
        objective: ConeObjective<f64>,
        spec: LipschitzSpec<f64>,
        noise_sd: Option<f64>,
        max_attempts: u64,
    },
    Cog {
        objective: QuadraticObjective<f64>,
        region: Polygon2D<f64>,
    },
    Ellipsoid {
        objective: QuadraticObjective<f64>,
        region: Ellipsoid<f64>,
    },
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: Family,
    pub seed: u64,
    pub replications: u64,
    pub output_dir: PathBuf,
    /// Horizon `T`.
    pub rounds: usize,
    pub params: Params,
    /// Resolved family parameters (defaults included) in canonical text form.
    canon: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn policy(&self) -> &'static str {
        match &self.params {
            Params::Mab { policy, .. } => policy.name(),
            _ => Policy::Mints.name(),
        }
    }

    /// Hash of everything that determines the simulated problem: family,
    /// horizon and parameters, but not the policy, seed or replication count.
    pub fn env_hash(&self) -> String {
        self.hash(false)
    }

    /// Hash of everything that determines the emitted bytes except the
    /// output location.
    pub fn config_hash(&self) -> String {
        self.hash(true)
    }

    fn hash(&self, full: bool) -> String {
        let mut h = Sha256::new();
        h.update(format!("family = {}\nrounds = {}\n", self.family, self.rounds));
        for (k, v) in &self.canon {
            if full || !k.starts_with("policy.") {
                h.update(format!("{k} = {v}\n"));
            }
        }
        if full {
            h.update(format!("seed = {}\nreplications = {}\n", self.seed, self.replications));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Resolved parameters as `key = value` lines, defaults included.
    pub fn resolved(&self) -> impl Iterator<Item = (&str, &str)> {
        self.canon.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Parses and validates; the file must name its family.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_for(text, None)
}

/// Parses and validates for `family`. A `family` key in the file, if
/// present, must agree.
pub fn parse_config_for(text: &str, family: Option<Family>) -> Result<ExperimentConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut f = Fields::new(&table);
    let named = match f.take("family") {
        None => None,
        Some(v) => {
            let s = str_of("family", &v)?;
            Some(Family::from_str(&s).map_err(|m| ConfigError::invalid("family", m))?)
        }
    };
    let family = match (named, family) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::invalid(
                "family",
                format!("file says {a}, command line says {b}"),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(ConfigError::Missing("family".into())),
    };
    let seed = f.take("seed").map(|v| u64_of("seed", &v)).transpose()?.unwrap_or(0);
    let replications = f
        .take("replications")
        .map(|v| u64_of("replications", &v))
        .transpose()?
        .unwrap_or(1);
    if replications == 0 {
        return Err(ConfigError::invalid("replications", "must be at least 1"));
    }
    let output_dir = match f.take("output_dir") {
        Some(v) => PathBuf::from(str_of("output_dir", &v)?),
        None => PathBuf::from("out"),
    };
    let rounds = match f.take("rounds") {
        Some(v) => u64_of("rounds", &v)?,
        None => return Err(ConfigError::Missing("rounds".into())),
    };
    if rounds == 0 {
        return Err(ConfigError::invalid("rounds", "must be at least 1"));
    }
    let rounds = usize::try_from(rounds).map_err(|_| ConfigError::invalid("rounds", "too large"))?;
    let params = match family {
        Family::Mab => mab_params(&mut f, false)?,
        Family::MabLipschitz => mab_params(&mut f, true)?,
        Family::Pricing => pricing_params(&mut f)?,
        Family::LipschitzContinuum => continuum_params(&mut f)?,
        Family::Cog => cog_params(&mut f)?,
        Family::Ellipsoid => ellipsoid_params(&mut f)?,
    };
    f.finish()?;
    Ok(ExperimentConfig {
        family,
        seed,
        replications,
        output_dir,
        rounds,
        params,
        canon: f.canon,
    })
}

/// Leaf values by dotted path, consumed as they are read.
struct Fields {
    left: BTreeMap<String, Value>,
    canon: BTreeMap<String, String>,
}

impl Fields {
    fn new(table: &toml::Table) -> Self {
        let mut left = BTreeMap::new();
        flatten("", table, &mut left);
        Self {
            left,
            canon: BTreeMap::new(),
        }
    }

    fn take(&mut self, path: &str) -> Option<Value> {
        self.left.remove(path)
    }

    fn finish(&self) -> Result<()> {
        match self.left.keys().next() {
            Some(k) => Err(ConfigError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    fn record(&mut self, path: &str, value: String) {
        self.canon.insert(path.to_string(), value);
    }

    fn f64_or(&mut self, path: &str, default: f64) -> Result<f64> {
        let x = match self.take(path) {
            Some(v) => f64_of(path, &v)?,
            None => default,
        };
        self.record(path, format!("{x:?}"));
        Ok(x)
    }

    fn f64_req(&mut self, path: &str) -> Result<f64> {
        let v = self.take(path).ok_or_else(|| ConfigError::Missing(path.into()))?;
        let x = f64_of(path, &v)?;
        self.record(path, format!("{x:?}"));
        Ok(x)
    }

    fn vec_opt(&mut self, path: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.take(path) else { return Ok(None) };
        let xs = vec_of(path, &v)?;
        self.record(path, format!("{xs:?}"));
        Ok(Some(xs))
    }

    fn vec_req(&mut self, path: &str) -> Result<Vec<f64>> {
        self.vec_opt(path)?.ok_or_else(|| ConfigError::Missing(path.into()))
    }

    fn mat_opt(&mut self, path: &str) -> Result<Option<Vec<Vec<f64>>>> {
        let Some(v) = self.take(path) else { return Ok(None) };
        let rows = match &v {
            Value::Array(rows) => rows.iter().map(|r| vec_of(path, r)).collect::<Result<Vec<_>>>()?,
            _ => return Err(type_err(path, "an array of number arrays")),
        };
        self.record(path, format!("{rows:?}"));
        Ok(Some(rows))
    }

    fn str_or(&mut self, path: &str, default: &str) -> Result<String> {
        let s = match self.take(path) {
            Some(v) => str_of(path, &v)?,
            None => default.to_string(),
        };
        self.record(path, format!("{s:?}"));
        Ok(s)
    }

    fn u64_or(&mut self, path: &str, default: u64) -> Result<u64> {
        let x = match self.take(path) {
            Some(v) => u64_of(path, &v)?,
            None => default,
        };
        self.record(path, x.to_string());
        Ok(x)
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&path, t, out),
            _ => {
                out.insert(path, v.clone());
            }
        }
    }
}

fn type_err(path: &str, expected: &'static str) -> ConfigError {
    ConfigError::Type {
        path: path.to_string(),
        expected,
    }
}

fn f64_of(path: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(type_err(path, "a number")),
    }
}

fn u64_of(path: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(type_err(path, "a nonnegative integer")),
    }
}

fn str_of(path: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        _ => Err(type_err(path, "a string")),
    }
}

fn vec_of(path: &str, v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Array(xs) => xs
            .iter()
            .map(|x| f64_of(path, x).map_err(|_| type_err(path, "an array of numbers")))
            .collect(),
        _ => Err(type_err(path, "an array of numbers")),
    }
}

fn positive(path: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::invalid(path, format!("{x} must be positive and finite")))
    }
}

fn nonnegative(path: &str, x: f64) -> Result<f64> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::invalid(
            path,
            format!("{x} must be nonnegative and finite"),
        ))
    }
}

fn matrix(path: &str, rows: Vec<Vec<f64>>, d: usize) -> Result<Mat64> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(ConfigError::invalid(path, format!("must be {d}×{d}")));
    }
    Ok(Mat64::from_rows(&rows))
}

/// `prior.weights`, normalized; uniform when absent.
fn prior(f: &mut Fields, k: usize) -> Result<Belief<usize, f64>> {
    let support: Vec<usize> = (0..k).collect();
    let Some(w) = f.vec_opt("prior.weights")? else {
        f.record("prior.weights", "uniform".into());
        return Belief::uniform(support).map_err(|e| ConfigError::invalid("prior.weights", e));
    };
    if w.len() != k {
        return Err(ConfigError::invalid(
            "prior.weights",
            format!("has {} entries for {k} arms", w.len()),
        ));
    }
    if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(ConfigError::invalid(
            "prior.weights",
            "weights must be nonnegative and finite",
        ));
    }
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(ConfigError::invalid("prior.weights", "weights must not all be zero"));
    }
    Belief::new(support, w.iter().map(|x| x / total).collect()).map_err(|e| ConfigError::invalid("prior.weights", e))
}

fn mab_params(f: &mut Fields, lipschitz: bool) -> Result<Params> {
    let kind = f.str_or("env.kind", "gaussian")?;
    let means = f.vec_req("env.means")?;
    let env = match kind.as_str() {
        "gaussian" => {
            let sd = nonnegative("env.noise_sd", f.f64_or("env.noise_sd", 1.0)?)?;
            BanditEnv::gaussian(means, sd)
        }
        "bernoulli" => BanditEnv::bernoulli(means),
        "bounded" => {
            let h = nonnegative("env.half_width", f.f64_or("env.half_width", 1.0)?)?;
            BanditEnv::bounded(means, h)
        }
        other => {
            return Err(ConfigError::invalid(
                "env.kind",
                format!("{other:?} is not one of gaussian, bernoulli, bounded"),
            ))
        }
    }
    .map_err(|e| ConfigError::invalid("env.means", e))?;
    let k = env.k();
    let sigma = positive("model.sigma", f.f64_or("model.sigma", MabModel::<f64>::DEFAULT_SIGMA)?)?;
    let mut model = MabModel::new(sigma).map_err(|e| ConfigError::invalid("model.sigma", e))?;
    if lipschitz {
        let m = f.f64_req("model.lipschitz_m")?;
        if !(m > 0.0) {
            return Err(ConfigError::invalid(
                "model.lipschitz_m",
                format!("{m} must be positive"),
            ));
        }
        let positions = f.vec_opt("model.positions")?;
        let distances = f.mat_opt("model.distances")?;
        let arms = match (positions, distances) {
            (Some(p), None) => {
                if p.len() != k {
                    return Err(ConfigError::invalid(
                        "model.positions",
                        format!("has {} entries for {k} arms", p.len()),
                    ));
                }
                ArmLipschitz::on_line(m, &p).map_err(|e| ConfigError::invalid("model.positions", e))?
            }
            (None, Some(d)) => ArmLipschitz::new(m, matrix("model.distances", d, k)?)
                .map_err(|e| ConfigError::invalid("model.distances", e))?,
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid(
                    "model.distances",
                    "give model.positions or model.distances, not both",
                ))
            }
            (None, None) => return Err(ConfigError::Missing("model.positions".into())),
        };
        model = model.with_lipschitz(arms);
    }
    let prior = prior(f, k)?;
    let policy = match f.str_or("policy.name", "mints")?.as_str() {
        "mints" => Policy::Mints,
        "ts" => Policy::Ts,
        other => {
            return Err(ConfigError::invalid(
                "policy.name",
                format!("{other:?} is not one of mints, ts"),
            ))
        }
    };
    Ok(Params::Mab {
        env,
        model,
        prior,
        policy,
    })
}

fn pricing_params(f: &mut Fields) -> Result<Params> {
    let prices = f.vec_req("grid.prices")?;
    let m = f.f64_req("grid.lipschitz_m")?;
    if !(m > 0.0) {
        return Err(ConfigError::invalid(
            "grid.lipschitz_m",
            format!("{m} must be positive"),
        ));
    }
    if let Some(w) = prices.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(ConfigError::invalid(
            "grid.prices",
            format!("must be strictly increasing ({} then {})", w[0], w[1]),
        ));
    }
    let grid = PriceGrid::new(prices, m).map_err(|e| ConfigError::invalid("grid.prices", e))?;
    let hypothesis = match f.str_or("grid.hypothesis", "revenue")?.as_str() {
        "revenue" => Hypothesis::Revenue,
        "literal" => Hypothesis::Literal,
        other => {
            return Err(ConfigError::invalid(
                "grid.hypothesis",
                format!("{other:?} is not one of revenue, literal"),
            ))
        }
    };
    let valuation = match f.str_or("valuation.kind", "uniform")?.as_str() {
        "uniform" => {
            let a = f.f64_or("valuation.a", 0.0)?;
            let b = f.f64_or("valuation.b", 1.0)?;
            ValuationModel::uniform(a, b).map_err(|e| ConfigError::invalid("valuation.b", e))?
        }
        "piecewise" => {
            let knots = f
                .mat_opt("valuation.knots")?
                .ok_or_else(|| ConfigError::Missing("valuation.knots".into()))?;
            if knots.iter().any(|k| k.len() != 2) {
                return Err(ConfigError::invalid(
                    "valuation.knots",
                    "each knot is a [value, cdf] pair",
                ));
            }
            ValuationModel::piecewise_linear(knots.iter().map(|k| (k[0], k[1])).collect())
                .map_err(|e| ConfigError::invalid("valuation.knots", e))?
        }
        other => {
            return Err(ConfigError::invalid(
                "valuation.kind",
                format!("{other:?} is not one of uniform, piecewise"),
            ))
        }
    };
    let prior = prior(f, grid.k())?;
    Ok(Params::Pricing {
        grid,
        valuation,
        prior,
        hypothesis,
    })
}

fn continuum_params(f: &mut Fields) -> Result<Params> {
    let m = f.f64_req("model.lipschitz_m")?;
    let sigma = positive("model.sigma", f.f64_or("model.sigma", MabModel::<f64>::DEFAULT_SIGMA)?)?;
    let spec = LipschitzSpec::new(m, sigma).map_err(|e| ConfigError::invalid("model.lipschitz_m", e))?;
    let peak = f.vec_req("objective.peak")?;
    if peak.is_empty() || peak.len() > 3 {
        return Err(ConfigError::invalid("objective.peak", "dimension must be 1, 2 or 3"));
    }
    let height = f.f64_or("objective.height", 1.0)?;
    let slope = f.f64_or("objective.slope", if m.is_finite() { m } else { 1.0 })?;
    if slope > m {
        return Err(ConfigError::invalid(
            "objective.slope",
            format!("{slope} exceeds the Lipschitz constant {m}"),
        ));
    }
    let objective = ConeObjective::new(peak, height, slope).map_err(|e| ConfigError::invalid("objective.peak", e))?;
    let sd = nonnegative("env.noise_sd", f.f64_or("env.noise_sd", 0.0)?)?;
    let max_attempts = f.u64_or("sampler.max_attempts", DEFAULT_MAX_ATTEMPTS)?;
    if max_attempts == 0 {
        return Err(ConfigError::invalid("sampler.max_attempts", "must be at least 1"));
    }
    Ok(Params::Continuum {
        objective,
        spec,
        noise_sd: (sd > 0.0).then_some(sd),
        max_attempts,
    })
}

fn quadratic(f: &mut Fields, d: Option<usize>) -> Result<QuadraticObjective<f64>> {
    let minimizer = f.vec_req("objective.minimizer")?;
    let d = d.unwrap_or(minimizer.len());
    if minimizer.len() != d || d == 0 {
        return Err(ConfigError::invalid(
            "objective.minimizer",
            format!("must have {d} coordinates"),
        ));
    }
    let q = match f.mat_opt("objective.q")? {
        Some(rows) => matrix("objective.q", rows, d)?,
        None => {
            f.record("objective.q", "identity".into());
            Mat64::identity(d)
        }
    };
    QuadraticObjective::new(q, minimizer).map_err(|e| ConfigError::invalid("objective.q", e))
}

fn cog_params(f: &mut Fields) -> Result<Params> {
    let objective = quadratic(f, Some(2))?;
    let lo = f.vec_opt("region.lo")?.unwrap_or_else(|| vec![0.0, 0.0]);
    let hi = f.vec_opt("region.hi")?.unwrap_or_else(|| vec![1.0, 1.0]);
    f.record("region.lo", format!("{lo:?}"));
    f.record("region.hi", format!("{hi:?}"));
    if lo.len() != 2 || hi.len() != 2 {
        return Err(ConfigError::invalid("region.lo", "corners must have 2 coordinates"));
    }
    if !(lo[0] < hi[0] && lo[1] < hi[1]) {
        return Err(ConfigError::invalid(
            "region.hi",
            "must exceed region.lo in both coordinates",
        ));
    }
    let region =
        Polygon2D::rectangle([lo[0], lo[1]], [hi[0], hi[1]]).map_err(|e| ConfigError::invalid("region.hi", e))?;
    let x = objective.minimizer();
    if !region.contains([x[0], x[1]], 0.0) {
        return Err(ConfigError::invalid("objective.minimizer", "must lie in the region"));
    }
    Ok(Params::Cog { objective, region })
}

fn ellipsoid_params(f: &mut Fields) -> Result<Params> {
    let center = f.vec_req("region.center")?;
    let d = center.len();
    if d == 0 {
        return Err(ConfigError::invalid("region.center", "needs at least one coordinate"));
    }
    let objective = quadratic(f, Some(d))?;
    let radius = f.take("region.radius");
    let shape = f.mat_opt("region.shape")?;
    let region = match (radius, shape) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::invalid(
                "region.shape",
                "give region.radius or region.shape, not both",
            ))
        }
        (None, Some(rows)) => Ellipsoid::new(center, matrix("region.shape", rows, d)?)
            .map_err(|e| ConfigError::invalid("region.shape", e))?,
        (r, None) => {
            let r = match r {
                Some(v) => positive("region.radius", f64_of("region.radius", &v)?)?,
                None => 1.0,
            };
            f.record("region.radius", format!("{r:?}"));
            Ellipsoid::ball(center, r).map_err(|e| ConfigError::invalid("region.radius", e))?
        }
    };
    if !region.contains(objective.minimizer(), 0.0) {
        return Err(ConfigError::invalid("objective.minimizer", "must lie in the region"));
    }
    Ok(Params::Ellipsoid { objective, region })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_MAB: &str = "family = \"mab\"\nrounds = 10\nenv.means = [0.5, 0.0]\n";

    #[test]
    fn minimal_mab_fills_defaults() {
        let c = parse_config(MINIMAL_MAB).unwrap();
        assert_eq!(c.family, Family::Mab);
        assert_eq!((c.seed, c.replications, c.rounds), (0, 1, 10));
        let Params::Mab {
            model,
            prior,
            policy,
            env,
        } = &c.params
        else {
            panic!()
        };
        assert_eq!(model.sigma(), 1.2);
        assert_eq!(prior.weights(), &[0.5, 0.5]);
        assert_eq!(*policy, Policy::Mints);
        assert_eq!(env.k(), 2);
    }

    #[test]
    fn defaults_hash_like_explicit_values() {
        let explicit = format!(
            "{MINIMAL_MAB}model.sigma = 1.2\nenv.kind = \"gaussian\"\nenv.noise_sd = 1\n[policy]\nname = \"mints\"\n"
        );
        let a = parse_config(MINIMAL_MAB).unwrap();
        let b = parse_config(&explicit).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        let ts = parse_config(&format!("{MINIMAL_MAB}policy.name = \"ts\"\n")).unwrap();
        assert_eq!(a.env_hash(), ts.env_hash());
        assert_ne!(a.config_hash(), ts.config_hash());
        let seeded = parse_config(&format!("{MINIMAL_MAB}seed = 3\n")).unwrap();
        assert_eq!(a.env_hash(), seeded.env_hash());
        assert_ne!(a.config_hash(), seeded.config_hash());
    }

    #[test]
    fn negative_sigma_names_the_field() {
        let e = parse_config(&format!("{MINIMAL_MAB}model.sigma = -1\n")).unwrap_err();
        assert_eq!(e.path(), Some("model.sigma"));
    }

    #[test]
    fn unknown_and_misplaced_keys_are_rejected() {
        let e = parse_config(&format!("{MINIMAL_MAB}model.sigmaa = 1\n")).unwrap_err();
        assert_eq!(e.path(), Some("model.sigmaa"));
        // A pricing key is unknown to a bandit experiment.
        let e = parse_config(&format!("{MINIMAL_MAB}grid.prices = [1, 2]\n")).unwrap_err();
        assert_eq!(e.path(), Some("grid.prices"));
    }

    #[test]
    fn type_mismatch_names_the_field() {
        let e = parse_config(&format!("{MINIMAL_MAB}model.sigma = \"big\"\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Type { ref path, .. } if path == "model.sigma"));
        let e = parse_config("family = \"mab\"\nrounds = -3\nenv.means = [0]\n").unwrap_err();
        assert_eq!(e.path(), Some("rounds"));
    }

    #[test]
    fn pricing_needs_increasing_prices() {
        let e = parse_config("family = \"pricing\"\nrounds = 5\ngrid.prices = [0.2, 0.2, 0.5]\ngrid.lipschitz_m = 2\n")
            .unwrap_err();
        assert_eq!(e.path(), Some("grid.prices"));
        let ok = parse_config("family = \"pricing\"\nrounds = 5\ngrid.prices = [0.2, 0.5]\ngrid.lipschitz_m = 2\n");
        assert!(ok.is_ok());
    }

    #[test]
    fn family_must_agree_with_the_command_line() {
        assert!(parse_config_for(MINIMAL_MAB, Some(Family::Mab)).is_ok());
        let e = parse_config_for(MINIMAL_MAB, Some(Family::Pricing)).unwrap_err();
        assert_eq!(e.path(), Some("family"));
        let body = "rounds = 10\nenv.means = [0.5, 0.0]\n";
        assert!(parse_config_for(body, Some(Family::Mab)).is_ok());
        assert!(matches!(parse_config(body), Err(ConfigError::Missing(_))));
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let e = parse_config("family = \"mab\"\nrounds = \n").unwrap_err();
        let ConfigError::Syntax(msg) = e else { panic!() };
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn geometry_families_validate_regions() {
        let cog = "family = \"cog\"\nrounds = 5\nobjective.minimizer = [0.3, 0.7]\n";
        assert!(parse_config(cog).is_ok());
        let e = parse_config("family = \"cog\"\nrounds = 5\nobjective.minimizer = [1.3, 0.7]\n").unwrap_err();
        assert_eq!(e.path(), Some("objective.minimizer"));
        let e = parse_config(
            "family = \"ellipsoid\"\nrounds = 5\nobjective.minimizer = [0, 0]\nregion.center = [0, 0]\nregion.shape = [[1, 2], [2, 1]]\n",
        )
        .unwrap_err();
        assert_eq!(e.path(), Some("region.shape"));
    }

    #[test]
    fn continuum_slope_cannot_exceed_m() {
        let base = "family = \"lipschitz_continuum\"\nrounds = 5\nmodel.lipschitz_m = 1\nobjective.peak = [0.4]\n";
        assert!(parse_config(base).is_ok());
        let e = parse_config(&format!("{base}objective.slope = 2\n")).unwrap_err();
        assert_eq!(e.path(), Some("objective.slope"));
    }
}
