//! Photon-number mixtures: pair-weighted averages and lower bounds on
//! `Δτ ΔΩ` for states with an arbitrary photon-number distribution.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail mass discarded by the built-in generators.
pub const TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumberDistribution {
    probabilities: Vec<f64>,
}

impl PhotonNumberDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if let Some((n, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidDistribution(format!(
                "p[{n}] = {p} is not a probability"
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probabilities })
    }

    /// Scales nonnegative weights to unit sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution(
                "weights have no positive mass".into(),
            ));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn p(&self, n: usize) -> f64 {
        self.probabilities.get(n).copied().unwrap_or(0.0)
    }

    pub fn max_n(&self) -> usize {
        self.probabilities.len() - 1
    }

    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| p * f(n as f64))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(|n| n)
    }

    /// `⟨n(n−1)⟩`
    pub fn pair_mean(&self) -> f64 {
        self.moment(|n| n * (n - 1.0))
    }

    /// `(Σ_{n≥3} p_n, Σ_{n≥3} p_n n, Σ_{n≥3} p_n n²)`
    fn upper_sums(&self) -> (f64, f64, f64) {
        self.probabilities.iter().enumerate().skip(3).fold(
            (0.0, 0.0, 0.0),
            |(s0, s1, s2), (n, p)| {
                let n = n as f64;
                (s0 + p, s1 + p * n, s2 + p * n * n)
            },
        )
    }
}

/// `⟨n(n−1) E_n⟩ / ⟨n(n−1)⟩`; `values[n]` is `E_n`.
pub fn pair_weighted_average(dist: &PhotonNumberDistribution, values: &[f64]) -> Result<f64> {
    let pairs = dist.pair_mean();
    if pairs <= 0.0 {
        return Err(Error::NoPhotonPairs);
    }
    let mut total = 0.0;
    for (n, &p) in dist.probabilities.iter().enumerate().skip(2) {
        if p == 0.0 {
            continue;
        }
        let value = values.get(n).ok_or_else(|| {
            Error::InvalidParameter(format!("no subspace value supplied for n = {n}"))
        })?;
        total += p * (n * (n - 1)) as f64 * value;
    }
    Ok(total / pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralBound {
    pub value: f64,
    /// The radicand was undefined or negative and the bound was set to 0.
    pub degenerate: bool,
}

/// `√(1 − 2(1−p0−p1−p2)/(⟨n⟩−p1−2p2)) · (1 − 2 p2/⟨n(n−1)⟩)`, a lower bound
/// on `Δτ ΔΩ`. Without any weight on `n ≥ 3` the square-root factor is 1.
pub fn general_bound(dist: &PhotonNumberDistribution) -> Result<GeneralBound> {
    let pairs = dist.pair_mean();
    if pairs <= 0.0 {
        return Err(Error::NoPhotonPairs);
    }
    let (p0, p1, p2) = (dist.p(0), dist.p(1), dist.p(2));
    let pair_factor = 1.0 - 2.0 * p2 / pairs;
    if dist.upper_sums().0 == 0.0 {
        return Ok(GeneralBound {
            value: pair_factor.max(0.0),
            degenerate: false,
        });
    }
    let heavy = (1.0 - p0 - p1 - p2).max(0.0);
    let radicand = 1.0 - 2.0 * heavy / (dist.mean() - p1 - 2.0 * p2);
    if !(radicand >= 0.0) {
        return Ok(GeneralBound {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(GeneralBound {
        value: radicand.sqrt() * pair_factor,
        degenerate: false,
    })
}

/// `√(1 − 2/⟨n⟩)`, valid for `⟨n⟩ ≥ 2`.
pub fn simplified_bound(mean_n: f64) -> Result<f64> {
    if !(mean_n >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "simplified bound needs <n> >= 2, got {mean_n}"
        )));
    }
    Ok((1.0 - 2.0 / mean_n).sqrt())
}

/// `f(n) = (n − 1) √(1 − 2/n)`, convex on `n ≥ 3`.
pub fn f_convex(n: f64) -> f64 {
    (n - 1.0) * (1.0 - 2.0 / n).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// From the full product down to the simplified form; each link should
    /// be ≥ the next.
    pub links: Vec<ChainLink>,
    /// `holds[i]` compares `links[i]` with `links[i + 1]`.
    pub holds: Vec<bool>,
    /// `(⟨n⟩−p1−2p2)/(1−p0−p1−p2) ≥ ⟨n⟩`, when there is weight on `n ≥ 3`.
    pub auxiliary: Option<bool>,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|h| *h) && self.auxiliary != Some(false)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.links.iter().find(|l| l.name == name).map(|l| l.value)
    }
}

fn at_least(a: f64, b: f64) -> bool {
    a >= b - 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Evaluates every intermediate expression of the mixture bound derivation.
/// `subspace_tau[n]` and `subspace_omega[n]` are `Δτ_n`, `ΔΩ_n` (standard
/// deviations), each pair with `Δτ_n ΔΩ_n ≥ √(1 − 2/n)`.
pub fn verify_chain(
    dist: &PhotonNumberDistribution,
    subspace_tau: &[f64],
    subspace_omega: &[f64],
) -> Result<ChainReport> {
    let pairs = dist.pair_mean();
    if pairs <= 0.0 {
        return Err(Error::NoPhotonPairs);
    }
    let mean = dist.mean();
    if mean < 2.0 {
        return Err(Error::Inadmissible(format!("<n> = {mean} < 2")));
    }
    let mut tau2 = vec![0.0; dist.probabilities.len()];
    let mut omega2 = vec![0.0; dist.probabilities.len()];
    let mut product = vec![0.0; dist.probabilities.len()];
    for n in 2..dist.probabilities.len() {
        if dist.p(n) == 0.0 {
            continue;
        }
        let (t, o) = match (subspace_tau.get(n), subspace_omega.get(n)) {
            (Some(&t), Some(&o)) => (t, o),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "no subspace value supplied for n = {n}"
                )))
            }
        };
        let floor = (1.0 - 2.0 / n as f64).sqrt();
        if !(t >= 0.0 && o >= 0.0) || !at_least(t * o, floor) {
            return Err(Error::Inadmissible(format!(
                "subspace n = {n}: Δτ ΔΩ = {} below √(1 − 2/n) = {floor}",
                t * o
            )));
        }
        tau2[n] = t * t;
        omega2[n] = o * o;
        product[n] = t * o;
    }

    let full = (pair_weighted_average(dist, &tau2)? * pair_weighted_average(dist, &omega2)?).sqrt();
    let cauchy_schwarz = pair_weighted_average(dist, &product)?;
    let subspace_bound = dist
        .probabilities
        .iter()
        .enumerate()
        .skip(3)
        .map(|(n, p)| p * n as f64 * f_convex(n as f64))
        .sum::<f64>()
        / pairs;
    let (s0, s1, s2) = dist.upper_sums();
    let (jensen, general) = if s0 > 0.0 {
        (
            (1.0 - 2.0 * s1 / s2).sqrt() * (s2 - s1) / pairs,
            (1.0 - 2.0 * s0 / s1).sqrt() * (s2 - s1) / pairs,
        )
    } else {
        (0.0, 0.0)
    };
    let closed_form = general_bound(dist)?.value;
    let simplified = simplified_bound(mean)? * (1.0 - 2.0 * dist.p(2) / pairs);

    let links = vec![
        ("full_product", full),
        ("cauchy_schwarz", cauchy_schwarz),
        ("subspace_bound", subspace_bound),
        ("jensen", jensen),
        ("general_bound", general),
        ("simplified", simplified),
    ];
    let mut holds: Vec<bool> = links.windows(2).map(|w| at_least(w[0].1, w[1].1)).collect();
    // the closed form of the general bound must equal the summed form
    holds[3] = holds[3] && (closed_form - general).abs() <= 1e-10 * general.abs().max(1.0);
    let auxiliary = (s0 > 0.0).then(|| {
        let (p0, p1, p2) = (dist.p(0), dist.p(1), dist.p(2));
        at_least((mean - p1 - 2.0 * p2) / (1.0 - p0 - p1 - p2), mean)
    });
    Ok(ChainReport {
        links: links
            .into_iter()
            .map(|(name, value)| ChainLink {
                name: name.to_string(),
                value,
            })
            .collect(),
        holds,
        auxiliary,
    })
}

/// A named family of photon-number distributions, parameterized by a
/// string argument (`poisson:4` has argument `4`).
pub trait DistributionGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, argument: &str) -> Result<PhotonNumberDistribution>;
}

fn parse_mean(argument: &str) -> Result<f64> {
    let mean: f64 = argument
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("`{argument}` is not a number")))?;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be > 0, got {mean}"
        )));
    }
    Ok(mean)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Poisson;

impl Poisson {
    pub fn distribution(mean: f64) -> Result<PhotonNumberDistribution> {
        let mut probabilities = Vec::new();
        let mut log_p = -mean;
        let mut n = 0usize;
        loop {
            let p = log_p.exp();
            probabilities.push(p);
            n += 1;
            // tail beyond n - 1 is below p_n / (1 - mean/(n+1)) once n > mean
            let next = log_p + mean.ln() - (n as f64).ln();
            let ratio = mean / (n as f64 + 1.0);
            if n as f64 > mean && ratio < 1.0 && next.exp() / (1.0 - ratio) < TAIL_MASS {
                break;
            }
            log_p = next;
        }
        PhotonNumberDistribution::normalized(probabilities)
    }
}

impl DistributionGenerator for Poisson {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn generate(&self, argument: &str) -> Result<PhotonNumberDistribution> {
        Self::distribution(parse_mean(argument)?)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Thermal;

impl Thermal {
    pub fn distribution(mean: f64) -> Result<PhotonNumberDistribution> {
        let q = mean / (1.0 + mean);
        // tail after N is q^(N+1)
        let last = (TAIL_MASS.ln() / q.ln()).ceil() as usize;
        let probabilities = (0..=last)
            .map(|n| q.powi(n as i32) / (1.0 + mean))
            .collect();
        PhotonNumberDistribution::normalized(probabilities)
    }
}

impl DistributionGenerator for Thermal {
    fn name(&self) -> &'static str {
        "thermal"
    }

    fn generate(&self, argument: &str) -> Result<PhotonNumberDistribution> {
        Self::distribution(parse_mean(argument)?)
    }
}

/// Single-mode squeezed vacuum: weight only on even photon numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct SqueezedVacuum;

impl SqueezedVacuum {
    pub fn distribution(mean: f64) -> Result<PhotonNumberDistribution> {
        let r = mean.sqrt().asinh();
        let t2 = r.tanh().powi(2);
        let mut probabilities = vec![1.0 / r.cosh()];
        let mut p_even = probabilities[0];
        let mut k = 0usize;
        loop {
            // p_{2k+2} / p_{2k} = tanh² r (2k+1)/(2k+2)
            let ratio = t2 * (2 * k + 1) as f64 / (2 * k + 2) as f64;
            p_even *= ratio;
            k += 1;
            probabilities.push(0.0);
            probabilities.push(p_even);
            // remaining ratios are below tanh² r
            if p_even * t2 / (1.0 - t2) < TAIL_MASS {
                break;
            }
        }
        PhotonNumberDistribution::normalized(probabilities)
    }
}

impl DistributionGenerator for SqueezedVacuum {
    fn name(&self) -> &'static str {
        "bsv"
    }

    fn generate(&self, argument: &str) -> Result<PhotonNumberDistribution> {
        Self::distribution(parse_mean(argument)?)
    }
}

/// Reads a distribution file: either one probability per line (for
/// `n = 0, 1, ...`) or `n,p` pairs. Blank lines, `#` comments and a
/// non-numeric header line are skipped.
#[derive(Debug, Clone, Copy, Default)]
pub struct FileDistribution;

impl FileDistribution {
    pub fn parse(text: &str) -> Result<PhotonNumberDistribution> {
        let mut listed: Vec<f64> = Vec::new();
        let mut pairs: BTreeMap<usize, f64> = BTreeMap::new();
        let mut first_data = true;
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || {
                Error::InvalidDistribution(format!("line {}: cannot parse `{raw}`", line_no + 1))
            };
            let parsed = match fields.as_slice() {
                [p] => p.parse::<f64>().map(|p| (None, p)),
                [n, p] => match (n.parse::<usize>(), p.parse::<f64>()) {
                    (Ok(n), Ok(p)) => Ok((Some(n), p)),
                    _ => "x".parse::<f64>().map(|p| (None, p)),
                },
                _ => return Err(bad()),
            };
            let (n, p) = match parsed {
                Ok(v) => v,
                Err(_) if first_data => {
                    first_data = false;
                    continue;
                }
                Err(_) => return Err(bad()),
            };
            first_data = false;
            match n {
                Some(n) => {
                    if pairs.insert(n, p).is_some() {
                        return Err(Error::InvalidDistribution(format!("n = {n} listed twice")));
                    }
                }
                None => listed.push(p),
            }
        }
        if !listed.is_empty() && !pairs.is_empty() {
            return Err(Error::InvalidDistribution(
                "mixes bare probabilities with `n,p` rows".into(),
            ));
        }
        if !pairs.is_empty() {
            let max = *pairs.keys().last().expect("nonempty");
            listed = vec![0.0; max + 1];
            for (n, p) in pairs {
                listed[n] = p;
            }
        }
        PhotonNumberDistribution::new(listed)
    }

    pub fn read(path: &Path) -> Result<PhotonNumberDistribution> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl DistributionGenerator for FileDistribution {
    fn name(&self) -> &'static str {
        "file"
    }

    fn generate(&self, argument: &str) -> Result<PhotonNumberDistribution> {
        Self::read(Path::new(argument))
    }
}

#[derive(Clone)]
pub struct GeneratorRegistry {
    generators: BTreeMap<&'static str, Arc<dyn DistributionGenerator>>,
}

impl GeneratorRegistry {
    pub fn empty() -> Self {
        Self {
            generators: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(Poisson));
        registry.register(Arc::new(Thermal));
        registry.register(Arc::new(SqueezedVacuum));
        registry.register(Arc::new(FileDistribution));
        registry
    }

    pub fn register(&mut self, generator: Arc<dyn DistributionGenerator>) {
        self.generators.insert(generator.name(), generator);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.generators.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn DistributionGenerator>> {
        self.generators
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "distribution generator",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    /// Resolves `name:argument`, e.g. `thermal:3.5` or `file:dist.csv`.
    pub fn resolve(&self, spec: &str) -> Result<PhotonNumberDistribution> {
        let (name, argument) = spec.split_once(':').ok_or_else(|| {
            Error::InvalidParameter(format!("expected `generator:argument`, got `{spec}`"))
        })?;
        self.get(name)?.generate(argument)
    }
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
