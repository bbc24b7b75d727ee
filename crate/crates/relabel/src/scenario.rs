//! Scenario files: plain-text `key = value` declarations, `#` comments.
//!
//! ```text
//! # reference sweep
//! k = 10
//! n_samples = 5000
//! class_prior = uniform            # or explicit:0.1,0.2,...
//! classifiers = 0.55, 0.62, 0.70   # diag accuracy, or file:<cm.csv>[@acc]
//! ordering = improving             # improving | adversarial | random:<seed>
//! budget_fraction = 1.0
//! select_policy = entropy          # comma list sweeps selection policies
//! update_policies = replace, majority, mb, mbme, cr:2, cr:10, oracle
//! estimator = known                # known | diagonal | laplace
//! source_split_n = 200
//! seed = 42
//! ```
//!
//! `k`, `n_samples`, `classifiers`, and `seed` are required; the rest
//! default as in the example above (estimator `diagonal`, one `mb`
//! policy, `source_split_n` 100). Classifier matrices given as `file:`
//! paths are resolved relative to the scenario file.

use std::collections::BTreeMap;
use std::path::Path;

use relabel_core::sim::{ClassifierSpec, Estimator, ModelOrdering, ScenarioSpec};
use relabel_core::strategy::{SelectionPolicy, UpdateRule};
use relabel_core::types::Prior;

use crate::error::{CliError, CliResult};
use crate::formats;

/// A parsed scenario: the core spec plus the full selection-policy sweep
/// (the spec itself holds the first policy).
#[derive(Debug, Clone)]
pub struct ParsedScenario {
    pub spec: ScenarioSpec,
    pub select_policies: Vec<SelectionPolicy>,
}

pub fn load_scenario(path: &Path) -> CliResult<ParsedScenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_scenario(&text, base_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn parse_scenario(text: &str, base_dir: &Path) -> CliResult<ParsedScenario> {
    let mut keys: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::data(format!("line {}: expected `key = value`", i + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if keys.insert(key, (i + 1, value)).is_some() {
            return Err(CliError::data(format!("line {}: duplicate key {key}", i + 1)));
        }
    }

    const KNOWN: &[&str] = &[
        "k",
        "n_samples",
        "class_prior",
        "classifiers",
        "ordering",
        "budget_fraction",
        "select_policy",
        "update_policies",
        "estimator",
        "source_split_n",
        "seed",
    ];
    for key in keys.keys() {
        if !KNOWN.contains(key) {
            return Err(CliError::data(format!("unknown key {key:?}")));
        }
    }

    let get = |key: &str| keys.get(key).map(|(_, v)| *v);
    fn required<'a>(key: &str, value: Option<&'a str>) -> CliResult<&'a str> {
        value.ok_or_else(|| CliError::data(format!("missing required key {key}")))
    }

    let k: usize = parse_num("k", required("k", get("k"))?)?;
    let n_samples: usize = parse_num("n_samples", required("n_samples", get("n_samples"))?)?;
    let seed: u64 = parse_num("seed", required("seed", get("seed"))?)?;
    let classifiers =
        parse_classifiers(required("classifiers", get("classifiers"))?, base_dir)?;

    let class_prior = match get("class_prior") {
        None | Some("uniform") => Prior::Uniform,
        Some(v) => {
            let list = v.strip_prefix("explicit:").ok_or_else(|| {
                CliError::data(format!("class_prior must be `uniform` or `explicit:<p,..>`, got {v:?}"))
            })?;
            Prior::Explicit(parse_float_list("class_prior", list)?)
        }
    };
    let ordering = match get("ordering") {
        None => ModelOrdering::Improving,
        Some(v) => ModelOrdering::parse(v).map_err(|e| CliError::data(e.to_string()))?,
    };
    let budget_fraction: f64 = match get("budget_fraction") {
        None => 1.0,
        Some(v) => parse_num("budget_fraction", v)?,
    };
    let select_policies: Vec<SelectionPolicy> = match get("select_policy") {
        None => vec![SelectionPolicy::Entropy],
        Some(v) => v
            .split(',')
            .map(|s| SelectionPolicy::parse(s.trim()).map_err(|e| CliError::data(e.to_string())))
            .collect::<CliResult<_>>()?,
    };
    {
        let mut labels: Vec<String> = select_policies.iter().map(|p| p.label()).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != select_policies.len() {
            return Err(CliError::data("duplicate select_policy entry"));
        }
    }
    let update_policies: Vec<UpdateRule> = match get("update_policies") {
        None => vec![UpdateRule::Mb],
        Some(v) => v
            .split(',')
            .map(|s| UpdateRule::parse(s.trim()).map_err(|e| CliError::data(e.to_string())))
            .collect::<CliResult<_>>()?,
    };
    let estimator = match get("estimator") {
        None => Estimator::Diagonal,
        Some(v) => Estimator::parse(v).map_err(|e| CliError::data(e.to_string()))?,
    };
    let source_split_n: usize = match get("source_split_n") {
        None => 100,
        Some(v) => parse_num("source_split_n", v)?,
    };

    let spec = ScenarioSpec {
        k,
        n_samples,
        class_prior,
        classifiers,
        ordering,
        budget_fraction,
        select_policy: select_policies[0].clone(),
        update_policies,
        estimator,
        source_split_n,
        seed,
    };
    spec.validate().map_err(|e| CliError::data(e.to_string()))?;
    Ok(ParsedScenario {
        spec,
        select_policies,
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> CliResult<T> {
    raw.parse()
        .map_err(|_| CliError::data(format!("bad value for {key}: {raw:?}")))
}

fn parse_float_list(key: &str, raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|s| parse_num(key, s.trim()))
        .collect()
}

fn parse_classifiers(raw: &str, base_dir: &Path) -> CliResult<Vec<ClassifierSpec>> {
    let mut out = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        if let Some(rest) = item.strip_prefix("file:") {
            let (file, reported) = match rest.split_once('@') {
                Some((f, acc)) => (f, Some(parse_num::<f64>("classifier accuracy", acc)?)),
                None => (rest, None),
            };
            let cm = formats::load_cm(&base_dir.join(file), None)?;
            let mut spec = ClassifierSpec::full(cm);
            spec.reported_accuracy = reported;
            out.push(spec);
        } else {
            out.push(ClassifierSpec::diag(parse_num("classifier accuracy", item)?));
        }
    }
    Ok(out)
}
