//! Scenario sources: JSON files and builtin references, resolved into a
//! fully validated job ready to run.

use std::path::Path;

use serde::Deserialize;

use firstint_core::brackets::IntegralSet;
use firstint_core::constructor::{Backend, FieldModel, Thresholds};
use firstint_core::expr::{parse, Bindings, Expression, PhaseSpace};
use firstint_core::flow::{IntegratorConfig, Method};
use firstint_core::scenarios;

use crate::Failure;

/// On-disk scenario description. Exactly one of `builtin` and `integrals`
/// selects the system; the remaining fields refine or override it.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    builtin_params: Option<Bindings>,
    #[serde(default)]
    integrals: Option<Vec<String>>,
    #[serde(default)]
    params: Option<Bindings>,
    #[serde(default)]
    hamiltonian: Option<String>,
    #[serde(default)]
    lambda: Option<String>,
    #[serde(default)]
    initial: Option<Vec<f64>>,
    #[serde(default)]
    integrator: Option<IntegratorFile>,
    #[serde(default)]
    backend: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct IntegratorFile {
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    rtol: Option<f64>,
    #[serde(default)]
    atol: Option<f64>,
    #[serde(default)]
    t_end: Option<f64>,
}

/// A resolved system: integral set, Hamiltonian, kernel multiplier, start
/// point, and integration policy.
pub struct Job {
    pub label: String,
    pub space: PhaseSpace,
    pub set: IntegralSet,
    pub hamiltonian: Expression,
    pub lambda: Expression,
    pub initial: Vec<f64>,
    pub backend: Backend,
    pub config: IntegratorConfig,
}

impl Job {
    pub fn model(&self) -> Result<FieldModel, Failure> {
        FieldModel::new(
            self.set.clone(),
            self.hamiltonian.clone(),
            self.lambda.clone(),
            self.backend,
            Thresholds::default(),
        )
        .map_err(|e| Failure::input(format!("cannot build the field model: {e}")))
    }
}

pub fn from_builtin(name: &str, raw_params: &[String]) -> Result<Job, Failure> {
    let mut overrides = Bindings::new();
    for raw in raw_params {
        let (key, value) = split_param(raw)?;
        overrides.insert(key, value);
    }
    let scn = scenarios::materialize(name, &overrides)
        .map_err(|e| Failure::input(e.to_string()))?;
    let lambda = parse("0", scn.space, &[]).expect("constant parses");
    Ok(Job {
        label: format!("builtin {name}"),
        space: scn.space,
        initial: scn.initial.clone(),
        hamiltonian: scn.hamiltonian.clone(),
        lambda,
        set: scn.set,
        backend: Backend::Both,
        config: IntegratorConfig::adaptive(10.0),
    })
}

pub fn from_file(path: &Path) -> Result<Job, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    resolve(file, &path.display().to_string())
}

fn resolve(file: ScenarioFile, label: &str) -> Result<Job, Failure> {
    let backend = backend_from(file.backend.as_deref())?;
    let config = integrator_from(file.integrator.as_ref())?;
    match (file.builtin.as_deref(), file.integrals.is_some()) {
        (Some(_), true) => {
            Err(Failure::input("specify either `builtin` or `integrals`, not both"))
        }
        (None, false) => Err(Failure::input("one of `builtin` or `integrals` is required")),
        (Some(name), false) => {
            if file.params.is_some() {
                return Err(Failure::input(
                    "`params` applies to a custom `integrals` list; \
                     use `builtin_params` with a builtin",
                ));
            }
            let overrides = file.builtin_params.unwrap_or_default();
            let scn = scenarios::materialize(name, &overrides)
                .map_err(|e| Failure::input(e.to_string()))?;
            let n = scn.space.n();
            if let Some(want) = file.n {
                if want != n {
                    return Err(Failure::input(format!(
                        "n is {want} but builtin `{name}` resolves to n = {n}"
                    )));
                }
            }
            let names = scn.param_names();
            let hamiltonian = match &file.hamiltonian {
                Some(text) => parse(text, scn.space, &names)
                    .map_err(|e| Failure::input(format!("hamiltonian: {e}")))?,
                None => scn.hamiltonian.clone(),
            };
            let lambda = parse(file.lambda.as_deref().unwrap_or("0"), scn.space, &names)
                .map_err(|e| Failure::input(format!("lambda: {e}")))?;
            let initial = match file.initial {
                Some(p) => checked_point(p, scn.space)?,
                None => scn.initial.clone(),
            };
            Ok(Job {
                label: format!("{label} (builtin {name})"),
                space: scn.space,
                set: scn.set,
                hamiltonian,
                lambda,
                initial,
                backend,
                config,
            })
        }
        (None, true) => {
            if file.builtin_params.is_some() {
                return Err(Failure::input(
                    "`builtin_params` applies to a builtin; use `params` with `integrals`",
                ));
            }
            let n = file
                .n
                .ok_or_else(|| Failure::input("`n` is required with a custom `integrals` list"))?;
            let space = PhaseSpace::new(n)
                .ok_or_else(|| Failure::input("`n` must be at least 1"))?;
            let params = file.params.unwrap_or_default();
            for key in params.keys() {
                if space.var_index(key).is_some() {
                    return Err(Failure::input(format!(
                        "parameter `{key}` collides with a phase-space variable"
                    )));
                }
            }
            let names: Vec<&str> = params.keys().map(String::as_str).collect();
            let texts = file.integrals.expect("checked above");
            let mut fs = Vec::with_capacity(texts.len());
            for (i, text) in texts.iter().enumerate() {
                let f = parse(text, space, &names)
                    .map_err(|e| Failure::input(format!("integral {}: {e}", i + 1)))?;
                fs.push(f);
            }
            let set = IntegralSet::new(space, fs, params.clone())
                .map_err(|e| Failure::input(e.to_string()))?;
            let h_text = file
                .hamiltonian
                .ok_or_else(|| Failure::input("`hamiltonian` is required with `integrals`"))?;
            let hamiltonian = parse(&h_text, space, &names)
                .map_err(|e| Failure::input(format!("hamiltonian: {e}")))?;
            let lambda = parse(file.lambda.as_deref().unwrap_or("0"), space, &names)
                .map_err(|e| Failure::input(format!("lambda: {e}")))?;
            let initial = file
                .initial
                .ok_or_else(|| Failure::input("`initial` is required with `integrals`"))?;
            let initial = checked_point(initial, space)?;
            Ok(Job {
                label: label.to_string(),
                space,
                set,
                hamiltonian,
                lambda,
                initial,
                backend,
                config,
            })
        }
    }
}

fn checked_point(p: Vec<f64>, space: PhaseSpace) -> Result<Vec<f64>, Failure> {
    if p.len() != space.dim() {
        return Err(Failure::input(format!(
            "`initial` has {} coordinates but the phase space needs {}",
            p.len(),
            space.dim()
        )));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite()) {
        return Err(Failure::input(format!("`initial` contains a non-finite value: {bad}")));
    }
    Ok(p)
}

fn backend_from(name: Option<&str>) -> Result<Backend, Failure> {
    match name {
        None | Some("both") => Ok(Backend::Both),
        Some("cramer") => Ok(Backend::Cramer),
        Some("solve") => Ok(Backend::Solve),
        Some(other) => Err(Failure::input(format!(
            "unknown backend `{other}`; use cramer, solve, or both"
        ))),
    }
}

fn integrator_from(file: Option<&IntegratorFile>) -> Result<IntegratorConfig, Failure> {
    let defaults = IntegratorFile::default();
    let f = file.unwrap_or(&defaults);
    let method = match f.method.as_deref() {
        None | Some("adaptive45") => Method::Adaptive45,
        Some("rk4-fixed") => Method::Rk4Fixed,
        Some(other) => {
            return Err(Failure::input(format!(
                "unknown method `{other}`; use adaptive45 or rk4-fixed"
            )))
        }
    };
    let mut cfg = IntegratorConfig::adaptive(f.t_end.unwrap_or(10.0));
    cfg.method = method;
    cfg.dt = f.dt;
    if let Some(rtol) = f.rtol {
        cfg.rtol = rtol;
    }
    if let Some(atol) = f.atol {
        cfg.atol = atol;
    }
    Ok(cfg)
}

fn split_param(raw: &str) -> Result<(String, f64), Failure> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Failure::input(format!("--param expects name=value, got `{raw}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Failure::input(format!("--param {key}: `{value}` is not a number")))?;
    Ok((key.trim().to_string(), value))
}
