//! Built-in systems: named integral sets with parameters, default starting
//! points, and Hamiltonians, ready to feed the field constructor.
//!
//! Every expression is carried both as its source text (so front ends can
//! display and round-trip it) and as the parsed tree inside an
//! [`IntegralSet`]. Parameters are merged over per-scenario defaults and
//! validated before anything is parsed.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::brackets::IntegralSet;
use crate::expr::{parse, Bindings, Expression, PhaseSpace};
use crate::math;

/// Names accepted by [`materialize`], in display order.
pub const BUILTINS: [&str; 5] = ["example1", "kepler-m", "kepler-w", "vortex3", "uhlenbeck"];

/// A fully resolved builtin system.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub summary: String,
    pub space: PhaseSpace,
    pub set: IntegralSet,
    pub hamiltonian: Expression,
    pub hamiltonian_text: String,
    pub integral_texts: Vec<String>,
    pub initial: Vec<f64>,
    /// Resolved parameter values (defaults plus overrides).
    pub parameters: Bindings,
}

impl Scenario {
    /// Parameter names available to expressions of this scenario.
    pub fn param_names(&self) -> Vec<&str> {
        self.parameters.keys().map(String::as_str).collect()
    }
}

/// Static description of a builtin for listings.
#[derive(Debug, Clone)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub degrees_of_freedom: String,
    /// Parameter name paired with its requirement and default.
    pub parameters: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    UnknownScenario(String),
    UnknownParameter { scenario: &'static str, name: String },
    InvalidParameter { name: String, message: String },
}

impl core::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ScenarioError::UnknownScenario(name) => {
                write!(f, "unknown builtin `{name}`; available: {}", BUILTINS.join(", "))
            }
            ScenarioError::UnknownParameter { scenario, name } => {
                write!(f, "builtin `{scenario}` has no parameter `{name}`")
            }
            ScenarioError::InvalidParameter { name, message } => {
                write!(f, "parameter `{name}`: {message}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ScenarioError {}

const EXAMPLE1_SUMMARY: &str = "Three particles on a line with inverse-square pair repulsion. \
The energy, the dilation moment, and the total momentum are conserved together by the \
corrected flow.";

const KEPLER_M_SUMMARY: &str = "Free motion in three dimensions constrained to conserve the \
full angular momentum vector. The y-block is skew of odd size, so the degenerate \
construction applies everywhere and a kernel multiple may be added.";

const KEPLER_W_SUMMARY: &str = "Free kinetic energy corrected to conserve the three components \
of the Runge-Lenz-type vector W. The unique correction is the attractive inverse-square \
force, recovering the Kepler field.";

const VORTEX3_SUMMARY: &str = "Three planar point vortices in strength-weighted coordinates: \
two linear impulse integrals plus the weighted squared radius, conserved under the \
logarithmic pair interaction.";

const UHLENBECK_SUMMARY: &str = "Quadratic oscillator integrals of Neumann type for n degrees \
of freedom, pairwise in involution. At B = 0 the y-block is rank deficient everywhere and \
the kernel direction is available.";

/// Resolve a builtin by name with parameter overrides.
pub fn materialize(name: &str, overrides: &Bindings) -> Result<Scenario, ScenarioError> {
    match name {
        "example1" => example1(overrides),
        "kepler-m" => kepler_m(overrides),
        "kepler-w" => kepler_w(overrides),
        "vortex3" => vortex3(overrides),
        "uhlenbeck" => uhlenbeck(overrides),
        other => Err(ScenarioError::UnknownScenario(other.to_string())),
    }
}

/// Listing entry for a builtin by name.
pub fn describe(name: &str) -> Result<ScenarioInfo, ScenarioError> {
    let info = match name {
        "example1" => ScenarioInfo {
            name: "example1",
            summary: EXAMPLE1_SUMMARY,
            degrees_of_freedom: "3".to_string(),
            parameters: vec![
                ("m1".to_string(), "mass, positive; default 1".to_string()),
                ("m2".to_string(), "mass, positive; default 2".to_string()),
                ("m3".to_string(), "mass, positive; default 3".to_string()),
                ("a".to_string(), "coupling of the (x1, x2) pair; default 1.3".to_string()),
                ("b".to_string(), "coupling of the (x3, x1) pair; default 0.7".to_string()),
                ("c".to_string(), "coupling of the (x3, x2) pair; default 2.1".to_string()),
            ],
        },
        "kepler-m" => ScenarioInfo {
            name: "kepler-m",
            summary: KEPLER_M_SUMMARY,
            degrees_of_freedom: "3".to_string(),
            parameters: vec![],
        },
        "kepler-w" => ScenarioInfo {
            name: "kepler-w",
            summary: KEPLER_W_SUMMARY,
            degrees_of_freedom: "3".to_string(),
            parameters: vec![(
                "mu".to_string(),
                "gravitational strength, positive; default 1".to_string(),
            )],
        },
        "vortex3" => ScenarioInfo {
            name: "vortex3",
            summary: VORTEX3_SUMMARY,
            degrees_of_freedom: "3".to_string(),
            parameters: vec![
                ("gamma1".to_string(), "vortex strength, positive; default 1".to_string()),
                ("gamma2".to_string(), "vortex strength, positive; default 2".to_string()),
                ("gamma3".to_string(), "vortex strength, positive; default 3".to_string()),
            ],
        },
        "uhlenbeck" => ScenarioInfo {
            name: "uhlenbeck",
            summary: UHLENBECK_SUMMARY,
            degrees_of_freedom: "n (integer, 2 to 16); default 3".to_string(),
            parameters: vec![
                ("n".to_string(), "degrees of freedom, integer in 2..=16; default 3".to_string()),
                ("A".to_string(), "diagonal x coefficient; default 1".to_string()),
                ("B".to_string(), "diagonal y coefficient; default 0".to_string()),
                (
                    "a1 .. an".to_string(),
                    "oscillator constants, strictly increasing; default 1, 2, .., n".to_string(),
                ),
            ],
        },
        other => return Err(ScenarioError::UnknownScenario(other.to_string())),
    };
    Ok(info)
}

// ---------------------------------------------------------------------------
// parameter plumbing
// ---------------------------------------------------------------------------

fn merge_params(
    scenario: &'static str,
    defaults: &[(String, f64)],
    overrides: &Bindings,
) -> Result<Bindings, ScenarioError> {
    let mut merged = Bindings::new();
    for (k, v) in defaults {
        merged.insert(k.clone(), *v);
    }
    for (k, v) in overrides {
        if !merged.contains_key(k) {
            return Err(ScenarioError::UnknownParameter { scenario, name: k.clone() });
        }
        if !v.is_finite() {
            return Err(ScenarioError::InvalidParameter {
                name: k.clone(),
                message: format!("must be finite, got {v}"),
            });
        }
        merged.insert(k.clone(), *v);
    }
    Ok(merged)
}

fn require_positive(merged: &Bindings, names: &[&str]) -> Result<(), ScenarioError> {
    for name in names {
        let v = merged[*name];
        if !(v > 0.0) {
            return Err(ScenarioError::InvalidParameter {
                name: (*name).to_string(),
                message: format!("must be positive, got {v}"),
            });
        }
    }
    Ok(())
}

fn owned_defaults(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(k, v)| ((*k).to_string(), *v)).collect()
}

/// Parse a builtin's own expression text. Failure is a construction bug,
/// not an input error, so it panics.
fn parse_builtin(text: &str, space: PhaseSpace, params: &Bindings) -> Expression {
    let names: Vec<&str> = params.keys().map(String::as_str).collect();
    match parse(text, space, &names) {
        Ok(e) => e,
        Err(e) => panic!("builtin expression failed to parse: {e}: {text}"),
    }
}

fn assemble(
    name: &str,
    summary: &str,
    space: PhaseSpace,
    texts: Vec<String>,
    h_text: String,
    initial: Vec<f64>,
    params: Bindings,
) -> Scenario {
    let fs: Vec<Expression> =
        texts.iter().map(|t| parse_builtin(t, space, &params)).collect();
    let hamiltonian = parse_builtin(&h_text, space, &params);
    let set = IntegralSet::new(space, fs, params.clone())
        .expect("builtin integral count matches its phase space");
    Scenario {
        name: name.to_string(),
        summary: summary.to_string(),
        space,
        set,
        hamiltonian,
        hamiltonian_text: h_text,
        integral_texts: texts,
        initial,
        parameters: params,
    }
}

// ---------------------------------------------------------------------------
// the five builtins
// ---------------------------------------------------------------------------

fn example1(overrides: &Bindings) -> Result<Scenario, ScenarioError> {
    let defaults = owned_defaults(&[
        ("m1", 1.0),
        ("m2", 2.0),
        ("m3", 3.0),
        ("a", 1.3),
        ("b", 0.7),
        ("c", 2.1),
    ]);
    let params = merge_params("example1", &defaults, overrides)?;
    require_positive(&params, &["m1", "m2", "m3"])?;
    let space = PhaseSpace::new(3).unwrap();
    let f1 = "y1^2/(2*m1) + y2^2/(2*m2) + y3^2/(2*m3) + a/(x1 - x2)^2 + b/(x3 - x1)^2 \
              + c/(x3 - x2)^2"
        .to_string();
    let f2 = "x1*y1 + x2*y2 + x3*y3".to_string();
    let f3 = "y1 + y2 + y3".to_string();
    let h = f1.clone();
    // particles kept well separated; the correction drives the velocities
    // toward each other, so the start matters for how long the run stays
    // clear of the collision set
    let initial = vec![-2.8, -0.2, 2.3, 0.15, -0.55, 0.75];
    Ok(assemble("example1", EXAMPLE1_SUMMARY, space, vec![f1, f2, f3], h, initial, params))
}

fn kepler_m(overrides: &Bindings) -> Result<Scenario, ScenarioError> {
    let params = merge_params("kepler-m", &[], overrides)?;
    let space = PhaseSpace::new(3).unwrap();
    let texts = vec![
        "x2*y3 - x3*y2".to_string(),
        "x3*y1 - x1*y3".to_string(),
        "x1*y2 - x2*y1".to_string(),
    ];
    let h = "(y1^2 + y2^2 + y3^2)/2".to_string();
    let initial = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    Ok(assemble("kepler-m", KEPLER_M_SUMMARY, space, texts, h, initial, params))
}

fn kepler_w(overrides: &Bindings) -> Result<Scenario, ScenarioError> {
    let defaults = owned_defaults(&[("mu", 1.0)]);
    let params = merge_params("kepler-w", &defaults, overrides)?;
    require_positive(&params, &["mu"])?;
    let space = PhaseSpace::new(3).unwrap();
    let w_component = |j: usize| -> String {
        format!(
            "(y1^2 + y2^2 + y3^2)*x{j} - (x1*y1 + x2*y2 + x3*y3)*y{j} \
             - mu*x{j}/sqrt(x1^2 + x2^2 + x3^2)"
        )
    };
    let texts = vec![w_component(1), w_component(2), w_component(3)];
    let h = "(y1^2 + y2^2 + y3^2)/2".to_string();
    let initial = vec![1.0, 0.2, -0.3, 0.4, 1.0, 0.1];
    Ok(assemble("kepler-w", KEPLER_W_SUMMARY, space, texts, h, initial, params))
}

fn vortex3(overrides: &Bindings) -> Result<Scenario, ScenarioError> {
    let defaults = owned_defaults(&[("gamma1", 1.0), ("gamma2", 2.0), ("gamma3", 3.0)]);
    let params = merge_params("vortex3", &defaults, overrides)?;
    require_positive(&params, &["gamma1", "gamma2", "gamma3"])?;
    let space = PhaseSpace::new(3).unwrap();
    let texts = vec![
        "sqrt(gamma1)*x1 + sqrt(gamma2)*x2 + sqrt(gamma3)*x3".to_string(),
        "sqrt(gamma1)*y1 + sqrt(gamma2)*y2 + sqrt(gamma3)*y3".to_string(),
        "(x1^2 + y1^2 + x2^2 + y2^2 + x3^2 + y3^2)/2".to_string(),
    ];
    // logarithm of the squared true distance between vortices m and k,
    // with the weighted coordinates mapped back by 1/sqrt(gamma)
    let pair = |m: usize, k: usize| -> String {
        format!(
            "gamma{m}*gamma{k}*log((x{k}/sqrt(gamma{k}) - x{m}/sqrt(gamma{m}))^2 \
             + (y{k}/sqrt(gamma{k}) - y{m}/sqrt(gamma{m}))^2)"
        )
    };
    let h = format!("{} + {} + {}", pair(1, 2), pair(1, 3), pair(2, 3));
    let initial = vec![0.6, -0.5, 0.1, 0.2, 0.7, -0.4];
    Ok(assemble("vortex3", VORTEX3_SUMMARY, space, texts, h, initial, params))
}

fn uhlenbeck(overrides: &Bindings) -> Result<Scenario, ScenarioError> {
    let n = match overrides.get("n") {
        None => 3usize,
        Some(v) if math::is_integer(*v) && (2.0..=16.0).contains(v) => *v as usize,
        Some(v) => {
            return Err(ScenarioError::InvalidParameter {
                name: "n".to_string(),
                message: format!("must be an integer in 2..=16, got {v}"),
            })
        }
    };
    let mut defaults = vec![
        ("n".to_string(), n as f64),
        ("A".to_string(), 1.0),
        ("B".to_string(), 0.0),
    ];
    for k in 1..=n {
        defaults.push((format!("a{k}"), k as f64));
    }
    let mut params = merge_params("uhlenbeck", &defaults, overrides)?;
    // n shapes the system; it is not a value expressions may reference
    params.remove("n");
    let a: Vec<f64> = (1..=n).map(|k| params[&format!("a{k}")]).collect();
    for k in 1..n {
        if !(a[k] > a[k - 1]) {
            return Err(ScenarioError::InvalidParameter {
                name: format!("a{}", k + 1),
                message: format!(
                    "oscillator constants must increase strictly; a{} = {} is not above a{} = {}",
                    k + 1,
                    a[k],
                    k,
                    a[k - 1]
                ),
            });
        }
    }

    let space = PhaseSpace::new(n).unwrap();
    let f_text = |nu: usize| -> String {
        let mut t = format!("(A*x{nu} + B*y{nu})^2");
        for j in 1..=n {
            if j != nu {
                t.push_str(&format!(" + (x{nu}*y{j} - x{j}*y{nu})^2/(a{nu} - a{j})"));
            }
        }
        t
    };
    let texts: Vec<String> = (1..=n).map(f_text).collect();
    let mut h = String::from("(");
    for nu in 1..=n {
        if nu > 1 {
            h.push_str(" + ");
        }
        h.push_str(&format!("a{nu}*({})", texts[nu - 1]));
    }
    h.push_str(")/2");

    let initial = if n == 3 {
        vec![0.4, -0.7, 0.3, 0.6, 0.2, -0.5]
    } else {
        // deterministic generic-position start for any n
        let mut init = vec![0.0; 2 * n];
        for k in 1..=n {
            init[k - 1] = math::sin(1.3 * k as f64 + 0.7);
            init[n + k - 1] = 1.1 * math::cos(0.9 * k as f64 - 0.2);
        }
        init
    };
    Ok(assemble("uhlenbeck", UHLENBECK_SUMMARY, space, texts, h, initial, params))
}
