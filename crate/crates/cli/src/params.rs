//! `--params k=v,...` and jump descriptors to a [`ProcessSpec`].

use std::collections::BTreeMap;

use clap::ValueEnum;
use matryoshka::processes::*;

use crate::output::ParamValue;
use crate::UsageError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Process {
    Hawkes,
    Shotnoise,
    Ito,
    Growthcollapse,
    Ephemeral,
    Generic,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::Hawkes => "hawkes",
            Process::Shotnoise => "shotnoise",
            Process::Ito => "ito",
            Process::Growthcollapse => "growthcollapse",
            Process::Ephemeral => "ephemeral",
            Process::Generic => "generic",
        }
    }

    /// Accepted `--params` keys; the first group is required.
    fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Process::Hawkes => (&["lambda-star", "alpha", "beta"], &["x0"]),
            Process::Shotnoise => (&["lambda", "beta"], &["x0"]),
            Process::Ito => (&["mu", "theta", "sigma", "gamma"], &["x0"]),
            Process::Growthcollapse => (&["lambda", "mu"], &["x0"]),
            Process::Ephemeral => (&["nu-star", "alpha", "mu"], &["x0"]),
            Process::Generic => (
                &[],
                &[
                    "a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9", "x0",
                ],
            ),
        }
    }
}

/// Raw `--jumps-*` descriptors.
#[derive(Clone, Debug, Default)]
pub struct JumpArgs {
    pub up: Option<String>,
    pub down: Option<String>,
    pub collapse: Option<String>,
}

pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, f64>, UsageError> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            UsageError::new("--params", format!("expected key=value, got '{item}'"))
        })?;
        let key = key.trim().to_string();
        let value: f64 = value.trim().parse().map_err(|_| {
            UsageError::new(
                "--params",
                format!("'{key}' is not a number: '{}'", value.trim()),
            )
        })?;
        if !value.is_finite() {
            return Err(UsageError::new(
                "--params",
                format!("'{key}' must be finite"),
            ));
        }
        if out.insert(key.clone(), value).is_some() {
            return Err(UsageError::new("--params", format!("'{key}' given twice")));
        }
    }
    Ok(out)
}

fn jump_law(flag: &str, text: &Option<String>) -> Result<Option<JumpMoments>, UsageError> {
    text.as_deref()
        .map(|t| {
            t.parse::<JumpMoments>()
                .map_err(|e| UsageError::new(flag, e.to_string()))
        })
        .transpose()
}

fn reject_jumps(flag: &str, text: &Option<String>, process: Process) -> Result<(), UsageError> {
    match text {
        Some(_) => Err(UsageError::new(
            flag,
            format!("not used by {}", process.name()),
        )),
        None => Ok(()),
    }
}

/// Builds the spec and the metadata record of everything that went into it.
pub fn build_spec(
    process: Process,
    params: &str,
    jumps: &JumpArgs,
) -> Result<(ProcessSpec, BTreeMap<String, ParamValue>), UsageError> {
    let values = parse_pairs(params)?;
    let (required, optional) = process.keys();
    for key in values.keys() {
        if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
            let accepted = required
                .iter()
                .chain(optional)
                .copied()
                .collect::<Vec<_>>()
                .join(", ");
            return Err(UsageError::new(
                "--params",
                format!(
                    "unknown parameter '{key}' for {} (accepted: {accepted})",
                    process.name()
                ),
            ));
        }
    }
    if let Some(missing) = required.iter().find(|k| !values.contains_key(**k)) {
        return Err(UsageError::new(
            "--params",
            format!("missing parameter '{missing}' for {}", process.name()),
        ));
    }
    let get = |k: &str| values[k];
    let x0 = |default: f64| values.get("x0").copied().unwrap_or(default);

    let up = jump_law("--jumps-A", &jumps.up)?;
    let down = jump_law("--jumps-B", &jumps.down)?;
    let collapse = jump_law("--jumps-C", &jumps.collapse)?;

    let spec = match process {
        Process::Hawkes => {
            reject_jumps("--jumps-A", &jumps.up, process)?;
            reject_jumps("--jumps-B", &jumps.down, process)?;
            reject_jumps("--jumps-C", &jumps.collapse, process)?;
            ProcessSpec::Hawkes(HawkesSpec {
                baseline: get("lambda-star"),
                jump: get("alpha"),
                decay: get("beta"),
                initial: x0(get("lambda-star")),
            })
        }
        Process::Shotnoise => {
            reject_jumps("--jumps-B", &jumps.down, process)?;
            reject_jumps("--jumps-C", &jumps.collapse, process)?;
            let jumps = up.ok_or_else(|| {
                UsageError::new(
                    "--jumps-A",
                    "shotnoise needs a jump-size law, e.g. lognormal:0,1",
                )
            })?;
            ProcessSpec::ShotNoise(ShotNoiseSpec {
                rate: get("lambda"),
                decay: get("beta"),
                jumps,
                initial: x0(0.0),
            })
        }
        Process::Ito => {
            reject_jumps("--jumps-A", &jumps.up, process)?;
            reject_jumps("--jumps-B", &jumps.down, process)?;
            reject_jumps("--jumps-C", &jumps.collapse, process)?;
            ProcessSpec::Ito(ItoSpec {
                mu: get("mu"),
                theta: get("theta"),
                sigma: get("sigma"),
                gamma: get("gamma"),
                initial: x0(0.0),
            })
        }
        Process::Growthcollapse => {
            reject_jumps("--jumps-A", &jumps.up, process)?;
            reject_jumps("--jumps-B", &jumps.down, process)?;
            ProcessSpec::GrowthCollapse(GrowthCollapseSpec {
                growth: get("lambda"),
                collapse_rate: get("mu"),
                collapse: collapse.unwrap_or(JumpMoments::Uniform),
                initial: x0(0.0),
            })
        }
        Process::Ephemeral => {
            reject_jumps("--jumps-A", &jumps.up, process)?;
            reject_jumps("--jumps-B", &jumps.down, process)?;
            reject_jumps("--jumps-C", &jumps.collapse, process)?;
            let q0 = x0(0.0);
            if q0 < 0.0 || q0.fract() != 0.0 || q0 > u32::MAX as f64 {
                return Err(UsageError::new(
                    "--params",
                    format!("x0 must be a nonnegative integer count for ephemeral, got {q0}"),
                ));
            }
            ProcessSpec::Ephemeral(EphemeralSpec {
                baseline: get("nu-star"),
                jump: get("alpha"),
                expiry: get("mu"),
                initial: q0 as u64,
            })
        }
        Process::Generic => {
            let mut g = GenericGeneratorSpec::default();
            for (i, a) in g.coefficients.iter_mut().enumerate() {
                *a = values.get(&format!("a{i}")).copied().unwrap_or(0.0);
            }
            if let Some(law) = up {
                g.up = law;
            }
            if let Some(law) = down {
                g.down = law;
            }
            if let Some(law) = collapse {
                g.collapse = law;
            }
            g.initial = x0(0.0);
            ProcessSpec::Generic(g)
        }
    };

    let mut record: BTreeMap<String, ParamValue> = values
        .into_iter()
        .map(|(k, v)| (k, ParamValue::Number(v)))
        .collect();
    for (flag, text) in [
        ("jumps-A", &jumps.up),
        ("jumps-B", &jumps.down),
        ("jumps-C", &jumps.collapse),
    ] {
        if let Some(t) = text {
            record.insert(flag.to_string(), ParamValue::Text(t.clone()));
        }
    }
    Ok((spec, record))
}
