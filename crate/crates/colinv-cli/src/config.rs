//! Flat key=value experiment spec files.
//!
//! Lines are `key = value`; `#` starts a comment. Keys:
//!
//! ```text
//! family   = gaussian_scaled | symmetric_gaussian | spd_gaussian | gaussian_rect
//! scale    = 50.0        # gaussian_scaled / symmetric_gaussian
//! shift    = 1.0         # spd_gaussian
//! rows     = 100
//! cols     = 100
//! solver   = sd | cg
//! epsilons = 1e-1,1e-2,1e-3
//! trials   = 20
//! seed     = 0           # optional; defaults to --seed
//! max_iters = 5000000    # optional; defaults to 50 * dimension
//! mode     = inverse | pinv   # optional; inferred from the shape
//! ```

use crate::CliError;
use colinv::experiments::ExperimentSpec;
use colinv::gen::MatrixFamily;
use colinv::{EstimateMode, SolverConfig, SolverMethod};
use std::collections::BTreeMap;
use std::path::Path;

pub fn parse_spec_file(
    path: &Path,
    default_seed: u64,
) -> Result<(ExperimentSpec, EstimateMode), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut kv = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Input(format!("{}:{}: expected key=value, got {line:?}", path.display(), idx + 1))
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }

    let get = |key: &str| -> Result<&str, CliError> {
        kv.get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| CliError::Input(format!("spec file missing key {key:?}")))
    };
    let parse_f64 = |key: &str, v: &str| -> Result<f64, CliError> {
        v.parse()
            .map_err(|_| CliError::Input(format!("key {key:?}: cannot parse {v:?} as a number")))
    };
    let parse_usize = |key: &str, v: &str| -> Result<usize, CliError> {
        v.parse()
            .map_err(|_| CliError::Input(format!("key {key:?}: cannot parse {v:?} as an integer")))
    };

    let rows = parse_usize("rows", get("rows")?)?;
    let cols = parse_usize("cols", get("cols")?)?;

    let family = match get("family")? {
        "gaussian_scaled" => MatrixFamily::GaussianScaled {
            scale: parse_f64("scale", get("scale")?)?,
        },
        "symmetric_gaussian" => MatrixFamily::SymmetricGaussian {
            scale: parse_f64("scale", get("scale")?)?,
        },
        "spd_gaussian" => MatrixFamily::SpdGaussian {
            shift: parse_f64("shift", get("shift")?)?,
        },
        "gaussian_rect" => MatrixFamily::GaussianRect,
        other => {
            return Err(CliError::Input(format!("unknown family {other:?}")));
        }
    };

    let method = match get("solver")? {
        "sd" => SolverMethod::Sd,
        "cg" => SolverMethod::Cg,
        other => return Err(CliError::Input(format!("unknown solver {other:?}"))),
    };

    let mut epsilons = Vec::new();
    for tok in get("epsilons")?.split(',') {
        epsilons.push(parse_f64("epsilons", tok.trim())?);
    }

    let trials = parse_usize("trials", get("trials")?)?;
    let seed = match kv.get("seed") {
        Some(v) => parse_usize("seed", v)? as u64,
        None => default_seed,
    };

    let dim = cols.min(rows);
    let mut solver = SolverConfig::new(method, *epsilons.first().unwrap_or(&1e-6), dim);
    if let Some(v) = kv.get("max_iters") {
        solver.max_iters = parse_usize("max_iters", v)?;
    }

    let mode = match kv.get("mode").map(|s| s.as_str()) {
        Some("inverse") => EstimateMode::Inverse,
        Some("pinv") | Some("pseudoinverse") => EstimateMode::Pseudoinverse,
        Some(other) => return Err(CliError::Input(format!("unknown mode {other:?}"))),
        None => {
            if rows == cols {
                EstimateMode::Inverse
            } else {
                EstimateMode::Pseudoinverse
            }
        }
    };

    let known = [
        "family", "scale", "shift", "rows", "cols", "solver", "epsilons", "trials", "seed",
        "max_iters", "mode",
    ];
    for key in kv.keys() {
        if !known.contains(&key.as_str()) {
            return Err(CliError::Input(format!("unknown spec key {key:?}")));
        }
    }

    Ok((
        ExperimentSpec {
            family,
            rows,
            cols,
            solver,
            epsilons,
            trials,
            seed,
        },
        mode,
    ))
}
