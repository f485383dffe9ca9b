//! `key=value` kernel descriptions such as `divergence=burg penalty=nuclear mu=0.2`.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::kernel::{Divergence, Penalty, ScalarKernel};
use crate::error::{Error, Result};

const KEYS: &[&str] = &["divergence", "penalty", "mu", "p", "alpha", "beta", "eps", "sigma2"];

fn parse_divergence(name: &str, sigma2: Option<f64>) -> Result<Divergence> {
    let d = match name {
        "halfsquare" | "frobenius" | "fro" => Divergence::HalfSquare,
        "burg" | "logdet" => Divergence::Burg,
        "shannon" | "vonneumann" | "entropy" => Divergence::Shannon,
        "noisyburg" | "noisy" => Divergence::NoisyBurg {
            sigma2: sigma2.ok_or_else(|| Error::config("sigma2", "required by noisyburg"))?,
        },
        other => return Err(Error::config("divergence", format!("unknown divergence `{other}`"))),
    };
    Ok(d)
}

/// Parses a whitespace-separated kernel description.
///
/// Unset `divergence` means `halfsquare`, unset `penalty` means `none`.
/// Every error names the key it is about.
pub fn parse_kernel(spec: &str) -> Result<ScalarKernel> {
    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in spec.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::config(tok, "expected key=value"))?;
        if !KEYS.contains(&k) {
            return Err(Error::config(k, "unknown key"));
        }
        if kv.insert(k, v).is_some() {
            return Err(Error::config(k, "given twice"));
        }
    }
    let mut used = vec!["divergence", "penalty"];
    let mut num = |key: &'static str| -> Result<Option<f64>> {
        used.push(key);
        kv.get(key)
            .map(|v| {
                f64::from_str(v).map_err(|_| Error::config(key, format!("`{v}` is not a number")))
            })
            .transpose()
    };
    let need = |key: &'static str, v: Option<f64>| -> Result<f64> {
        v.ok_or_else(|| Error::config(key, "required by this penalty"))
    };

    let div_name = kv.get("divergence").copied().unwrap_or("halfsquare");
    let sigma2 = if matches!(div_name, "noisyburg" | "noisy") {
        num("sigma2")?
    } else {
        None
    };
    let divergence = parse_divergence(div_name, sigma2)?;

    let pen_name = kv.get("penalty").copied().unwrap_or("none");
    let penalty = match pen_name {
        "none" => Penalty::None,
        "nuclear" | "trace" => Penalty::Nuclear { mu: need("mu", num("mu")?)? },
        "fronorm" => Penalty::FroNorm { mu: need("mu", num("mu")?)? },
        "frosquared" | "fro2" => Penalty::FroSquared { mu: need("mu", num("mu")?)? },
        "schatten" => Penalty::SchattenP {
            mu: need("mu", num("mu")?)?,
            p: need("p", num("p")?)?,
        },
        "invschatten" | "inverse-schatten" => Penalty::InvSchattenP {
            mu: need("mu", num("mu")?)?,
            p: need("p", num("p")?)?,
        },
        "froball" => Penalty::FroBall { alpha: need("alpha", num("alpha")?)? },
        "eigbox" | "box" => Penalty::EigBox {
            alpha: num("alpha")?.unwrap_or(f64::NEG_INFINITY),
            beta: num("beta")?.unwrap_or(f64::INFINITY),
        },
        "rank" => Penalty::Rank { mu: need("mu", num("mu")?)? },
        "cauchy" => Penalty::Cauchy {
            mu: need("mu", num("mu")?)?,
            eps: need("eps", num("eps")?)?,
        },
        "spectral" | "spectralnorm" => Penalty::SpectralNorm { mu: need("mu", num("mu")?)? },
        other => return Err(Error::config("penalty", format!("unknown penalty `{other}`"))),
    };
    if let Some(extra) = kv.keys().find(|k| !used.contains(k)) {
        return Err(Error::config(*extra, format!("not used by penalty `{pen_name}`")));
    }
    ScalarKernel::new(divergence, penalty)
}

impl FromStr for ScalarKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_kernel(s)
    }
}
