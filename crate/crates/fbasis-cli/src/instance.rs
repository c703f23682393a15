//! Single partition-function evaluations from instance documents.

use std::path::PathBuf;

use fbasis_core::dwpf::{evaluate_routes, DwpfInstance, DwpfKind, RouteValues};
use fbasis_core::relation_checks::ResidualReport;
use fbasis_core::weights::{build_perk_schultz, sample_annulus, RapiditySet};
use fbasis_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ModelSource, RunError};
use crate::model::{build_model, Model};
use crate::report::SCHEMA_VERSION;

/// Input document of the `dwpf` command.
///
/// `xi` and `nu` give explicit rapidity values and are accepted for the Perk-Schultz model
/// only, together with an optional `anisotropy`; missing values are drawn from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    /// Kind: `C2`, `B2`, `C1`, `B1`, `mixedC` or `mixedB`.
    pub kind: String,
    /// Number of sites.
    #[serde(rename = "L")]
    pub l: usize,
    /// Number of type-1 operators; must equal the length of `q` when present.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// 1-based positions of state 1 in the reference pattern of mixed kinds.
    #[serde(default)]
    pub q: Vec<usize>,
    /// Generator seed.
    #[serde(default)]
    pub seed: u64,
    /// `del-pezzo` (default) or `perk-schultz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Explicit inhomogeneities `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<[f64; 2]>>,
    /// Explicit auxiliary rapidities `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<[f64; 2]>>,
    /// Explicit Perk-Schultz anisotropy `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anisotropy: Option<[f64; 2]>,
}

/// Output document of the `dwpf` command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DwpfResult {
    /// Report layout version.
    pub schema: u32,
    /// Kind evaluated.
    pub kind: String,
    /// Number of sites.
    #[serde(rename = "L")]
    pub l: usize,
    /// Number of type-1 operators.
    #[serde(rename = "M")]
    pub m: usize,
    /// Pattern positions of state 1.
    pub q: Vec<usize>,
    /// Generator seed.
    pub seed: u64,
    /// Model name.
    pub model: String,
    /// Value from direct contraction, `[re, im]`.
    pub value: [f64; 2],
    /// Value of every route.
    pub routes: RouteValues,
    /// Gap of every alternative route to the direct value.
    pub residuals: Vec<ResidualReport>,
    /// Whether every route agrees within tolerance.
    pub pass: bool,
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn labelled(prefix: &str, values: &[[f64; 2]]) -> Vec<(String, Complex64)> {
    values
        .iter()
        .enumerate()
        .map(|(k, &v)| (format!("{prefix}{}", k + 1), complex(v)))
        .collect()
}

fn instance_model(doc: &InstanceDocument, custom: Option<PathBuf>) -> Result<Model, RunError> {
    let explicit = doc.xi.is_some() || doc.nu.is_some() || doc.anisotropy.is_some();
    let source = match (doc.model.as_deref(), custom) {
        (_, Some(path)) => ModelSource::Custom(path),
        (None | Some("del-pezzo"), None) => ModelSource::DelPezzo,
        (Some("perk-schultz"), None) => ModelSource::PerkSchultz,
        (Some(other), None) => return Err(ConfigError::MalformedInstance(format!("unknown model {other:?}")).into()),
    };
    if !explicit {
        return build_model(&source, doc.seed, doc.l, doc.l);
    }
    if source != ModelSource::PerkSchultz {
        return Err(
            ConfigError::MalformedInstance("explicit rapidities require model perk-schultz".to_string()).into(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(doc.seed);
    let q = sample_annulus(&mut rng);
    let mut fill = |given: &Option<Vec<[f64; 2]>>, name: &str| -> Result<Vec<[f64; 2]>, ConfigError> {
        match given {
            Some(v) if v.len() == doc.l => Ok(v.clone()),
            Some(v) => Err(ConfigError::MalformedInstance(format!(
                "{name} has {} values, L = {}",
                v.len(),
                doc.l
            ))),
            None => Ok((0..doc.l)
                .map(|_| sample_annulus(&mut rng))
                .map(|z| [z.re, z.im])
                .collect()),
        }
    };
    let xi = fill(&doc.xi, "xi")?;
    let nu = fill(&doc.nu, "nu")?;
    let q = doc.anisotropy.map(complex).unwrap_or(q);
    let set = RapiditySet::new(labelled("xi", &xi), labelled("nu", &nu))?;
    Ok(Model {
        name: "perk-schultz".to_string(),
        table: build_perk_schultz(q, &set)?,
        sites: (0..doc.l).collect(),
        aux: (doc.l..2 * doc.l).collect(),
    })
}

/// Evaluates an instance document along every applicable route.
///
/// With `custom` set, the table is read from that file; its first L rapidities are the
/// inhomogeneities and the next L the auxiliary rapidities.
pub fn compute_dwpf(doc: &InstanceDocument, custom: Option<PathBuf>, tol: f64) -> Result<DwpfResult, RunError> {
    let kind: DwpfKind = doc
        .kind
        .parse()
        .map_err(|_| ConfigError::MalformedInstance(format!("unknown kind {:?}", doc.kind)))?;
    if doc.l == 0 {
        return Err(ConfigError::MalformedInstance("L must be at least 1".to_string()).into());
    }
    if let Some(m) = doc.m {
        if m != doc.q.len() {
            return Err(
                ConfigError::MalformedInstance(format!("M = {m} but q lists {} positions", doc.q.len())).into(),
            );
        }
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(ConfigError::InvalidOption {
            option: "--tol",
            reason: format!("{tol} is not a positive finite number"),
        }
        .into());
    }
    let model = instance_model(doc, custom)?;
    if model.sites.len() < doc.l || model.aux.len() < doc.l {
        return Err(ConfigError::MalformedInstance(format!(
            "table has {} rapidities, L = {} needs {}",
            model.table.len(),
            doc.l,
            2 * doc.l
        ))
        .into());
    }
    let inst = DwpfInstance::new(
        kind,
        model.aux[..doc.l].to_vec(),
        model.sites[..doc.l].to_vec(),
        doc.q.clone(),
    )
    .map_err(|e| ConfigError::MalformedInstance(e.to_string()))?;
    let (routes, residuals) = evaluate_routes(&inst, &model.table, tol)?;
    Ok(DwpfResult {
        schema: SCHEMA_VERSION,
        kind: kind.to_string(),
        l: doc.l,
        m: inst.m(),
        q: doc.q.clone(),
        seed: doc.seed,
        model: model.name,
        value: routes.direct,
        pass: residuals.iter().all(|r| r.pass),
        routes,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(kind: &str, l: usize, q: Vec<usize>) -> InstanceDocument {
        InstanceDocument {
            kind: kind.into(),
            l,
            m: None,
            q,
            seed: 7,
            model: None,
            xi: None,
            nu: None,
            anisotropy: None,
        }
    }

    #[test]
    fn single_site_is_the_c_weight() {
        let r = compute_dwpf(&doc("C2", 1, vec![]), None, 1e-8).unwrap();
        let m = build_model(&ModelSource::DelPezzo, 7, 1, 1).unwrap();
        let c32 = m.table.pair(1, 0).unwrap().c(3, 2);
        assert_eq!(r.value, [c32.re, c32.im]);
        assert!(r.pass);
    }

    #[test]
    fn mixed_without_type_one_operators() {
        let r = compute_dwpf(&doc("mixedB", 3, vec![]), None, 1e-8).unwrap();
        assert_eq!(r.m, 0);
        assert!(r.routes.formula.is_some());
        assert!(r.pass);
    }

    #[test]
    fn coinciding_inhomogeneities_name_the_pair() {
        let mut d = doc("C2", 2, vec![]);
        d.model = Some("perk-schultz".into());
        d.xi = Some(vec![[1.1, 0.2], [1.1, 0.2]]);
        match compute_dwpf(&d, None, 1e-8) {
            Err(RunError::Model(e)) => assert!(e.to_string().contains("xi1") || e.to_string().contains("xi2"), "{e}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_documents_are_config_errors() {
        let mut d = doc("mixedC", 2, vec![1]);
        d.m = Some(2);
        assert_eq!(compute_dwpf(&d, None, 1e-8).unwrap_err().exit_code(), 2);
        assert_eq!(
            compute_dwpf(&doc("X9", 2, vec![]), None, 1e-8).unwrap_err().exit_code(),
            2
        );
        assert_eq!(
            compute_dwpf(&doc("C2", 2, vec![1]), None, 1e-8)
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
