//! Construction of the weight table a run operates on.

use std::path::Path;

use fbasis_core::weights::{
    build_del_pezzo, build_perk_schultz, sample_annulus, DelPezzoParams, ModelRank, RapiditySet, WeightDocument,
    WeightTable,
};
use fbasis_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, ModelSource, RunError};

/// A weight table together with the split of its rapidities into sites and auxiliaries.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    /// Model name recorded in reports.
    pub name: String,
    /// Weight table.
    pub table: WeightTable,
    /// Registration indices of the site inhomogeneities, in lattice order.
    pub sites: Vec<usize>,
    /// Registration indices of the auxiliary spectral parameters.
    pub aux: Vec<usize>,
}

impl Model {
    /// Rank N of the underlying model.
    pub fn n(&self) -> usize {
        self.table.n()
    }
}

/// Reads a weight-table document, mapping every failure to a configuration error.
pub fn load_custom_table(path: &Path) -> Result<WeightTable, ConfigError> {
    let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |reason: String| ConfigError::MalformedTable {
        path: path.to_path_buf(),
        reason,
    };
    let doc: WeightDocument = serde_json::from_str(&raw).map_err(|e| malformed(e.to_string()))?;
    let rank = ModelRank::new(doc.rank).map_err(|e| malformed(e.to_string()))?;
    WeightTable::from_document(rank, &doc).map_err(|e| malformed(e.to_string()))
}

fn generated(name: &str, table: WeightTable, sites: usize) -> Model {
    let r = table.len();
    Model {
        name: name.to_string(),
        table,
        sites: (0..sites).collect(),
        aux: (sites..r).collect(),
    }
}

/// Builds the model for a run.
///
/// Sampled models label their sites `xi1..` and auxiliaries `nu1..` and draw everything
/// from a ChaCha8 generator seeded with `seed`. The Perk-Schultz model draws the
/// anisotropy and then every rapidity from the annulus. Custom tables keep document
/// order: the first `sites` rapidities are inhomogeneities and the rest auxiliaries.
pub fn build_model(source: &ModelSource, seed: u64, sites: usize, aux: usize) -> Result<Model, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match source {
        ModelSource::DelPezzo => {
            let set = RapiditySet::generic(sites, aux);
            let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
            let params = DelPezzoParams::sample(&mut rng, &labels);
            Ok(generated("del-pezzo", build_del_pezzo(&params, &set)?, sites))
        }
        ModelSource::PerkSchultz => {
            let q = sample_annulus(&mut rng);
            let mut draw = |prefix: &str, count: usize| -> Vec<(String, Complex64)> {
                (1..=count)
                    .map(|k| (format!("{prefix}{k}"), sample_annulus(&mut rng)))
                    .collect()
            };
            let s = draw("xi", sites);
            let a = draw("nu", aux);
            let set = RapiditySet::new(s, a)?;
            Ok(generated("perk-schultz", build_perk_schultz(q, &set)?, sites))
        }
        ModelSource::Custom(path) => {
            let table = load_custom_table(path)?;
            let s = sites.min(table.len());
            Ok(generated("custom", table, s))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_models_are_reproducible() {
        for source in [ModelSource::DelPezzo, ModelSource::PerkSchultz] {
            let a = build_model(&source, 9, 3, 2).unwrap();
            let b = build_model(&source, 9, 3, 2).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.sites, vec![0, 1, 2]);
            assert_eq!(a.aux, vec![3, 4]);
            assert_ne!(a.table, build_model(&source, 10, 3, 2).unwrap().table);
        }
    }

    #[test]
    fn custom_tables_split_in_document_order() {
        let dir = std::env::temp_dir().join(format!("fbasis-model-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.json");
        let m = build_model(&ModelSource::DelPezzo, 1, 2, 2).unwrap();
        std::fs::write(&path, m.table.to_json()).unwrap();
        let c = build_model(&ModelSource::Custom(path.clone()), 0, 3, 0).unwrap();
        assert_eq!(c.table, m.table);
        assert_eq!(c.sites, vec![0, 1, 2]);
        assert_eq!(c.aux, vec![3]);
        std::fs::write(&path, "{\"rank\": 3}").unwrap();
        let err = build_model(&ModelSource::Custom(path), 0, 2, 2).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
