//! The verification suites.

use fbasis_core::dwpf::{commute_check, evaluate_routes, CommuteKind, DwpfInstance, DwpfKind};
use fbasis_core::f_matrix::{
    verify_curly_r_unitarity, verify_exchange_relations, verify_factorization, FMatrixBundle, SigmaScope,
};
use fbasis_core::monodromy::{build_monodromy, conjectured_twisted, twist, vanishing_twist_entries, BlockKind};
use fbasis_core::relation_checks::{check_all_weights, check_invariants, check_matrix_relations, ResidualReport};
use itertools::Itertools;

use crate::config::{RunError, Suite, SuiteConfig, Tolerances};
use crate::model::{build_model, Model};
use crate::report::{Entry, SuiteReport, SCHEMA_VERSION};

/// Largest L for operator-level R-matrix identities.
pub const MATRIX_LMAX: usize = 4;
/// Largest L at which factorization visits all of `S_L`; beyond it 24 permutations are sampled.
pub const EXHAUSTIVE_LMAX: usize = 4;
/// Largest L for mixed partition functions.
pub const MIXED_LMAX: usize = 4;
/// Largest L for the operator exchange relations.
pub const COMMUTE_LMAX: usize = 3;

struct Collector {
    entries: Vec<Entry>,
    skipped: Vec<String>,
}

impl Collector {
    fn push(&mut self, section: &str, reports: impl IntoIterator<Item = ResidualReport>) {
        self.entries.extend(reports.into_iter().map(|report| Entry {
            section: section.to_string(),
            report,
        }));
    }

    fn requires_three_states(&mut self, section: &str, model: &Model) -> bool {
        if model.n() == 3 {
            return true;
        }
        self.skipped
            .push(format!("{section}: requires N = 3, model has N = {}", model.n()));
        false
    }
}

fn labels(model: &Model, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&x| model.table.label(x).to_string()).collect()
}

fn weights_check(model: &Model, lmax: usize, tol: &Tolerances, out: &mut Collector) -> Result<(), RunError> {
    out.push("weights", check_all_weights(&model.table, tol.weights)?);
    if model.table.len() >= 3 && out.requires_three_states("invariants", model) {
        out.push("invariants", check_invariants(&model.table, tol.weights)?);
    }
    let aux = (model.aux.len() >= 2).then(|| (model.aux[0], model.aux[1]));
    for l in 2..=lmax.min(MATRIX_LMAX).min(model.sites.len()) {
        out.push(
            "matrix",
            check_matrix_relations(&model.table, &model.sites[..l], aux, tol.matrix)?,
        );
    }
    Ok(())
}

fn factorization(model: &Model, lmax: usize, seed: u64, tol: &Tolerances, out: &mut Collector) -> Result<(), RunError> {
    for l in 2..=lmax.min(model.sites.len()) {
        let xi = &model.sites[..l];
        let scope = if l <= EXHAUSTIVE_LMAX {
            SigmaScope::All
        } else {
            SigmaScope::Sample { count: 24, seed }
        };
        out.push(
            "factorization",
            verify_factorization(&model.table, xi, scope, tol.factorization)?,
        );
        out.push(
            "factorization",
            verify_exchange_relations(&model.table, xi, scope, tol.factorization)?,
        );
        out.push(
            "factorization",
            [verify_curly_r_unitarity(&model.table, xi, tol.factorization)?],
        );
    }
    Ok(())
}

fn twist_compare(model: &Model, lmax: usize, tol: &Tolerances, out: &mut Collector) -> Result<(), RunError> {
    if !out.requires_three_states("twist", model) {
        return Ok(());
    }
    let Some(&mu) = model.aux.first() else {
        out.skipped.push("twist: requires an auxiliary rapidity".to_string());
        return Ok(());
    };
    for l in 1..=lmax.min(model.sites.len()) {
        let xi = &model.sites[..l];
        let bundle = FMatrixBundle::build(&model.table, xi)?;
        let blocks = build_monodromy(&model.table, mu, xi)?;
        let mut args = labels(model, &[mu]);
        args.extend(labels(model, xi));
        for kind in BlockKind::ALL {
            let (i, j) = kind.indices();
            let twisted = twist(blocks.block(i, j)?, &bundle)?;
            let closed = conjectured_twisted(kind, &model.table, mu, xi)?;
            let name = format!("twist.{kind}");
            out.push(
                "twist",
                [ResidualReport::from_operators(
                    &name,
                    &[l],
                    args.clone(),
                    &twisted,
                    &closed,
                    tol.twist,
                )?],
            );
        }
        if l == 2 {
            for (entry, value) in vanishing_twist_entries(&model.table, mu, xi)? {
                let name = format!("twist.zero.{entry}");
                out.push(
                    "twist",
                    [ResidualReport::from_values(
                        &name,
                        &[],
                        args.clone(),
                        value.norm(),
                        0.0,
                        tol.vanishing,
                    )],
                );
            }
        }
    }
    Ok(())
}

fn dwpf_agree(model: &Model, lmax: usize, tol: &Tolerances, out: &mut Collector) -> Result<(), RunError> {
    if !out.requires_three_states("dwpf", model) {
        return Ok(());
    }
    let top = lmax.min(model.sites.len()).min(model.aux.len());
    for l in 1..=top {
        let (aux, xi) = (model.aux[..l].to_vec(), model.sites[..l].to_vec());
        for kind in DwpfKind::SINGLE {
            let inst = DwpfInstance::new(kind, aux.clone(), xi.clone(), vec![])?;
            out.push("dwpf", evaluate_routes(&inst, &model.table, tol.dwpf)?.1);
        }
        if (2..=MIXED_LMAX).contains(&l) {
            for kind in [DwpfKind::MixedC, DwpfKind::MixedB] {
                for m in 0..=l {
                    for q in (1..=l).combinations(m) {
                        let inst = DwpfInstance::new(kind, aux.clone(), xi.clone(), q)?;
                        out.push("dwpf", evaluate_routes(&inst, &model.table, tol.dwpf)?.1);
                    }
                }
            }
        }
    }
    if model.aux.len() >= 2 {
        let (a, b) = (model.aux[0], model.aux[1]);
        for l in 1..=lmax.min(COMMUTE_LMAX).min(model.sites.len()) {
            for kind in [CommuteKind::CC, CommuteKind::BB] {
                for (mu, nu) in [(a, b), (b, a)] {
                    out.push(
                        "commute",
                        [commute_check(
                            kind,
                            &model.table,
                            mu,
                            nu,
                            &model.sites[..l],
                            tol.commute,
                        )?],
                    );
                }
            }
        }
    }
    Ok(())
}

/// Runs the suites of `config` on an already built model.
pub fn run_on_model(config: &SuiteConfig, model: &Model) -> Result<SuiteReport, RunError> {
    config.validate()?;
    let mut out = Collector {
        entries: Vec::new(),
        skipped: Vec::new(),
    };
    let (lmax, tol) = (config.lmax, &config.tolerances);
    let all = config.suite == Suite::All;
    if all || config.suite == Suite::WeightsCheck {
        weights_check(model, lmax, tol, &mut out)?;
    }
    if all || config.suite == Suite::Factorization {
        factorization(model, lmax, config.seed, tol, &mut out)?;
    }
    if all || config.suite == Suite::TwistCompare {
        twist_compare(model, lmax, tol, &mut out)?;
    }
    if all || config.suite == Suite::DwpfAgree {
        dwpf_agree(model, lmax, tol, &mut out)?;
    }
    let failures = out.entries.iter().filter(|e| !e.report.pass).count();
    Ok(SuiteReport {
        schema: SCHEMA_VERSION,
        suite: config.suite.name().to_string(),
        model: model.name.clone(),
        seed: config.seed,
        lmax,
        tolerances: *tol,
        checks: out.entries.len(),
        failures,
        skipped: out.skipped,
        entries: out.entries,
    })
}

/// Builds the model of `config` with `lmax` sites and `max(lmax, 2)` auxiliaries and runs its suites.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, RunError> {
    config.validate()?;
    let model = build_model(&config.model, config.seed, config.lmax, config.lmax.max(2))?;
    run_on_model(config, &model)
}
