//! Re-checking artifacts read back from disk.

use std::collections::BTreeMap;

use momentlab_core::cantor::{first_violation, CylinderFunction, EmbeddingCertificate, Word};
use momentlab_core::perturb::PerturbationResult;
use momentlab_core::simplex::{lp_feasible, GridWitness};
use momentlab_core::{MomentVector, Rational, Surd};

use crate::artifact;
use crate::error::{CliError, CliResult};
use crate::format::*;

fn fail(msg: impl Into<String>) -> CliError {
    CliError::Verification(msg.into())
}

fn matches<T: PartialEq>(stored: &T, fresh: &T, what: &str) -> CliResult<()> {
    if stored == fresh {
        Ok(())
    } else {
        Err(fail(format!("{what} does not match its recomputation")))
    }
}

fn moment_vector(xs: &[String]) -> CliResult<MomentVector<Rational>> {
    MomentVector::new(decode_all(xs)?).map_err(|e| fail(e.to_string()))
}

/// Checks any artifact, dispatching on its `kind`. Returns a one-line summary.
pub fn verify_text(text: &str) -> CliResult<String> {
    let kind = kind_of(text)?;
    match kind.as_str() {
        MOMENTS => {
            let a: MomentsArtifact = serde_json::from_str(text)?;
            let source = artifact::source_from_dto(&a.source)?;
            let degree = a
                .moments
                .len()
                .checked_sub(1)
                .ok_or_else(|| fail("no moments"))?;
            matches(&a, &artifact::moments(&source, degree)?, "moment vector")?;
        }
        MEMBERSHIP => {
            let a: MembershipArtifact = serde_json::from_str(text)?;
            let t = moment_vector(&a.moments)?;
            matches(&a, &artifact::membership_of(&t)?, "membership verdict")?;
        }
        EXTENSION => {
            let a: ExtensionArtifact = serde_json::from_str(text)?;
            let t = moment_vector(&a.moments)?;
            let fresh = artifact::extension(&t).map_err(|e| fail(e.to_string()))?;
            matches(&a, &fresh, "extension interval")?;
        }
        PASCAL => {
            let a: PascalArtifact = serde_json::from_str(text)?;
            let source = artifact::source_from_dto(&a.source)?;
            let level = a.trace.as_ref().map(|t| t.level);
            matches(&a, &artifact::pascal(&source, a.depth, level)?, "table")?;
        }
        TRACE => {
            let a: TraceArtifact = serde_json::from_str(text)?;
            let source = artifact::source_from_dto(&a.source)?;
            matches(&a, &artifact::trace_of(&source, a.trace.level)?, "trace")?;
        }
        ORACLE => verify_oracle(serde_json::from_str(text)?)?,
        PERTURBATION => return verify_perturbation(text),
        EMBEDDING => return verify_embedding(serde_json::from_str(text)?),
        other => return Err(CliError::Usage(format!("unknown artifact kind {other:?}"))),
    }
    Ok(format!("{kind}: ok"))
}

fn verify_oracle(a: OracleArtifact) -> CliResult<()> {
    let t = moment_vector(&a.moments)?;
    let tolerance = Rational::decode(&a.tolerance)?;
    match (&a.witness, a.feasible) {
        (Some(weights), true) => {
            let witness = GridWitness {
                grid_size: a.grid,
                weights: decode_all(weights)?,
                tolerance,
            };
            if !witness.verify(&t) {
                return Err(fail("grid witness does not reproduce the moments"));
            }
        }
        (None, false) => {
            if lp_feasible(&t, a.grid, &tolerance)?.is_some() {
                return Err(fail("claimed infeasible, but a grid witness exists"));
            }
        }
        _ => return Err(fail("feasibility flag disagrees with the witness")),
    }
    Ok(())
}

fn verify_perturbation(text: &str) -> CliResult<String> {
    #[derive(serde::Deserialize)]
    struct Head {
        request: RequestDto,
    }
    let head: Head = serde_json::from_str(text)?;
    if head.request.independent {
        check_perturbation::<Surd>(serde_json::from_str(text)?)
    } else {
        check_perturbation::<Rational>(serde_json::from_str(text)?)
    }
}

fn check_perturbation<S: Element>(a: PerturbationArtifact<S::Repr>) -> CliResult<String> {
    let req = artifact::request_from_dto(&a.request)?;
    let sequence =
        MomentVector::new(decode_all::<S>(&a.sequence)?).map_err(|e| fail(e.to_string()))?;
    let mut certificates = Vec::with_capacity(a.certificates.len());
    for (n, c) in (1..).zip(&a.certificates) {
        if c.n != n {
            return Err(fail(format!("certificate {n} is labelled {}", c.n)));
        }
        certificates.push(c.decode::<S>()?);
    }
    let result = PerturbationResult {
        sequence,
        certificates,
        deviations: decode_all(&a.deviations)?,
    };
    let violations = artifact::perturbation_violations(&req, &result, &a.ranks, &a.report)?;
    if let Some(first) = violations.first() {
        return Err(fail(format!("{first} ({} problems)", violations.len())));
    }
    if !a.violations.is_empty() {
        return Err(fail("artifact records violations"));
    }
    Ok(format!(
        "{PERTURBATION}: ok, N = {}, {} certificates",
        req.total_length,
        result.certificates.len()
    ))
}

fn verify_embedding(a: EmbeddingArtifact) -> CliResult<String> {
    let mut leaves: BTreeMap<usize, Vec<(Word, Rational)>> = BTreeMap::new();
    for leaf in &a.functions {
        let w: Word = leaf
            .w
            .parse()
            .map_err(|e: momentlab_core::Error| fail(e.to_string()))?;
        leaves
            .entry(leaf.n)
            .or_default()
            .push((w, Rational::decode(&leaf.value)?));
    }
    if leaves.keys().copied().ne(0..=a.order) {
        return Err(fail(format!("expected functions g0..g{}", a.order)));
    }
    let functions = leaves
        .into_values()
        .map(CylinderFunction::from_leaves)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(e.to_string()))?;
    let cert = EmbeddingCertificate::assemble(functions).map_err(|e| fail(e.to_string()))?;
    if let Some(v) = first_violation(&cert) {
        return Err(fail(v.to_string()));
    }
    if cert.depth() != a.depth {
        return Err(fail(format!(
            "recorded depth {} but the functions have depth {}",
            a.depth,
            cert.depth()
        )));
    }
    if !a.violations.is_empty() {
        return Err(fail("artifact records violations"));
    }
    Ok(format!(
        "{EMBEDDING}: ok, N = {}, depth {}, {} cells",
        a.order,
        a.depth,
        cert.cells.len()
    ))
}
