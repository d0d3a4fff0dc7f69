//! Computing artifacts from parsed inputs.

use momentlab_core::arith::{compare, rational_rank, DEFAULT_CAP_BITS};
use momentlab_core::cantor::{function_leaves, verify_embedding, EmbeddingCertificate};
use momentlab_core::linalg::leading_minors;
use momentlab_core::moment::{extension_interval, hankel_forms, membership, Form, Membership};
use momentlab_core::pascal::{build_table, gicar_trace, verify_hom};
use momentlab_core::perturb::{
    check_result, ContractViolation, PerturbationRequest, PerturbationResult, Source,
};
use momentlab_core::simplex::lp_feasible;
use momentlab_core::{MomentVector, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::CliResult;
use crate::format::*;
use crate::parse;

pub fn source_dto(source: &Source) -> SourceDto {
    match source {
        Source::Measure(mu) => SourceDto::Measure(parse::render_measure(mu)),
        Source::Moments(t) => SourceDto::Moments(encode_all(t)),
    }
}

pub fn source_from_dto(dto: &SourceDto) -> CliResult<Source> {
    Ok(match dto {
        SourceDto::Measure(s) => Source::Measure(parse::measure(s)?),
        SourceDto::Moments(xs) => Source::Moments(MomentVector::new(decode_all(xs)?)?),
    })
}

pub fn moments(source: &Source, degree: usize) -> CliResult<MomentsArtifact> {
    Ok(MomentsArtifact {
        kind: MOMENTS.into(),
        source: source_dto(source),
        moments: encode_all(&source.moments(degree)?),
    })
}

pub fn membership_of(t: &MomentVector<Rational>) -> CliResult<MembershipArtifact> {
    let verdict = membership(t)?;
    let (pivots_lower, pivots_upper, witness) = match &verdict {
        Membership::Interior(cert) => (
            encode_all(&cert.pivots_lower),
            encode_all(&cert.pivots_upper),
            None,
        ),
        other => {
            // minors up to and including the first non-positive one
            let (lower, upper) = hankel_forms(t);
            let witness = match other {
                Membership::Outside(w) => Some(OutsideDto {
                    form: match w.form {
                        Form::Lower => "lower".into(),
                        Form::Upper => "upper".into(),
                    },
                    index: w.index,
                    direction: encode_all(&w.direction.vector),
                    value: w.direction.value.to_string(),
                    violation: w.violation.to_string(),
                }),
                _ => None,
            };
            (
                encode_all(&leading_minors(&lower, DEFAULT_CAP_BITS)?),
                encode_all(&leading_minors(&upper, DEFAULT_CAP_BITS)?),
                witness,
            )
        }
    };
    Ok(MembershipArtifact {
        kind: MEMBERSHIP.into(),
        moments: encode_all(t),
        verdict: verdict.name().into(),
        pivots_lower,
        pivots_upper,
        witness,
    })
}

pub fn extension(t: &MomentVector<Rational>) -> CliResult<ExtensionArtifact> {
    let interval = extension_interval(t)?;
    Ok(ExtensionArtifact {
        kind: EXTENSION.into(),
        moments: encode_all(t),
        lo: interval.lo.to_string(),
        hi: interval.hi.to_string(),
    })
}

fn binomials(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 0..n {
        let next = &row[k] * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

pub fn trace(t: &MomentVector<Rational>, level: usize) -> CliResult<TraceDto> {
    let values = gicar_trace(t, level)?;
    let multiplicities = binomials(level);
    let total = values
        .iter()
        .zip(&multiplicities)
        .fold(Rational::zero(), |acc, (v, c)| {
            acc + v * Rational::from_integer(c.clone())
        });
    Ok(TraceDto {
        level,
        values: encode_all(&values),
        multiplicities: multiplicities.iter().map(|c| c.to_string()).collect(),
        total: total.to_string(),
    })
}

pub fn pascal(
    source: &Source,
    depth: usize,
    trace_level: Option<usize>,
) -> CliResult<PascalArtifact> {
    let t = source.moments(depth)?;
    let table = build_table(&t, depth)?;
    let report = verify_hom(&table)?;
    let trace = trace_level.map(|n| trace(&t, n)).transpose()?;
    Ok(PascalArtifact {
        kind: PASCAL.into(),
        source: source_dto(source),
        depth,
        table: table.rows().iter().map(|row| encode_all(row)).collect(),
        report: report.into(),
        trace,
    })
}

pub fn trace_of(source: &Source, level: usize) -> CliResult<TraceArtifact> {
    Ok(TraceArtifact {
        kind: TRACE.into(),
        source: source_dto(source),
        trace: trace(&source.moments(level)?, level)?,
    })
}

pub fn oracle(
    t: &MomentVector<Rational>,
    grid: usize,
    tolerance: &Rational,
) -> CliResult<OracleArtifact> {
    let witness = lp_feasible(t, grid, tolerance)?;
    Ok(OracleArtifact {
        kind: ORACLE.into(),
        moments: encode_all(t),
        grid,
        tolerance: tolerance.to_string(),
        feasible: witness.is_some(),
        witness: witness.map(|w| encode_all(&w.weights)),
    })
}

pub fn request_dto(req: &PerturbationRequest) -> RequestDto {
    RequestDto {
        source: source_dto(&req.source),
        m: req.prefix_length,
        epsilons: encode_all(&req.epsilons),
        group: req.subgroup.to_string(),
        total_length: req.total_length,
        independent: req.independent,
    }
}

pub fn request_from_dto(dto: &RequestDto) -> CliResult<PerturbationRequest> {
    let req = PerturbationRequest {
        source: source_from_dto(&dto.source)?,
        prefix_length: dto.m,
        epsilons: decode_all(&dto.epsilons)?,
        subgroup: dto.group.parse()?,
        total_length: dto.total_length,
        independent: dto.independent,
    };
    req.validate()?;
    Ok(req)
}

pub fn describe(v: &ContractViolation) -> String {
    match v {
        ContractViolation::WrongLength { expected, got } => {
            format!("length {got}, expected {expected}")
        }
        ContractViolation::NotInGroup { index } => format!("t{index} is not in the group"),
        ContractViolation::NotInterior { length } => {
            format!("prefix of length {length} is not interior")
        }
        ContractViolation::CertificateMismatch { length } => {
            format!("stored certificate for length {length} does not match")
        }
        ContractViolation::Trivial => "t2 < t1 fails".into(),
        ContractViolation::Deviation { index } => format!("t{index} is too far from the source"),
        ContractViolation::RankDeficient { index } => {
            format!("t0..t{index} are dependent over the rationals")
        }
    }
}

/// Everything checked about a perturbation beyond the core contract: the
/// stored deviation bounds hold and are below the tolerances, and the ranks
/// and homomorphism report match the sequence.
pub fn perturbation_violations<S: Element>(
    req: &PerturbationRequest,
    result: &PerturbationResult<S>,
    ranks: &[usize],
    report: &ReportDto,
) -> CliResult<Vec<String>> {
    let mut out: Vec<String> = check_result(req, result)?.iter().map(describe).collect();
    if !out.is_empty() {
        return Ok(out);
    }
    let t = &result.sequence;
    let s = req.source.moments(req.prefix_length)?;
    if result.deviations.len() != req.prefix_length {
        out.push("one deviation bound per prefix term is required".into());
    } else {
        for (j, bound) in (1..).zip(&result.deviations) {
            let gap = momentlab_core::arith::abs(
                &(t[j].clone() - S::from_rational(s[j].clone())),
                DEFAULT_CAP_BITS,
            )?;
            let bound_s = S::from_rational(bound.clone());
            if compare(&gap, &bound_s, DEFAULT_CAP_BITS)?.is_gt() || bound >= &req.epsilons[j - 1] {
                out.push(format!("deviation bound for t{j} does not hold"));
            }
        }
    }
    if ranks != prefix_ranks(t).as_slice() {
        out.push("ranks do not match the sequence".into());
    }
    if *report != ReportDto::from(verify_hom(&build_table(t, t.degree())?)?) {
        out.push("report does not match the sequence".into());
    }
    Ok(out)
}

pub fn prefix_ranks<S: Element>(t: &[S]) -> Vec<usize> {
    (1..=t.len()).map(|n| rational_rank(&t[..n])).collect()
}

pub fn perturbation<S: Element>(
    req: &PerturbationRequest,
    result: &PerturbationResult<S>,
) -> CliResult<PerturbationArtifact<S::Repr>> {
    let t = &result.sequence;
    let ranks = prefix_ranks(t);
    let report: ReportDto = verify_hom(&build_table(t, t.degree())?)?.into();
    let violations = perturbation_violations(req, result, &ranks, &report)?;
    Ok(PerturbationArtifact {
        kind: PERTURBATION.into(),
        request: request_dto(req),
        sequence: encode_all(t),
        certificates: (1..)
            .zip(&result.certificates)
            .map(|(n, c)| CertificateDto::encode(n, c))
            .collect(),
        deviations: encode_all(&result.deviations),
        ranks,
        report,
        violations,
    })
}

pub fn embedding(cert: &EmbeddingCertificate) -> EmbeddingArtifact {
    EmbeddingArtifact {
        kind: EMBEDDING.into(),
        order: cert.order(),
        depth: cert.depth(),
        functions: function_leaves(cert)
            .into_iter()
            .map(|(n, w, value)| LeafDto {
                n,
                w,
                value: value.to_string(),
            })
            .collect(),
        violations: verify_embedding(cert)
            .iter()
            .map(|v| v.to_string())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use momentlab_core::arith::rat;

    #[test]
    fn binomial_rows() {
        let row: Vec<String> = binomials(5).iter().map(|c| c.to_string()).collect();
        assert_eq!(row, ["1", "5", "10", "10", "5", "1"]);
    }

    #[test]
    fn trace_total_is_one() {
        let t = momentlab_core::measure::lebesgue_moments(6);
        let dto = trace(&t, 6).unwrap();
        assert_eq!(dto.total, "1");
        // ∫ λ^k (1-λ)^{6-k} = 1 / (7 C(6, k))
        assert_eq!(dto.values[2], rat(1, 105).to_string());
    }
}
