//! Moving a moment sequence into a dense subgroup `G` of the reals.
//!
//! A prefix `(s_0, ..., s_m)` of a moment sequence is first pulled into the
//! relative interior by mixing with the Lebesgue moments, then rounded
//! coordinate-wise into `G`, halving the rounding radius until the interior
//! certificate survives. Later terms are chosen one at a time inside the
//! exact extension interval of the current prefix, so every truncation of
//! the output stays strictly interior.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{
    compare, pow2_inv, rational_rank, Rational, Scalar, SubgroupDescriptor, Surd, DEFAULT_CAP_BITS,
};
use crate::measure::{lebesgue_moments, Measure};
use crate::moment::{
    certify_interior, certify_prefixes, extension_interval, is_interior, membership,
    InteriorCertificate, Membership, MomentVector,
};
use crate::{Error, Result};

/// Cap on halving rounds in every refinement loop of this module.
pub const ROUNDING_CAP: u32 = 512;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Measure(Measure),
    Moments(MomentVector<Rational>),
}

impl Source {
    /// `(s_0, ..., s_n)`.
    pub fn moments(&self, n: usize) -> Result<MomentVector<Rational>> {
        match self {
            Source::Measure(mu) => Ok(mu.moments(n)),
            Source::Moments(t) if t.degree() >= n => Ok(t.truncated(n)),
            Source::Moments(t) => Err(Error::TooShort {
                needed: n + 1,
                got: t.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationRequest {
    pub source: Source,
    /// `m`: the number of terms kept close to the source.
    pub prefix_length: usize,
    /// `ε_1, ..., ε_m`.
    pub epsilons: Vec<Rational>,
    pub subgroup: SubgroupDescriptor,
    /// `N >= m`: index of the last output term.
    pub total_length: usize,
    pub independent: bool,
}

impl PerturbationRequest {
    /// The same `ε` for every index `1..=m`.
    pub fn uniform(
        source: Source,
        prefix_length: usize,
        epsilon: Rational,
        subgroup: SubgroupDescriptor,
        total_length: usize,
    ) -> Self {
        PerturbationRequest {
            source,
            prefix_length,
            epsilons: alloc::vec![epsilon; prefix_length],
            subgroup,
            total_length,
            independent: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.len() != self.prefix_length {
            return Err(Error::InvalidRequest(format!(
                "{} tolerances for a prefix of length {}",
                self.epsilons.len(),
                self.prefix_length
            )));
        }
        if self.epsilons.iter().any(|e| !e.is_positive()) {
            return Err(Error::InvalidRequest("tolerances must be positive".into()));
        }
        if self.total_length < self.prefix_length {
            return Err(Error::InvalidRequest(
                "total length is below the prefix length".into(),
            ));
        }
        if self.independent {
            match &self.subgroup {
                SubgroupDescriptor::Generated(gens) if gens.len() > self.total_length => {}
                SubgroupDescriptor::Generated(gens) => {
                    return Err(Error::InvalidRequest(format!(
                        "{} generators cannot carry {} independent terms",
                        gens.len(),
                        self.total_length + 1
                    )))
                }
                _ => {
                    return Err(Error::InvalidRequest(
                        "independent terms need a generated group".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult<S> {
    pub sequence: MomentVector<S>,
    /// Certificate of `(t_0, ..., t_n)` for `n = 1..=N`.
    pub certificates: Vec<InteriorCertificate<S>>,
    /// Upper bounds on `|t_j - s_j|` for `j = 1..=m`.
    pub deviations: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interiorized {
    pub point: MomentVector<Rational>,
    /// Weight of the Lebesgue moments in the mix; zero if the input was
    /// already interior.
    pub theta: Rational,
    /// Smallest pivot of the interior certificate.
    pub margin: Rational,
}

/// `(1 - θ) s + θ L` for the largest `θ = 2^-k` keeping every coordinate
/// within `ε_j / 2` of `s`, where `L` are the Lebesgue moments.
pub fn interiorize(s: &MomentVector<Rational>, epsilons: &[Rational]) -> Result<Interiorized> {
    let m = s.degree();
    if epsilons.len() != m {
        return Err(Error::InvalidRequest(format!(
            "{} tolerances for degree {m}",
            epsilons.len()
        )));
    }
    match membership(s)? {
        Membership::Interior(cert) => {
            return Ok(Interiorized {
                point: s.clone(),
                theta: Rational::zero(),
                margin: cert.margin().expect("certificates are non-empty"),
            })
        }
        Membership::Outside(_) => return Err(Error::NotAMomentVector),
        Membership::Boundary => {}
    }
    let lebesgue = lebesgue_moments(m);
    let two = Rational::from_integer(BigInt::from(2));
    let mut theta = Rational::one() / &two;
    let mut rounds = 0;
    while !(1..=m).all(|j| &theta * (&lebesgue[j] - &s[j]).abs() <= &epsilons[j - 1] / &two) {
        theta /= &two;
        rounds += 1;
        if rounds > ROUNDING_CAP {
            return Err(Error::PrecisionExhausted);
        }
    }
    let entries = s
        .iter()
        .zip(lebesgue.iter())
        .map(|(x, l)| (Rational::one() - &theta) * x + &theta * l)
        .collect();
    let point = MomentVector::new(entries)?;
    let cert = certify_interior(&point, DEFAULT_CAP_BITS)?.ok_or(Error::NotAMomentVector)?;
    Ok(Interiorized {
        point,
        theta,
        margin: cert.margin().expect("certificates are non-empty"),
    })
}

/// `(t_0, ..., t_m)` with every `t_j` in the group, `|t_j - s_j| < ε_j`, and
/// every truncation interior.
pub fn perturb_prefix(req: &PerturbationRequest) -> Result<MomentVector<Rational>> {
    req.validate()?;
    let m = req.prefix_length;
    let s = req.source.moments(m)?;
    let star = interiorize(&s, &req.epsilons)?.point;
    let two = Rational::from_integer(BigInt::from(2));
    for round in 0..ROUNDING_CAP {
        let shrink = pow2_inv(round);
        let mut entries = Vec::with_capacity(m + 1);
        entries.push(Rational::one());
        for j in 1..=m {
            let target = &star[j];
            if req.subgroup.contains(target) {
                entries.push(target.clone());
                continue;
            }
            let radius = &req.epsilons[j - 1] / &two * &shrink;
            entries.push(req.subgroup.round_into(
                target,
                &(target - &radius),
                &(target + &radius),
            )?);
        }
        if is_interior(&entries, DEFAULT_CAP_BITS)? {
            return MomentVector::new(entries);
        }
    }
    Err(Error::PrecisionExhausted)
}

/// Appends terms up to index `upto`, each the group element chosen by
/// [`SubgroupDescriptor::round_into`] around the midpoint of the extension
/// interval.
pub fn extend(
    t: &MomentVector<Rational>,
    group: &SubgroupDescriptor,
    upto: usize,
) -> Result<MomentVector<Rational>> {
    let mut t = t.clone();
    let two = Rational::from_integer(BigInt::from(2));
    while t.degree() < upto {
        let interval = extension_interval(&t)?;
        let mid = (&interval.lo + &interval.hi) / &two;
        let next = group.round_into(&mid, &interval.lo, &interval.hi)?;
        t = t.extended(next);
    }
    Ok(t)
}

fn prefix_certificates<S: Scalar>(t: &MomentVector<S>) -> Result<Vec<InteriorCertificate<S>>> {
    certify_prefixes(t, DEFAULT_CAP_BITS)?
        .into_iter()
        .map(|c| c.ok_or(Error::NotInterior))
        .collect()
}

/// Upper bound on `|x - s|`, tight to `ε / 2^20`.
fn deviation_bound<S: Scalar>(x: &S, s: &Rational, epsilon: &Rational) -> Rational {
    let enc = x.enclosure(&(epsilon * pow2_inv(20)));
    let a = (enc.lo() - s).abs();
    let b = (enc.hi() - s).abs();
    if a > b {
        a
    } else {
        b
    }
}

fn deviations<S: Scalar>(req: &PerturbationRequest, t: &MomentVector<S>) -> Result<Vec<Rational>> {
    let s = req.source.moments(req.prefix_length)?;
    Ok((1..=req.prefix_length)
        .map(|j| deviation_bound(&t[j], &s[j], &req.epsilons[j - 1]))
        .collect())
}

/// A moment sequence of length `N + 1` in the group, close to the source on
/// the first `m` terms, with every truncation interior.
pub fn perturb(req: &PerturbationRequest) -> Result<PerturbationResult<Rational>> {
    if req.independent {
        return Err(Error::InvalidRequest(
            "use perturb_independent for independent terms".into(),
        ));
    }
    let prefix = perturb_prefix(req)?;
    let sequence = extend(&prefix, &req.subgroup, req.total_length)?;
    Ok(PerturbationResult {
        certificates: prefix_certificates(&sequence)?,
        deviations: deviations(req, &sequence)?,
        sequence,
    })
}

/// Like [`perturb`], with terms independent over the rationals.
///
/// Term `n >= 1` is `r_n + 2^-k √d_n` where `√d_n` is the `n`-th non-unit
/// generator, so no term lies in the rational span of the earlier ones.
/// For `n <= m`, `r_n` is the interiorized source term and `k` grows until the
/// vector `(t_0, ..., t_n, r_{n+1}, ..., r_m)` is interior. Beyond `m`, `r_n`
/// is a dyadic point of the extension interval and `k` grows until the term
/// provably lies inside it.
pub fn perturb_independent(req: &PerturbationRequest) -> Result<PerturbationResult<Surd>> {
    if !req.independent {
        return Err(Error::InvalidRequest(
            "request does not ask for independent terms".into(),
        ));
    }
    req.validate()?;
    let fresh: Vec<u64> = req
        .subgroup
        .generators()
        .iter()
        .copied()
        .filter(|&d| d != 1)
        .collect();
    let m = req.prefix_length;
    let two = Rational::from_integer(BigInt::from(2));
    let s = req.source.moments(m)?;
    let star = interiorize(&s, &req.epsilons)?.point;

    let mut terms: Vec<Surd> = alloc::vec![Surd::one()];
    for n in 1..=m {
        let half_eps = &req.epsilons[n - 1] / &two;
        let root = Surd::sqrt(fresh[n - 1])?;
        let mut chosen = None;
        for k in 1..=ROUNDING_CAP {
            let offset = root.scale(&pow2_inv(k));
            if offset.enclosure(&pow2_inv(k + 8)).hi() >= &half_eps {
                continue;
            }
            let candidate = Surd::from_rational(star[n].clone()) + offset;
            let mut probe = terms.clone();
            probe.push(candidate.clone());
            probe.extend(star[n + 1..].iter().cloned().map(Surd::from_rational));
            if is_interior(&probe, DEFAULT_CAP_BITS)? {
                chosen = Some(candidate);
                break;
            }
        }
        terms.push(chosen.ok_or(Error::PrecisionExhausted)?);
    }

    let dyadic = SubgroupDescriptor::PrimePowerRing(alloc::vec![2]);
    for n in m + 1..=req.total_length {
        let prefix = MomentVector::new(terms.clone())?;
        let interval = extension_interval(&prefix)?;
        let (lo, hi) = inner_rational_interval(&interval.lo, &interval.hi)?;
        let mid = (&lo + &hi) / &two;
        let base = dyadic.round_into(&mid, &lo, &hi)?;
        let root = Surd::sqrt(fresh[n - 1])?;
        let mut chosen = None;
        for k in 1..=ROUNDING_CAP {
            let candidate = Surd::from_rational(base.clone()) + root.scale(&pow2_inv(k));
            if !candidate.enclosure(&pow2_inv(k + 8)).inside_open(&lo, &hi) {
                continue;
            }
            let mut probe = terms.clone();
            probe.push(candidate.clone());
            if is_interior(&probe, DEFAULT_CAP_BITS)? {
                chosen = Some(candidate);
                break;
            }
        }
        terms.push(chosen.ok_or(Error::PrecisionExhausted)?);
    }

    let sequence = MomentVector::new(terms)?;
    Ok(PerturbationResult {
        certificates: prefix_certificates(&sequence)?,
        deviations: deviations(req, &sequence)?,
        sequence,
    })
}

/// Rational `(a, b)` with `lo < a < b < hi`.
fn inner_rational_interval(lo: &Surd, hi: &Surd) -> Result<(Rational, Rational)> {
    for k in 8..ROUNDING_CAP {
        let width = pow2_inv(k);
        let a = lo.enclosure(&width).hi().clone();
        let b = hi.enclosure(&width).lo().clone();
        if a < b {
            return Ok((a, b));
        }
    }
    Err(Error::PrecisionExhausted)
}

/// A broken output guarantee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContractViolation {
    WrongLength { expected: usize, got: usize },
    NotInGroup { index: usize },
    NotInterior { length: usize },
    CertificateMismatch { length: usize },
    Trivial,
    Deviation { index: usize },
    RankDeficient { index: usize },
}

/// Re-checks every guarantee of a perturbation result from scratch.
pub fn check_result<S: Scalar>(
    req: &PerturbationRequest,
    result: &PerturbationResult<S>,
) -> Result<Vec<ContractViolation>> {
    let t = &result.sequence;
    let mut violations = Vec::new();
    if t.degree() != req.total_length {
        violations.push(ContractViolation::WrongLength {
            expected: req.total_length + 1,
            got: t.len(),
        });
        return Ok(violations);
    }
    for (index, x) in t.iter().enumerate() {
        if !req.subgroup.contains_element(x) {
            violations.push(ContractViolation::NotInGroup { index });
        }
    }
    for (i, fresh) in certify_prefixes(t, DEFAULT_CAP_BITS)?
        .into_iter()
        .enumerate()
    {
        let n = i + 1;
        match fresh {
            None => violations.push(ContractViolation::NotInterior { length: n + 1 }),
            Some(cert) if result.certificates.get(n - 1) != Some(&cert) => {
                violations.push(ContractViolation::CertificateMismatch { length: n + 1 })
            }
            Some(_) => {}
        }
    }
    if t.degree() >= 2 && compare(&t[2], &t[1], DEFAULT_CAP_BITS)? != Ordering::Less {
        violations.push(ContractViolation::Trivial);
    }
    let s = req.source.moments(req.prefix_length)?;
    for j in 1..=req.prefix_length.min(t.degree()) {
        let gap = t[j].clone() - S::from_rational(s[j].clone());
        let gap = crate::arith::abs(&gap, DEFAULT_CAP_BITS)?;
        let eps = S::from_rational(req.epsilons[j - 1].clone());
        if compare(&gap, &eps, DEFAULT_CAP_BITS)? != Ordering::Less {
            violations.push(ContractViolation::Deviation { index: j });
        }
    }
    if req.independent {
        for n in 0..t.len() {
            if rational_rank(&t[..=n]) != n + 1 {
                violations.push(ContractViolation::RankDeficient { index: n });
            }
        }
    }
    Ok(violations)
}
