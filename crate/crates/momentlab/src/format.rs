//! JSON artifacts. Rationals are written as `"p/q"` strings and surds as
//! `{"coords": {"1": "1/2", "sqrt2": "1/8"}}`.
//!
//! Every artifact carries a `kind` so `verify` can dispatch on it.

use std::collections::BTreeMap;

use momentlab_core::arith::{generator_symbol, parse_generator_symbol, parse_rational};
use momentlab_core::moment::InteriorCertificate;
use momentlab_core::pascal::HomomorphismReport;
use momentlab_core::{Rational, Scalar, Surd};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MOMENTS: &str = "moments";
pub const MEMBERSHIP: &str = "membership";
pub const EXTENSION: &str = "extension";
pub const PASCAL: &str = "pascal";
pub const TRACE: &str = "trace";
pub const ORACLE: &str = "oracle";
pub const PERTURBATION: &str = "perturbation";
pub const EMBEDDING: &str = "cantor-embedding";

/// A scalar with a JSON representation.
pub trait Element: Scalar {
    type Repr: Serialize + DeserializeOwned + Clone + std::fmt::Debug + PartialEq;

    fn encode(&self) -> Self::Repr;
    fn decode(repr: &Self::Repr) -> CliResult<Self>;
}

impl Element for Rational {
    type Repr = String;

    fn encode(&self) -> String {
        self.to_string()
    }
    fn decode(repr: &String) -> CliResult<Self> {
        Ok(parse_rational(repr)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: BTreeMap<String, String>,
}

impl Element for Surd {
    type Repr = GroupElement;

    fn encode(&self) -> GroupElement {
        let coords = self
            .terms()
            .map(|(d, c)| (generator_symbol(d), c.to_string()))
            .collect();
        GroupElement { coords }
    }
    fn decode(repr: &GroupElement) -> CliResult<Self> {
        let terms = repr
            .coords
            .iter()
            .map(|(sym, c)| Ok((parse_generator_symbol(sym)?, parse_rational(c)?)))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Surd::from_terms(terms)?)
    }
}

pub fn encode_all<S: Element>(xs: &[S]) -> Vec<S::Repr> {
    xs.iter().map(S::encode).collect()
}

pub fn decode_all<S: Element>(xs: &[S::Repr]) -> CliResult<Vec<S>> {
    xs.iter().map(S::decode).collect()
}

/// Where a moment vector came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceDto {
    Measure(String),
    Moments(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsArtifact {
    pub kind: String,
    pub source: SourceDto,
    pub moments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutsideDto {
    pub form: String,
    pub index: usize,
    pub direction: Vec<String>,
    pub value: String,
    pub violation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipArtifact {
    pub kind: String,
    pub moments: Vec<String>,
    pub verdict: String,
    pub pivots_lower: Vec<String>,
    pub pivots_upper: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<OutsideDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionArtifact {
    pub kind: String,
    pub moments: Vec<String>,
    pub lo: String,
    pub hi: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDto {
    pub positive: bool,
    pub strictly_positive: bool,
    pub faithful: bool,
    pub injective_prefix_ranks: Vec<usize>,
    pub injective: bool,
}

impl From<HomomorphismReport> for ReportDto {
    fn from(r: HomomorphismReport) -> Self {
        ReportDto {
            positive: r.positive,
            strictly_positive: r.strictly_positive,
            faithful: r.faithful,
            injective_prefix_ranks: r.injective_prefix_ranks,
            injective: r.injective,
        }
    }
}

/// `τ(e(n, k))` for one level, with the multiplicities `C(n, k)` and the
/// weighted total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDto {
    pub level: usize,
    pub values: Vec<String>,
    pub multiplicities: Vec<String>,
    pub total: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PascalArtifact {
    pub kind: String,
    pub source: SourceDto,
    pub depth: usize,
    pub table: Vec<Vec<String>>,
    pub report: ReportDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceArtifact {
    pub kind: String,
    pub source: SourceDto,
    #[serde(flatten)]
    pub trace: TraceDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleArtifact {
    pub kind: String,
    pub moments: Vec<String>,
    pub grid: usize,
    pub tolerance: String,
    pub feasible: bool,
    /// Weights on `0, 1/grid, ..., 1`.
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestDto {
    pub source: SourceDto,
    pub m: usize,
    pub epsilons: Vec<String>,
    pub group: String,
    #[serde(rename = "N")]
    pub total_length: usize,
    pub independent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: DeserializeOwned"))]
pub struct CertificateDto<R> {
    pub n: usize,
    pub pivots_lower: Vec<R>,
    pub pivots_upper: Vec<R>,
}

impl<R> CertificateDto<R> {
    pub fn encode<S: Element<Repr = R>>(n: usize, cert: &InteriorCertificate<S>) -> Self {
        CertificateDto {
            n,
            pivots_lower: encode_all(&cert.pivots_lower),
            pivots_upper: encode_all(&cert.pivots_upper),
        }
    }

    pub fn decode<S: Element<Repr = R>>(&self) -> CliResult<InteriorCertificate<S>> {
        Ok(InteriorCertificate {
            pivots_lower: decode_all(&self.pivots_lower)?,
            pivots_upper: decode_all(&self.pivots_upper)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: DeserializeOwned"))]
pub struct PerturbationArtifact<R> {
    pub kind: String,
    pub request: RequestDto,
    pub sequence: Vec<R>,
    pub certificates: Vec<CertificateDto<R>>,
    pub deviations: Vec<String>,
    /// Rank over the rationals of each prefix of the sequence.
    pub ranks: Vec<usize>,
    pub report: ReportDto,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafDto {
    pub n: usize,
    pub w: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingArtifact {
    pub kind: String,
    #[serde(rename = "N")]
    pub order: usize,
    pub depth: usize,
    pub functions: Vec<LeafDto>,
    pub violations: Vec<String>,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn kind_of(text: &str) -> CliResult<String> {
    #[derive(Deserialize)]
    struct Kind {
        kind: String,
    }
    Ok(serde_json::from_str::<Kind>(text)?.kind)
}

pub fn expect_kind(found: &str, expected: &str) -> CliResult<()> {
    if found == expected {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "expected a {expected} artifact, found {found:?}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use momentlab_core::arith::rat;

    #[test]
    fn surd_coords() {
        let x = Surd::from_terms([(1, rat(1, 2)), (2, rat(1, 8))]).unwrap();
        let json = serde_json::to_string(&x.encode()).unwrap();
        assert_eq!(json, r#"{"coords":{"1":"1/2","sqrt2":"1/8"}}"#);
        assert_eq!(Surd::decode(&x.encode()).unwrap(), x);
    }

    #[test]
    fn rationals_are_fraction_strings() {
        assert_eq!(rat(-3, 6).encode(), "-1/2");
        assert_eq!(rat(4, 2).encode(), "2");
        assert!(Rational::decode(&"0.5".to_string()).is_err());
    }

    #[test]
    fn bad_generators_are_rejected() {
        let mut coords = BTreeMap::new();
        coords.insert("sqrt4".to_string(), "1".to_string());
        assert!(Surd::decode(&GroupElement { coords }).is_err());
    }
}
