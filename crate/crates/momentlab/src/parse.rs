//! Textual inputs: measures, sequences, rational lists.

use momentlab_core::arith::parse_rational;
use momentlab_core::{Measure, MomentVector, Rational};
use num_traits::One;

use crate::error::{CliError, CliResult};

fn invalid(s: &str) -> CliError {
    momentlab_core::Error::InvalidMeasure(format!("{s:?}")).into()
}

/// Parses `lebesgue`, `beta:a,b`, `dirac:x` or `atoms:x@w,x@w,...`.
pub fn measure(s: &str) -> CliResult<Measure> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("lebesgue") {
        return Ok(Measure::Lebesgue);
    }
    let (head, rest) = s.split_once(':').ok_or_else(|| invalid(s))?;
    match head.trim() {
        "beta" => {
            let (a, b) = rest.split_once(',').ok_or_else(|| invalid(s))?;
            let a = a.trim().parse().map_err(|_| invalid(s))?;
            let b = b.trim().parse().map_err(|_| invalid(s))?;
            Ok(Measure::beta(a, b)?)
        }
        "dirac" => Ok(Measure::dirac(parse_rational(rest)?)?),
        "atoms" => {
            let atoms = rest
                .split(',')
                .map(|atom| {
                    let (x, w) = atom.split_once('@').ok_or_else(|| invalid(s))?;
                    Ok((parse_rational(x)?, parse_rational(w)?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(Measure::atomic(atoms)?)
        }
        _ => Err(invalid(s)),
    }
}

/// Canonical text form, accepted back by [`measure`].
pub fn render_measure(mu: &Measure) -> String {
    match mu {
        Measure::Lebesgue => "lebesgue".into(),
        Measure::Beta { a, b } => format!("beta:{a},{b}"),
        Measure::Atomic(atoms) if atoms.len() == 1 && atoms[0].1.is_one() => {
            format!("dirac:{}", atoms[0].0)
        }
        Measure::Atomic(atoms) => {
            let parts: Vec<String> = atoms.iter().map(|(x, w)| format!("{x}@{w}")).collect();
            format!("atoms:{}", parts.join(","))
        }
    }
}

/// Comma-separated rationals.
pub fn rationals(s: &str) -> CliResult<Vec<Rational>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| Ok(parse_rational(x)?))
        .collect()
}

pub fn sequence(s: &str) -> CliResult<MomentVector<Rational>> {
    Ok(MomentVector::new(rationals(s)?)?)
}
