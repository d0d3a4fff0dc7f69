//! Locally constant functions on the Cantor set `{0,1}^ℕ` and finite-depth
//! certificates that a sequence of them is pointwise an interior moment
//! sequence with values in the 2-3-smooth cylinder lattices.
//!
//! A function is stored sparsely as its values on a complete prefix code:
//! a finite set of words no one of which extends another, whose cylinders
//! cover the whole space.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::arith::{nearest_multiple_in, Rational, DEFAULT_CAP_BITS};
use crate::moment::{certify_prefixes, extension_interval, InteriorCertificate, MomentVector};
use crate::pascal::{build_table, PascalTable};
use crate::{Error, Result};

pub const DEFAULT_DEPTH_CAP: u32 = 40;

/// Longest word a [`Word`] can hold.
pub const MAX_WORD_LEN: u32 = 64;

/// A finite binary word, naming the cylinder of sequences starting with it.
///
/// Words order lexicographically, a proper prefix before its extensions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Word {
    // first letter in the most significant of the `len` low bits
    bits: u64,
    len: u8,
}

impl Word {
    pub const EMPTY: Word = Word { bits: 0, len: 0 };

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Letter `i`, 0 or 1.
    pub fn letter(&self, i: usize) -> u8 {
        assert!(
            i < self.len(),
            "letter {i} of a word of length {}",
            self.len
        );
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    /// `self` followed by `letter`.
    pub fn child(&self, letter: u8) -> Word {
        assert!((self.len as u32) < MAX_WORD_LEN, "word too long");
        assert!(letter <= 1);
        Word {
            bits: (self.bits << 1) | letter as u64,
            len: self.len + 1,
        }
    }

    pub fn children(&self) -> [Word; 2] {
        [self.child(0), self.child(1)]
    }

    pub fn prefix(&self, len: usize) -> Word {
        assert!(len <= self.len());
        Word {
            bits: self.bits >> (self.len() - len),
            len: len as u8,
        }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.len <= other.len && other.prefix(self.len()) == *self
    }

    pub fn ones(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn zeros(&self) -> u32 {
        self.len as u32 - self.ones()
    }

    /// All words of length `len` extending `self`, in order.
    pub fn descendants(&self, len: usize) -> impl Iterator<Item = Word> + '_ {
        assert!(len >= self.len() && len <= MAX_WORD_LEN as usize);
        let extra = len - self.len();
        (0..1u64 << extra).map(move |tail| Word {
            bits: (self.bits << extra) | tail,
            len: len as u8,
        })
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len) as usize;
        self.prefix(common)
            .bits
            .cmp(&other.prefix(common).bits)
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.letter(i) == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > MAX_WORD_LEN as usize {
            return Err(Error::InvalidWord(format!(
                "longer than {MAX_WORD_LEN} letters"
            )));
        }
        s.chars().try_fold(Word::EMPTY, |w, c| match c {
            '0' => Ok(w.child(0)),
            '1' => Ok(w.child(1)),
            _ => Err(Error::InvalidWord(format!("{s:?}"))),
        })
    }
}

/// `1 / (2^zeros 3^ones)`: the admissible values on the cylinder of `w` are
/// exactly the integer multiples of this.
pub fn lattice_spacing(w: &Word) -> Rational {
    let denom = Pow::pow(BigInt::from(2), w.zeros()) * Pow::pow(BigInt::from(3), w.ones());
    Rational::new(BigInt::one(), denom)
}

pub fn in_lattice(w: &Word, x: &Rational) -> bool {
    // the reduced denominator must divide 2^zeros 3^ones, which is below 3^64
    let Some(mut d) = x.denom().to_u128() else {
        return false;
    };
    let twos = d.trailing_zeros();
    if twos > w.zeros() {
        return false;
    }
    d >>= twos;
    for _ in 0..w.ones() {
        if d % 3 != 0 {
            break;
        }
        d /= 3;
    }
    d == 1
}

/// Checks that `words`, sorted, form a complete prefix code.
fn check_prefix_code<'a>(words: impl Iterator<Item = &'a Word>) -> Result<()> {
    let mut prev: Option<&Word> = None;
    // Kraft sum of a complete code is exactly 1
    let mut kraft = Rational::zero();
    for w in words {
        if let Some(p) = prev {
            if p.is_prefix_of(w) {
                return Err(Error::InvalidWord(format!("{p} is a prefix of {w}")));
            }
        }
        kraft += Rational::new(BigInt::one(), BigInt::one() << w.len());
        prev = Some(w);
    }
    if !kraft.is_one() {
        return Err(Error::InvalidWord(
            "cylinders do not cover the Cantor set".into(),
        ));
    }
    Ok(())
}

/// Leaf of a complete prefix code containing `w`, if `w` is at least as
/// long as that leaf.
fn leaf_above<'a, V>(map: &'a BTreeMap<Word, V>, w: &Word) -> Option<(&'a Word, &'a V)> {
    map.range(..=*w)
        .next_back()
        .filter(|(leaf, _)| leaf.is_prefix_of(w))
}

/// A locally constant function, given by its values on a complete prefix
/// code.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CylinderFunction {
    values: BTreeMap<Word, Rational>,
}

impl CylinderFunction {
    pub fn constant(x: Rational) -> Self {
        let mut values = BTreeMap::new();
        values.insert(Word::EMPTY, x);
        CylinderFunction { values }
    }

    pub fn from_leaves<I: IntoIterator<Item = (Word, Rational)>>(leaves: I) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (w, x) in leaves {
            if values.insert(w, x).is_some() {
                return Err(Error::InvalidWord(format!("{w} listed twice")));
            }
        }
        check_prefix_code(values.keys())?;
        Ok(CylinderFunction { values })
    }

    /// Values on all `2^depth` words of length `depth`, in order.
    pub fn uniform(depth: usize, values: Vec<Rational>) -> Result<Self> {
        if values.len() as u128 != 1u128 << depth {
            return Err(Error::InvalidWord(format!(
                "{} values for depth {depth}",
                values.len()
            )));
        }
        Self::from_leaves(Word::EMPTY.descendants(depth).zip(values))
    }

    /// Length of the longest leaf.
    pub fn depth(&self) -> usize {
        self.values.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.values.iter()
    }

    /// Value on the cylinder of `w`, or `None` if the function is not
    /// constant there.
    pub fn value_at(&self, w: &Word) -> Option<&Rational> {
        leaf_above(&self.values, w).map(|(_, x)| x)
    }

    /// Replaces the value on leaf `w`.
    pub fn set(&mut self, w: &Word, x: Rational) -> Result<()> {
        match self.values.get_mut(w) {
            Some(slot) => {
                *slot = x;
                Ok(())
            }
            None => Err(Error::InvalidWord(format!("{w} is not a leaf"))),
        }
    }

    /// The same function on a finer complete prefix code.
    pub fn refined_onto(&self, partition: &[Word]) -> Result<Self> {
        let leaves = partition
            .iter()
            .map(|w| {
                self.value_at(w)
                    .map(|x| (*w, x.clone()))
                    .ok_or_else(|| Error::InvalidWord(format!("{w} is coarser than a leaf")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_leaves(leaves)
    }

    /// The same function on every word of length `depth`.
    pub fn refined_to_depth(&self, depth: usize) -> Result<Self> {
        let partition: Vec<Word> = Word::EMPTY.descendants(depth).collect();
        self.refined_onto(&partition)
    }

    pub fn lattice_violations(&self) -> impl Iterator<Item = &Word> {
        self.values
            .iter()
            .filter(|(w, x)| !in_lattice(w, x))
            .map(|(w, _)| w)
    }
}

/// Coarsest complete prefix code on whose cylinders every function is
/// constant.
///
/// These are the leaves of all functions that no other leaf extends; in
/// lexicographic order a word's extensions come right after it.
pub fn common_partition(functions: &[CylinderFunction]) -> Vec<Word> {
    let mut words: Vec<Word> = functions
        .iter()
        .flat_map(|f| f.values.keys().copied())
        .collect();
    words.sort_unstable();
    words.dedup();
    let mut out = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        if words.get(i + 1).is_none_or(|next| !w.is_prefix_of(next)) {
            out.push(*w);
        }
    }
    out
}

/// Calls `visit(i, values)` with `(g_0(w), ..., g_N(w))` for the `i`-th
/// word `w` of a sorted partition refining every function, by a linear
/// merge over the leaves.
fn for_each_cell<'a>(
    functions: &'a [CylinderFunction],
    partition: &[Word],
    mut visit: impl FnMut(usize, &[&'a Rational]),
) {
    let mut cursors: Vec<_> = functions
        .iter()
        .map(|f| f.values.iter().peekable())
        .collect();
    let mut values = Vec::with_capacity(functions.len());
    for (i, w) in partition.iter().enumerate() {
        values.clear();
        for leaves in cursors.iter_mut() {
            while let Some((leaf, _)) = leaves.peek() {
                if leaf.is_prefix_of(w) {
                    break;
                }
                leaves.next();
            }
            let (_, x) = leaves.peek().expect("partition refines every function");
            values.push(*x);
        }
        visit(i, &values);
    }
}

fn cell_sequences(functions: &[CylinderFunction], partition: &[Word]) -> Vec<Vec<Rational>> {
    let mut sequences = Vec::with_capacity(partition.len());
    for_each_cell(functions, partition, |_, values| {
        sequences.push(values.iter().map(|&x| x.clone()).collect())
    });
    sequences
}

/// A function taking, on each cylinder, a lattice value strictly inside
/// the open interval given for the cylinder (or for its ancestor in
/// `intervals`).
///
/// A cylinder is split only when its lattice has no point strictly inside
/// the interval; the chosen point is the one nearest the midpoint, the
/// smaller one on a tie.
pub fn select_in_intervals(
    intervals: &BTreeMap<Word, (Rational, Rational)>,
    depth_cap: u32,
) -> Result<CylinderFunction> {
    check_prefix_code(intervals.keys())?;
    let mut leaves = Vec::new();
    for (word, (lo, hi)) in intervals {
        leaves.extend(select_in_cell(*word, lo, hi, depth_cap)?);
    }
    CylinderFunction::from_leaves(leaves)
}

/// Leaves below `word`, in order, with their selected values.
fn select_in_cell(
    word: Word,
    lo: &Rational,
    hi: &Rational,
    depth_cap: u32,
) -> Result<Vec<(Word, Rational)>> {
    if lo >= hi {
        return Err(Error::EmptyInterval);
    }
    let cap = depth_cap.min(MAX_WORD_LEN) as usize;
    let mid = (lo + hi) / Rational::from_integer(BigInt::from(2));
    let mut leaves = Vec::new();
    let mut stack = alloc::vec![word];
    while let Some(w) = stack.pop() {
        match nearest_multiple_in(lo, hi, &lattice_spacing(&w), &mid) {
            Some(x) => leaves.push((w, x)),
            None if w.len() >= cap => return Err(Error::DepthCapExceeded { cap: depth_cap }),
            None => {
                let [zero, one] = w.children();
                stack.push(one);
                stack.push(zero);
            }
        }
    }
    Ok(leaves)
}

/// Everything the certificate records about one cylinder of the common
/// partition.
#[derive(Clone, Debug, PartialEq)]
pub struct CellCertificate {
    pub word: Word,
    /// `(g_0(w), ..., g_N(w))`.
    pub sequence: Vec<Rational>,
    /// Interior certificate of `(g_0(w), ..., g_n(w))` for `n = 1..=N`.
    pub interior: Vec<Option<InteriorCertificate<Rational>>>,
    pub table: PascalTable<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingCertificate {
    /// `g_0, ..., g_N`.
    pub functions: Vec<CylinderFunction>,
    pub cells: Vec<CellCertificate>,
}

impl EmbeddingCertificate {
    /// Computes the per-cylinder data for `functions`, valid or not.
    pub fn assemble(functions: Vec<CylinderFunction>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidRequest("no functions".into()));
        }
        let n = functions.len() - 1;
        let partition = common_partition(&functions);
        let sequences = cell_sequences(&functions, &partition);
        let cells = partition
            .into_iter()
            .zip(sequences)
            .map(|(word, sequence)| {
                let interior = certify_prefixes(&sequence, DEFAULT_CAP_BITS)?;
                let table = build_table(&sequence, n)?;
                Ok(CellCertificate {
                    word,
                    sequence,
                    interior,
                    table,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EmbeddingCertificate { functions, cells })
    }

    /// `N`.
    pub fn order(&self) -> usize {
        self.functions.len() - 1
    }

    /// Length of the longest word of the common partition.
    pub fn depth(&self) -> usize {
        self.cells.iter().map(|c| c.word.len()).max().unwrap_or(0)
    }

    /// Same functions on every word of length `depth`.
    pub fn refined_to_depth(&self, depth: usize) -> Result<Self> {
        let functions = self
            .functions
            .iter()
            .map(|f| f.refined_to_depth(depth))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(functions)
    }

    pub fn verify(&self) -> bool {
        first_violation(self).is_none()
    }
}

/// `g_0, ..., g_N` with every `(g_0(x), ..., g_n(x))` interior.
pub fn build_embedding(n: usize, depth_cap: u32) -> Result<EmbeddingCertificate> {
    let mut functions = alloc::vec![CylinderFunction::constant(Rational::one())];
    // the common partition so far, with the values on each cylinder
    let mut cells = alloc::vec![(Word::EMPTY, alloc::vec![Rational::one()])];
    while functions.len() <= n {
        let mut leaves = Vec::new();
        let mut next_cells = Vec::with_capacity(cells.len());
        for (word, sequence) in cells {
            let t = MomentVector::new(sequence)?;
            let interval = extension_interval(&t)?;
            let chosen = select_in_cell(word, &interval.lo, &interval.hi, depth_cap)?;
            let sequence = t.into_entries();
            for (w, x) in chosen {
                let mut extended = sequence.clone();
                extended.push(x.clone());
                next_cells.push((w, extended));
                leaves.push((w, x));
            }
        }
        functions.push(merge_equal_siblings(CylinderFunction::from_leaves(leaves)?));
        cells = next_cells;
    }
    EmbeddingCertificate::assemble(functions)
}

/// Collapses sibling leaves with equal values, bottom up.
fn merge_equal_siblings(f: CylinderFunction) -> CylinderFunction {
    let mut values = f.values;
    let mut depth = values.keys().map(Word::len).max().unwrap_or(0);
    while depth > 0 {
        let parents: Vec<Word> = values
            .keys()
            .filter(|w| w.len() == depth && w.letter(depth - 1) == 0)
            .map(|w| w.prefix(depth - 1))
            .filter(|p| {
                values.contains_key(&p.child(0))
                    && values.get(&p.child(0)) == values.get(&p.child(1))
            })
            .collect();
        for p in parents {
            let x = values.remove(&p.child(0)).expect("checked above");
            values.remove(&p.child(1));
            values.insert(p, x);
        }
        depth -= 1;
    }
    CylinderFunction { values }
}

/// One way a certificate can fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingViolation {
    /// `g_0` is not the constant 1 on this cylinder.
    Unit {
        word: Word,
    },
    /// `g_n` takes a value off the lattice of its leaf `word`.
    Lattice {
        function: usize,
        word: Word,
    },
    /// `(g_0(w), ..., g_{length-1}(w))` is not interior.
    Interior {
        word: Word,
        length: usize,
    },
    /// `g_2(w) < g_1(w)` fails.
    NonTrivial {
        word: Word,
    },
    Recurrence {
        word: Word,
    },
    Positivity {
        word: Word,
        n: usize,
        k: usize,
    },
    /// Stored per-cylinder data disagrees with the functions.
    Certificate {
        word: Word,
    },
    /// The cells do not match the common partition of the functions.
    Partition,
}

impl EmbeddingViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            EmbeddingViolation::Unit { .. } => "unit",
            EmbeddingViolation::Lattice { .. } => "lattice",
            EmbeddingViolation::Interior { .. } => "interior",
            EmbeddingViolation::NonTrivial { .. } => "non-trivial",
            EmbeddingViolation::Recurrence { .. } => "recurrence",
            EmbeddingViolation::Positivity { .. } => "positivity",
            EmbeddingViolation::Certificate { .. } => "certificate",
            EmbeddingViolation::Partition => "partition",
        }
    }
}

impl fmt::Display for EmbeddingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = self.kind();
        match self {
            EmbeddingViolation::Unit { word }
            | EmbeddingViolation::NonTrivial { word }
            | EmbeddingViolation::Recurrence { word }
            | EmbeddingViolation::Certificate { word } => write!(f, "{kind} at '{word}'"),
            EmbeddingViolation::Lattice { function, word } => {
                write!(f, "{kind}: g{function} at '{word}'")
            }
            EmbeddingViolation::Interior { word, length } => {
                write!(f, "{kind}: prefix of length {length} at '{word}'")
            }
            EmbeddingViolation::Positivity { word, n, k } => {
                write!(f, "{kind}: g({n},{k}) at '{word}'")
            }
            EmbeddingViolation::Partition => f.write_str(kind),
        }
    }
}

/// Every violated certificate invariant; empty means the certificate holds.
///
/// All per-cylinder data is recomputed from the functions and compared
/// against what the certificate stores.
pub fn verify_embedding(cert: &EmbeddingCertificate) -> Vec<EmbeddingViolation> {
    check(cert, false)
}

/// Some violated invariant, found by running the cheap checks over every
/// cylinder before the expensive ones.
pub fn first_violation(cert: &EmbeddingCertificate) -> Option<EmbeddingViolation> {
    check(cert, true).into_iter().next()
}

fn check(cert: &EmbeddingCertificate, stop_early: bool) -> Vec<EmbeddingViolation> {
    let mut out = Vec::new();
    if cert.functions.is_empty() {
        out.push(EmbeddingViolation::Partition);
        return out;
    }
    let partition = common_partition(&cert.functions);
    if partition.len() != cert.cells.len()
        || partition.iter().zip(&cert.cells).any(|(w, c)| *w != c.word)
    {
        out.push(EmbeddingViolation::Partition);
        return out;
    }

    for (function, f) in cert.functions.iter().enumerate() {
        for word in f.lattice_violations() {
            out.push(EmbeddingViolation::Lattice {
                function,
                word: *word,
            });
        }
    }
    if stop_early && !out.is_empty() {
        return out;
    }

    let n = cert.order();
    // recomputed sequences of the cells whose stored one is wrong
    let mut fresh: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    for_each_cell(&cert.functions, &partition, |i, values| {
        let cell = &cert.cells[i];
        let word = cell.word;
        if !values[0].is_one() {
            out.push(EmbeddingViolation::Unit { word });
        }
        if n >= 2 && values[2] >= values[1] {
            out.push(EmbeddingViolation::NonTrivial { word });
        }
        if cell.sequence.len() != values.len()
            || cell.sequence.iter().zip(values).any(|(a, &b)| a != b)
        {
            fresh.insert(i, values.iter().map(|&x| x.clone()).collect());
            out.push(EmbeddingViolation::Certificate { word });
        } else if cell.interior.len() != n {
            out.push(EmbeddingViolation::Certificate { word });
        }
    });
    if stop_early && !out.is_empty() {
        return out;
    }
    let sequences: Vec<&Vec<Rational>> = cert
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| fresh.get(&i).unwrap_or(&c.sequence))
        .collect();

    for (cell, &sequence) in cert.cells.iter().zip(&sequences) {
        let word = cell.word;
        // a table equal to the recomputed one satisfies the recurrence
        if build_table(sequence, n).ok().as_ref() != Some(&cell.table) {
            if cell.table.depth() != n || !cell.table.satisfies_recurrence() {
                out.push(EmbeddingViolation::Recurrence { word });
                continue;
            }
            out.push(EmbeddingViolation::Certificate { word });
        }
        for (i, row) in cell.table.rows().iter().enumerate() {
            for (k, x) in row.iter().enumerate() {
                if x <= &Rational::zero() {
                    out.push(EmbeddingViolation::Positivity { word, n: i, k });
                }
            }
        }
    }
    if stop_early && !out.is_empty() {
        return out;
    }

    for (cell, &sequence) in cert.cells.iter().zip(&sequences) {
        let word = cell.word;
        let fresh = certify_prefixes(sequence, DEFAULT_CAP_BITS).unwrap_or_default();
        for (i, c) in fresh.iter().enumerate() {
            if c.is_none() {
                out.push(EmbeddingViolation::Interior {
                    word,
                    length: i + 2,
                });
            }
        }
        if cell.interior != fresh {
            out.push(EmbeddingViolation::Certificate { word });
        }
    }
    out
}

/// Leaves of every function, rendered `(n, word, value)`.
pub fn function_leaves(cert: &EmbeddingCertificate) -> Vec<(usize, String, Rational)> {
    cert.functions
        .iter()
        .enumerate()
        .flat_map(|(n, f)| {
            f.leaves()
                .map(move |(w, x)| (n, alloc::string::ToString::to_string(w), x.clone()))
        })
        .collect()
}
