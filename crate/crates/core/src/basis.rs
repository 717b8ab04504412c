//! Multi-indices and noncommutative words: the index set of the monomial
//! basis z^alpha.
//!
//! Everything downstream (shift operators, expectation diagonals, kernel
//! evaluations) is driven by the decompositions gamma + beta = alpha, which
//! for commutative indices means componentwise subtraction and for words
//! means prefix/suffix splitting.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A commutative multi-index or a noncommutative word over the alphabet
/// `{1..d}`. The empty monomial (all-zero exponents, empty word) is the
/// unique degree-0 element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Monomial {
    /// Exponent vector of length d.
    Commutative(Vec<u32>),
    /// Letter sequence; letters are 1-based and bounded by `alphabet`.
    Word { alphabet: u8, letters: Vec<u8> },
}

impl Monomial {
    /// The degree-0 commutative monomial in `d` variables.
    pub fn one_commutative(d: usize) -> Monomial {
        Monomial::Commutative(vec![0; d])
    }

    /// The empty word over `{1..d}`.
    pub fn one_word(d: usize) -> Monomial {
        Monomial::Word { alphabet: d as u8, letters: Vec::new() }
    }

    /// The i-th coordinate variable (0-based), as a degree-1 monomial.
    pub fn variable(commutative: bool, d: usize, i: usize) -> Result<Monomial> {
        if i >= d {
            return Err(Error::InvalidArgument(format!(
                "variable index {i} out of range for d = {d}"
            )));
        }
        Ok(if commutative {
            let mut e = vec![0u32; d];
            e[i] = 1;
            Monomial::Commutative(e)
        } else {
            Monomial::Word { alphabet: d as u8, letters: vec![i as u8 + 1] }
        })
    }

    pub fn is_commutative(&self) -> bool {
        matches!(self, Monomial::Commutative(_))
    }

    /// Number of variables this monomial lives over.
    pub fn variable_count(&self) -> usize {
        match self {
            Monomial::Commutative(e) => e.len(),
            Monomial::Word { alphabet, .. } => *alphabet as usize,
        }
    }

    /// Sum of exponents, or the word length.
    pub fn degree(&self) -> usize {
        match self {
            Monomial::Commutative(e) => e.iter().map(|&x| x as usize).sum(),
            Monomial::Word { letters, .. } => letters.len(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.degree() == 0
    }

    fn same_shape(&self, other: &Monomial) -> bool {
        match (self, other) {
            (Monomial::Commutative(a), Monomial::Commutative(b)) => a.len() == b.len(),
            (Monomial::Word { alphabet: a, .. }, Monomial::Word { alphabet: b, .. }) => a == b,
            _ => false,
        }
    }

    /// Product of monomials: exponentwise sum, or word concatenation
    /// `self . other` (in that order; words do not commute).
    pub fn combine(&self, other: &Monomial) -> Result<Monomial> {
        if !self.same_shape(other) {
            return Err(Error::InvalidArgument(format!(
                "cannot combine {self} with {other}: kind or variable count differs"
            )));
        }
        Ok(match (self, other) {
            (Monomial::Commutative(a), Monomial::Commutative(b)) => {
                Monomial::Commutative(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Monomial::Word { alphabet, letters: a }, Monomial::Word { letters: b, .. }) => {
                let mut letters = a.clone();
                letters.extend_from_slice(b);
                Monomial::Word { alphabet: *alphabet, letters }
            }
            _ => unreachable!(),
        })
    }

    /// All ordered factorizations `(gamma, beta)` with `gamma . beta = self`:
    /// componentwise splittings for multi-indices, prefix/suffix cuts for
    /// words. Both trivial splits are included, so a commutative index has
    /// `prod(alpha_i + 1)` factorizations and a word of length L has L + 1.
    pub fn decompositions(&self) -> Vec<(Monomial, Monomial)> {
        match self {
            Monomial::Commutative(e) => {
                let d = e.len();
                let mut out = Vec::new();
                let mut gamma = vec![0u32; d];
                loop {
                    let beta: Vec<u32> = e.iter().zip(&gamma).map(|(a, g)| a - g).collect();
                    out.push((Monomial::Commutative(gamma.clone()), Monomial::Commutative(beta)));
                    // mixed-radix increment of gamma below e
                    let mut k = 0;
                    loop {
                        if k == d {
                            return out;
                        }
                        if gamma[k] < e[k] {
                            gamma[k] += 1;
                            break;
                        }
                        gamma[k] = 0;
                        k += 1;
                    }
                }
            }
            Monomial::Word { alphabet, letters } => (0..=letters.len())
                .map(|k| {
                    (
                        Monomial::Word { alphabet: *alphabet, letters: letters[..k].to_vec() },
                        Monomial::Word { alphabet: *alphabet, letters: letters[k..].to_vec() },
                    )
                })
                .collect(),
        }
    }

    /// If `self = gamma . beta` for some `beta`, return it. For words this
    /// asks whether `gamma` is a prefix; for multi-indices, whether it is
    /// componentwise dominated.
    pub fn left_quotient(&self, gamma: &Monomial) -> Option<Monomial> {
        if !self.same_shape(gamma) {
            return None;
        }
        match (self, gamma) {
            (Monomial::Commutative(a), Monomial::Commutative(g)) => {
                if a.iter().zip(g).all(|(x, y)| x >= y) {
                    Some(Monomial::Commutative(a.iter().zip(g).map(|(x, y)| x - y).collect()))
                } else {
                    None
                }
            }
            (Monomial::Word { alphabet, letters: a }, Monomial::Word { letters: g, .. }) => {
                if a.len() >= g.len() && &a[..g.len()] == g.as_slice() {
                    Some(Monomial::Word { alphabet: *alphabet, letters: a[g.len()..].to_vec() })
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Parse the text form: commutative `"(2,0,1)"`, word `"121"` with the
    /// empty word written `"e"`. `d` fixes the expected variable count.
    pub fn parse(text: &str, commutative: bool, d: usize) -> Result<Monomial> {
        let text = text.trim();
        if commutative {
            let inner = text
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("expected \"(a,b,...)\", got {text:?}"))
                })?;
            let exps: Vec<u32> = inner
                .split(',')
                .map(|p| {
                    p.trim().parse::<u32>().map_err(|_| {
                        Error::InvalidArgument(format!("bad exponent {p:?} in {text:?}"))
                    })
                })
                .collect::<Result<_>>()?;
            if exps.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "expected {d} exponents, got {} in {text:?}",
                    exps.len()
                )));
            }
            Ok(Monomial::Commutative(exps))
        } else {
            if d > 9 {
                return Err(Error::InvalidArgument(
                    "word text form only supports alphabets up to 9 letters".into(),
                ));
            }
            if text == "e" {
                return Ok(Monomial::one_word(d));
            }
            let letters: Vec<u8> = text
                .chars()
                .map(|c| {
                    let v = c.to_digit(10).ok_or_else(|| {
                        Error::InvalidArgument(format!("bad letter {c:?} in word {text:?}"))
                    })?;
                    if v == 0 || v as usize > d {
                        return Err(Error::InvalidArgument(format!(
                            "letter {v} out of alphabet 1..{d} in {text:?}"
                        )));
                    }
                    Ok(v as u8)
                })
                .collect::<Result<_>>()?;
            Ok(Monomial::Word { alphabet: d as u8, letters })
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Monomial::Commutative(e) => {
                write!(f, "(")?;
                for (i, x) in e.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Monomial::Word { letters, .. } => {
                if letters.is_empty() {
                    write!(f, "e")
                } else {
                    for l in letters {
                        write!(f, "{l}")?;
                    }
                    Ok(())
                }
            }
        }
    }
}

/// Graded order, matching the enumeration: by degree first, then within a
/// degree by descending exponent vector (so x^2 precedes xy precedes y^2)
/// for multi-indices, and ascending letter sequence for words.
impl Ord for Monomial {
    fn cmp(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| match (self, other) {
            (Monomial::Commutative(a), Monomial::Commutative(b)) => b.cmp(a),
            (Monomial::Word { letters: a, .. }, Monomial::Word { letters: b, .. }) => a.cmp(b),
            (Monomial::Commutative(_), Monomial::Word { .. }) => Ordering::Less,
            (Monomial::Word { .. }, Monomial::Commutative(_)) => Ordering::Greater,
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Monomial) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Enumerate all monomials of degree <= `max_degree` in graded order. The
/// position in this sequence is the canonical coordinate index, and
/// restricting to degree <= N-1 is a prefix of the sequence.
pub fn enumerate(commutative: bool, d: usize, max_degree: usize) -> Result<Vec<Monomial>> {
    if d == 0 {
        return Err(Error::InvalidArgument("variable count d must be >= 1".into()));
    }
    if !commutative && d > u8::MAX as usize {
        return Err(Error::InvalidArgument("word alphabet too large".into()));
    }
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        if commutative {
            push_compositions(d, deg, &mut Vec::with_capacity(d), &mut out);
        } else {
            let mut letters = vec![1u8; deg];
            loop {
                out.push(Monomial::Word { alphabet: d as u8, letters: letters.clone() });
                // odometer over 1..=d, most significant letter first
                let mut k = deg;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    if (letters[k] as usize) < d {
                        letters[k] += 1;
                        break;
                    }
                    letters[k] = 1;
                    if k == 0 {
                        break;
                    }
                }
                if letters.iter().all(|&l| l == 1) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn push_compositions(d: usize, total: usize, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if prefix.len() == d - 1 {
        prefix.push(total as u32);
        out.push(Monomial::Commutative(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u32);
        push_compositions(d, total - first, prefix, out);
        prefix.pop();
    }
}

/// The degree-<= N coordinate basis: the graded enumeration plus an index
/// for constant-time lookups.
#[derive(Clone, Debug)]
pub struct Basis {
    commutative: bool,
    d: usize,
    max_degree: usize,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl Basis {
    pub fn new(commutative: bool, d: usize, max_degree: usize) -> Result<Basis> {
        let monomials = enumerate(commutative, d, max_degree)?;
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Ok(Basis { commutative, d, max_degree, monomials, index })
    }

    pub fn commutative(&self) -> bool {
        self.commutative
    }

    pub fn variable_count(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of basis monomials; at least 1, since the empty monomial is
    /// always present.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn monomial(&self, index: usize) -> &Monomial {
        &self.monomials[index]
    }

    /// Coordinate index of `m`, the inverse of `monomials()[i]`.
    pub fn index_of(&self, m: &Monomial) -> Result<usize> {
        if m.is_commutative() != self.commutative || m.variable_count() != self.d {
            return Err(Error::InvalidArgument(format!(
                "monomial {m} does not belong to this basis"
            )));
        }
        if m.degree() > self.max_degree {
            return Err(Error::OutOfRange(format!(
                "degree {} exceeds truncation {}",
                m.degree(),
                self.max_degree
            )));
        }
        Ok(self.index[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(e: &[u32]) -> Monomial {
        Monomial::Commutative(e.to_vec())
    }

    fn w(d: u8, letters: &[u8]) -> Monomial {
        Monomial::Word { alphabet: d, letters: letters.to_vec() }
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate(true, 2, 2).unwrap().len(), 6);
        assert_eq!(enumerate(false, 2, 2).unwrap().len(), 7); // 1 + 2 + 4
        let one_var: Vec<_> = enumerate(true, 1, 3).unwrap();
        assert_eq!(one_var, vec![c(&[0]), c(&[1]), c(&[2]), c(&[3])]);
        assert!(enumerate(true, 0, 3).is_err());
    }

    #[test]
    fn enumerate_graded_lex_order() {
        let b = enumerate(true, 2, 2).unwrap();
        assert_eq!(b, vec![c(&[0, 0]), c(&[1, 0]), c(&[0, 1]), c(&[2, 0]), c(&[1, 1]), c(&[0, 2])]);
        let words = enumerate(false, 2, 2).unwrap();
        assert_eq!(
            words,
            vec![w(2, &[]), w(2, &[1]), w(2, &[2]), w(2, &[1, 1]), w(2, &[1, 2]), w(2, &[2, 1]), w(2, &[2, 2])]
        );
    }

    #[test]
    fn combine_examples() {
        assert_eq!(c(&[1, 0]).combine(&c(&[0, 1])).unwrap(), c(&[1, 1]));
        // words do not commute
        let xy = w(2, &[1]).combine(&w(2, &[2])).unwrap();
        let yx = w(2, &[2]).combine(&w(2, &[1])).unwrap();
        assert_eq!(xy, w(2, &[1, 2]));
        assert_eq!(yx, w(2, &[2, 1]));
        assert_ne!(xy, yx);
        // identity
        let m = c(&[3, 1]);
        assert_eq!(m.combine(&Monomial::one_commutative(2)).unwrap(), m);
        // kind mismatch
        assert!(c(&[1]).combine(&w(1, &[1])).is_err());
        assert!(w(2, &[1]).combine(&w(3, &[1])).is_err());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(c(&[1, 1]).decompositions().len(), 4);
        let splits = w(2, &[1, 2]).decompositions();
        assert_eq!(
            splits,
            vec![
                (w(2, &[]), w(2, &[1, 2])),
                (w(2, &[1]), w(2, &[2])),
                (w(2, &[1, 2]), w(2, &[])),
            ]
        );
        let two_zero: Vec<_> = c(&[2, 0]).decompositions();
        assert_eq!(
            two_zero,
            vec![(c(&[0, 0]), c(&[2, 0])), (c(&[1, 0]), c(&[1, 0])), (c(&[2, 0]), c(&[0, 0]))]
        );
    }

    #[test]
    fn decompositions_recombine_and_count() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = 1 + rng.random_range(0..3usize);
            let alpha = c(&(0..d).map(|_| rng.random_range(0..4u32)).collect::<Vec<_>>());
            let decs = alpha.decompositions();
            let expected: usize = match &alpha {
                Monomial::Commutative(e) => e.iter().map(|&x| x as usize + 1).product(),
                _ => unreachable!(),
            };
            assert_eq!(decs.len(), expected);
            for (g, b) in &decs {
                assert_eq!(g.combine(b).unwrap(), alpha);
            }
        }
        for _ in 0..50 {
            let len = rng.random_range(0..6usize);
            let word = w(2, &(0..len).map(|_| rng.random_range(1..=2u8)).collect::<Vec<_>>());
            let decs = word.decompositions();
            assert_eq!(decs.len(), len + 1);
            for (g, b) in &decs {
                assert_eq!(g.combine(b).unwrap(), word);
            }
        }
    }

    #[test]
    fn index_roundtrip() {
        let basis = Basis::new(true, 2, 2).unwrap();
        assert_eq!(basis.index_of(&Monomial::one_commutative(2)).unwrap(), 0);
        assert_eq!(basis.index_of(&c(&[0, 2])).unwrap(), 5);
        for (i, m) in basis.monomials().iter().enumerate() {
            assert_eq!(basis.index_of(m).unwrap(), i);
        }
        let single = Basis::new(true, 1, 7).unwrap();
        for n in 0..=7u32 {
            assert_eq!(single.index_of(&c(&[n])).unwrap(), n as usize);
        }
        assert!(matches!(basis.index_of(&c(&[3, 0])), Err(Error::OutOfRange(_))));
        // words round-trip too
        let wb = Basis::new(false, 2, 4).unwrap();
        for (i, m) in wb.monomials().iter().enumerate() {
            assert_eq!(wb.index_of(m).unwrap(), i);
        }
    }

    #[test]
    fn left_quotient_matches_decompositions() {
        let alpha = c(&[2, 1]);
        for (g, b) in alpha.decompositions() {
            assert_eq!(alpha.left_quotient(&g).unwrap(), b);
        }
        assert!(alpha.left_quotient(&c(&[3, 0])).is_none());
        let word = w(2, &[1, 2, 1]);
        assert_eq!(word.left_quotient(&w(2, &[1, 2])).unwrap(), w(2, &[1]));
        assert!(word.left_quotient(&w(2, &[2])).is_none());
    }

    #[test]
    fn text_form_roundtrip() {
        for m in enumerate(true, 3, 3).unwrap() {
            assert_eq!(Monomial::parse(&m.to_string(), true, 3).unwrap(), m);
        }
        for m in enumerate(false, 2, 3).unwrap() {
            assert_eq!(Monomial::parse(&m.to_string(), false, 2).unwrap(), m);
        }
        assert_eq!(Monomial::parse("e", false, 2).unwrap(), Monomial::one_word(2));
        assert!(Monomial::parse("(1,2)", true, 3).is_err());
        assert!(Monomial::parse("13", false, 2).is_err());
        assert!(Monomial::parse("x", true, 1).is_err());
    }
}
