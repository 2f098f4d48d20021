//! The squared alphabet: singletons and unordered pairs of base symbols.

use crate::csp::{Alphabet, Symbol};
use crate::error::{Error, Result};

/// `{lo}` when `lo == hi`, otherwise the pair `{lo, hi}` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SqSymbol {
    lo: Symbol,
    hi: Symbol,
}

impl SqSymbol {
    pub fn single(a: Symbol) -> Self {
        SqSymbol { lo: a, hi: a }
    }

    pub fn pair(a: Symbol, b: Symbol) -> Self {
        if a <= b {
            SqSymbol { lo: a, hi: b }
        } else {
            SqSymbol { lo: b, hi: a }
        }
    }

    pub fn is_single(self) -> bool {
        self.lo == self.hi
    }

    pub fn len(self) -> usize {
        if self.is_single() {
            1
        } else {
            2
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn lo(self) -> Symbol {
        self.lo
    }

    pub fn hi(self) -> Symbol {
        self.hi
    }

    /// Members in alphabet order.
    pub fn members(self) -> impl Iterator<Item = Symbol> {
        let second = (!self.is_single()).then_some(self.hi);
        std::iter::once(self.lo).chain(second)
    }

    pub fn contains(self, a: Symbol) -> bool {
        self.lo == a || self.hi == a
    }

    pub fn is_subset(self, other: SqSymbol) -> bool {
        other.contains(self.lo) && other.contains(self.hi)
    }

    pub fn union_with(self, other: SqSymbol) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.members().chain(other.members()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Containment in either direction.
pub fn consistent(a: SqSymbol, b: SqSymbol) -> bool {
    a.is_subset(b) || b.is_subset(a)
}

/// All singletons (in base order) followed by all pairs (lexicographic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquaredAlphabet {
    base: Alphabet,
    symbols: Vec<SqSymbol>,
}

impl SquaredAlphabet {
    pub fn new(base: &Alphabet) -> Self {
        let w = base.len() as u32;
        let mut symbols: Vec<SqSymbol> = (0..w).map(|a| SqSymbol::single(Symbol(a))).collect();
        for a in 0..w {
            for b in a + 1..w {
                symbols.push(SqSymbol::pair(Symbol(a), Symbol(b)));
            }
        }
        SquaredAlphabet { base: base.clone(), symbols }
    }

    pub fn base(&self) -> &Alphabet {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[SqSymbol] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> SqSymbol {
        self.symbols[i]
    }

    pub fn index_of(&self, s: SqSymbol) -> Result<usize> {
        let w = self.base.len() as u32;
        if s.hi.0 >= w {
            return Err(Error::validation(format!("squared symbol {s:?} is foreign to this alphabet")));
        }
        if s.is_single() {
            return Ok(s.lo.index());
        }
        // Pairs (a, b) for a < b are laid out row by row after the w singletons.
        let (a, b, w) = (s.lo.0 as usize, s.hi.0 as usize, w as usize);
        let before_row = a * w - a * (a + 1) / 2;
        Ok(w + before_row + (b - a - 1))
    }

    /// Consistency of two symbols, rejecting symbols from a larger alphabet.
    pub fn consistent(&self, a: SqSymbol, b: SqSymbol) -> Result<bool> {
        self.index_of(a)?;
        self.index_of(b)?;
        Ok(consistent(a, b))
    }

    pub fn token(&self, s: SqSymbol) -> String {
        if s.is_single() {
            format!("{{{}}}", self.base.token(s.lo))
        } else {
            format!("{{{},{}}}", self.base.token(s.lo), self.base.token(s.hi))
        }
    }
}

pub fn square_alphabet(base: &Alphabet) -> SquaredAlphabet {
    SquaredAlphabet::new(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_indices() {
        for w in 1..8 {
            let sq = square_alphabet(&Alphabet::numeric(w));
            assert_eq!(sq.len(), w * (w + 1) / 2);
            for (i, &s) in sq.symbols().iter().enumerate() {
                assert_eq!(sq.index_of(s).unwrap(), i);
                assert!(s.len() == 1 || s.len() == 2);
            }
        }
    }

    #[test]
    fn consistency_table() {
        let (a, b, c) = (Symbol(0), Symbol(1), Symbol(2));
        let sq = square_alphabet(&Alphabet::new(["a", "b", "c"]).unwrap());
        assert!(sq.consistent(SqSymbol::single(a), SqSymbol::pair(a, b)).unwrap());
        assert!(!sq.consistent(SqSymbol::single(a), SqSymbol::single(b)).unwrap());
        assert!(!sq.consistent(SqSymbol::pair(a, b), SqSymbol::pair(b, c)).unwrap());
        assert!(sq.consistent(SqSymbol::pair(b, a), SqSymbol::pair(a, b)).unwrap());
        assert!(sq.consistent(SqSymbol::single(a), SqSymbol::single(Symbol(5))).is_err());
        assert_eq!(sq.token(SqSymbol::pair(c, a)), "{a,c}");
    }
}
