//! The length operad: tuples of nonnegative rationals with additive-shift
//! splicing, color words over `{a, b}`, and the interval schedule that the
//! Moore-style homotopy-pullback compositions reduce to on the length
//! coordinate.

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LenError {
    #[error("slot {index} out of range 1..={arity}")]
    Index { index: usize, arity: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("negative length")]
    Negative,
}

/// An arity-`n` element: `n` nonnegative lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthTuple(pub Vec<BigRational>);

/// A letter of the two-colored alphabet, ordered by `b < a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Color {
    B,
    A,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorWord(pub Vec<Color>);

impl ColorWord {
    pub fn all_a(n: usize) -> Self {
        ColorWord(vec![Color::A; n])
    }

    pub fn all_b(n: usize) -> Self {
        ColorWord(vec![Color::B; n])
    }

    /// Componentwise comparison in the product order; `None` when
    /// incomparable.
    pub fn compare(&self, other: &ColorWord) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        if self.0.len() != other.0.len() {
            return None;
        }
        let mut ord = Equal;
        for (x, y) in self.0.iter().zip(other.0.iter()) {
            let c = x.cmp(y);
            match (ord, c) {
                (Equal, c) => ord = c,
                (Less, Greater) | (Greater, Less) => return None,
                _ => {}
            }
        }
        Some(ord)
    }
}

impl LengthTuple {
    pub fn new(ls: Vec<BigRational>) -> Result<Self, LenError> {
        if ls.iter().any(|l| l < &BigRational::zero()) {
            return Err(LenError::Negative);
        }
        Ok(LengthTuple(ls))
    }

    pub fn unit() -> Self {
        LengthTuple(vec![BigRational::zero()])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Splice with additive shift: the inner lengths all gain `l_i`.
    pub fn compose(&self, i: usize, other: &LengthTuple) -> Result<LengthTuple, LenError> {
        let n = self.arity();
        if i < 1 || i > n {
            return Err(LenError::Index { index: i, arity: n });
        }
        let li = &self.0[i - 1];
        let mut out = Vec::with_capacity(n + other.arity() - 1);
        out.extend_from_slice(&self.0[..i - 1]);
        for l in &other.0 {
            out.push(li + l);
        }
        out.extend_from_slice(&self.0[i..]);
        Ok(LengthTuple(out))
    }

    /// `l(c)`: zero on the all-`a` word, otherwise the largest length at a
    /// `b` position.
    pub fn l_of(&self, word: &ColorWord) -> Result<BigRational, LenError> {
        if word.0.len() != self.arity() {
            return Err(LenError::LengthMismatch(word.0.len(), self.arity()));
        }
        Ok(self
            .0
            .iter()
            .zip(word.0.iter())
            .filter(|(_, c)| **c == Color::B)
            .map(|(l, _)| l.clone())
            .max()
            .unwrap_or_else(BigRational::zero))
    }

    /// `l_0`: the largest length.
    pub fn l_zero(&self) -> BigRational {
        self.0.iter().cloned().max().unwrap_or_else(BigRational::zero)
    }

    /// The interval schedule: distinct positive levels `L_1 < ... < L_N`,
    /// the minimal color word realizing each level, and the tiling of
    /// `[0, l_0]` where the piece ending at `L_j` carries the previous
    /// level's word (the all-`a` word first).
    pub fn decomposition(&self) -> Decomposition {
        let n = self.arity();
        let mut levels: Vec<BigRational> = self
            .0
            .iter()
            .filter(|l| !l.is_zero())
            .cloned()
            .collect();
        levels.sort();
        levels.dedup();
        let word_at = |level: &BigRational| -> ColorWord {
            ColorWord(
                self.0
                    .iter()
                    .map(|l| if l <= level { Color::B } else { Color::A })
                    .collect(),
            )
        };
        let words: Vec<ColorWord> = levels.iter().map(word_at).collect();
        let mut intervals = Vec::new();
        let mut prev = BigRational::zero();
        for (j, level) in levels.iter().enumerate() {
            let word = if j == 0 {
                ColorWord::all_a(n)
            } else {
                words[j - 1].clone()
            };
            intervals.push((prev.clone(), level.clone(), word));
            prev = level.clone();
        }
        Decomposition {
            levels,
            words,
            intervals,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self.0.iter().map(|l| l.to_string()).collect::<Vec<_>>())
    }
}

/// Output of [`LengthTuple::decomposition`].
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub levels: Vec<BigRational>,
    /// `words[j]` is the minimal word whose level value is `levels[j]`.
    pub words: Vec<ColorWord>,
    /// `(from, to, word)` pieces tiling `[0, l_0]`.
    pub intervals: Vec<(BigRational, BigRational, ColorWord)>,
}
