//! Truncated tensor algebra over the alphabet `{1, ..., N}`.
//!
//! A [`TruncatedTensor`] stores grades `0..=L` densely. Grade `k` holds `N^k`
//! coefficients indexed by the base-`N` encoding of the word, so the layout is
//! lexicographic in the letters: `(1,1), (1,2), ..., (1,N), (2,1), ...`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A word `(i_1, ..., i_k)` over the letters `1..=N`. The empty word indexes
/// the constant term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    /// Builds a word from 1-based letters. Letters must be at least 1.
    pub fn new(letters: Vec<usize>) -> Result<Self> {
        if letters.iter().any(|&l| l == 0) {
            return Err(Error::InvalidArgument(
                "word letters are 1-based and must be >= 1".into(),
            ));
        }
        Ok(Word(letters))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of this word inside its grade array for alphabet size `n`,
    /// or `None` if some letter exceeds `n`.
    pub fn index(&self, n: usize) -> Option<usize> {
        let mut idx = 0usize;
        for &l in &self.0 {
            if l == 0 || l > n {
                return None;
            }
            idx = idx * n + (l - 1);
        }
        Some(idx)
    }

    /// Inverse of [`Word::index`].
    pub fn from_index(mut idx: usize, n: usize, len: usize) -> Self {
        let mut letters = vec![0; len];
        for slot in letters.iter_mut().rev() {
            *slot = idx % n + 1;
            idx /= n;
        }
        Word(letters)
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl From<&[usize]> for Word {
    /// Panics on a zero letter; use [`Word::new`] for untrusted input.
    fn from(letters: &[usize]) -> Self {
        Word::new(letters.to_vec()).expect("letters must be >= 1")
    }
}

impl<const K: usize> From<[usize; K]> for Word {
    fn from(letters: [usize; K]) -> Self {
        Word::from(&letters[..])
    }
}

/// Element of the tensor algebra truncated above grade `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct TruncatedTensor {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    level: usize,
    levels: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawTensor {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    level: usize,
    levels: Vec<Vec<f64>>,
}

impl TryFrom<RawTensor> for TruncatedTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        TruncatedTensor::from_levels(raw.n, raw.level, raw.levels)
    }
}

impl TruncatedTensor {
    pub fn zeros(n: usize, level: usize) -> Self {
        assert!(n >= 1, "alphabet size must be positive");
        let levels = (0..=level).map(|k| vec![0.0; n.pow(k as u32)]).collect();
        TruncatedTensor { n, level, levels }
    }

    /// The multiplicative identity `1`.
    pub fn unit(n: usize, level: usize) -> Self {
        let mut t = Self::zeros(n, level);
        t.levels[0][0] = 1.0;
        t
    }

    /// Tensor with `v` at grade 1 and zeros elsewhere.
    pub fn from_grade1(v: &[f64], level: usize) -> Self {
        let mut t = Self::zeros(v.len(), level);
        if level >= 1 {
            t.levels[1].copy_from_slice(v);
        }
        t
    }

    /// Validating constructor from raw grade arrays.
    pub fn from_levels(n: usize, level: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("alphabet size must be positive".into()));
        }
        if levels.len() != level + 1 {
            return Err(Error::Dimension(format!(
                "expected {} grades, got {}",
                level + 1,
                levels.len()
            )));
        }
        for (k, g) in levels.iter().enumerate() {
            let want = n.pow(k as u32);
            if g.len() != want {
                return Err(Error::Dimension(format!(
                    "grade {k} must have {want} entries, got {}",
                    g.len()
                )));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("grade {k} has non-finite entries")));
            }
        }
        Ok(TruncatedTensor { n, level, levels })
    }

    pub fn alphabet_size(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn grade(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn grade_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub(crate) fn levels_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.levels
    }

    pub fn constant(&self) -> f64 {
        self.levels[0][0]
    }

    /// Coefficient of `word`; `None` if the word is longer than `L` or uses
    /// letters outside the alphabet.
    pub fn coeff(&self, word: &Word) -> Option<f64> {
        if word.len() > self.level {
            return None;
        }
        word.index(self.n).map(|i| self.levels[word.len()][i])
    }

    pub fn set_coeff(&mut self, word: &Word, value: f64) -> Result<()> {
        let idx = (word.len() <= self.level)
            .then(|| word.index(self.n))
            .flatten()
            .ok_or_else(|| Error::Dimension(format!("word {word} not in tensor")))?;
        self.levels[word.len()][idx] = value;
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.level != other.level {
            return Err(Error::Dimension(format!(
                "operands have (N, L) = ({}, {}) and ({}, {})",
                self.n, self.level, other.n, other.level
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (g, h) in out.levels.iter_mut().zip(&other.levels) {
            g.iter_mut().zip(h).for_each(|(x, y)| *x += y);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (g, h) in out.levels.iter_mut().zip(&other.levels) {
            g.iter_mut().zip(h).for_each(|(x, y)| *x -= y);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.levels
            .iter_mut()
            .flatten()
            .for_each(|x| *x *= factor);
        out
    }

    /// Truncated product `self ⊗ other`.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zeros(self.n, self.level);
        for k in 0..=self.level {
            let dst = &mut out.levels[k];
            for p in 0..=k {
                outer_acc(dst, &self.levels[p], &other.levels[k - p], 1.0);
            }
        }
        Ok(out)
    }

    /// Truncated exponential series. Requires a zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if self.constant() != 0.0 {
            return Err(Error::Domain(format!(
                "exp requires zero constant term, got {}",
                self.constant()
            )));
        }
        let mut result = Self::unit(self.n, self.level);
        let mut term = Self::unit(self.n, self.level);
        for j in 1..=self.level {
            term = term.tensor_product(self)?.scale(1.0 / j as f64);
            result = result.add(&term)?;
        }
        Ok(result)
    }

    /// Truncated logarithm series. Requires constant term exactly 1.
    pub fn log(&self) -> Result<Self> {
        if self.constant() != 1.0 {
            return Err(Error::Domain(format!(
                "log requires constant term 1, got {}",
                self.constant()
            )));
        }
        let mut x = self.clone();
        x.levels[0][0] = 0.0;
        let mut result = Self::zeros(self.n, self.level);
        let mut power = x.clone();
        for j in 1..=self.level {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            result = result.add(&power.scale(sign / j as f64))?;
            power = power.tensor_product(&x)?;
        }
        Ok(result)
    }

    /// Largest absolute coefficient difference, grade by grade.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Iterates `(word, coefficient)` over all grades in storage order.
    pub fn iter_words(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        let n = self.n;
        self.levels.iter().enumerate().flat_map(move |(k, g)| {
            g.iter()
                .enumerate()
                .map(move |(i, &c)| (Word::from_index(i, n, k), c))
        })
    }
}

/// `dst += scale * (a ⊗ b)` for flat grade arrays.
pub(crate) fn outer_acc(dst: &mut [f64], a: &[f64], b: &[f64], scale: f64) {
    let bl = b.len();
    for (u, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let x = x * scale;
        let row = &mut dst[u * bl..(u + 1) * bl];
        for (o, &y) in row.iter_mut().zip(b) {
            *o += x * y;
        }
    }
}

/// Shuffle product of two words, duplicates retained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShuffleMultiset {
    words: Vec<Word>,
}

impl ShuffleMultiset {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Word> {
        self.words.iter()
    }

    /// Words in sorted order, for multiset comparison.
    pub fn sorted(&self) -> Vec<Word> {
        let mut w = self.words.clone();
        w.sort();
        w
    }
}

impl IntoIterator for ShuffleMultiset {
    type Item = Word;
    type IntoIter = std::vec::IntoIter<Word>;

    fn into_iter(self) -> Self::IntoIter {
        self.words.into_iter()
    }
}

/// All `(k, l)`-shuffles of the concatenation `i · j`.
///
/// Output order follows the colexicographic order of the positions taken by
/// the letters of `i`.
pub fn shuffle(i: &Word, j: &Word) -> ShuffleMultiset {
    let (k, l) = (i.len(), j.len());
    let words = colex_subsets(k + l, k)
        .into_iter()
        .map(|positions| {
            let mut out = Vec::with_capacity(k + l);
            let (mut a, mut b) = (0, 0);
            for p in 0..k + l {
                if a < k && positions[a] == p {
                    out.push(i.0[a]);
                    a += 1;
                } else {
                    out.push(j.0[b]);
                    b += 1;
                }
            }
            Word(out)
        })
        .collect();
    ShuffleMultiset { words }
}

/// `k`-subsets of `0..m` (each sorted ascending) in colex order.
fn colex_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if k > m {
        return Vec::new();
    }
    let mut out = colex_subsets(m - 1, k);
    for mut s in colex_subsets(m - 1, k - 1) {
        s.push(m - 1);
        out.push(s);
    }
    out
}

/// Lyndon words over `1..=n` of length at most `max_len`, sorted by length
/// and then lexicographically.
pub fn lyndon_words(n: usize, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 0 || max_len == 0 {
        return out;
    }
    // Duval's generator, 0-based letters.
    let mut w: Vec<usize> = vec![0];
    loop {
        out.push(Word(w.iter().map(|&l| l + 1).collect()));
        let m = w.len();
        while w.len() < max_len {
            w.push(w[w.len() - m]);
        }
        while w.last() == Some(&(n - 1)) {
            w.pop();
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng, n: usize, level: usize, constant: f64) -> TruncatedTensor {
        let mut t = TruncatedTensor::zeros(n, level);
        for k in 1..=level {
            for x in t.grade_mut(k) {
                *x = rng.random_range(-1.0..1.0);
            }
        }
        t.grade_mut(0)[0] = constant;
        t
    }

    #[test]
    fn unit_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_tensor(&mut rng, 3, 3, 0.7);
        let u = TruncatedTensor::unit(3, 3);
        assert!(a.tensor_product(&u).unwrap().max_abs_diff(&a).unwrap() < 1e-15);
        assert!(u.tensor_product(&a).unwrap().max_abs_diff(&a).unwrap() < 1e-15);
    }

    #[test]
    fn product_of_sparse_inputs() {
        let a = TruncatedTensor::unit(2, 2)
            .add(&TruncatedTensor::from_grade1(&[1.0, 0.0], 2))
            .unwrap();
        let b = TruncatedTensor::unit(2, 2)
            .add(&TruncatedTensor::from_grade1(&[0.0, 1.0], 2))
            .unwrap();
        let p = a.tensor_product(&b).unwrap();
        assert_eq!(p.grade(0), &[1.0]);
        assert_eq!(p.grade(1), &[1.0, 1.0]);
        assert_eq!(p.grade(2), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn product_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = random_tensor(&mut rng, 2, 4, 1.0);
            let b = random_tensor(&mut rng, 2, 4, 0.3);
            let c = random_tensor(&mut rng, 2, 4, -0.5);
            let left = a.tensor_product(&b).unwrap().tensor_product(&c).unwrap();
            let right = a.tensor_product(&b.tensor_product(&c).unwrap()).unwrap();
            assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        }
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = TruncatedTensor::unit(2, 2);
        assert!(matches!(
            a.tensor_product(&TruncatedTensor::unit(3, 2)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            a.tensor_product(&TruncatedTensor::unit(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn exp_of_zero_is_unit() {
        let z = TruncatedTensor::zeros(3, 4);
        assert_eq!(z.exp().unwrap(), TruncatedTensor::unit(3, 4));
    }

    #[test]
    fn exp_grade_two_is_half_square() {
        let d = [0.5, -2.0, 3.0];
        let e = TruncatedTensor::from_grade1(&d, 2).exp().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(e.grade(2)[i * 3 + j], d[i] * d[j] / 2.0);
            }
        }
    }

    #[test]
    fn exp_and_log_reject_bad_constant() {
        assert!(matches!(
            TruncatedTensor::unit(2, 2).exp(),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            TruncatedTensor::zeros(2, 2).log(),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn log_of_unit_is_zero() {
        assert_eq!(
            TruncatedTensor::unit(2, 3).log().unwrap(),
            TruncatedTensor::zeros(2, 3)
        );
    }

    #[test]
    fn exp_log_round_trip_on_group_like() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            // group-like: product of exponentials of random Lie-ish elements
            let mut s = TruncatedTensor::unit(3, 4);
            for _ in 0..4 {
                let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                s = s
                    .tensor_product(&TruncatedTensor::from_grade1(&d, 4).exp().unwrap())
                    .unwrap();
            }
            let back = s.log().unwrap().exp().unwrap();
            assert!(back.max_abs_diff(&s).unwrap() < 1e-12);
            let a = random_tensor(&mut rng, 3, 4, 0.0);
            assert!(a.exp().unwrap().log().unwrap().max_abs_diff(&a).unwrap() < 1e-12);
        }
    }

    #[test]
    fn log_of_exp_linear_is_displacement() {
        let d = [0.3, -1.1];
        let l = TruncatedTensor::from_grade1(&d, 5).exp().unwrap().log().unwrap();
        assert_eq!(l.grade(1), &d);
        for k in 2..=5 {
            assert!(l.grade(k).iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn word_index_round_trip() {
        let w = Word::from([2, 1, 3]);
        let idx = w.index(3).unwrap();
        assert_eq!(idx, 9 + 2);
        assert_eq!(Word::from_index(idx, 3, 3), w);
        assert_eq!(w.index(2), None);
        assert!(Word::new(vec![0, 1]).is_err());
    }

    #[test]
    fn shuffle_of_12_and_23() {
        let s = shuffle(&Word::from([1, 2]), &Word::from([2, 3]));
        let expected: Vec<Word> = [
            [1, 2, 2, 3],
            [1, 2, 2, 3],
            [2, 1, 2, 3],
            [1, 2, 3, 2],
            [2, 1, 3, 2],
            [2, 3, 1, 2],
        ]
        .into_iter()
        .map(Word::from)
        .collect();
        assert_eq!(s.words(), expected.as_slice());
    }

    #[test]
    fn shuffle_small_cases() {
        let j = Word::from([4, 1, 2]);
        assert_eq!(shuffle(&Word::empty(), &j).words(), &[j.clone()]);
        assert_eq!(shuffle(&j, &Word::empty()).words(), &[j]);
        assert_eq!(
            shuffle(&Word::from([1]), &Word::from([2])).sorted(),
            vec![Word::from([1, 2]), Word::from([2, 1])]
        );
    }

    #[test]
    fn lyndon_small_cases() {
        assert_eq!(lyndon_words(1, 5), vec![Word::from([1])]);
        assert_eq!(
            lyndon_words(2, 2),
            vec![Word::from([1]), Word::from([2]), Word::from([1, 2])]
        );
        assert!(lyndon_words(0, 3).is_empty());
        assert!(lyndon_words(3, 0).is_empty());
    }

    #[test]
    fn json_shape() {
        let t = TruncatedTensor::from_grade1(&[1.0, 2.0], 1);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"N":2,"L":1,"levels":[[0.0],[1.0,2.0]]}"#);
        let back: TruncatedTensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<TruncatedTensor>(r#"{"N":2,"L":1,"levels":[[0.0],[1.0]]}"#).is_err());
    }
}
