//! Symbolic algebra on N-qubit Pauli strings.
//!
//! A [`PauliString`] stores its axes as a pair of bit masks (`x`, `z`), with
//! bit `q` describing qubit `q`:
//!
//! | axis | x | z |
//! |------|---|---|
//! | I    | 0 | 0 |
//! | X    | 1 | 0 |
//! | Y    | 1 | 1 |
//! | Z    | 0 | 1 |
//!
//! Strings order lexicographically on their axis letters read from qubit 0
//! with `I < X < Y < Z`, which is also the iteration order of [`PauliSum`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped after combination.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

/// Hard limit imposed by the bit-mask representation.
pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// A power of `i`: one of `1, i, -1, -i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u32 {
        self.0 as u32
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A tensor product of single-qubit Pauli operators on `n_qubits` qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        PauliString {
            n_qubits: n_qubits as u8,
            x: 0,
            z: 0,
        }
    }

    /// Builds a string from raw masks. Bits above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        let valid = low_mask(n_qubits);
        assert!(x & !valid == 0 && z & !valid == 0, "mask bits beyond qubit count");
        PauliString {
            n_qubits: n_qubits as u8,
            x,
            z,
        }
    }

    pub fn from_axes(axes: &[Pauli]) -> Self {
        let mut p = PauliString::identity(axes.len());
        for (q, a) in axes.iter().enumerate() {
            p.set(q, *a);
        }
        p
    }

    /// Identity everywhere except the listed `(qubit, axis)` pairs.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut p = PauliString::identity(n_qubits);
        for &(q, a) in ops {
            assert!(q < n_qubits, "qubit {q} out of range for {n_qubits} qubits");
            p.set(q, a);
        }
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Qubits carrying a non-identity axis.
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support_mask().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, axis: Pauli) {
        assert!(qubit < self.n_qubits(), "qubit {qubit} out of range");
        let (xb, zb) = axis.bits();
        let bit = 1u64 << qubit;
        self.x = (self.x & !bit) | if xb { bit } else { 0 };
        self.z = (self.z & !bit) | if zb { bit } else { 0 };
    }

    pub fn axes(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n_qubits()).map(move |q| self.get(q))
    }

    /// Copy with every `Z` replaced by `I`.
    pub fn without_z(&self) -> Self {
        let z_only = self.z & !self.x;
        PauliString {
            n_qubits: self.n_qubits,
            x: self.x,
            z: self.z & !z_only,
        }
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits(),
                right: other.n_qubits(),
            });
        }
        Ok(())
    }

    /// Operator product `self · other = phase · product`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_len(other)?;
        Ok(self.multiply_unchecked(other))
    }

    pub(crate) fn multiply_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        // Write each string as i^{|x&z|} X^x Z^z. Moving Z^{z1} past X^{x2}
        // costs (-1)^{|z1 & x2|}; the product's own Y count is then removed.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones() + 3 * (x & z).count_ones();
        (
            Phase::from_power(k),
            PauliString {
                n_qubits: self.n_qubits,
                x,
                z,
            },
        )
    }

    /// Number of positions where both axes are non-identity and differ.
    fn anticommuting_positions(&self, other: &PauliString) -> u32 {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones()
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.anticommuting_positions(other).is_multiple_of(2))
    }

    pub fn qubit_wise_commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.qwc_unchecked(other))
    }

    pub(crate) fn qwc_unchecked(&self, other: &PauliString) -> bool {
        self.anticommuting_positions(other) == 0
    }

    /// True when every non-identity axis of `self` equals the basis axis at
    /// that position, i.e. `self` is diagonal after rotating into `basis`.
    pub fn diagonal_in(&self, basis: &PauliString) -> bool {
        let s = self.support_mask();
        (self.x ^ basis.x) & s == 0 && (self.z ^ basis.z) & s == 0
    }

    fn letter_code(&self, q: usize) -> u8 {
        (((self.x >> q) & 1) + ((self.z >> q) & 1) * 2) as u8
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        // I=0, X=1, Y=3, Z=2 in letter_code; remap so I<X<Y<Z.
        const RANK: [u8; 4] = [0, 1, 3, 2];
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            for q in 0..self.n_qubits() {
                let a = RANK[self.letter_code(q) as usize];
                let b = RANK[other.letter_code(q) as usize];
                match a.cmp(&b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.axes() {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes: Option<Vec<Pauli>> = s.chars().map(Pauli::from_char).collect();
        match axes {
            Some(axes) if !axes.is_empty() && axes.len() <= MAX_QUBITS => Ok(PauliString::from_axes(&axes)),
            _ => Err(Error::InvalidPauli(s.to_string())),
        }
    }
}

impl serde::Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Complex-weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n_qubits));
        PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut sum = PauliSum::new(n_qubits);
        for (p, c) in terms {
            sum.add_term(p, c)?;
        }
        sum.prune();
        Ok(sum)
    }

    /// Parses `(string, coefficient)` pairs, e.g. `[("XY", c)]`.
    pub fn from_labels(terms: &[(&str, Complex64)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidPauli(String::new()))?;
        let n = first.0.len();
        let parsed = terms
            .iter()
            .map(|(s, c)| s.parse::<PauliString>().map(|p| (p, *c)))
            .collect::<Result<Vec<_>>>()?;
        PauliSum::from_terms(n, parsed)
    }

    pub fn single(p: PauliString, c: Complex64) -> Self {
        let mut s = PauliSum::new(p.n_qubits());
        s.terms.insert(p, c);
        s.prune();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.coefficient(&PauliString::identity(self.n_qubits))
    }

    /// Accumulates `c · p`. Call [`PauliSum::prune`] after a batch of additions.
    pub fn add_term(&mut self, p: PauliString, c: Complex64) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: p.n_qubits(),
            });
        }
        *self.terms.entry(p).or_default() += c;
        Ok(())
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOLERANCE);
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c * factor)).collect(),
        };
        out.prune();
        out
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        self.check_len(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            *out.terms.entry(*p).or_default() += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliSum) -> Result<Self> {
        self.check_len(other)?;
        let mut out = PauliSum::new(self.n_qubits);
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let (phase, p) = pa.multiply_unchecked(pb);
                *out.terms.entry(p).or_default() += ca * cb * phase.to_complex();
            }
        }
        out.prune();
        Ok(out)
    }

    /// `[self, other] = self·other − other·self`, expanded and pruned.
    ///
    /// Only anticommuting string pairs contribute, each as `2 · c_a c_b · a·b`.
    pub fn commutator(&self, other: &PauliSum) -> Result<Self> {
        self.check_len(other)?;
        let mut out = PauliSum::new(self.n_qubits);
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                if pa.anticommuting_positions(pb) % 2 == 1 {
                    let (phase, p) = pa.multiply_unchecked(pb);
                    *out.terms.entry(p).or_default() += 2.0 * ca * cb * phase.to_complex();
                }
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.re.abs() <= tol)
    }

    /// True when all strings commute pairwise.
    pub fn terms_mutually_commute(&self) -> bool {
        let keys: Vec<&PauliString> = self.terms.keys().collect();
        keys.iter()
            .enumerate()
            .all(|(i, a)| keys[i + 1..].iter().all(|b| a.anticommuting_positions(b) % 2 == 0))
    }

    /// Same operator up to a global sign.
    pub fn equal_up_to_sign(&self, other: &PauliSum, tol: f64) -> bool {
        if self.n_qubits != other.n_qubits || self.len() != other.len() {
            return false;
        }
        let same = |sign: f64| {
            self.terms.iter().all(|(p, c)| match other.terms.get(p) {
                Some(d) => (c - d * sign).norm() <= tol,
                None => false,
            })
        };
        same(1.0) || same(-1.0)
    }

    /// Largest coefficient-wise difference, treating missing terms as zero.
    pub fn max_coefficient_distance(&self, other: &PauliSum) -> f64 {
        let mut worst: f64 = 0.0;
        for (p, c) in &self.terms {
            worst = worst.max((c - other.coefficient(p)).norm());
        }
        for (p, c) in &other.terms {
            if !self.terms.contains_key(p) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    fn check_len(&self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }
}

/// Free-function form of [`PauliString::multiply`].
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    a.multiply(b)
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

pub fn qubit_wise_commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.qubit_wise_commutes(b)
}

pub fn commutator(h: &PauliSum, a: &PauliSum) -> Result<PauliSum> {
    h.commutator(a)
}

fn fmt_coefficient(c: &Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for PauliSum {
    /// One `c · SSSS` line per term in canonical order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} · {}", fmt_coefficient(c), p)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.terms.iter().map(|(p, c)| (p.to_string(), c)))
            .finish()
    }
}
