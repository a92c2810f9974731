//! Boundary matrices and Betti numbers over the rationals or a prime field.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex, VertexId};
use crate::error::{Error, Result};

/// Coefficient field used for rank computations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    #[default]
    Rational,
    Prime(u64),
}

impl FieldChoice {
    pub const GF2: FieldChoice = FieldChoice::Prime(2);

    pub fn validate(self) -> Result<Self> {
        match self {
            FieldChoice::Prime(p) if !is_prime(p) || p >= 1 << 32 => Err(Error::InvalidArgument(
                format!("{p} is not a prime below 2^32"),
            )),
            f => Ok(f),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl fmt::Display for FieldChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldChoice::Rational => write!(f, "rational"),
            FieldChoice::Prime(p) => write!(f, "gf{p}"),
        }
    }
}

impl FromStr for FieldChoice {
    type Err = Error;

    /// Accepts `rational`, `q`, `gf2` or `gf<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "rational" || lower == "q" {
            return Ok(FieldChoice::Rational);
        }
        lower
            .strip_prefix("gf")
            .and_then(|p| p.parse::<u64>().ok())
            .map(FieldChoice::Prime)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown field `{s}`")))?
            .validate()
    }
}

/// Matrix of the boundary map from dimension `k` to dimension `k - 1`.
///
/// Rows and columns follow the lexicographic simplex order. Storage is
/// column-major and sparse; each column of a `k`-simplex holds `k + 1` signed
/// entries, the face omitting the `i`-th vertex carrying `(-1)^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub k: usize,
    pub rows: Vec<Simplex>,
    pub cols: Vec<Simplex>,
    columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Non-zero entries of column `j` as `(row, value)`, sorted by row.
    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> i8 {
        self.columns[col].iter().find(|(r, _)| *r == row).map_or(0, |(_, v)| *v)
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.ncols()]; self.nrows()];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                m[i][j] = v as i64;
            }
        }
        m
    }

    pub fn rank(&self, field: FieldChoice) -> usize {
        rank(self, field)
    }

    /// Writes `row col value` triplets after a header naming both orderings.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# boundary k={} rows={} cols={}", self.k, self.nrows(), self.ncols())?;
        let names = |v: &[Simplex]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        writeln!(w, "# rows: {}", names(&self.rows))?;
        writeln!(w, "# cols: {}", names(&self.cols))?;
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                writeln!(w, "{i} {j} {v}")?;
            }
        }
        Ok(())
    }
}

/// The matrix of the boundary map on `k`-chains. `k = 0` gives the zero map.
pub fn boundary_matrix(complex: &SimplicialComplex, k: usize) -> BoundaryMatrix {
    boundary_matrix_excluding(complex, k, None)
}

fn boundary_matrix_excluding(
    complex: &SimplicialComplex,
    k: usize,
    excluded: Option<VertexId>,
) -> BoundaryMatrix {
    let keep = |s: &&Simplex| excluded.is_none_or(|v| !s.contains(v));
    let cols: Vec<Simplex> = complex.simplices(k).filter(keep).cloned().collect();
    if k == 0 {
        let columns = vec![Vec::new(); cols.len()];
        return BoundaryMatrix { k, rows: Vec::new(), cols, columns };
    }
    let rows: Vec<Simplex> = complex.simplices(k - 1).filter(keep).cloned().collect();
    let row_of: HashMap<&Simplex, usize> = rows.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let columns = cols
        .iter()
        .map(|s| {
            let mut col: Vec<(usize, i8)> = s
                .facets()
                .enumerate()
                .map(|(i, f)| (row_of[&f], if i % 2 == 0 { 1 } else { -1 }))
                .collect();
            col.sort_unstable_by_key(|e| e.0);
            col
        })
        .collect();
    BoundaryMatrix { k, rows, cols, columns }
}

/// Exact rank of a boundary matrix over `field`.
pub fn rank(matrix: &BoundaryMatrix, field: FieldChoice) -> usize {
    match field {
        FieldChoice::Rational => rank_rational(&matrix.columns),
        FieldChoice::Prime(p) => rank_mod_p(&matrix.columns, p),
    }
}

/// Integer entries for fraction-free column elimination.
trait Entry: Clone + PartialEq + fmt::Debug {
    fn from_i8(v: i8) -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn sub(&self, other: &Self) -> Option<Self>;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, other: &Self) -> Self;
    fn is_one(&self) -> bool;
}

impl Entry for i64 {
    fn from_i8(v: i8) -> Self {
        v as i64
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        self.checked_sub(*other)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        self / other
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
}

impl Entry for BigInt {
    fn from_i8(v: i8) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        self / other
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
}

fn rank_rational(columns: &[Vec<(usize, i8)>]) -> usize {
    reduce_integer::<i64>(columns).unwrap_or_else(|| {
        reduce_integer::<BigInt>(columns).expect("big integer elimination cannot overflow")
    })
}

/// Column reduction keyed on the lowest non-zero row. Each elimination step
/// replaces `c` by `b*c - a*p` with `a`, `b` the pivot-row entries divided by
/// their gcd, then divides `c` by the gcd of its entries. Returns `None` on
/// overflow.
fn reduce_integer<T: Entry>(columns: &[Vec<(usize, i8)>]) -> Option<usize> {
    let mut pivots: HashMap<usize, Vec<(usize, T)>> = HashMap::new();
    for col in columns {
        let mut c: Vec<(usize, T)> = col.iter().map(|&(r, v)| (r, T::from_i8(v))).collect();
        while let Some((low, a)) = c.last().cloned() {
            let Some(p) = pivots.get(&low) else {
                pivots.insert(low, c);
                break;
            };
            let b = &p.last().expect("pivot columns are non-empty").1;
            let g = a.gcd(b);
            let (a, b) = (a.div_exact(&g), b.div_exact(&g));
            c = combine(&c, &b, p, &a)?;
            normalize(&mut c);
        }
    }
    Some(pivots.len())
}

/// `x * cx - y * cy` on sparse sorted vectors.
fn combine<T: Entry>(
    x: &[(usize, T)],
    cx: &T,
    y: &[(usize, T)],
    cy: &T,
) -> Option<Vec<(usize, T)>> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    let zero = T::from_i8(0);
    while i < x.len() || j < y.len() {
        let (row, v) = match (x.get(i), y.get(j)) {
            (Some(a), Some(b)) if a.0 == b.0 => {
                i += 1;
                j += 1;
                (a.0, a.1.mul(cx)?.sub(&b.1.mul(cy)?)?)
            }
            (Some(a), Some(b)) if a.0 < b.0 => {
                i += 1;
                (a.0, a.1.mul(cx)?)
            }
            (Some(a), None) => {
                i += 1;
                (a.0, a.1.mul(cx)?)
            }
            (_, Some(b)) => {
                j += 1;
                (b.0, zero.sub(&b.1.mul(cy)?)?)
            }
            (None, None) => unreachable!(),
        };
        if !v.is_zero() {
            out.push((row, v));
        }
    }
    Some(out)
}

fn normalize<T: Entry>(c: &mut [(usize, T)]) {
    let Some(first) = c.first() else { return };
    let mut g = first.1.gcd(&first.1);
    for (_, v) in c.iter().skip(1) {
        if g.is_one() {
            return;
        }
        g = g.gcd(v);
    }
    if !g.is_one() {
        for (_, v) in c.iter_mut() {
            *v = v.div_exact(&g);
        }
    }
}

fn rank_mod_p(columns: &[Vec<(usize, i8)>], p: u64) -> usize {
    let to_mod = |v: i8| if v >= 0 { v as u64 % p } else { (p - (v.unsigned_abs() as u64 % p)) % p };
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let inv = |a: u64| modpow(a, p - 2, p);
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    for col in columns {
        let mut c: Vec<(usize, u64)> =
            col.iter().map(|&(r, v)| (r, to_mod(v))).filter(|e| e.1 != 0).collect();
        while let Some(&(low, a)) = c.last() {
            let Some(piv) = pivots.get(&low) else {
                let scale = inv(a);
                c.iter_mut().for_each(|e| e.1 = mulmod(e.1, scale));
                pivots.insert(low, c);
                break;
            };
            // pivot columns are scaled so their lowest entry is 1
            let mut out = Vec::with_capacity(c.len() + piv.len());
            let (mut i, mut j) = (0, 0);
            while i < c.len() || j < piv.len() {
                let (row, v) = match (c.get(i), piv.get(j)) {
                    (Some(x), Some(y)) if x.0 == y.0 => {
                        i += 1;
                        j += 1;
                        (x.0, (x.1 + p - mulmod(a, y.1)) % p)
                    }
                    (Some(x), Some(y)) if x.0 < y.0 => {
                        i += 1;
                        (x.0, x.1)
                    }
                    (Some(x), None) => {
                        i += 1;
                        (x.0, x.1)
                    }
                    (_, Some(y)) => {
                        j += 1;
                        (y.0, (p - mulmod(a, y.1)) % p)
                    }
                    (None, None) => unreachable!(),
                };
                if v != 0 {
                    out.push((row, v));
                }
            }
            c = out;
        }
    }
    pivots.len()
}

fn modpow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Betti numbers `β_0..β_{k0-1}` together with the field they were computed over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiVector {
    pub betti: Vec<usize>,
    pub field: FieldChoice,
}

impl BettiVector {
    pub fn euler_characteristic(&self) -> i64 {
        self.betti.iter().enumerate().map(|(k, b)| if k % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum()
    }
}

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.betti.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// `β_k = (s_k - rank ∂_k) - rank ∂_{k+1}` for `0 <= k < k0`.
pub fn betti_numbers(complex: &SimplicialComplex, k0: usize, field: FieldChoice) -> BettiVector {
    betti_excluding(complex, k0, field, None)
}

/// Betti numbers of the complex with `v` and its star deleted, without mutating it.
pub fn betti_numbers_without(
    complex: &SimplicialComplex,
    k0: usize,
    field: FieldChoice,
    v: VertexId,
) -> BettiVector {
    betti_excluding(complex, k0, field, Some(v))
}

fn betti_excluding(
    complex: &SimplicialComplex,
    k0: usize,
    field: FieldChoice,
    excluded: Option<VertexId>,
) -> BettiVector {
    // ranks[k] = rank ∂_k for k = 0..=k0
    let mut ranks = vec![0usize; k0 + 1];
    for (k, r) in ranks.iter_mut().enumerate().skip(1) {
        if complex.count(k) > 0 {
            *r = rank(&boundary_matrix_excluding(complex, k, excluded), field);
        }
    }
    let betti = (0..k0)
        .map(|k| {
            let s_k = match excluded {
                None => complex.count(k),
                Some(v) => complex.simplices(k).filter(|s| !s.contains(v)).count(),
            };
            s_k - ranks[k] - ranks[k + 1]
        })
        .collect();
    BettiVector { betti, field }
}

/// Betti numbers through the top dimension of the complex.
pub fn full_betti_numbers(complex: &SimplicialComplex, field: FieldChoice) -> BettiVector {
    betti_numbers(complex, complex.clique_number(), field)
}
