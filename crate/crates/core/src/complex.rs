//! Face-closed abstract simplicial complexes with explicit storage.
//!
//! Every simplex is stored, per dimension, together with an index from each
//! simplex to its cofaces of one dimension higher. Simplices are sorted,
//! duplicate-free vertex lists; orientation is never stored.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the number of stored simplices.
pub const DEFAULT_SIMPLEX_CAP: usize = 1 << 24;

/// Stable vertex identifier. Ids are never recycled by a complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(id: u32) -> Self {
        VertexId(id)
    }
}

/// A simplex: a strictly increasing, non-empty list of vertices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Simplex(Vec<VertexId>);

impl TryFrom<Vec<u32>> for Simplex {
    type Error = Error;

    fn try_from(ids: Vec<u32>) -> Result<Self> {
        Simplex::new(ids)
    }
}

impl From<Simplex> for Vec<u32> {
    fn from(s: Simplex) -> Self {
        s.ids()
    }
}

impl Simplex {
    /// Builds a simplex from vertex ids in any order. Repeated ids are rejected.
    pub fn new<I, V>(vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: Into<VertexId>,
    {
        let mut vs: Vec<VertexId> = vertices.into_iter().map(Into::into).collect();
        if vs.is_empty() {
            return Err(Error::InvalidArgument("a simplex needs at least one vertex".into()));
        }
        vs.sort_unstable();
        if vs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedSimplex(vs.iter().map(|v| v.0).collect()));
        }
        Ok(Simplex(vs))
    }

    pub fn vertex(v: impl Into<VertexId>) -> Self {
        Simplex(vec![v.into()])
    }

    /// Wraps an already sorted, duplicate-free vertex list.
    pub(crate) fn from_sorted(vertices: Vec<VertexId>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn ids(&self) -> Vec<u32> {
        self.0.iter().map(|v| v.0).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// True if every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    /// The codimension-one faces, where the `i`-th face omits the `i`-th vertex.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |i| {
            let mut vs = self.0.clone();
            vs.remove(i);
            Simplex(vs)
        })
    }

    /// The face obtained by dropping `v`, if `v` is a vertex and the result is non-empty.
    pub fn without(&self, v: VertexId) -> Option<Simplex> {
        let pos = self.0.binary_search(&v).ok()?;
        if self.0.len() == 1 {
            return None;
        }
        let mut vs = self.0.clone();
        vs.remove(pos);
        Some(Simplex(vs))
    }

    /// All faces with exactly `size` vertices, in lexicographic order.
    pub fn faces_of_size(&self, size: usize) -> Vec<Simplex> {
        let n = self.0.len();
        if size == 0 || size > n {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(Simplex(idx.iter().map(|&i| self.0[i]).collect()));
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
        out
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v.0)?;
        }
        write!(f, "]")
    }
}

/// The simplices deleted by one vertex removal, sorted by dimension then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub vertex: VertexId,
    pub simplices: Vec<Simplex>,
}

impl Removal {
    /// Removed simplices that are maximal within the removed set.
    pub fn maximal(&self) -> Vec<Simplex> {
        let top: Vec<&Simplex> = self.simplices.iter().collect();
        self.simplices
            .iter()
            .filter(|s| !top.iter().any(|t| t.len() > s.len() && s.is_face_of(t)))
            .cloned()
            .collect()
    }
}

/// A face-closed family of simplices with per-dimension storage and a coface index.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    levels: Vec<BTreeSet<Simplex>>,
    cofaces: HashMap<Simplex, BTreeSet<Simplex>>,
    next_id: u32,
    cap: usize,
}

/// Serialized as its sorted list of maximal simplices.
impl Serialize for SimplicialComplex {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.maximal_simplices().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SimplicialComplex {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let maximal = Vec::<Simplex>::deserialize(deserializer)?;
        SimplicialComplex::from_maximal(maximal).map_err(serde::de::Error::custom)
    }
}

impl Default for SimplicialComplex {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
    }
}

impl Eq for SimplicialComplex {}

impl SimplicialComplex {
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_SIMPLEX_CAP)
    }

    pub fn with_cap(cap: usize) -> Self {
        SimplicialComplex { levels: Vec::new(), cofaces: HashMap::new(), next_id: 0, cap }
    }

    /// Builds the closure of a list of simplices.
    pub fn from_maximal<I>(simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = Simplex>,
    {
        let mut complex = Self::new();
        for s in simplices {
            complex.insert_maximal(&s)?;
        }
        Ok(complex)
    }

    /// Builds a complex from per-dimension levels that are already face-closed.
    pub(crate) fn from_closed_levels(mut levels: Vec<BTreeSet<Simplex>>, cap: usize) -> Self {
        while levels.last().is_some_and(BTreeSet::is_empty) {
            levels.pop();
        }
        let total: usize = levels.iter().map(BTreeSet::len).sum();
        let mut cofaces: HashMap<Simplex, BTreeSet<Simplex>> = HashMap::with_capacity(total);
        let mut next_id = 0;
        for level in &levels {
            for s in level {
                cofaces.entry(s.clone()).or_default();
                for f in s.facets() {
                    cofaces.entry(f).or_default().insert(s.clone());
                }
            }
        }
        if let Some(v) = levels.first().and_then(|l| l.last()) {
            next_id = v.0[0].0 + 1;
        }
        let complex = SimplicialComplex { levels, cofaces, next_id, cap };
        debug_assert!(complex.check_invariants().is_ok());
        complex
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn set_cap(&mut self, cap: usize) {
        self.cap = cap;
    }

    /// Inserts `sigma` and all of its faces. Idempotent.
    pub fn insert_maximal(&mut self, sigma: &Simplex) -> Result<()> {
        let size = sigma.len();
        if size >= 64 || (1u128 << size) - 1 > self.cap as u128 {
            return Err(Error::SimplexCap {
                count: self.num_simplices() as u128 + (1u128 << size.min(127)) - 1,
                cap: self.cap,
            });
        }
        if self.contains(sigma) {
            return Ok(());
        }
        let faces: Vec<Vec<Simplex>> = (1..=size).map(|m| sigma.faces_of_size(m)).collect();
        let missing = faces.iter().flatten().filter(|f| !self.contains(f)).count();
        let total = self.num_simplices() + missing;
        if total > self.cap {
            return Err(Error::SimplexCap { count: total as u128, cap: self.cap });
        }
        for level in faces {
            for face in level {
                self.insert_with_facets_present(face);
            }
        }
        Ok(())
    }

    fn insert_with_facets_present(&mut self, s: Simplex) {
        if self.contains(&s) {
            return;
        }
        let dim = s.dim();
        if self.levels.len() <= dim {
            self.levels.resize_with(dim + 1, BTreeSet::new);
        }
        if dim == 0 {
            self.next_id = self.next_id.max(s.0[0].0 + 1);
        }
        for f in s.facets() {
            self.cofaces.get_mut(&f).expect("facet inserted first").insert(s.clone());
        }
        self.cofaces.insert(s.clone(), BTreeSet::new());
        self.levels[dim].insert(s);
    }

    /// Deletes `v` and every simplex containing it.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<Removal> {
        let star = self.star(v)?;
        for s in &star {
            self.cofaces.remove(s);
            for f in s.facets() {
                if let Some(set) = self.cofaces.get_mut(&f) {
                    set.remove(s);
                }
            }
            self.levels[s.dim()].remove(s);
        }
        while self.levels.last().is_some_and(BTreeSet::is_empty) {
            self.levels.pop();
        }
        Ok(Removal { vertex: v, simplices: star })
    }

    /// Re-inserts every simplex of a previous removal.
    pub fn restore(&mut self, removal: &Removal) -> Result<()> {
        for s in removal.maximal() {
            self.insert_maximal(&s)?;
        }
        Ok(())
    }

    /// All simplices containing `v`, sorted by dimension then lexicographically.
    pub fn star(&self, v: VertexId) -> Result<Vec<Simplex>> {
        let root = Simplex::vertex(v);
        if !self.contains(&root) {
            return Err(Error::VertexNotFound(v));
        }
        let mut seen: HashSet<Simplex> = HashSet::new();
        let mut frontier = vec![root];
        let mut out = Vec::new();
        while !frontier.is_empty() {
            let mut next = BTreeSet::new();
            for s in frontier {
                for c in &self.cofaces[&s] {
                    if !seen.contains(c) {
                        next.insert(c.clone());
                    }
                }
                seen.insert(s.clone());
                out.push(s);
            }
            frontier = next.into_iter().collect();
        }
        Ok(out)
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.levels.get(s.dim()).is_some_and(|l| l.contains(s))
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.contains(&Simplex::vertex(v))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.simplices(0).map(|s| s.0[0])
    }

    /// Stored simplices of dimension `dim`, in lexicographic order.
    pub fn simplices(&self, dim: usize) -> impl Iterator<Item = &Simplex> + '_ {
        self.levels.get(dim).into_iter().flatten()
    }

    pub fn level(&self, dim: usize) -> Option<&BTreeSet<Simplex>> {
        self.levels.get(dim)
    }

    /// Every stored simplex, by dimension then lexicographically.
    pub fn iter(&self) -> impl Iterator<Item = &Simplex> + '_ {
        self.levels.iter().flatten()
    }

    /// Simplex counts `s_0..s_K`; empty for the empty complex.
    pub fn s_counts(&self) -> Vec<usize> {
        self.levels.iter().map(BTreeSet::len).collect()
    }

    pub fn count(&self, dim: usize) -> usize {
        self.levels.get(dim).map_or(0, BTreeSet::len)
    }

    pub fn num_vertices(&self) -> usize {
        self.count(0)
    }

    pub fn num_simplices(&self) -> usize {
        self.levels.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Largest stored dimension, `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.levels.len().checked_sub(1)
    }

    /// Size of the largest simplex, i.e. `dim + 1`; zero for the empty complex.
    pub fn clique_number(&self) -> usize {
        self.levels.len()
    }

    /// Smallest id that has never been used by this complex.
    pub fn next_vertex_id(&self) -> VertexId {
        VertexId(self.next_id)
    }

    /// Stored cofaces of `s` with exactly one more vertex.
    pub fn cofaces(&self, s: &Simplex) -> Option<&BTreeSet<Simplex>> {
        self.cofaces.get(s)
    }

    /// Stored simplices of dimension `target_dim` containing `sigma`.
    pub fn cofaces_of(&self, sigma: &Simplex, target_dim: usize) -> Result<BTreeSet<Simplex>> {
        if !self.contains(sigma) {
            return Err(Error::SimplexNotFound(sigma.clone()));
        }
        if target_dim <= sigma.dim() {
            return Err(Error::InvalidArgument(format!(
                "target dimension {target_dim} must exceed dim {} of {sigma}",
                sigma.dim()
            )));
        }
        let mut level: BTreeSet<Simplex> = BTreeSet::from([sigma.clone()]);
        for _ in sigma.dim()..target_dim {
            level = level.iter().flat_map(|s| self.cofaces[s].iter().cloned()).collect();
            if level.is_empty() {
                break;
            }
        }
        Ok(level)
    }

    /// Vertices joined to `v` by an edge.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.cofaces
            .get(&Simplex::vertex(v))
            .map(|edges| {
                edges.iter().map(|e| if e.0[0] == v { e.0[1] } else { e.0[0] }).collect()
            })
            .unwrap_or_default()
    }

    /// Simplices without proper cofaces, in lexicographic vertex order.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let mut out: Vec<Simplex> =
            self.iter().filter(|s| self.cofaces[*s].is_empty()).cloned().collect();
        out.sort();
        out
    }

    /// Full consistency check of the stored structure.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.levels.last().is_some_and(BTreeSet::is_empty) {
            return Err("trailing empty level".into());
        }
        let total = self.num_simplices();
        if self.cofaces.len() != total {
            return Err(format!("coface index has {} keys for {} simplices", self.cofaces.len(), total));
        }
        for (dim, level) in self.levels.iter().enumerate() {
            for s in level {
                if s.dim() != dim {
                    return Err(format!("{s} stored at dimension {dim}"));
                }
                for f in s.facets() {
                    if !self.contains(&f) {
                        return Err(format!("face {f} of {s} missing"));
                    }
                    if !self.cofaces[&f].contains(s) {
                        return Err(format!("coface index of {f} lacks {s}"));
                    }
                }
                let expected: BTreeSet<Simplex> = self
                    .simplices(dim + 1)
                    .filter(|t| s.is_face_of(t))
                    .cloned()
                    .collect();
                if self.cofaces[s] != expected {
                    return Err(format!("coface index of {s} is inconsistent"));
                }
            }
        }
        Ok(())
    }
}
