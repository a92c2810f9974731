//! Homology-preserving reduction by vertex removal.
//!
//! Each `k0`-simplex carries a degree (the dimension of its largest coface)
//! and each vertex an index (the smallest degree among its `k0`-simplices).
//! Vertices of the largest index are removed one at a time, at random, and a
//! removal is kept only if `β_0..β_{k0-1}` do not change.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{Removal, Simplex, SimplicialComplex, VertexId};
use crate::error::{Error, Result};
use crate::geometry::{rng_for, RNG_ALGORITHM};
use crate::homology::{betti_numbers, betti_numbers_without, FieldChoice};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Work counters. `measured()` is what the complexity audit compares against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    /// Simplices above dimension `k0` visited while computing or updating degrees.
    pub degree_traversals: u64,
    /// `k0`-simplices scanned while computing indices.
    pub index_scans: u64,
    /// Simplices deleted by confirmed removals.
    pub deletions: u64,
    pub degree_recomputations: u64,
    pub index_recomputations: u64,
    pub betti_evaluations: u64,
}

impl OpCounters {
    pub fn measured(&self) -> u64 {
        self.degree_traversals + self.index_scans + self.deletions
    }
}

/// Degree of every `k0`-simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeTable {
    pub k0: usize,
    degrees: BTreeMap<Simplex, usize>,
    // number of cofaces of dimension exactly D[σ]
    top: BTreeMap<Simplex, usize>,
}

impl DegreeTable {
    pub fn get(&self, sigma: &Simplex) -> Option<usize> {
        self.degrees.get(sigma).copied()
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, usize)> + '_ {
        self.degrees.iter().map(|(s, d)| (s, *d))
    }
}

/// Walks the simplices strictly containing `sigma` one dimension at a time.
/// Returns the largest dimension reached and the number of simplices there.
fn upper_star(complex: &SimplicialComplex, sigma: &Simplex, counters: &mut OpCounters) -> (usize, usize) {
    let mut level: BTreeSet<&Simplex> = BTreeSet::from([sigma]);
    let mut dim = sigma.dim();
    loop {
        let next: BTreeSet<&Simplex> = level
            .iter()
            .flat_map(|s| complex.cofaces(s).into_iter().flatten())
            .collect();
        if next.is_empty() {
            return (dim, level.len());
        }
        counters.degree_traversals += next.len() as u64;
        level = next;
        dim += 1;
    }
}

pub fn compute_degrees(complex: &SimplicialComplex, k0: usize) -> DegreeTable {
    compute_degrees_counted(complex, k0, &mut OpCounters::default())
}

fn compute_degrees_counted(complex: &SimplicialComplex, k0: usize, counters: &mut OpCounters) -> DegreeTable {
    let mut degrees = BTreeMap::new();
    let mut top = BTreeMap::new();
    for sigma in complex.simplices(k0) {
        let (d, count) = upper_star(complex, sigma, counters);
        degrees.insert(sigma.clone(), d);
        top.insert(sigma.clone(), if d == k0 { 0 } else { count });
    }
    DegreeTable { k0, degrees, top }
}

/// Index of a vertex. The two flagged states both read as `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexIndex {
    Critical,
    /// Trial removal changed the homology; permanent under the full-domain hypothesis.
    Unremovable { permanent: bool },
    Value(usize),
}

impl VertexIndex {
    pub fn as_i64(self) -> i64 {
        match self {
            VertexIndex::Value(v) => v as i64,
            _ => -1,
        }
    }

    pub fn value(self) -> Option<usize> {
        match self {
            VertexIndex::Value(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexTable {
    pub k0: usize,
    indices: BTreeMap<VertexId, VertexIndex>,
}

impl IndexTable {
    pub fn get(&self, v: VertexId) -> Option<VertexIndex> {
        self.indices.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexIndex)> + '_ {
        self.indices.iter().map(|(v, i)| (*v, *i))
    }

    /// Largest unflagged index, if any vertex is unflagged.
    pub fn max_value(&self) -> Option<usize> {
        self.indices.values().filter_map(|i| i.value()).max()
    }

    pub fn with_value(&self, k: usize) -> Vec<VertexId> {
        self.iter().filter(|(_, i)| *i == VertexIndex::Value(k)).map(|(v, _)| v).collect()
    }

    /// Number of unflagged vertices at each index value.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for k in self.indices.values().filter_map(|i| i.value()) {
            *hist.entry(k).or_insert(0) += 1;
        }
        hist
    }

    pub fn flag_critical(&mut self, critical: &BTreeSet<VertexId>) {
        for v in critical {
            if let Some(i) = self.indices.get_mut(v) {
                *i = VertexIndex::Critical;
            }
        }
    }
}

fn index_of(
    complex: &SimplicialComplex,
    degrees: &DegreeTable,
    v: VertexId,
    counters: &mut OpCounters,
) -> usize {
    let k0 = degrees.k0;
    let mut level: BTreeSet<&Simplex> = BTreeSet::new();
    let root = Simplex::vertex(v);
    let Some(root) = complex.level(0).and_then(|l| l.get(&root)) else {
        return 0;
    };
    level.insert(root);
    for _ in 0..k0 {
        level = level.iter().flat_map(|s| complex.cofaces(s).into_iter().flatten()).collect();
    }
    counters.index_scans += level.len() as u64;
    level.iter().filter_map(|s| degrees.get(s)).min().unwrap_or(0)
}

pub fn compute_indices(complex: &SimplicialComplex, degrees: &DegreeTable) -> IndexTable {
    compute_indices_counted(complex, degrees, &mut OpCounters::default())
}

fn compute_indices_counted(
    complex: &SimplicialComplex,
    degrees: &DegreeTable,
    counters: &mut OpCounters,
) -> IndexTable {
    let indices = complex
        .vertices()
        .map(|v| (v, VertexIndex::Value(index_of(complex, degrees, v, counters))))
        .collect();
    IndexTable { k0: degrees.k0, indices }
}

/// Degree and index tables maintained incrementally across removals.
#[derive(Clone, Debug)]
pub struct ReductionTables {
    pub degrees: DegreeTable,
    pub indices: IndexTable,
    pub counters: OpCounters,
}

impl ReductionTables {
    pub fn new(complex: &SimplicialComplex, k0: usize, critical: &BTreeSet<VertexId>) -> Self {
        let mut counters = OpCounters::default();
        let degrees = compute_degrees_counted(complex, k0, &mut counters);
        let mut indices = compute_indices_counted(complex, &degrees, &mut counters);
        indices.flag_critical(critical);
        ReductionTables { degrees, indices, counters }
    }

    pub fn reject(&mut self, v: VertexId, permanent: bool) {
        if let Some(i) = self.indices.indices.get_mut(&v) {
            if *i != VertexIndex::Critical {
                *i = VertexIndex::Unremovable { permanent };
            }
        }
    }

    /// Updates both tables after `removal` was applied to `complex`.
    ///
    /// Degrees use coface counts at the top dimension: a `k0`-simplex is only
    /// re-walked once its last top-dimensional coface disappears. Indices are
    /// recomputed for vertices at `imax`, temporarily flagged vertices, and
    /// every vertex of a `k0`-simplex that was deleted or changed degree.
    /// Returns the recomputed vertices.
    pub fn apply_removal(
        &mut self,
        complex: &SimplicialComplex,
        removal: &Removal,
        imax: usize,
    ) -> BTreeSet<VertexId> {
        let k0 = self.degrees.k0;
        let w = removal.vertex;
        self.counters.deletions += removal.simplices.len() as u64;
        let mut touched: BTreeSet<VertexId> = BTreeSet::new();
        let mut stale: BTreeSet<Simplex> = BTreeSet::new();
        for tau in &removal.simplices {
            if tau.dim() == k0 {
                self.degrees.degrees.remove(tau);
                self.degrees.top.remove(tau);
                touched.extend(tau.vertices().iter().copied().filter(|v| *v != w));
            } else if tau.dim() > k0 {
                let rest = tau.without(w).expect("removed simplices contain the vertex");
                for sigma in rest.faces_of_size(k0 + 1) {
                    self.counters.degree_traversals += 1;
                    if self.degrees.degrees.get(&sigma) == Some(&tau.dim()) {
                        let count = self.degrees.top.get_mut(&sigma).expect("top count");
                        *count -= 1;
                        if *count == 0 {
                            stale.insert(sigma);
                        }
                    }
                }
            }
        }
        for sigma in stale {
            self.counters.degree_recomputations += 1;
            let (d, count) = upper_star(complex, &sigma, &mut self.counters);
            self.degrees.top.insert(sigma.clone(), if d == k0 { 0 } else { count });
            if self.degrees.degrees.insert(sigma.clone(), d) != Some(d) {
                touched.extend(sigma.vertices().iter().copied());
            }
        }
        self.indices.indices.remove(&w);
        let guards = self.indices.iter().filter(|(_, i)| {
            matches!(i, VertexIndex::Unremovable { permanent: false }) || *i == VertexIndex::Value(imax)
        });
        let recompute: BTreeSet<VertexId> = guards.map(|(v, _)| v).chain(touched).collect();
        let mut done = BTreeSet::new();
        for v in recompute {
            let current = self.indices.indices[&v];
            if matches!(current, VertexIndex::Critical | VertexIndex::Unremovable { permanent: true }) {
                continue;
            }
            self.counters.index_recomputations += 1;
            let value = index_of(complex, &self.degrees, v, &mut self.counters);
            self.indices.indices.insert(v, VertexIndex::Value(value));
            done.insert(v);
        }
        done
    }

    /// Tables rebuilt from scratch on `complex`, keeping the flags of `self`
    /// that a confirmed removal does not clear.
    pub fn recomputed(&self, complex: &SimplicialComplex) -> ReductionTables {
        let mut fresh = ReductionTables::new(complex, self.degrees.k0, &BTreeSet::new());
        for (v, i) in self.indices.iter() {
            if matches!(i, VertexIndex::Critical | VertexIndex::Unremovable { permanent: true }) {
                fresh.indices.indices.insert(v, i);
            }
        }
        fresh
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceOptions {
    /// Assume every vertex lies in the region spanned by the critical vertices:
    /// stop once all indices are at most `k0` and keep rejections permanent.
    pub full_domain: bool,
    pub field: FieldChoice,
    /// Compare the incremental tables with a full recomputation after every
    /// confirmed removal and count the mismatches in the report.
    pub verify_tables: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub vertex: VertexId,
    pub index: usize,
    pub betti: Vec<usize>,
    pub s_counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Draw {
    pub vertex: VertexId,
    pub index: usize,
    pub candidates: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub format_version: u32,
    pub rng: String,
    pub seed: u64,
    pub k0: usize,
    pub options: ReduceOptions,
    pub critical: Vec<VertexId>,
    pub initial_betti: Vec<usize>,
    pub initial_s_counts: Vec<usize>,
    pub initial_max_index: Option<usize>,
    /// `|E_k|`: unflagged vertices with initial index `k`.
    pub index_histogram: BTreeMap<usize, usize>,
    pub removal_order: Vec<ReductionStep>,
    pub draws: Vec<Draw>,
    pub rejected: Vec<VertexId>,
    pub removed: usize,
    pub bounds: (usize, usize),
    pub final_betti: Vec<usize>,
    pub final_s_counts: Vec<usize>,
    pub final_indices: BTreeMap<VertexId, VertexIndex>,
    pub table_mismatches: usize,
    pub counters: OpCounters,
    pub warnings: Vec<String>,
    pub final_complex: SimplicialComplex,
}

impl ReductionReport {
    pub fn bounds_hold(&self) -> bool {
        self.bounds.0 <= self.removed && self.removed <= self.bounds.1
    }

    pub fn removed_vertices(&self) -> Vec<VertexId> {
        self.removal_order.iter().map(|s| s.vertex).collect()
    }
}

/// `(Σ 1{E_k ≠ ∅}, Σ |E_k|)` over `k0 < k <= imax`.
pub fn removal_bounds(histogram: &BTreeMap<usize, usize>, k0: usize, imax: Option<usize>) -> (usize, usize) {
    let Some(imax) = imax.filter(|m| *m > k0) else {
        return (0, 0);
    };
    histogram
        .range(k0 + 1..=imax)
        .fold((0, 0), |(lo, hi), (_, &count)| (lo + usize::from(count > 0), hi + count))
}

/// Runs the reduction on a copy of `complex`.
pub fn reduce(
    complex: &SimplicialComplex,
    critical: &[VertexId],
    k0: usize,
    options: &ReduceOptions,
    seed: u64,
) -> Result<ReductionReport> {
    if k0 == 0 {
        return Err(Error::InvalidArgument("k0 must be at least 1".into()));
    }
    let field = options.field.validate()?;
    if let Some(v) = critical.iter().find(|v| !complex.contains_vertex(**v)) {
        return Err(Error::VertexNotFound(*v));
    }
    let critical_set: BTreeSet<VertexId> = critical.iter().copied().collect();
    let mut x = complex.clone();
    let mut tables = ReductionTables::new(&x, k0, &critical_set);
    let initial_betti = betti_numbers(&x, k0, field).betti;
    tables.counters.betti_evaluations += 1;

    let index_histogram = tables.indices.histogram();
    let initial_max_index = tables.indices.max_value();
    let bounds = removal_bounds(&index_histogram, k0, initial_max_index);
    let mut warnings = Vec::new();
    if options.full_domain {
        let isolated = index_histogram.get(&0).copied().unwrap_or(0);
        if isolated > 0 {
            warnings.push(format!(
                "{isolated} non-critical vertices have index 0, which the full-domain hypothesis excludes"
            ));
        }
    }

    let stop_below = if options.full_domain { k0 + 1 } else { k0 };
    let mut rng = rng_for(seed, 0);
    let mut removal_order = Vec::new();
    let mut draws = Vec::new();
    let mut rejected = Vec::new();
    let mut table_mismatches = 0;
    while let Some(imax) = tables.indices.max_value().filter(|m| *m >= stop_below) {
        let candidates = tables.indices.with_value(imax);
        let w = candidates[rng.random_range(0..candidates.len())];
        let trial = betti_numbers_without(&x, k0, field, w).betti;
        tables.counters.betti_evaluations += 1;
        let accepted = trial == initial_betti;
        draws.push(Draw { vertex: w, index: imax, candidates: candidates.len(), accepted });
        if !accepted {
            tables.reject(w, options.full_domain);
            rejected.push(w);
            continue;
        }
        let removal = x.remove_vertex(w)?;
        tables.apply_removal(&x, &removal, imax);
        if options.verify_tables {
            let fresh = tables.recomputed(&x);
            if fresh.degrees != tables.degrees || fresh.indices != tables.indices {
                table_mismatches += 1;
            }
        }
        removal_order.push(ReductionStep { vertex: w, index: imax, betti: trial, s_counts: x.s_counts() });
    }

    Ok(ReductionReport {
        format_version: REPORT_FORMAT_VERSION,
        rng: RNG_ALGORITHM.to_string(),
        seed,
        k0,
        options: *options,
        critical: critical_set.into_iter().collect(),
        initial_s_counts: complex.s_counts(),
        final_betti: betti_numbers(&x, k0, field).betti,
        initial_betti,
        initial_max_index,
        index_histogram,
        removed: removal_order.len(),
        removal_order,
        draws,
        rejected,
        bounds,
        final_s_counts: x.s_counts(),
        final_indices: tables.indices.indices.clone(),
        table_mismatches,
        counters: tables.counters,
        warnings,
        final_complex: x,
    })
}

/// Replays the removals on `initial` and checks that they yield the reported complex.
fn replay_matches(report: &ReductionReport, initial: &SimplicialComplex) -> Result<bool> {
    let mut x = initial.clone();
    for step in &report.removal_order {
        if !x.contains_vertex(step.vertex) {
            return Ok(false);
        }
        x.remove_vertex(step.vertex)?;
    }
    Ok(x == report.final_complex)
}

/// No remaining non-critical vertex can be removed without changing
/// `β_0..β_{k0-1}`, except vertices of index 0 and, under the full-domain
/// stop rule, vertices of index at most `k0`.
pub fn verify_nash(report: &ReductionReport, initial: &SimplicialComplex) -> Result<bool> {
    if !replay_matches(report, initial)? {
        return Ok(false);
    }
    let k0 = report.k0;
    let field = report.options.field;
    let fin = &report.final_complex;
    let betti = betti_numbers(fin, k0, field).betti;
    if betti != report.initial_betti || betti != betti_numbers(initial, k0, field).betti {
        return Ok(false);
    }
    let degrees = compute_degrees(fin, k0);
    let indices = compute_indices(fin, &degrees);
    let critical: BTreeSet<VertexId> = report.critical.iter().copied().collect();
    for (v, index) in indices.iter() {
        if critical.contains(&v) {
            continue;
        }
        let index = index.value().expect("fresh tables carry no flags");
        if index == 0 || (report.options.full_domain && index <= k0) {
            continue;
        }
        if betti_numbers_without(fin, k0, field, v).betti == betti {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The final vertex set dominates the 1-skeleton of the initial complex.
pub fn verify_dominating(report: &ReductionReport, initial: &SimplicialComplex) -> Result<bool> {
    if report.k0 != 2 || !report.options.full_domain {
        return Err(Error::Precondition(
            "domination is only guaranteed for coverage runs (k0 = 2, full domain)".into(),
        ));
    }
    let kept: BTreeSet<VertexId> = report.final_complex.vertices().collect();
    Ok(initial
        .vertices()
        .all(|v| kept.contains(&v) || initial.neighbors(v).iter().any(|u| kept.contains(u))))
}
