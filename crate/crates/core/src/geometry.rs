//! Point processes on the flat torus (or an open cube) and Vietoris-Rips complexes.
//!
//! Randomness comes from ChaCha8 seeded with the run seed; Monte-Carlo trial
//! `i` draws from stream `i` of that generator, so trial outcomes do not
//! depend on scheduling.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex, VertexId, DEFAULT_SIMPLEX_CAP};
use crate::error::{Error, Result};
use crate::graph::ProximityGraph;

/// Recorded in every report that consumes randomness.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.9); trial i uses stream i of the run seed";

/// Largest expected point count accepted by the Poisson generator.
pub const POINT_CAP: u64 = 50_000_000;

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Maximum of the coordinate distances.
    #[default]
    Uniform,
    Euclidean,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "max" | "linf" => Ok(Metric::Uniform),
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Uniform => "uniform",
            Metric::Euclidean => "euclidean",
        })
    }
}

/// The sampling domain `[0, a)^d`, periodic (a torus) unless `periodic` is false.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub d: usize,
    pub a: f64,
    pub metric: Metric,
    pub periodic: bool,
}

impl TorusSpec {
    pub fn new(d: usize, a: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("side length {a} must be positive")));
        }
        Ok(TorusSpec { d, a, metric: Metric::Uniform, periodic: true })
    }

    /// The open cube `[0, a]^d` with the plain (non-wrapping) metric.
    pub fn square(d: usize, a: f64) -> Result<Self> {
        Ok(TorusSpec { periodic: false, ..Self::new(d, a)? })
    }

    pub fn with_metric(self, metric: Metric) -> Self {
        TorusSpec { metric, ..self }
    }

    pub fn volume(&self) -> f64 {
        self.a.powi(self.d as i32)
    }

    /// Per-coordinate distance, `min(|x - y|, a - |x - y|)` when periodic.
    pub fn coordinate_distance(&self, x: f64, y: f64) -> f64 {
        let delta = (x - y).abs();
        if self.periodic {
            delta.min(self.a - delta)
        } else {
            delta
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let deltas = x.iter().zip(y).map(|(p, q)| self.coordinate_distance(*p, *q));
        match self.metric {
            Metric::Uniform => deltas.fold(0.0, f64::max),
            Metric::Euclidean => deltas.map(|t| t * t).sum::<f64>().sqrt(),
        }
    }

    /// `(epsilon / a)^d`.
    pub fn theta(&self, epsilon: f64) -> f64 {
        (epsilon / self.a).powi(self.d as i32)
    }

    /// Threshold giving coverage parameter `theta`.
    pub fn epsilon_for_theta(&self, theta: f64) -> f64 {
        self.a * theta.powf(1.0 / self.d as f64)
    }
}

/// A finite simple point set in a [`TorusSpec`]; point `i` is vertex `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub torus: TorusSpec,
    pub points: Vec<Vec<f64>>,
    pub seed: Option<u64>,
}

impl PointConfiguration {
    pub fn new(torus: TorusSpec, points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != torus.d) {
            return Err(Error::InvalidArgument(format!(
                "point {p:?} does not have {} coordinates",
                torus.d
            )));
        }
        Ok(PointConfiguration { torus, points, seed: None })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn uniform_points<R: Rng>(torus: &TorusSpec, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let p: Vec<f64> = (0..torus.d).map(|_| rng.random::<f64>() * torus.a).collect();
        // probability-zero collisions are redrawn
        if seen.insert(p.iter().map(|x| x.to_bits()).collect()) {
            points.push(p);
        }
    }
    points
}

/// Exactly `n` i.i.d. uniform points.
pub fn binomial_process(torus: TorusSpec, n: usize, seed: u64) -> PointConfiguration {
    let points = binomial_points(&torus, n, &mut rng_for(seed, 0));
    PointConfiguration { torus, points, seed: Some(seed) }
}

pub fn binomial_points<R: Rng>(torus: &TorusSpec, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    uniform_points(torus, n, rng)
}

/// `N ~ Poisson(lambda * a^d)` points, then `N` uniform points.
pub fn poisson_process(torus: TorusSpec, lambda: f64, seed: u64) -> Result<PointConfiguration> {
    let points = poisson_points(&torus, lambda, &mut rng_for(seed, 0))?;
    Ok(PointConfiguration { torus, points, seed: Some(seed) })
}

pub fn poisson_points<R: Rng>(torus: &TorusSpec, lambda: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("intensity {lambda} must be positive")));
    }
    let mean = lambda * torus.volume();
    if mean > POINT_CAP as f64 {
        return Err(Error::PointCap { count: mean as u64, cap: POINT_CAP });
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    Ok(uniform_points(torus, count, rng))
}

/// Appends a fixed grid of vertices along the perimeter of a non-periodic square.
///
/// Each side is split into `ceil(a / step)` equal segments. Returns the
/// vertex ids of the added points, which are placed after the existing ones.
pub fn add_boundary_grid(config: &mut PointConfiguration, step: f64) -> Result<Vec<VertexId>> {
    let torus = config.torus;
    if torus.d != 2 || torus.periodic {
        return Err(Error::InvalidArgument(
            "boundary grids need a non-periodic square in dimension 2".into(),
        ));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid step {step} must be positive")));
    }
    let m = (torus.a / step).ceil().max(1.0) as usize;
    let at = |i: usize| torus.a * i as f64 / m as f64;
    let mut added = Vec::with_capacity(4 * m);
    for i in 0..m {
        added.push(vec![at(i), 0.0]);
        added.push(vec![torus.a, at(i)]);
        added.push(vec![at(m - i), torus.a]);
        added.push(vec![0.0, at(m - i)]);
    }
    let first = config.points.len();
    config.points.extend(added);
    Ok((first..config.points.len()).map(|i| VertexId(i as u32)).collect())
}

/// Construction parameters for a Vietoris-Rips complex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipsParams {
    /// Points are joined when their distance is strictly below this threshold.
    pub epsilon: f64,
    /// Keep only simplices up to this dimension.
    pub max_dim: Option<usize>,
    pub simplex_cap: usize,
}

impl RipsParams {
    pub fn new(epsilon: f64) -> Self {
        RipsParams { epsilon, max_dim: None, simplex_cap: DEFAULT_SIMPLEX_CAP }
    }
}

/// The graph `{(i, j) : dist(x_i, x_j) < epsilon}`.
pub fn proximity_graph(config: &PointConfiguration, epsilon: f64) -> ProximityGraph {
    let n = config.len();
    let torus = &config.torus;
    let mut edges = Vec::new();
    // Cells are at least epsilon wide; at most about 4n of them.
    let budget = (4.0 * n.max(1) as f64).powf(1.0 / torus.d as f64).floor();
    let cells_per_side = (torus.a / epsilon).floor().min(budget) as usize;
    // A cell list needs at least three cells per side so neighbour offsets are distinct.
    if cells_per_side < 3 || torus.d > 4 {
        for i in 0..n {
            for j in i + 1..n {
                if torus.distance(&config.points[i], &config.points[j]) < epsilon {
                    edges.push((i, j));
                }
            }
        }
        return ProximityGraph::from_edges(n, &edges);
    }
    let m = cells_per_side;
    let width = torus.a / m as f64;
    let cell_coord = |x: f64| ((x / width).floor() as usize).min(m - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m.pow(torus.d as u32)];
    let mut coords: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, p) in config.points.iter().enumerate() {
        let c: Vec<usize> = p.iter().map(|x| cell_coord(*x)).collect();
        buckets[flat(&c, m)].push(i);
        coords.push(c);
    }
    let offsets: Vec<Vec<isize>> = (0..3usize.pow(torus.d as u32))
        .map(|mut code| {
            (0..torus.d)
                .map(|_| {
                    let o = (code % 3) as isize - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    for i in 0..n {
        for off in &offsets {
            let mut neighbour = Vec::with_capacity(torus.d);
            let mut valid = true;
            for (c, o) in coords[i].iter().zip(off) {
                let t = *c as isize + o;
                if torus.periodic {
                    neighbour.push(t.rem_euclid(m as isize) as usize);
                } else if t < 0 || t >= m as isize {
                    valid = false;
                    break;
                } else {
                    neighbour.push(t as usize);
                }
            }
            if !valid {
                continue;
            }
            for &j in &buckets[flat(&neighbour, m)] {
                if j > i && torus.distance(&config.points[i], &config.points[j]) < epsilon {
                    edges.push((i, j));
                }
            }
        }
    }
    ProximityGraph::from_edges(n, &edges)
}

fn flat(c: &[usize], m: usize) -> usize {
    c.iter().rev().fold(0, |acc, x| acc * m + x)
}

/// The Vietoris-Rips complex: its `k`-simplices are the `(k+1)`-cliques of the
/// proximity graph, built by incremental clique expansion.
pub fn rips_complex(config: &PointConfiguration, params: &RipsParams) -> Result<SimplicialComplex> {
    if !(params.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {} must be positive", params.epsilon)));
    }
    let graph = proximity_graph(config, params.epsilon);
    clique_complex(&graph, params.max_dim, params.simplex_cap)
}

/// The clique (flag) complex of a graph, optionally truncated at `max_dim`.
pub fn clique_complex(
    graph: &ProximityGraph,
    max_dim: Option<usize>,
    cap: usize,
) -> Result<SimplicialComplex> {
    let max_size = max_dim.map_or(usize::MAX, |d| d + 1);
    let mut levels: Vec<BTreeSet<Simplex>> = Vec::new();
    let mut count = 0usize;
    let mut stack: Vec<(Vec<VertexId>, Vec<usize>)> = Vec::new();
    for v in 0..graph.len() {
        let upper: Vec<usize> = graph.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        stack.push((vec![VertexId(v as u32)], upper));
        while let Some((clique, candidates)) = stack.pop() {
            count += 1;
            if count > cap {
                return Err(Error::SimplexCap { count: count as u128, cap });
            }
            let dim = clique.len() - 1;
            if levels.len() <= dim {
                levels.resize_with(dim + 1, BTreeSet::new);
            }
            if clique.len() < max_size {
                for (idx, &u) in candidates.iter().enumerate() {
                    let next: Vec<usize> = candidates[idx + 1..]
                        .iter()
                        .copied()
                        .filter(|&w| graph.has_edge(u, w))
                        .collect();
                    let mut grown = clique.clone();
                    grown.push(VertexId(u as u32));
                    stack.push((grown, next));
                }
            }
            levels[dim].insert(Simplex::from_sorted(clique));
        }
    }
    Ok(SimplicialComplex::from_closed_levels(levels, cap))
}

/// Vertices of a planar configuration outside the convex hull of the critical
/// vertices (`d = 2`), or outside the critical interval (`d = 1`).
pub fn outside_critical_domain(
    config: &PointConfiguration,
    critical: &[VertexId],
) -> Result<Vec<VertexId>> {
    let crit: Vec<&Vec<f64>> = critical
        .iter()
        .map(|v| {
            config.points.get(v.0 as usize).ok_or(Error::VertexNotFound(*v))
        })
        .collect::<Result<_>>()?;
    let inside: Box<dyn Fn(&[f64]) -> bool> = match config.torus.d {
        1 => {
            let lo = crit.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = crit.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Box::new(move |p: &[f64]| p[0] >= lo && p[0] <= hi)
        }
        2 => {
            let hull = convex_hull(crit.iter().map(|p| (p[0], p[1])).collect());
            Box::new(move |p: &[f64]| hull_contains(&hull, (p[0], p[1])))
        }
        d => {
            return Err(Error::InvalidArgument(format!(
                "domain pre-filtering is defined for d <= 2, got d = {d}"
            )))
        }
    };
    Ok((0..config.len())
        .filter(|&i| !inside(&config.points[i]))
        .map(|i| VertexId(i as u32))
        .collect())
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; counter-clockwise, no repeated end point.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn hull_contains(hull: &[(f64, f64)], p: (f64, f64)) -> bool {
    const TOL: f64 = 1e-12;
    match hull.len() {
        0 => false,
        1 => hull[0] == p,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            cross(a, b, p).abs() <= TOL
                && p.0 >= a.0.min(b.0) - TOL
                && p.0 <= a.0.max(b.0) + TOL
                && p.1 >= a.1.min(b.1) - TOL
                && p.1 <= a.1.max(b.1) + TOL
        }
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= -TOL),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(d: usize, a: f64, pts: &[&[f64]]) -> PointConfiguration {
        PointConfiguration::new(TorusSpec::new(d, a).unwrap(), pts.iter().map(|p| p.to_vec()).collect())
            .unwrap()
    }

    #[test]
    fn wraparound_distance() {
        let t = TorusSpec::new(1, 1.0).unwrap();
        assert!((t.distance(&[0.05], &[0.95]) - 0.1).abs() < 1e-12);
        let sq = TorusSpec::square(1, 1.0).unwrap();
        assert!((sq.distance(&[0.05], &[0.95]) - 0.9).abs() < 1e-12);
        let e = TorusSpec::new(2, 1.0).unwrap().with_metric(Metric::Euclidean);
        assert!((e.distance(&[0.0, 0.0], &[0.9, 0.2]) - (0.01f64 + 0.04).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn three_close_points_give_a_triangle() {
        let c = config(2, 1.0, &[&[0.1, 0.1], &[0.15, 0.1], &[0.1, 0.12]]);
        let rips = rips_complex(&c, &RipsParams::new(0.2)).unwrap();
        assert_eq!(rips.s_counts(), vec![3, 3, 1]);
    }

    #[test]
    fn distance_equal_to_epsilon_is_not_an_edge() {
        let c = config(1, 1.0, &[&[0.25], &[0.5]]);
        let rips = rips_complex(&c, &RipsParams::new(0.25)).unwrap();
        assert_eq!(rips.s_counts(), vec![2]);
    }

    #[test]
    fn edge_across_the_seam() {
        let c = config(1, 1.0, &[&[0.05], &[0.95]]);
        let rips = rips_complex(&c, &RipsParams::new(0.2)).unwrap();
        assert_eq!(rips.s_counts(), vec![2, 1]);
    }

    #[test]
    fn max_dim_truncates() {
        let c = config(2, 1.0, &[&[0.1, 0.1], &[0.11, 0.1], &[0.1, 0.11], &[0.11, 0.11]]);
        let mut params = RipsParams::new(0.1);
        assert_eq!(rips_complex(&c, &params).unwrap().s_counts(), vec![4, 6, 4, 1]);
        params.max_dim = Some(1);
        assert_eq!(rips_complex(&c, &params).unwrap().s_counts(), vec![4, 6]);
    }

    #[test]
    fn rips_cap_is_a_resource_error() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![0.01 * i as f64]).collect();
        let c = PointConfiguration::new(TorusSpec::new(1, 1.0).unwrap(), pts).unwrap();
        let params = RipsParams { epsilon: 0.5, max_dim: None, simplex_cap: 1000 };
        let err = rips_complex(&c, &params).unwrap_err();
        assert!(err.is_resource(), "{err}");
    }

    #[test]
    fn seeds_are_reproducible() {
        let t = TorusSpec::new(2, 1.0).unwrap();
        assert_eq!(binomial_process(t, 50, 3), binomial_process(t, 50, 3));
        assert_ne!(binomial_process(t, 50, 3), binomial_process(t, 50, 4));
        assert!(binomial_process(t, 0, 1).is_empty());
        let p = poisson_process(t, 20.0, 9).unwrap();
        assert_eq!(p, poisson_process(t, 20.0, 9).unwrap());
    }

    #[test]
    fn coordinates_stay_in_the_box() {
        let t = TorusSpec::new(3, 2.5).unwrap();
        let c = binomial_process(t, 500, 11);
        assert!(c.points.iter().flatten().all(|x| (0.0..2.5).contains(x)));
    }

    #[test]
    fn tiny_intensity_is_usually_empty() {
        let t = TorusSpec::new(2, 1.0).unwrap();
        let nonempty = (0..200).filter(|s| !poisson_process(t, 1e-4, *s).unwrap().is_empty()).count();
        assert!(nonempty <= 2);
    }

    #[test]
    fn poisson_rejects_bad_intensity() {
        let t = TorusSpec::new(2, 1.0).unwrap();
        assert!(poisson_process(t, 0.0, 1).is_err());
        assert!(poisson_process(t, 1e12, 1).unwrap_err().is_resource());
    }

    #[test]
    fn boundary_grid_on_square() {
        let mut c = PointConfiguration::new(TorusSpec::square(2, 2.0).unwrap(), vec![vec![1.0, 1.0]]).unwrap();
        let ids = add_boundary_grid(&mut c, 0.5).unwrap();
        assert_eq!(ids.len(), 16);
        assert_eq!(ids[0], VertexId(1));
        let uniq: HashSet<Vec<u64>> =
            c.points.iter().map(|p| p.iter().map(|x| x.to_bits()).collect()).collect();
        assert_eq!(uniq.len(), 17);
        for id in ids {
            let p = &c.points[id.0 as usize];
            assert!(p.iter().any(|x| *x == 0.0 || *x == 2.0));
        }
        let mut torus = binomial_process(TorusSpec::new(2, 1.0).unwrap(), 3, 0);
        assert!(add_boundary_grid(&mut torus, 0.5).is_err());
    }

    #[test]
    fn cell_list_matches_brute_force() {
        for periodic in [true, false] {
            let mut t = TorusSpec::new(2, 1.0).unwrap();
            t.periodic = periodic;
            let c = binomial_process(t, 300, 5);
            let eps = 0.08;
            let g = proximity_graph(&c, eps);
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    let close = t.distance(&c.points[i], &c.points[j]) < eps;
                    assert_eq!(g.has_edge(i, j), close, "{i} {j}");
                }
            }
        }
    }

    #[test]
    fn hull_filter() {
        let t = TorusSpec::square(2, 4.0).unwrap();
        let pts = vec![
            vec![0.0, 0.0], vec![2.0, 0.0], vec![2.0, 2.0], vec![0.0, 2.0],
            vec![1.0, 1.0], vec![3.0, 1.0], vec![2.0, 1.0],
        ];
        let c = PointConfiguration::new(t, pts).unwrap();
        let crit: Vec<VertexId> = (0..4).map(VertexId).collect();
        assert_eq!(outside_critical_domain(&c, &crit).unwrap(), vec![VertexId(5)]);
        let line = PointConfiguration::new(
            TorusSpec::square(1, 4.0).unwrap(),
            vec![vec![1.0], vec![3.0], vec![2.0], vec![3.5]],
        )
        .unwrap();
        assert_eq!(
            outside_critical_domain(&line, &[VertexId(0), VertexId(1)]).unwrap(),
            vec![VertexId(3)]
        );
    }
}
