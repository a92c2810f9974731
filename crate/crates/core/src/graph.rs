//! Undirected graphs on `0..n` with bitset rows, used for cliques of proximity graphs.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProximityGraph {
    adj: Vec<Vec<usize>>,
    rows: Vec<Bitset>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bitset(Vec<u64>);

impl Bitset {
    fn empty(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn unset(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn and(&self, other: &Bitset) -> Bitset {
        Bitset(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn first(&self) -> Option<usize> {
        self.0.iter().position(|w| *w != 0).map(|k| 64 * k + self.0[k].trailing_zeros() as usize)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(64 * k + t)
            })
        })
    }
}

impl ProximityGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut rows = vec![Bitset::empty(n); n];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range");
            if u == v || rows[u].get(v) {
                continue;
            }
            rows[u].set(v);
            rows[v].set(u);
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        ProximityGraph { adj, rows }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u].get(v)
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Size of a largest clique (0 for the empty graph).
    ///
    /// Branch and bound over bitsets with a greedy colouring bound.
    pub fn clique_number(&self) -> usize {
        let n = self.len();
        if n == 0 {
            return 0;
        }
        let mut best = 1;
        // Each vertex's clique is searched among later vertices of a degeneracy order.
        let order = self.degeneracy_order();
        let mut position = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        for (i, &v) in order.iter().enumerate() {
            let mut later = Bitset::empty(n);
            for &u in &self.adj[v] {
                if position[u] > i {
                    later.set(u);
                }
            }
            if later.count() < best {
                continue;
            }
            self.expand(1, later, &mut best);
        }
        best
    }

    fn expand(&self, size: usize, mut candidates: Bitset, best: &mut usize) {
        let (order, colours) = self.colour_sort(&candidates);
        for idx in (0..order.len()).rev() {
            if size + colours[idx] <= *best {
                return;
            }
            let v = order[idx];
            let next = candidates.and(&self.rows[v]);
            if next.is_empty() {
                *best = (*best).max(size + 1);
            } else {
                self.expand(size + 1, next, best);
            }
            candidates.unset(v);
        }
    }

    /// Greedy colouring of `candidates`; returns vertices by non-decreasing colour
    /// together with their colour numbers (starting at 1).
    fn colour_sort(&self, candidates: &Bitset) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = candidates.clone();
        let mut order = Vec::with_capacity(candidates.count());
        let mut colours = Vec::with_capacity(order.capacity());
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut available = uncoloured.clone();
            while let Some(v) = available.first() {
                available.unset(v);
                uncoloured.unset(v);
                for (a, r) in available.0.iter_mut().zip(&self.rows[v].0) {
                    *a &= !r;
                }
                order.push(v);
                colours.push(colour);
            }
        }
        (order, colours)
    }

    fn degeneracy_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let max_degree = degree.iter().copied().max().unwrap_or(0);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_degree + 1];
        for (v, &d) in degree.iter().enumerate() {
            buckets[d].push(v);
        }
        let mut removed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut low = 0;
        while order.len() < n {
            while buckets[low].is_empty() {
                low += 1;
            }
            let v = buckets[low].pop().expect("non-empty bucket");
            if removed[v] || degree[v] != low {
                continue;
            }
            removed[v] = true;
            order.push(v);
            for &u in &self.adj[v] {
                if !removed[u] {
                    degree[u] -= 1;
                    buckets[degree[u]].push(u);
                    low = low.min(degree[u]);
                }
            }
        }
        order
    }

    /// `counts[k - 1]` is the number of `k`-cliques, for `k` up to `max_size`.
    pub fn count_cliques(&self, max_size: usize) -> Vec<u64> {
        let mut counts = vec![0u64; max_size];
        if max_size == 0 {
            return counts;
        }
        for v in 0..self.len() {
            let mut upper = Bitset::empty(self.len());
            for &u in self.adj[v].iter().filter(|&&u| u > v) {
                upper.set(u);
            }
            self.count_from(1, &upper, &mut counts);
        }
        counts
    }

    fn count_from(&self, size: usize, candidates: &Bitset, counts: &mut [u64]) {
        counts[size - 1] += 1;
        if size == counts.len() {
            return;
        }
        if size + 1 == counts.len() {
            counts[size] += candidates.count() as u64;
            return;
        }
        // each clique is extended only by vertices larger than its last one
        let mut rest = candidates.clone();
        let members: Vec<usize> = candidates.ones().collect();
        for v in members {
            rest.unset(v);
            self.count_from(size + 1, &rest.and(&self.rows[v]), counts);
        }
    }
}
