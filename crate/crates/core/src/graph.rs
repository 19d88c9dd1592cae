//! Weighted graphs with a vertex measure.
//!
//! A [`WeightedGraph`] stores symmetric positive edge weights `ω_xy`, a
//! positive vertex measure `μ(x)` and the cached weighted degrees
//! `deg(x) = Σ_{y∼x} ω_xy`. It is immutable after construction; every
//! operator in the crate reads it through shared references.
//!
//! Distances are hop counts. Edge weights never enter [`WeightedGraph::distance`].

use std::collections::VecDeque;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Retry cap for rejecting disconnected random draws.
pub const RANDOM_RESAMPLE_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
    degree: Vec<f64>,
}

/// Regularity constants of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphBounds {
    /// Smallest edge weight.
    pub omega_min: f64,
    /// `max_{x∼y} deg(x)/ω_xy`.
    pub d_omega: f64,
    /// `max_x deg(x)/μ(x)`.
    pub d_mu: f64,
    /// Largest vertex measure.
    pub mu_max: f64,
}

/// On-disk graph format: `{vertices, edges: [[u, v, ω]], measure}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub measure: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph from an undirected edge list. Each unordered pair may
    /// appear once; weights and measures must be finite and positive.
    /// Disconnected graphs are accepted; see [`WeightedGraph::is_connected`].
    pub fn new(vertices: usize, edges: &[(usize, usize, f64)], measure: Vec<f64>) -> Result<Self> {
        if measure.len() != vertices {
            return Err(Error::LengthMismatch { expected: vertices, got: measure.len() });
        }
        for (x, &m) in measure.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidGraph(format!("measure at vertex {x} is {m}, must be positive")));
            }
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vertices];
        for &(u, v, w) in edges {
            if u >= vertices || v >= vertices {
                return Err(Error::VertexOutOfRange(u.max(v)));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has weight {w}, must be positive")));
            }
            if adjacency[u].iter().any(|&(y, _)| y == v) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(y, _)| y);
        }
        let degree = adjacency.iter().map(|list| list.iter().map(|&(_, w)| w).sum()).collect();
        Ok(Self { adjacency, measure, degree })
    }

    /// Like [`WeightedGraph::new`] but rejects disconnected graphs.
    pub fn new_connected(vertices: usize, edges: &[(usize, usize, f64)], measure: Vec<f64>) -> Result<Self> {
        let g = Self::new(vertices, edges, measure)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Neighbors of `x` with the connecting edge weight, sorted by vertex.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// Cached weighted degree `Σ_{y∼x} ω_xy`.
    pub fn degree(&self, x: usize) -> f64 {
        self.degree[x]
    }

    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.adjacency[x].binary_search_by_key(&y, |&(z, _)| z).ok().map(|i| self.adjacency[x][i].1)
    }

    /// Edges as `(u, v, ω)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&(v, _)| u < v).map(move |&(v, w)| (u, v, w)))
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn max_degree_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when every edge has weight exactly one.
    pub fn is_unweighted(&self) -> bool {
        self.edges().all(|(_, _, w)| w == 1.0)
    }

    /// True when `μ(x) = deg(x)` at every vertex.
    pub fn has_degree_measure(&self) -> bool {
        self.measure.iter().zip(&self.degree).all(|(m, d)| m == d)
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(x))
        }
    }

    pub fn bounds(&self) -> GraphBounds {
        let mut omega_min = f64::INFINITY;
        let mut d_omega: f64 = 0.0;
        for (x, list) in self.adjacency.iter().enumerate() {
            for &(_, w) in list {
                omega_min = omega_min.min(w);
                d_omega = d_omega.max(self.degree[x] / w);
            }
        }
        let d_mu = self.degree.iter().zip(&self.measure).map(|(d, m)| d / m).fold(0.0, f64::max);
        let mu_max = self.measure.iter().copied().fold(0.0, f64::max);
        GraphBounds { omega_min, d_omega, d_mu, mu_max }
    }

    /// Hop distances from `x`; `None` for unreachable vertices.
    pub fn distances_from(&self, x: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[x] = Some(0);
        queue.push_back(x);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap();
            for &(y, _) in &self.adjacency[v] {
                if dist[y].is_none() {
                    dist[y] = Some(dv + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn distance(&self, x: usize, y: usize) -> Option<usize> {
        self.distances_from(x)[y]
    }

    /// `{y : d(x, y) ≤ r}` in increasing vertex order.
    pub fn ball(&self, x: usize, r: usize) -> Vec<usize> {
        self.distances_from(x).into_iter().enumerate().filter_map(|(y, d)| d.filter(|&d| d <= r).map(|_| y)).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    pub fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            for (y, d) in self.distances_from(s).into_iter().enumerate() {
                if d.is_some() {
                    seen[y] = true;
                }
            }
        }
        count
    }

    /// Largest hop distance; `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for x in 0..self.vertex_count() {
            for d in self.distances_from(x) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Copy of the graph with vertex `x` renamed to `perm[x]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("relabeling must be a permutation".into()));
        }
        let edges: Vec<_> = self.edges().map(|(u, v, w)| (perm[u], perm[v], w)).collect();
        let mut measure = vec![0.0; n];
        for (x, &m) in self.measure.iter().enumerate() {
            measure[perm[x]] = m;
        }
        Self::new(n, &edges, measure)
    }

    /// Disjoint union; vertices of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let shift = self.vertex_count();
        let mut edges: Vec<_> = self.edges().collect();
        edges.extend(other.edges().map(|(u, v, w)| (u + shift, v + shift, w)));
        let mut measure = self.measure.clone();
        measure.extend_from_slice(&other.measure);
        Self::new(shift + other.vertex_count(), &edges, measure).expect("union of valid graphs is valid")
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile { vertices: self.vertex_count(), edges: self.edges().collect(), measure: self.measure.clone() }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Self::new(file.vertices, &file.edges, file.measure.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Graph families for [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    Hypercube(usize),
    /// `Z_side^dim` with nearest-neighbor edges.
    Torus {
        dim: usize,
        side: usize,
    },
    /// Erdős–Rényi `G(n, p)`, resampled until connected.
    Random {
        n: usize,
        p: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    Unit,
    /// Independent weights uniform on `[0.5, 2]`.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureKind {
    Unit,
    /// `μ(x) = deg(x)` (weighted degree).
    Degree,
    /// Independent measures uniform on `[0.5, 2]`.
    Random(u64),
}

pub fn generate(family: Family, weighting: Weighting, measure: MeasureKind) -> Result<WeightedGraph> {
    let (n, pairs) = family_pairs(family)?;
    let weights: Vec<f64> = match weighting {
        Weighting::Unit => vec![1.0; pairs.len()],
        Weighting::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..pairs.len()).map(|_| rng.gen_range(0.5..2.0)).collect()
        }
    };
    let edges: Vec<_> = pairs.iter().zip(&weights).map(|(&(u, v), &w)| (u, v, w)).collect();
    let mut degree = vec![0.0; n];
    for &(u, v, w) in &edges {
        degree[u] += w;
        degree[v] += w;
    }
    let measure = match measure {
        MeasureKind::Unit => vec![1.0; n],
        MeasureKind::Degree => {
            if n > 1 && degree.contains(&0.0) {
                return Err(Error::InvalidGraph("degree measure needs every vertex to have an edge".into()));
            }
            degree
        }
        MeasureKind::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.gen_range(0.5..2.0)).collect()
        }
    };
    WeightedGraph::new_connected(n, &edges, measure)
}

fn family_pairs(family: Family) -> Result<(usize, Vec<(usize, usize)>)> {
    let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
    match family {
        Family::Path(n) => {
            if n < 1 {
                return bad("path needs at least one vertex");
            }
            Ok((n, (1..n).map(|i| (i - 1, i)).collect()))
        }
        Family::Cycle(n) => {
            if n < 3 {
                return bad("cycle needs at least three vertices");
            }
            Ok((n, (0..n).map(|i| (i, (i + 1) % n)).collect()))
        }
        Family::Complete(n) => {
            if n < 1 {
                return bad("complete graph needs at least one vertex");
            }
            Ok((n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()))
        }
        Family::Hypercube(d) => {
            if !(1..=20).contains(&d) {
                return bad("hypercube dimension must be in 1..=20");
            }
            let n = 1usize << d;
            let pairs = (0..n).flat_map(|x| (0..d).map(move |b| (x, x ^ (1 << b))).filter(|&(x, y)| x < y)).collect();
            Ok((n, pairs))
        }
        Family::Torus { dim, side } => {
            if dim < 1 {
                return bad("torus dimension must be positive");
            }
            if side < 5 {
                return bad("torus side must be at least 5");
            }
            let n = side.checked_pow(dim as u32).filter(|&n| n <= 1 << 20);
            let Some(n) = n else { return bad("torus too large") };
            let mut pairs = Vec::with_capacity(n * dim);
            for x in 0..n {
                let mut stride = 1;
                for _ in 0..dim {
                    let coord = (x / stride) % side;
                    let y = x - coord * stride + ((coord + 1) % side) * stride;
                    pairs.push((x.min(y), x.max(y)));
                    stride *= side;
                }
            }
            Ok((n, pairs))
        }
        Family::Random { n, p, seed } => {
            if n < 2 || !(p > 0.0 && p <= 1.0) {
                return bad("random graph needs n >= 2 and p in (0, 1]");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..RANDOM_RESAMPLE_CAP {
                let pairs: Vec<_> =
                    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(p)).collect();
                if pairs_connected(n, &pairs) {
                    return Ok((n, pairs));
                }
            }
            Err(Error::ResampleCapExceeded(RANDOM_RESAMPLE_CAP))
        }
    }
}

fn pairs_connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let g = WeightedGraph::new(n, &pairs.iter().map(|&(u, v)| (u, v, 1.0)).collect::<Vec<_>>(), vec![1.0; n]);
    g.map(|g| g.is_connected()).unwrap_or(false)
}

fn parse_field<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

impl FromStr for Family {
    type Err = Error;

    /// `path:N`, `cycle:N`, `complete:N`, `hypercube:D`, `torus:D:M`, `random:N:P:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["path", n] => Ok(Family::Path(parse_field(n, "vertex count")?)),
            ["cycle", n] => Ok(Family::Cycle(parse_field(n, "vertex count")?)),
            ["complete", n] => Ok(Family::Complete(parse_field(n, "vertex count")?)),
            ["hypercube", d] => Ok(Family::Hypercube(parse_field(d, "dimension")?)),
            ["torus", d, m] => Ok(Family::Torus { dim: parse_field(d, "dimension")?, side: parse_field(m, "side")? }),
            ["random", n, p, seed] => Ok(Family::Random {
                n: parse_field(n, "vertex count")?,
                p: parse_field(p, "edge probability")?,
                seed: parse_field(seed, "seed")?,
            }),
            _ => Err(Error::Parse(format!("unknown graph family {s:?}"))),
        }
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "unit" => Ok(Weighting::Unit),
            Some(("random", seed)) => Ok(Weighting::Random(parse_field(seed, "seed")?)),
            _ => Err(Error::Parse(format!("unknown weighting {s:?}"))),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "unit" => Ok(MeasureKind::Unit),
            None if s == "degree" => Ok(MeasureKind::Degree),
            Some(("random", seed)) => Ok(MeasureKind::Random(parse_field(seed, "seed")?)),
            _ => Err(Error::Parse(format!("unknown measure {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(f: Family) -> WeightedGraph {
        generate(f, Weighting::Unit, MeasureKind::Unit).unwrap()
    }

    #[test]
    fn path3_structure() {
        let g = unit(Family::Path(3));
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(1), 2.0);
    }

    #[test]
    fn torus_degree_measure() {
        let g = generate(Family::Torus { dim: 2, side: 5 }, Weighting::Unit, MeasureKind::Degree).unwrap();
        assert_eq!(g.vertex_count(), 25);
        assert!(g.measures().iter().all(|&m| m == 4.0));
        assert_eq!(g.bounds().d_mu, 1.0);
    }

    #[test]
    fn bounds_examples() {
        let b = unit(Family::Path(3)).bounds();
        assert_eq!((b.omega_min, b.d_omega, b.d_mu, b.mu_max), (1.0, 2.0, 2.0, 1.0));
        assert_eq!(unit(Family::Complete(4)).bounds().d_omega, 3.0);
        assert_eq!(unit(Family::Complete(7)).bounds().d_omega, 6.0);

        let edge = WeightedGraph::new(2, &[(0, 1, 2.0)], vec![4.0, 4.0]).unwrap();
        assert_eq!(edge.bounds().d_mu, 0.5);
    }

    #[test]
    fn distances() {
        let p = unit(Family::Path(5));
        assert_eq!(p.distance(2, 2), Some(0));
        assert_eq!(p.distance(0, 4), Some(4));
        let t = unit(Family::Torus { dim: 2, side: 5 });
        // (0,0) to (2,2) is as far as one can get on Z_5^2.
        assert_eq!(t.distance(0, 2 + 2 * 5), Some(4));
        assert_eq!(t.diameter(), Some(4));
        assert_eq!(t.ball(0, 1).len(), 5);
        assert_eq!(t.ball(0, 2).len(), 13);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightedGraph::new(2, &[(0, 0, 1.0)], vec![1.0; 2]).is_err());
        assert!(WeightedGraph::new(2, &[(0, 1, 0.0)], vec![1.0; 2]).is_err());
        assert!(WeightedGraph::new(2, &[(0, 1, 1.0), (1, 0, 1.0)], vec![1.0; 2]).is_err());
        assert!(WeightedGraph::new(2, &[(0, 1, 1.0)], vec![1.0, -1.0]).is_err());
        assert!(WeightedGraph::new_connected(3, &[(0, 1, 1.0)], vec![1.0; 3]).is_err());
        assert!(generate(Family::Torus { dim: 2, side: 4 }, Weighting::Unit, MeasureKind::Unit).is_err());
    }

    #[test]
    fn random_graph_is_connected_and_deterministic() {
        let f = Family::Random { n: 12, p: 0.3, seed: 9 };
        let a = generate(f, Weighting::Random(1), MeasureKind::Degree).unwrap();
        let b = generate(f, Weighting::Random(1), MeasureKind::Degree).unwrap();
        assert!(a.is_connected());
        assert_eq!(a, b);
    }

    #[test]
    fn sparse_random_graph_hits_resample_cap() {
        let f = Family::Random { n: 40, p: 0.001, seed: 3 };
        assert!(matches!(
            generate(f, Weighting::Unit, MeasureKind::Unit),
            Err(Error::ResampleCapExceeded(RANDOM_RESAMPLE_CAP))
        ));
    }

    #[test]
    fn hypercube_is_regular() {
        let g = unit(Family::Hypercube(3));
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.edge_count(), 12);
        assert!((0..8).all(|x| g.degree(x) == 3.0));
    }

    #[test]
    fn json_round_trip() {
        let g = generate(Family::Cycle(6), Weighting::Random(4), MeasureKind::Random(5)).unwrap();
        let back = WeightedGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn parses_specs() {
        assert_eq!("torus:2:5".parse::<Family>().unwrap(), Family::Torus { dim: 2, side: 5 });
        assert_eq!("random:10:0.5:3".parse::<Family>().unwrap(), Family::Random { n: 10, p: 0.5, seed: 3 });
        assert_eq!("degree".parse::<MeasureKind>().unwrap(), MeasureKind::Degree);
        assert_eq!("random:4".parse::<Weighting>().unwrap(), Weighting::Random(4));
        assert!("torus:2".parse::<Family>().is_err());
    }
}
