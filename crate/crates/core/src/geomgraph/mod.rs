//! One-type and bipartite geometric graphs.
//!
//! Edges use the closed-ball rule: two points are joined when their
//! distance in the region metric is at most the radius, ties included.

mod dsu;
mod grid;

use std::io::Write;

pub use dsu::DisjointSets;
pub use grid::{closed_ball_d2, NeighborGrid, MAX_DIM};

use crate::error::{Error, Result};
use crate::pointprocess::{PointPattern, Region, RegionKind};

/// Read access to an undirected graph on vertices `0..vertex_count()`.
pub trait Adjacency {
    fn vertex_count(&self) -> usize;
    fn neighbors(&self, v: usize) -> &[u32];

    fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    fn edge_count(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.degree(v)).sum::<usize>() / 2
    }
}

/// Graphs whose vertices sit in a region, for face-crossing queries.
pub trait SpatialGraph: Adjacency {
    fn region(&self) -> &Region;

    /// Distance from a face within which an anchor vertex touches it.
    fn face_margin(&self) -> f64;

    /// Vertices (with positions) whose contact with a face counts.
    fn anchors(&self) -> impl Iterator<Item = (usize, &[f64])>;
}

/// Undirected simple graph in compressed adjacency form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an undirected edge list; duplicates and loops are dropped.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Graph {
        let mut directed: Vec<(u32, u32)> = edges
            .iter()
            .filter(|(a, b)| a != b)
            .flat_map(|&(a, b)| [(a as u32, b as u32), (b as u32, a as u32)])
            .collect();
        directed.sort_unstable();
        directed.dedup();
        let mut offsets = vec![0usize; vertex_count + 1];
        for &(a, _) in &directed {
            offsets[a as usize + 1] += 1;
        }
        for v in 0..vertex_count {
            offsets[v + 1] += offsets[v];
        }
        Graph { offsets, targets: directed.into_iter().map(|(_, b)| b).collect() }
    }

    pub fn edgeless(vertex_count: usize) -> Graph {
        Graph { offsets: vec![0; vertex_count + 1], targets: Vec::new() }
    }

    pub fn complete(vertex_count: usize) -> Graph {
        let edges: Vec<_> = (0..vertex_count).flat_map(|a| (a + 1..vertex_count).map(move |b| (a, b))).collect();
        Graph::from_edges(vertex_count, &edges)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }
}

impl Adjacency for Graph {
    fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// `G(X, s)`: one vertex class, edge iff distance ≤ `s`.
#[derive(Clone, Debug)]
pub struct UniGraph {
    points: PointPattern,
    threshold: f64,
    graph: Graph,
}

impl UniGraph {
    pub fn points(&self) -> &PointPattern {
        &self.points
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }
}

impl Adjacency for UniGraph {
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        self.graph.neighbors(v)
    }
}

impl SpatialGraph for UniGraph {
    fn region(&self) -> &Region {
        self.points.region()
    }

    /// Half the connection distance: the radius of the balls that overlap.
    fn face_margin(&self) -> f64 {
        self.threshold / 2.0
    }

    fn anchors(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.points.points().enumerate()
    }
}

/// `G(X, Y, r)`: left vertices `0..|X|`, right vertices `|X|..|X|+|Y|`.
#[derive(Clone, Debug)]
pub struct BipartiteGraph {
    left: PointPattern,
    right: PointPattern,
    radius: f64,
    graph: Graph,
}

impl BipartiteGraph {
    pub fn left(&self) -> &PointPattern {
        &self.left
    }

    pub fn right(&self) -> &PointPattern {
        &self.right
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn left_len(&self) -> usize {
        self.left.len()
    }

    /// Right-vertex indices (0-based within `Y`) adjacent to left vertex `i`.
    pub fn right_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.left.len();
        self.graph.neighbors(i).iter().map(move |&v| v as usize - m)
    }

    /// Left-vertex indices adjacent to right vertex `j`.
    pub fn left_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.graph.neighbors(self.left.len() + j).iter().map(|&v| v as usize)
    }

    /// Writes `left,right` index pairs, one edge per row.
    pub fn write_edges_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "left,right")?;
        for i in 0..self.left.len() {
            for j in self.right_neighbors(i) {
                writeln!(out, "{i},{j}")?;
            }
        }
        Ok(())
    }
}

impl Adjacency for BipartiteGraph {
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        self.graph.neighbors(v)
    }
}

impl SpatialGraph for BipartiteGraph {
    fn region(&self) -> &Region {
        self.left.region()
    }

    fn face_margin(&self) -> f64 {
        self.radius
    }

    /// Only type-A vertices anchor a crossing.
    fn anchors(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.left.points().enumerate()
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::param(format!("radius must be positive, got {r}")))
    }
}

fn check_regions(x: &PointPattern, y: &PointPattern) -> Result<()> {
    if x.region().same_as(y.region()) {
        Ok(())
    } else {
        Err(Error::param(format!("patterns live in different regions: {:?} vs {:?}", x.region(), y.region())))
    }
}

/// Builds `G(X, Y, r)` with a cell list over `Y`.
pub fn build_bipartite(x: &PointPattern, y: &PointPattern, r: f64) -> Result<BipartiteGraph> {
    check_regions(x, y)?;
    check_radius(r)?;
    let m = x.len();
    let mut edges = Vec::new();
    if !y.is_empty() {
        let grid = NeighborGrid::new(y, r)?;
        for (i, p) in x.points().enumerate() {
            grid.for_each_neighbor(p, |j, _| edges.push((i, m + j)));
        }
    }
    Ok(BipartiteGraph { left: x.clone(), right: y.clone(), radius: r, graph: Graph::from_edges(m + y.len(), &edges) })
}

/// Builds `G(X, s)` with a cell list over `X`.
pub fn build_unigraph(x: &PointPattern, s: f64) -> Result<UniGraph> {
    check_radius(s)?;
    let mut edges = Vec::new();
    if !x.is_empty() {
        let grid = NeighborGrid::new(x, s)?;
        for (i, p) in x.points().enumerate() {
            grid.for_each_neighbor(p, |j, _| {
                if j > i {
                    edges.push((i, j));
                }
            });
        }
    }
    Ok(UniGraph { points: x.clone(), threshold: s, graph: Graph::from_edges(x.len(), &edges) })
}

/// Connected-component labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub labels: Vec<usize>,
    pub count: usize,
}

pub fn components<G: Adjacency + ?Sized>(graph: &G) -> Components {
    let n = graph.vertex_count();
    let mut sets = DisjointSets::new(n);
    for v in 0..n {
        for &w in graph.neighbors(v) {
            if (w as usize) > v {
                sets.union(v, w as usize);
            }
        }
    }
    Components { count: sets.count(), labels: sets.labels() }
}

/// `G¹`: graph on `X` joining pairs with a common neighbor in `G(X, Y, r)`.
pub fn build_g1(x: &PointPattern, y: &PointPattern, r: f64) -> Result<Graph> {
    let bip = build_bipartite(x, y, r)?;
    let mut edges = Vec::new();
    for j in 0..y.len() {
        let nb: Vec<usize> = bip.left_neighbors(j).collect();
        for (k, &a) in nb.iter().enumerate() {
            for &b in &nb[k + 1..] {
                edges.push((a, b));
            }
        }
    }
    Ok(Graph::from_edges(x.len(), &edges))
}

/// `G²`: the same construction with the roles of `X` and `Y` exchanged.
pub fn build_g2(x: &PointPattern, y: &PointPattern, r: f64) -> Result<Graph> {
    build_g1(y, x, r)
}

/// Whether `G¹(X, Y, r)` is connected.
///
/// Two `X` points are adjacent in `G¹` exactly when they are at distance
/// two in the bipartite graph, so `G¹` is connected iff all `X` points share
/// one bipartite component. Isolated `Y` points play no role.
pub fn is_connected_g1(x: &PointPattern, y: &PointPattern, r: f64) -> Result<bool> {
    check_regions(x, y)?;
    check_radius(r)?;
    if x.len() <= 1 {
        return Ok(true);
    }
    if y.is_empty() {
        return Ok(false);
    }
    let bip = build_bipartite(x, y, r)?;
    let labels = components(&bip).labels;
    Ok(labels[..x.len()].iter().all(|&l| l == labels[0]))
}

pub fn min_degree<G: Adjacency + ?Sized>(graph: &G) -> Result<usize> {
    (0..graph.vertex_count())
        .map(|v| graph.degree(v))
        .min()
        .ok_or_else(|| Error::domain("minimum degree of a graph with no vertices"))
}

/// Whether `G¹` built from `bip` has a vertex of degree zero.
///
/// A left vertex is isolated in `G¹` iff each of its right neighbors has no
/// other left neighbor. Runs in time linear in the edge count.
pub fn g1_has_isolated_vertex(bip: &BipartiteGraph) -> bool {
    (0..bip.left_len()).any(|i| bip.right_neighbors(i).all(|j| bip.degree(bip.left_len() + j) == 1))
}

/// Whether some component contains anchors touching both faces orthogonal to `axis`.
///
/// An anchor touches the low face when its coordinate is at most the
/// graph's face margin, and the high face when it is at least `side - margin`.
pub fn crossing_exists<G: SpatialGraph + ?Sized>(graph: &G, axis: usize) -> Result<bool> {
    let region = *graph.region();
    if region.kind == RegionKind::Torus {
        return Err(Error::domain("crossing is undefined on a torus"));
    }
    if axis >= region.dim {
        return Err(Error::param(format!("axis {axis} out of range for dimension {}", region.dim)));
    }
    let margin = graph.face_margin();
    let comps = components(graph);
    let mut low = vec![false; comps.count];
    let mut high = vec![false; comps.count];
    for (v, p) in graph.anchors() {
        let c = comps.labels[v];
        if p[axis] <= margin {
            low[c] = true;
        }
        if p[axis] >= region.side - margin {
            high[c] = true;
        }
        if low[c] && high[c] {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::sample_poisson;

    fn pattern(points: &[[f64; 2]], side: f64) -> PointPattern {
        PointPattern::from_points(Region::square(side).unwrap(), points).unwrap()
    }

    #[test]
    fn boundary_distance_is_an_edge() {
        let x = pattern(&[[0.0, 0.0]], 2.0);
        let y = pattern(&[[0.3, 0.0]], 2.0);
        let g = build_bipartite(&x, &y, 0.3).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g = build_bipartite(&x, &y, 0.3f64.next_down()).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn empty_right_side_has_no_edges() {
        let x = pattern(&[[0.5, 0.5], [0.6, 0.5]], 1.0);
        let y = pattern(&[], 1.0);
        assert_eq!(build_bipartite(&x, &y, 0.5).unwrap().edge_count(), 0);
        assert_eq!(build_g1(&x, &y, 0.5).unwrap().edge_count(), 0);
        assert!(!is_connected_g1(&x, &y, 0.5).unwrap());
    }

    #[test]
    fn mismatched_regions_rejected() {
        let x = pattern(&[[0.5, 0.5]], 1.0);
        let y = pattern(&[[0.5, 0.5]], 2.0);
        assert!(matches!(build_bipartite(&x, &y, 0.1), Err(Error::Parameter(_))));
        assert!(build_bipartite(&x, &x, 0.0).is_err());
    }

    #[test]
    fn unigraph_edge_rule() {
        let x = pattern(&[[0.1, 0.1], [0.1, 0.4]], 1.0);
        let s = 0.4 - 0.1;
        assert_eq!(build_unigraph(&x, s).unwrap().edge_count(), 1);
        let single = pattern(&[[0.5, 0.5]], 1.0);
        assert_eq!(build_unigraph(&single, 0.5).unwrap().edge_count(), 0);
    }

    #[test]
    fn g1_small_example() {
        let x = pattern(&[[0.0, 0.0], [1.0, 0.0]], 2.0);
        let y = pattern(&[[0.5, 0.0]], 2.0);
        let g = build_g1(&x, &y, 0.5).unwrap();
        assert!(g.has_edge(0, 1));
        assert!(is_connected_g1(&x, &y, 0.5).unwrap());
        let g2 = build_g2(&x, &y, 0.5).unwrap();
        assert_eq!(g2.vertex_count(), 1);
    }

    #[test]
    fn is_connected_trivial_cases() {
        let x = pattern(&[[0.5, 0.5]], 1.0);
        let y = pattern(&[], 1.0);
        assert!(is_connected_g1(&x, &y, 0.1).unwrap());
    }

    #[test]
    fn component_counts() {
        assert_eq!(components(&Graph::edgeless(5)).count, 5);
        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(components(&path).count, 1);
    }

    #[test]
    fn min_degree_cases() {
        assert_eq!(min_degree(&Graph::edgeless(3)).unwrap(), 0);
        assert_eq!(min_degree(&Graph::complete(4)).unwrap(), 3);
        assert!(matches!(min_degree(&Graph::edgeless(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn crossing_cases() {
        let mid = build_unigraph(&pattern(&[[5.0, 5.0]], 10.0), 2.0).unwrap();
        assert!(!crossing_exists(&mid, 0).unwrap());

        // connection distance 2, so margin 1; points spaced 0.5 from x=0.5 to x=9.5
        let chain: Vec<[f64; 2]> = (0..=18).map(|k| [0.5 + 0.5 * k as f64, 5.0]).collect();
        let g = build_unigraph(&pattern(&chain, 10.0), 2.0).unwrap();
        assert!(crossing_exists(&g, 0).unwrap());
        assert!(!crossing_exists(&g, 1).unwrap());
        assert!(crossing_exists(&g, 2).is_err());

        let torus = Region::new(RegionKind::Torus, 10.0, 2).unwrap();
        let t = build_unigraph(&PointPattern::from_points(torus, &chain).unwrap(), 2.0).unwrap();
        assert!(matches!(crossing_exists(&t, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn bipartite_crossing_uses_type_a_anchors() {
        // A chain alternating A and B; B points alone at the faces do not anchor.
        let a: Vec<[f64; 2]> = (0..10).map(|k| [0.5 + k as f64, 5.0]).collect();
        let b: Vec<[f64; 2]> = (0..9).map(|k| [1.0 + k as f64, 5.0]).collect();
        let g = build_bipartite(&pattern(&a, 10.0), &pattern(&b, 10.0), 0.5).unwrap();
        assert!(crossing_exists(&g, 0).unwrap());
        let g = build_bipartite(&pattern(&a[..9], 10.0), &pattern(&b, 10.0), 0.5).unwrap();
        assert!(!crossing_exists(&g, 0).unwrap());
    }

    #[test]
    fn isolated_check_matches_explicit_g1() {
        for seed in 0..30 {
            let x = sample_poisson(Region::unit_square(), 20.0, seed).unwrap();
            let y = sample_poisson(Region::unit_square(), 20.0, 1000 + seed).unwrap();
            if x.is_empty() {
                continue;
            }
            let r = 0.15;
            let bip = build_bipartite(&x, &y, r).unwrap();
            let g1 = build_g1(&x, &y, r).unwrap();
            assert_eq!(g1_has_isolated_vertex(&bip), min_degree(&g1).unwrap() == 0);
        }
    }

    #[test]
    fn edges_csv() {
        let x = pattern(&[[0.0, 0.0]], 2.0);
        let y = pattern(&[[0.3, 0.0], [1.5, 1.5]], 2.0);
        let mut buf = Vec::new();
        build_bipartite(&x, &y, 0.5).unwrap().write_edges_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "left,right\n0,0\n");
    }
}
