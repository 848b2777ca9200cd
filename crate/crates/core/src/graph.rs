//! Proximity graph, connected components, degree centrality and pin selection.

use std::collections::VecDeque;

use crate::model::Vec2;

/// Dense symmetric adjacency matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    cells: Vec<bool>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Adjacency {
            n,
            cells: vec![false; n * n],
        }
    }

    /// Builds an adjacency from undirected edges. Self loops are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut a = Adjacency::empty(n);
        for &(i, j) in edges {
            a.connect(i, j);
        }
        a
    }

    pub fn connect(&mut self, i: usize, j: usize) {
        if i != j {
            self.cells[i * self.n + j] = true;
            self.cells[j * self.n + i] = true;
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.cells[i * self.n..(i + 1) * self.n]
            .iter()
            .enumerate()
            .filter_map(|(j, &c)| c.then_some(j))
    }

    /// Undirected edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| self.get(i, j).then_some((i, j)))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }
}

/// Proximity graph snapshot with everything derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlockGraph {
    pub adjacency: Adjacency,
    pub degrees: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    /// One max-degree vertex per component.
    pub max_degree_pins: Vec<usize>,
    /// Degree-1 vertices.
    pub leaf_pins: Vec<usize>,
    pinned: Vec<bool>,
}

impl FlockGraph {
    pub fn from_adjacency(adjacency: Adjacency) -> Self {
        let degrees = degree_centrality(&adjacency);
        let components = find_components(&adjacency);
        let pins = select_pins(&components, &degrees);
        let mut pinned = vec![false; adjacency.len()];
        for &i in pins.max_degree.iter().chain(&pins.leaves) {
            pinned[i] = true;
        }
        FlockGraph {
            adjacency,
            degrees,
            components,
            max_degree_pins: pins.max_degree,
            leaf_pins: pins.leaves,
            pinned,
        }
    }

    pub fn build(positions: &[Vec2], ranges: &[f64]) -> Self {
        Self::from_adjacency(build_adjacency(positions, ranges))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned[i]
    }

    /// Sorted pin set, the union of max-degree and leaf pins.
    pub fn pins(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.pinned[i]).collect()
    }
}

/// `A_ij = 1` iff `i != j` and `|x_i - x_j| < min(r_i, r_j)`.
pub fn build_adjacency(positions: &[Vec2], ranges: &[f64]) -> Adjacency {
    assert_eq!(positions.len(), ranges.len(), "one range per agent");
    let n = positions.len();
    let mut a = Adjacency::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = positions[i].distance(positions[j]);
            if s < ranges[i].min(ranges[j]) {
                a.connect(i, j);
            }
        }
    }
    a
}

/// Connected components, each sorted, listed in order of their lowest vertex.
pub fn find_components(a: &Adjacency) -> Vec<Vec<usize>> {
    let n = a.len();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut component = Vec::new();
        while let Some(v) = queue.pop_front() {
            component.push(v);
            for w in a.neighbours(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

pub fn degree_centrality(a: &Adjacency) -> Vec<usize> {
    (0..a.len()).map(|i| a.neighbours(i).count()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PinSet {
    pub max_degree: Vec<usize>,
    pub leaves: Vec<usize>,
}

impl PinSet {
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .max_degree
            .iter()
            .chain(&self.leaves)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// Argmax degree per component (lowest index wins ties) plus every degree-1 vertex.
pub fn select_pins(components: &[Vec<usize>], degrees: &[usize]) -> PinSet {
    let max_degree = components
        .iter()
        .filter_map(|c| {
            c.iter()
                .copied()
                .min_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)))
        })
        .collect();
    let leaves = degrees
        .iter()
        .enumerate()
        .filter_map(|(i, &d)| (d == 1).then_some(i))
        .collect();
    PinSet { max_degree, leaves }
}
