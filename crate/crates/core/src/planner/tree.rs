use crate::signal::{dist, SolutionPair};

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub state: Vec<f64>,
    /// Index into [`SearchTree::edges`] of the incoming edge; `None` for roots.
    pub incoming: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub pair: SolutionPair,
}

/// Search tree: vertices carry states, edges carry the solution pairs that
/// connect them. Vertex ids are their indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchTree {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Tolerance for matching edge endpoints to vertex states.
pub const ENDPOINT_TOL: f64 = 1e-9;

impl SearchTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn state(&self, id: usize) -> &[f64] {
        &self.vertices[id].state
    }

    pub fn add_root(&mut self, state: Vec<f64>) -> usize {
        let id = self.vertices.len();
        self.vertices.push(Vertex {
            id,
            state,
            incoming: None,
        });
        id
    }

    /// Adds the final state of `pair` as a child of `parent`.
    pub fn add_child(&mut self, parent: usize, pair: SolutionPair) -> usize {
        assert!(parent < self.vertices.len(), "unknown parent vertex {parent}");
        let id = self.vertices.len();
        self.vertices.push(Vertex {
            id,
            state: pair.final_state().to_vec(),
            incoming: Some(self.edges.len()),
        });
        self.edges.push(Edge {
            from: parent,
            to: id,
            pair,
        });
        id
    }

    pub fn is_root(&self, id: usize) -> bool {
        self.vertices[id].incoming.is_none()
    }

    /// Edge indices from the root to `id`, in order.
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(e) = self.vertices[cur].incoming {
            path.push(e);
            cur = self.edges[e].from;
        }
        path.reverse();
        path
    }

    pub fn root_of(&self, id: usize) -> usize {
        let mut cur = id;
        while let Some(e) = self.vertices[cur].incoming {
            cur = self.edges[e].from;
        }
        cur
    }

    /// Index of the constrained vertex minimising `metric(state, x)`; ties
    /// go to the lowest id.
    pub fn nearest_by(
        &self,
        x: &[f64],
        constraint: &dyn Fn(&[f64]) -> bool,
        metric: &dyn Fn(&[f64], &[f64]) -> f64,
    ) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for v in &self.vertices {
            if !constraint(&v.state) {
                continue;
            }
            let d = metric(&v.state, x);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((v.id, d));
            }
        }
        best.map(|(id, _)| id)
    }

    /// Euclidean nearest neighbour among vertices satisfying `constraint`.
    pub fn nearest(&self, x: &[f64], constraint: &dyn Fn(&[f64]) -> bool) -> Option<usize> {
        self.nearest_by(x, constraint, &dist)
    }

    /// Checks the structural invariants: ids match indices, every non-root
    /// vertex has exactly one incoming edge pointing at it, edges point from
    /// older to newer vertices (hence no cycles), and every edge's pair runs
    /// from its source state to its target state.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut incoming = vec![0usize; self.vertices.len()];
        for (k, e) in self.edges.iter().enumerate() {
            if e.to >= self.vertices.len() || e.from >= e.to {
                return Err(format!("edge {k} ({} -> {}) is not forward", e.from, e.to));
            }
            incoming[e.to] += 1;
            if self.vertices[e.to].incoming != Some(k) {
                return Err(format!("vertex {} does not point back at edge {k}", e.to));
            }
            if dist(e.pair.initial_state(), &self.vertices[e.from].state) > ENDPOINT_TOL {
                return Err(format!("edge {k} does not start at vertex {}", e.from));
            }
            if dist(e.pair.final_state(), &self.vertices[e.to].state) > ENDPOINT_TOL {
                return Err(format!("edge {k} does not end at vertex {}", e.to));
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(format!("vertex at index {i} has id {}", v.id));
            }
            let expected = usize::from(v.incoming.is_some());
            if incoming[i] != expected {
                return Err(format!("vertex {i} has {} incoming edges", incoming[i]));
            }
        }
        Ok(())
    }
}
