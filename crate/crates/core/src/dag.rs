//! Causal diagrams: nodes, directed edges, validation and graph queries.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// How a node enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Observed,
    Latent,
    /// Fully determined by its parents (e.g. a change score); never sampled.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    /// `exposure` marker from the DSL; informational only.
    pub exposure: bool,
    /// `outcome` marker from the DSL; informational only.
    pub outcome: bool,
}

impl Node {
    pub fn new(name: impl Into<String>, kind: NodeKind) -> Self {
        Node {
            name: name.into(),
            kind,
            exposure: false,
            outcome: false,
        }
    }
}

/// Directed edge `from -> to`, with the optional `beta=` coefficient captured by the parser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DagError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge `{0} -> {1}`")]
    DuplicateEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("cycle detected through `{0}`")]
    Cycle(String),
    #[error("deterministic node `{0}` has no parents")]
    DeterministicWithoutParents(String),
    #[error("node sets must be pairwise disjoint; `{0}` appears twice")]
    NotDisjoint(String),
}

/// Immutable, validated directed acyclic graph.
///
/// Node indices are stable and follow insertion order; `topological_order`
/// gives an evaluation order consistent with the edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

/// Incremental constructor for [`Dag`]; validation happens in [`DagBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct DagBuilder {
    nodes: Vec<Node>,
    edges: Vec<(String, String, Option<f64>)>,
}

impl DagBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, name: &str, kind: NodeKind) -> Self {
        self.nodes.push(Node::new(name, kind));
        self
    }

    pub fn push_node(&mut self, node: Node) {
        self.nodes.push(node);
    }

    pub fn edge(mut self, from: &str, to: &str, beta: Option<f64>) -> Self {
        self.push_edge(from, to, beta);
        self
    }

    pub fn push_edge(&mut self, from: &str, to: &str, beta: Option<f64>) {
        self.edges.push((from.to_string(), to.to_string(), beta));
    }

    pub fn build(self) -> Result<Dag, DagError> {
        let mut index = BTreeMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if index.insert(node.name.clone(), i).is_some() {
                return Err(DagError::DuplicateNode(node.name.clone()));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| DagError::UnknownNode(name.to_string()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut seen = BTreeSet::new();
        for (from, to, beta) in &self.edges {
            let (f, t) = (lookup(from)?, lookup(to)?);
            if f == t {
                return Err(DagError::SelfLoop(from.clone()));
            }
            if !seen.insert((f, t)) {
                return Err(DagError::DuplicateEdge(from.clone(), to.clone()));
            }
            edges.push(Edge {
                from: f,
                to: t,
                beta: *beta,
            });
        }
        Dag::from_parts(self.nodes, edges, index)
    }
}

impl Dag {
    pub fn builder() -> DagBuilder {
        DagBuilder::new()
    }

    pub fn empty() -> Self {
        Dag {
            nodes: Vec::new(),
            edges: Vec::new(),
            index: BTreeMap::new(),
            parents: Vec::new(),
            children: Vec::new(),
            topo: Vec::new(),
        }
    }

    fn from_parts(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        index: BTreeMap<String, usize>,
    ) -> Result<Self, DagError> {
        let k = nodes.len();
        let mut parents = vec![Vec::new(); k];
        let mut children = vec![Vec::new(); k];
        for e in &edges {
            parents[e.to].push(e.from);
            children[e.from].push(e.to);
        }

        // Kahn's algorithm; smallest index first so the order is reproducible.
        let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..k).filter(|&v| indegree[v] == 0).collect();
        let mut topo = Vec::with_capacity(k);
        while let Some(v) = ready.pop_first() {
            topo.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo.len() != k {
            let stuck = (0..k).find(|&v| indegree[v] > 0).unwrap_or(0);
            return Err(DagError::Cycle(nodes[stuck].name.clone()));
        }

        for (v, node) in nodes.iter().enumerate() {
            if node.kind == NodeKind::Deterministic && parents[v].is_empty() {
                return Err(DagError::DeterministicWithoutParents(node.name.clone()));
            }
        }

        Ok(Dag {
            nodes,
            edges,
            index,
            parents,
            children,
            topo,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn name(&self, v: usize) -> &str {
        &self.nodes[v].name
    }

    pub fn index_of(&self, name: &str) -> Result<usize, DagError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| DagError::UnknownNode(name.to_string()))
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.from == from && e.to == to)
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edge_index(from, to).is_some()
    }

    /// Nodes with a directed path into any of `targets`, including the targets themselves.
    pub fn ancestors_of(&self, targets: &[usize]) -> BTreeSet<usize> {
        self.closure(targets, &self.parents)
    }

    /// Nodes reachable from any of `sources` by a directed path, including the sources.
    pub fn descendants_of(&self, sources: &[usize]) -> BTreeSet<usize> {
        self.closure(sources, &self.children)
    }

    fn closure(&self, start: &[usize], adjacency: &[Vec<usize>]) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = start.iter().copied().collect();
        let mut stack: Vec<usize> = start.to_vec();
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if out.insert(w) {
                    stack.push(w);
                }
            }
        }
        out
    }

    /// True when a directed path of length ≥ 1 leads from `from` to `to`.
    pub fn has_directed_path(&self, from: usize, to: usize) -> bool {
        self.children[from]
            .iter()
            .any(|&c| self.descendants_of(&[c]).contains(&to))
    }

    /// Resolves a list of names to indices.
    pub fn indices(&self, names: &[&str]) -> Result<Vec<usize>, DagError> {
        names.iter().map(|n| self.index_of(n)).collect()
    }

    /// Tests whether `a` and `b` are d-separated given `z`.
    ///
    /// Uses the reachability ("Bayes-ball") formulation: a trail is traversed
    /// through non-colliders outside `z`, and through colliders that are in
    /// `z` or have a descendant in `z`.
    pub fn d_separated(&self, a: &[&str], b: &[&str], z: &[&str]) -> Result<bool, DagError> {
        let a = self.indices(a)?;
        let b = self.indices(b)?;
        let z = self.indices(z)?;
        let mut seen = BTreeSet::new();
        for &v in a.iter().chain(&b).chain(&z) {
            if !seen.insert(v) {
                return Err(DagError::NotDisjoint(self.name(v).to_string()));
            }
        }
        Ok(self.d_separated_idx(&a, &b, &z))
    }

    pub fn d_separated_idx(&self, a: &[usize], b: &[usize], z: &[usize]) -> bool {
        let reachable = self.reachable_from(a, z);
        b.iter().all(|v| !reachable[*v])
    }

    /// Marks every node connected to `sources` by an active trail given `z`.
    fn reachable_from(&self, sources: &[usize], z: &[usize]) -> Vec<bool> {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        enum Dir {
            // arrived from a child, travelling against the arrow
            Up,
            // arrived from a parent, travelling along the arrow
            Down,
        }

        let k = self.len();
        let mut in_z = vec![false; k];
        for &v in z {
            in_z[v] = true;
        }
        let z_ancestors = self.ancestors_of(z);

        let mut reachable = vec![false; k];
        let mut visited = BTreeSet::new();
        let mut queue: VecDeque<(usize, Dir)> = sources.iter().map(|&s| (s, Dir::Up)).collect();

        while let Some((v, dir)) = queue.pop_front() {
            if !visited.insert((v, dir)) {
                continue;
            }
            if !in_z[v] {
                reachable[v] = true;
            }
            match dir {
                Dir::Up if !in_z[v] => {
                    queue.extend(self.parents[v].iter().map(|&p| (p, Dir::Up)));
                    queue.extend(self.children[v].iter().map(|&c| (c, Dir::Down)));
                }
                Dir::Up => {}
                Dir::Down => {
                    if !in_z[v] {
                        queue.extend(self.children[v].iter().map(|&c| (c, Dir::Down)));
                    }
                    if z_ancestors.contains(&v) {
                        queue.extend(self.parents[v].iter().map(|&p| (p, Dir::Up)));
                    }
                }
            }
        }
        reachable
    }
}
