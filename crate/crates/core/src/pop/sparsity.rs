//! Correlative sparsity: the variable interaction graph, its chordal
//! extension, maximal cliques in running-intersection order, and the
//! assignment of constraints to cliques.

use std::collections::BTreeSet;

use super::{Pop, PopError};

/// Undirected graph on the variable indices `0..n`; self loops are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl CspGraph {
    pub fn new(n: usize) -> Self {
        CspGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    /// Edges `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb.range(a + 1..) {
                out.push((a, b));
            }
        }
        out
    }

    fn connect_all(&mut self, vars: &[usize]) {
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }
}

/// Maximal cliques of a chordal extension, listed so that the running
/// intersection property holds when `rip_ordered` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueCover {
    pub cliques: Vec<Vec<usize>>,
    pub rip_ordered: bool,
    /// The chordal extension the cliques were taken from.
    pub extension: CspGraph,
    /// Vertex elimination order that is perfect for `extension`.
    pub elimination_order: Vec<usize>,
}

impl CliqueCover {
    /// A single clique holding every variable.
    pub fn dense(n: usize) -> Self {
        let mut g = CspGraph::new(n);
        g.connect_all(&(0..n).collect::<Vec<_>>());
        CliqueCover {
            cliques: vec![(0..n).collect()],
            rip_ordered: true,
            extension: g,
            elimination_order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Direct check of the running intersection property: for every `h`,
    /// `C_{h+1} ∩ (C_1 ∪ ⋯ ∪ C_h)` lies inside some earlier `C_t`.
    pub fn has_rip(&self) -> bool {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        for (h, c) in self.cliques.iter().enumerate() {
            if h > 0 {
                let inter: Vec<usize> = c.iter().copied().filter(|v| seen.contains(v)).collect();
                let covered = self.cliques[..h]
                    .iter()
                    .any(|t| inter.iter().all(|v| t.contains(v)));
                if !covered {
                    return false;
                }
            }
            seen.extend(c.iter().copied());
        }
        true
    }
}

/// Per-clique constraint index sets `J_h` and per-constraint variable sets `D_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub constraints_of_clique: Vec<Vec<usize>>,
    /// Union of all cliques containing the variables of constraint `j`.
    pub clique_union: Vec<Vec<usize>>,
}

/// Edge `{k, ℓ}` whenever some objective monomial or some constraint involves
/// both variables. Equalities and inequalities are treated alike.
pub fn csp_graph(pop: &Pop) -> CspGraph {
    let mut g = CspGraph::new(pop.nvars());
    for (m, _) in pop.objective.terms() {
        let vars: Vec<usize> = m.variables().collect();
        g.connect_all(&vars);
    }
    for c in &pop.constraints {
        g.connect_all(&c.poly.variables());
    }
    g
}

/// Minimum-degree chordal extension (lowest index breaks ties), maximal
/// cliques, and a running-intersection ordering of them.
pub fn chordal_cliques(g: &CspGraph) -> Result<CliqueCover, PopError> {
    let n = g.nodes();
    let mut work: Vec<BTreeSet<usize>> = g.adj.clone();
    let mut ext = g.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);

    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (work[v].len(), v))
            .expect("a live vertex remains");
        let nb: Vec<usize> = work[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                work[a].insert(b);
                work[b].insert(a);
                ext.add_edge(a, b);
            }
        }
        for &a in &nb {
            work[a].remove(&v);
        }
        work[v].clear();
        alive[v] = false;
        order.push(v);
        let mut clique = nb;
        clique.push(v);
        clique.sort_unstable();
        candidates.push(clique);
    }

    // keep maximal candidates only
    let mut maximal: Vec<Vec<usize>> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let dominated = candidates.iter().enumerate().any(|(j, d)| {
            j != i && d.len() >= c.len() && c.iter().all(|v| d.contains(v)) && (d.len() > c.len() || j < i)
        });
        if !dominated {
            maximal.push(c.clone());
        }
    }
    maximal.sort();

    let cliques = rip_order(maximal);
    let cover = CliqueCover {
        cliques,
        rip_ordered: true,
        extension: ext,
        elimination_order: order,
    };
    if !cover.has_rip() {
        return Err(PopError::Internal(
            "clique ordering violates the running intersection property".into(),
        ));
    }
    Ok(cover)
}

// Prim's algorithm on the clique intersection graph (weight = |C_a ∩ C_b|);
// the visiting order of a maximum-weight spanning tree of a chordal graph's
// cliques satisfies the running intersection property.
fn rip_order(cliques: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let p = cliques.len();
    if p <= 1 {
        return cliques;
    }
    let weight = |a: &Vec<usize>, b: &Vec<usize>| a.iter().filter(|v| b.contains(v)).count();
    let mut in_tree = vec![false; p];
    let mut best = vec![0usize; p];
    let mut out = Vec::with_capacity(p);
    let mut cur = 0;
    for _ in 0..p {
        in_tree[cur] = true;
        out.push(cliques[cur].clone());
        for k in 0..p {
            if !in_tree[k] {
                best[k] = best[k].max(weight(&cliques[cur], &cliques[k]));
            }
        }
        let next = (0..p)
            .filter(|&k| !in_tree[k])
            .max_by(|&a, &b| best[a].cmp(&best[b]).then(b.cmp(&a)));
        match next {
            Some(k) => cur = k,
            None => break,
        }
    }
    out
}

/// `J_h = { j : f_j uses only variables of C_h }` and `D_j` = union of the
/// cliques containing the variables of `f_j`.
pub fn assign_constraints(pop: &Pop, cover: &CliqueCover) -> Result<Assignment, PopError> {
    let mut by_clique = vec![Vec::new(); cover.cliques.len()];
    let mut unions = Vec::with_capacity(pop.constraints.len());
    for (j, c) in pop.constraints.iter().enumerate() {
        let vars = c.poly.variables();
        let mut union: BTreeSet<usize> = BTreeSet::new();
        for (h, clique) in cover.cliques.iter().enumerate() {
            if vars.iter().all(|v| clique.contains(v)) {
                by_clique[h].push(j);
                union.extend(clique.iter().copied());
            }
        }
        if union.is_empty() && !cover.cliques.is_empty() {
            return Err(PopError::Internal(format!(
                "constraint {} is not contained in any clique",
                j + 1
            )));
        }
        unions.push(union.into_iter().collect());
    }
    Ok(Assignment {
        constraints_of_clique: by_clique,
        clique_union: unions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pop::parse_pop;

    fn graph(n: usize, edges: &[(usize, usize)]) -> CspGraph {
        let mut g = CspGraph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    #[test]
    fn csp_examples() {
        let st = parse_pop(
            "vars x y\nmin 2*x + y\nst x*y - 1/16 >= 0\nst x^2 + y^2 - 1/4 >= 0\n",
        )
        .unwrap();
        assert_eq!(csp_graph(&st).edges(), vec![(0, 1)]);
        let sep = parse_pop("vars a b c\nmin a^2 + b^2 + c^2\n").unwrap();
        assert!(csp_graph(&sep).edges().is_empty());
        let qp = parse_pop("vars a b c\nmin 3*a*b + a^2 - c\nst a >= 0\nst c >= 0\n").unwrap();
        assert_eq!(csp_graph(&qp).edges(), vec![(0, 1)]);
    }

    #[test]
    fn path_graph() {
        let cover = chordal_cliques(&graph(3, &[(0, 1), (1, 2)])).unwrap();
        assert_eq!(cover.cliques, vec![vec![0, 1], vec![1, 2]]);
        assert!(cover.rip_ordered && cover.has_rip());
    }

    #[test]
    fn complete_graph() {
        let edges: Vec<_> = (0..4)
            .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
            .collect();
        let cover = chordal_cliques(&graph(4, &edges)).unwrap();
        assert_eq!(cover.cliques, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn empty_graph() {
        let cover = chordal_cliques(&CspGraph::new(3)).unwrap();
        assert_eq!(cover.cliques, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn cycle_gets_chord() {
        let cover = chordal_cliques(&graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])).unwrap();
        assert_eq!(cover.cliques.len(), 2);
        assert!(cover.cliques.iter().all(|c| c.len() == 3));
        assert_eq!(cover.extension.edges().len(), 5);
    }

    #[test]
    fn constraint_assignment() {
        let st = parse_pop(
            "vars x y\nmin 2*x + y\nst x*y - 1/16 >= 0\nst x^2 + y^2 - 1/4 >= 0\nst x >= 0\nst 1 - x >= 0\nst y >= 0\nst 1 - y >= 0\n",
        )
        .unwrap();
        let cover = chordal_cliques(&csp_graph(&st)).unwrap();
        let a = assign_constraints(&st, &cover).unwrap();
        assert_eq!(a.constraints_of_clique, vec![vec![0, 1, 2, 3, 4, 5]]);

        let sep = parse_pop("vars a b c\nmin a^2 + b^2 + c^2\nst a >= 0\nst c >= 0\n").unwrap();
        let cover = chordal_cliques(&csp_graph(&sep)).unwrap();
        let a = assign_constraints(&sep, &cover).unwrap();
        assert_eq!(a.constraints_of_clique, vec![vec![0], vec![], vec![1]]);

        let chain = parse_pop("vars a b c\nmin a*b + b*c\nst b*c - 1 >= 0\n").unwrap();
        let cover = chordal_cliques(&csp_graph(&chain)).unwrap();
        let a = assign_constraints(&chain, &cover).unwrap();
        assert_eq!(a.clique_union, vec![vec![1, 2]]);
    }

    #[test]
    fn uncovered_constraint_is_internal_error() {
        let pop = parse_pop("vars a b\nmin a + b\nst a*b >= 0\n").unwrap();
        let cover = chordal_cliques(&CspGraph::new(2)).unwrap();
        assert!(matches!(
            assign_constraints(&pop, &cover),
            Err(PopError::Internal(_))
        ));
    }
}
