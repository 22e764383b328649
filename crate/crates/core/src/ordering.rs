//! Approximate minimum degree ordering on the symmetric pattern.
//!
//! Quotient-graph elimination: an eliminated pivot becomes an element whose
//! variable list is its fill clique, and the elements it touched are
//! absorbed. Degrees of the variables in the new clique are replaced by the
//! usual approximate external degree bound
//! `|A_i| + |L_p \ i| + sum_e |L_e \ L_p|`, capped by the number of remaining
//! variables and by the previous degree plus the clique size.
//!
//! No supervariable detection or aggressive absorption is done. Ties on the
//! approximate degree go to the smaller initial degree, then the smaller
//! index, which keeps the order deterministic.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::sparse::{Permutation, SymLowerMatrix};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Node {
    Variable,
    Element,
    Absorbed,
}

/// Fill-reducing symmetric permutation of `k` (`new_of(old)` is the
/// elimination position of `old`).
pub fn fill_reducing_order(k: &SymLowerMatrix) -> Permutation {
    let order = amd_order(k.adjacency());
    Permutation::from_order(&order).expect("elimination visits every node once")
}

/// Elimination order `order[step] = node` for a symmetric adjacency without
/// self loops.
pub fn amd_order(mut adj_var: Vec<Vec<usize>>) -> Vec<usize> {
    let n = adj_var.len();
    let mut adj_elem: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elem_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut state = vec![Node::Variable; n];
    let init_degree: Vec<usize> = adj_var.iter().map(Vec::len).collect();
    let mut degree = init_degree.clone();
    let mut queue: BTreeSet<(usize, usize, usize)> =
        (0..n).map(|i| (degree[i], init_degree[i], i)).collect();

    let mut in_clique = vec![false; n];
    let mut w: Vec<isize> = vec![-1; n];
    let mut order = Vec::with_capacity(n);

    while let Some((_, _, p)) = queue.pop_first() {
        order.push(p);
        state[p] = Node::Element;

        // Fill clique of p: live variables reachable directly or through
        // adjacent elements.
        let mut clique = Vec::new();
        for &v in &adj_var[p] {
            if state[v] == Node::Variable && !in_clique[v] {
                in_clique[v] = true;
                clique.push(v);
            }
        }
        for &e in &adj_elem[p] {
            for &v in &elem_vars[e] {
                if state[v] == Node::Variable && !in_clique[v] {
                    in_clique[v] = true;
                    clique.push(v);
                }
            }
            state[e] = Node::Absorbed;
            elem_vars[e] = Vec::new();
        }
        clique.sort_unstable();
        adj_var[p] = Vec::new();
        adj_elem[p] = Vec::new();

        // |L_e \ L_p| for every live element touching the clique.
        let mut touched = Vec::new();
        for &i in &clique {
            for &e in &adj_elem[i] {
                if state[e] != Node::Element {
                    continue;
                }
                if w[e] < 0 {
                    elem_vars[e].retain(|&v| state[v] == Node::Variable);
                    w[e] = elem_vars[e].len() as isize;
                    touched.push(e);
                }
                w[e] -= 1;
            }
        }

        let remaining = n - order.len();
        let clique_len = clique.len();
        for &i in &clique {
            adj_elem[i].retain(|&e| state[e] == Node::Element);
            adj_elem[i].push(p);
            adj_var[i].retain(|&v| state[v] == Node::Variable && !in_clique[v]);

            let mut external = adj_var[i].len() + clique_len - 1;
            for &e in &adj_elem[i] {
                if e != p {
                    external += w[e].max(0) as usize;
                }
            }
            let bound = external
                .min(remaining.saturating_sub(1))
                .min(degree[i] + clique_len - 1);
            queue.remove(&(degree[i], init_degree[i], i));
            degree[i] = bound;
            queue.insert((bound, init_degree[i], i));
        }

        for e in touched {
            w[e] = -1;
        }
        for &i in &clique {
            in_clique[i] = false;
        }
        elem_vars[p] = clique;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;

    #[test]
    fn diagonal_gives_identity() {
        let k = SymLowerMatrix::identity(6);
        assert!(fill_reducing_order(&k).is_identity());
    }

    #[test]
    fn arrowhead_vertex_goes_last() {
        let mut t = Triplets::new(5, 5);
        for i in 0..5 {
            t.push(i, i, 4.0);
            if i > 0 {
                t.push(i, 0, 1.0);
            }
        }
        let k = SymLowerMatrix::from_triplets(&t).unwrap();
        let p = fill_reducing_order(&k);
        assert_eq!(p.new_of(0), 4);
    }

    #[test]
    fn path_graph_is_fill_free() {
        // Minimum degree on a path eliminates from the ends inward.
        let n = 7;
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        let order = amd_order(adj);
        assert_eq!(order[0], 0);
        assert_eq!(order.len(), n);
    }

    #[test]
    fn empty_graph() {
        assert!(amd_order(Vec::new()).is_empty());
    }
}
