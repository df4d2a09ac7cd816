//! Exact reference computations.
//!
//! These run in time at least linear in the input and exist to calibrate
//! and test the sublinear estimators, and to serve `--oracle` requests in
//! the command-line tool. They share no code with the estimators.

use crate::graph::Graph;
use crate::sketch::StreamUpdate;

/// Number of connected components, by union-find.
pub fn connected_components(g: &Graph) -> usize {
    let n = g.n();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut size = vec![1u32; n];

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }

    let mut components = n;
    for (u, v) in g.edge_list() {
        let ru = find(&mut parent, u);
        let rv = find(&mut parent, v);
        if ru != rv {
            let (big, small) = if size[ru as usize] >= size[rv as usize] {
                (ru, rv)
            } else {
                (rv, ru)
            };
            parent[small as usize] = big;
            size[big as usize] += size[small as usize];
            components -= 1;
        }
    }
    components
}

const NONE: usize = usize::MAX;

/// Size of a maximum matching, by Edmonds' blossom algorithm in O(n^3).
pub fn maximum_matching(g: &Graph) -> usize {
    let n = g.n();
    let mut matched = vec![NONE; n];
    for root in 0..n {
        if matched[root] == NONE {
            augment_from(g, root, &mut matched);
        }
    }
    matched.iter().filter(|&&m| m != NONE).count() / 2
}

/// Grows an alternating tree from `root`, contracting blossoms, and flips
/// one augmenting path if it finds an exposed vertex.
fn augment_from(g: &Graph, root: usize, matched: &mut [usize]) -> bool {
    let n = g.n();
    let mut parent = vec![NONE; n];
    let mut base: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    used[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);

    while let Some(v) = queue.pop_front() {
        for &to_u32 in g.neighbors(v as u32) {
            let to = to_u32 as usize;
            if base[v] == base[to] || matched[v] == to {
                continue;
            }
            if to == root || (matched[to] != NONE && parent[matched[to]] != NONE) {
                // Odd cycle: contract the blossom at the common ancestor.
                let cur_base = lowest_common_base(v, to, &base, matched, &parent);
                let mut in_blossom = vec![false; n];
                mark_blossom_path(v, cur_base, to, &base, matched, &mut parent, &mut in_blossom);
                mark_blossom_path(to, cur_base, v, &base, matched, &mut parent, &mut in_blossom);
                for i in 0..n {
                    if in_blossom[base[i]] {
                        base[i] = cur_base;
                        if !used[i] {
                            used[i] = true;
                            queue.push_back(i);
                        }
                    }
                }
            } else if parent[to] == NONE {
                parent[to] = v;
                if matched[to] == NONE {
                    flip_augmenting_path(to, matched, &parent);
                    return true;
                }
                used[matched[to]] = true;
                queue.push_back(matched[to]);
            }
        }
    }
    false
}

fn lowest_common_base(
    a: usize,
    b: usize,
    base: &[usize],
    matched: &[usize],
    parent: &[usize],
) -> usize {
    let mut seen = std::collections::HashSet::new();
    let mut cur = a;
    loop {
        cur = base[cur];
        seen.insert(cur);
        if matched[cur] == NONE {
            break;
        }
        cur = parent[matched[cur]];
    }
    cur = b;
    loop {
        cur = base[cur];
        if seen.contains(&cur) {
            return cur;
        }
        cur = parent[matched[cur]];
    }
}

fn mark_blossom_path(
    mut v: usize,
    blossom_base: usize,
    mut child: usize,
    base: &[usize],
    matched: &[usize],
    parent: &mut [usize],
    in_blossom: &mut [bool],
) {
    while base[v] != blossom_base {
        in_blossom[base[v]] = true;
        in_blossom[base[matched[v]]] = true;
        parent[v] = child;
        child = matched[v];
        v = parent[matched[v]];
    }
}

fn flip_augmenting_path(mut v: usize, matched: &mut [usize], parent: &[usize]) {
    while v != NONE {
        let pv = parent[v];
        let next = matched[pv];
        matched[v] = pv;
        matched[pv] = v;
        v = next;
    }
}

/// Exact second frequency moment of a stream over `[0, universe)`.
pub fn exact_f2(universe: u64, stream: &[StreamUpdate]) -> f64 {
    let mut x = vec![0.0f64; universe as usize];
    for u in stream {
        x[u.index as usize] += u.delta;
    }
    x.iter().map(|v| v * v).sum()
}

/// Exact rank: the number of data items `<= q`.
pub fn exact_rank(data: &[f64], q: f64) -> u64 {
    data.iter().filter(|&&x| x <= q).count() as u64
}

/// Exact average degree `2m / n`.
pub fn average_degree(g: &Graph) -> f64 {
    g.avg_degree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    #[test]
    fn component_counts() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(connected_components(&g), 3);
        let empty = Graph::from_edges(4, &[]).unwrap();
        assert_eq!(connected_components(&empty), 4);
        let ring = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(connected_components(&ring), 1);
    }

    #[test]
    fn matching_on_known_graphs() {
        // Odd cycle: floor(5/2) = 2, requires blossom handling.
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(maximum_matching(&c5), 2);
        // Perfect matching on K4.
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(maximum_matching(&k4), 2);
        // Star: only one edge fits.
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(maximum_matching(&star), 1);
        // Two triangles joined by a bridge: perfect matching of size 3.
        let bowtie = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        )
        .unwrap();
        assert_eq!(maximum_matching(&bowtie), 3);
        // Petersen graph: perfect matching of size 5.
        let petersen = Graph::from_edges(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (5, 7),
                (7, 9),
                (9, 6),
                (6, 8),
                (8, 5),
                (0, 5),
                (1, 6),
                (2, 7),
                (3, 8),
                (4, 9),
            ],
        )
        .unwrap();
        assert_eq!(maximum_matching(&petersen), 5);
    }

    /// Exhaustive maximum matching by recursion over the edge list.
    fn brute_force_matching(n: usize, edges: &[(u32, u32)]) -> usize {
        fn go(edges: &[(u32, u32)], used: &mut [bool]) -> usize {
            if edges.is_empty() {
                return 0;
            }
            let (u, v) = edges[0];
            let rest = go(&edges[1..], used);
            if !used[u as usize] && !used[v as usize] {
                used[u as usize] = true;
                used[v as usize] = true;
                let took = 1 + go(&edges[1..], used);
                used[u as usize] = false;
                used[v as usize] = false;
                rest.max(took)
            } else {
                rest
            }
        }
        let mut used = vec![false; n];
        go(edges, &mut used)
    }

    #[test]
    fn matching_agrees_with_brute_force_on_random_graphs() {
        let mut r = RandomSource::new(0x5eed_0006, 0);
        for trial in 0..60 {
            let n = 4 + (trial % 7);
            let p = 0.3 + 0.1 * (trial % 4) as f64;
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if r.open01() < p {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            assert_eq!(
                maximum_matching(&g),
                brute_force_matching(n, &edges),
                "n={n} edges={edges:?}"
            );
        }
    }

    #[test]
    fn component_reciprocal_identity_holds_exhaustively() {
        // Over every labeled graph on up to 7 vertices: the union-find
        // count equals the BFS component count, and the per-vertex sum of
        // 1 / |C(v)| equals that count. The sublinear component estimator
        // rests on this identity.
        for n in 1..=7usize {
            let mut pairs = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    pairs.push((u, v));
                }
            }
            let mut edges = Vec::with_capacity(pairs.len());
            for mask in 0u64..1 << pairs.len() {
                edges.clear();
                edges.extend(
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &e)| e),
                );
                let g = Graph::from_edges(n, &edges).unwrap();
                let c = connected_components(&g);

                let mut comp = [usize::MAX; 7];
                let mut sizes: Vec<usize> = Vec::new();
                for root in 0..n {
                    if comp[root] != usize::MAX {
                        continue;
                    }
                    let id = sizes.len();
                    comp[root] = id;
                    let mut queue = vec![root];
                    let mut size = 0usize;
                    while let Some(v) = queue.pop() {
                        size += 1;
                        for &w in g.neighbors(v as u32) {
                            if comp[w as usize] == usize::MAX {
                                comp[w as usize] = id;
                                queue.push(w as usize);
                            }
                        }
                    }
                    sizes.push(size);
                }
                assert_eq!(c, sizes.len(), "n={n} mask={mask}");
                let recip: f64 = (0..n).map(|v| 1.0 / sizes[comp[v]] as f64).sum();
                assert!((recip - c as f64).abs() < 1e-9, "n={n} mask={mask}");
            }
        }
    }

    #[test]
    fn f2_and_rank() {
        let stream = [
            StreamUpdate { index: 0, delta: 2.0 },
            StreamUpdate { index: 1, delta: -1.0 },
            StreamUpdate { index: 0, delta: 1.0 },
        ];
        assert_eq!(exact_f2(4, &stream), 10.0);
        let data = [3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(exact_rank(&data, 1.0), 2);
        assert_eq!(exact_rank(&data, 0.0), 0);
        assert_eq!(exact_rank(&data, 5.0), 5);
    }
}
