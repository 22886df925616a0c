use std::collections::BTreeSet;

use proptest::prelude::*;
use spatembed::graph::{build_graph, parse_edge_tsv, parse_links, write_edge_tsv};

fn link_lines() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..30, 1..6), 1..40)
}

fn render(lines: &[Vec<u8>]) -> String {
    lines
        .iter()
        .enumerate()
        .map(|(i, members)| {
            let body: Vec<String> = members
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    if k % 2 == 0 {
                        format!("N{m}")
                    } else {
                        format!("N{m}:10.0.{k}.{m}")
                    }
                })
                .collect();
            format!("link L{i}: {}\n", body.join(" "))
        })
        .collect()
}

/// Distinct unordered pairs by brute force.
fn brute_pairs(lines: &[Vec<u8>]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for members in lines {
        for a in members {
            for b in members {
                let (a, b) = (format!("N{a}"), format!("N{b}"));
                if a < b {
                    out.insert((a, b));
                }
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn graph_invariants(lines in link_lines()) {
        let el = parse_links(render(&lines).as_bytes(), true).unwrap();
        let expected = brute_pairs(&lines);
        prop_assume!(!expected.is_empty());
        let g = build_graph(el).unwrap();
        prop_assert_eq!(g.m(), expected.len());
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.m());
        for i in 0..g.n() {
            for &j in g.neighbors(i) {
                prop_assert!(g.has_edge(j as usize, i));
                prop_assert_ne!(j as usize, i);
            }
        }
        // degree recount from the raw pair set
        for i in 0..g.n() {
            let name = g.name(i);
            let k = expected.iter().filter(|(a, b)| a == name || b == name).count();
            prop_assert_eq!(g.degree(i), k);
        }
    }

    #[test]
    fn clique_expansion_counts(members in prop::collection::btree_set(0u32..1000, 1..12)) {
        let names: Vec<String> = members.iter().map(|m| format!("N{m}")).collect();
        let line = format!("link L1: {}\n", names.join(" "));
        let el = parse_links(line.as_bytes(), true).unwrap();
        let r = names.len();
        prop_assert_eq!(el.pair_count(), r * (r - 1) / 2);
    }

    #[test]
    fn line_order_does_not_matter(lines in link_lines(), seed in any::<u64>()) {
        prop_assume!(!brute_pairs(&lines).is_empty());
        let mut shuffled = lines.clone();
        let len = shuffled.len();
        let mut s = seed;
        for i in (1..len).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = build_graph(parse_links(render(&lines).as_bytes(), true).unwrap()).unwrap();
        let b = build_graph(parse_links(render(&shuffled).as_bytes(), true).unwrap()).unwrap();
        prop_assert_eq!(a.names(), b.names());
        prop_assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
    }

    #[test]
    fn canonical_tsv_round_trip(lines in link_lines()) {
        prop_assume!(!brute_pairs(&lines).is_empty());
        let g = build_graph(parse_links(render(&lines).as_bytes(), true).unwrap()).unwrap();
        prop_assume!(g.isolated_count() == 0);
        let mut first = Vec::new();
        write_edge_tsv(&g, &mut first).unwrap();
        let back = build_graph(parse_edge_tsv(first.as_slice(), true).unwrap()).unwrap();
        prop_assert_eq!(back.names(), g.names());
        let mut second = Vec::new();
        write_edge_tsv(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}

#[test]
fn canonical_tsv_is_sorted_with_ordered_names() {
    let text = "link L1: N9 N10 N2\nlink L2: N3 N2\n";
    let g = build_graph(parse_links(text.as_bytes(), true).unwrap()).unwrap();
    let mut out = Vec::new();
    write_edge_tsv(&g, &mut out).unwrap();
    let out = String::from_utf8(out).unwrap();
    assert_eq!(out, "N10\tN2\nN10\tN9\nN2\tN3\nN2\tN9\n");
}
