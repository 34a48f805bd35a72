// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use netsurgeon::bridge::{bridge_formula, bridge_index, link_value_potential};
use netsurgeon::extensions::{multi_activity_structural_effect, CongestionSpec, MultiActivitySpec};
use netsurgeon::walks::enumerate_avoiding_walks;
use netsurgeon::{
    certify, characteristic_effect, dominance_prune, equivalent_theta, intercentrality,
    key_group_exhaustive, key_group_greedy, leontief_block, parse_edge_list, spectral_radius,
    structural_effect, CharacteristicIntervention, GameSpec, Network, NodeSet, SearchOptions,
};
use proptest::prelude::*;

/// Random graph on `n` nodes together with a spectral fraction for delta.
#[derive(Debug, Clone)]
struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    frac: f64,
}

impl Graph {
    fn g(&self) -> DMatrix<f64> {
        adjacency(self.n, &self.edges)
    }

    fn delta(&self) -> f64 {
        let l = lambda_max(&self.g());
        if l > 0.0 {
            self.frac / l
        } else {
            self.frac
        }
    }

    fn spec(&self) -> GameSpec {
        certify(network(self.n, &self.edges), self.delta()).unwrap()
    }
}

fn graph(
    n: std::ops::RangeInclusive<usize>,
    frac: std::ops::Range<f64>,
) -> impl Strategy<Value = Graph> {
    n.prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        (
            proptest::collection::vec(any::<bool>(), pairs.len()),
            frac.clone(),
        )
            .prop_map(move |(mask, frac)| Graph {
                n,
                edges: pairs
                    .iter()
                    .zip(mask)
                    .filter(|(_, on)| *on)
                    .map(|(&p, _)| p)
                    .collect(),
                frac,
            })
    })
}

fn theta(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.5..2.0f64, n)
}

fn unit(n: usize) -> NodeSet {
    NodeSet::all(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_list_round_trip(gr in graph(1..=10, 0.1..0.9)) {
        let net = network(gr.n, &gr.edges);
        let again = parse_edge_list(&net.to_edge_list()).unwrap();
        prop_assert_eq!(again.labels(), net.labels());
        prop_assert_eq!(again.edges(), net.edges());
    }

    #[test]
    fn spectral_radius_ignores_labels(gr in graph(2..=10, 0.1..0.9), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..gr.n).collect();
        perm.shuffle(&mut rng(seed));
        let moved: Vec<(usize, usize)> = gr.edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        let a = spectral_radius(&network(gr.n, &gr.edges));
        let b = spectral_radius(&network(gr.n, &moved));
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        prop_assert!((a - lambda_max(&gr.g())).abs() <= 1e-9);
    }

    #[test]
    fn neumann_series_matches(gr in graph(2..=10, 0.1..0.7)) {
        let spec = gr.spec();
        let delta = spec.delta();
        let k = 200;
        let series = neumann_oracle(&gr.g(), delta, k);
        let rho = delta * lambda_max(&gr.g());
        let tail = rho.powi(k as i32 + 1) / (1.0 - rho);
        let all = unit(gr.n);
        let m = leontief_block(&spec, &all, &all);
        for i in 0..gr.n {
            for j in 0..gr.n {
                prop_assert!((m.get(i, j) - series[(i, j)]).abs() <= tail + 1e-12);
            }
        }
    }

    #[test]
    fn leontief_blocks_transpose(gr in graph(2..=10, 0.1..0.9), seed in any::<u64>()) {
        let spec = gr.spec();
        let mut r = rng(seed);
        let a = random_subset(&mut r, gr.n, 1 + seed as usize % gr.n);
        let b = random_subset(&mut r, gr.n, 1 + (seed >> 8) as usize % gr.n);
        let ab = leontief_block(&spec, &a, &b);
        let ba = leontief_block(&spec, &b, &a);
        for i in 0..a.len() {
            for j in 0..b.len() {
                prop_assert!((ab.get(i, j) - ba.get(j, i)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn row_sums_are_unweighted_centrality(gr in graph(1..=10, 0.1..0.9), th in theta(10)) {
        let spec = gr.spec().with_theta(DVector::from_column_slice(&th[..gr.n])).unwrap();
        let report = netsurgeon::katz_bonacich(&spec);
        let all = unit(gr.n);
        let m = leontief_block(&spec, &all, &all);
        for i in 0..gr.n {
            let row: f64 = (0..gr.n).map(|j| m.get(i, j)).sum();
            prop_assert!((report.b_unweighted[i] - row).abs() <= 1e-10);
        }
    }

    #[test]
    fn adding_an_edge_raises_walk_counts(gr in graph(2..=10, 0.1..0.9), pick in any::<usize>()) {
        let g = gr.g();
        let absent: Vec<(usize, usize)> = (0..gr.n)
            .flat_map(|i| (i + 1..gr.n).map(move |j| (i, j)))
            .filter(|&(i, j)| g[(i, j)] == 0.0)
            .collect();
        prop_assume!(!absent.is_empty());
        let (i, j) = absent[pick % absent.len()];
        let h = apply_toggles(&g, &[(i, j, 1.0)]);
        let delta = gr.frac / lambda_max(&h);
        let (m0, m1) = (leontief_oracle(&g, delta), leontief_oracle(&h, delta));
        let spec = certify(network(gr.n, &gr.edges), delta).unwrap();
        let b1 = solve_oracle(&h, &DVector::from_element(gr.n, 1.0), delta);
        for x in 0..gr.n {
            prop_assert!(b1[x] >= spec.b()[x] - 1e-12);
            for y in 0..gr.n {
                prop_assert!(m1[(x, y)] >= m0[(x, y)] - 1e-12);
            }
        }
    }

    #[test]
    fn characteristic_effect_is_linear(gr in graph(1..=10, 0.1..0.9), dt in proptest::collection::vec(-1.0..1.0f64, 10), alpha in -3.0..3.0f64) {
        let spec = gr.spec();
        let iv = CharacteristicIntervention::new(DVector::from_column_slice(&dt[..gr.n]));
        let base = characteristic_effect(&spec, &iv).unwrap();
        let scaled = characteristic_effect(&spec, &iv.scaled(alpha)).unwrap();
        for i in 0..gr.n {
            prop_assert!((scaled.delta_x[i] - alpha * base.delta_x[i]).abs() <= 1e-10 * (1.0 + base.delta_x[i].abs()));
        }
    }

    #[test]
    fn change_then_reverse_is_identity(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 4..=12, false);
        let forward = structural_effect(&inst.spec, &inst.iv).unwrap();
        let post_net = inst.iv.apply(inst.spec.network()).unwrap();
        let post = GameSpec::new(post_net, Some(inst.spec.theta().clone()), inst.spec.delta()).unwrap();
        let back = structural_effect(&post, &inst.iv.negated()).unwrap();
        for i in 0..inst.spec.n() {
            prop_assert!((forward.delta_x[i] + back.delta_x[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn equivalent_shift_is_local(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 4..=12, false);
        let shift = equivalent_theta(&inst.spec, &inst.iv).unwrap();
        let s = inst.iv.support();
        let idx = s.as_slice();
        let m = leontief_oracle(&inst.g, inst.spec.delta());
        let b = solve_oracle(&inst.g, inst.spec.theta(), inst.spec.delta());
        let c = &inst.post - &inst.g;
        let (m_ss, c_ss) = (block(&m, idx, idx), block(&c, idx, idx));
        let b_s = DVector::from_iterator(idx.len(), idx.iter().map(|&i| b[i]));
        let k = idx.len();
        let lhs = DMatrix::identity(k, k) - &m_ss * &c_ss * inst.spec.delta();
        let expected = &c_ss * lhs.lu().solve(&b_s).unwrap() * inst.spec.delta();
        prop_assert_eq!(shift.support.as_slice(), idx);
        for r in 0..k {
            prop_assert!(close(shift.values[r], expected[r], AGREE));
        }
    }

    #[test]
    fn singleton_intercentrality_formula(gr in graph(1..=10, 0.1..0.9), th in theta(10), pick in any::<usize>()) {
        let spec = gr.spec().with_theta(DVector::from_column_slice(&th[..gr.n])).unwrap();
        let i = pick % gr.n;
        let d = intercentrality(&spec, &NodeSet::new([i], gr.n).unwrap()).unwrap().intercentrality;
        let m = leontief_oracle(&gr.g(), spec.delta());
        let b1 = m.row_sum()[i];
        let expected = b1 * spec.b()[i] / m[(i, i)];
        prop_assert!((d - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn greedy_never_beats_exhaustive(gr in graph(2..=9, 0.1..0.9), k in 1usize..4) {
        prop_assume!(k <= gr.n);
        let spec = gr.spec();
        let best = key_group_exhaustive(&spec, k, &SearchOptions::default()).unwrap();
        let greedy = key_group_greedy(&spec, k).unwrap();
        prop_assert!(greedy.intercentrality <= best[0].intercentrality * (1.0 + 1e-12));
    }

    #[test]
    fn pruning_keeps_an_optimizer(gr in graph(2..=8, 0.1..0.9), k in 1usize..4) {
        prop_assume!(k <= gr.n);
        let spec = gr.spec();
        let all = key_group_exhaustive(&spec, k, &SearchOptions { top: None, ..SearchOptions::default() }).unwrap();
        let groups: Vec<NodeSet> = all.iter().map(|g| g.group.clone()).collect();
        let kept = dominance_prune(&spec, &groups).unwrap();
        let top = all[0].intercentrality;
        let kept_best = kept
            .iter()
            .map(|g| intercentrality(&spec, g).unwrap().intercentrality)
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((kept_best - top).abs() <= 1e-10 * top);
    }

    #[test]
    fn walk_oracle_monotone_and_convergent(gr in graph(2..=8, 0.1..0.6), seed in any::<u64>()) {
        let spec = gr.spec();
        let mut r = rng(seed);
        let k = 1 + seed as usize % (gr.n - 1);
        let s = random_subset(&mut r, gr.n, k);
        let (i, j) = ((seed >> 16) as usize % gr.n, (seed >> 24) as usize % gr.n);
        let w = netsurgeon::walks::walk_matrix(&spec, &s).unwrap();
        let mut last = 0.0;
        for len in [0, 1, 2, 5, 10, 20, 40, 80] {
            let v = enumerate_avoiding_walks(spec.network(), spec.delta(), i, j, &s, len);
            prop_assert!(v >= last - 1e-15);
            last = v;
        }
        prop_assert!((last - w.w(i, j)).abs() <= 1e-9);
    }

    #[test]
    fn bridge_index_increases_in_centrality_and_loops(
        delta in 0.01..0.3f64,
        b_i in 1.0..5.0f64,
        b_j in 1.0..5.0f64,
        m_ii in 1.0..1.5f64,
        m_jj in 1.0..1.5f64,
    ) {
        prop_assume!(1.0 - delta * delta * 1.5 * 1.5 > 0.05);
        let h = 1e-6;
        let base = bridge_formula(delta, b_i, m_ii, b_j, m_jj);
        prop_assert!(bridge_formula(delta, b_i + h, m_ii, b_j, m_jj) > base);
        prop_assert!(bridge_formula(delta, b_i, m_ii + h, b_j, m_jj) > base);
    }

    #[test]
    fn bridge_index_supermodular(
        delta in 0.01..0.3f64,
        b in 1.0..5.0f64,
        m_hi in 1.0..1.5f64,
        m_lo_frac in 0.0..1.0f64,
        m_j in 1.0..1.5f64,
        b_hi in 1.0..5.0f64,
        b_lo_frac in 0.0..1.0f64,
    ) {
        let m_lo = 1.0 + (m_hi - 1.0) * m_lo_frac;
        let b_lo = 1.0 + (b_hi - 1.0) * b_lo_frac;
        prop_assume!(1.0 - delta * delta * 1.5 * 1.5 > 0.05);
        let l = |b_a, m_a, b_c, m_c| bridge_formula(delta, b_a, m_a, b_c, m_c);
        let gain_i = l(b, m_hi, b_hi, m_j) - l(b, m_hi, b_lo, m_j);
        let gain_i2 = l(b, m_lo, b_hi, m_j) - l(b, m_lo, b_lo, m_j);
        prop_assert!(gain_i >= gain_i2 - 1e-10);
    }

    #[test]
    fn bridge_linear_coefficient_is_degree(g1 in graph(1..=6, 0.5..0.6), g2 in graph(1..=6, 0.5..0.6), pi in any::<usize>(), pj in any::<usize>()) {
        let lambda = lambda_max(&g1.g()).max(lambda_max(&g2.g())).max(1.0);
        let (i, j) = (pi % g1.n, pj % g2.n);
        let deg = |g: &Graph, x: usize| g.edges.iter().filter(|&&(a, b)| a == x || b == x).count() as f64;
        let coefficient = 2.0 * (1.0 + deg(&g1, i) + deg(&g2, j));
        let mut errs = Vec::new();
        for scale in [1e-1, 1e-2, 1e-3] {
            let delta = scale / lambda;
            let s1 = certify(network(g1.n, &g1.edges), delta).unwrap();
            let s2 = certify(network(g2.n, &g2.edges), delta).unwrap();
            let l = bridge_index(&s1, &s2, i, j).unwrap().index;
            errs.push(((l - 2.0) / delta - coefficient).abs());
        }
        // second-order remainder shrinks with delta
        prop_assert!(errs[2] <= errs[1] + 1e-9 && errs[1] <= errs[0] + 1e-9, "{errs:?}");
        prop_assert!(errs[2] <= 0.05 * coefficient, "{errs:?}");

        // higher degree wins at small delta
        let delta = 1e-3 / lambda;
        let s1 = certify(network(g1.n, &g1.edges), delta).unwrap();
        let s2 = certify(network(g2.n, &g2.edges), delta).unwrap();
        for i2 in 0..g1.n {
            if deg(&g1, i) > deg(&g1, i2) {
                prop_assert!(bridge_index(&s1, &s2, i, j).unwrap().index > bridge_index(&s1, &s2, i2, j).unwrap().index);
            }
        }
    }

    #[test]
    fn bridge_walk_census(g1 in graph(1..=5, 0.1..0.6), g2 in graph(1..=5, 0.1..0.6), pi in any::<usize>(), pj in any::<usize>()) {
        let (n1, n2) = (g1.n, g2.n);
        let n = n1 + n2;
        let mut joined = DMatrix::zeros(n, n);
        joined.view_mut((0, 0), (n1, n1)).copy_from(&g1.g());
        joined.view_mut((n1, n1), (n2, n2)).copy_from(&g2.g());
        let (i, j) = (pi % n1, pj % n2);
        let bridged = apply_toggles(&joined, &[(i, n1 + j, 1.0)]);
        let delta = 0.7 / lambda_max(&bridged);
        let s1 = certify(network(n1, &g1.edges), delta).unwrap();
        let s2 = certify(network(n2, &g2.edges), delta).unwrap();
        let (b_i, b_j) = (s1.b()[i], s2.b()[j]);
        let m_ii = leontief_oracle(&g1.g(), delta)[(i, i)];
        let m_jj = leontief_oracle(&g2.g(), delta)[(j, j)];
        let den = 1.0 - delta * delta * m_ii * m_jj;

        let k = 300;
        let before = neumann_oracle(&joined, delta, k);
        let after = neumann_oracle(&bridged, delta, k);
        let rho = 0.7f64;
        let tail = (n * n) as f64 * rho.powi(k as i32 + 1) / (1.0 - rho) * 2.0;
        let sum = |r: std::ops::Range<usize>, c: std::ops::Range<usize>| {
            let mut t = 0.0;
            for x in r.clone() {
                for y in c.clone() {
                    t += after[(x, y)] - before[(x, y)];
                }
            }
            t
        };
        let types = [
            (sum(0..n1, n1..n), delta * b_i * b_j / den),
            (sum(n1..n, 0..n1), delta * b_i * b_j / den),
            (sum(0..n1, 0..n1), delta * delta * b_i * b_i * m_jj / den),
            (sum(n1..n, n1..n), delta * delta * b_j * b_j * m_ii / den),
        ];
        for (walks, closed) in types {
            prop_assert!((walks - closed).abs() <= tail + 1e-9 * closed.max(1.0), "{walks} vs {closed}");
        }
        let l = bridge_index(&s1, &s2, i, j).unwrap().index;
        let total: f64 = types.iter().map(|t| t.1).sum();
        prop_assert!((delta * l - total).abs() <= 1e-12 * total.max(1.0));
    }

    #[test]
    fn potential_link_matches_bridge_on_components(g1 in graph(1..=5, 0.1..0.6), g2 in graph(1..=5, 0.1..0.6), pi in any::<usize>(), pj in any::<usize>()) {
        let (n1, n2) = (g1.n, g2.n);
        let mut labels: Vec<String> = (0..n1).map(|x| format!("a{x:02}")).collect();
        labels.extend((0..n2).map(|x| format!("b{x:02}")));
        let mut edges: Vec<(String, String)> = g1.edges.iter().map(|&(x, y)| (labels[x].clone(), labels[y].clone())).collect();
        edges.extend(g2.edges.iter().map(|&(x, y)| (labels[n1 + x].clone(), labels[n1 + y].clone())));
        let joined = Network::from_edges(labels, edges).unwrap();
        let (i, j) = (pi % n1, pj % n2);
        let lam = lambda_max(&apply_toggles(joined.adjacency(), &[(i, n1 + j, 1.0)]));
        let delta = 0.8 / lam;
        let whole = certify(joined, delta).unwrap();
        let s1 = certify(network(n1, &g1.edges), delta).unwrap();
        let s2 = certify(network(n2, &g2.edges), delta).unwrap();
        let link = link_value_potential(&whole, i, n1 + j).unwrap().value;
        let bridge = bridge_index(&s1, &s2, i, j).unwrap().index;
        prop_assert!(close(link, bridge, AGREE), "{link} vs {bridge}");
    }

    #[test]
    fn multi_activity_structural_consistency(seed in any::<u64>(), beta in -0.7..0.7f64) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 3..=10, false);
        let n = inst.spec.n();
        let delta = inst.spec.delta() * (1.0 - beta.abs());
        let (ta, tb) = (random_theta(&mut r, n), random_theta(&mut r, n));
        let spec = MultiActivitySpec::new(inst.spec.network().clone(), ta.clone(), tb.clone(), delta, beta).unwrap();
        let (dx_a, dx_b) = multi_activity_structural_effect(&spec, &inst.iv).unwrap();

        let solve = |g: &DMatrix<f64>| {
            let a = DMatrix::identity(n, n) - g * delta;
            let mut big = DMatrix::zeros(2 * n, 2 * n);
            big.view_mut((0, 0), (n, n)).copy_from(&a);
            big.view_mut((n, n), (n, n)).copy_from(&a);
            big.view_mut((0, n), (n, n)).copy_from(&(DMatrix::identity(n, n) * beta));
            big.view_mut((n, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) * beta));
            let mut rhs = DVector::zeros(2 * n);
            rhs.rows_mut(0, n).copy_from(&ta);
            rhs.rows_mut(n, n).copy_from(&tb);
            big.lu().solve(&rhs).unwrap()
        };
        let (pre, post) = (solve(&inst.g), solve(&inst.post));
        for x in 0..n {
            prop_assert!(close(dx_a[x], post[x] - pre[x], AGREE));
            prop_assert!(close(dx_b[x], post[n + x] - pre[n + x], AGREE));
        }
    }

    #[test]
    fn congestion_inverse_decomposes(gr in graph(1..=8, 0.1..0.9), ratio in 4.5..50.0f64) {
        let delta = gr.delta();
        let gamma = delta * delta / ratio;
        let spec = CongestionSpec::new(network(gr.n, &gr.edges), DVector::from_element(gr.n, 1.0), delta, gamma).unwrap();
        let (b1, b2) = spec.roots().expect("real roots");
        prop_assume!((b1 - b2).abs() >= 1e-6 * delta);
        let g = gr.g();
        let direct = (DMatrix::identity(gr.n, gr.n) - &g * delta + (&g * &g) * gamma).try_inverse().unwrap();
        let alt = leontief_oracle(&g, b1) * (b1 / (b1 - b2)) - leontief_oracle(&g, b2) * (b2 / (b1 - b2));
        for x in 0..gr.n {
            for y in 0..gr.n {
                prop_assert!(close(direct[(x, y)], alt[(x, y)], AGREE));
            }
        }
    }
}

#[test]
fn regular_graphs_have_degree_radius() {
    let ring: Vec<(usize, usize)> = (0..9)
        .map(|i| (i, (i + 1) % 9))
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    assert!((spectral_radius(&network(9, &ring)) - 2.0).abs() <= 1e-10);
    let complete: Vec<(usize, usize)> = (0..6)
        .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
        .collect();
    assert!((spectral_radius(&network(6, &complete)) - 5.0).abs() <= 1e-10);
    let cube: Vec<(usize, usize)> = (0..16usize)
        .flat_map(|i| (0..4).map(move |b| (i, i ^ (1 << b))))
        .filter(|&(i, j)| i < j)
        .collect();
    assert!((spectral_radius(&network(16, &cube)) - 4.0).abs() <= 1e-10);
    let regular10 = netsurgeon::reproduce::Fixtures::embedded().regular10;
    assert!((spectral_radius(&regular10) - 3.0).abs() <= 1e-10);
}
