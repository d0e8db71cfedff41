use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcm::model::{unit_volume_radius, ConnectionFunction, ConnectionParams, Kind};
use rcm::sampler::*;
use rcm::stats::{ks_two_sample, Running};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn torus(side: f64, d: usize) -> BoxSpec {
    BoxSpec::new(side, d, Boundary::Torus)
}

fn points(d: usize, xs: &[&[f64]]) -> PointSet {
    let mut p = PointSet::new(d);
    for (i, x) in xs.iter().enumerate() {
        p.push(i as u64, x);
    }
    p
}

fn edge_set(g: &RcmGraph) -> HashSet<(u64, u64)> {
    g.edges().into_iter().map(|(i, j)| (g.points.ids[i].min(g.points.ids[j]), g.points.ids[i].max(g.points.ids[j]))).collect()
}

#[test]
fn zero_intensity_gives_no_points() {
    assert!(sample_ppp(0.0, &torus(10.0, 2), 1).unwrap().is_empty());
}

#[test]
fn bad_intensities_are_rejected() {
    assert!(matches!(sample_ppp(-1.0, &torus(10.0, 2), 1), Err(SamplerError::InvalidIntensity(_))));
    assert!(matches!(sample_ppp(f64::NAN, &torus(10.0, 2), 1), Err(SamplerError::InvalidIntensity(_))));
    assert!(matches!(sample_ppp(1.0, &torus(1e4, 2), 1), Err(SamplerError::TooManyPoints { .. })));
}

#[test]
fn poisson_count_mean_and_variance() {
    let bx = torus(10.0, 2);
    let n = 10_000;
    let counts: Running = (0..n).map(|s| sample_ppp(2.0, &bx, s).unwrap().len() as f64).collect();
    assert!((counts.mean - 200.0).abs() < 3.0 * counts.se(), "{counts:?}");
    // (n-1) s² / σ² is chi-square with n-1 degrees of freedom.
    let chi = ChiSquared::new((n - 1) as f64).unwrap();
    let stat = (n - 1) as f64 * counts.variance() / 200.0;
    assert!(stat > chi.inverse_cdf(0.025) && stat < chi.inverse_cdf(0.975), "variance {}", counts.variance());
}

#[test]
fn points_are_uniform_in_the_box() {
    let bx = torus(4.0, 3);
    let p = sample_ppp(50.0, &bx, 9).unwrap();
    let xs: Vec<f64> = (0..p.len()).map(|i| p.pos(i)[2]).collect();
    let uniform: Vec<f64> = (0..4000).map(|i| -2.0 + 4.0 * (i as f64 + 0.5) / 4000.0).collect();
    assert!(ks_two_sample(&xs, &uniform).p_value > 0.01);
    assert!(p.coords.iter().all(|v| (-2.0..2.0).contains(v)));
}

#[test]
fn vanishing_ball_gives_no_edges() {
    let mut params = ConnectionParams::new(Kind::BooleanBall, 2);
    params.radius = Some(1e-9);
    params.normalize = false;
    let cf = Arc::new(ConnectionFunction::new(params).unwrap());
    let g = build_rcm(cf, 5.0, torus(10.0, 2), 3).unwrap();
    assert!(g.points.len() > 300);
    assert_eq!(g.edge_count(), 0);
}

#[test]
fn close_points_in_a_ball_always_connect() {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let r = unit_volume_radius(2);
    for seed in 0..100 {
        let p = points(2, &[&[0.0, 0.0], &[0.9 * r, 0.0], &[2.5 * r, 0.0]]);
        let g = build_rcm_on(cf.clone(), 1.0, torus(10.0, 2), p, Marks::new(seed)).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }
}

#[test]
fn gaussian_mean_degree_matches_intensity_times_mass() {
    // λ q_φ = 1, so the Palm mean degree is 1.
    let cf = Arc::new(ConnectionFunction::gaussian(2));
    let bx = torus(1000f64.sqrt(), 2);
    let deg: Running = (0..200)
        .map(|s| {
            let g = build_rcm(cf.clone(), 1.0, bx, 1000 + s).unwrap();
            2.0 * g.edge_count() as f64 / bx.volume()
        })
        .collect();
    assert!((deg.mean - 1.0).abs() < 3.0 * deg.se(), "{deg:?}");
}

#[test]
fn adjacency_is_symmetric_without_loops() {
    let cf = Arc::new(ConnectionFunction::spread_out_ball(2, 1.5).unwrap());
    let g = build_rcm(cf, 1.0, torus(8.0, 2), 5).unwrap();
    for v in 0..g.points.len() {
        for &w in &g.adjacency[v] {
            assert_ne!(v, w as usize);
            assert!(g.adjacency[w as usize].contains(&(v as u32)));
        }
    }
}

#[test]
fn insertion_keeps_existing_edges() {
    let cf = Arc::new(ConnectionFunction::gaussian(2));
    let bx = torus(6.0, 2);
    let g = build_rcm(cf.clone(), 1.0, bx, 77).unwrap();
    assert_eq!(insert_points(&g, &[]).unwrap().adjacency, g.adjacency);
    let h = insert_points(&g, &[&[0.0, 0.0], &[1.0, 0.5]]).unwrap();
    let h2 = insert_points(&g, &[&[0.0, 0.0], &[1.0, 0.5]]).unwrap();
    assert_eq!(h.adjacency, h2.adjacency);
    let n = g.points.len();
    for v in 0..n {
        let orig: Vec<u32> = h.adjacency[v].iter().copied().filter(|&w| (w as usize) < n).collect();
        assert_eq!(orig, g.adjacency[v]);
    }
    assert!(matches!(insert_points(&g, &[&[9.0, 0.0]]), Err(SamplerError::OutsideBox)));
    assert!(matches!(insert_points(&g, &[&[0.0]]), Err(SamplerError::DimensionMismatch { .. })));
}

#[test]
fn insertion_leaves_the_law_of_original_edges_unchanged() {
    let cf = Arc::new(ConnectionFunction::gaussian(2));
    let bx = torus(6.0, 2);
    let n = 10_000u64;
    let with: Vec<f64> = (0..n)
        .map(|s| {
            let g = build_rcm(cf.clone(), 1.0, bx, s).unwrap();
            let h = insert_points(&g, &[&[0.0, 0.0], &[0.7, -0.3]]).unwrap();
            h.edges().iter().filter(|(i, j)| *i < h.n_poisson && *j < h.n_poisson).count() as f64
        })
        .collect();
    let without: Vec<f64> =
        (0..n).map(|s| build_rcm(cf.clone(), 1.0, bx, n + s).unwrap().edge_count() as f64).collect();
    let ks = ks_two_sample(&with, &without);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn inserted_points_connect_like_poisson_points() {
    // An inserted point at distance below r_d from a Poisson point always
    // joins it in the Boolean model.
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let g = build_rcm(cf, 1.0, torus(10.0, 2), 4).unwrap();
    let x: Vec<f64> = g.points.pos(0).iter().map(|v| v + 0.01).collect();
    let h = insert_points(&g, &[&x]).unwrap();
    assert!(h.adjacency[h.n_poisson].contains(&0));
}

/// Components by union-find over the edge list.
fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}

#[test]
fn clusters_match_union_find() {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    for seed in 0..20 {
        let g = build_rcm(cf.clone(), 1.2, torus(12.0, 2), seed).unwrap();
        let comp = components(g.points.len(), &g.edges());
        for v in (0..g.points.len()).step_by(5) {
            let c = explore_cluster(&g, v, None, Caps::unbounded());
            let mut got = c.members.clone();
            got.sort_unstable();
            let want: Vec<usize> = (0..g.points.len()).filter(|&w| comp[w] == comp[v]).collect();
            assert_eq!(got, want);
            assert_eq!(c.members[0], v);
            assert!(!c.censored);
        }
    }
}

#[test]
fn lazy_world_agrees_with_materialized_graph() {
    let cf = Arc::new(ConnectionFunction::gaussian(2));
    let bx = torus(7.0, 2);
    let real = Realization::sample(cf.clone(), 1.3, bx, 21).unwrap();
    let w = real.view(&[&[0.0, 0.0]]);
    let g = insert_points(&build_rcm(cf, 1.3, bx, 21).unwrap(), &[&[0.0, 0.0]]).unwrap();
    assert_eq!(w.vertex_count(), g.points.len());
    for v in 0..g.points.len() {
        let mut nb = w.neighbors(v);
        nb.sort_unstable();
        let want: Vec<usize> = g.adjacency[v].iter().map(|&x| x as usize).collect();
        assert_eq!(nb, want);
    }
}

fn line_graph(xs: &[f64]) -> RcmGraph {
    // Boolean model in d = 1 has radius 1/2.
    let cf = Arc::new(ConnectionFunction::boolean(1));
    let pts: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
    let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
    build_rcm_on(cf, 1.0, BoxSpec::new(20.0, 1, Boundary::Free), points(1, &refs), Marks::new(0)).unwrap()
}

#[test]
fn small_cluster_examples() {
    let single = line_graph(&[0.0, 3.0]);
    let c = explore_cluster(&single, 0, None, Caps::unbounded());
    assert_eq!((c.members.clone(), c.depth), (vec![0], 0));

    let path = line_graph(&[0.0, 0.4, 0.8]);
    let c = explore_cluster(&path, 0, None, Caps::unbounded());
    assert_eq!((c.len(), c.depth), (3, 2));
    assert_eq!(pivotal_points(&path, 0, 2, 100).unwrap().points, vec![1]);
    assert_eq!(double_connected(&path, 0, 2, 100).unwrap(), Some(false));
    assert_eq!(double_connected(&path, 1, 1, 100).unwrap(), Some(true));

    let triangle = line_graph(&[0.0, 0.2, 0.4]);
    let p = pivotal_points(&triangle, 0, 2, 100).unwrap();
    assert!(p.connected && p.points.is_empty());
    assert_eq!(double_connected(&triangle, 0, 2, 100).unwrap(), Some(true));

    let apart = line_graph(&[0.0, 0.4, 5.0]);
    let p = pivotal_points(&apart, 0, 2, 100).unwrap();
    assert!(!p.connected && !p.censored);
    assert!(pivotal_points(&apart, 0, 7, 100).is_err());
}

#[test]
fn boundary_contact_is_reported_for_free_boxes() {
    let g = line_graph(&[9.3, 9.7, 0.0]);
    assert!(explore_cluster(&g, 0, None, Caps::unbounded()).touched_boundary);
    assert!(!explore_cluster(&g, 2, None, Caps::unbounded()).touched_boundary);
}

fn connected_without(adj: &[Vec<u32>], u: usize, v: usize, removed: Option<usize>) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![u];
    seen[u] = true;
    while let Some(x) = stack.pop() {
        if x == v {
            return true;
        }
        for &w in &adj[x] {
            let w = w as usize;
            if Some(w) != removed && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// Simple paths from `u` to `v`, as interior vertex sets.
fn simple_paths(adj: &[Vec<u32>], u: usize, v: usize) -> Vec<Vec<usize>> {
    fn go(adj: &[Vec<u32>], x: usize, v: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if x == v {
            out.push(path[1..path.len() - 1].to_vec());
            return;
        }
        for &w in &adj[x] {
            let w = w as usize;
            if !path.contains(&w) {
                path.push(w);
                go(adj, w, v, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(adj, u, v, &mut vec![u], &mut out);
    out
}

fn small_random_graphs() -> impl Iterator<Item = RcmGraph> {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    (0..400u64).filter_map(move |s| {
        let g = build_rcm(cf.clone(), 3.0, torus(1.9, 2), s).unwrap();
        (g.points.len() >= 3 && g.points.len() <= 12).then_some(g)
    })
}

#[test]
fn pivotal_points_match_deletion_oracle() {
    let mut checked = 0;
    for g in small_random_graphs() {
        let n = g.points.len();
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let p = pivotal_points(&g, u, v, 1000).unwrap();
                let conn = connected_without(&g.adjacency, u, v, None);
                assert_eq!(p.connected, conn);
                if !conn {
                    continue;
                }
                let want: HashSet<usize> =
                    (0..n).filter(|&w| w != u && w != v && !connected_without(&g.adjacency, u, v, Some(w))).collect();
                assert_eq!(p.points.iter().copied().collect::<HashSet<_>>(), want);
                // Each pivotal point separates u from the next one.
                for pair in p.points.windows(2) {
                    assert!(!connected_without(&g.adjacency, u, pair[1], Some(pair[0])));
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 500, "only {checked} connected pairs");
}

#[test]
fn double_connection_matches_path_enumeration() {
    let mut yes = 0;
    let mut no = 0;
    for g in small_random_graphs().take(120) {
        let n = g.points.len();
        for u in 0..n {
            for v in u + 1..n {
                let paths = simple_paths(&g.adjacency, u, v);
                let adjacent = g.adjacency[u].contains(&(v as u32));
                let two = paths.iter().enumerate().any(|(i, a)| {
                    paths[i + 1..].iter().any(|b| a.iter().all(|x| !b.contains(x)))
                });
                let want = adjacent || two;
                assert_eq!(double_connected(&g, u, v, 1000).unwrap(), Some(want), "u={u} v={v}");
                if want {
                    yes += 1
                } else {
                    no += 1
                }
            }
        }
    }
    assert!(yes > 50 && no > 50, "{yes} {no}");
}

#[test]
fn empty_thinning_keeps_everything() {
    let cf = ConnectionFunction::gaussian(2);
    let bx = torus(5.0, 2);
    let p = sample_ppp(2.0, &bx, 3).unwrap();
    let kept = a_thinning(&cf, &bx, f64::INFINITY, &Marks::new(1), &p, &PointSet::new(2));
    assert!(kept.iter().all(|&k| k));
}

#[test]
fn ball_thinning_removes_points_near_a() {
    let cf = ConnectionFunction::boolean(2);
    let bx = torus(5.0, 2);
    let a = points(2, &[&[0.0, 0.0]]);
    let r = unit_volume_radius(2);
    for s in 0..50 {
        let t = points(2, &[&[0.5 * r, 0.1], &[2.0 * r, 0.0]]);
        let kept = a_thinning(&cf, &bx, r, &Marks::new(s), &t, &a);
        assert_eq!(kept, vec![false, true]);
    }
}

#[test]
fn thinning_survival_frequency_matches_product() {
    let cf = ConnectionFunction::gaussian(2);
    let bx = torus(10.0, 2);
    let a = points(2, &[&[0.0, 0.0], &[0.8, 0.2], &[-0.3, 1.1]]);
    let x = [0.4, 0.5];
    let want = thinning_survival_probability(&cf, &bx, &a, &x);
    let f: Running = (0..10_000u64)
        .map(|s| survives_thinning(&cf, &bx, f64::INFINITY, &Marks::new(s), 42, &x, &a) as u8 as f64)
        .collect();
    assert!((f.mean - want).abs() < 3.0 * f.se(), "{} vs {want}", f.mean);
}

#[test]
fn coupled_intensities_give_nested_edge_sets() {
    let cf = Arc::new(ConnectionFunction::gaussian(2));
    let bx = torus(8.0, 2);
    for seed in 0..10 {
        let c = CoupledPpp::sample(&[0.4, 0.9, 1.5], &bx, seed).unwrap();
        let marks = Marks::new(seed);
        let graphs: Vec<RcmGraph> =
            (0..3).map(|j| build_rcm_on(cf.clone(), c.lambdas[j], bx, c.at(j), marks).unwrap()).collect();
        for j in 0..2 {
            let small = edge_set(&graphs[j]);
            let big = edge_set(&graphs[j + 1]);
            assert!(small.is_subset(&big));
            assert!(graphs[j].points.len() <= graphs[j + 1].points.len());
        }
    }
}

#[test]
fn mecke_identity_for_non_isolated_points() {
    let cf = Arc::new(ConnectionFunction::gaussian(2));
    let bx = torus(8.0, 2);
    let lambda = 0.7;
    let half_w = 2.0;
    let inside = |x: &[f64]| x.iter().all(|v| v.abs() < half_w);
    let area = (2.0 * half_w) * (2.0 * half_w);
    let n = 10_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lhs = Running::default();
    let mut rhs = Running::default();
    for s in 0..n {
        let g = build_rcm(cf.clone(), lambda, bx, s).unwrap();
        lhs.push((0..g.points.len()).filter(|&v| g.degree(v) > 0 && inside(g.points.pos(v))).count() as f64);
        let x = [rng.gen_range(-half_w..half_w), rng.gen_range(-half_w..half_w)];
        let real = Realization::sample(cf.clone(), lambda, bx, n + s).unwrap();
        let w = real.view(&[&x]);
        let mut any = false;
        w.for_each_neighbor(w.inserted(0), &mut |_| any = true);
        rhs.push(lambda * area * any as u8 as f64);
    }
    let se = (lhs.se().powi(2) + rhs.se().powi(2)).sqrt();
    assert!((lhs.mean - rhs.mean).abs() < 3.0 * se, "{} vs {} (se {se})", lhs.mean, rhs.mean);
}

fn four_point_events(seed: u64) -> (bool, bool, Option<bool>) {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let real = Realization::sample(cf, 1.5, torus(8.0, 2), seed).unwrap();
    let w = real.view(&[&[-0.4, -0.35], &[0.4, -0.35], &[-0.4, 0.35], &[0.4, 0.35]]);
    let (a, b, c, d) = (w.inserted(0), w.inserted(1), w.inserted(2), w.inserted(3));
    let e = connected(&w, a, b, None, 10_000).unwrap();
    let f = connected(&w, c, d, None, 10_000).unwrap();
    (e, f, disjoint_connections(&w, (a, b), (c, d), 10_000, 1_000_000))
}

#[test]
fn bk_and_fkg_inequalities() {
    let n = 4000u64;
    let (mut e, mut f, mut both) = (Running::default(), Running::default(), Running::default());
    let mut samples = Vec::new();
    let mut censored = 0;
    for s in 0..n {
        let (x, y, z) = four_point_events(s);
        let Some(z) = z else {
            censored += 1;
            continue;
        };
        e.push(x as u8 as f64);
        f.push(y as u8 as f64);
        both.push(z as u8 as f64);
        assert!(!z || (x && y));
        samples.push((x as u8 as f64, y as u8 as f64));
    }
    eprintln!("P(E)={} P(F)={} P(EoF)={} censored={censored}", e.mean, f.mean, both.mean);
    assert!(censored < 10, "{censored} censored searches");
    assert!(e.mean > 0.05 && f.mean > 0.05, "events too rare: {} {}", e.mean, f.mean);
    assert!(both.mean > 0.01, "disjoint occurrence too rare: {}", both.mean);
    // Disjoint occurrence against the product of marginals.
    let se = (both.se().powi(2) + (f.mean * e.se()).powi(2) + (e.mean * f.se()).powi(2)).sqrt();
    assert!(both.mean <= e.mean * f.mean + 3.0 * se, "{} > {}·{}", both.mean, e.mean, f.mean);
    // Positive association of two increasing events.
    let cov: Running = samples.iter().map(|(x, y)| (x - e.mean) * (y - f.mean)).collect();
    assert!(cov.mean >= -3.0 * cov.se(), "cov {} ± {}", cov.mean, cov.se());
}

#[test]
fn identical_seeds_give_identical_results() {
    let cf = Arc::new(ConnectionFunction::long_range(2, 1.0, 1.5).unwrap());
    let bx = torus(6.0, 2);
    let g1 = build_rcm(cf.clone(), 1.0, bx, 99).unwrap();
    let g2 = build_rcm(cf.clone(), 1.0, bx, 99).unwrap();
    assert_eq!(g1.points, g2.points);
    assert_eq!(g1.adjacency, g2.adjacency);
    let c1 = explore_cluster(&g1, 0, None, Caps::unbounded());
    let c2 = explore_cluster(&g2, 0, None, Caps::unbounded());
    assert_eq!(c1, c2);
    let a = collect_points(&g1, &c1.members);
    let t1 = a_thinning(&cf, &bx, f64::INFINITY, &g1.marks, &g1.points, &a);
    let t2 = a_thinning(&cf, &bx, f64::INFINITY, &g2.marks, &g2.points, &a);
    assert_eq!(t1, t2);
    let g3 = build_rcm(cf, 1.0, bx, 100).unwrap();
    assert_ne!(g1.points, g3.points);
}

#[test]
fn stopping_set_at_zero_intensity() {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let s = stopping_set_sample(0.0, cf, BoxSpec::new(10.0, 2, Boundary::Free), 1, Caps::default()).unwrap();
    assert_eq!(s.cluster.len(), 1);
    assert_eq!(s.remainder.points.len(), 0);
}

#[test]
fn stopping_set_remainder_is_a_thinned_process() {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let bx = BoxSpec::new(10.0, 2, Boundary::Free);
    let lambda = 0.3;
    let (mut counts, mut edges, mut oracle_counts, mut oracle_edges) = (vec![], vec![], vec![], vec![]);
    let mut discarded = 0;
    for seed in 0..5000u64 {
        let s = stopping_set_sample(lambda, cf.clone(), bx, seed, Caps::default()).unwrap();
        if s.touched_boundary || s.censored {
            discarded += 1;
            continue;
        }
        counts.push(s.remainder.points.len() as f64);
        edges.push(s.remainder.edge_count() as f64);
        let oseed = derive_seed(seed, &[0x0AC1E]);
        let thinned = sample_thinned_ppp(lambda, &cf, &bx, &s.cluster, oseed).unwrap();
        let g = build_rcm_on(cf.clone(), lambda, bx, thinned, Marks::new(oseed)).unwrap();
        oracle_counts.push(g.points.len() as f64);
        oracle_edges.push(g.edge_count() as f64);
    }
    assert!(discarded < 500, "{discarded} samples touched the boundary");
    let kc = ks_two_sample(&counts, &oracle_counts);
    let ke = ks_two_sample(&edges, &oracle_edges);
    assert!(kc.p_value > 0.01, "counts {kc:?}");
    assert!(ke.p_value > 0.01, "edges {ke:?}");
}

#[test]
fn dump_round_trip() {
    let cf = Arc::new(ConnectionFunction::gaussian(3));
    let g = build_rcm(cf, 0.8, BoxSpec::new(4.0, 3, Boundary::Free), 12).unwrap();
    let mut buf = Vec::new();
    write_dump(&g, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("rcm-dump 1\n"));
    let d = parse_dump(&text).unwrap();
    assert_eq!(d, Dump::from_graph(&g));
    assert_eq!(d.seed, Some(12));
    assert!(matches!(parse_dump("rcm-dump 2\n"), Err(SamplerError::Dump { .. })));
    let broken = text.replace("edges", "edgez");
    assert!(matches!(parse_dump(&broken), Err(SamplerError::Dump { .. })));
}
