use std::io::Cursor;
use std::path::PathBuf;

use hyperspar_bench::{gen_synthetic, gen_synthetic_with, load_snap, load_snap_path, WeightKind};
use hyperspar_core::Error;

#[test]
fn two_vertices_give_parallel_edges() {
    let g = gen_synthetic(2, 3, 11);
    assert_eq!(g.len(), 3);
    for e in g.edges() {
        assert_eq!((e.u.min(e.v), e.u.max(e.v)), (0, 1));
        assert!((1.0..=10.0).contains(&e.w));
    }
}

#[test]
fn endpoints_and_weights_in_range() {
    let g = gen_synthetic(7, 100_000, 5);
    assert!(g.edges().iter().all(|e| e.u < 7 && e.v < 7 && e.u != e.v && (1.0..=10.0).contains(&e.w)));
    let mean = g.edges().iter().map(|e| e.w).sum::<f64>() / g.len() as f64;
    assert!((mean - 5.5).abs() < 0.05, "mean weight {mean}");
}

#[test]
fn same_seed_same_edges() {
    let a = gen_synthetic(50, 1000, 42);
    let b = gen_synthetic(50, 1000, 42);
    let bits = |g: &hyperspar_core::Graph64| g.edges().iter().map(|e| (e.u, e.v, e.w.to_bits())).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_ne!(bits(&a), bits(&gen_synthetic(50, 1000, 43)));
}

#[test]
fn integer_weights() {
    let g = gen_synthetic_with(10, 5000, 1, WeightKind::Integer);
    assert!(g.edges().iter().all(|e| e.w.fract() == 0.0 && (1.0..=10.0).contains(&e.w)));
    for k in 1..=10 {
        assert!(g.edges().iter().any(|e| e.w == k as f64), "weight {k} never drawn");
    }
}

#[test]
fn snap_two_lines() {
    let g = load_snap(Cursor::new("0 1\n1 2"), 0).unwrap();
    assert_eq!((g.n(), g.len()), (3, 2));
    assert!(g.edges().iter().all(|e| (1.0..=10.0).contains(&e.w)));
}

#[test]
fn snap_relabels_and_keeps_duplicates() {
    let g = load_snap(Cursor::new("# header\n\n100 7\n7 100\n  42\t100  \n"), 3).unwrap();
    assert_eq!((g.n(), g.len()), (3, 3));
    let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    assert_eq!(pairs, vec![(0, 1), (1, 0), (2, 0)]);
}

#[test]
fn snap_comments_only_is_empty() {
    assert!(matches!(load_snap(Cursor::new("# a\n# b\n"), 0), Err(Error::EmptyGraph)));
}

#[test]
fn snap_malformed_line_reports_its_number() {
    match load_snap(Cursor::new("0 1\n# ok\n1 2 3\n"), 0) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    match load_snap(Cursor::new("0 1\n5 5\n"), 0) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn snap_missing_file() {
    assert!(matches!(load_snap_path(&PathBuf::from("/nonexistent/edges.txt"), 0), Err(Error::Io(_))));
}

/// Set `HYPERSPAR_FACEBOOK_107` to the ego-network edge file to run this.
#[test]
fn facebook_ego_network_shape() {
    let Some(path) = std::env::var_os("HYPERSPAR_FACEBOOK_107").map(PathBuf::from) else {
        eprintln!("HYPERSPAR_FACEBOOK_107 not set, skipping");
        return;
    };
    let g = load_snap_path(&path, 0).unwrap();
    assert_eq!((g.n(), g.len()), (1034, 53498));
}
