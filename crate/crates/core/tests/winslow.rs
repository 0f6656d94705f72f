use cornermap::winslow::{fold_cells, solve, solve_from};
use cornermap::{DomainBoundary, SectorTestCase, SolveOptions, SweepOrdering, WinslowGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts(ordering: SweepOrdering) -> SolveOptions<f64> {
    SolveOptions {
        ordering,
        ..SolveOptions::default()
    }
}

fn affine(u: f64, v: f64) -> [f64; 2] {
    [2.0 * u + 0.5 * v + 1.0, 0.3 * u + 1.5 * v]
}

#[test]
fn identity_grid_is_a_fixed_point() {
    let (g, rep) = solve(&DomainBoundary::<f64>::unit_square(), 17, 13, &SolveOptions::default()).unwrap();
    assert!(rep.initial_residual < 1e-12, "{}", rep.initial_residual);
    assert!(rep.converged);
    assert!(rep.fold_cells.is_empty());
    let lattice = WinslowGrid::<f64>::lattice(17, 13);
    for k in 0..g.x.len() {
        assert!((g.x[k] - lattice.x[k]).abs() < 1e-12 && (g.y[k] - lattice.y[k]).abs() < 1e-12);
    }
}

#[test]
fn affine_domains_are_reproduced() {
    let para = DomainBoundary::new(
        vec![affine(-0.5, 0.0), affine(0.5, 0.0), affine(0.5, 1.0), affine(-0.5, 1.0)],
        [0, 1, 2, 3],
        vec![],
    )
    .unwrap();
    let rect = DomainBoundary::<f64>::rectangle(-1.0, 3.0, 0.5, 1.5).unwrap();
    for ordering in [SweepOrdering::Lexicographic, SweepOrdering::FourColor] {
        let (g, rep) = solve(&para, 11, 15, &opts(ordering)).unwrap();
        assert!(rep.initial_residual < 1e-12, "{}", rep.initial_residual);
        assert!(rep.fold_cells.is_empty());
        for j in 0..g.ny {
            for i in 0..g.nx {
                let want = affine(g.param_u(i), g.param_v(j));
                let got = g.node(i, j);
                assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
            }
        }
        let (_, rep) = solve(&rect, 9, 9, &opts(ordering)).unwrap();
        assert!(rep.initial_residual < 1e-12);
        assert!(rep.fold_cells.is_empty());
    }
}

#[test]
fn sector_solves_stay_in_bounding_box_and_settle() {
    for beta in [1.25, 1.5, 1.75] {
        let case = SectorTestCase::<f64>::new(beta, 1.0, 64).unwrap();
        let (_, rep) = solve(&case.domain(), 17, 17, &SolveOptions::default()).unwrap();
        assert!(rep.converged, "beta = {beta}");
        assert_eq!(rep.bbox_violations, 0, "beta = {beta}");
        let tail = &rep.final_update[rep.final_update.len().saturating_sub(10)..];
        for w in tail.windows(2) {
            assert!(w[1] <= 1.1 * w[0], "beta = {beta}: {:?}", tail);
        }
    }
}

/// All four corner triangles of every cell, oriented as in parameter space.
fn brute_force_folds(g: &WinslowGrid<f64>) -> Vec<(usize, usize)> {
    let area = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut out = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let [p0, p1, p2, p3] = g.cell(i, j);
            let tris = [(p3, p0, p1), (p0, p1, p2), (p1, p2, p3), (p2, p3, p0)];
            if tris.iter().any(|&(a, b, c)| area(a, b, c) <= 0.0) {
                out.push((i, j));
            }
        }
    }
    out
}

#[test]
fn fold_detection_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut folded = 0;
    for trial in 0..200 {
        let mut g = WinslowGrid::<f64>::lattice(8, 8);
        let amp = 0.02 + 0.15 * (trial as f64 / 200.0);
        for j in 1..7 {
            for i in 1..7 {
                let p = g.node(i, j);
                g.set_node(i, j, [p[0] + rng.gen_range(-amp..amp), p[1] + rng.gen_range(-amp..amp)]);
            }
        }
        let want = brute_force_folds(&g);
        folded += want.len();
        assert_eq!(fold_cells(&g), want, "trial {trial}");
    }
    assert!(folded > 0, "perturbations never folded a cell");
}

fn corner_folds(beta: f64, ordering: SweepOrdering) -> Vec<(usize, usize)> {
    let case = SectorTestCase::<f64>::new(beta, 1.0, 64).unwrap();
    let (_, rep) = solve(&case.domain(), 17, 17, &opts(ordering)).unwrap();
    assert!(rep.converged, "beta = {beta}");
    rep.fold_cells
}

#[test]
fn fold_goldens_near_reentrant_vertex() {
    assert_eq!(corner_folds(1.5, SweepOrdering::Lexicographic), vec![]);
    assert_eq!(corner_folds(1.75, SweepOrdering::Lexicographic), vec![(7, 0)]);
    assert_eq!(corner_folds(1.9, SweepOrdering::Lexicographic), vec![(7, 0), (7, 1)]);
}

#[test]
fn folds_are_local_to_the_vertex() {
    let (ci, cj) = SectorTestCase::<f64>::corner_node(17);
    for beta in [1.5, 1.75, 1.9] {
        for ordering in [SweepOrdering::Lexicographic, SweepOrdering::FourColor] {
            for (i, j) in corner_folds(beta, ordering) {
                // graph distance from the cell's nearest node to the vertex node
                let di = if i < ci { ci - i - 1 } else { i.saturating_sub(ci) };
                let dist = di + j.saturating_sub(cj);
                assert!(dist <= 3, "beta = {beta}, {ordering:?}: cell ({i}, {j})");
            }
        }
    }
}

#[test]
fn solves_are_deterministic() {
    let case = SectorTestCase::<f64>::new(1.75, 1.0, 64).unwrap();
    for ordering in [SweepOrdering::Lexicographic, SweepOrdering::FourColor] {
        let (a, ra) = solve(&case.domain(), 17, 17, &opts(ordering)).unwrap();
        let (b, rb) = solve(&case.domain(), 17, 17, &opts(ordering)).unwrap();
        assert_eq!(ra.iterations, rb.iterations);
        assert!(a.x.iter().zip(&b.x).all(|(p, q)| p.to_bits() == q.to_bits()));
        assert!(a.y.iter().zip(&b.y).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn restart_from_converged_grid_is_immediate() {
    let case = SectorTestCase::<f64>::new(1.5, 1.0, 64).unwrap();
    let (g, _) = solve(&case.domain(), 17, 17, &SolveOptions::default()).unwrap();
    let (_, rep) = solve_from(g, &SolveOptions::default()).unwrap();
    assert!(rep.converged);
    assert!(rep.iterations <= 2, "{}", rep.iterations);
}

#[test]
fn grid_csv_round_trip_is_exact() {
    let case = SectorTestCase::<f64>::new(1.5, 1.0, 64).unwrap();
    let (g, _) = solve(&case.domain(), 9, 9, &SolveOptions::default()).unwrap();
    let mut buf = Vec::new();
    g.to_csv(&mut buf).unwrap();
    let back = WinslowGrid::<f64>::from_csv(buf.as_slice()).unwrap();
    assert_eq!((back.nx, back.ny), (g.nx, g.ny));
    assert!(back.x.iter().zip(&g.x).all(|(p, q)| p.to_bits() == q.to_bits()));
    assert!(back.y.iter().zip(&g.y).all(|(p, q)| p.to_bits() == q.to_bits()));
}

#[test]
fn domain_json_round_trip() {
    let d = SectorTestCase::<f64>::new(1.5, 2.0, 32).unwrap().domain();
    let back = DomainBoundary::<f64>::from_json(&d.to_json().unwrap()).unwrap();
    assert_eq!(back, d);
    assert_eq!(back.corner_markers(), &[SectorTestCase::<f64>::CORNER_VERTEX]);
}

#[test]
fn single_precision_square() {
    let (g, rep) = solve(&DomainBoundary::<f32>::unit_square(), 9, 9, &SolveOptions::default()).unwrap();
    assert!(rep.converged);
    assert!(rep.fold_cells.is_empty());
    assert!((g.node(4, 4)[0]).abs() < 1e-6 && (g.node(4, 4)[1] - 0.5).abs() < 1e-6);
}
