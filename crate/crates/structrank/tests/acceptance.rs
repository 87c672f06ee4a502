//! Acceptance gate. One test per criterion; each prints a single
//! `criterion NN (<name>): pass` line on success (visible with
//! `cargo test --test acceptance -- --nocapture`). A failing criterion
//! prints a FAIL line and re-raises the underlying assertion.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use structrank::closed_forms::{self, line_r2};
use structrank::graph::{self, DirectedGraph, StructureSpec, WeightVector};
use structrank::linalg::{self, BlockPartition, DenseMatrix};
use structrank::perturbation::{zeroing_bound, zeroing_delta};
use structrank::random_walk::{estimate_r2, WalkConfig};
use structrank::sensitivity::{dr2_dc_line, find_c_max};
use structrank::solver::{self, Engine, SolveOptions};

fn criterion<F: FnOnce() + UnwindSafe>(number: u32, name: &str, body: F) {
    match catch_unwind(body) {
        Ok(()) => println!("criterion {number:02} ({name}): pass"),
        Err(cause) => {
            println!("criterion {number:02} ({name}): FAIL");
            resume_unwind(cause);
        }
    }
}

const C_GRID: [f64; 5] = [0.05, 0.3, 0.5, 0.85, 0.95];

/// The running 4-node example: a 2-cycle feeding a short chain that loops
/// back to the head.
fn four_node_example() -> DirectedGraph {
    DirectedGraph::from_edges(4, &[(0, 1), (1, 0), (1, 2), (2, 0), (2, 1), (2, 3), (3, 0)])
        .unwrap()
}

fn r2_lu(g: &DirectedGraph, c: f64) -> Vec<f64> {
    let w = WeightVector::uniform(g.n());
    solver::pagerank_r2(g, c, &w, &SolveOptions::default()).unwrap().values
}

fn r1_lu(g: &DirectedGraph, c: f64) -> Vec<f64> {
    let w = WeightVector::uniform(g.n());
    let r2 = solver::pagerank_r2(g, c, &w, &SolveOptions::default()).unwrap();
    solver::normalize(&r2).unwrap().values
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Dense scan of a node's normalized rank over c using only the generated
/// graph and the LU solver; independent of every closed-form evaluator.
fn scan_r1_max(spec: &StructureSpec, node: usize, points: usize) -> (f64, f64) {
    let g = graph::generate(spec).unwrap();
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..points {
        let c = 0.001 + (0.999 - 0.001) * k as f64 / (points - 1) as f64;
        let v = r1_lu(&g, c)[node];
        if v > best.1 {
            best = (c, v);
        }
    }
    best
}

#[test]
fn criterion_01_four_node_example_ranks() {
    criterion(1, "four-node example ranks", || {
        let g = four_node_example();
        let w = WeightVector::uniform(4);
        let opts = SolveOptions { engine: Engine::Power, ..SolveOptions::default() };
        let r1 = solver::pagerank_r1(&g, 0.85, &w, &opts).unwrap().values;
        let want = [0.3328, 0.3763, 0.1974, 0.0934];
        for (i, (v, e)) in r1.iter().zip(want).enumerate() {
            assert!((v - e).abs() <= 5e-4, "node {}: {v} vs {e}", i + 1);
        }

        let mut best = Duration::MAX;
        for _ in 0..20 {
            let t = Instant::now();
            let r = solver::pagerank_r1(&g, 0.85, &w, &opts).unwrap();
            best = best.min(t.elapsed());
            assert_eq!(r.values.len(), 4);
        }
        assert!(best < Duration::from_millis(1), "solve took {best:?}");
    });
}

#[test]
fn criterion_02_complete_graph_rank_limit() {
    criterion(2, "complete graph rank limit", || {
        for n in 2..=100usize {
            let g = graph::generate(&StructureSpec::complete(n)).unwrap();
            for k in 1..=19 {
                let c = k as f64 * 0.05;
                let expect = 1.0 / (1.0 - c);
                let closed = closed_forms::complete_r2(n, c).unwrap().r2;
                assert_eq!(closed.len(), n);
                for v in &closed {
                    assert!((v - expect).abs() <= 1e-12, "n={n} c={c}: {v} vs {expect}");
                }
                for v in r2_lu(&g, c) {
                    assert!((v - expect).abs() <= 1e-9, "solver n={n} c={c}: {v}");
                }
            }
        }
        let at_085 = closed_forms::complete_r2(10, 0.85).unwrap().r2[0];
        assert!((at_085 - 6.6667).abs() <= 1e-3);
    });
}

#[test]
fn criterion_03_closed_forms_vs_dense_solver() {
    criterion(3, "closed forms vs dense solver", || {
        let t = Instant::now();
        let mut specs: Vec<StructureSpec> = Vec::new();
        for n_l in 1..=20 {
            for j in 1..=n_l {
                specs.push(StructureSpec::attached(n_l, j));
                for n_g in 2..=20 {
                    specs.push(StructureSpec::complete_to_line(n_l, n_g, j));
                    specs.push(StructureSpec::line_to_complete(n_l, n_g, j));
                    specs.push(StructureSpec::share(n_l, n_g, j));
                }
            }
        }
        for n_g in 2..=20 {
            specs.push(StructureSpec::complete_with_outlink(n_g));
        }

        let mut checked = 0usize;
        for spec in &specs {
            let g = graph::generate(spec).unwrap();
            for c in C_GRID {
                let closed = closed_forms::evaluate(spec, c)
                    .unwrap()
                    .expect("kind has a closed form")
                    .r2;
                let solved = r2_lu(&g, c);
                let diff = max_abs_diff(&closed, &solved);
                assert!(diff <= 1e-9, "{spec:?} c={c}: L-inf {diff:.3e}");
                checked += 1;
            }
        }
        assert_eq!(checked, specs.len() * C_GRID.len());
        assert!(t.elapsed() < Duration::from_secs(30), "took {:?}", t.elapsed());
    });
}

#[test]
fn criterion_04_outlink_source_dominates() {
    criterion(4, "outlink source dominates", || {
        for n_g in 2..=20usize {
            for c in C_GRID {
                let r2 = closed_forms::complete_with_outlink_r2(n_g, c).unwrap().r2;
                for k in 1..n_g {
                    assert!(
                        r2[0] > r2[k],
                        "n_g={n_g} c={c}: node 1 ({}) vs node {} ({})",
                        r2[0],
                        k + 1,
                        r2[k]
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_05_upstream_node_damping_maxima() {
    criterion(5, "upstream-node damping maxima", || {
        let t = Instant::now();

        // (n_line, n_complete, attach, node 1-based, c_max, max)
        let exact_rows = [
            (10usize, 5usize, 6usize, 7usize, 0.349, 0.073),
            (10, 10, 6, 7, 0.300, 0.053),
            (10, 20, 6, 7, 0.248, 0.035),
            (10, 10, 3, 4, 0.515, 0.054),
        ];
        for (n_l, n_g, j, i, c_max, max) in exact_rows {
            let r = find_c_max(&StructureSpec::share(n_l, n_g, j), i - 1).unwrap();
            assert!(!r.boundary_hit, "share({n_l},{n_g},{j}) node {i} hit the boundary");
            assert!((r.c_max - c_max).abs() <= 5e-3, "c_max {} vs {c_max}", r.c_max);
            assert!((r.value_at_max - max).abs() <= 1e-3, "max {} vs {max}", r.value_at_max);
        }

        // The top line node peaks as c -> 0; the scan reports the low edge.
        let low = find_c_max(&StructureSpec::share(10, 10, 9), 9).unwrap();
        assert!(low.boundary_hit, "expected a low-boundary report");
        assert!(low.c_max <= 0.0015, "c_max {} is not the low edge", low.c_max);

        // Recomputed row: the reference lists (0.751, 0.370) but the peak
        // value carries a dropped decimal; the recomputation is authoritative.
        let r = find_c_max(&StructureSpec::share(20, 10, 6), 6).unwrap();
        let (scan_c, scan_v) = scan_r1_max(&StructureSpec::share(20, 10, 6), 6, 2000);
        assert!((r.c_max - scan_c).abs() <= 2e-3, "{} vs scan {scan_c}", r.c_max);
        assert!((r.value_at_max - scan_v).abs() <= 1e-5);
        assert!((r.c_max - 0.751).abs() <= 5e-3, "c_max {} vs 0.751", r.c_max);
        assert!((r.value_at_max - 0.037).abs() <= 1e-3, "peak {}", r.value_at_max);
        assert!((r.value_at_max - 0.370 / 10.0).abs() <= 1e-3);
        println!(
            "criterion 05 note: share(n_line=20, n_complete=10, attach=6) node 7: \
             reference max 0.370 is 10x the recomputed {:.4}; c_max {:.3} confirmed",
            r.value_at_max, r.c_max
        );

        // Recomputed row: the reference lists c_max 0.300 for node 9, which
        // duplicates the node-7 row; the curve's true peak sits near c=0.028
        // and its value matches the listed max, so the listed c_max cannot
        // be the argmax of its own row.
        let r = find_c_max(&StructureSpec::share(10, 10, 6), 8).unwrap();
        let (scan_c, scan_v) = scan_r1_max(&StructureSpec::share(10, 10, 6), 8, 2000);
        assert!((r.c_max - scan_c).abs() <= 2e-3, "{} vs scan {scan_c}", r.c_max);
        assert!((r.value_at_max - scan_v).abs() <= 1e-5);
        assert!((r.value_at_max - 0.053).abs() <= 1e-3, "peak {}", r.value_at_max);
        let g = graph::generate(&StructureSpec::share(10, 10, 6)).unwrap();
        let at_claimed = r1_lu(&g, 0.300)[8];
        assert!(
            r.value_at_max - at_claimed > 2e-3,
            "value at c=0.300 ({at_claimed}) should sit well below the peak ({})",
            r.value_at_max
        );
        println!(
            "criterion 05 note: share(n_line=10, n_complete=10, attach=6) node 9: \
             reference c_max 0.300 is contradicted (recomputed argmax {:.3}, peak {:.4}; \
             the value at c=0.300 is only {:.4})",
            r.c_max, r.value_at_max, at_claimed
        );

        assert!(t.elapsed() < Duration::from_secs(5), "took {:?}", t.elapsed());
    });
}

#[test]
fn criterion_06_shared_node_damping_maxima() {
    criterion(6, "shared-node damping maxima", || {
        // (n_line, n_complete, attach, c_max, max)
        let interior_rows =
            [(10usize, 10usize, 6usize, 0.894, 0.099), (10, 20, 6, 0.776, 0.059), (10, 10, 3, 0.893, 0.107)];
        for (n_l, n_g, j, c_max, max) in interior_rows {
            let r = find_c_max(&StructureSpec::share(n_l, n_g, j), j - 1).unwrap();
            assert!(!r.boundary_hit, "share({n_l},{n_g},{j}) hit the boundary");
            assert!((r.c_max - c_max).abs() <= 5e-3, "c_max {} vs {c_max}", r.c_max);
            assert!((r.value_at_max - max).abs() <= 1e-3, "max {} vs {max}", r.value_at_max);
        }

        // Rows whose rank keeps growing toward c = 1: the scan must stop at
        // the high edge and report it, with the edge value still matching.
        let boundary_rows = [(10usize, 5usize, 6usize, 0.164), (20, 10, 6, 0.096), (10, 10, 9, 0.091)];
        for (n_l, n_g, j, max) in boundary_rows {
            let r = find_c_max(&StructureSpec::share(n_l, n_g, j), j - 1).unwrap();
            assert!(r.boundary_hit, "share({n_l},{n_g},{j}) should hit the high edge");
            assert!(r.c_max >= 0.998, "c_max {} is not the high edge", r.c_max);
            assert!(
                (r.value_at_max - max).abs() <= 2e-3,
                "edge value {} vs {max}",
                r.value_at_max
            );
        }
    });
}

#[test]
fn criterion_07_zeroing_bound_attained() {
    criterion(7, "zeroing bound attained", || {
        assert!((zeroing_bound(0.85) - 3.6036).abs() <= 1e-4);

        let g = graph::generate(&StructureSpec::complete(2)).unwrap();
        for c in [0.1, 0.3, 0.5, 0.85, 0.99] {
            for node in 0..2 {
                let delta = zeroing_delta(&g, c, node).unwrap();
                let bound = zeroing_bound(c);
                assert!(
                    (delta[node] - bound).abs() <= 1e-9,
                    "c={c} node {node}: own delta {} vs bound {bound}",
                    delta[node]
                );
            }
        }
    });
}

#[test]
fn criterion_08_variant_comparison_table() {
    criterion(8, "variant comparison table", || {
        let out = Command::new(env!("CARGO_BIN_EXE_structrank"))
            .args(["compare", "--c", "0.85"])
            .output()
            .expect("binary runs");
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();

        let row = |variant: &str, kind: &str| -> Vec<f64> {
            let line = text
                .lines()
                .find(|l| {
                    let mut t = l.split_whitespace();
                    t.next() == Some(variant) && t.next() == Some(kind)
                })
                .unwrap_or_else(|| panic!("missing {variant}/{kind} row"));
            line.split_whitespace().skip(2).map(|v| v.parse().unwrap()).collect()
        };

        for kind in ["complete", "dangling"] {
            let r1 = row("R1", kind);
            assert_eq!(r1.len(), 4);
            for v in r1 {
                assert!((v - 0.25).abs() <= 1e-10, "{kind} R1: {v}");
            }
        }
        for v in row("R2", "complete") {
            assert!((v - 1.0 / 0.15).abs() <= 1e-3, "complete R2: {v}");
        }
        for v in row("R2", "dangling") {
            assert_eq!(v, 1.0, "dangling R2 must be exactly 1");
        }
    });
}

#[test]
fn criterion_09_random_walk_consistency() {
    criterion(9, "random walk consistency", || {
        let t = Instant::now();
        let specs = [
            StructureSpec::line(5),
            StructureSpec::complete(5),
            StructureSpec::share(5, 5, 3),
        ];
        let mut pairs = 0usize;
        let mut outside: Vec<String> = Vec::new();
        for spec in &specs {
            let g = graph::generate(spec).unwrap();
            let reference = r2_lu(&g, 0.85);
            for seed in 0..20u64 {
                let cfg = WalkConfig { walks_per_node: 100_000, seed, max_steps: 10_000 };
                let est = estimate_r2(&g, 0.85, &cfg).unwrap();
                assert_eq!(est.truncated, 0);
                for j in 0..g.n() {
                    pairs += 1;
                    // The absolute term absorbs last-digit rounding in the
                    // reference when a node's estimate is deterministic
                    // (stderr exactly 0).
                    if (est.mean[j] - reference[j]).abs() > 4.0 * est.stderr[j] + 1e-12 {
                        outside.push(format!(
                            "{spec:?} seed {seed} node {}: {} vs {} (stderr {})",
                            j + 1,
                            est.mean[j],
                            reference[j],
                            est.stderr[j]
                        ));
                    }
                }
            }
        }
        assert_eq!(pairs, (5 + 5 + 9) * 20);
        let allowed = pairs - (pairs * 99).div_ceil(100);
        assert!(
            outside.len() <= allowed,
            "{} of {pairs} pairs outside 4 standard errors:\n{}",
            outside.len(),
            outside.join("\n")
        );
        assert!(t.elapsed() < Duration::from_secs(60), "took {:?}", t.elapsed());
    });
}

#[test]
fn criterion_10_line_derivative_agreement() {
    criterion(10, "line derivative agreement", || {
        let h = 1e-6;
        for n_l in 2..=10usize {
            for i in 1..n_l {
                for k in 1..=9 {
                    let c = k as f64 * 0.1;
                    let analytic = dr2_dc_line(n_l, i, c).unwrap();
                    assert!(analytic > 0.0, "n_l={n_l} i={i} c={c}: {analytic}");
                    let hi = line_r2(n_l, c + h).unwrap().r2[i - 1];
                    let lo = line_r2(n_l, c - h).unwrap().r2[i - 1];
                    let fd = (hi - lo) / (2.0 * h);
                    assert!(
                        (analytic - fd).abs() <= 1e-6 * analytic.abs(),
                        "n_l={n_l} i={i} c={c}: {analytic} vs {fd}"
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_11_inverse_structure_invariants() {
    criterion(11, "inverse structure invariants", || {
        let c = 0.85;
        let limit = 1.0 / (1.0 - c);
        let mut graphs = vec![
            four_node_example(),
            DirectedGraph::from_out_links(vec![vec![], vec![], vec![], vec![]]).unwrap(),
        ];
        for spec in [
            StructureSpec::line(7),
            StructureSpec::backlink(6),
            StructureSpec::attached(6, 3),
            StructureSpec::split(5, 2),
            StructureSpec::complete(5),
            StructureSpec::complete_with_outlink(5),
            StructureSpec::complete_to_line(5, 4, 3),
            StructureSpec::line_to_complete(5, 4, 3),
            StructureSpec::share(5, 4, 3),
        ] {
            graphs.push(graph::generate(&spec).unwrap());
        }

        for g in &graphs {
            let inv = linalg::invert(&linalg::system_matrix(g, c).unwrap()).unwrap();
            for j in 0..g.n() {
                let sum = inv.col_sum(j);
                assert!(sum <= limit + 1e-9, "column {j} sums to {sum} > {limit}");
                if g.drains_to_dangling(j) {
                    assert!(
                        sum < limit - 1e-6,
                        "column {j} should fall short of {limit}, got {sum}"
                    );
                } else {
                    assert!(
                        (sum - limit).abs() <= 1e-9,
                        "column {j} should reach {limit}, got {sum}"
                    );
                }
            }
            for i in 0..g.n() {
                if !g.has_return_path(i) {
                    let d = inv.get(i, i);
                    assert!((d - 1.0).abs() <= 1e-12, "diagonal {i}: {d}");
                }
            }
        }

        // Blockwise inversion must agree with plain elimination.
        let mut state = 0x243F_6A88_85A3_08D3u64;
        let mut unit = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for case in 0..200usize {
            let n = 2 + case % 11;
            let mut m = DenseMatrix::from_fn(n, n, |_, _| 2.0 * unit() - 1.0);
            for i in 0..n {
                let row_sum: f64 = (0..n).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum();
                m.set(i, i, row_sum + 1.0 + unit());
            }
            let split = 1 + case % (n - 1).max(1);
            let direct = linalg::invert(&m).unwrap();
            let blocked = linalg::block_invert(&m, BlockPartition { split }).unwrap();
            let diff = direct.max_abs_diff(&blocked);
            assert!(diff <= 1e-9, "case {case} (n={n}, split={split}): {diff:.3e}");
        }
    });
}

#[test]
fn criterion_12_split_line_ranks() {
    criterion(12, "split line ranks", || {
        let g = graph::generate(&StructureSpec::split(5, 2)).unwrap();
        for c in C_GRID {
            let r2 = r2_lu(&g, c);
            let want = [1.0 + c, 1.0, 1.0 + c + c * c, 1.0 + c, 1.0];
            for (i, (v, e)) in r2.iter().zip(want).enumerate() {
                assert!((v - e).abs() <= 1e-12, "c={c} node {}: {v} vs {e}", i + 1);
            }
        }
    });
}
