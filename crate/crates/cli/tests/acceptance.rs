//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its runtime (run with `--nocapture` to see them). Criteria cover
//! the bundled spec files, the region constructions, the exhaustive
//! counting oracles, the Gaussian closed form, the Monte Carlo trend,
//! and byte-level CLI determinism.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cfregions_cli::specfile::load_spec;
use cfregions_core::achievability::{
    greedy_basis_completion, two_user_regions, joint_region_fixed_b, joint_region_for_bs, seq_region,
    Budget,
};
use cfregions_core::gflin::{enum_fullrank_rref, rank, GfMatrix};
use cfregions_core::regions::{contains_point, contains_region, RateRegion};
use cfregions_core::simulator::{
    cardinality_bound_oracle, partition_oracle, run_trials, wilson_interval, CardinalityCheck, SimConfig,
    ORACLE_BUDGET,
};

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn mod4_adder_b_list() -> Vec<GfMatrix> {
    vec![
        GfMatrix::row_vector(&[1, 1, 1], 5).unwrap(),
        GfMatrix::identity(3, 5).unwrap(),
        GfMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 1]], 3, 5).unwrap(),
        GfMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 1]], 3, 5).unwrap(),
        GfMatrix::from_rows(&[vec![0, 0, 1], vec![1, 1, 0]], 3, 5).unwrap(),
    ]
}

/// Corner of a box-shaped region: the per-axis minimum of the singleton
/// bounds. Panics if some axis has no singleton bound.
fn box_corner(region: &RateRegion) -> Vec<f64> {
    let p = &region.polytopes[0];
    (0..region.dim)
        .map(|k| {
            p.halfspaces
                .iter()
                .filter(|h| h.tset.len() == 1 && h.tset.contains(&k))
                .map(|h| h.rhs)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Region with every rhs reduced by `tol` (tolerance-granting shrink for
/// mutual-containment checks).
fn shrink(region: &RateRegion, tol: f64) -> RateRegion {
    let polytopes = region
        .polytopes
        .iter()
        .map(|p| {
            let hs = p
                .halfspaces
                .iter()
                .map(|h| cfregions_core::regions::HalfSpace {
                    tset: h.tset.clone(),
                    rhs: h.rhs - tol,
                })
                .collect();
            cfregions_core::regions::Polytope::from_halfspaces(p.dim, hs).unwrap()
        })
        .collect();
    RateRegion::from_polytopes(region.dim, polytopes)
}

#[test]
fn criterion_1_mod4_adder_noiseless_corner() {
    let start = Instant::now();
    let loaded = load_spec(&specs_dir().join("mod4_adder_p0.toml")).unwrap();
    let b = GfMatrix::row_vector(&[1, 1, 1], 5).unwrap();
    let region = joint_region_for_bs(loaded.primary(), &[b], Budget::default()).unwrap();
    assert_eq!(region.polytopes.len(), 1);
    let p = &region.polytopes[0];
    assert_eq!(p.halfspaces.len(), 3);
    for h in &p.halfspaces {
        assert_eq!(h.tset.len(), 1);
        assert!(
            (h.rhs - 1.0).abs() <= 1e-9,
            "rhs {} deviates from 1.0",
            h.rhs
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("PASS criterion 1: noiseless mod-4 adder corner is the unit cube ({elapsed:?})");
}

#[test]
fn criterion_2_mod4_adder_inner_bound_and_seq_corners() {
    let start = Instant::now();
    let loaded = load_spec(&specs_dir().join("mod4_adder_p01.toml")).unwrap();
    let task = loaded.primary();
    let joint = joint_region_for_bs(task, &mod4_adder_b_list(), Budget::default())
        .expect("inner bound must fit the enumeration budget");

    // Sequential corner a from B = [1,1,1]. Independent oracle for its
    // coordinate: 1 - H(S | Y) from a directly-built (s, y) table.
    let b_a = GfMatrix::row_vector(&[1, 1, 1], 5).unwrap();
    let corner_a = box_corner(&seq_region(task, &b_a).unwrap());
    let oracle = {
        let p = 0.1;
        let pz = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
        let ps = [0.125, 0.375, 0.375, 0.125];
        let mut psy = [[0.0f64; 4]; 4];
        for s in 0..4 {
            for z in 0..4 {
                psy[s][(s + z) % 4] += ps[s] * pz[z];
            }
        }
        let mut h_sy = 0.0;
        let mut h_y = 0.0;
        for y in 0..4 {
            let mut py = 0.0;
            for s in 0..4 {
                let v: f64 = psy[s][y];
                if v > 0.0 {
                    h_sy -= v * v.log2();
                }
                py += psy[s][y];
            }
            h_y -= py * py.log2();
        }
        1.0 - (h_sy - h_y)
    };
    for &c in &corner_a {
        assert!((c - oracle).abs() <= 1e-9, "corner {c} vs oracle {oracle}");
    }

    let b_b = GfMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 1]], 3, 5).unwrap();
    let corner_b = box_corner(&seq_region(task, &b_b).unwrap());

    // Membership with margin 1e-6: the corners lie on the boundary of
    // the joint region, so the margin is granted as slack.
    let margin = 1e-6;
    for (name, corner) in [("a", &corner_a), ("b", &corner_b)] {
        let shifted: Vec<f64> = corner.iter().map(|c| (c - margin).max(0.0)).collect();
        assert!(
            contains_point(&joint, &shifted).unwrap(),
            "sequential corner {name} = {corner:?} not in the joint inner bound"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "PASS criterion 2: p=0.1 inner bound built, sequential corners a={corner_a:?}, \
         b={corner_b:?} are members at margin 1e-6 ({elapsed:?})"
    );
}

#[test]
fn criterion_3_seq_inside_joint() {
    let start = Instant::now();
    for file in ["mod4_adder_p0.toml", "mod4_adder_p01.toml", "mod4_adder_p03.toml"] {
        let loaded = load_spec(&specs_dir().join(file)).unwrap();
        let task = loaded.primary();
        for b in mod4_adder_b_list() {
            let joint_b = joint_region_fixed_b(task, &b, Budget::default()).unwrap();
            let seq_b = seq_region(task, &b).unwrap();
            let verdict = contains_region(&joint_b, &seq_b, 25).unwrap();
            assert!(
                verdict.holds(),
                "witness point escapes joint region: {verdict:?} ({file}, B={b:?})"
            );
        }
    }
    let elapsed = start.elapsed();
    println!(
        "PASS criterion 3: sequential regions contained in joint regions for all 5 B and \
         p in {{0, 0.1, 0.3}} ({elapsed:?})"
    );
}

#[test]
fn criterion_4_two_user_cross_check() {
    let start = Instant::now();
    let loaded = load_spec(&specs_dir().join("binary_adder.toml")).unwrap();
    let task = loaded.primary();
    let a = task.coeff().clone();
    let bs = vec![a.clone(), GfMatrix::identity(2, 2).unwrap()];
    let via_joint = joint_region_for_bs(task, &bs, Budget::default()).unwrap();
    let via_two_user = two_user_regions(task.spec(), &a).unwrap().combined;

    // Mutual containment at resolution 33 with tolerance 1e-6: the inner
    // region is shrunk by the tolerance before the check.
    let tol = 1e-6;
    let one_way = contains_region(&via_joint, &shrink(&via_two_user, tol), 33).unwrap();
    let other_way = contains_region(&via_two_user, &shrink(&via_joint, tol), 33).unwrap();
    assert!(one_way.holds(), "two-user region escapes joint: {one_way:?}");
    assert!(other_way.holds(), "joint region escapes two-user region: {other_way:?}");
    let elapsed = start.elapsed();
    println!(
        "PASS criterion 4: restricted joint region and R_CF u R_LMAC mutually contain \
         each other ({elapsed:?})"
    );
}

#[test]
fn criterion_5_cardinality_and_partition_oracles() {
    let start = Instant::now();
    let mut checked_cells = 0u64;
    let mut vacuous_cells = 0u64;
    let mut partitions = 0u64;
    for &q in &[2u64, 3] {
        for users in 2..=3usize {
            // All kappa-tilde profiles with entries <= 2.
            let mut profile = vec![0usize; users];
            loop {
                for lb in 1..=users {
                    for b in enum_fullrank_rref(lb, users, q, 1 << 24).unwrap() {
                        assert!(
                            partition_oracle(q, users, &profile, &b, ORACLE_BUDGET).unwrap(),
                            "partition failed at q={q} K={users} profile={profile:?} B={b:?}"
                        );
                        partitions += 1;
                        for r in 1..=lb {
                            for c in enum_fullrank_rref(lb - r, lb, q, 1 << 24).unwrap() {
                                match cardinality_bound_oracle(
                                    q,
                                    users,
                                    &profile,
                                    &b,
                                    r,
                                    &c,
                                    ORACLE_BUDGET,
                                )
                                .unwrap()
                                {
                                    CardinalityCheck::Checked { exact, bound } => {
                                        assert!(
                                            (exact as u128) <= bound,
                                            "cardinality bound violated at q={q} K={users} \
                                             profile={profile:?} B={b:?} r={r} C={c:?}: \
                                             {exact} > {bound}"
                                        );
                                        checked_cells += 1;
                                    }
                                    CardinalityCheck::Vacuous => vacuous_cells += 1,
                                }
                            }
                        }
                    }
                }
                // Odometer over profiles with entries in {0, 1, 2}.
                let mut i = 0;
                loop {
                    if i == users {
                        break;
                    }
                    profile[i] += 1;
                    if profile[i] <= 2 {
                        break;
                    }
                    profile[i] = 0;
                    i += 1;
                }
                if i == users {
                    break;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "PASS criterion 5: cardinality bound held on {checked_cells} cells \
         ({vacuous_cells} vacuous) and all {partitions} partitions verified ({elapsed:?})"
    );
}

#[test]
fn criterion_6_greedy_basis_completion_postcondition() {
    let start = Instant::now();
    let mut cases = 0u64;
    for &q in &[2u64, 3] {
        for lb in 1..=4usize {
            for l_c in 0..lb {
                // Every full-rank C, not only RREF representatives.
                let mut entries = vec![0u64; l_c * lb];
                loop {
                    let rows: Vec<Vec<u64>> = entries.chunks(lb).map(|r| r.to_vec()).collect();
                    let c = GfMatrix::from_rows(&rows, lb, q).unwrap();
                    if rank(&c) == l_c {
                        let s = greedy_basis_completion(&c, lb).unwrap();
                        assert_eq!(s.len(), lb - l_c, "wrong |S*| for C={c:?}");
                        let s_vec: Vec<usize> = s.iter().copied().collect();
                        let i_s = GfMatrix::identity_rows(&s_vec, lb, q).unwrap();
                        assert_eq!(
                            rank(&c.stack(&i_s).unwrap()),
                            lb,
                            "rank condition failed for C={c:?}"
                        );
                        cases += 1;
                    }
                    let mut i = 0;
                    loop {
                        if i == entries.len() {
                            break;
                        }
                        entries[i] += 1;
                        if entries[i] < q {
                            break;
                        }
                        entries[i] = 0;
                        i += 1;
                    }
                    if i == entries.len() {
                        break;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "PASS criterion 6: basis completion satisfied its postcondition in all {cases} \
         full-rank cases ({elapsed:?})"
    );
}

#[test]
fn criterion_7_gaussian_closed_form() {
    let start = Instant::now();
    let region =
        cfregions_core::achievability::gaussian_cf_region([1.0, 1.0], 10.0, 10.0, [1, 1]).unwrap();
    let want = 0.5 * (10.5f64).log2();
    for h in &region.polytopes[0].halfspaces {
        assert!(
            (h.rhs - want).abs() <= 1e-9,
            "rhs {} deviates from {want}",
            h.rhs
        );
    }
    let mut prev = f64::NEG_INFINITY;
    for p in 1..=100u32 {
        let region =
            cfregions_core::achievability::gaussian_cf_region([1.0, 1.0], p as f64, p as f64, [1, 1])
                .unwrap();
        let rhs = region.polytopes[0].halfspaces[0].rhs;
        assert!(rhs >= prev - 1e-12, "not monotone at P={p}");
        prev = rhs;
    }
    let elapsed = start.elapsed();
    println!(
        "PASS criterion 7: symmetric Gaussian bound equals (1/2) log2(10.5) and is monotone \
         over the power grid ({elapsed:?})"
    );
}

#[test]
fn criterion_8_monte_carlo_trend() {
    let start = Instant::now();
    let loaded = load_spec(&specs_dir().join("binary_adder.toml")).unwrap();
    let task = loaded.primary();
    let seed = 20260808;

    // R_CF for the adder is the unit box, so rates (0.125, 0.125) carry a
    // 0.875-bit margin (>= 0.15 required).
    let mut ladder = Vec::new();
    for n in [8usize, 16, 24] {
        let cfg = SimConfig::new(
            task.spec().clone(),
            task.coeff().clone(),
            n,
            vec![0.125, 0.125],
            vec![0.125, 0.125],
            0.9,
            0.45,
            2000,
            seed,
        )
        .unwrap();
        let result = run_trials(&cfg).unwrap();
        let (lo, hi) = wilson_interval(result.errors, result.trials);
        println!(
            "  n={n}: errors {}/{} rate {:.4} wilson [{lo:.4}, {hi:.4}]",
            result.errors, result.trials, result.error_rate
        );
        ladder.push((result.error_rate, lo, hi));
    }
    for w in ladder.windows(2) {
        let (rate_a, lo_a, hi_a) = w[0];
        let (rate_b, lo_b, hi_b) = w[1];
        let non_increasing = rate_b <= rate_a;
        let overlap = lo_a <= hi_b && lo_b <= hi_a;
        assert!(
            non_increasing || overlap,
            "error rate increased beyond interval overlap: {w:?}"
        );
    }
    assert!(ladder[1].0 < 0.5, "error rate at n=16 should sit below 0.5");

    // Outside point: sum rate 2.0 is 0.5 bits beyond the MAC sum bound
    // I(X_1, X_2; Y) = 1.5.
    let outside = SimConfig::new(
        task.spec().clone(),
        task.coeff().clone(),
        8,
        vec![1.0, 1.0],
        vec![0.25, 0.25],
        0.9,
        0.45,
        2000,
        seed,
    )
    .unwrap();
    let result = run_trials(&outside).unwrap();
    println!(
        "  outside point: errors {}/{} rate {:.4}",
        result.errors, result.trials, result.error_rate
    );
    assert!(
        result.error_rate > 0.9,
        "outside-point error rate {} not above 0.9",
        result.error_rate
    );

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    println!(
        "PASS criterion 8: error rate non-increasing over the n-ladder and above 0.9 \
         outside the MAC sum bound ({elapsed:?})"
    );
}

#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_cfregions");
    let dir = std::env::temp_dir().join("cfregions_acceptance_determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let spec = specs_dir().join("mod4_adder_p01.toml");
    let adder = specs_dir().join("binary_adder.toml");

    let mut region_files = Vec::new();
    let mut vertex_files = Vec::new();
    for round in 0..2 {
        let out = dir.join(format!("round{round}.region"));
        let status = Command::new(bin)
            .args([
                "region",
                spec.to_str().unwrap(),
                "--fixed-b",
                "1,1,1",
                "--fixed-b",
                "1,0,0;0,1,1",
                "--fixed-b",
                "0,1,0;1,0,1",
                "--fixed-b",
                "0,0,1;1,1,0",
                "--fixed-b",
                "1,0,0;0,1,0;0,0,1",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        region_files.push(std::fs::read(&out).unwrap());
        vertex_files.push(
            std::fs::read(dir.join(format!("round{round}.vertices.csv"))).unwrap(),
        );
    }
    assert_eq!(region_files[0], region_files[1], "region files differ");
    assert_eq!(vertex_files[0], vertex_files[1], "vertex files differ");

    let mut csv_files = Vec::new();
    for round in 0..2 {
        let out = dir.join(format!("round{round}.csv"));
        std::fs::remove_file(&out).ok();
        let status = Command::new(bin)
            .args([
                "simulate",
                adder.to_str().unwrap(),
                "--n",
                "8",
                "--rates",
                "0.125,0.125",
                "--aux-rates",
                "0.125,0.125",
                "--eps",
                "0.9",
                "--eps-prime",
                "0.45",
                "--trials",
                "200",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        csv_files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(csv_files[0], csv_files[1], "simulation CSVs differ");

    std::fs::remove_dir_all(&dir).ok();
    let elapsed = start.elapsed();
    println!("PASS criterion 9: repeated CLI invocations are byte-identical ({elapsed:?})");
}
