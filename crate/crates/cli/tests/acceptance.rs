//! Acceptance gate: one test per shipping criterion, each printing a
//! PASS line with the measured numbers when it holds. Tolerances are the
//! stated ones, not looser.
//!
//! The statistical checks here deliberately use a *third* independent
//! route (after the engine's margin means and sweep, and the core test
//! suite's treatment-coded normal equations): indicator one-hot design
//! blocks orthonormalized by modified Gram–Schmidt, with each source's
//! SS read off projection coefficients.

use std::collections::BTreeMap;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sortlab::golden::{INSERTION_TIME_REFERENCE, REFERENCE_TABLES, SHIFT_INSERTION_TIME_REFERENCE};
use sortlab_core::doe::{Dataset, DatasetMeta, ExperimentPlan, FactorSpec};
use sortlab_core::glm::{anova, f_tail_prob, Response};
use sortlab_core::randgen::{normal_sample, GenSpec};
use sortlab_core::runner::{run_experiment, Observation};
use sortlab_core::sortcore::{
    insertion_sort, insertion_sort_by, shift_insertion_sort, shift_insertion_sort_by,
    verify_sorted, Algorithm,
};

// ---------------------------------------------------------------------
// Criterion 1: the F -> p map reproduces every printed (F, df, p) triple.
// ---------------------------------------------------------------------

#[test]
fn criterion_1_f_to_p_regression() {
    // The triples the criterion enumerates, each to ±0.0005 of print.
    let enumerated: [(f64, usize, f64); 8] = [
        (4.42, 2, 0.017),
        (5.58, 2, 0.006),
        (2.68, 4, 0.041),
        (5.36, 4, 0.001),
        (3.74, 8, 0.002),
        (2.40, 4, 0.061),
        (4.08, 4, 0.006),
        (4.11, 8, 0.001),
    ];
    for &(f, d1, printed) in &enumerated {
        let p = f_tail_prob(f, d1, 54).expect("valid domain");
        assert!(
            (p - printed).abs() <= 0.0005,
            "p({f}, {d1}, 54) = {p:.6}, printed {printed}"
        );
    }

    // Every "0.000" row must be genuinely below half a print ulp.
    let mut zero_rows = 0;
    for table in REFERENCE_TABLES {
        for row in table.rows {
            if row.p == 0.0 {
                let p = f_tail_prob(row.f, row.df, table.error_df).expect("valid domain");
                assert!(
                    p < 0.0005,
                    "{}::{}: p({}, {}, 54) = {p:.6} not < 0.0005",
                    table.algorithm,
                    row.source,
                    row.f,
                    row.df
                );
                zero_rows += 1;
            }
        }
    }
    assert_eq!(zero_rows, 5);

    // The one remaining printed triple, (0.63, 4, 54) -> 0.642, sits on
    // the only shallow-slope row, where the two-decimal rounding of F
    // alone moves p by more than ±0.0005; the printed pair is instead
    // required to be consistent under both prints' rounding (some F
    // printing as 0.63 must map within half a p-ulp of 0.642).
    let p_min = f_tail_prob(0.635, 4, 54).expect("valid domain");
    let p_max = f_tail_prob(0.625, 4, 54).expect("valid domain");
    assert!(
        0.642 + 0.0005 >= p_min && 0.642 - 0.0005 <= p_max,
        "printed 0.642 outside attainable range {p_min:.6}..{p_max:.6}"
    );

    println!(
        "PASS criterion 1: 8 enumerated triples at ±0.0005, 5 zero rows < 0.0005, \
         (0.63, 4, 54) consistent with 0.642 over F's print interval [{p_min:.4}, {p_max:.4}]"
    );
}

// ---------------------------------------------------------------------
// Criterion 2: footer statistics and the n-row F rebuilt from SS alone.
// ---------------------------------------------------------------------

#[test]
fn criterion_2_footer_statistic_regression() {
    let cases = [
        (&INSERTION_TIME_REFERENCE, 11457.8),
        (&SHIFT_INSERTION_TIME_REFERENCE, 11868.9),
    ];
    for (fixture, pinned_f_n) in cases {
        let table = fixture.reconstruct();
        let s = table.s.expect("error term present");
        let r_sq = 100.0 * table.r_sq.expect("error term present");
        let r_sq_adj = 100.0 * table.r_sq_adj.expect("error term present");
        assert!(
            (s - fixture.s).abs() < 1e-5,
            "{}: S = {s}, pinned {}",
            fixture.algorithm,
            fixture.s
        );
        assert!(
            (r_sq - fixture.r_sq_pct).abs() < 0.01,
            "{}: R-Sq = {r_sq:.4}",
            fixture.algorithm
        );
        assert!(
            (r_sq_adj - fixture.r_sq_adj_pct).abs() < 0.01,
            "{}: R-Sq(adj) = {r_sq_adj:.4}",
            fixture.algorithm
        );

        let f_n = table.rows[0].f.expect("error term present");
        assert!(
            (f_n - pinned_f_n).abs() <= 0.001 * pinned_f_n,
            "{}: F(n) = {f_n}, pinned {pinned_f_n} ±0.1%",
            fixture.algorithm
        );
    }

    // The n-row mean square of the first table, to six significant figures.
    let adj_ms = INSERTION_TIME_REFERENCE.reconstruct().rows[0].adj_ms;
    assert!(
        (adj_ms - 0.0950574).abs() < 1e-7,
        "adj MS(n) = {adj_ms}, pinned 0.0950574"
    );

    println!(
        "PASS criterion 2: S/R-Sq/R-Sq(adj) within 1e-5/0.01/0.01 for both tables, \
         F(n) within 0.1%, adj MS(n) = {adj_ms:.7}"
    );
}

// ---------------------------------------------------------------------
// Criterion 3: engine SS vs a modified Gram–Schmidt indicator oracle on
// 200 random balanced designs.
// ---------------------------------------------------------------------

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projects `v` against the orthonormal `basis` (two passes for
/// numerical orthogonality) and returns the normalized remainder, or
/// `None` when `v` is linearly dependent on the basis.
fn orthonormal_remainder(basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    let original = dot(&v, &v).sqrt();
    if original == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let coefficient = dot(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= coefficient * qi;
            }
        }
    }
    let remaining = dot(&v, &v).sqrt();
    if remaining <= 1e-8 * original {
        return None;
    }
    for vi in &mut v {
        *vi /= remaining;
    }
    Some(v)
}

/// Source masks in the engine's row order (cardinality, then value).
fn masks_in_row_order(k: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (1..(1u32 << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// Per-source SS by orthonormalizing full one-hot indicator blocks in
/// row order; also returns the DF each block actually contributed and
/// the oracle's SST.
fn mgs_oracle(levels: &[usize], codes: &[Vec<usize>], y: &[f64]) -> (Vec<f64>, Vec<usize>, f64) {
    let rows = y.len();
    let masks = masks_in_row_order(levels.len());
    let mut basis: Vec<Vec<f64>> = Vec::new();

    let intercept = orthonormal_remainder(&basis, vec![1.0; rows]).expect("nonzero");
    let explained_by_mean = dot(&intercept, y).powi(2);
    basis.push(intercept);

    let mut block_ss = Vec::with_capacity(masks.len());
    let mut block_df = Vec::with_capacity(masks.len());
    for &mask in &masks {
        let in_mask: Vec<usize> = (0..levels.len()).filter(|i| mask & (1 << i) != 0).collect();
        let combos: usize = in_mask.iter().map(|&i| levels[i]).product();
        let mut ss = 0.0;
        let mut df = 0;
        for combo in 0..combos {
            // Decode the combo into one target level per factor in the mask.
            let mut remainder = combo;
            let mut target = vec![0usize; in_mask.len()];
            for (slot, &factor) in in_mask.iter().enumerate().rev() {
                target[slot] = remainder % levels[factor];
                remainder /= levels[factor];
            }
            let column: Vec<f64> = codes
                .iter()
                .map(|code| {
                    let hit = in_mask
                        .iter()
                        .zip(&target)
                        .all(|(&factor, &level)| code[factor] == level);
                    if hit {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            if let Some(q) = orthonormal_remainder(&basis, column) {
                ss += dot(&q, y).powi(2);
                df += 1;
                basis.push(q);
            }
        }
        block_ss.push(ss);
        block_df.push(df);
    }
    let total = dot(y, y) - explained_by_mean;
    (block_ss, block_df, total)
}

fn balanced_dataset(factors: Vec<FactorSpec>, replicates: usize, y: &[f64]) -> Dataset {
    let plan = ExperimentPlan::new(factors, replicates, 0, vec![Algorithm::Insertion]).unwrap();
    assert_eq!(y.len(), plan.runs_per_algorithm());
    let mut next = y.iter();
    let mut observations = Vec::new();
    for cell in plan.cells() {
        for replicate in 1..=replicates {
            observations.push(Observation {
                algorithm: Algorithm::Insertion,
                cell_id: cell.id,
                levels: cell.levels.clone(),
                values: cell.values.clone(),
                replicate,
                derived_seed: 0,
                time_seconds: *next.next().unwrap(),
                comparisons: 0,
                writes: 0,
            });
        }
    }
    Dataset {
        plan,
        algorithm: Algorithm::Insertion,
        observations,
        metadata: DatasetMeta {
            prng_id: "acceptance".into(),
            clock_id: "none".into(),
            clock_resolution_ns: 0,
            run_order: Vec::new(),
        },
    }
}

#[test]
fn criterion_3_anova_oracle_equivalence() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x00AC_CE97);
    for case in 0..200 {
        let k = rng.gen_range(1..=3usize);
        let levels: Vec<usize> = (0..k).map(|_| rng.gen_range(2..=3usize)).collect();
        let replicates = rng.gen_range(1..=3usize);
        let factors: Vec<FactorSpec> = levels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let values: Vec<f64> = (0..l).map(|v| 10.0 * (i + 1) as f64 + v as f64).collect();
                FactorSpec::new(format!("f{i}"), values).unwrap()
            })
            .collect();
        let runs = levels.iter().product::<usize>() * replicates;
        let y: Vec<f64> = (0..runs).map(|_| rng.gen_range(-50.0..50.0)).collect();

        let dataset = balanced_dataset(factors, replicates, &y);
        let table = anova(&dataset, Response::TimeSeconds).unwrap();

        // The engine consumes observations in canonical order; the
        // dataset above is already canonical, so codes/y line up.
        let codes: Vec<Vec<usize>> = dataset
            .observations
            .iter()
            .map(|o| o.levels.clone())
            .collect();
        let (oracle_ss, oracle_df, oracle_total) = mgs_oracle(&levels, &codes, &y);

        assert_eq!(table.rows.len(), oracle_ss.len(), "case {case}");
        for ((row, expected), df) in table.rows.iter().zip(&oracle_ss).zip(&oracle_df) {
            assert_eq!(row.df, *df, "case {case} source {}", row.source);
            for (column, value) in [("seq", row.seq_ss), ("adj", row.adj_ss)] {
                assert!(
                    (value - expected).abs() <= 1e-8 * expected.abs().max(1.0),
                    "case {case} source {} {column} SS {value} vs oracle {expected}",
                    row.source
                );
            }
        }

        // Σ SS + SSE = SST at 1e-9 relative, on the engine's own numbers.
        let model: f64 = table.rows.iter().map(|r| r.seq_ss).sum();
        let sse = table.error.as_ref().map_or(0.0, |e| e.ss);
        assert!(
            (model + sse - table.total_ss).abs() <= 1e-9 * table.total_ss.abs().max(1.0),
            "case {case}: {model} + {sse} vs {}",
            table.total_ss
        );
        // And the oracle agrees on the total.
        assert!(
            (oracle_total - table.total_ss).abs() <= 1e-9 * table.total_ss.abs().max(1.0),
            "case {case}: oracle SST {oracle_total} vs {}",
            table.total_ss
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 3 took {elapsed:.2} s (budget 10 s)");
    println!(
        "PASS criterion 3: 200 random balanced designs match the MGS indicator oracle \
         (SS at 1e-8 rel, identity at 1e-9 rel) in {elapsed:.2} s"
    );
}

// ---------------------------------------------------------------------
// Criterion 4: sorting correctness on 10,000 randomized arrays.
// ---------------------------------------------------------------------

#[test]
fn criterion_4_sorting_correctness() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x50_87ED);
    let mut checked = 0usize;
    let mut max_len_seen = 0usize;

    for case in 0..10_000 {
        // Length mix: mostly short, a tail up to 2000, plus pinned
        // full-length boundary cases.
        let len = match case {
            0 => 0,
            1..=4 => 2000,
            _ => match rng.gen_range(0..100u32) {
                0..=89 => rng.gen_range(0..=300usize),
                90..=98 => rng.gen_range(300..=1200usize),
                _ => rng.gen_range(1200..=2000usize),
            },
        };
        max_len_seen = max_len_seen.max(len);

        // Shape mix: random with heavy duplicates, smooth random,
        // all-equal, sorted, reverse-sorted.
        let shape = if (1..=4).contains(&case) {
            case as u32 - 1
        } else {
            rng.gen_range(0..10u32)
        };
        let input: Vec<f64> = match shape {
            0 | 5.. => (0..len).map(|_| rng.gen_range(-8i32..8) as f64 / 2.0).collect(),
            1 => (0..len).map(|_| rng.gen_range(-1.0e6..1.0e6)).collect(),
            2 => vec![3.25; len],
            3 => (0..len).map(|i| i as f64).collect(),
            _ => (0..len).map(|i| (len - i) as f64).collect(),
        };

        let mut reference = input.clone();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let (shift_sorted, _) = shift_insertion_sort(&input).unwrap();
        let (conv_sorted, _) = insertion_sort(&input).unwrap();
        assert_eq!(shift_sorted, reference, "case {case}");
        assert_eq!(conv_sorted, reference, "case {case}");
        assert!(verify_sorted(&shift_sorted, &input), "case {case}");
        assert!(verify_sorted(&conv_sorted, &input), "case {case}");

        // Stability: tag with input positions, sort on the key alone,
        // compare against std's stable sort.
        let tagged: Vec<(f64, usize)> = input.iter().copied().zip(0..).collect();
        let mut stable_reference = tagged.clone();
        stable_reference.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (shift_tagged, _) = shift_insertion_sort_by(&tagged, |a, b| a.0 > b.0);
        let (conv_tagged, _) = insertion_sort_by(&tagged, |a, b| a.0 > b.0);
        assert_eq!(shift_tagged, stable_reference, "case {case} stability");
        assert_eq!(conv_tagged, stable_reference, "case {case} stability");

        checked += 1;
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert_eq!(checked, 10_000);
    assert_eq!(max_len_seen, 2000);
    assert!(elapsed < 30.0, "criterion 4 took {elapsed:.2} s (budget 30 s)");
    println!(
        "PASS criterion 4: 10,000 arrays (lengths 0..=2000) sorted correctly and stably \
         by both algorithms in {elapsed:.2} s"
    );
}

// ---------------------------------------------------------------------
// Criterion 5: exact count laws at three sizes.
// ---------------------------------------------------------------------

#[test]
fn criterion_5_count_laws() {
    for n in [10usize, 100, 1000] {
        let ascending: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let descending: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let half = (n * (n - 1) / 2) as u64;
        let linear = (n - 1) as u64;

        let (_, stats) = shift_insertion_sort(&ascending).unwrap();
        assert_eq!((stats.comparisons, stats.writes), (half, 0), "shift asc n={n}");
        let (_, stats) = shift_insertion_sort(&descending).unwrap();
        assert_eq!(stats.comparisons, linear, "shift desc n={n}");

        let (_, stats) = insertion_sort(&ascending).unwrap();
        assert_eq!(
            (stats.comparisons, stats.writes),
            (linear, 2 * linear),
            "conventional asc n={n}"
        );
        let (_, stats) = insertion_sort(&descending).unwrap();
        assert_eq!(stats.comparisons, half, "conventional desc n={n}");
    }
    println!("PASS criterion 5: exact count laws hold at n = 10, 100, 1000");
}

// ---------------------------------------------------------------------
// Criterion 6: generator sanity over a 100-seed panel.
// ---------------------------------------------------------------------

#[test]
fn criterion_6_generator_sanity() {
    let started = std::time::Instant::now();
    let (n, m, s) = (100_000usize, 1000.0f64, 1200.0f64);
    let mean_band = 4.0 * s / (n as f64).sqrt();
    let sd_band = 4.0 * s / (2.0 * n as f64).sqrt();

    let mut passes = 0usize;
    for seed in 0..100u64 {
        let sample = normal_sample(&GenSpec::new(n, m, s, seed).unwrap());
        let mean = sample.iter().sum::<f64>() / n as f64;
        let variance =
            sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let sd = variance.sqrt();
        if (mean - m).abs() <= mean_band && (sd - s).abs() <= sd_band {
            passes += 1;
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(passes >= 95, "only {passes}/100 seeds inside the moment bands");
    assert!(elapsed < 10.0, "criterion 6 took {elapsed:.2} s (budget 10 s)");
    println!(
        "PASS criterion 6: {passes}/100 seeds have mean within ±{mean_band:.2} and \
         SD within ±{sd_band:.2} in {elapsed:.2} s"
    );
}

// ---------------------------------------------------------------------
// Criteria 7 and 8: desk-scale end-to-end determinism and the
// sensitivity-comparison pipeline through the real binary.
// ---------------------------------------------------------------------

fn desk_plan(master_seed: u64) -> ExperimentPlan {
    ExperimentPlan::new(
        vec![
            FactorSpec::new("n", vec![500.0, 700.0, 900.0]).unwrap(),
            FactorSpec::new("s", vec![800.0, 1200.0, 1600.0]).unwrap(),
            FactorSpec::new("m", vec![500.0, 1000.0, 1500.0]).unwrap(),
        ],
        3,
        master_seed,
        vec![Algorithm::ShiftInsertion, Algorithm::Insertion],
    )
    .unwrap()
}

#[test]
fn criterion_7_end_to_end_determinism() {
    let plan = desk_plan(20260819);
    let first = run_experiment(&plan).unwrap();
    let second = run_experiment(&plan).unwrap();
    assert_eq!(first.len(), 2);

    for (a, b) in first.iter().zip(&second) {
        // Byte-identical counters-response ANOVA across reruns.
        let table_a = anova(a, Response::Comparisons).unwrap();
        let table_b = anova(b, Response::Comparisons).unwrap();
        assert_eq!(
            table_a.to_json(),
            table_b.to_json(),
            "{}: rerun JSON differs",
            a.algorithm
        );

        // The element-count main effect dominates: p(n) below print scale.
        let n_row = &table_a.rows[0];
        assert_eq!(n_row.source, "n");
        let p = n_row.p.expect("replicated design");
        assert!(p < 0.0005, "{}: p(n) = {p}", a.algorithm);

        // Wall time grows strictly with n (means over 27 runs per level).
        let mut time_by_level: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for obs in &a.observations {
            let slot = time_by_level.entry(obs.levels[0]).or_insert((0.0, 0));
            slot.0 += obs.time_seconds;
            slot.1 += 1;
        }
        let means: Vec<f64> = time_by_level.values().map(|(t, c)| t / *c as f64).collect();
        assert_eq!(means.len(), 3);
        assert!(
            means[0] < means[1] && means[1] < means[2],
            "{}: mean times not strictly increasing: {means:?}",
            a.algorithm
        );
    }

    println!(
        "PASS criterion 7: desk-scale rerun is byte-identical on the counters response, \
         p(n) < 0.0005 and mean wall time strictly increasing in n for both algorithms"
    );
}

#[test]
fn criterion_8_sensitivity_pipeline_through_binary() {
    let binary = env!("CARGO_BIN_EXE_sortlab");
    let dir = tempfile::tempdir().unwrap();
    let plan_path = dir.path().join("plan.json");
    std::fs::write(&plan_path, desk_plan(20260819).to_json()).unwrap();

    let run = Command::new(binary)
        .args(["run", "--plan"])
        .arg(&plan_path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );

    let compare = Command::new(binary)
        .arg("compare")
        .arg(dir.path().join("insertion.csv"))
        .arg(dir.path().join("shift_insertion.csv"))
        .args(["--response", "comparisons", "--alpha", "0.05", "--format", "csv"])
        .output()
        .unwrap();
    assert!(
        compare.status.success(),
        "compare failed: {}",
        String::from_utf8_lossy(&compare.stderr)
    );

    let stdout = String::from_utf8(compare.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(
        lines[0],
        "source,f_a,p_a,significant_a,f_b,p_b,significant_b,more_sensitive"
    );
    let rows = &lines[1..];
    assert_eq!(rows.len(), 7, "expected exactly 7 source rows:\n{stdout}");
    let sources: Vec<&str> = rows.iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sources, ["n", "s", "m", "n*s", "n*m", "s*m", "n*s*m"]);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8, "row: {row}");
        for flag in [fields[3], fields[6]] {
            assert!(
                flag == "true" || flag == "false",
                "malformed significance flag {flag:?} in {row}"
            );
        }
        assert!(
            ["a", "b", "tie", "neither_significant"].contains(&fields[7]),
            "malformed verdict {:?} in {row}",
            fields[7]
        );
    }

    println!(
        "PASS criterion 8: binary run + compare emitted exactly 7 well-formed source rows \
         at alpha = 0.05"
    );
}
