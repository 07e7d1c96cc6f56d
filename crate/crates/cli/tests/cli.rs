//! Golden tests for the binary: output matches direct library calls, seeds
//! reproduce files byte for byte, and exit codes follow the 0/1/2 contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pqtopk::demo::demo_instance;
use pqtopk::io::{write_instance, write_query_embedding};
use pqtopk::scoring::{compute_sub_id_scores, pq_topk, ItemSubset};
use pqtopk::synthetic::random_sequence_embedding;
use pqtopk::SequenceEmbedding;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pqtopk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn demo_file(dir: &Path) -> PathBuf {
    let path = dir.join("demo.pqtk");
    let (codebook, embeddings, _) = demo_instance();
    write_instance(&path, &codebook, &embeddings).unwrap();
    path
}

#[test]
fn score_demo_instance_matches_hand_ranking_for_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let instance = demo_file(dir.path());
    let phi_path = dir.path().join("phi.f32");
    let phi = SequenceEmbedding::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    write_query_embedding(&phi_path, &phi).unwrap();

    for method in ["pqtopk", "recjpq", "dense"] {
        let output = run(&[
            "score",
            "--instance",
            instance.to_str().unwrap(),
            "--phi-file",
            phi_path.to_str().unwrap(),
            "--k",
            "3",
            "--method",
            method,
        ]);
        assert!(output.status.success(), "{method}: {output:?}");
        assert_eq!(
            stdout(&output),
            "1 0 8\n2 1 8\n3 2 7\n",
            "method {method}"
        );
    }
}

#[test]
fn score_k_zero_prints_nothing_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let instance = demo_file(dir.path());
    let output = run(&[
        "score",
        "--instance",
        instance.to_str().unwrap(),
        "--phi-seed",
        "1",
        "--k",
        "0",
        "--method",
        "pqtopk",
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).is_empty());
}

#[test]
fn score_output_matches_library_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst.pqtk");
    let generate = run(&[
        "generate",
        "--items",
        "2000",
        "--splits",
        "4",
        "--sub-ids",
        "32",
        "--dim",
        "64",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(generate.status.success());

    let output = run(&[
        "score",
        "--instance",
        out.to_str().unwrap(),
        "--phi-seed",
        "33",
        "--k",
        "7",
        "--method",
        "pqtopk",
    ]);
    assert!(output.status.success());

    let (codebook, embeddings) = pqtopk::io::read_instance(&out, u64::MAX).unwrap();
    let phi = random_sequence_embedding(64, 33).unwrap();
    let scores = compute_sub_id_scores(&embeddings, &phi).unwrap();
    let expected = pq_topk(&codebook, &scores, 7, &ItemSubset::All).unwrap();

    let printed: Vec<String> = stdout(&output).lines().map(str::to_owned).collect();
    assert_eq!(printed.len(), 7);
    for (rank, (line, &(item, score))) in printed.iter().zip(expected.entries()).enumerate() {
        assert_eq!(*line, format!("{} {} {}", rank + 1, item, score));
    }
}

#[test]
fn subset_file_restricts_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let instance = demo_file(dir.path());
    let subset = dir.path().join("subset.txt");
    std::fs::write(&subset, "2\n").unwrap();
    let phi_path = dir.path().join("phi.f32");
    write_query_embedding(
        &phi_path,
        &SequenceEmbedding::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
    )
    .unwrap();

    let output = run(&[
        "score",
        "--instance",
        instance.to_str().unwrap(),
        "--phi-file",
        phi_path.to_str().unwrap(),
        "--k",
        "5",
        "--method",
        "pqtopk",
        "--subset-file",
        subset.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(stdout(&output), "1 2 7\n");
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pqtk");
    let b = dir.path().join("b.pqtk");
    let c = dir.path().join("c.pqtk");
    for (path, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        let output = run(&[
            "generate",
            "--items",
            "1e3",
            "--splits",
            "2",
            "--sub-ids",
            "16",
            "--dim",
            "8",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
    assert_ne!(bytes_a, std::fs::read(&c).unwrap());
}

#[test]
fn invalid_config_exits_one_with_message() {
    let output = run(&[
        "generate",
        "--items",
        "100",
        "--splits",
        "8",
        "--dim",
        "510",
        "--out",
        "/tmp/never-written.pqtk",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("not divisible"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_exits_one() {
    let output = run(&["generate", "--frobnicate", "1"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unknown_method_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let instance = demo_file(dir.path());
    let output = run(&[
        "score",
        "--instance",
        instance.to_str().unwrap(),
        "--phi-seed",
        "1",
        "--method",
        "fastest",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown scoring method"));
}

#[test]
fn corrupt_instance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corrupt.pqtk");
    std::fs::write(&path, b"PQTKgarbage").unwrap();
    let output = run(&[
        "score",
        "--instance",
        path.to_str().unwrap(),
        "--phi-seed",
        "1",
        "--method",
        "pqtopk",
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn verify_passes_on_valid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst.pqtk");
    assert!(run(&[
        "generate",
        "--items",
        "500",
        "--splits",
        "4",
        "--sub-ids",
        "16",
        "--dim",
        "32",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    let output = run(&[
        "verify",
        "--instance",
        out.to_str().unwrap(),
        "--queries",
        "25",
    ]);
    assert!(output.status.success(), "{output:?}");
    assert!(stdout(&output).contains("25/25 queries pass"));
}

#[test]
fn verify_with_zero_tolerance_reports_dense_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst.pqtk");
    assert!(run(&[
        "generate",
        "--items",
        "500",
        "--splits",
        "8",
        "--sub-ids",
        "16",
        "--dim",
        "512",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    let output = run(&[
        "verify",
        "--instance",
        out.to_str().unwrap(),
        "--queries",
        "5",
        "--tolerance",
        "0",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("mismatch at query"));
}

#[test]
fn bench_writes_report_plot_and_honours_budget_skips() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("report.csv");
    let plot_path = dir.path().join("report.gp");
    let output = run(&[
        "bench",
        "--sizes",
        "1e3,2e3",
        "--splits",
        "2",
        "--sub-ids",
        "8",
        "--dim",
        "16",
        "--queries",
        "3",
        "--warmup",
        "1",
        "--out",
        csv_path.to_str().unwrap(),
        "--plot",
        plot_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 7, "header + 6 cells:\n{csv}");
    assert!(csv.starts_with("method,num_items,m,b,d,K,queries,median_ms"));
    let plot = std::fs::read_to_string(&plot_path).unwrap();
    assert!(plot.contains("set logscale xy"));

    // dense at 1e6 items of dim 512 cannot fit a 100M budget
    let json_path = dir.path().join("skip.json");
    let output = run(&[
        "bench",
        "--sizes",
        "1e6",
        "--queries",
        "2",
        "--warmup",
        "0",
        "--methods",
        "dense,pqtopk",
        "--memory-budget",
        "100M",
        "--out",
        json_path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = pqtopk::bench::parse_report_json(&std::fs::read(&json_path).unwrap()).unwrap();
    let dense = report
        .entry(pqtopk::bench::Method::Dense, 1_000_000)
        .unwrap();
    assert!(dense.skipped);
    assert!(dense.reason.as_deref().unwrap().contains("memory budget"));
    assert!(!report
        .entry(pqtopk::bench::Method::PqTopk, 1_000_000)
        .unwrap()
        .skipped);
}

#[test]
fn bench_all_cells_skipped_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let output = run(&[
        "bench",
        "--sizes",
        "1e6",
        "--queries",
        "2",
        "--memory-budget",
        "1K",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("skipped"));
}

#[test]
fn build_codebook_quantises_dense_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let dense_path = dir.path().join("w.dens");
    // 64 rows cycling through 8 distinct values per column pair
    let mut data = Vec::new();
    for i in 0..64 {
        let v = (i % 8) as f32;
        data.extend_from_slice(&[v, -v, v * 2.0, 1.0]);
    }
    let matrix = pqtopk::scoring::DenseEmbeddingMatrix::new(64, 4, data).unwrap();
    pqtopk::io::write_dense_matrix(&dense_path, &matrix).unwrap();

    let out = dir.path().join("inst.pqtk");
    let output = run(&[
        "build-codebook",
        "--input",
        dense_path.to_str().unwrap(),
        "--splits",
        "2",
        "--sub-ids",
        "8",
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "2",
    ]);
    assert!(output.status.success(), "{output:?}");
    assert!(stdout(&output).contains("total mse: 0.000000"));

    let (codebook, embeddings) = pqtopk::io::read_instance(&out, u64::MAX).unwrap();
    for item in 0..64u64 {
        let row = pqtopk::scoring::reconstruct_item_embedding(&embeddings, &codebook, item)
            .unwrap();
        assert_eq!(row, matrix.row(item));
    }
}
