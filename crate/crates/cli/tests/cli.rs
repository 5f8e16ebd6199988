//! End-to-end tests of the `fss` binary: exit codes, validation reports,
//! generation determinism, golden ranking output, analysis reports and
//! config-file handling.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fss() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fss"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    fss().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

/// Ten researchers in one sector with hand-checkable scores over 2007-2008.
fn golden_fixture(dir: &Path) {
    let mut researchers = String::from("researcher_id,sds_id,university_id,active_from,active_to\n");
    for i in 1..=10 {
        let university = if i % 2 == 0 { "UB" } else { "UA" };
        researchers.push_str(&format!("R{i:02},S1,{university},2003,2008\n"));
    }
    write(dir, "researchers.csv", &researchers);
    write(
        dir,
        "publications.csv",
        "pub_id,year,citation_count,subject_categories\n\
         P01,2008,8,CA\n\
         P02,2008,4,CA\n\
         P03,2008,2,CA\n\
         P04,2008,0,CA\n\
         P05,2007,6,CA\n\
         P06,2007,2,CA\n\
         P07,2007,0,CA\n",
    );
    write(
        dir,
        "authorship.csv",
        "pub_id,position,researcher_id,institution_id\n\
         P01,1,R01,UA\n\
         P02,1,R02,UB\n\
         P02,2,R03,UA\n\
         P03,1,R04,UB\n\
         P04,1,R05,UA\n\
         P05,1,R01,UA\n\
         P05,2,R06,UB\n\
         P06,1,R07,UA\n\
         P07,1,R08,UB\n",
    );
    write(dir, "taxonomy.csv", "sds_id,uda_id,positional_weighting\nS1,U1,false\n");
}

// Hand-derived expectations. Baseline medians: (CA, 2008) over {8, 4, 2} is
// 4; (CA, 2007) over {6, 2} is 4. Single-year scores: R01 = 8/4 = 2; R02 and
// R03 split 4/4; R04 = 2/4. Two-year adds P05 (R01 += 0.75, R06 = 0.75) and
// P06 (R07 = 0.5). Percentiles by the mid-rank formula over N = 10.
const GOLDEN_2008: &str = "sds_id,window_start,window_end,researcher_id,fss,percentile,class\n\
S1,2008,2008,R01,2,90,4\n\
S1,2008,2008,R02,0.5,70,3\n\
S1,2008,2008,R03,0.5,70,3\n\
S1,2008,2008,R04,0.5,70,3\n\
S1,2008,2008,R05,0,25,0\n\
S1,2008,2008,R06,0,25,0\n\
S1,2008,2008,R07,0,25,0\n\
S1,2008,2008,R08,0,25,0\n\
S1,2008,2008,R09,0,25,0\n\
S1,2008,2008,R10,0,25,0\n";

const GOLDEN_2007_2008: &str = "sds_id,window_start,window_end,researcher_id,fss,percentile,class\n\
S1,2007,2008,R01,2.75,90,4\n\
S1,2007,2008,R06,0.75,80,4\n\
S1,2007,2008,R02,0.5,55,3\n\
S1,2007,2008,R03,0.5,55,3\n\
S1,2007,2008,R04,0.5,55,3\n\
S1,2007,2008,R07,0.5,55,3\n\
S1,2007,2008,R05,0,15,0\n\
S1,2007,2008,R08,0,15,0\n\
S1,2007,2008,R09,0,15,0\n\
S1,2007,2008,R10,0,15,0\n";

#[test]
fn validate_accepts_a_clean_corpus() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let output = run_in(dir.path(), &["validate", "--data-dir", "."]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["counts"]["researchers"], 10);
}

#[test]
fn validate_reports_dangling_keys_with_exit_2() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let mut authorship = fs::read_to_string(dir.path().join("authorship.csv")).unwrap();
    authorship.push_str("X9,1,,UA\n");
    write(dir.path(), "authorship.csv", &authorship);
    let output = run_in(dir.path(), &["validate", "--data-dir", "."]);
    assert_eq!(output.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["status"], "error");
    let issues = report["issues"].as_array().unwrap();
    assert!(issues
        .iter()
        .any(|i| i["kind"] == "dangling_reference" && i["key"] == "X9"));
}

#[test]
fn validate_reports_byline_gaps() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    write(
        dir.path(),
        "authorship.csv",
        "pub_id,position,researcher_id,institution_id\n\
         P01,1,R01,UA\nP02,1,R02,UB\nP03,1,R04,UB\nP04,1,R05,UA\n\
         P05,1,R01,UA\nP05,3,R06,UB\nP06,1,R07,UA\nP07,1,R08,UB\n",
    );
    let output = run_in(dir.path(), &["validate", "--data-dir", "."]);
    assert_eq!(output.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert!(report["issues"].as_array().unwrap().iter().any(|i| i["kind"] == "byline_gap"));
}

#[test]
fn missing_inputs_are_a_usage_error() {
    let dir = tempfile::TempDir::new().unwrap();
    let output = run_in(dir.path(), &["validate"]);
    assert_eq!(output.status.code(), Some(64));
}

#[test]
fn unknown_flags_are_a_usage_error() {
    let dir = tempfile::TempDir::new().unwrap();
    let output = run_in(dir.path(), &["rank", "--no-such-flag"]);
    assert_eq!(output.status.code(), Some(64));
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn generate_is_deterministic_and_counts_match() {
    let dir = tempfile::TempDir::new().unwrap();
    let args = [
        "generate",
        "--seed",
        "42",
        "--n-sds",
        "3",
        "--staff-min",
        "10",
        "--staff-max",
        "10",
    ];
    let output = run_in(dir.path(), &[&args[..], &["--out", "a"]].concat());
    assert!(output.status.success());
    let output = run_in(dir.path(), &[&args[..], &["--out", "b"]].concat());
    assert!(output.status.success());
    assert_eq!(dir_bytes(&dir.path().join("a")), dir_bytes(&dir.path().join("b")));

    let researchers = fs::read_to_string(dir.path().join("a/researchers.csv")).unwrap();
    assert_eq!(researchers.lines().count(), 31); // header + 3 * 10
    let latents = fs::read_to_string(dir.path().join("a/latent_rates.csv")).unwrap();
    assert_eq!(latents.lines().count(), 31);
}

#[test]
fn rank_writes_one_file_per_sector_and_window() {
    let dir = tempfile::TempDir::new().unwrap();
    let output = run_in(
        dir.path(),
        &["generate", "--seed", "5", "--n-sds", "2", "--staff-min", "12", "--staff-max", "12", "--out", "corpus"],
    );
    assert!(output.status.success());
    let output = run_in(
        dir.path(),
        &["rank", "--data-dir", "corpus", "--anchor", "2008", "--max-length", "6", "--out", "ranks"],
    );
    assert!(output.status.success());
    let rankings: Vec<String> = dir_bytes(&dir.path().join("ranks"))
        .into_iter()
        .map(|(name, _)| name)
        .filter(|name| name.starts_with("ranking_"))
        .collect();
    assert_eq!(rankings.len(), 12, "{rankings:?}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ranks/rank_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["eligible_sds"].as_array().unwrap().len(), 2);
    assert_eq!(summary["provenance"]["run_config"]["anchor"], 2008);
    assert!(summary["provenance"]["input_digest"].is_string());
}

#[test]
fn rank_reproduces_the_golden_tables_byte_for_byte() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let output = run_in(
        dir.path(),
        &["rank", "--data-dir", ".", "--anchor", "2008", "--max-length", "2", "--out", "ranks"],
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let one_year = fs::read_to_string(dir.path().join("ranks/ranking_S1_2008_2008.csv")).unwrap();
    assert_eq!(one_year, GOLDEN_2008);
    let two_year = fs::read_to_string(dir.path().join("ranks/ranking_S1_2007_2008.csv")).unwrap();
    assert_eq!(two_year, GOLDEN_2007_2008);
}

#[test]
fn rank_with_no_eligible_sector_still_succeeds() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let output = run_in(
        dir.path(),
        &["rank", "--data-dir", ".", "--anchor", "2008", "--min-members", "900", "--out", "ranks"],
    );
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("no eligible sector"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ranks/rank_summary.json")).unwrap())
            .unwrap();
    assert!(summary["eligible_sds"].as_array().unwrap().is_empty());
    assert!(!summary["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn analyze_marks_single_scenario_comparisons_not_applicable() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let output = run_in(
        dir.path(),
        &["analyze", "--data-dir", ".", "--anchor", "2008", "--max-length", "1", "--out", "analysis"],
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("analysis/analysis_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["comparison_chain"]["applicable"], false);
    assert!(report["comparison_chain"]["reason"]
        .as_str()
        .unwrap()
        .contains("not applicable"));
    assert_eq!(report["transitions"]["applicable"], false);
}

#[test]
fn analyze_with_no_eligible_sector_writes_an_empty_report() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let output = run_in(
        dir.path(),
        &["analyze", "--data-dir", ".", "--anchor", "2008", "--min-members", "900", "--out", "analysis"],
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    assert!(String::from_utf8_lossy(&output.stderr).contains("no eligible sector"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("analysis/analysis_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["comparison_chain"]["applicable"], false);
    assert!(report["comparison_chain"]["reason"].as_str().unwrap().contains("no eligible sector"));
    assert_eq!(report["transitions"]["applicable"], false);
}

#[test]
fn analyze_emits_all_three_sections_and_plot_data() {
    let dir = tempfile::TempDir::new().unwrap();
    let output = run_in(
        dir.path(),
        &["generate", "--seed", "11", "--n-sds", "2", "--staff-min", "14", "--staff-max", "14", "--out", "corpus"],
    );
    assert!(output.status.success());
    let output = run_in(
        dir.path(),
        &["analyze", "--data-dir", "corpus", "--anchor", "2008", "--max-length", "6", "--out", "analysis"],
    );
    assert!(output.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("analysis/analysis_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["comparison_chain"]["applicable"], true);
    assert_eq!(report["comparison_chain"]["pairs"].as_array().unwrap().len(), 5);
    assert_eq!(report["transitions"]["applicable"], true);
    assert_eq!(report["deltas"]["report"]["lengths"], serde_json::json!([1, 2, 3]));
    assert!(dir.path().join("analysis/adjacent_comparisons.csv").exists());
    assert!(dir.path().join("analysis/class_trajectories.csv").exists());

    let rendered = run_in(dir.path(), &["report", "analysis/analysis_report.json"]);
    assert!(rendered.status.success());
    let text = stdout(&rendered);
    assert!(text.contains("adjacent-scenario comparisons"));
    assert!(text.contains("delta_1"));
}

#[test]
fn analyze_is_byte_identical_across_reruns_and_thread_counts() {
    let make = |threads: &str| {
        let dir = tempfile::TempDir::new().unwrap();
        let output = run_in(
            dir.path(),
            &["generate", "--seed", "3", "--n-sds", "2", "--staff-min", "12", "--staff-max", "12", "--out", "corpus"],
        );
        assert!(output.status.success());
        let output = run_in(
            dir.path(),
            &[
                "analyze",
                "--data-dir",
                "corpus",
                "--anchor",
                "2008",
                "--max-length",
                "6",
                "--threads",
                threads,
                "--out",
                "analysis",
            ],
        );
        assert!(output.status.success());
        (dir_bytes(&dir.path().join("analysis")), dir)
    };
    let (first, _keep_a) = make("1");
    let (second, _keep_b) = make("1");
    let (parallel, _keep_c) = make("3");
    assert_eq!(first, second);
    assert_eq!(first, parallel);
}

#[test]
fn baselines_can_be_exported_and_imported() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let output = run_in(
        dir.path(),
        &["rank", "--data-dir", ".", "--anchor", "2008", "--max-length", "2", "--export-baselines", "--out", "a"],
    );
    assert!(output.status.success());
    let baselines = fs::read_to_string(dir.path().join("a/baselines.csv")).unwrap();
    assert_eq!(baselines, "category,year,median,count\nCA,2007,4,2\nCA,2008,4,3\n");

    // Importing the exported table reproduces the ranking byte for byte.
    let output = run_in(
        dir.path(),
        &[
            "rank", "--data-dir", ".", "--anchor", "2008", "--max-length", "2",
            "--baselines", "a/baselines.csv", "--out", "b",
        ],
    );
    assert!(output.status.success());
    assert_eq!(
        fs::read(dir.path().join("a/ranking_S1_2008_2008.csv")).unwrap(),
        fs::read(dir.path().join("b/ranking_S1_2008_2008.csv")).unwrap()
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b/rank_summary.json")).unwrap()).unwrap();
    assert!(summary["provenance"]["baseline_mode"].as_str().unwrap().starts_with("imported"));
}

#[test]
fn external_reference_publications_shift_the_baselines() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    // A reference set with median 2 in (CA, 2008): R01's one-year score
    // becomes 8/2 = 4 instead of 2.
    write(
        dir.path(),
        "reference.csv",
        "pub_id,year,citation_count,subject_categories\nN1,2008,1,CA\nN2,2008,2,CA\nN3,2008,3,CA\nN4,2007,4,CA\n",
    );
    let output = run_in(
        dir.path(),
        &[
            "rank", "--data-dir", ".", "--anchor", "2008", "--max-length", "1",
            "--reference-pubs", "reference.csv", "--out", "ranks",
        ],
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let table = fs::read_to_string(dir.path().join("ranks/ranking_S1_2008_2008.csv")).unwrap();
    assert!(table.contains("S1,2008,2008,R01,4,90,4"), "{table}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ranks/rank_summary.json")).unwrap())
            .unwrap();
    assert!(summary["provenance"]["baseline_mode"]
        .as_str()
        .unwrap()
        .starts_with("reference-file"));
}

#[test]
fn trajectory_selection_and_report_formats_are_honoured() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    let output = run_in(
        dir.path(),
        &[
            "analyze", "--data-dir", ".", "--anchor", "2008", "--max-length", "2",
            "--trend-researchers", "R01,R06", "--out", "analysis",
        ],
    );
    assert!(output.status.success());
    let trajectories = fs::read_to_string(dir.path().join("analysis/class_trajectories.csv")).unwrap();
    let ids: std::collections::BTreeSet<&str> = trajectories
        .lines()
        .skip(1)
        .map(|line| line.split(',').next().unwrap())
        .collect();
    assert_eq!(ids, ["R01", "R06"].into_iter().collect());

    // json-only run writes the report but no plot CSVs
    let output = run_in(
        dir.path(),
        &[
            "analyze", "--data-dir", ".", "--anchor", "2008", "--max-length", "2",
            "--report-formats", "json", "--out", "jsononly",
        ],
    );
    assert!(output.status.success());
    assert!(dir.path().join("jsononly/analysis_report.json").exists());
    assert!(!dir.path().join("jsononly/adjacent_comparisons.csv").exists());

    // --emit-rankings adds the per-window tables next to the report
    let output = run_in(
        dir.path(),
        &[
            "analyze", "--data-dir", ".", "--anchor", "2008", "--max-length", "2",
            "--emit-rankings", "--out", "withranks",
        ],
    );
    assert!(output.status.success());
    assert!(dir.path().join("withranks/ranking_S1_2008_2008.csv").exists());
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::TempDir::new().unwrap();
    golden_fixture(dir.path());
    write(
        dir.path(),
        "run.conf",
        "# run configuration\nanchor = 2008\nmax-length = 2\nout = ranks\nmin-members = 10\n",
    );
    let output = run_in(dir.path(), &["rank", "--config", "run.conf", "--data-dir", "."]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    assert!(dir.path().join("ranks/ranking_S1_2007_2008.csv").exists());
    assert!(dir.path().join("ranks/ranking_S1_2008_2008.csv").exists());

    // The flag beats the config file: one window only.
    let output = run_in(
        dir.path(),
        &["rank", "--config", "run.conf", "--data-dir", ".", "--max-length", "1", "--out", "ranks1"],
    );
    assert!(output.status.success());
    assert!(dir.path().join("ranks1/ranking_S1_2008_2008.csv").exists());
    assert!(!dir.path().join("ranks1/ranking_S1_2007_2008.csv").exists());

    // JSON config files work too.
    write(dir.path(), "run.json", "{\"anchor\": 2008, \"max_length\": 1, \"out\": \"ranks2\"}");
    let output = run_in(dir.path(), &["rank", "--config", "run.json", "--data-dir", "."]);
    assert!(output.status.success());
    assert!(dir.path().join("ranks2/ranking_S1_2008_2008.csv").exists());
}

#[test]
fn json_corpus_inputs_load() {
    let dir = tempfile::TempDir::new().unwrap();
    let output = run_in(
        dir.path(),
        &[
            "generate", "--seed", "9", "--n-sds", "2", "--staff-min", "10", "--staff-max", "10",
            "--format", "json", "--out", "corpus",
        ],
    );
    assert!(output.status.success());
    let output = run_in(dir.path(), &["validate", "--data-dir", "corpus", "--format", "json"]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["counts"]["researchers"], 20);
}
