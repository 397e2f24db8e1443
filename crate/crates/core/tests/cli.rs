use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn divscore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divscore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn profile_six_languages_deterministic() {
    let dir = fixtures().join("mini/dataset");
    let args = [
        "profile",
        "--dataset",
        path(&dir),
        "--format",
        "csv",
        "--sample-target",
        "200",
        "--seed",
        "3",
    ];
    let a = divscore(&args);
    let b = divscore(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iso,mwl,ttr,entropy,token_count,offset,seed");
    assert_eq!(lines.len(), 7);
    let isos: Vec<&str> = lines[1..].iter().map(|l| &l[..3]).collect();
    assert_eq!(isos, ["cmn", "deu", "eng", "fra", "rus", "spa"]);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(4) == Some("200") && l.ends_with(",3")));
}

#[test]
fn profile_reports_empty_file_and_keeps_going() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::copy(
        fixtures().join("mini/dataset/eng.txt"),
        tmp.path().join("eng.txt"),
    )
    .unwrap();
    std::fs::write(tmp.path().join("fra.txt"), "").unwrap();
    let o = divscore(&["profile", "--dataset", path(tmp.path()), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stderr(&o).contains("fra"));
    assert!(stderr(&o).contains("empty corpus"));
}

#[test]
fn score_morph_same_dir_is_one() {
    let dir = fixtures().join("mini/reference");
    let o = divscore(&[
        "score",
        "--level",
        "morph",
        "--reference",
        path(&dir),
        "--dataset",
        path(&dir),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["jmm"]["value"], 1.0);
    assert_eq!(v["jmm"]["normalization_c"], 1.0);
    assert!(stderr(&o).contains("normalization scalar c = 1"));
}

#[test]
fn score_morph_mini_matches_golden() {
    let golden: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fixtures().join("mini/golden_morph.json")).unwrap(),
    )
    .unwrap();
    let o = divscore(&[
        "score",
        "--level",
        "morph",
        "--reference",
        path(&fixtures().join("mini/reference")),
        "--dataset",
        path(&fixtures().join("mini/dataset")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["jmm"]["per_bin"], golden["per_bin"]);
    assert_eq!(v["jmm"]["gap"], golden["gap"]);
    for (ours, key) in [
        (&v["jmm"]["value"], "jmm_morph"),
        (&v["jmm"]["normalization_c"], "normalization_c"),
        (&v["ti_dataset"]["value"], "ti_morph_dataset"),
        (&v["ti_reference"]["value"], "ti_morph_reference"),
    ] {
        assert!(
            (ours.as_f64().unwrap() - golden[key].as_f64().unwrap()).abs() < 1e-12,
            "{key}"
        );
    }
}

#[test]
fn score_morph_accepts_profile_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("ref.csv");
    let o = divscore(&[
        "profile",
        "--dataset",
        path(&fixtures().join("mini/reference")),
        "--format",
        "csv",
    ]);
    std::fs::write(&table, &o.stdout).unwrap();
    let from_dir = divscore(&[
        "score",
        "--level",
        "morph",
        "--format",
        "csv",
        "--reference",
        path(&fixtures().join("mini/reference")),
        "--dataset",
        path(&fixtures().join("mini/dataset")),
    ]);
    let from_table = divscore(&[
        "score",
        "--level",
        "morph",
        "--format",
        "csv",
        "--reference",
        path(&table),
        "--dataset",
        path(&fixtures().join("mini/dataset")),
    ]);
    assert_eq!(from_table.status.code(), Some(0), "{}", stderr(&from_table));
    assert_eq!(from_dir.stdout, from_table.stdout);
    assert!(stdout(&from_dir).starts_with("bin,dataset,reference,min,max\n"));
}

#[test]
fn score_svg_is_self_contained() {
    let o = divscore(&[
        "score",
        "--level",
        "morph",
        "--format",
        "svg",
        "--reference",
        path(&fixtures().join("mini/reference")),
        "--dataset",
        path(&fixtures().join("mini/dataset")),
    ]);
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href"));
    // Golden: 6 occupied bins; reference in 5, data set in 4, overlap in 3.
    assert_eq!(svg.matches("class=\"reference\"").count(), 5);
    assert_eq!(svg.matches("class=\"dataset\"").count(), 4);
    assert_eq!(svg.matches("class=\"intersection\"").count(), 3);
    assert_eq!(svg.matches("<rect").count(), svg.matches("</rect>").count());
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn score_syn_mismatched_headers_names_column() {
    let tmp = tempfile::tempdir().unwrap();
    let r = write(tmp.path(), "r.csv", "iso,S_SVO,S_SOV\neng,1,0\ndeu,1,1\n");
    let d = write(tmp.path(), "d.csv", "iso,S_SVO,S_VSO\nfra,1,0\n");
    let o = divscore(&[
        "score",
        "--level",
        "syn",
        "--reference",
        path(&r),
        "--dataset",
        path(&d),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("first mismatched column \"S_VSO\""),
        "{}",
        stderr(&o)
    );
}

#[test]
fn score_syn_with_dropped_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let r = write(tmp.path(), "r.csv", "iso,A,B\neng,1,0\ndeu,1,1\ntur,0,?\n");
    let d = write(tmp.path(), "d.csv", "iso,A,B\nfra,1,0\nspa,0,1\n");
    let refuse = divscore(&[
        "score",
        "--level",
        "syn",
        "--reference",
        path(&r),
        "--dataset",
        path(&d),
    ]);
    assert_eq!(refuse.status.code(), Some(1));
    assert!(stderr(&refuse).contains("tur"));

    let o = divscore(&[
        "score",
        "--level",
        "syn",
        "--drop-incomplete",
        "--syn-dims",
        "206",
        "--reference",
        path(&r),
        "--dataset",
        path(&d),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("1 row dropped"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["syn_dims"], 4);
    // Value counts A=0,A=1,B=0,B=1: reference 0,2,1,1; data set 1,1,1,1.
    assert_eq!(v["jmm"]["value"], 0.6);
    assert_eq!(v["ti_dataset"]["value"], 1.0);
}

#[test]
fn cwals_bundled_and_missing_chapter() {
    let o = divscore(&["cwals", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 29);
    let vie: f64 = text.lines().find(|l| l.starts_with("vie,")).unwrap()[4..]
        .parse()
        .unwrap();
    assert!((vie - 0.21).abs() <= 0.005);

    let mut rows: Vec<String> = include_str!("../data/morph_final_values.csv")
        .lines()
        .map(String::from)
        .collect();
    let header: Vec<&str> = rows[0].split(',').collect();
    let last = header.iter().position(|h| *h == "112A").unwrap();
    let mut cells: Vec<String> = rows[1].split(',').map(String::from).collect();
    cells[last] = String::new();
    rows[1] = cells.join(",");
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "m.csv", &(rows.join("\n") + "\n"));
    let o = divscore(&["cwals", "--dataset", path(&p), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("112A"));
    assert_eq!(stdout(&o).lines().count(), 28);
}

#[test]
fn correlate_disjoint_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(tmp.path(), "a.csv", "iso,x\neng,1\ndeu,2\nfra,3\n");
    let b = write(tmp.path(), "b.csv", "iso,y\ntur,1\nfin,2\nvie,3\n");
    let o = divscore(&[
        "correlate",
        "--dataset",
        path(&a),
        "--reference",
        path(&b),
        "--x",
        "x",
        "--y",
        "y",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no overlapping languages"));

    let c = write(tmp.path(), "c.csv", "iso,y\neng,1\ndeu,2\nfra,3\ntur,9\n");
    let o = divscore(&[
        "correlate",
        "--dataset",
        path(&a),
        "--reference",
        path(&c),
        "--x",
        "x",
        "--y",
        "y",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("tur"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 3);
    assert_eq!(v["rho"], 1.0);
}

#[test]
fn families_small_list_with_unknown() {
    let tmp = tempfile::tempdir().unwrap();
    let list = write(
        tmp.path(),
        "l.txt",
        "English\nGerman\nFinnish\nKlingonese\n",
    );
    let o = divscore(&["families", "--dataset", path(&list)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("Klingonese"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["family_count"], 2);
    assert_eq!(v["languages"], 3);
}

#[test]
fn families_bundled_mbert() {
    let o = divscore(&["families"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["languages"], 97);
    assert_eq!(v["family_count"], 15);
}

#[test]
fn usage_errors_exit_2() {
    let o = divscore(&["score"]);
    assert_eq!(o.status.code(), Some(2));
    let o = divscore(&["profile", "--format", "xml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = divscore(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("correlate"));
}

#[test]
fn svg_unsupported_for_tables() {
    let o = divscore(&["cwals", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unsupported format"));
}
