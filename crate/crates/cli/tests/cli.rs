use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ngon(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngon"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn built(dir: &Path, family: &str, q: &str, name: &str) -> PathBuf {
    let o = ngon(&["build", family, q, "-o", name], dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(name)
}

#[test]
fn plane_verifies_as_a_generalized_triangle() {
    let dir = tempfile::tempdir().unwrap();
    built(dir.path(), "--plane", "2", "pg22.pg");
    let o = ngon(&["verify", "--input", "pg22.pg", "--gon", "3", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "GeneralizedNGon");
    assert_eq!(v["witnesses"].as_array().unwrap().len(), 0);
}

#[test]
fn plane_fails_as_a_quadrangle_with_a_triangle_witness() {
    let dir = tempfile::tempdir().unwrap();
    built(dir.path(), "--plane", "2", "pg22.pg");
    let o = ngon(&["verify", "--input", "pg22.pg", "--gon", "4"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("Fails"), "{text}");
    let witness = text.lines().find(|l| l.contains("ordinary 3-gon")).expect("triangle witness");
    // closed 6-step chain: 7 vertices
    assert_eq!(witness.split(": ").last().unwrap().split_whitespace().count(), 7);
}

#[test]
fn quadrangle_cell_sizes_as_json() {
    let dir = tempfile::tempdir().unwrap();
    built(dir.path(), "--quadrangle", "2", "w2.pg");
    let o = ngon(&["schubert", "--input", "w2.pg", "--gon", "4", "--flag", "0", "0", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let sizes = |key: &str| -> Vec<u64> {
        v["sizes"][key].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
    };
    assert_eq!(sizes("points"), [1, 2, 4, 8]);
    assert_eq!(sizes("lines"), [1, 2, 4, 8]);
    assert_eq!(sizes("flags"), [1, 2, 2, 4, 4, 8, 8, 16]);
}

#[test]
fn json_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    built(dir.path(), "--quadrangle", "2", "w2.pg");
    let args = ["schubert", "--input", "w2.pg", "--coordinatize", "--separate", "--json"];
    let a = ngon(&args, dir.path());
    let b = ngon(&["--threads", "1", args[0], args[1], args[2], args[3], args[4], args[5]], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["separations"].as_array().unwrap().iter().all(|r| r["verified"] == true));
}

#[test]
fn opposite_lemma_and_inference() {
    let dir = tempfile::tempdir().unwrap();
    built(dir.path(), "--quadrangle", "2", "w2.pg");
    let o = ngon(&["verify", "--input", "w2.pg", "--infer", "--opposite-lemma", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["n"], 4);
    assert_eq!(v["opposite_lemma"]["holds"], true);
}

#[test]
fn algebra_sweep_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    built(dir.path(), "--plane", "3", "pg23.pg");
    let o = ngon(&["algebra", "--input", "pg23.pg", "--sweep", "--tables", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v["reports"].as_array().unwrap().len() > 1);
    assert_eq!(v["tables"].as_array().unwrap().len(), 4);
    let o = ngon(&["algebra", "--input", "pg23.pg", "--frame", "p0", "l0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn projectivity_group_of_the_fano_plane() {
    let dir = tempfile::tempdir().unwrap();
    built(dir.path(), "--plane", "2", "pg22.pg");
    let o = ngon(&["proj", "--input", "pg22.pg", "--at", "p0", "--group", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["group"]["order"], 6);
    assert_eq!(v["group"]["sharply"], 3);
    let o = ngon(&["proj", "--input", "pg22.pg", "--at", "p0", "--group", "--cap", "3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resource limit"));
}

#[test]
fn coset_build_from_a_group_file() {
    let dir = tempfile::tempdir().unwrap();
    // D_3 with r^i s^j at index i + 3j; A = {1, s}, B = {1, rs}
    let mut text = String::from("order 6\n");
    for a in 0..6usize {
        let row: Vec<String> = (0..6usize)
            .map(|b| {
                let (i, j) = (a % 3, a / 3);
                let (k, l) = (b % 3, b / 3);
                let i2 = if j == 0 { (i + k) % 3 } else { (i + 3 - k) % 3 };
                (i2 + 3 * ((j + l) % 2)).to_string()
            })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text.push_str("A: 0 3\nB: 0 4\n");
    std::fs::write(dir.path().join("d3.grp"), text).unwrap();
    let o = ngon(&["build", "--coset", "d3.grp", "-o", "d3.pg", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["gon"], 3);
    let o = ngon(&["info", "--input", "d3.pg", "--json"], dir.path());
    let v = json(&o);
    assert_eq!((v["girth"].clone(), v["diameter"].clone(), v["thick"].clone()), (6.into(), 3.into(), false.into()));
}

#[test]
fn usage_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ngon(&["verify", "--input", "missing.pg"], dir.path()).status.code(), Some(2));
    assert_eq!(ngon(&["build"], dir.path()).status.code(), Some(2));
    assert_eq!(ngon(&["frobnicate"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.pg"), "gon 3\npoints 1\nlines 1\nflags\n0 9\n").unwrap();
    let o = ngon(&["info", "--input", "bad.pg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.pg"));
}

#[test]
fn build_without_output_prints_the_polygon_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = ngon(&["build", "--dihedral", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("gon 4"), "{text}");
    assert_eq!(text.lines().filter(|l| l.split_whitespace().count() == 2 && !l.starts_with(char::is_alphabetic)).count(), 8);
}
