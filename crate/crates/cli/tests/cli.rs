use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use graphlift_sat::{read_cnf, solver_from_cnf, write_assignment, Budget, SolverConfig, Status};

fn graphlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphlift"))
        .args(args)
        .env_remove("GRAPHLIFT_SEED")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn gen(dir: &Path, family: &str, params: &str, name: &str) -> String {
    let out = p(dir, name);
    let o = graphlift(&["gen", "--family", family, "--params", params, "-o", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn gen_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let h = gen(dir.path(), "hanoi", "3,3", "hanoi.json");
    let o = graphlift(&["stats", &h]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "hanoi: 1 labels, 27 nodes, 78 edges, 0 unvisited, 0 ambiguous");
}

#[test]
fn sample_and_noise_repeat_with_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "blocks2", "4", "b.json");
    for (cmd, flag) in [("sample", "-p"), ("noise", "-q")] {
        let a = graphlift(&[cmd, &g, flag, "40", "--seed", "9"]);
        let b = graphlift(&[cmd, &g, flag, "40", "--seed", "9"]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
    let s = p(dir.path(), "s.json");
    assert_eq!(code(&graphlift(&["sample", &g, "-p", "20", "-o", &s])), 0);
    // ceil(0.2 * 240)
    assert!(stdout(&graphlift(&["stats", &s])).contains(" 48 edges"));
}

#[test]
fn check_iso_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "grid-v0", "3,4", "a.json");
    let b = gen(dir.path(), "grid-v0", "4,3", "b.json");
    let c = gen(dir.path(), "grid-v0", "2,6", "c.json");
    assert_eq!(code(&graphlift(&["check-iso", &a, &b])), 0);
    assert_eq!(code(&graphlift(&["check-iso", &a, &c])), 1);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "blocks2", "2", "g.json");
    assert_eq!(code(&graphlift(&["gen", "--family", "nope", "--params", "2"])), 2);
    assert_eq!(code(&graphlift(&["learn", &g, "--budget", "5x"])), 2);
    assert_eq!(code(&graphlift(&["learn", &g, "--objects", "3..1"])), 2);
    assert_eq!(code(&graphlift(&["learn", &g, "--total", "1000c"])), 2);
    assert_eq!(code(&graphlift(&["stats", &p(dir.path(), "missing.json")])), 2);
    assert_eq!(code(&graphlift(&["sample", &g, "-p", "0"])), 2);
}

#[test]
fn learn_expand_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "blocks2", "2", "blocks2-2.json");
    let model = p(dir.path(), "m.txt");
    let csv = p(dir.path(), "r.csv");
    let o = graphlift(&["learn", &g, "--objects", "1..3", "--budget", "5000000c", "-o", &model, "--report", &csv]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(&csv).unwrap();
    assert!(report.starts_with("graph,objects,status"));
    assert_eq!(report.lines().filter(|l| l.ends_with(",1")).count(), 1);

    let e = p(dir.path(), "e.json");
    assert_eq!(code(&graphlift(&["expand", &model, "-o", &e])), 0);
    assert_eq!(code(&graphlift(&["check-iso", &e, &g])), 0);
    let v = graphlift(&["verify", &model, &g, "--objects", "1..3", "--budget", "5000000c"]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).contains("sat"));
}

#[test]
fn emit_cnf_and_import_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "blocks2", "2", "g.json");
    let cnf = p(dir.path(), "f.cnf");
    let vm = p(dir.path(), "f.map");
    let o = graphlift(&["emit-cnf", &g, "--objects", "2", "-o", &cnf, "--varmap", &vm]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let f = read_cnf(fs::read(&cnf).unwrap().as_slice()).unwrap();
    let mut s = solver_from_cnf(&f, SolverConfig::default());
    assert_eq!(s.solve(&[], &Budget::conflicts(5_000_000)), Status::Sat);
    let mut text = b"s SATISFIABLE\n".to_vec();
    write_assignment(s.model(), &mut text).unwrap();
    let a = p(dir.path(), "f.sol");
    fs::write(&a, text).unwrap();

    let model = p(dir.path(), "m.txt");
    let o = graphlift(&["import-assignment", &vm, &a, "-o", &model]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("cost ("));
    let e = p(dir.path(), "e.json");
    assert_eq!(code(&graphlift(&["expand", &model, "-o", &e])), 0);
    assert_eq!(code(&graphlift(&["check-iso", &e, &g])), 0);
}
