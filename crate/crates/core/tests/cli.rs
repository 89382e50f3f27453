use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ader1d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ader1d")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr_lines(o: &Output) -> Vec<String> {
    String::from_utf8_lossy(&o.stderr).lines().map(str::to_string).collect()
}

fn csv_column(path: &Path, col: usize) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn rp1_run_writes_400_positive_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "rp1.toml",
        "[problem]\nname = \"rp1\"\n[scheme]\nkind = \"fv\"\nM = 3\ncriterion = true\n[run]\nt_final = 0.14\nn_cells = 400\n",
    );
    let out = dir.path().join("out");
    let o = ader1d(&["run", &cfg, "--output", out.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let rho = csv_column(&out.join("final.csv"), 1);
    assert_eq!(rho.len(), 400);
    assert!(rho.iter().all(|&r| r > 0.0));
    let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert!((diag["final_time"].as_f64().unwrap() - 0.14).abs() < 1e-14);
    assert!(diag["min_density"].as_f64().unwrap() > 0.0);
    assert!(diag["min_pressure"].as_f64().unwrap() > 0.0);
    assert!(diag["work_units"].as_u64().unwrap() > 0);
}

#[test]
fn zero_final_time_reproduces_the_initial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[problem]\nname = \"euler_contact_sine\"\n[run]\nt_final = 0.0\nn_cells = 20\n");
    let out = dir.path().join("o");
    assert!(ader1d(&["run", &cfg, "--output", out.to_str().unwrap(), "--quiet"]).status.success());
    let a = fs::read(out.join("initial.csv")).unwrap();
    let b = fs::read(out.join("final.csv")).unwrap();
    assert_eq!(a, b);
    let header = String::from_utf8(a).unwrap();
    assert!(header.starts_with("x,rho,u,p\n"));
}

#[test]
fn unknown_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[problem]\nname = \"rp1\"\n[scheme]\norder = 4\n[run]\nt_final = 0.1\nn_cells = 10\n");
    let o = ader1d(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let lines = stderr_lines(&o);
    assert_eq!(lines.len(), 1, "{lines:?}");
    assert!(lines[0].contains("order"));
}

#[test]
fn missing_file_and_bad_flags_exit_2() {
    let o = ader1d(&["run", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o).len(), 1);
    let o = ader1d(&["launch", "x.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o).len(), 1);
}

#[test]
fn convergence_needs_three_meshes_and_a_smooth_problem() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "a.toml", "[problem]\nname = \"advection_sine\"\n[run]\nt_final = 0.1\nmeshes = [16]\n");
    assert_eq!(ader1d(&["convergence", &one]).status.code(), Some(2));
    let rp = write(dir.path(), "b.toml", "[problem]\nname = \"rp2\"\n[run]\nt_final = 0.1\nmeshes = [16, 32, 64]\n");
    let o = ader1d(&["convergence", &rp]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_lines(&o)[0].contains("Riemann"));
}

#[test]
fn convergence_table_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[problem]\nname = \"advection_sine\"\n[scheme]\nvariant = \"classic_fixed\"\nM = 2\n[run]\nt_final = 0.25\nmeshes = [16, 32, 64]\n",
    );
    let out = dir.path().join("o");
    let o = ader1d(&["convergence", &cfg, "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,l1,l2,linf,order_l1,order_l2,order_linf");
    assert!(lines[1].ends_with(",,,"));
    let order: f64 = lines[3].split(',').nth(5).unwrap().parse().unwrap();
    assert!(order > 2.6, "{order}");
}

#[test]
fn compare_at_degree_zero_does_equal_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[problem]\nname = \"advection_sine\"\n[scheme]\nM = 0\n[run]\nt_final = 0.2\nn_cells = 32\n");
    let out = dir.path().join("o");
    assert!(ader1d(&["compare", &cfg, "--output", out.to_str().unwrap(), "--quiet"]).status.success());
    let text = fs::read_to_string(out.join("compare.csv")).unwrap();
    let ratio_row = text.lines().last().unwrap();
    assert!(ratio_row.starts_with("adaptive_u/classic,"));
    let work: f64 = ratio_row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((0.9..=1.1).contains(&work), "{work}");
}

#[test]
fn serial_runs_are_byte_stable_and_threads_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[problem]\nname = \"burgers_sine\"\n[scheme]\nkind = \"pnpm\"\nN = 1\nM = 3\n[run]\nt_final = 0.1\nn_cells = 50\n",
    );
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = ader1d(&["run", &cfg, "--output", out.to_str().unwrap(), "--quiet", "--threads", threads]);
        assert!(o.status.success());
        out.join("final.csv")
    };
    let (a, b, c) = (run("a", "1"), run("b", "1"), run("c", "4"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    for (x, y) in csv_column(&a, 1).iter().zip(csv_column(&c, 1)) {
        assert!((x - y).abs() <= 1e-13 * x.abs());
    }
}

#[test]
fn unconverged_classic_predictor_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[problem]\nname = \"euler_contact_sine\"\n[scheme]\nvariant = \"classic_tolerance\"\ntolerance = 1e-300\n[run]\nt_final = 0.1\nn_cells = 8\n",
    );
    let o = ader1d(&["run", &cfg, "--output", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let lines = stderr_lines(&o);
    assert_eq!(lines.len(), 1);
    assert!(lines[0].starts_with("error[runtime]"));
}
