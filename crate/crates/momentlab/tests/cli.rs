use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use momentlab_core::arith::{parse_rational, rat};
use momentlab_core::Rational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;
use tempfile::TempDir;

fn momentlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentlab"))
        .args(args)
        .env_remove("MOMENTLAB_DEPTH_CAP")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_json(path: &Path, v: &Value) {
    fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
}

fn q(v: &Value) -> Rational {
    parse_rational(v.as_str().expect("rational string")).unwrap()
}

fn run_to_file(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", path.to_str().unwrap()]);
    let out = momentlab(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn verify(sub: &str, path: &Path) -> i32 {
    code(&momentlab(&[sub, path.to_str().unwrap()]))
}

fn is_power_of_two(q: &num_bigint::BigInt) -> bool {
    q > &num_bigint::BigInt::zero() && (q & (q - 1u32)).is_zero()
}

#[test]
fn check_reports_interior_with_pivots() {
    let v = stdout_json(&momentlab(&["moments", "check", "--seq", "1,1/2,1/3"]));
    assert_eq!(v["verdict"], "interior");
    // det [[1, 1/2], [1/2, 1/3]] = 1/12 and t1 - t2 = 1/6
    assert_eq!(v["pivots_lower"], serde_json::json!(["1", "1/12"]));
    assert_eq!(v["pivots_upper"], serde_json::json!(["1/6"]));
    assert!(v.get("witness").is_none());
}

#[test]
fn check_outside_has_witness() {
    let v = stdout_json(&momentlab(&["moments", "check", "--seq", "1,1/2,1/5"]));
    assert_eq!(v["verdict"], "outside");
    let w = &v["witness"];
    let dir: Vec<Rational> = w["direction"].as_array().unwrap().iter().map(q).collect();
    // vᵀ [[1, 1/2], [1/2, 1/5]] v recomputed by hand
    let value = &dir[0] * &dir[0] + rat(1, 1) * &dir[0] * &dir[1] + rat(1, 5) * &dir[1] * &dir[1];
    assert_eq!(value, q(&w["value"]));
    assert!(value < Rational::zero());
}

#[test]
fn extend_matches_closed_form() {
    let v = stdout_json(&momentlab(&["moments", "extend", "--seq", "1,1/2,3/8"]));
    assert_eq!(v["lo"], "9/32");
    assert_eq!(v["hi"], "11/32");
    let v = stdout_json(&momentlab(&["moments", "extend", "--seq", "1,1/2"]));
    assert_eq!((q(&v["lo"]), q(&v["hi"])), (rat(1, 4), rat(1, 2)));
}

#[test]
fn extend_of_boundary_point_is_an_error() {
    assert_eq!(
        code(&momentlab(&["moments", "extend", "--seq", "1,1/2,1/4"])),
        1
    );
}

#[test]
fn gen_matches_measure_moments() {
    let v = stdout_json(&momentlab(&[
        "moments",
        "gen",
        "--measure",
        "beta:2,3",
        "--n",
        "3",
    ]));
    // Beta(2,3) moments: prod_{i<k} (2+i)/(5+i)
    let expected = ["1", "2/5", "1/5", "4/35"];
    assert_eq!(v["moments"], serde_json::json!(expected));
}

#[test]
fn random_gen_is_seeded() {
    let a = momentlab(&["moments", "gen", "--random", "--seed", "11", "--n", "5"]);
    let b = momentlab(&["moments", "gen", "--random", "--seed", "11", "--n", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let seeds: Vec<Vec<u8>> = (0..6)
        .map(|s| {
            momentlab(&[
                "moments",
                "gen",
                "--random",
                "--seed",
                &s.to_string(),
                "--n",
                "5",
            ])
            .stdout
        })
        .collect();
    assert!(seeds.windows(2).any(|w| w[0] != w[1]));
}

#[test]
fn perturb_meets_its_contract() {
    let dir = TempDir::new().unwrap();
    let args = [
        "perturb",
        "--measure",
        "lebesgue",
        "--m",
        "4",
        "--eps",
        "1/64",
        "--group",
        "Z[1/2]",
        "--upto",
        "16",
    ];
    let path = run_to_file(&dir, "p.json", &args);
    let v = read_json(&path);
    let t: Vec<Rational> = v["sequence"].as_array().unwrap().iter().map(q).collect();
    assert_eq!(t.len(), 17);
    assert!(t[0].is_one());
    assert!(t.iter().all(|x| is_power_of_two(x.denom())));
    for (j, x) in t.iter().enumerate().take(5).skip(1) {
        let gap = x - rat(1, j as i64 + 1);
        assert!(gap.abs() < rat(1, 64), "t{j}");
    }
    assert!(t[2] < t[1]);
    assert_eq!(v["certificates"].as_array().unwrap().len(), 16);
    assert_eq!(v["violations"], serde_json::json!([]));
    assert_eq!(verify("perturb-verify", &path), 0);

    let again = run_to_file(&dir, "p2.json", &args);
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn tampered_perturbation_fails() {
    let dir = TempDir::new().unwrap();
    let path = run_to_file(
        &dir,
        "p.json",
        &[
            "perturb",
            "--seq",
            "1,1/2,1/3,1/4",
            "--m",
            "3",
            "--eps",
            "1/32",
            "--group",
            "Z[1/3]",
            "--upto",
            "6",
        ],
    );
    assert_eq!(verify("perturb-verify", &path), 0);
    let original = read_json(&path);

    let mut v = original.clone();
    v["sequence"][4] = Value::from("1/7");
    write_json(&path, &v);
    assert_eq!(verify("perturb-verify", &path), 2);

    let mut v = original.clone();
    v["certificates"][2]["pivots_lower"][0] = Value::from("2");
    write_json(&path, &v);
    assert_eq!(verify("perturb-verify", &path), 2);

    let mut v = original.clone();
    v["deviations"][0] = Value::from("0");
    write_json(&path, &v);
    assert_eq!(verify("perturb-verify", &path), 2);

    let mut v = original;
    v["sequence"][2] = Value::from("one third");
    write_json(&path, &v);
    assert_eq!(verify("perturb-verify", &path), 1);
}

#[test]
fn independent_terms_have_full_rank() {
    let dir = TempDir::new().unwrap();
    let path = run_to_file(
        &dir,
        "pi.json",
        &[
            "perturb-independent",
            "--measure",
            "lebesgue",
            "--m",
            "2",
            "--eps",
            "1/256",
            "--group",
            "gen:sqrt2,sqrt3,sqrt5,sqrt7",
            "--upto",
            "4",
        ],
    );
    let v = read_json(&path);
    assert_eq!(v["ranks"], serde_json::json!([1, 2, 3, 4, 5]));
    assert_eq!(v["report"]["faithful"], true);
    assert_eq!(v["report"]["injective"], true);
    // term n carries the n-th square root
    for (n, sym) in [(1, "sqrt2"), (2, "sqrt3"), (3, "sqrt5"), (4, "sqrt7")] {
        assert!(v["sequence"][n]["coords"].get(sym).is_some());
    }
    assert_eq!(verify("verify", &path), 0);

    let mut w = v.clone();
    w["sequence"][3]["coords"] = serde_json::json!({"1": "1/5"});
    write_json(&path, &w);
    assert_eq!(verify("perturb-verify", &path), 2);
}

#[test]
fn independent_mode_needs_generated_group() {
    let out = momentlab(&[
        "perturb-independent",
        "--measure",
        "lebesgue",
        "--m",
        "2",
        "--eps",
        "1/64",
        "--group",
        "Z[1/2]",
        "--upto",
        "3",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn pascal_json_and_csv_agree() {
    let json = stdout_json(&momentlab(&[
        "pascal",
        "--measure",
        "beta:2,3",
        "--depth",
        "12",
        "--trace-level",
        "5",
    ]));
    let table: Vec<Vec<Rational>> = json["table"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(q).collect())
        .collect();
    assert_eq!(table.len(), 13);
    for n in 0..12 {
        for k in 0..=n {
            assert_eq!(&table[n + 1][k] + &table[n + 1][k + 1], table[n][k]);
        }
    }
    assert_eq!(json["trace"]["total"], "1");
    assert_eq!(json["report"]["faithful"], true);

    let csv = momentlab(&[
        "pascal",
        "--measure",
        "beta:2,3",
        "--depth",
        "12",
        "--trace-level",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&csv), 0);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("section,n,k,value"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let (n, k): (usize, usize) = (cols[1].parse().unwrap(), cols[2].parse().unwrap());
        match cols[0] {
            "table" => assert_eq!(parse_rational(cols[3]).unwrap(), table[n][k]),
            "trace" => assert_eq!(parse_rational(cols[3]).unwrap(), table[5][k]),
            other => panic!("section {other}"),
        }
        rows += 1;
    }
    assert_eq!(rows, 13 * 14 / 2 + 6);
}

#[test]
fn trace_of_dirac_half() {
    let v = stdout_json(&momentlab(&[
        "trace",
        "--measure",
        "dirac:1/2",
        "--level",
        "4",
    ]));
    assert_eq!(
        v["values"],
        serde_json::json!(["1/16", "1/16", "1/16", "1/16", "1/16"])
    );
    assert_eq!(
        v["multiplicities"],
        serde_json::json!(["1", "4", "6", "4", "1"])
    );
    assert_eq!(v["total"], "1");
}

#[test]
fn oracle_witness_reproduces_moments() {
    let dir = TempDir::new().unwrap();
    let path = run_to_file(
        &dir,
        "o.json",
        &[
            "oracle",
            "--measure",
            "lebesgue",
            "--n",
            "3",
            "--grid",
            "16",
        ],
    );
    let v = read_json(&path);
    assert_eq!(v["feasible"], true);
    let w: Vec<Rational> = v["witness"].as_array().unwrap().iter().map(q).collect();
    for (n, target) in [rat(1, 1), rat(1, 2), rat(1, 3), rat(1, 4)]
        .iter()
        .enumerate()
    {
        let moment = w.iter().enumerate().fold(Rational::zero(), |acc, (i, wi)| {
            acc + wi * num_traits::pow(rat(i as i64, 16), n)
        });
        assert!((moment - target).abs() <= rat(1, 1024));
    }
    assert_eq!(verify("verify", &path), 0);

    let mut t = v.clone();
    t["witness"][0] = Value::from("1");
    write_json(&path, &t);
    assert_eq!(verify("verify", &path), 2);

    let outside = stdout_json(&momentlab(&[
        "oracle",
        "--seq",
        "1,1/2,1/5",
        "--grid",
        "16",
    ]));
    assert_eq!(outside["feasible"], false);
    assert!(outside["witness"].is_null());
}

#[test]
fn every_kind_round_trips() {
    let dir = TempDir::new().unwrap();
    let runs: [&[&str]; 6] = [
        &[
            "moments",
            "gen",
            "--measure",
            "atoms:1/4@1/2,3/4@1/2",
            "--n",
            "6",
        ],
        &["moments", "check", "--seq", "1,2/3,2/3,2/3"],
        &["moments", "extend", "--measure", "lebesgue", "--n", "5"],
        &["pascal", "--seq", "1,1/2,1/3,1/4", "--trace-level", "2"],
        &["trace", "--measure", "beta:1,4", "--level", "6"],
        &[
            "oracle",
            "--seq",
            "1,1/2,1/3",
            "--grid",
            "8",
            "--tol",
            "1/4096",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let path = run_to_file(&dir, &format!("a{i}.json"), args);
        assert_eq!(verify("verify", &path), 0, "{args:?}");
        let mut v = read_json(&path);
        let key = ["moments", "moments", "hi", "depth", "total", "grid"][i];
        v[key] = match &v[key] {
            Value::Array(xs) => {
                let mut xs = xs.clone();
                xs[1] = Value::from("1/9");
                Value::Array(xs)
            }
            Value::Number(_) => Value::from(v[key].as_u64().unwrap() + 1),
            _ => Value::from("7/9"),
        };
        write_json(&path, &v);
        assert_ne!(verify("verify", &path), 0, "{args:?}");
    }
}

#[test]
fn embedding_round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let path = run_to_file(&dir, "c.json", &["cantor-embed", "--levels", "5"]);
    assert_eq!(verify("cantor-verify", &path), 0);
    let original = read_json(&path);
    assert_eq!(original["N"], 5);
    assert_eq!(original["violations"], serde_json::json!([]));
    let leaves = original["functions"].as_array().unwrap().clone();
    assert_eq!(
        leaves[0],
        serde_json::json!({"n": 0, "w": "", "value": "1"})
    );

    // off-lattice value
    let mut v = original.clone();
    let last = leaves.len() - 1;
    let bumped = q(&leaves[last]["value"]) + rat(1, 7);
    v["functions"][last]["value"] = Value::from(bumped.to_string());
    write_json(&path, &v);
    assert_eq!(verify("cantor-verify", &path), 2);

    // g2 collapsed onto g1
    let mut v = original.clone();
    let g1: Vec<Value> = leaves.iter().filter(|l| l["n"] == 1).cloned().collect();
    let mut functions: Vec<Value> = leaves.iter().filter(|l| l["n"] != 2).cloned().collect();
    functions.extend(g1.iter().map(|l| {
        let mut l = l.clone();
        l["n"] = Value::from(2);
        l
    }));
    v["functions"] = Value::Array(functions);
    write_json(&path, &v);
    assert_eq!(verify("cantor-verify", &path), 2);

    // a missing leaf breaks the prefix code
    let mut v = original.clone();
    v["functions"].as_array_mut().unwrap().remove(1);
    write_json(&path, &v);
    assert_eq!(verify("cantor-verify", &path), 2);

    let mut v = original.clone();
    v["depth"] = Value::from(1);
    write_json(&path, &v);
    assert_eq!(verify("cantor-verify", &path), 2);

    fs::write(&path, "{\"kind\": \"cantor-embedding\", \"N\": ").unwrap();
    assert_eq!(verify("cantor-verify", &path), 1);
}

#[test]
fn embedding_is_byte_stable() {
    let a = momentlab(&["cantor-embed", "--levels", "4"]);
    let b = momentlab(&["cantor-embed", "--levels", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn depth_cap_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_momentlab"))
        .args(["cantor-embed", "--levels", "5"])
        .env("MOMENTLAB_DEPTH_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("depth cap 2"));
    let flag = momentlab(&["cantor-embed", "--levels", "5", "--depth-cap", "2"]);
    assert_eq!(code(&flag), 1);
}

#[test]
fn wrong_kind_for_verifier() {
    let dir = TempDir::new().unwrap();
    let path = run_to_file(&dir, "m.json", &["moments", "check", "--seq", "1,1/2"]);
    assert_eq!(verify("cantor-verify", &path), 1);
    assert_eq!(verify("perturb-verify", &path), 1);
}

#[test]
fn usage_errors_exit_one() {
    let cases: [&[&str]; 8] = [
        &["bogus"],
        &["moments", "check"],
        &[
            "moments",
            "check",
            "--seq",
            "1,1/2",
            "--measure",
            "lebesgue",
        ],
        &["moments", "check", "--measure", "lebesgue"],
        &["moments", "check", "--seq", "2,1"],
        &[
            "perturb",
            "--measure",
            "lebesgue",
            "--m",
            "2",
            "--eps",
            "1/8",
            "--group",
            "Z[1/4]",
            "--upto",
            "3",
        ],
        &["pascal", "--measure", "beta:0,1", "--depth", "3"],
        &["cantor-verify", "/nonexistent/cert.json"],
    ];
    for args in cases {
        assert_eq!(code(&momentlab(args)), 1, "{args:?}");
    }
    assert_eq!(code(&momentlab(&["--help"])), 0);
    assert_eq!(code(&momentlab(&["moments", "--help"])), 0);
}
