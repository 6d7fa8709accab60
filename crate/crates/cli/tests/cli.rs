use std::path::Path;
use std::process::{Command, Output};

use xpcube::inequalities::metric_xp;
use xpcube::torus::Generator;
use xpcube::{InequalityReport, Sampling, Scaling};

fn xpcube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xpcube"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column<'a>(header: &[String], rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].as_str()).collect()
}

#[test]
fn verify_walsh_passes() {
    let out = xpcube(&["verify", "walsh", "--n-max", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_all_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "4", "1"] {
        let path = dir.path().join(format!("report{}.json", files.len()));
        let p = path.to_str().unwrap();
        let out = xpcube(&["--threads", threads, "verify", "all", "--seed", "42", "--json", p]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        files.push((
            std::fs::read(&path).unwrap(),
            std::fs::read(format!("{p}.manifest.json")).unwrap(),
        ));
    }
    assert!(files.windows(2).all(|w| w[0].0 == w[1].0));
    let manifests: Vec<String> = files.iter().map(|f| String::from_utf8(f.1.clone()).unwrap()).collect();
    assert!(manifests[0].contains("\"seed\": 42"));
    assert!(!manifests[0].contains("timestamp"));
}

#[test]
fn corrupted_laplacian_is_caught() {
    let out = xpcube(&["verify", "inequalities-exact", "--fault", "corrupt-laplacian"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("jensen_contraction"));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["jensen_contraction"]);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(xpcube(&["verify", "spectral"]).status.code(), Some(2));
}

#[test]
fn eval_linear_reports_a_ratio() {
    let out = xpcube(&["eval", "linear-xp", "--n", "8", "--k", "2", "--p", "4", "--a", "ones"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: InequalityReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.ratio > 0.0 && report.ratio.is_finite());
    assert!(report.wall_time_secs.is_none());
}

#[test]
fn eval_metric_matches_the_library_bitwise() {
    let out = xpcube(&[
        "eval",
        "metric-xp",
        "--r",
        "4",
        "--n",
        "2",
        "--k",
        "1",
        "--p",
        "2",
        "--f",
        "cosine-sum",
        "--mode",
        "exact",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let cli: InequalityReport = serde_json::from_str(&stdout(&out)).unwrap();
    let f = Generator::CosineSum { coeffs: vec![1.0; 2] }.build(4, 2).unwrap();
    let mut lib = metric_xp(&f, 2.0, 1, Sampling::exact(), Scaling::Sharp).unwrap();
    lib.wall_time_secs = None;
    assert_eq!(cli.lhs.to_bits(), lib.lhs.to_bits());
    assert_eq!(cli.rhs.to_bits(), lib.rhs.to_bits());
    assert_eq!(cli.ratio.to_bits(), lib.ratio.to_bits());
    assert_eq!(
        serde_json::to_string(&cli).unwrap(),
        serde_json::to_string(&lib).unwrap()
    );
}

#[test]
fn chaos_rejects_a_constant_input() {
    let out = xpcube(&[
        "eval",
        "chaos-xp",
        "--n",
        "4",
        "--k",
        "2",
        "--p",
        "4",
        "--h",
        "constant:1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("mean-zero"));
}

#[test]
fn monte_carlo_without_seed_is_refused() {
    let out = xpcube(&[
        "eval",
        "metric-xp",
        "--r",
        "4",
        "--n",
        "2",
        "--k",
        "1",
        "--p",
        "2",
        "--f",
        "cosine-sum",
        "--mode",
        "mc",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--seed"));
    let ok = xpcube(&[
        "eval",
        "metric-xp",
        "--r",
        "4",
        "--n",
        "2",
        "--k",
        "1",
        "--p",
        "2",
        "--f",
        "cosine-sum",
        "--mode",
        "mc",
        "--seed",
        "3",
        "--budget",
        "2000",
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert_eq!(
        stdout(&ok),
        stdout(&xpcube(&[
            "eval",
            "metric-xp",
            "--r",
            "4",
            "--n",
            "2",
            "--k",
            "1",
            "--p",
            "2",
            "--f",
            "cosine-sum",
            "--mode",
            "mc",
            "--seed",
            "3",
            "--budget",
            "2000"
        ]))
    );
}

#[test]
fn malformed_input_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, "{\"n\": 2, \"repr\": \"values\", \"data\": [1.0]}").unwrap();
    let out = xpcube(&["eval", "lust-piquard", "--p", "4", "--h", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("malformed"));
}

#[test]
fn eval_rejects_ranges_and_empty_grids() {
    assert_eq!(
        xpcube(&["eval", "linear-xp", "--n", "4..6", "--k", "2", "--p", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        xpcube(&["sweep", "linear-xp", "--n", "3", "--k", "4..5", "--p", "4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn geometry_exponents_are_constant_across_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("geo.csv");
    let out = xpcube(&[
        "geometry",
        "--p",
        "4",
        "--q",
        "3",
        "--n",
        "64..4096",
        "--m",
        "1..64",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = read_csv(&path);
    assert_eq!(rows.len(), (4096 - 64 + 1) * 64);
    let eighteenth = (1.0f64 / 18.0).to_string();
    let third = (1.0f64 / 3.0).to_string();
    assert!(column(&header, &rows, "n_exponent").iter().all(|v| *v == eighteenth));
    assert!(column(&header, &rows, "m_exponent").iter().all(|v| *v == third));
    let ns = column(&header, &rows, "n");
    let ms = column(&header, &rows, "m");
    let keys: Vec<(u64, u64)> = ns
        .iter()
        .zip(&ms)
        .map(|(n, m)| (n.parse().unwrap(), m.parse().unwrap()))
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    assert!(Path::new(&format!("{}.manifest.json", path.display())).exists());
}

#[test]
fn linear_search_at_two_finds_the_closed_form() {
    let out = xpcube(&["search", "--p", "2", "--rule", "half", "--n", "4..10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<Vec<String>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for v in column(&header, &rows, "best_ratio") {
        assert!((v.parse::<f64>().unwrap() - 0.5f64.sqrt()).abs() < 1e-6, "{v}");
    }
}

#[test]
fn one_point_sweep_equals_eval() {
    let dir = tempfile::tempdir().unwrap();
    let eval_csv = dir.path().join("eval.csv");
    let sweep_csv = dir.path().join("sweep.csv");
    let args = ["linear-xp", "--n", "6", "--k", "3", "--p", "3", "--a", "gaussian:5"];
    let e = xpcube(&[&["eval"], &args[..], &["--csv", eval_csv.to_str().unwrap()]].concat());
    let s = xpcube(&[&["sweep"], &args[..], &["--csv", sweep_csv.to_str().unwrap()]].concat());
    assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
    assert_eq!(s.status.code(), Some(0), "{}", stderr(&s));
    let (eh, er) = read_csv(&eval_csv);
    let (sh, sr) = read_csv(&sweep_csv);
    assert_eq!(eh, sh);
    assert_eq!(er, sr);
    assert_eq!(er.len(), 1);

    let again = xpcube(&[&["eval"], &args[..], &["--csv", eval_csv.to_str().unwrap()]].concat());
    assert_eq!(again.status.code(), Some(0));
    let (_, appended) = read_csv(&eval_csv);
    assert_eq!(appended.len(), 2);
    assert_eq!(appended[0], appended[1]);
}

#[test]
fn sweep_rows_follow_grid_order() {
    let out = xpcube(&["sweep", "linear-xp", "--n", "3..5", "--k", "1..4", "--p", "2,4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<Vec<String>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    let key = |i: usize| -> (u32, u32, f64) {
        (
            column(&header, &rows, "n")[i].parse().unwrap(),
            column(&header, &rows, "k")[i].parse().unwrap(),
            column(&header, &rows, "p")[i].parse().unwrap(),
        )
    };
    // k > n is skipped: n = 3 has k in 1..=3
    assert_eq!(rows.len(), 2 * (3 + 4 + 4));
    assert!((1..rows.len()).all(|i| key(i - 1) < key(i)));
}

fn help(sub: &str) -> String {
    let out = xpcube(&[sub, "--help"]);
    assert_eq!(out.status.code(), Some(0));
    stdout(&out)
}

fn assert_documented(columns: &[String], help: &str) {
    for c in columns {
        let documented = match c.split_once('_') {
            Some((prefix @ ("term" | "stderr" | "extra" | "flag"), rest)) => {
                help.contains(&format!("{prefix}_<")) && help.split_whitespace().any(|w| w == rest)
            }
            _ => help.split(|ch: char| ch.is_whitespace() || ch == ',').any(|w| w == c),
        };
        assert!(documented, "column {c} is not documented");
    }
}

#[test]
fn every_csv_column_is_documented() {
    let dir = tempfile::tempdir().unwrap();
    let eval_help = help("sweep");
    let probes: &[&[&str]] = &[
        &["linear-xp", "--n", "4", "--k", "2", "--p", "4"],
        &[
            "chaos-xp",
            "--n",
            "4",
            "--k",
            "2",
            "--p",
            "4",
            "--h",
            "random:1",
            "--refined",
        ],
        &[
            "metric-xp",
            "--r",
            "4",
            "--n",
            "2",
            "--k",
            "1",
            "--p",
            "2",
            "--f",
            "cosine-sum",
            "--mode",
            "mc",
            "--seed",
            "1",
            "--budget",
            "500",
        ],
        &[
            "smoothed-xp",
            "--r",
            "4",
            "--n",
            "2",
            "--k",
            "1",
            "--p",
            "2",
            "--f",
            "cosine-sum",
            "--mode",
            "mc",
            "--seed",
            "1",
            "--budget",
            "500",
        ],
        &["lust-piquard", "--p", "4", "--h", "random:2", "--n", "3"],
        &[
            "randomized-riesz",
            "--p",
            "3",
            "--h",
            "random:2",
            "--n",
            "3",
            "--mode",
            "mc",
            "--seed",
            "2",
            "--budget",
            "500",
        ],
        &[
            "jensen", "--p", "3", "--alpha", "0.5", "--h", "random:2", "--n", "3", "--set", "0,2",
        ],
        &["probe", "--p", "4", "--alpha", "0.5", "--n", "4"],
        &[
            "ts-perturbation",
            "--p",
            "2",
            "--r",
            "2",
            "--n",
            "2",
            "--f",
            "random:3",
            "--set",
            "1",
        ],
    ];
    for (i, args) in probes.iter().enumerate() {
        let path = dir.path().join(format!("{i}.csv"));
        let out = xpcube(&[&["sweep"], *args, &["--csv", path.to_str().unwrap()]].concat());
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        assert_documented(&read_csv(&path).0, &eval_help);
    }

    let search = xpcube(&["search", "--p", "3", "--n", "4"]);
    let header: Vec<String> = csv::Reader::from_reader(search.stdout.as_slice())
        .headers()
        .unwrap()
        .iter()
        .map(String::from)
        .collect();
    assert_documented(&header, &help("search"));

    let geo = xpcube(&["geometry", "--p", "4", "--q", "3", "--n", "64", "--theta", "1"]);
    let header: Vec<String> = csv::Reader::from_reader(geo.stdout.as_slice())
        .headers()
        .unwrap()
        .iter()
        .map(String::from)
        .collect();
    assert_documented(&header, &help("geometry"));
}
