//! Acceptance criterion 8: file round-trips are byte-identical for every
//! catalog entry and the CLI honours its exit-code contract.

use flatkahler::catalog;
use flatkahler_cli::format;
use std::process::Output;

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_flatkahler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn criterion_8_round_trip_and_exit_codes() {
    // serialize -> parse -> serialize is the identity, byte for byte
    for entry in catalog::list_catalog() {
        let data = catalog::build(&entry.name).expect("catalog entry");
        let once = format::to_canonical_string(&data).expect("serialize");
        let reparsed = format::parse_str(&once).expect("parse back");
        let twice = format::to_canonical_string(&reparsed).expect("serialize again");
        assert_eq!(
            once, twice,
            "round trip not byte-identical for {}",
            entry.name
        );
    }

    let dir = tempfile::tempdir().expect("tempdir");
    let manifold = dir.path().join("d4.json");
    let manifold_str = manifold.to_str().unwrap();

    // exit 0: valid catalog export and validation
    let out = run(&["catalog", "d4_threefold", "--out", manifold_str]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&["validate", manifold_str]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("group order: 8"), "report: {text}");
    assert!(text.contains("verdict: VALID"), "report: {text}");

    // the exported file byte-matches the library serialization
    let library = format::to_canonical_string(&catalog::build("d4_threefold").unwrap()).unwrap();
    let on_disk = std::fs::read_to_string(&manifold).unwrap();
    assert_eq!(library, on_disk);

    // hodge on the dihedral example reports a vanishing first Betti number
    let out = run(&["hodge", manifold_str]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("b_1 = 0"));

    // exit 1: invalid data (an involution fixing the origin)
    let invalid = dir.path().join("invalid.json");
    std::fs::write(
        &invalid,
        r#"{
  "label": "pinned involution",
  "n": 1,
  "cplx": [[0.0, -1.0], [1.0, 0.0]],
  "generators": [
    {"rotation": [[-1, 0], [0, -1]], "translation": ["0/1", "0/1"]}
  ]
}
"#,
    )
    .unwrap();
    let out = run(&["validate", invalid.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("free: NO"));

    // exit 2: parse errors and missing files
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(code(&run(&["validate", garbage.to_str().unwrap()])), 2);
    assert_eq!(
        code(&run(&[
            "validate",
            dir.path().join("nope.json").to_str().unwrap()
        ])),
        2
    );

    println!("PASS criterion 8: canonical round trips and exit codes 0/1/2 verified");
}

#[test]
fn obstruction_reports() {
    let dir = tempfile::tempdir().expect("tempdir");

    let double = dir.path().join("double.json");
    let out = run(&[
        "catalog",
        "square_torus_qdouble",
        "--out",
        double.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&["obstruct", double.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("non-algebraic deformations: YES"), "{text}");

    let bielliptic = dir.path().join("bielliptic.json");
    run(&[
        "catalog",
        "bielliptic_d2",
        "--out",
        bielliptic.to_str().unwrap(),
    ]);
    let out = run(&["obstruct", bielliptic.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("non-algebraic deformations: NO (h^{2,0} = 0)"),
        "{text}"
    );
}

#[test]
fn scan_output_is_byte_stable() {
    let dir = tempfile::tempdir().expect("tempdir");
    let manifold = dir.path().join("model.json");
    run(&[
        "catalog",
        "square_torus_qdouble",
        "--out",
        manifold.to_str().unwrap(),
    ]);

    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for csv in [&csv_a, &csv_b] {
        let out = run(&[
            "scan",
            manifold.to_str().unwrap(),
            "--form",
            "0",
            "--grid",
            "500",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&out),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "scan output must be byte-identical across runs");

    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 500 + 2, "header + grid rows + summary");
    assert_eq!(lines[0], "q_a,q_b,q_c,residual");
    assert!(lines.last().unwrap().starts_with("# classification="));
}

#[test]
fn doubles_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().expect("tempdir");
    let base = dir.path().join("base.json");
    run(&["catalog", "bielliptic_d2", "--out", base.to_str().unwrap()]);

    for (flag, suffix) in [(None, "_qdouble"), (Some("--co"), "_cdouble")] {
        let out_path = dir.path().join(format!("double{suffix}.json"));
        let mut args = vec!["double", base.to_str().unwrap()];
        if let Some(f) = flag {
            args.push(f);
        }
        args.extend(["--out", out_path.to_str().unwrap()]);
        let out = run(&args);
        assert_eq!(
            code(&out),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let out = run(&["validate", out_path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let text = std::fs::read_to_string(&out_path).unwrap();
        assert!(text.contains(suffix));
    }
}

#[test]
fn certification_search_paths() {
    let dir = tempfile::tempdir().expect("tempdir");

    // an algebraic surface: the volume forms of the two curve factors are
    // invariant (1,1) classes and a positive combination is found quickly
    let bielliptic = dir.path().join("bielliptic.json");
    run(&[
        "catalog",
        "bielliptic_d2",
        "--out",
        bielliptic.to_str().unwrap(),
    ]);
    let out = run(&[
        "certify-nonalgebraic",
        bielliptic.to_str().unwrap(),
        "--height",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("polarization found"));

    // the stored generic torus admits no rational (1,1) class at small height
    let generic = dir.path().join("generic.json");
    run(&[
        "catalog",
        "nonalgebraic_2torus",
        "--out",
        generic.to_str().unwrap(),
    ]);
    let out = run(&[
        "certify-nonalgebraic",
        generic.to_str().unwrap(),
        "--height",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("none up to height 2 (inconclusive)"));
}

#[test]
fn catalog_listing_mentions_every_entry() {
    let out = run(&["catalog", "--list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for entry in catalog::list_catalog() {
        assert!(text.contains(&entry.name), "missing {}", entry.name);
    }
    // unknown entries are invalid-data errors
    assert_eq!(code(&run(&["catalog", "no_such_entry"])), 1);
}
