use dosim::sweep::{preset, run_sweep, Axis, Cell, GridRange, Observable};

fn small(name: &str, lo: f64, hi: f64, n: usize) -> dosim::sweep::SweepSpec {
    let mut s = preset(name).unwrap().remove(0);
    s.range = GridRange::linear(lo, hi, n);
    s
}

#[test]
fn presets_validate() {
    for name in ["fig3", "fig4", "fig5"] {
        for s in preset(name).unwrap() {
            s.validate().unwrap();
        }
    }
    assert_eq!(preset("fig5").unwrap().len(), 3);
    assert!(preset("fig2").is_err());
}

#[test]
fn csv_and_json_are_deterministic() {
    let s = small("fig4", 0.5, 3.0, 6);
    let a = run_sweep(&s).unwrap();
    let b = run_sweep(&s).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("delta,P31_numeric,P31_full,P31_avg,P31_full_avg\n"));
    assert_eq!(text.lines().count(), 7);
    assert_eq!(a.to_json(false), b.to_json(false));
    assert!(a.to_json(false)["metadata"].get("runtime_s").is_none());
    assert!(a.to_json(true)["metadata"]["runtime_s"].is_number());
}

#[test]
fn numeric_and_analytic_columns_agree_on_the_time_axis() {
    let mut s = small("fig5", 6.0, 12.0, 7);
    s.observables = vec![
        Observable::P31Numeric,
        Observable::P31Time,
        Observable::TableNumeric,
        Observable::TableAnalytic,
    ];
    let r = run_sweep(&s).unwrap();
    assert_eq!(s.axis, Axis::Time);
    assert_eq!(r.error_count(), 0);
    let num = r.column("P31_numeric").unwrap();
    let ana = r.column("P31_time").unwrap();
    for (a, b) in num.iter().zip(&ana) {
        assert!((a - b).abs() < 2e-3, "{a} vs {b}");
    }
    for m in 1..=3 {
        for n in 1..=3 {
            let c = format!("P{m}{n}");
            let x = r.column(&format!("table_numeric_{c}")).unwrap();
            let y = r.column(&format!("table_analytic_{c}")).unwrap();
            // The analytic propagator neglects couplings that fall off as 1/t.
            for ((a, b), t) in x.iter().zip(&y).zip(r.axis_values()) {
                assert!((a - b).abs() < 0.15 / t, "{c} at {t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn windows_inside_the_crossings_give_error_cells() {
    let mut s = small("fig3", 0.2, 3.0, 5);
    s.observables = vec![Observable::P31Full, Observable::P31Numeric];
    let r = run_sweep(&s).unwrap();
    assert!(matches!(r.rows[0].cells[0], Cell::Error(_)));
    assert!(matches!(r.rows[4].cells[0], Cell::Value(_)));
    assert!(r.rows.iter().all(|row| matches!(row.cells[1], Cell::Value(_))));
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().contains("error: "));
}

#[test]
fn minimal_spec_files_take_defaults() {
    let text = r#"
        name = "scan"
        axis = "T"
        observables = ["P31_full", "table_avg"]
        range = { lo = 10.0, hi = 20.0, n_points = 3 }
        fixed = { omega12 = 1.0, omega23 = 1.0, delta = 1.0, beta = 1.0 }
    "#;
    let s: dosim::sweep::SweepSpec = toml::from_str(text).unwrap();
    s.validate().unwrap();
    assert_eq!(s.window_nodes, 16);
    assert_eq!(s.tols, dosim::Tols::default());
    assert!(s.t0.is_empty());
    let r = run_sweep(&s).unwrap();
    assert_eq!(r.columns.len(), 10);
    assert!(toml::from_str::<dosim::sweep::SweepSpec>(&text.replace("axis", "axes")).is_err());
}
