use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sqf_cli::commands::{Dataset, Experiment};
use sqf_cli::ExperimentConfig;
use sqf_core::baselines::read_climatology;
use sqf_core::data::Aggregation;
use sqf_core::evaluation::{climatology_forecasts, q_risk, read_report, LeadFilter};
use sqf_core::model::checkpoint;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn sqf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqf")).args(args).env("SQF_LOG", "error").output().unwrap()
}

fn run_ok(config: &Path, out: &Path, args: &[&str]) {
    let mut all = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    let o = sqf(&all);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("test.conf");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn missing_config_is_a_usage_error() {
    assert_eq!(sqf(&["generate"]).status.code(), Some(2));
    assert_eq!(sqf(&["--config", "x.conf", "frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_configs_exit_with_the_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let mini = std::fs::read_to_string(configs().join("mini.conf")).unwrap();
    let overlapping = mini.replace("data.validation_years = 2006-2007", "data.validation_years = 2005-2007");
    for (text, field) in [
        (overlapping, "data.split"),
        (mini.clone() + "model.colour = blue\n", "model.colour"),
        (mini.clone() + "eval.lead = 9\n", "eval.lead"),
    ] {
        let path = write_config(dir.path(), &text);
        let o = sqf(&["--config", path.to_str().unwrap(), "generate"]);
        assert_eq!(o.status.code(), Some(2), "{field}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(field), "{field}");
    }
}

#[test]
fn missing_inputs_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("mini.conf");
    let o = sqf(&["--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn generate_with_demo_config_writes_the_dataset() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&configs().join("demo.conf"), dir.path(), &["generate"]);
    for (file, header) in [
        ("daily.csv", "date,lat,lon,variable,value"),
        ("index.csv", "date,name,value"),
        ("ensemble.csv", "date,lat,lon,variable,value"),
    ] {
        let text = std::fs::read_to_string(dir.path().join("data").join(file)).unwrap();
        assert_eq!(text.lines().next(), Some(header));
        assert!(text.lines().count() > 1000, "{file}");
    }
}

#[test]
fn climatology_evaluation_equals_library_q_risk() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("mini.conf");
    run_ok(&config, dir.path(), &["generate"]);
    run_ok(&config, dir.path(), &["climatology"]);
    run_ok(&config, dir.path(), &["--lead", "all", "evaluate", "--model", "climo"]);

    let mut cfg = ExperimentConfig::load(&config).unwrap();
    cfg.out = dir.path().to_path_buf();
    let data = Dataset::load(&cfg).unwrap();
    let exp = Experiment::build(&cfg, &data).unwrap();
    let file = std::fs::File::open(dir.path().join("climatology/climatology.csv")).unwrap();
    let table = read_climatology(file, Aggregation::Max, cfg.split.train).unwrap();
    let forecasts = climatology_forecasts(&table, &exp.test_issues(), &[1, 2, 3, 4]).unwrap();

    let grid = data.grid(&cfg).unwrap();
    let file = std::fs::File::open(dir.path().join("eval/qrisk_climo_leadall.csv")).unwrap();
    let report = read_report(file, grid).unwrap();
    assert_eq!(report.locations.len(), 4);
    for (loc, row) in report.locations.iter().zip(&report.values) {
        let here: Vec<_> = forecasts.iter().filter(|f| f.location.key() == loc.key()).cloned().collect();
        for (qi, &q) in report.quantiles.iter().enumerate() {
            let direct = q_risk(exp.target(&cfg), &here, q, LeadFilter::All).unwrap();
            assert_eq!(row[qi].to_bits(), direct.to_bits());
        }
    }
}

#[test]
fn four_week_horizon_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("mini.conf");
    for args in [
        &["generate"][..],
        &["search"],
        &["train"],
        &["evaluate", "--model", "tft"],
        &["evaluate", "--model", "climo"],
        &["evaluate", "--model", "ens"],
        &["compare", "--baseline", "climo,ens", "--candidate", "tft"],
        &["export", "--model", "tft,ens"],
    ] {
        run_ok(&config, dir.path(), args);
    }
    let weights = checkpoint::load(&dir.path().join("models/tile0")).unwrap();
    assert_eq!(weights.config().decoder_steps, 4);
    assert_eq!(weights.config().encoder_steps, 8);

    let forecasts = std::fs::read_to_string(dir.path().join("eval/forecasts_tft.csv")).unwrap();
    let leads: Vec<&str> = forecasts.lines().skip(1).take(5).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(leads, ["1", "2", "3", "4", "1"]);

    let table = std::fs::read_to_string(dir.path().join("compare/table_lead4.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "comparison,region,0.1,0.5,0.9");
    assert!(lines[1].starts_with("climo vs tft,mini,"));
    assert!(lines[2].starts_with("ens vs tft,mini,"));

    let series = std::fs::read_to_string(dir.path().join("export/series_tft_lead4.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("week,target,q10,q50,q90"));
}

#[test]
fn ensemble_needs_its_own_lead() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("mini.conf");
    run_ok(&config, dir.path(), &["generate"]);
    let c = config.to_str().unwrap();
    let o = sqf(&["--config", c, "--out", dir.path().to_str().unwrap(), "--lead", "all", "evaluate", "--model", "ens"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eval.lead"));
}
