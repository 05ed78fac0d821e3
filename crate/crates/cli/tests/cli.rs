use std::fs;
use std::path::Path;

use mxr_core::io::{DataDocument, MeshDocument};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn mxr(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mxr").chain(args.iter().copied());
    let code = mxr_cli::run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Value in the second column of a tab-separated row starting with `key`.
fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no row '{key}' in\n{text}"))
        .split('\t')
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn catalog_lists_every_family() {
    let r = mxr(&["catalog"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out.lines().count(), 11);
    assert!(r.out.contains("h2-horocycle\tH^2 x R"));
}

#[test]
fn verify_closed_form_helicoid_passes() {
    let r = mxr(&["verify", "--spec", "s2-helicoid:1", "--tol", "1e-8"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(field(&r.out, "result"), "pass");
}

#[test]
fn verify_from_chart_uses_the_fd_tolerance() {
    let r = mxr(&["verify", "--spec", "s2-helicoid:1", "--from-chart", "--grid", "0.02"]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    assert_eq!(field(&r.out, "tolerance"), "4.000e-3");
    let strict = mxr(&["verify", "--spec", "s2-helicoid:1", "--from-chart", "--grid", "0.02", "--tol", "1e-8"]);
    assert_eq!(strict.code, 1);
}

#[test]
fn conjugate_check_snaps_and_passes() {
    let r = mxr(&["conjugate-check", "--pair", "u:1.4142135,h:1", "--space", "s2"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("snapped\ts2-unduloid"));
    assert!(field(&r.out, "max").parse::<f64>().unwrap() <= 1e-8);
    let h2 = mxr(&["conjugate-check", "--pair", "c:0,h:1", "--space", "h2", "--grid", "0.05"]);
    assert_eq!(h2.code, 0, "{}", h2.err);
}

#[test]
fn conjugate_check_rejects_unrelated_parameters() {
    let r = mxr(&["conjugate-check", "--pair", "u:1.5,h:1", "--space", "s2"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("--pair") && r.err.contains("pair relation"), "{}", r.err);
}

#[test]
fn sample_writes_mesh_and_data() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, data) = (path(dir.path(), "c0.obj"), path(dir.path(), "c0.json"));
    let r = mxr(&["sample", "--spec", "h2-horocycle", "--grid", "60x60", "--out", &mesh, "--data", &data]);
    assert_eq!(r.code, 0, "{}", r.err);
    let doc = MeshDocument::from_obj(&fs::read_to_string(&mesh).unwrap()).unwrap();
    assert_eq!(doc.model, "poincare-disk");
    assert_eq!(doc.vertices.len(), 3600);
    assert!(doc.faces.iter().flatten().all(|&k| k < 3600));
    let d = DataDocument::read(Path::new(&data)).unwrap().to_data().unwrap();
    assert_eq!(d.grid().len(), 3600);
}

#[test]
fn corrupted_document_fails_verification_naming_the_equation() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "d.json");
    assert_eq!(mxr(&["sample", "--spec", "s2-helicoid", "--out", &path(dir.path(), "m.obj"), "--data", &data]).code, 0);
    let mut doc = DataDocument::read(Path::new(&data)).unwrap();
    assert_eq!(mxr(&["verify", "--in", &data]).code, 0);
    doc.nu.iter_mut().for_each(|x| *x *= 1.1);
    let bad = path(dir.path(), "corrupted.json");
    doc.write(Path::new(&bad)).unwrap();
    let r = mxr(&["verify", "--in", &bad]);
    assert_eq!(r.code, 1);
    assert!(r.out.contains("unit_norm"));
    assert!(r.err.contains("unit_norm") && r.err.contains("at node"), "{}", r.err);
}

#[test]
fn malformed_documents_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "d.json");
    assert_eq!(mxr(&["sample", "--spec", "s2-slice", "--grid", "0.1", "--out", &path(dir.path(), "m.obj"), "--data", &data]).code, 0);
    let mut doc = DataDocument::read(Path::new(&data)).unwrap();
    doc.t.pop();
    doc.write(Path::new(&data)).unwrap();
    let r = mxr(&["verify", "--in", &data]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("'T'"), "{}", r.err);
    assert_eq!(mxr(&["verify", "--in", &path(dir.path(), "missing.json")]).code, 2);
}

#[test]
fn reconstruct_from_a_document() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "d.json");
    assert_eq!(mxr(&["sample", "--spec", "h2-gencatenoid:0.6", "--out", &path(dir.path(), "m.obj"), "--data", &data]).code, 0);
    let mesh = path(dir.path(), "r.obj");
    let r = mxr(&["reconstruct", "--in", &data, "--out", &mesh, "--t0", "-0.5"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(field(&r.out, "projection_displacement").parse::<f64>().unwrap() < 1e-8);
    assert!(Path::new(&mesh).exists());
    let off = mxr(&["reconstruct", "--in", &data, "--base", "99,0"]);
    assert_eq!(off.code, 2);
    assert!(off.err.contains("--base"), "{}", off.err);
    let strict = mxr(&["reconstruct", "--in", &data, "--gate", "1e-9"]);
    assert_eq!(strict.code, 2);
    assert!(strict.err.contains("integrability") && strict.err.contains("node"), "{}", strict.err);
}

#[test]
fn associate_reports_the_known_conjugate() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = path(dir.path(), "a.obj");
    let r = mxr(&["associate", "--spec", "h2-catenoid:1", "--theta", "pi/2", "--out", &mesh]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(field(&r.out, "conjugate"), "h2-helicoid:1.4142135623730951");
    assert!(field(&r.out, "max_deviation").parse::<f64>().unwrap() <= 1e-5);
    let back = mxr(&["associate", "--spec", "s2-helicoid", "--theta", "-pi/2", "--out", &mesh, "--grid", "0.05"]);
    assert_eq!(back.code, 0, "{}", back.err);
    assert!(field(&back.out, "conjugate").starts_with("s2-unduloid"));
    let plain = mxr(&["associate", "--spec", "s2-helicoid", "--theta", "0.4", "--out", &mesh, "--grid", "0.05"]);
    assert_eq!(plain.code, 0);
    assert!(!plain.out.contains("conjugate"));
}

#[test]
fn hopf_rotation_laws() {
    let r = mxr(&["hopf", "--spec", "s2-unduloid", "--theta", "pi/6,pi/2,pi", "--grid", "0.05"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(field(&r.out, "qphi_mean"), "-1.000000000000");
    assert_eq!(r.out.lines().filter(|l| l.ends_with("\tok")).count(), 3);
}

#[test]
fn usage_errors_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = path(dir.path(), "x.obj");
    let model = mxr(&["sample", "--spec", "s2-helicoid", "--out", &mesh, "--model", "poincare-disk"]);
    assert_eq!(model.code, 2);
    assert!(model.err.contains("--model"), "{}", model.err);
    let grid = mxr(&["sample", "--spec", "s2-helicoid", "--out", &mesh, "--grid", "fine"]);
    assert_eq!(grid.code, 2);
    assert!(grid.err.contains("--grid"));
    let spec = mxr(&["verify", "--spec", "s2-unduloid:0.5"]);
    assert_eq!(spec.code, 2);
    assert!(spec.err.contains("--spec"));
    let theta = mxr(&["hopf", "--spec", "s2-helicoid", "--theta", "quarter"]);
    assert_eq!(theta.code, 2);
    assert!(theta.err.contains("--theta"));
    assert_eq!(mxr(&["verify"]).code, 2);
    assert_eq!(mxr(&["transmogrify"]).code, 2);
    assert_eq!(mxr(&["--help"]).code, 0);
}
