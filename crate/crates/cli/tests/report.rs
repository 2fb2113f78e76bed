use lgt_cli::decay::DecayRow;
use lgt_cli::report::{decay_svg, write_decay_csv};

fn rows3() -> Vec<DecayRow> {
    vec![
        DecayRow { l: 1, cov: 3.5e-4, stderr: 2e-5, n: 1000, beta: 1.2 },
        DecayRow { l: 2, cov: 1.1e-5, stderr: 4e-6, n: 1000, beta: 1.2 },
        DecayRow { l: 3, cov: -2.0e-6, stderr: 3e-6, n: 1000, beta: 1.2 },
    ]
}

#[test]
fn empty_rows_give_header_and_bare_axes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("decay.csv");
    write_decay_csv(&p, &[]).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "L,cov,stderr,n,beta\n");
    let svg = decay_svg(&[], -1.2);
    assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    assert!(!svg.contains("<circle"));
    assert!(svg.contains("log10 |cov|"));
}

#[test]
fn three_rows_four_lines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("decay.csv");
    write_decay_csv(&p, &rows3()).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "L,cov,stderr,n,beta");
    assert_eq!(lines[1], "1,0.00035,0.00002,1000,1.2");
    let svg = decay_svg(&rows3(), -1.2);
    assert_eq!(svg.matches("<circle").count(), 3);
    assert!(svg.contains("stroke-dasharray"));
    assert!(svg.contains("reference slope -1.2000"));
}

#[test]
fn byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_decay_csv(&a, &rows3()).unwrap();
    write_decay_csv(&b, &rows3()).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(decay_svg(&rows3(), -1.2), decay_svg(&rows3(), -1.2));
}

#[test]
fn unwritable_path_names_the_path() {
    let err = write_decay_csv(std::path::Path::new("/nonexistent-dir/x.csv"), &rows3()).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    assert_eq!(err.exit_code(), 1);
}
