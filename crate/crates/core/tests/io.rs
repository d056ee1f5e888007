use graphwave::graph::{
    load_edge_list, rmat_generate, write_edge_list, EdgeListFormat, RmatParams,
};
use graphwave::Error;

#[test]
fn text_and_binary_round_trip() {
    let g = rmat_generate(&RmatParams::graph500(7, 4), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, format) in [
        ("g.txt", EdgeListFormat::Text),
        ("g.bin", EdgeListFormat::Binary),
    ] {
        let path = dir.path().join(name);
        write_edge_list(&path, &g, format).unwrap();
        let back = load_edge_list(&path, format).unwrap();
        assert_eq!(back.edges, g.edges);
        assert!(back.n >= g.edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap());
    }
}

#[test]
fn malformed_text_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "# header\n0 1\n2 x\n").unwrap();
    match load_edge_list(&path, EdgeListFormat::Text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_edge_list("/nonexistent/graph.txt", EdgeListFormat::Text).unwrap_err();
    assert!(matches!(err, Error::Io(_)), "{err:?}");
}
