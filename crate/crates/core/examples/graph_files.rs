//! Writes a graph to disk, reads it back through the validator and shows
//! the errors reported for malformed files.
//!
//! Run with `cargo run --example graph_files`.

use newtonnet::csbm::{generate, CsbmConfig};
use newtonnet::io::{validate_graph_file, write_graph};

fn main() -> newtonnet::Result<()> {
    let dir = std::env::temp_dir().join("newtonnet-graph-files");
    std::fs::create_dir_all(&dir).map_err(|source| newtonnet::Error::Io { path: dir.clone(), source })?;

    let g = generate(&CsbmConfig::new(50, 4, 0.8, 3))?;
    let path = dir.join("csbm.json");
    write_graph(&g, &path)?;
    let back = validate_graph_file(&path)?;
    println!("wrote {} ({} nodes, {} edges)", path.display(), back.num_nodes(), back.num_edges());
    assert_eq!(back.features(), g.features());

    let bad = dir.join("bad.json");
    let features = dir.join("bad.features.csv");
    std::fs::write(&features, "0\n0\n").map_err(|source| newtonnet::Error::Io { path: features, source })?;
    for edges in ["[[0,0]]", "[[0,1],[1,0]]"] {
        let json = format!(
            r#"{{"num_nodes":2,"num_classes":2,"edges":{edges},"labels":[0,1],"features_path":"bad.features.csv"}}"#
        );
        std::fs::write(&bad, json).map_err(|source| newtonnet::Error::Io { path: bad.clone(), source })?;
        println!("edges {edges}: {}", validate_graph_file(&bad).unwrap_err());
    }
    Ok(())
}
