//! Materializes the bundled example database and documentation set so the
//! CLI can be tried end to end:
//!
//! ```sh
//! cargo run -p dbdoc-core --features fixtures --example mkfixture -- /tmp/demo
//! ```

fn main() {
    let dir = std::env::args()
        .nth(1)
        .expect("usage: mkfixture <output-dir>");
    let dir = std::path::PathBuf::from(dir);
    std::fs::create_dir_all(&dir).expect("create output dir");
    let db = dbdoc_core::fixtures::example_database(&dir);
    let docs = dir.join(dbdoc_core::docs::DocSet::file_name(
        dbdoc_core::fixtures::EXAMPLE_DATABASE_NAME,
    ));
    dbdoc_core::docs::save_docs(&dbdoc_core::fixtures::example_docset(), &docs)
        .expect("write docs");
    println!("{}", db.display());
    println!("{}", docs.display());
}
