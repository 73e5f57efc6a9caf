use std::fs;
use std::path::{Path, PathBuf};

fn list(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    v.retain(|p| p.extension().is_some_and(|e| e == ext));
    v.sort();
    v
}

fn table(name: &str, files: &[PathBuf]) -> String {
    let mut s = format!("pub(crate) static {name}: &[(&str, &str)] = &[\n");
    for f in files {
        let stem = f.file_stem().unwrap().to_string_lossy();
        s += &format!("    ({stem:?}, include_str!({:?})),\n", f.canonicalize().unwrap());
    }
    s + "];\n"
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
    println!("cargo:rerun-if-changed={}", root.display());
    let mut out = String::new();
    out += &table("MAPS", &list(&root.join("maps"), "map"));
    out += &table("SUBSTRATES", &list(&root.join("substrates"), "toml"));
    out += &table("SCENARIOS", &list(&root.join("scenarios"), "toml"));
    out += &table("BOTS", &list(&root.join("bots"), "toml"));
    for sub in ["maps", "substrates", "scenarios", "bots"] {
        println!("cargo:rerun-if-changed={}", root.join(sub).display());
    }
    let dest = Path::new(&std::env::var("OUT_DIR").unwrap()).join("assets.rs");
    fs::write(dest, out).unwrap();
}
