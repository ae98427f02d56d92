use std::path::{Path, PathBuf};

use fec_core::ldpc::{parse_alist, LdpcEncoder};
use fec_core::params::{load_params, ParamSet, StandardTables};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(json_files(&path));
        } else if path.extension().is_some_and(|e| e == "json") && path.file_name().unwrap() != "wimax_tables.json" {
            out.push(path);
        }
    }
    out.sort();
    out
}

#[test]
fn every_shipped_config_loads() {
    let files = json_files(&configs_dir());
    assert!(files.len() > 20);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        let params = load_params(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        match params {
            ParamSet::Ctc(p) => assert_eq!(p, StandardTables::builtin().ctc_params(p.n).unwrap()),
            ParamSet::Ldpc(p) => {
                let g = p.graph.load(path.parent()).unwrap();
                assert!(LdpcEncoder::new(&g).k() > 0);
            }
            _ => {}
        }
    }
}

#[test]
fn shipped_ctc_configs_cover_every_standard_size() {
    for n in StandardTables::builtin().supported_n() {
        assert!(configs_dir().join(format!("ctc/n{n}.json")).exists(), "N={n}");
    }
}

#[test]
fn tree_code_is_cycle_free() {
    let g = parse_alist(&std::fs::read_to_string(configs_dir().join("ldpc/tree_10.alist")).unwrap()).unwrap();
    // A connected bipartite graph is a tree iff edges = nodes - 1.
    assert_eq!(g.edge_count(), g.vars() + g.checks() - 1);
}
