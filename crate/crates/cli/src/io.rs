//! File formats.
//!
//! * Signals: `window,0,1,…,N-1` header, then one row per signal, tagged with
//!   its window index; windows appear in order and hold the same number of
//!   signals.
//! * Graphs: a directory with `graph.toml` (`n_nodes`, `n_slots`) and one
//!   `slot_XXXX.csv` per slot with columns `i,j,weight`, `i < j` in
//!   lexicographic order; zero weights are omitted.
//!
//! Reals are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tvgl::graph::{edge_index, edge_pairs, n_edges};
use tvgl::{EdgeVector, SignalWindows, TimeVaryingGraph};

use crate::error::{CliError, Result};

pub const SIGNALS_FILE: &str = "signals.csv";
pub const GRAPH_META_FILE: &str = "graph.toml";

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = fs::write(&tmp, bytes).and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Files produced by a command, held in memory until every computation has
/// succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, rel: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((rel.into(), contents.into()));
    }

    pub fn add_graph(&mut self, prefix: &Path, g: &TimeVaryingGraph) {
        for (name, text) in format_graph(g) {
            self.add(prefix.join(name), text);
        }
    }

    /// Writes every file under `root` and returns `(relative path, sha256)`
    /// pairs in insertion order.
    pub fn commit(self, root: &Path) -> Result<Vec<(String, String)>> {
        let mut hashes = Vec::with_capacity(self.files.len());
        for (rel, bytes) in self.files {
            write_atomic(&root.join(&rel), &bytes)?;
            hashes.push((rel.to_string_lossy().replace('\\', "/"), sha256_hex(&bytes)));
        }
        Ok(hashes)
    }
}

pub fn format_signals(x: &SignalWindows) -> String {
    let n = x.n_nodes();
    let mut out = String::from("window");
    for i in 0..n {
        let _ = write!(out, ",{i}");
    }
    out.push('\n');
    for (t, w) in x.windows().iter().enumerate() {
        for c in 0..w.ncols() {
            let _ = write!(out, "{t}");
            for v in w.column(c).iter() {
                out.push(',');
                out.push_str(&fmt_real(*v));
            }
            out.push('\n');
        }
    }
    out
}

fn parse_error(path: &Path, line: usize, col: Option<usize>, msg: impl AsRef<str>) -> CliError {
    match col {
        Some(c) => CliError::Data(format!("{}:{line}:{c}: {}", path.display(), msg.as_ref())),
        None => CliError::Data(format!("{}:{line}: {}", path.display(), msg.as_ref())),
    }
}

/// Parses a signals file; `path` is only used in diagnostics.
pub fn parse_signals(text: &str, path: &Path) -> Result<SignalWindows> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty signals file", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols[0] != "window" {
        return Err(parse_error(
            path,
            1,
            Some(1),
            "header must start with `window`",
        ));
    }
    for (i, c) in cols[1..].iter().enumerate() {
        if c.parse::<usize>() != Ok(i) {
            return Err(parse_error(
                path,
                1,
                Some(i + 2),
                format!("expected node id {i}, found `{c}`"),
            ));
        }
    }
    let n = cols.len() - 1;
    if n < 2 {
        return Err(parse_error(
            path,
            1,
            None,
            "at least two node columns are required",
        ));
    }

    let mut windows: Vec<Vec<Vec<f64>>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 1 {
            return Err(parse_error(
                path,
                lineno,
                None,
                format!("expected {} fields, found {}", n + 1, fields.len()),
            ));
        }
        let t: usize = fields[0].parse().map_err(|_| {
            parse_error(
                path,
                lineno,
                Some(1),
                format!("bad window index `{}`", fields[0]),
            )
        })?;
        if t == windows.len() {
            windows.push(Vec::new());
        } else if t + 1 != windows.len() {
            return Err(parse_error(
                path,
                lineno,
                Some(1),
                format!(
                    "window {t} out of order (expected {} or {})",
                    windows.len().saturating_sub(1),
                    windows.len()
                ),
            ));
        }
        let mut row = Vec::with_capacity(n);
        for (c, f) in fields[1..].iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_error(path, lineno, Some(c + 2), format!("bad number `{f}`")))?;
            if !v.is_finite() {
                return Err(parse_error(path, lineno, Some(c + 2), "non-finite value"));
            }
            row.push(v);
        }
        windows[t].push(row);
    }
    if windows.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no signal rows",
            path.display()
        )));
    }
    let k = windows[0].len();
    if let Some(t) = windows.iter().position(|w| w.len() != k) {
        return Err(CliError::Data(format!(
            "{}: window {t} has {} signals, window 0 has {k}",
            path.display(),
            windows[t].len()
        )));
    }
    let mats = windows
        .iter()
        .map(|rows| DMatrix::from_fn(n, k, |i, c| rows[c][i]))
        .collect();
    Ok(SignalWindows::new(mats)?)
}

pub fn read_signals(path: &Path) -> Result<SignalWindows> {
    parse_signals(&read_text(path)?, path)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphMeta {
    n_nodes: usize,
    n_slots: usize,
}

pub fn slot_file_name(t: usize) -> String {
    format!("slot_{t:04}.csv")
}

/// `(file name, contents)` of every file of a graph directory.
pub fn format_graph(g: &TimeVaryingGraph) -> Vec<(String, String)> {
    let n = g.n_nodes();
    let meta = GraphMeta {
        n_nodes: n,
        n_slots: g.n_slots(),
    };
    let mut files = vec![(
        GRAPH_META_FILE.to_string(),
        toml::to_string(&meta).expect("graph metadata serializes"),
    )];
    for (t, slot) in g.slots().iter().enumerate() {
        let mut text = String::from("i,j,weight\n");
        for ((i, j), w) in edge_pairs(n).zip(slot.weights()) {
            if *w != 0.0 {
                let _ = writeln!(text, "{i},{j},{}", fmt_real(*w));
            }
        }
        files.push((slot_file_name(t), text));
    }
    files
}

pub fn parse_slot(text: &str, n: usize, path: &Path) -> Result<EdgeVector> {
    let mut weights = vec![0.0; n_edges(n)];
    let mut seen = vec![false; weights.len()];
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.replace(' ', "") == "i,j,weight" => {}
        _ => return Err(parse_error(path, 1, None, "expected header `i,j,weight`")),
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(parse_error(
                path,
                lineno,
                None,
                format!("expected 3 fields, found {}", f.len()),
            ));
        }
        let node = |c: usize| -> Result<usize> {
            f[c].parse::<usize>()
                .ok()
                .filter(|v| *v < n)
                .ok_or_else(|| {
                    parse_error(
                        path,
                        lineno,
                        Some(c + 1),
                        format!("bad node `{}` (n_nodes = {n})", f[c]),
                    )
                })
        };
        let (i, j) = (node(0)?, node(1)?);
        if i >= j {
            return Err(parse_error(
                path,
                lineno,
                Some(2),
                format!("edge ({i}, {j}) needs i < j"),
            ));
        }
        let w: f64 = f[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| parse_error(path, lineno, Some(3), format!("bad weight `{}`", f[2])))?;
        let e = edge_index(n, i, j);
        if seen[e] {
            return Err(parse_error(
                path,
                lineno,
                None,
                format!("duplicate edge ({i}, {j})"),
            ));
        }
        seen[e] = true;
        weights[e] = w;
    }
    Ok(EdgeVector::new(n, weights)?)
}

pub fn read_graph_dir(dir: &Path) -> Result<TimeVaryingGraph> {
    let meta_path = dir.join(GRAPH_META_FILE);
    let meta: GraphMeta = toml::from_str(&read_text(&meta_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", meta_path.display())))?;
    if meta.n_nodes < 2 || meta.n_slots == 0 {
        return Err(CliError::Data(format!(
            "{}: need at least two nodes and one slot",
            meta_path.display()
        )));
    }
    let slots = (0..meta.n_slots)
        .map(|t| {
            let p = dir.join(slot_file_name(t));
            parse_slot(&read_text(&p)?, meta.n_nodes, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeVaryingGraph::new(slots)?)
}

/// Every regular file directly inside `dir`, sorted by name, with its hash.
pub fn hash_dir(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|p| Ok((p.display().to_string(), sha256_hex(&read_bytes(&p)?))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn windows() -> SignalWindows {
        let a = DMatrix::from_row_slice(3, 2, &[0.1, -2.5, 1.0 / 3.0, 4.0, 1e-300, -0.0]);
        let b = DMatrix::from_row_slice(3, 2, &[7.0, 8.0, 9.0, 10.0, 11.0, std::f64::consts::PI]);
        SignalWindows::new(vec![a, b]).unwrap()
    }

    #[test]
    fn signals_round_trip_exactly() {
        let x = windows();
        let text = format_signals(&x);
        assert!(text.starts_with("window,0,1,2\n0,"));
        assert_eq!(text.lines().count(), 1 + 2 * 2);
        assert_eq!(parse_signals(&text, Path::new("s.csv")).unwrap(), x);
    }

    #[test]
    fn signal_errors_carry_location() {
        let p = Path::new("s.csv");
        let err = parse_signals("window,0,1\n0,1.0,abc\n", p).unwrap_err();
        assert_eq!(err.to_string(), "s.csv:2:3: bad number `abc`");
        let err = parse_signals("window,0,2\n", p).unwrap_err();
        assert!(err.to_string().starts_with("s.csv:1:3"), "{err}");
        let err = parse_signals("window,0,1\n0,1,2\n2,1,2\n", p).unwrap_err();
        assert!(err.to_string().starts_with("s.csv:3:1"), "{err}");
        let err = parse_signals("window,0,1\n0,1,2\n1,1,2\n1,3,4\n", p).unwrap_err();
        assert!(err.to_string().contains("window 1 has 2 signals"), "{err}");
        assert!(parse_signals("window,0,1\n0,1,inf\n", p).is_err());
        assert!(parse_signals("", p).is_err());
    }

    #[test]
    fn graph_round_trip_exactly() {
        let g = TimeVaryingGraph::new(vec![
            EdgeVector::new(3, vec![0.1, 0.0, 1.0 / 3.0]).unwrap(),
            EdgeVector::zeros(3),
        ])
        .unwrap();
        let files = format_graph(&g);
        assert_eq!(files.len(), 3);
        assert_eq!(files[2].1, "i,j,weight\n");
        assert!(files[1].1.contains("0,1,1.0000000000000001e-1\n"));
        assert!(!files[1].1.contains("0,2,"));
        let slots = files[1..]
            .iter()
            .map(|(name, text)| parse_slot(text, 3, Path::new(name)).unwrap())
            .collect();
        assert_eq!(TimeVaryingGraph::new(slots).unwrap(), g);
    }

    #[test]
    fn slot_errors() {
        let p = Path::new("slot.csv");
        assert!(parse_slot("i,j,weight\n1,0,1.0\n", 3, p).is_err());
        assert!(parse_slot("i,j,weight\n0,3,1.0\n", 3, p).is_err());
        assert!(parse_slot("i,j,weight\n0,1,-1.0\n", 3, p).is_err());
        assert!(parse_slot("i,j,weight\n0,1,1\n0,1,2\n", 3, p).is_err());
        assert!(parse_slot("a,b,c\n", 3, p).is_err());
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
