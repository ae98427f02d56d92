use std::fmt::Write as _;

use crate::error::{FecError, Result};

/// Sparse bipartite graph of a parity-check matrix. Edge `e` joins variable
/// node `edges[e].0` to check node `edges[e].1`; message slots are indexed by `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    vars: usize,
    checks: usize,
    edges: Vec<(usize, usize)>,
    vn_edges: Vec<Vec<usize>>,
    cn_edges: Vec<Vec<usize>>,
    layers: Vec<Vec<usize>>,
}

impl TannerGraph {
    /// Builds a graph from `(vn, cn)` pairs. Every check forms its own layer.
    pub fn from_edges(vars: usize, checks: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let layers = (0..checks).map(|c| vec![c]).collect();
        TannerGraph::with_layers(vars, checks, pairs, layers)
    }

    pub fn with_layers(vars: usize, checks: usize, pairs: &[(usize, usize)], layers: Vec<Vec<usize>>) -> Result<Self> {
        if vars == 0 || checks == 0 || pairs.is_empty() {
            return Err(FecError::EmptyInput);
        }
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|&(v, c)| (c, v));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(FecError::invalid("graph", "duplicate edge"));
        }
        let mut vn_edges = vec![Vec::new(); vars];
        let mut cn_edges = vec![Vec::new(); checks];
        for (e, &(v, c)) in sorted.iter().enumerate() {
            if v >= vars || c >= checks {
                return Err(FecError::invalid("graph", format!("edge ({v}, {c}) out of range")));
            }
            vn_edges[v].push(e);
            cn_edges[c].push(e);
        }
        let mut seen = vec![false; checks];
        for layer in &layers {
            for &c in layer {
                if c >= checks || std::mem::replace(&mut seen[c], true) {
                    return Err(FecError::invalid("layers", "layers must partition the checks"));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(FecError::invalid("layers", "layers must cover every check"));
        }
        Ok(TannerGraph { vars, checks, edges: sorted, vn_edges, cn_edges, layers })
    }

    /// Graph of a dense 0/1 matrix given as rows.
    pub fn from_dense(h: &[Vec<u8>]) -> Result<Self> {
        let vars = h.first().map_or(0, Vec::len);
        let pairs: Vec<(usize, usize)> = h
            .iter()
            .enumerate()
            .flat_map(|(c, row)| row.iter().enumerate().filter(|(_, &x)| x != 0).map(move |(v, _)| (v, c)))
            .collect();
        TannerGraph::from_edges(vars, h.len(), &pairs)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn checks(&self) -> usize {
        self.checks
    }

    /// Edge count ε.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn vn_edges(&self, v: usize) -> &[usize] {
        &self.vn_edges[v]
    }

    pub fn cn_edges(&self, c: usize) -> &[usize] {
        &self.cn_edges[c]
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    /// `H * bits == 0`.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.cn_edges.iter().all(|es| es.iter().fold(0u8, |acc, &e| acc ^ bits[self.edges[e].0]) == 0)
    }

    pub fn dense(&self) -> Vec<Vec<u8>> {
        let mut h = vec![vec![0u8; self.vars]; self.checks];
        for &(v, c) in &self.edges {
            h[c][v] = 1;
        }
        h
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }

    /// Next non-blank line as `(1-based line number, integers)`.
    fn next_ints(&mut self, err: fn(usize, String) -> FecError) -> Result<(usize, Vec<i64>)> {
        for (i, line) in self.inner.by_ref() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let nums = body
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| err(i + 1, format!("not an integer: {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(err(0, "unexpected end of input".into()))
    }
}

fn alist_err(line: usize, reason: String) -> FecError {
    FecError::Alist { line, reason }
}

fn qc_err(line: usize, reason: String) -> FecError {
    FecError::QcMatrix { line, reason }
}

/// Parses the alist exchange format: `B C`, the two maximum degrees, the B
/// column degrees, the C row degrees, then B column lists and C row lists
/// (1-based, zero-padded).
pub fn parse_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next_ints(alist_err)?;
    let [b, c] = head[..] else {
        return Err(alist_err(ln, "expected `B C`".into()));
    };
    if b <= 0 || c <= 0 {
        return Err(alist_err(ln, "dimensions must be positive".into()));
    }
    let (b, c) = (b as usize, c as usize);
    let (ln, maxes) = lines.next_ints(alist_err)?;
    if maxes.len() != 2 {
        return Err(alist_err(ln, "expected the two maximum degrees".into()));
    }
    let (ln_cd, col_deg) = lines.next_ints(alist_err)?;
    if col_deg.len() != b {
        return Err(alist_err(ln_cd, format!("expected {b} column degrees")));
    }
    let (ln_rd, row_deg) = lines.next_ints(alist_err)?;
    if row_deg.len() != c {
        return Err(alist_err(ln_rd, format!("expected {c} row degrees")));
    }
    let mut from_cols = Vec::new();
    for v in 0..b {
        let (ln, list) = lines.next_ints(alist_err)?;
        let entries: Vec<i64> = list.into_iter().filter(|&x| x != 0).collect();
        if entries.len() as i64 != col_deg[v] {
            return Err(alist_err(
                ln,
                format!("column {} lists {} checks, degree says {}", v + 1, entries.len(), col_deg[v]),
            ));
        }
        for x in entries {
            if x < 1 || x as usize > c {
                return Err(alist_err(ln, format!("check index {x} out of range")));
            }
            from_cols.push((v, x as usize - 1));
        }
    }
    let mut expected: Vec<Vec<usize>> = vec![Vec::new(); c];
    for &(v, r) in &from_cols {
        expected[r].push(v + 1);
    }
    for r in 0..c {
        let (ln, list) = lines.next_ints(alist_err)?;
        let mut entries: Vec<usize> = Vec::new();
        for x in list.into_iter().filter(|&x| x != 0) {
            if x < 1 || x as usize > b {
                return Err(alist_err(ln, format!("variable index {x} out of range")));
            }
            entries.push(x as usize);
        }
        if entries.len() as i64 != row_deg[r] {
            return Err(alist_err(
                ln,
                format!("row {} lists {} variables, degree says {}", r + 1, entries.len(), row_deg[r]),
            ));
        }
        entries.sort_unstable();
        if entries != expected[r] {
            return Err(alist_err(ln, format!("row {} disagrees with the column lists", r + 1)));
        }
    }
    if from_cols.is_empty() {
        return Err(alist_err(ln_cd, "empty adjacency".into()));
    }
    TannerGraph::from_edges(b, c, &from_cols).map_err(|e| alist_err(0, e.to_string()))
}

pub fn to_alist(g: &TannerGraph) -> String {
    let cols: Vec<Vec<usize>> =
        (0..g.vars()).map(|v| g.vn_edges(v).iter().map(|&e| g.edge(e).1 + 1).collect()).collect();
    let rows: Vec<Vec<usize>> =
        (0..g.checks()).map(|c| g.cn_edges(c).iter().map(|&e| g.edge(e).0 + 1).collect()).collect();
    let max_c = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_r = rows.iter().map(Vec::len).max().unwrap_or(0);
    let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.vars(), g.checks());
    let _ = writeln!(out, "{max_c} {max_r}");
    let _ = writeln!(out, "{}", join(&mut cols.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut rows.iter().map(Vec::len)));
    for (list, max) in cols.iter().map(|c| (c, max_c)).chain(rows.iter().map(|r| (r, max_r))) {
        let padded = list.iter().copied().chain(std::iter::repeat_n(0, max - list.len()));
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    out
}

/// Parses a quasi-cyclic description: a `rows cols z` header followed by `rows`
/// lines of `cols` shift values, `-1` marking an all-zero block. Block `(r, c)`
/// with shift `s` connects check `r*z + i` to variable `c*z + (i + s) mod z`.
/// Each block row becomes one decoding layer.
pub fn parse_qc(text: &str) -> Result<TannerGraph> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next_ints(qc_err)?;
    let [rows, cols, z] = head[..] else {
        return Err(qc_err(ln, "expected `rows cols z`".into()));
    };
    if rows <= 0 || cols <= 0 || z <= 0 {
        return Err(qc_err(ln, "dimensions must be positive".into()));
    }
    let (rows, cols, z) = (rows as usize, cols as usize, z as usize);
    let mut pairs = Vec::new();
    for r in 0..rows {
        let (ln, shifts) = lines.next_ints(qc_err)?;
        if shifts.len() != cols {
            return Err(qc_err(ln, format!("expected {cols} shift values, got {}", shifts.len())));
        }
        for (c, &s) in shifts.iter().enumerate() {
            if s == -1 {
                continue;
            }
            if s < 0 || s as usize >= z {
                return Err(qc_err(ln, format!("shift {s} outside -1..{z}")));
            }
            for i in 0..z {
                pairs.push((c * z + (i + s as usize) % z, r * z + i));
            }
        }
    }
    if pairs.is_empty() {
        return Err(qc_err(ln, "base matrix has no nonzero blocks".into()));
    }
    let layers = (0..rows).map(|r| (r * z..(r + 1) * z).collect()).collect();
    TannerGraph::with_layers(cols * z, rows * z, &pairs, layers)
}
