use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};

/// Sparse bipartite graph of a parity-check matrix. Edges are numbered in
/// check-node order, so the edges of check `j` form a contiguous range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n: usize,
    m: usize,
    edge_vn: Vec<u32>,
    cn_offsets: Vec<usize>,
    vn_offsets: Vec<usize>,
    vn_edges: Vec<u32>,
}

impl TannerGraph {
    /// Builds the graph from the variable-node lists of every check.
    pub fn from_checks(n: usize, checks: &[Vec<usize>]) -> Result<Self> {
        let m = checks.len();
        let mut edge_vn = Vec::new();
        let mut cn_offsets = Vec::with_capacity(m + 1);
        cn_offsets.push(0);
        let mut vn_degree = vec![0usize; n];
        for (j, row) in checks.iter().enumerate() {
            let mut seen = row.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(format!("check {j} lists a variable twice")));
            }
            for &v in row {
                if v >= n {
                    return Err(Error::Parameter(format!("check {j} lists variable {v} beyond n = {n}")));
                }
                edge_vn.push(v as u32);
                vn_degree[v] += 1;
            }
            cn_offsets.push(edge_vn.len());
        }
        let mut vn_offsets = Vec::with_capacity(n + 1);
        vn_offsets.push(0);
        for d in &vn_degree {
            vn_offsets.push(vn_offsets.last().unwrap() + d);
        }
        let mut fill = vn_offsets[..n].to_vec();
        let mut vn_edges = vec![0u32; edge_vn.len()];
        for (e, &v) in edge_vn.iter().enumerate() {
            vn_edges[fill[v as usize]] = e as u32;
            fill[v as usize] += 1;
        }
        Ok(TannerGraph { n, m, edge_vn, cn_offsets, vn_offsets, vn_edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_vn.len()
    }

    /// Edge ids of check `j`.
    pub fn cn_edges(&self, j: usize) -> Range<usize> {
        self.cn_offsets[j]..self.cn_offsets[j + 1]
    }

    /// Edge ids of variable `i`, in increasing check order.
    pub fn vn_edges(&self, i: usize) -> &[u32] {
        &self.vn_edges[self.vn_offsets[i]..self.vn_offsets[i + 1]]
    }

    pub fn edge_vn(&self, e: usize) -> usize {
        self.edge_vn[e] as usize
    }

    /// Variables attached to check `j`.
    pub fn check_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_vn[self.cn_edges(j)].iter().map(|&v| v as usize)
    }

    /// Check of every edge.
    pub fn edge_checks(&self) -> Vec<usize> {
        let mut out = vec![0; self.edge_count()];
        for j in 0..self.m {
            for e in self.cn_edges(j) {
                out[e] = j;
            }
        }
        out
    }

    pub fn vn_degree(&self, i: usize) -> usize {
        self.vn_offsets[i + 1] - self.vn_offsets[i]
    }

    pub fn cn_degree(&self, j: usize) -> usize {
        self.cn_offsets[j + 1] - self.cn_offsets[j]
    }

    /// `(d_v, d_c)` when every variable and every check has the same degree.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let dv = self.vn_degree(0);
        let dc = self.cn_degree(0);
        let regular = (0..self.n).all(|i| self.vn_degree(i) == dv) && (0..self.m).all(|j| self.cn_degree(j) == dc);
        regular.then_some((dv, dc))
    }

    /// Whether `bits` satisfies every parity check.
    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        (0..self.m).all(|j| self.check_neighbors(j).fold(0u8, |acc, v| acc ^ bits[v]) == 0)
    }

    /// Design rate `1 - m / n`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.m as f64 / self.n as f64
    }

    /// alist text with zero padding up to the maximum degrees.
    pub fn to_alist(&self) -> String {
        let max_v = (0..self.n).map(|i| self.vn_degree(i)).max().unwrap_or(0);
        let max_c = (0..self.m).map(|j| self.cn_degree(j)).max().unwrap_or(0);
        let checks = self.edge_checks();
        let mut s = String::new();
        let join = |items: Vec<usize>, width: usize| -> String {
            let mut items: Vec<String> = items.iter().map(|x| x.to_string()).collect();
            items.resize(width.max(items.len()), "0".into());
            items.join(" ")
        };
        writeln!(s, "{} {}", self.n, self.m).unwrap();
        writeln!(s, "{max_v} {max_c}").unwrap();
        writeln!(s, "{}", join((0..self.n).map(|i| self.vn_degree(i)).collect(), 0)).unwrap();
        writeln!(s, "{}", join((0..self.m).map(|j| self.cn_degree(j)).collect(), 0)).unwrap();
        for i in 0..self.n {
            let cns = self.vn_edges(i).iter().map(|&e| checks[e as usize] + 1).collect();
            writeln!(s, "{}", join(cns, max_v)).unwrap();
        }
        for j in 0..self.m {
            writeln!(s, "{}", join(self.check_neighbors(j).map(|v| v + 1).collect(), max_c)).unwrap();
        }
        s
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as numbers, with its 1-based line number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Alist { line: i + 1, msg: format!("bad number `{t}`") }))
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(Error::Alist { line: 0, msg: format!("unexpected end of file while reading {what}") })
    }
}

fn exact<const K: usize>(line: usize, nums: Vec<usize>, what: &str) -> Result<[usize; K]> {
    nums.try_into()
        .map_err(|v: Vec<usize>| Error::Alist { line, msg: format!("{what}: expected {K} values, found {}", v.len()) })
}

fn neighbor_list(
    lines: &mut Lines,
    what: &str,
    index: usize,
    degree: usize,
    max_degree: usize,
    range: usize,
) -> Result<(usize, Vec<usize>)> {
    let (line, nums) = lines.next_numbers(what)?;
    let err = |msg: String| Error::Alist { line, msg };
    if nums.len() > max_degree.max(degree) {
        return Err(err(format!(
            "{what} {} has {} entries, more than the maximum {max_degree}",
            index + 1,
            nums.len()
        )));
    }
    let list: Vec<usize> = nums.into_iter().filter(|&x| x != 0).collect();
    if list.len() != degree {
        return Err(err(format!("{what} {} lists {} neighbors but declares degree {degree}", index + 1, list.len())));
    }
    if let Some(&bad) = list.iter().find(|&&x| x > range) {
        return Err(err(format!("{what} {} refers to index {bad} beyond {range}", index + 1)));
    }
    Ok((line, list.into_iter().map(|x| x - 1).collect()))
}

/// Parses the alist sparse-matrix format: `n m`, maximum degrees, the
/// column and row degree lists, then 1-based neighbor lists per column and
/// per row. Zero entries pad short lists and are ignored.
pub fn parse_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (l, nums) = lines.next_numbers("dimensions")?;
    let [n, m] = exact::<2>(l, nums, "dimensions")?;
    if n == 0 || m == 0 {
        return Err(Error::Alist { line: l, msg: "empty matrix".into() });
    }
    let (l, nums) = lines.next_numbers("maximum degrees")?;
    let [max_v, max_c] = exact::<2>(l, nums, "maximum degrees")?;
    let (l, vdeg) = lines.next_numbers("column degrees")?;
    if vdeg.len() != n {
        return Err(Error::Alist { line: l, msg: format!("expected {n} column degrees, found {}", vdeg.len()) });
    }
    if let Some(d) = vdeg.iter().find(|&&d| d > max_v) {
        return Err(Error::Alist { line: l, msg: format!("column degree {d} exceeds the maximum {max_v}") });
    }
    let (l, cdeg) = lines.next_numbers("row degrees")?;
    if cdeg.len() != m {
        return Err(Error::Alist { line: l, msg: format!("expected {m} row degrees, found {}", cdeg.len()) });
    }
    if let Some(d) = cdeg.iter().find(|&&d| d > max_c) {
        return Err(Error::Alist { line: l, msg: format!("row degree {d} exceeds the maximum {max_c}") });
    }
    let mut cols = Vec::with_capacity(n);
    for (i, &d) in vdeg.iter().enumerate() {
        cols.push(neighbor_list(&mut lines, "column", i, d, max_v, m)?);
    }
    let mut rows = Vec::with_capacity(m);
    for (j, &d) in cdeg.iter().enumerate() {
        rows.push(neighbor_list(&mut lines, "row", j, d, max_c, n)?);
    }
    for (i, (line, col)) in cols.iter().enumerate() {
        for &j in col {
            if !rows[j].1.contains(&i) {
                return Err(Error::Alist {
                    line: *line,
                    msg: format!("edge (column {}, row {}) is missing from the row list", i + 1, j + 1),
                });
            }
        }
    }
    for (j, (line, row)) in rows.iter().enumerate() {
        for &i in row {
            if !cols[i].1.contains(&j) {
                return Err(Error::Alist {
                    line: *line,
                    msg: format!("edge (row {}, column {}) is missing from the column list", j + 1, i + 1),
                });
            }
        }
    }
    let checks: Vec<Vec<usize>> = rows.into_iter().map(|(_, r)| r).collect();
    TannerGraph::from_checks(n, &checks).map_err(|e| Error::Alist { line: 0, msg: e.to_string() })
}
