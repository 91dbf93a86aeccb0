//! Finite Markov chains: kernels, standard walk builders, and distribution
//! evolution.
//!
//! Kernels are stored sparsely (per-row `(column, probability)` lists) with a
//! dense fallback below [`DENSE_CUTOFF`] states: wreath-product chains explode
//! in size while base chains are tiny. Every constructor validates the chain
//! invariants — row-stochasticity, non-negativity, stationarity of π, and
//! detailed balance where the reversible flag is set.

use serde::{Deserialize, Serialize};

use crate::linalg::neumaier_sum;
use crate::{Error, Result};

/// Hard cap on explicit state counts. Subset DPs and explicit wreath chains
/// must refuse gracefully rather than exhaust memory.
pub const DEFAULT_STATE_CAP: usize = 1 << 22;

/// Below this state count kernels are stored densely.
pub const DENSE_CUTOFF: usize = 64;

const ROW_SUM_TOL: f64 = 1e-12;
const FROM_KERNEL_ROW_TOL: f64 = 1e-9;
const STATIONARY_TOL: f64 = 1e-10;
const DETAILED_BALANCE_TOL: f64 = 1e-12;

/// Row-stochastic transition kernel.
#[derive(Debug, Clone)]
pub enum Kernel {
    Dense { n: usize, data: Vec<f64> },
    Sparse { n: usize, rows: Vec<Vec<(usize, f64)>> },
}

impl Kernel {
    /// Build from sparse rows, choosing the storage layout by size.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        if n < DENSE_CUTOFF {
            let mut data = vec![0.0; n * n];
            for (x, row) in rows.iter().enumerate() {
                for &(y, p) in row {
                    data[x * n + y] += p;
                }
            }
            Kernel::Dense { n, data }
        } else {
            Kernel::Sparse { n, rows }
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        match self {
            Kernel::Dense { n, .. } | Kernel::Sparse { n, .. } => *n,
        }
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        match self {
            Kernel::Dense { n, data } => data[x * n + y],
            Kernel::Sparse { rows, .. } => rows[x]
                .iter()
                .filter(|&&(c, _)| c == y)
                .map(|&(_, p)| p)
                .sum(),
        }
    }

    #[inline]
    pub fn for_each_in_row(&self, x: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            Kernel::Dense { n, data } => {
                for (y, &p) in data[x * n..(x + 1) * n].iter().enumerate() {
                    if p != 0.0 {
                        f(y, p);
                    }
                }
            }
            Kernel::Sparse { rows, .. } => {
                for &(y, p) in &rows[x] {
                    f(y, p);
                }
            }
        }
    }

    /// Row sum via compensated summation.
    pub fn row_sum(&self, x: usize) -> f64 {
        match self {
            Kernel::Dense { n, data } => neumaier_sum(data[x * n..(x + 1) * n].iter().copied()),
            Kernel::Sparse { rows, .. } => neumaier_sum(rows[x].iter().map(|&(_, p)| p)),
        }
    }

    /// `dist · P` (one step of distribution evolution).
    pub fn apply_left(&self, dist: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(dist.len(), n);
        let mut out = vec![0.0; n];
        match self {
            Kernel::Dense { n, data } => {
                for (x, &d) in dist.iter().enumerate() {
                    if d != 0.0 {
                        for (o, &p) in out.iter_mut().zip(&data[x * n..(x + 1) * n]) {
                            *o += d * p;
                        }
                    }
                }
            }
            Kernel::Sparse { rows, .. } => {
                for (x, &d) in dist.iter().enumerate() {
                    if d != 0.0 {
                        for &(y, p) in &rows[x] {
                            out[y] += d * p;
                        }
                    }
                }
            }
        }
        out
    }

    /// `P · f` (one step of function evolution).
    pub fn apply_right(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(f.len(), n);
        match self {
            Kernel::Dense { n, data } => (0..*n)
                .map(|x| {
                    data[x * n..(x + 1) * n]
                        .iter()
                        .zip(f)
                        .map(|(p, v)| p * v)
                        .sum()
                })
                .collect(),
            Kernel::Sparse { rows, .. } => rows
                .iter()
                .map(|row| row.iter().map(|&(y, p)| p * f[y]).sum())
                .collect(),
        }
    }

    /// Sparse row view (allocates for dense storage).
    pub fn sparse_row(&self, x: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_in_row(x, |y, p| out.push((y, p)));
        out
    }
}

/// A finite Markov chain with validated stationary distribution.
///
/// Immutable after construction and safe to share across threads; all
/// operations on it are pure.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    kernel: Kernel,
    stationary: Vec<f64>,
    labels: Option<Vec<String>>,
    reversible: bool,
    laziness: f64,
}

impl MarkovChain {
    fn assemble(
        kernel: Kernel,
        stationary: Vec<f64>,
        labels: Option<Vec<String>>,
        reversible: bool,
        laziness: f64,
    ) -> Result<Self> {
        let chain = Self { kernel, stationary, labels, reversible, laziness };
        chain.validate()?;
        Ok(chain)
    }

    /// Check the construction invariants: rows sum to 1 within 1e-12, all
    /// entries non-negative, πP = π within 1e-10, and detailed balance within
    /// 1e-12 when the reversible flag is set.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_states();
        if self.stationary.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.stationary.len() });
        }
        for x in 0..n {
            let mut bad: Option<(usize, f64)> = None;
            self.kernel.for_each_in_row(x, |y, p| {
                if p < 0.0 && bad.is_none() {
                    bad = Some((y, p));
                }
            });
            if let Some((y, p)) = bad {
                return Err(Error::NegativeEntry { row: x, col: y, value: p });
            }
            let sum = self.kernel.row_sum(x);
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NonStochasticRow { row: x, sum });
            }
        }
        let total = neumaier_sum(self.stationary.iter().copied());
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "stationary sums to {total}"
            )));
        }
        if let Some(state) = self.stationary.iter().position(|&p| p <= 0.0) {
            return Err(Error::AbsoluteContinuity { state });
        }
        let image = self.kernel.apply_left(&self.stationary);
        for (x, (&a, &b)) in image.iter().zip(&self.stationary).enumerate() {
            if (a - b).abs() > STATIONARY_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "stationary residual {:.3e} at state {x}",
                    a - b
                )));
            }
        }
        if self.reversible && !detailed_balance_holds(&self.kernel, &self.stationary) {
            return Err(Error::InvalidDistribution(
                "reversible flag set but detailed balance fails".into(),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn n_states(&self) -> usize {
        self.kernel.n()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// π_* = min_x π(x).
    pub fn min_stationary(&self) -> f64 {
        self.stationary.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_uniform_stationary(&self) -> bool {
        let n = self.n_states() as f64;
        self.stationary.iter().all(|&p| (p - 1.0 / n).abs() <= 1e-9 / n)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn reversible(&self) -> bool {
        self.reversible
    }

    pub fn laziness(&self) -> f64 {
        self.laziness
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.kernel.entry(x, y)
    }
}

/// Crate-internal constructor for modules that build kernels directly
/// (wreath products); runs the full validator.
pub(crate) fn assemble_validated(
    kernel: Kernel,
    stationary: Vec<f64>,
    labels: Option<Vec<String>>,
    reversible: bool,
    laziness: f64,
) -> Result<MarkovChain> {
    MarkovChain::assemble(kernel, stationary, labels, reversible, laziness)
}

pub(crate) fn detailed_balance_holds(kernel: &Kernel, pi: &[f64]) -> bool {
    let n = kernel.n();
    let mut ok = true;
    for x in 0..n {
        kernel.for_each_in_row(x, |y, p| {
            let back = kernel.entry(y, x);
            if (pi[x] * p - pi[y] * back).abs() > DETAILED_BALANCE_TOL {
                ok = false;
            }
        });
        if !ok {
            return false;
        }
    }
    true
}

fn check_laziness(laziness: f64) -> Result<()> {
    if !(0.0..1.0).contains(&laziness) {
        return Err(Error::InvalidLaziness(laziness));
    }
    Ok(())
}

/// Lazy simple random walk on the n-cycle: each neighbor with probability
/// (1−laziness)/2, hold with probability laziness.
pub fn build_cycle(n: usize, laziness: f64) -> Result<MarkovChain> {
    if n < 3 {
        return Err(Error::InvalidSize { what: "cycle size", min: 3, got: n });
    }
    check_laziness(laziness)?;
    let step = (1.0 - laziness) / 2.0;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| {
            let mut row = vec![((x + 1) % n, step), ((x + n - 1) % n, step)];
            if laziness > 0.0 {
                row.push((x, laziness));
            }
            row.sort_by_key(|&(c, _)| c);
            row
        })
        .collect();
    MarkovChain::assemble(
        Kernel::from_rows(n, rows),
        vec![1.0 / n as f64; n],
        None,
        true,
        laziness,
    )
}

/// Lazy walk on the side×side 2-d torus: each of the 4 lattice neighbors with
/// probability (1−laziness)/4. State index is `row * side + col`.
pub fn build_torus2d(side: usize, laziness: f64) -> Result<MarkovChain> {
    if side < 3 {
        return Err(Error::InvalidSize { what: "torus side", min: 3, got: side });
    }
    check_laziness(laziness)?;
    let n = side * side;
    if n > DEFAULT_STATE_CAP {
        return Err(Error::Capacity {
            what: "torus states",
            requested: n,
            cap: DEFAULT_STATE_CAP,
            hint: "reduce the side length",
        });
    }
    let step = (1.0 - laziness) / 4.0;
    let idx = |r: usize, c: usize| r * side + c;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| {
            let (r, c) = (x / side, x % side);
            let mut row = vec![
                (idx((r + 1) % side, c), step),
                (idx((r + side - 1) % side, c), step),
                (idx(r, (c + 1) % side), step),
                (idx(r, (c + side - 1) % side), step),
            ];
            if laziness > 0.0 {
                row.push((x, laziness));
            }
            row.sort_by_key(|&(col, _)| col);
            // Merge duplicates (side == 3 wraps two directions onto one cell).
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (col, p) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == col => last.1 += p,
                    _ => merged.push((col, p)),
                }
            }
            merged
        })
        .collect();
    MarkovChain::assemble(
        Kernel::from_rows(n, rows),
        vec![1.0 / n as f64; n],
        None,
        true,
        laziness,
    )
}

/// Lazy walk on the dim-dimensional hypercube: flips each coordinate with
/// probability (1−laziness)/dim.
pub fn build_hypercube(dim: usize, laziness: f64) -> Result<MarkovChain> {
    if dim < 1 {
        return Err(Error::InvalidSize { what: "hypercube dimension", min: 1, got: dim });
    }
    check_laziness(laziness)?;
    if dim >= 63 || (1usize << dim) > DEFAULT_STATE_CAP {
        return Err(Error::Capacity {
            what: "hypercube states",
            requested: if dim >= 63 { usize::MAX } else { 1 << dim },
            cap: DEFAULT_STATE_CAP,
            hint: "reduce the dimension",
        });
    }
    let n = 1usize << dim;
    let step = (1.0 - laziness) / dim as f64;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| {
            let mut row: Vec<(usize, f64)> = (0..dim).map(|b| (x ^ (1 << b), step)).collect();
            if laziness > 0.0 {
                row.push((x, laziness));
            }
            row.sort_by_key(|&(c, _)| c);
            row
        })
        .collect();
    MarkovChain::assemble(
        Kernel::from_rows(n, rows),
        vec![1.0 / n as f64; n],
        None,
        true,
        laziness,
    )
}

/// Walk on the complete graph. With self-loops every entry is 1/n (mixes in
/// one step); without, off-diagonal entries are 1/(n−1).
pub fn build_complete(n: usize, self_loops: bool) -> Result<MarkovChain> {
    if n < 2 {
        return Err(Error::InvalidSize { what: "complete graph size", min: 2, got: n });
    }
    let rows: Vec<Vec<(usize, f64)>> = if self_loops {
        let p = 1.0 / n as f64;
        (0..n).map(|_| (0..n).map(|y| (y, p)).collect()).collect()
    } else {
        let p = 1.0 / (n - 1) as f64;
        (0..n)
            .map(|x| (0..n).filter(|&y| y != x).map(|y| (y, p)).collect())
            .collect()
    };
    MarkovChain::assemble(
        Kernel::from_rows(n, rows),
        vec![1.0 / n as f64; n],
        None,
        true,
        0.0,
    )
}

/// Count strongly connected components of the support graph.
fn count_scc(rows: &[Vec<(usize, f64)>]) -> usize {
    let n = rows.len();
    // Kosaraju with iterative DFS.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < rows[v].len() {
                let (w, p) = rows[v][*i];
                *i += 1;
                if p > 0.0 && !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, row) in rows.iter().enumerate() {
        for &(y, p) in row {
            if p > 0.0 {
                rev[y].push(x);
            }
        }
    }
    let mut comp = 0usize;
    let mut seen = vec![false; n];
    for &start in order.iter().rev() {
        if seen[start] {
            continue;
        }
        comp += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    comp
}

/// Stationary distribution by power iteration on a strictly lazy copy
/// ((P+I)/2, used for the solve only), with a direct residual check on P.
fn solve_stationary(kernel: &Kernel) -> Result<Vec<f64>> {
    let n = kernel.n();
    let mut v = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..500_000 {
        let image = kernel.apply_left(&v);
        residual = image
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= 1e-13 {
            break;
        }
        // Lazy mix keeps periodic chains from oscillating.
        for (vi, im) in v.iter_mut().zip(image) {
            *vi = 0.5 * (*vi + im);
        }
        let total = neumaier_sum(v.iter().copied());
        for vi in &mut v {
            *vi /= total;
        }
    }
    if residual > 1e-11 {
        return Err(Error::StationaryNotConverged { residual });
    }
    let total = neumaier_sum(v.iter().copied());
    for vi in &mut v {
        *vi /= total;
    }
    Ok(v)
}

/// Build a chain from raw probability rows. Rows may be off-stochastic by up
/// to 1e-9 and are renormalized; the stationary distribution is solved for
/// and reversibility is detected by a detailed-balance test.
pub fn from_sparse_rows(
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    labels: Option<Vec<String>>,
) -> Result<MarkovChain> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rows.len() });
    }
    if n == 0 {
        return Err(Error::InvalidSize { what: "state count", min: 1, got: 0 });
    }
    if n > DEFAULT_STATE_CAP {
        return Err(Error::Capacity {
            what: "states",
            requested: n,
            cap: DEFAULT_STATE_CAP,
            hint: "the kernel is too large for explicit storage",
        });
    }
    let mut normalized = Vec::with_capacity(n);
    for (x, row) in rows.into_iter().enumerate() {
        for &(y, p) in &row {
            if y >= n {
                return Err(Error::IndexOutOfBounds { row: x, col: y, n });
            }
            if p < 0.0 {
                return Err(Error::NegativeEntry { row: x, col: y, value: p });
            }
        }
        let sum = neumaier_sum(row.iter().map(|&(_, p)| p));
        if (sum - 1.0).abs() > FROM_KERNEL_ROW_TOL {
            return Err(Error::NonStochasticRow { row: x, sum });
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        let mut sorted = row;
        sorted.sort_by_key(|&(c, _)| c);
        for (c, p) in sorted {
            if p == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += p,
                _ => merged.push((c, p)),
            }
        }
        for e in &mut merged {
            e.1 /= sum;
        }
        normalized.push(merged);
    }

    let components = count_scc(&normalized);
    if components > 1 {
        return Err(Error::ReducibleChain { components });
    }

    let kernel = Kernel::from_rows(n, normalized);
    let stationary = solve_stationary(&kernel)?;
    let reversible = detailed_balance_holds(&kernel, &stationary);
    MarkovChain::assemble(kernel, stationary, labels, reversible, 0.0)
}

/// Dense-row convenience wrapper around [`from_sparse_rows`].
pub fn from_dense_rows(rows: Vec<Vec<f64>>) -> Result<MarkovChain> {
    let n = rows.len();
    let sparse = rows
        .into_iter()
        .enumerate()
        .map(|(x, row)| {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            let _ = x;
            Ok(row
                .into_iter()
                .enumerate()
                .filter(|&(_, p)| p != 0.0)
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    from_sparse_rows(n, sparse, None)
}

/// A probability vector over the states of a chain at a given time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionVector {
    probs: Vec<f64>,
    time: u64,
}

impl DistributionVector {
    pub fn from_probs(probs: Vec<f64>, time: u64) -> Result<Self> {
        if let Some(state) = probs.iter().position(|&p| p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "negative mass at state {state}"
            )));
        }
        let total = neumaier_sum(probs.iter().copied());
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("mass sums to {total}")));
        }
        Ok(Self { probs, time })
    }

    /// Point mass at `state`.
    pub fn point(n: usize, state: usize) -> Result<Self> {
        if state >= n {
            return Err(Error::InvalidState { state, n });
        }
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Ok(Self { probs, time: 0 })
    }

    pub fn uniform(n: usize) -> Self {
        Self { probs: vec![1.0 / n as f64; n], time: 0 }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// `dist · P^steps`, with the time field advanced by `steps`.
pub fn evolve(chain: &MarkovChain, dist: &DistributionVector, steps: u64) -> Result<DistributionVector> {
    if dist.probs.len() != chain.n_states() {
        return Err(Error::DimensionMismatch {
            expected: chain.n_states(),
            got: dist.probs.len(),
        });
    }
    let mut probs = dist.probs.clone();
    for _ in 0..steps {
        probs = chain.kernel().apply_left(&probs);
    }
    Ok(DistributionVector { probs, time: dist.time + steps })
}

/// Chain-definition file format: `{ "n": int, "rows": [[[col, prob], ...]], "labels": [...]? }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainFile {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ChainFile {
    pub fn from_chain(chain: &MarkovChain) -> Self {
        let n = chain.n_states();
        Self {
            n,
            rows: (0..n).map(|x| chain.kernel().sparse_row(x)).collect(),
            labels: chain.labels().map(|l| l.to_vec()),
        }
    }

    pub fn build(self) -> Result<MarkovChain> {
        from_sparse_rows(self.n, self.rows, self.labels)
    }
}

/// Declarative chain description used by the CLI and the experiment runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainSpec {
    Cycle { n: usize, laziness: f64 },
    Torus2d { side: usize, laziness: f64 },
    Hypercube { dim: usize, laziness: f64 },
    Complete { n: usize, self_loops: bool },
    Raw { rows: Vec<Vec<f64>> },
}

impl ChainSpec {
    pub fn build(&self) -> Result<MarkovChain> {
        match self {
            ChainSpec::Cycle { n, laziness } => build_cycle(*n, *laziness),
            ChainSpec::Torus2d { side, laziness } => build_torus2d(*side, *laziness),
            ChainSpec::Hypercube { dim, laziness } => build_hypercube(*dim, *laziness),
            ChainSpec::Complete { n, self_loops } => build_complete(*n, *self_loops),
            ChainSpec::Raw { rows } => from_dense_rows(rows.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ChainSpec::Cycle { n, laziness } => format!("cycle:{n}(lazy={laziness})"),
            ChainSpec::Torus2d { side, laziness } => format!("torus2d:{side}(lazy={laziness})"),
            ChainSpec::Hypercube { dim, laziness } => format!("hypercube:{dim}(lazy={laziness})"),
            ChainSpec::Complete { n, self_loops } => format!("complete:{n}(loops={self_loops})"),
            ChainSpec::Raw { rows } => format!("raw:{}", rows.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn cycle_matches_definition() {
        let c = build_cycle(4, 0.0).unwrap();
        assert_eq!(c.entry(0, 1), 0.5);
        assert_eq!(c.entry(0, 3), 0.5);
        assert_eq!(c.entry(0, 0), 0.0);
        assert!(c.reversible());

        let lazy = build_cycle(3, 0.5).unwrap();
        assert_eq!(lazy.entry(0, 0), 0.5);
        assert_eq!(lazy.entry(0, 1), 0.25);
        assert_eq!(lazy.entry(0, 2), 0.25);

        let c6 = build_cycle(6, 0.0).unwrap();
        for &p in c6.stationary() {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }

        assert!(matches!(build_cycle(2, 0.0), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn torus_matches_definition() {
        let t = build_torus2d(3, 0.0).unwrap();
        assert_eq!(t.n_states(), 9);
        for x in 0..9 {
            let row = t.kernel().sparse_row(x);
            assert_eq!(row.len(), 4);
            for &(_, p) in &row {
                assert!((p - 0.25).abs() < 1e-15);
            }
        }
        let t4 = build_torus2d(4, 0.0).unwrap();
        for &p in t4.stationary() {
            assert!((p - 1.0 / 16.0).abs() < 1e-15);
        }
        let lazy = build_torus2d(3, 0.5).unwrap();
        for x in 0..9 {
            assert!((lazy.entry(x, x) - 0.5).abs() < 1e-15);
        }
        assert!(matches!(build_torus2d(2, 0.0), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn hypercube_matches_definition() {
        let h1 = build_hypercube(1, 0.0).unwrap();
        assert_eq!(h1.n_states(), 2);
        assert_eq!(h1.entry(0, 1), 1.0);
        assert_eq!(h1.entry(1, 0), 1.0);

        let h3 = build_hypercube(3, 0.5).unwrap();
        assert!((h3.entry(0, 0) - 0.5).abs() < 1e-15);
        for b in 0..3 {
            assert!((h3.entry(0, 1 << b) - 1.0 / 6.0).abs() < 1e-15);
        }

        // Period-2 chain is still a valid reversible chain.
        let h2 = build_hypercube(2, 0.0).unwrap();
        assert!(h2.reversible());

        assert!(matches!(build_hypercube(63, 0.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn complete_matches_definition() {
        let k = build_complete(4, true).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert!((k.entry(x, y) - 0.25).abs() < 1e-15);
            }
        }
        let k = build_complete(4, false).unwrap();
        for x in 0..4 {
            assert_eq!(k.entry(x, x), 0.0);
            for y in 0..4 {
                if y != x {
                    assert!((k.entry(x, y) - 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
        let swap = build_complete(2, false).unwrap();
        assert_eq!(swap.entry(0, 1), 1.0);
        assert_eq!(swap.entry(1, 0), 1.0);
    }

    #[test]
    fn from_kernel_rejects_identity() {
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        match from_dense_rows(rows) {
            Err(Error::ReducibleChain { components }) => assert_eq!(components, 3),
            other => panic!("expected reducibility error, got {other:?}"),
        }
    }

    #[test]
    fn from_kernel_round_trips_cycle() {
        let original = build_cycle(4, 0.0).unwrap();
        let file = ChainFile::from_chain(&original);
        let rebuilt = file.build().unwrap();
        assert!(rebuilt.reversible());
        assert_eq!(rebuilt.n_states(), 4);
        for x in 0..4 {
            for y in 0..4 {
                assert!((rebuilt.entry(x, y) - original.entry(x, y)).abs() < 1e-15);
            }
            assert!((rebuilt.stationary()[x] - 0.25).abs() < 1e-11);
        }
    }

    #[test]
    fn from_kernel_two_state_stationary() {
        // Hand oracle: balance equation π0·0.1 = π1·0.2 gives π = (2/3, 1/3).
        let chain = from_dense_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!((chain.stationary()[0] - 2.0 / 3.0).abs() < 1e-11);
        assert!((chain.stationary()[1] - 1.0 / 3.0).abs() < 1e-11);
        assert!(chain.reversible());
    }

    #[test]
    fn from_kernel_rejects_bad_rows() {
        let err = from_dense_rows(vec![vec![0.5, 0.4], vec![0.5, 0.5]]);
        match err {
            Err(Error::NonStochasticRow { row, .. }) => assert_eq!(row, 0),
            other => panic!("expected row error, got {other:?}"),
        }
        let err = from_dense_rows(vec![vec![1.1, -0.1], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(Error::NegativeEntry { .. })));
    }

    #[test]
    fn evolve_point_on_cycle() {
        let chain = build_cycle(4, 0.0).unwrap();
        let start = DistributionVector::point(4, 0).unwrap();
        let out = evolve(&chain, &start, 2).unwrap();
        let want = [0.5, 0.0, 0.5, 0.0];
        for (g, w) in out.probs().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert_eq!(out.time(), 2);
    }

    #[test]
    fn evolve_fixes_stationary_and_mixes_complete() {
        let chain = build_cycle(5, 0.3).unwrap();
        let pi = DistributionVector::from_probs(chain.stationary().to_vec(), 0).unwrap();
        let out = evolve(&chain, &pi, 17).unwrap();
        assert!(linf_distance(out.probs(), chain.stationary()) < 1e-14);

        let k = build_complete(6, true).unwrap();
        let start = DistributionVector::point(6, 2).unwrap();
        let out = evolve(&k, &start, 1).unwrap();
        for &p in out.probs() {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn evolve_dimension_mismatch() {
        let chain = build_cycle(4, 0.0).unwrap();
        let start = DistributionVector::point(5, 0).unwrap();
        assert!(matches!(
            evolve(&chain, &start, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn chain_spec_builds_and_describes() {
        let spec = ChainSpec::Hypercube { dim: 3, laziness: 0.5 };
        let chain = spec.build().unwrap();
        assert_eq!(chain.n_states(), 8);
        assert!(spec.describe().starts_with("hypercube:3"));
    }
}
