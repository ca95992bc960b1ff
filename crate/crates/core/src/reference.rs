//! Exact reference laws and moments: Poisson pmf and moments through
//! Stirling numbers, and the limiting joint moments of the large-d law via
//! the set-partition formula. Moments are exact rationals; only pmfs go
//! through floats.

use std::collections::BTreeMap;

use num::{BigRational, BigUint, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::counting::CountVector;
use crate::error::{Error, Result};
use crate::spectrum::{group_centers, CenterSymbol};

/// Largest moment query we enumerate partitions for; Bell(12) ~ 4.2e6.
pub const MAX_QUERY_ENTRIES: usize = 12;

fn ln_factorial(k: u64) -> f64 {
    // exact cumulative sum; k stays desk scale (pmf tails truncate long before)
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Poisson weight e^{-sigma} sigma^k / k!, evaluated in log space.
pub fn poisson_pmf(sigma: f64, k: u64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::NonPositivePoissonParam(sigma));
    }
    if k == 0 {
        return Ok((-sigma).exp());
    }
    Ok((-sigma + k as f64 * sigma.ln() - ln_factorial(k)).exp())
}

/// Product of independent Poisson weights, one per component.
pub fn product_poisson_pmf(sigmas: &[f64], counts: &CountVector) -> Result<f64> {
    if sigmas.len() != counts.len() {
        return Err(Error::LengthMismatch(sigmas.len(), counts.len()));
    }
    let mut p = 1.0;
    for (&s, &k) in sigmas.iter().zip(counts) {
        p *= poisson_pmf(s, k)?;
    }
    Ok(p)
}

/// Stirling number of the second kind: partitions of an n-set into k
/// nonempty blocks, by the recurrence S(n,k) = k S(n-1,k) + S(n-1,k-1).
pub fn stirling2(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one(); // S(0,0)
    }
    if k == 0 {
        return BigUint::zero();
    }
    let mut prev: Vec<BigUint> = vec![BigUint::zero(); k + 1];
    prev[0] = BigUint::one();
    for i in 1..=n {
        let mut curr = vec![BigUint::zero(); k + 1];
        for j in 1..=k.min(i) {
            curr[j] = &prev[j] * BigUint::from(j) + &prev[j - 1];
        }
        prev = curr;
        prev[0] = BigUint::zero();
    }
    prev[k].clone()
}

/// n-th raw moment of Pois(sigma): sum_{k=1}^n S(n,k) sigma^k.
pub fn poisson_moment(sigma: f64, n: usize) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::NonPositivePoissonParam(sigma));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut acc = 0.0;
    for k in 1..=n {
        let s = stirling2(n, k);
        acc += biguint_to_f64(&s) * sigma.powi(k as i32);
    }
    Ok(acc)
}

/// Exact-rational variant of [`poisson_moment`].
pub fn poisson_moment_rational(sigma: &BigRational, n: usize) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    let mut acc = BigRational::zero();
    let mut power = BigRational::one();
    for k in 1..=n {
        power *= sigma;
        let s = BigRational::from_integer(stirling2(n, k).into());
        acc += s * &power;
    }
    acc
}

fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse::<f64>().unwrap_or(f64::INFINITY)
}

/// One unit moment factor: an interval (lo, hi) attached to a center
/// equality group. An order-k moment of one component is k duplicated
/// entries for that component.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEntry {
    pub group: usize,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl MomentEntry {
    pub fn new(group: usize, lo: BigRational, hi: BigRational) -> Result<Self> {
        if hi <= lo {
            return Err(Error::EmptyRationalInterval);
        }
        Ok(MomentEntry { group, lo, hi })
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

/// A mixed-moment query: entries partitioned into groups by center
/// equality. Group ids must index a partition of the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentQuery {
    entries: Vec<MomentEntry>,
}

impl MomentQuery {
    pub fn new(entries: Vec<MomentEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyQuery);
        }
        if entries.len() > MAX_QUERY_ENTRIES {
            return Err(Error::QueryTooLarge(entries.len()));
        }
        Ok(MomentQuery { entries })
    }

    /// Build from (center, interval) pairs; groups come from symbol equality.
    pub fn from_centers(items: &[(CenterSymbol, BigRational, BigRational)]) -> Result<Self> {
        let symbols: Vec<CenterSymbol> = items.iter().map(|(s, _, _)| s.clone()).collect();
        let groups = group_centers(&symbols);
        let mut group_of = vec![0usize; items.len()];
        for (gid, members) in groups.iter().enumerate() {
            for &i in members {
                group_of[i] = gid;
            }
        }
        let entries = items
            .iter()
            .enumerate()
            .map(|(i, (_, lo, hi))| MomentEntry::new(group_of[i], lo.clone(), hi.clone()))
            .collect::<Result<Vec<_>>>()?;
        MomentQuery::new(entries)
    }

    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    /// Entry indices per group, in group-id order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            map.entry(e.group).or_default().push(i);
        }
        map.into_values().collect()
    }

    /// Product of all interval lengths: the value the moment takes when
    /// every block is a singleton (the independent case).
    pub fn product_of_lengths(&self) -> BigRational {
        self.entries
            .iter()
            .fold(BigRational::one(), |acc, e| acc * e.length())
    }

    /// The arithmetic-obstruction criterion on the query: every pair of
    /// entries in the same group has disjoint open intervals.
    pub fn is_independent(&self) -> bool {
        for (i, a) in self.entries.iter().enumerate() {
            for b in self.entries.iter().skip(i + 1) {
                if a.group == b.group && a.lo < b.hi && b.lo < a.hi {
                    return false;
                }
            }
        }
        true
    }
}

/// Visit every set partition of {0..n-1} as a restricted-growth string
/// (block id per element).
fn for_each_partition(n: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(a: &mut Vec<usize>, i: usize, max_used: usize, f: &mut impl FnMut(&[usize])) {
        if i == a.len() {
            f(a);
            return;
        }
        for b in 0..=max_used + 1 {
            a[i] = b;
            rec(a, i + 1, max_used.max(b), f);
        }
    }
    if n == 0 {
        f(&[]);
        return;
    }
    let mut a = vec![0usize; n];
    // first element always opens block 0
    rec(&mut a, 1, 0, f);
}

fn intersection_length(entries: &[MomentEntry], block: &[usize]) -> BigRational {
    let mut lo = entries[block[0]].lo.clone();
    let mut hi = entries[block[0]].hi.clone();
    for &i in &block[1..] {
        if entries[i].lo > lo {
            lo = entries[i].lo.clone();
        }
        if entries[i].hi < hi {
            hi = entries[i].hi.clone();
        }
    }
    let len = hi - lo;
    if len.is_positive() {
        len
    } else {
        BigRational::zero()
    }
}

/// The order-(k^1..k^n) mixed moment of the large-d limit law, in exact
/// rational arithmetic: a sum over set partitions of the entry set whose
/// blocks stay inside one center group, each block weighted by the length
/// of the intersection of its intervals. Moments split as a product over
/// groups, so partitions are enumerated per group.
pub fn limiting_joint_moment(query: &MomentQuery) -> Result<BigRational> {
    let entries = query.entries();
    if entries.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut total = BigRational::one();
    for group in query.groups() {
        let mut group_sum = BigRational::zero();
        for_each_partition(group.len(), &mut |assignment| {
            let nblocks = assignment.iter().max().copied().unwrap_or(0) + 1;
            let mut term = BigRational::one();
            for b in 0..nblocks {
                let block: Vec<usize> = assignment
                    .iter()
                    .enumerate()
                    .filter(|&(_, &a)| a == b)
                    .map(|(i, _)| group[i])
                    .collect();
                term *= intersection_length(entries, &block);
                if term.is_zero() {
                    break;
                }
            }
            group_sum += term;
        });
        total *= group_sum;
    }
    Ok(total)
}

/// A normalized reference law on count vectors, evaluable per cell.
/// Product-Poisson references pool each coordinate's tail mass above the
/// overflow cap into the cap cell, so total mass is exactly 1; table
/// references carry whatever mass their cells hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReferencePmf {
    ProductPoisson {
        sigmas: Vec<f64>,
        cap: u64,
        /// Per coordinate: index k < cap holds pmf(k), index cap holds the tail.
        coord_tables: Vec<Vec<f64>>,
        description: String,
    },
    Table {
        dims: usize,
        cells: BTreeMap<CountVector, f64>,
        description: String,
    },
}

impl ReferencePmf {
    /// Product of independent Poisson laws, pooled at `cap`.
    pub fn product_poisson(sigmas: &[f64], cap: u64) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::NoIntervals);
        }
        let mut coord_tables = Vec::with_capacity(sigmas.len());
        for &s in sigmas {
            let mut table = Vec::with_capacity(cap as usize + 1);
            let mut below = 0.0;
            for k in 0..cap {
                let p = poisson_pmf(s, k)?;
                table.push(p);
                below += p;
            }
            table.push((1.0 - below).max(0.0)); // pooled tail
            coord_tables.push(table);
        }
        let description = format!(
            "product Poisson({})",
            sigmas
                .iter()
                .map(|s| format!("{s}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
        Ok(ReferencePmf::ProductPoisson {
            sigmas: sigmas.to_vec(),
            cap,
            coord_tables,
            description,
        })
    }

    /// Single Poisson law, pooled at `cap`.
    pub fn poisson(sigma: f64, cap: u64) -> Result<Self> {
        Self::product_poisson(&[sigma], cap)
    }

    pub fn table(dims: usize, cells: BTreeMap<CountVector, f64>, description: String) -> Self {
        ReferencePmf::Table {
            dims,
            cells,
            description,
        }
    }

    pub fn dims(&self) -> usize {
        match self {
            ReferencePmf::ProductPoisson { sigmas, .. } => sigmas.len(),
            ReferencePmf::Table { dims, .. } => *dims,
        }
    }

    pub fn description(&self) -> &str {
        match self {
            ReferencePmf::ProductPoisson { description, .. } => description,
            ReferencePmf::Table { description, .. } => description,
        }
    }

    /// Probability of a (cap-clamped) cell.
    pub fn prob(&self, counts: &[u64]) -> f64 {
        match self {
            ReferencePmf::ProductPoisson {
                cap, coord_tables, ..
            } => {
                let mut p = 1.0;
                for (table, &k) in coord_tables.iter().zip(counts) {
                    let idx = k.min(*cap) as usize;
                    p *= table[idx];
                }
                p
            }
            ReferencePmf::Table { cells, .. } => {
                cells.get(counts).copied().unwrap_or(0.0)
            }
        }
    }

    /// Cells with nonzero mass, when finitely enumerable.
    pub fn support(&self) -> Option<&BTreeMap<CountVector, f64>> {
        match self {
            ReferencePmf::Table { cells, .. } => Some(cells),
            ReferencePmf::ProductPoisson { .. } => None,
        }
    }

    /// Total mass: exactly 1 for pooled product laws, the cell sum for tables.
    pub fn total_mass(&self) -> f64 {
        match self {
            ReferencePmf::ProductPoisson { coord_tables, .. } => coord_tables
                .iter()
                .map(|t| t.iter().sum::<f64>())
                .product(),
            ReferencePmf::Table { cells, .. } => cells.values().sum(),
        }
    }
}
