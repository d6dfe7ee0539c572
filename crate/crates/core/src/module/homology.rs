use crate::error::{Error, Result};
use crate::rips::{check_field, inv_mod, Filtration};

use super::{FpMatrix, ModuleMorphism, PersistenceModule, ScaleGrid};

/// Sparse chain over `F_p`, sorted by simplex index.
type Chain = Vec<(u32, u32)>;

fn axpy(target: &Chain, factor: u32, other: &Chain, p: u64) -> Chain {
    // target + factor * other
    let mut out = Vec::with_capacity(target.len() + other.len());
    let (mut i, mut k) = (0, 0);
    while i < target.len() || k < other.len() {
        if k >= other.len() || (i < target.len() && target[i].0 < other[k].0) {
            out.push(target[i]);
            i += 1;
        } else if i >= target.len() || other[k].0 < target[i].0 {
            out.push((other[k].0, (other[k].1 as u64 * factor as u64 % p) as u32));
            k += 1;
        } else {
            let c = ((target[i].1 as u64 + other[k].1 as u64 * factor as u64) % p) as u32;
            if c != 0 {
                out.push((target[i].0, c));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

fn boundary(f: &Filtration, j: usize, p: u32) -> Chain {
    let mut col: Chain = f
        .facets(j)
        .iter()
        .enumerate()
        .map(|(k, &row)| (row, if k % 2 == 0 { 1 } else { p - 1 }))
        .collect();
    col.sort_unstable();
    col
}

/// Reduces the boundary columns of every `dim`-simplex; returns the reduced
/// columns (by simplex) and, when `track`, the matching `V` columns.
fn reduce_dim(f: &Filtration, dim: usize, p: u32, track: bool) -> (Vec<Option<Chain>>, Vec<Option<Chain>>) {
    let pp = p as u64;
    let n = f.len();
    let mut owner = vec![u32::MAX; n];
    let mut reduced: Vec<Option<Chain>> = vec![None; n];
    let mut v: Vec<Option<Chain>> = vec![None; n];
    for j in 0..n {
        if f.dim(j) != dim {
            continue;
        }
        let mut col = if dim == 0 { Vec::new() } else { boundary(f, j, p) };
        let mut vj: Chain = vec![(j as u32, 1)];
        while let Some(&(low, c)) = col.last() {
            let o = owner[low as usize];
            if o == u32::MAX {
                break;
            }
            let pivot = reduced[o as usize].as_ref().expect("pivot stored");
            let lead = pivot.last().expect("non-empty").1 as u64;
            let factor = ((pp - c as u64 * inv_mod(lead, pp) % pp) % pp) as u32;
            col = axpy(&col, factor, pivot, pp);
            if track {
                vj = axpy(&vj, factor, v[o as usize].as_ref().expect("v stored"), pp);
            }
        }
        if let Some(&(low, _)) = col.last() {
            owner[low as usize] = j as u32;
        }
        reduced[j] = Some(col);
        if track {
            v[j] = Some(vj);
        }
    }
    (reduced, v)
}

/// Filtration-adapted basis of the `n`-cycles: one representative per
/// positive `n`-simplex, whose lowest entry is that simplex.
pub(crate) struct CycleBasis {
    p: u32,
    /// Positive `n`-simplices in filtration order.
    creators: Vec<usize>,
    /// Simplex that kills each creator, if any.
    killers: Vec<Option<usize>>,
    reps: Vec<Chain>,
    /// `slot[simplex]` = position in `creators`, or `usize::MAX`.
    slot: Vec<usize>,
}

impl CycleBasis {
    pub(crate) fn new(f: &Filtration, n: usize, p: u32) -> Self {
        let (up, _) = reduce_dim(f, n + 1, p, false);
        let (down, v) = reduce_dim(f, n, p, true);
        let mut killed_by = vec![None; f.len()];
        for (j, col) in up.iter().enumerate() {
            if let Some(&(low, _)) = col.as_ref().and_then(|c| c.last()) {
                killed_by[low as usize] = Some(j);
            }
        }
        let mut basis = CycleBasis { p, creators: Vec::new(), killers: Vec::new(), reps: Vec::new(), slot: vec![usize::MAX; f.len()] };
        for i in 0..f.len() {
            if f.dim(i) != n || !down[i].as_ref().is_some_and(|c| c.is_empty()) {
                continue;
            }
            let rep = match killed_by[i] {
                Some(j) => up[j].clone().expect("killer column"),
                None => v[i].clone().expect("tracked column"),
            };
            basis.slot[i] = basis.creators.len();
            basis.creators.push(i);
            basis.killers.push(killed_by[i]);
            basis.reps.push(rep);
        }
        basis
    }

    /// Creators alive in the prefix of length `k`, as positions.
    fn alive(&self, k: usize) -> Vec<usize> {
        (0..self.creators.len())
            .filter(|&c| self.creators[c] < k && self.killers[c].is_none_or(|j| j >= k))
            .collect()
    }

    /// Coordinates of an `n`-cycle of the prefix of length `k` in the basis
    /// of alive generators there.
    fn coordinates(&self, cycle: &Chain, k: usize, alive: &[usize]) -> Result<Vec<u32>> {
        let pp = self.p as u64;
        let mut z = cycle.clone();
        let mut coeff = vec![0u32; self.creators.len()];
        while let Some(&(low, c)) = z.last() {
            if low as usize >= k {
                return Err(Error::Internal("cycle leaves its subcomplex".into()));
            }
            let s = self.slot[low as usize];
            if s == usize::MAX {
                return Err(Error::Internal("chain is not a cycle".into()));
            }
            let lead = self.reps[s].last().expect("non-empty").1 as u64;
            let a = (c as u64 * inv_mod(lead, pp) % pp) as u32;
            coeff[s] = a;
            z = axpy(&z, ((pp - a as u64) % pp) as u32, &self.reps[s], pp);
        }
        Ok(alive.iter().map(|&s| coeff[s]).collect())
    }
}

struct Levels {
    prefix: Vec<usize>,
    alive: Vec<Vec<usize>>,
}

fn levels(f: &Filtration, grid: &ScaleGrid, basis: &CycleBasis) -> Levels {
    let prefix: Vec<usize> = grid.scales().iter().map(|s| f.prefix_len(s)).collect();
    let alive = prefix.iter().map(|&k| basis.alive(k)).collect();
    Levels { prefix, alive }
}

fn module_from(lv: &Levels, grid: &ScaleGrid, n: usize, p: u32) -> Result<PersistenceModule> {
    let dims: Vec<usize> = lv.alive.iter().map(Vec::len).collect();
    let mut maps = Vec::with_capacity(dims.len().saturating_sub(1));
    for i in 0..dims.len().saturating_sub(1) {
        let next = &lv.alive[i + 1];
        let mut m = FpMatrix::zeros(p, dims[i + 1], dims[i]);
        for (c, s) in lv.alive[i].iter().enumerate() {
            if let Ok(r) = next.binary_search(s) {
                m.set(r, c, 1);
            }
        }
        maps.push(m);
    }
    Ok(PersistenceModule::new(p, grid.clone(), dims, maps)?.with_degree(n))
}

/// `H_n` of the open Rips complexes of `f` at the grid scales, over `F_p`.
///
/// The basis at each scale consists of the classes of the filtration's
/// cycle representatives born before and not yet killed at that scale, so
/// bonding maps are partial identities in these bases.
pub fn homology_module(f: &Filtration, grid: &ScaleGrid, n: usize, p: u32) -> Result<PersistenceModule> {
    check_field(p)?;
    check_dim(f, n)?;
    let basis = CycleBasis::new(f, n, p);
    let lv = levels(f, grid, &basis);
    module_from(&lv, grid, n, p)
}

fn check_dim(f: &Filtration, n: usize) -> Result<()> {
    if n > f.max_dim() {
        return Err(Error::InvalidInput(format!(
            "dimension {n} exceeds the filtration's maximum homology dimension {}",
            f.max_dim()
        )));
    }
    Ok(())
}

/// Morphism `H_n(Rips(A)) -> H_n(Rips(X))` induced by including the samples
/// `a_idx` into the space of `fx`.
pub fn inclusion_morphism(
    a_idx: &[usize],
    fx: &Filtration,
    grid: &ScaleGrid,
    n: usize,
    p: u32,
) -> Result<ModuleMorphism> {
    check_field(p)?;
    check_dim(fx, n)?;
    let mut subset = a_idx.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if subset.is_empty() || subset.iter().any(|&i| i >= fx.point_count()) {
        return Err(Error::InvalidInput("subspace indices out of range".into()));
    }
    let (fa, parents) = fx.restrict(&subset);
    let basis_a = CycleBasis::new(&fa, n, p);
    let basis_x = CycleBasis::new(fx, n, p);
    let lv_a = levels(&fa, grid, &basis_a);
    let lv_x = levels(fx, grid, &basis_x);
    let m = module_from(&lv_a, grid, n, p)?;
    let big = module_from(&lv_x, grid, n, p)?;

    let mut components = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let mut columns = Vec::with_capacity(lv_a.alive[i].len());
        for &s in &lv_a.alive[i] {
            let mut lifted: Chain = basis_a.reps[s].iter().map(|&(idx, c)| (parents[idx as usize] as u32, c)).collect();
            lifted.sort_unstable();
            columns.push(basis_x.coordinates(&lifted, lv_x.prefix[i], &lv_x.alive[i])?);
        }
        components.push(FpMatrix::from_columns(p, lv_x.alive[i].len(), &columns));
    }
    ModuleMorphism::new(m, big, components).map_err(|e| Error::Internal(format!("inclusion-induced morphism: {e}")))
}
