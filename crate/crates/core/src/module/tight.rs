use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rips::{Bar, Barcode, Death};

use super::linalg::{contains, intersection, same_span, sum};
use super::{FpMatrix, ModuleMorphism, PersistenceModule, ScaleGrid};

/// A bar on a grid, given by the first and last grid indices (zero-based)
/// where it is alive. `last == grid.len() - 1` means it persists to the end
/// of the grid and is reported with infinite death.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridInterval {
    pub first: usize,
    pub last: usize,
}

impl GridInterval {
    pub fn to_bar(self, grid: &ScaleGrid, dim: usize) -> Bar {
        let death = if self.last + 1 == grid.len() {
            Death::Infinite
        } else {
            Death::Finite(grid.scale(self.last).clone())
        };
        Bar::new(dim, grid.before(self.first).clone(), death)
    }

    /// Grid indices where `bar` is alive, if any.
    pub fn of_bar(grid: &ScaleGrid, bar: &Bar) -> Option<GridInterval> {
        let alive: Vec<usize> = (0..grid.len()).filter(|&i| bar.contains(grid.scale(i))).collect();
        Some(GridInterval { first: *alive.first()?, last: *alive.last()? })
    }
}

impl Barcode {
    /// What a module sampled on `grid` can see of this barcode: each bar
    /// becomes `(s_{i-1}, s_j]` over the grid indices `i..=j` where it is
    /// alive, with infinite death when it reaches the last scale.
    pub fn restrict_to_grid(&self, grid: &ScaleGrid) -> Barcode {
        let bars = self
            .bars()
            .iter()
            .filter_map(|b| GridInterval::of_bar(grid, b).map(|iv| iv.to_bar(grid, b.dim)))
            .collect();
        Barcode::new(self.field(), bars)
    }
}

fn rank_or_zero(r: &[Vec<usize>], i: isize, j: usize) -> i64 {
    if i < 0 || j >= r.len() {
        0
    } else {
        r[i as usize][j] as i64
    }
}

/// Interval decomposition of `m` by inclusion-exclusion on the rank
/// function of its bonding maps.
pub fn barcode_of_module(m: &PersistenceModule) -> Barcode {
    let r = m.rank_table();
    let k = m.grid().len();
    let mut bars = Vec::new();
    for i in 0..k {
        for j in i..k {
            let ii = i as isize;
            let mult = rank_or_zero(&r, ii, j) - rank_or_zero(&r, ii - 1, j) - rank_or_zero(&r, ii, j + 1)
                + rank_or_zero(&r, ii - 1, j + 1);
            assert!(mult >= 0, "negative interval multiplicity at ({i}, {j})");
            let bar = GridInterval { first: i, last: j }.to_bar(m.grid(), m.degree());
            bars.extend(std::iter::repeat_n(bar, mult as usize));
        }
    }
    Barcode::new(m.field(), bars)
}

/// `V_t` and `W_t` for one interval at one scale with `mu = dim V - dim W`.
#[derive(Clone, Debug)]
pub struct MultiplicityWorkspace {
    pub t: usize,
    pub interval: GridInterval,
    pub v_basis: FpMatrix,
    pub w_basis: FpMatrix,
    pub multiplicity: usize,
}

fn image_into(m: &PersistenceModule, from: isize, t: usize) -> FpMatrix {
    if from < 0 {
        FpMatrix::zeros(m.field(), m.dim(t), 0)
    } else {
        m.rho(from as usize, t).image()
    }
}

fn kernel_from(m: &PersistenceModule, t: usize, to: usize) -> FpMatrix {
    if to >= m.grid().len() {
        FpMatrix::identity(m.field(), m.dim(t))
    } else {
        m.rho(t, to).kernel()
    }
}

/// Counts the bars equal to `interval` through the spaces
/// `V_t = Im rho_{a,t} ∩ ker rho_{t,b+1}` and
/// `W_t = (Im rho_{a-1,t} ∩ ker rho_{t,b+1}) + (Im rho_{a,t} ∩ ker rho_{t,b})`,
/// where `a..=b` are the interval's grid indices and `a <= t <= b`.
/// For an interval that reaches the end of the grid `ker rho_{t,b+1}` is
/// the whole space, so `V_t` is an image and `W_t` adds the classes that
/// still die inside the grid.
pub fn multiplicity_via_vw(m: &PersistenceModule, t: usize, interval: GridInterval) -> Result<MultiplicityWorkspace> {
    let GridInterval { first, last } = interval;
    if first > last || last >= m.grid().len() {
        return Err(Error::InvalidInput("interval outside the grid".into()));
    }
    if t < first || t > last {
        return Err(Error::InvalidInput(format!("scale index {t} outside the interval {first}..={last}")));
    }
    let im_a = image_into(m, first as isize, t);
    let im_before = image_into(m, first as isize - 1, t);
    let ker_after = kernel_from(m, t, last + 1);
    let v = intersection(&im_a, &ker_after);
    let w = if last + 1 == m.grid().len() {
        sum(&im_before, &intersection(&im_a, &kernel_from(m, t, last)))
    } else {
        sum(&intersection(&im_before, &ker_after), &intersection(&im_a, &kernel_from(m, t, last)))
    };
    debug_assert!(same_span(&sum(&v, &w), &v), "W must lie in V");
    let multiplicity = v.cols() - w.cols();
    Ok(MultiplicityWorkspace { t, interval, v_basis: v, w_basis: w, multiplicity })
}

/// First grid pair where tightness fails, with a vector of
/// `phi_j(M_j) ∩ Im rho^N_{i,j}` outside `phi_j(Im rho^M_{i,j})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightnessWitness {
    pub i: usize,
    pub j: usize,
    pub vector: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightnessReport {
    pub tight: bool,
    pub pairs_checked: usize,
    pub witness: Option<TightnessWitness>,
}

/// Whether `phi(Im rho^M_{i,j}) = phi(M_j) ∩ Im rho^N_{i,j}` for all grid
/// pairs `i < j`.
pub fn check_tight(phi: &ModuleMorphism) -> Result<TightnessReport> {
    if !phi.is_injective() {
        return Err(Error::InvalidInput("morphism is not injective".into()));
    }
    let m = phi.source();
    let n = phi.target();
    let k = m.grid().len();
    let failures: Vec<Option<TightnessWitness>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let rho_m = m.rho_from(i);
            let rho_n = n.rho_from(i);
            for j in (i + 1)..k {
                let image = phi.component(j).mul(&rho_m[j - i]).image();
                let meet = intersection(&phi.component(j).image(), &rho_n[j - i].image());
                if image.cols() != meet.cols() {
                    let vector = (0..meet.cols())
                        .map(|c| meet.column(c))
                        .find(|v| !contains(&image, v))
                        .expect("a larger subspace has a vector outside the smaller one");
                    return Some(TightnessWitness { i, j, vector });
                }
            }
            None
        })
        .collect();
    let witness = failures.into_iter().flatten().next();
    Ok(TightnessReport { tight: witness.is_none(), pairs_checked: k * k.saturating_sub(1) / 2, witness })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarcodeInclusion {
    pub included: bool,
    /// Chosen injection, as `(bar of A, equal bar of X)`.
    pub matching: Vec<(Bar, Bar)>,
    /// Bars of A left without a partner.
    pub missing: Vec<Bar>,
}

/// Multiset inclusion of `b_a` in `b_x` with exact endpoints.
pub fn verify_barcode_inclusion(b_a: &Barcode, b_x: &Barcode) -> Result<BarcodeInclusion> {
    if b_a.field() != 0 && b_x.field() != 0 && b_a.field() != b_x.field() {
        return Err(Error::InvalidInput("barcodes over different fields".into()));
    }
    let mut used = vec![false; b_x.len()];
    let mut matching = Vec::new();
    let mut missing = Vec::new();
    for bar in b_a.bars() {
        match (0..b_x.len()).find(|&i| !used[i] && b_x.bars()[i] == *bar) {
            Some(i) => {
                used[i] = true;
                matching.push((bar.clone(), b_x.bars()[i].clone()));
            }
            None => missing.push(bar.clone()),
        }
    }
    Ok(BarcodeInclusion { included: missing.is_empty(), matching, missing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn grid(xs: &[&str]) -> ScaleGrid {
        ScaleGrid::new(xs.iter().map(|x| x.parse().unwrap()).collect()).unwrap()
    }

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn interval_module_barcode() {
        let g = grid(&["1", "2", "3", "4"]);
        let m = PersistenceModule::interval(2, g.clone(), 1, 2).unwrap();
        assert_eq!(barcode_of_module(&m).bars(), &[Bar::finite(0, q("1"), q("3"))]);
        let twice = m.direct_sum(&m).unwrap();
        let bc = barcode_of_module(&twice);
        assert_eq!(bc.multiplicity(&Bar::finite(0, q("1"), q("3"))), 2);
        let tail = PersistenceModule::interval(2, g, 0, 3).unwrap();
        assert_eq!(barcode_of_module(&tail).bars(), &[Bar::infinite(0, q("0"))]);
    }

    #[test]
    fn vw_counts_interval() {
        let g = grid(&["1", "2", "3", "4"]);
        let m = PersistenceModule::interval(3, g.clone(), 1, 2).unwrap();
        let twice = m.direct_sum(&m).unwrap();
        for t in 1..=2 {
            let iv = GridInterval { first: 1, last: 2 };
            assert_eq!(multiplicity_via_vw(&m, t, iv).unwrap().multiplicity, 1);
            assert_eq!(multiplicity_via_vw(&twice, t, iv).unwrap().multiplicity, 2);
            assert_eq!(multiplicity_via_vw(&m, t, GridInterval { first: 0, last: 2 }).unwrap().multiplicity, 0);
        }
        assert!(multiplicity_via_vw(&m, 3, GridInterval { first: 1, last: 2 }).is_err());
        let tail = PersistenceModule::interval(3, g, 2, 3).unwrap();
        assert_eq!(multiplicity_via_vw(&tail, 3, GridInterval { first: 2, last: 3 }).unwrap().multiplicity, 1);
    }

    #[test]
    fn half_open_counterexample_is_not_tight() {
        let g = grid(&["3/2", "5/2"]);
        let m = PersistenceModule::interval(2, g.clone(), 1, 1).unwrap();
        let n = PersistenceModule::interval(2, g, 0, 1).unwrap();
        let phi = ModuleMorphism::new(m, n, vec![FpMatrix::zeros(2, 1, 0), FpMatrix::identity(2, 1)]).unwrap();
        let report = check_tight(&phi).unwrap();
        assert!(!report.tight);
        assert_eq!(report.witness, Some(TightnessWitness { i: 0, j: 1, vector: vec![1] }));
    }

    #[test]
    fn summand_inclusion_is_tight() {
        let g = grid(&["3/2", "5/2", "7/2"]);
        let m = PersistenceModule::interval(2, g.clone(), 0, 1).unwrap();
        let other = PersistenceModule::interval(2, g, 1, 2).unwrap();
        let n = m.direct_sum(&other).unwrap();
        let comps = vec![
            FpMatrix::from_rows(2, 1, 1, &[vec![1]]),
            FpMatrix::from_rows(2, 2, 1, &[vec![1], vec![0]]),
            FpMatrix::zeros(2, 1, 0),
        ];
        let phi = ModuleMorphism::new(m.clone(), n, comps).unwrap();
        assert!(check_tight(&phi).unwrap().tight);
        assert!(check_tight(&ModuleMorphism::identity(&m)).unwrap().tight);
    }

    #[test]
    fn barcode_inclusion() {
        let a = Barcode::new(2, vec![Bar::finite(1, q("0"), q("1/3"))]);
        let x = Barcode::new(2, vec![Bar::finite(1, q("0"), q("1/3")), Bar::finite(1, q("0"), q("1/5"))]);
        assert!(verify_barcode_inclusion(&a, &x).unwrap().included);
        assert!(verify_barcode_inclusion(&x, &x).unwrap().included);
        let aa = Barcode::new(2, vec![Bar::finite(1, q("0"), q("1/3")); 2]);
        let one = Barcode::new(2, vec![Bar::finite(1, q("0"), q("1/3"))]);
        let report = verify_barcode_inclusion(&aa, &one).unwrap();
        assert!(!report.included);
        assert_eq!(report.missing.len(), 1);
    }

    #[test]
    fn grid_restriction() {
        let g = grid(&["1/4", "3/8", "1/2", "1"]);
        let bc = Barcode::new(2, vec![Bar::finite(1, q("1/4"), q("1/2")), Bar::finite(1, q("1/2"), q("3/4"))]);
        assert_eq!(bc.restrict_to_grid(&g).bars(), &[Bar::finite(1, q("1/4"), q("1/2"))]);
    }
}
