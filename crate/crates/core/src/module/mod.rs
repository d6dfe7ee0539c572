//! Persistence modules on finite scale grids over a prime field.

mod homology;
pub mod linalg;
mod tight;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::rips::{check_field, Filtration};

pub use homology::{homology_module, inclusion_morphism};
pub use linalg::FpMatrix;
pub use tight::{
    barcode_of_module, check_tight, multiplicity_via_vw, verify_barcode_inclusion, BarcodeInclusion, GridInterval,
    MultiplicityWorkspace, TightnessReport, TightnessWitness,
};

/// Strictly increasing scales `s_1 < ... < s_k` above a floor `s_0`.
///
/// The floor is the left end of the parameter interval; a class already
/// present at `s_1` is reported as born at the floor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleGrid {
    floor: Rational,
    scales: Vec<Rational>,
}

impl ScaleGrid {
    /// Grid with floor 0.
    pub fn new(scales: Vec<Rational>) -> Result<Self> {
        ScaleGrid::with_floor(Rational::zero(), scales)
    }

    pub fn with_floor(floor: Rational, scales: Vec<Rational>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::InvalidInput("scale grid is empty".into()));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("scale grid is not strictly increasing".into()));
        }
        if scales[0] <= floor {
            return Err(Error::InvalidInput(format!("first scale {} is not above the floor {floor}", scales[0])));
        }
        Ok(ScaleGrid { floor, scales })
    }

    /// Every positive diameter of `f`, the midpoints between consecutive
    /// ones, and one scale beyond the largest (twice it), over floor 0.
    pub fn default_for(f: &Filtration) -> ScaleGrid {
        let positive: Vec<&Rational> = f.values().iter().filter(|v| v.is_positive()).collect();
        let Some(&last) = positive.last() else {
            return ScaleGrid { floor: Rational::zero(), scales: vec![Rational::one()] };
        };
        let mut scales = Vec::with_capacity(2 * positive.len());
        for (i, v) in positive.iter().enumerate() {
            scales.push((*v).clone());
            if let Some(next) = positive.get(i + 1) {
                scales.push(v.midpoint(next));
            }
        }
        scales.push(last * Rational::from_integer(2));
        ScaleGrid { floor: Rational::zero(), scales }
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn floor(&self) -> &Rational {
        &self.floor
    }

    pub fn scales(&self) -> &[Rational] {
        &self.scales
    }

    pub fn scale(&self, i: usize) -> &Rational {
        &self.scales[i]
    }

    /// `s_{i-1}` in one-based terms: the scale just before index `i`.
    pub fn before(&self, i: usize) -> &Rational {
        if i == 0 {
            &self.floor
        } else {
            &self.scales[i - 1]
        }
    }

    pub fn index_of(&self, r: &Rational) -> Option<usize> {
        self.scales.binary_search(r).ok()
    }
}

/// A persistence module on a grid: spaces `F_p^{n_i}` and bonding matrices
/// `rho_{i,i+1}` of shape `n_{i+1} x n_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersistenceModule {
    field: u32,
    degree: usize,
    grid: ScaleGrid,
    dims: Vec<usize>,
    maps: Vec<FpMatrix>,
}

impl PersistenceModule {
    pub fn new(field: u32, grid: ScaleGrid, dims: Vec<usize>, maps: Vec<FpMatrix>) -> Result<Self> {
        check_field(field)?;
        if dims.len() != grid.len() || maps.len() + 1 != grid.len() {
            return Err(Error::InvalidInput("module shape does not match its grid".into()));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.field() != field || m.rows() != dims[i + 1] || m.cols() != dims[i] {
                return Err(Error::InvalidInput(format!("bonding map {i} has the wrong shape or field")));
            }
        }
        Ok(PersistenceModule { field, degree: 0, grid, dims, maps })
    }

    /// The interval module that is `F_p` on grid indices `first..=last`
    /// with identity bonding maps there.
    pub fn interval(field: u32, grid: ScaleGrid, first: usize, last: usize) -> Result<Self> {
        if first > last || last >= grid.len() {
            return Err(Error::InvalidInput("interval outside the grid".into()));
        }
        let dims: Vec<usize> = (0..grid.len()).map(|i| usize::from(first <= i && i <= last)).collect();
        let maps = (0..grid.len() - 1)
            .map(|i| {
                let mut m = FpMatrix::zeros(field, dims[i + 1], dims[i]);
                if dims[i] == 1 && dims[i + 1] == 1 {
                    m.set(0, 0, 1);
                }
                m
            })
            .collect();
        PersistenceModule::new(field, grid, dims, maps)
    }

    pub fn direct_sum(&self, other: &PersistenceModule) -> Result<Self> {
        if self.field != other.field || self.grid != other.grid {
            return Err(Error::InvalidInput("direct sum of modules on different grids or fields".into()));
        }
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = self.maps.iter().zip(&other.maps).map(|(a, b)| block_diagonal(a, b)).collect();
        Ok(PersistenceModule::new(self.field, self.grid.clone(), dims, maps)?.with_degree(self.degree))
    }

    /// Homology degree the module is labelled with; bars extracted from
    /// it carry this dimension.
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn field(&self) -> u32 {
        self.field
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn map(&self, i: usize) -> &FpMatrix {
        &self.maps[i]
    }

    /// Composite bonding map `rho_{i,j}` for `i <= j`.
    pub fn rho(&self, i: usize, j: usize) -> FpMatrix {
        assert!(i <= j && j < self.dims.len(), "rho({i}, {j}) out of range");
        let mut acc = FpMatrix::identity(self.field, self.dims[i]);
        for k in i..j {
            acc = self.maps[k].mul(&acc);
        }
        acc
    }

    /// `rho_{i,j}` for every `j >= i`, built incrementally.
    pub fn rho_from(&self, i: usize) -> Vec<FpMatrix> {
        let mut out = Vec::with_capacity(self.dims.len() - i);
        out.push(FpMatrix::identity(self.field, self.dims[i]));
        for k in i..self.dims.len() - 1 {
            let next = self.maps[k].mul(out.last().expect("non-empty"));
            out.push(next);
        }
        out
    }

    /// Rank table `r[i][j] = rank rho_{i,j}` for `i <= j` (0 below the diagonal).
    pub fn rank_table(&self) -> Vec<Vec<usize>> {
        let k = self.dims.len();
        let mut r = vec![vec![0usize; k]; k];
        for (i, row) in r.iter_mut().enumerate() {
            for (off, m) in self.rho_from(i).iter().enumerate() {
                row[i + off] = m.rank();
            }
        }
        r
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            field: u32,
            degree: usize,
            floor: String,
            grid: Vec<String>,
            dims: &'a [usize],
            bonding: Vec<MatrixDump<'a>>,
        }
        let dump = Dump {
            field: self.field,
            degree: self.degree,
            floor: self.grid.floor.to_string(),
            grid: self.grid.scales.iter().map(ToString::to_string).collect(),
            dims: &self.dims,
            bonding: self.maps.iter().map(MatrixDump::of).collect(),
        };
        serde_json::to_string_pretty(&dump).expect("module serializes")
    }
}

#[derive(Serialize)]
struct MatrixDump<'a> {
    rows: usize,
    cols: usize,
    entries: &'a [u32],
}

impl<'a> MatrixDump<'a> {
    fn of(m: &'a FpMatrix) -> Self {
        MatrixDump { rows: m.rows(), cols: m.cols(), entries: m.entries() }
    }
}

fn block_diagonal(a: &FpMatrix, b: &FpMatrix) -> FpMatrix {
    let mut m = FpMatrix::zeros(a.field(), a.rows() + b.rows(), a.cols() + b.cols());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            m.set(r, c, a.get(r, c));
        }
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            m.set(a.rows() + r, a.cols() + c, b.get(r, c));
        }
    }
    m
}

/// A morphism of persistence modules on a common grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMorphism {
    source: PersistenceModule,
    target: PersistenceModule,
    components: Vec<FpMatrix>,
}

impl ModuleMorphism {
    /// Validates shapes and the commutation `phi_{i+1} rho^M = rho^N phi_i`.
    pub fn new(source: PersistenceModule, target: PersistenceModule, components: Vec<FpMatrix>) -> Result<Self> {
        if source.grid != target.grid || source.field != target.field {
            return Err(Error::InvalidInput("morphism between modules on different grids or fields".into()));
        }
        if components.len() != source.grid.len() {
            return Err(Error::InvalidInput("morphism needs one matrix per scale".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if c.rows() != target.dims[i] || c.cols() != source.dims[i] {
                return Err(Error::InvalidInput(format!("morphism component {i} has the wrong shape")));
            }
        }
        for i in 0..components.len() - 1 {
            let left = components[i + 1].mul(&source.maps[i]);
            let right = target.maps[i].mul(&components[i]);
            if left != right {
                return Err(Error::InvalidInput(format!("morphism does not commute at step {i}")));
            }
        }
        Ok(ModuleMorphism { source, target, components })
    }

    /// The identity morphism of a module.
    pub fn identity(m: &PersistenceModule) -> Self {
        let components = m.dims.iter().map(|&d| FpMatrix::identity(m.field, d)).collect();
        ModuleMorphism { source: m.clone(), target: m.clone(), components }
    }

    pub fn source(&self) -> &PersistenceModule {
        &self.source
    }

    pub fn target(&self) -> &PersistenceModule {
        &self.target
    }

    pub fn component(&self, i: usize) -> &FpMatrix {
        &self.components[i]
    }

    pub fn is_injective(&self) -> bool {
        self.components.iter().all(FpMatrix::is_injective)
    }

    pub fn to_json(&self) -> String {
        let comps: Vec<MatrixDump<'_>> = self.components.iter().map(MatrixDump::of).collect();
        serde_json::to_string_pretty(&comps).expect("morphism serializes")
    }
}
