use crate::error::{Error, Result};
use crate::rational::Rational;

use super::barcode::{Bar, Barcode, Death};
use super::filtration::Filtration;

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_field(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("field characteristic {p} is not prime")))
    }
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a % p, p - 2, p)
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    acc
}

/// A sparse boundary column, sorted by row index.
trait Column: Sized {
    fn boundary(f: &Filtration, j: usize, p: u64) -> Self;
    fn low(&self) -> Option<u32>;
    fn eliminate(&mut self, pivot: &Self, p: u64);
}

#[derive(Clone, Debug)]
struct BinaryColumn(Vec<u32>);

impl Column for BinaryColumn {
    fn boundary(f: &Filtration, j: usize, _p: u64) -> Self {
        let mut rows = f.facets(j).to_vec();
        rows.sort_unstable();
        BinaryColumn(rows)
    }

    fn low(&self) -> Option<u32> {
        self.0.last().copied()
    }

    fn eliminate(&mut self, pivot: &Self, _p: u64) {
        let (a, b) = (&self.0, &pivot.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut k) = (0, 0);
        while i < a.len() && k < b.len() {
            match a[i].cmp(&b[k]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[k]);
                    k += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    k += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[k..]);
        self.0 = out;
    }
}

#[derive(Clone, Debug)]
struct PrimeColumn(Vec<(u32, u64)>);

impl Column for PrimeColumn {
    fn boundary(f: &Filtration, j: usize, p: u64) -> Self {
        let mut rows: Vec<(u32, u64)> = f
            .facets(j)
            .iter()
            .enumerate()
            .map(|(k, &row)| (row, if k % 2 == 0 { 1 } else { p - 1 }))
            .collect();
        rows.sort_unstable();
        PrimeColumn(rows)
    }

    fn low(&self) -> Option<u32> {
        self.0.last().map(|e| e.0)
    }

    fn eliminate(&mut self, pivot: &Self, p: u64) {
        let (a, b) = (&self.0, &pivot.0);
        let la = a.last().expect("non-empty").1;
        let lb = b.last().expect("non-empty").1;
        // self - factor * pivot kills the shared low entry.
        let factor = la * inv_mod(lb, p) % p;
        let neg = (p - factor) % p;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut k) = (0, 0);
        while i < a.len() || k < b.len() {
            let take_a = k >= b.len() || (i < a.len() && a[i].0 < b[k].0);
            let take_b = i >= a.len() || (k < b.len() && b[k].0 < a[i].0);
            if take_a {
                out.push(a[i]);
                i += 1;
            } else if take_b {
                out.push((b[k].0, b[k].1 * neg % p));
                k += 1;
            } else {
                let c = (a[i].1 + b[k].1 * neg) % p;
                if c != 0 {
                    out.push((a[i].0, c));
                }
                i += 1;
                k += 1;
            }
        }
        self.0 = out;
    }
}

/// Persistence pairing of a filtration.
#[derive(Clone, Debug)]
pub(crate) struct Pairing {
    /// `(birth simplex, death simplex)` pairs, including zero-length ones.
    pub pairs: Vec<(usize, usize)>,
    /// Unpaired simplices, in every dimension up to the top one.
    pub essential: Vec<usize>,
}

fn reduce_with<C: Column>(f: &Filtration, p: u64) -> Pairing {
    let n = f.len();
    let top = f.top_dim();
    let mut pivot_owner: Vec<u32> = vec![u32::MAX; n];
    let mut reduced: Vec<Option<C>> = (0..n).map(|_| None).collect();
    let mut cleared = vec![false; n];
    let mut is_negative = vec![false; n];
    let mut pairs = Vec::new();
    for d in (1..=top).rev() {
        for j in 0..n {
            if f.dim(j) != d || cleared[j] {
                continue;
            }
            let mut col = C::boundary(f, j, p);
            while let Some(low) = col.low() {
                let owner = pivot_owner[low as usize];
                if owner == u32::MAX {
                    break;
                }
                col.eliminate(reduced[owner as usize].as_ref().expect("pivot column stored"), p);
            }
            if let Some(low) = col.low() {
                pivot_owner[low as usize] = j as u32;
                cleared[low as usize] = true;
                is_negative[j] = true;
                pairs.push((low as usize, j));
                reduced[j] = Some(col);
            }
        }
    }
    let essential = (0..n).filter(|&i| !cleared[i] && !is_negative[i]).collect();
    pairs.sort_unstable();
    Pairing { pairs, essential }
}

pub(crate) fn pairing(f: &Filtration, p: u32) -> Result<Pairing> {
    check_field(p)?;
    Ok(if p == 2 {
        reduce_with::<BinaryColumn>(f, 2)
    } else {
        reduce_with::<PrimeColumn>(f, p as u64)
    })
}

/// Persistence barcode of the filtration over `F_p`, in dimensions
/// `0..=f.max_dim()`.
///
/// Bars are half-open `(birth, death]` in the scale parameter of the open
/// Rips complex; bars of zero length are omitted.
pub fn reduce_persistence(f: &Filtration, p: u32) -> Result<Barcode> {
    let pairing = pairing(f, p)?;
    let alternating: i64 = f
        .count_by_dim()
        .iter()
        .enumerate()
        .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum();
    if euler_from_pairing(f, &pairing) != alternating {
        return Err(Error::Internal("Euler characteristic of the pairing disagrees with the simplex counts".into()));
    }
    let mut bars = Vec::new();
    for &(b, d) in &pairing.pairs {
        let dim = f.dim(b);
        if dim > f.max_dim() || f.diameter_rank(b) == f.diameter_rank(d) {
            continue;
        }
        bars.push(Bar::new(dim, f.diameter(b).clone(), Death::Finite(f.diameter(d).clone())));
    }
    for &e in &pairing.essential {
        let dim = f.dim(e);
        // Top simplices of the truncation have no cofaces, so their
        // essential classes are artefacts.
        if dim > f.max_dim() {
            continue;
        }
        bars.push(Bar::new(dim, f.diameter(e).clone(), Death::Infinite));
    }
    Ok(Barcode::new(p, bars))
}

/// Euler characteristic of the truncated complex recovered from the pairing;
/// equals the alternating simplex count.
pub(crate) fn euler_from_pairing(f: &Filtration, pairing: &Pairing) -> i64 {
    pairing
        .essential
        .iter()
        .map(|&e| if f.dim(e) % 2 == 0 { 1i64 } else { -1 })
        .sum()
}

impl Barcode {
    /// Sum of finite bar lengths; used as a cheap fingerprint in logs.
    pub fn total_finite_length(&self) -> Rational {
        self.bars()
            .iter()
            .filter_map(|b| match &b.death {
                Death::Finite(d) => Some(d - &b.birth),
                Death::Infinite => None,
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SampledSpace;
    use crate::rips::build_rips_filtration;

    fn square() -> SampledSpace {
        let d = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]];
        let labels = (0..4).map(|i| format!("p{i}")).collect();
        let m = d.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect()).collect();
        SampledSpace::from_matrix(labels, m).unwrap()
    }

    #[test]
    fn primes() {
        let primes: Vec<u32> = (0..30).filter(|&p| is_prime(p)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(reduce_persistence(&build_rips_filtration(&square(), 1).unwrap(), 4).is_err());
    }

    #[test]
    fn four_cycle_has_one_loop() {
        let f = build_rips_filtration(&square(), 1).unwrap();
        for p in [2, 3, 5] {
            let bc = reduce_persistence(&f, p).unwrap();
            let one: Vec<_> = bc.in_dim(1).collect();
            assert_eq!(one.len(), 1, "p = {p}");
            assert_eq!(one[0].birth, Rational::one());
            assert_eq!(one[0].death, Death::Finite(Rational::from_integer(2)));
            let zero: Vec<_> = bc.in_dim(0).collect();
            assert_eq!(zero.len(), 4);
            assert_eq!(zero.iter().filter(|b| b.death.is_infinite()).count(), 1);
        }
    }

    #[test]
    fn euler_characteristic_matches_counts() {
        let f = build_rips_filtration(&square(), 2).unwrap();
        let pairing = pairing(&f, 3).unwrap();
        let alternating: i64 = f
            .count_by_dim()
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum();
        assert_eq!(euler_from_pairing(&f, &pairing), alternating);
    }
}
