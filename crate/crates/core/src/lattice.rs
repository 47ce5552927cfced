//! Finite boxes of ℤ^d, the Anderson Hamiltonian restricted to a box, and the
//! sub-box tiling used by the eigenvalue point processes.

use serde::{Deserialize, Serialize};

use crate::disorder::{fill_potential, DisorderSpec, Realization};
use crate::error::{config_err, domain_err, Error, Result};
use crate::linalg::banded::BandedSym;
use crate::linalg::dense::DenseMatrix;
use crate::scalar::Real;

/// Default cap on the number of sites of an assembled Hamiltonian.
pub const DEFAULT_MAX_SITES: usize = 100_000;

/// Rectangular box `Π_j [lows_j, highs_j)` of integer sites, linearized
/// row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxGeometry {
    lows: Vec<i64>,
    highs: Vec<i64>,
}

impl BoxGeometry {
    pub fn new(lows: Vec<i64>, highs: Vec<i64>) -> Result<Self> {
        if lows.is_empty() || lows.len() != highs.len() {
            return Err(config_err!("box corners must have the same positive dimension"));
        }
        if lows.iter().zip(&highs).any(|(l, h)| h <= l) {
            return Err(config_err!("empty box: lows {lows:?} highs {highs:?}"));
        }
        let d = lows.len() as u32;
        let limit = 1i64 << (63 / d - 1);
        if lows.iter().chain(&highs).any(|&x| x <= -limit || x >= limit) {
            return Err(config_err!("box corner outside the addressable lattice range"));
        }
        Ok(Self { lows, highs })
    }

    /// The cube `[0, side)^d`.
    pub fn cube(dim: usize, side: i64) -> Result<Self> {
        Self::new(vec![0; dim], vec![side; dim])
    }

    /// Interval of sites `[lo, hi)` on ℤ.
    pub fn interval(lo: i64, hi: i64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lows.len()
    }

    pub fn lows(&self) -> &[i64] {
        &self.lows
    }

    pub fn highs(&self) -> &[i64] {
        &self.highs
    }

    pub fn shape(&self) -> Vec<usize> {
        self.lows.iter().zip(&self.highs).map(|(l, h)| (h - l) as usize).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> Vec<usize> {
        let shape = self.shape();
        let mut s = vec![1; shape.len()];
        for j in (0..shape.len().saturating_sub(1)).rev() {
            s[j] = s[j + 1] * shape[j + 1];
        }
        s
    }

    /// Half-bandwidth of the Laplacian in the row-major ordering.
    pub fn bandwidth(&self) -> usize {
        let shape = self.shape();
        self.strides()
            .into_iter()
            .zip(shape)
            .filter(|&(_, n)| n > 1)
            .map(|(s, _)| s)
            .max()
            .unwrap_or(0)
    }

    /// Axis along which the box extends, if it is a chain (all other extents 1).
    pub fn chain_axis(&self) -> Option<usize> {
        let long: Vec<usize> = (0..self.dim()).filter(|&j| self.highs[j] - self.lows[j] > 1).collect();
        match long.as_slice() {
            [] => Some(0),
            [j] => Some(*j),
            _ => None,
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(j, &v)| self.lows[j] <= v && v < self.highs[j])
    }

    pub fn contains_box(&self, other: &BoxGeometry) -> bool {
        other.dim() == self.dim() && (0..self.dim()).all(|j| self.lows[j] <= other.lows[j] && other.highs[j] <= self.highs[j])
    }

    /// Linear index of site `x`, if it lies in the box.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0usize;
        for (j, &v) in x.iter().enumerate() {
            idx = idx * (self.highs[j] - self.lows[j]) as usize + (v - self.lows[j]) as usize;
        }
        Some(idx)
    }

    /// Site with linear index `idx`.
    pub fn site(&self, mut idx: usize) -> Vec<i64> {
        let shape = self.shape();
        let mut x = vec![0; shape.len()];
        for j in (0..shape.len()).rev() {
            x[j] = self.lows[j] + (idx % shape[j]) as i64;
            idx /= shape[j];
        }
        x
    }

    pub fn sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.site(i))
    }

    /// Lattice-wide key of site `x`, identical in every box containing `x`.
    /// Consecutive sites along the last axis have consecutive keys.
    pub fn site_key(x: &[i64]) -> u64 {
        let d = x.len() as u32;
        let bits = 63 / d;
        let offset = 1i64 << (bits - 1);
        x.iter().fold(0u64, |acc, &v| (acc << bits) | (v + offset) as u64)
    }

    /// ℓ¹ distance from `x` to the inner boundary (sites with a neighbour outside).
    pub fn distance_to_boundary(&self, x: &[i64]) -> i64 {
        (0..self.dim())
            .map(|j| (x[j] - self.lows[j]).min(self.highs[j] - 1 - x[j]))
            .min()
            .unwrap_or(0)
    }

    /// Linear indices of the lattice neighbours of `idx` inside the box.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let shape = self.shape();
        let strides = self.strides();
        let mut out = Vec::with_capacity(2 * shape.len());
        for j in 0..shape.len() {
            let c = (idx / strides[j]) % shape[j];
            if c > 0 {
                out.push(idx - strides[j]);
            }
            if c + 1 < shape[j] {
                out.push(idx + strides[j]);
            }
        }
        out
    }
}

/// Axis-aligned rectangle `Π_j [lows_j, highs_j)` in ℝ^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lows: Vec<f64>,
    pub highs: Vec<f64>,
}

impl Rect {
    pub fn new(lows: Vec<f64>, highs: Vec<f64>) -> Result<Self> {
        let r = Self { lows, highs };
        r.validate()?;
        Ok(r)
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lows: vec![0.0; dim],
            highs: vec![1.0; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lows.is_empty() || self.lows.len() != self.highs.len() {
            return Err(config_err!("rectangle corners must have the same positive dimension"));
        }
        let ok = self
            .lows
            .iter()
            .zip(&self.highs)
            .all(|(l, h)| l.is_finite() && h.is_finite() && h > l);
        if !ok {
            return Err(config_err!("rectangle must be bounded with positive volume"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lows.len()
    }

    pub fn volume(&self) -> f64 {
        self.lows.iter().zip(&self.highs).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(j, &v)| self.lows[j] <= v && v < self.highs[j])
    }

    /// Integer sites of `scale · self`, or `None` when there are none.
    pub fn scaled_sites(&self, scale: f64) -> Option<BoxGeometry> {
        let lows = self.lows.iter().map(|&l| (scale * l).ceil() as i64).collect();
        let highs = self.highs.iter().map(|&h| (scale * h).ceil() as i64).collect();
        BoxGeometry::new(lows, highs).ok()
    }
}

/// `H = Δ + V` on a box: unit hopping between nearest neighbours inside the
/// box and the potential on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteHamiltonian<T> {
    geometry: BoxGeometry,
    potential: Vec<T>,
    realization: Option<Realization>,
}

impl<T: Real> FiniteHamiltonian<T> {
    pub fn from_potential(geometry: BoxGeometry, potential: Vec<T>) -> Result<Self> {
        if potential.len() != geometry.len() {
            return Err(config_err!(
                "potential has {} values for a box of {} sites",
                potential.len(),
                geometry.len()
            ));
        }
        Ok(Self {
            geometry,
            potential,
            realization: None,
        })
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    pub fn realization(&self) -> Option<Realization> {
        self.realization
    }

    pub fn dim(&self) -> usize {
        self.potential.len()
    }

    /// Matrix entry `(i, j)` in linear indices.
    pub fn entry(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.potential[i];
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let step = b - a;
        let shape = self.geometry.shape();
        let strides = self.geometry.strides();
        for k in 0..shape.len() {
            if step == strides[k] && (a / strides[k]) % shape[k] + 1 < shape[k] {
                return T::one();
            }
        }
        T::zero()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = self.potential[i];
            for k in self.geometry.neighbors(i) {
                m[(i, k)] = T::one();
            }
        }
        m
    }

    /// Diagonal and off-diagonal when the box is a chain.
    pub fn tridiagonal(&self) -> Option<(Vec<T>, Vec<T>)> {
        self.geometry.chain_axis()?;
        let n = self.dim();
        Some((self.potential.clone(), vec![T::one(); n.saturating_sub(1)]))
    }

    pub fn banded(&self) -> BandedSym<T> {
        let n = self.dim();
        let mut b = BandedSym::zeros(n, self.geometry.bandwidth());
        for i in 0..n {
            b.set(i, i, self.potential[i]);
            for k in self.geometry.neighbors(i) {
                if k < i {
                    b.set(i, k, T::one());
                }
            }
        }
        b
    }

    /// Diagonal blocks of `H` after cutting the box into slices across its
    /// longest axis. Consecutive slices are coupled by the identity.
    pub fn layers(&self) -> Vec<DenseMatrix<T>> {
        let g = &self.geometry;
        let shape = g.shape();
        let axis = (0..shape.len()).max_by_key(|&j| (shape[j], usize::MAX - j)).unwrap_or(0);
        let mut lows = g.lows().to_vec();
        let mut highs = g.highs().to_vec();
        lows[axis] = 0;
        highs[axis] = 1;
        let slice = BoxGeometry { lows, highs };
        let m = slice.len();
        (0..shape[axis] as i64)
            .map(|t| {
                let mut a = DenseMatrix::zeros(m);
                for i in 0..m {
                    let mut x = slice.site(i);
                    x[axis] = g.lows()[axis] + t;
                    a[(i, i)] = self.potential[g.index_of(&x).expect("inside box")];
                    for k in slice.neighbors(i) {
                        a[(i, k)] = T::one();
                    }
                }
                a
            })
            .collect()
    }

    /// The same realization restricted to `sub`, which must lie inside the box.
    pub fn restrict(&self, sub: &BoxGeometry) -> Result<Self> {
        if !self.geometry.contains_box(sub) {
            return Err(domain_err!("sub-box {sub:?} is not inside {:?}", self.geometry));
        }
        let potential = sub
            .sites()
            .map(|x| self.potential[self.geometry.index_of(&x).expect("contained")])
            .collect();
        Ok(Self {
            geometry: sub.clone(),
            potential,
            realization: self.realization,
        })
    }

    /// Short description for error messages.
    pub fn provenance(&self) -> String {
        match self.realization {
            Some(r) => format!(
                "box {:?}..{:?}, master seed {}, realization {}",
                self.geometry.lows, self.geometry.highs, r.master_seed, r.index
            ),
            None => format!("box {:?}..{:?}, explicit potential", self.geometry.lows, self.geometry.highs),
        }
    }
}

/// Assembles `H` on `geom` with the potential of realization `omega`.
///
/// The value at a site depends only on its lattice coordinates, so a sub-box
/// built with the same realization sees exactly the same potential.
pub fn build_hamiltonian<T: Real>(geom: &BoxGeometry, spec: &DisorderSpec, omega: Realization) -> Result<FiniteHamiltonian<T>> {
    build_hamiltonian_limited(geom, spec, omega, DEFAULT_MAX_SITES)
}

pub fn build_hamiltonian_limited<T: Real>(
    geom: &BoxGeometry,
    spec: &DisorderSpec,
    omega: Realization,
    max_sites: usize,
) -> Result<FiniteHamiltonian<T>> {
    spec.validate()?;
    let n = geom.len();
    if n > max_sites {
        return Err(Error::Resource(format!("box has {n} sites, limit is {max_sites}")));
    }
    let row = *geom.shape().last().expect("dimension at least 1");
    let mut potential = Vec::with_capacity(n);
    for start in (0..n).step_by(row) {
        let key = BoxGeometry::site_key(&geom.site(start));
        fill_potential(spec, omega.at_site(key), &mut potential, row);
    }
    Ok(FiniteHamiltonian {
        geometry: geom.clone(),
        potential,
        realization: Some(omega),
    })
}

/// One sub-box `B_p(L) = Π_j [p_j l, (p_j + 1) l)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: Vec<i64>,
    pub geometry: BoxGeometry,
}

impl Cell {
    /// Anchor point `p l / L` in rescaled coordinates.
    pub fn anchor(&self, sub_scale: usize, parent_scale: usize) -> Vec<f64> {
        self.index
            .iter()
            .map(|&p| (p * sub_scale as i64) as f64 / parent_scale as f64)
            .collect()
    }
}

/// Tiling of `L·Q` by cubes of side `l = round(L^a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxPartition {
    pub parent_scale: usize,
    pub sub_scale: usize,
    pub exponent: f64,
    pub region: Rect,
    /// Every cell meeting `L·Q`; their indices form `Γ_L`.
    pub cells: Vec<Cell>,
    /// `N_L = ceil(γ ln L)`.
    pub interior_margin: usize,
}

/// `round(L^a)`.
pub fn sub_scale(parent: usize, a: f64) -> usize {
    (parent as f64).powf(a).round() as usize
}

/// `ceil(γ ln L)`.
pub fn interior_margin(parent: usize, gamma_log: f64) -> usize {
    (gamma_log * (parent as f64).ln()).ceil() as usize
}

pub fn partition_box(parent: usize, a: f64, q: &Rect, gamma_log: f64) -> Result<BoxPartition> {
    if parent < 2 {
        return Err(config_err!("scale L = {parent} must be at least 2"));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(config_err!("exponent a = {a} must lie in (0, 1)"));
    }
    if !(gamma_log > 0.0) {
        return Err(config_err!("gamma_log = {gamma_log} must be positive"));
    }
    q.validate()?;
    let l = sub_scale(parent, a);
    if l >= parent {
        return Err(config_err!("sub-box side {l} is not smaller than L = {parent}"));
    }
    let lf = l as f64;
    let big = parent as f64;
    // p ranges over cells whose [p l, (p+1) l) meets [L lo, L hi)
    let ranges: Vec<(i64, i64)> = q
        .lows
        .iter()
        .zip(&q.highs)
        .map(|(&lo, &hi)| ((big * lo / lf).floor() as i64, (big * hi / lf).ceil() as i64))
        .collect();
    let counts: Vec<usize> = ranges.iter().map(|(a, b)| (b - a) as usize).collect();
    let total: usize = counts.iter().product();
    let mut cells = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut p = vec![0i64; ranges.len()];
        for j in (0..ranges.len()).rev() {
            p[j] = ranges[j].0 + (rem % counts[j]) as i64;
            rem /= counts[j];
        }
        let lows: Vec<i64> = p.iter().map(|&pj| pj * l as i64).collect();
        let highs: Vec<i64> = lows.iter().map(|&x| x + l as i64).collect();
        cells.push(Cell {
            index: p,
            geometry: BoxGeometry::new(lows, highs)?,
        });
    }
    Ok(BoxPartition {
        parent_scale: parent,
        sub_scale: l,
        exponent: a,
        region: q.clone(),
        cells,
        interior_margin: interior_margin(parent, gamma_log),
    })
}

impl BoxPartition {
    pub fn gamma_set(&self) -> Vec<Vec<i64>> {
        self.cells.iter().map(|c| c.index.clone()).collect()
    }

    /// Integer sites of `L·Q`.
    pub fn region_sites(&self) -> Option<BoxGeometry> {
        self.region.scaled_sites(self.parent_scale as f64)
    }

    /// Smallest box containing every cell.
    pub fn hull(&self) -> BoxGeometry {
        let d = self.region.dim();
        let lows = (0..d)
            .map(|j| self.cells.iter().map(|c| c.geometry.lows()[j]).min().unwrap())
            .collect();
        let highs = (0..d)
            .map(|j| self.cells.iter().map(|c| c.geometry.highs()[j]).max().unwrap())
            .collect();
        BoxGeometry { lows, highs }
    }

    pub fn anchor_in_region(&self, cell: &Cell) -> bool {
        self.region.contains(&cell.anchor(self.sub_scale, self.parent_scale))
    }
}

/// Interior and boundary of a box at a given margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLayers {
    /// Sites at ℓ¹ distance greater than the margin from the inner boundary.
    pub interior: Vec<Vec<i64>>,
    /// Pairs `(m, k)` with `m` in the box, `k` outside, `|m - k| = 1`.
    pub boundary_pairs: Vec<(Vec<i64>, Vec<i64>)>,
    pub interior_empty: bool,
}

pub fn boundary_layers(geom: &BoxGeometry, margin: usize) -> Result<BoundaryLayers> {
    if margin < 1 {
        return Err(config_err!("margin must be at least 1"));
    }
    let m = margin as i64;
    let interior: Vec<Vec<i64>> = geom.sites().filter(|x| geom.distance_to_boundary(x) > m).collect();
    Ok(BoundaryLayers {
        interior_empty: interior.is_empty(),
        interior,
        boundary_pairs: boundary_pairs(geom),
    })
}

/// All `(m, k)` with `m ∈ B`, `k ∉ B`, `|m - k|₁ = 1`.
pub fn boundary_pairs(geom: &BoxGeometry) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut out = Vec::new();
    for x in geom.sites() {
        for j in 0..geom.dim() {
            for step in [-1, 1] {
                let mut k = x.clone();
                k[j] += step;
                if !geom.contains(&k) {
                    out.push((x.clone(), k));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = BoxGeometry::new(vec![-2, 3, 0], vec![1, 7, 2]).unwrap();
        assert_eq!(g.len(), 24);
        for i in 0..g.len() {
            assert_eq!(g.index_of(&g.site(i)), Some(i));
        }
        assert_eq!(g.index_of(&[1, 3, 0]), None);
    }

    #[test]
    fn two_site_chain() {
        let g = BoxGeometry::interval(0, 2).unwrap();
        let h = FiniteHamiltonian::from_potential(g, vec![0.0, 0.0]).unwrap();
        let m = h.to_dense();
        assert_eq!(m.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn three_site_chain() {
        let g = BoxGeometry::interval(0, 3).unwrap();
        let h = FiniteHamiltonian::from_potential(g, vec![1.0, 2.0, 3.0]).unwrap();
        let (d, e) = h.tridiagonal().unwrap();
        assert_eq!(d, vec![1.0, 2.0, 3.0]);
        assert_eq!(e, vec![1.0, 1.0]);
        assert_eq!(h.to_dense().as_slice(), &[1.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 3.0]);
    }

    #[test]
    fn entry_agrees_with_dense_and_band() {
        let g = BoxGeometry::new(vec![0, 0, 0], vec![3, 2, 4]).unwrap();
        let pot: Vec<f64> = (0..g.len()).map(|i| i as f64 * 0.1).collect();
        let h = FiniteHamiltonian::from_potential(g, pot).unwrap();
        let m = h.to_dense();
        let b = h.banded();
        assert!(m.is_symmetric());
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                assert_eq!(h.entry(i, j), m[(i, j)]);
                assert_eq!(b.get(i, j), m[(i, j)]);
            }
        }
    }

    #[test]
    fn site_keys_are_box_independent() {
        let spec = DisorderSpec::uniform(-0.5, 0.5, 3.0);
        let omega = Realization::new(11, 4);
        let big = BoxGeometry::new(vec![-3, -2], vec![5, 6]).unwrap();
        let small = BoxGeometry::new(vec![0, 1], vec![3, 4]).unwrap();
        let hb: FiniteHamiltonian<f64> = build_hamiltonian(&big, &spec, omega).unwrap();
        let hs: FiniteHamiltonian<f64> = build_hamiltonian(&small, &spec, omega).unwrap();
        assert_eq!(hb.restrict(&small).unwrap().potential(), hs.potential());
    }

    #[test]
    fn resource_limit() {
        let spec = DisorderSpec::uniform(0.0, 1.0, 1.0);
        let g = BoxGeometry::cube(2, 400).unwrap();
        let r = build_hamiltonian::<f64>(&g, &spec, Realization::new(1, 0));
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn partition_one_dimensional() {
        let p = partition_box(100, 0.5, &Rect::unit(1), 2.0).unwrap();
        assert_eq!(p.sub_scale, 10);
        assert_eq!(p.cells.len(), 10);
        assert_eq!(p.interior_margin, 10);
    }

    #[test]
    fn partition_two_dimensional_tiles() {
        let p = partition_box(16, 0.5, &Rect::unit(2), 1.0).unwrap();
        assert_eq!(p.sub_scale, 4);
        assert_eq!(p.cells.len(), 16);
        let mut seen = vec![0u8; 256];
        for c in &p.cells {
            for x in c.geometry.sites() {
                seen[(x[0] * 16 + x[1]) as usize] += 1;
            }
        }
        assert!(seen.iter().all(|&k| k == 1));
    }

    #[test]
    fn partition_rejects_large_exponent() {
        // round(3^0.99) = 3
        assert!(partition_box(3, 0.99, &Rect::unit(1), 1.0).is_err());
        assert!(partition_box(1, 0.5, &Rect::unit(1), 1.0).is_err());
    }

    #[test]
    fn layers_one_dimensional() {
        let g = BoxGeometry::interval(0, 10).unwrap();
        let b = boundary_layers(&g, 2).unwrap();
        let xs: Vec<i64> = b.interior.iter().map(|x| x[0]).collect();
        assert_eq!(xs, vec![3, 4, 5, 6]);
        assert_eq!(b.boundary_pairs, vec![(vec![0], vec![-1]), (vec![9], vec![10])]);
    }

    #[test]
    fn layers_two_dimensional_match_enumeration() {
        for side in [4i64, 6] {
            let g = BoxGeometry::cube(2, side).unwrap();
            let b = boundary_layers(&g, 1).unwrap();
            let mut pairs = 0;
            let mut interior = Vec::new();
            for x in 0..side {
                for y in 0..side {
                    let outside = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
                        .iter()
                        .filter(|(u, v)| !(0..side).contains(u) || !(0..side).contains(v))
                        .count();
                    pairs += outside;
                    let dist = x.min(y).min(side - 1 - x).min(side - 1 - y);
                    if dist > 1 {
                        interior.push(vec![x, y]);
                    }
                }
            }
            assert_eq!(b.boundary_pairs.len(), pairs);
            assert_eq!(b.interior, interior);
        }
        assert!(boundary_layers(&BoxGeometry::cube(2, 4).unwrap(), 1).unwrap().interior_empty);
        assert_eq!(boundary_layers(&BoxGeometry::cube(2, 6).unwrap(), 1).unwrap().interior.len(), 4);
    }

    #[test]
    fn layers_empty_interior_is_flagged() {
        let g = BoxGeometry::cube(2, 5).unwrap();
        let b = boundary_layers(&g, 5).unwrap();
        assert!(b.interior_empty);
    }
}
