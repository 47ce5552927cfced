//! Rescaled eigenvalue counts on windows `(λ + β_L^{-1} I) × L·Q`.
//!
//! * `ξ`: eigenvector weight of a host box over the sites of `L·Q`.
//! * `η_p`: the same functional for the Hamiltonian of one cell `B_p(L)`.
//! * `η̃_p`: eigenvalue count of cell `p`, assigned entirely to its anchor `p l / L`.
//! * `η_L = Σ_p η̃_p`.
//!
//! Cell Hamiltonians are restrictions of the host realization, so every
//! functional of one realization sees the same potential.

use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderSpec, Realization};
use crate::ensemble::{mean_stderr, Ensemble};
use crate::error::{config_err, domain_err, Result};
use crate::ids::beta_scale;
use crate::lattice::{build_hamiltonian, BoxGeometry, BoxPartition, Cell, FiniteHamiltonian, Rect};
use crate::spectral::{eigenpairs_in_window, inertia_count, Resolvent};
use crate::{Complex, Hamiltonian};

/// The observation window: energies `λ + β_L^{-1}[-c, c)`, positions `L·Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub lambda: f64,
    /// Half-width `c` of `I = [-c, c]`.
    pub c: f64,
    pub q: Rect,
    pub scale: usize,
    pub alpha: f64,
}

impl WindowSpec {
    pub fn new(lambda: f64, c: f64, q: Rect, scale: usize, alpha: f64) -> Result<Self> {
        let w = Self {
            lambda,
            c,
            q,
            scale,
            alpha,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(config_err!("interval half-width c = {} must be positive", self.c));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(config_err!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        if self.scale < 2 {
            return Err(config_err!("scale L = {} must be at least 2", self.scale));
        }
        self.q.validate()
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn beta(&self) -> f64 {
        beta_scale(self.scale, self.dim(), self.alpha)
    }

    /// Half-open energy window `[λ - c/β, λ + c/β)`.
    pub fn energy_window(&self) -> (f64, f64) {
        let w = self.c / self.beta();
        (self.lambda - w, self.lambda + w)
    }

    /// Integer sites of `L·Q`.
    pub fn region(&self) -> Result<BoxGeometry> {
        self.q
            .scaled_sites(self.scale as f64)
            .ok_or_else(|| config_err!("L·Q contains no lattice site"))
    }

    pub fn with_halfwidth(&self, c: f64) -> Self {
        Self { c, ..self.clone() }
    }

    pub fn with_region(&self, q: Rect) -> Self {
        Self { q, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CountKind {
    Xi,
    EtaP,
    EtaTildeP,
    EtaL,
}

/// One realization's value of one of the four window functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSample {
    pub kind: CountKind,
    pub realization: u64,
    /// Cell index for the per-cell kinds.
    pub cell: Option<Vec<i64>>,
    pub value: f64,
    pub window: WindowSpec,
}

/// Box padded by `padding` sites on every side of the hull of `L·Q` and all cells.
pub fn host_box(w: &WindowSpec, partition: &BoxPartition, padding: usize) -> Result<BoxGeometry> {
    let region = w.region()?;
    let hull = partition.hull();
    let p = padding as i64;
    let lows = (0..w.dim()).map(|j| region.lows()[j].min(hull.lows()[j]) - p).collect();
    let highs = (0..w.dim()).map(|j| region.highs()[j].max(hull.highs()[j]) + p).collect();
    BoxGeometry::new(lows, highs)
}

fn indices_in(h: &BoxGeometry, sites: &BoxGeometry) -> Vec<usize> {
    sites.sites().filter_map(|x| h.index_of(&x)).collect()
}

/// `Σ_{E_j ∈ window} Σ_{n ∈ L·Q} |ψ_j(n)|²` for the host Hamiltonian.
pub fn xi_value(host: &Hamiltonian, w: &WindowSpec) -> Result<f64> {
    let region = w.region()?;
    if !host.geometry().contains_box(&region) {
        return Err(domain_err!("L·Q = {region:?} is not inside the host box {:?}", host.geometry()));
    }
    let (lo, hi) = w.energy_window();
    let s = eigenpairs_in_window(host, lo, hi)?;
    s.local_weight(lo, hi, &indices_in(host.geometry(), &region))
}

/// The same functional for a cell Hamiltonian; sites outside the cell carry no weight.
pub fn eta_p_value(cell: &Hamiltonian, w: &WindowSpec) -> Result<f64> {
    let region = w.region()?;
    let (lo, hi) = w.energy_window();
    let sites = indices_in(cell.geometry(), &region);
    if sites.is_empty() {
        return Ok(0.0);
    }
    let s = eigenpairs_in_window(cell, lo, hi)?;
    s.local_weight(lo, hi, &sites)
}

/// Eigenvalue count of the cell in the window if its anchor lies in `Q`, else 0.
pub fn eta_tilde_value(cell_h: &Hamiltonian, cell: &Cell, partition: &BoxPartition, w: &WindowSpec) -> Result<usize> {
    let anchor = cell.anchor(partition.sub_scale, partition.parent_scale);
    if !w.q.contains(&anchor) {
        return Ok(0);
    }
    let (lo, hi) = w.energy_window();
    inertia_count(cell_h, lo, hi)
}

fn cell_hamiltonian(cell: &Cell, spec: &DisorderSpec, omega: Realization) -> Result<Hamiltonian> {
    build_hamiltonian(&cell.geometry, spec, omega)
}

pub fn xi_count(host: &Hamiltonian, w: &WindowSpec) -> Result<CountSample> {
    Ok(CountSample {
        kind: CountKind::Xi,
        realization: host.realization().map_or(0, |r| r.index),
        cell: None,
        value: xi_value(host, w)?,
        window: w.clone(),
    })
}

pub fn eta_p_count(cell: &Cell, spec: &DisorderSpec, omega: Realization, w: &WindowSpec) -> Result<CountSample> {
    let h = cell_hamiltonian(cell, spec, omega)?;
    Ok(CountSample {
        kind: CountKind::EtaP,
        realization: omega.index,
        cell: Some(cell.index.clone()),
        value: eta_p_value(&h, w)?,
        window: w.clone(),
    })
}

pub fn eta_tilde_count(
    cell: &Cell,
    partition: &BoxPartition,
    spec: &DisorderSpec,
    omega: Realization,
    w: &WindowSpec,
) -> Result<CountSample> {
    let h = cell_hamiltonian(cell, spec, omega)?;
    Ok(CountSample {
        kind: CountKind::EtaTildeP,
        realization: omega.index,
        cell: Some(cell.index.clone()),
        value: eta_tilde_value(&h, cell, partition, w)? as f64,
        window: w.clone(),
    })
}

/// Per-cell `η̃_p` counts of one realization, cells in partition order.
pub fn cell_counts(partition: &BoxPartition, spec: &DisorderSpec, omega: Realization, w: &WindowSpec) -> Result<Vec<usize>> {
    let hull: Hamiltonian = build_hamiltonian(&partition.hull(), spec, omega)?;
    cell_counts_from(&hull, partition, w)
}

fn cell_counts_from(h: &Hamiltonian, partition: &BoxPartition, w: &WindowSpec) -> Result<Vec<usize>> {
    partition
        .cells
        .iter()
        .map(|c| eta_tilde_value(&h.restrict(&c.geometry)?, c, partition, w))
        .collect()
}

pub fn eta_l_count(partition: &BoxPartition, spec: &DisorderSpec, omega: Realization, w: &WindowSpec) -> Result<CountSample> {
    let total: usize = cell_counts(partition, spec, omega, w)?.iter().sum();
    Ok(CountSample {
        kind: CountKind::EtaL,
        realization: omega.index,
        cell: None,
        value: total as f64,
        window: w.clone(),
    })
}

/// Everything one realization contributes to the point-process statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub realization: u64,
    pub xi: Option<f64>,
    pub eta_l: usize,
    /// `η̃_p` for every cell of the partition, in partition order.
    pub cell_counts: Vec<usize>,
}

/// Builds the host box once and evaluates `η_L`, the cell counts and, if
/// asked for, `ξ` on it.
pub fn sample_realization(
    spec: &DisorderSpec,
    w: &WindowSpec,
    partition: &BoxPartition,
    padding: usize,
    omega: Realization,
    with_xi: bool,
) -> Result<RealizationRecord> {
    let (h, xi) = if with_xi {
        let host: Hamiltonian = build_hamiltonian(&host_box(w, partition, padding)?, spec, omega)?;
        let xi = xi_value(&host, w)?;
        (host, Some(xi))
    } else {
        (build_hamiltonian(&partition.hull(), spec, omega)?, None)
    };
    let cell_counts = cell_counts_from(&h, partition, w)?;
    Ok(RealizationRecord {
        realization: omega.index,
        xi,
        eta_l: cell_counts.iter().sum(),
        cell_counts,
    })
}

/// Both sides of the geometric resolvent identity
/// `G(n,n) - G^B(n,n) = -Σ_{(m,k)} G(n,k) G^B(m,n)`, summed over neighbour
/// pairs `m ∈ B`, `k ∉ B` with `k` inside the host box. The sign follows
/// from the second resolvent identity for unit hopping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub lhs: Complex,
    pub rhs: Complex,
    pub residual: f64,
}

pub fn perturbation_identity_check(
    host: &FiniteHamiltonian<f64>,
    cell: &BoxGeometry,
    z: Complex,
    n: &[i64],
    margin: usize,
) -> Result<IdentityResidual> {
    if !cell.contains(n) || cell.distance_to_boundary(n) <= margin as i64 {
        return Err(domain_err!("site {n:?} is not in the interior of the cell at margin {margin}"));
    }
    let hc = host.restrict(cell)?;
    let g = Resolvent::new(host, z)?;
    let gb = Resolvent::new(&hc, z)?;
    let hg = host.geometry();
    let g_col = g.column(hg.index_of(n).expect("cell inside host"));
    let gb_col = gb.column(cell.index_of(n).expect("checked"));
    let lhs = g_col[hg.index_of(n).unwrap()] - gb_col[cell.index_of(n).unwrap()];
    let mut rhs = Complex::new(0.0, 0.0);
    for (m, k) in crate::lattice::boundary_pairs(cell) {
        if let Some(ik) = hg.index_of(&k) {
            rhs -= g_col[ik] * gb_col[cell.index_of(&m).expect("m in cell")];
        }
    }
    Ok(IdentityResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Monte Carlo estimate of `E|ξ - η_L|`.
pub fn xi_eta_gap(
    spec: &DisorderSpec,
    w: &WindowSpec,
    partition: &BoxPartition,
    padding: usize,
    ensemble: Ensemble,
) -> Result<GapEstimate> {
    ensemble.require(1, "the ξ-η gap")?;
    let gaps = ensemble.map(|omega| {
        let r = sample_realization(spec, w, partition, padding, omega, true)?;
        Ok((r.xi.expect("requested") - r.eta_l as f64).abs())
    })?;
    let (mean, stderr) = mean_stderr(&gaps);
    Ok(GapEstimate {
        mean,
        stderr,
        n: gaps.len(),
    })
}

/// Largest and mean change of `ξ` when the host padding is doubled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaddingCheck {
    pub padding: usize,
    pub max_change: f64,
    pub mean_change: f64,
}

pub fn padding_convergence(
    spec: &DisorderSpec,
    w: &WindowSpec,
    partition: &BoxPartition,
    padding: usize,
    ensemble: Ensemble,
) -> Result<PaddingCheck> {
    ensemble.require(1, "the padding check")?;
    let diffs = ensemble.map(|omega| {
        let a: Hamiltonian = build_hamiltonian(&host_box(w, partition, padding)?, spec, omega)?;
        let b: Hamiltonian = build_hamiltonian(&host_box(w, partition, 2 * padding)?, spec, omega)?;
        Ok((xi_value(&a, w)? - xi_value(&b, w)?).abs())
    })?;
    Ok(PaddingCheck {
        padding,
        max_change: diffs.iter().cloned().fold(0.0, f64::max),
        mean_change: diffs.iter().sum::<f64>() / diffs.len() as f64,
    })
}
