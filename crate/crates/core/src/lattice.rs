//! Quantization grids over the parameter domain.
//!
//! The working grid at sample size `n` with span `t` is the scaled integer
//! lattice with per-coordinate spacing `t / sqrt(n)`, anchored at the origin
//! and intersected with the family domain. Grid points that violate the
//! simplex margin (possible for k >= 3) are dropped; no boundary points are
//! added. The number of surviving points grows like `n^{d/2}` at fixed span,
//! which is exactly the memory budget the codes are built around.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::families::{Family, FisherMatrix, ParamPoint};
use crate::typespace::TypeSpace;

/// Which distance the nearest-point maps minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Plain Euclidean distance on moment coordinates.
    Euclid,
    /// Quadratic form weighted by the Fisher matrix at the query point.
    Fisher,
}

/// A finite grid of parameter points with uniform spacing per coordinate.
#[derive(Debug, Clone)]
pub struct Lattice {
    family: Family,
    n: u32,
    t: f64,
    spacing: f64,
    anchor: Vec<f64>,
    ranges: Vec<(i64, i64)>,
    /// Integer grid tuples, lexicographically sorted.
    jtuples: Vec<Vec<i64>>,
    /// Parameter coordinates, same order as `jtuples`.
    points: Vec<Vec<f64>>,
}

impl Lattice {
    /// The grid `(t/sqrt(n)) Z^d` intersected with the family domain.
    pub fn build(family: Family, n: u32, t: f64) -> Result<Lattice> {
        if !(t > 0.0) || n < 1 {
            return Err(Error::InvalidConfig(format!(
                "lattice needs t > 0 and n >= 1, got t={t} n={n}"
            )));
        }
        let spacing = t / (n as f64).sqrt();
        let d = family.dim();
        let anchor = vec![0.0; d];
        Self::assemble(family, n, t, spacing, anchor)
    }

    /// A uniform grid of exactly `m` points over a one-dimensional support
    /// interval (cell midpoints). Used to realize codes with a prescribed
    /// memory size; the equivalent span is `spacing * sqrt(n)`.
    pub fn with_points_in_support(
        family: Family,
        n: u32,
        m: usize,
        support: (f64, f64),
    ) -> Result<Lattice> {
        if family.dim() != 1 {
            return Err(Error::Unsupported(
                "sized grids are implemented for one-dimensional families".into(),
            ));
        }
        if m < 1 || !(support.0 < support.1) {
            return Err(Error::InvalidConfig(format!(
                "sized grid needs m >= 1 and a proper interval, got m={m}, {support:?}"
            )));
        }
        let spacing = (support.1 - support.0) / m as f64;
        let anchor = vec![support.0 + 0.5 * spacing];
        let t = spacing * (n as f64).sqrt();
        let lat = Self::assemble(family, n, t, spacing, anchor)?;
        if lat.len() != m {
            return Err(Error::InvalidConfig(format!(
                "support {support:?} leaves the family domain: got {} of {m} points",
                lat.len()
            )));
        }
        Ok(lat)
    }

    fn assemble(
        family: Family,
        n: u32,
        t: f64,
        spacing: f64,
        anchor: Vec<f64>,
    ) -> Result<Lattice> {
        let d = family.dim();
        let lo = family.eps_bd();
        let hi = 1.0 - family.eps_bd();
        let mut ranges = Vec::with_capacity(d);
        for axis in 0..d {
            let a = anchor[axis];
            // generous candidate range, then exact per-point membership
            let jlo = ((lo - a) / spacing).floor() as i64 - 1;
            let jhi = ((hi - a) / spacing).ceil() as i64 + 1;
            let mut jmin = i64::MAX;
            let mut jmax = i64::MIN;
            for j in jlo..=jhi {
                let z = a + j as f64 * spacing;
                if z >= lo - 1e-12 && z <= hi + 1e-12 {
                    jmin = jmin.min(j);
                    jmax = jmax.max(j);
                }
            }
            if jmin > jmax {
                return Err(Error::EmptyLattice { t, n });
            }
            ranges.push((jmin, jmax));
        }

        let mut jtuples = Vec::new();
        let mut points = Vec::new();
        let mut tuple = vec![0i64; d];
        collect_tuples(
            &family, &ranges, &anchor, spacing, 0, &mut tuple, &mut jtuples, &mut points,
        );
        if points.is_empty() {
            return Err(Error::EmptyLattice { t, n });
        }
        Ok(Lattice {
            family,
            n,
            t,
            spacing,
            anchor,
            ranges,
            jtuples,
            points,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Span `t`; the per-coordinate spacing is `t / sqrt(n)`.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn param_point(&self, i: usize) -> ParamPoint {
        ParamPoint::new(self.points[i].clone())
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.iter().map(|p| p.as_slice())
    }

    /// Memory cost of addressing one grid point, `ln |points|` in nats.
    pub fn code_length_nats(&self) -> f64 {
        (self.len() as f64).ln()
    }

    /// Index of the Euclidean-nearest grid point; ties go to the
    /// lexicographically smallest point.
    pub fn nearest_euclid(&self, z: &[f64]) -> usize {
        assert_eq!(z.len(), self.family.dim());
        let mut tuple = Vec::with_capacity(z.len());
        for (axis, &zi) in z.iter().enumerate() {
            let (jmin, jmax) = self.ranges[axis];
            let x = (zi - self.anchor[axis]) / self.spacing;
            let lo = (x.floor() as i64).clamp(jmin, jmax);
            let hi = (lo + 1).clamp(jmin, jmax);
            let d_lo = (zi - self.coord(axis, lo)).abs();
            let d_hi = (zi - self.coord(axis, hi)).abs();
            tuple.push(if d_lo <= d_hi { lo } else { hi });
        }
        match self.find_tuple(&tuple) {
            Some(idx) => idx,
            // rounded tuple was dropped by the simplex constraint
            None => self.nearest_scan(z, None),
        }
    }

    /// Index of the grid point minimizing the `J`-weighted quadratic form;
    /// same tie rule. For one-dimensional grids the scalar weight cancels
    /// and this agrees with the Euclidean map.
    pub fn nearest_fisher(&self, z: &[f64], j: &FisherMatrix) -> usize {
        if self.family.dim() == 1 {
            return self.nearest_euclid(z);
        }
        self.nearest_scan(z, Some(j))
    }

    fn coord(&self, axis: usize, j: i64) -> f64 {
        self.anchor[axis] + j as f64 * self.spacing
    }

    fn find_tuple(&self, tuple: &[i64]) -> Option<usize> {
        self.jtuples
            .binary_search_by(|probe| probe.as_slice().cmp(tuple))
            .ok()
    }

    /// Exhaustive argmin over all points, in lexicographic order so that
    /// exact ties keep the smallest point.
    fn nearest_scan(&self, z: &[f64], j: Option<&FisherMatrix>) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (idx, p) in self.points.iter().enumerate() {
            let diff: Vec<f64> = p.iter().zip(z).map(|(a, b)| a - b).collect();
            let d = match j {
                Some(j) => j.quadratic_form(&diff),
                None => diff.iter().map(|x| x * x).sum(),
            };
            if d < best_d {
                best_d = d;
                best = idx;
            }
        }
        best
    }

    /// Types whose clamped maximum-likelihood estimate maps to `point_idx`
    /// under the chosen nearest map. Convenience wrapper over
    /// [`Self::partition`]; callers that need many cells should build the
    /// partition once.
    pub fn cell_types(
        &self,
        point_idx: usize,
        ts: &TypeSpace,
        metric: Metric,
    ) -> Result<Vec<usize>> {
        Ok(self.partition(ts, metric)?.cells[point_idx].clone())
    }

    /// Assign every type to its encoded grid point.
    pub fn partition(&self, ts: &TypeSpace, metric: Metric) -> Result<CellPartition> {
        if ts.k != self.family.k() {
            return Err(Error::DimensionMismatch(format!(
                "type space has k={}, family has k={}",
                ts.k,
                self.family.k()
            )));
        }
        let assignment: Vec<usize> = (0..ts.len())
            .into_par_iter()
            .map(|i| {
                let z = self.family.mle(&ts.type_at(i));
                match metric {
                    Metric::Euclid => Ok(self.nearest_euclid(z.as_slice())),
                    Metric::Fisher => {
                        let j = self.family.fisher(&z)?;
                        Ok(self.nearest_fisher(z.as_slice(), &j))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cells = vec![Vec::new(); self.len()];
        for (ti, &pi) in assignment.iter().enumerate() {
            cells[pi].push(ti);
        }
        Ok(CellPartition { assignment, cells })
    }
}

fn collect_tuples(
    family: &Family,
    ranges: &[(i64, i64)],
    anchor: &[f64],
    spacing: f64,
    axis: usize,
    tuple: &mut Vec<i64>,
    jtuples: &mut Vec<Vec<i64>>,
    points: &mut Vec<Vec<f64>>,
) {
    if axis == ranges.len() {
        let coords: Vec<f64> = tuple
            .iter()
            .enumerate()
            .map(|(a, &j)| anchor[a] + j as f64 * spacing)
            .collect();
        if family.contains(&ParamPoint::new(coords.clone())) {
            jtuples.push(tuple.clone());
            points.push(coords);
        }
        return;
    }
    let (jmin, jmax) = ranges[axis];
    for j in jmin..=jmax {
        tuple.push(j);
        collect_tuples(family, ranges, anchor, spacing, axis + 1, tuple, jtuples, points);
        tuple.pop();
    }
}

/// Preimages of the type-to-grid-point map: `assignment[type] = point`,
/// `cells[point] = types`. The cells partition the type set.
#[derive(Debug, Clone)]
pub struct CellPartition {
    pub assignment: Vec<usize>,
    pub cells: Vec<Vec<usize>>,
}
