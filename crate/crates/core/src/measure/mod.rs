//! Finitely supported probability measures on `[0, 1]`, Wasserstein-1 and
//! cylinder discrepancies between them, and entropy estimators on symbol
//! streams.

mod entropy;

pub use entropy::{
    block_entropy, conditional_information, lyapunov_entropy, BlockCounts, EntropyEstimate,
};

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::map::{BranchMap, OrbitTrace};
use crate::scalar::{Interval, Scalar};
use crate::symbolic::enumerate_cylinders;

/// Atoms closer than this are merged (floating point positions).
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Allowed deviation of the total weight from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Atoms this close to a cylinder endpoint are flagged by the discrepancy.
pub const BOUNDARY_ATOM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

/// Probability measure with finitely many atoms, sorted by position.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

impl DiscreteMeasure {
    /// Builds a measure from `(position, weight)` pairs. Weights must be
    /// positive and sum to 1; coinciding positions are merged.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(position, weight)| Atom { position, weight })
            .collect();
        for a in &atoms {
            if !(0.0..=1.0).contains(&a.position) || !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidAtom {
                    position: a.position,
                    weight: a.weight,
                });
            }
        }
        let sum = compensated_sum(atoms.iter().map(|a| a.weight));
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        Ok(Self {
            atoms: merge_sorted(atoms, MERGE_TOLERANCE),
        })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new([(x, 1.0)])
    }

    /// Uniform measure on `points`, counted with multiplicity. Exact scalars
    /// are merged only when equal; floats within [`MERGE_TOLERANCE`].
    pub fn uniform_on<S: Scalar>(points: &[S]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("no points".into()));
        }
        let total = points.len() as f64;
        let mut sorted: Vec<&S> = points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let mut grouped: Vec<(f64, usize)> = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i + 1;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            grouped.push((sorted[i].to_f64(), j - i));
            i = j;
        }
        let mut atoms = Vec::with_capacity(grouped.len());
        for (position, count) in grouped {
            if !(0.0..=1.0).contains(&position) {
                return Err(Error::InvalidAtom {
                    position,
                    weight: count as f64 / total,
                });
            }
            atoms.push(Atom {
                position,
                weight: count as f64 / total,
            });
        }
        let atoms = if S::EXACT {
            atoms
        } else {
            merge_sorted(atoms, MERGE_TOLERANCE)
        };
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.weight))
    }

    /// Mass of an open interval.
    pub fn mass_in(&self, iv: &Interval<f64>) -> f64 {
        let start = self.atoms.partition_point(|a| a.position <= iv.lo);
        let end = self.atoms.partition_point(|a| a.position < iv.hi);
        compensated_sum(self.atoms[start..end.max(start)].iter().map(|a| a.weight))
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.weight * a.position))
    }

    /// `T_* μ`.
    pub fn push_forward<M: BranchMap<Scalar = f64>>(&self, map: &M) -> Result<Self> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            atoms.push(Atom {
                position: map.evaluate(&a.position)?,
                weight: a.weight,
            });
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        Ok(Self {
            atoms: merge_sorted(atoms, MERGE_TOLERANCE),
        })
    }

    /// `position,weight` rows, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "position,weight")?;
        for a in &self.atoms {
            writeln!(out, "{:.16e},{:.16e}", a.position, a.weight)?;
        }
        Ok(())
    }
}

fn merge_sorted(atoms: Vec<Atom>, tol: f64) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    let mut anchor = f64::NAN;
    for a in atoms {
        match out.last_mut() {
            Some(last) if a.position - anchor <= tol => last.weight += a.weight,
            _ => {
                anchor = a.position;
                out.push(a);
            }
        }
    }
    out
}

/// Uniform measure on the orbit points after `burn_in`.
pub fn empirical_measure<S: Scalar>(trace: &OrbitTrace<S>, burn_in: usize) -> Result<DiscreteMeasure> {
    if burn_in >= trace.points.len() {
        return Err(Error::EmptyAfterBurnIn {
            burn_in,
            len: trace.points.len(),
        });
    }
    DiscreteMeasure::uniform_on(&trace.points[burn_in..])
}

/// Wasserstein-1 distance: `∫_0^1 |F_1 - F_2|`, integrated exactly over the
/// merged atom positions.
pub fn w1_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    let (xa, xb) = (&a.atoms, &b.atoms);
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(p), Some(q)) => p.position.min(q.position),
            (Some(p), None) => p.position,
            (None, Some(q)) => q.position,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            total += (fa - fb).abs() * (x - p);
        }
        while i < xa.len() && xa[i].position == x {
            fa += xa[i].weight;
            i += 1;
        }
        while j < xb.len() && xb[j].position == x {
            fb += xb[j].weight;
            j += 1;
        }
        prev = Some(x);
    }
    total
}

/// Precomputed CDF of a (typically large) target measure, answering W1
/// queries against small measures in `O(k log n)`.
#[derive(Clone, Debug)]
pub struct TargetCdf {
    positions: Vec<f64>,
    /// `cum_weight[k] = Σ_{i <= k} w_i`.
    cum_weight: Vec<f64>,
    /// `cum_moment[k] = Σ_{i <= k} w_i x_i`.
    cum_moment: Vec<f64>,
}

impl TargetCdf {
    pub fn new(measure: &DiscreteMeasure) -> Self {
        let n = measure.atoms.len();
        let mut positions = Vec::with_capacity(n);
        let mut cum_weight = Vec::with_capacity(n);
        let mut cum_moment = Vec::with_capacity(n);
        let (mut w, mut m) = (0.0, 0.0);
        for a in &measure.atoms {
            w += a.weight;
            m += a.weight * a.position;
            positions.push(a.position);
            cum_weight.push(w);
            cum_moment.push(m);
        }
        Self {
            positions,
            cum_weight,
            cum_moment,
        }
    }

    /// `∫_0^x F(s) ds`.
    fn integral(&self, x: f64) -> f64 {
        let k = self.positions.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            x * self.cum_weight[k - 1] - self.cum_moment[k - 1]
        }
    }

    /// `∫_a^b |F(s) - c| ds`. `F` is nondecreasing, so `F - c` changes sign
    /// at most once.
    fn segment(&self, a: f64, b: f64, c: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let k = self.cum_weight.partition_point(|&w| w < c);
        let t = self.positions.get(k).copied().unwrap_or(f64::INFINITY).clamp(a, b);
        let (ga, gt, gb) = (self.integral(a), self.integral(t), self.integral(b));
        let below = c * (t - a) - (gt - ga);
        let above = (gb - gt) - c * (b - t);
        below.max(0.0) + above.max(0.0)
    }

    pub fn w1_to(&self, other: &DiscreteMeasure) -> f64 {
        let mut total = 0.0;
        let (mut prev, mut c) = (0.0, 0.0);
        for atom in &other.atoms {
            total += self.segment(prev, atom.position, c);
            c += atom.weight;
            prev = atom.position;
        }
        total + self.segment(prev, 1.0, c)
    }
}

/// The depth-`m` cylinders of a map, sorted by position, for assigning mass.
#[derive(Clone, Debug)]
pub struct CylinderPartition {
    intervals: Vec<Interval<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMasses {
    pub masses: Vec<f64>,
    /// Atoms within [`BOUNDARY_ATOM_TOLERANCE`] of a cylinder endpoint (or
    /// outside every cylinder).
    pub boundary_atoms: usize,
}

impl CylinderPartition {
    pub fn new<M: BranchMap>(map: &M, m: usize, depth_cap: usize) -> Result<Self> {
        let mut intervals: Vec<Interval<f64>> = enumerate_cylinders(map, m, depth_cap)?
            .into_iter()
            .filter_map(|c| c.interval.map(|iv| iv.to_f64()))
            .collect();
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        Ok(Self { intervals })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn masses(&self, measure: &DiscreteMeasure) -> CylinderMasses {
        let mut masses = vec![0.0; self.intervals.len()];
        let mut boundary_atoms = 0;
        for a in &measure.atoms {
            let x = a.position;
            let k = self.intervals.partition_point(|iv| iv.lo < x);
            let hit = k
                .checked_sub(1)
                .filter(|&i| self.intervals[i].contains(&x));
            match hit {
                Some(i) => {
                    let iv = &self.intervals[i];
                    if (x - iv.lo).min(iv.hi - x) <= BOUNDARY_ATOM_TOLERANCE {
                        boundary_atoms += 1;
                    }
                    masses[i] += a.weight;
                }
                None => boundary_atoms += 1,
            }
        }
        CylinderMasses {
            masses,
            boundary_atoms,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    /// `max_Z |μ1(Z) - μ2(Z)|` over the depth-`m` cylinders.
    pub value: f64,
    pub boundary_atoms: usize,
}

pub fn discrepancy_from_masses(a: &CylinderMasses, b: &CylinderMasses) -> Discrepancy {
    let value = a
        .masses
        .iter()
        .zip(&b.masses)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Discrepancy {
        value,
        boundary_atoms: a.boundary_atoms + b.boundary_atoms,
    }
}

pub fn cylinder_discrepancy<M: BranchMap>(
    map: &M,
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    m: usize,
    depth_cap: usize,
) -> Result<Discrepancy> {
    let partition = CylinderPartition::new(map, m, depth_cap)?;
    Ok(discrepancy_from_masses(
        &partition.masses(a),
        &partition.masses(b),
    ))
}
