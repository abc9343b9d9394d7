//! Tracking `(ξ_l(y), T^l ξ_l(y))` along the orbit of a base point `y`.
//!
//! Each step clips the current image `D_l` to the branch containing `T^l y`
//! and maps it forward. A step is a *cut* when the clip is strict. The
//! cylinder `C_l` only changes at cuts: the clipped endpoint is pulled back
//! through the stored word. A *covering time* is a step where the closure of
//! `C_l` sits strictly inside `D_l`, which forces a fixed point of `T^l` in
//! `C_l`.

use crate::error::{Error, Result};
use crate::map::{BranchMap, Direction};
use crate::scalar::{Interval, Scalar};
use crate::symbolic::{Cylinder, Itinerary};

/// Default covering margin.
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// Distance at which an endpoint of `D_l` counts as touching the critical set.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TowerTracker<S> {
    pub base_point: S,
    pub step: usize,
    pub word: Itinerary,
    /// `C_l = ξ_l(y)`.
    pub cylinder: Interval<S>,
    /// `D_l = T^l ξ_l(y)`.
    pub image: Interval<S>,
    /// Orientation of `T^l` on `C_l`.
    pub orientation: Direction,
    /// `cut_flags[j]` is the cut flag of the advance from step `j + 1`.
    pub cut_flags: Vec<bool>,
    /// `T^l y`.
    pub current: S,
}

impl<S: Scalar> TowerTracker<S> {
    /// State at `l = 1`.
    pub fn new<M: BranchMap<Scalar = S>>(map: &M, y: &S) -> Result<Self> {
        let i = map.branch_of(y)?;
        Ok(Self {
            base_point: y.clone(),
            step: 1,
            word: Itinerary(vec![i]),
            cylinder: map.domain(i),
            image: map.image(i),
            orientation: map.direction(i),
            cut_flags: Vec::new(),
            current: map.apply(i, y).clamp_unit(),
        })
    }

    pub fn advance<M: BranchMap<Scalar = S>>(&self, map: &M) -> Result<Self> {
        let mut next = self.clone();
        next.advance_in_place(map)?;
        Ok(next)
    }

    pub fn advance_in_place<M: BranchMap<Scalar = S>>(&mut self, map: &M) -> Result<()> {
        let j = map.branch_of(&self.current).map_err(|e| match e {
            Error::CriticalPoint { x, .. } => Error::CriticalPoint {
                x,
                step: Some(self.step),
            },
            other => other,
        })?;
        let zone = map.domain(j);
        let clipped = self.image.intersect(&zone);
        let low_cut = clipped.lo > self.image.lo;
        let high_cut = clipped.hi < self.image.hi;

        if low_cut {
            let x = self.pull_back_through_word(map, &clipped.lo);
            match self.orientation {
                Direction::Increasing => self.cylinder.lo = S::max_of(self.cylinder.lo.clone(), x),
                Direction::Decreasing => self.cylinder.hi = S::min_of(self.cylinder.hi.clone(), x),
            }
        }
        if high_cut {
            let x = self.pull_back_through_word(map, &clipped.hi);
            match self.orientation {
                Direction::Increasing => self.cylinder.hi = S::min_of(self.cylinder.hi.clone(), x),
                Direction::Decreasing => self.cylinder.lo = S::max_of(self.cylinder.lo.clone(), x),
            }
        }

        let a = map.apply(j, &clipped.lo).clamp_unit();
        let b = map.apply(j, &clipped.hi).clamp_unit();
        self.image = match map.direction(j) {
            Direction::Increasing => Interval::new(a, b),
            Direction::Decreasing => Interval::new(b, a),
        };
        self.orientation = self.orientation.then(map.direction(j));
        self.cut_flags.push(low_cut || high_cut);
        self.word.0.push(j);
        self.current = map.apply(j, &self.current).clamp_unit();
        self.step += 1;
        Ok(())
    }

    /// `(T^l|_{C_l})^{-1}(v)` for `v` in the closure of `D_l`.
    fn pull_back_through_word<M: BranchMap<Scalar = S>>(&self, map: &M, v: &S) -> S {
        self.word
            .iter()
            .rev()
            .fold(v.clone(), |acc, &i| map.pull_back(i, &acc))
    }

    /// `inf D + margin <= inf C` and `sup C <= sup D - margin`.
    pub fn is_covering(&self, margin: &S) -> bool {
        self.image.lo.clone() + margin.clone() <= self.cylinder.lo
            && self.cylinder.hi.clone() <= self.image.hi.clone() - margin.clone()
    }

    /// An endpoint of `D_l` lies within [`BOUNDARY_TOLERANCE`] of a critical point.
    pub fn image_touches_critical<M: BranchMap<Scalar = S>>(&self, map: &M) -> bool {
        map.critical_distance(&self.image.lo) <= BOUNDARY_TOLERANCE
            || map.critical_distance(&self.image.hi) <= BOUNDARY_TOLERANCE
    }

    pub fn as_cylinder(&self) -> Cylinder<S> {
        Cylinder {
            word: self.word.clone(),
            interval: Some(self.cylinder.clone()),
            degenerate: false,
        }
    }
}

pub fn init_tracker<M: BranchMap>(map: &M, y: &M::Scalar) -> Result<TowerTracker<M::Scalar>> {
    TowerTracker::new(map, y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringTime<S> {
    pub l: usize,
    pub cylinder: Cylinder<S>,
    pub image: Interval<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringScan<S> {
    pub hits: Vec<CoveringTime<S>>,
    /// Step at which the orbit came within the critical tolerance, ending
    /// the scan early.
    pub truncated_at: Option<usize>,
    /// `|D_l|` for every scanned step, in order of `l`.
    pub image_widths: Vec<f64>,
}

/// All `l <= l_max` at which `C_l` is covered by `D_l` with the given margin.
pub fn covering_times<M: BranchMap>(
    map: &M,
    y: &M::Scalar,
    l_max: usize,
    margin: f64,
) -> Result<CoveringScan<M::Scalar>> {
    if margin < 0.0 || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!("margin {margin} must be >= 0")));
    }
    let margin = M::Scalar::from_f64(margin)
        .ok_or_else(|| Error::InvalidArgument("margin not representable".into()))?;
    let mut scan = CoveringScan {
        hits: Vec::new(),
        truncated_at: None,
        image_widths: Vec::new(),
    };
    if l_max == 0 {
        return Ok(scan);
    }
    let mut tracker = TowerTracker::new(map, y)?;
    loop {
        scan.image_widths.push(tracker.image.width().to_f64());
        if tracker.is_covering(&margin) {
            scan.hits.push(CoveringTime {
                l: tracker.step,
                cylinder: tracker.as_cylinder(),
                image: tracker.image.clone(),
            });
        }
        if tracker.step >= l_max {
            break;
        }
        match tracker.advance_in_place(map) {
            Ok(()) => {}
            Err(Error::CriticalPoint { .. }) => {
                scan.truncated_at = Some(tracker.step);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(scan)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutReport {
    /// Steps `l` whose advance clipped `D_l`.
    pub cuts: Vec<usize>,
    /// Steps `l` where an endpoint of `D_l` touches the critical set.
    pub boundary_hits: Vec<usize>,
    pub truncated_at: Option<usize>,
}

pub fn cut_times<M: BranchMap>(map: &M, y: &M::Scalar, l_max: usize) -> Result<CutReport> {
    let mut report = CutReport::default();
    if l_max == 0 {
        return Ok(report);
    }
    let mut tracker = TowerTracker::new(map, y)?;
    while tracker.step <= l_max {
        let l = tracker.step;
        if tracker.image_touches_critical(map) {
            report.boundary_hits.push(l);
        }
        match tracker.advance_in_place(map) {
            Ok(()) => {
                if tracker.cut_flags[l - 1] {
                    report.cuts.push(l);
                }
            }
            Err(Error::CriticalPoint { .. }) => {
                report.truncated_at = Some(l);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// One row of a tracker dump.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerRow<S> {
    pub l: usize,
    pub word: Itinerary,
    pub cylinder: Interval<S>,
    pub image: Interval<S>,
    /// Cut flag of the advance out of step `l`; `None` if that advance hit
    /// the critical set.
    pub cut: Option<bool>,
    pub covering: bool,
}

pub fn trace_tower<M: BranchMap>(
    map: &M,
    y: &M::Scalar,
    l_max: usize,
    margin: f64,
) -> Result<Vec<TowerRow<M::Scalar>>> {
    let margin = M::Scalar::from_f64(margin)
        .ok_or_else(|| Error::InvalidArgument("margin not representable".into()))?;
    let mut rows = Vec::new();
    if l_max == 0 {
        return Ok(rows);
    }
    let mut tracker = TowerTracker::new(map, y)?;
    while tracker.step <= l_max {
        let mut row = TowerRow {
            l: tracker.step,
            word: tracker.word.clone(),
            cylinder: tracker.cylinder.clone(),
            image: tracker.image.clone(),
            cut: None,
            covering: tracker.is_covering(&margin),
        };
        let advanced = tracker.advance_in_place(map);
        if advanced.is_ok() {
            row.cut = tracker.cut_flags.last().copied();
        }
        rows.push(row);
        match advanced {
            Ok(()) => {}
            Err(Error::CriticalPoint { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}
