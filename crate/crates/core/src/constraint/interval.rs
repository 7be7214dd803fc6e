//! Normalized unions of rational intervals: the one-dimensional view of a
//! constraint set over a single variable, used for duration sets.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::atom::{LinearTerm, Relation};
use super::env::{VarEnv, VarId};
use super::poly::{ConstraintError, Polyhedron};
use super::set::ConstraintSet;
use crate::rational::{render_rat, Rat};

/// One interval over the non-negative rationals. `hi = None` means
/// unbounded above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub lo_closed: bool,
    pub hi: Option<Rat>,
    pub hi_closed: bool,
}

impl Interval {
    fn is_valid(&self) -> bool {
        match &self.hi {
            None => true,
            Some(hi) => match self.lo.cmp(hi) {
                Ordering::Less => true,
                Ordering::Equal => self.lo_closed && self.hi_closed,
                Ordering::Greater => false,
            },
        }
    }

    pub fn contains(&self, value: &Rat) -> bool {
        let above = match value.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        if !above {
            return false;
        }
        match &self.hi {
            None => true,
            Some(hi) => match value.cmp(hi) {
                Ordering::Less => true,
                Ordering::Equal => self.hi_closed,
                Ordering::Greater => false,
            },
        }
    }

    pub fn render(&self) -> String {
        let open = if self.lo_closed { "[" } else { "(" };
        match &self.hi {
            None => format!("{}{}, inf)", open, render_rat(&self.lo)),
            Some(hi) => format!(
                "{}{}, {}{}",
                open,
                render_rat(&self.lo),
                render_rat(hi),
                if self.hi_closed { "]" } else { ")" }
            ),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lo": render_rat(&self.lo),
            "lo_closed": self.lo_closed,
            "hi": self.hi.as_ref().map(render_rat),
            "hi_closed": self.hi_closed,
        })
    }
}

/// A sorted, pairwise-disjoint, maximal union of intervals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DurationIntervals {
    intervals: Vec<Interval>,
}

impl DurationIntervals {
    pub fn empty() -> DurationIntervals {
        DurationIntervals::default()
    }

    pub fn from_intervals(intervals: Vec<Interval>) -> DurationIntervals {
        let mut valid: Vec<Interval> = intervals.into_iter().filter(Interval::is_valid).collect();
        valid.sort_by(|a, b| {
            a.lo.cmp(&b.lo)
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut merged: Vec<Interval> = Vec::new();
        for next in valid {
            match merged.last_mut() {
                Some(last) if touches(last, &next) => {
                    let larger = match (&last.hi, &next.hi) {
                        (None, _) => None,
                        (_, None) => None,
                        (Some(a), Some(b)) => match a.cmp(b) {
                            Ordering::Less => Some((b.clone(), next.hi_closed)),
                            Ordering::Greater => Some((a.clone(), last.hi_closed)),
                            Ordering::Equal => {
                                Some((a.clone(), last.hi_closed || next.hi_closed))
                            }
                        },
                    };
                    match larger {
                        None => {
                            last.hi = None;
                            last.hi_closed = false;
                        }
                        Some((hi, closed)) => {
                            last.hi = Some(hi);
                            last.hi_closed = closed;
                        }
                    }
                }
                _ => merged.push(next),
            }
        }
        DurationIntervals { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, value: &Rat) -> bool {
        self.intervals.iter().any(|i| i.contains(value))
    }

    pub fn intersect(&self, other: &DurationIntervals) -> DurationIntervals {
        let mut pieces = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let (lo, lo_closed) = match a.lo.cmp(&b.lo) {
                    Ordering::Greater => (a.lo.clone(), a.lo_closed),
                    Ordering::Less => (b.lo.clone(), b.lo_closed),
                    Ordering::Equal => (a.lo.clone(), a.lo_closed && b.lo_closed),
                };
                let (hi, hi_closed) = match (&a.hi, &b.hi) {
                    (None, None) => (None, false),
                    (Some(h), None) => (Some(h.clone()), a.hi_closed),
                    (None, Some(h)) => (Some(h.clone()), b.hi_closed),
                    (Some(ha), Some(hb)) => match ha.cmp(hb) {
                        Ordering::Less => (Some(ha.clone()), a.hi_closed),
                        Ordering::Greater => (Some(hb.clone()), b.hi_closed),
                        Ordering::Equal => (Some(ha.clone()), a.hi_closed && b.hi_closed),
                    },
                };
                pieces.push(Interval {
                    lo,
                    lo_closed,
                    hi,
                    hi_closed,
                });
            }
        }
        DurationIntervals::from_intervals(pieces)
    }

    /// A representative element, used for emptiness witnesses.
    pub fn pick_point(&self) -> Option<Rat> {
        let first = self.intervals.first()?;
        if first.lo_closed {
            return Some(first.lo.clone());
        }
        Some(match &first.hi {
            Some(hi) => (first.lo.clone() + hi) / Rat::from_integer(2.into()),
            None => first.lo.clone() + Rat::one(),
        })
    }

    /// All grid multiples of `1/denominator` inside the set, up to `bound`.
    pub fn grid_points(&self, denominator: u64, bound: &Rat) -> Vec<Rat> {
        let step = Rat::new(1.into(), denominator.into());
        let mut out = Vec::new();
        for interval in &self.intervals {
            let mut k = (interval.lo.clone() / &step).ceil();
            if &k * &step == interval.lo && !interval.lo_closed {
                k += Rat::one();
            }
            loop {
                let value = &k * &step;
                if value > *bound || !interval.contains(&value) {
                    break;
                }
                out.push(value);
                k += Rat::one();
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Converts back into a constraint set over `var`.
    pub fn to_constraint_set(
        &self,
        env: Arc<VarEnv>,
        var: VarId,
    ) -> Result<ConstraintSet, ConstraintError> {
        let mut polys = Vec::new();
        for interval in &self.intervals {
            let mut atoms = Vec::new();
            let lo_term = LinearTerm::var(var).minus(&LinearTerm::constant(interval.lo.clone()));
            atoms.push((
                lo_term,
                if interval.lo_closed {
                    Relation::Ge
                } else {
                    Relation::Gt
                },
            ));
            if let Some(hi) = &interval.hi {
                let hi_term = LinearTerm::var(var).minus(&LinearTerm::constant(hi.clone()));
                atoms.push((
                    hi_term,
                    if interval.hi_closed {
                        Relation::Le
                    } else {
                        Relation::Lt
                    },
                ));
            }
            polys.push(Polyhedron::from_terms(env.clone(), &atoms)?);
        }
        ConstraintSet::from_polys(env, polys)
    }

    pub fn render(&self) -> String {
        if self.intervals.is_empty() {
            return "empty".to_string();
        }
        self.intervals
            .iter()
            .map(|i| i.render())
            .collect::<Vec<_>>()
            .join(" U ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.intervals.iter().map(|i| i.to_json()).collect())
    }
}

impl fmt::Display for DurationIntervals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Overlap-or-touch test assuming `a.lo <= b.lo`.
fn touches(a: &Interval, b: &Interval) -> bool {
    match &a.hi {
        None => true,
        Some(hi) => match b.lo.cmp(hi) {
            Ordering::Less => true,
            Ordering::Equal => b.lo_closed || a.hi_closed,
            Ordering::Greater => false,
        },
    }
}

/// The 1-D view of a constraint set that mentions only `var`.
pub fn to_intervals(
    set: &ConstraintSet,
    var: VarId,
) -> Result<DurationIntervals, ConstraintError> {
    let mut intervals = Vec::new();
    for disjunct in set.disjuncts() {
        let mut lo = Rat::zero();
        let mut lo_closed = true;
        let mut hi: Option<Rat> = None;
        let mut hi_closed = false;
        for atom in disjunct.atoms() {
            for id in set.env().ids() {
                if id != var && atom.mentions(id) {
                    return Err(ConstraintError::MultiVariable(
                        atom.render(set.env()),
                    ));
                }
            }
            let coeff = atom.coeff(var);
            if coeff.is_zero() {
                return Err(ConstraintError::MultiVariable(atom.render(set.env())));
            }
            // Canonical atoms have a positive leading coefficient, so the
            // atom reads coeff*var + k ⋈ 0 with coeff > 0.
            let bound = Rat::new(-atom.constant_part().clone(), coeff.clone());
            match atom.relation() {
                Relation::Ge | Relation::Gt => {
                    let strict = atom.relation() == Relation::Gt;
                    if bound > lo || (bound == lo && strict) {
                        lo_closed = !strict;
                        lo = bound;
                    }
                }
                Relation::Le | Relation::Lt => {
                    let strict = atom.relation() == Relation::Lt;
                    let tighter = match &hi {
                        None => true,
                        Some(existing) => bound < *existing || (bound == *existing && strict),
                    };
                    if tighter {
                        hi_closed = !strict;
                        hi = Some(bound);
                    }
                }
                Relation::Eq => {
                    if bound > lo || (bound == lo && !lo_closed) {
                        lo = bound.clone();
                        lo_closed = true;
                    }
                    let tighter = match &hi {
                        None => true,
                        Some(existing) => bound < *existing,
                    };
                    if tighter {
                        hi = Some(bound);
                        hi_closed = true;
                    }
                }
            }
        }
        intervals.push(Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        });
    }
    Ok(DurationIntervals::from_intervals(intervals))
}
