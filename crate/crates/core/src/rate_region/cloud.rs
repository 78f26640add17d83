use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::hull::dominates_convex_combination;
use super::{AuxFactorization, RateTriple, RegionError, Result, Scheme};
use crate::finite_prob::{Kernel, PmfDocument};

/// Points closer than this in every component are merged.
pub const DEDUP_TOL: f64 = 1e-9;

/// A sampled corner point with the auxiliary distribution that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudPoint {
    pub rates: RateTriple,
    pub provenance: AuxFactorization,
}

impl CloudPoint {
    pub fn scheme(&self) -> Scheme {
        self.provenance.scheme()
    }
}

/// A finite set of corner points standing in for a rate region.
///
/// With `closure` set, every triple componentwise above a convex
/// combination of points is a member.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCloud {
    points: Vec<CloudPoint>,
    closure: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    scheme: Scheme,
    r1: f64,
    r2: f64,
    r3: f64,
    kernels: BTreeMap<String, PmfDocument>,
}

fn record(p: &CloudPoint) -> PointRecord {
    PointRecord {
        scheme: p.scheme(),
        r1: p.rates.r1,
        r2: p.rates.r2,
        r3: p.rates.r3,
        kernels: p
            .provenance
            .kernels()
            .iter()
            .map(|k| (k.output().name().to_string(), PmfDocument::from_kernel(k)))
            .collect(),
    }
}

fn kernel_order(a: &Kernel, b: &Kernel) -> Ordering {
    a.output()
        .name()
        .cmp(b.output().name())
        .then(a.inputs().len().cmp(&b.inputs().len()))
        .then_with(|| {
            a.inputs()
                .iter()
                .map(|x| (x.name(), x.len()))
                .cmp(b.inputs().iter().map(|x| (x.name(), x.len())))
        })
        .then(a.output().len().cmp(&b.output().len()))
        .then_with(|| {
            let (ea, eb) = (a.entries(), b.entries());
            ea.iter()
                .zip(eb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(ea.len().cmp(&eb.len()))
        })
}

fn canonical_order(a: &CloudPoint, b: &CloudPoint) -> Ordering {
    a.rates
        .r1
        .total_cmp(&b.rates.r1)
        .then(a.rates.r2.total_cmp(&b.rates.r2))
        .then(a.rates.r3.total_cmp(&b.rates.r3))
        .then(a.scheme().cmp(&b.scheme()))
        .then_with(|| {
            let (ka, kb) = (a.provenance.kernels(), b.provenance.kernels());
            ka.iter()
                .zip(kb)
                .map(|(x, y)| kernel_order(x, y))
                .find(|o| o.is_ne())
                .unwrap_or(ka.len().cmp(&kb.len()))
        })
}

fn cell(r: &RateTriple) -> [i64; 3] {
    r.as_array().map(|v| (v / DEDUP_TOL).floor() as i64)
}

impl RegionCloud {
    /// Sorts points canonically and merges near-duplicates, keeping the first
    /// of each cluster in canonical order. The result does not depend on the
    /// input order.
    pub fn from_points(mut points: Vec<CloudPoint>) -> Self {
        points.sort_by(canonical_order);
        let mut kept: Vec<CloudPoint> = Vec::with_capacity(points.len());
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for p in points {
            let c = cell(&p.rates);
            let mut duplicate = false;
            'search: for d0 in -1..=1 {
                for d1 in -1..=1 {
                    for d2 in -1..=1 {
                        let key = [c[0] + d0, c[1] + d1, c[2] + d2];
                        if let Some(ids) = cells.get(&key) {
                            if ids
                                .iter()
                                .any(|&i| kept[i].rates.max_abs_diff(&p.rates) <= DEDUP_TOL)
                            {
                                duplicate = true;
                                break 'search;
                            }
                        }
                    }
                }
            }
            if !duplicate {
                cells.entry(c).or_default().push(kept.len());
                kept.push(p);
            }
        }
        Self {
            points: kept,
            closure: true,
        }
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            closure: true,
        }
    }

    pub fn points(&self) -> &[CloudPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closure
    }

    pub fn union(&self, other: &RegionCloud) -> RegionCloud {
        let mut all = self.points.clone();
        all.extend(other.points.iter().cloned());
        Self::from_points(all)
    }

    pub fn filter_scheme(&self, scheme: Scheme) -> RegionCloud {
        Self {
            points: self
                .points
                .iter()
                .filter(|p| p.scheme() == scheme)
                .cloned()
                .collect(),
            closure: self.closure,
        }
    }

    /// Whether `query + tolerance·(1,1,1)` dominates a convex combination of
    /// the cloud's points. An empty cloud contains nothing.
    pub fn contains(&self, query: &RateTriple, tolerance: f64) -> bool {
        let pts: Vec<[f64; 3]> = self.points.iter().map(|p| p.rates.as_array()).collect();
        let bound = [
            query.r1 + tolerance,
            query.r2 + tolerance,
            query.r3 + tolerance,
        ];
        dominates_convex_combination(&pts, bound)
    }

    /// Nearest point in the max-norm, if any.
    pub fn nearest(&self, query: &RateTriple) -> Option<(&CloudPoint, f64)> {
        self.points
            .iter()
            .map(|p| (p, p.rates.max_abs_diff(query)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// One JSON record per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&serde_json::to_string(&record(p)).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: PointRecord = serde_json::from_str(line)
                .map_err(|e| RegionError::Record(format!("line {}: {e}", lineno + 1)))?;
            let order: &[&str] = match rec.scheme {
                Scheme::Outer => &["U", "V", "W"],
                _ => &["U", "V", "W", "Z"],
            };
            let kernels = order
                .iter()
                .map(|name| {
                    rec.kernels
                        .get(*name)
                        .ok_or_else(|| RegionError::Record(format!("missing kernel {name}")))
                        .and_then(|doc| Ok(doc.to_kernel()?))
                })
                .collect::<Result<Vec<_>>>()?;
            points.push(CloudPoint {
                rates: RateTriple::new(rec.r1, rec.r2, rec.r3)?,
                provenance: AuxFactorization::new(rec.scheme, kernels)?,
            });
        }
        Ok(Self::from_points(points))
    }
}
