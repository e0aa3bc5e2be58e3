use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TransitionRecord;

/// Regular grid of `nx x ny` bins over `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl BinSpec {
    /// One bin per integer cell of a `side x side` grid.
    pub fn cells(side: usize) -> Self {
        let hi = side as f64 - 0.5;
        Self {
            x_min: -0.5,
            x_max: hi,
            y_min: -0.5,
            y_max: hi,
            nx: side,
            ny: side,
        }
    }

    // Negated comparisons also reject NaN bounds.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || !(self.x_max > self.x_min) || !(self.y_max > self.y_min)
        {
            return Err(Error::config(format!("degenerate bin spec {self:?}")));
        }
        Ok(())
    }

    fn axis(v: f64, lo: f64, hi: f64, n: usize) -> (usize, bool) {
        if v.is_nan() || v < lo {
            return (0, true);
        }
        if v > hi {
            return (n - 1, true);
        }
        let i = ((v - lo) / (hi - lo) * n as f64).floor() as usize;
        (i.min(n - 1), false)
    }

    /// Bin of `p` and whether it had to be clamped into range.
    pub fn locate(&self, p: [f64; 2]) -> (usize, usize, bool) {
        let (x, cx) = Self::axis(p[0], self.x_min, self.x_max, self.nx);
        let (y, cy) = Self::axis(p[1], self.y_min, self.y_max, self.ny);
        (x, y, cx || cy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitationHistogram {
    pub bins: BinSpec,
    /// Row-major, `counts[y * nx + x]`.
    pub counts: Vec<u64>,
    pub total: u64,
    /// Points that fell outside the range and were clamped to a boundary bin.
    pub clamped: u64,
    /// Records whose state has no projection (e.g. an absorbing state).
    pub skipped: u64,
}

impl VisitationHistogram {
    pub fn new(bins: BinSpec) -> Result<Self> {
        bins.validate()?;
        Ok(Self {
            bins,
            counts: vec![0; bins.nx * bins.ny],
            total: 0,
            clamped: 0,
            skipped: 0,
        })
    }

    pub fn add(&mut self, p: Option<[f64; 2]>) {
        let Some(p) = p else {
            self.skipped += 1;
            return;
        };
        let (x, y, clamped) = self.bins.locate(p);
        self.counts[y * self.bins.nx + x] += 1;
        self.total += 1;
        self.clamped += clamped as u64;
    }

    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[y * self.bins.nx + x]
    }

    /// Fraction of the mass in each bin (all zero for an empty histogram).
    pub fn normalized(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "bin_x,bin_y,count")?;
        for y in 0..self.bins.ny {
            for x in 0..self.bins.nx {
                writeln!(out, "{x},{y},{}", self.count(x, y))?;
            }
        }
        Ok(())
    }

    /// Sidecar describing the bins and tallies.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "bin_spec": self.bins,
            "total": self.total,
            "clamped": self.clamped,
            "skipped": self.skipped,
        })
    }
}

/// Histogram of the projected next states of `history`.
pub fn visitation(
    history: &[TransitionRecord],
    projection: impl Fn(usize) -> Option<[f64; 2]>,
    bins: BinSpec,
) -> Result<VisitationHistogram> {
    let mut h = VisitationHistogram::new(bins)?;
    for r in history {
        h.add(projection(r.next_state));
    }
    Ok(h)
}

/// Per-bin `a/total_a - b/total_b`, zeroed where smaller than `threshold`
/// in magnitude.
pub fn histogram_diff(
    a: &VisitationHistogram,
    b: &VisitationHistogram,
    threshold: f64,
) -> Result<Vec<f64>> {
    if a.bins != b.bins {
        return Err(Error::Mismatch("histograms use different bin specs".into()));
    }
    Ok(a.normalized()
        .into_iter()
        .zip(b.normalized())
        .map(|(x, y)| {
            let d = x - y;
            if d.abs() < threshold {
                0.0
            } else {
                d
            }
        })
        .collect())
}
