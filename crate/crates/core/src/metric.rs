//! Z-normalised squared Euclidean distances.
//!
//! Window means and deviations come from the series prefix sums. Distances are
//! plain sums of squared differences (no square root, no division by length).

use serde::{Deserialize, Serialize};

use crate::dataset::TimeSeries;
use crate::error::{Error, Result};

/// Windows with a population standard deviation below this normalise to zeros.
pub const FLAT_SIGMA: f64 = 1e-10;

/// Where a shapelet was cut from: training instance, 0-based start, length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShapeletSource {
    pub instance: usize,
    pub start: usize,
    pub length: usize,
}

/// A z-normalised subsequence plus its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shapelet {
    values: Vec<f64>,
    source: ShapeletSource,
}

impl Shapelet {
    /// Cut `series[start..start + len]` and z-normalise it.
    pub fn from_window(series: &TimeSeries, instance: usize, start: usize, len: usize) -> Result<Self> {
        Ok(Shapelet {
            values: znormalize_window(series, start, len)?,
            source: ShapeletSource {
                instance,
                start,
                length: len,
            },
        })
    }

    /// Wrap already-normalised values.
    pub fn from_normalized(values: Vec<f64>, source: ShapeletSource) -> Self {
        Shapelet { values, source }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> ShapeletSource {
        self.source
    }
}

#[inline]
fn scale_for(sigma: f64) -> f64 {
    if sigma < FLAT_SIGMA {
        0.0
    } else {
        1.0 / sigma
    }
}

/// Z-normalise `series[start..start + len]` into `out`. Bounds are the
/// caller's responsibility.
pub(crate) fn znormalize_into(series: &TimeSeries, start: usize, len: usize, out: &mut Vec<f64>) {
    let (mean, sigma) = series.window_stats_unchecked(start, len);
    let scale = scale_for(sigma);
    out.clear();
    out.extend(series.values()[start..start + len].iter().map(|&x| (x - mean) * scale));
}

/// Z-normalised copy of a window (0-based `start`), population deviation.
pub fn znormalize_window(series: &TimeSeries, start: usize, len: usize) -> Result<Vec<f64>> {
    if len == 0 || start + len > series.len() {
        return Err(Error::WindowOutOfBounds {
            start,
            len,
            series_length: series.len(),
        });
    }
    let mut out = Vec::with_capacity(len);
    znormalize_into(series, start, len, &mut out);
    Ok(out)
}

/// Sum of squared differences, accumulated left to right. With `abandon_at`,
/// returns `Ok(None)` as soon as the running sum exceeds the threshold.
pub fn sq_dist(a: &[f64], b: &[f64], abandon_at: Option<f64>) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let limit = abandon_at.unwrap_or(f64::INFINITY);
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
        if sum > limit {
            return Ok(None);
        }
    }
    Ok(Some(sum))
}

/// Minimum distance between `shapelet` (already normalised) and every
/// normalised window of `series` of the same length. Each window is abandoned
/// once it exceeds the running minimum; `abandons` counts those.
///
/// Caller guarantees `0 < shapelet.len() <= series.len()`.
#[inline]
pub(crate) fn min_window_distance(shapelet: &[f64], series: &TimeSeries, abandons: &mut u64) -> f64 {
    let len = shapelet.len();
    let values = series.values();
    let mut best = f64::INFINITY;
    for start in 0..=values.len() - len {
        let (mean, sigma) = series.window_stats_unchecked(start, len);
        let scale = scale_for(sigma);
        let window = &values[start..start + len];
        let mut sum = 0.0;
        let mut abandoned = false;
        for (s, &x) in shapelet.iter().zip(window) {
            let d = s - (x - mean) * scale;
            sum += d * d;
            if sum > best {
                abandoned = true;
                break;
            }
        }
        if abandoned {
            *abandons += 1;
        } else {
            best = sum;
        }
    }
    best
}

/// Every z-normalised window of one length, for all instances of a dataset,
/// laid out instance by instance.
pub(crate) struct WindowTable {
    len: usize,
    per_series: usize,
    values: Vec<f64>,
}

impl WindowTable {
    /// Largest table, in values, worth materialising.
    pub(crate) const MAX_VALUES: usize = 1 << 23;

    /// `None` when the table would exceed [`Self::MAX_VALUES`].
    pub(crate) fn build(series: &[std::sync::Arc<TimeSeries>], len: usize) -> Option<Self> {
        let m = series.first().map_or(0, |t| t.len());
        if len == 0 || len > m {
            return None;
        }
        let per_series = m - len + 1;
        let total = series.len().checked_mul(per_series)?.checked_mul(len)?;
        if total > Self::MAX_VALUES {
            return None;
        }
        let mut values = Vec::with_capacity(total);
        let mut window = Vec::with_capacity(len);
        for t in series {
            for start in 0..per_series {
                znormalize_into(t, start, len, &mut window);
                values.extend_from_slice(&window);
            }
        }
        Some(WindowTable { len, per_series, values })
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn window(&self, instance: usize, start: usize) -> &[f64] {
        let at = (instance * self.per_series + start) * self.len;
        &self.values[at..at + self.len]
    }

    /// Same result as [`min_window_distance`] against instance `instance`.
    #[inline]
    pub(crate) fn min_distance(&self, shapelet: &[f64], instance: usize, abandons: &mut u64) -> f64 {
        let rows = &self.values[instance * self.per_series * self.len..(instance + 1) * self.per_series * self.len];
        let mut best = f64::INFINITY;
        for window in rows.chunks_exact(self.len) {
            let mut sum = 0.0;
            let mut abandoned = false;
            for (s, x) in shapelet.iter().zip(window) {
                let d = s - x;
                sum += d * d;
                if sum > best {
                    abandoned = true;
                    break;
                }
            }
            if abandoned {
                *abandons += 1;
            } else {
                best = sum;
            }
        }
        best
    }
}

/// Distance between a shapelet and a series: the minimum over all windows.
pub fn subsequence_distance(shapelet: &Shapelet, series: &TimeSeries) -> Result<f64> {
    if shapelet.is_empty() || shapelet.len() > series.len() {
        return Err(Error::ShapeletTooLong {
            shapelet: shapelet.len(),
            series: series.len(),
        });
    }
    Ok(min_window_distance(shapelet.values(), series, &mut 0))
}
