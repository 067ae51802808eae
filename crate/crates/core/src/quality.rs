//! Pattern-quality components: mean squared residue and the two slope-angle
//! dissimilarities. All three are non-negative and lower is better.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{mean_abs_pairwise_diff, Scalar};
use crate::patterns::Tricluster;
use crate::tensor::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QualityMeasure {
    #[default]
    Msr,
    Lsl,
    Msl,
}

impl QualityMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            QualityMeasure::Msr => "msr",
            QualityMeasure::Lsl => "lsl",
            QualityMeasure::Msl => "msl",
        }
    }
}

impl fmt::Display for QualityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QualityMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "msr" => Ok(QualityMeasure::Msr),
            "lsl" => Ok(QualityMeasure::Lsl),
            "msl" | "mls" => Ok(QualityMeasure::Msl),
            other => Err(Error::InvalidConfig(format!("unknown quality measure `{other}`"))),
        }
    }
}

/// Copies the tricluster cells out in `I, J, K` row-major order.
pub(crate) fn gather<T: Scalar>(d: &Dataset<T>, t: &Tricluster) -> Vec<T> {
    let mut out = Vec::with_capacity(t.volume());
    for &i in t.observations() {
        for &j in t.variables() {
            for &k in t.contexts() {
                out.push(d.get(i, j, k));
            }
        }
    }
    out
}

/// MSR together with the mean squared residue of every slice.
#[derive(Debug, Clone)]
pub struct MsrBreakdown<T> {
    pub score: T,
    /// Per axis, indexed by position within the tricluster's subset.
    pub slice_residues: [Vec<T>; 3],
}

pub fn msr_breakdown<T: Scalar>(d: &Dataset<T>, t: &Tricluster) -> Result<MsrBreakdown<T>> {
    let [ni, nj, nk] = t.shape();
    if ni == 0 || nj == 0 || nk == 0 {
        return Err(Error::EmptyTricluster);
    }
    // residues are shift invariant; centering on one cell keeps constant blocks exact
    let mut cells = gather(d, t);
    let x0 = cells[0];
    cells.iter_mut().for_each(|x| *x = *x - x0);
    let at = |a: usize, b: usize, c: usize| cells[(a * nj + b) * nk + c];

    let mut row = vec![T::zero(); ni];
    let mut var = vec![T::zero(); nj];
    let mut ctx = vec![T::zero(); nk];
    let mut total = T::zero();
    for a in 0..ni {
        for b in 0..nj {
            for c in 0..nk {
                let x = at(a, b, c);
                row[a] = row[a] + x;
                var[b] = var[b] + x;
                ctx[c] = ctx[c] + x;
                total = total + x;
            }
        }
    }
    row.iter_mut().for_each(|s| *s = *s / T::of_usize(nj * nk));
    var.iter_mut().for_each(|s| *s = *s / T::of_usize(ni * nk));
    ctx.iter_mut().for_each(|s| *s = *s / T::of_usize(ni * nj));
    let grand = total / T::of_usize(ni * nj * nk);
    let two = T::of(2.0);

    let mut slice = [vec![T::zero(); ni], vec![T::zero(); nj], vec![T::zero(); nk]];
    let mut sum = T::zero();
    for a in 0..ni {
        for b in 0..nj {
            for c in 0..nk {
                let r = at(a, b, c) - row[a] - var[b] - ctx[c] + two * grand;
                let r2 = r * r;
                slice[0][a] = slice[0][a] + r2;
                slice[1][b] = slice[1][b] + r2;
                slice[2][c] = slice[2][c] + r2;
                sum = sum + r2;
            }
        }
    }
    slice[0].iter_mut().for_each(|s| *s = *s / T::of_usize(nj * nk));
    slice[1].iter_mut().for_each(|s| *s = *s / T::of_usize(ni * nk));
    slice[2].iter_mut().for_each(|s| *s = *s / T::of_usize(ni * nj));
    Ok(MsrBreakdown {
        score: sum / T::of_usize(ni * nj * nk),
        slice_residues: slice,
    })
}

/// Mean squared residue against the additive model `mu + r_i + c_j + t_k`.
pub fn msr<T: Scalar>(d: &Dataset<T>, t: &Tricluster) -> Result<T> {
    Ok(msr_breakdown(d, t)?.score)
}

/// The three graphical views. Each names the profile axis followed by the two
/// axes flattened (row-major) into the x coordinate.
const VIEWS: [[usize; 3]; 3] = [[0, 1, 2], [0, 2, 1], [2, 0, 1]];

/// Profiles of one view: `profiles[p][x]`.
fn view_profiles<T: Scalar>(d: &Dataset<T>, t: &Tricluster, view: [usize; 3]) -> Vec<Vec<T>> {
    let [pa, oa, ia] = view;
    let mut out = Vec::with_capacity(t.axis(pa).len());
    for &p in t.axis(pa) {
        let mut profile = Vec::with_capacity(t.axis(oa).len() * t.axis(ia).len());
        for &o in t.axis(oa) {
            for &q in t.axis(ia) {
                let mut idx = [0usize; 3];
                idx[pa] = p;
                idx[oa] = o;
                idx[ia] = q;
                profile.push(d.get(idx[0], idx[1], idx[2]));
            }
        }
        out.push(profile);
    }
    out
}

fn check_views(t: &Tricluster) -> Result<()> {
    let [ni, nj, nk] = t.shape();
    if ni == 0 || nj == 0 || nk == 0 {
        return Err(Error::EmptyTricluster);
    }
    if nj * nk < 2 || ni * nj < 2 {
        return Err(Error::DegenerateProfile);
    }
    Ok(())
}

/// Least-squares slope with x = 0, 1, 2, ...
pub(crate) fn ls_slope<T: Scalar>(y: &[T]) -> T {
    let n = y.len();
    let x_mean = T::of((n - 1) as f64 / 2.0);
    let y_mean = y.iter().copied().sum::<T>() / T::of_usize(n);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (x, &v) in y.iter().enumerate() {
        let dx = T::of_usize(x) - x_mean;
        sxy = sxy + dx * (v - y_mean);
        sxx = sxx + dx * dx;
    }
    sxy / sxx
}

fn lsl_view<T: Scalar>(profiles: &[Vec<T>]) -> T {
    let mut angles: Vec<T> = profiles.iter().map(|p| ls_slope(p).atan()).collect();
    mean_abs_pairwise_diff(&mut angles) / T::pi()
}

fn msl_view<T: Scalar>(profiles: &[Vec<T>]) -> T {
    let segments = profiles[0].len() - 1;
    let mut angles = vec![T::zero(); profiles.len()];
    let mut total = T::zero();
    for s in 0..segments {
        for (a, p) in angles.iter_mut().zip(profiles) {
            *a = (p[s + 1] - p[s]).atan();
        }
        total = total + mean_abs_pairwise_diff(&mut angles);
    }
    total / T::of_usize(segments) / T::pi()
}

/// Least-squared-lines dissimilarity, averaged over the three views.
pub fn lsl<T: Scalar>(d: &Dataset<T>, t: &Tricluster) -> Result<T> {
    check_views(t)?;
    let total: T = VIEWS.iter().map(|&v| lsl_view(&view_profiles(d, t, v))).sum();
    Ok(total / T::of(3.0))
}

/// Multi-slope dissimilarity, averaged over the three views.
pub fn msl<T: Scalar>(d: &Dataset<T>, t: &Tricluster) -> Result<T> {
    check_views(t)?;
    let total: T = VIEWS.iter().map(|&v| msl_view(&view_profiles(d, t, v))).sum();
    Ok(total / T::of(3.0))
}

pub fn evaluate_pqc<T: Scalar>(measure: QualityMeasure, d: &Dataset<T>, t: &Tricluster) -> Result<T> {
    match measure {
        QualityMeasure::Msr => msr(d, t),
        QualityMeasure::Lsl => lsl(d, t),
        QualityMeasure::Msl => msl(d, t),
    }
}
