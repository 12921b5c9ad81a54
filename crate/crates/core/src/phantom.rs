//! Simulated complex vessel phantom: piecewise-constant magnitude over a
//! background square with vessel disks, flow-profile phase inside the vessels.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::image::ComplexImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowProfile {
    /// Phase peak_phase * (1 - (r/R)^2), zero at the vessel wall.
    Parabolic,
    /// Constant phase over the whole disk.
    Blunt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vessel {
    /// (row, col) center in pixels.
    pub center: [f64; 2],
    pub radius: f64,
    pub magnitude: f64,
    pub profile: FlowProfile,
    pub peak_phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub n_grid: usize,
    /// (row, col) center of the background square in pixels.
    pub background_center: [f64; 2],
    pub background_side: f64,
    pub background_magnitude: f64,
    pub vessels: Vec<Vessel>,
}

impl PhantomSpec {
    /// Two vessels on a centered background square: a parabolic-flow disk in
    /// the lower-left quadrant and a blunt-flow disk in the upper-right.
    pub fn default_for(n_grid: usize) -> Self {
        let n = n_grid as f64;
        PhantomSpec {
            n_grid,
            background_center: [n / 2.0, n / 2.0],
            background_side: n / 2.0,
            background_magnitude: 100.0,
            vessels: vec![
                Vessel {
                    center: [0.3 * n, 0.3 * n],
                    radius: n / 10.0,
                    magnitude: 200.0,
                    profile: FlowProfile::Parabolic,
                    peak_phase: 2.0,
                },
                Vessel {
                    center: [0.72 * n, 0.72 * n],
                    radius: n / 10.0,
                    magnitude: 200.0,
                    profile: FlowProfile::Blunt,
                    peak_phase: 1.0,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid == 0 {
            return Err(Error::InvalidArgument("n_grid must be >= 1".into()));
        }
        let n = self.n_grid as f64;
        if self.background_side <= 0.0 || self.background_magnitude < 0.0 {
            return Err(Error::InvalidArgument(
                "background side must be positive, magnitude nonnegative".into(),
            ));
        }
        let half = self.background_side / 2.0;
        for d in 0..2 {
            let c = self.background_center[d];
            if c - half < 0.0 || c + half > n {
                return Err(Error::InvalidArgument(
                    "background square extends outside the grid".into(),
                ));
            }
        }
        for v in &self.vessels {
            if v.radius <= 0.0 {
                return Err(Error::InvalidArgument(
                    "vessel radius must be positive".into(),
                ));
            }
            if v.magnitude < 0.0 {
                return Err(Error::InvalidArgument(
                    "vessel magnitude must be nonnegative".into(),
                ));
            }
            for d in 0..2 {
                if v.center[d] - v.radius < 0.0 || v.center[d] + v.radius > n {
                    return Err(Error::InvalidArgument(
                        "vessel disk extends outside the grid".into(),
                    ));
                }
            }
        }
        for (i, a) in self.vessels.iter().enumerate() {
            for b in self.vessels.iter().skip(i + 1) {
                let dr = a.center[0] - b.center[0];
                let dc = a.center[1] - b.center[1];
                if (dr * dr + dc * dc).sqrt() < a.radius + b.radius {
                    return Err(Error::InvalidArgument(
                        "overlapping vessels: magnitude override is ambiguous".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec::default_for(128)
    }
}

/// Named boolean mask over the image grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Roi {
    pub mask: Array2<bool>,
    pub name: String,
}

impl Roi {
    pub fn new(mask: Array2<bool>, name: impl Into<String>) -> Result<Self> {
        if !mask.iter().any(|&b| b) {
            return Err(Error::InvalidArgument("ROI mask is empty".into()));
        }
        Ok(Roi {
            mask,
            name: name.into(),
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

fn in_square(r: f64, c: f64, center: &[f64; 2], side: f64) -> bool {
    // Half-open on both axes so a side of s covers exactly s pixel rows.
    let half = side / 2.0;
    r >= center[0] - half && r < center[0] + half && c >= center[1] - half && c < center[1] + half
}

/// Builds the phantom image plus ROI1 (the background square) and ROI2 (the
/// blunt vessel disk eroded by 2 pixels).
pub fn make_phantom(spec: &PhantomSpec) -> Result<(ComplexImage, Roi, Roi)> {
    spec.validate()?;
    let n = spec.n_grid;
    let mut img = Array2::<Complex64>::zeros((n, n));
    let mut roi1 = Array2::from_elem((n, n), false);

    for r in 0..n {
        for c in 0..n {
            let (rf, cf) = (r as f64, c as f64);
            let mut magnitude = 0.0;
            let mut phase = 0.0;
            if in_square(rf, cf, &spec.background_center, spec.background_side) {
                magnitude = spec.background_magnitude;
                roi1[[r, c]] = true;
            }
            for v in &spec.vessels {
                let dr = rf - v.center[0];
                let dc = cf - v.center[1];
                let d2 = dr * dr + dc * dc;
                if d2 <= v.radius * v.radius {
                    magnitude = v.magnitude;
                    phase = match v.profile {
                        FlowProfile::Parabolic => v.peak_phase * (1.0 - d2 / (v.radius * v.radius)),
                        FlowProfile::Blunt => v.peak_phase,
                    };
                }
            }
            img[[r, c]] = Complex64::from_polar(magnitude, phase);
        }
    }

    let blunt = spec
        .vessels
        .iter()
        .find(|v| v.profile == FlowProfile::Blunt)
        .ok_or_else(|| {
            Error::InvalidArgument("phantom needs a blunt vessel to define ROI2".into())
        })?;
    let eroded = blunt.radius - 2.0;
    if eroded <= 0.0 {
        return Err(Error::InvalidArgument(
            "blunt vessel too small: eroding by 2 pixels empties ROI2".into(),
        ));
    }
    let roi2 = Array2::from_shape_fn((n, n), |(r, c)| {
        let dr = r as f64 - blunt.center[0];
        let dc = c as f64 - blunt.center[1];
        dr * dr + dc * dc <= eroded * eroded
    });

    Ok((
        ComplexImage::from_array(img)?,
        Roi::new(roi1, "ROI1")?,
        Roi::new(roi2, "ROI2")?,
    ))
}
