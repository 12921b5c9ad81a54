//! k-space sampling trajectories: interleaved spirals, Cartesian grids, CSV persistence.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered list of L normalized 2-D k-space sample locations.
///
/// Coordinates are dimensionless spatial frequencies; valid trajectories keep
/// every component inside [-0.5, +0.5].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<[f64; 2]>,
}

impl Trajectory {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "trajectory must contain at least one point".into(),
            ));
        }
        Ok(Trajectory { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points as [kx, ky] pairs.
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Checks that every component is finite and inside [-0.5, +0.5],
    /// reporting the first offending index.
    pub fn validate(&self) -> Result<()> {
        for (index, p) in self.points.iter().enumerate() {
            let ok = p.iter().all(|c| c.is_finite() && (-0.5..=0.5).contains(c));
            if !ok {
                return Err(Error::InvalidTrajectoryPoint {
                    index,
                    kx: p[0],
                    ky: p[1],
                });
            }
        }
        Ok(())
    }
}

/// Turns per arm that space adjacent revolutions of an A-arm spiral at the
/// Nyquist distance 1/N.
pub fn default_turns(n_grid: usize, arms: usize) -> f64 {
    n_grid as f64 / (2.0 * arms as f64)
}

/// Interleaved Archimedean spiral: `arms` arms of `samples_per_arm` points,
/// each arm making `turns` revolutions with radius growing linearly from 0 to
/// 0.5. Arm a is arm 0 rotated by 2*pi*a/arms; arms are concatenated in order.
pub fn generate_spiral(arms: usize, samples_per_arm: usize, turns: f64) -> Result<Trajectory> {
    if arms < 1 {
        return Err(Error::InvalidArgument("arms must be >= 1".into()));
    }
    if samples_per_arm < 2 {
        return Err(Error::InvalidArgument(
            "samples_per_arm must be >= 2".into(),
        ));
    }
    if !turns.is_finite() || turns <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "turns must be positive and finite, got {turns}"
        )));
    }
    let mut points = Vec::with_capacity(arms * samples_per_arm);
    for a in 0..arms {
        let arm_phase = 2.0 * PI * a as f64 / arms as f64;
        for j in 0..samples_per_arm {
            let tau = j as f64 / (samples_per_arm - 1) as f64;
            let r = 0.5 * tau;
            let theta = 2.0 * PI * turns * tau + arm_phase;
            points.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    Trajectory::new(points)
}

/// Complete Cartesian trajectory: N^2 points at k = ((m - N/2)/N, (n - N/2)/N),
/// ky-major order.
pub fn generate_cartesian(n_grid: usize) -> Result<Trajectory> {
    if n_grid == 0 {
        return Err(Error::InvalidArgument("n_grid must be >= 1".into()));
    }
    let n = n_grid as f64;
    let half = n / 2.0;
    let mut points = Vec::with_capacity(n_grid * n_grid);
    for iy in 0..n_grid {
        let ky = (iy as f64 - half) / n;
        for ix in 0..n_grid {
            let kx = (ix as f64 - half) / n;
            points.push([kx, ky]);
        }
    }
    Trajectory::new(points)
}

/// Writes a trajectory as CSV: header `kx,ky`, one point per line, 17
/// significant digits, LF line endings.
pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut out = String::with_capacity(traj.len() * 50 + 8);
    out.push_str("kx,ky\n");
    for p in traj.points() {
        out.push_str(&format!("{:.16e},{:.16e}\n", p[0], p[1]));
    }
    w.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trajectory CSV written by [`save_trajectory`]. Malformed rows are
/// reported with their 1-based line number; the coordinate range is checked so
/// the loaded trajectory satisfies the type invariants.
pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io(path, e))?,
        None => {
            return Err(Error::BadFormat {
                path: path.into(),
                msg: "empty file".into(),
            })
        }
    };
    if header.trim() != "kx,ky" {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: format!("expected header 'kx,ky', got '{}'", header.trim()),
        });
    }

    let mut points = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = idx + 1; // 1-based
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::MalformedRow {
                path: path.into(),
                line: row,
                msg: format!("expected 2 columns, got {}", fields.len()),
            });
        }
        let mut coords = [0.0f64; 2];
        for (c, field) in coords.iter_mut().zip(fields.iter()) {
            *c = field
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedRow {
                    path: path.into(),
                    line: row,
                    msg: format!("'{}': {e}", field.trim()),
                })?;
        }
        points.push(coords);
    }
    if points.is_empty() {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: "no points (L >= 1 required)".into(),
        });
    }
    let traj = Trajectory::new(points)?;
    traj.validate()?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spiral_two_sample_single_arm() {
        let t = generate_spiral(1, 2, 1.0).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.points()[0][0].abs() < 1e-12 && t.points()[0][1].abs() < 1e-12);
        assert!((t.points()[1][0] - 0.5).abs() < 1e-12);
        assert!(t.points()[1][1].abs() < 1e-12);
    }

    #[test]
    fn spiral_paper_geometry() {
        let t = generate_spiral(6, 512, default_turns(128, 6)).unwrap();
        assert_eq!(t.len(), 6 * 512);
        for p in t.points() {
            assert!((p[0] * p[0] + p[1] * p[1]).sqrt() <= 0.5 + 1e-12);
        }
        t.validate().unwrap();
    }

    #[test]
    fn spiral_half_turn_endpoint() {
        let t = generate_spiral(4, 3, 0.5).unwrap();
        // arm 0, j = 2: tau = 1, r = 0.5, theta = pi
        let p = t.points()[2];
        assert!((p[0] + 0.5).abs() < 1e-12);
        assert!(p[1].abs() < 1e-12);
    }

    #[test]
    fn spiral_rejects_bad_args() {
        assert!(generate_spiral(0, 8, 1.0).is_err());
        assert!(generate_spiral(1, 1, 1.0).is_err());
        assert!(generate_spiral(1, 8, 0.0).is_err());
    }

    #[test]
    fn validate_reports_first_offender() {
        let t = Trajectory::new(vec![[0.0, 0.0], [0.51, 0.0], [0.6, 0.0]]).unwrap();
        match t.validate() {
            Err(Error::InvalidTrajectoryPoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected invalid point, got {other:?}"),
        }
        let t = Trajectory::new(vec![[f64::NAN, 0.0]]).unwrap();
        match t.validate() {
            Err(Error::InvalidTrajectoryPoint { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected invalid point, got {other:?}"),
        }
        let t = Trajectory::new(vec![[0.5, -0.5], [0.0, 0.3]]).unwrap();
        t.validate().unwrap();
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let t = generate_spiral(6, 512, 32.0).unwrap();
        save_trajectory(&t, &path).unwrap();
        let back = load_trajectory(&path).unwrap();
        assert_eq!(back.len(), t.len());
        let max_dev = t
            .points()
            .iter()
            .zip(back.points())
            .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-12, "round trip deviation {max_dev}");
    }

    #[test]
    fn csv_rejects_three_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "kx,ky\n0.1,0.2,0.3\n").unwrap();
        match load_trajectory(&path) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed row, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(load_trajectory(&path).is_err());
        std::fs::write(&path, "kx,ky\n").unwrap();
        assert!(load_trajectory(&path).is_err());
    }

    proptest! {
        #[test]
        fn spiral_always_valid(arms in 1usize..12, samples in 2usize..64, turns in 0.1f64..40.0) {
            let t = generate_spiral(arms, samples, turns).unwrap();
            prop_assert_eq!(t.len(), arms * samples);
            prop_assert!(t.validate().is_ok());
        }

        #[test]
        fn spiral_arms_are_rotations(arms in 2usize..9, samples in 2usize..32, turns in 0.2f64..20.0) {
            let t = generate_spiral(arms, samples, turns).unwrap();
            let pts = t.points();
            for a in 1..arms {
                let phi = 2.0 * PI * a as f64 / arms as f64;
                let (c, s) = (phi.cos(), phi.sin());
                for j in 0..samples {
                    let p0 = pts[j];
                    let rotated = [p0[0] * c - p0[1] * s, p0[0] * s + p0[1] * c];
                    let pa = pts[a * samples + j];
                    prop_assert!((rotated[0] - pa[0]).abs() < 1e-12);
                    prop_assert!((rotated[1] - pa[1]).abs() < 1e-12);
                }
            }
        }
    }
}
