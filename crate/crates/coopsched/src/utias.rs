//! UTIAS multi-robot dataset files.
//!
//! A dataset directory holds, for robots `i = 1..N`,
//! `Robot{i}_Odometry.dat` (time, forward velocity, angular velocity),
//! `Robot{i}_Measurement.dat` (time, barcode, range, bearing) and
//! `Robot{i}_Groundtruth.dat` (time, x, y, heading), plus the team-wide
//! `Barcodes.dat` (subject, barcode) and `Landmark_Groundtruth.dat`
//! (subject, x, y, x std, y std). Columns are whitespace separated and
//! lines starting with `#` are comments. Subjects `1..=N` are the robots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use coopsched_core::sensing::wrap_pi;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("missing dataset file {0}")]
    Missing(PathBuf),
    #[error("no Robot1_Odometry.dat in {0}")]
    NoRobots(PathBuf),
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Window(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryRecord {
    pub time: f64,
    pub velocity: f64,
    pub angular_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub time: f64,
    pub barcode: u32,
    /// Resolved through the barcode table.
    pub subject: u32,
    pub range: f64,
    pub bearing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRecord {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkRecord {
    pub subject: u32,
    pub x: f64,
    pub y: f64,
    pub x_std: f64,
    pub y_std: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RobotSeries {
    pub odometry: Vec<OdometryRecord>,
    pub measurements: Vec<MeasurementRecord>,
    pub groundtruth: Vec<PoseRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetBundle {
    /// Robot `i` (0-based) is subject `i + 1`.
    pub robots: Vec<RobotSeries>,
    /// `(subject, barcode)` in file order.
    pub barcodes: Vec<(u32, u32)>,
    pub landmarks: Vec<LandmarkRecord>,
    /// Measurement lines whose barcode is not in the table.
    pub dropped_measurements: usize,
}

impl DatasetBundle {
    pub fn n_robots(&self) -> usize {
        self.robots.len()
    }

    /// 0-based robot index of `subject`, if it is a robot.
    pub fn robot_index(&self, subject: u32) -> Option<usize> {
        let i = (subject as usize).checked_sub(1)?;
        (i < self.robots.len()).then_some(i)
    }

    /// Earliest odometry or groundtruth timestamp.
    pub fn start_time(&self) -> Option<f64> {
        self.robots
            .iter()
            .flat_map(|r| r.odometry.first().map(|o| o.time).into_iter().chain(r.groundtruth.first().map(|g| g.time)))
            .reduce(f64::min)
    }

    /// Lines per file kind, summed over robots: odometry, measurements,
    /// groundtruth.
    pub fn counts(&self) -> (usize, usize, usize) {
        self.robots.iter().fold((0, 0, 0), |(o, m, g), r| {
            (o + r.odometry.len(), m + r.measurements.len(), g + r.groundtruth.len())
        })
    }
}

pub fn odometry_file(dir: &Path, robot: usize) -> PathBuf {
    dir.join(format!("Robot{}_Odometry.dat", robot + 1))
}

pub fn measurement_file(dir: &Path, robot: usize) -> PathBuf {
    dir.join(format!("Robot{}_Measurement.dat", robot + 1))
}

pub fn groundtruth_file(dir: &Path, robot: usize) -> PathBuf {
    dir.join(format!("Robot{}_Groundtruth.dat", robot + 1))
}

pub const BARCODES_FILE: &str = "Barcodes.dat";
pub const LANDMARKS_FILE: &str = "Landmark_Groundtruth.dat";

struct Table {
    path: PathBuf,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn read(path: PathBuf, columns: usize) -> Result<Self, DatasetError> {
        if !path.is_file() {
            return Err(DatasetError::Missing(path));
        }
        let text = fs::read_to_string(&path).map_err(|source| DatasetError::Io { path: path.clone(), source })?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let cells: Vec<String> = t.split_whitespace().map(str::to_owned).collect();
            if cells.len() < columns {
                return Err(DatasetError::Malformed {
                    path,
                    line: i + 1,
                    message: format!("expected {columns} columns, found {}", cells.len()),
                });
            }
            rows.push((i + 1, cells));
        }
        Ok(Self { path, rows })
    }

    fn bad(&self, line: usize, message: String) -> DatasetError {
        DatasetError::Malformed { path: self.path.clone(), line, message }
    }

    fn parse<T: std::str::FromStr>(&self, line: usize, cell: &str) -> Result<T, DatasetError> {
        cell.parse().map_err(|_| self.bad(line, format!("cannot parse `{cell}`")))
    }

    fn float(&self, line: usize, cell: &str) -> Result<f64, DatasetError> {
        let v: f64 = self.parse(line, cell)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.bad(line, format!("non-finite value `{cell}`")))
        }
    }

    /// Parse every row with `f`, requiring non-decreasing first columns.
    fn timed<T>(
        &self,
        mut f: impl FnMut(&Self, usize, &[String]) -> Result<Option<T>, DatasetError>,
    ) -> Result<Vec<T>, DatasetError> {
        let mut out = Vec::with_capacity(self.rows.len());
        let mut last = f64::NEG_INFINITY;
        for (line, cells) in &self.rows {
            let t = self.float(*line, &cells[0])?;
            if t < last {
                return Err(self.bad(*line, format!("timestamp {t} is earlier than {last}")));
            }
            last = t;
            if let Some(rec) = f(self, *line, cells)? {
                out.push(rec);
            }
        }
        Ok(out)
    }
}

/// Read a dataset directory.
pub fn load_dataset(dir: &Path) -> Result<DatasetBundle, DatasetError> {
    if !odometry_file(dir, 0).is_file() {
        return Err(DatasetError::NoRobots(dir.to_path_buf()));
    }
    let barcode_table = Table::read(dir.join(BARCODES_FILE), 2)?;
    let mut barcodes = Vec::new();
    for (line, c) in &barcode_table.rows {
        barcodes.push((barcode_table.parse(*line, &c[0])?, barcode_table.parse(*line, &c[1])?));
    }
    let subject_of: BTreeMap<u32, u32> = barcodes.iter().map(|&(s, b)| (b, s)).collect();

    let lm = Table::read(dir.join(LANDMARKS_FILE), 5)?;
    let mut landmarks = Vec::new();
    for (line, c) in &lm.rows {
        landmarks.push(LandmarkRecord {
            subject: lm.parse(*line, &c[0])?,
            x: lm.float(*line, &c[1])?,
            y: lm.float(*line, &c[2])?,
            x_std: lm.float(*line, &c[3])?,
            y_std: lm.float(*line, &c[4])?,
        });
    }

    let mut robots = Vec::new();
    let mut dropped = 0;
    while odometry_file(dir, robots.len()).is_file() {
        let i = robots.len();
        let odometry = Table::read(odometry_file(dir, i), 3)?.timed(|t, line, c| {
            Ok(Some(OdometryRecord {
                time: t.float(line, &c[0])?,
                velocity: t.float(line, &c[1])?,
                angular_velocity: t.float(line, &c[2])?,
            }))
        })?;
        let measurements = Table::read(measurement_file(dir, i), 4)?.timed(|t, line, c| {
            let barcode: u32 = t.parse(line, &c[1])?;
            let rec = MeasurementRecord {
                time: t.float(line, &c[0])?,
                barcode,
                subject: 0,
                range: t.float(line, &c[2])?,
                bearing: t.float(line, &c[3])?,
            };
            match subject_of.get(&barcode) {
                Some(&subject) => Ok(Some(MeasurementRecord { subject, ..rec })),
                None => {
                    dropped += 1;
                    Ok(None)
                }
            }
        })?;
        let groundtruth = Table::read(groundtruth_file(dir, i), 4)?.timed(|t, line, c| {
            Ok(Some(PoseRecord {
                time: t.float(line, &c[0])?,
                x: t.float(line, &c[1])?,
                y: t.float(line, &c[2])?,
                heading: t.float(line, &c[3])?,
            }))
        })?;
        robots.push(RobotSeries { odometry, measurements, groundtruth });
    }
    Ok(DatasetBundle { robots, barcodes, landmarks, dropped_measurements: dropped })
}

/// Write `bundle` in the layout [`load_dataset`] reads.
pub fn write_dataset(bundle: &DatasetBundle, dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|source| DatasetError::Io { path: dir.to_path_buf(), source })?;
    let put = |path: PathBuf, text: String| {
        fs::write(&path, text).map_err(|source| DatasetError::Io { path, source })
    };
    let mut s = String::from("# Subject #    Barcode #\n");
    for (subject, barcode) in &bundle.barcodes {
        let _ = writeln!(s, "{subject}\t{barcode}");
    }
    put(dir.join(BARCODES_FILE), s)?;
    let mut s = String::from("# Subject #    x [m]    y [m]    x std-dev [m]    y std-dev [m]\n");
    for l in &bundle.landmarks {
        let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", l.subject, l.x, l.y, l.x_std, l.y_std);
    }
    put(dir.join(LANDMARKS_FILE), s)?;
    for (i, r) in bundle.robots.iter().enumerate() {
        let mut s = String::from("# Time [s]    Forward Velocity [m/s]    Angular Velocity [rad/s]\n");
        for o in &r.odometry {
            let _ = writeln!(s, "{}\t{}\t{}", o.time, o.velocity, o.angular_velocity);
        }
        put(odometry_file(dir, i), s)?;
        let mut s = String::from("# Time [s]    Subject #    range [m]    bearing [rad]\n");
        for m in &r.measurements {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", m.time, m.barcode, m.range, m.bearing);
        }
        put(measurement_file(dir, i), s)?;
        let mut s = String::from("# Time [s]    x [m]    y [m]    orientation [rad]\n");
        for g in &r.groundtruth {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", g.time, g.x, g.y, g.heading);
        }
        put(groundtruth_file(dir, i), s)?;
    }
    Ok(())
}

/// A robot-to-robot measurement assigned to a grid tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeasurement {
    pub observer: usize,
    pub target: usize,
    pub range: f64,
    pub bearing: f64,
    /// Measurement time minus tick time (s).
    pub offset: f64,
}

/// A dataset window on a fixed time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayGrid {
    pub dt: f64,
    /// Absolute time of tick 0.
    pub start_time: f64,
    /// `[tick][robot]`, interpolated.
    pub truth: Vec<Vec<PoseRecord>>,
    /// `[tick][robot]` forward velocity, held from the last reading.
    pub velocity: Vec<Vec<f64>>,
    /// Per tick, sorted by (observer, target).
    pub measurements: Vec<Vec<GridMeasurement>>,
    /// Robot-to-robot readings inside the window before gridding.
    pub raw_measurements: usize,
}

impl ReplayGrid {
    pub fn ticks(&self) -> usize {
        self.truth.len()
    }

    pub fn n_robots(&self) -> usize {
        self.truth.first().map_or(0, Vec::len)
    }

    pub fn gridded_measurements(&self) -> usize {
        self.measurements.iter().map(Vec::len).sum()
    }
}

fn interpolate(series: &[PoseRecord], cursor: &mut usize, t: f64) -> PoseRecord {
    while *cursor + 1 < series.len() && series[*cursor + 1].time <= t {
        *cursor += 1;
    }
    let a = series[*cursor];
    let Some(b) = series.get(*cursor + 1) else {
        return PoseRecord { time: t, ..a };
    };
    let span = b.time - a.time;
    let w = if span > 0.0 { ((t - a.time) / span).clamp(0.0, 1.0) } else { 0.0 };
    PoseRecord {
        time: t,
        x: a.x + w * (b.x - a.x),
        y: a.y + w * (b.y - a.y),
        heading: wrap_pi(a.heading + w * wrap_pi(b.heading - a.heading)),
    }
}

/// Put `duration` seconds starting `t0` seconds after the dataset start onto
/// a grid of `round(duration / dt)` samples spaced `dt` apart, the first at
/// `t0`.
///
/// Odometry is held from the latest reading at or before each tick (zero
/// before the first). A measurement goes to the nearest tick if it lies
/// within `dt / 2` of it; of several `a -> b` readings for one tick the one
/// nearest in time is kept. Measurements of landmarks are left out.
pub fn resample_to_grid(bundle: &DatasetBundle, t0: f64, duration: f64, dt: f64) -> Result<ReplayGrid, DatasetError> {
    if !(dt > 0.0 && duration > 0.0 && t0 >= 0.0) {
        return Err(DatasetError::Window(format!(
            "need t0 >= 0, duration > 0 and dt > 0 (got {t0}, {duration}, {dt})"
        )));
    }
    let origin = bundle.start_time().ok_or_else(|| DatasetError::Window("dataset has no timestamps".into()))?;
    let start = origin + t0;
    let ticks = (duration / dt).round() as usize;
    let tick_time = |k: usize| start + k as f64 * dt;
    let end = tick_time(ticks - 1);
    for (i, r) in bundle.robots.iter().enumerate() {
        let (Some(first), Some(last)) = (r.groundtruth.first(), r.groundtruth.last()) else {
            return Err(DatasetError::Window(format!("robot {} has no groundtruth", i + 1)));
        };
        if first.time > start + 1e-9 || last.time < end - 1e-9 {
            return Err(DatasetError::Window(format!(
                "window [{:.3}, {:.3}] s is outside robot {}'s groundtruth [{:.3}, {:.3}] s",
                t0,
                end - origin,
                i + 1,
                first.time - origin,
                last.time - origin
            )));
        }
    }

    let n = bundle.n_robots();
    let mut truth = vec![Vec::with_capacity(n); ticks];
    let mut velocity = vec![vec![0.0; n]; ticks];
    for (i, r) in bundle.robots.iter().enumerate() {
        let mut gt = 0;
        let mut od = 0usize;
        for k in 0..ticks {
            let t = tick_time(k);
            truth[k].push(interpolate(&r.groundtruth, &mut gt, t));
            while od < r.odometry.len() && r.odometry[od].time <= t + 1e-9 {
                od += 1;
            }
            if od > 0 {
                velocity[k][i] = r.odometry[od - 1].velocity;
            }
        }
    }

    let mut raw = 0;
    let mut kept: BTreeMap<(usize, usize, usize), GridMeasurement> = BTreeMap::new();
    for (a, r) in bundle.robots.iter().enumerate() {
        for m in &r.measurements {
            let Some(b) = bundle.robot_index(m.subject).filter(|&b| b != a) else {
                continue;
            };
            if m.time < start - dt / 2.0 || m.time > end + dt / 2.0 {
                continue;
            }
            raw += 1;
            let k = ((m.time - start) / dt).round();
            if k < 0.0 || k as usize >= ticks {
                continue;
            }
            let k = k as usize;
            let offset = m.time - tick_time(k);
            if offset.abs() > dt / 2.0 + 1e-9 {
                continue;
            }
            let g = GridMeasurement { observer: a, target: b, range: m.range, bearing: m.bearing, offset };
            kept.entry((k, a, b))
                .and_modify(|old| {
                    if offset.abs() < old.offset.abs() {
                        *old = g;
                    }
                })
                .or_insert(g);
        }
    }
    let mut measurements = vec![Vec::new(); ticks];
    for ((k, _, _), g) in kept {
        measurements[k].push(g);
    }
    Ok(ReplayGrid { dt, start_time: start, truth, velocity, measurements, raw_measurements: raw })
}

/// Shape of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub robots: usize,
    /// Seconds of data.
    pub duration: f64,
    pub seed: u64,
    pub odometry_period: f64,
    pub groundtruth_period: f64,
    /// Each robot scans for teammates this often.
    pub scan_period: f64,
    /// Chance that a teammate is detected in a scan.
    pub detection_probability: f64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            robots: 5,
            duration: 320.0,
            seed: 7,
            odometry_period: 0.05,
            groundtruth_period: 0.05,
            scan_period: 0.2,
            detection_probability: 0.7,
        }
    }
}

/// Absolute time of the first fixture sample.
pub const FIXTURE_EPOCH: f64 = 1_248_272_272.0;

const ROBOT_BARCODES: [u32; 5] = [5, 14, 41, 32, 23];
const LANDMARK_BARCODES: [u32; 3] = [72, 27, 54];

/// A dataset of robots driving circles in a 6 m arena, with noisy
/// odometry, teammate scans, a few landmark sightings and one reading of
/// an unknown barcode.
pub fn synthetic_bundle(spec: &FixtureSpec) -> DatasetBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.robots;
    let mut barcodes: Vec<(u32, u32)> = (0..n)
        .map(|i| (i as u32 + 1, ROBOT_BARCODES.get(i).copied().unwrap_or(100 + i as u32)))
        .collect();
    let mut landmarks = Vec::new();
    for (k, &b) in LANDMARK_BARCODES.iter().enumerate() {
        let subject = (n + k + 1) as u32;
        barcodes.push((subject, b));
        landmarks.push(LandmarkRecord { subject, x: 1.0 + 2.0 * k as f64, y: 5.5, x_std: 0.001, y_std: 0.001 });
    }

    // circle centre, radius, speed and phase per robot
    let tracks: Vec<(f64, f64, f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                2.0 + 2.0 * rng.random::<f64>(),
                2.0 + 2.0 * rng.random::<f64>(),
                1.0 + rng.random::<f64>(),
                0.1 + 0.1 * rng.random::<f64>(),
                rng.random::<f64>() * std::f64::consts::TAU,
            )
        })
        .collect();
    let pose = |i: usize, t: f64| {
        let (cx, cy, r, v, phase) = tracks[i];
        let a = phase + v / r * t;
        (cx + r * a.cos(), cy + r * a.sin(), wrap_pi(a + std::f64::consts::FRAC_PI_2))
    };
    let samples = |period: f64| (0..=(spec.duration / period).floor() as usize).map(move |k| k as f64 * period);

    let mut robots = Vec::with_capacity(n);
    for (i, &(_, _, r, v, _)) in tracks.iter().enumerate() {
        let odometry = samples(spec.odometry_period)
            .map(|t| OdometryRecord {
                time: FIXTURE_EPOCH + t,
                velocity: v + 0.1 * v * rng.sample::<f64, _>(StandardNormal),
                angular_velocity: v / r + 0.05 * rng.sample::<f64, _>(StandardNormal),
            })
            .collect();
        let groundtruth = samples(spec.groundtruth_period)
            .map(|t| {
                let (x, y, h) = pose(i, t);
                PoseRecord { time: FIXTURE_EPOCH + t, x, y, heading: h }
            })
            .collect();
        let mut measurements = Vec::new();
        let offset = spec.scan_period * i as f64 / n as f64;
        let mut t = offset;
        while t <= spec.duration {
            let (xa, ya, ha) = pose(i, t);
            let mut sight = |subject: u32, barcode: u32, x: f64, y: f64, rng: &mut ChaCha8Rng| {
                let (dx, dy) = (x - xa, y - ya);
                measurements.push(MeasurementRecord {
                    time: FIXTURE_EPOCH + t,
                    barcode,
                    subject,
                    range: (dx * dx + dy * dy).sqrt() + 0.05 * rng.sample::<f64, _>(StandardNormal),
                    bearing: wrap_pi(dy.atan2(dx) - ha + 0.02 * rng.sample::<f64, _>(StandardNormal)),
                });
            };
            for j in (0..n).filter(|&j| j != i) {
                if rng.random::<f64>() < spec.detection_probability {
                    let (x, y, _) = pose(j, t);
                    sight(j as u32 + 1, barcodes[j].1, x, y, &mut rng);
                }
            }
            if rng.random::<f64>() < 0.05 {
                let l = landmarks[rng.random_range(0..landmarks.len())];
                let b = barcodes.iter().find(|(s, _)| *s == l.subject).expect("landmark barcode").1;
                sight(l.subject, b, l.x, l.y, &mut rng);
            }
            t += spec.scan_period;
        }
        robots.push(RobotSeries { odometry, measurements, groundtruth });
    }
    DatasetBundle { robots, barcodes, landmarks, dropped_measurements: 0 }
}

/// Write a synthetic dataset to `dir`. The first robot's measurement file
/// gets one extra line with an unknown barcode.
pub fn write_fixture(dir: &Path, spec: &FixtureSpec) -> Result<DatasetBundle, DatasetError> {
    let bundle = synthetic_bundle(spec);
    write_dataset(&bundle, dir)?;
    let path = measurement_file(dir, 0);
    let mut text = fs::read_to_string(&path).map_err(|source| DatasetError::Io { path: path.clone(), source })?;
    let t = bundle.robots[0].measurements.last().map_or(FIXTURE_EPOCH, |m| m.time);
    let _ = writeln!(text, "{t}\t99\t2.5\t0.3");
    fs::write(&path, text).map_err(|source| DatasetError::Io { path, source })?;
    Ok(bundle)
}
