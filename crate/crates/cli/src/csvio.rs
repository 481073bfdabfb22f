//! CSV formats: estimate logs, replay bundles and ground truth.
//!
//! Every float is written with 17 significant digits so that parsing an
//! emitted file gives back the same bits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use hybrid_ins::landmarks::LandmarkSet;
use hybrid_ins::liegroup::{Mat3, Rot3, Vec3, SE23};
use hybrid_ins::observers::ImuReading;
use hybrid_ins::simkit::{ErrorNorms, Frame, ImuSample, LogRecord, MeasurementStream, TruthSample};
use nalgebra::{Quaternion, Rotation3, UnitQuaternion};

use crate::error::CliError;

pub const ESTIMATE_HEADER: &[&str] = &[
    "t", "j", "qw", "qx", "qy", "qz", "px", "py", "pz", "vx", "vy", "vz", "bwx", "bwy", "bwz", "bax", "bay", "baz",
    "mu_q", "jump_flag",
];
pub const ERROR_HEADER: &[&str] = &["err_rot", "err_pos", "err_vel", "err_bw", "err_ba"];
pub const IMU_HEADER: &[&str] = &["t", "wx", "wy", "wz", "ax", "ay", "az"];
pub const LANDMARKS_HEADER: &[&str] = &["id", "px", "py", "pz", "weight"];
pub const OBS_HEADER: &[&str] = &["t", "id", "yx", "yy", "yz"];
pub const TRUTH_HEADER: &[&str] = &[
    "t", "qw", "qx", "qy", "qz", "px", "py", "pz", "vx", "vy", "vz", "bwx", "bwy", "bwz", "bax", "bay", "baz",
];

pub const IMU_FILE: &str = "imu.csv";
pub const LANDMARKS_FILE: &str = "landmarks_world.csv";
pub const OBS_FILE: &str = "landmark_obs.csv";
pub const TRUTH_FILE: &str = "truth.csv";

/// Shortest exact text for a float: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Unit quaternion `[w, x, y, z]` with `w ≥ 0`.
pub fn quat_from_rot(r: &Rot3) -> [f64; 4] {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r.matrix()));
    let s = if q.w < 0.0 { -1.0 } else { 1.0 };
    [s * q.w, s * q.i, s * q.j, s * q.k]
}

pub fn rot_from_quat(q: [f64; 4]) -> Result<Rot3, String> {
    let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n.is_finite() && (n - 1.0).abs() < 1e-6) {
        return Err(format!("quaternion norm {n} is not 1"));
    }
    let uq = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
    let m: Mat3 = *uq.to_rotation_matrix().matrix();
    Ok(Rot3::from_matrix_unchecked(m))
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        out.push_str(&f);
        first = false;
    }
    out.push('\n');
}

fn v3s(v: &Vec3) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| fmt_f64(*x))
}

/// One EstimateLog row.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub t: f64,
    pub j: usize,
    pub q: [f64; 4],
    pub p: [f64; 3],
    pub v: [f64; 3],
    pub b_omega: [f64; 3],
    pub b_accel: [f64; 3],
    pub mu_q: f64,
    pub jump_flag: bool,
    pub errors: Option<[f64; 5]>,
}

impl EstimateRow {
    pub fn from_record(rec: &LogRecord) -> Self {
        let s = &rec.state;
        EstimateRow {
            t: s.t,
            j: s.j,
            q: quat_from_rot(&s.x.r),
            p: s.x.p.into(),
            v: s.x.v.into(),
            b_omega: s.b_omega.into(),
            b_accel: s.b_accel.into(),
            mu_q: rec.mu_q,
            jump_flag: rec.jump_flag,
            errors: rec.errors().map(|e: ErrorNorms| e.as_array()),
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![fmt_f64(self.t), self.j.to_string()];
        for group in [&self.q[..], &self.p, &self.v, &self.b_omega, &self.b_accel] {
            f.extend(group.iter().map(|x| fmt_f64(*x)));
        }
        f.push(fmt_f64(self.mu_q));
        f.push(u8::from(self.jump_flag).to_string());
        f
    }
}

/// Renders rows as an EstimateLog. Error columns appear when any row
/// carries them; rows without ground truth then get `NaN` errors.
pub fn emit_estimates(rows: &[EstimateRow]) -> String {
    let with_err = rows.iter().any(|r| r.errors.is_some());
    let mut out = String::new();
    let mut header: Vec<&str> = ESTIMATE_HEADER.to_vec();
    if with_err {
        header.extend(ERROR_HEADER);
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        let mut f = r.fields();
        if with_err {
            f.extend(r.errors.unwrap_or([f64::NAN; 5]).iter().map(|x| fmt_f64(*x)));
        }
        push_row(&mut out, f);
    }
    out
}

struct Table {
    name: String,
    rows: Vec<(usize, csv::StringRecord)>,
}

fn read_table(name: &str, text: &str, header: &[&str], optional: &[&str]) -> Result<(Table, bool), CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let got = rdr.headers().map_err(|e| CliError::Input(format!("{name}: {e}")))?.clone();
    let got: Vec<&str> = got.iter().collect();
    let with_optional = if got == header {
        false
    } else if !optional.is_empty() && got.len() == header.len() + optional.len() && got[..header.len()] == *header
        && got[header.len()..] == *optional
    {
        true
    } else {
        return Err(CliError::Input(format!("{name}: header `{}` should be `{}`", got.join(","), header.join(","))));
    };
    let width = got.len();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{name}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(CliError::Input(format!("{name} line {line}: expected {width} fields, found {}", rec.len())));
        }
        rows.push((line, rec));
    }
    Ok((Table { name: name.to_string(), rows }, with_optional))
}

impl Table {
    fn f64(&self, line: usize, rec: &csv::StringRecord, i: usize) -> Result<f64, CliError> {
        let s = &rec[i];
        s.parse::<f64>().map_err(|_| CliError::Input(format!("{} line {line}: `{s}` is not a number", self.name)))
    }

    fn finite(&self, line: usize, rec: &csv::StringRecord, i: usize) -> Result<f64, CliError> {
        let x = self.f64(line, rec, i)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(CliError::Input(format!("{} line {line}: value `{}` is not finite", self.name, &rec[i])))
        }
    }

    fn uint(&self, line: usize, rec: &csv::StringRecord, i: usize) -> Result<u64, CliError> {
        let s = &rec[i];
        s.parse::<u64>()
            .map_err(|_| CliError::Input(format!("{} line {line}: `{s}` is not a non-negative integer", self.name)))
    }

    fn vec3(&self, line: usize, rec: &csv::StringRecord, i: usize) -> Result<Vec3, CliError> {
        Ok(Vec3::new(self.finite(line, rec, i)?, self.finite(line, rec, i + 1)?, self.finite(line, rec, i + 2)?))
    }

    fn err(&self, line: usize, msg: impl std::fmt::Display) -> CliError {
        CliError::Input(format!("{} line {line}: {msg}", self.name))
    }
}

pub fn parse_estimates(text: &str) -> Result<Vec<EstimateRow>, CliError> {
    let (tab, with_err) = read_table("estimates", text, ESTIMATE_HEADER, ERROR_HEADER)?;
    let mut out = Vec::with_capacity(tab.rows.len());
    for (line, rec) in &tab.rows {
        let l = *line;
        let g = |i: usize| tab.f64(l, rec, i);
        let flag = match &rec[19] {
            "0" => false,
            "1" => true,
            other => return Err(tab.err(l, format!("jump_flag `{other}` must be 0 or 1"))),
        };
        let errors = if with_err { Some([g(20)?, g(21)?, g(22)?, g(23)?, g(24)?]) } else { None };
        out.push(EstimateRow {
            t: g(0)?,
            j: tab.uint(l, rec, 1)? as usize,
            q: [g(2)?, g(3)?, g(4)?, g(5)?],
            p: [g(6)?, g(7)?, g(8)?],
            v: [g(9)?, g(10)?, g(11)?],
            b_omega: [g(12)?, g(13)?, g(14)?],
            b_accel: [g(15)?, g(16)?, g(17)?],
            mu_q: g(18)?,
            jump_flag: flag,
            errors,
        });
    }
    Ok(out)
}

pub fn emit_truth(truth: &[TruthSample]) -> String {
    let mut out = TRUTH_HEADER.join(",") + "\n";
    for s in truth {
        let q = quat_from_rot(&s.x.r);
        let mut f = vec![fmt_f64(s.t)];
        f.extend(q.iter().map(|x| fmt_f64(*x)));
        f.extend(v3s(&s.x.p).chain(v3s(&s.x.v)).chain(v3s(&s.b_omega)).chain(v3s(&s.b_accel)));
        push_row(&mut out, f);
    }
    out
}

pub fn parse_truth(text: &str) -> Result<Vec<TruthSample>, CliError> {
    let (tab, _) = read_table(TRUTH_FILE, text, TRUTH_HEADER, &[])?;
    let mut out: Vec<TruthSample> = Vec::with_capacity(tab.rows.len());
    for (line, rec) in &tab.rows {
        let l = *line;
        let t = tab.finite(l, rec, 0)?;
        if out.last().is_some_and(|prev| !(t > prev.t)) {
            return Err(tab.err(l, "timestamps must be strictly increasing"));
        }
        let q = [tab.finite(l, rec, 1)?, tab.finite(l, rec, 2)?, tab.finite(l, rec, 3)?, tab.finite(l, rec, 4)?];
        let r = rot_from_quat(q).map_err(|e| tab.err(l, e))?;
        let p = tab.vec3(l, rec, 5)?;
        let v = tab.vec3(l, rec, 8)?;
        out.push(TruthSample { t, x: SE23::new(r, v, p), b_omega: tab.vec3(l, rec, 11)?, b_accel: tab.vec3(l, rec, 14)? });
    }
    Ok(out)
}

/// Landmark frames with fewer distinct ids than this are skipped.
pub const MIN_FRAME_LANDMARKS: usize = 3;

/// Parsed replay bundle.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub stream: MeasurementStream,
    /// `None` when `landmarks_world.csv` lists no landmarks.
    pub landmarks: Option<LandmarkSet>,
    /// File ids in landmark-set order.
    pub ids: Vec<u64>,
    pub truth: Option<Vec<TruthSample>>,
    pub warnings: Vec<String>,
}

/// Renders the files of a replay bundle as `(file name, contents)`.
/// Landmark `i` gets id `i`.
pub fn emit_bundle(
    stream: &MeasurementStream,
    landmarks: &LandmarkSet,
    truth: Option<&[TruthSample]>,
) -> Vec<(&'static str, String)> {
    let mut imu = IMU_HEADER.join(",") + "\n";
    for s in &stream.imu {
        push_row(&mut imu, std::iter::once(fmt_f64(s.t)).chain(v3s(&s.reading.omega)).chain(v3s(&s.reading.accel)));
    }
    let mut lw = LANDMARKS_HEADER.join(",") + "\n";
    for (i, (p, w)) in landmarks.points().iter().zip(landmarks.weights()).enumerate() {
        push_row(&mut lw, std::iter::once(i.to_string()).chain(v3s(p)).chain(std::iter::once(fmt_f64(*w))));
    }
    let mut obs = OBS_HEADER.join(",") + "\n";
    for f in &stream.frames {
        for (id, y) in f.ids.iter().zip(&f.ys) {
            let _ = writeln!(obs, "{},{},{},{},{}", fmt_f64(f.t), id, fmt_f64(y.x), fmt_f64(y.y), fmt_f64(y.z));
        }
    }
    let mut files = vec![(IMU_FILE, imu), (LANDMARKS_FILE, lw), (OBS_FILE, obs)];
    if let Some(tr) = truth {
        files.push((TRUTH_FILE, emit_truth(tr)));
    }
    files
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_bundle(dir: &Path) -> Result<Bundle, CliError> {
    let mut warnings = Vec::new();

    let (tab, _) = read_table(IMU_FILE, &read_file(&dir.join(IMU_FILE))?, IMU_HEADER, &[])?;
    let mut imu: Vec<ImuSample> = Vec::with_capacity(tab.rows.len());
    for (line, rec) in &tab.rows {
        let t = tab.finite(*line, rec, 0)?;
        if imu.last().is_some_and(|prev| !(t > prev.t)) {
            return Err(tab.err(*line, "timestamps must be strictly increasing"));
        }
        imu.push(ImuSample { t, reading: ImuReading { omega: tab.vec3(*line, rec, 1)?, accel: tab.vec3(*line, rec, 4)? } });
    }
    if imu.len() < 2 {
        return Err(CliError::Input(format!("{IMU_FILE}: at least two samples are required, found {}", imu.len())));
    }

    let (tab, _) = read_table(LANDMARKS_FILE, &read_file(&dir.join(LANDMARKS_FILE))?, LANDMARKS_HEADER, &[])?;
    let mut ids = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in &tab.rows {
        let id = tab.uint(*line, rec, 0)?;
        if index.insert(id, ids.len()).is_some() {
            return Err(tab.err(*line, format!("duplicate landmark id {id}")));
        }
        ids.push(id);
        points.push(tab.vec3(*line, rec, 1)?);
        weights.push(tab.finite(*line, rec, 4)?);
    }

    let (tab, _) = read_table(OBS_FILE, &read_file(&dir.join(OBS_FILE))?, OBS_HEADER, &[])?;
    let mut frames: Vec<Frame> = Vec::new();
    let mut pending: Vec<(usize, Vec3)> = Vec::new();
    let mut current_t = f64::NEG_INFINITY;
    let flush = |t: f64, pending: &mut Vec<(usize, Vec3)>, frames: &mut Vec<Frame>| {
        if pending.is_empty() {
            return;
        }
        pending.sort_by_key(|(i, _)| *i);
        frames.push(Frame { t, ids: pending.iter().map(|e| e.0).collect(), ys: pending.iter().map(|e| e.1).collect() });
        pending.clear();
    };
    for (line, rec) in &tab.rows {
        let t = tab.finite(*line, rec, 0)?;
        if t < current_t {
            return Err(tab.err(*line, "timestamps must be non-decreasing"));
        }
        if t > current_t {
            flush(current_t, &mut pending, &mut frames);
            current_t = t;
        }
        let id = tab.uint(*line, rec, 1)?;
        let Some(&i) = index.get(&id) else {
            return Err(tab.err(*line, format!("landmark id {id} is not in {LANDMARKS_FILE}")));
        };
        if pending.iter().any(|(j, _)| *j == i) {
            return Err(tab.err(*line, format!("landmark id {id} observed twice at t = {t}")));
        }
        pending.push((i, tab.vec3(*line, rec, 2)?));
    }
    flush(current_t, &mut pending, &mut frames);
    let short = frames.iter().filter(|f| f.ids.len() < MIN_FRAME_LANDMARKS).count();
    if short > 0 {
        warnings.push(format!("{short} landmark frame(s) with fewer than {MIN_FRAME_LANDMARKS} landmarks will be skipped"));
    }
    if frames.is_empty() {
        warnings.push("no landmark observations: the run is pure dead reckoning".to_string());
    }

    let landmarks = if points.is_empty() {
        None
    } else {
        Some(LandmarkSet::new(points, weights)?)
    };

    let truth_path = dir.join(TRUTH_FILE);
    let truth = if truth_path.exists() { Some(parse_truth(&read_file(&truth_path)?)?) } else { None };

    Ok(Bundle { stream: MeasurementStream { imu, frames }, landmarks, ids, truth, warnings })
}
