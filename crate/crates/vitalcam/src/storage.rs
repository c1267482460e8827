//! Session records in a single SQLite table.
//!
//! ```sql
//! CREATE TABLE sessions (
//!     id            INTEGER PRIMARY KEY AUTOINCREMENT,
//!     timestamp_ns  INTEGER NOT NULL,     -- UTC, nanoseconds since the epoch
//!     filename      TEXT NOT NULL,
//!     hr, hrv, spo2, rr, sbp, dbp         REAL,  -- computed values
//!     hr_flag ... dbp_flag                TEXT NOT NULL,
//!     stress        TEXT NOT NULL,
//!     has_truth     INTEGER NOT NULL,
//!     gt_hr, gt_hrv, gt_spo2, gt_rr, gt_sbp, gt_dbp REAL, gt_stress TEXT,
//!     brightness, light_type, activity   TEXT,
//!     has_profile   INTEGER NOT NULL,
//!     name TEXT, age INTEGER, sex TEXT, skin_tone TEXT, ethnicity TEXT
//! );
//! ```
//!
//! The `schema_meta` table records the schema version.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use rusqlite::{params, Connection, OptionalExtension, Row};
use serde::{Deserialize, Serialize};
use vitalcam_core::vitals::{Reading, StressLabel, Validity, VitalsReport};

use crate::{Error, Result};

pub const SCHEMA_VERSION: i64 = 1;

macro_rules! wire_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $wire:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $wire)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $wire),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| Error::InvalidRecord(format!(
                        concat!("`{}` is not a valid ", stringify!($name)), s
                    )))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

wire_enum!(Brightness { Bright => "bright", Dark => "dark" });
wire_enum!(LightType { WarmWhite => "warm_white", CoolWhite => "cool_white", Daylight => "daylight" });
wire_enum!(Activity { Relaxed => "relaxed", PostExercise => "post_exercise" });
wire_enum!(SkinTone { White => "white", Yellow => "yellow", Brown => "brown", Dark => "dark" });

/// Recording conditions reported by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub brightness: Brightness,
    pub light_type: LightType,
    pub activity: Activity,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Profile {
    pub name: Option<String>,
    pub age: Option<u32>,
    pub sex: Option<String>,
    pub skin_tone: Option<SkinTone>,
    pub ethnicity: Option<String>,
}

/// Values from reference devices. HRV and RR are usually not measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceVitals {
    pub hr_bpm: Option<f64>,
    pub hrv_ms: Option<f64>,
    pub spo2_percent: Option<f64>,
    pub rr_brpm: Option<f64>,
    pub sbp_mmhg: Option<f64>,
    pub dbp_mmhg: Option<f64>,
    pub stress: Option<StressLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    /// Assigned by the store; ignored on save.
    #[serde(default)]
    pub id: Option<i64>,
    pub timestamp: DateTime<Utc>,
    pub filename: String,
    pub computed: VitalsReport,
    #[serde(default)]
    pub ground_truth: Option<ReferenceVitals>,
    #[serde(default)]
    pub environment: Option<Environment>,
    #[serde(default)]
    pub profile: Option<Profile>,
}

impl SessionRecord {
    pub fn new(filename: impl Into<String>, computed: VitalsReport) -> Self {
        Self {
            id: None,
            timestamp: Utc::now(),
            filename: filename.into(),
            computed,
            ground_truth: None,
            environment: None,
            profile: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.filename.trim().is_empty() {
            return Err(Error::InvalidRecord("filename is empty".into()));
        }
        if self.timestamp.timestamp_nanos_opt().is_none() {
            return Err(Error::InvalidRecord("timestamp out of range".into()));
        }
        for (name, r) in computed_readings(&self.computed) {
            if r.value.is_some_and(|v| !v.is_finite()) {
                return Err(Error::InvalidRecord(format!("computed {name} is not finite")));
            }
            if r.value.is_none() != (r.validity == Validity::Unavailable) {
                return Err(Error::InvalidRecord(format!("computed {name} value and flag disagree")));
            }
        }
        if let Some(gt) = &self.ground_truth {
            let values = [gt.hr_bpm, gt.hrv_ms, gt.spo2_percent, gt.rr_brpm, gt.sbp_mmhg, gt.dbp_mmhg];
            if values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidRecord("ground truth values must be finite".into()));
            }
        }
        Ok(())
    }
}

fn computed_readings(r: &VitalsReport) -> [(&'static str, Reading); 6] {
    [
        ("hr", r.hr_bpm),
        ("hrv", r.hrv_ms),
        ("spo2", r.spo2_percent),
        ("rr", r.rr_brpm),
        ("sbp", r.sbp_mmhg),
        ("dbp", r.dbp_mmhg),
    ]
}

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS schema_meta (key TEXT PRIMARY KEY, value INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS sessions (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    timestamp_ns INTEGER NOT NULL,
    filename TEXT NOT NULL,
    hr REAL, hr_flag TEXT NOT NULL,
    hrv REAL, hrv_flag TEXT NOT NULL,
    spo2 REAL, spo2_flag TEXT NOT NULL,
    rr REAL, rr_flag TEXT NOT NULL,
    sbp REAL, sbp_flag TEXT NOT NULL,
    dbp REAL, dbp_flag TEXT NOT NULL,
    stress TEXT NOT NULL,
    has_truth INTEGER NOT NULL,
    gt_hr REAL, gt_hrv REAL, gt_spo2 REAL, gt_rr REAL, gt_sbp REAL, gt_dbp REAL, gt_stress TEXT,
    brightness TEXT, light_type TEXT, activity TEXT,
    has_profile INTEGER NOT NULL,
    name TEXT, age INTEGER, sex TEXT, skin_tone TEXT, ethnicity TEXT
);
CREATE INDEX IF NOT EXISTS sessions_timestamp ON sessions (timestamp_ns);
";

const COLUMNS: &str = "id, timestamp_ns, filename, hr, hr_flag, hrv, hrv_flag, spo2, spo2_flag, rr, rr_flag, \
    sbp, sbp_flag, dbp, dbp_flag, stress, has_truth, gt_hr, gt_hrv, gt_spo2, gt_rr, gt_sbp, gt_dbp, gt_stress, \
    brightness, light_type, activity, has_profile, name, age, sex, skin_tone, ethnicity";

/// Thread-safe handle; writes are serialized through one connection.
#[derive(Debug)]
pub struct Store {
    conn: Mutex<Connection>,
}

impl Store {
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.busy_timeout(std::time::Duration::from_secs(5))?;
        Self::init(conn)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.execute_batch(SCHEMA)?;
        let version: Option<i64> =
            conn.query_row("SELECT value FROM schema_meta WHERE key = 'version'", [], |r| r.get(0)).optional()?;
        match version {
            None => {
                conn.execute("INSERT INTO schema_meta (key, value) VALUES ('version', ?1)", [SCHEMA_VERSION])?;
            }
            Some(SCHEMA_VERSION) => {}
            Some(v) => return Err(Error::Config(format!("unsupported session schema version {v}"))),
        }
        Ok(Self { conn: Mutex::new(conn) })
    }

    fn conn(&self) -> std::sync::MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Inserts the record and returns its id. Ids increase with every insert.
    pub fn save_session(&self, record: &SessionRecord) -> Result<i64> {
        record.validate()?;
        let c = &record.computed;
        let gt = record.ground_truth.unwrap_or_default();
        let env = record.environment;
        let profile = record.profile.clone().unwrap_or_default();
        let conn = self.conn();
        conn.execute(
            "INSERT INTO sessions (timestamp_ns, filename, hr, hr_flag, hrv, hrv_flag, spo2, spo2_flag, rr, rr_flag, \
             sbp, sbp_flag, dbp, dbp_flag, stress, has_truth, gt_hr, gt_hrv, gt_spo2, gt_rr, gt_sbp, gt_dbp, gt_stress, \
             brightness, light_type, activity, has_profile, name, age, sex, skin_tone, ethnicity) \
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15, ?16, ?17, ?18, ?19, ?20, \
             ?21, ?22, ?23, ?24, ?25, ?26, ?27, ?28, ?29, ?30, ?31, ?32)",
            params![
                record.timestamp.timestamp_nanos_opt(),
                record.filename,
                c.hr_bpm.value,
                c.hr_bpm.validity.as_str(),
                c.hrv_ms.value,
                c.hrv_ms.validity.as_str(),
                c.spo2_percent.value,
                c.spo2_percent.validity.as_str(),
                c.rr_brpm.value,
                c.rr_brpm.validity.as_str(),
                c.sbp_mmhg.value,
                c.sbp_mmhg.validity.as_str(),
                c.dbp_mmhg.value,
                c.dbp_mmhg.validity.as_str(),
                c.stress.as_str(),
                record.ground_truth.is_some(),
                gt.hr_bpm,
                gt.hrv_ms,
                gt.spo2_percent,
                gt.rr_brpm,
                gt.sbp_mmhg,
                gt.dbp_mmhg,
                gt.stress.map(StressLabel::as_str),
                env.map(|e| e.brightness.as_str()),
                env.map(|e| e.light_type.as_str()),
                env.map(|e| e.activity.as_str()),
                record.profile.is_some(),
                profile.name,
                profile.age,
                profile.sex,
                profile.skin_tone.map(SkinTone::as_str),
                profile.ethnicity,
            ],
        )?;
        Ok(conn.last_insert_rowid())
    }

    pub fn load_session(&self, id: i64) -> Result<Option<SessionRecord>> {
        let conn = self.conn();
        let mut stmt = conn.prepare_cached(&format!("SELECT {COLUMNS} FROM sessions WHERE id = ?1"))?;
        let mut rows = stmt.query([id])?;
        match rows.next()? {
            Some(row) => Ok(Some(decode(row)?)),
            None => Ok(None),
        }
    }

    /// Records in insertion order, optionally restricted to an inclusive
    /// timestamp range.
    pub fn list_sessions(&self, from: Option<DateTime<Utc>>, to: Option<DateTime<Utc>>) -> Result<Vec<SessionRecord>> {
        // Bounds beyond the nanosecond range saturate.
        let ns = |t: Option<DateTime<Utc>>, default: i64| {
            t.map_or(default, |t| {
                t.timestamp_nanos_opt().unwrap_or(if t.timestamp() > 0 { i64::MAX } else { i64::MIN })
            })
        };
        let (lo, hi) = (ns(from, i64::MIN), ns(to, i64::MAX));
        let conn = self.conn();
        let mut stmt = conn.prepare_cached(&format!(
            "SELECT {COLUMNS} FROM sessions WHERE timestamp_ns BETWEEN ?1 AND ?2 ORDER BY id"
        ))?;
        let mut rows = stmt.query([lo, hi])?;
        let mut out = Vec::new();
        while let Some(row) = rows.next()? {
            out.push(decode(row)?);
        }
        Ok(out)
    }
}

fn parse_col<T: FromStr>(row: &Row<'_>, idx: usize) -> Result<Option<T>> {
    let text: Option<String> = row.get(idx)?;
    text.map(|s| s.parse().map_err(|_| Error::InvalidRecord(format!("stored value `{s}` in column {idx} is invalid"))))
        .transpose()
}

fn decode(row: &Row<'_>) -> Result<SessionRecord> {
    let reading = |v: usize, f: usize| -> Result<Reading> {
        Ok(Reading {
            value: row.get(v)?,
            validity: parse_col(row, f)?.ok_or_else(|| Error::InvalidRecord("missing flag".into()))?,
        })
    };
    let computed = VitalsReport {
        hr_bpm: reading(3, 4)?,
        hrv_ms: reading(5, 6)?,
        spo2_percent: reading(7, 8)?,
        rr_brpm: reading(9, 10)?,
        sbp_mmhg: reading(11, 12)?,
        dbp_mmhg: reading(13, 14)?,
        stress: parse_col(row, 15)?.ok_or_else(|| Error::InvalidRecord("missing stress".into()))?,
    };
    let has_truth: bool = row.get(16)?;
    let ground_truth = has_truth
        .then(|| -> Result<ReferenceVitals> {
            Ok(ReferenceVitals {
                hr_bpm: row.get(17)?,
                hrv_ms: row.get(18)?,
                spo2_percent: row.get(19)?,
                rr_brpm: row.get(20)?,
                sbp_mmhg: row.get(21)?,
                dbp_mmhg: row.get(22)?,
                stress: parse_col(row, 23)?,
            })
        })
        .transpose()?;
    let environment = match (parse_col(row, 24)?, parse_col(row, 25)?, parse_col(row, 26)?) {
        (Some(brightness), Some(light_type), Some(activity)) => Some(Environment { brightness, light_type, activity }),
        _ => None,
    };
    let has_profile: bool = row.get(27)?;
    let profile = has_profile
        .then(|| -> Result<Profile> {
            Ok(Profile {
                name: row.get(28)?,
                age: row.get(29)?,
                sex: row.get(30)?,
                skin_tone: parse_col(row, 31)?,
                ethnicity: row.get(32)?,
            })
        })
        .transpose()?;
    let ns: i64 = row.get(1)?;
    Ok(SessionRecord {
        id: Some(row.get(0)?),
        timestamp: DateTime::from_timestamp_nanos(ns),
        filename: row.get(2)?,
        computed,
        ground_truth,
        environment,
        profile,
    })
}
