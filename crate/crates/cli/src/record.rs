use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::format::round_trip;

/// Error entry of a record: a number, or the marker `"diverged"` for runs
/// that stopped early or produced no finite error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorValue {
    Value(f64),
    Diverged,
}

impl ErrorValue {
    pub fn from_error(e: f64) -> Self {
        if e.is_finite() {
            ErrorValue::Value(e)
        } else {
            ErrorValue::Diverged
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            ErrorValue::Value(v) => Some(v),
            ErrorValue::Diverged => None,
        }
    }
}

impl fmt::Display for ErrorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorValue::Value(v) => f.write_str(&round_trip(*v)),
            ErrorValue::Diverged => f.write_str("diverged"),
        }
    }
}

impl Serialize for ErrorValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ErrorValue::Value(v) => s.serialize_f64(*v),
            ErrorValue::Diverged => s.serialize_str("diverged"),
        }
    }
}

impl<'de> Deserialize<'de> for ErrorValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ErrorValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"diverged\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ErrorValue, E> {
                Ok(ErrorValue::Value(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ErrorValue, E> {
                Ok(ErrorValue::Value(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ErrorValue, E> {
                Ok(ErrorValue::Value(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ErrorValue, E> {
                match v {
                    "diverged" => Ok(ErrorValue::Diverged),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// One point of a work-precision sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkPrecisionRecord {
    pub case_id: String,
    pub method: String,
    pub dt: f64,
    pub error: ErrorValue,
    /// Median over the repetitions.
    pub wall_time_s: f64,
    pub retcode: String,
}

pub const CSV_HEADER: &str = "case_id,method,dt,error,wall_time_s,retcode";

impl WorkPrecisionRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.case_id,
            self.method,
            round_trip(self.dt),
            self.error,
            round_trip(self.wall_time_s),
            self.retcode
        )
    }
}

pub fn records_to_csv(records: &[WorkPrecisionRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
