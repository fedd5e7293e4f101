//! Coincidence-count datasets and their CSV form.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::polarimetry::{csv_err, fmt_float};
use crate::{Error, Result};

/// Counts collected at one field value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    /// Tesla.
    pub field: f64,
    /// Seconds.
    pub integration_time: f64,
    /// `HH`, `HV`, `VV` coincidences. Real-valued so that expected (noiseless) counts are representable.
    pub counts: [f64; 3],
    /// Optional `H`, `V` singles.
    pub singles: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceDataset {
    pub records: Vec<CountRecord>,
    /// Cell temperature, degrees Celsius, when known.
    pub temperature_c: Option<f64>,
    /// True input pair flux (1/s), when known.
    pub flux: Option<f64>,
}

const HEADER: [&str; 5] = ["B_mT", "t_int_s", "N_HH", "N_HV", "N_VV"];

impl CoincidenceDataset {
    pub fn new(records: Vec<CountRecord>) -> Result<Self> {
        let d = CoincidenceDataset {
            records,
            temperature_c: None,
            flux: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::InvalidInput("dataset has no records".into()));
        }
        for (i, r) in self.records.iter().enumerate() {
            if !r.field.is_finite() {
                return Err(Error::InvalidInput(format!("record {i}: field is not finite")));
            }
            if !(r.integration_time.is_finite() && r.integration_time > 0.0) {
                return Err(Error::InvalidInput(format!("record {i}: integration time must be positive")));
            }
            let all = r.counts.iter().chain(r.singles.iter().flatten());
            if all.clone().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(Error::InvalidInput(format!("record {i}: counts must be finite and non-negative")));
            }
        }
        let mut fields: Vec<f64> = self.records.iter().map(|r| r.field).collect();
        fields.sort_by(f64::total_cmp);
        if fields.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("dataset field values are not distinct".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_counts(&self) -> f64 {
        self.records.iter().flat_map(|r| r.counts).sum()
    }

    /// Header `B_mT,t_int_s,N_HH,N_HV,N_VV[,N_H,N_V]`; whole counts are written as integers.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let with_singles = self.records.iter().any(|r| r.singles.is_some());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = HEADER.to_vec();
        if with_singles {
            header.extend(["N_H", "N_V"]);
        }
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut rec = vec![fmt_float(r.field * 1e3), fmt_float(r.integration_time)];
            rec.extend(r.counts.iter().map(|&c| fmt_count(c)));
            if with_singles {
                match r.singles {
                    Some(s) => rec.extend(s.iter().map(|&c| fmt_count(c))),
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Internal(e.to_string()))
    }

    /// Parses the CSV form; errors carry 1-based line numbers.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let names: Vec<&str> = header.iter().collect();
        let with_singles = match names.as_slice() {
            n if n == HEADER => false,
            n if n.len() == 7 && n[..5] == HEADER && n[5] == "N_H" && n[6] == "N_V" => true,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {}[,N_H,N_V], found {}", HEADER.join(","), names.join(",")),
                })
            }
        };
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
            let field_at = |i: usize| -> Result<f64> {
                let s = row.get(i).unwrap_or("");
                let v: f64 = s.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {} is not a number: {s:?}", header.get(i).unwrap_or("?")),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("column {} is not finite", header.get(i).unwrap_or("?")),
                    });
                }
                Ok(v)
            };
            let count_at = |i: usize| -> Result<f64> {
                let v = field_at(i)?;
                if v < 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("column {} is negative", header.get(i).unwrap_or("?")),
                    });
                }
                Ok(v)
            };
            let t = field_at(1)?;
            if t <= 0.0 {
                return Err(Error::Parse {
                    line,
                    message: "integration time must be positive".into(),
                });
            }
            let singles = if with_singles && row.get(5).is_some_and(|s| !s.is_empty()) {
                Some([count_at(5)?, count_at(6)?])
            } else {
                None
            };
            records.push(CountRecord {
                field: field_at(0)? * 1e-3,
                integration_time: t,
                counts: [count_at(2)?, count_at(3)?, count_at(4)?],
                singles,
            });
        }
        let d = CoincidenceDataset {
            records,
            temperature_c: None,
            flux: None,
        };
        d.validate().map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        Ok(d)
    }
}

fn fmt_count(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        fmt_float(c)
    }
}
