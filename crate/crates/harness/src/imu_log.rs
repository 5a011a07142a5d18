//! IMU logs: a header row `t,gx,gy,gz,ax,ay,az` then one sample per row
//! (s, rad/s, m/s^2).

use std::io::{Read, Write};

use tiltphase::estimator::ImuSample;

use crate::error::HarnessError;

pub const COLUMNS: [&str; 7] = ["t", "gx", "gy", "gz", "ax", "ay", "az"];

/// Reads a log, rejecting malformed rows and timestamps that do not strictly
/// increase. Row numbers count data rows from 1.
pub fn read_imu_log<R: Read>(r: R) -> Result<Vec<ImuSample>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(HarnessError::ImuLog {
            row: 0,
            reason: format!("expected header `{}`", COLUMNS.join(",")),
        });
    }
    let mut samples: Vec<ImuSample> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| HarnessError::ImuLog {
            row,
            reason: e.to_string(),
        })?;
        let mut v = [0.0f64; 7];
        for (k, slot) in v.iter_mut().enumerate() {
            let raw = record.get(k).unwrap_or("");
            *slot = raw.parse().map_err(|_| HarnessError::ImuLog {
                row,
                reason: format!("column `{}`: bad number `{raw}`", COLUMNS[k]),
            })?;
        }
        if !v[0].is_finite() {
            return Err(HarnessError::ImuLog {
                row,
                reason: "timestamp is not finite".to_string(),
            });
        }
        if let Some(prev) = samples.last() {
            if !(v[0] > prev.t) {
                return Err(HarnessError::ImuLog {
                    row,
                    reason: format!("timestamp {} does not increase past {}", v[0], prev.t),
                });
            }
        }
        samples.push(ImuSample {
            t: v[0],
            gyro: [v[1], v[2], v[3]],
            accel: [v[4], v[5], v[6]],
        });
    }
    Ok(samples)
}

pub fn load_imu_log(path: &std::path::Path) -> Result<Vec<ImuSample>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_imu_log(std::io::BufReader::new(file))
}

pub fn write_imu_log<W: Write>(w: W, samples: &[ImuSample]) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS)?;
    for s in samples {
        let row = [s.t, s.gyro[0], s.gyro[1], s.gyro[2], s.accel[0], s.accel[1], s.accel[2]];
        out.write_record(row.iter().map(|v| format!("{v}")))?;
    }
    out.flush().map_err(|e| HarnessError::Csv(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let samples: Vec<_> = (0..5)
            .map(|k| ImuSample {
                t: k as f64 * 0.01,
                gyro: [0.1 * k as f64, -0.2, 0.3],
                accel: [0.0, 0.1, 9.80665],
            })
            .collect();
        let mut buf = Vec::new();
        write_imu_log(&mut buf, &samples).unwrap();
        assert_eq!(read_imu_log(buf.as_slice()).unwrap(), samples);
    }

    #[test]
    fn non_monotone_time_names_row() {
        let text = "t,gx,gy,gz,ax,ay,az\n0.0,0,0,0,0,0,9.8\n0.01,0,0,0,0,0,9.8\n0.01,0,0,0,0,0,9.8\n";
        match read_imu_log(text.as_bytes()).unwrap_err() {
            HarnessError::ImuLog { row, .. } => assert_eq!(row, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn bad_header_and_values() {
        assert!(read_imu_log("a,b\n1,2\n".as_bytes()).is_err());
        let text = "t,gx,gy,gz,ax,ay,az\n0.0,x,0,0,0,0,9.8\n";
        let err = read_imu_log(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 1") && err.to_string().contains("gx"), "{err}");
    }
}
