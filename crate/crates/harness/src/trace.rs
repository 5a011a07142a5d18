//! Line-delimited trace records, one per controller cycle.
//!
//! ```text
//! #trace v1
//! #fields t mu pbx pby ...
//! 0.01	0.0628	...
//! ```
//!
//! Values are tab separated in the fixed order of [`FIELDS`]. Floats use the
//! shortest representation that reads back exactly.

use std::io::Write;

use tiltphase::actions::{ControllerOutput, Diagnostics};

use crate::error::HarnessError;

pub const HEADER: &str = "#trace v1";

pub const FIELDS: [&str; 31] = [
    "t", "mu", "pbx", "pby", "pex", "pey", "pdx", "pdy", "arm_x", "arm_y", "foot_x", "foot_y", "cfoot_x", "cfoot_y",
    "hip_x", "hip_y", "h_max", "lean_x", "lean_y", "swing_out_x", "swing_out_y", "plane_x", "plane_y", "f_g", "e_l",
    "e_r", "instability", "speed", "integral_x", "integral_y", "flags",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub mu: f64,
    pub p_b: [f64; 2],
    pub p_e: [f64; 2],
    pub p_d: [f64; 2],
    pub arm_tilt: [f64; 2],
    pub support_foot_tilt: [f64; 2],
    pub continuous_foot_tilt: [f64; 2],
    pub hip_shift: [f64; 2],
    pub max_hip_height: f64,
    pub lean_tilt: [f64; 2],
    pub swing_out_tilt: [f64; 2],
    pub swing_ground_plane: [f64; 2],
    pub gait_frequency: f64,
    pub e_l: f64,
    pub e_r: f64,
    pub instability: f64,
    pub speed: f64,
    pub integral: [f64; 2],
    pub flags: u32,
}

impl From<&ControllerOutput> for TraceRecord {
    fn from(o: &ControllerOutput) -> Self {
        let a = &o.activations;
        TraceRecord {
            t: o.t,
            mu: o.mu,
            p_b: o.p_b.to_array(),
            p_e: o.p_e.to_array(),
            p_d: o.p_d.to_array(),
            arm_tilt: a.arm_tilt.to_array(),
            support_foot_tilt: a.support_foot_tilt.to_array(),
            continuous_foot_tilt: a.continuous_foot_tilt.to_array(),
            hip_shift: a.hip_shift,
            max_hip_height: a.max_hip_height,
            lean_tilt: a.lean_tilt.to_array(),
            swing_out_tilt: a.swing_out_tilt.to_array(),
            swing_ground_plane: a.swing_ground_plane.to_array(),
            gait_frequency: a.gait_frequency,
            e_l: o.e_l,
            e_r: o.e_r,
            instability: o.instability,
            speed: o.deviation_speed,
            integral: o.integral,
            flags: o.flags.bits(),
        }
    }
}

impl TraceRecord {
    pub fn values(&self) -> [f64; 30] {
        [
            self.t,
            self.mu,
            self.p_b[0],
            self.p_b[1],
            self.p_e[0],
            self.p_e[1],
            self.p_d[0],
            self.p_d[1],
            self.arm_tilt[0],
            self.arm_tilt[1],
            self.support_foot_tilt[0],
            self.support_foot_tilt[1],
            self.continuous_foot_tilt[0],
            self.continuous_foot_tilt[1],
            self.hip_shift[0],
            self.hip_shift[1],
            self.max_hip_height,
            self.lean_tilt[0],
            self.lean_tilt[1],
            self.swing_out_tilt[0],
            self.swing_out_tilt[1],
            self.swing_ground_plane[0],
            self.swing_ground_plane[1],
            self.gait_frequency,
            self.e_l,
            self.e_r,
            self.instability,
            self.speed,
            self.integral[0],
            self.integral[1],
        ]
    }

    fn from_values(v: &[f64; 30], flags: u32) -> Self {
        TraceRecord {
            t: v[0],
            mu: v[1],
            p_b: [v[2], v[3]],
            p_e: [v[4], v[5]],
            p_d: [v[6], v[7]],
            arm_tilt: [v[8], v[9]],
            support_foot_tilt: [v[10], v[11]],
            continuous_foot_tilt: [v[12], v[13]],
            hip_shift: [v[14], v[15]],
            max_hip_height: v[16],
            lean_tilt: [v[17], v[18]],
            swing_out_tilt: [v[19], v[20]],
            swing_ground_plane: [v[21], v[22]],
            gait_frequency: v[23],
            e_l: v[24],
            e_r: v[25],
            instability: v[26],
            speed: v[27],
            integral: [v[28], v[29]],
            flags,
        }
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics::from_bits_truncate(self.flags)
    }

    fn to_line(self) -> String {
        let mut line = self.values().iter().map(|v| format!("{v}")).collect::<Vec<_>>().join("\t");
        line.push('\t');
        line.push_str(&self.flags.to_string());
        line
    }
}

/// Writes the header followed by one line per record.
pub fn write_trace<W: Write>(mut w: W, records: &[TraceRecord]) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    writeln!(w, "#fields {}", FIELDS.join(" "))?;
    for r in records {
        writeln!(w, "{}", r.to_line())?;
    }
    w.flush()
}

/// Same records as comma separated values with a header row.
pub fn write_csv<W: Write>(w: W, records: &[TraceRecord]) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(FIELDS)?;
    for r in records {
        let mut row: Vec<String> = r.values().iter().map(|v| format!("{v}")).collect();
        row.push(r.flags.to_string());
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| HarnessError::Csv(e.into()))
}

pub fn render_trace(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("trace is ascii")
}

/// Parses a trace written by [`write_trace`].
pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((_, other)) => {
            return Err(HarnessError::Trace {
                line: 1,
                reason: format!("expected `{HEADER}`, got `{other}`"),
            })
        }
        None => {
            return Err(HarnessError::Trace {
                line: 1,
                reason: "empty trace".to_string(),
            })
        }
    }
    let mut records = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != FIELDS.len() {
            return Err(HarnessError::Trace {
                line: line_no,
                reason: format!("expected {} fields, got {}", FIELDS.len(), parts.len()),
            });
        }
        let mut values = [0.0; 30];
        for (k, (slot, raw)) in values.iter_mut().zip(&parts).enumerate() {
            *slot = raw.parse().map_err(|_| HarnessError::Trace {
                line: line_no,
                reason: format!("field `{}`: bad number `{raw}`", FIELDS[k]),
            })?;
        }
        let flags = parts[30].parse().map_err(|_| HarnessError::Trace {
            line: line_no,
            reason: format!("field `flags`: bad integer `{}`", parts[30]),
        })?;
        records.push(TraceRecord::from_values(&values, flags));
    }
    Ok(records)
}
