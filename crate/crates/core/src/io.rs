//! Instance file format.
//!
//! ```json
//! {"format_version": 1, "num_machines": 6,
//!  "jobs": [{"id": 1, "arrival": 0.0e0, "ops": [{"machines": [1, 3], "times": [..]}]}],
//!  "meta": {...}}
//! ```
//!
//! Arrival and processing times are written in scientific notation with 17
//! significant digits, which round-trips every `f64` exactly.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::instance::{Compat, InstanceMeta, JobId, JobSpec, MachineId, OperationSpec, ShopInstance};

pub const FORMAT_VERSION: u32 = 1;

/// `f64` that serializes with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Time17(pub f64);

impl Serialize for Time17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite time"));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Serialize, Deserialize)]
struct FileOp {
    machines: Vec<u32>,
    times: Vec<Time17>,
}

#[derive(Serialize, Deserialize)]
struct FileJob {
    id: u32,
    arrival: Time17,
    ops: Vec<FileOp>,
}

#[derive(Serialize, Deserialize)]
struct FileInstance {
    format_version: u32,
    num_machines: usize,
    jobs: Vec<FileJob>,
    #[serde(default)]
    meta: InstanceMeta,
}

pub fn instance_to_string(inst: &ShopInstance) -> String {
    let file = FileInstance {
        format_version: FORMAT_VERSION,
        num_machines: inst.num_machines,
        jobs: inst
            .jobs
            .iter()
            .map(|j| FileJob {
                id: j.id.0,
                arrival: Time17(j.arrival),
                ops: j
                    .ops
                    .iter()
                    .map(|o| FileOp {
                        machines: o.compat.iter().map(|c| c.machine.0).collect(),
                        times: o.compat.iter().map(|c| Time17(c.time)).collect(),
                    })
                    .collect(),
            })
            .collect(),
        meta: inst.meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance times are finite");
    s.push('\n');
    s
}

pub fn instance_from_str(text: &str) -> Result<ShopInstance> {
    let file: FileInstance = serde_json::from_str(text)
        .map_err(|e| Error::Parse { line: e.line(), column: e.column(), msg: e.to_string() })?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::invalid(
            "format_version",
            format!("unsupported version {}, expected {FORMAT_VERSION}", file.format_version),
        ));
    }
    let mut jobs = Vec::with_capacity(file.jobs.len());
    for (i, fj) in file.jobs.into_iter().enumerate() {
        let id = JobId(fj.id);
        let mut ops = Vec::with_capacity(fj.ops.len());
        for (j, fo) in fj.ops.into_iter().enumerate() {
            if fo.machines.len() != fo.times.len() {
                return Err(Error::invalid(
                    format!("jobs[{i}].ops[{j}]"),
                    format!("{} machines but {} times", fo.machines.len(), fo.times.len()),
                ));
            }
            let compat = fo
                .machines
                .iter()
                .zip(&fo.times)
                .map(|(&m, t)| Compat { machine: MachineId(m), time: t.0 })
                .collect();
            ops.push(OperationSpec { job: id, op_index: j as u32 + 1, compat });
        }
        jobs.push(JobSpec { id, arrival: fj.arrival.0, ops });
    }
    let inst = ShopInstance { num_machines: file.num_machines, jobs, meta: file.meta };
    inst.validate()?;
    Ok(inst)
}

pub fn save_instance(inst: &ShopInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_string(inst))?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ShopInstance> {
    instance_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time17_format() {
        assert_eq!(serde_json::to_string(&Time17(50.5)).unwrap(), "5.0500000000000000e1");
        let x = 0.1 + 0.2;
        let s = serde_json::to_string(&Time17(x)).unwrap();
        let back: f64 = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn rejects_out_of_range_machine_with_path() {
        let text = r#"{"format_version":1,"num_machines":6,"jobs":[
            {"id":1,"arrival":0,"ops":[{"machines":[9],"times":[3.0]}]}]}"#;
        let err = instance_from_str(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("jobs[0].ops[0].machines[0]") && msg.contains("machine 9"), "{msg}");
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = "{\n\"format_version\": 1,\n\"num_machines\": oops\n}";
        match instance_from_str(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let text = r#"{"format_version":1,"num_machines":2,"jobs":[
            {"id":1,"arrival":0,"ops":[{"machines":[1,2],"times":[3.0]}]}]}"#;
        assert!(instance_from_str(text).is_err());
    }
}
