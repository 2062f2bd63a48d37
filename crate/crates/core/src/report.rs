//! JSON-lines report records and the exit-code contract.

use std::time::Instant;

use serde_json::{json, Value};

use crate::error::Error;

/// Outcome of one check. Ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Skipped,
    Violation,
    Internal,
}

#[derive(Clone, Debug)]
pub struct Record {
    pub check: String,
    pub algebra: String,
    pub params: Value,
    pub status: Status,
    pub witness: Option<Value>,
    pub runtime_ms: u64,
}

impl Record {
    pub fn new(check: &str, algebra: &str, params: Value) -> Record {
        Record {
            check: check.to_string(),
            algebra: algebra.to_string(),
            params,
            status: Status::Pass,
            witness: None,
            runtime_ms: 0,
        }
    }

    pub fn pass(mut self, info: Option<Value>) -> Record {
        self.status = Status::Pass;
        self.witness = info;
        self
    }

    pub fn fail(mut self, witness: Value) -> Record {
        self.status = Status::Violation;
        self.witness = Some(witness);
        self
    }

    pub fn outcome(self, ok: bool, witness: Value) -> Record {
        if ok {
            self.pass(Some(witness))
        } else {
            self.fail(witness)
        }
    }

    pub fn skipped(mut self, reason: &str, detail: Value) -> Record {
        self.status = Status::Skipped;
        self.witness = Some(json!({"skipped": reason, "detail": detail}));
        self
    }

    /// Theorem-type errors become violations, size limits become skips,
    /// anything else is an internal failure.
    pub fn error(mut self, e: &Error) -> Record {
        self.status = match e {
            Error::TooLarge { .. } => Status::Skipped,
            e if e.is_theorem_violation() => Status::Violation,
            _ => Status::Internal,
        };
        let key = match self.status {
            Status::Skipped => "skipped",
            Status::Violation => "violation",
            _ => "internal_error",
        };
        let reason = if self.status == Status::Skipped {
            Value::from("size")
        } else {
            Value::from(e.to_string())
        };
        self.witness = Some(json!({ key: reason, "detail": e.to_string() }));
        self
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Skipped)
    }

    pub fn to_json(&self, timing: bool) -> Value {
        json!({
            "check": self.check,
            "algebra": self.algebra,
            "params": self.params,
            "pass": self.passed(),
            "witness": self.witness,
            "runtime_ms": if timing { self.runtime_ms } else { 0 },
        })
    }
}

/// Runs `f`, turning an error into a record and stamping the runtime.
pub fn timed(base: Record, f: impl FnOnce(Record) -> crate::Result<Record>) -> Record {
    let start = Instant::now();
    let fallback = base.clone();
    let mut r = match f(base) {
        Ok(r) => r,
        Err(e) => fallback.error(&e),
    };
    r.runtime_ms = start.elapsed().as_millis() as u64;
    r
}

/// 0 when everything passed, 2 on a theorem violation, 3 on an internal
/// failure.
pub fn exit_code(records: &[Record]) -> i32 {
    match records.iter().map(|r| r.status).max() {
        Some(Status::Internal) => 3,
        Some(Status::Violation) => 2,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_and_exit_codes() {
        let r = Record::new("isaacs", "u3_f2", json!({}));
        assert_eq!(exit_code(&[r.clone().pass(None)]), 0);
        assert_eq!(exit_code(&[r.clone().error(&Error::TooLarge { order: 1 << 30, bound: 1 << 20 })]), 0);
        assert_eq!(exit_code(&[r.clone().error(&Error::NotGaloisInvariant), r.clone().pass(None)]), 2);
        assert_eq!(exit_code(&[r.clone().error(&Error::NotGaloisInvariant), r.error(&Error::NotIrreducible)]), 3);
    }

    #[test]
    fn json_shape() {
        let r = Record::new("norms", "x2_f2", json!({"ext": 2})).fail(json!({"x": [1]}));
        let v = r.to_json(false);
        assert_eq!(v["pass"], false);
        assert_eq!(v["runtime_ms"], 0);
        assert_eq!(v["witness"]["x"][0], 1);
    }
}
