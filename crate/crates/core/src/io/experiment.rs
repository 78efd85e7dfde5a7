//! Logged experiment data: one row per student.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const EXPERIMENT_HEADER: [&str; 5] = [
    "student_id",
    "prior_percent_correct",
    "condition",
    "completed",
    "problem_count",
];

/// Experimental arm a logged student was assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Control,
    Experimental,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Control, Condition::Experimental];

    /// Replay maps control to action 0 and experimental to action 1.
    pub fn action(self) -> usize {
        match self {
            Condition::Control => 0,
            Condition::Experimental => 1,
        }
    }

    pub fn from_action(action: usize) -> Option<Self> {
        match action {
            0 => Some(Condition::Control),
            1 => Some(Condition::Experimental),
            _ => None,
        }
    }

    pub fn code(self) -> char {
        match self {
            Condition::Control => 'C',
            Condition::Experimental => 'E',
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "C" => Ok(Condition::Control),
            "E" => Ok(Condition::Experimental),
            other => Err(format!("unknown condition label `{other}` (expected C or E)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawExperimentRecord {
    pub student_id: String,
    pub prior_percent_correct: f64,
    /// `None` for students who started but were never assigned.
    pub condition: Option<Condition>,
    pub completed: Option<bool>,
    pub problem_count: Option<u32>,
}

impl RawExperimentRecord {
    pub fn is_assigned(&self) -> bool {
        self.condition.is_some()
    }
}

fn optional<T: FromStr>(field: &str, name: &str, line: u64) -> Result<Option<T>> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| Error::Row {
        line,
        message: format!("cannot parse {name} from `{field}`"),
    })
}

pub fn read_experiment_csv<R: Read>(reader: R) -> Result<Vec<RawExperimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(EXPERIMENT_HEADER) {
        return Err(Error::Header {
            expected: EXPERIMENT_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| match e.position() {
            Some(p) => Error::Row {
                line: p.line(),
                message: e.to_string(),
            },
            None => Error::Csv(e),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let student_id = row[0].to_string();
        let prior_percent_correct: f64 = optional(&row[1], "prior_percent_correct", line)?.ok_or_else(|| Error::Row {
            line,
            message: "missing prior_percent_correct".into(),
        })?;
        if !(0.0..=100.0).contains(&prior_percent_correct) {
            return Err(Error::Row {
                line,
                message: format!("prior_percent_correct {prior_percent_correct} outside [0, 100]"),
            });
        }
        let condition = if row[2].is_empty() {
            None
        } else {
            Some(row[2].parse::<Condition>().map_err(|message| Error::Row { line, message })?)
        };
        let completed = match &row[3] {
            "" => None,
            "0" => Some(false),
            "1" => Some(true),
            other => {
                return Err(Error::Row {
                    line,
                    message: format!("completed must be 0 or 1, got `{other}`"),
                })
            }
        };
        let problem_count = optional::<u32>(&row[4], "problem_count", line)?;
        if condition.is_some() {
            match completed {
                None => {
                    return Err(Error::Row {
                        line,
                        message: "assigned student without completed flag".into(),
                    })
                }
                Some(true) if problem_count.is_none() => {
                    return Err(Error::Row {
                        line,
                        message: "completer without problem_count".into(),
                    })
                }
                _ => {}
            }
        }
        records.push(RawExperimentRecord {
            student_id,
            prior_percent_correct,
            condition,
            completed,
            problem_count,
        });
    }
    Ok(records)
}

pub fn load_experiment_csv(path: impl AsRef<Path>) -> Result<Vec<RawExperimentRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_experiment_csv(std::io::BufReader::new(file))
}

pub fn write_experiment_csv<W: std::io::Write>(records: &[RawExperimentRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(EXPERIMENT_HEADER)?;
    for r in records {
        w.write_record([
            r.student_id.clone(),
            r.prior_percent_correct.to_string(),
            r.condition.map(|c| c.to_string()).unwrap_or_default(),
            r.completed.map(|c| u8::from(c).to_string()).unwrap_or_default(),
            r.problem_count.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
