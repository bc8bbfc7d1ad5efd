use rayon::prelude::*;

use super::report::{inputs_digest, VerificationReport};
use crate::error::Result;

/// A deferred check with the labels used when it errors out.
pub struct Job {
    pub check_name: String,
    pub subject: String,
    pub expected_fail: bool,
    pub run: Box<dyn Fn() -> Result<VerificationReport> + Send + Sync>,
}

impl Job {
    pub fn new(
        check_name: &str,
        subject: &str,
        run: impl Fn() -> Result<VerificationReport> + Send + Sync + 'static,
    ) -> Self {
        Self {
            check_name: check_name.to_string(),
            subject: subject.to_string(),
            expected_fail: false,
            run: Box::new(run),
        }
    }

    pub fn expect_fail(mut self, flag: bool) -> Self {
        self.expected_fail = flag;
        self
    }
}

/// Runs jobs in parallel. A job that errors becomes a failed report carrying
/// the message. Reports come back sorted by check name, then subject.
pub fn run_suite(jobs: Vec<Job>) -> Vec<VerificationReport> {
    let mut reports: Vec<VerificationReport> = jobs
        .into_par_iter()
        .map(|job| {
            let report = match (job.run)() {
                Ok(r) => r,
                Err(e) => {
                    VerificationReport::new(&job.check_name, inputs_digest(&job.subject, &[]))
                        .note(format!("error: {e}"))
                        .decide(f64::INFINITY, 0.0)
                }
            };
            report
                .with_subject(job.subject.clone())
                .expect_fail(job.expected_fail)
        })
        .collect();
    reports.sort_by(|a, b| (&a.check_name, &a.subject).cmp(&(&b.check_name, &b.subject)));
    reports
}

/// True iff no report fails outside the expected-fail set.
pub fn suite_passed(reports: &[VerificationReport]) -> bool {
    reports.iter().all(VerificationReport::acceptable)
}

pub fn to_json(reports: &[VerificationReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn ordering_and_errors() {
        let jobs = vec![
            Job::new("b", "z", || {
                Ok(VerificationReport::new("b", "d".into()).decide(0.0, 1.0))
            }),
            Job::new("a", "y", || Err(Error::Precondition("nope".into()))),
            Job::new("b", "a", || {
                Ok(VerificationReport::new("b", "d".into()).decide(2.0, 1.0))
            })
            .expect_fail(true),
        ];
        let r = run_suite(jobs);
        let keys: Vec<_> = r
            .iter()
            .map(|r| (r.check_name.as_str(), r.subject.as_str()))
            .collect();
        assert_eq!(keys, [("a", "y"), ("b", "a"), ("b", "z")]);
        assert!(!r[0].passed && r[0].notes[0].contains("nope"));
        assert!(!suite_passed(&r));
        assert!(suite_passed(&r[1..]));
        assert!(to_json(&r).unwrap().contains("\"expected_fail\": true"));
    }
}
