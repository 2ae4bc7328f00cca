//! Report-style validation shared by the graph and scenario checks.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum IssueKind {
    DuplicateNodeId,
    UnknownNodeId,
    WrongLayer,
    SelfLoop,
    LayerOrderViolation,
    DuplicateEdge,
    MissingAttribute,
    MisplacedAttribute,
    OutOfRange,
    ThresholdOrder,
    UnreachableCapability,
    EquipmentWithoutResource,
    ZeroWeightSum,
    InvalidHorizon,
    GridTooCoarse,
    DuplicateSignal,
    UnknownSignal,
    InvalidSignal,
    InvalidPiecewise,
    PiecewiseDiscontinuity,
    MissingPiecewise,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub message: String,
}

impl Issue {
    pub fn new(kind: IssueKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error(&mut self, kind: IssueKind, message: impl Into<String>) {
        self.errors.push(Issue::new(kind, message));
    }

    pub fn warn(&mut self, kind: IssueKind, message: impl Into<String>) {
        self.warnings.push(Issue::new(kind, message));
    }

    pub fn error_kinds(&self) -> Vec<IssueKind> {
        self.errors.iter().map(|i| i.kind).collect()
    }

    pub fn warning_kinds(&self) -> Vec<IssueKind> {
        self.warnings.iter().map(|i| i.kind).collect()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
