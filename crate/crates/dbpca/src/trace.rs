//! Per-iteration convergence records shared by both solvers.

use serde::Serialize;

/// One iteration of a fit. `objective` is the consensus objective (negative
/// sum of block ELBOs with plug-in hyperparameters); residual columns are
/// zero for centralized runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub primal_residual: f64,
    pub max_edge_gap: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn push(&mut self, row: TraceRow) {
        debug_assert!(
            self.rows.last().map_or(true, |r| row.iteration > r.iteration),
            "iterations must be strictly increasing"
        );
        self.rows.push(row);
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.objective)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Outcome of a fit: the trace plus convergence status and numeric
/// diagnostics.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub trace: ConvergenceTrace,
    pub converged: bool,
    pub iterations: usize,
    pub diagnostics: crate::site::Diagnostics,
}

/// Relative change used by every stopping rule.
pub(crate) fn relative_change(current: f64, previous: f64) -> f64 {
    (current - previous).abs() / previous.abs().max(1e-12)
}
