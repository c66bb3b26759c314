//! Per-iteration objective records for the optimization loops.

use std::fmt::Write as _;

/// Which loop produced a trace entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopId {
    Bcd,
    FpHbf,
    FpRis,
    Mm,
}

impl LoopId {
    pub fn label(&self) -> &'static str {
        match self {
            LoopId::Bcd => "bcd",
            LoopId::FpHbf => "fp_hbf",
            LoopId::FpRis => "fp_ris",
            LoopId::Mm => "mm",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub loop_id: LoopId,
    /// Iteration index within its loop (0 = state before the first step).
    pub iteration: usize,
    /// Objective in bits/s/Hz.
    pub objective: f64,
    pub wall_ms: f64,
}

/// Ordered objective trace across all loops of one optimization run.
#[derive(Debug, Clone, Default)]
pub struct SolutionTrace {
    pub entries: Vec<TraceEntry>,
}

impl SolutionTrace {
    pub fn push(&mut self, loop_id: LoopId, iteration: usize, objective: f64, wall_ms: f64) {
        self.entries.push(TraceEntry {
            loop_id,
            iteration,
            objective,
            wall_ms,
        });
    }

    pub fn extend(&mut self, other: SolutionTrace) {
        self.entries.extend(other.entries);
    }

    /// Largest objective decrease between consecutive entries of one loop id
    /// (0 when the sequence is nondecreasing).
    pub fn max_decrease(&self, loop_id: LoopId) -> f64 {
        let mut worst = 0.0f64;
        let mut prev: Option<f64> = None;
        for e in self.entries.iter().filter(|e| e.loop_id == loop_id) {
            if let Some(p) = prev {
                worst = worst.max(p - e.objective);
            }
            prev = Some(e.objective);
        }
        worst
    }

    /// Number of entries for a loop id.
    pub fn count(&self, loop_id: LoopId) -> usize {
        self.entries.iter().filter(|e| e.loop_id == loop_id).count()
    }

    /// CSV with columns `loop,iteration,objective_bits,wall_ms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("loop,iteration,objective_bits,wall_ms\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{:.9},{:.3}",
                e.loop_id.label(),
                e.iteration,
                e.objective,
                e.wall_ms
            );
        }
        out
    }
}
