/// One recorded iteration. Iteration 0 is the initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// Wall-clock seconds since the solver started.
    pub time_s: f64,
    pub objective: f64,
    pub data_term: f64,
    pub l1_term: f64,
    pub tv_h_term: Option<f64>,
    pub tv_v_term: Option<f64>,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
}

/// Notable events during a solve.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    /// Atom `atom` had (numerically) zero support and was reset to the unit impulse.
    DegenerateAtomReset { iteration: usize, atom: usize },
    /// The relative primal change fell below the configured tolerance.
    EarlyStop { iteration: usize },
    /// `X` vanished (all codes zero); steps fall back to `L = 1`.
    ZeroOperator { iteration: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub events: Vec<TraceEvent>,
    /// `L` used for the step sizes (the last one, for alternating solvers).
    pub lipschitz: f64,
}

impl IterationTrace {
    pub fn first(&self) -> Option<&IterationRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn reset_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::DegenerateAtomReset { .. }))
            .count()
    }
}
