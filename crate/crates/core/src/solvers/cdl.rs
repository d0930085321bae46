use std::time::Instant;

use rayon::prelude::*;

use super::objective::{half_residual_sq, Objective};
use super::{
    elapsed, random_bank, truncate_atoms, CscSolver, CscState, CscVariant, DictSolver, DictState,
    IterationRecord, IterationTrace, SolverConfig, TraceEvent,
};
use crate::error::{Error, Result};
use crate::operators::{CodeOperator, ConvDictionary};
use crate::types::{CoefficientMaps, FilterBank, Image};

/// Output of [`cdl_cp`].
#[derive(Debug, Clone)]
pub struct CdlResult {
    pub bank: FilterBank,
    /// Coefficient maps, one set per training image.
    pub codes: Vec<CoefficientMaps>,
    /// One record per outer iteration (plus the initial point).
    pub trace: IterationTrace,
}

/// `Σ_v ½‖Σ_m d_m ⊛ x_{v,m} − s_v‖² + λ Σ_v ‖x_v‖₁`.
pub fn cdl_objective(bank: &FilterBank, codes: &[CoefficientMaps], images: &[Image], lambda: f64) -> Result<Objective> {
    if codes.len() != images.len() || images.is_empty() {
        return Err(Error::invalid("need one code set per image"));
    }
    let op = ConvDictionary::new(bank, images[0].shape())?;
    let mut data = 0.0;
    let mut l1 = 0.0;
    for (x, s) in codes.iter().zip(images) {
        data += half_residual_sq(op.apply(x)?.as_slice(), s.as_slice());
        l1 += lambda * x.l1_norm();
    }
    Ok(Objective::new(data, l1, 0.0, 0.0))
}

/// Convolutional dictionary learning: alternates per-image sparse coding and
/// the dictionary update, starting from seeded Gaussian filters.
///
/// `cfg.iter_n` counts outer iterations; each runs `cfg.inner_csc_iters`
/// coding iterations per image and `cfg.inner_dict_iters` dictionary
/// iterations. With `cfg.warm_start` both phases resume from their previous
/// primal and dual variables.
pub fn cdl_cp(images: &[Image], m: usize, r: usize, cfg: &SolverConfig) -> Result<CdlResult> {
    cfg.validate()?;
    let first = images.first().ok_or_else(|| Error::invalid("training set is empty"))?;
    let shape = first.shape();
    if let Some(bad) = images.iter().position(|i| i.shape() != shape) {
        return Err(Error::invalid(format!("training image {bad} has a different shape")));
    }
    if r == 0 || r > shape.0 || r > shape.1 {
        return Err(Error::invalid(format!("filter size {r} does not fit {shape:?} images")));
    }
    let start = Instant::now();
    let mut bank = random_bank(m, r, cfg.seed)?;
    let mut csc_states = (0..images.len())
        .map(|_| CscState::zeros(m, shape, CscVariant::Plain))
        .collect::<Result<Vec<_>>>()?;
    let mut dict_state = DictState::from_bank(&bank, shape, images.len())?;

    let mut trace = IterationTrace::default();
    let record = |trace: &mut IterationTrace, iter: usize, obj: Objective| {
        trace.records.push(IterationRecord {
            iter,
            time_s: elapsed(start),
            objective: obj.total,
            data_term: obj.data_term,
            l1_term: obj.l1_term,
            tv_h_term: None,
            tv_v_term: None,
            psnr: None,
            ssim: None,
        });
    };
    let codes_of = |states: &[CscState]| states.iter().map(|s| s.x.clone()).collect::<Vec<_>>();
    record(&mut trace, 0, cdl_objective(&bank, &codes_of(&csc_states), images, cfg.lambda)?);

    for outer in 1..=cfg.iter_n {
        let ctx = |e: Error| e.context(format!("outer iteration {outer}"));

        let conv = ConvDictionary::new(&bank, shape).map_err(ctx)?;
        let coder = CscSolver::new(&conv, CscVariant::Plain, cfg).map_err(ctx)?;
        if !cfg.warm_start {
            for st in &mut csc_states {
                *st = coder.initial_state().map_err(ctx)?;
            }
        }
        csc_states
            .par_iter_mut()
            .zip(images.par_iter())
            .try_for_each(|(st, s)| coder.run(s, st, cfg.inner_csc_iters, None).map(|_| ()))
            .map_err(ctx)?;

        let codes = codes_of(&csc_states);
        let code_op = CodeOperator::new(&codes).map_err(ctx)?;
        let updater = DictSolver::new(&code_op, r, cfg).map_err(ctx)?;
        if !cfg.warm_start {
            dict_state.reset_duals();
        }
        let inner = updater
            .run(images, &mut dict_state, cfg.inner_dict_iters)
            .map_err(ctx)?;
        for ev in inner.events {
            if let TraceEvent::DegenerateAtomReset { atom, .. } = ev {
                trace.events.push(TraceEvent::DegenerateAtomReset { iteration: outer, atom });
            }
        }
        bank = truncate_atoms(&dict_state.d, r).map_err(ctx)?;
        trace.lipschitz = updater.lipschitz();
        record(&mut trace, outer, cdl_objective(&bank, &codes, images, cfg.lambda).map_err(ctx)?);
    }

    Ok(CdlResult {
        bank,
        codes: codes_of(&csc_states),
        trace,
    })
}
