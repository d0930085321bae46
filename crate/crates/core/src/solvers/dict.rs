use std::time::Instant;

use ndarray::{s, Array3};

use super::objective::half_residual_sq;
use super::{elapsed, ensure_finite, IterationRecord, IterationTrace, SolverConfig, TraceEvent};
use crate::error::{Error, Result};
use crate::operators::{spectral_norm, CodeOperator, LinearMap};
use crate::prox::{project_unit_padded_in_place, ProxParams};
use crate::rng;
use crate::types::{CoefficientMaps, FilterBank, Image};

/// Gaussian random `m` filters of size `r×r`, each scaled to unit norm.
pub fn random_bank(m: usize, r: usize, seed: u64) -> Result<FilterBank> {
    if m == 0 || r == 0 {
        return Err(Error::invalid("random bank needs M >= 1 and r >= 1"));
    }
    let mut stream = rng::seeded(seed);
    let values = rng::standard_normal_vec(&mut stream, m * r * r);
    let filters = Array3::from_shape_vec((m, r, r), values).expect("shape");
    Ok(FilterBank::new(filters)?.normalized())
}

/// Zero-pads every filter of `bank` to `shape`.
pub fn pad_bank(bank: &FilterBank, shape: (usize, usize)) -> Result<CoefficientMaps> {
    let r = bank.filter_size();
    if r > shape.0 || r > shape.1 {
        return Err(Error::invalid(format!("filter size {r} exceeds grid {shape:?}")));
    }
    let mut out = Array3::zeros((bank.m_count(), shape.0, shape.1));
    out.slice_mut(s![.., ..r, ..r]).assign(bank.filters());
    CoefficientMaps::new(out)
}

/// Top-left `r×r` corner of every padded atom.
pub fn truncate_atoms(atoms: &CoefficientMaps, r: usize) -> Result<FilterBank> {
    let (h, w) = atoms.map_shape();
    if r == 0 || r > h || r > w {
        return Err(Error::invalid(format!("cannot truncate {h}x{w} atoms to {r}x{r}")));
    }
    FilterBank::new(atoms.array().slice(s![.., ..r, ..r]).to_owned())
}

/// Variables of the dictionary update: padded atoms, their extrapolation,
/// and one dual image per training image.
#[derive(Debug, Clone, PartialEq)]
pub struct DictState {
    pub d: CoefficientMaps,
    pub d_bar: CoefficientMaps,
    pub q: Vec<Image>,
}

impl DictState {
    /// Starts from `bank` (padded to `shape`) with zero duals for `image_count` images.
    pub fn from_bank(bank: &FilterBank, shape: (usize, usize), image_count: usize) -> Result<Self> {
        let d = pad_bank(bank, shape)?;
        Ok(Self {
            d_bar: d.clone(),
            d,
            q: vec![Image::zeros(shape.0, shape.1)?; image_count],
        })
    }

    pub fn reset_duals(&mut self) {
        for q in &mut self.q {
            q.array_mut().fill(0.0);
        }
        self.d_bar = self.d.clone();
    }
}

/// Primal-dual dictionary update for fixed codes.
#[derive(Debug, Clone)]
pub struct DictSolver<'a> {
    op: &'a CodeOperator,
    filter_size: usize,
    cfg: SolverConfig,
    lipschitz: f64,
    params: ProxParams,
    zero_operator: bool,
}

impl<'a> DictSolver<'a> {
    pub fn new(op: &'a CodeOperator, filter_size: usize, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let (h, w) = op.shape();
        if filter_size == 0 || filter_size > h || filter_size > w {
            return Err(Error::invalid(format!("filter size {filter_size} does not fit {h}x{w} images")));
        }
        // all-zero codes make X the zero map; any step is then admissible
        let (lipschitz, zero_operator) = match spectral_norm(op, &cfg.norm) {
            Ok(est) => (est.lipschitz, false),
            Err(Error::DegenerateOperator { .. }) => (1.0, true),
            Err(e) => return Err(e),
        };
        let params = ProxParams::from_lipschitz(lipschitz, cfg.step_scale, 0.0, 0.0, 0.0)?;
        Ok(Self {
            op,
            filter_size,
            cfg: *cfg,
            lipschitz,
            params,
            zero_operator,
        })
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn params(&self) -> &ProxParams {
        &self.params
    }

    fn check(&self, images: &[Image], state: &DictState) -> Result<()> {
        let shape = self.op.shape();
        if images.len() != self.op.image_count() || state.q.len() != images.len() {
            return Err(Error::invalid(format!(
                "{} codes, {} images and {} duals must agree",
                self.op.image_count(),
                images.len(),
                state.q.len()
            )));
        }
        if images.iter().chain(&state.q).any(|i| i.shape() != shape) {
            return Err(Error::invalid("image shape does not match the codes"));
        }
        let ok = |c: &CoefficientMaps| c.m_count() == self.op.m_count() && c.map_shape() == shape;
        if !ok(&state.d) || !ok(&state.d_bar) {
            return Err(Error::invalid("atoms do not match the codes"));
        }
        Ok(())
    }

    /// Runs `iters` iterations from `state`. The trace objective is
    /// `½ Σ_v ‖Σ_m x_{v,m} ⊛ d_m − s_v‖²`.
    pub fn run(&self, images: &[Image], state: &mut DictState, iters: usize) -> Result<IterationTrace> {
        self.check(images, state)?;
        let start = Instant::now();
        let ProxParams { sigma, tau, .. } = self.params;
        let theta = self.cfg.theta;
        let (h, w) = self.op.shape();
        let n = h * w;
        let targets: Vec<f64> = images.iter().flat_map(|i| i.as_slice().iter().copied()).collect();

        let mut d = state.d.as_slice().to_vec();
        let mut d_bar = state.d_bar.as_slice().to_vec();
        let mut q: Vec<f64> = state.q.iter().flat_map(|i| i.as_slice().iter().copied()).collect();
        let mut xd = self.op.forward_flat(&d);
        let mut xd_bar = self.op.forward_flat(&d_bar);

        let mut trace = IterationTrace { lipschitz: self.lipschitz, ..Default::default() };
        if self.zero_operator {
            trace.events.push(TraceEvent::ZeroOperator { iteration: 0 });
        }
        let record = |trace: &mut IterationTrace, iter: usize, xd: &[f64]| {
            let data = half_residual_sq(xd, &targets);
            trace.records.push(IterationRecord {
                iter,
                time_s: elapsed(start),
                objective: data,
                data_term: data,
                l1_term: 0.0,
                tv_h_term: None,
                tv_v_term: None,
                psnr: None,
                ssim: None,
            });
        };
        record(&mut trace, 0, &xd);

        let denom = 1.0 + sigma;
        for it in 1..=iters {
            for ((qk, xb), sk) in q.iter_mut().zip(&xd_bar).zip(&targets) {
                *qk = (*qk + sigma * (xb - sk)) / denom;
            }
            let g = self.op.adjoint_flat(&q);
            let mut d_new: Vec<f64> = d.iter().zip(&g).map(|(dk, gk)| dk - tau * gk).collect();
            ensure_finite(&d_new, it)?;
            for (m, atom) in d_new.chunks_exact_mut(n).enumerate() {
                if project_unit_padded_in_place(atom, w, self.filter_size) {
                    trace.events.push(TraceEvent::DegenerateAtomReset { iteration: it, atom: m });
                }
            }
            let xd_new = self.op.forward_flat(&d_new);
            for ((b, dn), dold) in d_bar.iter_mut().zip(&d_new).zip(&d) {
                *b = dn + theta * (dn - dold);
            }
            for ((b, xn), xold) in xd_bar.iter_mut().zip(&xd_new).zip(&xd) {
                *b = xn + theta * (xn - xold);
            }
            d = d_new;
            xd = xd_new;
            record(&mut trace, it, &xd);
        }

        let m = self.op.m_count();
        let to_maps = |v: Vec<f64>| CoefficientMaps::from_array_unchecked(Array3::from_shape_vec((m, h, w), v).expect("shape"));
        state.d = to_maps(d);
        state.d_bar = to_maps(d_bar);
        state.q = q
            .chunks_exact(n)
            .map(|c| Image::from_array_unchecked(ndarray::Array2::from_shape_vec((h, w), c.to_vec()).expect("shape")))
            .collect();
        Ok(trace)
    }
}

/// Updates `init` against fixed `codes` (one set per image) for `cfg.iter_n`
/// iterations. The starting atoms are projected onto the constraint set first.
pub fn dict_update_cp(
    codes: &[CoefficientMaps],
    images: &[Image],
    init: &FilterBank,
    cfg: &SolverConfig,
) -> Result<(FilterBank, IterationTrace)> {
    let op = CodeOperator::new(codes)?;
    let r = init.filter_size();
    let solver = DictSolver::new(&op, r, cfg)?;
    let mut state = DictState::from_bank(&init.normalized(), op.shape(), images.len())?;
    let trace = solver.run(images, &mut state, cfg.iter_n)?;
    Ok((truncate_atoms(&state.d, r)?, trace))
}
