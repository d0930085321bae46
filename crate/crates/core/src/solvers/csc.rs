use std::time::Instant;

use super::objective::{half_residual_sq, Objective};
use super::{elapsed, ensure_finite, l2_distance, lipschitz, IterationRecord, IterationTrace, SolverConfig, TraceEvent};
use crate::error::{Error, Result};
use crate::operators::{AtvOperator, Axis, ConvDictionary, GradientOperator, LinearMap};
use crate::prox::{clamp, shrink, ProxParams};
use crate::types::{CoefficientMaps, FilterBank, Image};

/// Computes `(psnr, ssim)` from the current reconstruction `D x`.
pub type MetricFn<'a> = &'a (dyn Fn(&Image) -> (f64, f64) + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CscVariant {
    /// `½‖Dx − s‖² + λ‖x‖₁`
    Plain,
    /// Plain plus `β₁‖Φ₀x‖₁ + β₂‖Φ₁x‖₁`.
    Atv,
}

/// Primal, extrapolated primal and dual variables of a sparse-coding solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CscState {
    pub x: CoefficientMaps,
    pub x_bar: CoefficientMaps,
    /// Dual of the data term.
    pub p: Image,
    /// Duals of the horizontal / vertical difference terms (TV variant only).
    pub q: Option<CoefficientMaps>,
    pub r: Option<CoefficientMaps>,
}

impl CscState {
    pub fn zeros(m_count: usize, shape: (usize, usize), variant: CscVariant) -> Result<Self> {
        let maps = CoefficientMaps::zeros(m_count, shape.0, shape.1)?;
        let tv = match variant {
            CscVariant::Plain => None,
            CscVariant::Atv => Some(maps.clone()),
        };
        Ok(Self {
            x: maps.clone(),
            x_bar: maps,
            p: Image::zeros(shape.0, shape.1)?,
            q: tv.clone(),
            r: tv,
        })
    }
}

/// Step sizes and operators for repeated sparse-coding runs against one
/// dictionary. Several states (e.g. one per training image) may share a solver.
#[derive(Debug, Clone)]
pub struct CscSolver<'a> {
    op: &'a ConvDictionary,
    variant: CscVariant,
    cfg: SolverConfig,
    lipschitz: f64,
    params: ProxParams,
    grad_h: GradientOperator,
    grad_v: GradientOperator,
}

impl<'a> CscSolver<'a> {
    /// Estimates `L` for `D` (plain) or the stacked `(D; Φ₀; Φ₁)` (TV variant).
    pub fn new(op: &'a ConvDictionary, variant: CscVariant, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let l = match variant {
            CscVariant::Plain => lipschitz(op, cfg)?,
            CscVariant::Atv => lipschitz(&AtvOperator::new(op), cfg)?,
        };
        Self::with_lipschitz(op, variant, cfg, l)
    }

    pub fn with_lipschitz(
        op: &'a ConvDictionary,
        variant: CscVariant,
        cfg: &SolverConfig,
        lipschitz: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        let (beta1, beta2) = match variant {
            CscVariant::Plain => (0.0, 0.0),
            CscVariant::Atv => (cfg.beta1, cfg.beta2),
        };
        let params = ProxParams::from_lipschitz(lipschitz, cfg.step_scale, cfg.lambda, beta1, beta2)?;
        let (m, shape) = (op.m_count(), op.shape());
        Ok(Self {
            op,
            variant,
            cfg: *cfg,
            lipschitz,
            params,
            grad_h: GradientOperator::new(Axis::Horizontal, m, shape)?,
            grad_v: GradientOperator::new(Axis::Vertical, m, shape)?,
        })
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn params(&self) -> &ProxParams {
        &self.params
    }

    pub fn variant(&self) -> CscVariant {
        self.variant
    }

    pub fn initial_state(&self) -> Result<CscState> {
        CscState::zeros(self.op.m_count(), self.op.shape(), self.variant)
    }

    fn objective(&self, x: &[f64], dx: &[f64], s: &[f64]) -> Objective {
        let data = half_residual_sq(dx, s);
        let l1 = self.params.lambda * x.iter().map(|v| v.abs()).sum::<f64>();
        match self.variant {
            CscVariant::Plain => Objective::new(data, l1, 0.0, 0.0),
            CscVariant::Atv => {
                let l1_of = |v: Vec<f64>| v.iter().map(|t| t.abs()).sum::<f64>();
                Objective::new(
                    data,
                    l1,
                    self.params.beta1 * l1_of(self.grad_h.forward_raw(x)),
                    self.params.beta2 * l1_of(self.grad_v.forward_raw(x)),
                )
            }
        }
    }

    fn check_state(&self, s: &Image, state: &CscState) -> Result<()> {
        let shape = self.op.shape();
        let m = self.op.m_count();
        let maps_ok = |c: &CoefficientMaps| c.m_count() == m && c.map_shape() == shape;
        if s.shape() != shape {
            return Err(Error::invalid(format!("image {:?} does not match dictionary grid {shape:?}", s.shape())));
        }
        if !maps_ok(&state.x) || !maps_ok(&state.x_bar) || state.p.shape() != shape {
            return Err(Error::invalid("solver state does not match the dictionary"));
        }
        if self.variant == CscVariant::Atv {
            match (&state.q, &state.r) {
                (Some(q), Some(r)) if maps_ok(q) && maps_ok(r) => {}
                _ => return Err(Error::invalid("TV solve needs difference duals q and r")),
            }
        }
        Ok(())
    }

    /// Runs `iters` primal-dual iterations from `state`, updating it in place.
    ///
    /// The trace holds the objective at the starting point and after every
    /// iteration. `metrics`, when given, is evaluated on each recorded `D x`.
    pub fn run(
        &self,
        s: &Image,
        state: &mut CscState,
        iters: usize,
        metrics: Option<MetricFn<'_>>,
    ) -> Result<IterationTrace> {
        self.check_state(s, state)?;
        let start = Instant::now();
        let ProxParams { sigma, tau, lambda, beta1, beta2 } = self.params;
        let theta = self.cfg.theta;
        let shrink_at = tau * lambda;
        let s = s.as_slice();
        let (h, w) = self.op.shape();

        let mut x = state.x.as_slice().to_vec();
        let mut x_bar = state.x_bar.as_slice().to_vec();
        let mut p = state.p.as_slice().to_vec();
        let mut dx = self.op.forward_flat(&x);
        // D x̄ is tracked by linearity: D x̄ = D x_new + θ (D x_new − D x_old)
        let mut dx_bar = self.op.forward_flat(&x_bar);
        let atv = self.variant == CscVariant::Atv;
        let (mut q, mut r) = match (&state.q, &state.r) {
            (Some(q), Some(r)) if atv => (q.as_slice().to_vec(), r.as_slice().to_vec()),
            _ => (Vec::new(), Vec::new()),
        };

        let mut trace = IterationTrace { lipschitz: self.lipschitz, ..Default::default() };
        let record = |trace: &mut IterationTrace, iter: usize, x: &[f64], dx: &[f64]| {
            let obj = self.objective(x, dx, s);
            let (psnr, ssim) = match metrics {
                Some(f) => {
                    let recon = Image::from_array_unchecked(
                        ndarray::Array2::from_shape_vec((h, w), dx.to_vec()).expect("shape"),
                    );
                    let (a, b) = f(&recon);
                    (Some(a), Some(b))
                }
                None => (None, None),
            };
            trace.records.push(IterationRecord {
                iter,
                time_s: elapsed(start),
                objective: obj.total,
                data_term: obj.data_term,
                l1_term: obj.l1_term,
                tv_h_term: atv.then_some(obj.tv_h_term),
                tv_v_term: atv.then_some(obj.tv_v_term),
                psnr,
                ssim,
            });
        };
        record(&mut trace, 0, &x, &dx);

        let denom = 1.0 + sigma;
        for it in 1..=iters {
            for ((pk, db), sk) in p.iter_mut().zip(&dx_bar).zip(s) {
                *pk = (*pk + sigma * (db - sk)) / denom;
            }
            let mut g = self.op.adjoint_flat(&p);
            if atv {
                let gh = self.grad_h.forward_raw(&x_bar);
                for (qk, gk) in q.iter_mut().zip(&gh) {
                    *qk = clamp(*qk + sigma * gk, beta1);
                }
                let gv = self.grad_v.forward_raw(&x_bar);
                for (rk, gk) in r.iter_mut().zip(&gv) {
                    *rk = clamp(*rk + sigma * gk, beta2);
                }
                let th = self.grad_h.adjoint_raw(&q);
                let tv = self.grad_v.adjoint_raw(&r);
                for ((gk, a), b) in g.iter_mut().zip(&th).zip(&tv) {
                    *gk += a + b;
                }
            }
            let x_new: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xk, gk)| shrink(xk - tau * gk, shrink_at))
                .collect();
            ensure_finite(&x_new, it)?;
            let dx_new = self.op.forward_flat(&x_new);
            for ((xb, xn), xo) in x_bar.iter_mut().zip(&x_new).zip(&x) {
                *xb = xn + theta * (xn - xo);
            }
            for ((db, dn), d_old) in dx_bar.iter_mut().zip(&dx_new).zip(&dx) {
                *db = dn + theta * (dn - d_old);
            }
            let change = l2_distance(&x_new, &x);
            let prev_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = x_new;
            dx = dx_new;
            record(&mut trace, it, &x, &dx);
            if self.cfg.rel_tol > 0.0 && change / prev_norm.max(1e-12) < self.cfg.rel_tol {
                trace.events.push(TraceEvent::EarlyStop { iteration: it });
                break;
            }
        }

        let m = self.op.m_count();
        let to_maps = |v: Vec<f64>| {
            CoefficientMaps::from_array_unchecked(ndarray::Array3::from_shape_vec((m, h, w), v).expect("shape"))
        };
        state.x = to_maps(x);
        state.x_bar = to_maps(x_bar);
        state.p = Image::from_array_unchecked(ndarray::Array2::from_shape_vec((h, w), p).expect("shape"));
        if atv {
            state.q = Some(to_maps(q));
            state.r = Some(to_maps(r));
        }
        Ok(trace)
    }
}

fn solve(bank: &FilterBank, s: &Image, cfg: &SolverConfig, variant: CscVariant) -> Result<(CoefficientMaps, IterationTrace)> {
    let op = ConvDictionary::new(bank, s.shape())?;
    let solver = CscSolver::new(&op, variant, cfg)?;
    let mut state = solver.initial_state()?;
    let trace = solver.run(s, &mut state, cfg.iter_n, None)?;
    Ok((state.x, trace))
}

/// Sparse coding of `s` over `bank` from a zero start, `cfg.iter_n` iterations.
pub fn csc_cp(bank: &FilterBank, s: &Image, cfg: &SolverConfig) -> Result<(CoefficientMaps, IterationTrace)> {
    solve(bank, s, cfg, CscVariant::Plain)
}

/// Sparse coding with the anisotropic TV penalty on the coefficient maps.
pub fn csc_atv_cp(bank: &FilterBank, s: &Image, cfg: &SolverConfig) -> Result<(CoefficientMaps, IterationTrace)> {
    solve(bank, s, cfg, CscVariant::Atv)
}
