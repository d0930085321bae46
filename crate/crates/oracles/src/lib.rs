//! Slow, direct reference computations for testing.
//!
//! Nothing here touches FFTs or the solver code paths: convolutions are
//! explicit periodic sums, operators are dense matrices, SSIM is a direct
//! windowed loop and the spectral norm comes from a dense SVD.

use nalgebra::DMatrix;

/// Row-major H×W grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub h: usize,
    pub w: usize,
    pub v: Vec<f64>,
}

impl Grid {
    pub fn new(h: usize, w: usize, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), h * w);
        Self { h, w, v }
    }

    pub fn zeros(h: usize, w: usize) -> Self {
        Self::new(h, w, vec![0.0; h * w])
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.w + j]
    }
}

/// `Σ_{k,l} f[k,l] · x[(i−k) mod h, (j−l) mod w]` for a small (r×r) kernel `f`.
pub fn periodic_convolve(x: &Grid, f: &Grid) -> Grid {
    let mut out = Grid::zeros(x.h, x.w);
    for i in 0..x.h {
        for j in 0..x.w {
            let mut acc = 0.0;
            for k in 0..f.h {
                for l in 0..f.w {
                    acc += f.at(k, l) * x.at((i + x.h * f.h - k) % x.h, (j + x.w * f.w - l) % x.w);
                }
            }
            out.v[i * x.w + j] = acc;
        }
    }
    out
}

/// Periodic correlation, the adjoint of [`periodic_convolve`] in `x`.
pub fn periodic_correlate(y: &Grid, f: &Grid) -> Grid {
    let mut out = Grid::zeros(y.h, y.w);
    for i in 0..y.h {
        for j in 0..y.w {
            let mut acc = 0.0;
            for k in 0..f.h {
                for l in 0..f.w {
                    acc += f.at(k, l) * y.at((i + k) % y.h, (j + l) % y.w);
                }
            }
            out.v[i * y.w + j] = acc;
        }
    }
    out
}

/// `Σ_m f_m ⊛ x_m` by direct summation.
pub fn synthesize(filters: &[Grid], maps: &[Grid]) -> Grid {
    assert_eq!(filters.len(), maps.len());
    let mut out = Grid::zeros(maps[0].h, maps[0].w);
    for (f, x) in filters.iter().zip(maps) {
        for (o, c) in out.v.iter_mut().zip(periodic_convolve(x, f).v) {
            *o += c;
        }
    }
    out
}

/// Dense `N × (M·N)` matrix of the synthesis operator, built entry by entry.
pub fn dense_synthesis(filters: &[Grid], h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let mut mat = DMatrix::zeros(n, filters.len() * n);
    for (m, f) in filters.iter().enumerate() {
        for i in 0..h {
            for j in 0..w {
                for k in 0..f.h {
                    for l in 0..f.w {
                        // output (i, j) receives f[k,l] · x_m[(i−k), (j−l)]
                        let src = ((i + h * f.h - k) % h) * w + (j + w * f.w - l) % w;
                        mat[(i * w + j, m * n + src)] += f.at(k, l);
                    }
                }
            }
        }
    }
    mat
}

/// Dense periodic forward difference along rows (`horizontal = true`) or columns,
/// acting on one H×W grid.
pub fn dense_forward_difference(h: usize, w: usize, horizontal: bool) -> DMatrix<f64> {
    let n = h * w;
    let mut mat = DMatrix::zeros(n, n);
    for i in 0..h {
        for j in 0..w {
            let row = i * w + j;
            let next = if horizontal { i * w + (j + 1) % w } else { ((i + 1) % h) * w + j };
            mat[(row, next)] += 1.0;
            mat[(row, row)] -= 1.0;
        }
    }
    mat
}

/// Block-diagonal repetition of `block`, `count` times.
pub fn block_diag(block: &DMatrix<f64>, count: usize) -> DMatrix<f64> {
    let (r, c) = block.shape();
    let mut mat = DMatrix::zeros(r * count, c * count);
    for b in 0..count {
        mat.view_mut((b * r, b * c), (r, c)).copy_from(block);
    }
    mat
}

/// Dense `(V·N) × (M·N)` dictionary-update operator: block (v, m) convolves
/// a padded atom with the full code map `x_{v,m}`.
pub fn dense_code_operator(codes: &[Vec<Grid>]) -> DMatrix<f64> {
    let (h, w) = (codes[0][0].h, codes[0][0].w);
    let n = h * w;
    let m_count = codes[0].len();
    let mut mat = DMatrix::zeros(codes.len() * n, m_count * n);
    for (v, per_image) in codes.iter().enumerate() {
        for (m, x) in per_image.iter().enumerate() {
            let block = dense_synthesis(std::slice::from_ref(x), h, w);
            mat.view_mut((v * n, m * n), (n, n)).copy_from(&block);
        }
    }
    mat
}

pub fn largest_singular_value(mat: &DMatrix<f64>) -> f64 {
    mat.singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn matvec(mat: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (mat * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
}

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// ISTA for `½‖Σ f_m ⊛ x_m − s‖² + λ Σ‖x_m‖₁` with step `1/lip`, using direct
/// spatial convolutions. Returns the final maps.
pub fn ista(filters: &[Grid], s: &Grid, lambda: f64, lip: f64, iters: usize) -> Vec<Grid> {
    let mut x = vec![Grid::zeros(s.h, s.w); filters.len()];
    let step = 1.0 / lip;
    for _ in 0..iters {
        let mut resid = synthesize(filters, &x);
        for (r, sv) in resid.v.iter_mut().zip(&s.v) {
            *r -= sv;
        }
        for (xm, f) in x.iter_mut().zip(filters) {
            let g = periodic_correlate(&resid, f);
            for (xv, gv) in xm.v.iter_mut().zip(&g.v) {
                *xv = soft(*xv - step * gv, step * lambda);
            }
        }
    }
    x
}

/// `½‖Σ f_m ⊛ x_m − s‖² + λ Σ‖x_m‖₁` by direct summation.
pub fn csc_objective(filters: &[Grid], x: &[Grid], s: &Grid, lambda: f64) -> f64 {
    let dx = synthesize(filters, x);
    let data: f64 = dx.v.iter().zip(&s.v).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
    let l1: f64 = x.iter().flat_map(|g| g.v.iter()).map(|v| v.abs()).sum();
    data + lambda * l1
}

/// Mean SSIM computed window by window with a 2-D Gaussian kernel
/// (11×11, σ = 1.5, K₁ = 0.01, K₂ = 0.03, L = 1), valid positions only.
pub fn reference_ssim(a: &Grid, b: &Grid) -> f64 {
    const K: usize = 11;
    let mut kernel = [[0.0f64; K]; K];
    let mut total = 0.0;
    for (i, row) in kernel.iter_mut().enumerate() {
        for (j, k) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *k = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *k;
        }
    }
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let mut acc = 0.0;
    let mut count = 0usize;
    for i0 in 0..=a.h - K {
        for j0 in 0..=a.w - K {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (i, row) in kernel.iter().enumerate() {
                for (j, k) in row.iter().enumerate() {
                    let wgt = k / total;
                    let (x, y) = (a.at(i0 + i, j0 + j), b.at(i0 + i, j0 + j));
                    ma += wgt * x;
                    mb += wgt * y;
                    saa += wgt * x * x;
                    sbb += wgt * y * y;
                    sab += wgt * x * y;
                }
            }
            let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
            acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    acc / count as f64
}

/// Small deterministic generator (SplitMix64) for building test instances
/// without depending on the library's RNG stack.
#[derive(Debug, Clone)]
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn grid(&mut self, h: usize, w: usize) -> Grid {
        Grid::new(h, w, (0..h * w).map(|_| self.range(-1.0, 1.0)).collect())
    }
}


/// `m` Gaussian random `r×r` filters, each scaled to unit norm.
pub fn random_filters(rng: &mut SplitMix, m: usize, r: usize) -> Vec<Grid> {
    (0..m)
        .map(|_| {
            let v: Vec<f64> = (0..r * r).map(|_| rng.normal()).collect();
            let n = norm(&v);
            Grid::new(r, r, v.into_iter().map(|x| x / n).collect())
        })
        .collect()
}

/// Sparse maps: each entry is nonzero (standard normal) with probability `density`.
pub fn sparse_maps(rng: &mut SplitMix, m: usize, h: usize, w: usize, density: f64) -> Vec<Grid> {
    (0..m)
        .map(|_| {
            Grid::new(
                h,
                w,
                (0..h * w)
                    .map(|_| if rng.uniform() < density { rng.normal() } else { 0.0 })
                    .collect(),
            )
        })
        .collect()
}

/// The sparse-coding benchmark instance: 16×16 grid, two normalized 3×3
/// Gaussian filters, `s = D x_true + 0.01·noise` with 5% dense codes.
pub fn csc_instance(seed: u64) -> (Vec<Grid>, Grid) {
    let mut rng = SplitMix(seed);
    let filters = random_filters(&mut rng, 2, 3);
    let codes = sparse_maps(&mut rng, 2, 16, 16, 0.05);
    let mut s = synthesize(&filters, &codes);
    for v in &mut s.v {
        *v += 0.01 * rng.normal();
    }
    (filters, s)
}

/// Numerical prox of a separable penalty: minimizes `h(z') + (z − z')²/(2σ)`
/// per coordinate over `[lo, hi]` (use the bracket to encode box constraints).
pub fn numeric_prox(h: impl Fn(f64) -> f64, z: &[f64], sigma: f64, lo: f64, hi: f64) -> Vec<f64> {
    z.iter()
        .map(|&zi| golden_section(|c| h(c) + (zi - c) * (zi - c) / (2.0 * sigma), lo, hi, 1e-11))
        .collect()
}

/// Nearest point to `d` on the unit sphere by a sequence of plane rotations
/// (each angle found by a coarse scan refined with golden-section search).
/// Does not normalize `d`.
pub fn sphere_nearest(d: &[f64], sweeps: usize) -> Vec<f64> {
    let n = d.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    if n == 1 {
        z[0] = if d[0] < 0.0 { -1.0 } else { 1.0 };
        return z;
    }
    let rotate = |z: &[f64], i: usize, j: usize, a: f64| {
        let mut out = z.to_vec();
        out[i] = a.cos() * z[i] - a.sin() * z[j];
        out[j] = a.sin() * z[i] + a.cos() * z[j];
        out
    };
    let cost = |z: &[f64]| -> f64 { d.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum() };
    for _ in 0..sweeps {
        for i in 0..n {
            for j in i + 1..n {
                let steps = 64;
                let h = 2.0 * std::f64::consts::PI / steps as f64;
                let best = (0..steps)
                    .map(|k| -std::f64::consts::PI + k as f64 * h)
                    .min_by(|a, b| cost(&rotate(&z, i, j, *a)).total_cmp(&cost(&rotate(&z, i, j, *b))))
                    .unwrap();
                let a = golden_section(|a| cost(&rotate(&z, i, j, a)), best - h, best + h, 1e-13);
                z = rotate(&z, i, j, a);
            }
        }
    }
    z
}

/// Prox of a smooth scalar penalty by bisection on the stationarity condition
/// `h'(c) + (c − z)/σ = 0`, bracketed in `[lo, hi]`.
pub fn smooth_prox_scalar(dh: impl Fn(f64) -> f64, z: f64, sigma: f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = |c: f64| dh(c) + (c - z) / sigma;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two 32×32 training images synthesized from a known bank of two 5×5
/// filters with 5% dense codes. Returns `(filters, images)`.
pub fn cdl_instance(seed: u64) -> (Vec<Grid>, Vec<Grid>) {
    let mut rng = SplitMix(seed);
    let filters = random_filters(&mut rng, 2, 5);
    let images = (0..2)
        .map(|_| synthesize(&filters, &sparse_maps(&mut rng, 2, 32, 32, 0.05)))
        .collect();
    (filters, images)
}

/// A 64×64 clean test image: smooth background plus `0.15·D x` for four
/// 8×8 filters and 2% dense codes. Returns `(filters, clean)`.
pub fn denoise_instance(seed: u64) -> (Vec<Grid>, Grid) {
    let mut rng = SplitMix(seed);
    let n = 64;
    let filters = random_filters(&mut rng, 4, 8);
    let detail = synthesize(&filters, &sparse_maps(&mut rng, 4, n, n, 0.02));
    let mut clean = Grid::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let smooth = 0.5 + 0.2 * (i as f64 / 10.0).sin() * (j as f64 / 13.0).cos();
            clean.v[i * n + j] = smooth + 0.15 * detail.at(i, j);
        }
    }
    (filters, clean)
}
