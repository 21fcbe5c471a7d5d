//! L1-sparsest decomposition search.
//!
//! With `b` the OR effects and `d` the noise term, the AND effects are
//! `a = g − M·d − P·b`, where `g` is the difference transform of the table
//! (empty slot zeroed), `M` is the difference transform and
//! `P = −Q^{⊗n}`, `Q = [[1, 1], [0, −1]]`, maps OR effects to the AND
//! effects of their OR component. The objective `Σ_{T≠∅} |a_T| + |b_T|`
//! is minimized by ADMM on the splitting `z1 = b`, `z2 = −a`, `z3 = d`.
//! Every operator is a Kronecker power of a 2x2 matrix, so the linear
//! solves are exact via per-factor eigendecompositions.

use crate::error::{Error, Result};
use crate::lattice::{mobius_in_place, mobius_or, or_synthesis, LatticeVector};
use crate::models::ValueTable;

use super::{extract, Decomposition, InteractionSet};

/// Largest table the dense optimizer accepts.
pub const MAX_SPARSIFY_VARIABLES: usize = 20;

/// Best-loss plateau length used by the convergence test.
const WINDOW: usize = 50;

/// Iterations between penalty rebalancing steps.
const BALANCE_EVERY: usize = 10;

/// Relative loss difference below which two points count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

/// Entries below this fraction of the output range count as zero when
/// comparing supports.
const SUPPORT_FRACTION: f64 = 1e-9;

/// Entries below this fraction of the output range are treated as
/// unconverged zeros when purifying.
const PURIFY_FRACTION: f64 = 1e-6;

/// Purification is skipped for OR supports larger than this.
const PURIFY_MAX_SUPPORT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyConfig {
    pub max_iters: usize,
    /// Soft-threshold width relative to the table's output range; larger
    /// values take bolder steps towards sparsity.
    pub step_size: f64,
    /// Stop once the best loss improves by less than this fraction over
    /// the last window of iterations.
    pub convergence_eps: f64,
    /// `ζ = zeta_fraction · |v(x_N) − v(x_∅)|`.
    pub zeta_fraction: f64,
    /// Carried for provenance; the solver itself is deterministic.
    pub rng_seed: u64,
    pub denoise: bool,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig {
            max_iters: 3000,
            step_size: 0.02,
            convergence_eps: 1e-9,
            zeta_fraction: 0.02,
            rng_seed: 0,
            denoise: true,
        }
    }
}

impl SparsifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::arg(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.zeta_fraction >= 0.0) || !self.zeta_fraction.is_finite() {
            return Err(Error::arg(format!(
                "zeta fraction must be non-negative, got {}",
                self.zeta_fraction
            )));
        }
        if !(self.convergence_eps >= 0.0) {
            return Err(Error::arg("convergence tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SparsifyResult {
    pub decomposition: Decomposition,
    pub set: InteractionSet,
    /// Best loss found so far, starting with the even split; non-increasing.
    pub loss_history: Vec<f64>,
    pub iterations: usize,
}

impl SparsifyResult {
    /// L1 loss of the returned set. Equals the last history entry except
    /// when a tie-break picked a sparser point within `1e-9` relative.
    pub fn final_loss(&self) -> f64 {
        self.set.l1_loss()
    }
}

type Mat2 = [[f64; 2]; 2];

/// `x <- m^{⊗n} x` for the 2x2 map `f`, where factor `i` acts on bit `i`
/// of the index. Levels are applied two at a time to halve the passes.
#[inline(always)]
fn butterfly(x: &mut [f64], f: impl Fn(f64, f64) -> (f64, f64)) {
    let len = x.len();
    let mut half = 1;
    while 4 * half <= len {
        for block in x.chunks_exact_mut(4 * half) {
            let (q01, q23) = block.split_at_mut(2 * half);
            let (q0, q1) = q01.split_at_mut(half);
            let (q2, q3) = q23.split_at_mut(half);
            for (((a, b), c), d) in q0.iter_mut().zip(q1.iter_mut()).zip(q2.iter_mut()).zip(q3.iter_mut()) {
                let (x0, x1) = f(*a, *b);
                let (x2, x3) = f(*c, *d);
                (*a, *c) = f(x0, x2);
                (*b, *d) = f(x1, x3);
            }
        }
        half *= 4;
    }
    if half < len {
        let (lo, hi) = x.split_at_mut(half);
        for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
            (*l, *h) = f(*l, *h);
        }
    }
}

fn kron_apply(m: &Mat2, x: &mut [f64]) {
    let m = *m;
    butterfly(x, |x0, x1| (m[0][0] * x0 + m[0][1] * x1, m[1][0] * x0 + m[1][1] * x1));
}

/// Applies `(I + S^{⊗n})^{-1}` for a symmetric positive semidefinite 2x2 `S`.
struct KronSolver {
    /// Columns are orthonormal eigenvectors of `S`.
    vecs: Mat2,
    vecs_t: Mat2,
    inv_diag: Vec<f64>,
}

impl KronSolver {
    fn new(s: Mat2, n: usize) -> Self {
        let (a, b, c) = (s[0][0], s[0][1], s[1][1]);
        debug_assert!(b != 0.0 && (s[1][0] - b).abs() == 0.0);
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let lam = [mid - rad, mid + rad];
        let col = |l: f64| {
            let (x, y) = (b, l - a);
            let norm = (x * x + y * y).sqrt();
            [x / norm, y / norm]
        };
        let (e0, e1) = (col(lam[0]), col(lam[1]));
        let vecs = [[e0[0], e1[0]], [e0[1], e1[1]]];
        let vecs_t = [[e0[0], e0[1]], [e1[0], e1[1]]];
        let inv_diag = (0..1usize << n)
            .map(|s| {
                let prod: f64 = (0..n).map(|i| lam[s >> i & 1]).product();
                1.0 / (1.0 + prod)
            })
            .collect();
        KronSolver { vecs, vecs_t, inv_diag }
    }

    fn solve(&self, x: &mut [f64]) {
        kron_apply(&self.vecs_t, x);
        for (xi, di) in x.iter_mut().zip(&self.inv_diag) {
            *xi *= di;
        }
        kron_apply(&self.vecs, x);
    }
}

fn apply_p(b: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(b.iter().map(|x| -x));
    butterfly(out, |x0, x1| (x0 + x1, -x1));
}

fn apply_pt(y: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(y.iter().map(|x| -x));
    butterfly(out, |x0, x1| (x0, x0 - x1));
}

fn apply_m(d: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(d);
    mobius_in_place(out);
}

fn apply_mt(y: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(y);
    butterfly(out, |x0, x1| (x0 - x1, x1));
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting on an augmented `k x (k+1)`
/// system. `None` when the matrix is numerically singular.
fn solve_dense(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = m.len();
    let norm = m.iter().flat_map(|r| &r[..k]).fold(0.0f64, |a, x| a.max(x.abs()));
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() <= 1e-12 * norm {
            return None;
        }
        m.swap(c, p);
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for j in c..=k {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let tail: f64 = (c + 1..k).map(|j| m[c][j] * x[j]).sum();
        x[c] = (m[c][k] - tail) / m[c][c];
    }
    Some(x)
}

/// Reduced row echelon form of the leading `k x k` block, and one null
/// vector of it when the block is rank deficient.
fn null_direction(m: &[Vec<f64>], k: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = m.iter().map(|r| r[..k].to_vec()).collect();
    let norm = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-9 * norm.max(1.0);
    let mut pivots = Vec::new();
    let mut row = 0;
    let mut free = None;
    for c in 0..k {
        let p = (row..k).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()));
        match p {
            Some(p) if m[p][c].abs() > tol => {
                m.swap(row, p);
                let pv = m[row][c];
                m[row].iter_mut().for_each(|x| *x /= pv);
                for r in 0..k {
                    if r != row && m[r][c] != 0.0 {
                        let f = m[r][c];
                        for j in c..k {
                            m[r][j] -= f * m[row][j];
                        }
                    }
                }
                pivots.push(c);
                row += 1;
            }
            _ => {
                if free.is_none() {
                    free = Some(c);
                }
            }
        }
    }
    let f = free?;
    let mut x = vec![0.0; k];
    x[f] = 1.0;
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = -m[r][f];
    }
    Some(x)
}

/// Smallest `t > 0` at which some nonzero entry of `x + dir·t·dx` (over
/// both `b` and `a`) reaches zero; also reports which `b` slot hit.
fn first_zero(b: &[f64], db: &[f64], a: &[f64], da: &[f64], dir: f64, eps: f64) -> Option<(f64, Option<usize>)> {
    let mut best: Option<(f64, Option<usize>)> = None;
    let mut consider = |x: f64, dx: f64, slot: Option<usize>| {
        let v = dir * dx;
        if x.abs() > eps && v != 0.0 && x.signum() != v.signum() {
            let t = -x / v;
            if best.map_or(true, |(bt, _)| t < bt) {
                best = Some((t, slot));
            }
        }
    };
    for t in 1..b.len() {
        consider(b[t], db[t], Some(t));
        consider(a[t], da[t], None);
    }
    best
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Fixed data of one problem instance.
struct Problem {
    size: usize,
    g: Vec<f64>,
    solve_b: KronSolver,
    solve_d: Option<KronSolver>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Initial penalty.
    rho: f64,
}

/// A feasible point and its objective.
#[derive(Clone)]
struct Candidate {
    b: Vec<f64>,
    d: Vec<f64>,
    a: Vec<f64>,
    loss: f64,
}

impl Candidate {
    fn support(&self, eps: f64) -> usize {
        self.b.iter().chain(&self.a).filter(|x| x.abs() > eps).count()
    }
}

impl Problem {
    /// Scores `(b, d)`; the empty-set OR slot is cleared.
    fn candidate(&self, b: &[f64], d: &[f64]) -> Candidate {
        self.candidate_with(b, d, None)
    }

    /// As `candidate`, reusing `pb = P b` when the caller has it. The
    /// empty-set slot of `b` only reaches the empty-set slot of `P b`.
    fn candidate_with(&self, b: &[f64], d: &[f64], pb: Option<&[f64]>) -> Candidate {
        let mut b = b.to_vec();
        b[0] = 0.0;
        let mut a = Vec::with_capacity(self.size);
        match pb {
            Some(pb) => a.extend_from_slice(pb),
            None => apply_p(&b, &mut a),
        }
        if d.iter().any(|&x| x != 0.0) {
            let mut md = Vec::with_capacity(self.size);
            apply_m(d, &mut md);
            for ((at, gt), mt) in a.iter_mut().zip(&self.g).zip(&md) {
                *at = gt - mt - *at;
            }
        } else {
            for (at, gt) in a.iter_mut().zip(&self.g) {
                *at = gt - *at;
            }
        }
        a[0] = 0.0;
        let loss = b.iter().chain(&a).map(|x| x.abs()).sum();
        Candidate {
            b,
            d: d.to_vec(),
            a,
            loss,
        }
    }

    /// ADMM from the all-AND point. `visit` sees every feasible iterate;
    /// returns the iteration count.
    fn run(&self, max_iters: usize, eps: f64, mut visit: impl FnMut(&Candidate)) -> Result<usize> {
        let size = self.size;
        let zeros = vec![0.0; size];
        let mut best = self.candidate(&zeros, &zeros);
        visit(&best);
        let mut best_trace = vec![best.loss];

        let mut rho = self.rho;
        let mut b = zeros.clone();
        let mut d = zeros.clone();
        let mut z1 = zeros.clone();
        let mut z2: Vec<f64> = self.g.iter().map(|x| -x).collect();
        let mut z3 = zeros.clone();
        let mut w1 = zeros.clone();
        let mut w2 = zeros.clone();
        let mut w3 = zeros.clone();
        let (mut pb, mut md, mut tmp, mut rhs) = (Vec::new(), zeros.clone(), Vec::new(), Vec::new());
        let mut d_clip = zeros;
        let g = &self.g;
        let mut iterations = 0;

        for it in 1..=max_iters {
            iterations = it;
            // b-update: min |b − (z1 − w1)|² + |P b − (z2 + g − M d − w2)|².
            tmp.clear();
            tmp.extend(z2.iter().zip(g).zip(&md).zip(&w2).map(|(((z, g), m), w)| z + g - m - w));
            apply_pt(&tmp, &mut rhs);
            for (((bt, r), z), w) in b.iter_mut().zip(&rhs).zip(&z1).zip(&w1) {
                *bt = r + z - w;
            }
            self.solve_b.solve(&mut b);
            apply_p(&b, &mut pb);

            if let Some(solve_d) = &self.solve_d {
                tmp.clear();
                tmp.extend(z2.iter().zip(g).zip(&pb).zip(&w2).map(|(((z, g), p), w)| z + g - p - w));
                apply_mt(&tmp, &mut rhs);
                for (((dt, r), z), w) in d.iter_mut().zip(&rhs).zip(&z3).zip(&w3) {
                    *dt = r + z - w;
                }
                solve_d.solve(&mut d);
                apply_m(&d, &mut md);
            }

            let (mut dual_sq, mut primal_sq) = (0.0, 0.0);
            let thresh = 1.0 / rho;
            {
                // Equal-length reslices let the bounds checks fold away.
                let (b, pb, md, g) = (&b[..size], &pb[..size], &md[..size], &g[..size]);
                let (z1, z2) = (&mut z1[..size], &mut z2[..size]);
                let (w1, w2) = (&mut w1[..size], &mut w2[..size]);
                for t in 0..size {
                    let r2 = pb[t] + md[t] - g[t];
                    // The empty-set slots carry no L1 weight.
                    let z1_new = if t == 0 {
                        b[t] + w1[t]
                    } else {
                        soft(b[t] + w1[t], thresh)
                    };
                    let z2_new = if t == 0 { r2 + w2[t] } else { soft(r2 + w2[t], thresh) };
                    dual_sq += (z1_new - z1[t]).powi(2) + (z2_new - z2[t]).powi(2);
                    z1[t] = z1_new;
                    z2[t] = z2_new;
                    w1[t] += b[t] - z1[t];
                    w2[t] += r2 - z2[t];
                    primal_sq += (b[t] - z1[t]).powi(2) + (r2 - z2[t]).powi(2);
                }
            }
            if self.solve_d.is_some() {
                let (d, lo, hi) = (&d[..size], &self.lo[..size], &self.hi[..size]);
                let (z3, w3, d_clip) = (&mut z3[..size], &mut w3[..size], &mut d_clip[..size]);
                for t in 0..size {
                    let z3_new = (d[t] + w3[t]).clamp(lo[t], hi[t]);
                    dual_sq += (z3_new - z3[t]).powi(2);
                    z3[t] = z3_new;
                    w3[t] += d[t] - z3[t];
                    primal_sq += (d[t] - z3[t]).powi(2);
                    d_clip[t] = d[t].clamp(lo[t], hi[t]);
                }
            }

            for cand in [self.candidate(&z1, &z3), self.candidate_with(&b, &d_clip, Some(&pb))] {
                if !cand.loss.is_finite() {
                    return Err(Error::Numerical { iteration: it });
                }
                visit(&cand);
                if cand.loss < best.loss {
                    best = cand;
                }
            }
            best_trace.push(best.loss);

            if it % BALANCE_EVERY == 0 {
                let primal = primal_sq.sqrt();
                let dual = rho * dual_sq.sqrt();
                let factor = if primal > 10.0 * dual {
                    2.0
                } else if dual > 10.0 * primal {
                    0.5
                } else {
                    1.0
                };
                if factor != 1.0 {
                    rho *= factor;
                    for w in [&mut w1, &mut w2, &mut w3] {
                        w.iter_mut().for_each(|x| *x /= factor);
                    }
                }
            }

            if best_trace.len() > WINDOW {
                let then = best_trace[best_trace.len() - 1 - WINDOW];
                if then - best.loss <= eps * best.loss.max(f64::MIN_POSITIVE) {
                    break;
                }
            }
        }
        Ok(iterations)
    }

    /// Moves a feasible point to a vertex of the face of equal-or-lower
    /// loss it lies on, then solves the vertex exactly.
    ///
    /// While the OR support admits a direction that keeps every zero AND
    /// effect at zero, the point slides along it (downhill, or either way
    /// when the loss is flat) until one more OR or AND effect vanishes.
    /// Entries within `eps` of zero count as zero. Returns `None` when the
    /// support is too large to handle or the final support admits no exact
    /// solution within `exact_tol`.
    fn purify(&self, c: &Candidate, eps: f64, exact_tol: f64) -> Option<Candidate> {
        let size = self.size;
        let mut gp = Vec::with_capacity(size);
        apply_m(&c.d, &mut gp);
        for t in 0..size {
            gp[t] = self.g[t] - gp[t];
        }
        let mut b = c.b.clone();
        b[0] = 0.0;
        let mut a = Vec::with_capacity(size);
        let mut unit = vec![0.0; size];
        let mut col = Vec::with_capacity(size);
        for _ in 0..2 * size {
            apply_p(&b, &mut a);
            for t in 0..size {
                a[t] = gp[t] - a[t];
            }
            a[0] = 0.0;
            let cols: Vec<usize> = (1..size).filter(|&t| b[t].abs() > eps).collect();
            if cols.len() > PURIFY_MAX_SUPPORT {
                return None;
            }
            let rows: Vec<usize> = (1..size).filter(|&t| a[t].abs() <= eps).collect();
            // Columns of P restricted to the zero AND rows.
            let basis: Vec<Vec<f64>> = cols
                .iter()
                .map(|&t| {
                    unit[t] = 1.0;
                    apply_p(&unit, &mut col);
                    unit[t] = 0.0;
                    rows.iter().map(|&r| col[r]).collect()
                })
                .collect();
            let k = cols.len();
            let mut normal = vec![vec![0.0; k + 1]; k];
            for i in 0..k {
                for j in i..k {
                    let x = dot(&basis[i], &basis[j]);
                    normal[i][j] = x;
                    normal[j][i] = x;
                }
                normal[i][k] = basis[i].iter().zip(&rows).map(|(p, &r)| p * gp[r]).sum();
            }
            let Some(free) = null_direction(&normal, k) else {
                let x = solve_dense(normal)?;
                let mut exact = vec![0.0; size];
                for (&t, xi) in cols.iter().zip(&x) {
                    exact[t] = *xi;
                }
                let cand = self.candidate(&exact, &c.d);
                return rows.iter().all(|&r| cand.a[r].abs() <= exact_tol).then_some(cand);
            };

            let mut db = vec![0.0; size];
            for (&t, x) in cols.iter().zip(&free) {
                db[t] = *x;
            }
            let mut da = Vec::with_capacity(size);
            apply_p(&db, &mut da);
            da.iter_mut().for_each(|x| *x = -*x);
            for &r in &rows {
                da[r] = 0.0;
            }
            da[0] = 0.0;
            let slope: f64 = (1..size).map(|t| b[t].signum() * db[t] + a[t].signum() * da[t]).sum();
            let mut dir = if slope > 0.0 { -1.0 } else { 1.0 };
            let mut step = first_zero(&b, &db, &a, &da, dir, eps);
            if step.is_none() && slope.abs() <= exact_tol {
                dir = -dir;
                step = first_zero(&b, &db, &a, &da, dir, eps);
            }
            let (t_step, hit_b) = step?;
            for t in 1..size {
                b[t] += dir * t_step * db[t];
            }
            if let Some(t) = hit_b {
                b[t] = 0.0;
            }
            for &t in &cols {
                if b[t].abs() <= eps {
                    b[t] = 0.0;
                }
            }
        }
        None
    }
}

/// Searches for the decomposition with the sparsest AND-OR effects.
///
/// ADMM drives the L1 loss down from the all-AND point; the best iterate is
/// then purified to a vertex, which settles ties between equal-loss optima
/// in favour of a smaller support. The result never exceeds the loss of
/// the even split (the starting incumbent) or of the all-AND split (the
/// first scored candidate).
pub fn sparsify(v: &ValueTable, cfg: &SparsifyConfig) -> Result<SparsifyResult> {
    cfg.validate()?;
    let n = v.n();
    if n > MAX_SPARSIFY_VARIABLES {
        return Err(Error::size(format!(
            "sparsify supports at most {MAX_SPARSIFY_VARIABLES} variables, got {n}"
        )));
    }
    let size = 1usize << n;
    let zeta = cfg.zeta_fraction * v.gap().abs();
    let even = Decomposition::even_split(v, zeta);
    let even_set = extract(v, &even)?;
    let mut history = vec![even_set.l1_loss()];
    if !history[0].is_finite() {
        return Err(Error::Numerical { iteration: 0 });
    }

    let v0 = v.empty_value();
    let scale = v.values().values().iter().fold(0.0f64, |m, x| m.max((x - v0).abs()));
    if cfg.max_iters == 0 || scale == 0.0 {
        return Ok(SparsifyResult {
            decomposition: even,
            set: even_set,
            loss_history: history,
            iterations: 0,
        });
    }

    let mut g = v.values().values().to_vec();
    mobius_in_place(&mut g);
    g[0] = 0.0;
    let (lo, hi) = (0..size)
        .map(|l| if l == 0 { (0.0, 0.0) } else { (-zeta, zeta) })
        .unzip();
    let problem = Problem {
        size,
        g,
        solve_b: KronSolver::new([[1.0, 1.0], [1.0, 2.0]], n),
        solve_d: cfg.denoise.then(|| KronSolver::new([[2.0, -1.0], [-1.0, 1.0]], n)),
        lo,
        hi,
        rho: 1.0 / (cfg.step_size * scale),
    };

    // Even split in (b, d) coordinates.
    let mut half = v.values().scale(0.5).into_values();
    half[0] = 0.0;
    let b_even = mobius_or(&LatticeVector::from_parts(n, half))?.into_values();
    let zeros = vec![0.0; size];
    let mut best = problem.candidate(&b_even, &zeros);
    best.loss = history[0];
    let ceiling = problem.candidate(&zeros, &zeros).loss.min(history[0]);

    let iterations = problem.run(cfg.max_iters, cfg.convergence_eps, |c| {
        if c.loss < best.loss {
            best = c.clone();
        }
        history.push(best.loss);
    })?;

    let support_eps = SUPPORT_FRACTION * scale;
    if let Some(vertex) = problem.purify(&best, PURIFY_FRACTION * scale, support_eps) {
        let tie = vertex.loss <= best.loss * (1.0 + TIE_TOLERANCE)
            && vertex.loss <= ceiling
            && vertex.support(support_eps) < best.support(support_eps);
        if vertex.loss < best.loss || tie {
            best = vertex;
        }
    }
    if best.loss < *history.last().unwrap() {
        history.push(best.loss);
    }

    // A singleton OR effect is the same function as the singleton AND
    // effect; moving it to AND never raises the loss.
    let mut b = best.b;
    for i in 0..n {
        b[1 << i] = 0.0;
    }
    let u_or = or_synthesis(&LatticeVector::from_parts(n, b))?;
    let delta = LatticeVector::from_parts(n, best.d);
    let decomposition = Decomposition::from_or_component(v, &u_or, delta, zeta)?;
    let set = extract(v, &decomposition)?;
    let loss = set.l1_loss();
    if !loss.is_finite() {
        return Err(Error::Numerical { iteration: iterations });
    }
    if loss < *history.last().unwrap() {
        history.push(loss);
    }
    Ok(SparsifyResult {
        decomposition,
        set,
        loss_history: history,
        iterations,
    })
}
