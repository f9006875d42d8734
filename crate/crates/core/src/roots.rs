//! Zeros of the characteristic function in the open left half-plane.
//!
//! The only global tool is the argument principle: the winding number of D
//! along a rectangle boundary counts zeros minus poles inside. Rectangles are
//! subdivided in order of their distance from the origin, pruned where cheap
//! magnitude bounds prove D cannot vanish, censused otherwise, and polished
//! with Newton once they isolate a single zero. Conjugate symmetry halves the
//! work: only the upper half-plane is searched and pairs are mirrored.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::cx::{cabs, carg, re, C};
use crate::scalar::Scalar;
use crate::transforms::{CharacteristicFunction, TransformError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum RootError {
    #[error("contour passes too close to a zero or pole near {re}{im:+}i")]
    BoundaryTooClose { re: f64, im: f64 },
    #[error("winding number {winding} did not stabilize to an integer")]
    NonIntegerWinding { winding: f64 },
    #[error("multiple (or unresolvably close) root near {re}{im:+}i: |D'| = {dprime_mag:.3e}")]
    MultipleRootDetected { re: f64, im: f64, dprime_mag: f64 },
    #[error("search exhausted at radius {radius} with {found} roots")]
    SearchExhausted { radius: f64, found: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Axis-aligned search rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<S> {
    pub x0: S,
    pub x1: S,
    pub y0: S,
    pub y1: S,
}

impl<S: Scalar> Rect<S> {
    pub fn new(x0: S, x1: S, y0: S, y1: S) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> S {
        self.x1 - self.x0
    }

    pub fn height(&self) -> S {
        self.y1 - self.y0
    }

    pub fn diag(&self) -> S {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> C<S> {
        C::new(
            (self.x0 + self.x1) * S::from_f64(0.5),
            (self.y0 + self.y1) * S::from_f64(0.5),
        )
    }

    pub fn contains(&self, z: C<S>, slack: S) -> bool {
        z.re >= self.x0 - slack
            && z.re <= self.x1 + slack
            && z.im >= self.y0 - slack
            && z.im <= self.y1 + slack
    }

    /// Distance from the origin to the rectangle (0 if it contains 0).
    pub fn min_modulus(&self) -> S {
        let dx = if self.x0 > S::zero() {
            self.x0
        } else if self.x1 < S::zero() {
            -self.x1
        } else {
            S::zero()
        };
        let dy = if self.y0 > S::zero() {
            self.y0
        } else if self.y1 < S::zero() {
            -self.y1
        } else {
            S::zero()
        };
        dx.hypot(dy)
    }
}

/// One certified zero.
#[derive(Clone, Copy, Debug)]
pub struct Root<S> {
    pub location: C<S>,
    pub dprime: C<S>,
    /// |D| at the polished location.
    pub residual: S,
    /// Index of the conjugate partner within the set, for non-real roots.
    pub paired_index: Option<usize>,
}

/// Zeros of D in the open left half-plane, ordered by modulus (ties by
/// ascending argument), conjugate-closed.
#[derive(Clone, Debug)]
pub struct RootSet<S> {
    pub roots: Vec<Root<S>>,
    pub search_region: Rect<S>,
    /// True when the census bookkeeping proves no zero inside
    /// `search_region` was missed.
    pub exhaustive: bool,
}

impl<S: Scalar> RootSet<S> {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Tunables for the search. Defaults cover every catalog system with margin;
/// all of them are overridable from run configurations.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Margin kept to the right of every accepted root: Re z < -epsilon.
    pub epsilon: f64,
    /// Dip of the bottom edge below the real axis, so real zeros are interior.
    pub axis_dip: f64,
    /// Roots with |Im z| below this are snapped onto the real axis.
    pub snap_tol: f64,
    /// Initial half-width of the search square; derived from the system when
    /// absent.
    pub initial_radius: Option<f64>,
    pub max_radius: f64,
    /// Accept a polished root when |D| <= root_tol * (lambda1 + lambda2).
    pub root_tol: f64,
    /// Simplicity certificate: reject when |D'(z)| < simple_tol.
    pub simple_tol: f64,
    /// Cells are censused only once their diagonal is below this.
    pub census_diag: f64,
    /// Newton polishing starts once a counted cell is this small.
    pub polish_diag: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            epsilon: 1e-9,
            axis_dip: 1e-6,
            snap_tol: 1e-8,
            initial_radius: None,
            max_radius: 1e4,
            root_tol: 1e-11,
            simple_tol: 1e-8,
            census_diag: 8.0,
            polish_diag: 0.5,
        }
    }
}

impl SearchOptions {
    fn default_radius<S: Scalar>(&self, cf: &CharacteristicFunction<S>) -> S {
        if let Some(r) = self.initial_radius {
            return S::from_f64(r);
        }
        let premium = cf.system().premium();
        let scale = match premium {
            crate::model::DistributionSpec::DiscreteMixture { atoms } => atoms[0].value,
            crate::model::DistributionSpec::PointMass { value } => *value,
            _ => premium.mean(),
        };
        let denom = scale.min(S::one()).max(S::from_f64(1e-3));
        let r = S::from_f64(10.0) * cf.intensity().max(S::one()) / denom;
        r.min(S::from_f64(self.max_radius))
    }
}

fn wrap_angle(d: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    d - two_pi * (d / two_pi).round()
}

/// Conservative bound on how fast arg D can rotate per unit length, away
/// from zeros. Drives the initial boundary sampling density; local wildness
/// is handled by adaptive refinement on top.
fn phase_rate_bound<S: Scalar>(cf: &CharacteristicFunction<S>, rect: &Rect<S>) -> f64 {
    use crate::model::DistributionSpec as Ds;
    let sys = cf.system();
    let mut rate = 1.0f64;
    let support_max = |spec: &Ds<S>| -> f64 {
        match spec {
            Ds::DiscreteMixture { atoms } => atoms.last().map(|a| a.value.to_f64()).unwrap_or(0.0),
            Ds::PointMass { value } => value.to_f64(),
            Ds::Uniform { upper, .. } => upper.to_f64(),
            Ds::Exponential { .. } | Ds::Gamma { .. } => 0.0, // pole term below
            Ds::HalfNormal { sigma } | Ds::Maxwell { sigma } => {
                let s = sigma.to_f64();
                let coord = rect
                    .x0
                    .abs()
                    .max(rect.x1.abs())
                    .max(rect.y0.abs())
                    .max(rect.y1.abs())
                    .to_f64();
                return s * s * coord + 2.0;
            }
        }
    };
    rate += support_max(sys.premium());
    rate += support_max(sys.claim());
    for p in cf.poles() {
        let px = p.location;
        let dx = if px < rect.x0 {
            rect.x0 - px
        } else if px > rect.x1 {
            px - rect.x1
        } else {
            S::zero()
        };
        let dy = if rect.y0 > S::zero() {
            rect.y0
        } else if rect.y1 < S::zero() {
            -rect.y1
        } else {
            S::zero()
        };
        let dist = dx.hypot(dy).to_f64().max(1e-8);
        rate += p.order as f64 / dist;
    }
    rate
}

struct EdgeWalk<'a, S: Scalar> {
    cf: &'a CharacteristicFunction<S>,
}

impl<'a, S: Scalar> EdgeWalk<'a, S> {
    fn arg_at(&self, s: C<S>) -> Result<S, RootError> {
        let v = self.cf.eval_scaled(s).map_err(|e| match e {
            TransformError::PoleHit { pole_re, pole_im, .. } => RootError::BoundaryTooClose {
                re: pole_re,
                im: pole_im,
            },
            other => RootError::Transform(other),
        })?;
        let m = cabs(v.mantissa);
        if m == S::zero() || !m.is_finite() {
            return Err(RootError::BoundaryTooClose { re: s.re.to_f64(), im: s.im.to_f64() });
        }
        Ok(carg(v.mantissa))
    }

    /// Total change of arg D along the straight segment, in radians.
    fn segment_turn(&self, p0: C<S>, p1: C<S>, samples: usize) -> Result<f64, RootError> {
        let n = samples.max(2);
        let mut total = 0.0f64;
        let step = (p1 - p0) / re(S::from_f64(n as f64));
        let mut prev_pt = p0;
        let mut prev = self.arg_at(p0)?;
        for i in 1..=n {
            let pt = if i == n { p1 } else { p0 + step * S::from_f64(i as f64) };
            let phi = self.arg_at(pt)?;
            total += self.refine(prev_pt, prev, pt, phi, 0)?;
            prev = phi;
            prev_pt = pt;
        }
        Ok(total)
    }

    /// Midpoint-verified phase increment between two boundary samples.
    fn refine(&self, p0: C<S>, phi0: S, p1: C<S>, phi1: S, depth: u32) -> Result<f64, RootError> {
        let mid = (p0 + p1) * re(S::from_f64(0.5));
        if depth > 64 || (mid == p0 || mid == p1) {
            return Err(RootError::BoundaryTooClose {
                re: mid.re.to_f64(),
                im: mid.im.to_f64(),
            });
        }
        let phim = self.arg_at(mid)?;
        let d1 = wrap_angle((phim - phi0).to_f64());
        let d2 = wrap_angle((phi1 - phim).to_f64());
        const LIMIT: f64 = 1.8;
        let left = if d1.abs() <= LIMIT {
            d1
        } else {
            self.refine(p0, phi0, mid, phim, depth + 1)?
        };
        let right = if d2.abs() <= LIMIT {
            d2
        } else {
            self.refine(mid, phim, p1, phi1, depth + 1)?
        };
        Ok(left + right)
    }

    fn rect_winding(&self, rect: &Rect<S>, rate: f64) -> Result<f64, RootError> {
        let corners = [
            C::new(rect.x0, rect.y0),
            C::new(rect.x1, rect.y0),
            C::new(rect.x1, rect.y1),
            C::new(rect.x0, rect.y1),
        ];
        let mut total = 0.0;
        for e in 0..4 {
            let p0 = corners[e];
            let p1 = corners[(e + 1) % 4];
            let len = cabs(p1 - p0).to_f64();
            let n = ((len * rate / 0.7).ceil() as usize).clamp(4, 4_000_000);
            total += self.segment_turn(p0, p1, n)?;
        }
        Ok(total / (2.0 * std::f64::consts::PI))
    }
}

/// Argument-principle census of a rectangle: number of zeros minus poles
/// (with multiplicity) of D strictly inside. The boundary is nudged away
/// from catalog poles; a zero sitting on the boundary triggers a retry with
/// slightly dilated edges and eventually `BoundaryTooClose`.
pub fn census<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    rect: Rect<S>,
) -> Result<i64, RootError> {
    let mut r = rect;
    // keep edges off the real-axis poles
    for p in cf.poles() {
        let gap = S::from_f64(1e-8) * p.location.abs().max(S::one());
        for edge in [&mut r.x0, &mut r.x1] {
            if (*edge - p.location).abs() < gap {
                *edge -= gap + gap;
            }
        }
        if p.location > r.x0 && p.location < r.x1 {
            for edge in [&mut r.y0, &mut r.y1] {
                if edge.abs() < gap {
                    *edge += if *edge >= S::zero() { gap + gap } else { -(gap + gap) };
                }
            }
        }
    }

    let walker = EdgeWalk { cf };
    let mut dilation = 0.0f64;
    for attempt in 0..5 {
        let mut probe = r;
        if attempt > 0 {
            dilation = if dilation == 0.0 { 1e-7 } else { dilation * 13.0 };
            let dx = probe.width() * S::from_f64(dilation);
            let dy = probe.height() * S::from_f64(dilation);
            probe.x0 -= dx;
            probe.x1 += dx;
            probe.y0 -= dy;
            probe.y1 += dy;
        }
        let rate = phase_rate_bound(cf, &probe);
        match walker.rect_winding(&probe, rate) {
            Ok(w) => {
                let rounded = w.round();
                if (w - rounded).abs() > 1e-3 {
                    return Err(RootError::NonIntegerWinding { winding: w });
                }
                return Ok(rounded as i64);
            }
            Err(RootError::BoundaryTooClose { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(RootError::BoundaryTooClose { re: r.x0.to_f64(), im: r.y0.to_f64() })
}

struct Cell<S> {
    rect: Rect<S>,
    min_mod: f64,
    seq: u64,
}

impl<S> PartialEq for Cell<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key() == other.cmp_key()
    }
}
impl<S> Eq for Cell<S> {}

impl<S> Cell<S> {
    fn cmp_key(&self) -> (u64, u64) {
        // total order on (min_mod, seq); min_mod is finite non-negative
        (self.min_mod.to_bits(), self.seq)
    }
}

impl<S> Ord for Cell<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for nearest-first popping
        other.cmp_key().cmp(&self.cmp_key())
    }
}
impl<S> PartialOrd for Cell<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct FoundRoot<S> {
    z: C<S>,
    dprime: C<S>,
    residual: S,
}

struct Engine<'a, S: Scalar> {
    cf: &'a CharacteristicFunction<S>,
    opts: SearchOptions,
    queue: BinaryHeap<Cell<S>>,
    found: Vec<FoundRoot<S>>,
    /// Moduli counting conjugate mirrors, sorted ascending.
    expanded: Vec<f64>,
    target: Option<usize>,
    cutoff_pruned: bool,
    dedupe_collision: bool,
    seq: u64,
    cells_processed: u64,
}

impl<'a, S: Scalar> Engine<'a, S> {
    fn new(cf: &'a CharacteristicFunction<S>, opts: SearchOptions, target: Option<usize>) -> Self {
        Engine {
            cf,
            opts,
            queue: BinaryHeap::new(),
            found: Vec::new(),
            expanded: Vec::new(),
            target,
            cutoff_pruned: false,
            dedupe_collision: false,
            seq: 0,
            cells_processed: 0,
        }
    }

    fn push(&mut self, rect: Rect<S>) {
        self.seq += 1;
        self.queue.push(Cell { min_mod: rect.min_modulus().to_f64(), seq: self.seq, rect });
    }

    fn tol_abs(&self) -> S {
        S::from_f64(self.opts.root_tol) * self.cf.intensity()
    }

    /// Modulus of the target-th smallest root counting mirrors.
    fn cutoff(&self) -> Option<f64> {
        let k = self.target?;
        if self.expanded.len() >= k {
            Some(self.expanded[k - 1])
        } else {
            None
        }
    }

    fn record(&mut self, z: C<S>, dprime: C<S>, residual: S) -> bool {
        let tol = S::from_f64(1e-8) * (S::one() + cabs(z));
        if self
            .found
            .iter()
            .any(|r| cabs(r.z - z) < tol)
        {
            self.dedupe_collision = true;
            return false;
        }
        let m = cabs(z).to_f64();
        self.expanded.push(m);
        if z.im > S::zero() {
            self.expanded.push(m);
        }
        self.expanded.sort_by(f64::total_cmp);
        self.found.push(FoundRoot { z, dprime, residual });
        true
    }

    /// True when the magnitude bounds prove D has no zero in the rectangle.
    fn provably_zero_free(&self, rect: &Rect<S>) -> bool {
        let base = self.cf.intensity().ln();
        let prem_hi = self.cf.premium_log_bound(rect.x1);
        let (cl_lo, cl_hi) = self.cf.claim_log_bounds(rect.x0, rect.x1, rect.y0, rect.y1);
        // |lambda1 M_C + lambda2 L| < (lambda1 + lambda2): no zero
        let parts_hi = log_sum_exp_f(prem_hi.to_f64(), cl_hi.to_f64());
        if parts_hi < base.to_f64() - 1e-9 {
            return true;
        }
        // lambda2 |L| > (lambda1 + lambda2) + lambda1 |M_C|: claim term dominates
        let rest_hi = log_sum_exp_f(base.to_f64(), prem_hi.to_f64());
        if cl_lo.to_f64() > rest_hi + 1e-9 {
            return true;
        }
        false
    }

    fn zeros_in(&self, rect: &Rect<S>) -> Result<i64, RootError> {
        let winding = census(self.cf, *rect)?;
        let poles = self.cf.pole_count_in(rect.x0, rect.x1, rect.y0, rect.y1);
        let zeros = winding + poles;
        if zeros < 0 {
            return Err(RootError::NonIntegerWinding { winding: zeros as f64 });
        }
        Ok(zeros)
    }

    fn newton(&self, seed: C<S>) -> Option<(C<S>, C<S>, S)> {
        let tol = self.tol_abs();
        let mut z = seed;
        let escape = cabs(seed) * S::from_f64(4.0) + S::from_f64(16.0);
        for _ in 0..80 {
            let d = self.cf.eval(z).ok()?;
            let dp = self.cf.eval_prime(z).ok()?;
            if !crate::cx::is_finite_c(d) || !crate::cx::is_finite_c(dp) || cabs(dp) == S::zero() {
                return None;
            }
            let step = d / dp;
            z -= step;
            if cabs(z) > escape {
                return None;
            }
            if cabs(step) <= S::eps() * (S::one() + cabs(z)) * S::from_f64(8.0) {
                break;
            }
        }
        let d = self.cf.eval(z).ok()?;
        if cabs(d) > tol {
            return None;
        }
        let dp = self.cf.eval_prime(z).ok()?;
        Some((z, dp, cabs(d)))
    }

    /// Attempts to pull `zeros` roots out of a small counted cell. Returns
    /// true when the cell is fully resolved.
    fn harvest(&mut self, rect: &Rect<S>, zeros: i64) -> Result<bool, RootError> {
        if zeros != 1 {
            return Ok(false);
        }
        let slack = rect.diag() * S::from_f64(0.1);
        let seeds = [
            rect.center(),
            C::new(
                rect.x0 + rect.width() * S::from_f64(0.25),
                rect.y0 + rect.height() * S::from_f64(0.25),
            ),
            C::new(
                rect.x0 + rect.width() * S::from_f64(0.75),
                rect.y0 + rect.height() * S::from_f64(0.75),
            ),
            C::new(
                rect.x0 + rect.width() * S::from_f64(0.25),
                rect.y0 + rect.height() * S::from_f64(0.75),
            ),
        ];
        for seed in seeds {
            let Some((mut z, mut dp, mut res)) = self.newton(seed) else {
                continue;
            };
            if !rect.contains(z, slack) {
                continue;
            }
            if z.re >= -S::from_f64(self.opts.epsilon) * S::from_f64(0.5) {
                continue; // the removable zero at the origin, or out of domain
            }
            // snap near-real roots onto the axis and re-polish there
            if z.im.abs() < S::from_f64(self.opts.snap_tol) && z.im != S::zero() {
                let seed_real = C::new(z.re, S::zero());
                if let Some((zr, dpr, rr)) = self.newton(seed_real) {
                    if zr.im == S::zero() {
                        z = zr;
                        dp = dpr;
                        res = rr;
                    }
                }
                z = C::new(z.re, S::zero());
            }
            // fold lower-half finds onto their upper representative
            if z.im < S::zero() {
                z = z.conj();
                dp = dp.conj();
            }
            if cabs(dp) < S::from_f64(self.opts.simple_tol) {
                return Err(RootError::MultipleRootDetected {
                    re: z.re.to_f64(),
                    im: z.im.to_f64(),
                    dprime_mag: cabs(dp).to_f64(),
                });
            }
            self.record(z, dp, res);
            return Ok(true);
        }
        Ok(false)
    }

    fn split(&mut self, rect: &Rect<S>) -> Result<(), RootError> {
        let walker = EdgeWalk { cf: self.cf };
        let vertical = rect.width() > rect.height(); // split the longer side
        for frac in [0.5, 0.53, 0.44, 0.61, 0.37] {
            let f = S::from_f64(frac);
            let (a, b) = if vertical {
                let xm = rect.x0 + rect.width() * f;
                // keep split lines off the real-axis poles
                if self
                    .cf
                    .poles()
                    .iter()
                    .any(|p| (p.location - xm).abs() < S::from_f64(1e-7) * p.location.abs().max(S::one()))
                {
                    continue;
                }
                (
                    Rect::new(rect.x0, xm, rect.y0, rect.y1),
                    Rect::new(xm, rect.x1, rect.y0, rect.y1),
                )
            } else {
                let ym = rect.y0 + rect.height() * f;
                (
                    Rect::new(rect.x0, rect.x1, rect.y0, ym),
                    Rect::new(rect.x0, rect.x1, ym, rect.y1),
                )
            };
            // pre-verify the new internal edge so child censuses cannot
            // disagree about a zero sitting on it
            let (p0, p1) = if vertical {
                (C::new(a.x1, rect.y0), C::new(a.x1, rect.y1))
            } else {
                (C::new(rect.x0, a.y1), C::new(rect.x1, a.y1))
            };
            let rate = phase_rate_bound(self.cf, rect);
            let len = cabs(p1 - p0).to_f64();
            let n = ((len * rate / 0.7).ceil() as usize).clamp(4, 4_000_000);
            if walker.segment_turn(p0, p1, n).is_ok() {
                self.push(a);
                self.push(b);
                return Ok(());
            }
        }
        Err(RootError::BoundaryTooClose {
            re: rect.center().re.to_f64(),
            im: rect.center().im.to_f64(),
        })
    }

    fn run(&mut self) -> Result<(), RootError> {
        while let Some(cell) = self.queue.pop() {
            self.cells_processed += 1;
            if self.cells_processed > 3_000_000 {
                return Err(RootError::SearchExhausted {
                    radius: cell.min_mod,
                    found: self.found.len(),
                });
            }
            let rect = cell.rect;
            if self.provably_zero_free(&rect) {
                continue;
            }
            if let Some(m) = self.cutoff() {
                if cell.min_mod > m * (1.0 + 1e-9) + 1e-12 {
                    self.cutoff_pruned = true;
                    continue;
                }
            }
            if rect.diag().to_f64() > self.opts.census_diag {
                self.split(&rect)?;
                continue;
            }
            let zeros = self.zeros_in(&rect)?;
            if zeros == 0 {
                continue;
            }
            if rect.diag().to_f64() <= self.opts.polish_diag && self.harvest(&rect, zeros)? {
                continue;
            }
            if rect.diag().to_f64() < 1e-9 {
                // a counted cluster this tight that Newton cannot separate is
                // treated as a multiple root; the linear system needs simple
                // zeros
                let ctr = rect.center();
                let dp = self.cf.eval_prime(ctr).unwrap_or_else(|_| re(S::zero()));
                return Err(RootError::MultipleRootDetected {
                    re: ctr.re.to_f64(),
                    im: ctr.im.to_f64(),
                    dprime_mag: cabs(dp).to_f64(),
                });
            }
            self.split(&rect)?;
        }
        Ok(())
    }
}

fn log_sum_exp_f(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if !hi.is_finite() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Orders, mirrors and wraps the found upper-half roots into a `RootSet`.
fn assemble_root_set<S: Scalar>(
    found: &[FoundRoot<S>],
    region: Rect<S>,
    exhaustive: bool,
    k: Option<usize>,
) -> RootSet<S> {
    let mut all: Vec<Root<S>> = Vec::with_capacity(found.len() * 2);
    for f in found {
        if f.z.im == S::zero() {
            all.push(Root { location: f.z, dprime: f.dprime, residual: f.residual, paired_index: None });
        } else {
            all.push(Root {
                location: f.z.conj(),
                dprime: f.dprime.conj(),
                residual: f.residual,
                paired_index: None,
            });
            all.push(Root { location: f.z, dprime: f.dprime, residual: f.residual, paired_index: None });
        }
    }
    // modulus order, ties by ascending argument
    all.sort_by(|a, b| {
        let (ma, mb) = (cabs(a.location).to_f64(), cabs(b.location).to_f64());
        ma.total_cmp(&mb)
            .then_with(|| carg(a.location).to_f64().total_cmp(&carg(b.location).to_f64()))
    });
    if let Some(k) = k {
        // never cut a conjugate pair in half
        let mut keep = k.min(all.len());
        if keep > 0 && keep < all.len() {
            let last = all[keep - 1].location;
            let next = all[keep].location;
            let tol = S::from_f64(1e-12) * (S::one() + cabs(last));
            if last.im != S::zero() && cabs(next - last.conj()) <= tol {
                keep += 1;
            }
        }
        all.truncate(keep);
    }
    // re-link conjugate partners after sorting/truncation
    let locs: Vec<C<S>> = all.iter().map(|r| r.location).collect();
    for (i, r) in all.iter_mut().enumerate() {
        if r.location.im == S::zero() {
            continue;
        }
        let want = r.location.conj();
        r.paired_index = locs
            .iter()
            .position(|&z| {
                let tol = S::from_f64(1e-12) * (S::one() + cabs(z));
                cabs(z - want) <= tol
            })
            .filter(|&j| j != i);
    }
    RootSet { roots: all, search_region: region, exhaustive }
}

/// Finds (at least) the first `k` zeros of D in the open left half-plane,
/// ordered by modulus: expanding-square search with census subdivision,
/// Newton polishing and conjugate mirroring. `exhaustive` is set when the
/// bookkeeping proves the returned roots are all there are inside the final
/// search region.
pub fn locate_roots<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    k: usize,
    opts: &SearchOptions,
) -> Result<RootSet<S>, RootError> {
    let eps = S::from_f64(opts.epsilon);
    // dip far enough below the axis that the census never needs to nudge
    // edges off the real-axis poles (which would skew the pole bookkeeping)
    let pole_scale = cf
        .poles()
        .iter()
        .fold(S::one(), |acc, p| acc.max(p.location.abs()));
    let eta = S::from_f64(opts.axis_dip).max(S::from_f64(3e-8) * pole_scale);
    let mut radius = opts.default_radius(cf);
    // keep the outer edges off the poles as well
    for p in cf.poles() {
        if (radius - p.location.abs()).abs() < S::from_f64(1e-6) * pole_scale {
            radius += S::from_f64(1e-3);
        }
    }
    let max_radius = S::from_f64(opts.max_radius);

    let mut engine = Engine::new(cf, *opts, Some(k.max(1)));
    let mut region = Rect::new(-radius, -eps, -eta, radius);
    engine.push(region);

    loop {
        engine.run()?;
        let have: usize = engine
            .found
            .iter()
            .map(|f| if f.z.im > S::zero() { 2 } else { 1 })
            .sum();
        if have >= k || radius >= max_radius {
            break;
        }
        // grow the square and enqueue the new L-shaped margin
        let new_radius = (radius * S::from_f64(2.0)).min(max_radius);
        engine.push(Rect::new(-new_radius, -radius, -eta, new_radius));
        engine.push(Rect::new(-radius, -eps, radius, new_radius));
        region = Rect::new(-new_radius, -eps, -eta, new_radius);
        radius = new_radius;
    }

    let exhaustive = !engine.cutoff_pruned && !engine.dedupe_collision;
    Ok(assemble_root_set(&engine.found, region, exhaustive, Some(k)))
}

/// All zeros of D strictly inside `rect` (upper representatives mirrored
/// only when the rectangle reaches below the axis). Used for confirmation
/// sweeps; `rect` must stay inside the left half-plane.
pub fn zeros_in_rect<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    rect: Rect<S>,
    opts: &SearchOptions,
) -> Result<Vec<Root<S>>, RootError> {
    let mut engine = Engine::new(cf, *opts, None);
    engine.push(rect);
    engine.run()?;
    Ok(assemble_root_set(&engine.found, rect, true, None).roots)
}

/// The largest strictly negative real zero of D, if one exists: grid scan
/// with sign-change bisection between the rightmost claim pole (or the
/// claim-dominance bound) and -epsilon, then a thin census strip to confirm
/// nothing nearer to the origin was missed.
pub fn rightmost_negative_real_root<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    opts: &SearchOptions,
) -> Result<Option<S>, RootError> {
    let eps = S::from_f64(opts.epsilon);
    let right = -eps;

    // left end of the scan: rightmost pole in the left half-plane, else
    // where the claim term provably dominates, else the search radius
    let mut left = -opts.default_radius(cf).min(S::from_f64(opts.max_radius));
    for p in cf.poles() {
        if p.location < S::zero() && p.location > left {
            left = p.location + p.location.abs() * S::from_f64(1e-9) + S::from_f64(1e-12);
        }
    }
    if cf.poles().iter().all(|p| p.location >= S::zero()) {
        // walk leftward until provably zero-free (Gaussian-type claims)
        let mut x = -S::one();
        for _ in 0..60 {
            let probe = Rect::new(x, x * S::from_f64(0.5), -S::from_f64(1e-3), S::from_f64(1e-3));
            if x <= left {
                break;
            }
            let base = cf.intensity().ln().to_f64();
            let prem = cf.premium_log_bound(probe.x1).to_f64();
            let (cl_lo, _) = cf.claim_log_bounds(probe.x0, probe.x1, probe.y0, probe.y1);
            if cl_lo.to_f64() > log_sum_exp_f(base, prem) + 1e-9 {
                left = x;
                break;
            }
            x *= S::from_f64(2.0);
        }
    }
    if !(left < right) {
        return Ok(None);
    }

    let d_real = |x: S| -> Result<S, RootError> {
        Ok(cf.eval(C::new(x, S::zero()))?.re)
    };

    let n = 4096;
    let step = (right - left) / S::from_f64(n as f64);
    let mut best: Option<S> = None;
    let mut prev_x = left;
    let mut prev_v = d_real(prev_x)?;
    for i in 1..=n {
        let x = if i == n { right } else { left + step * S::from_f64(i as f64) };
        let v = d_real(x)?;
        if (prev_v <= S::zero()) != (v <= S::zero()) {
            // bisect, then polish
            let (mut lo, mut hi) = (prev_x, x);
            let (mut flo, _) = (prev_v, v);
            for _ in 0..200 {
                let mid = (lo + hi) * S::from_f64(0.5);
                if mid == lo || mid == hi {
                    break;
                }
                let fm = d_real(mid)?;
                if (flo <= S::zero()) == (fm <= S::zero()) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let root = (lo + hi) * S::from_f64(0.5);
            if best.is_none() || root > best.unwrap() {
                best = Some(root);
            }
        }
        prev_x = x;
        prev_v = v;
    }

    let Some(r) = best else {
        return Ok(None);
    };

    // confirmation strip between the root and the axis margin
    let gap = r.abs() * S::from_f64(1e-6) + S::from_f64(1e-9);
    let strip = Rect::new(r + gap, right, -S::from_f64(1e-3), S::from_f64(1e-3));
    if strip.x0 < strip.x1 {
        let extra = zeros_in_rect(cf, strip, opts)?;
        let nearer = extra
            .iter()
            .filter(|z| z.location.im == S::zero() && z.location.re > r)
            .map(|z| z.location.re)
            .fold(None::<S>, |acc, x| Some(acc.map_or(x, |a| a.max(x))));
        if let Some(x) = nearer {
            return Ok(Some(x));
        }
    }
    Ok(Some(r))
}
