//! Level-by-level constants of the recursive strategy.
//!
//! Level 1 runs straight away from the first lion. Every level `n >= 2`
//! follows milestones on the level `n-1` path and dodges lion `n`; its
//! constants are derived in a fixed order:
//!
//! `eps_n -> delta_n -> ell, p -> r -> rho, theta, phi -> sigma_n -> tau, rho', c_n`
//!
//! [`certify`] re-substitutes every defining relation and reports the slack
//! of each one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;
use crate::scalar::{rel_diff, Scalar};
use crate::verdict::{Residual, Verdict};

/// Relative tolerance used when re-substituting the cascade relations.
pub const CERTIFY_REL_TOL: f64 = 1e-12;

/// Required ratio between `sigma_n` and the coordinate ulp.
pub const PRECISION_HEADROOM: f64 = 1e6;

/// Fraction of the feasible supremum taken for `sigma_n`.
pub const SIGMA_SHRINK: f64 = 0.99;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error(
        "precision guard tripped at level {level}: sigma = {sigma:e} is below {required:e} \
         (1e6 ulp of the largest coordinate); use extended precision"
    )]
    Precision {
        level: usize,
        sigma: f64,
        required: f64,
    },
}

/// Man start, ordered lion starts and the man's speed surplus.
#[derive(Clone, Debug, PartialEq)]
pub struct StartConfiguration<S> {
    pub man_start: Point2<S>,
    pub lion_starts: Vec<Point2<S>>,
    pub eps: S,
}

impl<S: Scalar> StartConfiguration<S> {
    pub fn new(
        man_start: Point2<S>,
        lion_starts: Vec<Point2<S>>,
        eps: S,
    ) -> Result<Self, ParamError> {
        if !(eps > S::zero() && eps < S::one()) {
            return Err(ParamError::Domain(format!(
                "eps must lie in (0, 1), got {eps}"
            )));
        }
        if !man_start.is_finite() {
            return Err(ParamError::Domain("man start must be finite".into()));
        }
        for (i, l) in lion_starts.iter().enumerate() {
            if !l.is_finite() {
                return Err(ParamError::Domain(format!(
                    "lion {} start must be finite",
                    i + 1
                )));
            }
            if *l == man_start {
                return Err(ParamError::Domain(format!(
                    "lion {} starts on the man; every lion must start away from m_0",
                    i + 1
                )));
            }
        }
        Ok(Self {
            man_start,
            lion_starts,
            eps,
        })
    }

    /// Largest absolute coordinate among all start points.
    pub fn max_coordinate(&self) -> S {
        self.lion_starts
            .iter()
            .fold(self.man_start.max_abs(), |m, l| m.max(l.max_abs()))
    }

    pub fn start_distance(&self, lion: usize) -> Option<S> {
        self.lion_starts
            .get(lion - 1)
            .map(|l| l.dist(self.man_start))
    }
}

/// Constants that only exist from level 2 on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MilestoneParams<S> {
    /// Segment length of the level below.
    pub ell: S,
    /// Milestone pieces per lower segment.
    pub p: u64,
    pub r: S,
    pub rho: S,
    pub phi: S,
    pub tau: S,
    pub rho_prime: S,
    pub delta_n: S,
}

impl<S: Scalar> MilestoneParams<S> {
    /// Duration of one canonical interval, `sigma_{n-1} / p`.
    pub fn interval(&self, lower_sigma: S) -> S {
        lower_sigma / S::of_u64(self.p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet<S> {
    pub level: usize,
    pub eps_n: S,
    pub sigma_n: S,
    pub theta: S,
    pub c_n: S,
    pub milestone: Option<MilestoneParams<S>>,
}

impl<S: Scalar> ParameterSet<S> {
    /// Distance covered between two times of choice.
    pub fn step_len(&self) -> S {
        self.sigma_n * (S::one() + self.eps_n)
    }

    pub fn record(&self) -> ParameterRecord {
        let m = self.milestone.as_ref();
        ParameterRecord {
            level: self.level,
            eps_n: self.eps_n.as_f64(),
            sigma_n: self.sigma_n.as_f64(),
            ell: m.map(|m| m.ell.as_f64()),
            p: m.map(|m| m.p),
            r: m.map(|m| m.r.as_f64()),
            rho: m.map(|m| m.rho.as_f64()),
            theta: self.theta.as_f64(),
            phi: m.map(|m| m.phi.as_f64()),
            tau: m.map(|m| m.tau.as_f64()),
            rho_prime: m.map(|m| m.rho_prime.as_f64()),
            c_n: self.c_n.as_f64(),
            delta_n: m.map(|m| m.delta_n.as_f64()),
        }
    }
}

/// Flat, machine-readable form of a [`ParameterSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterRecord {
    pub level: usize,
    pub eps_n: f64,
    pub sigma_n: f64,
    pub ell: Option<f64>,
    pub p: Option<u64>,
    pub r: Option<f64>,
    pub rho: Option<f64>,
    pub theta: f64,
    pub phi: Option<f64>,
    pub tau: Option<f64>,
    pub rho_prime: Option<f64>,
    pub c_n: f64,
    pub delta_n: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionDiagnostic {
    pub level: usize,
    pub sigma_n: f64,
    pub coordinate_ulp: f64,
    /// `sigma_n / coordinate_ulp`; the guard requires at least 1e6.
    pub headroom: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CascadeOptions<S> {
    /// Replacement for `delta_2, delta_3, ...`.
    pub delta_override: Option<Vec<S>>,
    /// Abort when `sigma_n` drops below the precision threshold.
    pub precision_guard: bool,
}

impl<S: Scalar> CascadeOptions<S> {
    pub fn guarded() -> Self {
        Self {
            delta_override: None,
            precision_guard: true,
        }
    }
}

/// Parameter sets for levels `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cascade<S> {
    pub levels: Vec<ParameterSet<S>>,
    pub diagnostics: Vec<PrecisionDiagnostic>,
    pub delta_overridden: bool,
}

impl<S: Scalar> Cascade<S> {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Parameters of level `k` (1-based).
    pub fn level(&self, k: usize) -> &ParameterSet<S> {
        &self.levels[k - 1]
    }

    pub fn milestone(&self, k: usize) -> Option<&MilestoneParams<S>> {
        self.levels
            .get(k.wrapping_sub(1))
            .and_then(|l| l.milestone.as_ref())
    }

    /// `delta_2, ..., delta_n`.
    pub fn deltas(&self) -> Vec<S> {
        self.levels
            .iter()
            .filter_map(|l| l.milestone.map(|m| m.delta_n))
            .collect()
    }

    /// Canonical interval length of level `k >= 2`.
    pub fn interval(&self, k: usize) -> Option<S> {
        let m = self.milestone(k)?;
        Some(m.interval(self.level(k - 1).sigma_n))
    }

    /// `min_i c_i / 2` over levels `1..=n`.
    pub fn disk_margin(&self) -> S {
        let two = S::one() + S::one();
        self.levels
            .iter()
            .map(|l| l.c_n / two)
            .fold(S::of(f64::MAX), |a, b| a.min(b))
    }

    pub fn records(&self) -> Vec<ParameterRecord> {
        self.levels.iter().map(ParameterSet::record).collect()
    }
}

/// Speed surplus of level `n`: `(1 - 2^-n) * eps`.
pub fn eps_level<S: Scalar>(eps: S, n: usize) -> Result<S, ParamError> {
    if n < 1 {
        return Err(ParamError::Domain("level must be at least 1".into()));
    }
    let shrink = S::of(0.5f64.powi(n.min(2000) as i32));
    Ok((S::one() - shrink) * eps)
}

/// Default deviation budget `min{2^-n, min_i c_i / 2^(n-i+1)}` from safety distances `c_1..c_{n-1}`.
pub fn delta_level<S: Scalar>(safety: &[S], n: usize) -> Result<S, ParamError> {
    if n < 2 {
        return Err(ParamError::Domain(
            "deviation budgets start at level 2".into(),
        ));
    }
    if safety.len() < n - 1 {
        return Err(ParamError::Domain(format!(
            "level {n} needs {} safety distances, got {}",
            n - 1,
            safety.len()
        )));
    }
    let mut best = S::of(0.5f64.powi(n as i32));
    for (idx, &c) in safety[..n - 1].iter().enumerate() {
        if !(c > S::zero()) {
            return Err(ParamError::Domain(format!(
                "safety distance c_{} must be positive",
                idx + 1
            )));
        }
        let i = idx + 1;
        best = best.min(c * S::of(0.5f64.powi((n - i + 1) as i32)));
    }
    Ok(best)
}

/// Finds `phi` in `(0, pi/2]` with `tan(theta) = rho sin(phi) / (rho cos(phi) - 2r)` by bisection.
pub fn solve_phi<S: Scalar>(rho: S, r: S, theta: S) -> Result<S, ParamError> {
    let two = S::one() + S::one();
    if !(r > S::zero() && rho > two * r) {
        return Err(ParamError::Solver(format!(
            "need rho > 2r > 0 (rho = {rho:e}, r = {r:e})"
        )));
    }
    let half_pi = S::pi() / two;
    if !(theta > S::zero() && theta < half_pi) {
        return Err(ParamError::Solver(format!(
            "theta = {theta} has no root in (0, pi/2)"
        )));
    }
    let target = theta.tan();
    let ratio = |phi: S| rho * phi.sin() / (rho * phi.cos() - two * r);
    // The ratio rises from 0 to +inf on (0, acos(2r/rho)).
    let (mut lo, mut hi) = (S::zero(), (two * r / rho).acos());
    for _ in 0..512 {
        let mid = (lo + hi) / two;
        if !(mid > lo && mid < hi) {
            break;
        }
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = |phi: S| (ratio(phi) - target).abs() / target;
    let phi = if residual(hi) <= residual(lo) || lo == S::zero() {
        hi
    } else {
        lo
    };
    let res = residual(phi);
    if !(res <= S::of(CERTIFY_REL_TOL)) || !(phi > S::zero() && phi <= half_pi) {
        return Err(ParamError::Solver(format!(
            "phi bisection residual {res:e} too large"
        )));
    }
    Ok(phi)
}

/// Left side of the `sigma_n` angle condition; `None` when the arcsine argument leaves [0, 1].
pub fn sigma_angle_lhs<S: Scalar>(sigma: S, r: S, rho: S, eps_n: S) -> Option<S> {
    let two = S::one() + S::one();
    if !(sigma < r) {
        return None;
    }
    let arg = (two + eps_n) * sigma / (two * (r - sigma));
    if !(arg >= S::zero() && arg <= S::one()) {
        return None;
    }
    Some(two * arg.asin() + sigma / rho)
}

/// Largest admissible decision period times [`SIGMA_SHRINK`].
pub fn solve_sigma<S: Scalar>(r: S, rho: S, eps_n: S, phi: S) -> Result<S, ParamError> {
    if !(r > S::zero() && rho > S::zero() && phi > S::zero()) {
        return Err(ParamError::Domain("r, rho and phi must be positive".into()));
    }
    if !(eps_n > S::zero() && eps_n < S::one()) {
        return Err(ParamError::Domain(format!(
            "eps_n must lie in (0, 1), got {eps_n}"
        )));
    }
    let three = S::of(3.0);
    let cap = r / (three + eps_n);
    let feasible = |s: S| sigma_angle_lhs(s, r, rho, eps_n).is_some_and(|lhs| lhs <= phi);
    let sup = if feasible(cap) {
        cap
    } else {
        let two = S::one() + S::one();
        let (mut lo, mut hi) = (S::zero(), cap);
        for _ in 0..512 {
            let mid = (lo + hi) / two;
            if !(mid > lo && mid < hi) {
                break;
            }
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let sigma = sup * S::of(SIGMA_SHRINK);
    if !(sigma > S::zero()) {
        return Err(ParamError::Solver(
            "sigma bisection collapsed to zero".into(),
        ));
    }
    Ok(sigma)
}

fn pi_terms<S: Scalar>(eps_n: S, pi_factor: f64) -> S {
    let two = S::one() + S::one();
    two + two * eps_n + S::of(pi_factor) * S::pi() * (S::one() + eps_n)
}

/// The three candidates whose minimum defines `r`.
pub fn radius_terms<S: Scalar>(
    lower: &ParameterSet<S>,
    p: u64,
    eps_n: S,
    delta_n: S,
    start_distance: S,
) -> [S; 3] {
    let two = S::one() + S::one();
    let seg = lower.sigma_n / S::of_u64(p);
    [
        seg * eps_n * (eps_n - lower.eps_n) / pi_terms(eps_n, 18.0),
        delta_n / two * eps_n / pi_terms(eps_n, 12.0),
        start_distance,
    ]
}

fn base_level<S: Scalar>(config: &StartConfiguration<S>) -> Result<ParameterSet<S>, ParamError> {
    let eps_n = eps_level(config.eps, 1)?;
    let c_n = config
        .start_distance(1)
        .ok_or_else(|| ParamError::Domain("at least one lion is required".into()))?;
    Ok(ParameterSet {
        level: 1,
        eps_n,
        sigma_n: S::one(),
        theta: (S::one() / (S::one() + eps_n)).acos(),
        c_n,
        milestone: None,
    })
}

fn next_level<S: Scalar>(
    config: &StartConfiguration<S>,
    lower_levels: &[ParameterSet<S>],
    delta_n: S,
) -> Result<ParameterSet<S>, ParamError> {
    let n = lower_levels.len() + 1;
    let lower = &lower_levels[n - 2];
    let two = S::one() + S::one();
    let eps_n = eps_level(config.eps, n)?;
    let start_distance = config
        .start_distance(n)
        .ok_or_else(|| ParamError::Domain(format!("level {n} needs at least {n} lions")))?;
    let ell = lower.step_len();
    let pieces = (ell / (delta_n / two)).ceil();
    let p = pieces
        .to_u64()
        .filter(|&p| p >= 1)
        .ok_or_else(|| ParamError::Solver(format!("milestone count {pieces} out of range")))?;
    let [a, b, c] = radius_terms(lower, p, eps_n, delta_n, start_distance);
    let r = a.min(b).min(c);
    let rho = two * r / eps_n;
    let theta = (S::one() / (S::one() + eps_n)).acos();
    let phi = solve_phi(rho, r, theta)?;
    let sigma_n = solve_sigma(r, rho, eps_n, phi)?;
    let three = S::of(3.0);
    let tau = S::of(6.0) * S::pi() * r / eps_n;
    let rho_prime = rho + r + (three + eps_n) * sigma_n;
    let c_n = r - (three + eps_n) * sigma_n;
    if !(c_n > S::zero()) {
        return Err(ParamError::Solver(format!(
            "safety distance c_{n} = {c_n:e} is not positive"
        )));
    }
    Ok(ParameterSet {
        level: n,
        eps_n,
        sigma_n,
        theta,
        c_n,
        milestone: Some(MilestoneParams {
            ell,
            p,
            r,
            rho,
            phi,
            tau,
            rho_prime,
            delta_n,
        }),
    })
}

fn diagnose<S: Scalar>(
    config: &StartConfiguration<S>,
    ps: &ParameterSet<S>,
) -> PrecisionDiagnostic {
    let ulp = config.max_coordinate().ulp();
    let headroom = ps.sigma_n / ulp;
    PrecisionDiagnostic {
        level: ps.level,
        sigma_n: ps.sigma_n.as_f64(),
        coordinate_ulp: ulp.as_f64(),
        headroom: headroom.as_f64(),
        ok: headroom >= S::of(PRECISION_HEADROOM),
    }
}

/// Derives levels `1..=n`.
pub fn derive_cascade<S: Scalar>(
    config: &StartConfiguration<S>,
    n: usize,
    options: &CascadeOptions<S>,
) -> Result<Cascade<S>, ParamError> {
    if n < 1 {
        return Err(ParamError::Domain(
            "strategy level must be at least 1".into(),
        ));
    }
    if let Some(over) = &options.delta_override {
        if over.len() < n - 1 {
            return Err(ParamError::Domain(format!(
                "delta override lists {} values but level {n} needs {}",
                over.len(),
                n - 1
            )));
        }
        if let Some(bad) = over.iter().position(|d| !(*d > S::zero())) {
            return Err(ParamError::Domain(format!(
                "delta override entry {} must be positive",
                bad + 2
            )));
        }
    }
    let mut levels = vec![base_level(config)?];
    let mut diagnostics = vec![diagnose(config, &levels[0])];
    for k in 2..=n {
        let delta_n = match &options.delta_override {
            Some(over) => over[k - 2],
            None => {
                let safety: Vec<S> = levels.iter().map(|l| l.c_n).collect();
                delta_level(&safety, k)?
            }
        };
        let ps = next_level(config, &levels, delta_n)?;
        let diag = diagnose(config, &ps);
        if options.precision_guard && !diag.ok {
            return Err(ParamError::Precision {
                level: k,
                sigma: diag.sigma_n,
                required: PRECISION_HEADROOM * diag.coordinate_ulp,
            });
        }
        levels.push(ps);
        diagnostics.push(diag);
    }
    Ok(Cascade {
        levels,
        diagnostics,
        delta_overridden: options.delta_override.is_some(),
    })
}

struct Residuals {
    tol: f64,
    items: Vec<Residual>,
}

impl Residuals {
    fn new() -> Self {
        Self {
            tol: CERTIFY_REL_TOL,
            items: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, slack: f64) {
        let slack = if slack.is_nan() { -1.0 } else { slack };
        self.items.push(Residual {
            name: name.into(),
            slack,
            pass: slack >= 0.0,
        });
    }

    /// `value == expected` within the relative tolerance.
    fn equal<S: Scalar>(&mut self, name: &str, value: S, expected: S) {
        let d = rel_diff(value, expected).as_f64();
        self.push(name, self.tol - d);
    }

    /// `lhs <= rhs` within the relative tolerance, scaled by `scale`.
    fn at_most<S: Scalar>(&mut self, name: &str, lhs: S, rhs: S, scale: S) {
        let slack = ((rhs - lhs) / scale.abs()).as_f64();
        self.push(name, slack + self.tol);
    }

    /// Strict `lhs < rhs`, no tolerance.
    fn below<S: Scalar>(&mut self, name: &str, lhs: S, rhs: S, scale: S) {
        let slack = ((rhs - lhs) / scale.abs()).as_f64();
        let slack = if slack > 0.0 {
            slack
        } else {
            slack.min(-f64::MIN_POSITIVE)
        };
        self.push(name, slack);
    }
}

/// Re-substitutes every defining relation of `ps`.
///
/// `lower` holds levels `1..n-1` of the same cascade. When `delta_overridden`
/// is set, `delta_n` is only required to be positive.
pub fn certify<S: Scalar>(
    ps: &ParameterSet<S>,
    lower: &[ParameterSet<S>],
    config: &StartConfiguration<S>,
    delta_overridden: bool,
) -> Verdict {
    let name = format!("certify_level_{}", ps.level);
    let mut res = Residuals::new();
    let n = ps.level;
    let two = S::one() + S::one();
    let three = S::of(3.0);
    let one = S::one();
    let eps = config.eps;

    match eps_level(eps, n) {
        Ok(e) => res.equal("eps_n formula", ps.eps_n, e),
        Err(_) => res.push("eps_n formula", -1.0),
    }
    res.below("eps_n < eps", ps.eps_n, eps, eps);
    res.equal(
        "theta = acos(1/(1+eps_n))",
        ps.theta,
        (one / (one + ps.eps_n)).acos(),
    );

    if n == 1 || lower.len() + 1 != n {
        if n == 1 {
            res.equal("sigma_1 = 1", ps.sigma_n, one);
            match config.start_distance(1) {
                Some(d) => res.equal("c_1 = |m0 - l1(0)|", ps.c_n, d),
                None => res.push("c_1 = |m0 - l1(0)|", -1.0),
            }
        } else {
            res.push("lower levels supplied", -1.0);
        }
        res.below("c_n > 0", S::zero(), ps.c_n, one);
        return finish(name, res);
    }

    let prev = &lower[n - 2];
    let Some(m) = ps.milestone.as_ref() else {
        res.push("milestone constants present", -1.0);
        return finish(name, res);
    };
    res.below("eps_{n-1} < eps_n", prev.eps_n, ps.eps_n, eps);

    res.below("delta_n > 0", S::zero(), m.delta_n, one);
    if !delta_overridden {
        let safety: Vec<S> = lower.iter().map(|l| l.c_n).collect();
        match delta_level(&safety, n) {
            Ok(d) => res.equal("delta_n formula", m.delta_n, d),
            Err(_) => res.push("delta_n formula", -1.0),
        }
    }

    res.equal("ell = sigma_{n-1}(1+eps_{n-1})", m.ell, prev.step_len());
    let half_delta = m.delta_n / two;
    let pieces = (m.ell / half_delta).ceil();
    res.push(
        "p = ceil(ell/(delta_n/2))",
        if pieces == S::of_u64(m.p) {
            CERTIFY_REL_TOL
        } else {
            -1.0
        },
    );
    res.at_most(
        "ell/p <= delta_n/2",
        m.ell / S::of_u64(m.p),
        half_delta,
        half_delta,
    );

    match config.start_distance(n) {
        Some(dist) => {
            let terms = radius_terms(prev, m.p, ps.eps_n, m.delta_n, dist);
            for (label, t) in [
                "r <= interval term",
                "r <= deviation term",
                "r <= |m0 - ln(0)|",
            ]
            .iter()
            .zip(terms)
            {
                res.at_most(label, m.r, t, m.r);
            }
            res.equal(
                "r = min of terms",
                m.r,
                terms[0].min(terms[1]).min(terms[2]),
            );
        }
        None => res.push("lion n exists", -1.0),
    }

    res.equal("rho = 2r/eps_n", m.rho, two * m.r / ps.eps_n);
    let denom = m.rho * m.phi.cos() - two * m.r;
    res.below("rho cos(phi) - 2r > 0", S::zero(), denom, m.rho);
    res.below("phi > 0", S::zero(), m.phi, one);
    res.at_most("phi <= pi/2", m.phi, S::pi() / two, one);
    let tan_theta = ps.theta.tan();
    let phi_res = ((tan_theta - m.rho * m.phi.sin() / denom).abs() / tan_theta).as_f64();
    res.push(
        "tan(theta) = rho sin(phi)/(rho cos(phi) - 2r)",
        CERTIFY_REL_TOL - phi_res,
    );

    match sigma_angle_lhs(ps.sigma_n, m.r, m.rho, ps.eps_n) {
        Some(lhs) => res.at_most(
            "2 asin((2+eps_n)sigma/(2(r-sigma))) + sigma/rho <= phi",
            lhs,
            m.phi,
            m.phi,
        ),
        None => res.push(
            "2 asin((2+eps_n)sigma/(2(r-sigma))) + sigma/rho <= phi",
            -1.0,
        ),
    }
    res.below(
        "sigma_n < r/(3+eps_n)",
        ps.sigma_n,
        m.r / (three + ps.eps_n),
        m.r,
    );
    res.below("sigma_n > 0", S::zero(), ps.sigma_n, one);

    res.equal(
        "tau = 6 pi r/eps_n",
        m.tau,
        S::of(6.0) * S::pi() * m.r / ps.eps_n,
    );
    let lead = (three + ps.eps_n) * ps.sigma_n;
    res.equal(
        "rho' = rho + r + (3+eps_n)sigma_n",
        m.rho_prime,
        m.rho + m.r + lead,
    );
    res.equal("c_n = r - (3+eps_n)sigma_n", ps.c_n, m.r - lead);
    res.below("c_n > 0", S::zero(), ps.c_n, m.r);

    // Consequences used by the tracking bounds.
    let e1 = one + ps.eps_n;
    let seg = prev.sigma_n / S::of_u64(m.p);
    res.at_most(
        "rho + 2r + 3(1+eps_n)tau <= (sigma_{n-1}/p)(eps_n - eps_{n-1})",
        m.rho + two * m.r + three * e1 * m.tau,
        seg * (ps.eps_n - prev.eps_n),
        m.rho,
    );
    res.at_most(
        "rho + 2r + 2(1+eps_n)tau <= delta_n/2",
        m.rho + two * m.r + two * e1 * m.tau,
        half_delta,
        half_delta,
    );

    finish(name, res)
}

fn finish(name: String, res: Residuals) -> Verdict {
    let margin = res
        .items
        .iter()
        .map(|r| r.slack)
        .fold(f64::INFINITY, f64::min);
    let failing: Vec<&str> = res
        .items
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.name.as_str())
        .collect();
    let mut v = if failing.is_empty() {
        Verdict::passed(name, margin, format!("{} relations hold", res.items.len()))
    } else {
        Verdict::failed(
            name,
            0.0,
            None,
            margin,
            format!("violated: {}", failing.join(", ")),
        )
    };
    v.residuals = res.items;
    v
}

/// Certifies every level of a cascade.
pub fn certify_cascade<S: Scalar>(
    cascade: &Cascade<S>,
    config: &StartConfiguration<S>,
) -> Vec<Verdict> {
    (0..cascade.levels.len())
        .map(|i| {
            certify(
                &cascade.levels[i],
                &cascade.levels[..i],
                config,
                cascade.delta_overridden,
            )
        })
        .collect()
}
