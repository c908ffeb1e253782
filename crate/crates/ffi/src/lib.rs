//! C ABI for `ratio-bandits`.
//!
//! Every function returns an [`RbStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and can be copied out
//! with [`rb_last_error`]. Handles are opaque and must be released with the
//! matching `*_free` function. Panics never cross the boundary.
//!
//! Matrices are row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ratio_bandits::conjugate::{nig_update, NIGPosterior};
use ratio_bandits::envs::EnvParams;
use ratio_bandits::harness::{run_one, CellSpec};
use ratio_bandits::karmed::{karm_bounds, karm_score, karm_update, BetaPosterior, KArmStats};
use ratio_bandits::linear::{
    lin_bounds, lin_select, lin_update, ActionVector, LinearConstants, LinearState,
};
use ratio_bandits::policies::agent::PosteriorFamily;
use ratio_bandits::policies::{ids_distribution, PolicyConfig, PolicyKind};
use ratio_bandits::{dynamic_alpha, psi, select_arm, ConfidenceBounds, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Precondition = 3,
    Numeric = 4,
    Config = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbEnvKind {
    Karmed = 0,
    LinearContextual = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbPolicyKind {
    Ts = 0,
    Tsucb = 1,
    Greedy = 2,
    Ucb = 3,
    Ids = 4,
}

/// OFUL confidence-set state.
pub struct RbLinear {
    state: LinearState,
}

/// K-armed Bernoulli statistics plus the Beta posterior.
pub struct RbKArm {
    stats: KArmStats,
    posterior: BetaPosterior,
}

/// Normal-inverse-gamma regression posterior.
pub struct RbNig {
    post: NIGPosterior,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs were removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(error: &Error) -> RbStatus {
    match error {
        Error::InvalidArgument(_) => RbStatus::InvalidArgument,
        Error::Precondition(_) => RbStatus::Precondition,
        Error::Numeric(_) => RbStatus::Numeric,
        Error::Config { .. } | Error::Aggregation(_) | Error::Malformed { .. } => RbStatus::Config,
        Error::Io { .. } | Error::Csv(_) => RbStatus::Io,
        Error::Run { source, .. } => status_of(source),
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail::Lib(Error::InvalidArgument(message.into()))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RbStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RbStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RbStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null("handle"))
}

fn bounds_from(mu: &[f64], radius: &[f64]) -> Result<Vec<ConfidenceBounds>, Fail> {
    mu.iter()
        .zip(radius)
        .map(|(&m, &r)| ConfidenceBounds::new(m, r).map_err(Fail::from))
        .collect()
}

fn actions_from(flat: &[f64], d: usize) -> Result<Vec<ActionVector>, Fail> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    flat.chunks(d).map(|x| ActionVector::new(x.to_vec()).map_err(Fail::from)).collect()
}

fn write_bounds(bounds: &[ConfidenceBounds], mu: &mut [f64], radius: &mut [f64]) {
    for ((b, m), r) in bounds.iter().zip(mu.iter_mut()).zip(radius.iter_mut()) {
        *m = b.mu_hat();
        *r = b.radius();
    }
}

/// Copies the calling thread's last error message (NUL-terminated, possibly
/// truncated) into `buf` and returns the full message length in bytes,
/// excluding the terminator. Returns 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Ψ = (f̃ − μ̂) / radius.
///
/// # Safety
/// `out_psi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rb_psi(f_tilde: f64, mu_hat: f64, radius: f64, out_psi: *mut f64) -> RbStatus {
    guard(|| {
        let b = ConfidenceBounds::new(mu_hat, radius)?;
        *out(out_psi, "out_psi")? = psi(f_tilde, &b)?;
        Ok(())
    })
}

/// Index of the smallest Ψ over `k` arms; ties go to the lowest index.
///
/// # Safety
/// `mu_hat` and `radius` must hold `k` values.
#[no_mangle]
pub unsafe extern "C" fn rb_select_arm(
    f_tilde: f64,
    mu_hat: *const f64,
    radius: *const f64,
    k: usize,
    out_arm: *mut usize,
) -> RbStatus {
    guard(|| {
        let b = bounds_from(slice(mu_hat, k, "mu_hat")?, slice(radius, k, "radius")?)?;
        *out(out_arm, "out_arm")? = select_arm(f_tilde, &b)?;
        Ok(())
    })
}

/// Smallest α with `max_a (μ̂ + α·radius) = f̃`.
///
/// # Safety
/// `mu_hat` and `radius` must hold `k` values.
#[no_mangle]
pub unsafe extern "C" fn rb_dynamic_alpha(
    f_tilde: f64,
    mu_hat: *const f64,
    radius: *const f64,
    k: usize,
    out_alpha: *mut f64,
) -> RbStatus {
    guard(|| {
        let b = bounds_from(slice(mu_hat, k, "mu_hat")?, slice(radius, k, "radius")?)?;
        *out(out_alpha, "out_alpha")? = dynamic_alpha(f_tilde, &b)?;
        Ok(())
    })
}

/// Creates an OFUL state with `V = I`. `r` is the sub-Gaussian noise scale,
/// `s` bounds ‖θ‖, `l` bounds ‖x‖.
///
/// # Safety
/// `out_handle` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rb_linear_new(
    d: usize,
    r: f64,
    s: f64,
    l: f64,
    horizon: f64,
    out_handle: *mut *mut RbLinear,
) -> RbStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let state = LinearState::new(d, LinearConstants::new(r, s, l, horizon)?)?;
        *slot = Box::into_raw(Box::new(RbLinear { state }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`rb_linear_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rb_linear_free(h: *mut RbLinear) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `x` must hold `d` values.
#[no_mangle]
pub unsafe extern "C" fn rb_linear_update(h: *mut RbLinear, x: *const f64, d: usize, y: f64) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        let x = ActionVector::new(slice(x, d, "x")?.to_vec())?;
        lin_update(&mut h.state, &x, y)?;
        Ok(())
    })
}

/// Bounds of `k` actions (`k x d`); writes `k` values to each output.
///
/// # Safety
/// `actions` must hold `k·d` values, the outputs `k` each.
#[no_mangle]
pub unsafe extern "C" fn rb_linear_bounds(
    h: *mut RbLinear,
    actions: *const f64,
    k: usize,
    d: usize,
    out_mu: *mut f64,
    out_radius: *mut f64,
) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        let acts = actions_from(slice(actions, k * d, "actions")?, d)?;
        let b = lin_bounds(&h.state, &acts)?;
        write_bounds(&b, slice_mut(out_mu, k, "out_mu")?, slice_mut(out_radius, k, "out_radius")?);
        Ok(())
    })
}

/// TS-UCB choice among `k` actions (`k x d`) for target `f_tilde`.
///
/// # Safety
/// `actions` must hold `k·d` values.
#[no_mangle]
pub unsafe extern "C" fn rb_linear_select(
    h: *mut RbLinear,
    f_tilde: f64,
    actions: *const f64,
    k: usize,
    d: usize,
    out_arm: *mut usize,
) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        let acts = actions_from(slice(actions, k * d, "actions")?, d)?;
        *out(out_arm, "out_arm")? = lin_select(f_tilde, &h.state, &acts)?;
        Ok(())
    })
}

/// # Safety
/// `out_handle` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rb_karm_new(arms: usize, horizon: u64, out_handle: *mut *mut RbKArm) -> RbStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let stats = KArmStats::new(arms, horizon)?;
        *slot = Box::into_raw(Box::new(RbKArm { stats, posterior: BetaPosterior::uniform(arms) }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`rb_karm_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rb_karm_free(h: *mut RbKArm) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Records a reward in `[0, 1]`.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_karm_update(h: *mut RbKArm, arm: usize, reward: f64) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        karm_update(&mut h.stats, &mut h.posterior, arm, reward)?;
        Ok(())
    })
}

/// TS-UCB choice; fails with `Precondition` until every arm was pulled.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_karm_select(h: *mut RbKArm, f_tilde: f64, out_arm: *mut usize) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        *out(out_arm, "out_arm")? = karm_score(f_tilde, &h.stats)?;
        Ok(())
    })
}

/// # Safety
/// Outputs must hold `k` values, `k` being the handle's arm count.
#[no_mangle]
pub unsafe extern "C" fn rb_karm_bounds(
    h: *mut RbKArm,
    k: usize,
    out_mu: *mut f64,
    out_radius: *mut f64,
) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        if k != h.stats.arms() {
            return Err(invalid(format!("buffer of {k} for {} arms", h.stats.arms())));
        }
        let b = karm_bounds(&h.stats)?;
        write_bounds(&b, slice_mut(out_mu, k, "out_mu")?, slice_mut(out_radius, k, "out_radius")?);
        Ok(())
    })
}

/// Beta parameters of one arm.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_karm_beta(h: *mut RbKArm, arm: usize, out_a: *mut f64, out_b: *mut f64) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        if arm >= h.stats.arms() {
            return Err(invalid(format!("arm {arm} out of range")));
        }
        let (a, b) = h.posterior.params(arm);
        *out(out_a, "out_a")? = a;
        *out(out_b, "out_b")? = b;
        Ok(())
    })
}

/// NIG posterior with `a₀ = b₀ = 6`, `μ₀ = 0`, `Λ₀ = 4I`.
///
/// # Safety
/// `out_handle` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rb_nig_new_default(d: usize, out_handle: *mut *mut RbNig) -> RbStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let post = NIGPosterior::default_prior(d)?;
        *slot = Box::into_raw(Box::new(RbNig { post }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`rb_nig_new_default`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rb_nig_free(h: *mut RbNig) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Folds in `n` rows (`x` is `n x d`).
///
/// # Safety
/// `x` must hold `n·d` values and `y` `n` values.
#[no_mangle]
pub unsafe extern "C" fn rb_nig_update(h: *mut RbNig, x: *const f64, y: *const f64, n: usize) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        let d = h.post.dim();
        nig_update(&mut h.post, slice(x, n * d, "x")?, slice(y, n, "y")?)?;
        Ok(())
    })
}

/// Posterior mean (`d` values) and the inverse-gamma shape and scale.
///
/// # Safety
/// `out_mean` must hold `d` values.
#[no_mangle]
pub unsafe extern "C" fn rb_nig_state(
    h: *mut RbNig,
    out_mean: *mut f64,
    d: usize,
    out_shape: *mut f64,
    out_scale: *mut f64,
) -> RbStatus {
    guard(|| {
        let h = handle(h)?;
        if d != h.post.dim() {
            return Err(invalid(format!("buffer of {d} for dimension {}", h.post.dim())));
        }
        slice_mut(out_mean, d, "out_mean")?.copy_from_slice(h.post.mean());
        *out(out_shape, "out_shape")? = h.post.shape();
        *out(out_scale, "out_scale")? = h.post.scale();
        Ok(())
    })
}

/// Ratio-minimizing two-point IDS distribution: play `first` with
/// probability `q`, else `second`.
///
/// # Safety
/// `delta` and `v` must hold `k` values.
#[no_mangle]
pub unsafe extern "C" fn rb_ids_distribution(
    delta: *const f64,
    v: *const f64,
    k: usize,
    out_first: *mut usize,
    out_second: *mut usize,
    out_q: *mut f64,
    out_ratio: *mut f64,
) -> RbStatus {
    guard(|| {
        let dist = ids_distribution(slice(delta, k, "delta")?, slice(v, k, "v")?)?;
        *out(out_first, "out_first")? = dist.first;
        *out(out_second, "out_second")? = dist.second;
        *out(out_q, "out_q")? = dist.q;
        *out(out_ratio, "out_ratio")? = dist.ratio;
        Ok(())
    })
}

/// Simulates one episode and returns its cumulative regret. `d` and `sigma`
/// are ignored for the K-armed model; `samples` is the TS-UCB sample count
/// or the IDS sample count and is ignored otherwise. Linear cells use the
/// known-noise Gaussian posterior. `env` takes an [`RbEnvKind`] value and
/// `policy` an [`RbPolicyKind`] value.
///
/// # Safety
/// `out_regret` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rb_run_one(
    env: u32,
    d: usize,
    k: usize,
    sigma: f64,
    horizon: u64,
    policy: u32,
    samples: usize,
    master_seed: u64,
    run_id: u64,
    out_regret: *mut f64,
) -> RbStatus {
    guard(|| {
        let slot = out(out_regret, "out_regret")?;
        let params = match env {
            e if e == RbEnvKind::Karmed as u32 => EnvParams::karmed(k),
            e if e == RbEnvKind::LinearContextual as u32 => EnvParams::linear_contextual(d, k, sigma),
            other => return Err(invalid(format!("unknown environment kind {other}"))),
        };
        let mut cell = CellSpec::new(params, horizon);
        cell.posterior = PosteriorFamily::Known;
        let kind = [
            (RbPolicyKind::Ts, PolicyKind::Ts),
            (RbPolicyKind::Tsucb, PolicyKind::Tsucb),
            (RbPolicyKind::Greedy, PolicyKind::Greedy),
            (RbPolicyKind::Ucb, PolicyKind::Ucb),
            (RbPolicyKind::Ids, PolicyKind::Ids),
        ]
        .into_iter()
        .find(|(c, _)| *c as u32 == policy)
        .map(|(_, k)| k)
        .ok_or_else(|| invalid(format!("unknown policy kind {policy}")))?;
        let policy = match kind {
            PolicyKind::Tsucb | PolicyKind::Ids => PolicyConfig::from_kind_and_samples(kind, samples)?,
            other => PolicyConfig::new(other),
        };
        *slot = run_one(&cell, &policy, master_seed, run_id, None)?.final_regret;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_outputs_are_reported() {
        let st = unsafe { rb_psi(1.0, 0.0, 1.0, ptr::null_mut()) };
        assert_eq!(st, RbStatus::NullPointer);
        let mut buf = [0 as c_char; 64];
        let n = unsafe { rb_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
    }

    #[test]
    fn success_clears_the_error() {
        let mut v = 0.0;
        assert_eq!(unsafe { rb_psi(1.0, 0.0, -1.0, &mut v) }, RbStatus::InvalidArgument);
        assert_eq!(unsafe { rb_psi(1.0, 0.0, 2.0, &mut v) }, RbStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(unsafe { rb_last_error(ptr::null_mut(), 0) }, 0);
    }
}
