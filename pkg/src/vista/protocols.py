"""Experiment drivers: single-run estimation, cascaded windows, FFT baseline, two-parameter probes.

``run_from_config`` dispatches on the config mode:

* vista_pure            pure ansatz, theta only (probe may still be noisy)
* vista_noisy_dephasing ansatz with a disentangling angle phi; learns (theta, phi)
* vista_noisy_ampdamp   same for amplitude damping
* vista_multiparam      dense probe under theta1*sum(Z) + theta2*sum(X) with known
                        dephasing; pure Trotter ansatz, learns (theta1, theta2)
* cascade               staged n ramp handing theta-hat forward
* baseline_fft          stabilizer-parity time series + discrete spectrum peak

Probes are closed forms except in the multiparameter mode, where the
non-commuting generator forces dense integration.  Every sampled evaluation
derives its stream from (seed, labels), so a (config, seed) pair fixes the
whole trajectory.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import measurement
from .config import (
    MODE_BASELINE,
    MODE_CASCADE,
    MODE_MULTIPARAM,
    MODE_NOISY_AMPDAMP,
    MODE_NOISY_DEPHASING,
    MODE_PURE,
    NORM_QN,
    effective_dict,
    validate,
    with_overrides,
)
from .dynamics import (
    CHANNEL_AMPDAMP,
    CHANNEL_DEPHASING,
    CHANNEL_NONE,
    FAMILY_PURE,
    ChannelSpec,
    ClosedFormState,
    HamiltonianSpec,
    circuit_ansatz_state,
    circuit_decay,
    evolve_closed_form,
    lindblad_rk4_oracle,
    trotter_evolve,
)
from .errors import ConfigError, DomainError, NoPeakError
from .measurement import ShotSampler, parity_probability
from .optimize import (
    PHI_CLAMP,
    STATUS_DIVERGED,
    GradientConfig,
    OptimizerConfig,
    ParamVector,
    ShotSchedule,
    run_optimization,
)
from .qcore import ghz_density, ghz_vector
from .results import RunResult
from .rng import STREAM_INIT, STREAM_STAGE, derive_seed, stream

STATUS_CASCADE_FAILED = "cascade_failed"
STATUS_EARLY_STOPPED = "early_stopped"


# --- probe / ansatz assembly -------------------------------------------------


def _probe_state(cfg):
    ham = HamiltonianSpec(theta_z=cfg.theta_true)
    return evolve_closed_form(cfg.n, ham, ChannelSpec(cfg.channel, cfg.gamma_true))


def _ansatz_channel(mode):
    return {
        MODE_PURE: CHANNEL_NONE,
        MODE_NOISY_DEPHASING: CHANNEL_DEPHASING,
        MODE_NOISY_AMPDAMP: CHANNEL_AMPDAMP,
    }[mode]


def _single_param_lossfn(cfg, mode):
    """Loss closure for the closed-form modes; returns (names, lossfn, frequencies)."""
    probe = _probe_state(cfg)
    n = cfg.n
    kind = _ansatz_channel(mode)
    norm = measurement.LOSS_QN if cfg.normalization == NORM_QN else measurement.LOSS_PLAIN

    if kind == CHANNEL_NONE:
        names = ("theta",)

        def build(values):
            return ClosedFormState(n, FAMILY_PURE, float(values[0]))

    else:
        names = ("theta", "phi")

        def build(values):
            phi = min(max(float(values[1]), 0.0), PHI_CLAMP)
            return circuit_ansatz_state(n, float(values[0]), phi, kind)

    def lossfn(values, nu, label):
        overlap = measurement.hs_overlap_closed(probe, build(values))
        sampler = None if nu is None else ShotSampler(cfg.seed, nu, key=label)
        return measurement.loss(overlap, sampler, norm)

    freqs = np.array([2.0 * n] + [0.0] * (len(names) - 1))
    return names, lossfn, freqs


_PROBE_CACHE = {}


def _multiparam_probe(n, theta1, theta2, gamma, steps):
    key = (n, float(theta1), float(theta2), float(gamma), int(steps))
    if key not in _PROBE_CACHE:
        ham = HamiltonianSpec(theta_z=theta1, theta_x=theta2)
        _PROBE_CACHE[key] = lindblad_rk4_oracle(
            ghz_density(n), ham, ChannelSpec(CHANNEL_DEPHASING, gamma), steps=steps
        )
    return _PROBE_CACHE[key]


def _multiparam_lossfn(cfg):
    n = cfg.n
    rho = _multiparam_probe(
        n, cfg.theta_true, cfg.theta2_true, cfg.gamma_true, cfg.multiparam.probe_steps
    )
    d = cfg.multiparam.trotter_steps
    ghz = ghz_vector(n)

    def lossfn(values, nu, label):
        psi = trotter_evolve(ghz, HamiltonianSpec(float(values[0]), float(values[1])), d)
        raw = float(np.real(np.vdot(psi, rho @ psi)))
        raw = min(max(raw, 0.0), 1.0)
        overlap = measurement.OverlapValue(raw, 1.0, raw)
        sampler = None if nu is None else ShotSampler(cfg.seed, nu, key=label)
        return measurement.loss(overlap, sampler, measurement.LOSS_PLAIN)

    return ("theta", "theta2"), lossfn, np.array([0.0, 0.0])


def _draw_init(cfg, names):
    rng = stream(cfg.seed, STREAM_INIT)
    hw = cfg.init_halfwidth_effective()
    values = []
    for name in names:
        if name == "theta":
            v = cfg.init.theta0
            if v is None:
                v = rng.uniform(cfg.init.center - hw, cfg.init.center + hw)
        elif name == "phi":
            v = cfg.init.phi0
        else:  # theta2
            v = cfg.init.theta2_0
            if v is None:
                v = rng.uniform(-hw, hw)
        values.append(float(v))
    return ParamVector(names, np.array(values))


def _gradient_config(cfg, names, freqs):
    h = []
    for name in names:
        h.append(cfg.gradient.h_phi if name == "phi" else cfg.h_theta_effective())
    frequencies = freqs if cfg.gradient.method == "parameter_shift" else None
    return GradientConfig(cfg.gradient.method, np.array(h), frequencies, cfg.gradient.crn)


def _final_estimates(cfg, names, opt):
    last = opt.params[-1]
    final = {"theta_hat": float(last[0])}
    if cfg.theta_true is not None:
        final["abs_error_theta"] = abs(final["theta_hat"] - cfg.theta_true)
    if "phi" in names:
        phi = float(last[names.index("phi")])
        final["phi"] = phi
        try:
            final["gamma_hat"] = circuit_decay(cfg.channel, phi)
            final["gamma_flagged"] = False
        except DomainError:
            final["gamma_hat"] = None
            final["gamma_flagged"] = True
        if final["gamma_hat"] is not None:
            final["abs_error_gamma"] = abs(final["gamma_hat"] - cfg.gamma_true)
    if "theta2" in names:
        final["theta2_hat"] = float(last[names.index("theta2")])
        final["abs_error_theta2"] = abs(final["theta2_hat"] - cfg.theta2_true)
    return final


_TRACE_COL = {"theta": "theta_hat", "phi": "phi", "theta2": "theta2_hat"}


def _to_result(cfg, names, opt, wall):
    return RunResult(
        config=effective_dict(cfg),
        seed=cfg.seed,
        status=opt.status,
        param_names=tuple(_TRACE_COL[n] for n in names),
        trace={
            "epoch": opt.epochs,
            "loss": opt.losses,
            "params": opt.params,
            "grad_norm": opt.grad_norms,
            "shots": opt.shots,
            "lr": opt.lrs,
        },
        final=_final_estimates(cfg, names, opt),
        wall_time_s=wall,
    )


def _run_named(cfg, names, lossfn, freqs):
    t0 = time.monotonic()
    params0 = _draw_init(cfg, names)
    opt = run_optimization(
        params0,
        lossfn,
        optimizer=OptimizerConfig(
            cfg.optimizer.lr0,
            cfg.optimizer.decay,
            cfg.optimizer.beta1,
            cfg.optimizer.beta2,
            cfg.optimizer.eps,
        ),
        schedule=ShotSchedule(
            cfg.shots.nu_start, cfg.shots.nu_end, cfg.shots.profile, cfg.shots.exact
        ),
        gradient=_gradient_config(cfg, names, freqs),
        max_epochs=cfg.optimizer.max_epochs,
        tol_conv=cfg.optimizer.tol_conv,
        window=cfg.optimizer.window,
        budget_s=cfg.optimizer.budget_s,
    )
    return _to_result(cfg, names, opt, time.monotonic() - t0)


def run_vista(cfg):
    """One estimation run in any of the closed-form single-probe modes."""
    validate(cfg)
    if cfg.mode not in (MODE_PURE, MODE_NOISY_DEPHASING, MODE_NOISY_AMPDAMP):
        raise ConfigError(f"run_vista does not handle mode {cfg.mode!r}")
    names, lossfn, freqs = _single_param_lossfn(cfg, cfg.mode)
    return _run_named(cfg, names, lossfn, freqs)


def run_multiparam(cfg):
    """Two-parameter estimation with the dense probe and Trotter ansatz.

    theta2_true == 0 is the commuting edge case: the generator collapses to
    sum(Z) and the run delegates to the closed-form single-parameter pipeline,
    reproducing a vista_pure run bit for bit under the same seed.
    """
    validate(cfg)
    if cfg.mode != MODE_MULTIPARAM:
        raise ConfigError(f"run_multiparam needs mode {MODE_MULTIPARAM!r}")
    if cfg.theta2_true == 0:
        names, lossfn, freqs = _single_param_lossfn(cfg, MODE_PURE)
        return _run_named(cfg, names, lossfn, freqs)
    names, lossfn, freqs = _multiparam_lossfn(cfg)
    return _run_named(cfg, names, lossfn, freqs)


# --- cascade -----------------------------------------------------------------


def run_cascade(cfg):
    """Stages of increasing n; each stage starts from the previous theta-hat.

    A stage whose mean gradient magnitude falls below g_min contributes no
    information; the cascade stops there and reports the previous stage's
    estimate.  A diverged first stage fails the whole cascade.
    """
    validate(cfg)
    if cfg.mode != MODE_CASCADE:
        raise ConfigError(f"run_cascade needs mode {MODE_CASCADE!r}")
    plan = cfg.cascade
    t0 = time.monotonic()

    stages = []
    traces = []
    accepted = None  # result of the last informative stage
    status = None
    epochs_done = 0
    for k, nk in enumerate(plan.n_sequence):
        stage_cfg = with_overrides(
            cfg,
            mode=MODE_PURE,
            n=int(nk),
            seed=derive_seed(cfg.seed, STREAM_STAGE, k),
            cascade=type(cfg.cascade)(),  # stages themselves do not cascade
        )
        if k > 0:
            stage_cfg = with_overrides(
                stage_cfg,
                init=type(cfg.init)(
                    theta0=float(accepted.final["theta_hat"]),
                    phi0=cfg.init.phi0,
                ),
            )

        window_ok = True
        if k > 0:
            window_ok = abs(accepted.final["theta_hat"] - cfg.theta_true) <= math.pi / (2 * nk)

        res = run_vista(stage_cfg)
        mean_grad = float(np.mean(res.trace["grad_norm"])) if len(res.trace["grad_norm"]) else 0.0
        stages.append(
            {
                "n": int(nk),
                "first_epoch": epochs_done,
                "epochs": int(len(res.trace["epoch"])),
                "status": res.status,
                "theta_hat": res.final["theta_hat"],
                "abs_error_theta": res.final["abs_error_theta"],
                "mean_grad": mean_grad,
                "window_breach": not window_ok,
            }
        )
        epochs_done += int(len(res.trace["epoch"]))

        if res.status == STATUS_DIVERGED:
            status = STATUS_CASCADE_FAILED
            if k == 0:
                accepted = res
            break
        if k > 0 and mean_grad < plan.g_min:
            # vanishing signal at this n: keep the previous stage's estimate
            stages[-1]["rejected_vanishing_gradient"] = True
            status = STATUS_EARLY_STOPPED
            break
        accepted = res
        traces.append(res.trace)

    if status is None:
        status = accepted.status

    # contiguous epoch numbering across accepted stages
    if traces:
        joined = {key: np.concatenate([tr[key] for tr in traces]) for key in traces[0]}
        joined["epoch"] = np.arange(len(joined["loss"]))
    else:
        joined = accepted.trace

    final = dict(accepted.final)
    final["n_final"] = int(stages[len(traces) - 1]["n"]) if traces else int(plan.n_sequence[0])
    return RunResult(
        config=effective_dict(cfg),
        seed=cfg.seed,
        status=status,
        param_names=("theta_hat",),
        trace=joined,
        final=final,
        stages=stages,
        wall_time_s=time.monotonic() - t0,
    )


# --- stabilizer-parity FFT baseline ------------------------------------------


@dataclass(frozen=True)
class BaselineConfig:
    n: int
    theta: float
    gamma: float
    total_time: float = 1.0
    steps: int = 200
    shots_per_step: int = 2500


def baseline_series(bc, sampler):
    """Time grid, exact parity probabilities, and their sampled versions."""
    t = np.arange(bc.steps) * (bc.total_time / bc.steps)
    p = parity_probability(bc.n, bc.theta, bc.gamma, t)
    if sampler is None:
        return t, p, p.copy()
    p_hat = np.array([sampler.spawn(k).binomial_fraction(pk) for k, pk in enumerate(p)])
    return t, p, p_hat


def run_baseline_fft(bc, sampler):
    """Frequency-domain estimate: mean-subtract, magnitude spectrum, top non-DC bin.

    The retained bin b maps to theta-hat = pi * (b / T) / n.  Ties go to the
    lower frequency; a flat spectrum (no oscillation information) raises.
    """
    _, _, p_hat = baseline_series(bc, sampler)
    x = p_hat - p_hat.mean()
    mags = np.abs(np.fft.rfft(x))
    if mags[1:].size == 0 or np.max(mags[1:]) <= 1e-12:
        raise NoPeakError("parity spectrum has no non-DC peak")
    peak = 1 + int(np.argmax(mags[1:]))
    f_hat = peak / bc.total_time
    return math.pi * f_hat / bc.n


def run_baseline(cfg):
    """Config-driven baseline run producing a persistable record."""
    validate(cfg)
    if cfg.mode != MODE_BASELINE:
        raise ConfigError(f"run_baseline needs mode {MODE_BASELINE!r}")
    t0 = time.monotonic()
    bc = BaselineConfig(
        cfg.n,
        cfg.theta_true,
        cfg.gamma_true,
        cfg.baseline.total_time,
        cfg.baseline.steps,
        cfg.baseline.shots_per_step,
    )
    sampler = ShotSampler(cfg.seed, bc.shots_per_step)
    t, p, p_hat = baseline_series(bc, sampler)
    x = p_hat - p_hat.mean()
    mags = np.abs(np.fft.rfft(x))
    if mags[1:].size == 0 or np.max(mags[1:]) <= 1e-12:
        raise NoPeakError("parity spectrum has no non-DC peak")
    peak = 1 + int(np.argmax(mags[1:]))
    theta_hat = math.pi * (peak / bc.total_time) / bc.n
    return RunResult(
        config=effective_dict(cfg),
        seed=cfg.seed,
        status="done",
        final={
            "theta_hat": theta_hat,
            "abs_error_theta": abs(theta_hat - cfg.theta_true),
            "peak_bin": peak,
            "f_hat": peak / bc.total_time,
        },
        series={"t": t, "p_exact": p, "p_hat": p_hat},
        wall_time_s=time.monotonic() - t0,
    )


def run_from_config(cfg):
    if cfg.mode in (MODE_PURE, MODE_NOISY_DEPHASING, MODE_NOISY_AMPDAMP):
        return run_vista(cfg)
    if cfg.mode == MODE_MULTIPARAM:
        return run_multiparam(cfg)
    if cfg.mode == MODE_CASCADE:
        return run_cascade(cfg)
    if cfg.mode == MODE_BASELINE:
        return run_baseline(cfg)
    raise ConfigError(f"unknown mode {cfg.mode!r}")
