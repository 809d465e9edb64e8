"""Free and noisy time evolution, deviation law, and lifetime extraction.

After the control window the field sits at Gamma_ref and the state evolves
freely; robustness is probed by multiplying the two Hamiltonian terms with
independent random telegraph signals,

    H(t) = (1 + I_alpha a(t)) H0 + Gamma_ref (1 + I_beta b(t)) H1,

where a and b are piecewise constant, redrawn uniformly from [-1, 1] on
every segment.  Segments last exactly 1/nu by default (the simplest reading
of switching at rate nu, and it reproduces a sharp resonance); exponential
dwell times with mean 1/nu sit behind a flag.  Within a segment the
Hamiltonian is constant so propagation is exact; the recording step dt only
sets the output resolution and must resolve the switching (dt <= 1/(2 nu)).

Lifetimes are the first crossing of the survival probability below a
threshold (default 0.8), linearly interpolated on the recording grid, with
math.inf as the exceeds-horizon sentinel.  Monte Carlo lifetimes use the
mean trace over instances; per-instance lifetimes are kept for dispersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from esu.hilbert import (
    HermitianMatrix,
    PiecewisePropagator,
    StateVector,
    eig_hermitian,
    energy_stats,
)

DWELL_MODES = ("fixed", "exponential")

# Domain separator for per-instance noise streams.
_NOISE_STREAM = 0x7E1

DEFAULT_THRESHOLD = 0.8

# Default recording step when the caller leaves dt to the harness.
_DT_CAP = 0.05


@dataclass(frozen=True)
class TelegraphNoise:
    """Two independent telegraph signals scaling the Hamiltonian terms."""

    i_alpha: float
    i_beta: float
    nu: float
    seed: int | tuple = 0
    dwell: str = "fixed"

    def __post_init__(self):
        if self.i_alpha < 0 or self.i_beta < 0:
            raise ValueError("intensities must be >= 0")
        if self.nu <= 0:
            raise ValueError(f"switching rate must be positive, got {self.nu}")
        if self.dwell not in DWELL_MODES:
            raise ValueError(f"dwell must be one of {DWELL_MODES}, got {self.dwell!r}")

    @property
    def silent(self) -> bool:
        return self.i_alpha == 0.0 and self.i_beta == 0.0


@dataclass(frozen=True)
class Trajectory:
    """Observables on an ascending recording grid.

    Fields not requested at evolution time are None.  ``extras`` carries
    caller-supplied observables keyed by name.
    """

    times: np.ndarray
    survival: np.ndarray | None
    entanglement: np.ndarray | None = None
    energy: np.ndarray | None = None
    fluctuation: np.ndarray | None = None
    extras: dict = field(default_factory=dict)


FULL_RECORD = ("survival", "entanglement", "energy")


def _recording_grid(horizon: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if horizon < dt:
        raise ValueError(f"horizon {horizon} must be at least dt {dt}")
    n = int(math.floor(horizon / dt + 1e-9))
    return np.arange(n + 1) * dt


class _Recorder:
    """Accumulates requested observables over states produced in order."""

    def __init__(self, model, psi0, h_ref, record, extra_observables):
        self.record = tuple(record)
        unknown = set(self.record) - set(FULL_RECORD)
        if unknown:
            raise ValueError(f"unknown observables {sorted(unknown)}")
        self.ref = psi0.amplitudes.conj()
        self.model = model
        self.h_ref = h_ref
        self.extra = dict(extra_observables or {})
        self.tag = psi0.basis_tag
        self.rows: dict[str, list] = {name: [] for name in self.record}
        if "energy" in self.rows:
            self.rows["fluctuation"] = []
        for name in self.extra:
            self.rows[name] = []

    def push_block(self, states: np.ndarray):
        """Record a (dim, n_points) block of state columns."""
        if "survival" in self.rows:
            overlaps = self.ref @ states
            self.rows["survival"].extend(np.abs(overlaps) ** 2)
        if "energy" in self.rows:
            h_states = self.h_ref.entries @ states
            energies = np.einsum("ij,ij->j", states.conj(), h_states).real
            seconds = np.einsum("ij,ij->j", h_states.conj(), h_states).real
            variances = np.clip(seconds - energies**2, 0.0, None)
            self.rows["energy"].extend(energies)
            self.rows["fluctuation"].extend(np.sqrt(variances))
        per_state = ("entanglement" in self.rows) or self.extra
        if per_state:
            for j in range(states.shape[1]):
                psi = StateVector(self.tag, states[:, j])
                if "entanglement" in self.rows:
                    self.rows["entanglement"].append(self.model.entanglement(psi))
                for name, fn in self.extra.items():
                    self.rows[name].append(fn(psi))

    def build(self, times: np.ndarray) -> Trajectory:
        def col(name):
            values = self.rows.get(name)
            return np.asarray(values, dtype=float) if values is not None else None

        extras = {name: col(name) for name in self.extra}
        return Trajectory(
            times=times,
            survival=col("survival"),
            entanglement=col("entanglement"),
            energy=col("energy"),
            fluctuation=col("fluctuation"),
            extras=extras,
        )


def _free_states(model, psi0, gamma_ref, times, recorder, block=2048):
    """Exact constant-H evolution, recording every grid point."""
    dec = eig_hermitian(model.hamiltonian(gamma_ref))
    coeff = dec.eigenvectors.conj().T @ psi0.amplitudes
    for start in range(0, len(times), block):
        chunk = times[start : start + block]
        phases = np.exp(-1j * np.outer(dec.eigenvalues, chunk))
        states = dec.eigenvectors @ (phases * coeff[:, None])
        recorder.push_block(states)


def evolve_free(
    model,
    psi0: StateVector,
    gamma_ref: float,
    horizon: float,
    dt: float,
    record=FULL_RECORD,
    extra_observables=None,
) -> Trajectory:
    """Evolution under the control-free Hamiltonian H(Gamma_ref).

    Records the survival probability |<psi0|psi(t)>|^2, the model's default
    entanglement measure, and the energy moments (all with respect to
    H(Gamma_ref)) on the grid t = 0, dt, 2 dt, ... up to the horizon.
    """
    times = _recording_grid(horizon, dt)
    h_ref = model.hamiltonian(gamma_ref)
    recorder = _Recorder(model, psi0, h_ref, record, extra_observables)
    _free_states(model, psi0, gamma_ref, times, recorder)
    return recorder.build(times)


def deviation_check(
    psi: StateVector, h: HermitianMatrix, dt: float
) -> tuple[float, float]:
    """Short-time deviation law: both sides of

        1 - |<psi(t)|psi(t + dt)>|^2 = (dE dt)^2 + O(dt^3).

    Returns (lhs, rhs); the caller asserts how fast their difference
    shrinks with dt.
    """
    dec = eig_hermitian(h)
    coeff = dec.eigenvectors.conj().T @ psi.amplitudes
    overlap = np.sum(np.abs(coeff) ** 2 * np.exp(-1j * dec.eigenvalues * dt))
    lhs = 1.0 - abs(overlap) ** 2
    _, fluctuation = energy_stats(h, psi)
    rhs = (fluctuation * dt) ** 2
    return float(lhs), float(rhs)


def _noise_segments(noise: TelegraphNoise, span: float):
    """Ascending segment end times covering (0, span] plus signal values.

    The final boundary is pinned to span exactly so the last recording
    point cannot fall off the grid to float rounding; for exponential
    dwell this truncates the last drawn segment at the horizon.
    """
    rng = np.random.default_rng(np.random.SeedSequence(noise.seed))
    if noise.dwell == "fixed":
        count = max(1, int(math.ceil(span * noise.nu - 1e-9)))
        bounds = np.arange(1, count + 1) / noise.nu
    else:
        durations = np.empty(0)
        while durations.sum() < span:
            durations = np.concatenate(
                [durations, rng.exponential(1.0 / noise.nu, size=64)]
            )
        bounds = np.cumsum(durations)
        bounds = bounds[: int(np.searchsorted(bounds, span - 1e-12)) + 1]
    bounds[-1] = span
    values = rng.uniform(-1.0, 1.0, size=(len(bounds), 2))
    return bounds, values[:, 0], values[:, 1]


def evolve_noisy(
    model,
    psi0: StateVector,
    gamma_ref: float,
    noise: TelegraphNoise,
    horizon: float,
    dt: float,
    record=FULL_RECORD,
    extra_observables=None,
) -> Trajectory:
    """Evolution with telegraph-modulated Hamiltonian terms.

    Zero intensities short-circuit to the noiseless path, reproducing
    evolve_free bit for bit.  Otherwise each segment is propagated exactly
    with its constant Hamiltonian; recording points falling inside a
    segment are filled from the same decomposition.
    """
    times = _recording_grid(horizon, dt)
    if dt > 1.0 / (2.0 * noise.nu) + 1e-12:
        raise ValueError(
            f"dt = {dt} too coarse to resolve switching at nu = {noise.nu}; "
            f"need dt <= {1.0 / (2.0 * noise.nu):.6g}"
        )
    h_ref = model.hamiltonian(gamma_ref)
    recorder = _Recorder(model, psi0, h_ref, record, extra_observables)
    if noise.silent:
        _free_states(model, psi0, gamma_ref, times, recorder)
        return recorder.build(times)

    span = float(times[-1])
    bounds, alphas, betas = _noise_segments(noise, span)
    c_weights = 1.0 + noise.i_alpha * alphas
    f_weights = gamma_ref * (1.0 + noise.i_beta * betas)

    two_term = model.two_term()
    propagator = PiecewisePropagator(two_term)
    recorder.push_block(psi0.amplitudes[:, None])  # t = 0

    psi = psi0.amplitudes
    seg_start = 0.0
    for seg_end, c, f in zip(bounds, c_weights, f_weights):
        lo = np.searchsorted(times, seg_start, side="right")
        hi = np.searchsorted(times, seg_end, side="right")
        offsets = times[lo:hi] - seg_start
        if propagator.dense:
            h_seg = c * two_term.h0 + f * two_term.h1
            eigenvalues, vectors = np.linalg.eigh(h_seg)
            coeff = vectors.conj().T @ psi
            if len(offsets):
                phases = np.exp(-1j * np.outer(eigenvalues, offsets))
                recorder.push_block(vectors @ (phases * coeff[:, None]))
            psi = vectors @ (np.exp(-1j * eigenvalues * (seg_end - seg_start)) * coeff)
        else:
            cursor = 0.0
            for t in offsets:
                if t > cursor:
                    psi = propagator.step_constant(psi, c, f, t - cursor)
                recorder.push_block(psi[:, None])
                cursor = t
            if seg_end - seg_start > cursor:
                psi = propagator.step_constant(psi, c, f, seg_end - seg_start - cursor)
        seg_start = seg_end
    return recorder.build(times)


def lifetime(traj_or_times, survival=None, threshold: float = DEFAULT_THRESHOLD):
    """First time the survival trace drops below the threshold.

    Linear interpolation between grid points; math.inf when the trace never
    crosses within the horizon.  Accepts a Trajectory or (times, survival).
    """
    if survival is None:
        times, trace = traj_or_times.times, traj_or_times.survival
    else:
        times, trace = traj_or_times, survival
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    trace = np.asarray(trace, dtype=float)
    below = np.flatnonzero(trace < threshold)
    if below.size == 0:
        return math.inf
    i = int(below[0])
    if i == 0:
        return float(times[0])
    t0, t1 = times[i - 1], times[i]
    p0, p1 = trace[i - 1], trace[i]
    return float(t0 + (threshold - p0) * (t1 - t0) / (p1 - p0))


@dataclass(frozen=True)
class MeanTrace:
    """Monte Carlo survival statistics at one noise setting."""

    nu: float
    times: np.ndarray
    p_mean: np.ndarray
    p_std: np.ndarray
    lifetime: float
    instance_lifetimes: np.ndarray
    instances: np.ndarray | None = None


def mean_survival_trace(
    model,
    psi0: StateVector,
    gamma_ref: float,
    i_alpha: float,
    i_beta: float,
    nu: float,
    instances: int,
    horizon: float,
    dt: float | None = None,
    seed: int = 0,
    dwell: str = "fixed",
    threshold: float = DEFAULT_THRESHOLD,
    keep_instances: bool = False,
) -> MeanTrace:
    """Average the noisy survival trace over independent instances.

    Instance i draws its signals from a stream derived from (seed, i), so
    results are independent of execution order and the same instances are
    reused across different switching rates for sharper comparisons.

    ``dt`` is an upper bound on the recording step; it is tightened to
    1/(2 nu) whenever the switching is faster than the requested grid.
    """
    if instances < 1:
        raise ValueError("instances must be >= 1")
    dt = min(_DT_CAP if dt is None else dt, 1.0 / (2.0 * nu))
    traces = []
    for index in range(instances):
        noise = TelegraphNoise(
            i_alpha, i_beta, nu, seed=(seed, _NOISE_STREAM, index), dwell=dwell
        )
        traj = evolve_noisy(
            model, psi0, gamma_ref, noise, horizon, dt, record=("survival",)
        )
        traces.append(traj.survival)
    stack = np.array(traces)
    times = _recording_grid(horizon, dt)
    p_mean = stack.mean(axis=0)
    p_std = stack.std(axis=0)
    per_instance = np.array([lifetime(times, row, threshold) for row in stack])
    return MeanTrace(
        nu=nu,
        times=times,
        p_mean=p_mean,
        p_std=p_std,
        lifetime=lifetime(times, p_mean, threshold),
        instance_lifetimes=per_instance,
        instances=stack if keep_instances else None,
    )


@dataclass(frozen=True)
class FrequencySweep:
    rows: list
    resonant_nu: float


def frequency_sweep(
    model,
    psi0: StateVector,
    gamma_ref: float,
    intensities: tuple[float, float],
    nu_list,
    instances: int,
    horizon: float,
    dt: float | None = None,
    seed: int = 0,
    dwell: str = "fixed",
    threshold: float = DEFAULT_THRESHOLD,
) -> FrequencySweep:
    """Mean-trace lifetime per switching rate; the argmin estimates the
    resonant rate at which the state is destroyed fastest."""
    i_alpha, i_beta = intensities
    rows = []
    for nu in nu_list:
        rows.append(
            mean_survival_trace(
                model,
                psi0,
                gamma_ref,
                i_alpha,
                i_beta,
                nu,
                instances,
                horizon,
                dt=dt,
                seed=seed,
                dwell=dwell,
                threshold=threshold,
            )
        )
    lifetimes = np.array([row.lifetime for row in rows])
    resonant = float(np.asarray(nu_list, dtype=float)[int(np.argmin(lifetimes))])
    return FrequencySweep(rows=rows, resonant_nu=resonant)
