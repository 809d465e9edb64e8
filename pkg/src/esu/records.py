"""Persisted run records: everything needed to reproduce a result.

A record is a JSON file named ``<command>-<confighash>-<seed>.json``.  It
embeds the full config, the winning pulse, its cost breakdown, the
prepared state's amplitudes, and eigenstate-overlap diagnostics, so a
later invocation (noise harness, lifetime scaling) can reload psi(0)
without re-running the optimizer.  Floats survive the JSON round trip
bitwise and no wall-clock data is embedded, so rerunning a config
reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from esu import __version__
from esu.hilbert import StateVector


@dataclass(frozen=True)
class RunRecord:
    command: str
    config: dict
    config_hash: str
    seed: int
    model: str
    basis_tag: str
    state: list
    pulse: dict | None = None
    cost: dict | None = None
    zero_pulse_cost: float | None = None
    no_progress: bool = False
    evaluations: int = 0
    overlaps: list = field(default_factory=list)
    restarts: list = field(default_factory=list)
    version: str = __version__

    def file_name(self) -> str:
        return f"{self.command}-{self.config_hash}-{self.seed}.json"

    def state_vector(self) -> StateVector:
        amps = np.array([complex(re, im) for re, im in self.state])
        return StateVector(self.basis_tag, amps)


def _amplitude_pairs(amplitudes: np.ndarray) -> list:
    return [[float(a.real), float(a.imag)] for a in amplitudes]


def eigenstate_overlaps(decomposition, amplitudes: np.ndarray, top: int = 5) -> list:
    """Largest |<n|psi>|^2 entries as [index (1-based), weight] pairs."""
    weights = np.abs(decomposition.eigenvectors.conj().T @ amplitudes) ** 2
    order = np.argsort(weights)[::-1][:top]
    return [[int(n) + 1, float(weights[n])] for n in order]


def pulse_payload(pulse) -> dict:
    return {
        "duration": pulse.duration,
        "gamma_ref": pulse.gamma_ref,
        "frequency_shifts": [float(v) for v in pulse.frequency_shifts],
        "sin_amplitudes": [float(v) for v in pulse.sin_amplitudes],
        "cos_amplitudes": [float(v) for v in pulse.cos_amplitudes],
        "boundary_stiffness": pulse.boundary_stiffness,
    }


def cost_payload(breakdown) -> dict:
    return {
        "cost": breakdown.cost,
        "entanglement": breakdown.entanglement,
        "energy": breakdown.energy,
        "fluctuation": breakdown.fluctuation,
        "penalty": breakdown.penalty,
    }


def build_record(
    command: str,
    config,
    seed: int,
    model_tag: str,
    basis_tag: str,
    amplitudes: np.ndarray,
    pulse=None,
    cost=None,
    zero_pulse_cost=None,
    no_progress: bool = False,
    evaluations: int = 0,
    overlaps=None,
    restarts=None,
) -> RunRecord:
    return RunRecord(
        command=command,
        config=config.to_dict(),
        config_hash=config.hash(),
        seed=seed,
        model=model_tag,
        basis_tag=basis_tag,
        state=_amplitude_pairs(amplitudes),
        pulse=pulse,
        cost=cost,
        zero_pulse_cost=zero_pulse_cost,
        no_progress=no_progress,
        evaluations=evaluations,
        overlaps=list(overlaps or []),
        restarts=list(restarts or []),
    )


def save_record(record: RunRecord, out_dir) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, record.file_name())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(asdict(record), fh, indent=2)
        fh.write("\n")
    return path


def load_record(path) -> RunRecord:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return RunRecord(**data)
