"""Reproducible families of band-limited test data.

Members are continuum frequency profiles drawn once from a seed; a member
can then be materialized on any grid, so refinement studies see the same
underlying data at every resolution.  All profiles are band-limited well
inside the default probe grids, keeping circular convolutions exact and
the asymmetric edge mode empty.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid, GridError, SpectralField, smooth_step

KINDS = (
    "gaussian",
    "wave_packet",
    "dyadic_bump",
    "random_phase",
    "two_bump_separated",
    "power_band",
)


@dataclass(frozen=True)
class FamilyMember:
    kind: str
    params: tuple[tuple[str, float], ...]

    def get(self, key: str) -> float:
        return dict(self.params)[key]

    def profile(self):
        """Closed-form frequency profile xi -> complex amplitude."""
        p = dict(self.params)
        kind = self.kind
        if kind == "gaussian":

            def fn(xi):
                return (
                    p["amp"]
                    * np.exp(-((xi - p["center"]) ** 2) / (2.0 * p["width"] ** 2))
                    * np.exp(1j * p["phase"])
                )

        elif kind == "wave_packet":
            # frequency-side gaussian with a linear phase = translated packet
            def fn(xi):
                env = np.exp(-((xi - p["center"]) ** 2) / (2.0 * p["width"] ** 2))
                return p["amp"] * env * np.exp(1j * (p["shift"] * xi + p["phase"]))

        elif kind == "dyadic_bump":
            # C-infinity bump supported on [center - width, center + width]
            def fn(xi):
                u = (np.asarray(xi, float) - p["center"] + p["width"]) / p["width"]
                return (
                    p["amp"]
                    * smooth_step(u)
                    * smooth_step(2.0 - u)
                    * np.exp(1j * p["phase"])
                )

        elif kind == "random_phase":
            # smooth envelope with a rough (but grid-independent) phase
            ks = [p[f"k{m}"] for m in range(1, 7)]
            phs = [p[f"ph{m}"] for m in range(1, 7)]

            def fn(xi):
                xi = np.asarray(xi, float)
                env = np.exp(-((xi - p["center"]) ** 2) / (2.0 * p["width"] ** 2))
                phase = sum(
                    a * np.sin((m + 1) * np.pi * xi / p["band"] + b)
                    for m, (a, b) in enumerate(zip(ks, phs))
                )
                return p["amp"] * env * np.exp(1j * phase)

        elif kind == "two_bump_separated":

            def fn(xi):
                xi = np.asarray(xi, float)
                b1 = p["amp"] * np.exp(
                    -((xi - p["center"]) ** 2) / (2.0 * p["width"] ** 2)
                )
                b2 = p["amp2"] * np.exp(
                    -((xi + p["center"]) ** 2) / (2.0 * p["width"] ** 2)
                )
                return b1 + b2 * np.exp(1j * p["phase"])

        elif kind == "power_band":
            # |xi|^a on [lo, hi] with smooth ramps one cell wide
            def fn(xi):
                xi = np.asarray(xi, float)
                lo, hi, ramp = p["lo"], p["hi"], p["ramp"]
                cut = smooth_step((xi - lo) / ramp) * smooth_step((hi - xi) / ramp)
                mag = np.where(xi > 0.0, np.abs(xi), 1.0) ** p["exponent"]
                return p["amp"] * mag * cut

        else:  # pragma: no cover
            raise GridError(f"unknown family kind {kind!r}")
        return fn

    def materialize(self, grid: Grid) -> SpectralField:
        fn = self.profile()
        return SpectralField(grid, np.asarray(fn(grid.xi), dtype=complex), "frequency")


@dataclass(frozen=True)
class TestFamily:
    """A reproducible collection of band-limited members.

    ``band`` bounds |xi| on the support (up to gaussian tails); ``center``
    optionally pins the member centers (used by the frequency-separated
    probes), otherwise centers are drawn inside the band.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    kind: str
    count: int = 50
    seed: int = 0
    band: float = 2.0
    center: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise GridError(f"unknown family kind {self.kind!r}")
        if self.count < 1:
            raise GridError("count must be positive")

    def members(self) -> list[FamilyMember]:
        out = []
        for i in range(self.count):
            rng = np.random.default_rng((self.seed, i))
            out.append(self._draw(rng))
        return out

    def _draw(self, rng: np.random.Generator) -> FamilyMember:
        b = self.band
        amp = float(rng.uniform(0.5, 1.5))
        phase = float(rng.uniform(0.0, 2.0 * np.pi))
        if self.center is not None:
            center = float(self.center + rng.uniform(-0.15, 0.15) * max(b, 0.1))
        else:
            center = float(rng.uniform(-0.5 * b, 0.5 * b))
        if self.kind == "gaussian":
            width = float(rng.uniform(b / 8.0, b / 4.0))
            params = dict(amp=amp, center=center, width=width, phase=phase)
        elif self.kind == "wave_packet":
            width = float(rng.uniform(b / 10.0, b / 5.0))
            shift = float(rng.uniform(-3.0, 3.0))
            params = dict(amp=amp, center=center, width=width, shift=shift, phase=phase)
        elif self.kind == "dyadic_bump":
            k = int(rng.integers(0, 3))
            width = float(b / 2.0 ** (k + 2))
            if self.center is None:
                center = float(np.sign(rng.uniform(-1, 1)) * b * 2.0 ** (-k) / 2.0)
            params = dict(amp=amp, center=center, width=width, phase=phase)
        elif self.kind == "random_phase":
            width = float(rng.uniform(b / 6.0, b / 3.0))
            params = dict(amp=amp, center=center, width=width, band=b)
            for m in range(1, 7):
                params[f"k{m}"] = float(rng.uniform(-1.0, 1.0))
                params[f"ph{m}"] = float(rng.uniform(0.0, 2.0 * np.pi))
        elif self.kind == "two_bump_separated":
            width = float(rng.uniform(b / 12.0, b / 8.0))
            if self.center is None:
                center = float(rng.uniform(b / 3.0, b / 2.0))
            amp2 = float(rng.uniform(0.5, 1.5))
            params = dict(amp=amp, center=abs(center), width=width, amp2=amp2, phase=phase)
        else:  # power_band
            exponent = float(rng.uniform(0.25, 0.35))
            lo = 1.0
            hi = float(max(0.9 * b, 2.0))
            params = dict(amp=amp, exponent=exponent, lo=lo, hi=hi, ramp=0.25)
        return FamilyMember(self.kind, tuple(sorted(params.items())))

    def with_band(self, band: float) -> "TestFamily":
        return replace(self, band=band)


def materialize_all(family: TestFamily, grid: Grid) -> list[SpectralField]:
    return [m.materialize(grid) for m in family.members()]
