# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Laplace mechanism with decaying per-agent scale schedules and
counter-based seeded sampling.

Each (master_seed, run, agent) triple keys its own Philox stream; step k
of that stream occupies counter blocks [k * bps, (k + 1) * bps), where bps
is the number of 4-word blocks needed for one draw of the message
dimension. Draws therefore never depend on evaluation order.
"""

from dp_consensus.exceptions import (
    SchedulePolicyException, PreconditionException)
from dataclasses import dataclass
import numpy as np
import math

SCHEDULE_KINDS = ('exponential', 'polynomial', 'custom')

NOISE_STREAM = 0
STATE_STREAM = 1
PARAMETER_STREAM = 2

CUSTOM_TRAILING_TERMS = 1000
CUSTOM_TRAILING_TOLERANCE = 1e-12


@dataclass(frozen=True)
class NoiseSchedule:
    """
    Scale b(k) = c * p(k). A scale c of 0 switches the mechanism off.
    """
    c: float
    kind: str = 'exponential'
    g: float = None
    power: int = None
    p: tuple = None

    def __post_init__(self):
        if self.c is None or not math.isfinite(self.c) or self.c < 0:
            raise SchedulePolicyException(
                'Noise scale c must be a finite nonnegative number, '
                'got {}'.format(self.c))

        if self.kind == 'exponential':
            if self.g is None or not (0 < self.g < 1):
                raise SchedulePolicyException(
                    'Exponential decay g must lie in (0, 1), got {}'.format(
                        self.g))
        elif self.kind == 'polynomial':
            if (self.power is None or int(self.power) != self.power or
                    self.power < 1):
                raise SchedulePolicyException(
                    'Polynomial power must be a positive integer, '
                    'got {}'.format(self.power))
            object.__setattr__(self, 'power', int(self.power))
        elif self.kind == 'custom':
            seq = tuple(float(v) for v in (self.p or ()))
            if not len(seq):
                raise SchedulePolicyException('Custom schedule is empty')
            if any(not math.isfinite(v) or v < 0 for v in seq):
                raise SchedulePolicyException(
                    'Custom schedule entries must be finite and >= 0')
            object.__setattr__(self, 'p', seq)
        else:
            raise SchedulePolicyException(
                'Unknown schedule kind: {}'.format(self.kind))

    @property
    def silent(self):
        return self.c == 0

    def p_at(self, k):
        if k < 0:
            raise PreconditionException('Step must be >= 0, got {}'.format(k))
        if self.kind == 'exponential':
            return self.g ** k
        if self.kind == 'polynomial':
            return (k + 1.0) ** -self.power
        if k >= len(self.p):
            raise SchedulePolicyException(
                'Custom schedule has {} entries, step {} requested'.format(
                    len(self.p), k))
        return self.p[k]

    def scales(self, steps):
        """
        Returns b(0), ..., b(steps - 1).
        """
        k = np.arange(steps, dtype=float)
        if self.kind == 'exponential':
            return self.c * self.g ** k
        if self.kind == 'polynomial':
            return self.c * (k + 1.0) ** -self.power
        if steps > len(self.p):
            raise SchedulePolicyException(
                'Custom schedule has {} entries, {} steps requested'.format(
                    len(self.p), steps))
        return self.c * np.array(self.p[:steps])

    def to_dict(self):
        data = {'kind': self.kind, 'c': self.c}
        if self.kind == 'exponential':
            data['g'] = self.g
        elif self.kind == 'polynomial':
            data['power'] = self.power
        else:
            data['p'] = list(self.p)
        return data


@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    run: int = 0
    agent: int = 0
    step: int = 0


def scale_at(schedule, k):
    return schedule.c * schedule.p_at(k)


def is_summable(schedule):
    if schedule.kind == 'exponential':
        return True
    if schedule.kind == 'polynomial':
        return schedule.power >= 2

    # A finite sequence always has a finite sum; long sequences must
    # also have settled over their trailing terms.
    if len(schedule.p) <= CUSTOM_TRAILING_TERMS:
        return True
    trailing = math.fsum(schedule.p[-CUSTOM_TRAILING_TERMS:])
    return trailing <= CUSTOM_TRAILING_TOLERANCE


def stream_key(master_seed, run=0, agent=0, tag=NOISE_STREAM):
    seq = np.random.SeedSequence([int(master_seed), tag, run, agent])
    return seq.generate_state(2, np.uint64)


def stream_generator(master_seed, tag, run=0, agent=0):
    """
    Generator for non-noise draws (initial states, randomized schedule
    parameters), keyed apart from the Laplace streams.
    """
    key = stream_key(master_seed, run=run, agent=agent, tag=tag)
    return np.random.Generator(np.random.Philox(key=key))


def centered_uniforms(master_seed, run, agent, steps, dim, start=0):
    """
    Returns a (steps, dim) array of uniforms on the open interval
    (-1/2, 1/2) for steps start .. start + steps - 1.
    """
    blocks = -(-dim // 4)
    bit_gen = np.random.Philox(
        key=stream_key(master_seed, run, agent), counter=start * blocks)
    raw = bit_gen.random_raw(steps * blocks * 4)
    raw = raw.reshape(steps, blocks * 4)[:, :dim]

    # 53-bit lattice shifted by half a step: both endpoints are excluded
    # and every value is exact in double precision.
    centered = (raw >> np.uint64(11)).astype(np.int64) - (1 << 52)
    return (centered.astype(float) + 0.5) * 2.0 ** -53


def laplace_from_uniform(u, b):
    """
    Inverse-CDF map of centered uniforms u to Laplace(0, b) draws.
    """
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) >= 0.5):
        raise PreconditionException(
            'Uniform draws must lie strictly inside (-1/2, 1/2)')
    return -b * np.sign(u) * np.log1p(-2.0 * np.abs(u)) + 0.0


def sample_laplace(rng, b, dim):
    if not b > 0:
        raise PreconditionException(
            'Laplace scale must be positive, got {}'.format(b))
    u = centered_uniforms(
        rng.master_seed, rng.run, rng.agent, 1, dim, start=rng.step)
    return laplace_from_uniform(u[0], b)


def laplace_noise(master_seed, run, agent, scales, dim):
    """
    Returns a (len(scales), dim) array of noise for one agent over the
    horizon; steps with a zero scale carry no noise.
    """
    scales = np.asarray(scales, dtype=float)
    if np.any(scales < 0):
        raise PreconditionException('Laplace scales must be nonnegative')
    if not np.any(scales > 0):
        return np.zeros((len(scales), dim))

    u = centered_uniforms(master_seed, run, agent, len(scales), dim)
    return laplace_from_uniform(u, 1.0) * scales[:, None]
