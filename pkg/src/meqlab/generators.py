"""Construction of the moment-dynamics generators.

Each generator label (local, global/secular, Redfield, and the two
weak-coupling zeroth-order variants) yields the pair of real blocks
governing first and second quadrature moments,

    d<q>/dt      = block1 <q>,
    d<moments>/dt = block2 <moments> + const2.

The primary construction path is fully symbolic: apply the adjoint
generator to every basis observable through the quadrature algebra and
read off coefficients. Where a closed-form coefficient matrix exists
(fixture templates), the symbolic result is cross-checked against it
entry-wise before being returned; a mismatch is an internal error,
never silently ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from . import fixtures
from .algebra import (
    QuadOp,
    basis_from_linear,
    commutator,
    dissipator_pair_action,
    local_moment_basis,
    moment_generator,
    pack_symmetric,
    unpack_symmetric,
)
from .bath import BathSpec, combined_coeffs, decay_rate, delta_coeff, sigma_coeff
from .errors import ConsistencyError, ValidationError
from .model import (
    JumpChannel,
    NormalModes,
    SystemSpec,
    global_jump_ops,
    hamiltonian,
    local_jump_ops,
    mode_quadratures,
    normal_modes,
)

__all__ = [
    "GENERATOR_LABELS",
    "GME",
    "GME_ZEROTH",
    "LME",
    "MomentGenerator",
    "REDFIELD",
    "REDFIELD_ZEROTH",
    "LOCAL_FRAME",
    "NORMAL_FRAME",
    "build",
    "frame_rotate",
    "hamiltonian_moment_vector",
    "quadrature_rotation",
    "second_moment_rotation",
    "state_energy",
    "zeroth_order",
]

LME = "LME"
GME = "GME"
REDFIELD = "Redfield"
GME_ZEROTH = "GME-zeroth"
REDFIELD_ZEROTH = "Redfield-zeroth"
GENERATOR_LABELS = (LME, GME, REDFIELD, GME_ZEROTH, REDFIELD_ZEROTH)

LOCAL_FRAME = "local-quadratures"
NORMAL_FRAME = "normal-mode-quadratures"

CROSSCHECK_TOL = 1e-12

NORMAL_LINEAR_LABELS = ("eta_1", "Pi_1", "eta_2", "Pi_2")


@dataclass(frozen=True)
class MomentGenerator:
    """Real coefficient blocks of one moment-dynamics generator."""

    label: str
    frame: str
    block1: np.ndarray  # 4x4
    block2: np.ndarray  # 10x10
    const2: np.ndarray  # 10
    basis_labels: tuple[str, ...]

    def __post_init__(self):
        for name, shape in (("block1", (4, 4)), ("block2", (10, 10)), ("const2", (10,))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValidationError(f"{name} must have shape {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


# -- dissipator channel assembly ------------------------------------------


def _zeroth_channels(sys: SystemSpec, modes: NormalModes) -> list[JumpChannel]:
    """Global channels with the coupling removed from every dissipative
    ingredient: mode weights and channel frequencies taken at k = 0, the
    commutator part untouched by construction.

    At resonance the rotation is k-independent, so only the frequencies
    collapse; off resonance the k = 0 modes are the bare oscillators and
    the channels reduce to the local ones.
    """
    if modes.resonant:
        zero_modes = replace(
            modes, omega1=sys.omega_h, omega2=sys.omega_h, zeta=modes.zeta
        )
        return global_jump_ops(sys, zero_modes)
    bare = SystemSpec(sys.omega_h, sys.omega_c, 0.0)
    return global_jump_ops(bare, normal_modes(bare))


def _dissipator_terms(
    label: str, sys: SystemSpec, hot: BathSpec, cold: BathSpec, modes: NormalModes
) -> list[tuple[float, QuadOp, QuadOp]]:
    """(rate, X, Y) triples feeding dissipator_pair_action, per label.

    Diagonal pairs (Y = X) give the GKSL channels; the Redfield forms add
    every same-bath channel pair whose sandwiched operators carry
    opposite-sign frequencies, i.e. X, Y of equal frequency sign.
    """
    baths = {"h": hot, "c": cold}
    if label == LME:
        channels = local_jump_ops(sys)
    elif label in (GME, REDFIELD):
        channels = global_jump_ops(sys, modes)
    elif label in (GME_ZEROTH, REDFIELD_ZEROTH):
        channels = _zeroth_channels(sys, modes)
    else:
        raise ValidationError(f"unknown generator label {label!r}")

    terms = []
    if label in (LME, GME, GME_ZEROTH):
        for ch in channels:
            rate = decay_rate(baths[ch.bath], ch.frequency)
            terms.append((rate, ch.op, ch.op))
        return terms

    for x_ch, y_ch in product(channels, channels):
        if x_ch.bath != y_ch.bath:
            continue
        if x_ch.frequency * y_ch.frequency <= 0.0:
            continue
        rate = decay_rate(baths[x_ch.bath], x_ch.frequency)
        terms.append((rate, x_ch.op, y_ch.op))
    return terms


def _engine_blocks(
    label: str,
    sys: SystemSpec,
    hot: BathSpec,
    cold: BathSpec,
    modes: NormalModes,
    frame: str,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple[str, ...]]:
    h_op = hamiltonian(sys)
    if frame == LOCAL_FRAME:
        labels, basis = local_moment_basis()
    elif frame == NORMAL_FRAME:
        labels, basis = basis_from_linear(mode_quadratures(modes), NORMAL_LINEAR_LABELS)
    else:
        raise ValidationError(f"unknown frame {frame!r}")
    terms = _dissipator_terms(label, sys, hot, cold, modes)
    derivatives = []
    for theta in basis:
        d_theta = 1j * commutator(h_op, theta)
        for rate, x_op, y_op in terms:
            d_theta = d_theta + dissipator_pair_action(rate, x_op, y_op, theta)
        derivatives.append(d_theta)
    block1, block2, const2 = moment_generator(derivatives, basis)
    return block1, block2, const2, labels


# -- closed-form (fixture) path -------------------------------------------


def closed_form_blocks(
    label: str, sys: SystemSpec, hot: BathSpec, cold: BathSpec, modes: NormalModes
) -> dict[str, np.ndarray]:
    """Closed-form blocks, keyed by which block/frame each formula gives.

    Keys: ``block1_local``, ``block1_normal``, ``block2_local``,
    ``block2_normal``, ``const2_local``, ``const2_normal`` (only those
    with a printed closed form for the label/parameters are present).
    Second-moment closed forms exist at resonance only; the local
    first-moment matrix of the LME covers the detuned case too.
    """
    out: dict[str, np.ndarray] = {}
    resonant = modes.resonant
    w = sys.omega_h
    k = sys.k

    if label in (LME, REDFIELD_ZEROTH):
        dh = delta_coeff(hot, sys.omega_h)
        dc = delta_coeff(cold, sys.omega_c)
        sh = sigma_coeff(hot, sys.omega_h)
        sc = sigma_coeff(cold, sys.omega_c)
        if resonant:
            out["block1_local"] = fixtures.instantiate(
                "lme_block1", w=w, k=k, Dh=dh, Dc=dc
            )
            out["block2_local"] = fixtures.instantiate(
                "lme_block2", w=w, k=k, Dh=dh, Dc=dc
            )
            out["const2_local"] = fixtures.instantiate("lme_const2", w=w, Sh=sh, Sc=sc)
        else:
            out["block1_local"] = fixtures.instantiate(
                "lme_block1_general",
                wh=sys.omega_h,
                wc=sys.omega_c,
                k=k,
                Dh=dh,
                Dc=dc,
            )
        return out

    if label == GME_ZEROTH and not resonant:
        # off resonance the zeroth-order global generator collapses to the
        # local one; reuse its closed forms
        return closed_form_blocks(LME, sys, hot, cold, modes)

    o1, o2 = modes.omega1, modes.omega2
    if label == GME and resonant:
        rates = combined_coeffs(hot, cold, o1, o2)
        dm1, dm2 = rates.delta_mean
        sm1, sm2 = rates.sigma_mean
        out["block1_normal"] = fixtures.instantiate(
            "gme_block1_normal", W1=o1, W2=o2, dm1=dm1, dm2=dm2
        )
        out["block1_local"] = fixtures.instantiate(
            "gme_block1_local", w=w, k=k, dm1=dm1, dm2=dm2
        )
        out["block2_normal"] = fixtures.instantiate(
            "gme_block2_normal", W1=o1, W2=o2, dm1=dm1, dm2=dm2
        )
        out["const2_normal"] = fixtures.instantiate(
            "gme_const2_normal", c1=o1, c2=o2, sm1=sm1, sm2=sm2
        )
    elif label == GME_ZEROTH:
        dh = delta_coeff(hot, w)
        dc = delta_coeff(cold, w)
        dm0 = 0.5 * (dh + dc)
        sm0 = 0.5 * (sigma_coeff(hot, w) + sigma_coeff(cold, w))
        out["block1_local"] = fixtures.instantiate(
            "gme0_block1_local", w=w, k=k, Dh=dh, Dc=dc
        )
        out["block2_normal"] = fixtures.instantiate(
            "gme_block2_normal", W1=o1, W2=o2, dm1=dm0, dm2=dm0
        )
        out["const2_normal"] = fixtures.instantiate(
            "gme_const2_normal", c1=w, c2=w, sm1=sm0, sm2=sm0
        )
    elif label == REDFIELD and resonant:
        d1h = delta_coeff(hot, o1)
        d2h = delta_coeff(hot, o2)
        d1c = delta_coeff(cold, o1)
        d2c = delta_coeff(cold, o2)
        rates = combined_coeffs(hot, cold, o1, o2)
        out["block1_local"] = fixtures.instantiate(
            "redfield_block1_local",
            w=w, k=k, c1=o1, c2=o2, D1h=d1h, D2h=d2h, D1c=d1c, D2c=d2c,
        )
        out["block2_normal"] = fixtures.instantiate(
            "redfield_block2_normal",
            W1=o1, W2=o2, c1=o1, c2=o2,
            dm1=rates.delta_mean[0], dm2=rates.delta_mean[1],
            ds1=rates.delta_split[0], ds2=rates.delta_split[1],
        )
        out["const2_normal"] = fixtures.instantiate(
            "redfield_const2_normal",
            c1=o1, c2=o2,
            sm1=rates.sigma_mean[0], sm2=rates.sigma_mean[1],
            ss1=rates.sigma_split[0], ss2=rates.sigma_split[1],
        )
    return out


# -- frame rotations -------------------------------------------------------


def quadrature_rotation(modes: NormalModes) -> np.ndarray:
    """Orthogonal 4x4 map T with (eta_1, Pi_1, eta_2, Pi_2) = T q."""
    p = modes.matrix
    t = np.zeros((4, 4))
    for j in range(2):
        t[2 * j, 0] = p[0, j]
        t[2 * j, 2] = p[1, j]
        t[2 * j + 1, 1] = p[0, j]
        t[2 * j + 1, 3] = p[1, j]
    return t


def second_moment_rotation(t: np.ndarray) -> np.ndarray:
    """Induced 10x10 map on packed second moments for S -> T S T^T."""
    r = np.zeros((10, 10))
    for col in range(10):
        s = unpack_symmetric(np.eye(10)[col])
        r[:, col] = pack_symmetric(t @ s @ t.T)
    return r


def frame_rotate(gen: MomentGenerator, to: str, modes: NormalModes) -> MomentGenerator:
    """Conjugate a generator into the other quadrature frame.

    Eigenvalues are preserved exactly (similarity); the first block is
    rotated orthogonally. Rotating back and forth is the identity.
    """
    if to not in (LOCAL_FRAME, NORMAL_FRAME):
        raise ValidationError(f"unknown frame {to!r}")
    if to == gen.frame:
        return gen
    t = quadrature_rotation(modes)
    r10 = second_moment_rotation(t)
    if to == NORMAL_FRAME:
        labels, _ = basis_from_linear(
            [QuadOp(linear=row) for row in t], NORMAL_LINEAR_LABELS
        )
        block1 = t @ gen.block1 @ t.T
        block2 = r10 @ gen.block2 @ np.linalg.inv(r10)
        const2 = r10 @ gen.const2
    else:
        labels, _ = local_moment_basis()
        block1 = t.T @ gen.block1 @ t
        r10_inv = np.linalg.inv(r10)
        block2 = r10_inv @ gen.block2 @ r10
        const2 = r10_inv @ gen.const2
    return MomentGenerator(gen.label, to, block1, block2, const2, tuple(labels))


# -- public construction ---------------------------------------------------


def _crosscheck(
    label: str,
    frame: str,
    engine: tuple[np.ndarray, np.ndarray, np.ndarray],
    closed: dict[str, np.ndarray],
    modes: NormalModes,
) -> None:
    """Compare engine blocks with every applicable closed form, rotating
    the closed form into the engine frame where needed."""
    block1, block2, const2 = engine
    t = quadrature_rotation(modes)
    r10 = second_moment_rotation(t)
    suffix = "local" if frame == LOCAL_FRAME else "normal"
    other = "normal" if frame == LOCAL_FRAME else "local"

    def rotate1(m):
        return t @ m @ t.T if frame == NORMAL_FRAME else t.T @ m @ t

    def rotate2(m):
        if frame == NORMAL_FRAME:
            return r10 @ m @ np.linalg.inv(r10)
        return np.linalg.solve(r10, m @ r10)

    def rotate_c(v):
        return r10 @ v if frame == NORMAL_FRAME else np.linalg.solve(r10, v)

    checks = []
    if f"block1_{suffix}" in closed:
        checks.append(("block1", block1, closed[f"block1_{suffix}"]))
    elif f"block1_{other}" in closed:
        checks.append(("block1", block1, rotate1(closed[f"block1_{other}"])))
    if f"block2_{suffix}" in closed:
        checks.append(("block2", block2, closed[f"block2_{suffix}"]))
    elif f"block2_{other}" in closed:
        checks.append(("block2", block2, rotate2(closed[f"block2_{other}"])))
    if f"const2_{suffix}" in closed:
        checks.append(("const2", const2, closed[f"const2_{suffix}"]))
    elif f"const2_{other}" in closed:
        checks.append(("const2", const2, rotate_c(closed[f"const2_{other}"])))

    for name, engine_arr, closed_arr in checks:
        diff = np.abs(engine_arr - closed_arr).max()
        if diff > CROSSCHECK_TOL * max(1.0, np.abs(closed_arr).max()):
            raise ConsistencyError(
                f"{label} {name} disagrees with its closed form by {diff:g}"
            )


def build(
    label: str,
    sys: SystemSpec,
    hot: BathSpec,
    cold: BathSpec,
    frame: str = LOCAL_FRAME,
) -> MomentGenerator:
    """Build a generator symbolically and cross-check it against the
    closed-form coefficient matrices where those exist.

    The zeroth-order labels delegate to :func:`zeroth_order`.
    """
    if label not in GENERATOR_LABELS:
        raise ValidationError(f"unknown generator label {label!r}")
    modes = normal_modes(sys)
    engine = _engine_blocks(label, sys, hot, cold, modes, frame)
    block1, block2, const2, labels = engine
    closed = closed_form_blocks(label, sys, hot, cold, modes)
    _crosscheck(label, frame, (block1, block2, const2), closed, modes)
    return MomentGenerator(label, frame, block1, block2, const2, labels)


def zeroth_order(
    label: str,
    sys: SystemSpec,
    hot: BathSpec,
    cold: BathSpec,
    frame: str = LOCAL_FRAME,
) -> MomentGenerator:
    """Weak-coupling zeroth order of the global or Redfield generator:
    k is set to zero inside every dissipative ingredient while the
    coherent part keeps the true coupling."""
    if label in (GME, GME_ZEROTH):
        return build(GME_ZEROTH, sys, hot, cold, frame)
    if label in (REDFIELD, REDFIELD_ZEROTH):
        return build(REDFIELD_ZEROTH, sys, hot, cold, frame)
    raise ValidationError(f"zeroth_order is defined for {GME!r} and {REDFIELD!r}")


def hamiltonian_moment_vector(sys: SystemSpec) -> np.ndarray:
    """<H> as a linear functional on the packed second moments.

    Off-diagonal pairs appear once in the packed vector but twice in the
    quadratic form, hence the doubled weights there.
    """
    h = hamiltonian(sys).quad.real
    weights = pack_symmetric(np.full((4, 4), 2.0) - np.eye(4) * 1.0)
    return weights * pack_symmetric(h)


def state_energy(sys: SystemSpec, second: np.ndarray) -> float:
    """Expectation of the Hamiltonian from the packed second moments.

    The moments are raw symmetrized products, so mean contributions are
    already inside; no covariance split is needed.
    """
    h = hamiltonian(sys).quad.real
    s = unpack_symmetric(np.asarray(second, dtype=float))
    return float(np.sum(h * s))
