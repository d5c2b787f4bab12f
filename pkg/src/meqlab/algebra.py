"""Exact algebra of operators at most quadratic in the four quadratures.

An operator is stored in the normal form

    O = scalar + sum_i linear[i] q_i + sum_ij quad[i,j] * (1/2){q_i, q_j}

over q = (x_h, p_h, x_c, p_c), with `quad` kept exactly symmetric
(Weyl-symmetrized products; all operator-ordering constants live in the
scalar slot, which makes equality of coefficients equality of
operators). The canonical commutation relations enter through the
symplectic form [q_i, q_j] = i * SYMPLECTIC[i, j].

Because a symmetric coefficient matrix contracts to zero against the
antisymmetric symplectic form, sum_ij Q_ij q_i q_j equals the
symmetrized quadratic exactly, which gives closed matrix formulas for
all commutators:

    [lin_a, lin_b]   = i a.w.b                      (scalar)
    [quad_A, lin_b]  = 2i A.w.b                     (linear)
    [quad_A, quad_B] = 2i (A.w.B - B.w.A)           (quadratic)

with w = SYMPLECTIC. Dissipator contributions never leave the quadratic
sector: X†OY - X†YO = X†[O, Y] with linear X, Y keeps degree <= 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, ContractError

__all__ = [
    "QUADRATURE_LABELS",
    "SYMPLECTIC",
    "QuadOp",
    "commutator",
    "dissipator_pair_action",
    "moment_generator",
    "multiply_linear",
    "position",
    "momentum",
]

#: [q_i, q_j] = i * SYMPLECTIC[i, j]; one (x, p) block per oscillator.
SYMPLECTIC = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)
SYMPLECTIC.setflags(write=False)

QUADRATURE_LABELS = ("x_h", "p_h", "x_c", "p_c")

_SYM_TOL = 1e-13


def _as_complex_vector(v) -> np.ndarray:
    out = np.zeros(4, dtype=complex)
    if v is not None:
        out[:] = np.asarray(v, dtype=complex)
    out.setflags(write=False)
    return out


def _as_complex_matrix(m) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    if m is not None:
        out[:] = np.asarray(m, dtype=complex)
    return out


@dataclass(frozen=True)
class QuadOp:
    """Operator of degree <= 2 in the quadratures, in symmetrized normal form."""

    scalar: complex = 0.0
    linear: np.ndarray = field(default=None)  # type: ignore[assignment]
    quad: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "scalar", complex(self.scalar))
        object.__setattr__(self, "linear", _as_complex_vector(self.linear))
        q = _as_complex_matrix(self.quad)
        asym = np.abs(q - q.T).max()
        scale = max(1.0, np.abs(q).max())
        if asym > _SYM_TOL * scale:
            raise ContractError(f"quadratic part must be symmetric, asymmetry {asym:g}")
        q = 0.5 * (q + q.T)
        q.setflags(write=False)
        object.__setattr__(self, "quad", q)

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "QuadOp") -> "QuadOp":
        return QuadOp(
            self.scalar + other.scalar,
            self.linear + other.linear,
            self.quad + other.quad,
        )

    def __sub__(self, other: "QuadOp") -> "QuadOp":
        return QuadOp(
            self.scalar - other.scalar,
            self.linear - other.linear,
            self.quad - other.quad,
        )

    def __mul__(self, c) -> "QuadOp":
        c = complex(c)
        return QuadOp(c * self.scalar, c * self.linear, c * self.quad)

    __rmul__ = __mul__

    def __neg__(self) -> "QuadOp":
        return self * (-1.0)

    def adjoint(self) -> "QuadOp":
        """Hermitian conjugate: quadratures are Hermitian, so conjugate
        the coefficients."""
        return QuadOp(
            np.conj(self.scalar), np.conj(self.linear), np.conj(self.quad)
        )

    # -- queries ---------------------------------------------------------

    def is_linear(self, tol: float = 1e-14) -> bool:
        return bool(np.abs(self.quad).max() <= tol)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return (
            abs(self.scalar.imag) <= tol
            and np.abs(self.linear.imag).max() <= tol
            and np.abs(self.quad.imag).max() <= tol
        )

    def max_abs(self) -> float:
        return max(
            abs(self.scalar), np.abs(self.linear).max(), np.abs(self.quad).max()
        )

    def distance(self, other: "QuadOp") -> float:
        """Largest coefficient-wise difference; zero iff equal operators."""
        return (self - other).max_abs()


def position(oscillator: int) -> QuadOp:
    """x quadrature of oscillator 0 (hot) or 1 (cold)."""
    v = np.zeros(4)
    v[2 * oscillator] = 1.0
    return QuadOp(linear=v)


def momentum(oscillator: int) -> QuadOp:
    v = np.zeros(4)
    v[2 * oscillator + 1] = 1.0
    return QuadOp(linear=v)


def commutator(a: QuadOp, b: QuadOp) -> QuadOp:
    """Exact commutator [a, b]; bilinear, antisymmetric, degree-closed."""
    w = SYMPLECTIC
    scalar = 1j * (a.linear @ w @ b.linear)
    linear = 2j * (a.quad @ w @ b.linear - b.quad @ w @ a.linear)
    quad = 2j * (a.quad @ w @ b.quad - b.quad @ w @ a.quad)
    return QuadOp(scalar, linear, quad)


def multiply_linear(a: QuadOp, b: QuadOp) -> QuadOp:
    """Product of two affine (scalar + linear) operators.

    a b = (1/2){a, b} + (1/2)[a, b]: the symmetrized quadratic plus the
    commutator scalar.
    """
    if not a.is_linear() or not b.is_linear():
        raise ContractError("multiply_linear requires operators with no quadratic part")
    scalar = a.scalar * b.scalar + 0.5j * (a.linear @ SYMPLECTIC @ b.linear)
    linear = a.scalar * b.linear + b.scalar * a.linear
    quad = 0.5 * (np.outer(a.linear, b.linear) + np.outer(b.linear, a.linear))
    return QuadOp(scalar, linear, quad)


def dissipator_pair_action(rate: float, x: QuadOp, y: QuadOp, o: QuadOp) -> QuadOp:
    """Adjoint dissipator contribution of one channel pair on observable o:

        (rate/2) * X†[o, Y]  +  h.c.

    For Y = X this is the standard GKSL form rate*(X†oX - (1/2){X†X, o});
    cross pairs (Y != X) carry the retained opposite-sign-frequency terms.
    Unital by construction: o = identity maps to zero.
    """
    if not x.is_linear() or not y.is_linear():
        raise ContractError("dissipator channels must be linear operators")
    half = (0.5 * rate) * multiply_linear(x.adjoint(), commutator(o, y))
    return half + half.adjoint()


# -- moment basis and generator extraction -------------------------------

#: Second-moment basis ordering; pairs index entries of the symmetric
#: moment matrix S_ij = <(1/2){q_i, q_j}>.
SECOND_MOMENT_PAIRS = (
    (0, 0),
    (1, 1),
    (0, 1),
    (2, 2),
    (3, 3),
    (2, 3),
    (0, 3),
    (1, 2),
    (0, 2),
    (1, 3),
)


def pack_symmetric(s: np.ndarray) -> np.ndarray:
    """Symmetric 4x4 moment matrix -> 10-vector in basis order."""
    return np.array([s[i, j] for i, j in SECOND_MOMENT_PAIRS])


def unpack_symmetric(v: np.ndarray) -> np.ndarray:
    """10-vector -> symmetric 4x4 moment matrix."""
    s = np.zeros((4, 4), dtype=np.asarray(v).dtype)
    for value, (i, j) in zip(v, SECOND_MOMENT_PAIRS):
        s[i, j] = value
        s[j, i] = value
    return s


def quadratic_basis_op(i: int, j: int) -> QuadOp:
    """(1/2){q_i, q_j} as a QuadOp."""
    q = np.zeros((4, 4))
    q[i, j] += 0.5
    q[j, i] += 0.5
    return QuadOp(quad=q)


def local_moment_basis() -> tuple[tuple[str, ...], list[QuadOp]]:
    """The 14 local-quadrature moment observables, first order then second."""
    labels = list(QUADRATURE_LABELS)
    ops = [position(0), momentum(0), position(1), momentum(1)]
    names = {0: "x_h", 1: "p_h", 2: "x_c", 3: "p_c"}
    for i, j in SECOND_MOMENT_PAIRS:
        ops.append(quadratic_basis_op(i, j))
        if i == j:
            labels.append(f"{names[i]}^2")
        elif (i, j) in ((0, 1), (2, 3)):
            labels.append("{%s,%s}/2" % (names[i], names[j]))
        else:
            labels.append(f"{names[i]} {names[j]}")
    return tuple(labels), ops


def basis_from_linear(
    linear_ops: Sequence[QuadOp], labels: Sequence[str]
) -> tuple[tuple[str, ...], list[QuadOp]]:
    """Moment basis generated by four given linear quadrature combinations.

    Used for the normal-mode frame: pass (eta_1, Pi_1, eta_2, Pi_2) as
    QuadOps in local coordinates; second-moment observables are their
    symmetrized products in the standard pair order.
    """
    if len(linear_ops) != 4:
        raise ContractError("need exactly four first-order operators")
    ops = list(linear_ops)
    out_labels = list(labels)
    for i, j in SECOND_MOMENT_PAIRS:
        prod = 0.5 * (
            multiply_linear(linear_ops[i], linear_ops[j])
            + multiply_linear(linear_ops[j], linear_ops[i])
        )
        ops.append(prod)
        if i == j:
            out_labels.append(f"{labels[i]}^2")
        elif (i, j) in ((0, 1), (2, 3)):
            out_labels.append("{%s,%s}/2" % (labels[i], labels[j]))
        else:
            out_labels.append(f"{labels[i]} {labels[j]}")
    return tuple(out_labels), ops


def moment_generator(
    derivatives: Sequence[QuadOp],
    basis: Sequence[QuadOp],
    tol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Expand d(theta_i)/dt over span{1, basis} and return the real blocks.

    Returns (block1, block2, const2): the 4x4 first-moment matrix, the
    10x10 second-moment matrix and its constant vector. Raises
    ConsistencyError if a derivative is not representable in the span,
    if any coefficient has an imaginary part above `tol`, or if the
    14x14 assembly is not block diagonal.
    """
    if len(derivatives) != 14 or len(basis) != 14:
        raise ContractError("expected a 14-element basis and matching derivatives")

    lin_cols = np.stack([op.linear for op in basis[:4]], axis=1)
    quad_cols = np.stack([pack_symmetric(op.quad) for op in basis[4:]], axis=1)
    basis_scalars = np.array([op.scalar for op in basis])

    matrix = np.zeros((14, 14), dtype=complex)
    const = np.zeros(14, dtype=complex)
    scale = max(1.0, max(op.max_abs() for op in derivatives))

    for row, dop in enumerate(derivatives):
        alpha = np.linalg.solve(lin_cols, dop.linear)
        beta = np.linalg.solve(quad_cols, pack_symmetric(dop.quad))
        coeffs = np.concatenate([alpha, beta])
        const[row] = dop.scalar - coeffs @ basis_scalars
        matrix[row, :] = coeffs
        # reconstruction residual guards against unrepresentable terms
        recon_lin = lin_cols @ alpha
        recon_quad = quad_cols @ beta
        residual = max(
            np.abs(recon_lin - dop.linear).max(),
            np.abs(recon_quad - pack_symmetric(dop.quad)).max(),
        )
        if residual > tol * scale:
            raise ConsistencyError(
                f"derivative of basis element {row} leaves the moment span "
                f"(residual {residual:g})"
            )

    if max(np.abs(matrix.imag).max(), np.abs(const.imag).max()) > tol * scale:
        raise ConsistencyError("moment generator has non-real coefficients")
    matrix = matrix.real
    const = const.real

    off = max(np.abs(matrix[:4, 4:]).max(), np.abs(matrix[4:, :4]).max())
    if off > tol * scale:
        raise ConsistencyError(
            f"first and second moments do not decouple (coupling {off:g})"
        )
    if np.abs(const[:4]).max() > tol * scale:
        raise ConsistencyError("first-moment block acquired a constant term")

    return matrix[:4, :4].copy(), matrix[4:, 4:].copy(), const[4:].copy()
