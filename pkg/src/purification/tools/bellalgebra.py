"""
Bell-diagonal algebra - state vectors, Pauli label maps and noise tables.

This is a DETERMINISTIC tool. Every function is pure and returns
immutable values from ``purification.schemas``.

Labels follow LABEL_BITS: a Pauli acting on one half of a Bell pair
XORs its (x, z) bits into the pair's label, so the four Pauli label maps
form the group Z_2 x Z_2.
"""

import json
from collections.abc import Sequence
from typing import Union

from purification.schemas import (
    LABEL_BITS,
    BellVector,
    ChannelParams,
    NoiseParams,
    PauliPermutation,
    label_from_bits,
)

NoiseKind = tuple[str, object]


def normalize(raw: Sequence[float]) -> BellVector:
    """
    Scale four nonnegative weights into a BellVector.

    Raises:
        ValueError: If an entry is negative or every entry is zero
    """
    if len(raw) != 4:
        raise ValueError(f"Expected four weights, got {len(raw)}")
    if any(x < 0.0 for x in raw):
        raise ValueError(f"Weights must be nonnegative, got {tuple(raw)}")
    total = float(sum(raw))
    if total <= 0.0:
        raise ValueError("degenerate state")
    a, b, c, d = (float(x) / total for x in raw)
    return BellVector(f=(a, b, c, d))


def channel_initial_vector(ch: Union[ChannelParams, float]) -> BellVector:
    """
    State vector of phi_0 after the depolarizing distribution channel.

    Returns (F_ch, (1-F_ch)/3, (1-F_ch)/3, (1-F_ch)/3).
    """
    f_ch = ch.f_ch if isinstance(ch, ChannelParams) else ChannelParams(f_ch=ch).f_ch
    rest = (1.0 - f_ch) / 3.0
    return BellVector(f=(f_ch, rest, rest, rest))


def pauli_action(i: int) -> PauliPermutation:
    """
    Label permutation P_{s_i} induced by s_i on one half of a Bell pair.

    Example:
        >>> pauli_action(1).perm
        (1, 0, 3, 2)
    """
    if i not in range(4):
        raise ValueError(f"Pauli label must be 0..3, got {i}")
    x, z = LABEL_BITS[i]
    images = [label_from_bits(a ^ x, b ^ z) for a, b in LABEL_BITS]
    return PauliPermutation(perm=(images[0], images[1], images[2], images[3]))


def pauli_group() -> tuple[PauliPermutation, ...]:
    """The four label permutations P_{s_0}..P_{s_3}."""
    return tuple(pauli_action(i) for i in range(4))


# =============================================================================
# Noise tables
# =============================================================================

def _table_from_rows(rows: list[list[float]]) -> tuple:
    return tuple(tuple(float(x) for x in row) for row in rows)


def uniform_noise(p_g: float, p_m: float = 0.0) -> NoiseParams:
    """Gate errors spread equally, p_ij = p_g / 15."""
    if p_g < 0.0:
        raise ValueError(f"p_g must be nonnegative, got {p_g}")
    if p_g >= 1.0:
        raise ValueError(f"p_g must be < 1, got {p_g}")
    rows = [[p_g / 15.0] * 4 for _ in range(4)]
    rows[0][0] = 1.0 - p_g
    return NoiseParams(p=_table_from_rows(rows), p_m=p_m, label=f"uniform:{p_g:g}")


def kay_noise(q: Sequence[float], p_m: float = 0.0) -> NoiseParams:
    """
    Gate errors built from single-qubit weights q_1, q_2, q_3.

    p_i0 = p_0i = q_i and p_ij = q_i q_j for i, j >= 1, with p_00 taking
    the remainder. The family parameter is p_g = q_1 + q_2 + q_3, which is
    what threshold scans refer to; the table's own total error is larger.
    """
    if len(q) != 3:
        raise ValueError(f"kay noise needs three weights q_1..q_3, got {len(q)}")
    if any(x < 0.0 for x in q):
        raise ValueError(f"kay weights must be nonnegative, got {tuple(q)}")
    weights = [0.0, *(float(x) for x in q)]
    rows = [[0.0] * 4 for _ in range(4)]
    for i in range(1, 4):
        rows[i][0] = weights[i]
        rows[0][i] = weights[i]
        for j in range(1, 4):
            rows[i][j] = weights[i] * weights[j]
    total = sum(sum(row) for row in rows)
    if total >= 1.0:
        raise ValueError(f"p_g must be < 1, got {total}")
    rows[0][0] = 1.0 - total
    label = "kay:" + ",".join(f"{x:g}" for x in q)
    return NoiseParams(
        p=_table_from_rows(rows), p_m=p_m, label=label, nominal_p_g=float(sum(q))
    )


def custom_noise(table: Sequence[Sequence[float]], p_m: float = 0.0) -> NoiseParams:
    """
    Arbitrary gate error table.

    The (0, 0) entry may be left at zero, in which case it is filled in
    as 1 - p_g; otherwise the table must already sum to 1.
    """
    rows = [list(map(float, row)) for row in table]
    if len(rows) != 4 or any(len(row) != 4 for row in rows):
        raise ValueError("Custom noise table must be 4x4")
    off = sum(rows[i][j] for i in range(4) for j in range(4) if (i, j) != (0, 0))
    if off >= 1.0:
        raise ValueError(f"p_g must be < 1, got {off}")
    if rows[0][0] == 0.0:
        rows[0][0] = 1.0 - off
    return NoiseParams(p=_table_from_rows(rows), p_m=p_m, label="custom")


def make_noise(kind: NoiseKind, p_m: float = 0.0) -> NoiseParams:
    """
    Build NoiseParams from a (kind, argument) pair.

    Args:
        kind: ("uniform", p_g), ("kay", (q_1, q_2, q_3)) or ("custom", table)
        p_m: Measurement flip probability

    Raises:
        ValueError: For an unknown kind or invalid probabilities
    """
    name, arg = kind
    if name == "uniform":
        return uniform_noise(float(arg), p_m)  # type: ignore[arg-type]
    if name == "kay":
        return kay_noise(arg, p_m)  # type: ignore[arg-type]
    if name == "custom":
        return custom_noise(arg, p_m)  # type: ignore[arg-type]
    raise ValueError(f"Unknown noise kind: {name!r}")


def family_noise(kind: str, p_g: float, p_m: float = 0.0) -> NoiseParams:
    """
    One member of a one-parameter noise family, as used by scans.

    ``uniform`` spreads p_g over the 15 errors, ``kay`` splits it equally
    into q_1 = q_2 = q_3 = p_g / 3.
    """
    if kind == "uniform":
        return uniform_noise(p_g, p_m)
    if kind == "kay":
        return kay_noise((p_g / 3.0,) * 3, p_m)
    raise ValueError(f"Noise kind {kind!r} has no one-parameter family")


def parse_noise_spec(spec: str) -> NoiseKind:
    """
    Parse a command-line noise spec into a ``make_noise`` kind.

    Accepted forms: ``uniform:<p_g>``, ``kay:<q1>,<q2>,<q3>``, ``kay:<p_g>``
    (split equally) and ``custom:<json 4x4 table>``.

    Example:
        >>> parse_noise_spec("uniform:0.02")
        ('uniform', 0.02)
    """
    name, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise ValueError(f"Noise spec {spec!r} has no parameters")
    if name == "uniform":
        return ("uniform", float(arg))
    if name == "kay":
        values = [float(x) for x in arg.split(",")]
        if len(values) == 1:
            return ("kay", (values[0] / 3.0,) * 3)
        if len(values) == 3:
            return ("kay", tuple(values))
        raise ValueError(f"kay spec needs one or three values, got {arg!r}")
    if name == "custom":
        try:
            table = json.loads(arg)
        except json.JSONDecodeError as e:
            raise ValueError(f"Custom noise table is not valid JSON: {e}") from e
        return ("custom", table)
    raise ValueError(f"Unknown noise kind: {name!r}")


def noise_from_spec(spec: str, p_m: float = 0.0, p_g: Union[float, None] = None) -> NoiseParams:
    """
    Resolve a noise spec, optionally completed by a separate p_g.

    A bare kind (``uniform`` or ``kay``) takes its parameter from ``p_g``.
    """
    if ":" not in spec:
        if p_g is None:
            raise ValueError(f"Noise kind {spec!r} needs a p_g value")
        return family_noise(spec, p_g, p_m)
    return make_noise(parse_noise_spec(spec), p_m)
